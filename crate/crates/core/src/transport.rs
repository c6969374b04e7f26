//! Quadratic optimal transport on the circle: distances from lifted quantile
//! functions, monotone maps, displacement geodesics and the transport
//! inequalities relating distance, free entropy and free information.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gas::{self, AngleEnsemble, CircleDensity};
use crate::quad;
use crate::spectral::FourierField;

const TWO_PI: f64 = 2.0 * PI;

/// Nodes of the Lagrangian and Eulerian grids.
pub const GRID: usize = 2048;

/// Coarse points on `[-1, 1]` used to bracket the optimal level shift.
const SHIFT_SCAN: usize = 16;

/// Ground cost on the circle, written in terms of a lifted displacement `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Cost {
    /// `d²`.
    Arc,
    /// `(1/2)|e^{iθ} - e^{iφ}|² = 1 - cos d`.
    Chordal,
}

impl Cost {
    fn value(self, d: f64) -> f64 {
        match self {
            Cost::Arc => d * d,
            Cost::Chordal => 1.0 - d.cos(),
        }
    }

    fn slope(self, d: f64) -> f64 {
        match self {
            Cost::Arc => 2.0 * d,
            Cost::Chordal => d.sin(),
        }
    }
}

/// Cumulative distribution `F(x) = ∫_0^x ρ` from the Fourier coefficients,
/// valid for all real `x` with `F(x + 2π) = F(x) + 1`.
pub fn cdf(rho: &CircleDensity, x: f64) -> f64 {
    let f = rho.field();
    let mut s = f.coeff(0).re * x;
    for m in 1..=f.cutoff() {
        let c = f.coeff(m as i64);
        let mf = m as f64;
        // 2 Re[c (e^{imx} - 1)/(im)]
        s += 2.0 * (c.re * (mf * x).sin() + c.im * ((mf * x).cos() - 1.0)) / mf;
    }
    s
}

/// Lifted quantile: the `x` with `F(x) = t`, for any real `t`.
pub fn quantile(rho: &CircleDensity, t: f64) -> f64 {
    let k = t.floor();
    let s = t - k;
    quad::increasing_root(|x| cdf(rho, x) - s, |x| rho.eval(x), 0.0, TWO_PI, TWO_PI * s, 1e-15) + TWO_PI * k
}

/// Domain error unless `ρ` is nonnegative with at most isolated zeros: it may
/// touch zero but not vanish on an arc of the grid.
pub fn check_positive(rho: &CircleDensity) -> Result<()> {
    let v = rho.values();
    let n = v.len();
    let zero = |i: usize| v[i % n] <= 1e-12;
    if (0..n).any(|i| zero(i) && zero(i + 1) && zero(i + 2)) {
        return Err(Error::Domain("density vanishes on an arc and is not bounded below".into()));
    }
    Ok(())
}

/// A probability measure on the circle: a density or an equal-weight
/// ensemble of atoms.
#[derive(Debug, Clone)]
pub enum Measure {
    Density(CircleDensity),
    Atoms(AngleEnsemble),
}

impl Measure {
    /// Lifted quantile.
    fn quantile(&self, t: f64) -> f64 {
        match self {
            Measure::Density(d) => quantile(d, t),
            Measure::Atoms(e) => {
                let a = e.angles();
                let k = t.floor();
                let j = (((t - k) * a.len() as f64).floor() as usize).min(a.len() - 1);
                a[j] + TWO_PI * k
            }
        }
    }

    /// Jump locations in `[0, 1)` of the quantile.
    fn breaks(&self) -> Vec<f64> {
        match self {
            Measure::Density(_) => Vec::new(),
            Measure::Atoms(e) => (0..e.n()).map(|j| j as f64 / e.n() as f64).collect(),
        }
    }
}

/// `∫_0^1 c(Q_μ(t) - Q_ν(t + α)) dt`.
fn shifted_cost(mu: &Measure, nu: &Measure, alpha: f64, cost: Cost) -> f64 {
    match (mu, nu) {
        (Measure::Density(a), Measure::Density(_)) => {
            // with t = F_μ(x) the integrand has a single quantile
            quad::integrate(|x| cost.value(x - nu.quantile(cdf(a, x) + alpha)) * a.eval(x), 0.0, TWO_PI, 1e-13)
        }
        (Measure::Atoms(_), Measure::Density(_)) => shifted_cost(nu, mu, -alpha, cost),
        (Measure::Density(a), Measure::Atoms(_)) => {
            // Q_ν(t + α) is constant between its jumps; integrate in x = Q_μ(t)
            let mut c = 0.0;
            for (lo, hi) in pieces(nu, alpha) {
                let b = nu.quantile(0.5 * (lo + hi) + alpha);
                let (xa, xb) = (quantile(a, lo), quantile(a, hi));
                c += quad::integrate(|x| cost.value(x - b) * a.eval(x), xa, xb, 1e-14);
            }
            c
        }
        (Measure::Atoms(_), Measure::Atoms(_)) => {
            let mut cuts: Vec<f64> = mu.breaks();
            cuts.extend(pieces(nu, alpha).into_iter().map(|p| p.0));
            cuts.push(1.0);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            cuts.windows(2)
                .map(|w| {
                    let m = 0.5 * (w[0] + w[1]);
                    (w[1] - w[0]) * cost.value(mu.quantile(m) - nu.quantile(m + alpha))
                })
                .sum()
        }
    }
}

/// Subintervals of `[0, 1]` on which `t ↦ Q_ν(t + α)` is constant.
fn pieces(nu: &Measure, alpha: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![0.0, 1.0];
    cuts.extend(nu.breaks().into_iter().map(|b| (b - alpha).rem_euclid(1.0)));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect()
}

/// `d/dα` of [`shifted_cost`] for two densities, written with `x = Q_ν(t + α)`
/// so that no derivative of a quantile appears:
/// `-∫_0^{2π} c′(Q_μ(F_ν(x) - α) - x) dx`.
fn shifted_cost_slope(mu: &CircleDensity, nu: &CircleDensity, alpha: f64, cost: Cost) -> f64 {
    -quad::integrate(|x| cost.slope(quantile(mu, cdf(nu, x) - alpha) - x), 0.0, TWO_PI, 1e-12)
}

/// Optimal level shift and squared distance.
fn optimal_shift(mu: &Measure, nu: &Measure, cost: Cost) -> (f64, f64) {
    match (mu, nu) {
        (Measure::Atoms(a), Measure::Atoms(b)) if a.n() * b.n() <= 250_000 => {
            // the cost is piecewise linear in α with kinks where jumps meet
            let mut best = (0.0, f64::INFINITY);
            for j in 0..a.n() {
                for k in 0..b.n() {
                    for w in [-1.0, 0.0] {
                        let al = k as f64 / b.n() as f64 - j as f64 / a.n() as f64 + w;
                        if !(-1.0..=1.0).contains(&al) {
                            continue;
                        }
                        let c = shifted_cost(mu, nu, al, cost);
                        if c < best.1 {
                            best = (al, c);
                        }
                    }
                }
            }
            best
        }
        (Measure::Density(a), Measure::Density(b)) => {
            // the chordal cost is periodic in α, so every minimum of the slope
            // scan is bisected and the best one kept
            let d = |al: f64| shifted_cost_slope(a, b, al, cost);
            let grid: Vec<f64> = (0..=SHIFT_SCAN).map(|i| -1.0 + 2.0 * i as f64 / SHIFT_SCAN as f64).collect();
            let slopes: Vec<f64> = grid.iter().map(|&al| d(al)).collect();
            let mut cands = vec![-1.0, 1.0];
            for i in 0..SHIFT_SCAN {
                if slopes[i] <= 0.0 && slopes[i + 1] >= 0.0 {
                    cands.push(quad::bisect(d, grid[i], grid[i + 1], 1e-15));
                }
            }
            cands
                .into_iter()
                .map(|al| (al, shifted_cost(mu, nu, al, cost)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("candidates are nonempty")
        }
        _ => {
            let f = |al: f64| shifted_cost(mu, nu, al, cost);
            let h = 2.0 / SHIFT_SCAN as f64;
            let c = (0..=SHIFT_SCAN)
                .map(|i| -1.0 + h * i as f64)
                .map(|al| (al, f(al)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("scan is nonempty")
                .0;
            quad::golden_min(f, (c - h).max(-1.0), (c + h).min(1.0), 1e-12)
        }
    }
}

/// Optimal squared cost and the level shift `α` realising it.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Transport {
    pub cost: f64,
    pub alpha: f64,
}

/// `W₂²` with the lifted-quantile formula
/// `inf_α ∫_0^1 c(Q_μ(t) - Q_ν(t + α)) dt`. At `α = 0` with the arc cost this
/// is the line formula `∫_0^1 |Q_μ - Q_ν|²`.
pub fn transport_cost(mu: &Measure, nu: &Measure, cost: Cost) -> Result<Transport> {
    for m in [mu, nu] {
        if let Measure::Density(d) = m {
            check_positive(d)?;
        }
    }
    let (alpha, c) = optimal_shift(mu, nu, cost);
    Ok(Transport { cost: c.max(0.0), alpha })
}

/// `W₂(μ, ν)` for the arc-length cost.
pub fn w2_circle(mu: &Measure, nu: &Measure) -> Result<f64> {
    Ok(transport_cost(mu, nu, Cost::Arc)?.cost.sqrt())
}

pub fn w2_densities(mu: &CircleDensity, nu: &CircleDensity) -> Result<f64> {
    w2_circle(&Measure::Density(mu.clone()), &Measure::Density(nu.clone()))
}

/// Monotone map `φ₁(x) = Q₁(F₀(x) + α)` pushing `ρ₀` to `ρ₁`, with `α` the
/// optimal level shift; `α = 0` gives `∫_0^{φ₁(x)} ρ₁ = ∫_0^x ρ₀`.
#[derive(Debug, Clone)]
pub struct MonotoneMap {
    pub rho0: CircleDensity,
    pub rho1: CircleDensity,
    pub alpha: f64,
}

impl MonotoneMap {
    pub fn eval(&self, x: f64) -> f64 {
        quantile(&self.rho1, cdf(&self.rho0, x) + self.alpha)
    }

    /// `φ₁′(x) = ρ₀(x)/ρ₁(φ₁(x))`.
    pub fn derivative(&self, x: f64) -> f64 {
        self.rho0.eval(x) / self.rho1.eval(self.eval(x))
    }
}

pub fn monotone_map(rho0: &CircleDensity, rho1: &CircleDensity) -> Result<MonotoneMap> {
    let t = transport_cost(&Measure::Density(rho0.clone()), &Measure::Density(rho1.clone()), Cost::Arc)?;
    Ok(MonotoneMap { rho0: rho0.clone(), rho1: rho1.clone(), alpha: t.alpha })
}

/// Map with a prescribed level shift.
pub fn monotone_map_with_shift(rho0: &CircleDensity, rho1: &CircleDensity, alpha: f64) -> Result<MonotoneMap> {
    check_positive(rho0)?;
    check_positive(rho1)?;
    Ok(MonotoneMap { rho0: rho0.clone(), rho1: rho1.clone(), alpha })
}

/// Displacement interpolation `φ_t = (1-t)id + tφ₁`, `ρ̂_t = φ_t♯ρ₀`, with
/// Lagrangian velocity `v = φ₁ - id`.
#[derive(Debug, Clone)]
pub struct TransportPath {
    pub map: MonotoneMap,
    pub times: Vec<f64>,
    pub densities: Vec<CircleDensity>,
    /// `φ_t` on the Lagrangian grid `x_k = 2πk/GRID`.
    pub maps: Vec<Vec<f64>>,
    /// `φ₁(x_k) - x_k`.
    pub velocity: Vec<f64>,
}

impl TransportPath {
    /// Point `x` with `φ_t(x) = y`.
    pub fn inverse(&self, t: f64, y: f64) -> f64 {
        // φ_t - id is periodic and bounded by π in modulus
        quad::increasing_root(
            |x| (1.0 - t) * x + t * self.map.eval(x) - y,
            |x| 1.0 - t + t * self.map.derivative(x),
            y - PI - 1e-9,
            y + PI + 1e-9,
            y - t * (self.map.eval(y) - y),
            1e-14,
        )
    }

    /// `ρ̂_t(y) = ρ₀(x)/φ_t′(x)` at `y = φ_t(x)`.
    pub fn density_at(&self, t: f64, y: f64) -> f64 {
        let x = self.inverse(t, y);
        self.map.rho0.eval(x) / (1.0 - t + t * self.map.derivative(x))
    }

    /// Eulerian velocity `v(φ_t^{-1}(y))`.
    pub fn velocity_at(&self, t: f64, y: f64) -> f64 {
        let x = self.inverse(t, y);
        self.map.eval(x) - x
    }

    /// `∫_0^1 ∫ v² ρ̂_t dy dt` by adaptive quadrature in `y` and
    /// Gauss-Legendre in time.
    pub fn kinetic_action(&self, nodes: usize) -> f64 {
        let (tx, tw) = quad::gauss_legendre(nodes);
        tx.iter()
            .zip(&tw)
            .map(|(&x, &w)| {
                let t = 0.5 * (x + 1.0);
                let s = quad::integrate(
                    |y| {
                        let xi = self.inverse(t, y);
                        let v = self.map.eval(xi) - xi;
                        v * v * self.map.rho0.eval(xi) / (1.0 - t + t * self.map.derivative(xi))
                    },
                    0.0,
                    TWO_PI,
                    1e-11,
                );
                0.5 * w * s
            })
            .sum()
    }

    /// `max_f |d/dt ∫ f ρ̂_t - ∫ f′ v ρ̂_t|` over test functions `cos jy`,
    /// `sin jy`, `j ≤ 3`, with the time derivative by finite differences.
    pub fn continuity_residual(&self) -> f64 {
        let dt = 1e-3;
        let mut worst: f64 = 0.0;
        for j in 1..=3 {
            let jf = j as f64;
            for phase in [0.0, PI / 2.0] {
                let mass = |s: f64| {
                    quad::integrate(|y| (jf * y + phase).cos() * self.density_at(s, y), 0.0, TWO_PI, 1e-12)
                };
                for &t in &self.times {
                    // fourth-order stencils, one-sided at the ends of [0, 1]
                    let (offsets, weights): (&[f64], &[f64]) = if t < 2.0 * dt {
                        (&[0.0, 1.0, 2.0, 3.0, 4.0], &[-25.0, 48.0, -36.0, 16.0, -3.0])
                    } else if t > 1.0 - 2.0 * dt {
                        (&[0.0, -1.0, -2.0, -3.0, -4.0], &[25.0, -48.0, 36.0, -16.0, 3.0])
                    } else {
                        (&[-2.0, -1.0, 1.0, 2.0], &[1.0, -8.0, 8.0, -1.0])
                    };
                    let lhs: f64 =
                        offsets.iter().zip(weights).map(|(o, w)| w * mass(t + o * dt)).sum::<f64>() / (12.0 * dt);
                    let rhs = quad::integrate(
                        |y| -jf * (jf * y + phase).sin() * self.velocity_at(t, y) * self.density_at(t, y),
                        0.0,
                        TWO_PI,
                        1e-12,
                    );
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
        worst
    }
}

pub fn displacement_geodesic(rho0: &CircleDensity, rho1: &CircleDensity, steps: usize) -> Result<TransportPath> {
    let map = monotone_map(rho0, rho1)?;
    geodesic_from_map(map, steps)
}

pub fn geodesic_from_map(map: MonotoneMap, steps: usize) -> Result<TransportPath> {
    if steps == 0 {
        return Err(Error::Config("need at least one step".into()));
    }
    let xs: Vec<f64> = (0..GRID).map(|k| TWO_PI * k as f64 / GRID as f64).collect();
    let phi1: Vec<f64> = xs.iter().map(|&x| map.eval(x)).collect();
    let velocity: Vec<f64> = phi1.iter().zip(&xs).map(|(p, x)| p - x).collect();
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    let mut path = TransportPath { map, times: times.clone(), densities: Vec::new(), maps: Vec::new(), velocity };
    for &t in &times {
        path.maps.push(xs.iter().zip(&phi1).map(|(x, p)| (1.0 - t) * x + t * p).collect());
        let d = if t == 0.0 {
            path.map.rho0.clone()
        } else if t == 1.0 {
            path.map.rho1.clone()
        } else {
            let vals: Vec<f64> = xs.iter().map(|&y| path.density_at(t, y)).collect();
            CircleDensity::from_grid_values(&vals)?
        };
        path.densities.push(d);
    }
    Ok(path)
}

/// `U(ρ) = (2π²/3)∫ρ³`.
pub fn internal_energy_values(values: &[f64]) -> f64 {
    2.0 * PI * PI / 3.0 * values.iter().map(|r| r * r * r).sum::<f64>() * TWO_PI / values.len() as f64
}

/// `K = (1/2)∫ρv² + U(ρ)` along the path at time `t`, on the Eulerian grid.
pub fn path_hamiltonian(path: &TransportPath, t: f64) -> f64 {
    let n = 1024;
    let h = TWO_PI / n as f64;
    let (mut kin, mut rho) = (0.0, Vec::with_capacity(n));
    for k in 0..n {
        let y = h * k as f64;
        let x = path.inverse(t, y);
        let r = path.map.rho0.eval(x) / (1.0 - t + t * path.map.derivative(x));
        let v = path.map.eval(x) - x;
        kin += 0.5 * r * v * v * h;
        rho.push(r);
    }
    kin + internal_energy_values(&rho)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MeanHamiltonianReport {
    pub mean_hamiltonian: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `∫_0^1 K(ρ̂_t) dt ≤ (1/2)W₂² + (1/2)(U(ρ₀) + U(ρ₁))`.
pub fn mean_hamiltonian_check(path: &TransportPath) -> MeanHamiltonianReport {
    let (tx, tw) = quad::gauss_legendre(12);
    let mean: f64 = tx.iter().zip(&tw).map(|(x, w)| 0.5 * w * path_hamiltonian(path, 0.5 * (x + 1.0))).sum();
    let w2 = lagrangian_cost(&path.map);
    let u0 = internal_energy_values(&path.map.rho0.field().values_on(1024));
    let u1 = internal_energy_values(&path.map.rho1.field().values_on(1024));
    let bound = 0.5 * w2 + 0.5 * (u0 + u1);
    MeanHamiltonianReport { mean_hamiltonian: mean, bound, holds: mean <= bound + 1e-12 }
}

/// `∫ (φ₁(x) - x)² ρ₀(x) dx`.
pub fn lagrangian_cost(map: &MonotoneMap) -> f64 {
    quad::integrate(|x| (map.eval(x) - x).powi(2) * map.rho0.eval(x), 0.0, TWO_PI, 1e-13)
}

/// `κ₁ = 1/2 + min Q″`, the curvature margin in `Q″ ≥ κ₁ - 1/2`.
pub fn curvature_margin(q: &FourierField) -> f64 {
    let d2 = crate::spectral::derivative(&crate::spectral::derivative(q));
    0.5 + d2.values_on(4096.max(8 * q.cutoff())).into_iter().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct FreeTransportReport {
    pub kappa1: f64,
    /// `W₂(ω, ρ₀)²` for the chordal cost.
    pub w2_sq: f64,
    /// The same for the arc cost, for reference.
    pub w2_sq_arc: f64,
    pub free_entropy: f64,
    /// `(2/(1 - 2κ₁)) Σ̃_Q(ω)`.
    pub bound: f64,
    pub holds: bool,
    pub warnings: Vec<String>,
}

/// `W₂(ω, ρ₀)² ≤ (2/(1 - 2κ₁)) Σ̃_Q(ω)` with the chordal cost.
pub fn free_transport_check(omega: &CircleDensity, q: &FourierField) -> Result<FreeTransportReport> {
    let kappa1 = curvature_margin(q);
    if kappa1 >= 0.5 {
        return Err(Error::Domain(format!("curvature margin κ₁ = {kappa1} ≥ 1/2 leaves the constant undefined")));
    }
    let mut warnings = Vec::new();
    if kappa1 <= 0.0 {
        warnings.push(format!("curvature margin κ₁ = {kappa1:.3e} is not positive"));
    }
    let rho0 = gas::equilibrium_density(q)?;
    let (a, b) = (Measure::Density(omega.clone()), Measure::Density(rho0.clone()));
    let w2_sq = transport_cost(&a, &b, Cost::Chordal)?.cost;
    let w2_sq_arc = transport_cost(&a, &b, Cost::Arc)?.cost;
    let free_entropy = gas::free_entropy(omega, &rho0)?.fourier;
    let bound = 2.0 / (1.0 - 2.0 * kappa1) * free_entropy;
    Ok(FreeTransportReport { kappa1, w2_sq, w2_sq_arc, free_entropy, bound, holds: w2_sq <= bound + 1e-12, warnings })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HwiReport {
    pub free_entropy: f64,
    pub w2: f64,
    /// `∫_0^1 I_F(ρ̂_t | ρ₀) dt`.
    pub information: f64,
    /// `W₂ (∫ I_F)^{1/2}`.
    pub bound: f64,
    pub holds: bool,
}

/// `Σ(ρ₁|ρ₀) ≤ W₂(ρ₁, ρ₀) (∫_0^1 I_F(ρ̂_t|ρ₀) dt)^{1/2}` along the geodesic
/// from `ρ₀` to `ρ₁`.
pub fn hwi_converse_check(rho0: &CircleDensity, rho1: &CircleDensity) -> Result<HwiReport> {
    let free_entropy = gas::free_entropy(rho1, rho0)?.fourier;
    let map = monotone_map(rho0, rho1)?;
    let w2 = lagrangian_cost(&map).sqrt();
    if w2 == 0.0 {
        return Ok(HwiReport { free_entropy, w2, information: 0.0, bound: 0.0, holds: free_entropy <= 1e-15 });
    }
    let path = geodesic_from_map(map, 1)?;
    let (tx, tw) = quad::gauss_legendre(10);
    let mut information = 0.0;
    let xs: Vec<f64> = (0..GRID).map(|k| TWO_PI * k as f64 / GRID as f64).collect();
    for (x, w) in tx.iter().zip(&tw) {
        let t = 0.5 * (x + 1.0);
        let vals: Vec<f64> = xs.iter().map(|&y| path.density_at(t, y)).collect();
        let rt = CircleDensity::from_grid_values(&vals)?;
        information += 0.5 * w * gas::free_information(&rt, rho0)?;
    }
    let bound = w2 * information.sqrt();
    Ok(HwiReport { free_entropy, w2, information, bound, holds: free_entropy <= bound + 1e-12 })
}

/// Poisson smoothing of an ensemble: `P_r ∗ ω` as a density.
pub fn smoothed_ensemble(e: &AngleEnsemble, r: f64, m: usize) -> Result<CircleDensity> {
    CircleDensity::from_ensembles(std::slice::from_ref(e), r, m)
}
