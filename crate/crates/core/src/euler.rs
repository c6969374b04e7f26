//! Isentropic Euler dynamics of a gas on the circle: the spectral solver,
//! Riemann invariants, internal energy and displacement convexity, the
//! variational backward-Euler step, entropy production and the cosec² limit of
//! the pole interaction.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gas::{self, CircleDensity};
use crate::quad;
use crate::soliton;
use crate::spectral::{self, FourierField};
use crate::transport::{self, Cost, Measure};

const TWO_PI: f64 = 2.0 * PI;

/// Adiabatic index of the one-degree-of-freedom gas.
pub const GAMMA: f64 = 3.0;
/// Pressure constant paired with [`GAMMA`].
pub const KAPPA_U: f64 = 4.0 * PI * PI;

/// Density and velocity on the uniform grid `x_k = 2πk/N`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GasState {
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub gamma: f64,
    pub kappa_u: f64,
}

impl GasState {
    pub fn new(rho: Vec<f64>, v: Vec<f64>, gamma: f64, kappa_u: f64) -> Result<Self> {
        let n = rho.len();
        if n < 8 || n % 2 != 0 {
            return Err(Error::Config(format!("grid size {n} must be even and at least 8")));
        }
        if v.len() != n {
            return Err(Error::Config("density and velocity grids differ in length".into()));
        }
        if !(gamma > 1.0) || !kappa_u.is_finite() {
            return Err(Error::Config(format!("need γ > 1 and finite κ_U, got {gamma}, {kappa_u}")));
        }
        if rho.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::Domain("density must be nonnegative".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("velocity must be finite".into()));
        }
        let s = Self { rho, v, gamma, kappa_u };
        let mass = s.mass();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("density has mass {mass}")));
        }
        Ok(s)
    }

    /// Samples `ρ` (rescaled to unit mass) and `v` with `γ = 3`, `κ_U = 4π²`.
    pub fn from_fns<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(n: usize, rho: F, v: G) -> Result<Self> {
        Self::from_fns_with(n, rho, v, GAMMA, KAPPA_U)
    }

    pub fn from_fns_with<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(
        n: usize,
        rho: F,
        v: G,
        gamma: f64,
        kappa_u: f64,
    ) -> Result<Self> {
        let xs = spectral::grid_points(n);
        let r: Vec<f64> = xs.iter().map(|&x| rho(x)).collect();
        let mass = r.iter().sum::<f64>() * TWO_PI / n as f64;
        if !(mass > 0.0) {
            return Err(Error::Domain("density has no mass".into()));
        }
        Self::new(r.iter().map(|x| x / mass).collect(), xs.iter().map(|&x| v(x)).collect(), gamma, kappa_u)
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn grid(&self) -> Vec<f64> {
        spectral::grid_points(self.len())
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * TWO_PI / self.len() as f64
    }

    /// `K = (1/2)∫ρv² + (κ_U/(γ(γ-1)))∫ρ^γ`.
    pub fn energy(&self) -> f64 {
        let h = TWO_PI / self.len() as f64;
        let a = self.kappa_u / (self.gamma * (self.gamma - 1.0));
        self.rho.iter().zip(&self.v).map(|(r, v)| 0.5 * r * v * v + a * pow(*r, self.gamma)).sum::<f64>() * h
    }

    pub fn density(&self) -> Result<CircleDensity> {
        CircleDensity::from_grid_values(&self.rho)
    }

    /// Keeps the Fourier modes `|k| ≤ N/3`.
    pub fn filtered(&self) -> Self {
        let m = self.len() / 3;
        Self {
            rho: filter(&self.rho, m),
            v: filter(&self.v, m),
            gamma: self.gamma,
            kappa_u: self.kappa_u,
        }
    }
}

fn pow(r: f64, e: f64) -> f64 {
    if e == 2.0 {
        r * r
    } else if e == 3.0 {
        r * r * r
    } else {
        r.max(0.0).powf(e)
    }
}

fn field_of(values: &[f64]) -> FourierField {
    FourierField::from_grid(values, values.len() / 2 - 1).expect("grid has at least 8 points")
}

fn filter(values: &[f64], m: usize) -> Vec<f64> {
    field_of(values).with_cutoff(m).values_on(values.len())
}

/// Spectral derivative keeping modes `|k| ≤ m`.
fn ddx(values: &[f64], m: usize) -> Vec<f64> {
    spectral::derivative(&field_of(values).with_cutoff(m)).values_on(values.len())
}

/// `(∂_t ρ, ∂_t v)` from the flux form `ρ_t + (ρv)_x = 0`,
/// `v_t + (v²/2 + κ_U ρ^{γ-1}/(γ-1))_x = 0`, which equals the quasilinear
/// system with matrix `[v ρ; κ_U ρ^{γ-2} v]` on smooth states. Products are
/// dealiased by the two-thirds rule.
pub fn euler_rhs(s: &GasState) -> Result<(Vec<f64>, Vec<f64>)> {
    if s.gamma < 2.0 && s.rho.iter().any(|r| *r <= 0.0) {
        return Err(Error::Singularity("density touches zero and the pressure term is singular".into()));
    }
    let m = s.len() / 3;
    let g1 = s.gamma - 1.0;
    let flux_rho: Vec<f64> = s.rho.iter().zip(&s.v).map(|(r, v)| r * v).collect();
    let flux_v: Vec<f64> =
        s.rho.iter().zip(&s.v).map(|(r, v)| 0.5 * v * v + s.kappa_u * pow(*r, g1) / g1).collect();
    let drho = ddx(&flux_rho, m).into_iter().map(|x| -x).collect();
    let dv = ddx(&flux_v, m).into_iter().map(|x| -x).collect();
    Ok((drho, dv))
}

/// `r± = v ∓ (2√κ_U/(γ-1)) ρ^{(γ-1)/2}`.
pub fn riemann_invariants(s: &GasState) -> (Vec<f64>, Vec<f64>) {
    let c = 2.0 * s.kappa_u.sqrt() / (s.gamma - 1.0);
    let e = 0.5 * (s.gamma - 1.0);
    let w: Vec<f64> = s.rho.iter().map(|r| c * r.max(0.0).powf(e)).collect();
    let plus = s.v.iter().zip(&w).map(|(v, w)| v - w).collect();
    let minus = s.v.iter().zip(&w).map(|(v, w)| v + w).collect();
    (plus, minus)
}

/// Inverse of [`riemann_invariants`]: `(ρ, v)` from `(r₊, r₋)`.
pub fn riemann_inverse(plus: &[f64], minus: &[f64], gamma: f64, kappa_u: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if plus.len() != minus.len() {
        return Err(Error::Config("invariant grids differ in length".into()));
    }
    let c = 2.0 * kappa_u.sqrt() / (gamma - 1.0);
    let e = 2.0 / (gamma - 1.0);
    let mut rho = Vec::with_capacity(plus.len());
    let mut v = Vec::with_capacity(plus.len());
    for (p, m) in plus.iter().zip(minus) {
        let w = 0.5 * (m - p);
        if w < 0.0 {
            return Err(Error::Domain("r₋ < r₊ gives negative density".into()));
        }
        rho.push(if gamma == 3.0 { w / c } else { (w / c).powf(e) });
        v.push(0.5 * (p + m));
    }
    Ok((rho, v))
}

/// Characteristic speeds carrying `r₊` and `r₋` at a point.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Pairing {
    pub plus_speed: f64,
    pub minus_speed: f64,
}

/// Pairs each invariant with the eigenvalue whose left eigenvector of
/// `[v ρ; κ_U ρ^{γ-2} v]` is parallel to the invariant's gradient.
pub fn characteristic_pairing(rho: f64, v: f64, gamma: f64, kappa_u: f64) -> Result<Pairing> {
    if !(rho > 0.0) {
        return Err(Error::Domain("pairing needs positive density".into()));
    }
    let a = Matrix2::new(v, rho, kappa_u * rho.powf(gamma - 2.0), v);
    let (tr, det) = (a.trace(), a.determinant());
    let disc = 0.25 * tr * tr - det;
    if disc <= 0.0 {
        return Err(Error::Domain("system is not strictly hyperbolic".into()));
    }
    let lambdas = [0.5 * tr - disc.sqrt(), 0.5 * tr + disc.sqrt()];
    let left = |l: f64| -> Vector2<f64> {
        let m = a.transpose() - Matrix2::identity() * l;
        let (r0, r1) = (m.row(0), m.row(1));
        let r = if r0.norm() >= r1.norm() { r0 } else { r1 };
        Vector2::new(r[1], -r[0]).normalize()
    };
    let c = kappa_u.sqrt() * rho.powf(0.5 * (gamma - 3.0));
    let grad_plus = Vector2::new(-c, 1.0).normalize();
    let grad_minus = Vector2::new(c, 1.0).normalize();
    let cross = |x: Vector2<f64>, y: Vector2<f64>| (x[0] * y[1] - x[1] * y[0]).abs();
    let (l0, l1) = (left(lambdas[0]), left(lambdas[1]));
    let plus_speed = if cross(l0, grad_plus) < cross(l1, grad_plus) { lambdas[0] } else { lambdas[1] };
    let minus_speed = if cross(l0, grad_minus) < cross(l1, grad_minus) { lambdas[0] } else { lambdas[1] };
    Ok(Pairing { plus_speed, minus_speed })
}

/// Speeds carrying `r₊` and `r₋` on the grid.
pub fn characteristic_speeds(s: &GasState) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut plus = Vec::with_capacity(s.len());
    let mut minus = Vec::with_capacity(s.len());
    for (r, v) in s.rho.iter().zip(&s.v) {
        let p = characteristic_pairing(*r, *v, s.gamma, s.kappa_u)?;
        plus.push(p.plus_speed);
        minus.push(p.minus_speed);
    }
    Ok((plus, minus))
}

/// Time until characteristics of one family first cross if every speed were
/// frozen: `1/max(-∂_x λ)`. For `γ = 3` each invariant solves the inviscid
/// Burgers equation and this is the exact remaining time to breaking.
pub fn crossing_horizon(s: &GasState) -> Result<f64> {
    let (plus, minus) = characteristic_speeds(s)?;
    let m = s.len() / 3;
    let worst = ddx(&plus, m).into_iter().chain(ddx(&minus, m)).fold(0.0, |a: f64, b| a.max(-b));
    Ok(if worst > 0.0 { 1.0 / worst } else { f64::INFINITY })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    /// Fourier collocation with classical RK4 in time.
    Spectral,
    /// Repeated [`variational_step`]s regridded to the Eulerian grid.
    Variational,
}

#[derive(Debug, Clone, Copy)]
pub struct EulerOptions {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub save_every: usize,
    /// Truncate when the fraction of spectral energy in the upper half of the
    /// retained modes exceeds this.
    pub tail_tol: f64,
}

impl EulerOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self { dt, t_end, scheme: Scheme::Spectral, save_every: 1, tail_tol: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct EulerTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<GasState>,
    pub energies: Vec<f64>,
    /// Set when the run stopped early at a detected characteristic crossing.
    pub diagnostic: Option<String>,
}

fn tail_fraction(values: &[f64]) -> f64 {
    let f = field_of(values);
    let m = values.len() / 3;
    let (mut tail, mut total) = (0.0, 0.0);
    for k in 1..=m.min(f.cutoff()) {
        let e = f.coeff(k as i64).norm_sqr();
        total += e;
        if k > m / 2 {
            tail += e;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

fn rk4_step(s: &GasState, dt: f64) -> Result<GasState> {
    let at = |r: Vec<f64>, v: Vec<f64>| GasState { rho: r, v, gamma: s.gamma, kappa_u: s.kappa_u };
    let (k1r, k1v) = euler_rhs(s)?;
    let (k2r, k2v) = euler_rhs(&at(axpy(&s.rho, 0.5 * dt, &k1r), axpy(&s.v, 0.5 * dt, &k1v)))?;
    let (k3r, k3v) = euler_rhs(&at(axpy(&s.rho, 0.5 * dt, &k2r), axpy(&s.v, 0.5 * dt, &k2v)))?;
    let (k4r, k4v) = euler_rhs(&at(axpy(&s.rho, dt, &k3r), axpy(&s.v, dt, &k3v)))?;
    let comb = |y: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..y.len()).map(|i| y[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i])).collect()
    };
    Ok(at(comb(&s.rho, &k1r, &k2r, &k3r, &k4r), comb(&s.v, &k1v, &k2v, &k3v, &k4v)))
}

/// Evolves a smooth state until `t_end` or until a characteristic crossing is
/// detected, in which case the trajectory is truncated and `diagnostic` says
/// why. The spectral scheme starts from the two-thirds filtered state.
pub fn evolve_euler(s0: &GasState, opts: &EulerOptions) -> Result<EulerTrajectory> {
    if !(opts.dt > 0.0) || !(opts.t_end >= 0.0) || opts.save_every == 0 {
        return Err(Error::Config("need dt > 0, t_end ≥ 0 and save_every ≥ 1".into()));
    }
    let steps = (opts.t_end / opts.dt).round() as usize;
    if (steps as f64 * opts.dt - opts.t_end).abs() > 1e-9 * opts.t_end.max(1.0) {
        return Err(Error::Config("t_end must be a multiple of dt".into()));
    }
    let mut s = match opts.scheme {
        Scheme::Spectral => s0.filtered(),
        Scheme::Variational => s0.clone(),
    };
    let mut traj = EulerTrajectory { times: vec![0.0], energies: vec![s.energy()], states: vec![s.clone()], diagnostic: None };
    for i in 1..=steps {
        let t = i as f64 * opts.dt;
        s = match opts.scheme {
            Scheme::Spectral => rk4_step(&s, opts.dt)?,
            Scheme::Variational => variational_step(&s, opts.dt)?.state,
        };
        if s.rho.iter().chain(&s.v).any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("non-finite state at t = {t}")));
        }
        let horizon = crossing_horizon(&s).unwrap_or(0.0);
        let tail = if opts.scheme == Scheme::Spectral { tail_fraction(&s.rho).max(tail_fraction(&s.v)) } else { 0.0 };
        if horizon < 2.0 * opts.dt || tail > opts.tail_tol {
            traj.diagnostic = Some(format!(
                "characteristic crossing detected at t = {t:.6}: horizon {horizon:.3e}, spectral tail {tail:.3e}"
            ));
            break;
        }
        if i % opts.save_every == 0 || i == steps {
            traj.times.push(t);
            traj.energies.push(s.energy());
            traj.states.push(s.clone());
        }
    }
    Ok(traj)
}

/// Exact simple wave of the `γ = 3`, `κ_U = 4π²` system with constant
/// `r₋`: `r₊(x, t) = r₊⁰(ξ)` where `ξ + t r₊⁰(ξ) = x`.
pub fn simple_wave_state(plus0: &FourierField, minus: f64, t: f64, n: usize) -> Result<GasState> {
    let d = spectral::derivative(plus0);
    let xs = spectral::grid_points(n);
    let mut plus = Vec::with_capacity(n);
    for &x in &xs {
        let xi = quad::increasing_root(
            |z| z + t * plus0.eval(z) - x,
            |z| 1.0 + t * d.eval(z),
            x - t * plus0.sup_norm() - 1e-9,
            x + t * plus0.sup_norm() + 1e-9,
            x,
            1e-15,
        );
        if 1.0 + t * d.eval(xi) <= 0.0 {
            return Err(Error::Domain(format!("simple wave has broken before t = {t}")));
        }
        plus.push(plus0.eval(xi));
    }
    let minus = vec![minus; n];
    let (rho, v) = riemann_inverse(&plus, &minus, GAMMA, KAPPA_U)?;
    Ok(GasState { rho, v, gamma: GAMMA, kappa_u: KAPPA_U })
}

/// `U₀(λ) = (2π²/3)λ³`.
pub fn internal_energy_density(lambda: f64) -> f64 {
    2.0 * PI * PI / 3.0 * lambda.powi(3)
}

/// `U(ρ) = (2π²/3)∫ρ³` on the density's grid, which resolves cubes of the
/// band-limited field exactly.
pub fn internal_energy(rho: &CircleDensity) -> f64 {
    transport::internal_energy_values(rho.values())
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvexityReport {
    pub times: Vec<f64>,
    /// `U(ρ̂_t)` on the 21-point grid.
    pub energies: Vec<f64>,
    /// `U(t-h) - 2U(t) + U(t+h)` at interior points.
    pub second_differences: Vec<f64>,
    /// Finite-difference `d²U/dt²` at interior points.
    pub fd_second_derivative: Vec<f64>,
    /// `4π²∫ρ₀³(φ₁′-1)²/(tφ₁′+1-t)⁴` at interior points.
    pub closed_form: Vec<f64>,
    pub max_mismatch: f64,
    pub min_second_difference: f64,
    /// Mean of `U(ρ̂_t)` over `[0, 1]` and the endpoint average.
    pub mean_energy: f64,
    pub endpoint_average: f64,
    pub convex: bool,
}

/// Internal energy along the displacement geodesic from `ρ₀` to `ρ₁`, with
/// `U(ρ̂_t) = (2π²/3)∫ρ₀³/φ_t′² dx` and its closed-form second derivative.
pub fn displacement_convexity_check(rho0: &CircleDensity, rho1: &CircleDensity) -> Result<ConvexityReport> {
    let map = transport::monotone_map(rho0, rho1)?;
    let c = 2.0 * PI * PI / 3.0;
    let energy = |t: f64| {
        quad::integrate(
            |x| {
                let d = 1.0 - t + t * map.derivative(x);
                c * rho0.eval(x).powi(3) / (d * d)
            },
            0.0,
            TWO_PI,
            1e-13,
        )
    };
    let hessian = |t: f64| {
        quad::integrate(
            |x| {
                let p = map.derivative(x);
                let d = t * p + 1.0 - t;
                4.0 * PI * PI * rho0.eval(x).powi(3) * (p - 1.0).powi(2) / d.powi(4)
            },
            0.0,
            TWO_PI,
            1e-12,
        )
    };
    let times: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let energies: Vec<f64> = times.iter().map(|&t| energy(t)).collect();
    let second_differences: Vec<f64> = energies.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
    let delta = 1e-3;
    let mut fd = Vec::new();
    let mut closed = Vec::new();
    let mut mismatch: f64 = 0.0;
    for &t in &times[1..times.len() - 1] {
        let d2 = (energy(t - delta) - 2.0 * energy(t) + energy(t + delta)) / (delta * delta);
        let h = hessian(t);
        mismatch = mismatch.max((d2 - h).abs() / h.abs().max(1.0));
        fd.push(d2);
        closed.push(h);
    }
    let min_second_difference = second_differences.iter().cloned().fold(f64::INFINITY, f64::min);
    let (gx, gw) = quad::gauss_legendre(16);
    let mean_energy: f64 = gx.iter().zip(&gw).map(|(x, w)| 0.5 * w * energy(0.5 * (x + 1.0))).sum();
    let endpoint_average = 0.5 * (energies[0] + energies[20]);
    let chords = times.iter().zip(&energies).all(|(t, u)| *u <= (1.0 - t) * energies[0] + t * energies[20] + 1e-12);
    Ok(ConvexityReport {
        times,
        energies,
        second_differences,
        fd_second_derivative: fd,
        closed_form: closed,
        max_mismatch: mismatch,
        min_second_difference,
        mean_energy,
        endpoint_average,
        convex: min_second_difference >= -1e-10 && chords && mean_energy <= endpoint_average + 1e-12,
    })
}

/// Fourier differentiation matrix on an even grid.
fn diff_matrix(n: usize) -> DMatrix<f64> {
    let h = TWO_PI / n as f64;
    DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            0.0
        } else {
            let d = j as f64 - k as f64;
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            0.5 * sign / (0.5 * d * h).tan()
        }
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct VariationalStep {
    /// New state on the Eulerian grid.
    pub state: GasState,
    /// Particle positions `X₁ = φ_τ(x_k)`.
    pub positions: Vec<f64>,
    /// `ρ_τ(X₁)` and `V₁` at the particles.
    pub particle_density: Vec<f64>,
    pub particle_velocity: Vec<f64>,
    /// `E(id)`, which equals `K` before the step.
    pub identity_objective: f64,
    /// `E(φ_τ)`.
    pub objective: f64,
    pub energy_before: f64,
    /// `(1/2)∫V₁²ρ₀ + U(ρ_τ)`.
    pub energy_after: f64,
    /// `2π²τ²∫(∂ρ_τ/∂x)²ρ_τ³`.
    pub dissipation: f64,
    /// Largest gap between `V₁ = (X₁ - x)/τ` and `V₀ - τκ_U(ρ_τ∂ρ_τ/∂x)∘X₁`.
    pub update_residual: f64,
    pub iterations: usize,
    pub dissipation_holds: bool,
}

/// One minimising-movement step: `φ_τ` minimises
/// `E(φ) = (1/2τ²)∫(φ - x - τV₀)²ρ₀ + U(φ♯ρ₀)` over monotone grid maps by
/// damped Newton iteration on the displacement `φ - x`; the internal energy
/// `∫ρ₀^γ/φ′^{γ-1}` blows up as `φ′ → 0` and keeps the iterates monotone.
pub fn variational_step(s: &GasState, tau: f64) -> Result<VariationalStep> {
    if !(tau > 0.0) {
        return Err(Error::Config(format!("time step {tau} must be positive")));
    }
    if s.rho.iter().any(|r| *r <= 0.0) {
        return Err(Error::Domain("variational step needs a density bounded below".into()));
    }
    let n = s.len();
    let h = TWO_PI / n as f64;
    let g = s.gamma;
    let a = s.kappa_u / (g * (g - 1.0));
    let dm = diff_matrix(n);
    let rho0 = DVector::from_column_slice(&s.rho);
    let v0 = DVector::from_column_slice(&s.v);
    let slope = |d: &DVector<f64>| -> DVector<f64> { (&dm * d).add_scalar(1.0) };
    let objective = |d: &DVector<f64>| -> Option<f64> {
        let p = slope(d);
        if p.iter().any(|x| *x <= 0.0) {
            return None;
        }
        let mut e = 0.0;
        for k in 0..n {
            e += 0.5 / (tau * tau) * (d[k] - tau * v0[k]).powi(2) * rho0[k] + a * rho0[k].powf(g) * p[k].powf(1.0 - g);
        }
        Some(e * h)
    };
    let identity_objective = objective(&DVector::zeros(n)).expect("identity is monotone");
    let mut d = v0.scale(tau);
    let mut e = match objective(&d) {
        Some(e) => e,
        None => {
            d = DVector::zeros(n);
            identity_objective
        }
    };
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > 60 {
            return Err(Error::Numerical("variational step: Newton iteration did not converge".into()));
        }
        let p = slope(&d);
        let w1 = DVector::from_fn(n, |k, _| a * (1.0 - g) * rho0[k].powf(g) * p[k].powf(-g));
        let w2 = DVector::from_fn(n, |k, _| a * g * (g - 1.0) * rho0[k].powf(g) * p[k].powf(-g - 1.0));
        let grad = (d.clone() - v0.scale(tau)).component_mul(&rho0).scale(h / (tau * tau)) + dm.tr_mul(&w1).scale(h);
        let mut hess = dm.tr_mul(&DMatrix::from_diagonal(&w2)) * &dm;
        hess.scale_mut(h);
        for k in 0..n {
            hess[(k, k)] += h / (tau * tau) * rho0[k];
        }
        let chol = hess
            .cholesky()
            .ok_or_else(|| Error::Numerical("variational step: Hessian is not positive definite".into()))?;
        let step = chol.solve(&(-&grad));
        let decrement = -grad.dot(&step);
        if decrement <= 2e-12 * e.abs().max(1.0) {
            break;
        }
        let mut alpha = 1.0;
        loop {
            let trial = &d + step.scale(alpha);
            if let Some(et) = objective(&trial) {
                if et <= e - 0.25 * alpha * decrement {
                    d = trial;
                    e = et;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                return Err(Error::Numerical("variational step: line search failed".into()));
            }
        }
    }
    let p = slope(&d);
    let xs = spectral::grid_points(n);
    let positions: Vec<f64> = (0..n).map(|k| xs[k] + d[k]).collect();
    let particle_density: Vec<f64> = (0..n).map(|k| rho0[k] / p[k]).collect();
    let particle_velocity: Vec<f64> = (0..n).map(|k| d[k] / tau).collect();
    // ∂ρ_τ/∂x at the particles is (dρ_τ∘φ/dx)/φ′
    let drho = &dm * DVector::from_column_slice(&particle_density);
    let grad_rho: Vec<f64> = (0..n).map(|k| drho[k] / p[k]).collect();
    let update_residual = (0..n)
        .map(|k| {
            let explicit = v0[k] - tau * s.kappa_u * pow(particle_density[k], g - 2.0) * grad_rho[k];
            (explicit - particle_velocity[k]).abs()
        })
        .fold(0.0, f64::max);
    let kinetic: f64 = (0..n).map(|k| 0.5 * particle_velocity[k].powi(2) * rho0[k]).sum::<f64>() * h;
    let internal: f64 = (0..n).map(|k| a * rho0[k].powf(g) * p[k].powf(1.0 - g)).sum::<f64>() * h;
    let dissipation = 2.0 * PI * PI
        * tau
        * tau
        * (0..n).map(|k| grad_rho[k].powi(2) * particle_density[k].powi(3) * p[k]).sum::<f64>()
        * h;
    let energy_before = s.energy();
    let energy_after = kinetic + internal;
    let state = regrid(s, &d, &particle_velocity)?;
    Ok(VariationalStep {
        state,
        positions,
        particle_density,
        particle_velocity,
        identity_objective,
        objective: e,
        energy_before,
        energy_after,
        dissipation,
        update_residual,
        iterations,
        dissipation_holds: energy_after + dissipation <= energy_before + 1e-9,
    })
}

/// Eulerian samples of `φ♯ρ₀` and of the particle velocity, with the
/// displacement and velocity interpolated spectrally.
fn regrid(s: &GasState, disp: &DVector<f64>, vel: &[f64]) -> Result<GasState> {
    let n = s.len();
    let df = field_of(disp.as_slice());
    let dd = spectral::derivative(&df);
    let vf = field_of(vel);
    let rf = field_of(&s.rho);
    let bound = df.sup_norm() + 1e-9;
    let mut rho = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for y in spectral::grid_points(n) {
        let x = quad::increasing_root(|x| x + df.eval(x) - y, |x| 1.0 + dd.eval(x), y - bound, y + bound, y, 1e-15);
        rho.push(rf.eval(x) / (1.0 + dd.eval(x)));
        v.push(vf.eval(x));
    }
    let mass = rho.iter().sum::<f64>() * TWO_PI / n as f64;
    GasState::new(rho.into_iter().map(|r| r / mass).collect(), v, s.gamma, s.kappa_u)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EntropyReport {
    pub times: Vec<f64>,
    /// `Σ(ρ_t | ρ₀)`.
    pub sigma: Vec<f64>,
    /// `dΣ/dt` by finite differences of the series.
    pub dsigma: Vec<f64>,
    /// `dΣ/dt = -∫ 𝓗(ρ_t - ρ₀) v ρ_t` with the cotangent transform.
    pub dsigma_flux: Vec<f64>,
    pub energy: f64,
    /// `(9√3/π)K`.
    pub entropy_bound: f64,
    /// Chordal `W₂(ρ_t, ρ₀)²` and `C_κ K t`.
    pub w2_sq: Vec<f64>,
    pub w2_sq_arc: Vec<f64>,
    pub w2_bound: Vec<f64>,
    pub kappa1: f64,
    pub c_kappa: f64,
    pub entropy_holds: bool,
    pub w2_holds: bool,
    pub warnings: Vec<String>,
}

/// Entropy production along an Euler trajectory relative to the equilibrium
/// density `ρ₀` of `q`, against `(9√3/π)K`, and the transport bound
/// `W₂(ρ_t, ρ₀)² ≤ C_κ K t` with `C_κ = 2/(1 - 2κ₁)`.
pub fn entropy_production_check(traj: &EulerTrajectory, rho0: &CircleDensity, q: &FourierField) -> Result<EntropyReport> {
    if traj.states.len() < 3 {
        return Err(Error::Config("need at least three saved states".into()));
    }
    let kappa1 = transport::curvature_margin(q);
    let mut warnings = Vec::new();
    if kappa1 >= 0.5 {
        return Err(Error::Domain(format!("curvature margin κ₁ = {kappa1} leaves C_κ undefined")));
    }
    if kappa1 <= 0.0 {
        warnings.push(format!("κ₁ = {kappa1:.3e} ≤ 0: Q″ ≥ κ₁ - 1/2 holds only at the boundary"));
    }
    let c_kappa = 2.0 / (1.0 - 2.0 * kappa1);
    let energy = traj.energies[0];
    let mut sigma = Vec::new();
    let mut flux = Vec::new();
    let mut w2 = Vec::new();
    let mut w2_arc = Vec::new();
    let target = Measure::Density(rho0.clone());
    for s in &traj.states {
        let rt = s.density()?;
        sigma.push(gas::free_entropy(&rt, rho0)?.fourier);
        let m = rt.field().cutoff().max(rho0.field().cutoff());
        let d = rt.field().with_cutoff(m).sub(&rho0.field().with_cutoff(m));
        let hd = gas::cot_transform(&d).values_on(s.len());
        flux.push(-hd.iter().zip(&s.v).zip(&s.rho).map(|((a, v), r)| a * v * r).sum::<f64>() * TWO_PI / s.len() as f64);
        let cur = Measure::Density(rt);
        w2.push(transport::transport_cost(&cur, &target, Cost::Chordal)?.cost);
        w2_arc.push(transport::transport_cost(&cur, &target, Cost::Arc)?.cost);
    }
    let t = &traj.times;
    let n = t.len();
    let dsigma: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                let (h1, h2) = (t[1] - t[0], t[2] - t[0]);
                -(h1 + h2) / (h1 * h2) * sigma[0] + h2 / (h1 * (h2 - h1)) * sigma[1] - h1 / (h2 * (h2 - h1)) * sigma[2]
            } else if i == n - 1 {
                let (h1, h2) = (t[n - 1] - t[n - 2], t[n - 1] - t[n - 3]);
                (h1 + h2) / (h1 * h2) * sigma[n - 1] - h2 / (h1 * (h2 - h1)) * sigma[n - 2]
                    + h1 / (h2 * (h2 - h1)) * sigma[n - 3]
            } else {
                let (hm, hp) = (t[i] - t[i - 1], t[i + 1] - t[i]);
                (hm * hm * sigma[i + 1] - hp * hp * sigma[i - 1] + (hp * hp - hm * hm) * sigma[i]) / (hm * hp * (hm + hp))
            }
        })
        .collect();
    let entropy_bound = 9.0 * 3f64.sqrt() / PI * energy;
    let w2_bound: Vec<f64> = t.iter().map(|t| c_kappa * energy * t).collect();
    let entropy_holds = dsigma.iter().chain(&flux).all(|d| d.abs() <= entropy_bound);
    let w2_holds = w2.iter().zip(&w2_bound).all(|(w, b)| *w <= b + 1e-12);
    Ok(EntropyReport {
        times: t.clone(),
        sigma,
        dsigma,
        dsigma_flux: flux,
        energy,
        entropy_bound,
        w2_sq: w2,
        w2_sq_arc: w2_arc,
        w2_bound,
        kappa1,
        c_kappa,
        entropy_holds,
        w2_holds,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CosecLimit {
    pub n: usize,
    /// `(1/2n³) Σ_{j≠l} cosec²((x_j - x_l)/2)` with `x_j = Q_ρ(j/n)`.
    pub value: f64,
    /// `(2π²/3)∫ρ³`.
    pub target: f64,
}

/// Places `n` points at the quantiles `x_j = Q_ρ(j/n)` and evaluates the
/// scaled pair sum of `cosec²`.
pub fn cosec_limit_experiment(rho: &CircleDensity, n: usize) -> Result<CosecLimit> {
    if n < 2 {
        return Err(Error::Config("need at least two points".into()));
    }
    transport::check_positive(rho)?;
    let xs: Vec<f64> = (1..=n).map(|j| transport::quantile(rho, j as f64 / n as f64)).collect();
    let value = scaled_cosec_sum(&xs)?;
    Ok(CosecLimit { n, value, target: internal_energy(rho) })
}

fn scaled_cosec_sum(xs: &[f64]) -> Result<f64> {
    let n = xs.len();
    let mut s = 0.0;
    for j in 0..n {
        for l in 0..n {
            if j != l {
                let sn = (0.5 * (xs[j] - xs[l])).sin();
                if sn.abs() < 1e-300 {
                    return Err(Error::Singularity("coincident points".into()));
                }
                s += 1.0 / (sn * sn);
            }
        }
    }
    Ok(s / (2.0 * (n as f64).powi(3)))
}

/// `Σ_{j≠l} cosec²(π(j-l)/n)` by brute force, with the integer `n(n²-1)/3`.
pub fn cosec_identity(n: usize) -> (f64, u64) {
    let mut s = 0.0;
    for j in 0..n {
        for l in 0..n {
            if j != l {
                let sn = (PI * (j as f64 - l as f64) / n as f64).sin();
                s += 1.0 / (sn * sn);
            }
        }
    }
    let n = n as u64;
    (s, n * (n * n - 1) / 3)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PoleLinkPoint {
    pub n: usize,
    /// Interaction part of `K_n/n` for poles `q_j = nQ_ρ(j/n) + iη`, `k = 1/n`.
    pub interaction: f64,
    pub target: f64,
    pub gap: f64,
}

/// Interaction energy per particle of `n`-soliton data drawn from `ρ` by
/// quantiles against `U(ρ)`. The kinetic part is left out: at small `η` the
/// pole velocities are dominated by the `coth` self term.
pub fn pole_link_trend(rho: &CircleDensity, ns: &[usize], eta: f64) -> Result<Vec<PoleLinkPoint>> {
    transport::check_positive(rho)?;
    let target = internal_energy(rho);
    ns.iter()
        .map(|&n| {
            let nf = n as f64;
            let q: Vec<Complex64> =
                (1..=n).map(|j| Complex64::new(nf * transport::quantile(rho, j as f64 / nf), eta)).collect();
            let p = vec![Complex64::new(0.0, 0.0); n];
            let interaction = soliton::k_hamiltonian(&q, &p, 1.0 / nf).re / nf;
            Ok(PoleLinkPoint { n, interaction, target, gap: (interaction - target).abs() })
        })
        .collect()
}
