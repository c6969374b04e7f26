//! Periodic multi-soliton pole dynamics, the field built from the poles, the
//! planar Coulomb energy and its canonical flow, and the balayage potential.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::quad;
use crate::spectral::{self, FourierField};

/// Minimum allowed `|sin(k(q_m - q_l)/2)|` between distinct poles.
pub const EPS_COLLISION: f64 = 1e-8;
/// Minimum allowed imaginary part of a pole.
pub const EPS_FLOOR: f64 = 1e-6;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Poles `q_j = ξ_j + iη_j` with `η_j > 0` and wavenumber `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleConfiguration {
    pub poles: Vec<Complex64>,
    pub k: f64,
}

impl PoleConfiguration {
    pub fn new(poles: Vec<Complex64>, k: f64) -> Result<Self> {
        if poles.is_empty() {
            return Err(Error::Domain("need at least one pole".into()));
        }
        if !(k > 0.0) {
            return Err(Error::Domain(format!("wavenumber {k} must be positive")));
        }
        if let Some(p) = poles.iter().find(|p| !(p.im > 0.0)) {
            return Err(Error::Domain(format!("pole {p} is not in the upper half-plane")));
        }
        Ok(Self { poles, k })
    }

    pub fn from_parts(xi: &[f64], eta: &[f64], k: f64) -> Result<Self> {
        Self::new(xi.iter().zip(eta).map(|(&x, &e)| Complex64::new(x, e)).collect(), k)
    }

    pub fn n(&self) -> usize {
        self.poles.len()
    }

    fn to_state(&self) -> Vec<f64> {
        self.poles.iter().flat_map(|p| [p.re, p.im]).collect()
    }

    fn from_state(y: &[f64], k: f64) -> Self {
        Self { poles: y.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect(), k }
    }

    /// Angles of the vortices `e^{iq_j}` in `[0, 2π)`: the support of the
    /// empirical measure `ω_n`.
    pub fn empirical_angles(&self) -> Vec<f64> {
        self.poles.iter().map(|p| p.re.rem_euclid(2.0 * PI)).collect()
    }
}

fn cot(z: Complex64) -> Complex64 {
    z.cos() / z.sin()
}

fn check_guards(c: &PoleConfiguration) -> Result<()> {
    for (j, p) in c.poles.iter().enumerate() {
        if p.im < EPS_FLOOR {
            return Err(Error::Singularity(format!("pole {j} reached the real axis: η = {:e}", p.im)));
        }
        for (l, q) in c.poles.iter().enumerate().skip(j + 1) {
            if (c.k * (p - q) / 2.0).sin().norm() < EPS_COLLISION {
                return Err(Error::Singularity(format!("poles {j} and {l} collided")));
            }
        }
    }
    Ok(())
}

/// `φ(x) = -ik cot(kx/2)`.
fn phi(x: Complex64, k: f64) -> Complex64 {
    -I * k * cot(k * x / 2.0)
}

/// `dq_l/dt = -φ(q_l - q̄_l) - Σ_{m≠l} φ(q_m - q_l) - Σ_{m≠l} φ(q_l - q̄_m)`.
pub fn pole_velocity(c: &PoleConfiguration) -> Result<Vec<Complex64>> {
    check_guards(c)?;
    let k = c.k;
    let q = &c.poles;
    Ok((0..q.len())
        .map(|l| {
            let mut v = -phi(q[l] - q[l].conj(), k);
            for m in 0..q.len() {
                if m != l {
                    v -= phi(q[m] - q[l], k) + phi(q[l] - q[m].conj(), k);
                }
            }
            v
        })
        .collect())
}

/// Pole positions at the requested times, which may be negative and in any
/// order. Negative times are reached by integrating the reversed system.
pub fn pole_states_at(c0: &PoleConfiguration, times: &[f64], opts: OdeOptions) -> Result<Vec<PoleConfiguration>> {
    check_guards(c0)?;
    let k = c0.k;
    let y0 = c0.to_state();
    let mut out = vec![None; times.len()];
    for sign in [1.0, -1.0] {
        let mut idx: Vec<usize> = (0..times.len()).filter(|&i| sign * times[i] >= 0.0).collect();
        if idx.is_empty() {
            continue;
        }
        idx.sort_by(|&a, &b| (sign * times[a]).total_cmp(&(sign * times[b])));
        let ts: Vec<f64> = idx.iter().map(|&i| sign * times[i]).collect();
        let f = |_t: f64, y: &[f64]| {
            let v = pole_velocity(&PoleConfiguration::from_state(y, k))?;
            Ok(v.iter().flat_map(|z| [sign * z.re, sign * z.im]).collect())
        };
        let states = ode::solve(f, 0.0, &y0, &ts, opts)?;
        for (i, s) in idx.into_iter().zip(states) {
            out[i] = Some(PoleConfiguration::from_state(&s, k));
        }
    }
    Ok(out.into_iter().map(|c| c.expect("every time visited")).collect())
}

#[derive(Debug, Clone)]
pub struct PoleTrajectory {
    pub times: Vec<f64>,
    pub configs: Vec<PoleConfiguration>,
}

/// Integrate the pole equations on `[0, T]`, sampling every `dt_out`.
pub fn evolve_poles(c0: &PoleConfiguration, dt_out: f64, t_end: f64) -> Result<PoleTrajectory> {
    if !(t_end >= 0.0) || !(dt_out > 0.0) {
        return Err(Error::Domain("need T ≥ 0 and a positive output step".into()));
    }
    let n = (t_end / dt_out - 1e-9).ceil().max(0.0) as usize;
    let mut times: Vec<f64> = (0..n).map(|i| i as f64 * dt_out).collect();
    times.push(t_end);
    let configs = pole_states_at(c0, &times, OdeOptions::default())?;
    Ok(PoleTrajectory { times, configs })
}

/// `K_n = (1/2)Σ p_j² + (k²/2)Σ_{m≠l} cosec²(k(q_m - q_l)/2)`, complex.
pub fn k_hamiltonian(q: &[Complex64], p: &[Complex64], k: f64) -> Complex64 {
    let kinetic: Complex64 = p.iter().map(|x| 0.5 * x * x).sum();
    let mut pot = Complex64::new(0.0, 0.0);
    for m in 0..q.len() {
        for l in 0..q.len() {
            if m != l {
                let s = (k * (q[m] - q[l]) / 2.0).sin();
                pot += 1.0 / (s * s);
            }
        }
    }
    kinetic + 0.5 * k * k * pot
}

/// `K_n` with momenta taken as the pole velocities.
pub fn k_along_flow(c: &PoleConfiguration) -> Result<Complex64> {
    let p = pole_velocity(c)?;
    Ok(k_hamiltonian(&c.poles, &p, c.k))
}

/// `u(x) = -Σ k sinh kη_j / (sinh²(kη_j/2) + sin²(k(x - ξ_j)/2))` at a point.
pub fn soliton_field_at(c: &PoleConfiguration, x: f64) -> f64 {
    let k = c.k;
    c.poles
        .iter()
        .map(|p| {
            let (xi, eta) = (p.re, p.im);
            -k * (k * eta).sinh() / ((k * eta / 2.0).sinh().powi(2) + (k * (x - xi) / 2.0).sin().powi(2))
        })
        .sum()
}

/// The same field as `-Σ 2k P_{e^{-kη_j}}(k(x - ξ_j))`.
pub fn soliton_field_poisson_at(c: &PoleConfiguration, x: f64) -> f64 {
    let k = c.k;
    c.poles
        .iter()
        .map(|p| -2.0 * k * spectral::poisson_kernel((-k * p.im).exp(), k * (x - p.re)))
        .sum()
}

/// Cutoff resolving a pole field to double precision: `e^{-η_min M} < 1e-17`.
pub fn resolving_cutoff(c: &PoleConfiguration) -> Result<usize> {
    let eta = c.poles.iter().map(|p| p.im).fold(f64::INFINITY, f64::min);
    let m = (39.0 / eta).ceil() as usize + 8;
    if m > 8192 {
        return Err(Error::Config(format!("poles at height {eta:e} need {m} modes")));
    }
    Ok(m)
}

fn require_integer_wavenumber(k: f64) -> Result<()> {
    if (k - k.round()).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "wavenumber {k} gives a field that is not 2π-periodic"
        )));
    }
    Ok(())
}

/// The soliton field as a band-limited field with cutoff `modes`.
pub fn reconstruct_u(c: &PoleConfiguration, modes: usize) -> Result<FourierField> {
    require_integer_wavenumber(c.k)?;
    Ok(FourierField::from_fn(modes, |x| soliton_field_at(c, x)))
}

/// Time orientation under which the reconstructed field is compared with
/// the Benjamin-Ono flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Orientation {
    /// Poles at time `t` follow the pole equations forward to `t`.
    Forward,
    /// Poles at time `t` follow the pole equations to `-t`.
    Reversed,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Forward => 1.0,
            Orientation::Reversed => -1.0,
        }
    }
}

/// Pieces of the BO residual at the sample times: `r(β) = A + 2β u u_x` with
/// `A = u_t + 𝓗u_xx`.
#[derive(Debug, Clone)]
pub struct ResidualParts {
    pub times: Vec<f64>,
    pub linear: Vec<FourierField>,
    pub nonlinear: Vec<FourierField>,
}

impl ResidualParts {
    /// `max_t ‖A + 2β u u_x‖_{L²}`.
    pub fn residual(&self, beta: f64) -> f64 {
        self.linear
            .iter()
            .zip(&self.nonlinear)
            .map(|(a, b)| a.axpy(2.0 * beta, b).l2_norm())
            .fold(0.0, f64::max)
    }
}

/// Central 9-point stencil for the first derivative.
const FD8: [f64; 9] = [
    1.0 / 280.0,
    -4.0 / 105.0,
    1.0 / 5.0,
    -4.0 / 5.0,
    0.0,
    4.0 / 5.0,
    -1.0 / 5.0,
    4.0 / 105.0,
    -1.0 / 280.0,
];

/// How the reconstructed field moves in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleMotion {
    /// Integrate the pole equations.
    Flow,
    /// Poles held fixed: a negative control.
    Frozen,
}

/// Residual pieces at `samples + 1` equally spaced times in `[0, T]`, with
/// `u_t` from an eighth-order central difference in time.
pub fn residual_parts(
    c0: &PoleConfiguration,
    t_end: f64,
    samples: usize,
    orientation: Orientation,
    motion: PoleMotion,
) -> Result<ResidualParts> {
    require_integer_wavenumber(c0.k)?;
    let m = resolving_cutoff(c0)?;
    let h = 5e-3;
    let sample_times: Vec<f64> = (0..=samples).map(|i| t_end * i as f64 / samples.max(1) as f64).collect();
    let mut all = Vec::with_capacity(sample_times.len() * 9);
    for &t in &sample_times {
        for j in -4..=4 {
            all.push(orientation.sign() * (t + j as f64 * h));
        }
    }
    let opts = OdeOptions { rtol: 1e-13, atol: 1e-14, ..OdeOptions::default() };
    let states = match motion {
        PoleMotion::Flow => pole_states_at(c0, &all, opts)?,
        PoleMotion::Frozen => vec![c0.clone(); all.len()],
    };
    let mut linear = Vec::new();
    let mut nonlinear = Vec::new();
    for (s, _) in sample_times.iter().enumerate() {
        let fields: Vec<FourierField> = states[9 * s..9 * s + 9]
            .iter()
            .map(|c| reconstruct_u(c, m))
            .collect::<Result<_>>()?;
        let mut ut = FourierField::zeros(m);
        for (w, f) in FD8.iter().zip(&fields) {
            ut = ut.axpy(w / h, f);
        }
        let u = &fields[4];
        let ux = spectral::derivative(u);
        let huxx = spectral::hilbert_transform(&spectral::derivative(&ux));
        linear.push(ut.add(&huxx));
        nonlinear.push(spectral::product(u, &ux)?);
    }
    Ok(ResidualParts { times: sample_times, linear, nonlinear })
}

/// `max_t ‖u_t + 𝓗u_xx + 2βuu_x‖_{L²}` for the reconstructed field along the
/// pole flow, over 11 sample times in `[0, T]`.
pub fn bo_residual(c0: &PoleConfiguration, beta: f64, t_end: f64, orientation: Orientation) -> Result<f64> {
    Ok(residual_parts(c0, t_end, 10, orientation, PoleMotion::Flow)?.residual(beta))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Calibration {
    pub orientation: Orientation,
    pub beta: f64,
    pub residual: f64,
    /// Best β and residual for each orientation.
    pub table: Vec<(Orientation, f64, f64)>,
}

/// Minimise the residual over `β ∈ [-2, 2]` for each orientation.
pub fn calibrate_beta(c0: &PoleConfiguration, t_end: f64) -> Result<Calibration> {
    let mut table = Vec::new();
    for o in [Orientation::Forward, Orientation::Reversed] {
        let parts = residual_parts(c0, t_end, 10, o, PoleMotion::Flow)?;
        let (b, r) = quad::golden_min(|b| parts.residual(b), -2.0, 2.0, 1e-11);
        table.push((o, b, r));
    }
    let best = table
        .iter()
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .copied()
        .expect("two entries");
    Ok(Calibration { orientation: best.0, beta: best.1, residual: best.2, table })
}

/// External potential for the planar Coulomb model in the pole coordinate
/// `z = x + iy`.
pub struct CoulombField {
    pub v: Box<dyn Fn(Complex64) -> f64 + Send + Sync>,
    /// `∂v/∂z̄ = (v_x + i v_y)/2`.
    pub dv_dzbar: Box<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
    pub beta_gas: f64,
}

impl CoulombField {
    pub fn zero(beta_gas: f64) -> Self {
        Self { v: Box::new(|_| 0.0), dv_dzbar: Box::new(|_| Complex64::new(0.0, 0.0)), beta_gas }
    }

    /// `v = a|z|²`.
    pub fn radial(a: f64, beta_gas: f64) -> Self {
        Self {
            v: Box::new(move |z| a * z.norm_sqr()),
            dv_dzbar: Box::new(move |z| a * z),
            beta_gas,
        }
    }
}

/// `E_{n,v} = Σ v(z_j) - β Σ log|sin(k(z_j - z̄_j)/2)|
/// - β Σ_{j≠l} log|sin(k(z_j - z_l)/2)| - β Σ_{j≠l} log|sin(k(z_j - z̄_l)/2)|`.
pub fn coulomb_energy(c: &PoleConfiguration, field: &CoulombField) -> f64 {
    let (k, b) = (c.k, field.beta_gas);
    let z = &c.poles;
    let mut e = 0.0;
    for j in 0..z.len() {
        e += (field.v)(z[j]) - b * (k * (z[j] - z[j].conj()) / 2.0).sin().norm().ln();
        for l in 0..z.len() {
            if l != j {
                e -= b * (k * (z[j] - z[l]) / 2.0).sin().norm().ln();
                e -= b * (k * (z[j] - z[l].conj()) / 2.0).sin().norm().ln();
            }
        }
    }
    e
}

/// Canonical flow `dx/dt = ∂E/∂y`, `dy/dt = -∂E/∂x` of [`coulomb_energy`] in
/// reduced form:
/// `dz_j/dt = -2i ∂v/∂z̄ + iβk cot(k(z̄_j - z_j)/2) + iβk Σ_{l≠j} cot(k(z̄_j - z̄_l)/2)
/// + iβk Σ_{l≠j} cot(k(z̄_j - z_l)/2)`.
pub fn coulomb_flow(c: &PoleConfiguration, field: &CoulombField) -> Result<Vec<Complex64>> {
    check_guards(c)?;
    let (k, b) = (c.k, field.beta_gas);
    let z = &c.poles;
    Ok((0..z.len())
        .map(|j| {
            let zb = z[j].conj();
            let mut v = -2.0 * I * (field.dv_dzbar)(z[j]) + I * b * k * cot(k * (zb - z[j]) / 2.0);
            for l in 0..z.len() {
                if l != j {
                    v += I * b * k * (cot(k * (zb - z[l].conj()) / 2.0) + cot(k * (zb - z[l]) / 2.0));
                }
            }
            v
        })
        .collect())
}

/// Integrate [`coulomb_flow`] and report `E_{n,v}` at each output time.
pub fn evolve_coulomb(
    c0: &PoleConfiguration,
    field: &CoulombField,
    times: &[f64],
) -> Result<(Vec<PoleConfiguration>, Vec<f64>)> {
    let k = c0.k;
    let f = |_t: f64, y: &[f64]| {
        let v = coulomb_flow(&PoleConfiguration::from_state(y, k), field)?;
        Ok(v.iter().flat_map(|z| [z.re, z.im]).collect())
    };
    let opts = OdeOptions { rtol: 1e-12, atol: 1e-13, ..OdeOptions::default() };
    let states = ode::solve(f, 0.0, &c0.to_state(), times, opts)?;
    let configs: Vec<PoleConfiguration> = states.iter().map(|s| PoleConfiguration::from_state(s, k)).collect();
    let energies = configs.iter().map(|c| coulomb_energy(c, field)).collect();
    Ok((configs, energies))
}

/// Logarithmic potential of the balayage of the vortex measure, with the
/// related fields on the circle (`k = 1`).
#[derive(Debug, Clone)]
pub struct BalayagePotential {
    /// `w_n(x) = Σ log|e^{ix} - e^{iq_j}|`.
    pub potential: FourierField,
    /// `∂w_n/∂x`.
    pub derivative: FourierField,
    /// `-u`, where `u` is the soliton field of the same poles.
    pub minus_u: FourierField,
}

pub fn balayage_potential(c: &PoleConfiguration, modes: usize) -> Result<BalayagePotential> {
    if c.k != 1.0 {
        return Err(Error::Domain("balayage potential is defined for k = 1".into()));
    }
    let poles = c.poles.clone();
    let potential = FourierField::from_fn(modes, |x| {
        let e = Complex64::from_polar(1.0, x);
        poles.iter().map(|q| (e - (I * q).exp()).norm().ln()).sum()
    });
    let derivative = spectral::derivative(&potential);
    let minus_u = reconstruct_u(c, modes)?.scale(-1.0);
    Ok(BalayagePotential { potential, derivative, minus_u })
}

/// `∂w_n/∂x = Σ sin(x - ξ_j) / (4 sin²((x - ξ_j)/2) + 4 sinh²(η_j/2))`.
pub fn balayage_derivative_at(c: &PoleConfiguration, x: f64) -> f64 {
    c.poles
        .iter()
        .map(|p| (x - p.re).sin() / (4.0 * ((x - p.re) / 2.0).sin().powi(2) + 4.0 * (p.im / 2.0).sinh().powi(2)))
        .sum()
}
