//! The truncated Benjamin-Ono flow `u_t = -𝓗u_xx - 2βuu_x`, its conserved
//! quantities, the Poisson-kernel travelling wave and Hessian quadratic forms.

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::{self, FourierField};

/// Time integrators for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    /// Integrating-factor RK4: dispersion exact, nonlinearity by RK4.
    IfRk4,
    /// Strang splitting: exact dispersion half steps around an RK4 step of
    /// the nonlinear part.
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoParams {
    pub beta: f64,
    pub modes: usize,
    pub dt: f64,
    pub scheme: Scheme,
    /// Store every `save_every`-th step.
    pub save_every: usize,
}

impl BoParams {
    pub fn new(beta: f64, modes: usize, dt: f64) -> Self {
        Self { beta, modes, dt, scheme: Scheme::IfRk4, save_every: 1 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("time step {} must be positive", self.dt)));
        }
        if self.modes < 1 {
            return Err(Error::Config("mode cutoff must be at least 1".into()));
        }
        if self.save_every == 0 {
            return Err(Error::Config("save_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FourierField>,
}

impl Trajectory {
    pub fn last(&self) -> &FourierField {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// `N(u) = ∫ u² dx/2π`.
pub fn mass(u: &FourierField) -> f64 {
    u.l2_norm_sq()
}

/// Linear dispersion rate `-i n|n|` on mode `n ≥ 0`.
fn dispersion(n: usize) -> Complex64 {
    Complex64::new(0.0, -((n * n) as f64))
}

/// Work buffers for the nonlinear term on a fixed grid.
struct Nonlinear {
    beta: f64,
    m: usize,
    buf: Vec<Complex64>,
}

impl Nonlinear {
    fn new(beta: f64, m: usize, grid: usize) -> Self {
        Self { beta, m, buf: vec![Complex64::new(0.0, 0.0); grid] }
    }

    /// `-β ∂_x (u²)` projected onto modes `0..=m`.
    fn eval(&mut self, c: &[Complex64], out: &mut [Complex64]) {
        let g = self.buf.len();
        self.buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        self.buf[0] = Complex64::new(c[0].re, 0.0);
        for k in 1..=self.m {
            self.buf[k] = c[k];
            self.buf[g - k] = c[k].conj();
        }
        spectral::fft(&mut self.buf, true);
        for b in self.buf.iter_mut() {
            *b = Complex64::new(b.re * b.re, 0.0);
        }
        spectral::fft(&mut self.buf, false);
        let scale = 1.0 / g as f64;
        for k in 0..=self.m {
            out[k] = self.buf[k] * Complex64::new(0.0, -self.beta * k as f64 * scale);
        }
    }
}

fn require_dealiased(u: &FourierField) -> Result<()> {
    let m = u.cutoff();
    if u.grid_size() < 3 * m + 1 {
        return Err(Error::Config(format!(
            "Benjamin-Ono nonlinearity needs at least {} grid points for cutoff {m}, field has {}",
            3 * m + 1,
            u.grid_size()
        )));
    }
    Ok(())
}

/// Time derivative `-𝓗u_xx - 2βuu_x`; the mean mode of the result is zero.
pub fn bo_rhs(u: &FourierField, beta: f64) -> Result<FourierField> {
    require_dealiased(u)?;
    let m = u.cutoff();
    let mut nl = Nonlinear::new(beta, m, u.grid_size());
    let mut out = vec![Complex64::new(0.0, 0.0); m + 1];
    nl.eval(u.coeffs(), &mut out);
    for (k, o) in out.iter_mut().enumerate() {
        *o += dispersion(k) * u.coeffs()[k];
    }
    FourierField::new(out, u.grid_size())
}

/// `H_β(u) = (1/2)∫ 𝓗u_x u dx/2π + (β/3)∫ u³ dx/2π`.
pub fn hamiltonian(u: &FourierField, beta: f64) -> Result<f64> {
    let quad = 0.5 * spectral::homogeneous_sobolev_norm_sq(u, 0.5);
    Ok(quad + beta / 3.0 * spectral::cubic_integral(u)?)
}

/// Mirror image `x ↦ -x`. Combined with time reversal it is a symmetry of
/// the flow, which gives backward evolution from forward evolution.
pub fn reflect(u: &FourierField) -> FourierField {
    let c = u.coeffs().iter().map(|c| c.conj()).collect();
    FourierField::new(c, u.grid_size()).expect("same shape")
}

fn ifrk4_step(c: &mut [Complex64], dt: f64, nl: &mut Nonlinear, work: &mut [Vec<Complex64>; 6]) {
    let m = c.len() - 1;
    let [a, b, cc, d, tmp, e] = work;
    for k in 0..=m {
        e[k] = (dispersion(k) * (0.5 * dt)).exp();
    }
    nl.eval(c, a);
    for k in 0..=m {
        a[k] *= dt;
        tmp[k] = e[k] * (c[k] + 0.5 * a[k]);
    }
    nl.eval(tmp, b);
    for k in 0..=m {
        b[k] *= dt;
        tmp[k] = e[k] * c[k] + 0.5 * b[k];
    }
    nl.eval(tmp, cc);
    for k in 0..=m {
        cc[k] *= dt;
        tmp[k] = e[k] * e[k] * c[k] + e[k] * cc[k];
    }
    nl.eval(tmp, d);
    for k in 0..=m {
        d[k] *= dt;
        let e2 = e[k] * e[k];
        c[k] = e2 * c[k] + (e2 * a[k] + 2.0 * e[k] * (b[k] + cc[k]) + d[k]) / 6.0;
    }
    c[0].im = 0.0;
}

fn strang_step(c: &mut [Complex64], dt: f64, nl: &mut Nonlinear, work: &mut [Vec<Complex64>; 6]) {
    let m = c.len() - 1;
    for (k, ck) in c.iter_mut().enumerate() {
        *ck *= (dispersion(k) * (0.5 * dt)).exp();
    }
    let [a, b, cc, d, tmp, _] = work;
    nl.eval(c, a);
    for k in 0..=m {
        tmp[k] = c[k] + 0.5 * dt * a[k];
    }
    nl.eval(tmp, b);
    for k in 0..=m {
        tmp[k] = c[k] + 0.5 * dt * b[k];
    }
    nl.eval(tmp, cc);
    for k in 0..=m {
        tmp[k] = c[k] + dt * cc[k];
    }
    nl.eval(tmp, d);
    for k in 0..=m {
        c[k] += dt / 6.0 * (a[k] + 2.0 * b[k] + 2.0 * cc[k] + d[k]);
        c[k] *= (dispersion(k) * (0.5 * dt)).exp();
    }
    c[0].im = 0.0;
}

/// Evolve `u0` to time `T`. The step is `T / ceil(T/dt)` so the last sample
/// lands on `T`. Aborts when `N(u)` exceeds 10³ times its initial value.
pub fn evolve(u0: &FourierField, p: &BoParams, t_end: f64) -> Result<Trajectory> {
    p.validate()?;
    if !(t_end >= 0.0) {
        return Err(Error::Domain(format!("final time {t_end} must be nonnegative")));
    }
    let u0 = u0.with_cutoff(p.modes);
    require_dealiased(&u0)?;
    let m = p.modes;
    let steps = (t_end / p.dt - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let mut nl = Nonlinear::new(p.beta, m, u0.grid_size());
    let mut work: [Vec<Complex64>; 6] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); m + 1]);
    let mut c = u0.coeffs().to_vec();
    let n0 = mass(&u0);
    let mut traj = Trajectory { times: vec![0.0], states: vec![u0.clone()] };
    for s in 1..=steps {
        match p.scheme {
            Scheme::IfRk4 => ifrk4_step(&mut c, dt, &mut nl, &mut work),
            Scheme::Strang => strang_step(&mut c, dt, &mut nl, &mut work),
        }
        let n: f64 = c[0].norm_sqr() + 2.0 * c[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if !n.is_finite() || n > 1e3 * n0.max(f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!(
                "blow-up at t = {}: N(u) = {n:e} against initial {n0:e}",
                s as f64 * dt
            )));
        }
        if s % p.save_every == 0 || s == steps {
            traj.times.push(s as f64 * dt);
            traj.states.push(FourierField::new(c.clone(), u0.grid_size())?);
        }
    }
    Ok(traj)
}

/// Exact solution of the linear (`β = 0`) flow: `c_n ↦ e^{-i n|n| t} c_n`.
pub fn linear_flow(u: &FourierField, t: f64) -> FourierField {
    u.map_multiplier(|n| (dispersion(n) * t).exp())
}

/// Poisson-kernel travelling wave with its speed and mass.
#[derive(Debug, Clone)]
pub struct TravellingWave {
    /// Profile at `t = 0`: `-P_r(x)/β`.
    pub profile: FourierField,
    /// `c = (1 + r²)/(1 - r²)`.
    pub speed: f64,
    /// `N(w) = (1 + r²)/(β²(1 - r²))`.
    pub mass: f64,
    pub r: f64,
    pub beta: f64,
}

impl TravellingWave {
    /// The profile at time `t`. The wave solves the flow as `w(x + ct)`: it
    /// travels towards decreasing `x`.
    pub fn at(&self, t: f64) -> FourierField {
        self.profile.shift(-self.speed * t)
    }
}

pub fn travelling_wave(r: f64, beta: f64, modes: usize) -> Result<TravellingWave> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("radius {r} outside (0, 1)")));
    }
    if beta == 0.0 {
        return Err(Error::Domain("travelling wave needs β ≠ 0".into()));
    }
    let profile = spectral::poisson_field(r, modes, 0.0).scale(-1.0 / beta);
    let r2 = r * r;
    Ok(TravellingWave {
        profile,
        speed: (1.0 + r2) / (1.0 - r2),
        mass: (1.0 + r2) / (beta * beta * (1.0 - r2)),
        r,
        beta,
    })
}

/// Coefficient of the cubic term in a Hessian form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubicConvention {
    /// `β ∫ u h²`, used by the convexity probe.
    Single,
    /// `2β ∫ u h²`, the second directional derivative of `H_β`.
    SecondVariation,
}

impl CubicConvention {
    fn factor(self) -> f64 {
        match self {
            CubicConvention::Single => 1.0,
            CubicConvention::SecondVariation => 2.0,
        }
    }
}

/// Hessian quadratic form of `H_β` at `u` in direction `h`.
///
/// Unsmoothed: `∫ 𝓗h' h + c β ∫ u h²`. Smoothed: `∫ h² + c β ∫ u (J∗h)²`,
/// where `J∗` is [`spectral::j_half_convolve`] and `c` follows `convention`.
pub fn hessian_form(
    u: &FourierField,
    h: &FourierField,
    beta: f64,
    smoothed: bool,
    convention: CubicConvention,
) -> f64 {
    let c = convention.factor() * beta;
    if smoothed {
        let jh = spectral::j_half_convolve(h);
        h.l2_norm_sq() + c * spectral::weighted_square_integral(u, &jh)
    } else {
        spectral::homogeneous_sobolev_norm_sq(h, 0.5) + c * spectral::weighted_square_integral(u, h)
    }
}

/// Unit direction with cosine coefficients proportional to `1/√j`, `j ≤ k`:
/// the maximiser of `(J∗h)(0)` among unit vectors supported on `|j| ≤ k`.
pub fn harmonic_direction(k: usize, modes: usize) -> FourierField {
    let a: Vec<f64> = (1..=k.min(modes)).map(|j| 1.0 / (j as f64).sqrt()).collect();
    let h = FourierField::from_real_basis(0.0, &a, &[]).with_cutoff(modes);
    let norm = h.l2_norm();
    h.scale(1.0 / norm)
}

fn random_unit_direction(rng: &mut crate::rng::Rng, modes: usize) -> FourierField {
    let mut c = vec![Complex64::new(0.0, 0.0); modes + 1];
    for z in c.iter_mut().skip(1) {
        *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    let h = FourierField::from_coeffs(c);
    let norm = h.l2_norm();
    h.scale(1.0 / norm)
}

/// Minimum of the smoothed Hessian form (single cubic coefficient) over
/// `trials` random unit directions and the harmonic directions of cutoff
/// `1, 2, 4, …, M`.
pub fn convexity_probe(u: &FourierField, beta: f64, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Config("probe needs at least one trial".into()));
    }
    let m = u.cutoff();
    let mut rng = crate::rng::seeded(seed);
    let mut best = f64::INFINITY;
    for _ in 0..trials {
        let h = random_unit_direction(&mut rng, m);
        best = best.min(hessian_form(u, &h, beta, true, CubicConvention::Single));
    }
    let mut k = 1;
    while k <= m {
        let h = harmonic_direction(k, m);
        best = best.min(hessian_form(u, &h, beta, true, CubicConvention::Single));
        k *= 2;
    }
    Ok(best)
}

/// Smallest eigenvalue of a Hessian form restricted to the orthonormal
/// basis `√2 cos jx, √2 sin jx`, `1 ≤ j ≤ k`.
pub fn min_rayleigh_low_modes(
    u: &FourierField,
    beta: f64,
    k: usize,
    smoothed: bool,
    convention: CubicConvention,
) -> f64 {
    let m = u.cutoff().max(k);
    let basis: Vec<FourierField> = (1..=k)
        .flat_map(|j| {
            let mut a = vec![0.0; j];
            a[j - 1] = 2f64.sqrt();
            let c = FourierField::from_real_basis(0.0, &a, &[]).with_cutoff(m);
            let s = FourierField::from_real_basis(0.0, &[], &a).with_cutoff(m);
            [c, s]
        })
        .collect();
    let d = basis.len();
    let q = |h: &FourierField| hessian_form(u, h, beta, smoothed, convention);
    let mut mat = nalgebra::DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        mat[(i, i)] = q(&basis[i]);
        for j in 0..i {
            // polarisation
            let v = 0.25 * (q(&basis[i].add(&basis[j])) - q(&basis[i].sub(&basis[j])));
            mat[(i, j)] = v;
            mat[(j, i)] = v;
        }
    }
    nalgebra::SymmetricEigen::new(mat).eigenvalues.min()
}

/// Orthogonal split into modes `|n| ≤ k` and the rest.
pub fn mode_split(u: &FourierField, k: usize) -> (FourierField, FourierField) {
    let k = k.min(u.cutoff());
    let low = u.map_multiplier(|n| Complex64::new(if n <= k { 1.0 } else { 0.0 }, 0.0));
    let high = u.sub(&low);
    (low, high)
}

/// Bounded perturbation `W(u)` built from the low/high split at `k`:
/// `-β∫u_H³ - 3β∫u_H²u_T - 3β∫u_H u_T² - |û(0)|²/2`.
pub fn split_potential(u: &FourierField, beta: f64, k: usize) -> f64 {
    let (h, t) = mode_split(u, k);
    let m = u.cutoff();
    let g = (3 * m + 2).next_power_of_two();
    let (vh, vt) = (h.values_on(g), t.values_on(g));
    let mut s = 0.0;
    for (a, b) in vh.iter().zip(&vt) {
        s += a * a * a + 3.0 * a * a * b + 3.0 * a * b * b;
    }
    -beta * s / g as f64 - 0.5 * u.mean() * u.mean()
}

/// `7|β|√(2k+1) N^{3/2} + N/2`.
pub fn split_potential_bound(beta: f64, k: usize, ball: f64) -> f64 {
    7.0 * beta.abs() * ((2 * k + 1) as f64).sqrt() * ball.powf(1.5) + 0.5 * ball
}
