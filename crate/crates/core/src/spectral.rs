//! Real periodic fields stored by Fourier coefficients, and the Fourier
//! multipliers built on them.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::quad;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft(buf: &mut [Complex64], inverse: bool) {
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    plan.process(buf);
}

/// Grid size that evaluates quadratic products and cubic means of a field
/// with cutoff `m` without aliasing (at least `3m + 1` points).
pub fn dealiased_grid(m: usize) -> usize {
    (3 * m + 2).max(8).next_power_of_two()
}

/// A real 2π-periodic band-limited function.
///
/// Only `c_0, …, c_M` are stored; `c_{-n}` is the conjugate of `c_n`, so the
/// reality condition holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    coeffs: Vec<Complex64>,
    grid_size: usize,
}

impl FourierField {
    /// Build from `c_0..=c_M`. The imaginary part of `c_0` is discarded.
    pub fn new(mut coeffs: Vec<Complex64>, grid_size: usize) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::Config("cutoff must be at least 1".into()));
        }
        let m = coeffs.len() - 1;
        if grid_size < 2 * m + 2 {
            return Err(Error::Config(format!(
                "grid of {grid_size} points cannot hold cutoff {m} (needs {})",
                2 * m + 2
            )));
        }
        coeffs[0].im = 0.0;
        Ok(Self { coeffs, grid_size })
    }

    /// Build from `c_0..=c_M` on the dealiased grid.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        let m = coeffs.len().saturating_sub(1).max(1);
        let mut c = coeffs;
        c.resize(m + 1, Complex64::new(0.0, 0.0));
        Self::new(c, dealiased_grid(m)).expect("dealiased grid is admissible")
    }

    pub fn zeros(m: usize) -> Self {
        Self::from_coeffs(vec![Complex64::new(0.0, 0.0); m.max(1) + 1])
    }

    pub fn constant(value: f64, m: usize) -> Self {
        let mut f = Self::zeros(m);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// `a0/2 + Σ (a_j cos jx + b_j sin jx)` for `j = 1..=M`.
    pub fn from_real_basis(a0: f64, a: &[f64], b: &[f64]) -> Self {
        let m = a.len().max(b.len()).max(1);
        let mut c = vec![Complex64::new(0.0, 0.0); m + 1];
        c[0] = Complex64::new(0.5 * a0, 0.0);
        for j in 1..=m {
            let aj = a.get(j - 1).copied().unwrap_or(0.0);
            let bj = b.get(j - 1).copied().unwrap_or(0.0);
            c[j] = Complex64::new(0.5 * aj, -0.5 * bj);
        }
        Self::from_coeffs(c)
    }

    /// Sample `f` on a fine grid and keep modes up to `m`.
    pub fn from_fn<F: Fn(f64) -> f64>(m: usize, f: F) -> Self {
        let n = (4 * m + 4).max(64).next_power_of_two();
        let values: Vec<f64> = (0..n).map(|k| f(2.0 * PI * k as f64 / n as f64)).collect();
        let mut out = Self::from_grid(&values, m).expect("sampling grid is admissible");
        out.grid_size = dealiased_grid(m);
        out
    }

    /// Recover `c_0..=c_m` from equispaced samples `x_k = 2πk/N`.
    pub fn from_grid(values: &[f64], m: usize) -> Result<Self> {
        let n = values.len();
        if n < 2 * m + 2 {
            return Err(Error::Config(format!(
                "{n} samples cannot resolve cutoff {m}"
            )));
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft(&mut buf, false);
        let scale = 1.0 / n as f64;
        let coeffs = buf[..=m].iter().map(|c| c * scale).collect();
        Self::new(coeffs, n)
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Same coefficients, different collocation grid.
    pub fn with_grid_size(&self, grid_size: usize) -> Result<Self> {
        Self::new(self.coeffs.clone(), grid_size)
    }

    /// Truncate or zero-pad to cutoff `m`, keeping an admissible grid.
    pub fn with_cutoff(&self, m: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(m.max(1) + 1, Complex64::new(0.0, 0.0));
        let grid = self.grid_size.max(dealiased_grid(m.max(1)));
        Self::new(c, grid).expect("grid enlarged to fit")
    }

    /// Nonnegative-index coefficients `c_0..=c_M`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `c_n` for any integer `n` (zero beyond the cutoff).
    pub fn coeff(&self, n: i64) -> Complex64 {
        let k = n.unsigned_abs() as usize;
        if k > self.cutoff() {
            return Complex64::new(0.0, 0.0);
        }
        if n < 0 {
            self.coeffs[k].conj()
        } else {
            self.coeffs[k]
        }
    }

    pub fn set_coeff(&mut self, n: usize, c: Complex64) {
        self.coeffs[n] = if n == 0 { Complex64::new(c.re, 0.0) } else { c };
    }

    /// Cosine coefficient `a_j = 2 Re c_j` (so `a_0/2` is the mean).
    pub fn a(&self, j: usize) -> f64 {
        2.0 * self.coeff(j as i64).re
    }

    /// Sine coefficient `b_j = -2 Im c_j`.
    pub fn b(&self, j: usize) -> f64 {
        -2.0 * self.coeff(j as i64).im
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn grid_points(&self) -> Vec<f64> {
        grid_points(self.grid_size)
    }

    /// Values on the field's own grid.
    pub fn to_grid(&self) -> Vec<f64> {
        self.values_on(self.grid_size)
    }

    /// Values on an equispaced grid of `n ≥ 2M+1` points.
    pub fn values_on(&self, n: usize) -> Vec<f64> {
        let m = self.cutoff();
        assert!(n > 2 * m, "grid of {n} points too small for cutoff {m}");
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[0] = self.coeffs[0];
        for k in 1..=m {
            buf[k] = self.coeffs[k];
            buf[n - k] = self.coeffs[k].conj();
        }
        fft(&mut buf, true);
        buf.iter().map(|c| c.re).collect()
    }

    /// Pointwise evaluation by direct summation.
    pub fn eval(&self, x: f64) -> f64 {
        let mut s = self.coeffs[0].re;
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            let (sn, cs) = (k as f64 * x).sin_cos();
            s += 2.0 * (c.re * cs - c.im * sn);
        }
        s
    }

    /// Apply a multiplier given on `n ≥ 0`; the negative side follows by
    /// conjugate symmetry.
    pub fn map_multiplier<F: Fn(usize) -> Complex64>(&self, mult: F) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * mult(n))
            .collect();
        Self::new(coeffs, self.grid_size).expect("same shape")
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_multiplier(|_| Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    /// `self + s·other`, on the larger cutoff and grid.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let m = self.cutoff().max(other.cutoff());
        let coeffs = (0..=m)
            .map(|k| self.coeff(k as i64) + other.coeff(k as i64) * s)
            .collect();
        Self::new(coeffs, self.grid_size.max(other.grid_size)).expect("larger grid")
    }

    /// Translate: `x ↦ f(x - shift)`.
    pub fn shift(&self, shift: f64) -> Self {
        self.map_multiplier(|n| Complex64::from_polar(1.0, -(n as f64) * shift))
    }

    /// `∫ f² dx/2π = Σ |c_n|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        let tail: f64 = self.coeffs[1..].iter().map(|c| c.norm_sqr()).sum();
        self.coeffs[0].norm_sqr() + 2.0 * tail
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Max of `|f|` sampled on a grid four times finer than the cutoff.
    pub fn sup_norm(&self) -> f64 {
        let n = (8 * self.cutoff() + 8).next_power_of_two();
        self.values_on(n).iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// One line `n re im` per stored coefficient, `n = 0..=M`, with
    /// round-trip float formatting.
    pub fn to_columns(&self) -> String {
        self.coeffs.iter().enumerate().map(|(n, c)| format!("{n} {:?} {:?}\n", c.re, c.im)).collect()
    }

    /// Inverse of [`FourierField::to_columns`]; `#` lines and blank lines
    /// are skipped, missing modes are zero.
    pub fn from_columns(text: &str) -> Result<Self> {
        let mut coeffs: Vec<Complex64> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::Config(format!("line {}: expected `n re im`", i + 1));
            let mut it = line.split_whitespace();
            let n: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            let re: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            let im: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            if it.next().is_some() || n > 1 << 24 {
                return Err(bad());
            }
            if coeffs.len() <= n {
                coeffs.resize(n + 1, Complex64::new(0.0, 0.0));
            }
            coeffs[n] = Complex64::new(re, im);
        }
        if coeffs.is_empty() {
            return Err(Error::Config("no coefficients".into()));
        }
        Ok(Self::from_coeffs(coeffs))
    }

    /// CSV `x,f(x)` on `n` equally spaced points.
    pub fn grid_csv(&self, n: usize) -> String {
        let mut out = String::from("x,f\n");
        for (x, v) in grid_points(n).iter().zip(self.values_on(n)) {
            out.push_str(&format!("{x:?},{v:?}\n"));
        }
        out
    }

    fn require_dealiased(&self, what: &str) -> Result<()> {
        let m = self.cutoff();
        if self.grid_size < 3 * m + 1 {
            return Err(Error::Config(format!(
                "{what} needs at least {} grid points for cutoff {m}, field has {}",
                3 * m + 1,
                self.grid_size
            )));
        }
        Ok(())
    }
}

pub fn grid_points(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// `∫ f g dx/2π`.
pub fn inner(f: &FourierField, g: &FourierField) -> f64 {
    let m = f.cutoff().min(g.cutoff());
    let mut s = (f.coeff(0) * g.coeff(0).conj()).re;
    for k in 1..=m {
        s += 2.0 * (f.coeff(k as i64) * g.coeff(k as i64).conj()).re;
    }
    s
}

/// `d/dx`.
pub fn derivative(f: &FourierField) -> FourierField {
    f.map_multiplier(|n| Complex64::new(0.0, n as f64))
}

/// Hilbert transform, multiplier `-i sgn(n)`.
pub fn hilbert_transform(f: &FourierField) -> FourierField {
    f.map_multiplier(|n| {
        if n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -1.0)
        }
    })
}

/// `|D|^s`, multiplier `|n|^s`. The mean is annihilated for `s > 0`, kept for
/// `s = 0`, and must vanish for `s < 0`.
pub fn fractional_derivative(f: &FourierField, s: f64) -> Result<FourierField> {
    if s < 0.0 && f.mean().abs() > 0.0 {
        return Err(Error::Domain(format!(
            "|D|^{s} is undefined on a field with mean {}",
            f.mean()
        )));
    }
    Ok(f.map_multiplier(|n| {
        if n == 0 {
            Complex64::new(if s == 0.0 { 1.0 } else { 0.0 }, 0.0)
        } else {
            Complex64::new((n as f64).powf(s), 0.0)
        }
    }))
}

/// `‖f‖_{H^η} = (|c_0|² + Σ' |n|^{2η} |c_n|²)^{1/2}`: the mean enters as a
/// separate summand for every η.
pub fn sobolev_norm(f: &FourierField, eta: f64) -> f64 {
    (homogeneous_sobolev_norm_sq(f, eta) + f.mean() * f.mean()).sqrt()
}

/// `Σ' |n|^{2η} |c_n|²` without the mean.
pub fn homogeneous_sobolev_norm_sq(f: &FourierField, eta: f64) -> f64 {
    f.coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, c)| 2.0 * (n as f64).powf(2.0 * eta) * c.norm_sqr())
        .sum()
}

/// Poisson smoothing `c_n ↦ r^{|n|} c_n`, `0 ≤ r < 1`.
pub fn poisson_smooth(f: &FourierField, r: f64) -> Result<FourierField> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("Poisson radius {r} outside [0, 1)")));
    }
    Ok(f.map_multiplier(|n| Complex64::new(r.powi(n as i32), 0.0)))
}

/// Closed-form Poisson kernel `(1 - r²)/(1 - 2r cos θ + r²)`.
pub fn poisson_kernel(r: f64, theta: f64) -> f64 {
    (1.0 - r * r) / (1.0 - 2.0 * r * theta.cos() + r * r)
}

/// The Poisson kernel `P_r(x - shift)` as a field with cutoff `m`.
pub fn poisson_field(r: f64, m: usize, shift: f64) -> FourierField {
    let mut c = vec![Complex64::new(0.0, 0.0); m + 1];
    c[0] = Complex64::new(1.0, 0.0);
    let mut p = 1.0;
    for (n, cn) in c.iter_mut().enumerate().skip(1) {
        p *= r;
        *cn = Complex64::from_polar(p, -(n as f64) * shift);
    }
    FourierField::from_coeffs(c)
}

/// Logarithmic kernel: `c_n ↦ c_n/|n|` for `n ≠ 0`, `c_0` kept. Equivalently
/// convolution with `-log(4 sin²(θ/2))` plus the mean.
pub fn log_kernel(f: &FourierField) -> FourierField {
    f.map_multiplier(|n| Complex64::new(if n == 0 { 1.0 } else { 1.0 / n as f64 }, 0.0))
}

/// Convolution with `J(x) = Σ_{n≥1} cos(nx)/√n`: `c_n ↦ c_n/(2√|n|)`, mean
/// removed.
pub fn j_half_convolve(f: &FourierField) -> FourierField {
    f.map_multiplier(|n| {
        Complex64::new(
            if n == 0 {
                0.0
            } else {
                0.5 / (n as f64).sqrt()
            },
            0.0,
        )
    })
}

/// `∫ f³ dx/2π` by trapezoid quadrature, exact for band-limited `f` on a
/// grid of at least `3M + 1` points.
pub fn cubic_integral(f: &FourierField) -> Result<f64> {
    f.require_dealiased("cubic integral")?;
    let v = f.to_grid();
    Ok(v.iter().map(|x| x * x * x).sum::<f64>() / v.len() as f64)
}

/// Product `f g` projected to the larger cutoff. Both fields are evaluated on
/// the first field's grid, which must be dealiased.
pub fn product(f: &FourierField, g: &FourierField) -> Result<FourierField> {
    let m = f.cutoff().max(g.cutoff());
    let n = f.grid_size().max(g.grid_size());
    if n < 3 * m + 1 {
        return Err(Error::Config(format!(
            "product needs at least {} grid points for cutoff {m}, have {n}",
            3 * m + 1
        )));
    }
    let a = f.values_on(n);
    let b = g.values_on(n);
    let p: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    FourierField::from_grid(&p, m)
}

/// `∫ u h² dx/2π` exactly for band-limited fields.
pub fn weighted_square_integral(u: &FourierField, h: &FourierField) -> f64 {
    let m = u.cutoff().max(h.cutoff());
    let n = (3 * m + 2).next_power_of_two();
    let a = u.values_on(n);
    let b = h.values_on(n);
    a.iter().zip(&b).map(|(x, y)| x * y * y).sum::<f64>() / n as f64
}

/// `J(x) = Σ_{n≥1} cos(nx)/√n` for `x ∈ (0, 2π)`.
///
/// Evaluated as the singular part `(π/2x)^{1/2}` plus the convergent series
/// `Σ_m (-1)^m ζ(1/2 - 2m) x^{2m}/(2m)!` (radius 2π), reflected to `(0, π]`.
pub fn j_half_kernel(x: f64) -> f64 {
    let mut x = x.rem_euclid(2.0 * PI);
    if x > PI {
        x = 2.0 * PI - x;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    let mut s = (PI / (2.0 * x)).sqrt() + quad::zeta(0.5);
    let t = x / (2.0 * PI);
    for m in 1..200 {
        let k = 2 * m;
        // ζ(1/2 - 2m) via the functional equation; the signs cancel against (-1)^m.
        let log_ratio = libm::lgamma(k as f64 + 0.5) - libm::lgamma(k as f64 + 1.0);
        let term = (2.0 / (2.0 * PI)).sqrt()
            * log_ratio.exp()
            * quad::zeta(k as f64 + 0.5)
            * t.powi(k as i32);
        s += term;
        if term.abs() < 1e-18 * s.abs().max(1.0) {
            break;
        }
    }
    s
}

/// `κ = ‖J‖²_{L^{4/3}}` with the normalised measure `dx/2π`, computed by
/// adaptive quadrature with the substitution `x = s³` that removes the
/// `x^{-2/3}` singularity of `|J|^{4/3}`.
pub fn kappa_quadrature(tol: f64) -> f64 {
    let end = PI.cbrt();
    let integrand = |s: f64| {
        if s <= 0.0 {
            // limit of 3 s² |J(s³)|^{4/3} as s → 0
            return 3.0 * (PI / 2.0).powf(2.0 / 3.0);
        }
        3.0 * s * s * j_half_kernel(s * s * s).abs().powf(4.0 / 3.0)
    };
    let zero = quad::bisect(|x| j_half_kernel(x), 0.1, 1.0, 1e-15).cbrt();
    let i = quad::integrate(integrand, 0.0, zero, tol) + quad::integrate(integrand, zero, end, tol);
    (i / PI).powf(1.5)
}

/// Library value of `κ = ‖J‖²_{L^{4/3}}` (from [`kappa_quadrature`] at
/// tolerance 1e-12).
pub const KAPPA: f64 = 0.851_112_308_173_486;

/// Right side of the periodic lattice sum
/// `Σ_j η/((j - x)² + η²) = π sinh 2πη / (cosh 2πη - cos 2πx)`.
pub fn lattice_sum_closed_form(x: f64, eta: f64) -> f64 {
    PI * (2.0 * PI * eta).sinh() / (2.0 * ((PI * x).sin().powi(2) + (PI * eta).sinh().powi(2)))
}

/// Symmetric partial sum `Σ_{|j| ≤ n} η/((j - x)² + η²)` and a bound on the
/// omitted tail.
pub fn lattice_sum_truncated(x: f64, eta: f64, n: i64) -> (f64, f64) {
    let s: f64 = (-n..=n)
        .map(|j| eta / ((j as f64 - x).powi(2) + eta * eta))
        .sum();
    // each tail is below ∫_{n-1}^∞ η/t² dt
    let bound = 2.0 * eta / (n as f64 - 1.0);
    (s, bound)
}

/// Dirichlet integral of the harmonic extension, `∬_D |∇U|² r dr dθ`, by
/// Gauss-Legendre in `r` and trapezoid in `θ` on gradients evaluated in
/// physical space.
pub fn disc_dirichlet_integral(f: &FourierField) -> f64 {
    let m = f.cutoff();
    let nth = (2 * m + 2).next_power_of_two().max(16);
    let (xs, ws) = quad::gauss_legendre(m + 2);
    let mut total = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        let r = 0.5 * (x + 1.0);
        // U_r and U_θ/r as fields in θ
        let ur = f.map_multiplier(|n| {
            Complex64::new(if n == 0 { 0.0 } else { n as f64 * r.powi(n as i32 - 1) }, 0.0)
        });
        let ut = f.map_multiplier(|n| {
            Complex64::new(0.0, if n == 0 { 0.0 } else { n as f64 * r.powi(n as i32 - 1) })
        });
        let a = ur.values_on(nth);
        let b = ut.values_on(nth);
        let ring: f64 = a.iter().zip(&b).map(|(p, q)| p * p + q * q).sum::<f64>()
            * (2.0 * PI / nth as f64);
        total += 0.5 * w * ring * r;
    }
    total
}

/// `2π Σ' |n| |c_n|²`, the same Dirichlet integral from the coefficients.
pub fn dirichlet_integral(f: &FourierField) -> f64 {
    2.0 * PI * homogeneous_sobolev_norm_sq(f, 0.5)
}

/// Both sides of the Milin-Lebedev inequality
/// `log ∫ e^u dθ/2π ≤ (1/4π) ∬ |∇U|² + ∫ u dθ/2π`.
pub fn milin_lebedev_sides(u: &FourierField) -> (f64, f64) {
    let n = (16 * u.cutoff() + 16).next_power_of_two().max(256);
    let v = u.values_on(n);
    let lhs = quad::log_mean_exp(&v);
    let rhs = dirichlet_integral(u) / (4.0 * PI) + u.mean();
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cosn(n: usize, m: usize) -> FourierField {
        let mut c = vec![Complex64::new(0.0, 0.0); m + 1];
        c[n] = Complex64::new(0.5, 0.0);
        FourierField::from_coeffs(c)
    }

    fn sinn(n: usize, m: usize) -> FourierField {
        let mut c = vec![Complex64::new(0.0, 0.0); m + 1];
        c[n] = Complex64::new(0.0, -0.5);
        FourierField::from_coeffs(c)
    }

    fn close(f: &FourierField, g: &FourierField, tol: f64) -> bool {
        f.sub(g).l2_norm() < tol
    }

    fn random_field(seed: u64, m: usize, decay: f64) -> FourierField {
        use rand::Rng;
        let mut rng = crate::rng::seeded(seed);
        let mut c = vec![Complex64::new(0.0, 0.0); m + 1];
        c[0] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for (n, cn) in c.iter_mut().enumerate().skip(1) {
            let s = (n as f64).powf(-decay);
            *cn = Complex64::new(rng.random_range(-s..s), rng.random_range(-s..s));
        }
        FourierField::from_coeffs(c)
    }

    #[test]
    fn hilbert_examples() {
        assert!(close(&hilbert_transform(&cosn(1, 4)), &sinn(1, 4), 1e-15));
        assert!(hilbert_transform(&FourierField::constant(1.0, 4)).l2_norm() == 0.0);
        assert!(close(&hilbert_transform(&sinn(2, 4)), &cosn(2, 4).scale(-1.0), 1e-15));
    }

    #[test]
    fn fractional_derivative_examples() {
        let f = fractional_derivative(&cosn(2, 5), 1.0).unwrap();
        assert!(close(&f, &cosn(2, 5).scale(2.0), 1e-15));
        let g = random_field(3, 12, 1.0);
        let g = g.sub(&FourierField::constant(g.mean(), 12));
        let twice = fractional_derivative(&fractional_derivative(&g, 0.5).unwrap(), 0.5).unwrap();
        assert!(close(&twice, &fractional_derivative(&g, 1.0).unwrap(), 1e-13));
        let c = fractional_derivative(&FourierField::constant(3.0, 4), 0.5).unwrap();
        assert_eq!(c.l2_norm(), 0.0);
        assert!(fractional_derivative(&FourierField::constant(1.0, 4), -0.5).is_err());
    }

    #[test]
    fn sobolev_examples() {
        assert!((sobolev_norm(&cosn(1, 3), 0.5).powi(2) - 0.5).abs() < 1e-15);
        assert_eq!(sobolev_norm(&FourierField::zeros(3), 1.3), 0.0);
        // oracle: partial sums of Σ' r^{2|n|}/|n| against -2 log(1 - r²)
        for &r in &[0.3, 0.6, 0.85] {
            let pr = poisson_field(r, 400, 0.0);
            let f = pr.sub(&FourierField::constant(1.0, 400));
            let mut oracle = 0.0;
            for n in 1..=400 {
                oracle += 2.0 * (r * r as f64).powi(n) / n as f64;
            }
            let got = sobolev_norm(&f, -0.5).powi(2);
            assert!((got - oracle).abs() < 1e-12);
            assert!((got + 2.0 * (1.0 - r * r).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_examples() {
        let f = random_field(9, 16, 0.5);
        let a = poisson_smooth(&poisson_smooth(&f, 0.4).unwrap(), 0.7).unwrap();
        let b = poisson_smooth(&f, 0.28).unwrap();
        assert!(close(&a, &b, 1e-14));
        let r = 0.35;
        assert!((poisson_kernel(r, 0.0) - (1.0 + r) / (1.0 - r)).abs() < 1e-15);
        assert!((poisson_field(r, 80, 0.0).eval(0.0) - (1.0 + r) / (1.0 - r)).abs() < 1e-14);
        let half = poisson_smooth(&cosn(1, 3), 0.5).unwrap();
        assert!(close(&half, &cosn(1, 3).scale(0.5), 1e-16));
        assert!(poisson_smooth(&f, 1.0).is_err());
        assert!(poisson_smooth(&f, -0.1).is_err());
    }

    #[test]
    fn log_kernel_examples() {
        assert!(close(&log_kernel(&cosn(1, 4)), &cosn(1, 4), 1e-16));
        assert!(close(&log_kernel(&cosn(2, 4)), &cosn(2, 4).scale(0.5), 1e-16));
        let one = FourierField::constant(1.0, 4);
        assert!(close(&log_kernel(&one), &one, 1e-16));
    }

    #[test]
    fn log_kernel_matches_convolution_with_log_sine() {
        // Σ' e^{inθ}/|n| = -log(4 sin²(θ/2)); convolve by midpoint quadrature
        let f = random_field(5, 6, 0.0);
        let lf = log_kernel(&f);
        let nq = 20000;
        for &x in &[0.3, 2.0, 4.4] {
            let mut s = 0.0;
            for k in 0..nq {
                let y = 2.0 * PI * (k as f64 + 0.5) / nq as f64;
                s += -(4.0 * ((x - y) / 2.0).sin().powi(2)).ln() * f.eval(y);
            }
            let conv = s / nq as f64 + f.mean();
            assert!((conv - lf.eval(x)).abs() < 1e-3);
        }
    }

    #[test]
    fn j_half_examples() {
        assert!(close(&j_half_convolve(&cosn(1, 4)), &cosn(1, 4).scale(0.5), 1e-16));
        assert_eq!(j_half_convolve(&FourierField::constant(1.0, 4)).l2_norm(), 0.0);
    }

    /// Independent evaluation of `Σ_{n≥1} cos(nx)/√n`: partial sum to 1e5
    /// plus a tail from repeated summation by parts against the geometric
    /// series, which gains a factor `1/(n|1 - e^{ix}|)` per pass.
    fn j_oracle(x: f64) -> f64 {
        let big = 100_000usize;
        let mut s = 0.0;
        for n in 1..=big {
            s += (n as f64 * x).cos() / (n as f64).sqrt();
        }
        let z = Complex64::from_polar(1.0, x);
        fn diff(k: usize, n: usize) -> f64 {
            // backward difference of order k of t^{-1/2} at n
            let mut acc = 0.0;
            let mut binom = 1.0;
            for i in 0..=k {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binom / ((n - i) as f64).sqrt();
                binom = binom * (k - i) as f64 / (i + 1) as f64;
            }
            acc
        }
        fn tail(z: Complex64, k: usize, m: usize, depth: usize) -> Complex64 {
            if depth == 0 {
                return Complex64::new(0.0, 0.0);
            }
            (z.powu(m as u32) * diff(k, m) + tail(z, k + 1, m + 1, depth - 1)) / (1.0 - z)
        }
        s + tail(z, 0, big + 1, 6).re
    }

    #[test]
    fn j_kernel_matches_direct_summation() {
        for &x in &[0.05, 0.2, 0.7, 1.5, 2.6, PI] {
            let a = j_half_kernel(x);
            let b = j_oracle(x);
            assert!((a - b).abs() < 1e-9, "x={x}: {a} vs {b}");
        }
        assert!((j_half_kernel(1.0) - j_half_kernel(2.0 * PI - 1.0)).abs() < 1e-14);
        // J(π) = -(1 - √2) ζ(1/2)
        assert!((j_half_kernel(PI) + (1.0 - 2f64.sqrt()) * quad::zeta(0.5)).abs() < 1e-13);
    }

    #[test]
    fn kappa_constant_matches_quadrature() {
        let k = kappa_quadrature(1e-10);
        assert!((k - KAPPA).abs() < 1e-8, "{k}");
        // oracle: composite Gauss-Legendre in s = x^{1/3}, panels split at
        // the sign change of J where |J|^{4/3} has a kink
        let (gx, gw) = quad::gauss_legendre(10);
        let end = PI.cbrt();
        let kink = quad::bisect(j_oracle, 0.5, 1.5, 1e-14).cbrt();
        let panels = 400;
        let mut edges: Vec<f64> = (0..=panels / 2).map(|p| kink * p as f64 / (panels / 2) as f64).collect();
        edges.extend((1..=panels / 2).map(|p| kink + (end - kink) * p as f64 / (panels / 2) as f64));
        let mut acc = 0.0;
        for w2 in edges.windows(2) {
            let (a, b) = (w2[0], w2[1]);
            for (x, w) in gx.iter().zip(&gw) {
                let s = 0.5 * (a + b) + 0.5 * (b - a) * x;
                acc += 0.5 * (b - a) * w * 3.0 * s * s * j_half_kernel(s * s * s).abs().powf(4.0 / 3.0);
            }
        }
        let oracle = (acc / PI).powf(1.5);
        assert!((oracle - KAPPA).abs() < 1e-8, "{oracle}");
    }

    #[test]
    fn cubic_integral_examples() {
        assert!(cubic_integral(&cosn(1, 4)).unwrap().abs() < 1e-16);
        let f = cosn(1, 4).add(&cosn(2, 4));
        // oracle: fine-grid midpoint rule of (cos x + cos 2x)^3
        let n = 10_000;
        let oracle: f64 = (0..n)
            .map(|k| {
                let x = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                (x.cos() + (2.0 * x).cos()).powi(3)
            })
            .sum::<f64>()
            / n as f64;
        assert!((oracle - 0.75).abs() < 1e-12);
        assert!((cubic_integral(&f).unwrap() - oracle).abs() < 1e-14);
        assert_eq!(cubic_integral(&FourierField::zeros(3)).unwrap(), 0.0);
        let coarse = f.with_grid_size(10).unwrap();
        assert!(matches!(cubic_integral(&coarse), Err(Error::Config(_))));
    }

    #[test]
    fn columnar_text_round_trip() {
        let f = FourierField::from_real_basis(0.25, &[1.0 / 3.0, -2.0], &[0.1]);
        let text = f.to_columns();
        assert_eq!(text.lines().next(), Some("0 0.125 0.0"));
        assert_eq!(FourierField::from_columns(&text).unwrap(), f);
        let sparse = FourierField::from_columns("# header\n2 0.5 -1\n\n").unwrap();
        assert_eq!(sparse.cutoff(), 2);
        assert_eq!(sparse.coeff(-2), Complex64::new(0.5, 1.0));
        assert!(FourierField::from_columns("1 2").is_err());
        assert!(FourierField::from_columns("").is_err());
        let csv = FourierField::constant(2.0, 1).grid_csv(4);
        assert_eq!(csv.lines().nth(1), Some("0.0,2.0"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn grid_round_trip_and_parseval() {
        let f = random_field(11, 40, 0.3);
        let g = FourierField::from_grid(&f.to_grid(), 40).unwrap();
        for k in 0..=40 {
            let d = (f.coeff(k) - g.coeff(k)).norm();
            assert!(d <= 1e-12 * f.coeff(k).norm().max(1e-3));
        }
        let v = f.to_grid();
        let mass = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
        assert!((mass - f.l2_norm_sq()).abs() < 1e-12 * mass);
    }

    #[test]
    fn real_basis_adapters() {
        let f = FourierField::from_real_basis(1.0, &[0.3, -0.2], &[0.7, 0.1]);
        assert!((f.a(1) - 0.3).abs() < 1e-16 && (f.b(2) - 0.1).abs() < 1e-16);
        let x: f64 = 0.9;
        let direct = 0.5 + 0.3 * x.cos() - 0.2 * (2.0 * x).cos() + 0.7 * x.sin() + 0.1 * (2.0 * x).sin();
        assert!((f.eval(x) - direct).abs() < 1e-15);
    }

    #[test]
    fn lattice_identity_within_tail_bound() {
        for &eta in &[0.2, 1.0, 3.0] {
            for i in 0..10 {
                let x = i as f64 / 10.0;
                let (s, bound) = lattice_sum_truncated(x, eta, 200_000);
                assert!((s - lattice_sum_closed_form(x, eta)).abs() <= bound);
            }
        }
        // the variant sinh 2πη/(sin²πx + sinh²πη) is off by a factor π/2
        let (s, _) = lattice_sum_truncated(0.3, 1.0, 200_000);
        let variant = (2.0 * PI).sinh() / ((0.3 * PI).sin().powi(2) + PI.sinh().powi(2));
        assert!(((s / variant) - PI / 2.0).abs() < 1e-4);
    }

    #[test]
    fn milin_lebedev_two_routes_and_inequality() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(2024);
        for trial in 0..200 {
            let m = rng.random_range(1..12);
            let amp = rng.random_range(0.1..3.0);
            let u = random_field(1000 + trial, m, 0.5).scale(amp);
            let a = dirichlet_integral(&u);
            let b = disc_dirichlet_integral(&u);
            assert!((a - b).abs() < 1e-6 * a.max(1.0), "{a} {b}");
            let (lhs, rhs) = milin_lebedev_sides(&u);
            assert!(lhs <= rhs + 1e-12, "trial {trial}: {lhs} > {rhs}");
        }
    }

    proptest! {
        #[test]
        fn hilbert_squared_is_minus_identity(seed in 0u64..10_000, m in 1usize..30) {
            let f = random_field(seed, m, 0.5);
            let f0 = f.sub(&FourierField::constant(f.mean(), m));
            let hh = hilbert_transform(&hilbert_transform(&f0));
            prop_assert!(close(&hh, &f0.scale(-1.0), 1e-14));
        }

        #[test]
        fn reality_survives_grid_round_trip(seed in 0u64..10_000, m in 1usize..50) {
            let f = random_field(seed, m, 0.0);
            let v = f.to_grid();
            let g = FourierField::from_grid(&v, m).unwrap();
            prop_assert!(close(&f, &g, 1e-12 * f.l2_norm().max(1.0)));
        }

        #[test]
        fn parseval(seed in 0u64..10_000, m in 1usize..60) {
            let f = random_field(seed, m, 0.2);
            let v = f.to_grid();
            let mass = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
            prop_assert!((mass - f.l2_norm_sq()).abs() < 1e-12 * mass.max(1.0));
        }
    }
}
