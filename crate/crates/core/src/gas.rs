//! Circular log-gas at inverse temperature 2: energies, a Metropolis sampler
//! for the eigenvalue measure, Toeplitz partition functions, equilibrium
//! densities and the free entropy and information functionals.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::quad;
use crate::rng;
use crate::spectral::{self, FourierField};

/// Largest `n` accepted by [`toeplitz_partition`].
pub const N_MAX: usize = 120;

/// Sorted angles in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleEnsemble {
    angles: Vec<f64>,
}

impl AngleEnsemble {
    pub fn new(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Domain("empty ensemble".into()));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Domain("non-finite angle".into()));
        }
        let mut a: Vec<f64> = angles.iter().map(|x| x.rem_euclid(2.0 * PI)).collect();
        // rem_euclid can round up to exactly 2π
        for x in &mut a {
            if *x >= 2.0 * PI {
                *x = 0.0;
            }
        }
        a.sort_by(f64::total_cmp);
        Ok(Self { angles: a })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }
}

/// A probability density on the circle, in units of 1/angle, kept both as
/// grid values and as a band-limited Fourier series.
#[derive(Debug, Clone)]
pub struct CircleDensity {
    field: FourierField,
    values: Vec<f64>,
}

impl CircleDensity {
    /// Validates nonnegativity on the grid and unit mass.
    pub fn from_field(field: FourierField) -> Result<Self> {
        let values = field.to_grid();
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-12 {
            return Err(Error::Domain(format!("density takes negative value {min:e}")));
        }
        let mass = 2.0 * PI * field.mean();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("density has mass {mass}")));
        }
        Ok(Self { field, values })
    }

    /// Samples `f` with cutoff `m` and rescales to unit mass.
    pub fn normalized_from_fn<F: Fn(f64) -> f64>(m: usize, f: F) -> Result<Self> {
        let raw = FourierField::from_fn(m, f);
        let mass = 2.0 * PI * raw.mean();
        if !(mass > 0.0) {
            return Err(Error::Domain("density has no mass".into()));
        }
        Self::from_field(raw.scale(1.0 / mass))
    }

    /// Density from nonnegative samples on a uniform grid, rescaled to unit
    /// mass by the trapezoid rule. The grid values are kept exactly and the
    /// field interpolates them below the Nyquist mode.
    pub fn from_grid_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 8 {
            return Err(Error::Config("need at least 8 grid values".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Domain("grid density must be nonnegative".into()));
        }
        let mass = values.iter().sum::<f64>() * 2.0 * PI / n as f64;
        if !(mass > 0.0) {
            return Err(Error::Domain("density has no mass".into()));
        }
        let values: Vec<f64> = values.iter().map(|v| v / mass).collect();
        let field = FourierField::from_grid(&values, n / 2 - 1)?;
        Ok(Self { field, values })
    }

    pub fn uniform(m: usize) -> Self {
        Self::from_field(FourierField::constant(1.0 / (2.0 * PI), m)).expect("uniform is valid")
    }

    /// `(1 + Σ a_j cos jθ + b_j sin jθ)/2π`.
    pub fn trigonometric(a: &[f64], b: &[f64], m: usize) -> Result<Self> {
        let field = FourierField::from_real_basis(2.0, a, b).scale(1.0 / (2.0 * PI));
        Self::from_field(field.with_cutoff(m.max(a.len()).max(b.len())))
    }

    pub fn field(&self) -> &FourierField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.field.eval(x)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn rotate(&self, a: f64) -> Self {
        Self::from_field(self.field.shift(a)).expect("rotation keeps validity")
    }

    /// Density of the mean empirical measure of the samples, smoothed by the
    /// Poisson kernel `P_r`.
    pub fn from_ensembles(samples: &[AngleEnsemble], r: f64, m: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("no samples".into()));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); m + 1];
        let total: usize = samples.iter().map(|e| e.n()).sum();
        for e in samples {
            for &t in e.angles() {
                for (j, z) in c.iter_mut().enumerate() {
                    *z += Complex64::from_polar(r.powi(j as i32), -(j as f64) * t);
                }
            }
        }
        let c = c.into_iter().map(|z| z / (2.0 * PI * total as f64)).collect();
        Self::from_field(FourierField::from_coeffs(c))
    }
}

/// `Ẽ = (1/n)Σ v(θ_j) - (1/n²)Σ_{j<k} log(4 sin²((θ_k - θ_j)/2))`; `+∞` for
/// coincident angles.
pub fn tilde_energy(e: &AngleEnsemble, v: &FourierField) -> f64 {
    let n = e.n() as f64;
    let a = e.angles();
    let mut pair = 0.0;
    for j in 0..a.len() {
        for k in j + 1..a.len() {
            let s = 4.0 * ((a[k] - a[j]) / 2.0).sin().powi(2);
            if s == 0.0 {
                return f64::INFINITY;
            }
            pair += s.ln();
        }
    }
    a.iter().map(|&t| v.eval(t)).sum::<f64>() / n - pair / (n * n)
}

/// Settings for [`mcmc_ensemble`]. One sweep proposes a move for every angle
/// in turn and then a global rotation.
#[derive(Debug, Clone)]
pub struct GasChainParams {
    pub n: usize,
    pub samples: usize,
    pub burn_in: usize,
    /// Sweeps between recorded samples.
    pub thin: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct GasSamples {
    pub ensembles: Vec<AngleEnsemble>,
    pub acceptance_rate: f64,
    pub step: f64,
}

/// Metropolis chain for the density `∝ exp(-n²Ẽ_{n,v})` on the torus.
pub fn mcmc_ensemble(v: &FourierField, p: &GasChainParams) -> Result<GasSamples> {
    if p.n < 2 {
        return Err(Error::Domain("need at least two angles".into()));
    }
    if p.thin == 0 || p.samples == 0 {
        return Err(Error::Config("thin and samples must be positive".into()));
    }
    let n = p.n;
    let nf = n as f64;
    let mut rng = rng::seeded(p.seed);
    let offset: f64 = rng.random::<f64>() * 2.0 * PI / nf;
    let mut th: Vec<f64> = (0..n).map(|j| offset + 2.0 * PI * j as f64 / nf).collect();
    let mut vv: Vec<f64> = th.iter().map(|&t| v.eval(t)).collect();
    let mut step = 2.0 * PI / nf;
    let mut rot_step = 1.0 / nf.sqrt();
    let (mut acc, mut tried) = (0usize, 0usize);
    let mut out = Vec::with_capacity(p.samples);
    let total = p.burn_in + p.samples * p.thin;
    for sweep in 0..total {
        let burning = sweep < p.burn_in;
        let gain = 1.0 / ((sweep + 1) as f64).powf(0.6);
        for j in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            let new = th[j] + step * z;
            let vn = v.eval(new);
            let mut dl = -nf * (vn - vv[j]);
            for k in 0..n {
                if k != j {
                    let a = ((th[k] - new) / 2.0).sin();
                    let b = ((th[k] - th[j]) / 2.0).sin();
                    dl += ((a * a) / (b * b)).ln();
                }
            }
            let u: f64 = rng.random();
            let ok = u.ln() < dl;
            if ok {
                th[j] = new;
                vv[j] = vn;
            }
            if burning {
                step *= (gain * ((ok as u8 as f64) - 0.4) / nf).exp();
            } else {
                acc += ok as usize;
                tried += 1;
            }
        }
        let z: f64 = rng.sample(StandardNormal);
        let a = rot_step * z;
        let moved: Vec<f64> = th.iter().map(|&t| v.eval(t + a)).collect();
        let dl = -nf * (moved.iter().sum::<f64>() - vv.iter().sum::<f64>());
        let u: f64 = rng.random();
        let ok = u.ln() < dl;
        if ok {
            for t in &mut th {
                *t += a;
            }
            vv = moved;
        }
        if burning {
            rot_step *= (gain * ((ok as u8 as f64) - 0.4)).exp();
        }
        if !burning && (sweep - p.burn_in + 1) % p.thin == 0 {
            out.push(AngleEnsemble::new(&th)?);
        }
    }
    Ok(GasSamples { ensembles: out, acceptance_rate: acc as f64 / tried.max(1) as f64, step })
}

/// Independent chains seeded from child streams of `p.seed`, run on up to
/// `threads` threads and concatenated in chain order.
pub fn mcmc_chains(v: &FourierField, p: &GasChainParams, chains: usize, threads: usize) -> Result<GasSamples> {
    if chains == 0 {
        return Err(Error::Config("need at least one chain".into()));
    }
    let per = p.samples.div_ceil(chains);
    let seeds: Vec<u64> = (0..chains as u64)
        .map(|c| rng::stream(p.seed, c + 1).random::<u64>())
        .collect();
    let mut results: Vec<Option<Result<GasSamples>>> = (0..chains).map(|_| None).collect();
    let threads = threads.clamp(1, chains);
    std::thread::scope(|s| {
        for (t, chunk) in results.chunks_mut(chains.div_ceil(threads)).enumerate() {
            let seeds = &seeds;
            s.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    let c = t * chains.div_ceil(threads) + i;
                    let q = GasChainParams { samples: per, seed: seeds[c], ..p.clone() };
                    *slot = Some(mcmc_ensemble(v, &q));
                }
            });
        }
    });
    let mut ensembles = Vec::with_capacity(per * chains);
    let (mut acc, mut step) = (0.0, 0.0);
    for r in results {
        let r = r.expect("every chain ran")?;
        acc += r.acceptance_rate / chains as f64;
        step += r.step / chains as f64;
        ensembles.extend(r.ensembles);
    }
    Ok(GasSamples { ensembles, acceptance_rate: acc, step })
}

/// `log Z_n` for `Z_n = ∫ e^{-n Σ v(θ_j)} Π_{j<k} |e^{iθ_k} - e^{iθ_j}|² dθ`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Partition {
    pub n: usize,
    pub log_z: f64,
    /// Imaginary part of `log det`, zero up to rounding for real `v`.
    pub phase: f64,
    /// Ratio of the largest to the smallest pivot modulus of the Toeplitz
    /// factorisation.
    pub pivot_ratio: f64,
    pub warning: Option<String>,
}

fn quadrature_points(v: &FourierField, n: usize) -> usize {
    (8 * n * v.cutoff().max(1)).max(4 * n + 8)
}

fn log_pivots(diag: impl Iterator<Item = Complex64>) -> Result<(Complex64, f64)> {
    let mut log_det = Complex64::new(0.0, 0.0);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for d in diag {
        if d.norm() == 0.0 {
            return Err(Error::Numerical("singular Toeplitz matrix".into()));
        }
        log_det += d.ln();
        lo = lo.min(d.norm());
        hi = hi.max(d.norm());
    }
    Ok((log_det, hi / lo))
}

fn log_factorial(n: usize) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

/// `n!·det[∫ e^{i(j-k)θ - n v(θ)} dθ]` in log form.
///
/// With the trapezoid rule on `L` points the Toeplitz matrix is the Gram
/// matrix `A*A` of `A_{lj} = (2πw_l/L)^{1/2} e^{ijθ_l}`, `w = e^{-nv}`. The
/// determinant is taken from the pivots of a Householder QR of `A`, whose
/// condition number is the square root of that of the Toeplitz matrix.
pub fn toeplitz_partition(v: &FourierField, n: usize) -> Result<Partition> {
    if n == 0 || n > N_MAX {
        return Err(Error::Config(format!("n = {n} outside 1..={N_MAX}")));
    }
    let pts = quadrature_points(v, n);
    let vals = v.values_on(pts);
    let h = 2.0 * PI / pts as f64;
    let nf = n as f64;
    let a = DMatrix::from_fn(pts, n, |l, j| {
        let t = h * l as f64;
        Complex64::from_polar((h * (-nf * vals[l]).exp()).sqrt(), j as f64 * t)
    });
    let r = a.qr().r();
    let (log_r, ratio) = log_pivots((0..n).map(|i| r[(i, i)]))?;
    let pivot_ratio = ratio * ratio;
    let warning = (pivot_ratio > 1e26)
        .then(|| format!("determinant precision doubtful: squared pivot ratio {pivot_ratio:.2e}"));
    Ok(Partition { n, log_z: log_factorial(n) + 2.0 * log_r.re, phase: 0.0, pivot_ratio, warning })
}

/// Coefficients `ŵ_m = (1/2π)∫ e^{-n v(θ)} e^{-imθ} dθ` for `|m| < n`, by
/// the trapezoid rule, ordered from `m = 1 - n` to `m = n - 1`.
pub fn weight_coefficients(v: &FourierField, n: usize) -> Vec<Complex64> {
    let pts = quadrature_points(v, n);
    let vals = v.values_on(pts);
    let mut buf: Vec<Complex64> = vals.iter().map(|&x| Complex64::new((-(n as f64) * x).exp(), 0.0)).collect();
    spectral::fft(&mut buf, false);
    let s = 1.0 / pts as f64;
    (0..2 * n - 1)
        .map(|i| {
            let m = i as i64 - (n as i64 - 1);
            buf[m.rem_euclid(pts as i64) as usize] * s
        })
        .collect()
}

/// The same quantity from an LU factorisation of the assembled Toeplitz
/// matrix. Loses accuracy much sooner than [`toeplitz_partition`] as `n v`
/// grows.
pub fn toeplitz_partition_lu(v: &FourierField, n: usize) -> Result<Partition> {
    if n == 0 || n > N_MAX {
        return Err(Error::Config(format!("n = {n} outside 1..={N_MAX}")));
    }
    let w = weight_coefficients(v, n);
    // entry (j, k) is 2π ŵ_{k-j}
    let t = DMatrix::from_fn(n, n, |j, k| 2.0 * PI * w[k + n - 1 - j]);
    let u = t.lu().u();
    let (log_det, pivot_ratio) = log_pivots((0..n).map(|i| u[(i, i)]))?;
    let phase = log_det.im.sin().abs();
    let warning = (pivot_ratio > 1e13 || phase > 1e-8)
        .then(|| format!("determinant precision doubtful: pivot ratio {pivot_ratio:.2e}, phase {phase:.1e}"));
    Ok(Partition { n, log_z: log_factorial(n) + log_det.re, phase, pivot_ratio, warning })
}

/// `log(n!(2π)^n)`, the exact value at `v = 0`.
pub fn log_partition_free(n: usize) -> f64 {
    log_factorial(n) + n as f64 * (2.0 * PI).ln()
}

/// Density solving `Q = 2∫ log|e^{iθ} - e^{iφ}| ρ₀(φ) dφ + C` by Fourier
/// inversion: `ρ₀ = 1/2π - (1/2π)Σ m(A_m cos mθ + B_m sin mθ)`.
pub fn equilibrium_density(q: &FourierField) -> Result<CircleDensity> {
    let field = q
        .map_multiplier(|m| Complex64::new(-(m as f64) / (2.0 * PI), 0.0))
        .add(&FourierField::constant(1.0 / (2.0 * PI), q.cutoff()));
    let fine = field.values_on(4096.max(8 * q.cutoff()));
    let min = fine.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        return Err(Error::Domain(format!(
            "support collapse: the inverted density dips to {min:e}, so the equilibrium measure does not have full support"
        )));
    }
    CircleDensity::from_field(field)
}

fn log_chord(a: f64, b: f64) -> f64 {
    (2.0 * ((a - b) / 2.0).sin().abs()).ln()
}

/// `∫ log|e^{iθ} - e^{iφ}| f(φ) dφ` by adaptive quadrature. Each half of the
/// period is mapped by `φ = θ ± πs²`, which softens the logarithmic
/// singularity to `s log s`.
pub fn log_potential_at<F: Fn(f64) -> f64>(f: F, theta: f64, tol: f64) -> f64 {
    let g = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        let x = PI * s * s;
        2.0 * PI * s * log_chord(0.0, x) * (f(theta + x) + f(theta - x))
    };
    quad::integrate(g, 0.0, 1.0, tol)
}

/// `max_θ |Q(θ) - 2∫ log|e^{iθ} - e^{iφ}|ρ(φ)dφ - C|` over `points` angles,
/// with `C` fitted as the mean offset.
pub fn equilibrium_residual(q: &FourierField, rho: &CircleDensity, points: usize) -> f64 {
    let d: Vec<f64> = (0..points)
        .map(|i| {
            let t = 2.0 * PI * (i as f64 + 0.25) / points as f64;
            q.eval(t) - 2.0 * log_potential_at(|p| rho.eval(p), t, 1e-12)
        })
        .collect();
    let c = d.iter().sum::<f64>() / points as f64;
    d.iter().map(|x| (x - c).abs()).fold(0.0, f64::max)
}

/// `∬ log(1/|e^{iθ} - e^{iφ}|) f(θ) g(φ) dθ dφ` with the outer integral by the
/// trapezoid rule on `outer` points.
pub fn log_energy_quadrature(f: &FourierField, g: &FourierField, outer: usize) -> f64 {
    let h = 2.0 * PI / outer as f64;
    (0..outer)
        .map(|i| {
            let t = h * i as f64;
            -f.eval(t) * log_potential_at(|p| g.eval(p), t, 1e-13)
        })
        .sum::<f64>()
        * h
}

/// `∬ log(1/|e^{iθ} - e^{iφ}|) f(θ) g(φ) dθ dφ = 4π² Σ_{m≥1} (1/m) Re(f̂_m conj ĝ_m)`
/// for real `f`, `g`.
pub fn log_energy_fourier(f: &FourierField, g: &FourierField) -> f64 {
    let m = f.cutoff().min(g.cutoff());
    (1..=m)
        .map(|j| 1.0 / j as f64 * (f.coeff(j as i64) * g.coeff(j as i64).conj()).re)
        .sum::<f64>()
        * 4.0
        * PI
        * PI
}

/// `E_Q(ρ) = ∫Qρ + ∬ log(1/|e^{iθ} - e^{iφ}|) ρρ`.
pub fn energy_functional(q: &FourierField, rho: &CircleDensity) -> f64 {
    let m = q.cutoff().max(rho.field().cutoff());
    2.0 * PI * spectral::inner(&q.with_cutoff(m), &rho.field().with_cutoff(m)) + log_energy_fourier(rho.field(), rho.field())
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FreeEntropy {
    pub quadrature: f64,
    pub fourier: f64,
}

/// Relative free entropy `∬ (ω - ρ₀)⊗(ω - ρ₀) log(1/|e^{iθ} - e^{iφ}|)` by a
/// double quadrature and by `Σ_{m≥1} (1/m)|∫(ω - ρ₀)e^{imθ}dθ|²`.
pub fn free_entropy(omega: &CircleDensity, rho0: &CircleDensity) -> Result<FreeEntropy> {
    let m = omega.field().cutoff().max(rho0.field().cutoff());
    let d = omega.field().with_cutoff(m).sub(&rho0.field().with_cutoff(m));
    let fourier: f64 = (1..=m)
        .map(|j| (2.0 * PI * d.coeff(j as i64)).norm_sqr() / j as f64)
        .sum();
    let quadrature = log_energy_quadrature(&d, &d, (4 * m + 8).max(64));
    if (quadrature - fourier).abs() > 1e-6 {
        return Err(Error::Numerical(format!(
            "free entropy routes disagree: quadrature {quadrature}, Fourier {fourier}"
        )));
    }
    Ok(FreeEntropy { quadrature, fourier })
}

/// `p.v. ∫ cot((θ - φ)/2) f(φ) dφ`, which is `2π` times the Fourier-multiplier
/// Hilbert transform.
pub fn cot_transform(f: &FourierField) -> FourierField {
    spectral::hilbert_transform(f).scale(2.0 * PI)
}

/// Relative free information `∫ (𝓗(ω - ρ₀))² ω dθ` with `𝓗` the
/// principal-value cotangent transform of [`cot_transform`].
pub fn free_information(omega: &CircleDensity, rho0: &CircleDensity) -> Result<f64> {
    let m = omega.field().cutoff().max(rho0.field().cutoff());
    let d = omega.field().with_cutoff(m).sub(&rho0.field().with_cutoff(m));
    let h = cot_transform(&d);
    let n = (8 * m + 64).next_power_of_two();
    let (hv, wv) = (h.values_on(n), omega.field().values_on(n));
    let cube: f64 = wv.iter().map(|x| x.abs().powi(3)).sum::<f64>() * 2.0 * PI / n as f64;
    if !cube.is_finite() {
        return Err(Error::Domain("density is not in L³".into()));
    }
    Ok(hv.iter().zip(&wv).map(|(a, b)| a * a * b).sum::<f64>() * 2.0 * PI / n as f64)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BqEstimate {
    pub n: Vec<usize>,
    /// `(1/n²) log Z_n(Q)`.
    pub raw: Vec<f64>,
    /// `(1/n²) log Z_n(Q) - (1/n²) log(n!(2π)^n)`.
    pub corrected: Vec<f64>,
    pub extrapolated: f64,
    pub warnings: Vec<String>,
}

/// Neville extrapolation to `h = 0` of values sampled at `h`.
pub fn extrapolate_to_zero(h: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let k = h.len();
    for level in 1..k {
        for i in 0..k - level {
            p[i] = (h[i + level] * p[i] - h[i] * p[i + 1]) / (h[i + level] - h[i]);
        }
    }
    p[0]
}

/// `B(Q) = lim (1/n²) log Z_n(Q)`. The exact `Q = 0` sequence, which tends to
/// zero like `log n / n`, is subtracted before a Richardson extrapolation in
/// `1/n` over the last three entries of `n_list`.
pub fn bq_estimate(q: &FourierField, n_list: &[usize]) -> Result<BqEstimate> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("n_list must be nonempty and increasing".into()));
    }
    let mut raw = Vec::new();
    let mut corrected = Vec::new();
    let mut warnings = Vec::new();
    for &n in n_list {
        let p = toeplitz_partition(q, n)?;
        if let Some(w) = p.warning {
            warnings.push(format!("n = {n}: {w}"));
        }
        let n2 = (n * n) as f64;
        raw.push(p.log_z / n2);
        corrected.push((p.log_z - log_partition_free(n)) / n2);
    }
    let d: Vec<f64> = corrected.windows(2).map(|w| w[1] - w[0]).collect();
    if d.windows(2).any(|w| w[0] * w[1] < 0.0 && w[0].abs().min(w[1].abs()) > 1e-8) {
        warnings.push("corrected sequence is not monotone".into());
    }
    let tail = n_list.len().saturating_sub(3);
    let h: Vec<f64> = n_list[tail..].iter().map(|&n| 1.0 / n as f64).collect();
    let extrapolated = extrapolate_to_zero(&h, &corrected[tail..]);
    Ok(BqEstimate { n: n_list.to_vec(), raw, corrected, extrapolated, warnings })
}

/// `Σ_j g(θ_j)`.
pub fn linear_stat(e: &AngleEnsemble, g: &FourierField) -> f64 {
    e.angles().iter().map(|&t| g.eval(t)).sum()
}

/// `2P_{e^{-η}}(x - θ) - 2` as a function of `θ`, at `x = 0`.
pub fn poisson_statistic(eta: f64, m: usize) -> FourierField {
    spectral::poisson_field((-eta).exp(), m, 0.0)
        .scale(2.0)
        .sub(&FourierField::constant(2.0, m))
}

/// Classical linear-statistic variance `2Σ_{m≥1} m|ĝ_m|²`.
pub fn classical_clt_variance(g: &FourierField) -> f64 {
    2.0 * (1..=g.cutoff()).map(|m| m as f64 * g.coeff(m as i64).norm_sqr()).sum::<f64>()
}

/// `2‖g‖²_{H^{1/2}}` with `‖g‖²_{H^{1/2}} = Σ_{m≠0} |m||ĝ_m|²`.
pub fn sobolev_clt_variance(g: &FourierField) -> f64 {
    2.0 * classical_clt_variance(g)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ClTReport {
    pub n: usize,
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    /// Kolmogorov-Smirnov distance to the normal law with the sample moments.
    pub ks: f64,
    pub classical_variance: f64,
    pub sobolev_variance: f64,
    /// `variance / sobolev_variance`.
    pub ratio_to_sobolev: f64,
    pub acceptance_rate: f64,
}

/// Monte Carlo law of `Σ g(θ_j)` under the gas with potential `v`.
pub fn clt_experiment(
    g: &FourierField,
    v: &FourierField,
    p: &GasChainParams,
    chains: usize,
    threads: usize,
) -> Result<(ClTReport, Vec<f64>)> {
    if g.mean().abs() > 1e-12 {
        return Err(Error::Domain("test function must have mean zero".into()));
    }
    let s = mcmc_chains(v, p, chains, threads)?;
    let vals: Vec<f64> = s.ensembles.iter().map(|e| linear_stat(e, g)).collect();
    let (mean, variance) = quad::mean_var(&vals);
    let sd = variance.sqrt();
    let ks = quad::ks_one_sample(&vals, |x| quad::normal_cdf((x - mean) / sd));
    let classical_variance = classical_clt_variance(g);
    let sobolev_variance = sobolev_clt_variance(g);
    Ok((
        ClTReport {
            n: p.n,
            samples: vals.len(),
            mean,
            variance,
            ks,
            classical_variance,
            sobolev_variance,
            ratio_to_sobolev: variance / sobolev_variance,
            acceptance_rate: s.acceptance_rate,
        },
        vals,
    ))
}

/// `f(Θ) = (1/n)Σ sinh η / (sinh²(η/2) + sin²((x - θ_j)/2))` at `x`.
pub fn mean_poisson_field(e: &AngleEnsemble, eta: f64, x: f64) -> f64 {
    let s = (eta / 2.0).sinh().powi(2);
    e.angles()
        .iter()
        .map(|t| eta.sinh() / (s + ((x - t) / 2.0).sin().powi(2)))
        .sum::<f64>()
        / e.n() as f64
}
