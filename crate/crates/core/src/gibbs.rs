//! Random-walk Metropolis sampling of the truncated Gibbs measure
//! `exp(-β∫u³ - Σ j(a_j² + b_j²)/2)` restricted to the ball `∫u² ≤ N`.
//!
//! States are the real coefficients `(a_1, b_1, …, a_M, b_M)` of
//! `u = Σ a_j cos jx + b_j sin jx`; the mean is fixed at zero and
//! `∫ u² dx/2π = (1/2) Σ (a_j² + b_j²)`.

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::quad;
use crate::rng::{self, Rng};
use crate::spectral::{self, FourierField};

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsParams {
    pub beta: f64,
    /// Ball radius squared; `f64::INFINITY` removes the constraint.
    pub ball: f64,
    pub modes: usize,
    pub steps: usize,
    pub burn_in: usize,
    /// Keep every `thin`-th post-burn-in state.
    pub thin: usize,
    /// Relative per-mode step sizes; multiplied by a global factor that is
    /// adapted during burn-in and then frozen.
    pub proposal_scale: Vec<f64>,
    pub seed: u64,
}

impl GibbsParams {
    /// Step sizes `1/√j` matched to the free measure.
    pub fn new(beta: f64, ball: f64, modes: usize, steps: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            beta,
            ball,
            modes,
            steps,
            burn_in,
            thin: 1,
            proposal_scale: (1..=modes).map(|j| 1.0 / (j as f64).sqrt()).collect(),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.ball > 0.0) {
            return Err(Error::Config(format!("ball radius {} must be positive", self.ball)));
        }
        if self.modes < 1 {
            return Err(Error::Config("mode cutoff must be at least 1".into()));
        }
        if self.steps <= self.burn_in {
            return Err(Error::Config(format!(
                "chain length {} must exceed burn-in {}",
                self.steps, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thinning must be at least 1".into()));
        }
        if self.proposal_scale.len() != self.modes || self.proposal_scale.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Config("need one positive proposal scale per mode".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SampleSet {
    pub draws: Vec<FourierField>,
    /// Post-burn-in acceptance rate.
    pub acceptance_rate: f64,
    /// Global step factor after adaptation.
    pub step_factor: f64,
    pub warnings: Vec<String>,
}

/// Real coefficient vector `(a_1, b_1, …)` of a mean-free field.
pub fn to_coords(u: &FourierField) -> Vec<f64> {
    (1..=u.cutoff()).flat_map(|j| [u.a(j), u.b(j)]).collect()
}

pub fn from_coords(x: &[f64]) -> FourierField {
    let a: Vec<f64> = x.iter().step_by(2).copied().collect();
    let b: Vec<f64> = x.iter().skip(1).step_by(2).copied().collect();
    FourierField::from_real_basis(0.0, &a, &b)
}

fn cubic_of_coords(x: &[f64]) -> f64 {
    spectral::cubic_integral(&from_coords(x)).expect("dealiased by construction")
}

fn log_weight_coords(x: &[f64], beta: f64, ball: f64) -> f64 {
    let sq: f64 = x.iter().map(|v| v * v).sum();
    if 0.5 * sq > ball {
        return f64::NEG_INFINITY;
    }
    let gauss: f64 = x
        .chunks(2)
        .enumerate()
        .map(|(i, ab)| (i + 1) as f64 * (ab[0] * ab[0] + ab[1] * ab[1]) / 2.0)
        .sum();
    let cubic = if beta == 0.0 { 0.0 } else { beta * cubic_of_coords(x) };
    -cubic - gauss
}

/// Unnormalised log density; `-∞` outside the ball.
pub fn log_weight(u: &FourierField, beta: f64, ball: f64) -> f64 {
    log_weight_coords(&to_coords(u), beta, ball)
}

/// Independent draw from the `β = 0`, `N = ∞` measure:
/// `a_j, b_j ~ N(0, 1/j)`.
pub fn sample_free(modes: usize, rng: &mut Rng) -> FourierField {
    let x: Vec<f64> = (1..=modes)
        .flat_map(|j| [j, j])
        .map(|j| {
            let z: f64 = rng.sample(StandardNormal);
            z / (j as f64).sqrt()
        })
        .collect();
    from_coords(&x)
}

/// Log density of the Gaussian random-walk proposal `x → y`.
pub fn proposal_log_density(x: &[f64], y: &[f64], scales: &[f64]) -> f64 {
    x.chunks(2)
        .zip(y.chunks(2))
        .zip(scales)
        .map(|((xa, ya), s)| {
            let d2 = (xa[0] - ya[0]).powi(2) + (xa[1] - ya[1]).powi(2);
            -d2 / (2.0 * s * s) - (2.0 * std::f64::consts::PI * s * s).ln()
        })
        .sum()
}

/// Log density of the Metropolis kernel for a move `x → y ≠ x`.
pub fn transition_log_density(x: &[f64], y: &[f64], scales: &[f64], beta: f64, ball: f64) -> f64 {
    let lx = log_weight_coords(x, beta, ball);
    let ly = log_weight_coords(y, beta, ball);
    proposal_log_density(x, y, scales) + (ly - lx).min(0.0)
}

/// Random-walk Metropolis chain.
///
/// During burn-in the global step factor follows a Robbins-Monro update
/// aimed at 40% acceptance; afterwards it is frozen. Draws outside the ball
/// have weight zero and are never accepted.
pub fn metropolis(p: &GibbsParams) -> Result<SampleSet> {
    p.validate()?;
    let mut rng = rng::seeded(p.seed);
    let d = 2 * p.modes;
    let mut x = vec![0.0; d];
    let mut lx = log_weight_coords(&x, p.beta, p.ball);
    let mut factor = 2.4 / (d as f64).sqrt();
    let mut accepted = 0usize;
    let mut draws = Vec::with_capacity((p.steps - p.burn_in) / p.thin + 1);
    let mut y = vec![0.0; d];
    for step in 0..p.steps {
        for (i, yi) in y.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *yi = x[i] + factor * p.proposal_scale[i / 2] * z;
        }
        let ly = log_weight_coords(&y, p.beta, p.ball);
        let u: f64 = rng.random();
        let accept = ly > f64::NEG_INFINITY && u.ln() < ly - lx;
        if accept {
            x.copy_from_slice(&y);
            lx = ly;
        }
        if step < p.burn_in {
            let gain = 1.0 / ((step + 1) as f64).powf(0.6);
            let hit = if accept { 1.0 } else { 0.0 };
            factor *= (gain * (hit - 0.4)).exp();
        } else {
            accepted += accept as usize;
            if (step - p.burn_in) % p.thin == 0 {
                draws.push(from_coords(&x));
            }
        }
    }
    let acceptance_rate = accepted as f64 / (p.steps - p.burn_in) as f64;
    let mut warnings = Vec::new();
    if !(0.05..=0.95).contains(&acceptance_rate) {
        warnings.push(format!("acceptance rate {acceptance_rate:.3} outside [0.05, 0.95]"));
    }
    Ok(SampleSet { draws, acceptance_rate, step_factor: factor, warnings })
}

/// `log E[e^{⟨f,u⟩}] - E[⟨f,u⟩]` over the draws.
pub fn lmgf(f: &FourierField, samples: &SampleSet) -> Result<f64> {
    if samples.draws.is_empty() {
        return Err(Error::Domain("no draws".into()));
    }
    let vals: Vec<f64> = samples.draws.iter().map(|u| spectral::inner(f, u)).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    Ok(quad::log_mean_exp(&vals) - mean)
}

/// Smallest `C` with `φ(f) ≤ C‖f‖²_{H^{-1/2}}` over the dictionary.
pub fn quadratic_bound(dictionary: &[FourierField], samples: &SampleSet) -> Result<f64> {
    let mut c: f64 = 0.0;
    for f in dictionary {
        let norm = spectral::homogeneous_sobolev_norm_sq(f, -0.5);
        if norm > 0.0 {
            c = c.max(lmgf(f, samples)? / norm);
        }
    }
    Ok(c)
}

/// Sub-Gaussian summary of a scalar sample.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SubGaussianFit {
    pub mean: f64,
    pub variance: f64,
    /// `σ²` from the least-squares fit `log E e^{λ(X - m)} ≈ σ²λ²/2`.
    pub variance_proxy: f64,
    /// Coefficient of determination of that fit.
    pub r_squared: f64,
    pub levels: Vec<f64>,
    /// Empirical `P(|X - m| ≥ s)` at each level.
    pub tails: Vec<f64>,
    /// Whether `P(|X - m| ≥ s) ≤ 2 exp(-s²/(2σ²))` at every level.
    pub bound_holds: bool,
}

/// Fit the centred log-MGF by `σ²λ²/2` on `|λ| ≤ 1.5/sd` and tabulate tails.
pub fn subgaussian_fit(values: &[f64]) -> SubGaussianFit {
    let (mean, variance) = quad::mean_var(values);
    let sd = variance.sqrt();
    if !(sd > 0.0) {
        return SubGaussianFit {
            mean,
            variance,
            variance_proxy: 0.0,
            r_squared: 1.0,
            levels: vec![0.0],
            tails: vec![if values.is_empty() { 0.0 } else { 1.0 }],
            bound_holds: true,
        };
    }
    let centred: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let lambdas: Vec<f64> = (-12..=12).filter(|&i| i != 0).map(|i| 1.5 * i as f64 / 12.0 / sd).collect();
    let xs: Vec<f64> = lambdas.iter().map(|l| 0.5 * l * l).collect();
    let ys: Vec<f64> = lambdas
        .iter()
        .map(|l| quad::log_mean_exp(&centred.iter().map(|c| l * c).collect::<Vec<_>>()))
        .collect();
    let (proxy, r2) = quad::origin_fit(&xs, &ys);
    let levels: Vec<f64> = (1..=12).map(|i| 0.25 * i as f64 * sd).collect();
    let n = values.len() as f64;
    let tails: Vec<f64> = levels
        .iter()
        .map(|s| centred.iter().filter(|c| c.abs() >= *s).count() as f64 / n)
        .collect();
    let bound_holds = levels
        .iter()
        .zip(&tails)
        .all(|(s, p)| *p <= 2.0 * (-s * s / (2.0 * proxy)).exp());
    SubGaussianFit { mean, variance, variance_proxy: proxy, r_squared: r2, levels, tails, bound_holds }
}

/// Tail report for the linear statistic `⟨f,u⟩` over the draws.
pub fn concentration_diag(samples: &SampleSet, f: &FourierField) -> SubGaussianFit {
    let vals: Vec<f64> = samples.draws.iter().map(|u| spectral::inner(f, u)).collect();
    subgaussian_fit(&vals)
}

/// Variance of `⟨f,u⟩` under the free measure: `Σ_{j≥1} |f̂_j|²/j`.
pub fn free_linear_variance(f: &FourierField) -> f64 {
    f.coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| c.norm_sqr() / j as f64)
        .sum()
}

/// Random mean-free test function with coefficients decaying like `1/j`.
pub fn random_test_function(modes: usize, rng: &mut Rng) -> FourierField {
    let mut c = vec![Complex64::new(0.0, 0.0); modes + 1];
    for (j, z) in c.iter_mut().enumerate().skip(1) {
        let s = 1.0 / j as f64;
        *z = Complex64::new(s * rng.sample::<f64, _>(StandardNormal), s * rng.sample::<f64, _>(StandardNormal));
    }
    FourierField::from_coeffs(c)
}
