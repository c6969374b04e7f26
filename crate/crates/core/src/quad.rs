//! Quadrature rules and the few special functions the modules need.

use std::f64::consts::PI;

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    let mut abs = GK_WK[7] * fc.abs();
    for i in 0..7 {
        let dx = h * GK_X[i];
        let (l, r) = (f(c - dx), f(c + dx));
        k += GK_WK[i] * (l + r);
        abs += GK_WK[i] * (l.abs() + r.abs());
        if i % 2 == 1 {
            g += GK_WG[i / 2] * (l + r);
        }
    }
    (k * h, ((k - g) * h).abs(), abs * h.abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]` to absolute
/// tolerance `tol`, always bisecting the panel with the largest error.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    const MAX_PANELS: usize = 2000;
    let mut panels = vec![];
    let (v, e, s) = gk15(&f, a, b);
    panels.push((a, b, v, e, s));
    loop {
        let err: f64 = panels.iter().map(|p| p.3).sum();
        let abs: f64 = panels.iter().map(|p| p.4).sum();
        // the error estimate cannot resolve below rounding of the panel sums
        if err <= tol.max(50.0 * f64::EPSILON * abs) || panels.len() >= MAX_PANELS {
            break;
        }
        let (k, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, ..) = panels[k];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        panels.swap_remove(k);
        for (l, h) in [(lo, mid), (mid, hi)] {
            let (v, e, s) = gk15(&f, l, h);
            panels.push((l, h, v, e, s));
        }
    }
    panels.iter().map(|p| p.2).sum()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Riemann zeta for real `s > 0`, `s != 1`, by Borwein's alternating-series
/// acceleration of the Dirichlet eta function.
pub fn zeta(s: f64) -> f64 {
    const N: usize = 64;
    let mut d = [0.0f64; N + 1];
    let mut acc = 0.0;
    let nf = N as f64;
    let mut term = 1.0 / nf;
    for i in 0..=N {
        if i > 0 {
            let fi = i as f64;
            term *= 4.0 * (nf + fi - 1.0) * (nf - fi + 1.0) / ((2.0 * fi - 1.0) * 2.0 * fi);
        }
        acc += term;
        d[i] = nf * acc;
    }
    let mut sum = 0.0;
    for k in 0..N {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (d[k] - d[N]) / ((k + 1) as f64).powf(s);
    }
    let eta = -sum / d[N];
    eta / (1.0 - 2f64.powf(1.0 - s))
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d = 0.0f64;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Sample mean and unbiased variance.
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, v)
}

/// Least-squares line `y = a + b x`; returns `(a, b, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (my - slope * mx, slope, r2)
}

/// Least-squares line through the origin `y = b x`; returns `(b, r²)` with r²
/// measured about the origin.
pub fn origin_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let b = sxy / sxx;
    let res: f64 = x.iter().zip(y).map(|(a, c)| (c - b * a).powi(2)).sum();
    (b, 1.0 - res / syy)
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Bisection root of a continuous function with a sign change on `[a, b]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() < tol {
            return m;
        }
        let fm = f(m);
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Root of an increasing function on `[lo, hi]` by Newton steps that fall
/// back to bisection whenever a step leaves the bracket or fails to halve the
/// residual.
pub fn increasing_root<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, mut x: f64, ftol: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut last = f64::INFINITY;
    for _ in 0..200 {
        let g = f(x);
        if g.abs() <= ftol {
            return x;
        }
        if g > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return 0.5 * (lo + hi);
        }
        let d = df(x);
        let nx = x - g / d;
        x = if d > 0.0 && d.is_finite() && nx > lo && nx < hi && g.abs() < 0.5 * last {
            nx
        } else {
            0.5 * (lo + hi)
        };
        last = g.abs();
    }
    x
}

/// Stable `log(mean(exp(x)))`.
pub fn log_mean_exp(x: &[f64]) -> f64 {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = x.iter().map(|v| (v - m).exp()).sum();
    m + (s / x.len() as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_polynomials_and_singular_power() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14);
        assert!((v - 0.0).abs() < 1e-13);
        let s = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-10);
        assert!((s - 2.0).abs() < 1e-8);
    }

    #[test]
    fn gauss_legendre_exact_for_degree_2n_minus_1() {
        let (x, w) = gauss_legendre(6);
        let v: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(10)).sum();
        assert!((v - 2.0 / 11.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(0.5) + 1.460_354_508_809_586_8).abs() < 1e-14);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn ks_identical_samples_is_zero() {
        let a = [0.1, 0.5, 0.2];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
    }
}
