//! Adaptive Dormand-Prince 5(4) integration for small real systems.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Tolerances and step limits.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 2_000_000 }
    }
}

/// Integrate `y' = f(t, y)` and record the state at each of `times`
/// (nondecreasing, starting at or after `t0`). Steps are clipped to land on
/// every output time exactly.
pub fn solve<F>(f: F, t0: f64, y0: &[f64], times: &[f64], opts: OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let d = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut out = Vec::with_capacity(times.len());
    let span = times.last().map(|&e| (e - t0).abs()).unwrap_or(0.0);
    let mut h = (span * 1e-3).max(1e-6);
    let mut k = vec![vec![0.0; d]; 7];
    let mut steps = 0;
    k[0] = f(t, &y)?;
    for &target in times {
        if target < t {
            return Err(Error::Config("output times must be nondecreasing".into()));
        }
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Numerical(format!("step budget exhausted at t = {t}")));
            }
            let last = t + h >= target;
            let hh = if last { target - t } else { h };
            let mut ytmp = vec![0.0; d];
            for s in 1..7 {
                for i in 0..d {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += hh * A[s][j] * kj[i];
                    }
                    ytmp[i] = acc;
                }
                k[s] = f(t + C[s] * hh, &ytmp)?;
            }
            let mut err = 0.0f64;
            let mut ynew = vec![0.0; d];
            for i in 0..d {
                let mut y5 = y[i];
                let mut e = 0.0;
                for s in 0..7 {
                    y5 += hh * B5[s] * k[s][i];
                    e += hh * (B5[s] - B4[s]) * k[s][i];
                }
                ynew[i] = y5;
                let sc = opts.atol + opts.rtol * y[i].abs().max(y5.abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                return Err(Error::Numerical(format!("non-finite state near t = {t}")));
            }
            if err <= 1.0 {
                t = if last { target } else { t + hh };
                y = ynew;
                // first-same-as-last: stage 7 is the derivative at the new point
                k[0] = k[6].clone();
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !(last && err <= 1.0) {
                h = hh * factor;
            }
            if h < 1e-14 * span.max(1.0) {
                return Err(Error::Numerical(format!("step size underflow at t = {t}")));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
