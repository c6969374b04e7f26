//! The experiment registry. Each entry declares its parameters with defaults;
//! anything else on the command line or in the config file is rejected.

use std::f64::consts::PI;

use bolab::euler::{self, EulerOptions, GasState, Scheme as EulerScheme};
use bolab::gas::{self, CircleDensity, GasChainParams};
use bolab::soliton::{self, Orientation, PoleConfiguration};
use bolab::transport::{self, Cost, Measure};
use bolab::{bo, gibbs, rng, spectral, FourierField};
use num_complex::Complex64;
use rand::Rng as _;
use serde::Serialize;

use crate::artifacts::Ctx;
use crate::failure::Failure;

pub struct Param {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn p(key: &'static str, default: &'static str, help: &'static str) -> Param {
    Param { key, default, help }
}

pub struct Experiment {
    pub module: &'static str,
    pub name: &'static str,
    pub about: &'static str,
    pub params: &'static [Param],
    pub run: fn(&mut Ctx) -> Result<(), Failure>,
}

type Out = Result<(), Failure>;

pub static REGISTRY: &[Experiment] = &[
    Experiment {
        module: "bo",
        name: "travelling-wave",
        about: "Poisson-kernel travelling wave: constants, residual and translation under the flow",
        params: &[
            p("r", "0.5", "kernel radius in (0, 1)"),
            p("beta", "1", "coupling"),
            p("modes", "256", "Fourier cutoff"),
            p("dt", "1e-3", "time step"),
            p("t-end", "1", "final time"),
            p("points", "256", "profile samples"),
        ],
        run: bo_travelling_wave,
    },
    Experiment {
        module: "bo",
        name: "evolve",
        about: "Random initial field under the truncated flow; mass and energy history",
        params: &[
            p("beta", "1", "coupling"),
            p("modes", "32", "Fourier cutoff"),
            p("amp", "1", "initial amplitude scale"),
            p("dt", "1e-3", "time step"),
            p("t-end", "1", "final time"),
            p("save-every", "100", "steps between records"),
            p("scheme", "ifrk4", "ifrk4 or strang"),
        ],
        run: bo_evolve,
    },
    Experiment {
        module: "bo",
        name: "convexity",
        about: "Smoothed Hessian probe at the travelling wave",
        params: &[
            p("r", "0.99", "kernel radius"),
            p("beta", "1", "coupling"),
            p("modes", "256", "Fourier cutoff"),
            p("trials", "10", "random directions"),
            p("low-modes", "16", "modes in the exact low-mode eigenvalue"),
        ],
        run: bo_convexity,
    },
    Experiment {
        module: "gibbs",
        name: "sample",
        about: "Metropolis chain for the truncated Gibbs measure; per-mode variances",
        params: &[
            p("beta", "0", "coupling"),
            p("ball", "inf", "L² ball radius squared"),
            p("modes", "8", "Fourier cutoff"),
            p("steps", "20000", "chain length"),
            p("burn-in", "2000", "adaptation steps"),
            p("thin", "5", "thinning"),
        ],
        run: gibbs_sample,
    },
    Experiment {
        module: "solitons",
        name: "evolve",
        about: "Random multi-pole configuration: trajectory, K conservation and flow residual",
        params: &[
            p("n", "3", "number of poles"),
            p("t-end", "1", "final time"),
            p("dt-out", "0.1", "output spacing"),
            p("eta-min", "0.6", "smallest initial height"),
            p("eta-max", "1.4", "largest initial height"),
        ],
        run: solitons_evolve,
    },
    Experiment {
        module: "solitons",
        name: "calibrate",
        about: "Fit of coupling and time orientation for a single pole",
        params: &[p("xi", "0.3", "initial position"), p("eta", "0.9", "height"), p("t-end", "1", "window")],
        run: solitons_calibrate,
    },
    Experiment {
        module: "gas",
        name: "partition",
        about: "Toeplitz partition functions and the extrapolated free energy for Q = 2g cos θ",
        params: &[p("g", "0.25", "potential strength"), p("n-list", "16,32,48,64", "particle numbers")],
        run: gas_partition,
    },
    Experiment {
        module: "gas",
        name: "equilibrium",
        about: "Equilibrium density for Q = 2g cos θ and its residual",
        params: &[p("g", "0.25", "potential strength"), p("points", "256", "density samples")],
        run: gas_equilibrium,
    },
    Experiment {
        module: "gas",
        name: "clt",
        about: "Law of the Poisson linear statistic under the free gas",
        params: &[
            p("n", "32", "particles"),
            p("eta", "1", "Poisson height"),
            p("samples", "10000", "recorded samples"),
            p("burn-in", "500", "discarded sweeps per chain"),
            p("thin", "4", "sweeps between samples"),
            p("chains", "8", "independent chains"),
        ],
        run: gas_clt,
    },
    Experiment {
        module: "transport",
        name: "geodesic",
        about: "Displacement geodesic from the uniform density to a rotated cosine density",
        params: &[
            p("amp", "1", "cosine amplitude in [0, 1]"),
            p("shift", "0.4", "rotation"),
            p("steps", "4", "interior time steps"),
            p("points", "128", "density samples"),
        ],
        run: transport_geodesic,
    },
    Experiment {
        module: "transport",
        name: "inequalities",
        about: "Free transport and HWI-type inequalities on random densities",
        params: &[
            p("g", "0.25", "potential strength"),
            p("samples", "10", "random densities"),
            p("amp", "0.3", "coefficient range"),
        ],
        run: transport_inequalities,
    },
    Experiment {
        module: "euler",
        name: "evolve",
        about: "Isentropic gas from a smooth state; energy, mass and crossing horizon",
        params: &[
            p("n", "128", "grid points"),
            p("rho-amp", "0.2", "density perturbation"),
            p("v-amp", "0.1", "velocity amplitude"),
            p("dt", "1e-3", "time step"),
            p("t-end", "1", "final time"),
            p("save-every", "100", "steps between records"),
            p("scheme", "spectral", "spectral or variational"),
        ],
        run: euler_evolve,
    },
    Experiment {
        module: "euler",
        name: "cosec",
        about: "Quantile-placed cosec² pair sum against the internal energy",
        params: &[p("n", "1000", "points"), p("amp", "1", "density (1 + amp cos θ)/2π")],
        run: euler_cosec,
    },
    Experiment {
        module: "euler",
        name: "entropy",
        about: "Entropy production and transport bound from the equilibrium of Q = 2g cos θ",
        params: &[
            p("g", "0.25", "potential strength"),
            p("v-amp", "0.2", "initial velocity amplitude"),
            p("n", "64", "grid points"),
            p("dt", "2e-3", "time step"),
            p("t-end", "0.2", "final time"),
            p("save-every", "10", "steps between records"),
        ],
        run: euler_entropy,
    },
];

fn bo_travelling_wave(c: &mut Ctx) -> Out {
    let (r, beta, modes) = (c.f64("r")?, c.f64("beta")?, c.usize("modes")?);
    let (dt, t_end, points) = (c.f64("dt")?, c.f64("t-end")?, c.usize("points")?);
    let w = bo::travelling_wave(r, beta, modes)?;
    let xs = spectral::grid_points(points.max(1));
    c.csv("profile", &["x", "w"], &xs.iter().map(|&x| vec![x, w.profile.eval(x)]).collect::<Vec<_>>())?;
    let rhs = bo::bo_rhs(&w.profile, beta)?;
    let residual = spectral::derivative(&w.profile).scale(w.speed).sub(&rhs).l2_norm();
    let traj = bo::evolve(&w.profile, &bo::BoParams { save_every: usize::MAX, ..bo::BoParams::new(beta, modes, dt) }, t_end)?;
    #[derive(Serialize)]
    struct Summary {
        r: f64,
        beta: f64,
        speed: f64,
        mass: f64,
        mass_numeric: f64,
        residual: f64,
        translate_error: f64,
    }
    c.json(
        "summary",
        &Summary {
            r,
            beta,
            speed: w.speed,
            mass: w.mass,
            mass_numeric: bo::mass(&w.profile),
            residual,
            translate_error: traj.last().sub(&w.at(t_end)).l2_norm(),
        },
    )
}

fn bo_evolve(c: &mut Ctx) -> Out {
    let (beta, modes, amp) = (c.f64("beta")?, c.usize("modes")?, c.f64("amp")?);
    let scheme = match c.choice("scheme", &["ifrk4", "strang"])? {
        "ifrk4" => bo::Scheme::IfRk4,
        _ => bo::Scheme::Strang,
    };
    let mut g = rng::seeded(c.seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); modes + 1];
    for (n, z) in coeffs.iter_mut().enumerate().skip(1) {
        let s = amp / (n * n) as f64;
        *z = Complex64::new(g.random_range(-s..=s), g.random_range(-s..=s));
    }
    let u0 = FourierField::from_coeffs(coeffs);
    let p = bo::BoParams { scheme, save_every: c.usize("save-every")?, ..bo::BoParams::new(beta, modes, c.f64("dt")?) };
    let traj = bo::evolve(&u0, &p, c.f64("t-end")?)?;
    let mut rows = Vec::new();
    for (t, u) in traj.times.iter().zip(&traj.states) {
        rows.push(vec![*t, bo::mass(u), bo::hamiltonian(u, beta)?]);
    }
    c.csv("history", &["t", "mass", "hamiltonian"], &rows)?;
    let drift = |k: usize| rows.iter().map(|r| (r[k] - rows[0][k]).abs()).fold(0.0, f64::max);
    c.json("summary", &serde_json::json!({ "mass_drift": drift(1), "hamiltonian_drift": drift(2), "samples": rows.len() }))
}

fn bo_convexity(c: &mut Ctx) -> Out {
    let (beta, modes) = (c.f64("beta")?, c.usize("modes")?);
    let w = bo::travelling_wave(c.f64("r")?, beta, modes)?;
    let probe = bo::convexity_probe(&w.profile, beta, c.usize("trials")?, c.seed)?;
    let k = c.usize("low-modes")?;
    if k == 0 {
        return Err(Failure::Validation("low-modes must be at least 1".into()));
    }
    let low = bo::min_rayleigh_low_modes(&w.profile, beta, k, true, bo::CubicConvention::Single);
    c.json("summary", &serde_json::json!({ "probe_min": probe, "low_mode_min": low, "negative_direction": probe < 0.0 || low < 0.0 }))
}

fn gibbs_sample(c: &mut Ctx) -> Out {
    let modes = c.usize("modes")?;
    let p = gibbs::GibbsParams {
        thin: c.usize("thin")?,
        ..gibbs::GibbsParams::new(c.f64("beta")?, c.f64("ball")?, modes, c.usize("steps")?, c.usize("burn-in")?, c.seed)
    };
    let s = gibbs::metropolis(&p)?;
    let mut rows = Vec::new();
    for j in 1..=modes {
        let a: Vec<f64> = s.draws.iter().map(|u| u.a(j)).collect();
        let b: Vec<f64> = s.draws.iter().map(|u| u.b(j)).collect();
        rows.push(vec![j as f64, bolab::quad::mean_var(&a).1, bolab::quad::mean_var(&b).1, 1.0 / j as f64]);
    }
    c.csv("variances", &["j", "var_a", "var_b", "free_variance"], &rows)?;
    c.json(
        "summary",
        &serde_json::json!({
            "draws": s.draws.len(),
            "acceptance_rate": s.acceptance_rate,
            "step_factor": s.step_factor,
            "warnings": s.warnings,
        }),
    )
}

fn solitons_evolve(c: &mut Ctx) -> Out {
    let n = c.usize("n")?;
    let (lo, hi) = (c.f64("eta-min")?, c.f64("eta-max")?);
    if n == 0 || !(lo > 0.0 && hi > lo) {
        return Err(Failure::Validation("need n ≥ 1 and 0 < eta-min < eta-max".into()));
    }
    let mut g = rng::seeded(c.seed);
    let xi: Vec<f64> = (0..n).map(|j| 2.0 * PI * (j as f64 + g.random_range(0.1..0.9)) / n as f64).collect();
    let eta: Vec<f64> = (0..n).map(|_| g.random_range(lo..hi)).collect();
    let c0 = PoleConfiguration::from_parts(&xi, &eta, 1.0)?;
    let t_end = c.f64("t-end")?;
    let traj = soliton::evolve_poles(&c0, c.f64("dt-out")?, t_end)?;
    let mut cols = vec!["t".to_string()];
    for j in 0..n {
        cols.push(format!("xi_{j}"));
        cols.push(format!("eta_{j}"));
    }
    let k0 = soliton::k_along_flow(&c0)?;
    let mut drift: f64 = 0.0;
    let mut rows = Vec::new();
    for (t, s) in traj.times.iter().zip(&traj.configs) {
        let mut r = vec![*t];
        r.extend(s.poles.iter().flat_map(|q| [q.re, q.im]));
        rows.push(r);
        drift = drift.max((soliton::k_along_flow(s)? - k0).norm() / k0.norm());
    }
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    c.csv("poles", &cols, &rows)?;
    let residual = soliton::bo_residual(&c0, 0.5, t_end, Orientation::Reversed)?;
    c.json(
        "summary",
        &serde_json::json!({ "k0": [k0.re, k0.im], "k_relative_drift": drift, "bo_residual": residual, "beta": 0.5 }),
    )
}

fn solitons_calibrate(c: &mut Ctx) -> Out {
    let c0 = PoleConfiguration::from_parts(&[c.f64("xi")?], &[c.f64("eta")?], 1.0)?;
    let cal = soliton::calibrate_beta(&c0, c.f64("t-end")?)?;
    c.json("calibration", &cal)
}

fn cos_potential(g: f64) -> FourierField {
    FourierField::from_real_basis(0.0, &[2.0 * g], &[])
}

fn gas_partition(c: &mut Ctx) -> Out {
    let q = cos_potential(c.f64("g")?);
    let est = gas::bq_estimate(&q, &c.usize_list("n-list")?)?;
    let rows: Vec<Vec<f64>> =
        est.n.iter().zip(&est.raw).zip(&est.corrected).map(|((n, r), k)| vec![*n as f64, *r, *k]).collect();
    c.csv("partition", &["n", "log_z_over_n2", "corrected"], &rows)?;
    let energy = gas::energy_functional(&q, &gas::equilibrium_density(&q)?);
    c.json(
        "summary",
        &serde_json::json!({
            "extrapolated": est.extrapolated,
            "minus_energy": -energy,
            "relative_gap": (est.extrapolated + energy).abs() / energy.abs(),
            "warnings": est.warnings,
        }),
    )
}

fn gas_equilibrium(c: &mut Ctx) -> Out {
    let q = cos_potential(c.f64("g")?);
    let rho = gas::equilibrium_density(&q)?;
    let xs = spectral::grid_points(c.usize("points")?.max(1));
    c.csv("density", &["theta", "rho"], &xs.iter().map(|&x| vec![x, rho.eval(x)]).collect::<Vec<_>>())?;
    c.json(
        "summary",
        &serde_json::json!({
            "residual": gas::equilibrium_residual(&q, &rho, 16),
            "energy": gas::energy_functional(&q, &rho),
            "min_density": rho.min_value(),
        }),
    )
}

fn gas_clt(c: &mut Ctx) -> Out {
    let g = gas::poisson_statistic(c.f64("eta")?, 64);
    let p = GasChainParams {
        n: c.usize("n")?,
        samples: c.usize("samples")?,
        burn_in: c.usize("burn-in")?,
        thin: c.usize("thin")?,
        seed: c.seed,
    };
    let (report, vals) = gas::clt_experiment(&g, &FourierField::zeros(1), &p, c.usize("chains")?, c.threads)?;
    c.csv("values", &["sample", "statistic"], &vals.iter().enumerate().map(|(i, v)| vec![i as f64, *v]).collect::<Vec<_>>())?;
    let fit = gibbs::subgaussian_fit(&vals);
    c.json("summary", &serde_json::json!({ "clt": report, "subgaussian": fit }))
}

fn transport_geodesic(c: &mut Ctx) -> Out {
    let amp = c.f64("amp")?;
    let u = CircleDensity::uniform(4);
    let r = CircleDensity::trigonometric(&[amp], &[], 4)?.rotate(c.f64("shift")?);
    let steps = c.usize("steps")?;
    let path = transport::displacement_geodesic(&u, &r, steps)?;
    let xs = spectral::grid_points(c.usize("points")?.max(1));
    let mut cols = vec!["x".to_string()];
    cols.extend((0..path.densities.len()).map(|k| format!("rho_{k}")));
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| std::iter::once(x).chain(path.densities.iter().map(|d| d.eval(x))).collect())
        .collect();
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    c.csv("densities", &cols, &rows)?;
    let (a, b) = (Measure::Density(u), Measure::Density(r));
    c.json(
        "summary",
        &serde_json::json!({
            "w2_sq_arc": transport::transport_cost(&a, &b, Cost::Arc)?.cost,
            "w2_sq_chordal": transport::transport_cost(&a, &b, Cost::Chordal)?.cost,
            "kinetic_action": path.kinetic_action(8),
            "continuity_residual": path.continuity_residual(),
        }),
    )
}

fn random_density(g: &mut rng::Rng, amp: f64) -> Result<CircleDensity, Failure> {
    let a: Vec<f64> = (0..3).map(|_| g.random_range(-amp..=amp)).collect();
    let b: Vec<f64> = (0..3).map(|_| g.random_range(-amp..=amp)).collect();
    Ok(CircleDensity::trigonometric(&a, &b, 4)?)
}

fn transport_inequalities(c: &mut Ctx) -> Out {
    let q = cos_potential(c.f64("g")?);
    let rho0 = gas::equilibrium_density(&q)?;
    let amp = c.f64("amp")?;
    let mut g = rng::seeded(c.seed);
    let mut rows = Vec::new();
    let (mut fti, mut hwi) = (0, 0);
    for i in 0..c.usize("samples")? {
        let w = random_density(&mut g, amp)?;
        let f = transport::free_transport_check(&w, &q)?;
        let h = transport::hwi_converse_check(&rho0, &w)?;
        fti += f.holds as usize;
        hwi += h.holds as usize;
        rows.push(vec![i as f64, f.w2_sq, f.bound, h.free_entropy, h.bound]);
    }
    c.csv("checks", &["sample", "w2_sq", "transport_bound", "free_entropy", "hwi_bound"], &rows)?;
    c.json("summary", &serde_json::json!({ "samples": rows.len(), "transport_holds": fti, "hwi_holds": hwi }))
}

fn euler_evolve(c: &mut Ctx) -> Out {
    let (ra, va) = (c.f64("rho-amp")?, c.f64("v-amp")?);
    let s0 = GasState::from_fns(c.usize("n")?, |x| 1.0 + ra * x.cos(), |x| va * x.sin())?;
    let scheme = match c.choice("scheme", &["spectral", "variational"])? {
        "spectral" => EulerScheme::Spectral,
        _ => EulerScheme::Variational,
    };
    let opts = EulerOptions { scheme, save_every: c.usize("save-every")?, ..EulerOptions::new(c.f64("dt")?, c.f64("t-end")?) };
    let traj = euler::evolve_euler(&s0, &opts)?;
    let mut rows = Vec::new();
    for ((t, s), k) in traj.times.iter().zip(&traj.states).zip(&traj.energies) {
        rows.push(vec![*t, *k, s.mass(), euler::crossing_horizon(s)?]);
    }
    c.csv("history", &["t", "energy", "mass", "crossing_horizon"], &rows)?;
    let last = traj.states.last().expect("initial state is kept");
    let xs = last.grid();
    c.csv("final", &["x", "rho", "v"], &(0..xs.len()).map(|k| vec![xs[k], last.rho[k], last.v[k]]).collect::<Vec<_>>())?;
    let k0 = traj.energies[0];
    let drift = traj.energies.iter().map(|k| ((k - k0) / k0).abs()).fold(0.0, f64::max);
    c.json(
        "summary",
        &serde_json::json!({ "final_time": traj.times.last(), "energy_relative_drift": drift, "diagnostic": traj.diagnostic }),
    )
}

fn euler_cosec(c: &mut Ctx) -> Out {
    let n = c.usize("n")?;
    let rho = CircleDensity::trigonometric(&[c.f64("amp")?], &[], 4)?;
    let lim = euler::cosec_limit_experiment(&rho, n)?;
    let (sum, exact) = euler::cosec_identity(n);
    c.json(
        "summary",
        &serde_json::json!({
            "n": n,
            "value": lim.value,
            "target": lim.target,
            "relative_gap": (lim.value / lim.target - 1.0).abs(),
            "uniform_sum": sum,
            "uniform_exact": exact,
        }),
    )
}

fn euler_entropy(c: &mut Ctx) -> Out {
    let q = cos_potential(c.f64("g")?);
    let rho0 = gas::equilibrium_density(&q)?;
    let n = c.usize("n")?;
    let va = c.f64("v-amp")?;
    let v: Vec<f64> = spectral::grid_points(n).iter().map(|x| va * x.sin()).collect();
    let s0 = GasState::new(rho0.field().values_on(n), v, euler::GAMMA, euler::KAPPA_U)?;
    let opts = EulerOptions { save_every: c.usize("save-every")?, ..EulerOptions::new(c.f64("dt")?, c.f64("t-end")?) };
    let traj = euler::evolve_euler(&s0, &opts)?;
    let rep = euler::entropy_production_check(&traj, &rho0, &q)?;
    let rows: Vec<Vec<f64>> = (0..rep.times.len())
        .map(|i| vec![rep.times[i], rep.sigma[i], rep.dsigma[i], rep.dsigma_flux[i], rep.w2_sq[i], rep.w2_bound[i]])
        .collect();
    c.csv("entropy", &["t", "sigma", "dsigma", "dsigma_flux", "w2_sq", "w2_bound"], &rows)?;
    c.json(
        "summary",
        &serde_json::json!({
            "energy": rep.energy,
            "entropy_bound": rep.entropy_bound,
            "c_kappa": rep.c_kappa,
            "kappa1": rep.kappa1,
            "entropy_holds": rep.entropy_holds,
            "w2_holds": rep.w2_holds,
            "warnings": rep.warnings,
            "diagnostic": traj.diagnostic,
        }),
    )
}
