//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use bolab::euler::{self, EulerOptions, GasState, GAMMA, KAPPA_U};
use bolab::gas::{self, CircleDensity, GasChainParams};
use bolab::soliton::{self, Orientation, PoleConfiguration};
use bolab::transport::{self, Cost, Measure};
use bolab::{bo, gibbs, quad, rng, spectral, FourierField};
use rand::Rng as _;

type Outcome = bolab::Result<(bool, String)>;

const TWO_PI: f64 = 2.0 * PI;

fn cos_potential(g: f64) -> FourierField {
    FourierField::from_real_basis(0.0, &[2.0 * g], &[])
}

fn random_density(r: &mut rng::Rng, amp: f64) -> CircleDensity {
    let a: Vec<f64> = (0..3).map(|_| r.random_range(-amp..amp)).collect();
    let b: Vec<f64> = (0..3).map(|_| r.random_range(-amp..amp)).collect();
    CircleDensity::trigonometric(&a, &b, 4).expect("amplitudes below 1/3 keep the density positive")
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn travelling_wave() -> Outcome {
    let w = bo::travelling_wave(0.5, 1.0, 256)?;
    let rhs = bo::bo_rhs(&w.profile, 1.0)?;
    // u_t = -𝓗u_xx - 2βuu_x and u(x, t) = w(x + ct), so u_t = c w_x
    let residual = spectral::derivative(&w.profile).scale(w.speed).sub(&rhs).l2_norm();
    let c_err = (w.speed - 5.0 / 3.0).abs();
    let n_err = (bo::mass(&w.profile) - 5.0 / 3.0).abs().max((w.mass - 5.0 / 3.0).abs());
    let p = bo::BoParams { save_every: 100, ..bo::BoParams::new(1.0, 256, 1e-3) };
    let traj = bo::evolve(&w.profile, &p, 1.0)?;
    let translate = traj.times.iter().zip(&traj.states).map(|(t, u)| u.sub(&w.at(*t)).l2_norm()).fold(0.0, f64::max);
    Ok((
        residual <= 1e-8 && c_err <= 1e-12 && n_err <= 1e-12 && translate <= 1e-6,
        format!("residual {residual:.2e}, |c - 5/3| {c_err:.1e}, |N - 5/3| {n_err:.1e}, translate {translate:.2e}"),
    ))
}

fn one_soliton() -> Outcome {
    let (xi0, eta) = (0.3, 0.9);
    let c0 = PoleConfiguration::from_parts(&[xi0], &[eta], 1.0)?;
    let speed = 1.0 / eta.tanh();
    let v = soliton::pole_velocity(&c0)?[0];
    let traj = soliton::evolve_poles(&c0, 0.1, 1.0)?;
    let mut eta_err: f64 = 0.0;
    let mut xi_err = (v.re - speed).abs().max(v.im.abs());
    let mut field_err: f64 = 0.0;
    let m = 120;
    for (t, c) in traj.times.iter().zip(&traj.configs) {
        let q = c.poles[0];
        eta_err = eta_err.max((q.im - eta).abs());
        xi_err = xi_err.max((q.re - xi0 - speed * t).abs());
        let u = soliton::reconstruct_u(c, m)?;
        let exact = spectral::poisson_field((-eta).exp(), m, xi0 + speed * t).scale(-2.0);
        field_err = field_err.max(u.sub(&exact).sup_norm());
    }
    let cal = soliton::calibrate_beta(&c0, 1.0)?;
    Ok((
        eta_err <= 1e-8 && xi_err <= 1e-8 && field_err <= 1e-10 && cal.residual <= 1e-6,
        format!(
            "η drift {eta_err:.1e}, ξ - coth η·t {xi_err:.1e}, field {field_err:.1e}, calibrated {:?} β = {:.6} residual {:.1e}",
            cal.orientation, cal.beta, cal.residual
        ),
    ))
}

fn three_solitons() -> Outcome {
    let mut g = rng::seeded(21);
    let xi: Vec<f64> = (0..3).map(|j| TWO_PI * (j as f64 + g.random_range(0.1..0.9)) / 3.0).collect();
    let eta: Vec<f64> = (0..3).map(|_| g.random_range(0.6..1.4)).collect();
    let c0 = PoleConfiguration::from_parts(&xi, &eta, 1.0)?;
    let residual = soliton::bo_residual(&c0, 0.5, 1.0, Orientation::Reversed)?;
    let k0 = soliton::k_along_flow(&c0)?;
    let traj = soliton::evolve_poles(&c0, 0.05, 1.0)?;
    let mut drift: f64 = 0.0;
    for c in &traj.configs {
        drift = drift.max((soliton::k_along_flow(c)? - k0).norm() / k0.norm());
    }
    Ok((residual <= 1e-4 && drift <= 1e-8, format!("residual {residual:.2e} (reversed, β = 1/2), K relative drift {drift:.1e}")))
}

/// Standard error of the mean of a correlated series by 100 batch means.
fn batch_se(x: &[f64]) -> f64 {
    let b = 100;
    let len = x.len() / b;
    let means: Vec<f64> = x.chunks_exact(len).map(|c| c.iter().sum::<f64>() / len as f64).collect();
    (quad::mean_var(&means).1 / b as f64).sqrt()
}

fn gibbs_sampler() -> Outcome {
    let modes = 8;
    let p = gibbs::GibbsParams::new(0.0, f64::INFINITY, modes, 105_000, 5_000, 11);
    let s = gibbs::metropolis(&p)?;
    let mut worst: f64 = 0.0;
    for j in 1..=modes {
        for coord in [0, 1] {
            let sq: Vec<f64> =
                s.draws.iter().map(|u| if coord == 0 { u.a(j) } else { u.b(j) }).map(|x| x * x).collect();
            let m = sq.iter().sum::<f64>() / sq.len() as f64;
            worst = worst.max((m - 1.0 / j as f64).abs() / batch_se(&sq));
        }
    }
    let variances_ok = worst <= 3.0;

    // one mode: the cubic term vanishes, so the target is the Gaussian cut to the ball
    let ball = 1.0;
    let q = gibbs::GibbsParams { thin: 10, ..gibbs::GibbsParams::new(0.5, ball, 1, 205_000, 5_000, 12) };
    let chain: Vec<f64> = gibbs::metropolis(&q)?.draws.iter().map(|u| u.a(1)).collect();
    let mut r = rng::seeded(13);
    let mut oracle = Vec::with_capacity(50_000);
    while oracle.len() < 50_000 {
        let u = gibbs::sample_free(1, &mut r);
        if u.l2_norm_sq() <= ball {
            oracle.push(u.a(1));
        }
    }
    let ks = quad::ks_two_sample(&chain, &oracle);

    let x = [0.3, -0.1, 0.2, 0.05, -0.15, 0.1];
    let y = [0.1, 0.2, -0.3, 0.0, 0.1, -0.2];
    let scales = [1.0, 0.7, 0.55];
    let mut balance: f64 = 0.0;
    for beta in [0.0, 0.8, -1.5] {
        let (ux, uy) = (gibbs::from_coords(&x), gibbs::from_coords(&y));
        let fwd = gibbs::log_weight(&ux, beta, 5.0) + gibbs::transition_log_density(&x, &y, &scales, beta, 5.0);
        let bwd = gibbs::log_weight(&uy, beta, 5.0) + gibbs::transition_log_density(&y, &x, &scales, beta, 5.0);
        balance = balance.max((fwd - bwd).abs());
    }
    Ok((
        variances_ok && ks <= 0.05 && balance <= 1e-12,
        format!("worst variance deviation {worst:.2}σ, ball marginal KS {ks:.4}, detailed balance {balance:.1e}"),
    ))
}

fn convexity_regime() -> Outcome {
    let kappa = spectral::kappa_quadrature(1e-10);
    let (n_ball, modes) = (4.0, 32);
    let beta = 0.1 / (kappa * f64::sqrt(n_ball));
    let mut r = rng::seeded(5);
    let mut worst = f64::INFINITY;
    for i in 0..1000 {
        let u = gibbs::sample_free(modes, &mut r);
        let radius_sq: f64 = n_ball * r.random_range(0.0..=1.0f64);
        let u = u.scale((radius_sq / u.l2_norm_sq()).sqrt());
        worst = worst.min(bo::convexity_probe(&u, beta, 1, 1000 + i)?);
    }
    let w = bo::travelling_wave(0.99, 1.0, 256)?;
    let wave = bo::convexity_probe(&w.profile, 1.0, 10, 1)?;
    Ok((
        worst >= 0.9 - 1e-6 && wave < 0.0,
        format!("κ = {kappa:.13}, β = {beta:.5}, N = {n_ball}: minimum {worst:.6}; wave r = 0.99 gives {wave:.4}"),
    ))
}

fn toeplitz() -> Outcome {
    let mut free: f64 = 0.0;
    for n in 1..=6 {
        let z = gas::toeplitz_partition(&FourierField::zeros(2), n)?.log_z.exp();
        let exact: f64 = (1..=n).map(|i| i as f64).product::<f64>() * TWO_PI.powi(n as i32);
        free = free.max((z - exact).abs() / exact);
    }
    let v = FourierField::from_real_basis(0.1, &[0.3, -0.2], &[0.15]);
    let z = gas::toeplitz_partition(&v, 2)?.log_z.exp();
    let inner = |a: f64| {
        quad::integrate(|b| (-2.0 * (v.eval(a) + v.eval(b))).exp() * 4.0 * ((a - b) / 2.0).sin().powi(2), 0.0, TWO_PI, 1e-12)
    };
    let brute = quad::integrate(inner, 0.0, TWO_PI, 1e-10);
    let two = (z - brute).abs() / brute;
    Ok((free <= 1e-10 && two <= 1e-6, format!("free n ≤ 6 relative {free:.1e}, n = 2 against double quadrature {two:.1e}")))
}

fn equilibrium() -> Outcome {
    let q = cos_potential(0.25);
    let rho = gas::equilibrium_density(&q)?;
    let residual = gas::equilibrium_residual(&q, &rho, 16);
    let est = gas::bq_estimate(&q, &[16, 32, 48, 64])?;
    let e = gas::energy_functional(&q, &rho);
    let gap = (est.extrapolated + e).abs() / e.abs();
    Ok((
        residual <= 1e-8 && gap <= 0.02,
        format!("residual {residual:.1e}, B = {:.6} vs -E = {:.6} ({:.3}%)", est.extrapolated, -e, 100.0 * gap),
    ))
}

fn linear_statistics() -> Outcome {
    let g = gas::poisson_statistic(1.0, 64);
    let mut reports = Vec::new();
    for n in [32, 64] {
        let p = GasChainParams { n, samples: 10_000, burn_in: 500, thin: 4, seed: 7 };
        let (rep, vals) = gas::clt_experiment(&g, &FourierField::zeros(1), &p, 8, 1)?;
        reports.push((rep, gibbs::subgaussian_fit(&vals)));
    }
    let (a, b) = (&reports[0], &reports[1]);
    let rel = (a.0.variance - b.0.variance).abs() / a.0.variance.min(b.0.variance);
    let ks = a.0.ks.max(b.0.ks);
    let r2 = a.1.r_squared.min(b.1.r_squared);
    Ok((
        rel <= 0.1 && ks <= 0.05 && r2 >= 0.95,
        format!(
            "variances {:.4} / {:.4} ({:.1}% apart), KS {ks:.4}, sub-Gaussian R² {r2:.4}; variance / 2‖g‖²_(H^1/2) = {:.4} / {:.4}, classical {:.4}",
            a.0.variance,
            b.0.variance,
            100.0 * rel,
            a.0.ratio_to_sobolev,
            b.0.ratio_to_sobolev,
            a.0.classical_variance
        ),
    ))
}

fn transport_checks() -> Outcome {
    let mut r = rng::seeded(8);
    let (mut sym, mut tri) = (0.0f64, true);
    for _ in 0..100 {
        let (a, b, c) = (random_density(&mut r, 0.3), random_density(&mut r, 0.3), random_density(&mut r, 0.3));
        let (ab, ba) = (transport::w2_densities(&a, &b)?, transport::w2_densities(&b, &a)?);
        sym = sym.max((ab - ba).abs());
        let (bc, ac) = (transport::w2_densities(&b, &c)?, transport::w2_densities(&a, &c)?);
        tri &= ac <= ab + bc + 1e-12;
    }
    let u = CircleDensity::uniform(4);
    let rot = CircleDensity::trigonometric(&[1.0], &[], 4)?.rotate(0.4);
    let path = transport::displacement_geodesic(&u, &rot, 4)?;
    let w2 = transport::transport_cost(&Measure::Density(u), &Measure::Density(rot), Cost::Arc)?.cost;
    let action = (path.kinetic_action(8) - w2).abs();
    let q = cos_potential(0.25);
    let mut fti = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..100 {
        let rep = transport::free_transport_check(&random_density(&mut r, 0.3), &q)?;
        fti += rep.holds as usize;
        worst_ratio = worst_ratio.max(rep.w2_sq / rep.bound);
    }
    let mut hwi = 0;
    for _ in 0..50 {
        let (a, b) = (random_density(&mut r, 0.3), random_density(&mut r, 0.3));
        hwi += transport::hwi_converse_check(&a, &b)?.holds as usize;
    }
    Ok((
        sym <= 1e-10 && tri && action <= 1e-6 && fti == 100 && hwi == 50,
        format!(
            "symmetry {sym:.1e}, triangle {}, |action - W₂²| {action:.1e}, free transport {fti}/100 (max W₂²/bound {worst_ratio:.3}), HWI {hwi}/50",
            if tri { "holds" } else { "fails" }
        ),
    ))
}

fn hydrodynamic_limit() -> Outcome {
    let mut exact = true;
    for n in 2..=1000 {
        let (s, e) = euler::cosec_identity(n);
        exact &= s.round() as u64 == e;
    }
    let u = CircleDensity::uniform(4);
    let lim = euler::cosec_limit_experiment(&u, 1000)?;
    let nf = 1000.0f64;
    let uniform_err = (lim.value - (nf * nf - 1.0) / (6.0 * nf * nf)).abs();
    let target_err = (euler::internal_energy(&u) - 1.0 / 6.0).abs();
    let rho = CircleDensity::trigonometric(&[1.0], &[], 4)?;
    let c = euler::cosec_limit_experiment(&rho, 1000)?;
    let gap = (c.value / c.target - 1.0).abs();
    Ok((
        exact && uniform_err <= 1e-10 && target_err <= 1e-15 && gap <= 0.01,
        format!(
            "integer identity n ≤ 1000 {}, uniform n = 1000 off (n²-1)/6n² by {uniform_err:.1e}, U(uniform) - 1/6 = {target_err:.1e}, cosine density gap {:.3}%",
            if exact { "exact" } else { "broken" },
            100.0 * gap
        ),
    ))
}

fn euler_module() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;

    let s = GasState::from_fns(64, |_| 1.0, |_| 0.7)?;
    let tr = euler::evolve_euler(&s, &EulerOptions::new(1e-2, 1.0))?;
    let last = tr.states.last().expect("initial state is kept");
    let fixed = max_abs_diff(&last.rho, &s.rho).max(max_abs_diff(&last.v, &s.v));
    ok &= fixed <= 1e-13;
    parts.push(format!("constant {fixed:.0e}"));

    let p0 = FourierField::from_real_basis(-2.0, &[], &[0.2]);
    let s0 = euler::simple_wave_state(&p0, 1.0, 0.0, 128)?;
    let tr = euler::evolve_euler(&s0, &EulerOptions { save_every: 100, ..EulerOptions::new(1e-3, 3.0) })?;
    let mut wave: f64 = 0.0;
    for (t, st) in tr.times.iter().zip(&tr.states) {
        let ex = euler::simple_wave_state(&p0, 1.0, *t, 128)?;
        wave = wave.max(max_abs_diff(&st.rho, &ex.rho).max(max_abs_diff(&st.v, &ex.v)));
    }
    ok &= wave <= 1e-4 && tr.diagnostic.is_none();
    parts.push(format!("simple wave to t = 3 {wave:.1e}"));

    // RK4 along each characteristic family, stepping over pairs of saved states
    let mut riding = Vec::new();
    for n in [64, 128] {
        let s0 = GasState::from_fns(n, |x| 1.0 + 0.2 * x.cos(), |x| 0.1 * (2.0 * x).sin())?;
        let dt = 1e-3;
        let tr = euler::evolve_euler(&s0, &EulerOptions::new(dt, 0.2))?;
        let m = n / 2 - 1;
        let mut f = Vec::new();
        for st in &tr.states {
            let (rp, rm) = euler::riemann_invariants(st);
            let (sp, sm) = euler::characteristic_speeds(st)?;
            f.push([
                FourierField::from_grid(&rp, m)?,
                FourierField::from_grid(&rm, m)?,
                FourierField::from_grid(&sp, m)?,
                FourierField::from_grid(&sm, m)?,
            ]);
        }
        let mut err: f64 = 0.0;
        for family in 0..2 {
            for x0 in [0.3, 2.0, 4.5] {
                let mut x: f64 = x0;
                let r0 = f[0][family].eval(x0);
                for i in (0..f.len() - 2).step_by(2) {
                    let sp = |j: usize, y: f64| f[j][family + 2].eval(y);
                    let h = 2.0 * dt;
                    let k1 = sp(i, x);
                    let k2 = sp(i + 1, x + 0.5 * h * k1);
                    let k3 = sp(i + 1, x + 0.5 * h * k2);
                    let k4 = sp(i + 2, x + h * k3);
                    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                    err = err.max((f[i + 2][family].eval(x) - r0).abs());
                }
            }
        }
        let dx = TWO_PI / n as f64;
        ok &= err <= dx * dx;
        riding.push(format!("{err:.1e} (Δx² {:.1e})", dx * dx));
    }
    parts.push(format!("invariants on characteristics {}", riding.join(", ")));

    let u = CircleDensity::uniform(4);
    let r = CircleDensity::trigonometric(&[1.0], &[], 4)?;
    let conv = euler::displacement_convexity_check(&u, &r)?;
    ok &= conv.min_second_difference >= -1e-10 && conv.max_mismatch <= 1e-4;
    parts.push(format!(
        "convexity min Δ² {:.1e}, closed form {:.1e}",
        conv.min_second_difference, conv.max_mismatch
    ));

    let s = GasState::from_fns(64, |x| 1.0 + 0.3 * x.cos(), |x| 0.5 * x.sin())?;
    let (dr, dv) = euler::euler_rhs(&s)?;
    let mut errs = Vec::new();
    let mut dissipation = true;
    for tau in [0.02, 0.01, 0.005] {
        let st = euler::variational_step(&s, tau)?;
        dissipation &= st.dissipation_holds;
        let fr: Vec<f64> = s.rho.iter().zip(&dr).map(|(a, b)| a + tau * b).collect();
        let fv: Vec<f64> = s.v.iter().zip(&dv).map(|(a, b)| a + tau * b).collect();
        let (fr, fv) = (FourierField::from_grid(&fr, 31)?, FourierField::from_grid(&fv, 31)?);
        let e = (0..s.len())
            .map(|k| {
                let y = st.positions[k];
                (st.particle_density[k] - fr.eval(y)).abs().max((st.particle_velocity[k] - fv.eval(y)).abs())
            })
            .fold(0.0, f64::max);
        errs.push(e);
    }
    let (q1, q2) = (errs[1] / errs[0], errs[2] / errs[1]);
    ok &= q1 < 0.3 && q2 < 0.3 && dissipation;
    parts.push(format!("variational step error ratios {q1:.3}, {q2:.3}, dissipation {}", if dissipation { "holds" } else { "fails" }));

    let q = cos_potential(0.25);
    let rho0 = gas::equilibrium_density(&q)?;
    let n = 64;
    let v: Vec<f64> = spectral::grid_points(n).iter().map(|x| 0.2 * x.sin()).collect();
    let s0 = GasState::new(rho0.field().values_on(n), v, GAMMA, KAPPA_U)?;
    let tr = euler::evolve_euler(&s0, &EulerOptions { save_every: 10, ..EulerOptions::new(2e-3, 0.2) })?;
    let rep = euler::entropy_production_check(&tr, &rho0, &q)?;
    ok &= rep.entropy_holds && rep.w2_holds && tr.diagnostic.is_none();
    let worst_w2 = rep.w2_sq.iter().zip(&rep.w2_bound).skip(1).map(|(a, b)| a / b).fold(0.0, f64::max);
    let worst_s = rep.dsigma.iter().map(|d| d.abs()).fold(0.0, f64::max) / rep.entropy_bound;
    parts.push(format!(
        "entropy |dΣ/dt| / bound {worst_s:.3}, W₂² / C_κKt {worst_w2:.3} over {} times",
        rep.times.len()
    ));
    Ok((ok, parts.join("; ")))
}

const RUNS: &[(&str, &str, &[&str])] = &[
    ("bo", "travelling-wave", &["--modes", "32", "--t-end", "0.1", "--points", "16"]),
    ("bo", "evolve", &["--modes", "16", "--t-end", "0.1", "--save-every", "20"]),
    ("bo", "convexity", &["--modes", "64", "--trials", "4", "--low-modes", "4"]),
    ("gibbs", "sample", &["--beta", "0.3", "--ball", "4", "--modes", "4", "--steps", "3000", "--burn-in", "500"]),
    ("solitons", "evolve", &["--n", "2", "--t-end", "0.2", "--dt-out", "0.1"]),
    ("solitons", "calibrate", &["--t-end", "0.2"]),
    ("gas", "partition", &["--n-list", "4,8,12"]),
    ("gas", "equilibrium", &["--points", "16"]),
    ("gas", "clt", &["--n", "6", "--samples", "400", "--burn-in", "20", "--chains", "2"]),
    ("transport", "geodesic", &["--steps", "2", "--points", "16"]),
    ("transport", "inequalities", &["--samples", "2"]),
    ("euler", "evolve", &["--n", "32", "--t-end", "0.05", "--save-every", "10"]),
    ("euler", "cosec", &["--n", "50"]),
    ("euler", "entropy", &["--n", "32", "--t-end", "0.02", "--save-every", "2"]),
];

fn run_all(dir: &Path) -> Result<(), String> {
    for (module, exp, params) in RUNS {
        let out = Command::new(env!("CARGO_BIN_EXE_bolab"))
            .args(["run", module, exp])
            .args(*params)
            .args(["--seed", "42", "--threads", "2", "--out-dir"])
            .arg(dir)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{module} {exp}: {}", String::from_utf8_lossy(&out.stderr)));
        }
    }
    Ok(())
}

fn artifact_files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .map(|d| d.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect())
        .unwrap_or_default();
    v.retain(|f| !f.ends_with("-manifest.json"));
    v.sort();
    v
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().expect("temp dir"), tempfile::tempdir().expect("temp dir"));
    for d in [&a, &b] {
        if let Err(e) = run_all(d.path()) {
            return Ok((false, e));
        }
    }
    let (fa, fb) = (artifact_files(a.path()), artifact_files(b.path()));
    let covered = RUNS.iter().all(|(m, e, _)| fa.iter().any(|f| f.starts_with(&format!("{m}-{e}-"))));
    let differing: Vec<&String> = fa
        .iter()
        .filter(|f| std::fs::read(a.path().join(f)).ok() != std::fs::read(b.path().join(f)).ok())
        .collect();
    Ok((
        fa == fb && covered && differing.is_empty(),
        format!("{} experiments, {} artifacts compared, {} differ", RUNS.len(), fa.len(), differing.len()),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 12] = [
        ("travelling wave", Duration::from_secs(10), travelling_wave),
        ("one soliton and the travelling wave", Duration::from_secs(10), one_soliton),
        ("three solitons", Duration::from_secs(60), three_solitons),
        ("Gibbs sampler", Duration::from_secs(120), gibbs_sampler),
        ("convexity regime", Duration::from_secs(120), convexity_regime),
        ("Toeplitz partition", Duration::from_secs(60), toeplitz),
        ("equilibrium and free energy", Duration::from_secs(300), equilibrium),
        ("linear statistics", Duration::from_secs(600), linear_statistics),
        ("transport", Duration::from_secs(600), transport_checks),
        ("hydrodynamic limit", Duration::from_secs(60), hydrodynamic_limit),
        ("Euler module", Duration::from_secs(300), euler_module),
        ("determinism", Duration::from_secs(300), determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let took = start.elapsed();
        let pass = pass && took <= *budget;
        failed += !pass as usize;
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of 12 criteria failed");
        ExitCode::FAILURE
    }
}
