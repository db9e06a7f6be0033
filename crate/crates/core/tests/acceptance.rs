//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p wedgewalk --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wedgewalk::geometry::{WedgeAngle, WedgeSpec};
use wedgewalk::lyapunov::{
    all_hold, check_lamperti, check_submartingale_fhat, check_supermartingale_subcritical, g_eval, least_margin,
    polar_grid, suites, worst_margin, GFunctionParams,
};
use wedgewalk::models::ModelSpec;
use wedgewalk::simulate::{rect_exit_experiment, replay_exit, run_batch, write_exit_samples, BatchConfig};
use wedgewalk::stats::fit_samples;
use wedgewalk::RectFrame;

const SEED: u64 = 20_240_601;

struct Gate {
    failures: Vec<String>,
    workers: usize,
}

impl Gate {
    fn record(&mut self, id: &str, name: &str, pass: bool, detail: String) {
        println!("{} {id} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures.push(id.to_string());
        }
    }

    /// Fitted tail exponent for a batch started at (30, 0), or the error text.
    fn gamma(&self, model: ModelSpec, wedge: WedgeSpec, n_paths: u64, t_max: u64, window: (u64, u64)) -> Result<f64, String> {
        let cfg = BatchConfig {
            model,
            wedge,
            x0: [30, 0],
            n_paths,
            t_max,
            master_seed: SEED,
        };
        let t = Instant::now();
        let samples = run_batch(&cfg, self.workers).map_err(|e| e.to_string())?;
        let censored = samples.iter().filter(|s| s.censored).count();
        let fit = fit_samples(&samples, window).map_err(|e| e.to_string());
        eprintln!(
            "  [{:?} c={} alpha={} n={n_paths} t_max={t_max}: {censored} censored, {:.0}s]",
            model.family(),
            model.c(),
            wedge.alpha().fraction_of_pi(),
            t.elapsed().as_secs_f64()
        );
        fit.map(|(_, f)| f.gamma_hat)
    }
}

fn within(v: &Result<f64, String>, lo: f64, hi: f64) -> (bool, String) {
    match v {
        Ok(g) => (*g >= lo && *g <= hi, format!("gamma_hat = {g:.4}, target [{lo}, {hi}]")),
        Err(e) => (false, format!("fit failed: {e}")),
    }
}

fn quadrant() -> WedgeSpec {
    WedgeSpec::quadrant()
}

fn tail_criteria(gate: &mut Gate) {
    let window = (1_000, 100_000);
    let zero = gate.gamma(ModelSpec::zero_drift(), quadrant(), 200_000, 1_000_000, window);
    let (ok, detail) = within(&zero, 0.85, 1.15);
    gate.record("1", "tail exponent, quadrant", ok, detail);

    let half = WedgeSpec::wedge(WedgeAngle::HALF_PLANE).unwrap();
    let g = gate.gamma(ModelSpec::zero_drift(), half, 200_000, 1_000_000, window);
    let (ok, detail) = within(&g, 0.42, 0.58);
    gate.record("2", "tail exponent, half-plane", ok, detail);

    let line = WedgeSpec::new(WedgeAngle::FULL, 1, 0.0).unwrap();
    let g = gate.gamma(ModelSpec::zero_drift(), line, 50_000, 100_000, (100, 30_000));
    let (ok, detail) = within(&g, 0.17, 0.33);
    gate.record("3", "tail exponent, plane minus half-line", ok, detail);

    let sub = gate.gamma(ModelSpec::subcritical(2.0).unwrap(), quadrant(), 200_000, 1_000_000, window);
    let (ok, detail) = match (&zero, &sub) {
        (Ok(z), Ok(s)) => (
            (s - z).abs() <= 0.15,
            format!("gamma_hat = {s:.4} vs zero drift {z:.4}, |diff| = {:.4} (max 0.15)", (s - z).abs()),
        ),
        (_, Err(e)) | (Err(e), _) => (false, format!("fit failed: {e}")),
    };
    gate.record("4", "subcritical drift keeps the exponent", ok, detail);

    let cs = [0.0, 1.0, 2.0, 4.0, 8.0];
    let gammas: Vec<Result<f64, String>> = cs
        .iter()
        .map(|&c| gate.gamma(ModelSpec::critical(c).unwrap(), quadrant(), 10_000, 1_000_000, window))
        .collect();
    let (ok, detail) = match gammas.iter().cloned().collect::<Result<Vec<f64>, String>>() {
        Ok(g) => {
            let steps_ok = g.windows(2).all(|p| p[0] - p[1] >= 0.03);
            let first_ok = (0.85..=1.15).contains(&g[0]);
            let last_ok = g[4] < 0.75;
            let listed: Vec<String> = cs.iter().zip(&g).map(|(c, v)| format!("c={c}: {v:.4}")).collect();
            (
                steps_ok && first_ok && last_ok,
                format!(
                    "{} (steps >= 0.03: {steps_ok}, c=0 in [0.85, 1.15]: {first_ok}, c=8 < 0.75: {last_ok})",
                    listed.join(", ")
                ),
            )
        }
        Err(e) => (false, format!("fit failed: {e}")),
    };
    gate.record("5", "critical drift lowers the exponent monotonically", ok, detail);
}

fn rect_criterion(gate: &mut Gate) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, model) in [("zero drift", ModelSpec::zero_drift()), ("critical c=1", ModelSpec::critical(1.0).unwrap())] {
        let mut deltas = Vec::new();
        for n in [64u64, 128, 256, 512] {
            let t = Instant::now();
            let frame = RectFrame::new(4, n, 1.0).unwrap();
            let est = rect_exit_experiment(&model, &frame, 0, 0, 10_000, SEED, gate.workers).unwrap();
            eprintln!(
                "  [{name} N={n}: delta {:.4} se {:.4} unresolved {} ({:.0}s)]",
                est.delta,
                est.stderr,
                est.unresolved,
                t.elapsed().as_secs_f64()
            );
            ok &= est.delta >= 0.05 && est.stderr <= 0.005;
            deltas.push(est.delta);
        }
        ok &= deltas[3] >= 0.5 * deltas[0];
        let listed: Vec<String> = deltas.iter().map(|d| format!("{d:.4}")).collect();
        parts.push(format!("{name}: delta(64..512) = {}", listed.join(" ")));
    }
    gate.record("6", "rectangle exit through the sides", ok, parts.join("; "));
}

fn suites_criterion(gate: &mut Gate) {
    let outcomes = suites::run_all(SEED);
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| format!("{} ({})", o.name, o.detail))
        .collect();
    let detail = if failed.is_empty() {
        format!("{} suites passed", outcomes.len())
    } else {
        format!("failed: {}", failed.join("; "))
    };
    gate.record("7", "exact Lyapunov suites", failed.is_empty(), detail);
}

fn drift_criteria(gate: &mut Gate) {
    let q = quadrant();
    let alpha = std::f64::consts::FRAC_PI_4;
    let radii: Vec<f64> = (0..=8).map(|k| 50.0 * 2f64.powf(k as f64 / 2.0)).collect();
    let angles: Vec<f64> = [0.0, 0.25, -0.25, 0.5, -0.5, 0.75, -0.75].iter().map(|f| f * alpha).collect();
    let grid = polar_grid(&radii, &angles);
    for (id, name, model) in [
        ("8a", "supermartingale f_w^gamma, zero drift", ModelSpec::zero_drift()),
        ("8b", "supermartingale f_w^gamma, subcritical c=2", ModelSpec::subcritical(2.0).unwrap()),
    ] {
        let reports = check_supermartingale_subcritical(&model, &q, 1.9, 0.9, &grid).unwrap();
        let n = reports.iter().filter(|r| r.holds.is_some()).count();
        let bad: Vec<String> = reports
            .iter()
            .filter(|r| r.holds == Some(false))
            .take(3)
            .map(|r| format!("(r={:.0}, phi={:.3})", r.r, r.phi))
            .collect();
        let detail = format!(
            "{n} points, worst margin {:.4e} (needs < 0){}",
            worst_margin(&reports).unwrap_or(f64::NAN),
            if bad.is_empty() { String::new() } else { format!(", e.g. {}", bad.join(" ")) }
        );
        gate.record(id, name, all_hold(&reports), detail);
    }

    let sub_radii = [100.0, 200.0, 400.0, 800.0];
    let sub_angles: Vec<f64> = [0.0, 0.7, -0.7, 0.95, -0.95, 0.999, -0.999].iter().map(|f| f * alpha).collect();
    let sub_grid = polar_grid(&sub_radii, &sub_angles);
    for (id, name, model) in [
        ("8c", "submartingale f_hat^gamma, zero drift", ModelSpec::zero_drift()),
        ("8d", "submartingale f_hat^gamma, subcritical c=2", ModelSpec::subcritical(2.0).unwrap()),
    ] {
        let reports = check_submartingale_fhat(&model, &q, 1.5, &sub_grid).unwrap();
        let n = reports.iter().filter(|r| r.holds.is_some()).count();
        let detail = format!("{n} points, least margin {:.4e} (needs >= 0)", least_margin(&reports).unwrap_or(f64::NAN));
        gate.record(id, name, all_hold(&reports), detail);
    }

    let g = GFunctionParams::new(alpha).unwrap();
    let states: Vec<[i64; 2]> = (2..=16).map(|k| [50 * k, 0]).collect();
    let report = check_lamperti(
        &ModelSpec::critical(16.0).unwrap(),
        |x| g_eval(&g, x),
        |x| q.contains(x),
        0.5,
        2.0,
        &states,
    )
    .unwrap();
    gate.record(
        "8e",
        "non-existence drift condition for g, critical c=16",
        report.nondecrease_holds() && report.skipped.is_empty(),
        format!("{} states, least margin {:.4e} (needs >= 0)", report.points.len(), report.nondecrease_margin),
    );
}

fn determinism_criterion(gate: &mut Gate) {
    let cfg = BatchConfig {
        model: ModelSpec::critical(1.0).unwrap(),
        wedge: quadrant(),
        x0: [20, 5],
        n_paths: 5_000,
        t_max: 20_000,
        master_seed: SEED,
    };
    let bytes: Vec<Vec<u8>> = [1, 4, 8]
        .iter()
        .map(|&w| {
            let samples = run_batch(&cfg, w).unwrap();
            let mut buf = Vec::new();
            write_exit_samples(&mut buf, Some(&cfg), &samples).unwrap();
            buf
        })
        .collect();
    let identical = bytes.windows(2).all(|p| p[0] == p[1]);
    let samples = run_batch(&cfg, gate.workers).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut replay_failures = 0;
    for _ in 0..1_000 {
        let s = &samples[rng.random_range(0..samples.len())];
        if replay_exit(&cfg, s).is_err() {
            replay_failures += 1;
        }
    }
    gate.record(
        "9",
        "determinism and replay",
        identical && replay_failures == 0,
        format!("byte-identical across 1/4/8 workers: {identical}; replay failures {replay_failures}/1000"),
    );
}

fn main() -> ExitCode {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut gate = Gate {
        failures: Vec::new(),
        workers,
    };
    let start = Instant::now();
    suites_criterion(&mut gate);
    drift_criteria(&mut gate);
    determinism_criterion(&mut gate);
    tail_criteria(&mut gate);
    rect_criterion(&mut gate);
    eprintln!("acceptance finished in {:.0}s", start.elapsed().as_secs_f64());
    if gate.failures.is_empty() {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {}", gate.failures.join(", "));
        ExitCode::FAILURE
    }
}
