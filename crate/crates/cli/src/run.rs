//! Executes one resolved experiment and writes its CSV outputs.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use wedgewalk::geometry::{lattice_to_real, to_polar, RectFrame};
use wedgewalk::lyapunov::{
    all_hold, check_lamperti, check_submartingale_fhat, check_supermartingale_subcritical, f_eval, f_hat_eval,
    g_eval, least_margin, polar_grid, suites, worst_margin, write_reports_csv, GFunctionParams,
};
use wedgewalk::simulate::{
    boundary_scaling_experiment, read_exit_samples, rect_exit_experiment, run_batch, write_exit_samples, BatchConfig,
};
use wedgewalk::stats::{fit_samples, pearson, write_survival_csv, write_tailfit_csv};

use crate::config::{expand_models, CheckKind, ExperimentConfig, ExperimentKind};
use crate::CliError;

const LOCK_NAME: &str = ".wedgewalk.lock";

/// Holds the output-directory lock until dropped.
struct LockGuard(PathBuf);

impl LockGuard {
    fn acquire(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(LOCK_NAME);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(LockGuard(path))
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Locked(path)),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    created_unix: u64,
    workers: usize,
    config: &'a ExperimentConfig,
    outputs: &'a [String],
    status: String,
}

struct Outputs<'a> {
    dir: &'a Path,
    names: Vec<String>,
}

impl Outputs<'_> {
    fn create(&mut self, name: String) -> Result<BufWriter<File>, CliError> {
        let f = File::create(self.dir.join(&name))?;
        self.names.push(name);
        Ok(BufWriter::new(f))
    }
}

/// Runs the experiment into `out`, then writes `manifest.json`. A failed
/// check still writes every output and is reported afterwards.
pub fn run(cfg: &mut ExperimentConfig, out: &Path, workers: usize) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    let _lock = LockGuard::acquire(out)?;
    let mut outputs = Outputs { dir: out, names: Vec::new() };
    let verdict = match cfg.experiment {
        ExperimentKind::Simulate => simulate(cfg, &mut outputs, workers),
        ExperimentKind::TailFit => tail_fit(cfg, &mut outputs, workers),
        ExperimentKind::DriftCheck => drift_check(cfg, &mut outputs),
        ExperimentKind::RectExit => rect_exit(cfg, &mut outputs, workers),
        ExperimentKind::BoundaryScaling => boundary_scaling(cfg, &mut outputs, workers),
        ExperimentKind::LyapunovEval => lyapunov_eval(cfg, &mut outputs),
    };
    let status = match &verdict {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("failed: {e}"),
    };
    let manifest = Manifest {
        tool: "wedgewalk",
        version: env!("CARGO_PKG_VERSION"),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        workers,
        config: cfg,
        outputs: &outputs.names,
        status,
    };
    let mut f = BufWriter::new(File::create(out.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut f, &manifest).map_err(wedgewalk::Error::from)?;
    writeln!(f)?;
    f.flush()?;
    verdict
}

fn batch_configs(cfg: &ExperimentConfig) -> Result<Vec<(String, BatchConfig)>, CliError> {
    let model = cfg.model.as_ref().expect("resolved");
    expand_models(model)?
        .into_iter()
        .map(|(suffix, model)| {
            let b = BatchConfig {
                model,
                wedge: cfg.wedge.expect("resolved"),
                x0: cfg.start.expect("resolved"),
                n_paths: cfg.n_paths.expect("resolved"),
                t_max: cfg.t_max.expect("resolved"),
                master_seed: cfg.master_seed.expect("resolved"),
            };
            b.validate()?;
            for w in b.warnings() {
                eprintln!("warning: {w}");
            }
            Ok((suffix, b))
        })
        .collect()
}

fn simulate(cfg: &ExperimentConfig, out: &mut Outputs, workers: usize) -> Result<(), CliError> {
    for (suffix, b) in batch_configs(cfg)? {
        let samples = run_batch(&b, workers)?;
        let mut f = out.create(format!("exit_samples{suffix}.csv"))?;
        write_exit_samples(&mut f, Some(&b), &samples)?;
        f.flush()?;
        let censored = samples.iter().filter(|s| s.censored).count();
        println!("exit_samples{suffix}: {} paths, {censored} censored", samples.len());
    }
    Ok(())
}

fn tail_fit(cfg: &mut ExperimentConfig, out: &mut Outputs, workers: usize) -> Result<(), CliError> {
    let mut jobs = Vec::new();
    if let Some(path) = &cfg.samples_path {
        let file = File::open(path).map_err(|e| CliError::Config(format!("samples_path: {}: {e}", path.display())))?;
        let (_, samples) = read_exit_samples(file)?;
        let t_max = samples
            .first()
            .map(|s| s.t_max)
            .ok_or_else(|| wedgewalk::Error::InsufficientData("sample file has no rows".into()))?;
        if samples.iter().any(|s| s.t_max != t_max) {
            return Err(CliError::Config("samples_path: rows disagree on t_max".into()));
        }
        if cfg.fit_window.is_none() {
            cfg.fit_window = Some(wedgewalk::stats::default_window(t_max));
        }
        jobs.push((String::new(), samples));
    } else {
        for (suffix, b) in batch_configs(cfg)? {
            let samples = run_batch(&b, workers)?;
            let mut f = out.create(format!("exit_samples{suffix}.csv"))?;
            write_exit_samples(&mut f, Some(&b), &samples)?;
            f.flush()?;
            jobs.push((suffix, samples));
        }
    }
    let window = cfg.fit_window.expect("resolved");
    for (suffix, samples) in jobs {
        let (curve, fit) = fit_samples(&samples, window)?;
        let mut f = out.create(format!("survival{suffix}.csv"))?;
        write_survival_csv(&mut f, &curve)?;
        f.flush()?;
        let mut f = out.create(format!("tailfit{suffix}.csv"))?;
        write_tailfit_csv(&mut f, std::slice::from_ref(&fit))?;
        f.flush()?;
        println!(
            "tailfit{suffix}: gamma_hat = {:.4} (nominal se {:.4}, R^2 {:.4}) on [{}, {}]",
            fit.gamma_hat, fit.stderr, fit.r_squared, fit.t_lo, fit.t_hi
        );
    }
    Ok(())
}

fn drift_check(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let wedge = cfg.wedge.expect("resolved");
    let points = polar_grid(cfg.radii.as_deref().expect("resolved"), &cfg.angles());
    let check = cfg.check.expect("resolved");
    let mut failed = Vec::new();
    let mut summary = csv::Writer::from_writer(out.create("drift_summary.csv".into())?);
    summary.write_record(["c", "check", "points", "worst_margin", "holds"])?;
    for (suffix, model) in expand_models(cfg.model.as_ref().expect("resolved"))? {
        let (evaluated, worst, holds) = match check {
            CheckKind::Supermartingale | CheckKind::Submartingale => {
                let reports = if check == CheckKind::Supermartingale {
                    check_supermartingale_subcritical(
                        &model,
                        &wedge,
                        cfg.w.expect("resolved"),
                        cfg.gamma.expect("resolved"),
                        &points,
                    )?
                } else {
                    check_submartingale_fhat(&model, &wedge, cfg.gamma.expect("resolved"), &points)?
                };
                let mut f = out.create(format!("lyapunov_report{suffix}.csv"))?;
                write_reports_csv(&mut f, &reports)?;
                f.flush()?;
                let worst = if check == CheckKind::Supermartingale {
                    worst_margin(&reports)
                } else {
                    least_margin(&reports)
                };
                let n = reports.iter().filter(|r| r.margin.is_some()).count();
                (n, worst.unwrap_or(f64::NAN), all_hold(&reports))
            }
            CheckKind::Lamperti => {
                let g = GFunctionParams::new(wedge.alpha().radians::<f64>())?;
                let report = check_lamperti(
                    &model,
                    |x| g_eval(&g, x),
                    |x| wedge.contains(x),
                    cfg.p0.expect("resolved"),
                    cfg.r_exp.expect("resolved"),
                    &points,
                )?;
                let mut w = csv::Writer::from_writer(out.create(format!("lamperti_report{suffix}.csv"))?);
                w.write_record(["x1", "x2", "y", "m_p0", "m_two", "m_r"])?;
                for p in &report.points {
                    w.write_record([
                        p.state[0].to_string(),
                        p.state[1].to_string(),
                        p.y.to_string(),
                        p.m_p0.to_string(),
                        p.m_two.to_string(),
                        p.m_r.to_string(),
                    ])?;
                }
                w.flush()?;
                (report.points.len(), report.nondecrease_margin, report.nondecrease_holds())
            }
        };
        let check_name = format!("{check:?}").to_lowercase();
        summary.write_record([
            model.c().to_string(),
            check_name.clone(),
            evaluated.to_string(),
            worst.to_string(),
            holds.to_string(),
        ])?;
        println!("{check_name}{suffix}: {evaluated} points, worst margin {worst:.6}, holds = {holds}");
        if !holds {
            failed.push(format!("c = {}", model.c()));
        }
    }
    summary.flush()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("drift inequality fails for {}", failed.join(", "))))
    }
}

fn rect_exit(cfg: &ExperimentConfig, out: &mut Outputs, workers: usize) -> Result<(), CliError> {
    for (suffix, model) in expand_models(cfg.model.as_ref().expect("resolved"))? {
        let mut w = csv::Writer::from_writer(out.create(format!("rect_exit{suffix}.csv"))?);
        for &n in cfg.n_list.as_deref().expect("resolved") {
            let frame = RectFrame::new(cfg.frame.expect("resolved"), n, cfg.h.expect("resolved"))?;
            let est = rect_exit_experiment(
                &model,
                &frame,
                cfg.y.expect("resolved"),
                cfg.z.expect("resolved"),
                cfg.n_paths.expect("resolved"),
                cfg.master_seed.expect("resolved"),
                workers,
            )?;
            println!(
                "rect_exit{suffix}: N = {n}, delta = {:.4} +- {:.4}, unresolved {}",
                est.delta, est.stderr, est.unresolved
            );
            w.serialize(&est)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn boundary_scaling(cfg: &ExperimentConfig, out: &mut Outputs, workers: usize) -> Result<(), CliError> {
    let wedge = cfg.wedge.expect("resolved");
    for (suffix, model) in expand_models(cfg.model.as_ref().expect("resolved"))? {
        let points = boundary_scaling_experiment(
            &model,
            &wedge,
            cfg.r.expect("resolved"),
            &cfg.angles(),
            cfg.eps1.expect("resolved"),
            cfg.n_paths.expect("resolved"),
            cfg.master_seed.expect("resolved"),
            workers,
        )?;
        let mut w = csv::Writer::from_writer(out.create(format!("boundary_scaling{suffix}.csv"))?);
        w.write_record(["phi", "x1", "x2", "cos_w_phi", "p_hat", "stderr", "note"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for p in &points {
            w.write_record([
                p.phi.to_string(),
                p.start[0].to_string(),
                p.start[1].to_string(),
                p.cos_w_phi.to_string(),
                opt(p.p_hat),
                opt(p.stderr),
                p.note.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        let (cos, p): (Vec<f64>, Vec<f64>) =
            points.iter().filter_map(|p| p.p_hat.map(|v| (p.cos_w_phi, v))).unzip();
        if cos.len() >= 2 {
            println!("boundary_scaling{suffix}: corr(P, cos(w phi)) = {:.4}", pearson(&cos, &p));
        }
    }
    Ok(())
}

fn lyapunov_eval(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let outcomes = suites::run_all(cfg.master_seed.expect("resolved"));
    let mut w = csv::Writer::from_writer(out.create("lyapunov_suites.csv".into())?);
    w.write_record(["suite", "passed", "worst", "detail"])?;
    for o in &outcomes {
        w.write_record([o.name.to_string(), o.passed.to_string(), o.worst.to_string(), o.detail.clone()])?;
        println!("{:<20} {} {}", o.name, if o.passed { "pass" } else { "FAIL" }, o.detail);
    }
    w.flush()?;
    if let Some(wedge) = cfg.wedge {
        let w_order = cfg.w.expect("resolved");
        let alpha: f64 = wedge.alpha().radians();
        let g = (alpha < std::f64::consts::FRAC_PI_2).then(|| GFunctionParams::new(alpha)).transpose()?;
        let mut wtr = csv::Writer::from_writer(out.create("lyapunov_eval.csv".into())?);
        wtr.write_record(["x1", "x2", "r", "phi", "f_w", "f_hat", "g"])?;
        for p in polar_grid(cfg.radii.as_deref().expect("resolved"), &cfg.angles()) {
            let x = lattice_to_real(p);
            let polar = to_polar(x)?;
            let gv = g.as_ref().map(|g| g_eval(g, x).to_string()).unwrap_or_default();
            wtr.write_record([
                p[0].to_string(),
                p[1].to_string(),
                polar.r.to_string(),
                polar.phi.to_string(),
                f_eval(w_order, x).to_string(),
                f_hat_eval(w_order, &wedge, x).to_string(),
                gv,
            ])?;
        }
        wtr.flush()?;
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("suites failed: {}", failed.join(", "))))
    }
}
