//! The rectangle-exit and boundary-scaling experiments.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Lattice, RectFrame, RectRegion, WedgeSpec};
use crate::models::{critical_tilt, subcritical_tilt, DriftFamily, ModelSpec};
use crate::simulate::engine::{pool, run_paths, sample_step};
use crate::simulate::rng::{path_rng, uniform};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RectOutcome {
    U2First,
    U1First,
    Unresolved,
}

/// Estimate of `P[hit U2(N) before U1(N)]` for one frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RectEstimate {
    pub n: u64,
    pub index: u8,
    pub aspect: f64,
    pub y: i64,
    pub z: i64,
    pub n_paths: u64,
    pub u2_first: u64,
    pub u1_first: u64,
    /// Paths that reached neither region within `step_cap` steps.
    pub unresolved: u64,
    pub step_cap: u64,
    /// `u2_first / n_paths`; unresolved paths count as failures.
    pub delta: f64,
    pub stderr: f64,
}

fn rect_loop<F: Fn(Lattice) -> f64>(tilt: F, frame: &RectFrame, x0: Lattice, cap: u64, seed: u64, id: u64) -> RectOutcome {
    let mut rng = path_rng(seed, id);
    let mut x = x0;
    for _ in 0..=cap {
        match frame.classify(x) {
            RectRegion::U1 => return RectOutcome::U1First,
            RectRegion::U2 => return RectOutcome::U2First,
            _ => {}
        }
        let s = sample_step(tilt(x), uniform(&mut rng));
        x[0] += s[0];
        x[1] += s[1];
    }
    RectOutcome::Unresolved
}

/// Starts `n_paths` walks at `(N + z) q_i + y q_i_perp` and records which of
/// `U1(N)`, `U2(N)` each reaches first, giving up after `100 N^2` steps.
pub fn rect_exit_experiment(
    model: &ModelSpec,
    frame: &RectFrame,
    y: i64,
    z: i64,
    n_paths: u64,
    master_seed: u64,
    workers: usize,
) -> Result<RectEstimate> {
    let n = frame.scale();
    if (y.unsigned_abs() as f64) > 2.0 * frame.aspect() * n as f64 {
        return Err(Error::Config(format!("|y| = {} exceeds 2hN", y.abs())));
    }
    if z.unsigned_abs() > model.jump_bound() as u64 {
        return Err(Error::Config(format!("|z| = {} exceeds the jump bound", z.abs())));
    }
    if n_paths == 0 {
        return Err(Error::Config("rectangle experiment needs at least one path".into()));
    }
    let x0 = frame.start_point(y, z);
    let cap = 100 * n * n;
    let (c, eps_cap) = (model.c(), model.eps_cap());
    let outcomes: Vec<RectOutcome> = pool(workers)?.install(|| {
        (0..n_paths)
            .into_par_iter()
            .map(|id| match model.family() {
                DriftFamily::ZeroDrift => rect_loop(|_| 0.0, frame, x0, cap, master_seed, id),
                DriftFamily::Critical => rect_loop(|x| critical_tilt(c, eps_cap, x), frame, x0, cap, master_seed, id),
                DriftFamily::Subcritical => {
                    rect_loop(|x| subcritical_tilt(c, eps_cap, x), frame, x0, cap, master_seed, id)
                }
            })
            .collect()
    });
    let count = |o: RectOutcome| outcomes.iter().filter(|&&v| v == o).count() as u64;
    let u2 = count(RectOutcome::U2First);
    let delta = u2 as f64 / n_paths as f64;
    Ok(RectEstimate {
        n,
        index: frame.index(),
        aspect: frame.aspect(),
        y,
        z,
        n_paths,
        u2_first: u2,
        u1_first: count(RectOutcome::U1First),
        unresolved: count(RectOutcome::Unresolved),
        step_cap: cap,
        delta,
        stderr: (delta * (1.0 - delta) / n_paths as f64).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub phi: f64,
    pub start: Lattice,
    /// `cos(w phi)` with `w = pi / (2 alpha)`.
    pub cos_w_phi: f64,
    /// Fraction of paths with `tau > floor(eps1 r^2)`; `None` when skipped.
    pub p_hat: Option<f64>,
    pub stderr: Option<f64>,
    pub note: Option<String>,
}

/// For each angle, the probability that a walk started at
/// `round(r (cos phi, sin phi))` survives in `W_A(alpha)` beyond
/// `floor(eps1 r^2)` steps. Angle `k` uses path ids `k n_paths ..`.
#[allow(clippy::too_many_arguments)]
pub fn boundary_scaling_experiment(
    model: &ModelSpec,
    wedge: &WedgeSpec,
    r: f64,
    phis: &[f64],
    eps1: f64,
    n_paths: u64,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<ScalingPoint>> {
    if !(eps1 > 0.0 && r > 0.0) || n_paths == 0 {
        return Err(Error::Config(format!(
            "boundary scaling needs eps1 > 0, r > 0 and paths; got eps1 = {eps1}, r = {r}, n_paths = {n_paths}"
        )));
    }
    let t_max = (eps1 * r * r).floor() as u64;
    if t_max == 0 {
        return Err(Error::Config("eps1 r^2 < 1 leaves no time to survive".into()));
    }
    let order = wedge.alpha().harmonic_order();
    let w = *order.numer() as f64 / *order.denom() as f64;
    let mut out = Vec::with_capacity(phis.len());
    for (k, &phi) in phis.iter().enumerate() {
        let start = [(r * phi.cos()).round() as i64, (r * phi.sin()).round() as i64];
        let mut point = ScalingPoint {
            phi,
            start,
            cos_w_phi: (w * phi).cos(),
            p_hat: None,
            stderr: None,
            note: None,
        };
        if !wedge.contains(start) {
            point.note = Some("rounded start is outside the wedge".into());
            out.push(point);
            continue;
        }
        let first = k as u64 * n_paths;
        let samples = run_paths(model, wedge, start, t_max, master_seed, first..first + n_paths, workers)?;
        let survived = samples.iter().filter(|s| s.censored).count();
        let p = survived as f64 / n_paths as f64;
        point.p_hat = Some(p);
        point.stderr = Some((p * (1.0 - p) / n_paths as f64).sqrt());
        out.push(point);
    }
    Ok(out)
}
