//! Single steps, exit-time runs and reproducible batches.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Lattice, WedgeSpec};
use crate::models::{critical_tilt, subcritical_tilt, DriftFamily, ModelSpec, UNIT_STEPS};
use crate::simulate::rng::{path_rng, uniform, PathRng};

/// Exit time of one path. `censored` means the walk was still inside at
/// `t_max`, in which case `tau = t_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExitSample {
    pub path_id: u64,
    pub tau: u64,
    pub censored: bool,
    pub x0: Lattice,
    pub t_max: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    pub model: ModelSpec,
    pub wedge: WedgeSpec,
    pub x0: Lattice,
    pub n_paths: u64,
    pub t_max: u64,
    pub master_seed: u64,
}

impl BatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_max == 0 {
            return Err(Error::Config("t_max must be positive".into()));
        }
        Ok(())
    }

    /// Non-fatal problems with the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.wedge.contains(self.x0) {
            w.push(format!(
                "start {:?} is outside the wedge; every exit time will be 0",
                self.x0
            ));
        }
        w
    }
}

/// Inverse-CDF draw from the tilted simple walk over the support order
/// `(e1, -e1, e2, -e2)`: cumulative weights `1/4 + eps, 1/2, 3/4`.
#[inline(always)]
pub fn sample_step(tilt: f64, u: f64) -> Lattice {
    if u < 0.25 + tilt {
        UNIT_STEPS[0]
    } else if u < 0.5 {
        UNIT_STEPS[1]
    } else if u < 0.75 {
        UNIT_STEPS[2]
    } else {
        UNIT_STEPS[3]
    }
}

/// One step drawn through the model's kernel. Slower than the engine loop,
/// which makes it an independent route for replays.
pub fn step(model: &ModelSpec, x: Lattice, rng: &mut PathRng) -> Lattice {
    let s = model.kernel_at(x).sample(uniform(rng));
    [x[0] + s[0], x[1] + s[1]]
}

#[inline(always)]
fn exit_loop<F: Fn(Lattice) -> f64>(tilt: F, wedge: &WedgeSpec, x0: Lattice, t_max: u64, rng: &mut PathRng) -> (u64, bool) {
    let mut x = x0;
    let mut t = 0u64;
    loop {
        if !wedge.contains(x) {
            return (t, false);
        }
        if t == t_max {
            return (t, true);
        }
        let s = sample_step(tilt(x), uniform(rng));
        x[0] += s[0];
        x[1] += s[1];
        t += 1;
    }
}

/// Runs one path from `x0` until it leaves `W_A(alpha)` or `t_max` steps
/// have been taken.
pub fn run_exit(model: &ModelSpec, wedge: &WedgeSpec, x0: Lattice, t_max: u64, master_seed: u64, path_id: u64) -> ExitSample {
    let mut rng = path_rng(master_seed, path_id);
    let (c, cap) = (model.c(), model.eps_cap());
    let (tau, censored) = match model.family() {
        DriftFamily::ZeroDrift => exit_loop(|_| 0.0, wedge, x0, t_max, &mut rng),
        DriftFamily::Critical => exit_loop(|x| critical_tilt(c, cap, x), wedge, x0, t_max, &mut rng),
        DriftFamily::Subcritical => exit_loop(|x| subcritical_tilt(c, cap, x), wedge, x0, t_max, &mut rng),
    };
    ExitSample {
        path_id,
        tau,
        censored,
        x0,
        t_max,
    }
}

pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::Config("worker count must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Paths with ids in `ids`, in id order.
pub fn run_paths(
    model: &ModelSpec,
    wedge: &WedgeSpec,
    x0: Lattice,
    t_max: u64,
    master_seed: u64,
    ids: std::ops::Range<u64>,
    workers: usize,
) -> Result<Vec<ExitSample>> {
    let pool = pool(workers)?;
    Ok(pool.install(|| {
        ids.into_par_iter()
            .map(|i| run_exit(model, wedge, x0, t_max, master_seed, i))
            .collect()
    }))
}

/// All paths of a batch, sorted by `path_id`. The result does not depend
/// on `workers`.
pub fn run_batch(cfg: &BatchConfig, workers: usize) -> Result<Vec<ExitSample>> {
    cfg.validate()?;
    run_paths(&cfg.model, &cfg.wedge, cfg.x0, cfg.t_max, cfg.master_seed, 0..cfg.n_paths, workers)
}

/// Replays a sample through [`step`] and checks that every state before
/// `tau` is inside, that the state at `tau` is outside when uncensored, and
/// that the recorded `tau` matches.
pub fn replay_exit(cfg: &BatchConfig, sample: &ExitSample) -> Result<()> {
    let mut rng = path_rng(cfg.master_seed, sample.path_id);
    let mut x = sample.x0;
    let mismatch = |msg: String| Err(Error::Domain(format!("replay of path {}: {msg}", sample.path_id)));
    for t in 0..sample.tau {
        if !cfg.wedge.contains(x) {
            return mismatch(format!("state {x:?} at t = {t} < tau is outside"));
        }
        x = step(&cfg.model, x, &mut rng);
    }
    let inside = cfg.wedge.contains(x);
    match (sample.censored, inside) {
        (false, true) => mismatch(format!("state {x:?} at tau = {} is inside", sample.tau)),
        (true, false) => mismatch(format!("censored path left at t_max = {}", sample.tau)),
        (true, true) if sample.tau != sample.t_max => mismatch("censored before t_max".into()),
        _ => Ok(()),
    }
}
