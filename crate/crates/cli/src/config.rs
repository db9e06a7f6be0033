//! Experiment configuration: parsing, per-kind field checks and defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wedgewalk::models::{DriftFamily, ModelSpec};
use wedgewalk::{Lattice, WedgeSpec};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    TailFit,
    DriftCheck,
    RectExit,
    BoundaryScaling,
    LyapunovEval,
}

impl ExperimentKind {
    fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::TailFit => "tail-fit",
            ExperimentKind::DriftCheck => "drift-check",
            ExperimentKind::RectExit => "rect-exit",
            ExperimentKind::BoundaryScaling => "boundary-scaling",
            ExperimentKind::LyapunovEval => "lyapunov-eval",
        }
    }

    /// Top-level fields the kind reads, besides `experiment`.
    fn fields(self) -> &'static [&'static str] {
        const RUN: [&str; 6] = ["model", "wedge", "start", "n_paths", "t_max", "master_seed"];
        match self {
            ExperimentKind::Simulate => &RUN,
            ExperimentKind::TailFit => &[
                "model", "wedge", "start", "n_paths", "t_max", "master_seed", "fit_window", "samples_path",
            ],
            ExperimentKind::DriftCheck => &[
                "model", "wedge", "check", "w", "gamma", "radii", "angles_over_alpha", "p0", "r_exp",
            ],
            ExperimentKind::RectExit => &["model", "n_paths", "master_seed", "n_list", "frame", "h", "y", "z"],
            ExperimentKind::BoundaryScaling => &[
                "model", "wedge", "n_paths", "master_seed", "r", "eps1", "angles_over_alpha",
            ],
            ExperimentKind::LyapunovEval => &["wedge", "master_seed", "w", "radii", "angles_over_alpha"],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Supermartingale,
    Submartingale,
    Lamperti,
}

/// A scalar or a list; a list of `c` values sweeps the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: DriftFamily,
    #[serde(default)]
    pub c: Option<OneOrMany<f64>>,
    #[serde(default)]
    pub b: Option<u32>,
    #[serde(default)]
    pub eps_cap: Option<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            family: DriftFamily::ZeroDrift,
            c: None,
            b: None,
            eps_cap: None,
        }
    }
}

/// One model per swept `c`, each with the suffix used in output file names
/// (empty when `c` is a scalar).
pub fn expand_models(m: &ModelConfig) -> Result<Vec<(String, ModelSpec)>, CliError> {
    let swept = matches!(m.c, Some(OneOrMany::Many(_)));
    let cs = m.c.as_ref().map(OneOrMany::values).unwrap_or_else(|| vec![0.0]);
    if cs.is_empty() {
        return Err(CliError::Config("model.c: empty sweep".into()));
    }
    let eps_cap = m.eps_cap.unwrap_or(ModelSpec::zero_drift().eps_cap());
    cs.into_iter()
        .map(|c| {
            let spec = ModelSpec::with_cap(m.family, c, eps_cap)
                .and_then(|s| s.with_jump_bound(m.b.unwrap_or(1)))
                .map_err(|e| CliError::Config(format!("model: {e}")))?;
            let suffix = if swept { format!("_c{c}") } else { String::new() };
            Ok((suffix, spec))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wedge: Option<WedgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Lattice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    /// Polar angles as fractions of the wedge half-angle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles_over_alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<(u64, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_exp: Option<f64>,
}

const DRIFT_RADII: [f64; 5] = [50.0, 100.0, 200.0, 400.0, 800.0];
const DRIFT_ANGLES: [f64; 7] = [0.0, 0.25, -0.25, 0.5, -0.5, 0.75, -0.75];
const SCALING_ANGLES: [f64; 9] = [-0.9, -0.7, -0.5, -0.25, 0.0, 0.25, 0.5, 0.7, 0.9];

fn require<T: Clone>(v: &Option<T>, field: &str, kind: ExperimentKind) -> Result<T, CliError> {
    v.clone()
        .ok_or_else(|| CliError::Config(format!("{field}: required by experiment `{}`", kind.name())))
}

fn fill<T>(v: &mut Option<T>, default: impl FnOnce() -> T) {
    if v.is_none() {
        *v = Some(default());
    }
}

impl ExperimentConfig {
    /// Parses a config document, rejecting unknown fields and fields the
    /// chosen experiment does not read.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
        let cfg: ExperimentConfig =
            serde_json::from_value(value.clone()).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(obj) = value.as_object() {
            let allowed = cfg.experiment.fields();
            for key in obj.keys() {
                if key != "experiment" && !allowed.contains(&key.as_str()) {
                    return Err(CliError::Config(format!(
                        "{key}: not used by experiment `{}`",
                        cfg.experiment.name()
                    )));
                }
            }
        }
        Ok(cfg)
    }

    /// Fills every default the experiment reads and checks required fields,
    /// so the result echoes exactly what was run. Relative `samples_path`
    /// values are resolved against `base`.
    pub fn resolve(mut self, base: &Path) -> Result<Self, CliError> {
        use ExperimentKind::*;
        let kind = self.experiment;
        let reads = |f: &str| kind.fields().contains(&f);
        if reads("model") {
            fill(&mut self.model, ModelConfig::default);
            let m = self.model.as_mut().expect("filled");
            fill(&mut m.c, || OneOrMany::One(0.0));
            fill(&mut m.b, || 1);
            fill(&mut m.eps_cap, || ModelSpec::zero_drift().eps_cap());
            expand_models(m)?;
        }
        if reads("master_seed") {
            fill(&mut self.master_seed, || 0);
        }
        match kind {
            Simulate => {
                require(&self.wedge, "wedge", kind)?;
                require(&self.start, "start", kind)?;
                require(&self.n_paths, "n_paths", kind)?;
                require(&self.t_max, "t_max", kind)?;
            }
            TailFit => {
                if let Some(p) = &self.samples_path {
                    if p.is_relative() {
                        self.samples_path = Some(base.join(p));
                    }
                    for f in ["wedge", "start", "n_paths", "t_max"] {
                        if self.has(f) {
                            return Err(CliError::Config(format!("{f}: not used when samples_path is given")));
                        }
                    }
                    self.model = None;
                    self.master_seed = None;
                } else {
                    require(&self.wedge, "wedge", kind)?;
                    require(&self.start, "start", kind)?;
                    require(&self.n_paths, "n_paths", kind)?;
                    let t_max = require(&self.t_max, "t_max", kind)?;
                    fill(&mut self.fit_window, || wedgewalk::stats::default_window(t_max));
                }
            }
            DriftCheck => {
                require(&self.wedge, "wedge", kind)?;
                let check = *self.check.get_or_insert(CheckKind::Supermartingale);
                match check {
                    CheckKind::Supermartingale => {
                        fill(&mut self.w, || 1.9);
                        fill(&mut self.gamma, || 0.9);
                    }
                    CheckKind::Submartingale => fill(&mut self.gamma, || 2.0),
                    CheckKind::Lamperti => {
                        fill(&mut self.p0, || 0.5);
                        fill(&mut self.r_exp, || 2.0);
                    }
                }
                let stray = match check {
                    CheckKind::Supermartingale => ["p0", "r_exp", ""],
                    CheckKind::Submartingale => ["w", "p0", "r_exp"],
                    CheckKind::Lamperti => ["w", "gamma", ""],
                };
                for f in stray.into_iter().filter(|f| !f.is_empty()) {
                    if self.has(f) {
                        return Err(CliError::Config(format!("{f}: not used by the {check:?} check")));
                    }
                }
                fill(&mut self.radii, || DRIFT_RADII.to_vec());
                fill(&mut self.angles_over_alpha, || DRIFT_ANGLES.to_vec());
            }
            RectExit => {
                require(&self.n_paths, "n_paths", kind)?;
                fill(&mut self.n_list, || vec![64, 128, 256, 512]);
                fill(&mut self.frame, || 4);
                fill(&mut self.h, || 1.0);
                fill(&mut self.y, || 0);
                fill(&mut self.z, || 0);
            }
            BoundaryScaling => {
                require(&self.wedge, "wedge", kind)?;
                require(&self.n_paths, "n_paths", kind)?;
                require(&self.r, "r", kind)?;
                fill(&mut self.eps1, || 0.05);
                fill(&mut self.angles_over_alpha, || SCALING_ANGLES.to_vec());
            }
            LyapunovEval => {
                if let Some(wedge) = self.wedge {
                    let order = wedge.alpha().harmonic_order();
                    fill(&mut self.w, || *order.numer() as f64 / *order.denom() as f64);
                    fill(&mut self.radii, || DRIFT_RADII.to_vec());
                    fill(&mut self.angles_over_alpha, || DRIFT_ANGLES.to_vec());
                } else {
                    for f in ["w", "radii", "angles_over_alpha"] {
                        if self.has(f) {
                            return Err(CliError::Config(format!("{f}: needs a wedge")));
                        }
                    }
                }
            }
        }
        if let Some(n) = self.n_paths {
            if n == 0 {
                return Err(CliError::Config("n_paths: must be positive".into()));
            }
        }
        if self.t_max == Some(0) {
            return Err(CliError::Config("t_max: must be positive".into()));
        }
        if let Some(r) = &self.radii {
            if r.is_empty() || r.iter().any(|v| !(*v > 0.0)) {
                return Err(CliError::Config("radii: need at least one positive radius".into()));
            }
        }
        if let Some(a) = &self.angles_over_alpha {
            if a.is_empty() || a.iter().any(|v| !(v.abs() <= 1.0)) {
                return Err(CliError::Config("angles_over_alpha: values must lie in [-1, 1]".into()));
            }
        }
        if let Some(ns) = &self.n_list {
            if ns.is_empty() {
                return Err(CliError::Config("n_list: empty".into()));
            }
        }
        Ok(self)
    }

    fn has(&self, field: &str) -> bool {
        match field {
            "model" => self.model.is_some(),
            "wedge" => self.wedge.is_some(),
            "start" => self.start.is_some(),
            "n_paths" => self.n_paths.is_some(),
            "t_max" => self.t_max.is_some(),
            "master_seed" => self.master_seed.is_some(),
            "w" => self.w.is_some(),
            "gamma" => self.gamma.is_some(),
            "p0" => self.p0.is_some(),
            "r_exp" => self.r_exp.is_some(),
            "radii" => self.radii.is_some(),
            "angles_over_alpha" => self.angles_over_alpha.is_some(),
            _ => false,
        }
    }

    /// Polar angles in radians for the configured grid.
    pub fn angles(&self) -> Vec<f64> {
        let alpha: f64 = self.wedge.map(|w| w.alpha().radians()).unwrap_or(std::f64::consts::FRAC_PI_4);
        self.angles_over_alpha
            .as_deref()
            .unwrap_or(&[])
            .iter()
            .map(|f| f * alpha)
            .collect()
    }
}
