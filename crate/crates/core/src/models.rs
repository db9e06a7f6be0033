//! Walk families: a simple random walk whose `+e1` / `-e1` probabilities are
//! tilted by a position-dependent amount, plus checks of the weak-isotropy
//! and bounded-jump assumptions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Lattice;

/// Support order used for inverse-CDF sampling.
pub const UNIT_STEPS: [Lattice; 4] = [[1, 0], [-1, 0], [0, 1], [0, -1]];

const DEFAULT_EPS_CAP: f64 = 0.125;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftFamily {
    /// Symmetric simple random walk.
    ZeroDrift,
    /// Drift `(c / |x|, 0)` outside a bounded set.
    Critical,
    /// Drift `(c / (|x| ln(e + |x|)), 0)` outside a bounded set.
    Subcritical,
}

fn default_eps_cap() -> f64 {
    DEFAULT_EPS_CAP
}

fn default_jump_bound() -> u32 {
    1
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRepr {
    family: DriftFamily,
    #[serde(default)]
    c: f64,
    #[serde(default = "default_jump_bound")]
    b: u32,
    #[serde(default = "default_eps_cap")]
    eps_cap: f64,
}

/// A walk family. Immutable once constructed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct ModelSpec {
    family: DriftFamily,
    c: f64,
    b: u32,
    eps_cap: f64,
}

impl TryFrom<ModelRepr> for ModelSpec {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        ModelSpec::with_cap(r.family, r.c, r.eps_cap)?.with_jump_bound(r.b)
    }
}

impl From<ModelSpec> for ModelRepr {
    fn from(m: ModelSpec) -> Self {
        ModelRepr {
            family: m.family,
            c: m.c,
            b: m.b,
            eps_cap: m.eps_cap,
        }
    }
}

impl ModelSpec {
    pub fn new(family: DriftFamily, c: f64) -> Result<Self> {
        Self::with_cap(family, c, DEFAULT_EPS_CAP)
    }

    pub fn with_cap(family: DriftFamily, c: f64, eps_cap: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::Config(format!("drift strength c must be >= 0, got {c}")));
        }
        if !(eps_cap > 0.0 && eps_cap < 0.25) {
            return Err(Error::Config(format!("eps_cap must lie in (0, 1/4), got {eps_cap}")));
        }
        Ok(ModelSpec {
            family,
            c,
            b: 1,
            eps_cap,
        })
    }

    /// Any declared bound `b >= 1` is valid since every step is a unit vector.
    pub fn with_jump_bound(mut self, b: u32) -> Result<Self> {
        if b == 0 {
            return Err(Error::Config("jump bound b must be positive".into()));
        }
        self.b = b;
        Ok(self)
    }

    pub fn zero_drift() -> Self {
        Self::new(DriftFamily::ZeroDrift, 0.0).unwrap()
    }

    pub fn critical(c: f64) -> Result<Self> {
        Self::new(DriftFamily::Critical, c)
    }

    pub fn subcritical(c: f64) -> Result<Self> {
        Self::new(DriftFamily::Subcritical, c)
    }

    pub fn family(&self) -> DriftFamily {
        self.family
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn jump_bound(&self) -> u32 {
        self.b
    }

    pub fn eps_cap(&self) -> f64 {
        self.eps_cap
    }

    /// Nominal isotropy constant `1/4 - eps_cap`.
    pub fn kappa(&self) -> f64 {
        match self.family {
            DriftFamily::ZeroDrift => 0.25,
            _ => 0.25 - self.eps_cap,
        }
    }

    /// The tilt `eps(x)`: `P(+e1) = 1/4 + eps`, `P(-e1) = 1/4 - eps`.
    #[inline]
    pub fn tilt(&self, x: Lattice) -> f64 {
        match self.family {
            DriftFamily::ZeroDrift => 0.0,
            DriftFamily::Critical => critical_tilt(self.c, self.eps_cap, x),
            DriftFamily::Subcritical => subcritical_tilt(self.c, self.eps_cap, x),
        }
    }

    pub fn kernel_at(&self, x: Lattice) -> JumpKernel {
        let eps = self.tilt(x);
        JumpKernel {
            entries: vec![
                (UNIT_STEPS[0], 0.25 + eps),
                (UNIT_STEPS[1], 0.25 - eps),
                (UNIT_STEPS[2], 0.25),
                (UNIT_STEPS[3], 0.25),
            ],
        }
    }

    /// Mean drift `mu(x)`, by enumeration of the kernel.
    pub fn drift_at(&self, x: Lattice) -> [f64; 2] {
        self.kernel_at(x).mean()
    }

    /// Second-moment matrix `M(x) = E[theta^T theta]`.
    pub fn covariance_at(&self, x: Lattice) -> [[f64; 2]; 2] {
        self.kernel_at(x).second_moment()
    }

    pub fn check_assumptions(&self, states: &[Lattice]) -> Result<AssumptionReport> {
        check_assumptions(self, states)
    }
}

#[inline]
pub(crate) fn critical_tilt(c: f64, cap: f64, x: Lattice) -> f64 {
    if x == [0, 0] {
        return cap;
    }
    let r = ((x[0] * x[0] + x[1] * x[1]) as f64).sqrt();
    (c / (2.0 * r)).min(cap)
}

#[inline]
pub(crate) fn subcritical_tilt(c: f64, cap: f64, x: Lattice) -> f64 {
    if x == [0, 0] {
        return cap;
    }
    let r = ((x[0] * x[0] + x[1] * x[1]) as f64).sqrt();
    (c / (2.0 * r * (std::f64::consts::E + r).ln())).min(cap)
}

/// A finite-support jump law.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpKernel {
    entries: Vec<(Lattice, f64)>,
}

impl JumpKernel {
    pub const MAX_SUPPORT: usize = 8;

    /// Validates distinct steps, support size, and probabilities in `[0, 1]`
    /// summing to one within `1e-12`.
    pub fn new(entries: Vec<(Lattice, f64)>) -> Result<Self> {
        if entries.is_empty() || entries.len() > Self::MAX_SUPPORT {
            return Err(Error::Domain(format!(
                "kernel support size {} not in 1..={}",
                entries.len(),
                Self::MAX_SUPPORT
            )));
        }
        for (i, (s, p)) in entries.iter().enumerate() {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::Domain(format!("probability {p} of step {s:?} outside [0, 1]")));
            }
            if entries[..i].iter().any(|(t, _)| t == s) {
                return Err(Error::Domain(format!("duplicate step {s:?}")));
            }
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("kernel probabilities sum to {total}")));
        }
        Ok(JumpKernel { entries })
    }

    pub fn entries(&self) -> &[(Lattice, f64)] {
        &self.entries
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn probability_of(&self, step: Lattice) -> f64 {
        self.entries
            .iter()
            .filter(|(s, _)| *s == step)
            .map(|e| e.1)
            .sum()
    }

    pub fn max_jump(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.1 > 0.0)
            .map(|(s, _)| (s[0] as f64).hypot(s[1] as f64))
            .fold(0.0, f64::max)
    }

    pub fn mean(&self) -> [f64; 2] {
        let mut mu = [0.0; 2];
        for (s, p) in &self.entries {
            mu[0] += p * s[0] as f64;
            mu[1] += p * s[1] as f64;
        }
        mu
    }

    pub fn second_moment(&self) -> [[f64; 2]; 2] {
        let mut m = [[0.0; 2]; 2];
        for (s, p) in &self.entries {
            let (a, b) = (s[0] as f64, s[1] as f64);
            m[0][0] += p * a * a;
            m[0][1] += p * a * b;
            m[1][1] += p * b * b;
        }
        m[1][0] = m[0][1];
        m
    }

    /// Inverse-CDF draw over the stored support order, `u` in `[0, 1)`.
    pub fn sample(&self, u: f64) -> Lattice {
        let mut acc = 0.0;
        for (s, p) in &self.entries {
            acc += p;
            if u < acc {
                return *s;
            }
        }
        // u within rounding of 1
        self.entries
            .iter()
            .rev()
            .find(|e| e.1 > 0.0)
            .map(|e| e.0)
            .unwrap_or(self.entries[0].0)
    }
}

/// Anything that assigns a jump law to each lattice site.
pub trait KernelField {
    fn kernel_at(&self, x: Lattice) -> JumpKernel;

    /// Declared bound `b` on the jump length.
    fn jump_bound(&self) -> f64;
}

impl KernelField for ModelSpec {
    fn kernel_at(&self, x: Lattice) -> JumpKernel {
        ModelSpec::kernel_at(self, x)
    }

    fn jump_bound(&self) -> f64 {
        self.b as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssumptionKind {
    /// Probabilities do not sum to one.
    Normalization,
    /// (A1): some direction `+-e1, +-e2` has zero probability.
    WeakIsotropy,
    /// (A2): a jump longer than `b`.
    BoundedJumps,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: AssumptionKind,
    pub state: Lattice,
    pub detail: String,
}

/// Result of checking (A1)/(A2) over a sample of states, with `k = n0 = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    /// Smallest one-step probability of any of `+-e1, +-e2` over the sample.
    pub kappa: f64,
    pub k: u32,
    pub n0: u32,
    pub b: f64,
    /// Smallest directional probability, or the most negative excess of a
    /// violated jump bound or normalization.
    pub worst_margin: f64,
    pub worst_state: Lattice,
    pub violations: Vec<Violation>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_assumptions(field: &impl KernelField, states: &[Lattice]) -> Result<AssumptionReport> {
    if states.is_empty() {
        return Err(Error::Domain("assumption check needs at least one state".into()));
    }
    let b = field.jump_bound();
    let mut report = AssumptionReport {
        kappa: f64::INFINITY,
        k: 1,
        n0: 1,
        b,
        worst_margin: f64::INFINITY,
        worst_state: states[0],
        violations: Vec::new(),
    };
    for &x in states {
        let kernel = field.kernel_at(x);
        let total_slack = 1e-15 - (kernel.total_probability() - 1.0).abs();
        if total_slack < 0.0 {
            report.violations.push(Violation {
                kind: AssumptionKind::Normalization,
                state: x,
                detail: format!("total probability {}", kernel.total_probability()),
            });
        }
        let min_dir = UNIT_STEPS
            .iter()
            .map(|&s| kernel.probability_of(s))
            .fold(f64::INFINITY, f64::min);
        if min_dir <= 0.0 {
            report.violations.push(Violation {
                kind: AssumptionKind::WeakIsotropy,
                state: x,
                detail: format!("minimum directional probability {min_dir}"),
            });
        }
        let jump = kernel.max_jump();
        if jump > b {
            report.violations.push(Violation {
                kind: AssumptionKind::BoundedJumps,
                state: x,
                detail: format!("jump of length {jump} exceeds b = {b}"),
            });
        }
        report.kappa = report.kappa.min(min_dir);
        // a tight jump bound is not a violation, so only an excess counts
        let excess = |slack: f64| if slack < 0.0 { slack } else { f64::INFINITY };
        let margin = min_dir.min(excess(b - jump)).min(excess(total_slack));
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_state = x;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probs(k: &JumpKernel) -> Vec<f64> {
        k.entries().iter().map(|e| e.1).collect()
    }

    #[test]
    fn zero_drift_kernel_is_symmetric() {
        let m = ModelSpec::zero_drift();
        for x in [[0, 0], [5, -3], [1000, 7]] {
            assert_eq!(probs(&m.kernel_at(x)), vec![0.25; 4]);
            assert_eq!(m.drift_at(x), [0.0, 0.0]);
        }
    }

    #[test]
    fn critical_kernel_examples() {
        let m = ModelSpec::critical(2.0).unwrap();
        let p = probs(&m.kernel_at([6, 8]));
        let want = [0.35, 0.15, 0.25, 0.25];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(m.tilt([4, 3]), 0.125);
        assert_eq!(m.tilt([0, 0]), 0.125);
        let mu = m.drift_at([6, 8]);
        assert!((mu[0] - 0.2).abs() < 1e-15 && mu[1] == 0.0);
    }

    #[test]
    fn subcritical_drift_example() {
        let m = ModelSpec::subcritical(2.0).unwrap();
        let mu = m.drift_at([6, 8]);
        let want = 2.0 / (10.0 * (std::f64::consts::E + 10.0).ln());
        assert!((mu[0] - want).abs() < 1e-15);
        assert!((mu[0] - 0.0786).abs() < 1e-4);
    }

    #[test]
    fn covariance_is_exactly_half_identity() {
        for m in [
            ModelSpec::zero_drift(),
            ModelSpec::critical(2.0).unwrap(),
            ModelSpec::critical(7.3).unwrap(),
            ModelSpec::subcritical(2.0).unwrap(),
        ] {
            for x1 in -40..=40 {
                for x2 in [-17, 0, 3, 29] {
                    let c = m.covariance_at([x1, x2]);
                    assert_eq!(c, [[0.5, 0.0], [0.0, 0.5]], "{m:?} at {:?}", [x1, x2]);
                }
            }
        }
    }

    #[test]
    fn assumption_report_values() {
        let states: Vec<Lattice> = (0..200).map(|i| [i * 37 % 101 - 50, i]).collect();
        let r = ModelSpec::zero_drift().check_assumptions(&states).unwrap();
        assert!(r.passed());
        assert_eq!(r.kappa, 0.25);
        assert_eq!((r.k, r.n0, r.b), (1, 1, 1.0));

        let ring: Vec<Lattice> = [1i64, 2, 3, 5, 10, 100, 1000, 10_000]
            .iter()
            .flat_map(|&r| [[r, 0], [0, r], [-r, 0]])
            .collect();
        let r = ModelSpec::critical(2.0).unwrap().check_assumptions(&ring).unwrap();
        assert!(r.passed());
        assert_eq!(r.kappa, 0.125);
        assert!(ModelSpec::zero_drift().check_assumptions(&[]).is_err());
    }

    struct NoLeftStep;

    impl KernelField for NoLeftStep {
        fn kernel_at(&self, x: Lattice) -> JumpKernel {
            if x[0] > 3 {
                JumpKernel::new(vec![([1, 0], 0.5), ([-1, 0], 0.0), ([0, 1], 0.25), ([0, -1], 0.25)])
                    .unwrap()
            } else {
                ModelSpec::zero_drift().kernel_at(x)
            }
        }

        fn jump_bound(&self) -> f64 {
            1.0
        }
    }

    #[test]
    fn adversarial_kernel_fails_isotropy_with_witness() {
        let r = check_assumptions(&NoLeftStep, &[[0, 0], [2, 1], [7, -2]]).unwrap();
        assert!(!r.passed());
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind, AssumptionKind::WeakIsotropy);
        assert_eq!(r.violations[0].state, [7, -2]);
        assert_eq!(r.kappa, 0.0);
        assert_eq!(r.worst_state, [7, -2]);
    }

    #[test]
    fn kernel_validation_and_sampling() {
        assert!(JumpKernel::new(vec![([1, 0], 0.6), ([1, 0], 0.4)]).is_err());
        assert!(JumpKernel::new(vec![([1, 0], 0.6)]).is_err());
        let k = ModelSpec::critical(2.0).unwrap().kernel_at([6, 8]);
        assert_eq!(k.sample(0.0), [1, 0]);
        assert_eq!(k.sample(0.3499), [1, 0]);
        assert_eq!(k.sample(0.36), [-1, 0]);
        assert_eq!(k.sample(0.6), [0, 1]);
        assert_eq!(k.sample(0.99), [0, -1]);
    }

    #[test]
    fn serde_rejects_bad_models() {
        let m: ModelSpec = serde_json::from_str(r#"{"family":"critical","c":2}"#).unwrap();
        assert_eq!(m, ModelSpec::critical(2.0).unwrap());
        assert!(serde_json::from_str::<ModelSpec>(r#"{"family":"critical","c":-1}"#).is_err());
        assert!(serde_json::from_str::<ModelSpec>(r#"{"family":"critical","eps_cap":0.3}"#).is_err());
        assert!(serde_json::from_str::<ModelSpec>(r#"{"family":"critical","colour":1}"#).is_err());
    }
}
