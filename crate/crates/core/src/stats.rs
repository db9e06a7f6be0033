//! Survival curves and tail-exponent fits for censored exit times.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simulate::ExitSample;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurvivalPoint {
    pub t: u64,
    #[serde(rename = "S")]
    pub s: f64,
    pub n_at_risk: u64,
}

/// Empirical `P[tau > t]` on a grid of times below the common cap.
#[derive(Clone, Debug, PartialEq)]
pub struct SurvivalCurve {
    points: Vec<SurvivalPoint>,
    n_paths: u64,
    t_max: u64,
}

impl SurvivalCurve {
    /// A curve from given `(t, S)` pairs, with at-risk counts `round(S n_paths)`.
    pub fn from_points(points: &[(u64, f64)], n_paths: u64, t_max: u64) -> Result<Self> {
        let mut pts = Vec::with_capacity(points.len());
        for (i, &(t, s)) in points.iter().enumerate() {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Domain(format!("survival value {s} outside [0, 1]")));
            }
            if t >= t_max || (i > 0 && t <= points[i - 1].0) {
                return Err(Error::Domain("curve times must increase and stay below t_max".into()));
            }
            pts.push(SurvivalPoint {
                t,
                s,
                n_at_risk: (s * n_paths as f64).round() as u64,
            });
        }
        Ok(SurvivalCurve {
            points: pts,
            n_paths,
            t_max,
        })
    }

    pub fn points(&self) -> &[SurvivalPoint] {
        &self.points
    }

    pub fn n_paths(&self) -> u64 {
        self.n_paths
    }

    pub fn t_max(&self) -> u64 {
        self.t_max
    }
}

/// `S(t) = #{tau > t} / n` at each grid time. Every grid time must be below
/// the samples' common cap.
pub fn survival_curve(samples: &[ExitSample], grid: &[u64]) -> Result<SurvivalCurve> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no exit samples".into()));
    }
    let t_max = samples.iter().map(|s| s.t_max).min().unwrap();
    let mut grid: Vec<u64> = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if let Some(&t) = grid.iter().find(|&&t| t >= t_max) {
        return Err(Error::Domain(format!("grid time {t} is not below t_max = {t_max}")));
    }
    let mut taus: Vec<u64> = samples.iter().map(|s| s.tau).collect();
    taus.sort_unstable();
    let n = taus.len() as u64;
    let points = grid
        .iter()
        .map(|&t| {
            let at_risk = n - taus.partition_point(|&tau| tau <= t) as u64;
            SurvivalPoint {
                t,
                s: at_risk as f64 / n as f64,
                n_at_risk: at_risk,
            }
        })
        .collect();
    Ok(SurvivalCurve {
        points,
        n_paths: n,
        t_max,
    })
}

/// Ratio between consecutive grid times.
pub const GRID_RATIO: f64 = 1.090_507_732_665_257_7; // 2^(1/8)

/// Distinct integer times `round(t_lo r^k)` up to `t_hi`.
pub fn geometric_grid(t_lo: u64, t_hi: u64, ratio: f64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut v = t_lo.max(1) as f64;
    while v.round() as u64 <= t_hi {
        let t = v.round() as u64;
        if out.last() != Some(&t) {
            out.push(t);
        }
        v *= ratio;
    }
    out
}

/// `[t_max^0.3, t_max^0.8]`.
pub fn default_window(t_max: u64) -> (u64, u64) {
    let t = t_max as f64;
    (t.powf(0.3).round() as u64, t.powf(0.8).round() as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailFit {
    pub gamma_hat: f64,
    /// Nominal regression standard error (grid points are correlated).
    pub stderr: f64,
    pub r_squared: f64,
    pub t_lo: u64,
    pub t_hi: u64,
    pub n_points: usize,
    pub n_paths: u64,
}

/// Least-squares fit of `ln S = a - gamma ln t` over the curve points in
/// `[t_lo, t_hi]`.
pub fn fit_tail_exponent(curve: &SurvivalCurve, window: (u64, u64)) -> Result<TailFit> {
    let (t_lo, t_hi) = window;
    if !(t_lo < t_hi && t_hi < curve.t_max) {
        return Err(Error::Domain(format!(
            "fit window [{t_lo}, {t_hi}] must satisfy t_lo < t_hi < t_max = {}",
            curve.t_max
        )));
    }
    let pts: Vec<&SurvivalPoint> = curve.points.iter().filter(|p| p.t >= t_lo && p.t <= t_hi).collect();
    if let Some(p) = pts.iter().find(|p| p.s <= 0.0) {
        return Err(Error::ZeroSurvival { t: p.t });
    }
    if pts.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} grid points in the fit window, need at least 5",
            pts.len()
        )));
    }
    let last = pts.last().unwrap();
    if last.n_at_risk < 50 {
        return Err(Error::InsufficientData(format!(
            "only {} paths at risk at t = {}, need at least 50",
            last.n_at_risk, last.t
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| (p.t as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.s.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Ok(TailFit {
        gamma_hat: -slope,
        stderr: (ssr / (n - 2.0) / sxx).sqrt(),
        r_squared,
        t_lo,
        t_hi,
        n_points: pts.len(),
        n_paths: curve.n_paths,
    })
}

/// Survival on a `2^(1/8)` grid over the window, then the fit.
pub fn fit_samples(samples: &[ExitSample], window: (u64, u64)) -> Result<(SurvivalCurve, TailFit)> {
    let grid = geometric_grid(window.0, window.1, GRID_RATIO);
    let curve = survival_curve(samples, &grid)?;
    let fit = fit_tail_exponent(&curve, window)?;
    Ok((curve, fit))
}

/// `pi / (4 alpha)`, the critical moment order of the exit time.
pub fn spitzer_exponent<T: Scalar>(alpha: T) -> T {
    T::PI() / (T::lit(4.0) * alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentClass {
    Converging,
    Diverging,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentProbe {
    pub s: f64,
    /// `(T, mean of min(tau, T)^s)` per rung.
    pub means: Vec<(u64, f64)>,
    pub class: MomentClass,
}

/// Truncated moments `m(T) = mean(min(tau, T)^s)` along the ladder.
/// Diverging when `m` grows by at least 20% per doubling of `T` between
/// the top two rungs; converging when those two rungs differ by under 2%.
pub fn moment_probe(samples: &[ExitSample], s: f64, ladder: &[u64]) -> Result<MomentProbe> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no exit samples".into()));
    }
    if ladder.len() < 2 || ladder.windows(2).any(|w| w[0] >= w[1]) || ladder[0] == 0 {
        return Err(Error::Config("moment ladder needs at least two increasing positive caps".into()));
    }
    let t_max = samples.iter().map(|x| x.t_max).min().unwrap();
    if *ladder.last().unwrap() > t_max {
        return Err(Error::Config(format!("ladder exceeds t_max = {t_max}")));
    }
    let n = samples.len() as f64;
    let means: Vec<(u64, f64)> = ladder
        .iter()
        .map(|&cap| {
            let m = samples.iter().map(|x| (x.tau.min(cap) as f64).powf(s)).sum::<f64>() / n;
            (cap, m)
        })
        .collect();
    let (t1, m1) = means[means.len() - 2];
    let (t2, m2) = means[means.len() - 1];
    let doublings = (t2 as f64 / t1 as f64).log2();
    let growth = (m2 / m1).powf(1.0 / doublings) - 1.0;
    let class = if growth >= 0.2 {
        MomentClass::Diverging
    } else if ((m2 - m1) / m1).abs() < 0.02 {
        MomentClass::Converging
    } else {
        MomentClass::Inconclusive
    };
    Ok(MomentProbe { s, means, class })
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

pub fn write_tailfit_csv<W: Write>(out: W, fits: &[TailFit]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["gamma_hat", "stderr", "r_squared", "t_lo", "t_hi", "n_paths"])?;
    for f in fits {
        wtr.write_record([
            f.gamma_hat.to_string(),
            f.stderr.to_string(),
            f.r_squared.to_string(),
            f.t_lo.to_string(),
            f.t_hi.to_string(),
            f.n_paths.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_survival_csv<W: Write>(out: W, curve: &SurvivalCurve) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["t", "S", "n_at_risk"])?;
    for p in &curve.points {
        wtr.write_record([p.t.to_string(), p.s.to_string(), p.n_at_risk.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(tau: u64, t_max: u64) -> ExitSample {
        ExitSample {
            path_id: tau,
            tau,
            censored: tau == t_max,
            x0: [1, 0],
            t_max,
        }
    }

    /// Exit times with `P[tau > t] = 1/t` at stratified quantiles.
    fn pareto(n: usize, t_max: u64) -> Vec<ExitSample> {
        (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) / n as f64;
                sample(((1.0 / u).floor() as u64).min(t_max), t_max)
            })
            .collect()
    }

    fn synthetic(f: impl Fn(f64) -> f64, t_max: u64) -> SurvivalCurve {
        let pts: Vec<(u64, f64)> = geometric_grid(10, t_max / 2, GRID_RATIO).into_iter().map(|t| (t, f(t as f64))).collect();
        SurvivalCurve::from_points(&pts, 1 << 62, t_max).unwrap()
    }

    #[test]
    fn survival_examples() {
        let xs: Vec<ExitSample> = [1, 2, 4, 8].iter().map(|&t| sample(t, 100)).collect();
        let c = survival_curve(&xs, &[3, 0]).unwrap();
        assert_eq!(c.points()[0].t, 0);
        assert_eq!(c.points()[0].s, 1.0);
        assert_eq!(c.points()[1].s, 0.5);
        let mut zero = xs.clone();
        zero[0].tau = 0;
        assert_eq!(survival_curve(&zero, &[0]).unwrap().points()[0].s, 0.75);
        let all: Vec<ExitSample> = (0..5).map(|_| sample(50, 50)).collect();
        assert!(survival_curve(&all, &[1, 10, 49]).unwrap().points().iter().all(|p| p.s == 1.0));
        assert!(survival_curve(&all, &[50]).is_err());
        assert!(survival_curve(&[], &[1]).is_err());
    }

    #[test]
    fn synthetic_fits_are_exact() {
        let fit = fit_tail_exponent(&synthetic(|t| 1.0 / t, 1_000_000), (100, 100_000)).unwrap();
        assert!((fit.gamma_hat - 1.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let fit = fit_tail_exponent(&synthetic(|t| 0.3 * t.powf(-0.25), 1_000_000), (100, 100_000)).unwrap();
        assert!((fit.gamma_hat - 0.25).abs() < 1e-9);
        assert!(fit.n_points >= 24);
    }

    #[test]
    fn fit_errors() {
        let xs = pareto(1000, 10_000);
        let grid = geometric_grid(10, 9_999, GRID_RATIO);
        let curve = survival_curve(&xs, &grid).unwrap();
        assert!(matches!(fit_tail_exponent(&curve, (10, 100)), Err(Error::InsufficientData(_))));
        assert!(fit_tail_exponent(&curve, (10, 13)).is_err());
        assert!(fit_tail_exponent(&curve, (10, 10_000)).is_err());
        let dead: Vec<ExitSample> = (0..100).map(|i| sample(1 + i % 20, 1000)).collect();
        let curve = survival_curve(&dead, &geometric_grid(2, 500, GRID_RATIO)).unwrap();
        assert!(matches!(fit_tail_exponent(&curve, (2, 500)), Err(Error::ZeroSurvival { .. })));
    }

    #[test]
    fn pareto_samples_fit_one() {
        let xs = pareto(100_000, 1_000_000);
        let (_, fit) = fit_samples(&xs, (10, 1000)).unwrap();
        assert!((fit.gamma_hat - 1.0).abs() < 0.02, "{fit:?}");
    }

    #[test]
    fn grid_and_window() {
        let g = geometric_grid(1000, 100_000, GRID_RATIO);
        assert!(g.len() >= 16 * 2);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!((GRID_RATIO - 2f64.powf(0.125)).abs() < 1e-15);
        assert_eq!(default_window(1_000_000), (63, 63_096));
    }

    #[test]
    fn spitzer_examples() {
        use std::f64::consts::PI;
        assert!((spitzer_exponent(PI / 4.0) - 1.0).abs() < 1e-15);
        assert!((spitzer_exponent(PI) - 0.25).abs() < 1e-15);
        assert!((spitzer_exponent(PI / 2.0) - 0.5).abs() < 1e-15);
        assert!((spitzer_exponent(std::f32::consts::PI) - 0.25).abs() < 1e-7);
    }

    #[test]
    fn moment_probe_examples() {
        let xs = pareto(1_000_000, 1 << 20);
        let ladder = [1 << 12, 1 << 14, 1 << 16];
        assert_eq!(moment_probe(&xs, 0.0, &ladder).unwrap().class, MomentClass::Converging);
        assert_eq!(moment_probe(&xs, 1.5, &ladder).unwrap().class, MomentClass::Diverging);
        assert_eq!(moment_probe(&xs, 0.5, &ladder).unwrap().class, MomentClass::Converging);
        assert!(moment_probe(&xs, 0.5, &[1 << 21, 1 << 22]).is_err());
        assert!(moment_probe(&xs, 0.5, &[8]).is_err());
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.5]) - 0.997_948_7).abs() < 1e-6);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_headers() {
        let c = synthetic(|t| 1.0 / t, 10_000);
        let fit = fit_tail_exponent(&c, (10, 4000)).unwrap();
        let mut a = Vec::new();
        write_tailfit_csv(&mut a, &[fit]).unwrap();
        assert!(String::from_utf8(a).unwrap().starts_with("gamma_hat,stderr,r_squared,t_lo,t_hi,n_paths\n"));
        let mut b = Vec::new();
        write_survival_csv(&mut b, &c).unwrap();
        assert!(String::from_utf8(b).unwrap().starts_with("t,S,n_at_risk\n"));
    }

    proptest! {
        #[test]
        fn fit_ignores_constant_factors(scale in 1e-6f64..1.0, gamma in 0.1f64..2.0) {
            let a = fit_tail_exponent(&synthetic(|t| t.powf(-gamma).min(1.0), 100_000), (20, 20_000)).unwrap();
            let b = fit_tail_exponent(&synthetic(|t| scale * t.powf(-gamma).min(1.0), 100_000), (20, 20_000)).unwrap();
            prop_assert!((a.gamma_hat - b.gamma_hat).abs() <= 1e-9 * a.gamma_hat.abs().max(1.0));
        }

        #[test]
        fn survival_matches_direct_count(taus in proptest::collection::vec(0u64..40, 1..20), grid in proptest::collection::vec(0u64..39, 1..10)) {
            let xs: Vec<ExitSample> = taus.iter().map(|&t| sample(t, 40)).collect();
            let c = survival_curve(&xs, &grid).unwrap();
            let mut prev = 1.0;
            for p in c.points() {
                let direct = taus.iter().filter(|&&t| t > p.t).count();
                prop_assert_eq!(p.n_at_risk, direct as u64);
                prop_assert!(p.s <= prev);
                prev = p.s;
            }
        }
    }
}
