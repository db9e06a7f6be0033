//! Drift-inequality checkers. Every conditional expectation here comes from
//! [`exact_increment_moment`], never from simulation.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{lattice_to_real, to_polar, Lattice, WedgeSpec};
use crate::lyapunov::harmonic::{f_eval, f_hat_eval};
use crate::lyapunov::moments::{exact_increment_moment, expansion_gamma, local_moments};
use crate::models::KernelField;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovReport {
    pub point: Lattice,
    pub r: f64,
    pub phi: f64,
    pub exact: f64,
    pub analytic: Option<f64>,
    /// `exact - analytic`.
    pub residual: Option<f64>,
    /// Order of the remainder the expansion leaves out.
    pub order: String,
    pub margin: Option<f64>,
    pub holds: Option<bool>,
    pub note: Option<String>,
}

impl LyapunovReport {
    fn skipped(point: Lattice, note: String) -> Self {
        let (r, phi) = polar_pair(point);
        LyapunovReport {
            point,
            r,
            phi,
            exact: f64::NAN,
            analytic: None,
            residual: None,
            order: String::new(),
            margin: None,
            holds: None,
            note: Some(note),
        }
    }
}

fn polar_pair(p: Lattice) -> (f64, f64) {
    match to_polar(lattice_to_real(p)) {
        Ok(q) => (q.r, q.phi),
        Err(_) => (0.0, 0.0),
    }
}

/// Nearest lattice point to `r (cos phi, sin phi)`.
pub fn lattice_point(r: f64, phi: f64) -> Lattice {
    [(r * phi.cos()).round() as i64, (r * phi.sin()).round() as i64]
}

/// Lattice points for every radius and every angle, radius-major.
pub fn polar_grid(radii: &[f64], angles: &[f64]) -> Vec<Lattice> {
    radii
        .iter()
        .flat_map(|&r| angles.iter().map(move |&phi| lattice_point(r, phi)))
        .collect()
}

/// Largest margin over evaluated points (the worst case for `margin < 0` checks).
pub fn worst_margin(reports: &[LyapunovReport]) -> Option<f64> {
    reports.iter().filter_map(|r| r.margin).reduce(f64::max)
}

/// Smallest margin over evaluated points (the worst case for `margin >= 0` checks).
pub fn least_margin(reports: &[LyapunovReport]) -> Option<f64> {
    reports.iter().filter_map(|r| r.margin).reduce(f64::min)
}

/// True when at least one point was evaluated and every evaluated point holds.
pub fn all_hold(reports: &[LyapunovReport]) -> bool {
    let mut any = false;
    for r in reports {
        match r.holds {
            Some(false) => return false,
            Some(true) => any = true,
            None => {}
        }
    }
    any
}

/// Supermartingale check for `f_w^gamma` on `W(alpha)`: the exact mean
/// increment against `-C f_w^{gamma - 2/w}`, with `C` half of
/// `|gamma (gamma - 1) w^2 sigma^2 / 2|`. `margin = exact + C f^{gamma - 2/w}`
/// and the inequality holds where `margin < 0`.
pub fn check_supermartingale_subcritical<K: KernelField + ?Sized>(
    field: &K,
    wedge: &WedgeSpec,
    w: f64,
    gamma: f64,
    points: &[Lattice],
) -> Result<Vec<LyapunovReport>> {
    let alpha: f64 = wedge.alpha().radians();
    if !(w > 0.0 && w * alpha < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "supermartingale check needs 0 < w < pi/(2 alpha), got w = {w}"
        )));
    }
    let inside: Vec<Lattice> = points.iter().copied().filter(|&p| wedge.in_wedge(lattice_to_real(p))).collect();
    let sigma2 = inside
        .iter()
        .map(|&p| {
            let (_, m) = local_moments(field, p);
            (m[0][0] + m[1][1]) / 2.0
        })
        .reduce(f64::min)
        .unwrap_or(0.0);
    let c = (0.5 * gamma * (gamma - 1.0) * w * w * sigma2).abs() / 2.0;
    let h = |y: [f64; 2]| f_eval(w, y).max(0.0).powf(gamma);
    let mut out = Vec::with_capacity(points.len());
    for &p in points {
        if !wedge.in_wedge(lattice_to_real(p)) {
            out.push(LyapunovReport::skipped(p, "outside the wedge".into()));
            continue;
        }
        let x = lattice_to_real(p);
        let (r, phi) = polar_pair(p);
        let exact = exact_increment_moment(field, h, p, 1);
        let (mu, m) = local_moments(field, p);
        let analytic = expansion_gamma(w, gamma, x, mu, m)?;
        let f = f_eval(w, x);
        let margin = exact + c * f.powf(gamma - 2.0 / w);
        out.push(LyapunovReport {
            point: p,
            r,
            phi,
            exact,
            analytic: Some(analytic),
            residual: Some(exact - analytic),
            order: "f^(gamma-3) r^(3w-3)".into(),
            margin: Some(margin),
            holds: Some(margin < 0.0),
            note: None,
        });
    }
    Ok(out)
}

/// Submartingale check for `f_hat_w^gamma` with `w = pi/(2 alpha)` read off
/// the wedge. `margin = exact`; the inequality holds where `margin >= 0`.
pub fn check_submartingale_fhat<K: KernelField + ?Sized>(
    field: &K,
    wedge: &WedgeSpec,
    gamma: f64,
    points: &[Lattice],
) -> Result<Vec<LyapunovReport>> {
    if !(gamma > 1.0) {
        return Err(Error::Domain(format!("submartingale check needs gamma > 1, got {gamma}")));
    }
    let order = wedge.alpha().harmonic_order();
    let w = *order.numer() as f64 / *order.denom() as f64;
    let h = |y: [f64; 2]| f_hat_eval(w, wedge, y).max(0.0).powf(gamma);
    Ok(points
        .iter()
        .map(|&p| {
            let (r, phi) = polar_pair(p);
            let exact = exact_increment_moment(field, h, p, 1);
            let note = (!wedge.in_wedge(lattice_to_real(p))).then(|| "start outside the wedge".to_string());
            LyapunovReport {
                point: p,
                r,
                phi,
                exact,
                analytic: None,
                residual: None,
                order: String::new(),
                margin: Some(exact),
                holds: Some(exact >= 0.0),
                note,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LampertiPoint {
    pub state: Lattice,
    pub y: f64,
    /// `E[Y'^{2 p0} - Y^{2 p0}]`.
    pub m_p0: f64,
    /// `E[Y'^2 - Y^2]`.
    pub m_two: f64,
    /// `E[Y'^{2 r} - Y^{2 r}]`.
    pub m_r: f64,
}

/// Constants for the Lamperti-type conditions on `Y = h(xi)`, each taken as
/// the worst case over the sampled states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LampertiReport {
    pub p0: f64,
    pub r_exp: f64,
    pub points: Vec<LampertiPoint>,
    pub skipped: Vec<Lattice>,
    /// Largest `C` with `m_p0 <= -C Y^{2 p0 - 2}` everywhere.
    pub decay_c: f64,
    /// `min m_p0`; the non-existence condition needs it `>= 0`.
    pub nondecrease_margin: f64,
    /// Smallest `C >= 0` with `m_two >= -C`.
    pub second_moment_c: f64,
    /// Smallest `D >= 0` with `m_r <= D Y^{2 r - 2}`.
    pub growth_d: f64,
}

impl LampertiReport {
    pub fn decay_holds(&self) -> bool {
        self.decay_c > 0.0
    }

    pub fn nondecrease_holds(&self) -> bool {
        self.nondecrease_margin >= 0.0
    }

    pub fn second_moment_holds(&self) -> bool {
        self.second_moment_c.is_finite()
    }

    pub fn growth_holds(&self) -> bool {
        self.growth_d.is_finite()
    }
}

/// Evaluates the increment moments of `Y = h(xi)` that drive the Lamperti
/// existence and non-existence conditions. States outside `region` or with
/// `h <= 0` are skipped.
pub fn check_lamperti<K, H, R>(
    field: &K,
    h: H,
    region: R,
    p0: f64,
    r_exp: f64,
    states: &[Lattice],
) -> Result<LampertiReport>
where
    K: KernelField + ?Sized,
    H: Fn([f64; 2]) -> f64,
    R: Fn(Lattice) -> bool,
{
    if !(p0 > 0.0) || !(r_exp > 1.0) {
        return Err(Error::Domain(format!(
            "Lamperti check needs p0 > 0 and r > 1, got p0 = {p0}, r = {r_exp}"
        )));
    }
    let y = |x: [f64; 2]| h(x).max(0.0);
    let mut report = LampertiReport {
        p0,
        r_exp,
        points: Vec::new(),
        skipped: Vec::new(),
        decay_c: f64::INFINITY,
        nondecrease_margin: f64::INFINITY,
        second_moment_c: 0.0,
        growth_d: 0.0,
    };
    for &s in states {
        let y0 = y(lattice_to_real(s));
        if !region(s) || !(y0 > 0.0) {
            report.skipped.push(s);
            continue;
        }
        let power = |q: f64| {
            let h0 = y0.powf(q);
            let expect = field
                .kernel_at(s)
                .entries()
                .iter()
                .map(|&(d, p)| p * y(lattice_to_real([s[0] + d[0], s[1] + d[1]])).powf(q))
                .sum::<f64>();
            expect - h0
        };
        let pt = LampertiPoint {
            state: s,
            y: y0,
            m_p0: power(2.0 * p0),
            m_two: power(2.0),
            m_r: power(2.0 * r_exp),
        };
        report.decay_c = report.decay_c.min(-pt.m_p0 / y0.powf(2.0 * p0 - 2.0));
        report.nondecrease_margin = report.nondecrease_margin.min(pt.m_p0);
        report.second_moment_c = report.second_moment_c.max(-pt.m_two);
        report.growth_d = report.growth_d.max(pt.m_r / y0.powf(2.0 * r_exp - 2.0));
        report.points.push(pt);
    }
    if report.points.is_empty() {
        return Err(Error::InsufficientData("no state inside the region with h > 0".into()));
    }
    Ok(report)
}

/// Writes reports as CSV with columns `r,phi,exact,analytic,residual,margin`;
/// missing values are left empty.
pub fn write_reports_csv<W: Write>(out: W, reports: &[LyapunovReport]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["r", "phi", "exact", "analytic", "residual", "margin"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for rep in reports {
        wtr.write_record([
            rep.r.to_string(),
            rep.phi.to_string(),
            rep.exact.to_string(),
            opt(rep.analytic),
            opt(rep.residual),
            opt(rep.margin),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
