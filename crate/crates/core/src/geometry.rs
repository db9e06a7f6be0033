//! Planar geometry: polar coordinates, wedges, and the rotated rectangle
//! frames used by the rectangle-exit experiment.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point of the integer lattice.
pub type Lattice = [i64; 2];

#[inline]
pub fn lattice_to_real(p: Lattice) -> [f64; 2] {
    [p[0] as f64, p[1] as f64]
}

#[inline]
pub fn norm<T: Scalar>(x: [T; 2]) -> T {
    x[0].hypot(x[1])
}

/// Polar coordinates `(r, phi)` with `r >= 0` and `phi` in `(-pi, pi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarPoint<T> {
    pub r: T,
    pub phi: T,
}

impl<T: Scalar> PolarPoint<T> {
    pub fn to_cartesian(&self) -> [T; 2] {
        [self.r * self.phi.cos(), self.r * self.phi.sin()]
    }
}

/// Converts to polar coordinates. The angle is measured anticlockwise from
/// the positive first axis; the negative first axis maps to `+pi`.
pub fn to_polar<T: Scalar>(x: [T; 2]) -> Result<PolarPoint<T>> {
    if x[0] == T::zero() && x[1] == T::zero() {
        return Err(Error::Origin);
    }
    let mut phi = x[1].atan2(x[0]);
    // atan2(-0.0, negative) is -pi
    if phi <= -T::PI() {
        phi = phi + T::PI() + T::PI();
    }
    Ok(PolarPoint { r: norm(x), phi })
}

pub fn from_polar<T: Scalar>(p: PolarPoint<T>) -> [T; 2] {
    p.to_cartesian()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PiFraction {
    pi_numerator: u32,
    pi_denominator: u32,
}

/// A wedge half-angle stored exactly as a rational multiple of pi, in `(0, pi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PiFraction", into = "PiFraction")]
pub struct WedgeAngle(Ratio<u32>);

impl TryFrom<PiFraction> for WedgeAngle {
    type Error = Error;

    fn try_from(f: PiFraction) -> Result<Self> {
        WedgeAngle::new(f.pi_numerator, f.pi_denominator)
    }
}

impl From<WedgeAngle> for PiFraction {
    fn from(a: WedgeAngle) -> Self {
        PiFraction {
            pi_numerator: *a.0.numer(),
            pi_denominator: *a.0.denom(),
        }
    }
}

impl WedgeAngle {
    /// `numerator / denominator` times pi.
    pub fn new(numerator: u32, denominator: u32) -> Result<Self> {
        if denominator == 0 || numerator == 0 || numerator > denominator {
            return Err(Error::Config(format!(
                "wedge angle {numerator}/{denominator} pi is outside (0, pi]"
            )));
        }
        Ok(WedgeAngle(Ratio::new(numerator, denominator)))
    }

    pub const QUADRANT: WedgeAngle = WedgeAngle(Ratio::new_raw(1, 4));
    pub const HALF_PLANE: WedgeAngle = WedgeAngle(Ratio::new_raw(1, 2));
    pub const FULL: WedgeAngle = WedgeAngle(Ratio::new_raw(1, 1));

    pub fn fraction_of_pi(&self) -> Ratio<u32> {
        self.0
    }

    pub fn radians<T: Scalar>(&self) -> T {
        T::PI() * T::lit(*self.0.numer() as f64) / T::lit(*self.0.denom() as f64)
    }

    pub fn is_pi(&self) -> bool {
        self.0 == Ratio::from_integer(1)
    }

    /// `pi / (2 alpha)`, the order of the harmonic function vanishing on the
    /// wedge boundary. Exact as a ratio.
    pub fn harmonic_order(&self) -> Ratio<u32> {
        Ratio::new(*self.0.denom(), 2 * *self.0.numer())
    }

    /// `pi / (4 alpha)`, the critical moment order of the exit time in the
    /// zero-drift and subcritical regimes.
    pub fn spitzer_exponent(&self) -> Ratio<u32> {
        Ratio::new(*self.0.denom(), 4 * *self.0.numer())
    }
}

impl fmt::Display for WedgeAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} pi", self.0.numer(), self.0.denom())
    }
}

/// Membership shape, resolved once from the exact angle. Multiples of pi/4
/// have lattice points on the boundary and are tested with exact comparisons.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Shape {
    Quadrant,
    HalfPlane,
    ThreeQuarter,
    Narrow { tan: f64 },
    Wide { tan_supplement: f64 },
    PlaneMinusHalfLine { thickness: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WedgeRepr {
    alpha: WedgeAngle,
    #[serde(default)]
    halfline_thickness: u32,
    #[serde(default)]
    excluded_radius: f64,
}

/// The open wedge `W(alpha)` (or the plane minus the closed thickened
/// half-line `H_b` when `alpha = pi`), optionally with the ball of radius
/// `A` around the origin removed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WedgeRepr", into = "WedgeRepr")]
pub struct WedgeSpec {
    alpha: WedgeAngle,
    halfline_thickness: u32,
    excluded_radius: f64,
    shape: Shape,
}

impl TryFrom<WedgeRepr> for WedgeSpec {
    type Error = Error;

    fn try_from(r: WedgeRepr) -> Result<Self> {
        WedgeSpec::new(r.alpha, r.halfline_thickness, r.excluded_radius)
    }
}

impl From<WedgeSpec> for WedgeRepr {
    fn from(w: WedgeSpec) -> Self {
        WedgeRepr {
            alpha: w.alpha,
            halfline_thickness: w.halfline_thickness,
            excluded_radius: w.excluded_radius,
        }
    }
}

impl WedgeSpec {
    /// `halfline_thickness` is only read when `alpha = pi`, where it must be
    /// at least 1 (the walk's jump bound).
    pub fn new(alpha: WedgeAngle, halfline_thickness: u32, excluded_radius: f64) -> Result<Self> {
        if !(excluded_radius >= 0.0 && excluded_radius.is_finite()) {
            return Err(Error::Config(format!(
                "excluded radius must be finite and nonnegative, got {excluded_radius}"
            )));
        }
        let frac = alpha.0;
        let shape = if alpha.is_pi() {
            if halfline_thickness == 0 {
                return Err(Error::Config(
                    "alpha = pi requires halfline_thickness >= 1".into(),
                ));
            }
            Shape::PlaneMinusHalfLine {
                thickness: halfline_thickness as f64,
            }
        } else if frac == Ratio::new(1, 4) {
            Shape::Quadrant
        } else if frac == Ratio::new(1, 2) {
            Shape::HalfPlane
        } else if frac == Ratio::new(3, 4) {
            Shape::ThreeQuarter
        } else if frac < Ratio::new(1, 2) {
            Shape::Narrow {
                tan: alpha.radians::<f64>().tan(),
            }
        } else {
            Shape::Wide {
                tan_supplement: (std::f64::consts::PI - alpha.radians::<f64>()).tan(),
            }
        };
        Ok(WedgeSpec {
            alpha,
            halfline_thickness,
            excluded_radius,
            shape,
        })
    }

    pub fn wedge(alpha: WedgeAngle) -> Result<Self> {
        Self::new(alpha, 1, 0.0)
    }

    pub fn quadrant() -> Self {
        Self::new(WedgeAngle::QUADRANT, 1, 0.0).unwrap()
    }

    pub fn with_excluded_radius(mut self, radius: f64) -> Result<Self> {
        self = Self::new(self.alpha, self.halfline_thickness, radius)?;
        Ok(self)
    }

    pub fn alpha(&self) -> WedgeAngle {
        self.alpha
    }

    pub fn halfline_thickness(&self) -> u32 {
        self.halfline_thickness
    }

    pub fn excluded_radius(&self) -> f64 {
        self.excluded_radius
    }

    /// Membership in `W(alpha)`, ignoring the excluded radius.
    #[inline]
    pub fn in_wedge<T: Scalar>(&self, x: [T; 2]) -> bool {
        let zero = T::zero();
        let (x1, x2) = (x[0], x[1]);
        match self.shape {
            Shape::Quadrant => x1 > x2.abs(),
            Shape::HalfPlane => x1 > zero,
            Shape::ThreeQuarter => x1 + x2.abs() > zero,
            Shape::Narrow { tan } => x1 > zero && x2.abs() < T::lit(tan) * x1,
            Shape::Wide { tan_supplement } => {
                x1 > zero || x2.abs() > -x1 * T::lit(tan_supplement)
            }
            Shape::PlaneMinusHalfLine { thickness } => {
                !(x1 <= zero && x2.abs() <= T::lit(thickness))
            }
        }
    }

    /// Membership in `W_A(alpha) = W(alpha) \ B_A(0)`.
    #[inline]
    pub fn in_modified_wedge<T: Scalar>(&self, x: [T; 2]) -> bool {
        self.in_wedge(x) && {
            let a = T::lit(self.excluded_radius);
            x[0] * x[0] + x[1] * x[1] > a * a
        }
    }

    /// `in_modified_wedge` for a lattice point; exact for angles that are
    /// multiples of pi/4.
    #[inline]
    pub fn contains(&self, p: Lattice) -> bool {
        self.in_modified_wedge(lattice_to_real(p))
    }
}

/// Region labels for [`RectFrame::classify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RectRegion {
    Interior,
    U1,
    U2,
    Other,
}

/// A rectangle `S(N)` aligned with the lattice direction `q_i` and its
/// perpendicular, together with the exit regions `U1(N)` (far side along
/// `q_i`) and `U2(N)` (top and bottom).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectFrame {
    index: u8,
    scale: u64,
    aspect: f64,
}

const AXES: [Lattice; 7] = [
    [-1, -1],
    [0, -1],
    [1, -1],
    [1, 0],
    [1, 1],
    [0, 1],
    [-1, 1],
];

impl RectFrame {
    /// `index` in 1..=7 selects `q_i`; `scale` is `N`; `aspect` is `h`.
    pub fn new(index: u8, scale: u64, aspect: f64) -> Result<Self> {
        if !(1..=7).contains(&index) {
            return Err(Error::Config(format!("frame index {index} not in 1..=7")));
        }
        if scale == 0 {
            return Err(Error::Config("rectangle scale N must be positive".into()));
        }
        if !(aspect > 0.0 && aspect.is_finite()) {
            return Err(Error::Config(format!("aspect h must be positive, got {aspect}")));
        }
        Ok(RectFrame {
            index,
            scale,
            aspect,
        })
    }

    pub fn index(&self) -> u8 {
        self.index
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn aspect(&self) -> f64 {
        self.aspect
    }

    pub fn axis(&self) -> Lattice {
        AXES[self.index as usize - 1]
    }

    pub fn perpendicular(&self) -> Lattice {
        match self.index {
            1..=5 => AXES[self.index as usize + 1],
            6 => {
                let q4 = AXES[3];
                [-q4[0], -q4[1]]
            }
            _ => AXES[0],
        }
    }

    /// `(N + z) q_i + y q_i_perp`.
    pub fn start_point(&self, y: i64, z: i64) -> Lattice {
        let q = self.axis();
        let p = self.perpendicular();
        let along = self.scale as i64 + z;
        [along * q[0] + y * p[0], along * q[1] + y * p[1]]
    }

    /// Classifies a lattice point. Thresholds are compared after
    /// multiplying through by `|q_i|`, so the `q_i` test is exact.
    #[inline]
    pub fn classify(&self, x: Lattice) -> RectRegion {
        let q = self.axis();
        let p = self.perpendicular();
        let q_sq = q[0] * q[0] + q[1] * q[1];
        let along = x[0] * q[0] + x[1] * q[1];
        let across = (x[0] * p[0] + x[1] * p[1]).abs();
        let far = 2 * self.scale as i64 * q_sq;
        if along >= far {
            RectRegion::U1
        } else if along > 0 {
            if across as f64 >= 2.0 * self.aspect * self.scale as f64 * q_sq as f64 {
                RectRegion::U2
            } else {
                RectRegion::Interior
            }
        } else {
            RectRegion::Other
        }
    }
}

/// Free-function form of [`RectFrame::classify`].
pub fn rect_classify(frame: &RectFrame, x: Lattice) -> RectRegion {
    frame.classify(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn quarter(a: f64) -> WedgeSpec {
        WedgeSpec::quadrant().with_excluded_radius(a).unwrap()
    }

    #[test]
    fn polar_examples() {
        let p = to_polar([1.0, 0.0]).unwrap();
        assert_eq!((p.r, p.phi), (1.0, 0.0));
        let p = to_polar([0.0, 2.0]).unwrap();
        assert_eq!(p.r, 2.0);
        assert!((p.phi - PI / 2.0).abs() < 1e-15);
        let p = to_polar([-3.0, 0.0]).unwrap();
        assert_eq!((p.r, p.phi), (3.0, PI));
        let p = to_polar([-3.0, -0.0]).unwrap();
        assert_eq!(p.phi, PI);
        assert!(matches!(to_polar([0.0f64, 0.0]), Err(Error::Origin)));
    }

    #[test]
    fn wedge_examples() {
        let w = WedgeSpec::quadrant();
        assert!(w.in_wedge([3.0, 1.0]));
        assert!(!w.in_wedge([1.0, 1.0]));
        assert!(!w.in_wedge([0.0f64, 0.0]));

        let h = WedgeSpec::new(WedgeAngle::FULL, 1, 0.0).unwrap();
        assert!(!h.in_wedge([-5.0, 0.0]));
        assert!(h.in_wedge([-5.0, 2.0]));
        assert!(!h.in_wedge([-5.0, 1.0]));
        assert!(!h.in_wedge([0.0f64, 0.0]));
        assert!(h.in_wedge([1.0f64, 0.0]));
    }

    #[test]
    fn modified_wedge_examples() {
        assert!(!quarter(10.0).in_modified_wedge([3.0, 1.0]));
        assert!(quarter(2.0).in_modified_wedge([3.0, 1.0]));
        for x1 in -6i64..=6 {
            for x2 in -6i64..=6 {
                let p = [x1, x2];
                assert_eq!(quarter(0.0).contains(p), quarter(0.0).in_wedge(lattice_to_real(p)));
            }
        }
    }

    #[test]
    fn alpha_pi_needs_thickness() {
        assert!(WedgeSpec::new(WedgeAngle::FULL, 0, 0.0).is_err());
        assert!(WedgeAngle::new(5, 4).is_err());
        assert!(WedgeAngle::new(0, 4).is_err());
    }

    #[test]
    fn exact_exponents() {
        assert_eq!(WedgeAngle::QUADRANT.spitzer_exponent(), Ratio::from_integer(1));
        assert_eq!(WedgeAngle::FULL.spitzer_exponent(), Ratio::new(1, 4));
        assert_eq!(WedgeAngle::HALF_PLANE.harmonic_order(), Ratio::from_integer(1));
        assert_eq!(WedgeAngle::new(1, 3).unwrap().harmonic_order(), Ratio::new(3, 2));
    }

    #[test]
    fn rect_examples() {
        let f = RectFrame::new(4, 8, 1.0).unwrap();
        assert_eq!(f.classify([16, 0]), RectRegion::U1);
        assert_eq!(f.classify([5, 16]), RectRegion::U2);
        assert_eq!(f.classify([5, -16]), RectRegion::U2);
        assert_eq!(f.classify([5, 3]), RectRegion::Interior);
        assert_eq!(f.classify([0, 3]), RectRegion::Other);
        assert_eq!(f.classify([15, 15]), RectRegion::Interior);
        assert_eq!(f.start_point(0, 0), [8, 0]);
    }

    #[test]
    fn frame_axes_are_perpendicular_with_equal_norms() {
        for i in 1..=7 {
            let f = RectFrame::new(i, 4, 0.5).unwrap();
            let (q, p) = (f.axis(), f.perpendicular());
            assert_eq!(q[0] * p[0] + q[1] * p[1], 0, "frame {i}");
            assert_eq!(q[0] * q[0] + q[1] * q[1], p[0] * p[0] + p[1] * p[1]);
        }
        let f6 = RectFrame::new(6, 1, 1.0).unwrap();
        assert_eq!(f6.perpendicular(), [-1, 0]);
        let f7 = RectFrame::new(7, 1, 1.0).unwrap();
        assert_eq!(f7.perpendicular(), [-1, -1]);
        assert!(RectFrame::new(8, 1, 1.0).is_err());
    }

    #[test]
    fn wedge_serde_uses_pi_fractions() {
        let w = WedgeSpec::new(WedgeAngle::new(1, 3).unwrap(), 1, 2.5).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.contains("\"pi_numerator\":1"));
        let back: WedgeSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        let bad = r#"{"alpha":{"pi_numerator":1,"pi_denominator":4},"extra":1}"#;
        assert!(serde_json::from_str::<WedgeSpec>(bad).is_err());
    }
}
