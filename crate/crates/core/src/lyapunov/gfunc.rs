//! The almost-linear function `g` on a wedge `W(alpha)`, `alpha < pi/2`.
//!
//! Its level set `{g = k}` is the wedge boundary translated so the apex sits
//! at `(k/s, 0)`, with the tip replaced by the minor arc of the circle
//! `((2k/s) - x1)^2 + x2^2 = k^2`. Away from the axis `g` is the linear form
//! `s x1 - c |x2|`; within `|x2| <= (sc/(1+c^2)) x1` it is read off the arc.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GRegion {
    Outside,
    Linear,
    Arc,
}

/// `s = sin(alpha)`, `c = cos(alpha)` and the slope `sc/(1+c^2)` of the ray
/// separating the two regions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GFunctionParams<T> {
    alpha: T,
    s: T,
    c: T,
    slope: T,
}

impl<T: Scalar> GFunctionParams<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::FRAC_PI_2()) {
            return Err(Error::Domain(format!(
                "g needs alpha in (0, pi/2), got {alpha:?}"
            )));
        }
        let (s, c) = alpha.sin_cos();
        Ok(GFunctionParams {
            alpha,
            s,
            c,
            slope: s * c / (T::one() + c * c),
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn sin(&self) -> T {
        self.s
    }

    pub fn cos(&self) -> T {
        self.c
    }

    pub fn boundary_slope(&self) -> T {
        self.slope
    }

    /// `R = 2 / ((4/s) - s)`, the lower bound on `D1 g` in the arc region.
    pub fn r_const(&self) -> T {
        T::lit(2.0) / (T::lit(4.0) / self.s - self.s)
    }

    /// `S = R - s/2`.
    pub fn s_const(&self) -> T {
        self.r_const() - self.s / T::lit(2.0)
    }

    pub fn region(&self, x: [T; 2]) -> GRegion {
        let a2 = x[1].abs();
        if !(self.s * x[0] - self.c * a2 > T::zero()) {
            GRegion::Outside
        } else if a2 > self.slope * x[0] {
            GRegion::Linear
        } else {
            GRegion::Arc
        }
    }

    /// `s x1 - c |x2|`, the linear branch (valid in the linear region).
    pub fn linear_value(&self, x: [T; 2]) -> T {
        self.s * x[0] - self.c * x[1].abs()
    }

    /// The larger root `k` of `(4/s^2 - 1) k^2 - (4 x1 / s) k + |x|^2 = 0`,
    /// i.e. the arc branch (valid in the arc region).
    pub fn arc_value(&self, x: [T; 2]) -> T {
        let s = self.s;
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let disc = s * s * (x[0] * x[0] + x[1] * x[1]) - four * x[1] * x[1];
        (two * s * x[0] + s * disc.max(T::zero()).sqrt()) / (four - s * s)
    }

    pub fn eval(&self, x: [T; 2]) -> T {
        match self.region(x) {
            GRegion::Outside => T::zero(),
            GRegion::Linear => self.linear_value(x),
            GRegion::Arc => {
                let k = self.arc_value(x);
                debug_assert!(self.on_minor_arc(x, k), "arc root off the minor arc at {x:?}");
                k
            }
        }
    }

    /// `(2/s - 1) g <= x1 <= (2/s - s) g`, up to rounding.
    fn on_minor_arc(&self, x: [T; 2], k: T) -> bool {
        let two_s = T::lit(2.0) / self.s;
        let tol = T::lit(1e3) * T::epsilon() * (T::one() + x[0].abs() + x[1].abs());
        k * (two_s - T::one()) <= x[0] + tol && x[0] <= k * (two_s - self.s) + tol
    }

    /// `D(x) = g + (2/s)(x1 - 2g/s)`; negative in the arc region.
    pub fn d_factor(&self, x: [T; 2]) -> T {
        let g = self.eval(x);
        let two_s = T::lit(2.0) / self.s;
        g + two_s * (x[0] - two_s * g)
    }

    /// Gradient: `(s, -sign(x2) c)` in the linear region,
    /// `(-(2g/s - x1), x2) / D` on the arc, zero outside.
    pub fn grad(&self, x: [T; 2]) -> [T; 2] {
        match self.region(x) {
            GRegion::Outside => [T::zero(), T::zero()],
            GRegion::Linear => [self.s, -x[1].signum() * self.c],
            GRegion::Arc => {
                let g = self.arc_value(x);
                let two_s = T::lit(2.0) / self.s;
                let d = g + two_s * (x[0] - two_s * g);
                [-(two_s * g - x[0]) / d, x[1] / d]
            }
        }
    }
}

pub fn g_eval<T: Scalar>(p: &GFunctionParams<T>, x: [T; 2]) -> T {
    p.eval(x)
}

pub fn g_grad<T: Scalar>(p: &GFunctionParams<T>, x: [T; 2]) -> [T; 2] {
    p.grad(x)
}
