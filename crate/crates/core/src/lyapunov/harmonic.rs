//! The harmonic functions `f_w(r, phi) = r^w cos(w phi)` and their derivatives.

use crate::error::{Error, Result};
use crate::geometry::{to_polar, WedgeSpec};
use crate::scalar::Scalar;

/// Parameters of `f_w^gamma` checks. `alpha` is the wedge half-angle the
/// function is paired with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicParams<T> {
    pub w: T,
    pub alpha: T,
    pub gamma: T,
}

/// How `w` relates to `pi / (2 alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HarmonicRegime {
    /// `w < pi / (2 alpha)`: `f_w` is bounded below by a multiple of `r^w`
    /// on the wedge.
    Interior,
    /// `w = pi / (2 alpha)`: `f_w` vanishes on the wedge boundary.
    Boundary,
}

impl<T: Scalar> HarmonicParams<T> {
    pub fn new(w: T, alpha: T, gamma: T) -> Result<Self> {
        if !(w > T::zero()) || !(alpha > T::zero() && alpha <= T::PI()) {
            return Err(Error::Domain(format!(
                "harmonic parameters need w > 0 and alpha in (0, pi], got w = {w:?}, alpha = {alpha:?}"
            )));
        }
        Ok(HarmonicParams { w, alpha, gamma })
    }

    pub fn regime(&self) -> Option<HarmonicRegime> {
        let critical = T::FRAC_PI_2() / self.alpha;
        let tol = T::epsilon() * T::lit(16.0) * critical;
        if (self.w - critical).abs() <= tol {
            Some(HarmonicRegime::Boundary)
        } else if self.w < critical {
            Some(HarmonicRegime::Interior)
        } else {
            None
        }
    }
}

/// `f_w(x) = |x|^w cos(w phi(x))`, with `f_w(0) = 0`. Integer orders up to
/// three use the polynomial form, which is exact on the lattice.
pub fn f_eval<T: Scalar>(w: T, x: [T; 2]) -> T {
    let [a, b] = x;
    if w == T::one() {
        return a;
    }
    if w == T::lit(2.0) {
        return a * a - b * b;
    }
    if w == T::lit(3.0) {
        return a * (a * a - T::lit(3.0) * b * b);
    }
    match to_polar(x) {
        Ok(p) => p.r.powf(w) * (w * p.phi).cos(),
        Err(_) => T::zero(),
    }
}

/// `f_w` restricted to the wedge: `f_w(x)` inside `W(alpha)`, zero outside.
pub fn f_hat_eval<T: Scalar>(w: T, wedge: &WedgeSpec, x: [T; 2]) -> T {
    if wedge.in_wedge(x) {
        f_eval(w, x)
    } else {
        T::zero()
    }
}

fn origin_derivative<T: Scalar>(w: T, order: i32) -> Result<()> {
    if w < T::lit(order as f64) {
        return Err(Error::Domain(format!(
            "order-{order} derivative of f_w is singular at the origin for w = {w:?}"
        )));
    }
    Ok(())
}

/// Gradient `(w r^{w-1} cos((w-1) phi), -w r^{w-1} sin((w-1) phi))`.
pub fn f_grad<T: Scalar>(w: T, x: [T; 2]) -> Result<[T; 2]> {
    let Ok(p) = to_polar(x) else {
        origin_derivative(w, 2)?;
        return Ok([T::zero(), T::zero()]);
    };
    let scale = w * p.r.powf(w - T::one());
    let a = (w - T::one()) * p.phi;
    Ok([scale * a.cos(), -scale * a.sin()])
}

/// Hessian. `D11 = -D22 = w(w-1) r^{w-2} cos((w-2) phi)` and
/// `D12 = -w(w-1) r^{w-2} sin((w-2) phi)`; the trace is identically zero.
pub fn f_hessian<T: Scalar>(w: T, x: [T; 2]) -> Result<[[T; 2]; 2]> {
    let Ok(p) = to_polar(x) else {
        origin_derivative(w, 2)?;
        let d = if w == T::lit(2.0) { T::lit(2.0) } else { T::zero() };
        return Ok([[d, T::zero()], [T::zero(), -d]]);
    };
    let scale = w * (w - T::one()) * p.r.powf(w - T::lit(2.0));
    let a = (w - T::lit(2.0)) * p.phi;
    let d11 = scale * a.cos();
    let d12 = -scale * a.sin();
    Ok([[d11, d12], [d12, -d11]])
}

/// `cos(w alpha)`, the constant with `eps r^w <= f_w(x) <= r^w` on `W(alpha)`.
pub fn eps_lower<T: Scalar>(alpha: T, w: T) -> Result<T> {
    if !(w > T::zero()) || !(alpha > T::zero()) || !(w * alpha < T::FRAC_PI_2()) {
        return Err(Error::Domain(format!(
            "lower bound needs 0 < w < pi/(2 alpha); got w = {w:?}, alpha = {alpha:?}"
        )));
    }
    Ok((w * alpha).cos())
}
