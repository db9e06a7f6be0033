//! Increment moments: the exact oracle (finite-support enumeration) and the
//! analytic expansions of the `f_w` and `f_w^gamma` increments.

use crate::error::{Error, Result};
use crate::geometry::{lattice_to_real, to_polar, Lattice};
use crate::lyapunov::harmonic::f_eval;
use crate::models::KernelField;
use crate::scalar::Scalar;

/// `E[(h(x + theta) - h(x))^p]` summed exactly over the jump support at `x`.
pub fn exact_increment_moment<K, H>(field: &K, h: H, x: Lattice, p: u32) -> f64
where
    K: KernelField + ?Sized,
    H: Fn([f64; 2]) -> f64,
{
    let h0 = h(lattice_to_real(x));
    field
        .kernel_at(x)
        .entries()
        .iter()
        .map(|&(s, prob)| {
            let d = h(lattice_to_real([x[0] + s[0], x[1] + s[1]])) - h0;
            prob * d.powi(p as i32)
        })
        .sum()
}

/// Drift and second-moment matrix of the jump at `x`, as the expansions use them.
pub fn local_moments<K: KernelField + ?Sized>(field: &K, x: Lattice) -> ([f64; 2], [[f64; 2]; 2]) {
    let k = field.kernel_at(x);
    (k.mean(), k.second_moment())
}

fn polar_or_err<T: Scalar>(x: [T; 2]) -> Result<(T, T)> {
    let p = to_polar(x)?;
    Ok((p.r, p.phi))
}

/// Displayed terms of the mean increment of `f_w`:
/// `w r^{w-1} (mu1 cos((w-1)phi) - mu2 sin((w-1)phi))
///  + (M11 - M22)/2 w(w-1) r^{w-2} cos((w-2)phi)
///  - M12 w(w-1) r^{w-2} sin((w-2)phi)`.
pub fn expansion_mean<T: Scalar>(w: T, x: [T; 2], mu: [T; 2], m: [[T; 2]; 2]) -> Result<T> {
    let (r, phi) = polar_or_err(x)?;
    Ok(first_order(w, r, phi, mu, m))
}

fn first_order<T: Scalar>(w: T, r: T, phi: T, mu: [T; 2], m: [[T; 2]; 2]) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let a1 = (w - one) * phi;
    let a2 = (w - two) * phi;
    let c2 = w * (w - one) * r.powf(w - two);
    w * r.powf(w - one) * (mu[0] * a1.cos() - mu[1] * a1.sin())
        + (m[0][0] - m[1][1]) / two * c2 * a2.cos()
        - m[0][1] * c2 * a2.sin()
}

/// Displayed terms of the second moment of the `f_w` increment:
/// `w^2 r^{2w-2} (M11 cos^2((w-1)phi) + M22 sin^2((w-1)phi) - M12 sin(2(w-1)phi))`.
pub fn expansion_second<T: Scalar>(w: T, x: [T; 2], m: [[T; 2]; 2]) -> Result<T> {
    let (r, phi) = polar_or_err(x)?;
    Ok(second_order(w, r, phi, m))
}

fn second_order<T: Scalar>(w: T, r: T, phi: T, m: [[T; 2]; 2]) -> T {
    let two = T::lit(2.0);
    let a1 = (w - T::one()) * phi;
    let (s, c) = a1.sin_cos();
    w * w * r.powf(two * w - two) * (m[0][0] * c * c + m[1][1] * s * s - m[0][1] * (two * a1).sin())
}

/// Displayed terms of the mean increment of `f_w^gamma`:
/// `gamma f^{gamma-1} (mean terms) + gamma(gamma-1)/2 f^{gamma-2} (second-moment terms)`.
pub fn expansion_gamma<T: Scalar>(
    w: T,
    gamma: T,
    x: [T; 2],
    mu: [T; 2],
    m: [[T; 2]; 2],
) -> Result<T> {
    let (r, phi) = polar_or_err(x)?;
    let f = f_eval(w, x);
    if !(f > T::zero()) {
        return Err(Error::Domain(format!(
            "f_w^gamma expansion needs f_w(x) > 0, got {f:?} at {x:?}"
        )));
    }
    let one = T::one();
    let first = first_order(w, r, phi, mu, m);
    if gamma == one {
        return Ok(first);
    }
    let second = second_order(w, r, phi, m);
    Ok(gamma * f.powf(gamma - one) * first
        + gamma * (gamma - one) / T::lit(2.0) * f.powf(gamma - T::lit(2.0)) * second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::harmonic::f_eval;
    use crate::models::ModelSpec;

    const HALF: [[f64; 2]; 2] = [[0.5, 0.0], [0.0, 0.5]];

    #[test]
    fn oracle_examples() {
        let m = ModelSpec::zero_drift();
        let f2 = |x: [f64; 2]| f_eval(2.0, x);
        assert_eq!(exact_increment_moment(&m, f2, [3, 1], 1), 0.0);
        assert_eq!(exact_increment_moment(&m, f2, [3, 1], 2), 21.0);
        let crit = ModelSpec::critical(2.0).unwrap();
        let x1 = exact_increment_moment(&crit, |x: [f64; 2]| x[0], [6, 8], 1);
        assert!((x1 - 0.2).abs() < 1e-15);
        let constant = exact_increment_moment(&crit, |_| 4.0, [6, 8], 3);
        assert_eq!(constant, 0.0);
    }

    #[test]
    fn expansion_examples() {
        for w in [0.5, 1.0, 1.9, 3.0] {
            for x in [[3.0, 1.0], [10.0, -4.0], [-2.0, 9.0]] {
                assert_eq!(expansion_mean(w, x, [0.0, 0.0], HALF).unwrap(), 0.0);
            }
        }
        let second = expansion_second(2.0, [3.0, 1.0], HALF).unwrap();
        assert!((second - 20.0).abs() < 1e-12);
        let r = 40.0;
        let mean = expansion_mean(1.0, [r, 0.0], [2.0 / r, 0.0], HALF).unwrap();
        assert!((mean - 2.0 / r).abs() < 1e-15);
        assert!(expansion_mean(1.0, [0.0, 0.0], [0.0, 0.0], HALF).is_err());
    }

    #[test]
    fn gamma_expansion_signs() {
        let zero = [0.0, 0.0];
        let x = [40.0, 7.0];
        let v = expansion_gamma(1.9, 0.9, x, zero, HALF).unwrap();
        let r: f64 = 40f64.hypot(7.0);
        let want = 0.5 * 0.9 * -0.1 * 1.9f64.powi(2) * 0.5 * f_eval(1.9, x).powf(0.9 - 2.0) * r.powf(1.8);
        assert!(v < 0.0 && ((v - want) / want).abs() < 1e-12);
        assert!(expansion_gamma(1.9, 2.0, x, zero, HALF).unwrap() > 0.0);
        assert!(expansion_gamma(1.9, 0.9, [1.0, 5.0], zero, HALF).is_err());
    }

    #[test]
    fn gamma_one_is_the_mean_expansion() {
        let mu = [0.013, -0.004];
        let m = [[0.52, 0.01], [0.01, 0.47]];
        for x in [[30.0, 2.0], [55.0, -20.0], [400.0, 13.0]] {
            let a = expansion_gamma(1.7f64, 1.0, x, mu, m).unwrap();
            let b = expansion_mean(1.7, x, mu, m).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    // D12 f_w enters the mean with weight M12; check that term against the
    // oracle on a kernel with correlated diagonal steps.
    #[test]
    fn cross_term_sign_against_oracle() {
        use crate::models::JumpKernel;
        struct Diagonal;
        impl KernelField for Diagonal {
            fn kernel_at(&self, _x: Lattice) -> crate::models::JumpKernel {
                JumpKernel::new(vec![([1, 1], 0.5), ([-1, -1], 0.5)]).unwrap()
            }
            fn jump_bound(&self) -> f64 {
                2f64.sqrt()
            }
        }
        let w = 3.0;
        for x in [[20, 9], [35, -12], [60, 25]] {
            let (mu, m) = local_moments(&Diagonal, x);
            let exact = exact_increment_moment(&Diagonal, |y| f_eval(w, y), x, 1);
            let xr = lattice_to_real(x);
            let analytic = expansion_mean(w, xr, mu, m).unwrap();
            // f_3 is a cubic, so the third-order remainder is an exact constant
            assert!((exact - analytic).abs() < 1e-8, "{exact} vs {analytic}");
        }
    }
}
