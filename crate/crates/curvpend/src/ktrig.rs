//! Curvature-parametrized trigonometry.
//!
//! The kernel functions reduce to circular trig for K > 0 and hyperbolic
//! trig for K < 0, with a continuous flat limit at K = 0. They let the
//! mechanics modules treat both geometries through a single set of
//! formulas branched on the sign of K.

use crate::error::{Error, Result};

/// Signed Gaussian curvature of the surface, units 1/length².
///
/// K > 0 selects the sphere of radius 1/sqrt(K), K < 0 the hyperbolic
/// plane of radius 1/sqrt(-K), and K = 0 the flat limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature(f64);

impl Curvature {
    /// The flat case K = 0.
    pub const FLAT: Curvature = Curvature(0.0);

    /// Wraps a finite curvature value.
    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::InvalidParam {
                name: "curvature",
                reason: format!("must be finite, got {k}"),
            });
        }
        Ok(Curvature(k))
    }

    /// The raw signed value K.
    pub fn k(self) -> f64 {
        self.0
    }

    /// sgn(K), with sgn(0) = 0 so flat-limit formulas degrade gracefully.
    pub fn sgn(self) -> f64 {
        if self.0 == 0.0 {
            0.0
        } else {
            self.0.signum()
        }
    }

    /// sqrt(|K|), the reciprocal radius scale (0 in the flat case).
    pub fn sqrt_abs(self) -> f64 {
        self.0.abs().sqrt()
    }

    /// Radius R = 1/sqrt(|K|); `None` in the flat case.
    pub fn radius(self) -> Option<f64> {
        if self.0 == 0.0 {
            None
        } else {
            Some(1.0 / self.sqrt_abs())
        }
    }

    pub fn is_flat(self) -> bool {
        self.0 == 0.0
    }
}

/// Below this value of |K|·z² the series branch of [`chord`] takes over.
/// Keeps the truncation error below 1e-14 relative while avoiding the
/// 0/0 form of sin_k(K,z)/sqrt(|K|) near the flat case.
pub const CHORD_SERIES_THRESHOLD: f64 = 1e-6;

/// sin(z·sqrt(K)) for K > 0, sinh(z·sqrt(-K)) for K < 0, 0 for K = 0.
pub fn sin_k(k: Curvature, z: f64) -> f64 {
    let s = k.sqrt_abs();
    if k.k() > 0.0 {
        (z * s).sin()
    } else if k.k() < 0.0 {
        (z * s).sinh()
    } else {
        0.0
    }
}

/// cos(z·sqrt(K)) for K > 0, cosh(z·sqrt(-K)) for K < 0, 1 for K = 0.
pub fn cos_k(k: Curvature, z: f64) -> f64 {
    let s = k.sqrt_abs();
    if k.k() > 0.0 {
        (z * s).cos()
    } else if k.k() < 0.0 {
        (z * s).cosh()
    } else {
        1.0
    }
}

/// sin_k/cos_k. Errors where cos_k vanishes.
pub fn tan_k(k: Curvature, z: f64) -> Result<f64> {
    let c = cos_k(k, z);
    if c == 0.0 {
        return Err(Error::TrigPole {
            func: "tan_k",
            arg: z,
        });
    }
    Ok(sin_k(k, z) / c)
}

/// cos_k/sin_k. Errors where sin_k vanishes (z = 0, and the flat case
/// where sin_k is identically zero).
pub fn cot_k(k: Curvature, z: f64) -> Result<f64> {
    let s = sin_k(k, z);
    if s == 0.0 {
        return Err(Error::TrigPole {
            func: "cot_k",
            arg: z,
        });
    }
    Ok(cos_k(k, z) / s)
}

/// sin_k(K,z)/sqrt(|K|), extended continuously to z at K = 0.
///
/// This is the metric factor that turns the angular rate into the speed
/// of the suspended mass. Near the flat case the quotient is evaluated
/// by the truncated series z - K·z³/6 + K²·z⁵/120 (odd in z, analytic in
/// K), switched on when |K|·z² < [`CHORD_SERIES_THRESHOLD`].
pub fn chord(k: Curvature, z: f64) -> f64 {
    let kk = k.k();
    if kk == 0.0 {
        return z;
    }
    if kk.abs() * z * z < CHORD_SERIES_THRESHOLD {
        let z2 = z * z;
        return z * (1.0 - kk * z2 / 6.0 + kk * kk * z2 * z2 / 120.0);
    }
    sin_k(k, z) / k.sqrt_abs()
}

/// d/dz sin_k = sqrt(|K|)·cos_k(K,z); identically 0 at K = 0, where the
/// scaled form d/dz chord = cos_k is the meaningful derivative.
pub fn d_sin_k(k: Curvature, z: f64) -> f64 {
    k.sqrt_abs() * cos_k(k, z)
}

/// d/dz cos_k = -sgn(K)·sqrt(|K|)·sin_k(K,z); identically 0 at K = 0.
pub fn d_cos_k(k: Curvature, z: f64) -> f64 {
    -k.sgn() * k.sqrt_abs() * sin_k(k, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn curv(k: f64) -> Curvature {
        Curvature::new(k).unwrap()
    }

    // Reference values frozen from 50-digit evaluations.
    const SINH_1: f64 = 1.175_201_193_643_801_4;
    const COSH_1: f64 = 1.543_080_634_815_243_8;
    const COTH_1: f64 = 1.313_035_285_499_331_3;

    #[test]
    fn sin_k_circular_hyperbolic_flat() {
        assert_eq!(sin_k(curv(1.0), std::f64::consts::FRAC_PI_2), 1.0);
        assert_eq!(sin_k(curv(-1.0), 0.0), 0.0);
        assert_relative_eq!(sin_k(curv(-1.0), 1.0), SINH_1, max_relative = 1e-15);
        assert_eq!(sin_k(Curvature::FLAT, 5.0), 0.0);
    }

    #[test]
    fn cos_k_circular_hyperbolic_flat() {
        assert_eq!(cos_k(curv(1.0), 0.0), 1.0);
        assert_relative_eq!(
            cos_k(curv(1.0), std::f64::consts::PI),
            -1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(cos_k(curv(-1.0), 1.0), COSH_1, max_relative = 1e-15);
        assert_eq!(cos_k(Curvature::FLAT, 5.0), 1.0);
    }

    #[test]
    fn tan_and_cot_quotients() {
        assert_relative_eq!(
            tan_k(curv(1.0), std::f64::consts::FRAC_PI_4).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            cot_k(curv(1.0), std::f64::consts::FRAC_PI_4).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            cot_k(curv(-1.0), 1.0).unwrap(),
            COTH_1,
            max_relative = 1e-15
        );
        assert_eq!(tan_k(Curvature::FLAT, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn cot_k_rejects_zeros_of_sin_k() {
        match cot_k(curv(1.0), 0.0) {
            Err(Error::TrigPole { func: "cot_k", arg }) => assert_eq!(arg, 0.0),
            other => panic!("expected pole error, got {other:?}"),
        }
        assert!(cot_k(Curvature::FLAT, 2.0).is_err());
    }

    #[test]
    fn chord_flat_and_unit_cases() {
        assert_eq!(chord(Curvature::FLAT, 2.0), 2.0);
        assert_relative_eq!(
            chord(curv(1.0), std::f64::consts::FRAC_PI_2),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn chord_series_branch_matches_reference() {
        // K=1e-8, z=2: series reference 2 - (1e-8)*8/6 + (1e-16)*32/120,
        // frozen from exact evaluation to 29 digits.
        let expected = 1.999_999_986_666_666_7;
        assert_relative_eq!(chord(curv(1e-8), 2.0), expected, max_relative = 1e-13);
    }

    #[test]
    fn chord_branch_switch_is_seamless() {
        // Straddle the threshold |K|z^2 = 1e-6 and compare the two branches.
        let z = 1.0_f64;
        for &k in &[9.9e-7_f64, 1.01e-6] {
            let series = z * (1.0 - k * z * z / 6.0 + k * k * z.powi(4) / 120.0);
            let direct = ((z * k.sqrt()).sin()) / k.sqrt();
            assert_relative_eq!(series, direct, max_relative = 1e-13);
            assert_relative_eq!(chord(curv(k), z), direct, max_relative = 1e-13);
        }
    }

    #[test]
    fn derivatives_at_reference_points() {
        assert_eq!(d_sin_k(curv(1.0), 0.0), 1.0);
        assert_eq!(d_cos_k(curv(-1.0), 0.0), 0.0);
        // d_sin_k(K=4, z=pi/8) = 2 cos(pi/4), frozen sqrt(2).
        assert_relative_eq!(
            d_sin_k(curv(4.0), std::f64::consts::PI / 8.0),
            std::f64::consts::SQRT_2,
            max_relative = 1e-15
        );
        assert_eq!(d_sin_k(Curvature::FLAT, 3.0), 0.0);
        assert_eq!(d_cos_k(Curvature::FLAT, 3.0), 0.0);
    }

    #[test]
    fn pythagorean_identity_sweep() {
        // cos_k^2 + sgn(K) sin_k^2 = 1; relative to the leading term so the
        // hyperbolic case is not drowned by cosh^2 cancellation at large z.
        for &k in &[4.0, 1.0, 0.25, -0.25, -1.0, -4.0] {
            let kc = curv(k);
            for i in 0..=200 {
                let z = -10.0 + 0.1 * i as f64;
                let c = cos_k(kc, z);
                let s = sin_k(kc, z);
                let lhs = c * c + kc.sgn() * s * s;
                let scale = (c * c).max(1.0);
                assert!(
                    (lhs - 1.0).abs() <= 1e-12 * scale,
                    "identity broken at K={k}, z={z}: {lhs}"
                );
            }
        }
    }

    #[test]
    fn chord_is_continuous_in_curvature() {
        // For |K| <= 1e-6 and |z| <= 10 the chord must match its quadratic
        // truncation to 1e-9 absolute.
        for &k in &[1e-6, -1e-6, 1e-9, -1e-9, 1e-12, -1e-12] {
            let kc = curv(k);
            for i in 0..=100 {
                let z = -10.0 + 0.2 * i as f64;
                let truncated = z - k * z * z * z / 6.0;
                assert!(
                    (chord(kc, z) - truncated).abs() <= 1e-9,
                    "chord discontinuity at K={k}, z={z}"
                );
            }
        }
    }

    #[test]
    fn parity_under_negation() {
        for &k in &[1.0, -1.0, 0.3, -0.7] {
            let kc = curv(k);
            for i in 1..=40 {
                let z = 0.25 * i as f64;
                assert_eq!(sin_k(kc, -z), -sin_k(kc, z), "sin_k odd at K={k}, z={z}");
                assert_eq!(cos_k(kc, -z), cos_k(kc, z), "cos_k even at K={k}, z={z}");
                assert_eq!(chord(kc, -z), -chord(kc, z), "chord odd at K={k}, z={z}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for &k in &[4.0, 1.0, -1.0, -4.0, 0.25, -0.25] {
            let kc = curv(k);
            for i in 0..=40 {
                let z = -2.0 + 0.1 * i as f64;
                let fd_sin = (sin_k(kc, z + h) - sin_k(kc, z - h)) / (2.0 * h);
                let fd_cos = (cos_k(kc, z + h) - cos_k(kc, z - h)) / (2.0 * h);
                assert!((fd_sin - d_sin_k(kc, z)).abs() < 1e-6);
                assert!((fd_cos - d_cos_k(kc, z)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn chord_derivative_is_cos_k() {
        let h = 1e-5;
        for &k in &[1.0, -1.0, 1e-7, -1e-7, 0.0] {
            let kc = curv(k);
            for i in 0..=20 {
                let z = -1.0 + 0.1 * i as f64;
                let fd = (chord(kc, z + h) - chord(kc, z - h)) / (2.0 * h);
                assert!(
                    (fd - cos_k(kc, z)).abs() < 1e-6,
                    "d chord/dz != cos_k at K={k}, z={z}"
                );
            }
        }
    }

    #[test]
    fn curvature_rejects_non_finite() {
        assert!(Curvature::new(f64::NAN).is_err());
        assert!(Curvature::new(f64::INFINITY).is_err());
        assert_eq!(curv(0.0).sgn(), 0.0);
        assert_eq!(curv(-2.0).sgn(), -1.0);
        assert_eq!(curv(4.0).radius(), Some(0.5));
        assert_eq!(Curvature::FLAT.radius(), None);
    }
}
