//! Complex scalars on the principal branch.
//!
//! The boundary-value transforms evaluate `z^alpha`, square roots and
//! Moebius maps off the real axis. Everything here follows the principal
//! branch with the cut along the negative real axis, matching the slit
//! plane the rest of the crate works on, and every operation rounds once
//! to the larger operand precision (same contract as [`Scalar`]).

use crate::precision::Scalar;
use crate::{Error, Result};
use rug::{Complex, Float};
use std::fmt;

/// Complex number backed by an MPC pair, principal-branch semantics.
#[derive(Clone, PartialEq)]
pub struct ComplexPoint(Complex);

impl ComplexPoint {
    pub fn new(re: Scalar, im: Scalar) -> ComplexPoint {
        let p = re.prec().max(im.prec());
        ComplexPoint(Complex::with_val(p, (re.as_float(), im.as_float())))
    }

    pub fn from_real(re: Scalar) -> ComplexPoint {
        let p = re.prec();
        ComplexPoint(Complex::with_val(p, (re.as_float(), &Float::with_val(p, 0))))
    }

    pub fn zero(bits: u32) -> ComplexPoint {
        ComplexPoint(Complex::with_val(bits, (0, 0)))
    }

    pub fn i(bits: u32) -> ComplexPoint {
        ComplexPoint(Complex::with_val(bits, (0, 1)))
    }

    pub fn re(&self) -> Scalar {
        Scalar::from(self.0.real().clone())
    }

    pub fn im(&self) -> Scalar {
        Scalar::from(self.0.imag().clone())
    }

    pub fn prec(&self) -> u32 {
        self.0.prec().0.max(self.0.prec().1)
    }

    pub fn is_finite(&self) -> bool {
        self.0.real().is_finite() && self.0.imag().is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.0.real().is_zero() && self.0.imag().is_zero()
    }

    /// On the closed negative real axis, where the branch cut lies.
    pub fn on_cut(&self) -> bool {
        self.0.imag().is_zero() && self.0.real().is_sign_negative()
    }

    pub fn conj(&self) -> ComplexPoint {
        ComplexPoint(self.0.clone().conj())
    }

    pub fn neg(&self) -> ComplexPoint {
        ComplexPoint(-self.0.clone())
    }

    pub fn abs(&self) -> Scalar {
        Scalar::from(self.0.clone().abs().into_real_imag().0)
    }

    /// Principal argument in `(-pi, pi]`.
    pub fn arg(&self) -> Scalar {
        Scalar::from(self.0.clone().arg().into_real_imag().0)
    }

    pub fn recip(&self) -> Result<ComplexPoint> {
        if self.is_zero() {
            return Err(Error::Domain {
                op: "complex recip",
                detail: "division by zero".into(),
            });
        }
        Ok(ComplexPoint(self.0.clone().recip()))
    }

    /// Principal square root: image in the closed right half plane.
    pub fn sqrt(&self) -> ComplexPoint {
        ComplexPoint(self.0.clone().sqrt())
    }

    /// Principal logarithm; rejects `0`.
    pub fn ln(&self) -> Result<ComplexPoint> {
        if self.is_zero() {
            return Err(Error::Domain {
                op: "complex log",
                detail: "log of zero".into(),
            });
        }
        Ok(ComplexPoint(self.0.clone().ln()))
    }

    pub fn exp(&self) -> ComplexPoint {
        ComplexPoint(self.0.clone().exp())
    }

    /// `z^alpha = exp(alpha log z)` on the principal branch. Doubled
    /// internal precision absorbs the exponent blowup of `log` near the
    /// cut, mirroring the real `pow_real` contract.
    pub fn pow_real(&self, alpha: &Scalar) -> Result<ComplexPoint> {
        if self.is_zero() {
            return if alpha.is_sign_negative() || alpha.is_zero() {
                Err(Error::Domain {
                    op: "complex pow",
                    detail: "0^alpha with alpha <= 0".into(),
                })
            } else {
                Ok(ComplexPoint::zero(self.prec()))
            };
        }
        let p = self.prec().max(alpha.prec());
        let wide = 2 * p;
        let l = Complex::with_val(wide, &self.0).ln();
        let prod = l * alpha.as_float();
        let r = prod.exp();
        Ok(ComplexPoint(Complex::with_val(p, &r)))
    }

    /// Decimal rendering of both components.
    pub fn to_decimal(&self, digits: usize) -> String {
        format!(
            "{} + {}i",
            self.re().to_decimal(digits),
            self.im().to_decimal(digits)
        )
    }
}

impl From<Complex> for ComplexPoint {
    fn from(c: Complex) -> ComplexPoint {
        ComplexPoint(c)
    }
}

impl fmt::Display for ComplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(20))
    }
}

impl fmt::Debug for ComplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.to_decimal(20), self.prec())
    }
}

macro_rules! cbinop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait<&ComplexPoint> for &ComplexPoint {
            type Output = ComplexPoint;
            fn $method(self, rhs: &ComplexPoint) -> ComplexPoint {
                let p = self.prec().max(rhs.prec());
                ComplexPoint(Complex::with_val(p, &self.0 $op &rhs.0))
            }
        }
        impl std::ops::$trait<ComplexPoint> for &ComplexPoint {
            type Output = ComplexPoint;
            fn $method(self, rhs: ComplexPoint) -> ComplexPoint {
                self $op &rhs
            }
        }
        impl std::ops::$trait<&ComplexPoint> for ComplexPoint {
            type Output = ComplexPoint;
            fn $method(self, rhs: &ComplexPoint) -> ComplexPoint {
                &self $op rhs
            }
        }
        impl std::ops::$trait<ComplexPoint> for ComplexPoint {
            type Output = ComplexPoint;
            fn $method(self, rhs: ComplexPoint) -> ComplexPoint {
                &self $op &rhs
            }
        }
    };
}

cbinop!(Add, add, +);
cbinop!(Sub, sub, -);
cbinop!(Mul, mul, *);
cbinop!(Div, div, /);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::PrecisionContext;

    fn c(ctx: &PrecisionContext, re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(ctx.from_f64(re), ctx.from_f64(im))
    }

    #[test]
    fn arithmetic_and_parts() {
        let ctx = PrecisionContext::new(128).unwrap();
        let a = c(&ctx, 1.0, 2.0);
        let b = c(&ctx, 3.0, -1.0);
        let s = &a + &b;
        assert_eq!(s.re().to_f64(), 4.0);
        assert_eq!(s.im().to_f64(), 1.0);
        let p = &a * &b;
        // (1+2i)(3-i) = 5 + 5i
        assert_eq!(p.re().to_f64(), 5.0);
        assert_eq!(p.im().to_f64(), 5.0);
        let q = &p / &b;
        assert!((q.re().to_f64() - 1.0).abs() < 1e-30);
        assert!((q.im().to_f64() - 2.0).abs() < 1e-30);
    }

    #[test]
    fn principal_sqrt_sides_of_the_cut() {
        let ctx = PrecisionContext::new(128).unwrap();
        let eps = 1e-25;
        let above = c(&ctx, -1.0, eps).sqrt();
        let below = c(&ctx, -1.0, -eps).sqrt();
        // sqrt(-1 +- i eps) -> +-i; the discontinuity across the cut is
        // the branch choice showing up.
        assert!((above.im().to_f64() - 1.0).abs() < 1e-12);
        assert!((below.im().to_f64() + 1.0).abs() < 1e-12);
        assert!(above.re().to_f64() >= 0.0 && below.re().to_f64() >= 0.0);
    }

    #[test]
    fn pow_real_matches_polar_form() {
        let ctx = PrecisionContext::new(192).unwrap();
        let alpha = ctx.from_f64(0.5);
        let z = c(&ctx, -2.0, 3.0);
        let w = z.pow_real(&alpha).unwrap();
        // |z^a| = |z|^a, arg(z^a) = a arg(z) on the principal branch.
        let expect_abs = z.abs().pow_real(&alpha).unwrap();
        let diff = (&w.abs() - &expect_abs).abs() / expect_abs;
        assert!(diff.to_f64() < 1e-50);
        let expect_arg = &alpha * &z.arg();
        assert!((&w.arg() - &expect_arg).abs().to_f64() < 1e-50);
    }

    #[test]
    fn reflection_symmetry() {
        let ctx = PrecisionContext::new(128).unwrap();
        let alpha = ctx.from_f64(0.75);
        for (re, im) in [(0.3, 1.7), (-0.4, 0.9), (2.0, -0.001)] {
            let z = c(&ctx, re, im);
            let a = z.conj().pow_real(&alpha).unwrap();
            let b = z.pow_real(&alpha).unwrap().conj();
            assert!((&a.re() - &b.re()).abs().to_f64() < 1e-30);
            assert!((&a.im() - &b.im()).abs().to_f64() < 1e-30);
            let la = z.conj().ln().unwrap();
            let lb = z.ln().unwrap().conj();
            assert!((&la.re() - &lb.re()).abs().to_f64() < 1e-30);
            assert!((&la.im() - &lb.im()).abs().to_f64() < 1e-30);
        }
    }

    #[test]
    fn positive_real_pow_agrees_with_scalar() {
        let ctx = PrecisionContext::new(128).unwrap();
        let alpha = ctx.from_f64(1.0 / 3.0);
        let x = ctx.from_f64(7.25);
        let zc = ComplexPoint::from_real(x.clone()).pow_real(&alpha).unwrap();
        let zs = x.pow_real(&alpha).unwrap();
        assert!((&zc.re() - &zs).abs().to_f64() < 1e-36);
        assert!(zc.im().is_zero());
    }
}
