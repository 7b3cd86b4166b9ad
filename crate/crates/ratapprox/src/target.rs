//! Approximation targets: the power families and the symmetry that links them.
//!
//! Two families are supported: `x^alpha` on `[0, 1]` and `|x|^alpha` on
//! `[-1, 1]`. They are tied together by a classical substitution
//! (`x -> x^2`, which maps even rationals of degree `(2m, 2n)` in `x` to
//! rationals of degree `(m, n)` in `x^2`):
//!
//! ```text
//! E_{2m,2n}(|x|^{2a}, [-1, 1]) = E_{mn}(x^a, [0, 1])
//! ```
//!
//! The exponent is carried as an exact rational so degree arithmetic
//! (`floor(alpha)`, halving and doubling of `alpha`) never rounds.

use crate::precision::Scalar;
use crate::{Error, Result};
use rug::Rational;

/// Which canonical family a target belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Family {
    /// `x^alpha` on `[0, 1]`.
    PowOn01,
    /// `|x|^alpha` on `[-1, 1]`.
    AbsPowOnSym,
}

/// A concrete target function: a family plus an exact rational exponent.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Target {
    family: Family,
    alpha: Rational,
}

fn to_rational(alpha: (i64, i64)) -> Result<Rational> {
    let (num, den) = alpha;
    if den == 0 {
        return Err(Error::Param {
            name: "alpha",
            detail: "zero denominator".into(),
        });
    }
    Ok(Rational::from((num, den)))
}

impl Target {
    /// `x^alpha` on `[0, 1]`, `alpha = num/den > 0`.
    pub fn pow_on_01(alpha: (i64, i64)) -> Result<Self> {
        Self::from_rational(Family::PowOn01, to_rational(alpha)?)
    }

    /// `|x|^alpha` on `[-1, 1]`, `alpha = num/den > 0`.
    pub fn abs_pow_on_sym(alpha: (i64, i64)) -> Result<Self> {
        Self::from_rational(Family::AbsPowOnSym, to_rational(alpha)?)
    }

    pub fn from_rational(family: Family, alpha: Rational) -> Result<Self> {
        if alpha <= 0 {
            return Err(Error::Param {
                name: "alpha",
                detail: format!("exponent must be positive, got {alpha}"),
            });
        }
        Ok(Target { family, alpha })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Exponent as an exact rational.
    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    /// Exponent rounded once to `bits`.
    pub fn alpha_scalar(&self, bits: u32) -> Scalar {
        Scalar::from(rug::Float::with_val(bits, &self.alpha))
    }

    /// Domain endpoints at `bits` precision.
    pub fn domain(&self, bits: u32) -> (Scalar, Scalar) {
        let one = Scalar::from(rug::Float::with_val(bits, 1));
        match self.family {
            Family::PowOn01 => (Scalar::from(rug::Float::with_val(bits, 0)), one),
            Family::AbsPowOnSym => (-&one, one),
        }
    }

    /// Interior points where the target is not smooth (candidate extrema
    /// the search must always consider). Empty for `x^alpha`; the origin
    /// for `|x|^alpha` with `alpha` not an even integer.
    pub fn interior_kinks(&self) -> Vec<i64> {
        match self.family {
            Family::PowOn01 => vec![],
            Family::AbsPowOnSym => {
                let even = self.alpha.is_integer()
                    && self.alpha.numer().clone() % 2 == 0;
                if even {
                    vec![]
                } else {
                    vec![0]
                }
            }
        }
    }

    /// True when the target is an even function on a symmetric domain.
    pub fn is_even(&self) -> bool {
        self.family == Family::AbsPowOnSym
    }

    /// Evaluate at `x`, at `x`'s own precision.
    pub fn eval(&self, x: &Scalar) -> Result<Scalar> {
        let alpha = self.alpha_scalar(x.prec());
        match self.family {
            Family::PowOn01 => x.pow_real(&alpha),
            Family::AbsPowOnSym => x.abs().pow_real(&alpha),
        }
    }

    /// Derivative at `x`. For `x = 0` this is `0` when `alpha > 1`,
    /// `+infinity` when `alpha < 1` (the cusp), and exact `1` for the
    /// linear case; the symmetric family rejects `x = 0` when the origin
    /// is a kink.
    pub fn deriv(&self, x: &Scalar) -> Result<Scalar> {
        let bits = x.prec();
        let alpha = self.alpha_scalar(bits);
        if x.is_zero() {
            if !self.interior_kinks().is_empty() {
                return Err(Error::Domain {
                    op: "target deriv",
                    detail: "derivative at a kink".into(),
                });
            }
            return Ok(match self.alpha.cmp(&Rational::from(1)) {
                std::cmp::Ordering::Greater => Scalar::from(rug::Float::with_val(bits, 0)),
                std::cmp::Ordering::Equal => Scalar::from(rug::Float::with_val(bits, 1)),
                std::cmp::Ordering::Less => {
                    Scalar::from(rug::Float::with_val(bits, rug::float::Special::Infinity))
                }
            });
        }
        let one = Scalar::from(rug::Float::with_val(bits, 1));
        let ax = x.abs();
        let power = ax.pow_real(&(&alpha - &one))?;
        let magnitude = alpha * power;
        Ok(match self.family {
            Family::PowOn01 => magnitude,
            // d/dx |x|^a = a |x|^{a-1} sign(x)
            Family::AbsPowOnSym => {
                if x.is_sign_negative() {
                    -magnitude
                } else {
                    magnitude
                }
            }
        })
    }

    /// One-sided derivative, defined at kinks too. Matches [`Target::deriv`]
    /// away from them.
    pub fn deriv_one_sided(&self, x: &Scalar, from_right: bool) -> Result<Scalar> {
        if !x.is_zero() || self.interior_kinks().is_empty() {
            return self.deriv(x);
        }
        let bits = x.prec();
        // |x|^a near 0: slope magnitude a |x|^{a-1} -> {0, 1, inf} as a
        // compares to 1; the sign follows the approach side.
        let magnitude = match self.alpha.cmp(&Rational::from(1)) {
            std::cmp::Ordering::Greater => Scalar::from(rug::Float::with_val(bits, 0)),
            std::cmp::Ordering::Equal => Scalar::from(rug::Float::with_val(bits, 1)),
            std::cmp::Ordering::Less => {
                Scalar::from(rug::Float::with_val(bits, rug::float::Special::Infinity))
            }
        };
        Ok(if from_right { magnitude } else { -magnitude })
    }

    /// The `[-1, 1]` problem this `[0, 1]` target transfers to:
    /// `x^a  ->  |x|^{2a}`, degrees `(m, n) -> (2m, 2n)`.
    pub fn sym_counterpart(&self) -> Result<Target> {
        match self.family {
            Family::PowOn01 => Target::from_rational(
                Family::AbsPowOnSym,
                Rational::from(2) * self.alpha.clone(),
            ),
            Family::AbsPowOnSym => Err(Error::Param {
                name: "target",
                detail: "already on the symmetric interval".into(),
            }),
        }
    }

    /// The `[0, 1]` problem this symmetric target transfers to:
    /// `|x|^a  ->  x^{a/2}`, degrees `(2m, 2n) -> (m, n)`.
    pub fn half_counterpart(&self) -> Result<Target> {
        match self.family {
            Family::AbsPowOnSym => Target::from_rational(
                Family::PowOn01,
                self.alpha.clone() / Rational::from(2),
            ),
            Family::PowOn01 => Err(Error::Param {
                name: "target",
                detail: "already on [0, 1]".into(),
            }),
        }
    }

    /// Degree map that accompanies [`Target::sym_counterpart`].
    pub fn sym_degrees(m: usize, n: usize) -> (usize, usize) {
        (2 * m, 2 * n)
    }

    /// Numerator degree of the near-diagonal pair `(m, n)` with a full
    /// alternant: `m = n + 1 + floor(alpha)`. Only defined for the `[0, 1]`
    /// family with non-integer exponent (an integer exponent makes the
    /// target itself rational and the rule meaningless).
    pub fn paradiagonal_m(&self, n: usize) -> Result<usize> {
        if self.family != Family::PowOn01 {
            return Err(Error::Param {
                name: "target",
                detail: "near-diagonal rule applies to the [0, 1] family".into(),
            });
        }
        if self.alpha.is_integer() {
            return Err(Error::Param {
                name: "alpha",
                detail: "integer exponent is exactly rational".into(),
            });
        }
        let floor = self.alpha.clone().floor().numer().to_usize().ok_or(Error::Param {
            name: "alpha",
            detail: "exponent too large".into(),
        })?;
        Ok(n + 1 + floor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::PrecisionContext;

    fn c() -> PrecisionContext {
        PrecisionContext::with_guard(192, 0).unwrap()
    }

    #[test]
    fn eval_exact_points() {
        let t = Target::pow_on_01((1, 2)).unwrap();
        let ctx = c();
        assert!(t.eval(&ctx.from_f64(0.25)).unwrap() == ctx.from_f64(0.5));
        assert!(t.eval(&ctx.zero()).unwrap().is_zero());
        assert!(t.eval(&ctx.one()).unwrap() == ctx.one());

        let a = Target::abs_pow_on_sym((1, 1)).unwrap();
        assert!(a.eval(&ctx.from_f64(-0.5)).unwrap() == ctx.from_f64(0.5));
    }

    #[test]
    fn deriv_values_and_limits() {
        let ctx = c();
        let t = Target::pow_on_01((1, 2)).unwrap();
        // (1/2) x^{-1/2} at x = 1/4 is exactly 1.
        assert!(t.deriv(&ctx.from_f64(0.25)).unwrap() == ctx.one());
        let d0 = t.deriv(&ctx.zero()).unwrap();
        assert!(!d0.is_finite() && !d0.is_sign_negative());

        let steep = Target::pow_on_01((5, 2)).unwrap();
        assert!(steep.deriv(&ctx.zero()).unwrap().is_zero());

        let kink = Target::abs_pow_on_sym((1, 1)).unwrap();
        assert!(kink.deriv(&ctx.zero()).is_err());
        assert!(kink.deriv(&ctx.from_f64(-0.25)).unwrap() == ctx.from_i64(-1));
    }

    #[test]
    fn symmetry_transfer_round_trip() {
        let t = Target::pow_on_01((1, 2)).unwrap();
        let s = t.sym_counterpart().unwrap();
        assert_eq!(s.family(), Family::AbsPowOnSym);
        assert_eq!(*s.alpha(), Rational::from(1));
        assert_eq!(s.half_counterpart().unwrap(), t);
        assert_eq!(Target::sym_degrees(3, 2), (6, 4));
    }

    #[test]
    fn near_diagonal_rule() {
        let half = Target::pow_on_01((1, 2)).unwrap();
        assert_eq!(half.paradiagonal_m(4).unwrap(), 5);
        let steep = Target::pow_on_01((5, 2)).unwrap();
        assert_eq!(steep.paradiagonal_m(4).unwrap(), 7);
        assert!(Target::pow_on_01((2, 1)).unwrap().paradiagonal_m(4).is_err());
        assert!(Target::abs_pow_on_sym((1, 1)).unwrap().paradiagonal_m(4).is_err());
    }

    #[test]
    fn kinks_and_parity() {
        assert!(Target::pow_on_01((1, 2)).unwrap().interior_kinks().is_empty());
        assert_eq!(Target::abs_pow_on_sym((1, 1)).unwrap().interior_kinks(), vec![0]);
        assert!(Target::abs_pow_on_sym((2, 1)).unwrap().interior_kinks().is_empty());
        assert!(Target::abs_pow_on_sym((1, 1)).unwrap().is_even());
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(Target::pow_on_01((0, 1)).is_err());
        assert!(Target::pow_on_01((-1, 2)).is_err());
        assert!(Target::pow_on_01((1, 0)).is_err());
    }
}
