//! Arbitrary-precision scalars and the precision contexts that create them.
//!
//! Everything downstream (the exchange engine, the potential solver, the
//! boundary transforms) works over [`Scalar`], a thin wrapper around an
//! MPFR float. A [`PrecisionContext`] fixes the reporting precision and a
//! guard allowance; solvers run at `working_bits()` and round results back
//! to `precision_bits()` when publishing them.
//!
//! Binary operations between scalars round once, to the larger of the two
//! operand precisions, so precision never silently degrades when widened
//! and narrowed values meet.

use crate::{Error, Result};
use rug::float::{Constant, Special};
use rug::ops::Pow;
use rug::{Float, Rational};
use std::cmp::Ordering;
use std::fmt;

/// Smallest accepted working precision. Below this the exchange engine's
/// stagnation test (half the working precision) stops being meaningful.
pub const MIN_PRECISION: u32 = 64;

/// Default guard allowance added on top of the reporting precision.
pub const DEFAULT_GUARD: u32 = 64;

/// Reporting precision plus a guard allowance for internal computation.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PrecisionContext {
    precision_bits: u32,
    guard_bits: u32,
}

impl PrecisionContext {
    /// Context with the default guard allowance.
    pub fn new(precision_bits: u32) -> Result<Self> {
        Self::with_guard(precision_bits, DEFAULT_GUARD)
    }

    /// Context with an explicit guard allowance.
    pub fn with_guard(precision_bits: u32, guard_bits: u32) -> Result<Self> {
        if precision_bits < MIN_PRECISION {
            return Err(Error::PrecisionTooLow {
                got: precision_bits,
                min: MIN_PRECISION,
            });
        }
        Ok(Self {
            precision_bits,
            guard_bits,
        })
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn guard_bits(&self) -> u32 {
        self.guard_bits
    }

    /// Precision solvers actually compute at.
    pub fn working_bits(&self) -> u32 {
        self.precision_bits + self.guard_bits
    }

    /// A context whose reporting precision is this one's working precision.
    /// Solver internals construct their scalars through this.
    pub fn wide(&self) -> PrecisionContext {
        PrecisionContext {
            precision_bits: self.working_bits(),
            guard_bits: 0,
        }
    }

    /// Round a scalar to this context's reporting precision.
    pub fn round(&self, x: &Scalar) -> Scalar {
        x.with_prec(self.precision_bits)
    }

    pub fn zero(&self) -> Scalar {
        Scalar(Float::with_val(self.precision_bits, 0))
    }

    pub fn one(&self) -> Scalar {
        Scalar(Float::with_val(self.precision_bits, 1))
    }

    pub fn from_u32(&self, v: u32) -> Scalar {
        Scalar(Float::with_val(self.precision_bits, v))
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        Scalar(Float::with_val(self.precision_bits, v))
    }

    pub fn from_f64(&self, v: f64) -> Scalar {
        Scalar(Float::with_val(self.precision_bits, v))
    }

    /// Exact rational, rounded once to context precision.
    pub fn from_rational(&self, v: &Rational) -> Scalar {
        Scalar(Float::with_val(self.precision_bits, v))
    }

    /// Parse a decimal string (scientific notation accepted).
    pub fn from_decimal(&self, s: &str) -> Result<Scalar> {
        let incomplete = Float::parse(s).map_err(|e| Error::Parse {
            what: "decimal scalar",
            detail: format!("{s:?}: {e}"),
        })?;
        Ok(Scalar(Float::with_val(self.precision_bits, incomplete)))
    }

    pub fn pi(&self) -> Scalar {
        Scalar(Float::with_val(self.precision_bits, Constant::Pi))
    }

    pub fn infinity(&self) -> Scalar {
        Scalar(Float::with_val(self.precision_bits, Special::Infinity))
    }
}

/// An MPFR-backed real number carrying its own precision.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Scalar(Float);

/// Elementary function selector for the uniform dispatch entry point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElemKind {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Gamma,
}

impl Scalar {
    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Borrow the backing float (for interop with the complex layer).
    pub fn as_float(&self) -> &Float {
        &self.0
    }

    /// Same value re-rounded to `bits`.
    pub fn with_prec(&self, bits: u32) -> Scalar {
        Scalar(Float::with_val(bits, &self.0))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative()
    }

    /// Sign as -1, 0, or +1.
    pub fn sign_i(&self) -> i32 {
        if self.0.is_zero() {
            0
        } else if self.0.is_sign_negative() {
            -1
        } else {
            1
        }
    }

    pub fn abs(&self) -> Scalar {
        Scalar(self.0.clone().abs())
    }

    pub fn neg(&self) -> Scalar {
        Scalar(-self.0.clone())
    }

    pub fn floor(&self) -> Scalar {
        Scalar(self.0.clone().floor())
    }

    pub fn square(&self) -> Scalar {
        Scalar(Float::with_val(self.prec(), self.0.square_ref()))
    }

    pub fn min(&self, other: &Scalar) -> Scalar {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn max(&self, other: &Scalar) -> Scalar {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn exp(&self) -> Scalar {
        Scalar(self.0.clone().exp())
    }

    pub fn sin(&self) -> Scalar {
        Scalar(self.0.clone().sin())
    }

    pub fn cos(&self) -> Scalar {
        Scalar(self.0.clone().cos())
    }

    /// Two-argument arctangent of `self / x`, quadrant-correct.
    pub fn atan2(&self, x: &Scalar) -> Scalar {
        Scalar(self.0.clone().atan2(&x.0))
    }

    pub fn sqrt(&self) -> Result<Scalar> {
        if self.0.is_sign_negative() && !self.0.is_zero() {
            return Err(Error::Domain {
                op: "sqrt",
                detail: format!("negative argument {self}"),
            });
        }
        Ok(Scalar(self.0.clone().sqrt()))
    }

    pub fn ln(&self) -> Result<Scalar> {
        if self.0.is_zero() || self.0.is_sign_negative() {
            return Err(Error::Domain {
                op: "log",
                detail: format!("non-positive argument {self}"),
            });
        }
        Ok(Scalar(self.0.clone().ln()))
    }

    pub fn gamma(&self) -> Result<Scalar> {
        if self.0.is_integer() && (self.0.is_zero() || self.0.is_sign_negative()) {
            return Err(Error::Domain {
                op: "gamma",
                detail: format!("pole at non-positive integer {self}"),
            });
        }
        Ok(Scalar(self.0.clone().gamma()))
    }

    pub fn recip(&self) -> Result<Scalar> {
        if self.0.is_zero() {
            return Err(Error::Domain {
                op: "recip",
                detail: "division by zero".into(),
            });
        }
        Ok(Scalar(self.0.clone().recip()))
    }

    /// Integer power, exact exponent arithmetic.
    pub fn pow_i(&self, e: i32) -> Scalar {
        Scalar(Float::with_val(self.prec(), (&self.0).pow(e)))
    }

    /// `x^alpha` for `x >= 0`, computed as `exp(alpha log x)` with doubled
    /// internal precision, rounded back to the larger operand precision.
    ///
    /// `0^alpha` is `0` for positive `alpha` and an error otherwise.
    pub fn pow_real(&self, alpha: &Scalar) -> Result<Scalar> {
        let p = self.prec().max(alpha.prec());
        if self.0.is_sign_negative() && !self.0.is_zero() {
            return Err(Error::Domain {
                op: "pow_real",
                detail: format!("negative base {self}"),
            });
        }
        if self.0.is_zero() {
            return if alpha.0.is_sign_negative() || alpha.0.is_zero() {
                Err(Error::Domain {
                    op: "pow_real",
                    detail: "0^alpha with alpha <= 0".into(),
                })
            } else {
                Ok(Scalar(Float::with_val(p, 0)))
            };
        }
        let wide = 2 * p;
        let lx = Float::with_val(wide, &self.0).ln();
        let prod = Float::with_val(wide, &lx * &alpha.0);
        let r = prod.exp();
        Ok(Scalar(Float::with_val(p, &r)))
    }

    /// Decimal string with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        self.0.to_string_radix(10, Some(digits.max(2)))
    }

    /// Decimal string with enough digits to reproduce every bit when parsed
    /// back at the same precision.
    pub fn to_decimal_full(&self) -> String {
        let digits = (self.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
        self.to_decimal(digits)
    }

    /// Total order for sorting; never called on NaN (constructors gate them).
    pub fn total_cmp(&self, other: &Scalar) -> Ordering {
        self.partial_cmp(other).expect("scalars are never NaN here")
    }
}

/// Uniform elementary-function dispatch (`exp`, `log`, `sin`, `cos`,
/// `sqrt`, `gamma`) with the same domain gating as the named methods.
pub fn elementary(kind: ElemKind, x: &Scalar) -> Result<Scalar> {
    match kind {
        ElemKind::Exp => Ok(x.exp()),
        ElemKind::Log => x.ln(),
        ElemKind::Sin => Ok(x.sin()),
        ElemKind::Cos => Ok(x.cos()),
        ElemKind::Sqrt => x.sqrt(),
        ElemKind::Gamma => x.gamma(),
    }
}

impl From<Float> for Scalar {
    fn from(f: Float) -> Scalar {
        Scalar(f)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(20))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.to_decimal(20), self.prec())
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                let p = self.prec().max(rhs.prec());
                Scalar(Float::with_val(p, &self.0 $op &rhs.0))
            }
        }
        impl std::ops::$trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self $op &rhs
            }
        }
        impl std::ops::$trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                &self $op rhs
            }
        }
        impl std::ops::$trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                &self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}

impl std::ops::Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(&self)
    }
}

macro_rules! assignop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait<&Scalar> for Scalar {
            fn $method(&mut self, rhs: &Scalar) {
                let r = &*self $op rhs;
                *self = r;
            }
        }
        impl std::ops::$trait<Scalar> for Scalar {
            fn $method(&mut self, rhs: Scalar) {
                let r = &*self $op &rhs;
                *self = r;
            }
        }
    };
}

assignop!(AddAssign, add_assign, +);
assignop!(SubAssign, sub_assign, -);
assignop!(MulAssign, mul_assign, *);
assignop!(DivAssign, div_assign, /);

#[cfg(test)]
mod tests {
    use super::*;

    // Reference digits computed with an independent arbitrary-precision
    // library; 220 significant digits each.
    const SQRT2: &str = "1.414213562373095048801688724209698078569671875376948073176679737990732478462107038850387534327641572735013846230912297024924836055850737212644121497099935831413222665927505592755799950501152782060571470109559971605970275";
    const PI: &str = "3.141592653589793238462643383279502884197169399375105820974944592307816406286208998628034825342117067982148086513282306647093844609550582231725359408128481117450284102701938521105559644622948954930381964428810975665933446";
    const E1: &str = "2.718281828459045235360287471352662497757247093699959574966967627724076630353547594571382178525166427427466391932003059921817413596629043572900334295260595630738132328627943490763233829880753195251019011573834187930702154";
    const LN2: &str = "0.6931471805599453094172321214581765680755001343602552541206800094933936219696947156058633269964186875420014810205706857336855202357581305570326707516350759619307275708283714351903070386238916734711233501153644979552391205";
    const SIN1: &str = "0.8414709848078965066525023216302989996225630607983710656727517099919104043912396689486397435430526958543490379079206742932591189209918988811934103277292124094807919558267666069999077640119784087827325663474848028702986562";
    const COS1: &str = "0.5403023058681397174009366074429766037323104206179222276700972553811003947744717645179518560871830893435717311600300890978606337600216634564065122654173185847179711644744794942331179245513932543359435177567028925963757362";
    const GAMMA_HALF: &str = "1.772453850905516027298167483341145182797549456122387128213807789852911284591032181374950656738544665416226823624282570666236152865724422602525093709602787068462037698653105122849925173028950826228932095379267962800174639";
    const EXP_M2PI: &str = "0.001867442731707988814430212934827030393422805002475317199381538638317935122915728073906484905465362289841034408404904364342418895788797945009720141795916693825036575445037591849669913016377535880074396213577009312587153568";
    const SQRT03: &str = "0.5477225575051661134569697828008021339527446949979832542268944497324932771227227338008584361638706257647268259428513922440720078988264655889147125260419893505065686826402898887105198537733630447784714698653630946471376922";

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_guard(704, 0).unwrap()
    }

    /// Relative agreement to `digits` decimal digits.
    fn assert_close(x: &Scalar, reference: &str, digits: i32) {
        let wide = PrecisionContext::with_guard(1024, 0).unwrap();
        let r = wide.from_decimal(reference).unwrap();
        let diff = (x - &r).abs();
        let tol = r.abs() * wide.from_f64(10.0).pow_i(-digits);
        assert!(
            diff <= tol,
            "mismatch beyond 1e-{digits}: got {x}, want {reference}"
        );
    }

    #[test]
    fn constants_match_reference_digits() {
        let c = ctx();
        assert_close(&c.from_u32(2).sqrt().unwrap(), SQRT2, 200);
        assert_close(&c.pi(), PI, 200);
        assert_close(&c.one().exp(), E1, 200);
        assert_close(&c.from_u32(2).ln().unwrap(), LN2, 200);
        assert_close(&c.one().sin(), SIN1, 200);
        assert_close(&c.one().cos(), COS1, 200);
        assert_close(&c.from_f64(0.5).gamma().unwrap(), GAMMA_HALF, 200);
        let m2pi = -(c.pi() * c.from_u32(2));
        assert_close(&m2pi.exp(), EXP_M2PI, 200);
    }

    #[test]
    fn pow_real_matches_reference() {
        let c = ctx();
        let x = c.from_rational(&Rational::from((3, 10)));
        let half = c.from_rational(&Rational::from((1, 2)));
        assert_close(&x.pow_real(&half).unwrap(), SQRT03, 200);
        // Exact cases.
        assert!(c.one().pow_real(&half).unwrap() == c.one());
        assert!(c.zero().pow_real(&half).unwrap().is_zero());
        let x4 = c.from_u32(4).pow_real(&c.from_f64(0.5)).unwrap();
        assert_close(&x4, "2", 200);
    }

    #[test]
    fn pow_real_domain_gating() {
        let c = ctx();
        assert!(c.from_i64(-1).pow_real(&c.one()).is_err());
        assert!(c.zero().pow_real(&c.zero()).is_err());
        assert!(c.zero().pow_real(&c.from_i64(-1)).is_err());
    }

    #[test]
    fn elementary_dispatch_agrees_with_methods() {
        let c = ctx();
        let x = c.from_f64(0.7);
        assert!(elementary(ElemKind::Exp, &x).unwrap() == x.exp());
        assert!(elementary(ElemKind::Log, &x).unwrap() == x.ln().unwrap());
        assert!(elementary(ElemKind::Sin, &x).unwrap() == x.sin());
        assert!(elementary(ElemKind::Cos, &x).unwrap() == x.cos());
        assert!(elementary(ElemKind::Sqrt, &x).unwrap() == x.sqrt().unwrap());
        assert!(elementary(ElemKind::Gamma, &x).unwrap() == x.gamma().unwrap());
    }

    #[test]
    fn domain_errors() {
        let c = ctx();
        assert!(c.from_i64(-1).ln().is_err());
        assert!(c.zero().ln().is_err());
        assert!(c.from_i64(-2).sqrt().is_err());
        assert!(c.zero().gamma().is_err());
        assert!(c.from_i64(-3).gamma().is_err());
        assert!(c.zero().recip().is_err());
        // Non-integer negatives are fine for gamma.
        assert!(c.from_f64(-0.5).gamma().is_ok());
    }

    #[test]
    fn precision_floor_enforced() {
        assert!(PrecisionContext::new(32).is_err());
        assert!(PrecisionContext::new(64).is_ok());
    }

    #[test]
    fn mixed_precision_takes_max() {
        let lo = PrecisionContext::with_guard(128, 0).unwrap();
        let hi = PrecisionContext::with_guard(512, 0).unwrap();
        let a = lo.from_f64(0.25);
        let b = hi.from_f64(0.5);
        assert_eq!((&a + &b).prec(), 512);
        assert_eq!((&a * &b).prec(), 512);
    }

    #[test]
    fn wide_and_round() {
        let c = PrecisionContext::with_guard(128, 64).unwrap();
        assert_eq!(c.working_bits(), 192);
        let w = c.wide();
        assert_eq!(w.precision_bits(), 192);
        let x = w.from_u32(2).sqrt().unwrap();
        assert_eq!(x.prec(), 192);
        assert_eq!(c.round(&x).prec(), 128);
    }

    #[test]
    fn decimal_roundtrip_is_exact() {
        let c = PrecisionContext::with_guard(384, 0).unwrap();
        for v in [0.3, 1.0 / 7.0, 123.456, 1e-30, 6.02e23] {
            let x = c.from_f64(v).sqrt().unwrap();
            let s = x.to_decimal_full();
            let back = c.from_decimal(&s).unwrap();
            assert!(back == x, "roundtrip drift for {v}: {s}");
        }
    }

    #[test]
    fn atan2_quadrants() {
        let c = ctx();
        let q1 = c.one().atan2(&c.one());
        assert_close(&(q1 * c.from_u32(4)), PI, 200);
        let q2 = c.one().atan2(&c.from_i64(-1));
        let three_quarter_pi = c.pi() * c.from_f64(0.75);
        assert!((q2 - three_quarter_pi).abs().to_f64() < 1e-200);
    }

    #[test]
    fn floor_and_pow_i() {
        let c = ctx();
        assert!(c.from_f64(2.5).floor() == c.from_u32(2));
        assert!(c.from_f64(-0.5).floor() == c.from_i64(-1));
        assert_close(&c.from_u32(2).pow_i(10), "1024", 200);
        assert_close(&c.from_u32(2).pow_i(-2), "0.25", 200);
    }
}
