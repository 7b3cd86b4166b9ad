//! Limit constants, error normalization, extrapolation, and the
//! registry of classical error estimates.
//!
//! The two closed forms at the center of the crate:
//!
//! * `4^(1+a) |sin(pi a)|` — the limit of `e^{2 pi sqrt(a n)} E_nn` for
//!   `x^a` on `[0, 1]`,
//! * `4^(1+a/2) |sin(pi a / 2)|` — the limit of `e^{pi sqrt(a n)} E_nn`
//!   for `|x|^a` on `[-1, 1]`,
//!
//! linked by the substitution `x -> x^2`, which is exactly the
//! consistency identity `pow01_limit_constant(a) =
//! abs_sym_limit_constant(2a)`.
//!
//! Everything here is a pure computation over immutable sweep data,
//! with one exception: [`bernstein_constant_estimate`] drives the
//! exchange engine itself, because its input is a polynomial error
//! sequence rather than a rational sweep.

use crate::precision::{PrecisionContext, Scalar};
use crate::remez::{ladder, MinimaxResult, RemezOptions};
use crate::target::{Family, Target};
use crate::{Error, Result};

fn require_positive(alpha: &Scalar) -> Result<()> {
    if alpha.sign_i() <= 0 || !alpha.is_finite() {
        return Err(Error::Param {
            name: "alpha",
            detail: format!("exponent must be positive, got {alpha}"),
        });
    }
    Ok(())
}

fn is_integer(x: &Scalar) -> bool {
    x.floor() == *x
}

/// `4^(1+a) |sin(pi a)|`, the normalized-error limit for `x^a` on
/// `[0, 1]`. Exactly zero at integer exponents, where `x^a` is its own
/// approximant.
pub fn pow01_limit_constant(alpha: &Scalar, ctx: &PrecisionContext) -> Result<Scalar> {
    require_positive(alpha)?;
    if is_integer(alpha) {
        return Ok(ctx.round(&ctx.zero()));
    }
    let w = ctx.wide();
    let a = alpha.with_prec(w.precision_bits());
    let pow = w.from_u32(4).pow_real(&(&w.one() + &a))?;
    let s = (&w.pi() * &a).sin().abs();
    Ok(ctx.round(&(&pow * &s)))
}

/// `4^(1+a/2) |sin(pi a / 2)|`, the counterpart limit for `|x|^a` on
/// `[-1, 1]`. Zero at even integer exponents.
pub fn abs_sym_limit_constant(alpha: &Scalar, ctx: &PrecisionContext) -> Result<Scalar> {
    require_positive(alpha)?;
    let w = ctx.wide();
    let half = &alpha.with_prec(w.precision_bits()) / &w.from_u32(2);
    if is_integer(&half) {
        return Ok(ctx.round(&ctx.zero()));
    }
    let pow = w.from_u32(4).pow_real(&(&w.one() + &half))?;
    let s = (&w.pi() * &half).sin().abs();
    Ok(ctx.round(&(&pow * &s)))
}

/// The limit constant for whichever family a sweep ran on.
pub fn limit_constant(family: Family, alpha: &Scalar, ctx: &PrecisionContext) -> Result<Scalar> {
    match family {
        Family::PowOn01 => pow01_limit_constant(alpha, ctx),
        Family::AbsPowOnSym => abs_sym_limit_constant(alpha, ctx),
    }
}

/// `e^{k pi sqrt(a n)}` with `k = 2` on `[0, 1]` and `k = 1` on the
/// symmetric interval.
fn growth_factor(n: usize, alpha: &Scalar, family: Family, w: &PrecisionContext) -> Result<Scalar> {
    let a = alpha.with_prec(w.precision_bits());
    let root = (&a * &w.from_u32(n as u32)).sqrt()?;
    let k = match family {
        Family::PowOn01 => 2,
        Family::AbsPowOnSym => 1,
    };
    Ok((&(&w.pi() * &w.from_u32(k)) * &root).exp())
}

/// Scale a raw minimax error by the family's exponential growth factor,
/// producing the quantity whose limit is [`limit_constant`].
pub fn normalize_error(
    n: usize,
    alpha: &Scalar,
    e: &Scalar,
    family: Family,
    ctx: &PrecisionContext,
) -> Result<Scalar> {
    require_positive(alpha)?;
    if n == 0 || e.sign_i() <= 0 {
        return Err(Error::Param {
            name: "normalize_error",
            detail: format!("need n >= 1 and E > 0, got n = {n}, E = {e}"),
        });
    }
    let w = ctx.wide();
    let f = growth_factor(n, alpha, family, &w)?;
    Ok(ctx.round(&(&e.with_prec(w.precision_bits()) * &f)))
}

/// Inverse of [`normalize_error`] at context precision.
pub fn denormalize_error(
    n: usize,
    alpha: &Scalar,
    y: &Scalar,
    family: Family,
    ctx: &PrecisionContext,
) -> Result<Scalar> {
    require_positive(alpha)?;
    let w = ctx.wide();
    let f = growth_factor(n, alpha, family, &w)?;
    Ok(ctx.round(&(&y.with_prec(w.precision_bits()) / &f)))
}

/// How a finite sweep is pushed to its limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtrapolationModel {
    /// Least-squares fit of `y = L + c n^{-1/2}` (plus `d n^{-1}` once
    /// six entries are available) in powers of `n^{-1/2}`, the exponent
    /// scale the errors themselves live on.
    RichardsonSqrt,
    /// Aitken delta-squared acceleration of the raw values.
    Aitken,
}

fn det2(g: &[Vec<Scalar>]) -> Scalar {
    &(&g[0][0] * &g[1][1]) - &(&g[0][1] * &g[1][0])
}

fn det3(g: &[Vec<Scalar>]) -> Scalar {
    let a = &g[0][0] * &(&(&g[1][1] * &g[2][2]) - &(&g[1][2] * &g[2][1]));
    let b = &g[0][1] * &(&(&g[1][0] * &g[2][2]) - &(&g[1][2] * &g[2][0]));
    let c = &g[0][2] * &(&(&g[1][0] * &g[2][1]) - &(&g[1][1] * &g[2][0]));
    &(&a - &b) + &c
}

/// Least-squares limit via the normal equations; returns only the
/// constant term. `k` is 2 or 3 basis functions `1, n^{-1/2}, n^{-1}`.
fn richardson_fit(vals: &[(usize, Scalar)], w: &PrecisionContext) -> Result<Scalar> {
    let k = if vals.len() >= 6 { 3 } else { 2 };
    let mut g = vec![vec![w.zero(); k]; k];
    let mut b = vec![w.zero(); k];
    for (n, y) in vals {
        let f1 = w.from_u32(*n as u32).sqrt()?.recip()?;
        let basis = [w.one(), f1.clone(), &f1 * &f1];
        for i in 0..k {
            for (j, gij) in g[i].iter_mut().enumerate().take(i + 1) {
                *gij = &*gij + &(&basis[i] * &basis[j]);
            }
            b[i] = &b[i] + &(&basis[i] * y);
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            g[i][j] = g[j][i].clone();
        }
    }
    let det = if k == 2 { det2(&g) } else { det3(&g) };
    let mut diag = w.one();
    for (i, row) in g.iter().enumerate() {
        diag = &diag * &row[i];
    }
    let floor = &diag.abs() * &w.from_u32(2).pow_i(-(w.precision_bits() as i32 / 2));
    if det.abs() <= floor {
        return Err(Error::Singular(
            "collinear extrapolation fit: design matrix numerically singular".into(),
        ));
    }
    // Cramer for the constant coordinate: replace column 0 with b.
    let mut gr = g.clone();
    for (row, bi) in gr.iter_mut().zip(&b) {
        row[0] = bi.clone();
    }
    let top = if k == 2 { det2(&gr) } else { det3(&gr) };
    Ok(&top / &det)
}

fn aitken_accelerate(ys: &[Scalar]) -> Vec<Scalar> {
    let mut acc = Vec::new();
    for k in 0..ys.len().saturating_sub(2) {
        let d1 = &ys[k + 2] - &ys[k + 1];
        let den = &d1 - &(&ys[k + 1] - &ys[k]);
        if den.is_zero() {
            acc.push(ys[k + 2].clone());
        } else {
            acc.push(&ys[k + 2] - &(&(&d1 * &d1) / &den));
        }
    }
    acc
}

/// Extrapolate a sweep to its limit. The error bar is the spread of the
/// last two extrapolants: a stability indicator, not a bound, because
/// the true finite-n correction order is not known.
pub fn extrapolate_limit(
    values: &[(usize, Scalar)],
    model: ExtrapolationModel,
    ctx: &PrecisionContext,
) -> Result<(Scalar, Scalar)> {
    if values.len() < 4 {
        return Err(Error::Param {
            name: "values",
            detail: format!("need at least 4 entries, got {}", values.len()),
        });
    }
    if values.windows(2).any(|p| p[1].0 <= p[0].0) {
        return Err(Error::Param {
            name: "values",
            detail: "degrees must be strictly increasing".into(),
        });
    }
    let w = ctx.wide();
    let lifted: Vec<(usize, Scalar)> = values
        .iter()
        .map(|(n, y)| (*n, y.with_prec(w.precision_bits())))
        .collect();
    let (limit, bar) = match model {
        ExtrapolationModel::RichardsonSqrt => {
            let full = richardson_fit(&lifted, &w)?;
            let prev = richardson_fit(&lifted[..lifted.len() - 1], &w)?;
            let bar = (&full - &prev).abs();
            (full, bar)
        }
        ExtrapolationModel::Aitken => {
            let ys: Vec<Scalar> = lifted.iter().map(|(_, y)| y.clone()).collect();
            let acc = aitken_accelerate(&ys);
            let last = acc[acc.len() - 1].clone();
            let bar = (&last - &acc[acc.len() - 2]).abs();
            (last, bar)
        }
    };
    Ok((ctx.round(&limit), ctx.round(&bar)))
}

/// A normalized sweep with its extrapolated limit and the closed-form
/// value it is expected to approach.
#[derive(Clone, Debug)]
pub struct ConstantEstimate {
    pub alpha: Scalar,
    /// `(n, raw error, normalized value)`, ascending in `n`.
    pub entries: Vec<(usize, Scalar, Scalar)>,
    pub extrapolated: Scalar,
    /// Spread of successive extrapolants; heuristic, never asserted.
    pub error_bar: Scalar,
    pub target: Scalar,
}

/// Normalize a converged sweep and extrapolate it. Integer exponents
/// short-circuit: the error vanishes identically once the degree covers
/// the exponent, so the normalized sequence is skipped and the estimate
/// is exactly the (zero) limit.
pub fn constant_estimate_from_sweep(
    entries: &[(usize, Scalar)],
    alpha: &Scalar,
    family: Family,
    ctx: &PrecisionContext,
) -> Result<ConstantEstimate> {
    require_positive(alpha)?;
    let target = limit_constant(family, alpha, ctx)?;
    if target.is_zero() {
        return Ok(ConstantEstimate {
            alpha: ctx.round(alpha),
            entries: Vec::new(),
            extrapolated: ctx.zero(),
            error_bar: ctx.zero(),
            target,
        });
    }
    let mut rows = Vec::with_capacity(entries.len());
    let mut normalized = Vec::with_capacity(entries.len());
    for (n, e) in entries {
        let y = normalize_error(*n, alpha, e, family, ctx)?;
        normalized.push((*n, y.clone()));
        rows.push((*n, ctx.round(e), y));
    }
    let (extrapolated, error_bar) =
        extrapolate_limit(&normalized, ExtrapolationModel::RichardsonSqrt, ctx)?;
    Ok(ConstantEstimate {
        alpha: ctx.round(alpha),
        entries: rows,
        extrapolated,
        error_bar,
        target,
    })
}

/// Classical estimates kept for cross-checking computed errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundName {
    /// `|x|` on `[-1, 1]`: the original sandwich with explicit
    /// constants, valid from degree 4.
    Newman,
    /// `sqrt x` on `[0, 1]`: lower bound with an explicit `1/3`.
    BulanovSqrt,
    /// `sqrt x` on `[0, 1]`: two-sided sharp order, constants symbolic.
    VjacheslavovSqrt,
    /// `x^a` on `[0, 1]`: upper estimate with a fourth-root slack term.
    Ganelius,
    /// `|x|` on `[-1, 1]`: early estimate with a logarithmic loss.
    FreudSzabados,
    /// `x^a` on `[0, 1]`: order-of-magnitude upper estimate.
    GoncharUpper,
    /// `x^a` on `[0, 1]`: order-of-magnitude lower estimate.
    GoncharLower,
}

/// Which side(s) an estimate controls and whether its constants are
/// proved numbers or placeholders.
#[derive(Clone, Debug)]
pub struct BoundSpec {
    pub name: BoundName,
    /// True only where the literature fixes every constant; everything
    /// else is an order statement evaluated with unit constants.
    pub constants_known: bool,
    /// Smallest degree the statement covers.
    pub min_n: usize,
    pub lower: Option<&'static str>,
    pub upper: Option<&'static str>,
}

/// The registry entry for a named estimate.
pub fn bound_spec(name: BoundName) -> BoundSpec {
    match name {
        BoundName::Newman => BoundSpec {
            name,
            constants_known: true,
            min_n: 4,
            lower: Some("exp(-9 sqrt n) / 2"),
            upper: Some("3 exp(-sqrt n)"),
        },
        BoundName::BulanovSqrt => BoundSpec {
            name,
            constants_known: true,
            min_n: 1,
            lower: Some("exp(-pi sqrt(2n)) / 3"),
            upper: None,
        },
        BoundName::VjacheslavovSqrt => BoundSpec {
            name,
            constants_known: false,
            min_n: 1,
            lower: Some("c1 exp(-pi sqrt(2n))"),
            upper: Some("c2 exp(-pi sqrt(2n))"),
        },
        BoundName::Ganelius => BoundSpec {
            name,
            constants_known: false,
            min_n: 1,
            lower: None,
            upper: Some("c exp(-2 pi sqrt(a n) + n^(1/4))"),
        },
        BoundName::FreudSzabados => BoundSpec {
            name,
            constants_known: false,
            min_n: 2,
            lower: None,
            upper: Some("c exp(-sqrt n / ln n)"),
        },
        BoundName::GoncharUpper => BoundSpec {
            name,
            constants_known: false,
            min_n: 1,
            lower: None,
            upper: Some("c exp(-c' sqrt(a n))"),
        },
        BoundName::GoncharLower => BoundSpec {
            name,
            constants_known: false,
            min_n: 1,
            lower: Some("c exp(-c' sqrt(a n))"),
            upper: None,
        },
    }
}

/// Evaluate a registry estimate at degree `n`. Known-constant entries
/// produce the proved numbers; qualitative entries are evaluated with
/// unit constants and only carry shape information.
pub fn historical_bound(
    spec: &BoundSpec,
    n: usize,
    alpha: &Scalar,
    ctx: &PrecisionContext,
) -> Result<(Option<Scalar>, Option<Scalar>)> {
    if n < spec.min_n {
        return Err(Error::Param {
            name: "n",
            detail: format!(
                "{:?} holds from degree {}, got {n}",
                spec.name, spec.min_n
            ),
        });
    }
    require_positive(alpha)?;
    let w = ctx.wide();
    let nn = w.from_u32(n as u32);
    let sqrt_n = nn.sqrt()?;
    let an_root = (&alpha.with_prec(w.precision_bits()) * &nn).sqrt()?;
    let pi = w.pi();
    let pair = match spec.name {
        BoundName::Newman => {
            let lower = &(&sqrt_n * &w.from_i64(-9)).exp() / &w.from_u32(2);
            let upper = &w.from_u32(3) * &sqrt_n.neg().exp();
            (Some(lower), Some(upper))
        }
        BoundName::BulanovSqrt => {
            let e = (&(&pi * &(&nn * &w.from_u32(2)).sqrt()?).neg()).exp();
            (Some(&e / &w.from_u32(3)), None)
        }
        BoundName::VjacheslavovSqrt => {
            let e = (&(&pi * &(&nn * &w.from_u32(2)).sqrt()?).neg()).exp();
            (Some(e.clone()), Some(e))
        }
        BoundName::Ganelius => {
            let slack = nn.pow_real(&(&w.one() / &w.from_u32(4)))?;
            let e = (&(&slack - &(&(&pi * &w.from_u32(2)) * &an_root))).exp();
            (None, Some(e))
        }
        BoundName::FreudSzabados => {
            let e = (&(&sqrt_n / &nn.ln()?).neg()).exp();
            (None, Some(e))
        }
        BoundName::GoncharUpper => (None, Some(an_root.neg().exp())),
        BoundName::GoncharLower => (Some(an_root.neg().exp()), None),
    };
    let round = |v: Option<Scalar>| v.map(|x| ctx.round(&x));
    Ok((round(pair.0), round(pair.1)))
}

/// `Gamma(a) |sin(pi a / 2)| / pi`: the closed form the polynomial
/// constant approaches for large exponents. Formula evaluation only;
/// nothing here chases that limit numerically.
pub fn bernstein_large_alpha(alpha: &Scalar, ctx: &PrecisionContext) -> Result<Scalar> {
    require_positive(alpha)?;
    let w = ctx.wide();
    let half = &alpha.with_prec(w.precision_bits()) / &w.from_u32(2);
    if is_integer(&half) {
        return Ok(ctx.round(&ctx.zero()));
    }
    let g = alpha.with_prec(w.precision_bits()).gamma()?;
    let s = (&w.pi() * &half).sin().abs();
    Ok(ctx.round(&(&(&g * &s) / &w.pi())))
}

/// The polynomial constant for `|x|` as computed to high precision in
/// the literature.
pub fn bernstein_reference(ctx: &PrecisionContext) -> Scalar {
    ctx.from_decimal("0.2801694990238691330364364912")
        .expect("literal parses")
}

/// The refuted closed-form guess `1/(2 sqrt pi)` for that constant.
pub fn bernstein_refuted_guess(ctx: &PrecisionContext) -> Result<Scalar> {
    let w = ctx.wide();
    let v = (&w.pi().sqrt()? * &w.from_u32(2)).recip()?;
    Ok(ctx.round(&v))
}

/// Drive the exchange engine over even polynomial degrees for `|x|`,
/// collect `m * E_{m,0}`, and extrapolate. The estimate lands near the
/// reference digits and visibly away from the refuted guess.
pub fn bernstein_constant_estimate(
    max_m: usize,
    ctx: &PrecisionContext,
) -> Result<ConstantEstimate> {
    if max_m < 10 {
        return Err(Error::Param {
            name: "max_m",
            detail: format!("need max_m >= 10 for a stable fit, got {max_m}"),
        });
    }
    let target = Target::abs_pow_on_sym((1, 1))?;
    let pairs: Vec<(usize, usize)> = (1..=max_m / 2).map(|k| (2 * k, 0)).collect();
    let results = ladder(&target, &pairs, ctx, &RemezOptions::default())?;
    let mut rows = Vec::with_capacity(results.len());
    let mut scaled = Vec::with_capacity(results.len());
    for r in &results {
        let y = &ctx.from_u32(r.m as u32) * &r.error;
        scaled.push((r.m, y.clone()));
        rows.push((r.m, r.error.clone(), y));
    }
    let (extrapolated, error_bar) =
        extrapolate_limit(&scaled, ExtrapolationModel::RichardsonSqrt, ctx)?;
    Ok(ConstantEstimate {
        alpha: ctx.one(),
        entries: rows,
        extrapolated,
        error_bar,
        target: bernstein_reference(ctx),
    })
}

/// One row of the splitting-identity check.
#[derive(Clone, Debug)]
pub struct EpsilonRelationRow {
    pub n: usize,
    /// `E_n e^{2 pi sqrt(a n)} / (4 |sin pi a|)`, drifting toward `4^a`.
    pub ratio: Scalar,
    /// Its `1/a`-th power, drifting toward 4.
    pub root: Scalar,
}

/// Tabulate the scaled errors against `4^a`. Algebraically this carries
/// the same content as [`normalize_error`] divided by the limit
/// constant; it is recomputed from scratch here so the two paths guard
/// each other.
pub fn epsilon_relation_check(
    entries: &[(usize, Scalar)],
    alpha: &Scalar,
    ctx: &PrecisionContext,
) -> Result<Vec<EpsilonRelationRow>> {
    require_positive(alpha)?;
    if is_integer(alpha) {
        return Err(Error::Param {
            name: "alpha",
            detail: "integer exponent: sin(pi a) vanishes and the ratio is undefined".into(),
        });
    }
    let w = ctx.wide();
    let a = alpha.with_prec(w.precision_bits());
    let denom = &(&w.pi() * &a).sin().abs() * &w.from_u32(4);
    let inv_a = a.recip()?;
    let mut out = Vec::with_capacity(entries.len());
    for (n, e) in entries {
        let root_an = (&a * &w.from_u32(*n as u32)).sqrt()?;
        let grow = (&(&(&w.pi() * &w.from_u32(2)) * &root_an)).exp();
        let ratio = &(&e.with_prec(w.precision_bits()) * &grow) / &denom;
        let root = ratio.pow_real(&inv_a)?;
        out.push(EpsilonRelationRow {
            n: *n,
            ratio: ctx.round(&ratio),
            root: ctx.round(&root),
        });
    }
    Ok(out)
}

/// Fit the growth exponent of `|log E_n + 2 pi sqrt(a n)|` against `n`
/// on a log-log scale. Errors of the expected order leave a bounded
/// slack, so the fitted exponent sits near zero; anything at or below
/// 0.3 rules out a fourth-root-sized slack term.
pub fn slack_growth_exponent(entries: &[(usize, Scalar)], alpha: &Scalar) -> Result<f64> {
    if entries.len() < 3 {
        return Err(Error::Param {
            name: "entries",
            detail: "need at least 3 points to fit a growth exponent".into(),
        });
    }
    let a = alpha.to_f64();
    let mut xs = Vec::with_capacity(entries.len());
    let mut ys = Vec::with_capacity(entries.len());
    for (n, e) in entries {
        let s = e.to_f64().ln() + 2.0 * std::f64::consts::PI * (a * *n as f64).sqrt();
        xs.push((*n as f64).ln());
        ys.push(s.abs().max(1e-12).ln());
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|v| v * v).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// CSV rows for a sweep: `alpha,n,m,precision_bits,E,normalized,
/// lower_bound,upper_bound`, plain decimal strings. Bound columns are
/// filled only where a proved-constant estimate applies (the symmetric
/// `|x|` sandwich from degree 4, the `sqrt x` lower bound) and left
/// blank otherwise.
pub fn sweep_to_csv(results: &[MinimaxResult], ctx: &PrecisionContext) -> Result<String> {
    let mut out = String::from("alpha,n,m,precision_bits,E,normalized,lower_bound,upper_bound\n");
    for r in results {
        let digits = (r.precision_bits as f64 * std::f64::consts::LOG10_2) as usize + 2;
        let alpha_r = r.target.alpha();
        let alpha = r.target.alpha_scalar(ctx.working_bits());
        let family = r.target.family();
        let normalized = if r.error.is_zero() {
            String::new()
        } else {
            normalize_error(r.n, &alpha, &r.error, family, ctx)?.to_decimal(digits)
        };
        let (lower, upper) = match family {
            Family::AbsPowOnSym if *alpha_r == rug::Rational::from(1) && r.n >= 4 => {
                let (lo, hi) = historical_bound(&bound_spec(BoundName::Newman), r.n, &alpha, ctx)?;
                (lo, hi)
            }
            Family::PowOn01 if *alpha_r == rug::Rational::from((1, 2)) => {
                let (lo, hi) =
                    historical_bound(&bound_spec(BoundName::BulanovSqrt), r.n, &alpha, ctx)?;
                (lo, hi)
            }
            _ => (None, None),
        };
        let fmt = |v: Option<Scalar>| v.map(|x| x.to_decimal(digits)).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            alpha_r.to_f64(),
            r.n,
            r.m,
            r.precision_bits,
            r.error.to_decimal(digits),
            normalized,
            fmt(lower),
            fmt(upper),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::remez::best_rational;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(128).unwrap()
    }

    fn close(a: &Scalar, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol
    }

    #[test]
    fn limit_constants_rational_points() {
        let c = ctx();
        let half = c.from_f64(0.5);
        assert!(close(&pow01_limit_constant(&half, &c).unwrap(), 8.0, 1e-30));
        let quarter = c.from_f64(0.25);
        assert!(close(&pow01_limit_constant(&quarter, &c).unwrap(), 4.0, 1e-30));
        let three_q = c.from_f64(0.75);
        assert!(close(&pow01_limit_constant(&three_q, &c).unwrap(), 8.0, 1e-30));
        let one = c.one();
        assert!(pow01_limit_constant(&one, &c).unwrap().is_zero());
        assert!(close(&abs_sym_limit_constant(&one, &c).unwrap(), 8.0, 1e-30));
        assert!(close(&abs_sym_limit_constant(&half, &c).unwrap(), 4.0, 1e-30));
        assert!(abs_sym_limit_constant(&c.from_u32(2), &c).unwrap().is_zero());
    }

    #[test]
    fn families_agree_under_substitution() {
        let c = ctx();
        for k in 1..40u32 {
            let a = &c.from_u32(k) / &c.from_u32(41);
            let lhs = pow01_limit_constant(&a, &c).unwrap();
            let rhs = abs_sym_limit_constant(&(&a * &c.from_u32(2)), &c).unwrap();
            let diff = (&lhs - &rhs).abs();
            assert!(diff.to_f64() < 1e-35, "mismatch at k={k}");
        }
    }

    #[test]
    fn normalize_round_trip() {
        let c = PrecisionContext::new(256).unwrap();
        let a = c.from_f64(0.5);
        let e = c.from_f64(3.25e-9);
        for family in [Family::PowOn01, Family::AbsPowOnSym] {
            let y = normalize_error(7, &a, &e, family, &c).unwrap();
            let back = denormalize_error(7, &a, &y, family, &c).unwrap();
            let rel = (&(&back - &e) / &e).abs();
            assert!(rel.to_f64() < 1e-70);
        }
        assert!(normalize_error(0, &a, &e, Family::PowOn01, &c).is_err());
        assert!(normalize_error(3, &a, &c.zero(), Family::PowOn01, &c).is_err());
    }

    #[test]
    fn richardson_recovers_exact_model() {
        let c = ctx();
        let vals: Vec<(usize, Scalar)> = [4u32, 9, 16, 25]
            .iter()
            .map(|&n| {
                let y = &c.from_u32(3) + &(&c.from_u32(5) / &c.from_u32(n).sqrt().unwrap());
                (n as usize, y)
            })
            .collect();
        let (limit, _) = extrapolate_limit(&vals, ExtrapolationModel::RichardsonSqrt, &c).unwrap();
        assert!(close(&limit, 3.0, 1e-25));
    }

    #[test]
    fn aitken_geometric_tail() {
        let c = ctx();
        let vals: Vec<(usize, Scalar)> = [4usize, 8, 16, 32, 64]
            .iter()
            .map(|&n| {
                let y = &c.from_u32(8) - &(&c.from_u32(2) / &c.from_u32(n as u32));
                (n, y)
            })
            .collect();
        let (limit, bar) = extrapolate_limit(&vals, ExtrapolationModel::Aitken, &c).unwrap();
        assert!(close(&limit, 8.0, 1e-3));
        assert!(bar.to_f64() < 1e-3);
    }

    #[test]
    fn constant_sequence_is_fixed_point() {
        let c = ctx();
        let vals: Vec<(usize, Scalar)> =
            (4..9).map(|n| (n, c.from_f64(2.375))).collect();
        for model in [ExtrapolationModel::RichardsonSqrt, ExtrapolationModel::Aitken] {
            let (limit, bar) = extrapolate_limit(&vals, model, &c).unwrap();
            assert!(close(&limit, 2.375, 1e-28));
            assert!(bar.to_f64() < 1e-28);
        }
    }

    #[test]
    fn extrapolate_rejects_bad_input() {
        let c = ctx();
        let short: Vec<(usize, Scalar)> = (1..4).map(|n| (n, c.one())).collect();
        assert!(extrapolate_limit(&short, ExtrapolationModel::Aitken, &c).is_err());
        let dup: Vec<(usize, Scalar)> =
            [3usize, 5, 5, 7].iter().map(|&n| (n, c.one())).collect();
        assert!(extrapolate_limit(&dup, ExtrapolationModel::Aitken, &c).is_err());
    }

    #[test]
    fn newman_sandwich_values() {
        let c = ctx();
        let one = c.one();
        let spec = bound_spec(BoundName::Newman);
        assert!(spec.constants_known);
        let (lo, hi) = historical_bound(&spec, 4, &one, &c).unwrap();
        let expect_lo = 0.5 * (-18.0f64).exp();
        let expect_hi = 3.0 * (-2.0f64).exp();
        assert!(close(&lo.unwrap(), expect_lo, 1e-20));
        assert!(close(&hi.unwrap(), expect_hi, 1e-12));
        assert!(historical_bound(&spec, 3, &one, &c).is_err());
    }

    #[test]
    fn sqrt_lower_bound_value() {
        let c = ctx();
        let half = c.from_f64(0.5);
        let spec = bound_spec(BoundName::BulanovSqrt);
        let (lo, hi) = historical_bound(&spec, 8, &half, &c).unwrap();
        let expect = (-(4.0 * std::f64::consts::PI)).exp() / 3.0;
        assert!(close(&lo.unwrap(), expect, 1e-12));
        assert!(hi.is_none());
    }

    #[test]
    fn qualitative_bounds_are_flagged() {
        for name in [
            BoundName::VjacheslavovSqrt,
            BoundName::Ganelius,
            BoundName::FreudSzabados,
            BoundName::GoncharUpper,
            BoundName::GoncharLower,
        ] {
            assert!(!bound_spec(name).constants_known);
        }
    }

    #[test]
    fn bernstein_formula_values() {
        let c = ctx();
        assert!(close(
            &bernstein_large_alpha(&c.one(), &c).unwrap(),
            1.0 / std::f64::consts::PI,
            1e-15
        ));
        assert!(bernstein_large_alpha(&c.from_u32(2), &c).unwrap().is_zero());
        assert!(close(
            &bernstein_large_alpha(&c.from_u32(3), &c).unwrap(),
            2.0 / std::f64::consts::PI,
            1e-15
        ));
        assert!(close(&bernstein_refuted_guess(&c).unwrap(), 0.2820947917738781, 1e-15));
    }

    #[test]
    fn epsilon_relation_exact_limit_data() {
        let c = ctx();
        let a = c.from_f64(0.5);
        // Errors placed exactly on the limit: E = 4^{1+a}|sin pi a| e^{-2 pi sqrt(a n)}.
        let w = c.wide();
        let lim = pow01_limit_constant(&a, &c).unwrap().with_prec(w.precision_bits());
        let entries: Vec<(usize, Scalar)> = (4..9)
            .map(|n| {
                let root = (&a.with_prec(w.precision_bits()) * &w.from_u32(n as u32))
                    .sqrt()
                    .unwrap();
                let decay = (&(&(&w.pi() * &w.from_u32(2)) * &root).neg()).exp();
                (n, &lim * &decay)
            })
            .collect();
        let rows = epsilon_relation_check(&entries, &a, &c).unwrap();
        for row in rows {
            assert!(close(&row.ratio, 2.0, 1e-25));
            assert!(close(&row.root, 4.0, 1e-25));
        }
        assert!(epsilon_relation_check(&entries, &c.one(), &c).is_err());
    }

    #[test]
    fn slack_exponent_flat_for_sharp_data() {
        let c = ctx();
        let a = c.from_f64(0.5);
        // E_n = 7 e^{-2 pi sqrt(a n)}: slack is the constant log 7.
        let entries: Vec<(usize, Scalar)> = (4..15)
            .map(|n| {
                let e = 7.0 * (-2.0 * std::f64::consts::PI * (0.5 * n as f64).sqrt()).exp();
                (n, c.from_f64(e))
            })
            .collect();
        let slope = slack_growth_exponent(&entries, &a).unwrap();
        assert!(slope.abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn sweep_csv_shape() {
        let c = ctx();
        let t = Target::pow_on_01((1, 2)).unwrap();
        let results = vec![
            best_rational(&t, 2, 1, &c, &RemezOptions::default()).unwrap(),
            best_rational(&t, 3, 2, &c, &RemezOptions::default()).unwrap(),
        ];
        let csv = sweep_to_csv(&results, &c).unwrap();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(
            lines[0],
            "alpha,n,m,precision_bits,E,normalized,lower_bound,upper_bound"
        );
        assert_eq!(lines.len(), 3);
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 8);
            // sqrt target: lower bound column filled, upper blank.
            let cols: Vec<&str> = line.split(',').collect();
            assert!(!cols[6].is_empty());
            assert!(cols[7].is_empty());
        }
    }

    #[test]
    fn bernstein_estimate_small_run() {
        let c = ctx();
        let est = bernstein_constant_estimate(12, &c).unwrap();
        assert_eq!(est.entries.len(), 6);
        // Scaled values increase toward the limit.
        for p in est.entries.windows(2) {
            assert!(p[1].2 > p[0].2);
        }
        let v = est.extrapolated.to_f64();
        assert!((0.270..=0.290).contains(&v), "estimate {v}");
    }
}
