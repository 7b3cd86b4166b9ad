//! Rational Remez exchange at arbitrary precision.
//!
//! Computes the best uniform rational approximant of type `(m, n)` to a
//! target on its interval, certified by equioscillation: the error of the
//! optimum attains its sup norm at `m + n + 2 - defect` points with
//! alternating signs, and no other configuration can do better (de la
//! Vallee Poussin sandwich).
//!
//! # Design
//!
//! Numerator and denominator are carried in barycentric Lagrange form over
//! adaptively chosen support nodes (subsets of the current reference).
//! Monomial coefficients are never formed: for the power targets the
//! alternant clusters geometrically toward the origin and monomial bases
//! lose all significance long before the interesting degree range.
//!
//! The outer iteration is the classical multiple exchange:
//!
//! 1. **Level** the error on the current reference: find `lambda` and
//!    `p/q` with `f(x_j) - p(x_j)/q(x_j) = sign_j lambda` at every
//!    reference point. Fixing `lambda` makes the conditions linear in the
//!    values of `p` and `q`, so the nonlinearity is one-dimensional: a
//!    secant iteration on `lambda`, where the residual is the dropped last
//!    interpolation condition and each step solves one square LU system.
//! 2. **Search** for the extrema of the new error: its zeros bracket one
//!    bump per reference gap; each bump is polished by derivative-sign
//!    bisection (geometric midpoints across decades) and a final secant on
//!    the derivative.
//! 3. **Exchange** the whole reference for the new extrema, preserving
//!    sign alternation, and repeat until the extremal values are level to
//!    tolerance and `lambda` has stagnated at half the working precision.
//!
//! Fresh starts use Chebyshev-Lobatto points pushed toward the origin by
//! `u -> u^2`; sweeps over rising degrees reuse the previous alternant,
//! rescaled in logarithmic coordinates to the predicted depth of the new
//! one (the predicted ratio only seeds the iteration; the fixed point does
//! not depend on it).

use crate::precision::{PrecisionContext, Scalar};
use crate::target::Target;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Polynomial in barycentric Lagrange form: nodes, weights, values.
#[derive(Clone, Debug)]
pub struct Interpolant {
    nodes: Vec<Scalar>,
    weights: Vec<Scalar>,
    values: Vec<Scalar>,
}

impl Interpolant {
    /// Build from nodes and values; weights `w_k = 1 / prod_{j != k} (t_k - t_j)`.
    pub fn new(nodes: Vec<Scalar>, values: Vec<Scalar>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::Param {
                name: "interpolant",
                detail: format!("{} nodes vs {} values", nodes.len(), values.len()),
            });
        }
        let mut weights = Vec::with_capacity(nodes.len());
        for k in 0..nodes.len() {
            let mut prod = nodes[k].with_prec(nodes[k].prec()); // placeholder, overwritten
            let mut first = true;
            for j in 0..nodes.len() {
                if j == k {
                    continue;
                }
                let d = &nodes[k] - &nodes[j];
                if d.is_zero() {
                    return Err(Error::Param {
                        name: "interpolant",
                        detail: "repeated node".into(),
                    });
                }
                if first {
                    prod = d;
                    first = false;
                } else {
                    prod *= d;
                }
            }
            if first {
                // Single node: constant interpolant, weight 1.
                prod = Scalar::from(rug::Float::with_val(nodes[k].prec(), 1));
            }
            weights.push(prod.recip().expect("distinct nodes give nonzero products"));
        }
        Ok(Interpolant {
            nodes,
            weights,
            values,
    })
    }

    pub fn degree_bound(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[Scalar] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Scalar] {
        &self.weights
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    fn node_index(&self, x: &Scalar) -> Option<usize> {
        self.nodes.iter().position(|t| t == x)
    }

    /// Evaluate at `x` (exact at nodes).
    pub fn eval(&self, x: &Scalar) -> Scalar {
        if let Some(i) = self.node_index(x) {
            return self.values[i].clone();
        }
        let mut num = x - x; // zero at x's precision
        let mut den = num.clone();
        for k in 0..self.nodes.len() {
            let c = &self.weights[k] / (x - &self.nodes[k]);
            num += &c * &self.values[k];
            den += c;
        }
        num / den
    }

    /// Nearest node when `x` sits within half-precision relative distance
    /// of it. The off-node derivative form cancels catastrophically there,
    /// while the node's differentiation row stays stable; the position
    /// error from snapping is far below the square-root value sensitivity
    /// around an extremum.
    fn snap_index(&self, x: &Scalar) -> Option<usize> {
        let mut best: Option<(usize, Scalar)> = None;
        for (k, t) in self.nodes.iter().enumerate() {
            let d = (x - t).abs();
            match &best {
                Some((_, bd)) if *bd <= d => {}
                _ => best = Some((k, d)),
            }
        }
        let (k, d) = best?;
        let prec = x.prec();
        let scale = x.abs().max(&self.nodes[k].abs());
        let radius = Scalar::from(rug::Float::with_val(
            prec,
            rug::Float::i_exp(1, -((prec / 2) as i32)),
        ));
        if d <= radius * scale {
            Some(k)
        } else {
            None
        }
    }

    /// Evaluate value and first derivative at `x`.
    pub fn eval_with_deriv(&self, x: &Scalar) -> (Scalar, Scalar) {
        if let Some(i) = self.snap_index(x) {
            // Differentiation matrix row: p'(t_i) = sum_{j != i} (w_j / w_i) (v_j - v_i) / (t_i - t_j).
            let mut d = x - x;
            for j in 0..self.nodes.len() {
                if j == i {
                    continue;
                }
                let c = &self.weights[j] / &self.weights[i];
                d += c * (&self.values[j] - &self.values[i]) / (x - &self.nodes[j]);
            }
            return (self.values[i].clone(), d);
        }
        let zero = x - x;
        let (mut num, mut den) = (zero.clone(), zero.clone());
        let (mut dnum, mut dden) = (zero.clone(), zero);
        for k in 0..self.nodes.len() {
            let diff = x - &self.nodes[k];
            let c = &self.weights[k] / &diff;
            let c2 = &c / &diff;
            num += &c * &self.values[k];
            den += c;
            dnum += &c2 * &self.values[k];
            dden += c2;
        }
        let v = &num / &den;
        // With N = sum c v, D = sum c and N' = -dnum, D' = -dden:
        // (N/D)' = (N' D - N D') / D^2 = (v dden - dnum) / D.
        let dv = (&v * &dden - &dnum) / &den;
        (v, dv)
    }
}

/// Rational function `p/q` with both parts in barycentric form.
#[derive(Clone, Debug)]
pub struct RationalApproximant {
    pub m: usize,
    pub n: usize,
    pub num: Interpolant,
    pub den: Interpolant,
}

impl RationalApproximant {
    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.num.eval(x) / self.den.eval(x)
    }

    /// Value and derivative of `p/q`.
    pub fn eval_with_deriv(&self, x: &Scalar) -> (Scalar, Scalar) {
        let (p, dp) = self.num.eval_with_deriv(x);
        let (q, dq) = self.den.eval_with_deriv(x);
        let v = &p / &q;
        let dv = (dp - &v * dq) / q;
        (v, dv)
    }
}

/// Outcome of a minimax solve.
#[derive(Clone, Debug)]
pub struct MinimaxResult {
    pub target: Target,
    pub m: usize,
    pub n: usize,
    pub precision_bits: u32,
    pub approximant: RationalApproximant,
    /// Certified minimax error (max |error| over the final alternant),
    /// rounded to `precision_bits`.
    pub error: Scalar,
    /// Alternation points, ascending.
    pub alternant: Vec<Scalar>,
    /// Sign of the error at each alternant point.
    pub signs: Vec<i32>,
    /// `max/min - 1` over the final alternant values.
    pub levelness: Scalar,
    pub iterations: usize,
    /// Shortfall of the alternant against `m + n + 2`.
    pub defect: usize,
    /// True when the target is representable exactly and the error vanishes.
    pub exact: bool,
}

/// Knobs for the exchange iteration.
#[derive(Clone, Debug)]
pub struct RemezOptions {
    pub max_iterations: usize,
    /// Levelness tolerance `10^{-exp}`; `None` derives `exp` as a quarter
    /// of the requested decimal digits.
    pub level_exp: Option<u32>,
    /// Continuation: previous alternant (with signs and error) to rescale
    /// into the starting reference.
    pub seed: Option<Seed>,
    /// For fresh power-family solves with `n > 0`, walk degrees up from
    /// `(m - n, 0)` reusing each alternant. Ignored when a seed is given.
    pub auto_ladder: bool,
}

/// Continuation data carried between solves of neighboring degree.
#[derive(Clone, Debug)]
pub struct Seed {
    pub alternant: Vec<Scalar>,
    pub signs: Vec<i32>,
    pub error: Scalar,
}

impl Default for RemezOptions {
    fn default() -> Self {
        RemezOptions {
            max_iterations: 120,
            level_exp: None,
            seed: None,
            auto_ladder: true,
        }
    }
}

impl MinimaxResult {
    pub fn seed(&self) -> Seed {
        Seed {
            alternant: self.alternant.clone(),
            signs: self.signs.clone(),
            error: self.error.clone(),
        }
    }
}

/// Best uniform polynomial approximation of degree `m`.
pub fn best_polynomial(
    target: &Target,
    m: usize,
    ctx: &PrecisionContext,
    opts: &RemezOptions,
) -> Result<MinimaxResult> {
    best_rational(target, m, 0, ctx, opts)
}

/// Best uniform rational approximation of type `(m, n)`.
pub fn best_rational(
    target: &Target,
    m: usize,
    n: usize,
    ctx: &PrecisionContext,
    opts: &RemezOptions,
) -> Result<MinimaxResult> {
    let mut opts = opts.clone();
    // Even targets force even degrees at every rung: odd pairs are
    // defective by parity (the best approximant is even) and would sink
    // the ladder.
    let stride = if target.is_even() { 2 } else { 1 };
    let ladder_fits = n > 0 && m >= n && (m - n) % stride == 0 && n % stride == 0;
    if opts.seed.is_none() && opts.auto_ladder && ladder_fits {
        let offset = m - n;
        let mut seed = None;
        let mut k = 0;
        while k < n {
            let step = solve_one(target, k + offset, k, ctx, &opts, seed.take())?;
            seed = Some(step.seed());
            k += stride;
        }
        return solve_one(target, m, n, ctx, &opts, seed);
    }
    let seed = opts.seed.take();
    solve_one(target, m, n, ctx, &opts, seed)
}

/// Solve a rising sequence of degree pairs, threading each alternant into
/// the next solve. Returns one result per pair.
pub fn ladder(
    target: &Target,
    pairs: &[(usize, usize)],
    ctx: &PrecisionContext,
    opts: &RemezOptions,
) -> Result<Vec<MinimaxResult>> {
    let mut out = Vec::with_capacity(pairs.len());
    let mut seed: Option<Seed> = None;
    for &(m, n) in pairs {
        let r = solve_one(target, m, n, ctx, opts, seed.take())?;
        seed = Some(r.seed());
        out.push(r);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Core solve
// ---------------------------------------------------------------------------

struct Workspace {
    bits: u32,
    zero: Scalar,
    one: Scalar,
    two: Scalar,
}

impl Workspace {
    fn new(bits: u32) -> Self {
        let zero = Scalar::from(rug::Float::with_val(bits, 0));
        let one = Scalar::from(rug::Float::with_val(bits, 1));
        let two = Scalar::from(rug::Float::with_val(bits, 2));
        Workspace {
            bits,
            zero,
            one,
            two,
        }
    }

    fn from_f64(&self, v: f64) -> Scalar {
        Scalar::from(rug::Float::with_val(self.bits, v))
    }

    fn pow2(&self, e: i32) -> Scalar {
        self.two.pow_i(e)
    }
}

fn solve_one(
    target: &Target,
    m: usize,
    n: usize,
    ctx: &PrecisionContext,
    opts: &RemezOptions,
    seed: Option<Seed>,
) -> Result<MinimaxResult> {
    let base_bits = ctx.working_bits();
    let mut ws = Workspace::new(base_bits);
    let nn = m + n + 2;
    let (lo, hi) = target.domain(base_bits);

    // Starting reference and sign pattern.
    let (mut reference, mut signs, mut lambda_guess) = match seed {
        Some(s) => seeded_reference(target, &s, nn, &ws)?,
        None => (fresh_reference(target, nn, &ws), alternating(nn), None),
    };

    let digits = (ctx.precision_bits() as f64 * std::f64::consts::LOG10_2) as u32;
    let level_exp = opts.level_exp.unwrap_or_else(|| (digits / 4).max(8));
    let level_tol = ws.from_f64(10.0).pow_i(-(level_exp as i32));
    let stag_tol = ws.pow2(-((base_bits / 2) as i32));

    // Guard bits beyond the measured conditioning; grows if levelness
    // stalls anyway (the spread formula is a prediction, not a bound).
    let mut extra_bits: u32 = 64;
    ensure_conditioned(
        base_bits,
        extra_bits,
        m,
        n,
        &mut ws,
        &mut reference,
        &mut lambda_guess,
    );

    let mut prev_lambda: Option<Scalar> = None;
    let mut last: Option<(RationalApproximant, Vec<Extremum>)> = None;
    let mut level_history: Vec<f64> = Vec::new();
    let mut iterations = 0;
    let mut rescued = false;

    for iter in 1..=opts.max_iterations {
        iterations = iter;
        let leveled = level_on_reference(target, m, n, &reference, &mut signs, lambda_guess.take(), &ws)?;
        let lambda = match leveled {
            Leveled::Exact(approx) => {
                // A vanishing leveled error only proves agreement on the
                // reference. Confirm off-reference before declaring the
                // target exactly rational; a blind reference (all nodes at
                // coincident target values) produces the same signature.
                let scan = dense_extrema(target, &approx, &reference, &ws, &lo, &hi)?;
                let deviation = scan
                    .iter()
                    .map(|e| e.value.abs())
                    .fold(ws.zero.clone(), |acc, v| if v > acc { v } else { acc });
                let fscale = reference
                    .iter()
                    .map(|x| target.eval(x).map(|v| v.abs()))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(ws.one.clone(), |acc, v| if v > acc { v } else { acc });
                if deviation <= &fscale * ws.pow2(-(ws.bits as i32) + 48) {
                    return Ok(exact_result(target, m, n, ctx, approx, iter));
                }
                match select_alternant(scan, nn, target) {
                    Ok(selected) => {
                        let (_, upper) = spread(&selected);
                        lambda_guess = Some(&upper / &ws.two);
                        signs = selected.iter().map(|e| e.sign).collect();
                        reference = selected.into_iter().map(|e| e.x).collect();
                        ensure_conditioned(
                            base_bits,
                            extra_bits,
                            m,
                            n,
                            &mut ws,
                            &mut reference,
                            &mut lambda_guess,
                        );
                    }
                    Err(_) if !rescued => {
                        rescued = true;
                        reference = fresh_reference(target, nn, &ws);
                        signs = alternating(nn);
                        lambda_guess = None;
                    }
                    Err(_) => {
                        return Err(Error::Singular(
                            "reference cannot separate the target from an exact rational"
                                .into(),
                        ))
                    }
                }
                continue;
            }
            Leveled::Leveled { approx, lambda } => {
                let extrema = find_extrema(target, &approx, &reference, &signs, &ws, &lo, &hi)?;
                let selected = match select_alternant(extrema, nn, target) {
                    Ok(s) => s,
                    Err(_) => {
                        // Bump-per-gap bookkeeping lost an oscillation
                        // (several zeros in one gap early on); rescan from
                        // a dense sampling.
                        let rescan =
                            dense_extrema(target, &approx, &reference, &ws, &lo, &hi)?;
                        select_alternant(rescan, nn, target)?
                    }
                };
                let (lower, upper) = spread(&selected);
                let levelness = &upper / &lower - &ws.one;
                if std::env::var_os("RATAPPROX_TRACE").is_some() {
                    eprintln!(
                        "iter {iter} (m={m},n={n}): bits={} lambda={:.6e} levelness={:.3e} ref0={:.3e}",
                        ws.bits,
                        lambda.to_f64(),
                        levelness.to_f64(),
                        reference[0].to_f64(),
                    );
                }

                // The sandwich (levelness) is the certificate; lambda
                // jitters at the extremum-localization floor, so the
                // stagnation tolerance gets slack on the same scale.
                let stag_eff = {
                    let floor = &levelness / &ws.from_f64(16.0);
                    if stag_tol < floor { floor } else { stag_tol.clone() }
                };
                let stagnated = prev_lambda
                    .as_ref()
                    .map(|p| (&lambda - p).abs() <= &stag_eff * lambda.abs())
                    .unwrap_or(false);
                if levelness <= level_tol && stagnated {
                    return Ok(finish(
                        target, m, n, ctx, approx, selected, upper, levelness, iter,
                    ));
                }
                reference = selected.iter().map(|e| e.x.clone()).collect();
                signs = selected.iter().map(|e| e.sign).collect();
                // The leveled error on the new reference lands between the
                // extremes; the geometric mean is a safe starting guess.
                lambda_guess = Some((&lower * &upper).sqrt().expect("positive spread"));

                // Levelness stalling above tolerance for eight exchanges
                // means the evaluation noise floor sits higher than the
                // spread formula predicted; buy the missing headroom.
                level_history.push(levelness.to_f64());
                let hl = level_history.len();
                if hl >= 9
                    && levelness > level_tol
                    && level_history[hl - 1] > 0.25 * level_history[hl - 9]
                {
                    let deficit = (level_history[hl - 1].log2()
                        - level_tol.to_f64().log2())
                    .max(0.0) as u32;
                    extra_bits = extra_bits
                        .saturating_mul(2)
                        .saturating_add(deficit.min(2048))
                        .min(8192);
                    level_history.clear();
                }
                ensure_conditioned(
                    base_bits,
                    extra_bits,
                    m,
                    n,
                    &mut ws,
                    &mut reference,
                    &mut lambda_guess,
                );
                last = Some((approx, selected));
                lambda
            }
        };
        prev_lambda = Some(lambda);
    }

    // Out of iterations: report how close we got.
    let detail = match last {
        Some((_, selected)) => {
            let (lower, upper) = spread(&selected);
            format!(
                "levelness {:.3e} (lower {}, upper {})",
                (&upper / &lower - &ws.one).to_f64(),
                lower,
                upper
            )
        }
        None => "no completed iteration".into(),
    };
    Err(Error::Convergence {
        stage: "remez exchange",
        iterations,
        detail,
    })
}

fn alternating(nn: usize) -> Vec<i32> {
    (0..nn).map(|j| if j % 2 == 0 { 1 } else { -1 }).collect()
}

fn exact_result(
    target: &Target,
    m: usize,
    n: usize,
    ctx: &PrecisionContext,
    approx: RationalApproximant,
    iterations: usize,
) -> MinimaxResult {
    let zero = ctx.zero();
    MinimaxResult {
        target: target.clone(),
        m,
        n,
        precision_bits: ctx.precision_bits(),
        approximant: approx,
        error: zero.clone(),
        alternant: vec![],
        signs: vec![],
        levelness: zero,
        iterations,
        defect: 0,
        exact: true,
    }
}

fn finish(
    target: &Target,
    m: usize,
    n: usize,
    ctx: &PrecisionContext,
    approx: RationalApproximant,
    selected: Vec<Extremum>,
    upper: Scalar,
    levelness: Scalar,
    iterations: usize,
) -> MinimaxResult {
    let defect = (m + n + 2).saturating_sub(selected.len());
    MinimaxResult {
        target: target.clone(),
        m,
        n,
        precision_bits: ctx.precision_bits(),
        approximant: approx,
        error: ctx.round(&upper),
        alternant: selected.iter().map(|e| ctx.round(&e.x)).collect(),
        signs: selected.iter().map(|e| e.sign).collect(),
        levelness: ctx.round(&levelness),
        iterations,
        defect,
        exact: false,
    }
}

// ---------------------------------------------------------------------------
// Starting references
// ---------------------------------------------------------------------------

/// Chebyshev-Lobatto points mapped to cluster where the target needs them:
/// `u^2` toward the origin on `[0, 1]`, `sign(v) v^2` on `[-1, 1]`.
fn fresh_reference(target: &Target, nn: usize, ws: &Workspace) -> Vec<Scalar> {
    let bits = ws.bits;
    // Even targets take an odd symmetric set (centre included) so the
    // reference can tell the target apart from its value at the paired
    // endpoints; for an even count the top endpoint is dropped (the
    // exchange restores it as a candidate immediately).
    let span = if target.is_even() && nn % 2 == 0 {
        nn + 1
    } else {
        nn
    };
    let pi = Scalar::from(rug::Float::with_val(bits, rug::float::Constant::Pi));
    let count = Scalar::from(rug::Float::with_val(bits, (span - 1) as u32));
    let mut pts = Vec::with_capacity(nn);
    for j in 0..span {
        let jj = Scalar::from(rug::Float::with_val(bits, j as u32));
        let theta = &pi * (&count - &jj) / &count;
        let v = theta.cos(); // ascending from -1 to 1
        if target.is_even() {
            let x = v.square();
            pts.push(if v.is_sign_negative() { -x } else { x });
        } else {
            let u = (&v + &ws.one) / &ws.two;
            pts.push(u.square());
        }
    }
    pts.truncate(nn);
    pts
}

/// Rescale a previous alternant to a new point count in logarithmic
/// coordinates, deepening the profile by the predicted error ratio.
fn seeded_reference(
    target: &Target,
    seed: &Seed,
    nn: usize,
    ws: &Workspace,
) -> Result<(Vec<Scalar>, Vec<i32>, Option<Scalar>)> {
    // Rescaling interpolates the old profile in log coordinates, which
    // needs at least two usable interior points; symmetric alternants
    // only contribute their positive side.
    let usable = seed
        .alternant
        .iter()
        .filter(|x| {
            if target.is_even() {
                !x.is_zero() && !x.is_sign_negative()
            } else {
                !x.is_zero()
            }
        })
        .count();
    if seed.alternant.len() < 4 || seed.alternant.len() != seed.signs.len() || usable < 2 {
        // Too little structure to rescale; fall back to a fresh start.
        return Ok((fresh_reference(target, nn, ws), alternating(nn), None));
    }
    let alpha = target.alpha_scalar(ws.bits);
    // Predicted error at the new degree: the decay exponent of the family
    // is 2 pi sqrt(alpha n) on [0, 1] and pi sqrt(alpha n) on [-1, 1].
    let old_nn = seed.alternant.len();
    let (old_n, new_n) = (
        degree_proxy(old_nn, target),
        degree_proxy(nn, target),
    );
    let rate = if target.is_even() { 1.0 } else { 2.0 };
    let pi = Scalar::from(rug::Float::with_val(ws.bits, rug::float::Constant::Pi));
    let drop = &pi
        * ws.from_f64(rate)
        * alpha.sqrt().expect("alpha > 0")
        * (ws.from_f64(new_n).sqrt().unwrap() - ws.from_f64(old_n).sqrt().unwrap());
    let ratio = (-drop).exp(); // predicted E_new / E_old, < 1
    let predicted = &seed.error * &ratio;

    let pts = if target.is_even() {
        rescale_sym(&seed.alternant, nn, &ratio, &alpha, ws)
    } else {
        rescale_pos(&seed.alternant, nn, &ratio, &alpha, ws)
    };
    let mut signs = alternating(nn);
    // Keep the orientation of the previous sign pattern at the top end of
    // the interval (the bottom gains the new oscillations).
    if seed.signs.last() != signs.last() {
        for s in &mut signs {
            *s = -*s;
        }
    }
    Ok((pts, signs, Some(predicted)))
}

fn degree_proxy(nn: usize, target: &Target) -> f64 {
    // nn = m + n + 2; characterize by n ~ (nn - 2) / 2 for near-diagonal
    // pairs; the seeding only needs the right order of magnitude.
    let half = ((nn as f64) - 2.0) / 2.0;
    if target.is_even() {
        half
    } else {
        half
    }
}

/// Rescale points on `[0, 1]`: keep `0` and `1`, stretch `ln x` by the
/// extra depth `-ln(ratio) / alpha` at the bottom, proportionally above.
fn rescale_pos(
    old: &[Scalar],
    nn: usize,
    ratio: &Scalar,
    alpha: &Scalar,
    ws: &Workspace,
) -> Vec<Scalar> {
    let mut interior: Vec<Scalar> = old.iter().filter(|x| !x.is_zero()).cloned().collect();
    interior.sort_by(|a, b| a.total_cmp(b));
    let had_zero = interior.len() != old.len();
    let k = interior.len();
    let tau: Vec<Scalar> = interior
        .iter()
        .map(|x| x.ln().expect("positive interior point"))
        .collect();
    let depth = -&tau[0]; // > 0, deepest point
    let extra = -(ratio.ln().expect("ratio > 0")) / alpha;
    let scale = (&depth + &extra) / &depth;

    let new_k = nn - usize::from(had_zero);
    let mut pts = Vec::with_capacity(nn);
    if had_zero {
        pts.push(ws.zero.clone());
    }
    for j in 0..new_k {
        // Position in the old profile, linearly interpolated.
        let s = (j as f64) * ((k - 1) as f64) / ((new_k - 1) as f64);
        let i = (s.floor() as usize).min(k - 2);
        let frac = ws.from_f64(s - i as f64);
        let t = &tau[i] + (&tau[i + 1] - &tau[i]) * frac;
        pts.push((t * &scale).exp());
    }
    // Endpoint hygiene: the last point is exactly the top of the interval.
    let last = pts.len() - 1;
    pts[last] = ws.one.clone();
    pts
}

/// Rescale a symmetric alternant: rescale `|x|` of each side like the
/// positive case and mirror, preserving a centre point if present.
fn rescale_sym(
    old: &[Scalar],
    nn: usize,
    ratio: &Scalar,
    alpha: &Scalar,
    ws: &Workspace,
) -> Vec<Scalar> {
    let pos: Vec<Scalar> = old
        .iter()
        .filter(|x| !x.is_zero() && !x.is_sign_negative())
        .cloned()
        .collect();
    // Both parities keep the centre: a mirror-paired reference makes the
    // dropped leveling condition redundant (an even interpolant through
    // the kept points matches the dropped mirror automatically), which
    // reads as a spurious zero leveled error. An even count therefore
    // drops the top endpoint instead; the exchange restores it at once.
    let new_side = nn / 2;
    let side = rescale_pos(&pos, new_side, ratio, alpha, ws);
    let mut pts = Vec::with_capacity(nn);
    for x in side.iter().rev() {
        pts.push(-x);
    }
    pts.push(ws.zero.clone());
    pts.extend_from_slice(&side[..new_side - 1 + nn % 2]);
    pts
}

// ---------------------------------------------------------------------------
// Inner solve: leveling on a fixed reference
// ---------------------------------------------------------------------------

enum Leveled {
    Leveled {
        approx: RationalApproximant,
        lambda: Scalar,
    },
    /// The leveled error collapsed to zero: the target is representable.
    Exact(RationalApproximant),
}

/// Bits lost to barycentric cancellation: the log2 spread of the support
/// node weight magnitudes. A cluster reaching `d` decades deep gives the
/// deepest node a weight about `10^d` times the top one's, and evaluating
/// the interpolant near the top of the interval cancels exactly that many
/// digits. Computed in the log domain so nothing overflows.
fn conditioning_bits(reference: &[Scalar], m: usize, n: usize) -> u32 {
    let nn = reference.len();
    let mut worst = 0.0f64;
    for count in [m + 1, n + 1] {
        let idx = support_indices(nn, count);
        if idx.len() < 2 {
            continue;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, &ka) in idx.iter().enumerate() {
            let mut acc = 0.0;
            for (b, &kb) in idx.iter().enumerate() {
                if a == b {
                    continue;
                }
                let d = (&reference[ka] - &reference[kb]).abs();
                if d.is_zero() {
                    return 0; // degenerate reference; the solve reports it
                }
                acc -= d.ln().expect("positive magnitude").to_f64();
            }
            let w = acc * std::f64::consts::LOG2_E;
            lo = lo.min(w);
            hi = hi.max(w);
        }
        if hi.is_finite() && lo.is_finite() && hi > lo {
            worst = worst.max(hi - lo);
        }
    }
    worst.ceil().clamp(0.0, 16384.0) as u32
}

/// Grow the workspace to cover the conditioning of the current reference
/// plus `extra` slack. Reference points are re-rounded upward (exact) and
/// the lambda guess carried over.
fn ensure_conditioned(
    base_bits: u32,
    extra: u32,
    m: usize,
    n: usize,
    ws: &mut Workspace,
    reference: &mut [Scalar],
    lambda_guess: &mut Option<Scalar>,
) {
    let need = base_bits
        .saturating_add(conditioning_bits(reference, m, n))
        .saturating_add(extra);
    if need > ws.bits {
        *ws = Workspace::new(need);
        for x in reference.iter_mut() {
            *x = x.with_prec(need);
        }
        if let Some(l) = lambda_guess.as_mut() {
            *l = l.with_prec(need);
        }
    }
}

/// Indices into the reference used as support nodes: `count` spread-out
/// positions including both ends.
fn support_indices(nn: usize, count: usize) -> Vec<usize> {
    if count == 1 {
        return vec![nn / 2];
    }
    (0..count)
        .map(|i| (i * (nn - 1) + (count - 1) / 2) / (count - 1))
        .collect()
}

fn level_on_reference(
    target: &Target,
    m: usize,
    n: usize,
    reference: &[Scalar],
    signs: &mut [i32],
    lambda_guess: Option<Scalar>,
    ws: &Workspace,
) -> Result<Leveled> {
    let nn = reference.len();
    debug_assert_eq!(nn, m + n + 2);
    let f: Vec<Scalar> = reference
        .iter()
        .map(|x| target.eval(x))
        .collect::<Result<_>>()?;
    let scale = f
        .iter()
        .map(|v| v.abs())
        .fold(ws.zero.clone(), |a, b| a.max(&b));

    let t_idx = support_indices(nn, m + 1);
    let s_idx = support_indices(nn, n + 1);
    let t_nodes: Vec<Scalar> = t_idx.iter().map(|&i| reference[i].clone()).collect();
    let s_nodes: Vec<Scalar> = s_idx.iter().map(|&i| reference[i].clone()).collect();
    // Unit-value interpolants give the Lagrange basis rows cheaply.
    let t_basis = basis_matrix(&t_nodes, reference, ws);
    let s_basis = basis_matrix(&s_nodes, reference, ws);
    let (lo, hi) = target.domain(ws.bits);
    let mid = (&lo + &hi) / &ws.two;
    let s_mid = basis_row(&s_nodes, &mid, ws);

    // Assemble and solve the leveling system for one lambda; returns the
    // residual of the dropped condition, the solution values, and whether
    // the denominator keeps one sign across the reference (a sign change
    // means a pole slipped inside the interval: that lambda is off the
    // valid branch and the secant must back off).
    let dropped = nn - 1;
    let solve_for = |lambda: &Scalar| -> Result<(Scalar, Vec<Scalar>, Vec<Scalar>, bool)> {
        let rows = nn;
        let cols = (m + 1) + (n + 1);
        debug_assert_eq!(rows, cols);
        let mut mat = vec![vec![ws.zero.clone(); cols]; rows];
        let mut rhs = vec![ws.zero.clone(); rows];
        let mut r = 0;
        for j in 0..nn {
            if j == dropped {
                continue;
            }
            let sign = Scalar::from(rug::Float::with_val(ws.bits, signs[j]));
            let g = &f[j] - &sign * lambda;
            for (k, b) in t_basis[j].iter().enumerate() {
                mat[r][k] = b.clone();
            }
            for (l, b) in s_basis[j].iter().enumerate() {
                mat[r][m + 1 + l] = -(&g * b);
            }
            r += 1;
        }
        for (l, b) in s_mid.iter().enumerate() {
            mat[r][m + 1 + l] = b.clone();
        }
        rhs[r] = ws.one.clone();
        let sol = lu_solve(mat, rhs, ws)?;
        let (a, b) = sol.split_at(m + 1);
        let pj: Scalar = dot(&t_basis[dropped], a, ws);
        let qj: Scalar = dot(&s_basis[dropped], b, ws);
        let sign = Scalar::from(rug::Float::with_val(ws.bits, signs[dropped]));
        let g = &f[dropped] - &sign * lambda;
        let rho = pj - g * qj;
        let mut q_sign = 0i32;
        let mut q_consistent = true;
        for row in &s_basis {
            let s = dot(row, b, ws).sign_i();
            if s == 0 || (q_sign != 0 && s != q_sign) {
                q_consistent = false;
                break;
            }
            q_sign = s;
        }
        Ok((rho, a.to_vec(), b.to_vec(), q_consistent))
    };

    // Secant iteration on lambda. The residual is nearly affine in lambda,
    // so this settles in a handful of steps. The anchor is lambda = 0,
    // where leveling degenerates to interpolation and stays pole-free;
    // proposals whose denominator flips sign on the reference are walked
    // back toward it before being accepted, so the iteration approaches
    // the leveled error from the safe side.
    let mut l0 = ws.zero.clone();
    let mut l1 = match lambda_guess {
        Some(g) if !g.is_zero() => g,
        _ => &scale * ws.pow2(-8) + ws.pow2(-(ws.bits as i32)),
    };
    let (mut r0, ..) = solve_for(&l0)?;
    let mut best: Option<(Scalar, Vec<Scalar>, Vec<Scalar>)> = None;
    let tol = ws.pow2(-((ws.bits / 2) as i32 + 4));
    for _ in 0..60 {
        let proposal = l1.clone();
        let mut attempt = solve_for(&l1)?;
        let mut backoffs = 0;
        while !attempt.3 && backoffs < 8 {
            l1 = (&l0 + &l1) / &ws.two;
            attempt = solve_for(&l1)?;
            backoffs += 1;
        }
        if !attempt.3 {
            // The whole stretch toward the anchor is pole-ridden (the
            // interpolation anchor itself can sit in a pole pocket while
            // the leveled branch lives at larger lambda); probe outward.
            let cap = &scale * &ws.two;
            l1 = &proposal * &ws.two;
            loop {
                if l1 > cap {
                    break;
                }
                attempt = solve_for(&l1)?;
                if attempt.3 {
                    break;
                }
                l1 = &l1 * &ws.two;
            }
        }
        let (r1, a, b, valid) = attempt;
        if !valid {
            // No pole-free solution in either direction; keep the last
            // valid one if any.
            break;
        }
        best = Some((l1.clone(), a, b));
        let denom = &r1 - &r0;
        let step_small = (&l1 - &l0).abs() <= &tol * l1.abs();
        if step_small || r1.is_zero() || denom.is_zero() {
            break;
        }
        let l2 = &l1 - &r1 * (&l1 - &l0) / &denom;
        l0 = l1;
        r0 = r1;
        l1 = l2;
    }
    let (mut lambda, a, b) = best.ok_or_else(|| {
        Error::Singular("no pole-free leveling on this reference".into())
    })?;

    // Exactness: leveled error at the round-off floor of the data scale.
    if lambda.abs() <= &scale * ws.pow2(-(ws.bits as i32) + 40) {
        let approx = interpolate_exact(target, m, &t_nodes, ws)?;
        return Ok(Leveled::Exact(approx));
    }

    if lambda.is_sign_negative() {
        for s in signs.iter_mut() {
            *s = -*s;
        }
        lambda = -lambda;
    }

    let num = Interpolant::new(t_nodes, a)?;
    let den = Interpolant::new(s_nodes, b)?;
    Ok(Leveled::Leveled {
        approx: RationalApproximant { m, n, num, den },
        lambda,
    })
}

/// Exact representation: interpolate the target itself, unit denominator.
fn interpolate_exact(
    target: &Target,
    m: usize,
    t_nodes: &[Scalar],
    ws: &Workspace,
) -> Result<RationalApproximant> {
    let values: Vec<Scalar> = t_nodes
        .iter()
        .map(|x| target.eval(x))
        .collect::<Result<_>>()?;
    let num = Interpolant::new(t_nodes.to_vec(), values)?;
    let den = Interpolant::new(vec![ws.zero.clone()], vec![ws.one.clone()])?;
    Ok(RationalApproximant {
        m,
        n: 0,
        num,
        den,
    })
}

/// Lagrange basis values of the node set at every evaluation point.
fn basis_matrix(nodes: &[Scalar], at: &[Scalar], ws: &Workspace) -> Vec<Vec<Scalar>> {
    at.iter().map(|x| basis_row(nodes, x, ws)).collect()
}

fn basis_row(nodes: &[Scalar], x: &Scalar, ws: &Workspace) -> Vec<Scalar> {
    if nodes.len() == 1 {
        return vec![ws.one.clone()];
    }
    if let Some(i) = nodes.iter().position(|t| t == x) {
        let mut row = vec![ws.zero.clone(); nodes.len()];
        row[i] = ws.one.clone();
        return row;
    }
    // w_k / (x - t_k), normalized by the sum.
    let mut weights = Vec::with_capacity(nodes.len());
    for k in 0..nodes.len() {
        let mut prod = ws.one.clone();
        for j in 0..nodes.len() {
            if j != k {
                prod *= &nodes[k] - &nodes[j];
            }
        }
        weights.push(prod);
    }
    let mut row: Vec<Scalar> = (0..nodes.len())
        .map(|k| (x - &nodes[k]).recip().expect("x is not a node") / &weights[k])
        .collect();
    let total = row.iter().fold(ws.zero.clone(), |acc, v| acc + v);
    for v in &mut row {
        *v /= &total;
    }
    row
}

fn dot(a: &[Scalar], b: &[Scalar], ws: &Workspace) -> Scalar {
    let mut acc = ws.zero.clone();
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Dense LU with partial pivoting.
fn lu_solve(mut a: Vec<Vec<Scalar>>, mut b: Vec<Scalar>, ws: &Workspace) -> Result<Vec<Scalar>> {
    let n = a.len();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col][col].abs();
        for r in col + 1..n {
            let cand = a[r][col].abs();
            if cand > best {
                best = cand;
                piv = r;
            }
        }
        if best.is_zero() {
            return Err(Error::Singular(format!("zero pivot at column {col}")));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &a[col][col];
            for c in col + 1..n {
                let t = &factor * &a[col][c];
                a[r][c] -= t;
            }
            let t = &factor * &b[col];
            b[r] -= t;
            a[r][col] = ws.zero.clone();
        }
    }
    let mut x = vec![ws.zero.clone(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc -= &a[r][c] * &x[c];
        }
        x[r] = acc / &a[r][r];
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Extrema search
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
struct Extremum {
    x: Scalar,
    value: Scalar, // e(x), signed
    sign: i32,
}

fn err_at(target: &Target, approx: &RationalApproximant, x: &Scalar) -> Result<Scalar> {
    Ok(target.eval(x)? - approx.eval(x))
}

fn err_deriv_at(
    target: &Target,
    approx: &RationalApproximant,
    x: &Scalar,
    side_hint: i32,
) -> Result<Scalar> {
    let fd = if x.is_zero() && !target.interior_kinks().is_empty() {
        target.deriv_one_sided(x, side_hint >= 0)?
    } else {
        target.deriv(x)?
    };
    let (_, rd) = approx.eval_with_deriv(x);
    Ok(fd - rd)
}

/// Locate the zeros of the error between consecutive reference points,
/// then one extremum per zero-bounded bump (kinks split their bump and
/// always stand as candidates). Returns candidates in ascending order.
fn find_extrema(
    target: &Target,
    approx: &RationalApproximant,
    reference: &[Scalar],
    signs: &[i32],
    ws: &Workspace,
    lo: &Scalar,
    hi: &Scalar,
) -> Result<Vec<Extremum>> {
    let nn = reference.len();
    let mut zeros = Vec::with_capacity(nn - 1);
    for j in 0..nn - 1 {
        zeros.push(bisect_zero(
            target,
            approx,
            &reference[j],
            &reference[j + 1],
            signs[j],
            ws,
        )?);
    }

    let kinks: Vec<Scalar> = target
        .interior_kinks()
        .iter()
        .map(|&k| Scalar::from(rug::Float::with_val(ws.bits, k)))
        .collect();

    let mut out = Vec::with_capacity(nn);
    for j in 0..nn {
        let a = if j == 0 { lo.clone() } else { zeros[j - 1].clone() };
        let b = if j == nn - 1 {
            hi.clone()
        } else {
            zeros[j].clone()
        };
        let sign = signs[j];
        let kink_inside = kinks
            .iter()
            .find(|k| **k > a && **k < b)
            .cloned();
        let best = match kink_inside {
            None => bump_extremum(target, approx, &a, &b, sign, ws)?,
            Some(k) => {
                // Consider the kink itself and each side's interior extremum.
                let mut cands = vec![(k.clone(), err_at(target, approx, &k)?)];
                cands.push(bump_extremum(target, approx, &a, &k, sign, ws)?);
                cands.push(bump_extremum(target, approx, &k, &b, sign, ws)?);
                let s = ws.from_f64(sign as f64);
                cands
                    .into_iter()
                    .max_by(|p, q| (&s * &p.1).total_cmp(&(&s * &q.1)))
                    .expect("nonempty candidates")
            }
        };
        // A candidate across a denominator sign change (q(mid) = 1 by
        // normalization, so q must stay positive) sits next to a spurious
        // pole; keep the old reference point for that bump instead.
        let pole_side = !best.1.is_finite() || !(approx.den.eval(&best.0) > ws.zero);
        let (x, value) = if pole_side {
            let xr = reference[j].clone();
            let v = err_at(target, approx, &xr)?;
            (xr, v)
        } else {
            best
        };
        out.push(Extremum { x, value, sign });
    }
    Ok(out)
}

/// Midpoint adapted to the spread of the bracket: geometric across decades
/// (same sign, ratio > 16), arithmetic otherwise.
fn midpoint(a: &Scalar, b: &Scalar, ws: &Workspace) -> Scalar {
    let same_sign = a.sign_i() * b.sign_i() > 0;
    if same_sign {
        let (aa, ab) = (a.abs(), b.abs());
        let (small, large) = if aa < ab { (&aa, &ab) } else { (&ab, &aa) };
        if !small.is_zero() && &(large / small) > &ws.from_f64(16.0) {
            let g = (small * large).sqrt().expect("same-sign product");
            return if a.is_sign_negative() { -g } else { g };
        }
    }
    (a + b) / &ws.two
}

/// Zero of the error inside `(a, b)`; the error has sign `sign_left` at
/// `a` and the opposite sign at `b`.
fn bisect_zero(
    target: &Target,
    approx: &RationalApproximant,
    a: &Scalar,
    b: &Scalar,
    sign_left: i32,
    ws: &Workspace,
) -> Result<Scalar> {
    let mut lo = a.clone();
    let mut hi = b.clone();
    let tol = ws.pow2(-28);
    for _ in 0..80 {
        let mid = midpoint(&lo, &hi, ws);
        if mid <= lo || mid >= hi {
            break;
        }
        let e = err_at(target, approx, &mid)?;
        if e.sign_i() == sign_left {
            lo = mid;
        } else {
            hi = mid;
        }
        let width = (&hi - &lo).abs();
        let scale = lo.abs().max(&hi.abs()).max(&ws.pow2(-60));
        if width <= &tol * scale {
            break;
        }
    }
    Ok(midpoint(&lo, &hi, ws))
}

/// Extremum of the bump of sign `sign` on `[a, b]`: derivative-sign
/// bisection, then secant polish on the derivative. Domain endpoints win
/// when the error is one-sidedly monotone toward them.
fn bump_extremum(
    target: &Target,
    approx: &RationalApproximant,
    a: &Scalar,
    b: &Scalar,
    sign: i32,
    ws: &Workspace,
) -> Result<(Scalar, Scalar)> {
    let s = ws.from_f64(sign as f64);
    let ga = &s * err_deriv_at(target, approx, a, 1)?;
    if !ga.is_finite() || ga <= ws.zero {
        // Falling from the left edge: the edge is the bump's maximum
        // (infinite one-sided slopes always point inward or outward
        // definitively; a NaN would have been caught upstream).
        if ga <= ws.zero {
            return Ok((a.clone(), err_at(target, approx, a)?));
        }
    }
    let gb = &s * err_deriv_at(target, approx, b, -1)?;
    if gb >= ws.zero {
        return Ok((b.clone(), err_at(target, approx, b)?));
    }

    // Interior extremum: g = s e' crosses + -> - in (a, b).
    let mut lo = a.clone();
    let mut hi = b.clone();
    let coarse = ws.pow2(-24);
    for _ in 0..90 {
        let mid = midpoint(&lo, &hi, ws);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = &s * err_deriv_at(target, approx, &mid, 1)?;
        if g > ws.zero {
            lo = mid;
        } else {
            hi = mid;
        }
        let width = (&hi - &lo).abs();
        let scale = lo.abs().max(&hi.abs()).max(&ws.pow2(-60));
        if width <= &coarse * scale {
            break;
        }
    }
    // Secant on the derivative, confined to the bracket.
    let mut x0 = lo.clone();
    let mut x1 = hi.clone();
    let mut g0 = &s * err_deriv_at(target, approx, &x0, 1)?;
    let fine = ws.pow2(-((ws.bits / 2) as i32 + 8));
    for _ in 0..25 {
        let g1 = &s * err_deriv_at(target, approx, &x1, 1)?;
        let denom = &g1 - &g0;
        if denom.is_zero() {
            break;
        }
        let x2 = &x1 - &g1 * (&x1 - &x0) / denom;
        if x2 <= lo || x2 >= hi {
            break;
        }
        let step = (&x2 - &x1).abs();
        x0 = std::mem::replace(&mut x1, x2);
        g0 = g1;
        if step <= &fine * x1.abs().max(&ws.pow2(-60)) {
            break;
        }
    }
    Ok((x1.clone(), err_at(target, approx, &x1)?))
}

/// Fallback search that does not trust the one-bump-per-gap structure:
/// sample densely between reference points (kinks added as sample points),
/// polish every sampled local maximum of |e|, and let selection rebuild
/// the alternation.
fn dense_extrema(
    target: &Target,
    approx: &RationalApproximant,
    reference: &[Scalar],
    ws: &Workspace,
    lo: &Scalar,
    hi: &Scalar,
) -> Result<Vec<Extremum>> {
    let mut anchors: Vec<Scalar> = Vec::with_capacity(reference.len() + 4);
    anchors.push(lo.clone());
    for x in reference {
        if x > anchors.last().unwrap() {
            anchors.push(x.clone());
        }
    }
    for k in target.interior_kinks() {
        let kx = Scalar::from(rug::Float::with_val(ws.bits, k));
        if kx > *lo && kx < *hi && anchors.iter().all(|a| *a != kx) {
            anchors.push(kx);
        }
    }
    anchors.sort_by(|a, b| a.total_cmp(b));
    if anchors.last().unwrap() < hi {
        anchors.push(hi.clone());
    }

    let per_gap = 24usize;
    let mut xs: Vec<Scalar> = Vec::new();
    for w in anchors.windows(2) {
        for i in 0..per_gap {
            xs.push(grid_point(&w[0], &w[1], (i as f64) / (per_gap as f64), ws));
        }
    }
    xs.push(hi.clone());
    let mut es = Vec::with_capacity(xs.len());
    for x in &xs {
        es.push(err_at(target, approx, x)?);
    }

    let mut out: Vec<Extremum> = Vec::new();
    for i in 0..xs.len() {
        let a = es[i].abs();
        if !a.is_finite() {
            continue;
        }
        let left_ok = i == 0 || a >= es[i - 1].abs();
        let right_ok = i + 1 == xs.len() || a >= es[i + 1].abs();
        if !(left_ok && right_ok) {
            continue;
        }
        let sign = es[i].sign_i();
        if sign == 0 {
            continue;
        }
        let polished = if i == 0 || i + 1 == xs.len() {
            (xs[i].clone(), es[i].clone())
        } else {
            bump_extremum(target, approx, &xs[i - 1], &xs[i + 1], sign, ws)?
        };
        if polished.1.is_finite() && approx.den.eval(&polished.0) > ws.zero {
            out.push(Extremum {
                x: polished.0,
                value: polished.1,
                sign,
            });
        }
    }
    out.sort_by(|p, q| p.x.total_cmp(&q.x));
    Ok(out)
}

/// Enforce the alternation structure on the candidate list and reduce it
/// to exactly `nn` points: merge same-sign neighbors (keep the larger),
/// drop surplus interior minima in pairs, then a surplus endpoint.
fn select_alternant(cands: Vec<Extremum>, nn: usize, target: &Target) -> Result<Vec<Extremum>> {
    let mut v: Vec<Extremum> = Vec::with_capacity(cands.len());
    for c in cands {
        match v.last() {
            Some(prev) if prev.sign == c.sign || prev.x >= c.x => {
                // Same sign, or two bumps collapsed onto one point: keep
                // the stronger witness.
                if c.value.abs() > prev.value.abs() {
                    *v.last_mut().unwrap() = c;
                }
            }
            _ => v.push(c),
        }
    }
    while v.len() > nn {
        if v.len() - nn >= 2 {
            // Drop the weakest interior candidate and merge its neighbors.
            let mut weakest = 1;
            for i in 2..v.len() - 1 {
                if v[i].value.abs() < v[weakest].value.abs() {
                    weakest = i;
                }
            }
            v.remove(weakest);
            let (l, r) = (weakest - 1, weakest);
            if v[l].value.abs() >= v[r].value.abs() {
                v.remove(r);
            } else {
                v.remove(l);
            }
        } else {
            // One extra point: drop the weaker endpoint (ties: the last,
            // which keeps symmetric problems deterministic).
            if v[0].value.abs() < v[v.len() - 1].value.abs() {
                v.remove(0);
            } else {
                v.pop();
            }
        }
    }
    if v.len() < nn {
        let detail = format!(
            "{} alternating extrema for a reference of {} (defect {}?) in {:?}",
            v.len(),
            nn,
            nn - v.len(),
            target.family(),
        );
        return Err(Error::Convergence {
            stage: "alternant selection",
            iterations: 0,
            detail,
        });
    }
    Ok(v)
}

fn spread(sel: &[Extremum]) -> (Scalar, Scalar) {
    let mut lower = sel[0].value.abs();
    let mut upper = lower.clone();
    for e in &sel[1..] {
        let a = e.value.abs();
        if a < lower {
            lower = a.clone();
        }
        if a > upper {
            upper = a;
        }
    }
    (lower, upper)
}

// ---------------------------------------------------------------------------
// Verification helpers
// ---------------------------------------------------------------------------

/// Count the sign changes of the error on a refining grid. The grid puts
/// `per_gap` points between consecutive alternant points (geometric when a
/// gap spans decades) and doubles until two rounds agree.
pub fn error_zero_count(res: &MinimaxResult, ctx: &PrecisionContext) -> Result<usize> {
    if res.exact {
        return Err(Error::Param {
            name: "result",
            detail: "error vanishes identically".into(),
        });
    }
    let ws = Workspace::new(ctx.working_bits());
    let (lo, hi) = res.target.domain(ws.bits);
    let mut anchors = vec![lo.clone()];
    for x in &res.alternant {
        if *x > *anchors.last().unwrap() {
            anchors.push(x.with_prec(ws.bits));
        }
    }
    if *anchors.last().unwrap() < hi {
        anchors.push(hi.clone());
    }

    let mut prev: Option<usize> = None;
    let mut per_gap = 8usize;
    while per_gap <= 128 {
        let mut count = 0usize;
        let mut last_sign = 0i32;
        for w in anchors.windows(2) {
            for i in 0..per_gap {
                let frac = (i as f64) / (per_gap as f64);
                let x = grid_point(&w[0], &w[1], frac, &ws);
                let s = err_at(&res.target, &res.approximant, &x)?.sign_i();
                if s != 0 {
                    if last_sign != 0 && s != last_sign {
                        count += 1;
                    }
                    last_sign = s;
                }
            }
        }
        // Close the grid at the top endpoint.
        let s = err_at(&res.target, &res.approximant, anchors.last().unwrap())?.sign_i();
        if s != 0 && last_sign != 0 && s != last_sign {
            count += 1;
        }
        if prev == Some(count) {
            return Ok(count);
        }
        prev = Some(count);
        per_gap *= 2;
    }
    Err(Error::Convergence {
        stage: "zero count",
        iterations: 0,
        detail: "count failed to stabilize under grid refinement".into(),
    })
}

fn grid_point(a: &Scalar, b: &Scalar, frac: f64, ws: &Workspace) -> Scalar {
    let same_sign = a.sign_i() * b.sign_i() > 0;
    let t = ws.from_f64(frac);
    if same_sign {
        let (aa, ab) = (a.abs(), b.abs());
        if !aa.is_zero() && !ab.is_zero() {
            let ratio = (&ab / &aa).abs();
            if ratio > ws.from_f64(16.0) || ratio < ws.from_f64(1.0 / 16.0) {
                // Geometric interpolation preserving sign.
                let la = aa.ln().expect("nonzero");
                let lb = ab.ln().expect("nonzero");
                let g = (&la + (&lb - &la) * &t).exp();
                return if a.is_sign_negative() { -g } else { g };
            }
        }
    }
    a + (b - a) * t
}

/// Independent check of a claimed solution on a dense grid.
#[derive(Clone, Debug)]
pub struct EquiReport {
    /// Alternating extrema counted on the dense grid.
    pub alternation_count: usize,
    /// Largest |error| seen anywhere on the grid.
    pub observed_max: Scalar,
    /// Levelness of the claimed alternant recomputed from scratch.
    pub recomputed_levelness: Scalar,
    /// `observed_max / claimed_error - 1` (how far the grid exceeds the claim).
    pub exceedance: Scalar,
}

impl EquiReport {
    /// The claim survives: enough alternations, level alternant, no
    /// interior point visibly beating the claimed error.
    pub fn ok(&self, required_alternations: usize, level_exp: u32) -> bool {
        let tol = 10f64.powi(-(level_exp as i32));
        self.alternation_count >= required_alternations
            && self.recomputed_levelness.to_f64() < tol
            && self.exceedance.to_f64() < tol
    }
}

impl MinimaxResult {
    /// Recompute the error on a dense grid and at the claimed alternant.
    pub fn diagnostics(&self, ctx: &PrecisionContext) -> Result<EquiReport> {
        let ws = Workspace::new(ctx.working_bits());
        if self.exact {
            return Err(Error::Param {
                name: "result",
                detail: "exact representation has no alternant".into(),
            });
        }
        let (lo, hi) = self.target.domain(ws.bits);
        let mut anchors = vec![lo.clone()];
        for x in &self.alternant {
            if *x > *anchors.last().unwrap() {
                anchors.push(x.with_prec(ws.bits));
            }
        }
        if *anchors.last().unwrap() < hi {
            anchors.push(hi.clone());
        }

        // One union grid over all strips (the alternant points are grid
        // points), then sampled local maxima of |e| of comparable height
        // are the equioscillation witnesses.
        let samples = 12usize;
        let mut errs: Vec<Scalar> = Vec::new();
        for w in anchors.windows(2) {
            for i in 0..samples {
                let x = grid_point(&w[0], &w[1], (i as f64) / (samples as f64), &ws);
                errs.push(err_at(&self.target, &self.approximant, &x)?);
            }
        }
        errs.push(err_at(&self.target, &self.approximant, anchors.last().unwrap())?);

        let mut observed_max = ws.zero.clone();
        for e in &errs {
            let a = e.abs();
            if a > observed_max {
                observed_max = a;
            }
        }
        let floor = &observed_max / &ws.from_f64(4.0);
        let mut alternations = 0usize;
        let mut last_extreme_sign = 0i32;
        for i in 0..errs.len() {
            let a = errs[i].abs();
            let left_ok = i == 0 || a >= errs[i - 1].abs();
            let right_ok = i + 1 == errs.len() || a >= errs[i + 1].abs();
            if left_ok && right_ok && a >= floor {
                let s = errs[i].sign_i();
                if s != 0 && s != last_extreme_sign {
                    alternations += 1;
                    last_extreme_sign = s;
                }
            }
        }

        let mut lvl_min: Option<Scalar> = None;
        let mut lvl_max: Option<Scalar> = None;
        for x in &self.alternant {
            let e = err_at(&self.target, &self.approximant, &x.with_prec(ws.bits))?.abs();
            lvl_min = Some(match lvl_min {
                Some(v) => v.min(&e),
                None => e.clone(),
            });
            lvl_max = Some(match lvl_max {
                Some(v) => v.max(&e),
                None => e,
            });
        }
        let (lvl_min, lvl_max) = (
            lvl_min.expect("alternant nonempty"),
            lvl_max.expect("alternant nonempty"),
        );
        let recomputed_levelness = &lvl_max / &lvl_min - &ws.one;
        let claimed = self.error.with_prec(ws.bits);
        let exceedance = &observed_max / &claimed - &ws.one;
        Ok(EquiReport {
            alternation_count: alternations,
            observed_max,
            recomputed_levelness,
            exceedance,
        })
    }
}

// ---------------------------------------------------------------------------
// Serialization: decimal-string document, bit-exact at fixed precision
// ---------------------------------------------------------------------------

/// JSON document form of a [`MinimaxResult`]. All scalars are decimal
/// strings with enough digits to reproduce every bit at `precision_bits`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimaxDoc {
    pub target: Target,
    pub m: usize,
    pub n: usize,
    pub precision_bits: u32,
    pub error: String,
    pub alternant: Vec<String>,
    pub signs: Vec<i32>,
    pub num_nodes: Vec<String>,
    pub num_values: Vec<String>,
    pub den_nodes: Vec<String>,
    pub den_values: Vec<String>,
    pub levelness: String,
    pub iterations: usize,
    pub defect: usize,
    pub exact: bool,
}

impl MinimaxResult {
    pub fn to_doc(&self) -> MinimaxDoc {
        let s = |x: &Scalar| x.to_decimal_full();
        MinimaxDoc {
            target: self.target.clone(),
            m: self.m,
            n: self.n,
            precision_bits: self.precision_bits,
            error: s(&self.error),
            alternant: self.alternant.iter().map(s).collect(),
            signs: self.signs.clone(),
            num_nodes: self.approximant.num.nodes.iter().map(s).collect(),
            num_values: self.approximant.num.values.iter().map(s).collect(),
            den_nodes: self.approximant.den.nodes.iter().map(s).collect(),
            den_values: self.approximant.den.values.iter().map(s).collect(),
            levelness: s(&self.levelness),
            iterations: self.iterations,
            defect: self.defect,
            exact: self.exact,
        }
    }

    pub fn from_doc(doc: &MinimaxDoc) -> Result<MinimaxResult> {
        let ctx = PrecisionContext::with_guard(doc.precision_bits, 0)?;
        let p = |s: &String| ctx.from_decimal(s);
        let alternant: Vec<Scalar> = doc.alternant.iter().map(&p).collect::<Result<_>>()?;
        let num = Interpolant::new(
            doc.num_nodes.iter().map(&p).collect::<Result<_>>()?,
            doc.num_values.iter().map(&p).collect::<Result<_>>()?,
        )?;
        let den = Interpolant::new(
            doc.den_nodes.iter().map(&p).collect::<Result<_>>()?,
            doc.den_values.iter().map(&p).collect::<Result<_>>()?,
        )?;
        if doc.signs.len() != alternant.len() {
            return Err(Error::Parse {
                what: "minimax document",
                detail: "signs and alternant lengths differ".into(),
            });
        }
        Ok(MinimaxResult {
            target: doc.target.clone(),
            m: doc.m,
            n: doc.n,
            precision_bits: doc.precision_bits,
            approximant: RationalApproximant {
                m: doc.m,
                n: doc.n,
                num,
                den,
            },
            error: p(&doc.error)?,
            alternant,
            signs: doc.signs.clone(),
            levelness: p(&doc.levelness)?,
            iterations: doc.iterations,
            defect: doc.defect,
            exact: doc.exact,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::PrecisionContext;
    use crate::target::Target;

    fn ctx(bits: u32) -> PrecisionContext {
        PrecisionContext::with_guard(bits, 64).unwrap()
    }

    #[test]
    fn linear_fit_of_x_squared_is_exactly_classical() {
        // Best degree-1 fit of x^2 on [0, 1]: error 1/8, alternant {0, 1/2, 1}.
        let t = Target::pow_on_01((2, 1)).unwrap();
        let c = ctx(192);
        let r = best_polynomial(&t, 1, &c, &RemezOptions::default()).unwrap();
        let eighth = c.from_f64(0.125);
        assert!((&r.error - &eighth).abs().to_f64() < 1e-50);
        assert_eq!(r.alternant.len(), 3);
        assert!((&r.alternant[1] - c.from_f64(0.5)).abs().to_f64() < 1e-20);
        assert_eq!(r.defect, 0);
        assert!(!r.exact);
    }

    #[test]
    fn best_constant_for_x() {
        let t = Target::pow_on_01((1, 1)).unwrap();
        let c = ctx(128);
        let r = best_polynomial(&t, 0, &c, &RemezOptions::default()).unwrap();
        assert!((&r.error - c.from_f64(0.5)).abs().to_f64() < 1e-30);
        assert_eq!(r.alternant.len(), 2);
    }

    #[test]
    fn exact_representation_is_flagged() {
        // x^1 with numerator degree 1 is representable: zero error.
        let t = Target::pow_on_01((1, 1)).unwrap();
        let c = ctx(128);
        let r = best_polynomial(&t, 1, &c, &RemezOptions::default()).unwrap();
        assert!(r.exact);
        assert!(r.error.is_zero());
        // The approximant reproduces the target.
        let x = c.from_f64(0.37);
        assert!((r.approximant.eval(&x) - x).abs().to_f64() < 1e-35);
    }

    #[test]
    fn sqrt_type_2_1_and_its_certificate() {
        let t = Target::pow_on_01((1, 2)).unwrap();
        let c = ctx(192);
        let r = best_rational(&t, 2, 1, &c, &RemezOptions::default()).unwrap();
        assert_eq!(r.alternant.len(), 5);
        assert_eq!(r.defect, 0);
        assert!(r.levelness.to_f64() < 1e-14);
        // Zero endpoint is an alternation point for the cusp.
        assert!(r.alternant[0].is_zero());
        let diag = r.diagnostics(&c).unwrap();
        assert!(diag.ok(5, 8), "diagnostics rejected: {diag:?}");
        // Zeros strictly between alternations: m + n + 1.
        assert_eq!(error_zero_count(&r, &c).unwrap(), 4);
    }

    #[test]
    fn diagnostics_reject_a_perturbed_solution() {
        let t = Target::pow_on_01((1, 2)).unwrap();
        let c = ctx(192);
        let r = best_rational(&t, 2, 1, &c, &RemezOptions::default()).unwrap();
        let mut bad = r.clone();
        let bump = c.from_f64(1.001);
        let v0 = bad.approximant.num.values[1].clone();
        bad.approximant.num.values[1] = v0 * bump;
        let diag = bad.diagnostics(&c).unwrap();
        assert!(!diag.ok(5, 8));
    }

    #[test]
    fn ladder_marches_the_diagonal() {
        let t = Target::pow_on_01((1, 2)).unwrap();
        let c = ctx(256);
        let pairs: Vec<(usize, usize)> = (0..=4).map(|k| (k, k)).collect();
        let rs = ladder(&t, &pairs, &c, &RemezOptions::default()).unwrap();
        assert_eq!(rs.len(), 5);
        for w in rs.windows(2) {
            assert!(w[1].error < w[0].error, "errors must strictly decrease");
        }
        // Each certificate holds.
        for r in &rs[1..] {
            assert_eq!(r.alternant.len(), r.m + r.n + 2);
            assert!(r.levelness.to_f64() < 1e-15);
        }
    }

    #[test]
    fn symmetric_problem_converges_and_transfers() {
        // E_{2,2}(|x|, [-1,1]) computed directly must match
        // E_{1,1}(sqrt x, [0,1]) computed directly.
        let c = ctx(192);
        let sym = Target::abs_pow_on_sym((1, 1)).unwrap();
        let rs = best_rational(&sym, 2, 2, &c, &RemezOptions::default()).unwrap();
        let half = Target::pow_on_01((1, 2)).unwrap();
        let rh = best_rational(&half, 1, 1, &c, &RemezOptions::default()).unwrap();
        let rel = ((&rs.error - &rh.error) / &rh.error).abs();
        assert!(
            rel.to_f64() < 1e-25,
            "transfer identity violated: {} vs {}",
            rs.error,
            rh.error
        );
    }

    #[test]
    fn document_roundtrip_is_bit_exact() {
        let t = Target::pow_on_01((1, 2)).unwrap();
        let c = ctx(128);
        let r = best_rational(&t, 2, 1, &c, &RemezOptions::default()).unwrap();
        let doc = r.to_doc();
        let json = serde_json::to_string(&doc).unwrap();
        let doc2: MinimaxDoc = serde_json::from_str(&json).unwrap();
        let r2 = MinimaxResult::from_doc(&doc2).unwrap();
        assert!(r2.error == r.error.with_prec(r.precision_bits));
        for (a, b) in r.alternant.iter().zip(&r2.alternant) {
            assert!(a.with_prec(r.precision_bits) == *b);
        }
        let x = c.from_f64(0.123);
        let d = (r.approximant.eval(&x) - r2.approximant.eval(&x)).abs();
        assert!(d.to_f64() < 1e-30);
    }

    #[test]
    fn seed_length_mismatch_falls_back_cleanly() {
        let t = Target::pow_on_01((1, 2)).unwrap();
        let c = ctx(128);
        let r11 = best_rational(&t, 1, 1, &c, &RemezOptions::default()).unwrap();
        let mut opts = RemezOptions::default();
        opts.seed = Some(r11.seed());
        // Larger degrees from the (1,1) alternant: must still converge.
        let r22 = best_rational(&t, 2, 2, &c, &opts).unwrap();
        assert!(r22.error < r11.error);
    }
}


#[cfg(test)]
mod stress {
    use super::*;
    use crate::precision::PrecisionContext;

    #[test]
    fn deep_half_ladder() {
        let t = Target::pow_on_01((1, 2)).unwrap();
        let c = PrecisionContext::new(320).unwrap();
        let r = best_rational(&t, 8, 8, &c, &RemezOptions::default()).unwrap();
        eprintln!("E_88(sqrt x) = {:.6e}  iters={} levelness={:.2e}",
            r.error.to_f64(), r.iterations, r.levelness.to_f64());
        // e^{2 pi sqrt(n/2)} E_nn -> 4^{3/2} * sin(pi/2)... alpha=1/2: 4^{1.5}*1 = 8
        let n = 8.0f64;
        let scaled = (2.0 * std::f64::consts::PI * (0.5 * n).sqrt()).exp() * r.error.to_f64();
        eprintln!("scaled = {scaled} (limit 8)");
        assert!(r.error.to_f64() < 1e-4 && scaled > 4.5 && scaled < 9.0);
    }

    #[test]
    fn deep_sym_ladder() {
        let t = Target::abs_pow_on_sym((1, 1)).unwrap();
        let c = PrecisionContext::new(320).unwrap();
        let r = best_rational(&t, 8, 8, &c, &RemezOptions::default()).unwrap();
        eprintln!("E_88(|x|) = {:.6e}  iters={} levelness={:.2e}",
            r.error.to_f64(), r.iterations, r.levelness.to_f64());
        let n = 8.0f64;
        let scaled = (std::f64::consts::PI * n.sqrt()).exp() * r.error.to_f64();
        eprintln!("scaled = {scaled} (limit 8)");
        assert!(scaled > 4.5 && scaled < 9.0);
    }

    #[test]
    fn quarter_paradiagonal() {
        // alpha = 1/4: paradiagonal m = n+1, fresh+ladder
        let t = Target::pow_on_01((1, 4)).unwrap();
        let c = PrecisionContext::new(320).unwrap();
        let m = t.paradiagonal_m(6).unwrap();
        let r = best_rational(&t, m, 6, &c, &RemezOptions::default()).unwrap();
        eprintln!("E_{{7,6}}(x^(1/4)) = {:.6e} iters={}", r.error.to_f64(), r.iterations);
        assert!(r.levelness.to_f64() < 1e-20);
    }
}

#[cfg(test)]
mod timing {
    use super::*;
    use crate::precision::PrecisionContext;

    #[test]
    #[ignore]
    fn sweep_csv() {
        // Emit scaled sweeps for offline extrapolation tuning.
        for (num, den) in [(1u32, 2u32), (1, 4), (3, 4)] {
            let t = Target::pow_on_01((num as i64, den as i64)).unwrap();
            let c = PrecisionContext::new(256).unwrap();
            let pairs: Vec<(usize, usize)> = (1..=14).map(|k| (k + 1, k)).collect();
            let rs = ladder(&t, &pairs, &c, &RemezOptions::default()).unwrap();
            let alpha = num as f64 / den as f64;
            for r in &rs {
                if r.n < 4 { continue; }
                let n = r.n as f64;
                let scaled = (2.0 * std::f64::consts::PI * (alpha * n).sqrt()).exp() * r.error.to_f64();
                println!("CSV,{num}/{den},{},{:.12e}", r.n, scaled);
            }
        }
    }

    #[test]
    #[ignore]
    fn deep_sweep_704() {
        let t = Target::pow_on_01((1, 2)).unwrap();
        let c = PrecisionContext::new(704).unwrap();
        let start = std::time::Instant::now();
        let pairs: Vec<(usize, usize)> = (1..=16).map(|k| (k, k)).collect();
        let rs = ladder(&t, &pairs, &c, &RemezOptions::default()).unwrap();
        for r in rs.iter().filter(|r| r.n % 4 == 0) {
            let n = r.n as f64;
            let scaled = (2.0 * std::f64::consts::PI * (0.5 * n).sqrt()).exp() * r.error.to_f64();
            eprintln!("n={:2} E={:.6e} scaled={:.8} iters={}", r.n, r.error.to_f64(), scaled, r.iterations);
        }
        eprintln!("total: {:.1?}", start.elapsed());
    }
}
