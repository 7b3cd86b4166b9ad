//! Green potential with prescribed logarithmic boundary data on the
//! slit plane.
//!
//! The problem: find a positive measure on `[b, a]`, together with the
//! lower endpoint `b` itself, whose Green potential for the plane slit
//! along the closed negative reals equals `log w` on `[b, a]` and
//! exceeds it on `(0, b)`. The Green function of the slit plane has the
//! closed form `g(w, t) = log|(sqrt w + sqrt t)/(sqrt w - sqrt t)|`, so
//! everything is solved in half plane variables `u = sqrt w`,
//! `s = sqrt t`, where the kernel is the difference of two logarithmic
//! potentials.
//!
//! Discretization: on `[sqrt b, sqrt a]`, mapped to `[-1, 1]`, the
//! density ansatz is `h(y) / sqrt(1 - y^2)` with `h` expanded in first
//! kind Chebyshev polynomials. The inverse square root endpoints make
//! the ansatz a superset of every admissible endpoint behavior, and
//! every kernel integral reduces to the classical log integrals
//!
//! ```text
//!   (1/pi) int log|x - y| T_j(y) / sqrt(1 - y^2) dy
//!       = -log 2            j = 0, |x| <= 1
//!       = -T_j(x) / j       j >= 1, |x| <= 1
//!       = log(|z|/2)        j = 0, x = (z + 1/z)/2, |z| > 1
//!       = -z^{-j} / j       j >= 1, same z
//! ```
//!
//! The smooth part `log(u + s)` is the same integral at the reflected
//! exterior point `x = -(u + m)/r`, so the collocation matrix is
//! entirely closed form; no quadrature error enters. Collocation at
//! first kind Chebyshev points gives a dense linear system solved by
//! LU.
//!
//! The free endpoint: at the hard endpoint `a` the density genuinely
//! blows up like an inverse square root, but at the free endpoint the
//! correct density vanishes like a square root. In the ansatz that
//! means `h(-1) = 0`, with `h` then vanishing linearly and the weight
//! turning `(1 + y) / sqrt(1 + y)` into the soft square root. With `b`
//! too small the solved edge value `h(-1)` goes negative (the trial
//! support holds signed mass near the edge), so bisection on the sign
//! of `h(-1)` locates the endpoint where the density vanishes from
//! above.

use crate::precision::{PrecisionContext, Scalar};
use crate::{Error, Result};
use rug::Float;
use serde::Serialize;

/// Absolute tolerance on `max |p(w) - log w|` over off-grid collocation
/// checks; solves that cannot reach it are reported as failures.
const RESIDUAL_TOL: f64 = 1e-8;
/// Relative width at which the endpoint bisection stops.
const ENDPOINT_TOL: f64 = 5e-11;

/// `log|(sqrt w + sqrt t)/(sqrt w - sqrt t)|`, the Green function of
/// the plane slit along the closed negative reals. Symmetric, zero on
/// the boundary, `+inf` on the diagonal.
pub fn green_function_slit(w: &Scalar, t: &Scalar, ctx: &PrecisionContext) -> Result<Scalar> {
    if w.sign_i() <= 0 || t.sign_i() <= 0 {
        return Err(Error::Domain {
            op: "slit green function",
            detail: "both arguments must be positive".into(),
        });
    }
    if w == t {
        return Ok(ctx.wide().infinity());
    }
    let su = w.with_prec(ctx.working_bits()).sqrt()?;
    let st = t.with_prec(ctx.working_bits()).sqrt()?;
    ((&su + &st) / (su - st)).abs().ln()
}

/// Solved extremal configuration: endpoint, quadrature nodes with the
/// density of the measure against `dt`, total mass, and the residual of
/// the boundary condition on an off-grid check set.
#[derive(Clone, Debug)]
pub struct GreenPotentialSolution {
    pub a: Scalar,
    pub b: Scalar,
    pub node_count: usize,
    pub total_mass: Scalar,
    pub residual: Scalar,
    /// Collocation nodes mapped back to `[b, a]`, ascending.
    pub nodes: Vec<Scalar>,
    /// `d nu / dt` at each node, non-negative.
    pub density: Vec<Scalar>,
    /// Basis coefficients of the smooth density factor, kept for
    /// evaluation of the potential anywhere on `(0, inf)`.
    coeffs: Vec<Scalar>,
    beta: Scalar,
    cap: Scalar,
    bits: u32,
}

#[derive(Serialize)]
struct SolutionJson {
    a: f64,
    b: f64,
    node_count: usize,
    total_mass: f64,
    residual: f64,
    nodes: Vec<f64>,
    density: Vec<f64>,
}

impl GreenPotentialSolution {
    /// Potential of the solved measure at any `w > 0`: closed form
    /// interior or exterior Chebyshev sums, no quadrature.
    pub fn eval(&self, w: &Scalar) -> Result<Scalar> {
        if w.sign_i() <= 0 {
            return Err(Error::Domain {
                op: "potential eval",
                detail: "w must be positive".into(),
            });
        }
        let u = w.with_prec(self.bits).sqrt()?;
        let m = (&self.beta + &self.cap) / self.real(2);
        let r = (&self.cap - &self.beta) / self.real(2);
        let x = (&u - &m) / &r;
        let xt = ((u + m) / &r).neg();
        let dx = log_columns(&x, self.coeffs.len() - 1)?;
        let dt = log_columns(&xt, self.coeffs.len() - 1)?;
        let mut acc = Scalar::from(Float::with_val(self.bits, 0));
        for (k, c) in self.coeffs.iter().enumerate() {
            let col = &dt[k] - &dx[k];
            acc = acc + c * &col;
        }
        let pi = Scalar::from(Float::with_val(self.bits, rug::float::Constant::Pi));
        Ok(acc * r * pi)
    }

    fn real(&self, v: i64) -> Scalar {
        Scalar::from(Float::with_val(self.bits, v))
    }

    pub fn to_json(&self) -> Result<String> {
        let body = SolutionJson {
            a: self.a.to_f64(),
            b: self.b.to_f64(),
            node_count: self.node_count,
            total_mass: self.total_mass.to_f64(),
            residual: self.residual.to_f64(),
            nodes: self.nodes.iter().map(Scalar::to_f64).collect(),
            density: self.density.iter().map(Scalar::to_f64).collect(),
        };
        Ok(serde_json::to_string_pretty(&body)?)
    }
}

/// First kind Chebyshev values `T_0(x) .. T_n(x)`.
fn chebyshev_row(x: &Scalar, n: usize) -> Vec<Scalar> {
    let bits = x.prec();
    let mut out = Vec::with_capacity(n + 1);
    out.push(Scalar::from(Float::with_val(bits, 1)));
    if n == 0 {
        return out;
    }
    out.push(x.clone());
    let two = Scalar::from(Float::with_val(bits, 2));
    for k in 2..=n {
        let next = &(&two * x) * &out[k - 1] - &out[k - 2];
        out.push(next);
    }
    out
}

/// `(1/pi) int log|x - y| T_j(y)/sqrt(1 - y^2) dy` for `j = 0..=n`,
/// interior and exterior closed forms switched on `|x|`.
fn log_columns(x: &Scalar, n: usize) -> Result<Vec<Scalar>> {
    let bits = x.prec();
    let one = Scalar::from(Float::with_val(bits, 1));
    let two = Scalar::from(Float::with_val(bits, 2));
    let mut out = Vec::with_capacity(n + 1);
    if x.abs() <= one {
        let t = chebyshev_row(x, n);
        out.push(two.ln()?.neg());
        for (j, tj) in t.into_iter().enumerate().skip(1) {
            out.push((tj / Scalar::from(Float::with_val(bits, j as i64))).neg());
        }
    } else {
        // x = (z + 1/z)/2 with |z| > 1; the root on x's side of zero.
        let s = (x.square() - &one).sqrt()?;
        let z = if x.sign_i() > 0 { x + &s } else { x - &s };
        out.push((z.abs() / &two).ln()?);
        let zinv = z.recip()?;
        let mut pw = zinv.clone();
        for j in 1..=n {
            out.push((&pw / &Scalar::from(Float::with_val(bits, j as i64))).neg());
            pw = pw * &zinv;
        }
    }
    Ok(out)
}

/// Dense LU with partial pivoting.
fn lu_solve(mut a: Vec<Vec<Scalar>>, mut b: Vec<Scalar>) -> Result<Vec<Scalar>> {
    let n = a.len();
    for col in 0..n {
        let mut piv = col;
        for row in (col + 1)..n {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].is_zero() {
            return Err(Error::Singular("collocation matrix".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            if a[row][col].is_zero() {
                continue;
            }
            let f = &a[row][col] / &a[col][col];
            for k in (col + 1)..n {
                let t = &f * &a[col][k];
                a[row][k] = &a[row][k] - &t;
            }
            let t = &f * &b[col];
            b[row] = &b[row] - &t;
        }
    }
    let mut x = b;
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let t = &a[i][k] * &x[k];
            x[i] = &x[i] - &t;
        }
        x[i] = &x[i] / &a[i][i];
    }
    Ok(x)
}

/// Collocation solve at a fixed trial endpoint. Returns the basis
/// coefficients; the common factor `pi r` is folded into the right hand
/// side, so the total mass is `pi r c_0`.
fn solve_at(beta: &Scalar, cap: &Scalar, n: usize, bits: u32) -> Result<Vec<Scalar>> {
    let two = Scalar::from(Float::with_val(bits, 2));
    let pi = Scalar::from(Float::with_val(bits, rug::float::Constant::Pi));
    let m = (beta + cap) / &two;
    let r = (cap - beta) / &two;
    let scale = (&pi * &r).recip()?;

    let mut mat = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let theta = &pi * &Scalar::from(Float::with_val(bits, 2 * i as i64 + 1))
            / Scalar::from(Float::with_val(bits, 2 * n as i64));
        let x = theta.cos();
        let u = &m + &(&r * &x);
        let xt = ((&u + &m) / &r).neg();
        let dx = log_columns(&x, n - 1)?;
        let dt = log_columns(&xt, n - 1)?;
        let mut row = Vec::with_capacity(n);
        for k in 0..n {
            row.push(&dt[k] - &dx[k]);
        }
        mat.push(row);
        rhs.push(&two * &u.ln()? * &scale);
    }
    lu_solve(mat, rhs)
}

/// Edge value `h(-1)` of the smooth density factor; its sign drives the
/// endpoint search. `T_k(-1) = (-1)^k`.
fn edge_coefficient(coeffs: &[Scalar]) -> Scalar {
    let bits = coeffs.first().map(|c| c.prec()).unwrap_or(64);
    let mut acc = Scalar::from(Float::with_val(bits, 0));
    for (k, c) in coeffs.iter().enumerate() {
        if k % 2 == 0 {
            acc = acc + c;
        } else {
            acc = acc - c;
        }
    }
    acc
}

/// Solve the extremal problem on `[b, a]` with `b` free. `a > 1`,
/// `node_count >= 50`.
pub fn solve_extremal(
    a: &Scalar,
    node_count: usize,
    ctx: &PrecisionContext,
) -> Result<GreenPotentialSolution> {
    let bits = ctx.working_bits();
    let one = Scalar::from(Float::with_val(bits, 1));
    if !a.is_finite() || *a <= one {
        return Err(Error::Param {
            name: "extremal endpoint",
            detail: format!("need a > 1, got {}", a.to_decimal(8)),
        });
    }
    if node_count < 50 {
        return Err(Error::Param {
            name: "node count",
            detail: format!("need at least 50 nodes, got {}", node_count),
        });
    }
    let cap = a.with_prec(bits).sqrt()?;
    let n = node_count;

    // Bracket the endpoint by scanning for the sign change of the edge
    // coefficient, then bisect. Too small a trial endpoint drives the
    // density negative at the edge.
    let edge_at = |beta: &Scalar| -> Result<(Vec<Scalar>, i32)> {
        let c = solve_at(beta, &cap, n, bits)?;
        let sign = edge_coefficient(&c).sign_i();
        Ok((c, sign))
    };
    let scan = 24usize;
    let lo_frac = 0.02f64;
    let hi_frac = 0.995f64;
    let step = (hi_frac / lo_frac).powf(1.0 / (scan - 1) as f64);
    let mut bracket: Option<(Scalar, Scalar)> = None;
    let mut prev: Option<(Scalar, i32)> = None;
    for k in 0..scan {
        let frac = lo_frac * step.powi(k as i32);
        let beta = &cap * &Scalar::from(Float::with_val(bits, frac));
        let (_, sign) = edge_at(&beta)?;
        if let Some((pb, ps)) = prev.take() {
            if ps < 0 && sign >= 0 {
                bracket = Some((pb, beta.clone()));
                break;
            }
        }
        prev = Some((beta, sign));
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| Error::Convergence {
        stage: "endpoint bracket",
        iterations: scan,
        detail: "edge coefficient never changes sign on the scan grid".into(),
    })?;

    let tol = Scalar::from(Float::with_val(bits, ENDPOINT_TOL));
    let two = Scalar::from(Float::with_val(bits, 2));
    let mut iterations = 0usize;
    while {
        let width = &hi - &lo;
        let mid = (&hi + &lo) / &two;
        width > &tol * &mid
    } {
        iterations += 1;
        if iterations > 200 {
            return Err(Error::Convergence {
                stage: "endpoint bisection",
                iterations,
                detail: "bracket failed to shrink".into(),
            });
        }
        let mid = (&hi + &lo) / &two;
        let (_, sign) = edge_at(&mid)?;
        if sign < 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = (&hi + &lo) / &two;
    let coeffs = solve_at(&beta, &cap, n, bits)?;

    let pi = Scalar::from(Float::with_val(bits, rug::float::Constant::Pi));
    let m = (&beta + &cap) / &two;
    let r = (&cap - &beta) / &two;
    let total_mass = &(&pi * &r) * &coeffs[0];

    let mut sol = GreenPotentialSolution {
        a: ctx.round(a),
        b: beta.square(),
        node_count: n,
        total_mass,
        residual: ctx.zero(),
        nodes: Vec::with_capacity(n),
        density: Vec::with_capacity(n),
        coeffs,
        beta: beta.clone(),
        cap,
        bits,
    };

    // Boundary residual on an off-grid check set.
    let checks = 2 * n;
    let mut worst = Scalar::from(Float::with_val(bits, 0));
    for i in 0..checks {
        let theta = &pi * &Scalar::from(Float::with_val(bits, 3 * i as i64 + 1))
            / Scalar::from(Float::with_val(bits, 3 * checks as i64));
        let u = &m + &(&r * &theta.cos());
        let w = u.square();
        let gap = (sol.eval(&w)? - w.ln()?).abs();
        worst = worst.max(&gap);
    }
    sol.residual = worst;
    if sol.residual.to_f64() > RESIDUAL_TOL {
        return Err(Error::Convergence {
            stage: "boundary collocation",
            iterations: n,
            detail: format!(
                "residual {:.3e} above {:.0e}; raise the node count",
                sol.residual.to_f64(),
                RESIDUAL_TOL
            ),
        });
    }

    // Nodes and density of the measure against dt, ascending in t.
    let mut min_h = Scalar::from(Float::with_val(bits, 0));
    let mut max_h = Scalar::from(Float::with_val(bits, 0));
    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let theta = &pi * &Scalar::from(Float::with_val(bits, 2 * i as i64 + 1))
            / Scalar::from(Float::with_val(bits, 2 * n as i64));
        let y = theta.cos();
        let v = chebyshev_row(&y, n - 1);
        let mut h = Scalar::from(Float::with_val(bits, 0));
        for (c, vk) in sol.coeffs.iter().zip(&v) {
            h = h + c * vk;
        }
        min_h = min_h.min(&h);
        max_h = max_h.max(&h);
        let s = &m + &(&r * &y);
        let weight = (&one - &y.square()).sqrt()?.recip()?;
        let dens = &(&h * &weight) / &(&two * &s);
        pairs.push((s.square(), dens));
    }
    let floor = &max_h * &Scalar::from(Float::with_val(bits, -1e-6));
    if min_h < floor {
        return Err(Error::Convergence {
            stage: "density positivity",
            iterations: n,
            detail: format!("density factor dips to {:.3e}", min_h.to_f64()),
        });
    }
    pairs.reverse();
    for (t, dens) in pairs {
        sol.nodes.push(t);
        sol.density.push(dens.max(&ctx.zero()));
    }
    Ok(sol)
}

/// Rescaling constants tying a minimax error to the extremal problem:
/// `a = |4 sin(pi alpha) / epsilon|^{1/alpha}` and
/// `c = |4 sin(pi alpha)|^{1/alpha}`.
pub fn comparison_scale(
    alpha: &Scalar,
    epsilon: &Scalar,
    ctx: &PrecisionContext,
) -> Result<(Scalar, Scalar)> {
    if alpha.sign_i() <= 0 || alpha.floor() == *alpha {
        return Err(Error::Param {
            name: "comparison alpha",
            detail: format!(
                "need a positive non-integer exponent, got {}",
                alpha.to_decimal(8)
            ),
        });
    }
    if epsilon.sign_i() <= 0 {
        return Err(Error::Param {
            name: "comparison epsilon",
            detail: "need a positive error".into(),
        });
    }
    let wide = ctx.wide();
    let bits = wide.precision_bits();
    let al = alpha.with_prec(bits);
    let inv = al.recip()?;
    let four_sin = (Scalar::from(Float::with_val(bits, 4)) * (&al * &wide.pi()).sin()).abs();
    let c = four_sin.pow_real(&inv)?;
    let a = (&four_sin / &epsilon.with_prec(bits)).abs().pow_real(&inv)?;
    Ok((a, c))
}

/// `-alpha p_a(c w)` with `a`, `c` from [`comparison_scale`]; `sol`
/// must be a solution at that `a`.
pub fn comparison_potential(
    alpha: &Scalar,
    epsilon: &Scalar,
    w: &Scalar,
    sol: &GreenPotentialSolution,
    ctx: &PrecisionContext,
) -> Result<Scalar> {
    let (a, c) = comparison_scale(alpha, epsilon, ctx)?;
    let rel = ((&a - &sol.a) / &a).abs();
    if rel.to_f64() > 1e-8 {
        return Err(Error::Param {
            name: "comparison solution",
            detail: format!(
                "solution endpoint {} does not match required {}",
                sol.a.to_decimal(10),
                a.to_decimal(10)
            ),
        });
    }
    let p = sol.eval(&(&c * w))?;
    Ok((alpha * &p).neg())
}

/// One row of the endpoint and mass scaling study.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LimitRow {
    pub a: f64,
    pub b: f64,
    /// `|b - sqrt 2|`.
    pub endpoint_gap: f64,
    /// `(1/a) exp(pi sqrt(2 mass))`.
    pub scaled_growth: f64,
    /// `|scaled_growth - 4|`.
    pub growth_gap: f64,
    pub total_mass: f64,
}

/// Solve the ladder of endpoints and tabulate the two expected limits:
/// `b` falling to `sqrt 2` and the scaled growth approaching 4. The
/// monotonicity itself is the caller's check.
pub fn verify_limits(
    a_values: &[Scalar],
    node_count: usize,
    ctx: &PrecisionContext,
) -> Result<Vec<LimitRow>> {
    if a_values.is_empty() {
        return Err(Error::Param {
            name: "ladder",
            detail: "no endpoints given".into(),
        });
    }
    for pair in a_values.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::Param {
                name: "ladder",
                detail: "endpoints must be strictly increasing".into(),
            });
        }
    }
    let bits = ctx.working_bits();
    let sqrt2 = Scalar::from(Float::with_val(bits, 2)).sqrt()?;
    let pi = Scalar::from(Float::with_val(bits, rug::float::Constant::Pi));
    let mut rows = Vec::with_capacity(a_values.len());
    for a in a_values {
        let sol = solve_extremal(a, node_count, ctx)?;
        let doubled = &sol.total_mass + &sol.total_mass;
        let growth = (&pi * &doubled.sqrt()?).exp() / a.with_prec(bits);
        let four = Scalar::from(Float::with_val(bits, 4));
        rows.push(LimitRow {
            a: a.to_f64(),
            b: sol.b.to_f64(),
            endpoint_gap: (&sol.b - &sqrt2).abs().to_f64(),
            scaled_growth: growth.to_f64(),
            growth_gap: (growth - four).abs().to_f64(),
            total_mass: sol.total_mass.to_f64(),
        });
    }
    Ok(rows)
}

/// CSV form of the ladder table.
pub fn limits_to_csv(rows: &[LimitRow]) -> String {
    let mut out = String::from("a,b,endpoint_gap,scaled_growth,growth_gap,total_mass\n");
    for r in rows {
        out.push_str(&format!(
            "{:.6e},{:.12e},{:.6e},{:.12e},{:.6e},{:.12e}\n",
            r.a, r.b, r.endpoint_gap, r.scaled_growth, r.growth_gap, r.total_mass
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(128).unwrap()
    }

    fn shared_solution() -> &'static GreenPotentialSolution {
        static SOLVED: OnceLock<GreenPotentialSolution> = OnceLock::new();
        SOLVED.get_or_init(|| {
            let c = ctx();
            solve_extremal(&c.from_i64(100), 56, &c).unwrap()
        })
    }

    #[test]
    fn green_function_closed_form() {
        let c = ctx();
        let g = green_function_slit(&c.from_i64(4), &c.one(), &c).unwrap();
        let three = c.from_i64(3);
        assert!((g - three.ln().unwrap()).abs().to_f64() < 1e-35);

        for (w, t) in [(0.3, 2.0), (5.0, 0.7), (9.0, 11.0)] {
            let w = c.from_f64(w);
            let t = c.from_f64(t);
            let wt = green_function_slit(&w, &t, &c).unwrap();
            let tw = green_function_slit(&t, &w, &c).unwrap();
            assert!((wt - tw).abs().to_f64() < 1e-35);
        }

        let near_edge = green_function_slit(&c.from_f64(1e-30), &c.one(), &c).unwrap();
        assert!(near_edge.to_f64() < 1e-14);

        let diag = green_function_slit(&c.one(), &c.one(), &c).unwrap();
        assert!(!diag.is_finite());
        assert!(green_function_slit(&c.from_i64(-1), &c.one(), &c).is_err());
    }

    #[test]
    fn closed_form_matches_quadrature() {
        // Evaluate the solved potential below the support directly from
        // the density by midpoint quadrature in the mapped variable and
        // compare against the closed form evaluation.
        let c = ctx();
        let sol = shared_solution();
        let bits = c.working_bits();
        let two = c.from_i64(2).with_prec(bits);
        let m = (&sol.beta + &sol.cap) / &two;
        let r = (&sol.cap - &sol.beta) / &two;
        let pi = Scalar::from(Float::with_val(bits, rug::float::Constant::Pi));
        let w = &sol.b / &two;
        let u = w.sqrt().unwrap();

        let q = 4000usize;
        let mut acc = c.zero().with_prec(bits);
        for i in 0..q {
            let theta = &pi * &Scalar::from(Float::with_val(bits, 2 * i as i64 + 1))
                / Scalar::from(Float::with_val(bits, 2 * q as i64));
            let y = theta.cos();
            let v = chebyshev_row(&y, sol.coeffs.len() - 1);
            let mut h = c.zero().with_prec(bits);
            for (ck, vk) in sol.coeffs.iter().zip(&v) {
                h = h + ck * vk;
            }
            let s = &m + &(&r * &y);
            let kernel = ((&u + &s) / (&u - &s)).abs().ln().unwrap();
            acc = acc + &h * &kernel;
        }
        let direct = &(&acc * &(&pi * &r)) / &Scalar::from(Float::with_val(bits, q as i64));
        let closed = sol.eval(&w).unwrap();
        assert!(
            (&direct - &closed).abs().to_f64() < 1e-9,
            "direct {} vs closed {}",
            direct.to_f64(),
            closed.to_f64()
        );
    }

    #[test]
    fn extremal_solution_shape() {
        let c = ctx();
        let sol = shared_solution();
        assert!(sol.b.to_f64() > 1.0 && sol.b < sol.a);
        assert!(sol.residual.to_f64() <= RESIDUAL_TOL);
        assert!(sol.total_mass.sign_i() > 0);
        assert_eq!(sol.nodes.len(), sol.node_count);
        assert!(sol.density.iter().all(|d| d.sign_i() >= 0));
        assert!(sol
            .nodes
            .windows(2)
            .all(|p| p[0] < p[1]));

        // Strictly above log w below the support.
        for frac in [0.1, 0.5, 0.9, 0.999] {
            let w = &sol.b * &c.from_f64(frac);
            let gap = sol.eval(&w).unwrap() - w.ln().unwrap();
            assert!(gap.to_f64() > 0.0, "no slack at {} b", frac);
        }

        // Non-negative potential on both sides of the support.
        for w in [1e-6, 0.3, 1.0, 150.0, 1e4] {
            let p = sol.eval(&c.from_f64(w)).unwrap();
            assert!(p.to_f64() >= -1e-12, "negative potential at {}", w);
        }
    }

    #[test]
    fn debug_ladder_tmp() {
        let c = ctx();
        let rows =
            verify_limits(&[c.from_i64(100), c.from_i64(1000)], 56, &c).unwrap();
        for r in &rows {
            println!(
                "a={:.0} b={:.10} egap={:.6e} growth={:.10} ggap={:.6e} mass={:.10}",
                r.a, r.b, r.endpoint_gap, r.scaled_growth, r.growth_gap, r.total_mass
            );
        }
    }

    #[test]
    fn endpoint_and_mass_limits() {
        let c = ctx();
        let rows = verify_limits(&[c.from_i64(100), c.from_i64(1000)], 56, &c).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].endpoint_gap < rows[0].endpoint_gap);
        assert!(rows[1].growth_gap < rows[0].growth_gap);
        assert!(rows[1].total_mass > rows[0].total_mass);
        assert!(rows.iter().all(|r| r.b > 2f64.sqrt()));

        let csv = limits_to_csv(&rows);
        assert!(csv.starts_with("a,b,"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn node_doubling_pins_endpoint() {
        let c = ctx();
        let coarse = shared_solution();
        let fine = solve_extremal(&c.from_i64(100), 112, &c).unwrap();
        let rel = (&coarse.b - &fine.b).abs() / &fine.b;
        assert!(rel.to_f64() < 1e-4, "endpoint drift {}", rel.to_f64());
    }

    #[test]
    fn comparison_rescaling() {
        let c = ctx();
        let half = c.from_rational(&rug::Rational::from((1, 2)));
        let eps = c.from_f64(0.4);
        let (a, cc) = comparison_scale(&half, &eps, &c).unwrap();
        assert!((a.to_f64() - 100.0).abs() < 1e-20);
        assert!((cc.to_f64() - 16.0).abs() < 1e-20);
        assert!(comparison_scale(&c.one(), &eps, &c).is_err());
        assert!(comparison_scale(&half, &c.zero(), &c).is_err());

        // On the equality region the comparison potential is
        // -alpha log(c w).
        let sol = shared_solution();
        let w = c.from_f64(50.0 / 16.0);
        let p = comparison_potential(&half, &eps, &w, sol, &c).unwrap();
        let expect = (&half * &(&cc * &w).ln().unwrap()).neg();
        assert!((p - expect).abs().to_f64() < 1e-7);

        // Mismatched solution endpoint is rejected.
        let wrong_eps = c.from_f64(0.5);
        assert!(comparison_potential(&half, &wrong_eps, &w, sol, &c).is_err());
    }

    #[test]
    fn solution_serializes() {
        let sol = shared_solution();
        let json = sol.to_json().unwrap();
        for key in [
            "\"a\"",
            "\"b\"",
            "\"node_count\"",
            "\"total_mass\"",
            "\"residual\"",
            "\"nodes\"",
            "\"density\"",
        ] {
            assert!(json.contains(key), "missing {}", key);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let c = ctx();
        assert!(solve_extremal(&c.one(), 56, &c).is_err());
        assert!(solve_extremal(&c.from_i64(100), 10, &c).is_err());
        assert!(verify_limits(&[c.from_i64(100), c.from_i64(50)], 56, &c).is_err());
    }
}
