//! Independent discrete minimax oracle.
//!
//! Validates the exchange engine on small instances without sharing any
//! of its machinery: best approximation is recomputed on a fixed grid by
//! linear programming (polynomial case) and by differential correction
//! (rational case), both driving the LP solver in [`crate::lp`]. The
//! discrete optimum is a lower bound on the continuous error and
//! converges to it as the grid refines, so engine and oracle must agree
//! to modest relative tolerance at small degrees.
//!
//! Function values and the returned error are computed at a fixed 128
//! bits; the inner LPs run in double precision over box-normalized
//! monomial coefficients. The oracle validates structure, not digits.

use crate::lp::solve_leq;
use crate::precision::{PrecisionContext, Scalar};
use crate::target::Target;
use crate::{Error, Result};

const ORACLE_BITS: u32 = 128;

/// Evaluation grid adapted to power targets: half uniform, half spread
/// geometrically toward the singular point so boundary-layer alternants
/// are visible. Symmetric domains mirror the positive half.
pub fn oracle_grid(target: &Target, size: usize, bits: u32) -> Result<Vec<Scalar>> {
    let ctx = PrecisionContext::with_guard(bits, 0)?;
    let mut pts: Vec<Scalar> = Vec::with_capacity(size + 3);
    let positive_size = if target.is_even() { size / 2 } else { size };
    let uni = positive_size / 2;
    let geo = positive_size - uni;
    pts.push(ctx.zero());
    for i in 1..=uni {
        pts.push(ctx.from_f64(i as f64 / uni as f64));
    }
    // Geometric part from 1e-10 up to 1.
    let lo_exp = -10.0f64;
    for i in 0..geo {
        let e = lo_exp * (1.0 - i as f64 / geo as f64);
        pts.push(ctx.from_f64(10f64.powf(e)));
    }
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    if target.is_even() {
        let mut sym: Vec<Scalar> = pts.iter().skip(1).map(|x| -x).collect();
        sym.reverse();
        sym.extend(pts);
        pts = sym;
    }
    Ok(pts)
}

/// Discrete best polynomial approximation error of degree `m` on the
/// grid: the exact optimum of `min t` with `|f(x_i) - p(x_i)| <= t`.
pub fn discrete_minimax_poly(target: &Target, m: usize, grid_size: usize) -> Result<Scalar> {
    if grid_size < 10 * (m + 2) {
        return Err(Error::Param {
            name: "grid_size",
            detail: format!("need at least {} points for degree {m}", 10 * (m + 2)),
        });
    }
    let grid = oracle_grid(target, grid_size, ORACLE_BITS)?;
    let fvals: Vec<Scalar> = grid
        .iter()
        .map(|x| target.eval(x))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = grid.iter().map(|x| x.to_f64()).collect();
    let fs: Vec<f64> = fvals.iter().map(|f| f.to_f64()).collect();

    // Variables: split coefficients a_j = a+ - a-, then t. Constraints
    //   +/- (p(x_i) - f_i) <= t
    // over an active subset of the grid, growing rows by pricing; the
    // full tableau over 1e4 points would be needlessly quadratic.
    let nc = m + 1;
    let nvar = 2 * nc + 1;
    let mut c = vec![0.0; nvar];
    c[nvar - 1] = 1.0;
    let grid_row = |i: usize, sign: f64| -> (Vec<f64>, f64) {
        let mut r = vec![0.0; nvar];
        let mut xp = 1.0;
        for j in 0..nc {
            r[j] = sign * xp;
            r[nc + j] = -sign * xp;
            xp *= xs[i];
        }
        r[nvar - 1] = -1.0;
        (r, sign * fs[i])
    };
    let stride = (xs.len() / (8 * (m + 2))).max(1);
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    for i in (0..xs.len()).step_by(stride) {
        rows.push(grid_row(i, 1.0));
        rows.push(grid_row(i, -1.0));
        active.push(i);
    }
    let mut coeffs = vec![0.0; nc];
    let mut solved = false;
    for _round in 0..60 {
        let sol = solve_leq(&c, &rows)?;
        for (j, cj) in coeffs.iter_mut().enumerate() {
            *cj = sol.x[j] - sol.x[nc + j];
        }
        // Cutting-plane stop: the achieved maximum over the active points
        // bounds the discrete optimum from below, the full-grid maximum
        // from above; a pinched gap certifies the subset solution.
        let sub = active
            .iter()
            .map(|&i| (horner(&coeffs, xs[i]) - fs[i]).abs())
            .fold(0.0, f64::max);
        let stop = sub * (1.0 + 1e-7) + 1e-12;
        let mut cand: Vec<(usize, f64, f64)> = Vec::new();
        for i in 0..xs.len() {
            let d = horner(&coeffs, xs[i]) - fs[i];
            if d.abs() > stop {
                cand.push((i, d.signum(), d.abs() - sub));
            }
        }
        if cand.is_empty() {
            solved = true;
            break;
        }
        for (i, s) in pick_spread(cand, (xs.len() / 400).max(1), 8) {
            rows.push(grid_row(i, s));
            active.push(i);
        }
    }
    if !solved {
        return Err(Error::Convergence {
            stage: "discrete polynomial minimax",
            iterations: 60,
            detail: "active set kept growing".into(),
        });
    }

    // Report the achieved maximum at oracle precision, not the f64 LP
    // objective: the two differ only by LP roundoff but this keeps the
    // returned Scalar consistent with the coefficients.
    let ctx = PrecisionContext::with_guard(ORACLE_BITS, 0)?;
    let mut worst = ctx.zero();
    for (x, f) in grid.iter().zip(&fvals) {
        let mut p = ctx.zero();
        for cj in coeffs.iter().rev() {
            p = &p * x + ctx.from_f64(*cj);
        }
        let d = (f - &p).abs();
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// Discrete best rational approximation error of type `(m, n)` on the
/// grid, by differential correction: repeatedly minimize
/// `max_i |f_i q(x_i) - p(x_i)| - delta q(x_i)` over box-normalized
/// coefficients; the level `delta` decreases to the discrete optimum.
pub fn discrete_minimax_rational(
    target: &Target,
    m: usize,
    n: usize,
    grid_size: usize,
) -> Result<Scalar> {
    if n == 0 {
        return discrete_minimax_poly(target, m, grid_size);
    }
    if grid_size < 10 * (m + n + 2) {
        return Err(Error::Param {
            name: "grid_size",
            detail: format!("need at least {} points", 10 * (m + n + 2)),
        });
    }
    let grid = oracle_grid(target, grid_size, ORACLE_BITS)?;
    let xs: Vec<f64> = grid.iter().map(|x| x.to_f64()).collect();
    let fvals: Vec<Scalar> = grid
        .iter()
        .map(|x| target.eval(x))
        .collect::<Result<Vec<_>>>()?;
    let fs: Vec<f64> = fvals.iter().map(|f| f.to_f64()).collect();

    let ctx = PrecisionContext::with_guard(ORACLE_BITS, 0)?;
    // Start from p = 0, q = 1.
    let mut pc = vec![0.0; m + 1];
    let mut qc = vec![0.0; n + 1];
    qc[0] = 1.0;
    let mut delta = fs.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    // The linear phase contracts by roughly (1 - min q / max q) per
    // step, which for boundary-layer denominators sits near 1; the
    // budget must cover that grind until the quadratic tail takes over.
    for _ in 0..500 {
        let (npc, nqc, u) = dc_step(&xs, &fs, m, n, delta)?;
        // q must stay positive on the grid; a sign change means the step
        // degenerated, so blend back toward the constant denominator.
        let degenerate = xs
            .iter()
            .any(|&x| horner(&nqc, x) <= 0.0);
        if degenerate {
            let reg: Vec<f64> = nqc
                .iter()
                .enumerate()
                .map(|(j, v)| if j == 0 { (v + 1.0) / 2.0 } else { v / 2.0 })
                .collect();
            if xs.iter().any(|&x| horner(&reg, x) <= 0.0) {
                return Err(Error::Convergence {
                    stage: "differential correction",
                    iterations: 0,
                    detail: "denominator degenerates on the grid".into(),
                });
            }
            qc = reg;
            pc = npc;
        } else {
            pc = npc;
            qc = nqc;
        }
        let next = max_error(&xs, &fs, &pc, &qc);
        let improved = next < delta * (1.0 - 1e-12);
        delta = delta.min(next);
        // The inner LP's optimum reaching zero certifies grid optimality.
        if u > -1e-13 || !improved {
            break;
        }
    }

    // Final error at oracle precision from the f64 coefficients.
    let mut worst = ctx.zero();
    for (x, f) in grid.iter().zip(&fvals) {
        let mut p = ctx.zero();
        for cj in pc.iter().rev() {
            p = &p * x + ctx.from_f64(*cj);
        }
        let mut q = ctx.zero();
        for cj in qc.iter().rev() {
            q = &q * x + ctx.from_f64(*cj);
        }
        let d = (f - &(&p / &q)).abs();
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

/// Worst violators first, at least `min_gap` grid indices apart so a
/// flat violation plateau does not flood the active set with duplicates.
fn pick_spread(mut cand: Vec<(usize, f64, f64)>, min_gap: usize, k: usize) -> Vec<(usize, f64)> {
    cand.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (i, s, _) in cand {
        if out.len() >= k {
            break;
        }
        if out.iter().all(|&(j, _)| i.abs_diff(j) >= min_gap) {
            out.push((i, s));
        }
    }
    out
}

fn max_error(xs: &[f64], fs: &[f64], pc: &[f64], qc: &[f64]) -> f64 {
    xs.iter()
        .zip(fs)
        .map(|(&x, &f)| (f - horner(pc, x) / horner(qc, x)).abs())
        .fold(0.0, f64::max)
}

/// One differential-correction LP:
/// `min u` s.t. `+/-(f_i q_i - p_i) - delta q_i <= u`, coefficients in
/// `[-1, 1]`. Active-set row generation: solve on a working subset, then
/// price the full grid and pull in violated rows until none remain.
fn dc_step(
    xs: &[f64],
    fs: &[f64],
    m: usize,
    n: usize,
    delta: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let np = m + 1;
    let nq = n + 1;
    // Split coefficients, then u (shifted: u = v - shift keeps rhs >= 0
    // unnecessary since grid rows have rhs 0 and boxes rhs 1).
    let nvar = 2 * (np + nq) + 2;
    let u_plus = nvar - 2;
    let u_minus = nvar - 1;
    let mut c = vec![0.0; nvar];
    c[u_plus] = 1.0;
    c[u_minus] = -1.0;

    let grid_row = |i: usize, sign: f64| -> (Vec<f64>, f64) {
        let x = xs[i];
        let f = fs[i];
        let mut r = vec![0.0; nvar];
        let mut xp = 1.0;
        for j in 0..np.max(nq) {
            if j < np {
                r[j] = -sign * xp;
                r[np + nq + j] = sign * xp;
            }
            if j < nq {
                let w = sign * f * xp - delta * xp;
                r[np + j] = w;
                r[np + nq + np + j] = -w;
            }
            xp *= x;
        }
        r[u_plus] = -1.0;
        r[u_minus] = 1.0;
        (r, 0.0)
    };

    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    // Box rows keep the problem bounded and normalize the scale.
    for j in 0..2 * (np + nq) {
        let mut r = vec![0.0; nvar];
        r[j] = 1.0;
        rows.push((r, 1.0));
    }
    // Working subset: every k-th grid point both signs.
    let stride = (xs.len() / (8 * (m + n + 2))).max(1);
    let mut active: Vec<usize> = Vec::new();
    for i in (0..xs.len()).step_by(stride) {
        rows.push(grid_row(i, 1.0));
        rows.push(grid_row(i, -1.0));
        active.push(i);
    }

    let tol = 1e-9 + 1e-6 * delta;
    for _round in 0..40 {
        let sol = solve_leq(&c, &rows)?;
        let get = |j: usize| sol.x[j] - sol.x[np + nq + j];
        let pc: Vec<f64> = (0..np).map(get).collect();
        let qc: Vec<f64> = (np..np + nq).map(get).collect();
        let lhs = |i: usize, sign: f64| {
            let q = horner(&qc, xs[i]);
            sign * (fs[i] * q - horner(&pc, xs[i])) - delta * q
        };
        // Same pinch as the polynomial path: active maximum from below,
        // full-grid maximum from above.
        let sub = active
            .iter()
            .map(|&i| lhs(i, 1.0).max(lhs(i, -1.0)))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut cand: Vec<(usize, f64, f64)> = Vec::new();
        let mut full = sub;
        for i in 0..xs.len() {
            for sign in [1.0, -1.0] {
                let v = lhs(i, sign);
                full = full.max(v);
                if v > sub + tol {
                    cand.push((i, sign, v - sub));
                }
            }
        }
        if cand.is_empty() {
            return Ok((pc, qc, full));
        }
        for (i, s) in pick_spread(cand, (xs.len() / 400).max(1), 8) {
            rows.push(grid_row(i, s));
            active.push(i);
        }
    }
    Err(Error::Convergence {
        stage: "differential correction pricing",
        iterations: 40,
        detail: "active set kept growing".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_known_constant() {
        // Best degree-0 approximation of x on [0, 1] is 1/2.
        let t = Target::pow_on_01((1, 1)).unwrap();
        let e = discrete_minimax_poly(&t, 0, 1000).unwrap();
        assert!((e.to_f64() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn poly_chebyshev_closed_form() {
        // Best degree-1 approximation of x^2 on [0, 1]: error 1/8.
        let t = Target::pow_on_01((2, 1)).unwrap();
        let e = discrete_minimax_poly(&t, 1, 2000).unwrap();
        assert!((e.to_f64() - 0.125).abs() < 1e-4);
    }

    #[test]
    fn rational_00_is_midrange() {
        let t = Target::pow_on_01((1, 2)).unwrap();
        let e = discrete_minimax_rational(&t, 0, 0, 1000).unwrap();
        assert!((e.to_f64() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn exact_representation_vanishes() {
        // x^1 with a degree-1 numerator: zero error.
        let t = Target::pow_on_01((1, 1)).unwrap();
        let e = discrete_minimax_rational(&t, 1, 0, 1000).unwrap();
        assert!(e.to_f64() < 1e-9);
    }

    #[test]
    fn sqrt_2_1_matches_engine() {
        // The discrete optimum on 1e4 points must sit within a relative
        // 5e-3 of the continuous error computed by the exchange engine.
        let t = Target::pow_on_01((1, 2)).unwrap();
        let e = discrete_minimax_rational(&t, 2, 1, 10_000).unwrap();
        let ctx = crate::precision::PrecisionContext::new(128).unwrap();
        let r = crate::remez::best_rational(&t, 2, 1, &ctx, &crate::remez::RemezOptions::default())
            .unwrap();
        let expect = r.error.to_f64();
        assert!(
            (e.to_f64() - expect).abs() / expect < 5e-3,
            "oracle {} vs engine {expect}",
            e.to_f64()
        );
    }
}
