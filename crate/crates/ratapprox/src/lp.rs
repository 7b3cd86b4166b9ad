//! Small dense linear programs for the discrete oracle.
//!
//! Solves `min c.x` subject to `A x <= b`, `x >= 0` by the tableau
//! simplex. Rows with negative right-hand side get artificial variables
//! and a phase-1 feasibility solve first; when every right-hand side is
//! non-negative the slack basis starts phase 2 directly. Double
//! precision throughout: the oracle validates structure, not digits, and
//! its tolerances sit far above f64 noise.
//!
//! Reduced costs are re-derived from the cost vector and the current
//! basis on every iteration instead of being carried incrementally; an
//! incrementally updated objective row drifts once a small pivot scales
//! roundoff into it, and a drifted entry can fake an unbounded ray.

use crate::{Error, Result};

const EPS: f64 = 1e-11;
/// Entries at or below this never pivot; dividing a row by a smaller
/// value amplifies its noise past the data scale.
const PIV_EPS: f64 = 1e-8;
/// A column with no usable pivot row only certifies a ray when its
/// reduced cost is decisively negative and the column is nonpositive;
/// anything milder is treated as numerically unusable instead.
const UNBOUNDED_EPS: f64 = 1e-6;
const MAX_PIVOTS: usize = 50_000;

pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    /// rows x (rhs + 1) matrix; column `rhs` is the right-hand side.
    a: Vec<Vec<f64>>,
    /// basis[i] = column currently basic in row i.
    basis: Vec<usize>,
    /// Columns eligible for pricing (artificials sit past this bound and
    /// never re-enter).
    cols: usize,
    rhs: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.a[row].clone();
        for (i, r) in self.a.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// costs[j] - y . A_j for every column, derived fresh from the basis.
    fn reduced_row(&self, costs: &[f64]) -> Vec<f64> {
        let mut red = costs.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = costs[b];
            if cb != 0.0 {
                for (v, av) in red.iter_mut().zip(&self.a[i]) {
                    *v -= cb * av;
                }
            }
        }
        red
    }

    /// Minimize `costs . x` with most-negative-cost pricing and a
    /// largest-pivot tie-break on the ratio test. Returns the objective.
    fn run(&mut self, costs: &[f64], stage: &'static str) -> Result<f64> {
        let mut banned = vec![false; self.cols];
        for _ in 0..MAX_PIVOTS {
            let red = self.reduced_row(costs);
            let mut col = None;
            let mut best = -EPS;
            for j in 0..self.cols {
                if !banned[j] && red[j] < best {
                    best = red[j];
                    col = Some(j);
                }
            }
            let Some(col) = col else {
                return Ok(-red[self.rhs]);
            };
            let mut leave: Option<(usize, f64, f64)> = None;
            for (i, r) in self.a.iter().enumerate() {
                if r[col] > PIV_EPS {
                    let ratio = r[self.rhs] / r[col];
                    let better = match leave {
                        None => true,
                        Some((_, br, bp)) => {
                            let tol = 1e-9 * (1.0 + br.abs());
                            ratio < br - tol || (ratio < br + tol && r[col] > bp)
                        }
                    };
                    if better {
                        leave = Some((i, ratio, r[col]));
                    }
                }
            }
            let Some((row, _, _)) = leave else {
                let colmax = self
                    .a
                    .iter()
                    .map(|r| r[col])
                    .fold(f64::NEG_INFINITY, f64::max);
                if best < -UNBOUNDED_EPS && colmax <= EPS {
                    return Err(Error::Singular(format!("{stage}: unbounded LP")));
                }
                banned[col] = true;
                continue;
            };
            self.pivot(row, col);
        }
        Err(Error::Convergence {
            stage: "simplex",
            iterations: MAX_PIVOTS,
            detail: "pivot budget exhausted".into(),
        })
    }
}

/// `min c.x` s.t. `rows[i].0 . x <= rows[i].1`, `x >= 0`.
pub fn solve_leq(c: &[f64], rows: &[(Vec<f64>, f64)]) -> Result<LpSolution> {
    let nvar = c.len();
    let nrow = rows.len();
    let nslack = nrow;
    let nart = rows.iter().filter(|r| r.1 < 0.0).count();
    let cols = nvar + nslack + nart;

    let mut a = Vec::with_capacity(nrow);
    let mut basis = Vec::with_capacity(nrow);
    let mut art_seen = 0;
    for (i, (coeffs, b)) in rows.iter().enumerate() {
        debug_assert_eq!(coeffs.len(), nvar);
        let mut r = vec![0.0; cols + 1];
        let flip = if *b < 0.0 { -1.0 } else { 1.0 };
        for (j, v) in coeffs.iter().enumerate() {
            r[j] = flip * v;
        }
        r[nvar + i] = flip; // slack
        r[cols] = flip * b;
        if *b < 0.0 {
            r[nvar + nslack + art_seen] = 1.0;
            basis.push(nvar + nslack + art_seen);
            art_seen += 1;
        } else {
            basis.push(nvar + i);
        }
        a.push(r);
    }
    let mut t = Tableau {
        a,
        basis,
        cols: nvar + nslack,
        rhs: cols,
    };

    if nart > 0 {
        // Phase 1: drive the artificial mass to zero.
        let mut costs = vec![0.0; cols + 1];
        for j in nvar + nslack..cols {
            costs[j] = 1.0;
        }
        let infeas = t.run(&costs, "phase 1")?;
        if infeas.abs() > 1e-7 {
            return Err(Error::Singular(format!(
                "infeasible LP (residual {infeas:.3e})"
            )));
        }
        // Pivot any artificial still basic (at zero level) out if possible.
        for i in 0..t.basis.len() {
            if t.basis[i] >= nvar + nslack {
                if let Some(col) = (0..nvar + nslack).find(|&j| t.a[i][j].abs() > PIV_EPS) {
                    t.pivot(i, col);
                }
            }
        }
    }

    // Phase 2: the real objective.
    let mut costs = vec![0.0; cols + 1];
    costs[..nvar].copy_from_slice(c);
    let _ = t.run(&costs, "phase 2")?;

    let mut x = vec![0.0; nvar];
    for (i, &bcol) in t.basis.iter().enumerate() {
        if bcol < nvar {
            x[bcol] = t.a[i][cols];
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, objective })
}
