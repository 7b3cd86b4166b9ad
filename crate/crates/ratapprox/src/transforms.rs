//! Conformal transform chain over a computed approximant.
//!
//! Starting from the best rational approximant to `x^a` on `[0, 1]` at
//! the paradiagonal degree `m = n + 1 + floor(a)`, the chain builds
//!
//! 1. the Cayley quotient `rho(z) = (z^a - r(z)) / (z^a + r(z))`,
//! 2. its rescaling `S(w) = (4 w^{2a} - 1) w^{-a} rho(e^{1/a} w) - w^{-a}`
//!    where `e` is the minimax error and `w` the blown-up variable,
//! 3. the exterior root `phi` of `64 w^{2a} phi^2 - 16 w^a S phi + 4 = 0`,
//! 4. the disc normalization `psi(phi)` with
//!    `psi(z) = z / (sin(pi a) - i cos(pi a) z)`.
//!
//! All powers use the principal branch with the cut along the closed
//! negative real axis; points on the cut evaluate to the boundary value
//! from above. The quadratic in step 3 has roots multiplying to 4 once
//! scaled by `8 w^a`, and the chain keeps the root of modulus >= 2,
//! which is single valued away from the degenerate set and conjugation
//! symmetric. For `Im w < 0` the pair is computed on the conjugate and
//! conjugated back, so `psi(conj w) = conj(psi(w))` holds by
//! construction.
//!
//! [`boundary_probe`] samples the normalized map on both real half axes
//! outside a disc of configurable radius and on the disc boundary, and
//! reports empirical sup constants for the expected decay of
//! `log|psi|`. The constants are existential: the probe reports them,
//! and the only hard guarantee checked by tests is that the sampled map
//! never vanishes.

use crate::complex::ComplexPoint;
use crate::precision::{PrecisionContext, Scalar};
use crate::remez::{Interpolant, MinimaxResult, RationalApproximant};
use crate::target::Family;
use crate::{Error, Result};
use rug::Float;
use serde::Serialize;
use std::cmp::Ordering;

/// Everything the chain needs from one converged minimax solve.
#[derive(Clone, Debug)]
pub struct TransformContext {
    alpha: Scalar,
    approx: RationalApproximant,
    epsilon: Scalar,
    radius: Scalar,
    /// `epsilon^{1/alpha}`, the rescaling factor between `z` and `w`.
    scale: Scalar,
    sin_pa: Scalar,
    cos_pa: Scalar,
    bits: u32,
    tol_bits: u32,
}

impl TransformContext {
    /// Capture a solve for transformation. Rejects targets outside the
    /// `[0, 1]` power family, integer exponents (the disc normalization
    /// degenerates when `sin(pi a) = 0`), exactly representable targets
    /// (no error scale), and degrees off the paradiagonal.
    pub fn from_result(res: &MinimaxResult, pctx: &PrecisionContext) -> Result<TransformContext> {
        if res.target.family() != Family::PowOn01 {
            return Err(Error::Param {
                name: "transform target",
                detail: "chain is defined for the [0, 1] power family".into(),
            });
        }
        if *res.target.alpha().denom() == 1 {
            return Err(Error::Param {
                name: "transform alpha",
                detail: format!("integer exponent {} degenerates the chain", res.target.alpha()),
            });
        }
        if res.exact || res.error.is_zero() {
            return Err(Error::Param {
                name: "transform error",
                detail: "zero minimax error leaves no rescaling factor".into(),
            });
        }
        let para = res.target.paradiagonal_m(res.n)?;
        if res.m != para {
            return Err(Error::Param {
                name: "transform degrees",
                detail: format!("need m = {} for n = {}, got m = {}", para, res.n, res.m),
            });
        }
        let wide = pctx.wide();
        let bits = wide.precision_bits();
        let alpha = res.target.alpha_scalar(bits);
        let epsilon = res.error.with_prec(bits);
        let scale = epsilon.pow_real(&alpha.recip()?)?;
        let pa = &alpha * &wide.pi();
        Ok(TransformContext {
            sin_pa: pa.sin(),
            cos_pa: pa.cos(),
            alpha,
            approx: res.approximant.clone(),
            epsilon,
            radius: Scalar::from(Float::with_val(bits, 4)),
            scale,
            bits,
            tol_bits: pctx.precision_bits(),
        })
    }

    /// Replace the exclusion disc radius (default 4).
    pub fn with_radius(mut self, radius: Scalar) -> Result<TransformContext> {
        if !radius.is_finite() || radius.sign_i() <= 0 {
            return Err(Error::Param {
                name: "transform radius",
                detail: format!("need a positive radius, got {}", radius.to_decimal(8)),
            });
        }
        self.radius = radius.with_prec(self.bits);
        Ok(self)
    }

    pub fn alpha(&self) -> &Scalar {
        &self.alpha
    }

    pub fn epsilon(&self) -> &Scalar {
        &self.epsilon
    }

    pub fn radius(&self) -> &Scalar {
        &self.radius
    }

    /// `epsilon^{1/alpha}`.
    pub fn scale(&self) -> &Scalar {
        &self.scale
    }

    fn real(&self, v: i64) -> Scalar {
        Scalar::from(Float::with_val(self.bits, v))
    }

    /// Cayley quotient `(z^a q(z) - p(z)) / (z^a q(z) + p(z))` of the
    /// error against the doubled target, in homogeneous form so spurious
    /// denominator zeros of `r = p/q` cannot inflate the value.
    pub fn cayley_ratio(&self, z: &ComplexPoint) -> Result<ComplexPoint> {
        let za = z.pow_real(&self.alpha)?;
        let p = interp_eval(&self.approx.num, z)?;
        let q = interp_eval(&self.approx.den, z)?;
        let zq = &za * &q;
        let den = &zq + &p;
        if den.is_zero() {
            return Err(Error::Singular(format!(
                "cayley quotient pole at z = {}",
                z.to_decimal(12)
            )));
        }
        Ok((zq - p) / den)
    }

    /// Rescaled profile `(4 w^{2a} - 1) w^{-a} rho(scale * w) - w^{-a}`.
    pub fn rescaled_ratio(&self, w: &ComplexPoint) -> Result<ComplexPoint> {
        if w.is_zero() {
            return Err(Error::Domain {
                op: "rescaled ratio",
                detail: "pole at w = 0".into(),
            });
        }
        let wa = w.pow_real(&self.alpha)?;
        // Same principal logarithm as `wa`, so this is exactly w^{2a}.
        let w2a = &wa * &wa;
        let z = ComplexPoint::from_real(self.scale.clone()) * w;
        let rho = self.cayley_ratio(&z)?;
        let one = ComplexPoint::from_real(self.real(1));
        let pre = ComplexPoint::from_real(self.real(4)) * w2a - &one;
        Ok((pre * rho - one) / wa)
    }

    /// Exterior root `phi` of the quadratic tied to the rescaled
    /// profile, and its disc normalization `psi(phi)`. The root kept is
    /// the one with `|8 w^a phi| >= 2`; ties on the degenerate set pick
    /// the `+` square root, matching continuation from large imaginary
    /// `w`. Points with `Im w < 0` go through the conjugate.
    pub fn conformal_pair(&self, w: &ComplexPoint) -> Result<(ComplexPoint, ComplexPoint)> {
        let flip = w.im().is_sign_negative() && !w.im().is_zero();
        let wu = if flip { w.conj() } else { w.clone() };
        let profile = self.rescaled_ratio(&wu)?;
        let disc = &profile * &profile - ComplexPoint::from_real(self.real(4));
        if disc.is_zero() {
            return Err(Error::Singular(format!(
                "branch point: profile^2 = 4 at w = {}",
                wu.to_decimal(12)
            )));
        }
        let s = disc.sqrt();
        let plus = &profile + &s;
        let minus = &profile - &s;
        // Moduli multiply to 4, so the larger one is always >= 2.
        let b = match plus.abs().total_cmp(&minus.abs()) {
            Ordering::Less => minus,
            _ => plus,
        };
        let wa = wu.pow_real(&self.alpha)?;
        let phi = b / (ComplexPoint::from_real(self.real(8)) * wa);
        let psi = self.disc_map(&phi)?;
        if flip {
            Ok((phi.conj(), psi.conj()))
        } else {
            Ok((phi, psi))
        }
    }

    /// Moebius normalization `z / (sin(pi a) - i cos(pi a) z)`.
    pub fn disc_map(&self, z: &ComplexPoint) -> Result<ComplexPoint> {
        let icos = ComplexPoint::new(self.real(0), self.cos_pa.clone());
        let den = ComplexPoint::from_real(self.sin_pa.clone()) - icos * z;
        if den.is_zero() {
            return Err(Error::Singular(format!(
                "disc normalization pole at z = {}",
                z.to_decimal(12)
            )));
        }
        Ok(z / &den)
    }

    /// Sample the normalized map outside the exclusion disc on both real
    /// half axes and on the disc boundary, and report the empirical sup
    /// constants for the expected decay of `log|psi|`:
    ///
    /// - negative axis: `sup |log|psi(w)|| * |w|^{2a}`,
    /// - positive axis: `sup |log|psi(w) w^a 4 sin(pi a)|| * |w|^a`,
    /// - disc boundary: `sup |log|psi(w)||`.
    ///
    /// Axis grids are `samples` points geometric on `(R, span * R]`; the
    /// boundary grid is `2 * samples` points off the real axis. Points
    /// that fail to evaluate (branch points, overflow) are skipped and
    /// counted, never interpolated over.
    pub fn boundary_probe(&self, samples: usize, span: u32) -> Result<BoundaryProbeReport> {
        if samples < 4 {
            return Err(Error::Param {
                name: "probe samples",
                detail: format!("need at least 4 per region, got {}", samples),
            });
        }
        if span < 2 {
            return Err(Error::Param {
                name: "probe span",
                detail: format!("need span >= 2 disc radii, got {}", span),
            });
        }
        let two_alpha = &self.alpha + &self.alpha;
        let four_sin = (self.real(4) * &self.sin_pa).abs();
        let rf = self.radius.to_f64();
        let inner = rf * (1.0 + 1.0 / 16.0);
        let growth = (span as f64 / (1.0 + 1.0 / 16.0)).powf(1.0 / (samples - 1) as f64);

        let mut report = BoundaryProbeReport {
            radius: rf,
            grids: GridSummary {
                negative_axis: samples,
                positive_axis: samples,
                circle: 2 * samples,
                span,
            },
            empirical_c1: 0.0,
            empirical_c2: 0.0,
            empirical_c3: 0.0,
            failures: 0,
            min_abs_psi: f64::INFINITY,
        };

        for j in 0..samples {
            let t = inner * growth.powi(j as i32);
            let tw = Scalar::from(Float::with_val(self.bits, t));

            // Negative half axis, upper boundary value.
            let w = ComplexPoint::from_real(tw.neg());
            if let Some(la) = self.log_abs_psi(&w, &mut report) {
                let weight = tw.pow_real(&two_alpha).expect("positive base");
                accumulate(&mut report.empirical_c1, la * weight, &mut report.failures);
            }

            // Positive half axis, with the growth of psi divided out.
            let w = ComplexPoint::from_real(tw.clone());
            if let Some(psi) = self.psi_checked(&w, &mut report) {
                let wa = tw.pow_real(&self.alpha).expect("positive base");
                match (psi.abs() * &wa * &four_sin).ln() {
                    Ok(l) => {
                        accumulate(&mut report.empirical_c2, l.abs() * wa, &mut report.failures)
                    }
                    Err(_) => report.failures += 1,
                }
            }
        }

        // Disc boundary, both half planes, axis points excluded.
        for j in 0..samples {
            let theta = std::f64::consts::PI * (j as f64 + 0.5) / samples as f64;
            for sgn in [1.0, -1.0] {
                let re = Scalar::from(Float::with_val(self.bits, rf * theta.cos()));
                let im = Scalar::from(Float::with_val(self.bits, sgn * rf * theta.sin()));
                let w = ComplexPoint::new(re, im);
                if let Some(la) = self.log_abs_psi(&w, &mut report) {
                    accumulate(&mut report.empirical_c3, la, &mut report.failures);
                }
            }
        }
        Ok(report)
    }

    /// `psi` at `w` if the chain evaluates to a finite nonzero value;
    /// failures are counted on the report.
    fn psi_checked(&self, w: &ComplexPoint, report: &mut BoundaryProbeReport) -> Option<ComplexPoint> {
        match self.conformal_pair(w) {
            Ok((_, psi)) => {
                let a = psi.abs();
                if !a.is_finite() || a.is_zero() {
                    report.min_abs_psi = report.min_abs_psi.min(a.to_f64());
                    report.failures += 1;
                    return None;
                }
                report.min_abs_psi = report.min_abs_psi.min(a.to_f64());
                Some(psi)
            }
            Err(_) => {
                report.failures += 1;
                None
            }
        }
    }

    fn log_abs_psi(&self, w: &ComplexPoint, report: &mut BoundaryProbeReport) -> Option<Scalar> {
        let psi = self.psi_checked(w, report)?;
        match psi.abs().ln() {
            Ok(l) => Some(l.abs()),
            Err(_) => {
                report.failures += 1;
                None
            }
        }
    }

    /// Tolerance `2^{-p/2}` used by residual checks at the precision the
    /// generating solve was requested at.
    pub fn residual_tolerance(&self) -> f64 {
        0.5f64.powi((self.tol_bits / 2) as i32)
    }
}

fn accumulate(sup: &mut f64, value: Scalar, failures: &mut usize) {
    let v = value.to_f64();
    if v.is_finite() {
        *sup = sup.max(v);
    } else {
        *failures += 1;
    }
}

/// Barycentric evaluation at a complex point. The second form is an
/// identity of rational functions, so it remains exact off the real
/// axis; exact node hits short circuit to the stored value.
fn interp_eval(p: &Interpolant, z: &ComplexPoint) -> Result<ComplexPoint> {
    let bits = z.prec();
    for (k, t) in p.nodes().iter().enumerate() {
        if (z - &ComplexPoint::from_real(t.clone())).is_zero() {
            return Ok(ComplexPoint::from_real(p.values()[k].clone()));
        }
    }
    let mut num = ComplexPoint::zero(bits);
    let mut den = ComplexPoint::zero(bits);
    for ((t, w), v) in p.nodes().iter().zip(p.weights()).zip(p.values()) {
        let rd = (z - &ComplexPoint::from_real(t.clone())).recip()?;
        let wr = &ComplexPoint::from_real(w.clone()) * &rd;
        num = num + &wr * &ComplexPoint::from_real(v.clone());
        den = den + wr;
    }
    if den.is_zero() {
        return Err(Error::Singular(
            "barycentric denominator vanished off the node set".into(),
        ));
    }
    Ok(num / den)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridSummary {
    pub negative_axis: usize,
    pub positive_axis: usize,
    pub circle: usize,
    pub span: u32,
}

/// Empirical sup constants from one probe run. `failures` counts grid
/// points excluded because the chain could not be evaluated there.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundaryProbeReport {
    #[serde(rename = "R")]
    pub radius: f64,
    pub grids: GridSummary,
    pub empirical_c1: f64,
    pub empirical_c2: f64,
    pub empirical_c3: f64,
    pub failures: usize,
    /// Smallest sampled `|psi|`; must stay positive. Diagnostic only,
    /// not part of the serialized report.
    #[serde(skip)]
    pub min_abs_psi: f64,
}

impl BoundaryProbeReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Heuristic: all three constants of `b` within `tol` relative of `a`.
/// The constants are existential, so callers report this, they do not
/// assert it.
pub fn constants_stable(a: &BoundaryProbeReport, b: &BoundaryProbeReport, tol: f64) -> bool {
    let close = |x: f64, y: f64| {
        let scale = x.abs().max(y.abs());
        scale == 0.0 || (x - y).abs() <= tol * scale
    };
    close(a.empirical_c1, b.empirical_c1)
        && close(a.empirical_c2, b.empirical_c2)
        && close(a.empirical_c3, b.empirical_c3)
}
