//! Norm-bounded sequences converging pointwise, on the line with `γ₁`.

use serde::{Deserialize, Serialize};

use super::family::Bump1d;
use super::line::{integrate_against, lambda_1d, Bv1d, Density1d, GaussianLine};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::{Error, Result};

/// `‖f‖_BV = ‖f‖_{L¹(γ)} + ∫|f||t| dγ + Var(Λf)` on the line (`H = ℝ`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BvNorm1d {
    pub l1: f64,
    pub beta: f64,
    pub variation: f64,
}

impl BvNorm1d {
    pub fn m_norm(&self) -> f64 {
        self.l1 + self.beta
    }

    pub fn total(&self) -> f64 {
        self.l1 + self.beta + self.variation
    }
}

pub fn bv_norm_1d(f: &Bv1d) -> Result<BvNorm1d> {
    let rho = GaussianLine::standard();
    let l1 = integrate_abs(f, &rho, &|_| 1.0)?;
    let beta = integrate_abs(f, &rho, &|t: f64| t.abs())?;
    Ok(BvNorm1d {
        l1,
        beta,
        variation: lambda_1d(f, rho.shared()).variation()?,
    })
}

/// `∫ |f| w ϱ dt`; `|t|` kinks at 0, so the line is split there too.
fn integrate_abs(f: &Bv1d, rho: &GaussianLine, w: &dyn Fn(f64) -> f64) -> Result<f64> {
    let mut pts = vec![f64::NEG_INFINITY];
    pts.extend(f.breakpoints());
    pts.push(0.0);
    pts.push(f64::INFINITY);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(integrate_with_breaks(|t| f.value(t).abs() * w(t) * rho.value(t), &pts, QuadOptions::rel(1e-12).with_abs(1e-15))?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosednessReport {
    pub sequence_norms: Vec<f64>,
    pub sup_norm: f64,
    pub limit_norm: f64,
    /// `max_t |f_N(t) − f(t)|` over the sample, last member.
    pub pointwise_gap: f64,
    /// `|∫φ dΛf_N − ∫φ dΛf|` per test function.
    pub pairing_gaps: Vec<f64>,
}

impl ClosednessReport {
    pub fn norm_bound_holds(&self, tol: f64) -> bool {
        self.limit_norm <= self.sup_norm + tol
    }

    pub fn max_pairing_gap(&self) -> f64 {
        self.pairing_gaps.iter().copied().fold(0.0, f64::max)
    }
}

/// Computes every norm, checks `f_N → f` on `samples` to `conv_tol`, and
/// pairs the last member and the limit with each test function, both
/// through the measures and through `−∫(φ' + φβ) f dγ`.
pub fn closedness_harness(sequence: &[Bv1d], limit: &Bv1d, samples: &[f64], tests: &[Bump1d], conv_tol: f64) -> Result<ClosednessReport> {
    let Some(last) = sequence.last() else {
        return Err(Error::EmptyFamily);
    };
    let mut gap: f64 = 0.0;
    for &t in samples {
        let g = (last.value(t) - limit.value(t)).abs();
        if g > conv_tol {
            return Err(Error::NotConvergent { t, gap: g });
        }
        gap = gap.max(g);
    }
    let sequence_norms = sequence.iter().map(|f| bv_norm_1d(f).map(|n| n.total())).collect::<Result<Vec<_>>>()?;
    let sup_norm = sequence_norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let limit_norm = bv_norm_1d(limit)?.total();
    let rho = GaussianLine::standard();
    let pairing = |f: &Bv1d, b: &Bump1d| -> Result<(f64, f64)> {
        let (lo, hi) = b.support();
        let via_measure = lambda_1d(f, rho.shared()).integrate_window(&|t| b.value(t), lo, hi)?[0];
        // ∫φ dΛf = −∫ φ' f dγ + ∫ φ f t dγ
        let via_ibp = -integrate_against(f, &rho, &|t| b.derivative(t) - t * b.value(t), lo, hi, &[b.center])?;
        Ok((via_measure, via_ibp))
    };
    let mut pairing_gaps = Vec::with_capacity(tests.len());
    for b in tests {
        let (a, a_ibp) = pairing(last, b)?;
        let (l, l_ibp) = pairing(limit, b)?;
        pairing_gaps.push((a - l).abs().max((a_ibp - l_ibp).abs()));
    }
    Ok(ClosednessReport {
        sequence_norms,
        sup_norm,
        limit_norm,
        pointwise_gap: gap,
        pairing_gaps,
    })
}
