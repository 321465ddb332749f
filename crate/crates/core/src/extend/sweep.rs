//! Per-`m` extension-cost ratios and their growth exponent.
//!
//! `p = 1` goes through the level sets. Truncate any extension `G` to
//! `[0, 1]`; for `t ∈ (0, 1)` the level set `{g > t}` contains the arc of
//! radius `1 − t` inside the wedge, and its boundary in `U` must (a) cover
//! that arc and (b) leave each arc endpoint through the complement of the
//! open wedge. In local coordinates a path from an endpoint either stays in
//! `{u₁ ≤ 0}` (length at least `1 + t` to reach `∂U` or the far side of the
//! apex) or reaches `{u₁ ≥ 0}`, over which the weight `e^{−u₁}` integrates
//! to at least `e^{c} − 1`, `c = (1 − t)cos α`. With `e^{−2/m⁴}` bounding the
//! quadratic correction on `U`,
//!
//! ```text
//! LB(t) = ∫_{π−α}^{π+α} w((1−t)e^{iθ}) (1−t) dθ + 2 e^{−2/m⁴} min(1 + t, e^{c} − 1)
//! ```
//!
//! is a lower bound on the weighted perimeter, in local units. Coarea then
//! gives `ϱ(a)^{-1}‖∇G‖_{L¹(U)} ≥ m⁻² ∫₀¹ LB(t) dt`, and `G = f_m` on the
//! wedge contributes the full `L¹` part of the base norm.

use serde::{Deserialize, Serialize};

use super::variational::{min_norm_extension_p2, ExtensionCostCertificate};
use crate::norms::{fit_line, HatFunction, HatRegion, NormWeight};
use crate::quad::{integrate, integrate_with_breaks, QuadOptions};
use crate::{Error, Result};

/// How a certificate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostMethod {
    Variational { resolution: usize, tol: f64 },
    CoareaLowerBound,
}

impl CostMethod {
    pub fn label(&self) -> &'static str {
        match self {
            CostMethod::Variational { .. } => "variational",
            CostMethod::CoareaLowerBound => "coarea_lower_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: u32,
    pub p: f64,
    pub local_min_norm: f64,
    pub base_norm: f64,
    pub ratio: f64,
    pub discretization_error: f64,
}

pub const SWEEP_CSV_HEADER: &str = "m,p,method,local_min_norm,base_norm,ratio,discretization_error";

impl SweepRow {
    pub fn csv_line(&self, method: &CostMethod) -> String {
        format!(
            "{},{},{},{:.12e},{:.12e},{:.12e},{:.6e}",
            self.m,
            self.p,
            method.label(),
            self.local_min_norm,
            self.base_norm,
            self.ratio,
            self.discretization_error
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub p: f64,
    pub method: CostMethod,
    pub rows: Vec<SweepRow>,
    pub certificates: Vec<ExtensionCostCertificate>,
    /// Least-squares slope of `ln ratio` against `ln m`.
    pub slope: f64,
    pub monotone: bool,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(SWEEP_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv_line(&self.method));
            s.push('\n');
        }
        s
    }
}

fn check_m(m: u32) -> Result<()> {
    if !(4..=32).contains(&m) {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("cost sweeps cover 4 <= m <= 32, got {m}"),
        });
    }
    Ok(())
}

/// The level-set lower bound `LB(t)` in local length units.
pub fn level_lower_bound(m: u32, t: f64) -> f64 {
    let hat = HatFunction::new(m).expect("m >= 2");
    let alpha = hat.half_angle();
    let r = 1.0 - t;
    let m4 = (m as f64).powi(4);
    let arc = integrate(
        |th: f64| (-r * th.cos() - r * r / (2.0 * m4)).exp() * r,
        std::f64::consts::PI - alpha,
        std::f64::consts::PI + alpha,
        QuadOptions::default(),
    )
    .map(|e| e.value)
    .unwrap_or(0.0);
    let c = r * alpha.cos();
    arc + 2.0 * (-2.0 / m4).exp() * (1.0 + t).min(c.exp() - 1.0)
}

/// The level where the two branches of the `min` cross.
fn kink(m: u32) -> f64 {
    let ca = HatFunction::new(m).expect("m >= 2").half_angle().cos();
    let d = |t: f64| ((1.0 - t) * ca).exp() - 1.0 - (1.0 + t);
    let (mut lo, mut hi) = (0.0, 1.0);
    if d(lo) <= 0.0 {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Certificate for `p = 1` from the level-set bound above.
pub fn coarea_cost_bound(m: u32) -> Result<ExtensionCostCertificate> {
    check_m(m)?;
    let hat = HatFunction::new(m)?;
    let opts = QuadOptions::rel(1e-12).with_abs(1e-15);
    let lb = integrate_with_breaks(|t| level_lower_bound(m, t), &[0.0, kink(m), 1.0], opts)?;
    let base = hat.sobolev_norm(1.0, NormWeight::GaussianRelative, HatRegion::Rhomb, 1e-11)?;
    let lp = base.lp_part.relative();
    let grad_lb = lb.value / (m as f64).powi(2);
    let local = lp + grad_lb;
    let base_rel = base.relative();
    Ok(ExtensionCostCertificate {
        m,
        p: 1.0,
        method: CostMethod::CoareaLowerBound,
        local_min_norm: local,
        base_norm: base_rel,
        ratio: local / base_rel,
        grid_spec: None,
        discretization_error: lb.error / (m as f64).powi(2),
        cg_iterations: 0,
        cg_residual: 0.0,
    })
}

/// Runs the matching method for each `m` and fits the growth exponent.
pub fn extension_ratio_sweep(m_values: &[u32], p: f64, method: CostMethod) -> Result<SweepTable> {
    for &m in m_values {
        check_m(m)?;
    }
    if m_values.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "m_values",
            reason: "a slope needs at least two m values".into(),
        });
    }
    let certificates = m_values
        .iter()
        .map(|&m| match (p, method) {
            (p, CostMethod::Variational { resolution, tol }) if p == 2.0 => min_norm_extension_p2(m, resolution, tol),
            (p, CostMethod::CoareaLowerBound) if p == 1.0 => coarea_cost_bound(m),
            _ => Err(Error::InvalidParameter {
                name: "p",
                reason: format!("cost certificates exist for p = 2 (variational) and p = 1 (coarea), got p = {p} with {}", method.label()),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable::from_certificates(p, method, certificates))
}

impl SweepTable {
    /// Tabulates certificates computed elsewhere (e.g. one solve at a time).
    pub fn from_certificates(p: f64, method: CostMethod, certificates: Vec<ExtensionCostCertificate>) -> Self {
        let rows: Vec<SweepRow> = certificates
            .iter()
            .map(|c| SweepRow {
                m: c.m,
                p: c.p,
                local_min_norm: c.local_min_norm,
                base_norm: c.base_norm,
                ratio: c.ratio,
                discretization_error: c.discretization_error,
            })
            .collect();
        let xs: Vec<f64> = rows.iter().map(|r| (r.m as f64).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.ratio.ln()).collect();
        let (slope, _) = fit_line(&xs, &ys);
        let mut sorted = rows.clone();
        sorted.sort_by_key(|r| r.m);
        let monotone = sorted.windows(2).all(|w| w[1].ratio >= w[0].ratio);
        SweepTable {
            p,
            method,
            rows,
            certificates,
            slope,
            monotone,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_bound_dominates_the_arc() {
        for m in [4, 8, 16] {
            let hat = HatFunction::new(m).unwrap();
            for t in [0.05, 0.3, 0.7, 0.95] {
                // w ≥ e^{-2/m⁴} on the left half of U
                let arc = hat.level_arc_length(t) * (m as f64).powi(2) * (-2.0 / (m as f64).powi(4)).exp();
                assert!(level_lower_bound(m, t) > arc);
            }
        }
    }

    #[test]
    fn kink_is_where_branches_meet() {
        for m in [4, 16, 32] {
            let t = kink(m);
            let ca = HatFunction::new(m).unwrap().half_angle().cos();
            assert!((((1.0 - t) * ca).exp() - 1.0 - (1.0 + t)).abs() < 1e-12);
        }
    }

    #[test]
    fn coarea_sweep_grows_linearly() {
        let t = extension_ratio_sweep(&[4, 8, 16, 32], 1.0, CostMethod::CoareaLowerBound).unwrap();
        assert!(t.monotone);
        assert!((t.slope - 1.0).abs() < 0.2, "slope {}", t.slope);
        assert!(t.to_csv().starts_with(SWEEP_CSV_HEADER));
    }

    #[test]
    fn rejects_out_of_scope() {
        assert!(extension_ratio_sweep(&[4, 8], 3.0, CostMethod::CoareaLowerBound).is_err());
        assert!(extension_ratio_sweep(&[2, 8], 1.0, CostMethod::CoareaLowerBound).is_err());
        assert!(extension_ratio_sweep(&[4, 8], 1.0, CostMethod::Variational { resolution: 64, tol: 1e-8 }).is_err());
    }
}
