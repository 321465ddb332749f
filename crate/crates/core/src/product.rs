//! The truncated product construction: `K = ∏ K_m`, a coefficient schedule
//! `C_m`, the function `f = Σ C_m f_m(x_m)` and the per-block divergence of
//! the extension cost.
//!
//! Every block quantity is carried in log scale: `ln ‖f_m‖_{p,1,K_m}` is of
//! order `−m⁴/(2p)`, so `C_m` itself overflows for `m ≥ 8`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domains::{PlanarDomain, ProductDomain};
use crate::extend::{CostMethod, SweepTable};
use crate::gauss::{quad_integrate_2d, GaussianProductSpace, MonteCarloEstimate, Quad2dOptions, WeightMode};
use crate::norms::{HatFunction, HatRegion, NormWeight};
use crate::weight::log_sum_exp;
use crate::{Error, Point2, Result};

/// First schedule index; blocks `m_k = 2^k` start at `m = 4`, the smallest
/// block with an extension-cost certificate.
pub const FIRST_K: u32 = 2;
/// Largest schedule index (`m = 1024`).
pub const MAX_K: u32 = 10;

/// How the bounded series `a_k = C_{m_k}‖f_{m_k}‖_{p,1,K_{m_k}}` decays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    /// `a_k = (1 − r) r^{k−2}` with `r = 2^{−1/(2p)}`.
    ///
    /// `Σ_k a_k = 1`, and `a_k m_k^{1/p} = (1 − r) 2^{k/(2p)} r^{−2}` grows
    /// geometrically, so both conditions hold from the first block on.
    #[default]
    Geometric,
    /// `a_k = k⁻²`: `Σ_k a_k < π²/6`, and `a_k m_k^{1/p} = 2^{k/p}/k²` is
    /// unbounded, but only increasing once `k ≥ 2p/ln 2`.
    InverseSquare,
}

impl Damping {
    pub fn ratio(&self, p: f64) -> f64 {
        2f64.powf(-0.5 / p)
    }

    /// `ln a_k`.
    pub fn log_term(&self, p: f64, k: u32) -> f64 {
        match self {
            Damping::Geometric => {
                let r = self.ratio(p);
                (1.0 - r).ln() + (k - FIRST_K) as f64 * r.ln()
            }
            Damping::InverseSquare => -2.0 * (k as f64).ln(),
        }
    }

    /// `Σ_{k ≥ 2} a_k`.
    pub fn series_limit(&self) -> f64 {
        match self {
            Damping::Geometric => 1.0,
            Damping::InverseSquare => PI * PI / 6.0 - 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub k: u32,
    pub m: u32,
    /// `ln C_{m_k}`.
    pub log_c: f64,
    /// `ln ‖f_{m_k}‖_{p,1,K_{m_k}}` (absolute).
    pub log_norm: f64,
    /// `ln ‖∇f_{m_k}‖_{p,K_{m_k}}` (absolute).
    pub log_grad_norm: f64,
    /// `C_{m_k}‖f_{m_k}‖_{p,1,K_{m_k}}`.
    pub bounded_term: f64,
    pub bounded_partial_sum: f64,
    /// `ln(C_{m_k} m_k^{1/p} ‖∇f_{m_k}‖_{p,K_{m_k}})`.
    pub growth_log: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSchedule {
    pub p: f64,
    pub damping: Damping,
    pub entries: Vec<ScheduleEntry>,
}

impl CoefficientSchedule {
    /// Block indices `m_k`.
    pub fn support(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.m).collect()
    }

    pub fn max_block(&self) -> u32 {
        self.entries.last().map_or(0, |e| e.m)
    }

    pub fn log_c(&self, m: u32) -> Option<f64> {
        self.entries.iter().find(|e| e.m == m).map(|e| e.log_c)
    }

    pub fn bounded_total(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.bounded_partial_sum)
    }

    /// First invariant at truncation: partial sums stay below the limit of
    /// the series (plus `tol`).
    pub fn bounded_holds(&self, tol: f64) -> bool {
        self.entries.iter().all(|e| e.bounded_partial_sum <= self.damping.series_limit() + tol)
    }

    /// Second invariant at truncation: the growth column is strictly
    /// increasing.
    pub fn growth_strictly_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].growth_log > w[0].growth_log)
    }
}

/// The default schedule (geometric damping) on `m_k = 2^k`, `k = 2..=k_max`.
pub fn choose_coefficients(p: f64, k_max: u32) -> Result<CoefficientSchedule> {
    choose_coefficients_with(p, k_max, Damping::default())
}

/// `C_{m_k} = a_k / ‖f_{m_k}‖_{p,1,K_{m_k}}` for the given damping.
pub fn choose_coefficients_with(p: f64, k_max: u32, damping: Damping) -> Result<CoefficientSchedule> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("need 1 <= p < inf, got {p}"),
        });
    }
    if !(FIRST_K + 1..=MAX_K).contains(&k_max) {
        return Err(Error::InvalidParameter {
            name: "k_max",
            reason: format!("need {} <= k_max <= {MAX_K}, got {k_max}", FIRST_K + 1),
        });
    }
    let mut entries = Vec::new();
    let mut partial = 0.0;
    for k in FIRST_K..=k_max {
        let m = 1u32 << k;
        let n = HatFunction::new(m)?.sobolev_norm(p, NormWeight::GaussianRelative, HatRegion::Rhomb, 1e-10)?;
        let log_norm = n.absolute_log();
        let log_a = damping.log_term(p, k);
        let bounded_term = log_a.exp();
        partial += bounded_term;
        let log_grad_norm = n.grad_part.absolute_log();
        entries.push(ScheduleEntry {
            k,
            m,
            log_c: log_a - log_norm,
            log_norm,
            log_grad_norm,
            bounded_term,
            bounded_partial_sum: partial,
            growth_log: log_a - log_norm + (m as f64).ln() / p + log_grad_norm,
        });
    }
    Ok(CoefficientSchedule { p, damping, entries })
}

/// `f` and `∇f` at a point of the truncated product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub in_k: bool,
    /// `ln f(x)`; `−∞` when every block misses its support disc.
    pub log_f: f64,
    /// `ln(C_m |∇f_m(x_m)|)` per block `m = 2..=M`; `−∞` off the supports.
    pub grad_block_log_norms: Vec<f64>,
}

impl ProductPoint {
    /// `f(x)`; may overflow to `inf` for blocks with `m ≥ 8`.
    pub fn f_value(&self) -> f64 {
        self.log_f.exp()
    }
}

/// Membership in `domain` (blocks `m = 2..=M`, optional `L`-ball), the value
/// `Σ C_m f_m(x_m)` and the per-block gradient norms. Blocks outside the
/// schedule support carry `f ≡ 0`.
pub fn product_membership_and_f(schedule: &CoefficientSchedule, x: &[Point2], domain: &ProductDomain) -> Result<ProductPoint> {
    if domain.truncation < schedule.max_block() {
        return Err(Error::InvalidParameter {
            name: "truncation",
            reason: format!("M = {} is below the largest scheduled block {}", domain.truncation, schedule.max_block()),
        });
    }
    let in_k = domain.contains(x)?;
    let mut logs = Vec::new();
    let mut grads = Vec::with_capacity(x.len());
    for (m, &xm) in domain.blocks().zip(x) {
        let Some(log_c) = schedule.log_c(m) else {
            grads.push(f64::NEG_INFINITY);
            continue;
        };
        let hat = HatFunction::new(m)?;
        let v = hat.eval(xm);
        if v > 0.0 {
            logs.push(log_c + v.ln());
        }
        // |∇f_m| = m² inside the support disc, apex excluded
        grads.push(match hat.grad(xm) {
            Some(g) if g != [0.0, 0.0] => log_c + g[0].hypot(g[1]).ln(),
            _ => f64::NEG_INFINITY,
        });
    }
    Ok(ProductPoint {
        in_k,
        log_f: if logs.is_empty() { f64::NEG_INFINITY } else { log_sum_exp(&logs) },
        grad_block_log_norms: grads,
    })
}

/// `γ(K_m)` by 2-D quadrature.
pub fn rhomb_measure(m: u32, tol: f64) -> Result<f64> {
    let r = quad_integrate_2d(
        WeightMode::GaussianRelative { anchor: [0.0, 0.0] },
        &[PlanarDomain::rhomb(m)?],
        |_| 1.0,
        &Quad2dOptions::tol(tol),
    )?;
    Ok(r.value / (2.0 * PI))
}

/// `γ(∏_{m_lo ≤ m ≤ m_hi} K_m)` by Monte Carlo in `ℝ^{2(m_hi−m_lo+1)}`.
pub fn product_measure_mc(m_lo: u32, m_hi: u32, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    if m_lo < 1 || m_hi < m_lo {
        return Err(Error::InvalidParameter {
            name: "m_lo",
            reason: format!("need 1 <= m_lo <= m_hi, got {m_lo}..={m_hi}"),
        });
    }
    let rhombs = (m_lo..=m_hi).map(|m| PlanarDomain::Rhomb { m }).collect::<Vec<_>>();
    let space = GaussianProductSpace::new(rhombs.len())?;
    space.mc_integrate(
        |_| 1.0,
        |x| rhombs.iter().enumerate().all(|(i, d)| d.contains([x[2 * i], x[2 * i + 1]])),
        samples,
        seed,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub k: u32,
    pub m: u32,
    pub log_c: f64,
    pub bounded_partial_sum: f64,
    /// `ln(C_{m_k} · ratio(m_k) · ‖f_{m_k}‖_{p,1,K_{m_k}})`: a lower bound on
    /// the block's share of any global extension's norm.
    pub divergence_term_log: f64,
    pub ratio_certificate: f64,
}

pub const PRODUCT_CSV_HEADER: &str = "k,m,log_C,bounded_partial_sum,divergence_term_log,ratio_certificate";

impl DivergenceRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.k, self.m, self.log_c, self.bounded_partial_sum, self.divergence_term_log, self.ratio_certificate
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceTable {
    pub p: f64,
    pub damping: Damping,
    pub method: CostMethod,
    pub rows: Vec<DivergenceRow>,
}

impl DivergenceTable {
    pub fn bounded_holds(&self, limit: f64) -> bool {
        self.rows.iter().all(|r| r.bounded_partial_sum <= limit)
    }

    pub fn divergence_strictly_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].divergence_term_log > w[0].divergence_term_log)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(PRODUCT_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv_line());
            s.push('\n');
        }
        s
    }
}

/// Joins the schedule with cost certificates from a sweep at the same `p`.
pub fn divergence_table(schedule: &CoefficientSchedule, costs: &SweepTable) -> Result<DivergenceTable> {
    if costs.p != schedule.p {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("schedule has p = {}, certificates have p = {}", schedule.p, costs.p),
        });
    }
    let rows = schedule
        .entries
        .iter()
        .map(|e| {
            let c = costs.rows.iter().find(|r| r.m == e.m).ok_or(Error::MissingCertificate(e.m))?;
            Ok(DivergenceRow {
                k: e.k,
                m: e.m,
                log_c: e.log_c,
                bounded_partial_sum: e.bounded_partial_sum,
                divergence_term_log: e.log_c + c.ratio.ln() + e.log_norm,
                ratio_certificate: c.ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DivergenceTable {
        p: schedule.p,
        damping: schedule.damping,
        method: costs.method,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extend::SweepRow;

    fn fake_costs(p: f64, ms: &[u32], slope: f64) -> SweepTable {
        SweepTable {
            p,
            method: CostMethod::CoareaLowerBound,
            rows: ms
                .iter()
                .map(|&m| SweepRow {
                    m,
                    p,
                    local_min_norm: (m as f64).powf(slope),
                    base_norm: 1.0,
                    ratio: (m as f64).powf(slope),
                    discretization_error: 0.0,
                })
                .collect(),
            certificates: vec![],
            slope,
            monotone: true,
        }
    }

    #[test]
    fn inverse_square_sums_and_late_growth() {
        for p in [1.0, 2.0] {
            let s = choose_coefficients_with(p, 8, Damping::InverseSquare).unwrap();
            let expect: f64 = (2..=8).map(|k: u32| 1.0 / (k * k) as f64).sum();
            assert!((s.bounded_total() - expect).abs() < 1e-14);
            assert!(s.bounded_holds(0.0));
            // 2^{k/p}/k² increases once k ≥ 2p/ln 2
            let k0 = (2.0 * p / 2f64.ln()).ceil() as usize;
            let late = &s.entries[k0.saturating_sub(2)..];
            assert!(late.windows(2).all(|w| w[1].growth_log > w[0].growth_log), "p = {p}");
        }
        let s = choose_coefficients_with(2.0, 4, Damping::InverseSquare).unwrap();
        assert!(!s.growth_strictly_increasing());
    }

    #[test]
    fn geometric_schedule_satisfies_both() {
        for p in [1.0, 2.0, 4.0] {
            let s = choose_coefficients(p, MAX_K).unwrap();
            assert!(s.bounded_holds(0.0));
            assert!(s.bounded_total() < 1.0);
            assert!(s.growth_strictly_increasing(), "p = {p}");
            for e in &s.entries {
                // ln‖f_m‖ ~ −m⁴/(2p): the sum cancels against a huge magnitude
                assert!((e.log_c + e.log_norm - e.bounded_term.ln()).abs() < 1e-14 * e.log_norm.abs());
            }
        }
    }

    #[test]
    fn origin_and_apex() {
        let s = choose_coefficients(2.0, 3).unwrap();
        let d = ProductDomain::new(8, None).unwrap();
        let zero = vec![[0.0, 0.0]; d.block_count()];
        let r = product_membership_and_f(&s, &zero, &d).unwrap();
        assert!(r.in_k);
        assert_eq!(r.f_value(), 0.0);
        assert!(r.grad_block_log_norms.iter().all(|g| *g == f64::NEG_INFINITY));
        let mut x = zero.clone();
        x[8 - 2] = [64.0, 0.0];
        let r = product_membership_and_f(&s, &x, &d).unwrap();
        assert!(r.log_f >= s.log_c(8).unwrap() - 1e-12);
        assert!(r.log_f.is_finite());
        assert!(matches!(
            product_membership_and_f(&s, &zero[..3], &ProductDomain::new(4, None).unwrap()),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn single_block_slice_is_a_scaled_hat() {
        let s = choose_coefficients(1.0, 3).unwrap();
        let d = ProductDomain::new(8, None).unwrap();
        let hat = HatFunction::new(4).unwrap();
        // C_8 overflows f64, so the other blocks stay off their supports
        let mut x = vec![[0.3, -0.2]; d.block_count()];
        x[4 - 2] = [15.99, 0.005];
        let c4 = s.log_c(4).unwrap().exp();
        let base = product_membership_and_f(&s, &x, &d).unwrap().f_value();
        for u in [[16.0, 0.0], [16.02, 0.01], [15.97, -0.03], [0.0, 0.0]] {
            let mut y = x.clone();
            y[4 - 2] = u;
            let fy = product_membership_and_f(&s, &y, &d).unwrap().f_value();
            let gap = fy - base - c4 * (hat.eval(u) - hat.eval(x[4 - 2]));
            assert!(gap.abs() <= 1e-12 * fy.abs().max(base.abs()), "{u:?}");
        }
    }

    #[test]
    fn monte_carlo_matches_product_of_quadratures() {
        for (lo, hi) in [(2, 4), (4, 8)] {
            let exact: f64 = (lo..=hi).map(|m| rhomb_measure(m, 1e-10).unwrap()).product();
            let mc = product_measure_mc(lo, hi, 40_000, 11).unwrap();
            assert!((mc.mean - exact).abs() < 4.0 * mc.std_error.max(1e-4), "{lo}..{hi}: {} vs {exact}", mc.mean);
        }
        assert!(rhomb_measure(4, 1e-10).unwrap() > 0.9);
        let a = rhomb_measure(2, 1e-10).unwrap();
        let b: f64 = (2..=6).map(|m| rhomb_measure(m, 1e-10).unwrap()).product();
        let c: f64 = (4..=6).map(|m| rhomb_measure(m, 1e-10).unwrap()).product();
        assert!(b < a && c > b && c > 0.9);
    }

    #[test]
    fn divergence_table_joins_certificates() {
        let s = choose_coefficients(2.0, 4).unwrap();
        let t = divergence_table(&s, &fake_costs(2.0, &[4, 8, 16], 0.45)).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert!(t.divergence_strictly_increasing());
        assert!(t.bounded_holds(PI * PI / 6.0));
        let csv = t.to_csv();
        assert!(csv.starts_with("k,m,log_C,bounded_partial_sum,divergence_term_log,ratio_certificate\n2,4,"));
        assert_eq!(csv.lines().count(), 4);
        assert!(matches!(divergence_table(&s, &fake_costs(2.0, &[4, 8], 0.45)), Err(Error::MissingCertificate(16))));
        assert!(divergence_table(&s, &fake_costs(1.0, &[4, 8, 16], 0.45)).is_err());
    }
}
