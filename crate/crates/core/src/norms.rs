//! Hat functions on rhombs and weighted Sobolev norms `‖f‖_{p,1,V}`.
//!
//! For `f_m = max(1 − m²|x − a|, 0)`, `a = (m², 0)`, everything is computed in
//! apex-rescaled coordinates `x = a + m⁻² u`: the support becomes the unit
//! disc, `K_m` becomes the wedge `u₁ + m|u₂| < 0`, and the Gaussian weight
//! relative to the apex is `ϱ(x)/ϱ(a) = exp(−u₁ − |u|²/(2m⁴))`, which never
//! cancels or underflows.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domains::PlanarDomain;
use crate::gauss::{log_rho2, quad_integrate_2d, Quad2dOptions, WeightMode};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::weight::{log_add_exp, LogWeight};
use crate::{norm2, sub2, Error, Point2, Result};

/// `f_m(x) = max(1 − m²|x − a|, 0)` with apex `a = (m², 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HatFunction {
    m: u32,
}

/// Where a hat-function norm is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HatRegion {
    /// `K_m ∩ supp f_m`, the sector of opening `2 arctan(1/m)`.
    Rhomb,
    /// The whole support disc.
    Plane,
}

/// Weight used for hat-function norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormWeight {
    Lebesgue,
    /// Gaussian, reported relative to `ϱ(a)^{1/p}`.
    GaussianRelative,
}

impl HatFunction {
    pub fn new(m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("hat functions need m >= 2, got {m}"),
            });
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    fn mf(&self) -> f64 {
        self.m as f64
    }

    pub fn apex(&self) -> Point2 {
        [self.mf() * self.mf(), 0.0]
    }

    /// `m⁻²`.
    pub fn support_radius(&self) -> f64 {
        1.0 / (self.mf() * self.mf())
    }

    /// `u = m²(x − a)`.
    pub fn to_local(&self, x: Point2) -> Point2 {
        let s = self.mf() * self.mf();
        let d = sub2(x, self.apex());
        [s * d[0], s * d[1]]
    }

    /// `x = a + m⁻² u`.
    pub fn from_local(&self, u: Point2) -> Point2 {
        let r = self.support_radius();
        let a = self.apex();
        [a[0] + r * u[0], a[1] + r * u[1]]
    }

    pub fn eval(&self, x: Point2) -> f64 {
        let m2 = self.mf() * self.mf();
        (1.0 - m2 * norm2(sub2(x, self.apex()))).max(0.0)
    }

    /// `max(1 − |u|, 0)` in local coordinates.
    pub fn eval_local(&self, u: Point2) -> f64 {
        (1.0 - norm2(u)).max(0.0)
    }

    /// `−m²(x − a)/|x − a|` on the closed support disc minus the apex, zero
    /// outside; `None` at the apex where the gradient does not exist.
    pub fn grad(&self, x: Point2) -> Option<Point2> {
        let d = sub2(x, self.apex());
        let r = norm2(d);
        if r == 0.0 {
            return None;
        }
        let m2 = self.mf() * self.mf();
        if m2 * r > 1.0 {
            return Some([0.0, 0.0]);
        }
        Some([-m2 * d[0] / r, -m2 * d[1] / r])
    }

    /// `ln ϱ(a) = −m⁴/2 − ln 2π`.
    pub fn log_rho_apex(&self) -> f64 {
        log_rho2(self.apex())
    }

    /// `ϱ(x)/ϱ(a)` in local coordinates, `exp(−u₁ − |u|²/(2m⁴))`.
    pub fn local_weight(&self, u: Point2) -> f64 {
        let m4 = self.mf().powi(4);
        (-u[0] - (u[0] * u[0] + u[1] * u[1]) / (2.0 * m4)).exp()
    }

    /// Whether `u` lies in the wedge `u₁ + m|u₂| < 0` (`K_m` near the apex).
    pub fn local_in_rhomb(&self, u: Point2) -> bool {
        u[0] + self.mf() * u[1].abs() < 0.0
    }

    /// Half-opening of the support sector inside `K_m`, `arctan(1/m)`.
    pub fn half_angle(&self) -> f64 {
        (1.0 / self.mf()).atan()
    }

    /// Lebesgue area of `K_m ∩ supp f_m`: `arctan(1/m)·m⁻⁴`.
    pub fn sector_area(&self) -> f64 {
        self.half_angle() * self.support_radius().powi(2)
    }

    /// Length of `K_m ∩ ∂S_t`, `S_t = {f_m > t}`: `2 arctan(1/m)·m⁻²(1 − t)`.
    pub fn level_arc_length(&self, t: f64) -> f64 {
        2.0 * self.half_angle() * self.support_radius() * (1.0 - t)
    }

    /// `∫ g(r, θ) r dr dθ` over the local support (unit disc) or its wedge
    /// part, with the apex-relative weight included when requested.
    fn local_polar<G: Fn(f64) -> f64>(&self, radial: G, weight: NormWeight, region: HatRegion, tol: f64) -> Result<f64> {
        let m4 = self.mf().powi(4);
        let (lo, hi) = match region {
            HatRegion::Rhomb => (PI - self.half_angle(), PI + self.half_angle()),
            HatRegion::Plane => (0.0, 2.0 * PI),
        };
        let opts = QuadOptions::rel(tol).with_abs(1e-300);
        let inner = QuadOptions::rel(0.1 * tol).with_abs(1e-300);
        let mut failure = None;
        let est = integrate_with_breaks(
            |theta: f64| {
                let c = theta.cos();
                let e = integrate_with_breaks(
                    |r| {
                        let w = match weight {
                            NormWeight::Lebesgue => 1.0,
                            NormWeight::GaussianRelative => (-r * c - r * r / (2.0 * m4)).exp(),
                        };
                        radial(r) * w * r
                    },
                    &[0.0, 1.0],
                    inner,
                );
                match e {
                    Ok(e) => e.value,
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            },
            &[lo, PI, hi],
            opts,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(est.value)
    }

    /// `‖f_m‖_{p,1}` on `K_m` (or the plane) by the polar route around the
    /// apex. In Gaussian mode both parts are anchored at `ln ϱ(a)/p`.
    pub fn sobolev_norm(&self, p: f64, weight: NormWeight, region: HatRegion, tol: f64) -> Result<SobolevNormValue> {
        check_p(p)?;
        let m = self.mf();
        let lp_int = self.local_polar(|r| (1.0 - r).powf(p), weight, region, tol)?;
        let grad_int = self.local_polar(|_| 1.0, weight, region, tol)?;
        // dx = m⁻⁴ du and |∇f|ᵖ = m^{2p}
        let lp_log = (lp_int.ln() - 4.0 * m.ln()) / p;
        let grad_log = (grad_int.ln() + (2.0 * p - 4.0) * m.ln()) / p;
        let reference_log = match weight {
            NormWeight::Lebesgue => 0.0,
            NormWeight::GaussianRelative => self.log_rho_apex() / p,
        };
        Ok(SobolevNormValue {
            p,
            lp_part: LogWeight::new(lp_log, reference_log),
            grad_part: LogWeight::new(grad_log, reference_log),
            domain_id: match region {
                HatRegion::Rhomb => format!("K_{}", self.m),
                HatRegion::Plane => "R2".into(),
            },
        })
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("need 1 <= p < inf, got {p}"),
        });
    }
    Ok(())
}

/// `‖f‖_{p,1,V} = ‖f‖_{L^p(V)} + ‖|∇f|‖_{L^p(V)}`, both parts in log scale
/// against a common anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevNormValue {
    pub p: f64,
    pub lp_part: LogWeight,
    pub grad_part: LogWeight,
    pub domain_id: String,
}

impl SobolevNormValue {
    /// Total norm divided by `exp(anchor)` (e.g. `ϱ(a)^{-1/p}‖f‖`).
    pub fn relative(&self) -> f64 {
        self.lp_part.relative() + self.grad_part.rebase(self.lp_part.reference_log).relative()
    }

    /// Natural log of the absolute total norm.
    pub fn absolute_log(&self) -> f64 {
        log_add_exp(self.lp_part.absolute_log(), self.grad_part.absolute_log())
    }

    pub fn reference_log(&self) -> f64 {
        self.lp_part.reference_log
    }

    pub fn is_zero(&self) -> bool {
        self.lp_part.log_value == f64::NEG_INFINITY && self.grad_part.log_value == f64::NEG_INFINITY
    }
}

/// `‖f‖_{p,1}` over the intersection of `regions` by adaptive quadrature.
///
/// `kinks` lists circles across which `f` or `∇f` is not smooth.
pub fn sobolev_norm<F, G>(
    f: F,
    grad: G,
    regions: &[PlanarDomain],
    p: f64,
    mode: WeightMode,
    opts: &Quad2dOptions,
) -> Result<SobolevNormValue>
where
    F: Fn(Point2) -> f64,
    G: Fn(Point2) -> Point2,
{
    check_p(p)?;
    let lp = quad_integrate_2d(mode, regions, |x| f(x).abs().powf(p), opts)?;
    let gr = quad_integrate_2d(mode, regions, |x| norm2(grad(x)).powf(p), opts)?;
    let reference_log = mode.reference_log() / p;
    let id = regions.iter().map(|r| r.label()).collect::<Vec<_>>().join("&");
    Ok(SobolevNormValue {
        p,
        lp_part: LogWeight::new(lp.value.max(0.0).ln() / p, reference_log),
        grad_part: LogWeight::new(gr.value.max(0.0).ln() / p, reference_log),
        domain_id: id,
    })
}

/// Least-squares line `y = slope·x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least-squares slope of `ln y` against `ln m`.
pub fn loglog_slope(m: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = m.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly).0
}

/// One row of the norm-scaling table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub m: u32,
    pub p: f64,
    /// `ln ‖f_m‖_{L^p(K_m,γ)}` (absolute).
    pub lp_part_log: f64,
    /// `ln ‖∇f_m‖_{L^p(K_m,γ)}` (absolute).
    pub grad_part_log: f64,
    /// `ϱ(a)^{-1/p}‖f_m‖_{p,1,K_m}`.
    pub relative_norm: f64,
    pub fitted_slope: f64,
}

pub const NORM_CSV_HEADER: &str = "m,p,lp_part_log,grad_part_log,relative_norm,fitted_slope";

impl NormRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{:.12e},{:.12e},{:.12e},{:.9}",
            self.m, self.p, self.lp_part_log, self.grad_part_log, self.relative_norm, self.fitted_slope
        )
    }
}

/// Fit of `ln(ϱ(a)^{-1/p}‖f_m‖_{p,1,K_m})` against `ln m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub p: f64,
    pub slope: f64,
    /// `exp(intercept)`: the fitted constant in front of `m^{slope}`.
    pub constant: f64,
    pub expected_slope: f64,
    pub rows: Vec<NormRow>,
}

impl ScalingFit {
    pub fn within(&self, tol: f64) -> bool {
        (self.slope - self.expected_slope).abs() <= tol
    }
}

/// Norm-scaling sweep; the expected slope is `2 − 5/p`.
pub fn scaling_exponent(p: f64, m_values: &[u32], tol: f64) -> Result<ScalingFit> {
    if m_values.len() < 3 {
        return Err(Error::InvalidParameter {
            name: "m_values",
            reason: "need at least 3 values of m".into(),
        });
    }
    let mut rows = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let hat = HatFunction::new(m)?;
        let n = hat.sobolev_norm(p, NormWeight::GaussianRelative, HatRegion::Rhomb, tol)?;
        rows.push(NormRow {
            m,
            p,
            lp_part_log: n.lp_part.absolute_log(),
            grad_part_log: n.grad_part.absolute_log(),
            relative_norm: n.relative(),
            fitted_slope: f64::NAN,
        });
    }
    let lx: Vec<f64> = rows.iter().map(|r| (r.m as f64).ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.relative_norm.ln()).collect();
    let (slope, intercept) = fit_line(&lx, &ly);
    for r in rows.iter_mut() {
        r.fitted_slope = slope;
    }
    Ok(ScalingFit {
        p,
        slope,
        constant: intercept.exp(),
        expected_slope: 2.0 - 5.0 / p,
        rows,
    })
}
