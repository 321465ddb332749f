//! Planar functions carried line by line.
//!
//! For a unit `h` the plane is swept by lines `s h⊥ + t h`. Since `s h⊥ ⊥ h`,
//! `γ = φ(s) ds ⊗ φ(t) dt` and `β_h(s h⊥ + t h) = −t`, so every identity in
//! the BV calculus reduces to a 1-D identity per line integrated against the
//! standard normal in `s`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::line::{integrate_against, lambda_1d_on, Bv1d, Continuous, GaussianLine, RealFn, SharedDensity};
use super::measure::FinVectorMeasure;
use crate::domains::{PlanarDomain, SectionInterval};
use crate::gauss::std_normal_pdf;
use crate::quad::{composite_gauss_legendre, integrate_with_breaks, QuadOptions};
use crate::{dot2, norm2, sub2, Error, Point2, Result};

/// Beyond `|s| = 8.5` the normal weight is below `1e-16`.
pub const WINDOW: f64 = 8.5;

/// Gauss–Legendre nodes per piece of the orthogonal coordinate.
const S_NODES: usize = 48;

pub type LineFn = Arc<dyn Fn(f64) -> Result<Bv1d> + Send + Sync>;
pub type LineMeasureFn = Arc<dyn Fn(f64) -> Result<FinVectorMeasure> + Send + Sync>;
pub type PlanarFn = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;
pub type PlanarGrad = Arc<dyn Fn(Point2) -> Point2 + Send + Sync>;

/// Coordinates `(s, t)` with `x = s h⊥ + t h`, `h⊥ = (−h₂, h₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFrame {
    h: Point2,
}

impl LineFrame {
    pub fn new(h: Point2) -> Result<Self> {
        let n = norm2(h);
        if !(n > 0.0) {
            return Err(Error::ZeroDirection);
        }
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "h",
                reason: format!("line families need a unit direction, |h| = {n}"),
            });
        }
        Ok(Self { h })
    }

    pub fn angle(theta: f64) -> Self {
        Self {
            h: [theta.cos(), theta.sin()],
        }
    }

    pub fn h(&self) -> Point2 {
        self.h
    }

    pub fn normal(&self) -> Point2 {
        [-self.h[1], self.h[0]]
    }

    pub fn point(&self, s: f64, t: f64) -> Point2 {
        let n = self.normal();
        [s * n[0] + t * self.h[0], s * n[1] + t * self.h[1]]
    }

    pub fn coords(&self, x: Point2) -> (f64, f64) {
        (dot2(x, self.normal()), dot2(x, self.h))
    }

    pub fn section(&self, domain: Option<&PlanarDomain>, s: f64) -> SectionInterval {
        match domain {
            None => SectionInterval::FULL,
            Some(d) => d.section(self.point(s, 0.0), self.h).expect("unit direction"),
        }
    }

    /// Pieces of `[−WINDOW, WINDOW]` in `s` on which sections vary smoothly.
    pub fn s_breaks(&self, domain: Option<&PlanarDomain>) -> Vec<f64> {
        let (mut lo, mut hi) = (-WINDOW, WINDOW);
        let mut inner = Vec::new();
        if let Some(d) = domain {
            match d {
                PlanarDomain::Disc { center, radius } => {
                    let c = dot2(*center, self.normal());
                    lo = lo.max(c - radius);
                    hi = hi.min(c + radius);
                }
                PlanarDomain::HalfPlane { normal, offset } => {
                    // the boundary line projects to a point unless it is parallel to h⊥
                    let a = dot2(*normal, self.normal());
                    let b = dot2(*normal, self.h);
                    if b.abs() < 1e-15 {
                        let s0 = offset / a;
                        if a > 0.0 {
                            lo = lo.max(s0);
                        } else {
                            hi = hi.min(s0);
                        }
                    }
                }
                _ => {
                    let p: Vec<f64> = d.vertices().iter().map(|v| dot2(*v, self.normal())).collect();
                    lo = lo.max(p.iter().copied().fold(f64::INFINITY, f64::min));
                    hi = hi.min(p.iter().copied().fold(f64::NEG_INFINITY, f64::max));
                    inner = p;
                }
            }
        }
        let mut b = vec![lo];
        b.extend(inner.into_iter().filter(|s| *s > lo && *s < hi));
        b.push(hi);
        b.sort_by(f64::total_cmp);
        b.dedup();
        if hi <= lo {
            return Vec::new();
        }
        b
    }

    /// `(s, width)` of the peaks of `s ↦ ϱ(endpoint on line s)` along
    /// straight boundary pieces: centred at the piece's point nearest the
    /// origin, of width `|⟨e, h⊥⟩|` for the unit tangent `e`, so they become
    /// arbitrarily narrow as `h` turns parallel to the piece.
    fn boundary_peaks(&self, domain: &PlanarDomain) -> Vec<(f64, f64)> {
        let hn = self.normal();
        let peak = |foot: Point2, e: Point2| (dot2(foot, hn), dot2(e, hn).abs() / norm2(e));
        match domain {
            PlanarDomain::Disc { .. } => Vec::new(),
            PlanarDomain::HalfPlane { normal, offset } => {
                let nn = dot2(*normal, *normal);
                vec![peak([offset * normal[0] / nn, offset * normal[1] / nn], [-normal[1], normal[0]])]
            }
            _ => {
                let v = domain.vertices();
                (0..v.len())
                    .map(|i| {
                        let (a, e) = (v[i], sub2(v[(i + 1) % v.len()], v[i]));
                        let tau = (-dot2(a, e) / dot2(e, e)).clamp(0.0, 1.0);
                        peak([a[0] + tau * e[0], a[1] + tau * e[1]], e)
                    })
                    .collect()
            }
        }
    }

    /// [`Self::s_breaks`] refined by a geometric ladder around each narrow
    /// boundary peak, for adaptive quadrature in `s`.
    pub fn s_breaks_refined(&self, domain: &PlanarDomain) -> Vec<f64> {
        let mut b = self.s_breaks(Some(domain));
        let (Some(&lo), Some(&hi)) = (b.first(), b.last()) else {
            return b;
        };
        for (c, w) in self.boundary_peaks(domain) {
            // w = 0 is an edge parallel to h: no endpoints, nothing to resolve
            if !(w > 1e-13) || !(c > lo - 1.0 && c < hi + 1.0) {
                continue;
            }
            b.push(c);
            let mut d = w;
            while d < hi - lo {
                b.extend([c - d, c + d]);
                d *= 4.0;
            }
        }
        b.retain(|s| *s >= lo && *s <= hi);
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Composite Gauss–Legendre nodes `(s, w·φ(s))` over the `s` pieces.
    pub fn s_nodes(&self, domain: Option<&PlanarDomain>) -> Vec<(f64, f64)> {
        let b = self.s_breaks(domain);
        if b.len() < 2 {
            return Vec::new();
        }
        composite_gauss_legendre(&b, S_NODES)
            .into_iter()
            .map(|(s, w)| (s, w * std_normal_pdf(s)))
            .collect()
    }
}

/// A function on `U` (or the plane) given by its restriction to each line.
#[derive(Clone)]
pub struct PlanarBv {
    frame: LineFrame,
    domain: Option<PlanarDomain>,
    lines: LineFn,
}

impl std::fmt::Debug for PlanarBv {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlanarBv")
            .field("frame", &self.frame)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl PlanarBv {
    pub fn from_lines<F>(frame: LineFrame, domain: Option<PlanarDomain>, lines: F) -> Self
    where
        F: Fn(f64) -> Result<Bv1d> + Send + Sync + 'static,
    {
        Self {
            frame,
            domain,
            lines: Arc::new(lines),
        }
    }

    /// A `C¹` function on `U`: each line carries `t ↦ f(s h⊥ + t h)` with
    /// derivative `⟨∇f, h⟩`.
    pub fn from_smooth(frame: LineFrame, domain: Option<PlanarDomain>, f: PlanarFn, grad: PlanarGrad) -> Self {
        Self::from_lines(frame, domain, move |s| {
            let (f, grad) = (f.clone(), grad.clone());
            Bv1d::new(
                Continuous::smooth(move |t| f(frame.point(s, t)), move |t| dot2(grad(frame.point(s, t)), frame.h)),
                vec![],
            )
        })
    }

    /// `I_U` on the whole plane: per line, the indicator of the section.
    pub fn indicator(frame: LineFrame, domain: PlanarDomain) -> Self {
        let d = domain.clone();
        Self::from_lines(frame, None, move |s| {
            let j = frame.section(Some(&d), s);
            if !j.nonempty {
                return Bv1d::new(Continuous::zero(), vec![]);
            }
            Bv1d::indicator(j.t_lower, j.t_upper)
        })
    }

    pub fn frame(&self) -> LineFrame {
        self.frame
    }

    pub fn domain(&self) -> Option<&PlanarDomain> {
        self.domain.as_ref()
    }

    pub fn line(&self, s: f64) -> Result<Bv1d> {
        (self.lines)(s)
    }

    pub fn section(&self, s: f64) -> SectionInterval {
        self.frame.section(self.domain.as_ref(), s)
    }

    /// `(Λ_U f, h)` per line from the line derivative: `ϱ f'` on the section.
    pub fn lambda_lines(&self) -> LineMeasureFn {
        let this = self.clone();
        Arc::new(move |s| {
            let j = this.section(s);
            if !j.nonempty {
                return Ok(FinVectorMeasure::zero(1));
            }
            let f = this.line(s)?;
            Ok(lambda_1d_on(&f, std_line(), j.t_lower, j.t_upper))
        })
    }
}

fn std_line() -> SharedDensity {
    GaussianLine::standard().shared()
}

/// `b(u) = exp(−1/(1−u²))` on `|u| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump1d {
    pub center: f64,
    pub radius: f64,
}

impl Bump1d {
    pub fn value(&self, t: f64) -> f64 {
        let u = (t - self.center) / self.radius;
        if u.abs() < 1.0 {
            (-1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let u = (t - self.center) / self.radius;
        if u.abs() < 1.0 {
            let q = 1.0 - u * u;
            (-1.0 / q).exp() * (-2.0 * u / (q * q)) / self.radius
        } else {
            0.0
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }
}

/// A test function `φ ∈ D_h`: smooth in `t` with compact support inside
/// every section.
#[derive(Clone)]
pub enum TestFunction {
    /// `g(s) b((t − c)/r)` with the bump occupying the fraction `shrink` of
    /// the section (clamped to `[−WINDOW, WINDOW]`), shifted by `shift ∈ (−1, 1)`
    /// of the free room.
    SectionBump { shrink: f64, shift: f64, orth: RealFn },
    /// Arbitrary `φ(s, t)`, `∂_t φ(s, t)` and `t`-support per line; the
    /// support is checked against the section.
    Custom {
        value: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        dt: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        support: Arc<dyn Fn(f64) -> Option<(f64, f64)> + Send + Sync>,
    },
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::SectionBump { shrink, shift, .. } => f
                .debug_struct("SectionBump")
                .field("shrink", shrink)
                .field("shift", shift)
                .finish_non_exhaustive(),
            TestFunction::Custom { .. } => f.write_str("Custom"),
        }
    }
}

impl TestFunction {
    pub fn section_bump<G: Fn(f64) -> f64 + Send + Sync + 'static>(shrink: f64, shift: f64, orth: G) -> Self {
        TestFunction::SectionBump {
            shrink,
            shift,
            orth: Arc::new(orth),
        }
    }

    /// The bump on line `s`, or `None` when `φ` vanishes there.
    fn line_bump(&self, s: f64, j: &SectionInterval) -> Option<(f64, Bump1d)> {
        let TestFunction::SectionBump { shrink, shift, orth } = self else {
            return None;
        };
        if !j.nonempty {
            return None;
        }
        let (a, b) = (j.t_lower.max(-WINDOW), j.t_upper.min(WINDOW));
        if !(b > a) {
            return None;
        }
        let half = 0.5 * (b - a);
        let r = shrink * half;
        let c = 0.5 * (a + b) + shift * (half - r);
        let g = orth(s);
        (g != 0.0 && r > 0.0).then_some((g, Bump1d { center: c, radius: r }))
    }

    /// `(value, ∂_t value, support)` on line `s`, checking the support.
    #[allow(clippy::type_complexity)]
    fn on_line(&self, s: f64, j: &SectionInterval) -> Result<Option<(Box<dyn Fn(f64) -> f64 + '_>, Box<dyn Fn(f64) -> f64 + '_>, (f64, f64))>> {
        match self {
            TestFunction::SectionBump { .. } => Ok(self.line_bump(s, j).map(|(g, b)| {
                let v: Box<dyn Fn(f64) -> f64> = Box::new(move |t| g * b.value(t));
                let d: Box<dyn Fn(f64) -> f64> = Box::new(move |t| g * b.derivative(t));
                (v, d, b.support())
            })),
            TestFunction::Custom { value, dt, support } => {
                let Some((lo, hi)) = support(s) else {
                    return Ok(None);
                };
                if !j.nonempty || !(lo > j.t_lower && hi < j.t_upper) {
                    return Err(Error::SupportOutsideSection {
                        lo,
                        hi,
                        section_lo: j.t_lower,
                        section_hi: j.t_upper,
                    });
                }
                let v: Box<dyn Fn(f64) -> f64> = Box::new(move |t| value(s, t));
                let d: Box<dyn Fn(f64) -> f64> = Box::new(move |t| dt(s, t));
                Ok(Some((v, d, (lo, hi))))
            }
        }
    }
}

/// Terms of the integration-by-parts identity, integrated over the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IbpReport {
    /// `∫ ∂_h φ f dγ`
    pub lhs: f64,
    /// `−∫ φ d(Λ_U f, h)`
    pub lambda_term: f64,
    /// `−∫ φ f β_h dγ`
    pub beta_term: f64,
    pub residual: f64,
    pub lines: usize,
}

/// Residual of `∫ ∂_hφ f dγ = −∫ φ d(Λ_U f, h) − ∫ φ f β_h dγ` for the
/// claimed per-line measures `lambda`, assembled by Gauss–Legendre in `s` of
/// per-line adaptive integrals in `t`.
pub fn ibp_residual(f: &PlanarBv, lambda: &LineMeasureFn, phi: &TestFunction) -> Result<IbpReport> {
    let frame = f.frame();
    let rho = GaussianLine::standard();
    let (mut lhs, mut lam, mut beta) = (0.0, 0.0, 0.0);
    let mut lines = 0;
    for (s, w) in frame.s_nodes(f.domain()) {
        let j = f.section(s);
        let Some((v, d, (lo, hi))) = phi.on_line(s, &j)? else {
            continue;
        };
        let g = f.line(s)?;
        let mid = [0.5 * (lo + hi)];
        lhs += w * integrate_against(&g, &rho, &*d, lo, hi, &mid)?;
        beta -= w * integrate_against(&g, &rho, &|t| -t * v(t), lo, hi, &mid)?;
        lam -= w * lambda(s)?.integrate_window(&*v, lo, hi)?[0];
        lines += 1;
    }
    Ok(IbpReport {
        lhs,
        lambda_term: lam,
        beta_term: beta,
        residual: (lhs - lam - beta).abs(),
        lines,
    })
}

/// `σ^{s,h} ϱ`: `+ϱ(t_lo)` at the entry point and `−ϱ(t_hi)` at the exit.
pub fn indicator_line_measure(domain: &PlanarDomain, frame: LineFrame, s: f64) -> FinVectorMeasure {
    let j = frame.section(Some(domain), s);
    if !j.nonempty {
        return FinVectorMeasure::zero(1);
    }
    let mut atoms = Vec::new();
    if j.t_lower.is_finite() {
        atoms.push((j.t_lower, std_normal_pdf(j.t_lower)));
    }
    if j.t_upper.is_finite() {
        atoms.push((j.t_upper, -std_normal_pdf(j.t_upper)));
    }
    FinVectorMeasure::scalar(&atoms).expect("distinct endpoints")
}

/// `Λ I_U` seen along one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorLambda {
    pub h: Point2,
    /// `Var((Λ I_U, h))`.
    pub directional_variation: f64,
    pub quadrature_error: f64,
    /// Largest `‖σ^{s,h}‖` over the sampled lines (at most 2).
    pub max_line_mass: f64,
}

fn adaptive_s<F: Fn(f64) -> f64>(frame: &LineFrame, domain: &PlanarDomain, g: F) -> Result<(f64, f64)> {
    let b = frame.s_breaks_refined(domain);
    if b.len() < 2 {
        return Err(Error::EmptyFamily);
    }
    let est = integrate_with_breaks(|s| std_normal_pdf(s) * g(s), &b, QuadOptions::rel(1e-12).with_abs(1e-14))?;
    Ok((est.value, est.error))
}

/// Line family of `Λ I_U` in direction `h`, with `Var((Λ I_U, h)) =
/// ∫ φ(s) (ϱ(t_lo) + ϱ(t_hi)) ds`.
pub fn lambda_indicator_convex(domain: &PlanarDomain, frame: LineFrame) -> Result<IndicatorLambda> {
    let (value, error) = adaptive_s(&frame, domain, |s| {
        indicator_line_measure(domain, frame, s).variation().expect("atomic")
    })?;
    // a zero value is genuine when h runs along the boundary (or ϱ underflows
    // on every endpoint); only the angular integral treats it as degenerate
    let max_line_mass = frame
        .s_nodes(Some(domain))
        .iter()
        .map(|(s, _)| {
            let j = frame.section(Some(domain), *s);
            [j.t_lower, j.t_upper].iter().filter(|t| t.is_finite()).count() as f64
        })
        .fold(0.0, f64::max);
    Ok(IndicatorLambda {
        h: frame.h(),
        directional_variation: value,
        quadrature_error: error,
        max_line_mass,
    })
}

/// Angles in `[0, π]` where some edge of `U` is parallel to `h`.
fn angular_breaks(domain: &PlanarDomain) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let mut b = vec![0.0, pi];
    let v = domain.vertices();
    for i in 0..v.len() {
        let (p, q) = (v[i], v[(i + 1) % v.len()]);
        let a = (q[1] - p[1]).atan2(q[0] - p[0]).rem_euclid(pi);
        b.push(a);
    }
    if let PlanarDomain::HalfPlane { normal, .. } = domain {
        b.push((-normal[0]).atan2(normal[1]).rem_euclid(pi));
    }
    b.sort_by(f64::total_cmp);
    b.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    b
}

/// `Var(Λ I_U)` for the `ℝ²`-valued measure, from the line families alone.
///
/// Writing `Λ I_U = v |Λ I_U|` with `|v| = 1`, the directional variations are
/// `∫ |⟨v, h_θ⟩| d|Λ I_U|`, and `∫₀^π |cos(θ − θ₀)| dθ = 2`, so
/// `Var = ½ ∫₀^π Var((Λ I_U, h_θ)) dθ`.
pub fn indicator_variation(domain: &PlanarDomain) -> Result<(f64, f64)> {
    let breaks = angular_breaks(domain);
    let est = integrate_with_breaks(
        |theta| {
            lambda_indicator_convex(domain, LineFrame::angle(theta))
                .map(|l| l.directional_variation)
                .unwrap_or(f64::NAN)
        },
        &breaks,
        QuadOptions::rel(1e-10).with_abs(1e-12),
    )?;
    if !(est.value.is_finite() && est.value > 0.0) {
        return Err(Error::EmptyFamily);
    }
    Ok((0.5 * est.value, 0.5 * est.error))
}

/// The zero extension of a bounded `f` on `U`, with the endpoint atoms it
/// gains on each line.
#[derive(Clone)]
pub struct ZeroExtension {
    pub extended: PlanarBv,
    /// `Λ_U f` plus the endpoint atoms, assembled without differentiating
    /// the extension.
    pub lambda: LineMeasureFn,
    pub added: LineMeasureFn,
    pub report: ZeroExtensionReport,
}

impl std::fmt::Debug for ZeroExtension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ZeroExtension")
            .field("extended", &self.extended)
            .field("report", &self.report)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroExtensionReport {
    pub h: Point2,
    pub bound: f64,
    /// `Var` of the added atoms along `h`.
    pub added_variation: f64,
    /// `Var((Λ I_U, h))`.
    pub indicator_variation: f64,
}

impl ZeroExtensionReport {
    /// `added ≤ bound · Var((Λ I_U, h))`.
    pub fn holds(&self) -> bool {
        self.added_variation <= self.bound * self.indicator_variation * (1.0 + 1e-9) + 1e-12
    }
}

/// `f(t)` on `[lo, hi)`, zero outside.
fn cut_to(g: &Bv1d, lo: f64, hi: f64) -> Result<Bv1d> {
    let (c_lo, c_hi) = (if lo.is_finite() { lo } else { f64::NEG_INFINITY }, hi);
    let base = if lo.is_finite() { g.continuous().value(lo) } else { 0.0 };
    let continuous = match g.continuous() {
        Continuous::PiecewiseLinear(k) if lo.is_finite() => {
            let mut knots = vec![[lo, 0.0]];
            knots.extend(k.iter().filter(|p| p[0] > lo && p[0] < hi).map(|p| [p[0], p[1] - base]));
            if hi.is_finite() {
                knots.push([hi, g.continuous().value(hi) - base]);
            }
            Continuous::PiecewiseLinear(knots)
        }
        c => {
            let (v, d) = (c.clone(), c.clone());
            let mut breaks: Vec<f64> = c.breaks().into_iter().filter(|t| *t > lo && *t < hi).collect();
            breaks.extend([lo, hi].into_iter().filter(|t| t.is_finite()));
            Continuous::Smooth {
                value: Arc::new(move |t| v.value(t.clamp(c_lo, c_hi)) - base),
                derivative: Arc::new(move |t| if t > lo && t < hi { d.derivative(t) } else { 0.0 }),
                breaks,
            }
        }
    };
    let mut jumps = Vec::new();
    if lo.is_finite() {
        jumps.push((lo, g.value(lo)));
    }
    jumps.extend(g.jumps().iter().filter(|j| j.t > lo && j.t < hi).map(|j| (j.t, j.height())));
    if hi.is_finite() {
        jumps.push((hi, -g.left_limit(hi)));
    }
    jumps.retain(|(_, dh)| *dh != 0.0);
    Bv1d::with_jumps(continuous, &jumps)
}

/// Extends `f` (given on `U`, `|f| ≤ bound`) by zero to the plane.
pub fn extend_by_zero(f: &PlanarBv, bound: f64) -> Result<ZeroExtension> {
    let Some(domain) = f.domain().cloned() else {
        return Err(Error::InvalidParameter {
            name: "f",
            reason: "extension by zero needs a function on a proper domain".into(),
        });
    };
    let frame = f.frame();
    // boundedness on the sampled lines
    for (s, _) in frame.s_nodes(Some(&domain)) {
        let j = f.section(s);
        if !j.nonempty {
            continue;
        }
        let g = f.line(s)?;
        let (sup, t) = g.sampled_sup(j.t_lower, j.t_upper);
        let lim = [
            if j.t_lower.is_finite() { g.value(j.t_lower).abs() } else { 0.0 },
            if j.t_upper.is_finite() { g.left_limit(j.t_upper).abs() } else { 0.0 },
        ];
        let worst = sup.max(lim[0]).max(lim[1]);
        if worst > bound * (1.0 + 1e-12) {
            return Err(Error::Unbounded {
                bound,
                value: worst,
                t: if sup >= lim[0].max(lim[1]) { t } else { j.t_lower },
            });
        }
    }
    let src = f.clone();
    let extended = PlanarBv::from_lines(frame, None, move |s| {
        let j = src.section(s);
        if !j.nonempty {
            return Bv1d::new(Continuous::zero(), vec![]);
        }
        cut_to(&src.line(s)?, j.t_lower, j.t_upper)
    });
    let src = f.clone();
    let added: LineMeasureFn = Arc::new(move |s| {
        let j = src.section(s);
        if !j.nonempty {
            return Ok(FinVectorMeasure::zero(1));
        }
        let g = src.line(s)?;
        let mut atoms = Vec::new();
        if j.t_lower.is_finite() {
            atoms.push((j.t_lower, std_normal_pdf(j.t_lower) * g.value(j.t_lower)));
        }
        if j.t_upper.is_finite() {
            atoms.push((j.t_upper, -std_normal_pdf(j.t_upper) * g.left_limit(j.t_upper)));
        }
        atoms.retain(|a| a.1 != 0.0);
        FinVectorMeasure::scalar(&atoms)
    });
    let inner = f.lambda_lines();
    let add = added.clone();
    let lambda: LineMeasureFn = Arc::new(move |s| inner(s)?.combine(1.0, &add(s)?, 1.0));
    let add = added.clone();
    let (added_variation, _) = adaptive_s(&frame, &domain, |s| add(s).and_then(|m| m.variation()).unwrap_or(f64::NAN))?;
    if !added_variation.is_finite() {
        return Err(Error::InvalidMeasure("added atoms could not be evaluated".into()));
    }
    let indicator = lambda_indicator_convex(&domain, frame)?;
    Ok(ZeroExtension {
        extended,
        lambda,
        added,
        report: ZeroExtensionReport {
            h: frame.h(),
            bound,
            added_variation,
            indicator_variation: indicator.directional_variation,
        },
    })
}
