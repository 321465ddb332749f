//! Functions of bounded variation on a line and their derivatives against a
//! positive density.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::measure::{AcPart, FinVectorMeasure};
use crate::gauss::{std_normal_pdf, Direction};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::{Error, Result};

/// A positive, continuously differentiable density on the line.
pub trait Density1d: Send + Sync {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
}

pub type SharedDensity = Arc<dyn Density1d>;

/// `N(mean, sd²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianLine {
    pub mean: f64,
    pub sd: f64,
}

impl GaussianLine {
    pub fn standard() -> Self {
        Self { mean: 0.0, sd: 1.0 }
    }

    /// Conditional density of `γ` on `t ↦ x + th`.
    pub fn conditional(x: &[f64], h: &Direction) -> Result<Self> {
        let n = h.h_norm();
        if !(n > 0.0) {
            return Err(Error::ZeroDirection);
        }
        Ok(Self {
            mean: -h.apply(x)? / (n * n),
            sd: 1.0 / n,
        })
    }

    pub fn shared(self) -> SharedDensity {
        Arc::new(self)
    }
}

impl Density1d for GaussianLine {
    fn value(&self, t: f64) -> f64 {
        std_normal_pdf((t - self.mean) / self.sd) / self.sd
    }

    fn derivative(&self, t: f64) -> f64 {
        let z = (t - self.mean) / self.sd;
        -z * std_normal_pdf(z) / (self.sd * self.sd)
    }
}

/// A density given by closures.
pub struct FnDensity<F, G> {
    pub value: F,
    pub derivative: G,
}

impl<F, G> Density1d for FnDensity<F, G>
where
    F: Fn(f64) -> f64 + Send + Sync,
    G: Fn(f64) -> f64 + Send + Sync,
{
    fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    fn derivative(&self, t: f64) -> f64 {
        (self.derivative)(t)
    }
}

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The continuous part `c` of `f = c + Σ jumps`.
#[derive(Clone)]
pub enum Continuous {
    /// Linear interpolation of `(t, value)` knots, constant outside them.
    /// No knots means zero.
    PiecewiseLinear(Vec<[f64; 2]>),
    /// `c` and `c'` as closures; `breaks` lists points where `c'` may jump.
    Smooth { value: RealFn, derivative: RealFn, breaks: Vec<f64> },
}

impl fmt::Debug for Continuous {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Continuous::PiecewiseLinear(k) => f.debug_tuple("PiecewiseLinear").field(k).finish(),
            Continuous::Smooth { breaks, .. } => f.debug_struct("Smooth").field("breaks", breaks).finish_non_exhaustive(),
        }
    }
}

impl Continuous {
    pub fn zero() -> Self {
        Continuous::PiecewiseLinear(Vec::new())
    }

    pub fn constant(c: f64) -> Self {
        Continuous::PiecewiseLinear(vec![[0.0, c]])
    }

    pub fn smooth<F, G>(value: F, derivative: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Continuous::Smooth {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            breaks: Vec::new(),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Continuous::PiecewiseLinear(k) => {
                if k.is_empty() {
                    return 0.0;
                }
                if t <= k[0][0] {
                    return k[0][1];
                }
                let last = k[k.len() - 1];
                if t >= last[0] {
                    return last[1];
                }
                let i = k.partition_point(|p| p[0] <= t) - 1;
                let (a, b) = (k[i], k[i + 1]);
                a[1] + (b[1] - a[1]) * (t - a[0]) / (b[0] - a[0])
            }
            Continuous::Smooth { value, .. } => value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Continuous::PiecewiseLinear(k) => {
                if k.len() < 2 || t < k[0][0] || t >= k[k.len() - 1][0] {
                    return 0.0;
                }
                let i = k.partition_point(|p| p[0] <= t) - 1;
                (k[i + 1][1] - k[i][1]) / (k[i + 1][0] - k[i][0])
            }
            Continuous::Smooth { derivative, .. } => derivative(t),
        }
    }

    pub fn breaks(&self) -> Vec<f64> {
        match self {
            Continuous::PiecewiseLinear(k) => k.iter().map(|p| p[0]).collect(),
            Continuous::Smooth { breaks, .. } => breaks.clone(),
        }
    }
}

/// A jump at `t` from `left = f(t−)` to `right = f(t+)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub t: f64,
    pub left: f64,
    pub right: f64,
}

impl Jump {
    pub fn height(&self) -> f64 {
        self.right - self.left
    }
}

/// `f = c + Σ_j (right_j − left_j) I_{[t_j, ∞)}`, right-continuous.
#[derive(Debug, Clone)]
pub struct Bv1d {
    continuous: Continuous,
    jumps: Vec<Jump>,
    /// `prefix[j] = Σ_{i<j} height_i`
    prefix: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ContinuousJson {
    PiecewiseLinear { knots: Vec<[f64; 2]> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Bv1dJson {
    continuous: ContinuousJson,
    /// `[t, left, right]`
    jumps: Vec<[f64; 3]>,
}

impl Bv1d {
    /// Validates ordering, nonzero jumps, and `left_j = f(t_j−)`.
    pub fn new(continuous: Continuous, jumps: Vec<Jump>) -> Result<Self> {
        if let Continuous::PiecewiseLinear(k) = &continuous {
            if k.windows(2).any(|w| !(w[1][0] > w[0][0])) || k.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "knots",
                    reason: "knots must be finite and strictly increasing".into(),
                });
            }
        }
        let mut prefix = Vec::with_capacity(jumps.len());
        let mut acc = 0.0;
        for (j, jump) in jumps.iter().enumerate() {
            if j > 0 && !(jump.t > jumps[j - 1].t) {
                return Err(Error::InvalidParameter {
                    name: "jumps",
                    reason: format!("jump locations must be strictly increasing at t = {}", jump.t),
                });
            }
            if jump.left == jump.right {
                return Err(Error::InvalidParameter {
                    name: "jumps",
                    reason: format!("zero-height jump at t = {}", jump.t),
                });
            }
            let expected = continuous.value(jump.t) + acc;
            if (expected - jump.left).abs() > 1e-9 * (1.0 + expected.abs()) {
                return Err(Error::InvalidParameter {
                    name: "jumps",
                    reason: format!("left limit {} at t = {} does not match f(t-) = {expected}", jump.left, jump.t),
                });
            }
            prefix.push(acc);
            acc += jump.height();
        }
        Ok(Self {
            continuous,
            jumps,
            prefix,
        })
    }

    /// Builds the jump list from `(t, height)` pairs.
    pub fn with_jumps(continuous: Continuous, jumps: &[(f64, f64)]) -> Result<Self> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(jumps.len());
        for &(t, dh) in jumps {
            let left = continuous.value(t) + acc;
            out.push(Jump {
                t,
                left,
                right: left + dh,
            });
            acc += dh;
        }
        Self::new(continuous, out)
    }

    /// `I_{[a, b)}`; either end may be infinite.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        let mut jumps = Vec::new();
        if a.is_finite() {
            jumps.push((a, 1.0));
        }
        if b.is_finite() {
            jumps.push((b, -1.0));
        }
        let base = if a.is_finite() { 0.0 } else { 1.0 };
        Self::with_jumps(Continuous::constant(base), &jumps)
    }

    pub fn continuous(&self) -> &Continuous {
        &self.continuous
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// `f(t)`, right-continuous at jumps.
    pub fn value(&self, t: f64) -> f64 {
        let k = self.jumps.partition_point(|j| j.t <= t);
        let s = if k == 0 {
            0.0
        } else {
            self.prefix[k - 1] + self.jumps[k - 1].height()
        };
        self.continuous.value(t) + s
    }

    /// `f(t−)`.
    pub fn left_limit(&self, t: f64) -> f64 {
        let k = self.jumps.partition_point(|j| j.t < t);
        let s = if k == 0 {
            0.0
        } else {
            self.prefix[k - 1] + self.jumps[k - 1].height()
        };
        self.continuous.value(t) + s
    }

    /// Density of the absolutely continuous part of `f'`.
    pub fn ac_derivative(&self, t: f64) -> f64 {
        self.continuous.derivative(t)
    }

    /// Knots, smooth-part breaks and jump locations, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.continuous.breaks();
        b.extend(self.jumps.iter().map(|j| j.t));
        b.retain(|t| t.is_finite());
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// `sup |f|` over breakpoints, jump limits and a sample of `[lo, hi]`.
    pub fn sampled_sup(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut best = (0.0f64, lo);
        let mut visit = |t: f64, v: f64| {
            if v.abs() > best.0 {
                best = (v.abs(), t);
            }
        };
        for j in &self.jumps {
            if j.t >= lo && j.t <= hi {
                visit(j.t, j.left);
                visit(j.t, j.right);
            }
        }
        for t in self.breakpoints() {
            if t >= lo && t <= hi {
                visit(t, self.value(t));
            }
        }
        let (a, b) = (lo.max(-40.0), hi.min(40.0));
        for i in 0..=512 {
            let t = a + (b - a) * i as f64 / 512.0;
            visit(t, self.value(t));
        }
        best
    }

    pub fn to_json(&self) -> Result<String> {
        let Continuous::PiecewiseLinear(knots) = &self.continuous else {
            return Err(Error::NotSerializable("a closure-valued continuous part"));
        };
        let j = Bv1dJson {
            continuous: ContinuousJson::PiecewiseLinear { knots: knots.clone() },
            jumps: self.jumps.iter().map(|j| [j.t, j.left, j.right]).collect(),
        };
        Ok(serde_json::to_string(&j).expect("plain data serializes"))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: Bv1dJson = serde_json::from_str(s).map_err(|e| Error::InvalidMeasure(e.to_string()))?;
        let ContinuousJson::PiecewiseLinear { knots } = j.continuous;
        Self::new(
            Continuous::PiecewiseLinear(knots),
            j.jumps
                .into_iter()
                .map(|[t, left, right]| Jump { t, left, right })
                .collect(),
        )
    }
}

fn check_density(density: &dyn Density1d, f: &Bv1d, window: (f64, f64)) -> Result<()> {
    let (lo, hi) = window;
    let mut pts: Vec<f64> = f.breakpoints().into_iter().filter(|t| *t >= lo && *t <= hi).collect();
    pts.extend((0..=256).map(|i| lo + (hi - lo) * i as f64 / 256.0));
    for t in pts {
        if !(density.value(t) > 0.0) {
            return Err(Error::NonPositiveDensity { t });
        }
    }
    Ok(())
}

/// `(Λf)` on the line: `ϱ f'_ac dt + Σ ϱ(t_j)(right_j − left_j) δ_{t_j}`.
pub fn lambda_1d(f: &Bv1d, density: SharedDensity) -> FinVectorMeasure {
    let atoms: Vec<(f64, f64)> = f.jumps().iter().map(|j| (j.t, density.value(j.t) * j.height())).collect();
    let g = f.clone();
    let ac = AcPart::scalar(f64::NEG_INFINITY, f64::INFINITY, f.breakpoints(), move |t| {
        density.value(t) * g.ac_derivative(t)
    });
    FinVectorMeasure::scalar(&atoms).expect("jump locations are distinct").with_ac(ac).expect("scalar ac part")
}

/// `(Λ_J f)` for the restriction of `f` to the open interval `J = (lo, hi)`:
/// atoms and ac part of [`lambda_1d`] inside `J` only.
pub fn lambda_1d_on(f: &Bv1d, density: SharedDensity, lo: f64, hi: f64) -> FinVectorMeasure {
    let atoms: Vec<(f64, f64)> = f
        .jumps()
        .iter()
        .filter(|j| j.t > lo && j.t < hi)
        .map(|j| (j.t, density.value(j.t) * j.height()))
        .collect();
    let g = f.clone();
    let ac = AcPart::scalar(lo, hi, f.breakpoints(), move |t| density.value(t) * g.ac_derivative(t));
    FinVectorMeasure::scalar(&atoms).expect("jump locations are distinct").with_ac(ac).expect("scalar ac part")
}

/// Generalized derivative of `fϱ`:
/// `(f'_ac ϱ + f ϱ') dt + Σ (right_j − left_j) ϱ(t_j) δ_{t_j}`.
///
/// `window` is where the positivity of `ϱ` is checked.
pub fn skorohod_derivative_1d(f: &Bv1d, density: SharedDensity, window: (f64, f64)) -> Result<FinVectorMeasure> {
    check_density(density.as_ref(), f, window)?;
    let atoms: Vec<(f64, f64)> = f.jumps().iter().map(|j| (j.t, density.value(j.t) * j.height())).collect();
    let g = f.clone();
    let ac = AcPart::scalar(f64::NEG_INFINITY, f64::INFINITY, f.breakpoints(), move |t| {
        g.ac_derivative(t) * density.value(t) + g.value(t) * density.derivative(t)
    });
    FinVectorMeasure::scalar(&atoms)?.with_ac(ac)
}

/// `∫ φ(t) f(t) ϱ(t) dt` over `[lo, hi]`, split at the breakpoints of `f`.
pub fn integrate_against(f: &Bv1d, density: &dyn Density1d, phi: &dyn Fn(f64) -> f64, lo: f64, hi: f64, extra_breaks: &[f64]) -> Result<f64> {
    if !(hi > lo) {
        return Ok(0.0);
    }
    let mut pts = vec![lo];
    pts.extend(f.breakpoints().into_iter().chain(extra_breaks.iter().copied()).filter(|t| *t > lo && *t < hi));
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(integrate_with_breaks(|t| phi(t) * f.value(t) * density.value(t), &pts, QuadOptions::rel(1e-12).with_abs(1e-14))?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(c: f64, r: f64) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
        let phi = move |t: f64| {
            let u = (t - c) / r;
            if u.abs() < 1.0 {
                (-1.0 / (1.0 - u * u)).exp()
            } else {
                0.0
            }
        };
        let dphi = move |t: f64| {
            let u = (t - c) / r;
            if u.abs() < 1.0 {
                let q = 1.0 - u * u;
                (-1.0 / q).exp() * (-2.0 * u / (q * q)) / r
            } else {
                0.0
            }
        };
        (phi, dphi)
    }

    #[test]
    fn reconstruction_and_limits() {
        let f = Bv1d::with_jumps(Continuous::PiecewiseLinear(vec![[0.0, 0.0], [1.0, 2.0]]), &[(0.5, 3.0), (2.0, -1.0)]).unwrap();
        assert_eq!(f.value(0.25), 0.5);
        assert_eq!(f.value(0.5), 4.0);
        assert_eq!(f.jumps()[0].left, 1.0);
        assert_eq!(f.jumps()[1].left, 5.0);
        assert_eq!(f.value(3.0), 4.0);
        assert!(Bv1d::with_jumps(Continuous::zero(), &[(1.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(Bv1d::with_jumps(Continuous::zero(), &[(1.0, 0.0)]).is_err());
        let bad = vec![Jump {
            t: 0.0,
            left: 1.0,
            right: 2.0,
        }];
        assert!(Bv1d::new(Continuous::zero(), bad).is_err());
    }

    #[test]
    fn heaviside_derivative() {
        let f = Bv1d::indicator(0.0, f64::INFINITY).unwrap();
        let d = skorohod_derivative_1d(&f, GaussianLine::standard().shared(), (-10.0, 10.0)).unwrap();
        assert_eq!(d.atoms().len(), 1);
        assert!((d.atoms()[0].value[0] - 0.398_942_280_401_432_7).abs() < 1e-15);
        // ac density −tϱ(t) on t > 0
        let ac = d.ac().unwrap();
        assert!((ac.density(1.5)[0] + 1.5 * std_normal_pdf(1.5)).abs() < 1e-15);
        assert_eq!(ac.density(-1.0)[0], 0.0);
        // total mass zero
        assert!(d.total_mass().unwrap()[0].abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference_oracle() {
        // ∫ (f(t − ε) − f(t)) / ε · φ ϱ dt → −∫φ d(fϱ)' as ε → 0 with φ smooth
        let f = Bv1d::with_jumps(Continuous::PiecewiseLinear(vec![[-1.0, 0.0], [1.0, 1.0]]), &[(0.3, 2.0)]).unwrap();
        let rho = GaussianLine {
            mean: 0.2,
            sd: 0.8,
        };
        let d = skorohod_derivative_1d(&f, rho.shared(), (-10.0, 10.0)).unwrap();
        let (phi, _) = bump(0.1, 1.5);
        let exact = d.integrate(&phi).unwrap()[0];
        let fd = |eps: f64| {
            let g = |t: f64| phi(t) * (f.value(t - eps) * rho.value(t - eps) - f.value(t) * rho.value(t)) / eps;
            integrate_with_breaks(g, &[-1.4, -1.0, 0.3, 0.3 + eps, 1.0, 1.0 + eps, 1.6], QuadOptions::rel(1e-12))
                .unwrap()
                .value
        };
        // Richardson on the first-order difference
        let e = 1e-4;
        let est = 2.0 * fd(e / 2.0) - fd(e);
        assert!((est + exact).abs() < 1e-6, "{est} vs {exact}");
    }

    #[test]
    fn smooth_compact_function_has_no_atoms() {
        let (c, dc) = bump(0.0, 1.0);
        let f = Bv1d::new(
            Continuous::Smooth {
                value: Arc::new(c),
                derivative: Arc::new(dc),
                breaks: vec![-1.0, 1.0],
            },
            vec![],
        )
        .unwrap();
        let d = skorohod_derivative_1d(&f, GaussianLine::standard().shared(), (-5.0, 5.0)).unwrap();
        assert!(d.atoms().is_empty());
        assert!(d.total_mass().unwrap()[0].abs() < 1e-13);
    }

    #[test]
    fn nonpositive_density_is_rejected() {
        let f = Bv1d::indicator(0.0, 1.0).unwrap();
        let bad: SharedDensity = Arc::new(FnDensity {
            value: |t: f64| t,
            derivative: |_| 1.0,
        });
        assert!(matches!(skorohod_derivative_1d(&f, bad, (-1.0, 1.0)), Err(Error::NonPositiveDensity { .. })));
    }

    #[test]
    fn conditional_line_density() {
        let h = Direction::new(vec![0.0, 2.0]);
        let g = GaussianLine::conditional(&[1.0, 1.0], &h).unwrap();
        assert_eq!(g.mean, -0.5);
        assert_eq!(g.sd, 0.5);
    }

    #[test]
    fn json_round_trip() {
        let f = Bv1d::with_jumps(Continuous::PiecewiseLinear(vec![[0.0, 1.0], [2.0, -1.0]]), &[(1.0, 0.5)]).unwrap();
        let s = f.to_json().unwrap();
        assert!(s.contains("\"kind\":\"piecewise_linear\""));
        let g = Bv1d::from_json(&s).unwrap();
        assert_eq!(g.jumps(), f.jumps());
        assert!(Bv1d::from_json(r#"{"continuous":{"kind":"piecewise_linear","knots":[]},"jumps":[],"extra":1}"#).is_err());
        let smooth = Bv1d::new(Continuous::smooth(|t| t, |_| 1.0), vec![]).unwrap();
        assert!(matches!(smooth.to_json(), Err(Error::NotSerializable(_))));
    }
}
