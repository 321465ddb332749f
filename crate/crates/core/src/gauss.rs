//! The standard Gaussian product measure at finite truncation.
//!
//! Densities are evaluated in log scale; 2-D integrals against the planar
//! density are reported relative to an anchor point so that values like
//! `ϱ((32², 0)) = e^{-524288}/2π` never have to be formed.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::domains::{section_of_all, PlanarDomain};
use crate::quad::{integrate_with_breaks, QuadEstimate, QuadOptions};
use crate::weight::LogWeight;
use crate::{dot2, Error, Point2, Result};

/// `ln(2π)`.
pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Samples per deterministic Monte Carlo chunk; chunk `i` draws from ChaCha
/// stream `i`.
pub const MC_CHUNK: usize = 4096;

/// `γ` on `ℝ^{2M}`, grouped into `M` planar blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussianProductSpace {
    block_count: usize,
}

/// A Cameron–Martin direction `h` together with `|h|_H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    coordinates: Vec<f64>,
    h_norm: f64,
}

impl Direction {
    pub fn new(coordinates: Vec<f64>) -> Self {
        let h_norm = coordinates.iter().map(|c| c * c).sum::<f64>().sqrt();
        Self { coordinates, h_norm }
    }

    /// `h / |h|`.
    pub fn unit(coordinates: Vec<f64>) -> Result<Self> {
        let d = Self::new(coordinates);
        if !(d.h_norm > 0.0) {
            return Err(Error::ZeroDirection);
        }
        let n = d.h_norm;
        Ok(Self::new(d.coordinates.into_iter().map(|c| c / n).collect()))
    }

    /// Coordinate vector `e_i` in dimension `dim`.
    pub fn basis(i: usize, dim: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[i] = 1.0;
        Self::new(c)
    }

    /// Planar unit direction at angle `theta`.
    pub fn angle(theta: f64) -> Self {
        Self::new(vec![theta.cos(), theta.sin()])
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.coordinates
    }

    pub fn h_norm(&self) -> f64 {
        self.h_norm
    }

    pub fn dim(&self) -> usize {
        self.coordinates.len()
    }

    /// `ĥ(x) = Σ hₙ xₙ`.
    pub fn apply(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.coordinates.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coordinates.len(),
                got: x.len(),
            });
        }
        Ok(self.coordinates.iter().zip(x).map(|(h, x)| h * x).sum())
    }

    /// The planar vector, for 2-D directions.
    pub fn as_point2(&self) -> Result<Point2> {
        match self.coordinates.as_slice() {
            [a, b] => Ok([*a, *b]),
            _ => Err(Error::DimensionMismatch {
                expected: 2,
                got: self.coordinates.len(),
            }),
        }
    }
}

/// Mean and standard error of a seeded Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

impl GaussianProductSpace {
    pub fn new(block_count: usize) -> Result<Self> {
        if block_count == 0 {
            return Err(Error::InvalidParameter {
                name: "block_count",
                reason: "need at least one block".into(),
            });
        }
        Ok(Self { block_count })
    }

    /// The plane with its standard Gaussian.
    pub fn plane() -> Self {
        Self { block_count: 1 }
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn total_dim(&self) -> usize {
        2 * self.block_count
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.total_dim(),
                got: len,
            });
        }
        Ok(())
    }

    /// `−|x|²/2 − (d/2)·ln 2π`.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.check(x.len())?;
        let sq: f64 = x.iter().map(|v| v * v).sum();
        Ok(-0.5 * sq - 0.5 * self.total_dim() as f64 * LN_2PI)
    }

    /// Logarithmic derivative `β_h(x) = −⟨x, h⟩`.
    pub fn beta(&self, h: &Direction, x: &[f64]) -> Result<f64> {
        self.check(x.len())?;
        self.check(h.dim())?;
        Ok(-h.apply(x)?)
    }

    /// Density in `t` of the conditional measure on `{x + t·h}`:
    /// `N(−⟨x,h⟩/|h|², 1/|h|²)`.
    pub fn conditional_density(&self, x: &[f64], h: &Direction, t: f64) -> Result<f64> {
        Ok(self.log_conditional_density(x, h, t)?.exp())
    }

    pub fn log_conditional_density(&self, x: &[f64], h: &Direction, t: f64) -> Result<f64> {
        self.check(x.len())?;
        self.check(h.dim())?;
        let n = h.h_norm();
        if !(n > 0.0) {
            return Err(Error::ZeroDirection);
        }
        let mean = -h.apply(x)? / (n * n);
        let z = (t - mean) * n;
        Ok(-0.5 * z * z - 0.5 * LN_2PI + n.ln())
    }

    /// Unbiased estimate of `∫ integrand · 1_restriction dγ`.
    ///
    /// Deterministic for a fixed seed: samples are drawn in chunks of
    /// [`MC_CHUNK`], chunk `i` from ChaCha stream `i`.
    pub fn mc_integrate<F, R>(&self, integrand: F, restriction: R, samples: usize, seed: u64) -> Result<MonteCarloEstimate>
    where
        F: Fn(&[f64]) -> f64,
        R: Fn(&[f64]) -> bool,
    {
        if samples == 0 {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "need at least one sample".into(),
            });
        }
        let d = self.total_dim();
        let mut x = vec![0.0; d];
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut index = 0usize;
        for chunk in 0..samples.div_ceil(MC_CHUNK) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let (mut csum, mut csq) = (0.0, 0.0);
            for _ in 0..MC_CHUNK.min(samples - chunk * MC_CHUNK) {
                for v in x.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                if restriction(&x) {
                    let v = integrand(&x);
                    if !v.is_finite() {
                        return Err(Error::NonFiniteSample {
                            index,
                            point: x.clone(),
                            value: v,
                        });
                    }
                    csum += v;
                    csq += v * v;
                }
                index += 1;
            }
            sum += csum;
            sum_sq += csq;
        }
        let n = samples as f64;
        let mean = sum / n;
        let var = if samples > 1 {
            ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Ok(MonteCarloEstimate {
            mean,
            std_error: (var / n).sqrt(),
            samples,
            seed,
        })
    }
}

/// `ln ϱ(x)` for the planar standard Gaussian.
pub fn log_rho2(x: Point2) -> f64 {
    -0.5 * dot2(x, x) - LN_2PI
}

/// `ln(ϱ(x)/ϱ(y)) = (|y|² − |x|²)/2`, evaluated as `⟨y−x, y+x⟩/2`.
pub fn log_density_ratio(x: Point2, y: Point2) -> f64 {
    0.5 * ((y[0] - x[0]) * (y[0] + x[0]) + (y[1] - x[1]) * (y[1] + x[1]))
}

/// Whether `|x−y| ≤ min(1, 1/|x|)` implies `e^{−1} ≤ ϱ(x)/ϱ(y) ≤ e^{3/2}`
/// at this pair; vacuously true when the hypothesis fails.
pub fn density_ratio_in_bounds(x: Point2, y: Point2) -> bool {
    let d = (x[0] - y[0]).hypot(x[1] - y[1]);
    let nx = x[0].hypot(x[1]);
    let admissible = d <= 1.0 && d * nx <= 1.0;
    if !admissible {
        return true;
    }
    let lr = log_density_ratio(x, y);
    const SLACK: f64 = 1e-12;
    (-1.0 - SLACK..=1.5 + SLACK).contains(&lr)
}

/// Standard normal density.
pub fn std_normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t - 0.5 * LN_2PI).exp()
}

/// How the planar Gaussian enters a 2-D integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum WeightMode {
    /// Plain area measure.
    Lebesgue,
    /// `ϱ(x)/ϱ(anchor)`; the result is reported with `reference_log = ln ϱ(anchor)`.
    GaussianRelative { anchor: Point2 },
}

impl WeightMode {
    pub fn reference_log(&self) -> f64 {
        match self {
            WeightMode::Lebesgue => 0.0,
            WeightMode::GaussianRelative { anchor } => log_rho2(*anchor),
        }
    }

    /// Weight at `x` relative to the anchor.
    pub fn weight(&self, x: Point2) -> f64 {
        match self {
            WeightMode::Lebesgue => 1.0,
            WeightMode::GaussianRelative { anchor } => log_density_ratio(x, *anchor).exp(),
        }
    }
}

/// A 2-D integral `exp(reference_log) · value`, with its error estimate in
/// the same relative units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral2d {
    pub value: f64,
    pub error: f64,
    pub reference_log: f64,
}

impl Integral2d {
    /// The value as a [`LogWeight`]; negative values are clamped to zero.
    pub fn to_log_weight(&self) -> LogWeight {
        LogWeight::new(self.value.max(0.0).ln(), self.reference_log)
    }
}

/// Options for [`quad_integrate_2d`].
///
/// `circles` lists curves `|x − c| = r` across which the integrand has a kink
/// or jump; their tangency abscissae and chord endpoints are used as
/// breakpoints. `abs_tol` is the absolute floor below which inner and outer
/// rules stop refining (needed when the integral cancels to zero).
#[derive(Debug, Clone)]
pub struct Quad2dOptions {
    pub tol: f64,
    pub abs_tol: f64,
    pub circles: Vec<(Point2, f64)>,
    pub max_subdivisions: usize,
}

impl Default for Quad2dOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            abs_tol: 1e-14,
            circles: Vec::new(),
            max_subdivisions: 2000,
        }
    }
}

impl Quad2dOptions {
    pub fn tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn with_circle(mut self, center: Point2, radius: f64) -> Self {
        self.circles.push((center, radius));
        self
    }
}

fn sorted_breaks(mut v: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    v.retain(|p| p.is_finite() && *p > lo && *p < hi);
    v.push(lo);
    v.push(hi);
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Adaptive integral of `integrand` over the intersection of `regions`,
/// iterated as `∫ dx₁ ∫_{section} dx₂` with exact convex sections.
///
/// The intersection must be bounded. `opts.tol` is the relative tolerance
/// applied to both the inner and outer adaptive rules.
pub fn quad_integrate_2d<F: Fn(Point2) -> f64>(
    mode: WeightMode,
    regions: &[PlanarDomain],
    integrand: F,
    opts: &Quad2dOptions,
) -> Result<Integral2d> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: "tolerance must be positive".into(),
        });
    }
    let mut lo = [f64::NEG_INFINITY; 2];
    let mut hi = [f64::INFINITY; 2];
    for r in regions {
        if let Some([a, b]) = r.bounding_box() {
            for k in 0..2 {
                lo[k] = lo[k].max(a[k]);
                hi[k] = hi[k].min(b[k]);
            }
        }
    }
    if !(lo.iter().chain(hi.iter()).all(|v| v.is_finite())) {
        return Err(Error::UnboundedRegion);
    }
    let reference_log = mode.reference_log();
    if !(lo[0] < hi[0] && lo[1] < hi[1]) {
        return Ok(Integral2d {
            value: 0.0,
            error: 0.0,
            reference_log,
        });
    }
    let mut outer_breaks: Vec<f64> = regions.iter().flat_map(|r| r.breakpoints(0)).collect();
    for (c, r) in &opts.circles {
        outer_breaks.extend([c[0] - r, c[0], c[0] + r]);
    }
    let outer_breaks = sorted_breaks(outer_breaks, lo[0], hi[0]);
    let width = hi[0] - lo[0];
    let inner_opts = QuadOptions::rel(opts.tol * 0.1)
        .with_abs(0.1 * opts.abs_tol / width)
        .with_limit(opts.max_subdivisions);
    let outer_opts = QuadOptions::rel(opts.tol)
        .with_abs(opts.abs_tol)
        .with_limit(opts.max_subdivisions);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let est = integrate_with_breaks(
        |x1| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            let s = match section_of_all(regions, [x1, 0.0], [0.0, 1.0]) {
                Ok(s) => s,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    return 0.0;
                }
            };
            if !s.nonempty {
                return 0.0;
            }
            let mut breaks: Vec<f64> = Vec::new();
            for (c, r) in &opts.circles {
                let dx = x1 - c[0];
                if dx.abs() < *r {
                    let h = (r * r - dx * dx).sqrt();
                    breaks.extend([c[1] - h, c[1] + h]);
                }
            }
            let breaks = sorted_breaks(breaks, s.t_lower, s.t_upper);
            match integrate_with_breaks(|x2| integrand([x1, x2]) * mode.weight([x1, x2]), &breaks, inner_opts) {
                Ok(e) => e.value,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        &outer_breaks,
        outer_opts,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(Integral2d {
        value: est.value,
        // inner rules run at a tenth of the outer tolerance
        error: est.error + 0.1 * opts.tol * est.value.abs(),
        reference_log,
    })
}

/// `∫∫ integrand(r, θ) r dr dθ` over the part of the disc of `radius` about
/// `center` lying in every region.
///
/// `angular_breaks` are angles (any branch) where the radial section changes
/// shape, e.g. directions of edges through `center`; `radial_breaks` are radii
/// where the integrand has a kink.
pub fn polar_integrate<F: Fn(f64, f64) -> f64>(
    center: Point2,
    radius: f64,
    regions: &[PlanarDomain],
    angular_breaks: &[f64],
    radial_breaks: &[f64],
    integrand: F,
    opts: QuadOptions,
) -> Result<QuadEstimate> {
    let ang = sorted_breaks(angular_breaks.iter().map(|t| t.rem_euclid(TAU)).collect(), 0.0, TAU);
    let inner = QuadOptions {
        rel_tol: opts.rel_tol * 0.1,
        abs_tol: opts.abs_tol * 0.1 / TAU,
        ..opts
    };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let est = integrate_with_breaks(
        |theta| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            let h = [theta.cos(), theta.sin()];
            let s = match section_of_all(regions, center, h) {
                Ok(s) => s,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    return 0.0;
                }
            };
            let r0 = s.t_lower.max(0.0);
            let r1 = s.t_upper.min(radius);
            if !(s.nonempty && r1 > r0) {
                return 0.0;
            }
            let rb = sorted_breaks(radial_breaks.to_vec(), r0, r1);
            match integrate_with_breaks(|r| integrand(r, theta) * r, &rb, inner) {
                Ok(e) => e.value,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        &ang,
        opts,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(est)
}

/// Convenience: `∫ g dγ` over the plane by iterated quadrature on
/// `[-r, r]²` (the Gaussian tail beyond `r = 12` is below `1e-30`).
pub fn gaussian_expectation_2d<F: Fn(Point2) -> f64>(g: F, tol: f64) -> Result<f64> {
    let r = 12.0;
    let square = PlanarDomain::rectangle(-r, r, -r, r)?;
    let est = quad_integrate_2d(
        WeightMode::GaussianRelative { anchor: [0.0, 0.0] },
        &[square],
        g,
        &Quad2dOptions::tol(tol),
    )?;
    Ok(est.value / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn log_density_examples() {
        let s = GaussianProductSpace::plane();
        assert!(close(s.log_density(&[0.0, 0.0]).unwrap(), -(2.0 * PI).ln(), 1e-15));
        assert!(close(s.log_density(&[9.0, 0.0]).unwrap(), -40.5 - (2.0 * PI).ln(), 1e-13));
        assert_eq!(s.log_density(&[1.0, 2.0]).unwrap(), s.log_density(&[-1.0, -2.0]).unwrap());
        assert!(matches!(s.log_density(&[1.0]), Err(Error::DimensionMismatch { .. })));
        // far out: no underflow in log scale
        let big = GaussianProductSpace::new(3).unwrap();
        let v = big.log_density(&[1024.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(close(v, -524288.0 - 3.0 * LN_2PI, 1e-9));
    }

    #[test]
    fn beta_examples() {
        let s = GaussianProductSpace::plane();
        assert_eq!(s.beta(&Direction::basis(0, 2), &[2.0, 5.0]).unwrap(), -2.0);
        assert_eq!(s.beta(&Direction::new(vec![0.0, 0.0]), &[2.0, 5.0]).unwrap(), 0.0);
        let h = Direction::unit(vec![1.0, 1.0]).unwrap();
        assert!(close(s.beta(&h, &[1.0, 1.0]).unwrap(), -2f64.sqrt(), 1e-15));
    }

    #[test]
    fn conditional_density_examples() {
        let s = GaussianProductSpace::plane();
        let e1 = Direction::basis(0, 2);
        let v = s.conditional_density(&[0.0, 3.0], &e1, 0.0).unwrap();
        assert!(close(v, 0.398_942_280_401_432_7, 1e-15));
        let v = s.conditional_density(&[1.0, 0.0], &e1, -1.0).unwrap();
        assert!(close(v, 0.398_942_280_401_432_7, 1e-15));
        assert_eq!(
            s.conditional_density(&[1.0, 0.0], &Direction::new(vec![0.0, 0.0]), 0.0),
            Err(Error::ZeroDirection)
        );
    }

    #[test]
    fn conditional_density_normalized() {
        let s = GaussianProductSpace::plane();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let x = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let h = Direction::new(vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]);
            if h.h_norm() < 0.05 {
                continue;
            }
            let e = crate::quad::integrate(
                |t| s.conditional_density(&x, &h, t).unwrap(),
                f64::NEG_INFINITY,
                f64::INFINITY,
                QuadOptions::default(),
            )
            .unwrap();
            assert!((e.value - 1.0).abs() < 1e-8, "{x:?} {h:?} {}", e.value);
        }
    }

    #[test]
    fn disintegration_identity() {
        // ∫ g dγ = ∫ φ(s) ∫ g(x + s h⊥ + t h) ϱ^{x + s h⊥, h}(t) dt ds
        let s = GaussianProductSpace::plane();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let (a, b, c) = (
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.2..2.0),
            );
            let g = move |p: Point2| (a * p[0] + b * p[1]).sin() / (1.0 + c * p[0] * p[0]);
            let th: f64 = rng.random_range(0.0..TAU);
            let h = [th.cos(), th.sin()];
            let perp = [-h[1], h[0]];
            let x0 = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let dir = Direction::new(h.to_vec());
            let iterated = crate::quad::integrate(
                |sv| {
                    // base point on the line through x0 offset by sv along perp
                    let base = [x0[0] + sv * perp[0], x0[1] + sv * perp[1]];
                    let off = dot2(base, perp);
                    let inner = crate::quad::integrate(
                        |t| {
                            g([base[0] + t * h[0], base[1] + t * h[1]])
                                * s.conditional_density(&base, &dir, t).unwrap()
                        },
                        f64::NEG_INFINITY,
                        f64::INFINITY,
                        QuadOptions::rel(1e-10).with_abs(1e-14),
                    )
                    .unwrap()
                    .value;
                    inner * std_normal_pdf(off)
                },
                f64::NEG_INFINITY,
                f64::INFINITY,
                QuadOptions::rel(1e-9).with_abs(1e-13),
            )
            .unwrap()
            .value;
            let direct = gaussian_expectation_2d(g, 1e-9).unwrap();
            assert!((iterated - direct).abs() < 1e-6, "{iterated} vs {direct}");
        }
    }

    #[test]
    fn beta_integration_by_parts() {
        // φ(x) = exp(-1/(1-|x-c|²/r²)) bump; ∫ ∂_h φ dγ + ∫ φ β_h dγ = 0
        let s = GaussianProductSpace::plane();
        for (c, r, th) in [([0.3, -0.2], 1.5, 0.4), ([1.0, 1.0], 0.8, 2.0), ([-0.5, 0.7], 2.2, 5.0)] {
            let h = [f64::cos(th), f64::sin(th)];
            let dir = Direction::new(h.to_vec());
            let phi = move |x: Point2| {
                let q = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (r * r);
                if q < 1.0 {
                    (-1.0 / (1.0 - q)).exp()
                } else {
                    0.0
                }
            };
            let dphi = move |x: Point2| {
                let q = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (r * r);
                if q < 1.0 {
                    let e = (-1.0 / (1.0 - q)).exp();
                    let dq = [2.0 * (x[0] - c[0]) / (r * r), 2.0 * (x[1] - c[1]) / (r * r)];
                    -e / (1.0 - q).powi(2) * dot2(dq, h)
                } else {
                    0.0
                }
            };
            let disc = PlanarDomain::disc(c, r).unwrap();
            let mode = WeightMode::GaussianRelative { anchor: [0.0, 0.0] };
            let o = Quad2dOptions::tol(1e-10);
            let a = quad_integrate_2d(mode, &[disc.clone()], dphi, &o).unwrap().value;
            let b = quad_integrate_2d(mode, &[disc], |x| phi(x) * s.beta(&dir, &x).unwrap(), &o)
                .unwrap()
                .value;
            assert!(((a + b) / (2.0 * PI)).abs() < 1e-6, "{a} {b}");
        }
    }

    #[test]
    fn density_ratio_examples() {
        assert!(density_ratio_in_bounds([3.0, 4.0], [3.0, 4.0]));
        let lr = log_density_ratio([10.0, 0.0], [10.05, 0.0]);
        assert!(close(lr, 0.50125, 1e-12));
        assert!(density_ratio_in_bounds([10.0, 0.0], [10.05, 0.0]));
        // extreme admissible pairs sit on the bounds
        for r in [1.0, 5.0, 50.0] {
            let d = 1.0f64.min(1.0 / r);
            assert!(density_ratio_in_bounds([r, 0.0], [r - d, 0.0]));
            assert!(density_ratio_in_bounds([r, 0.0], [r + d, 0.0]));
        }
        // inadmissible pair is vacuous
        assert!(density_ratio_in_bounds([10.0, 0.0], [20.0, 0.0]));
    }

    #[test]
    fn mc_examples() {
        let s = GaussianProductSpace::plane();
        let one = s.mc_integrate(|_| 1.0, |_| true, 10_000, 1).unwrap();
        assert_eq!(one.mean, 1.0);
        assert_eq!(one.std_error, 0.0);
        let half = s.mc_integrate(|_| 1.0, |x| x[0] > 0.0, 40_000, 2).unwrap();
        assert!((half.mean - 0.5).abs() < 3.0 * half.std_error);
        let m2 = s.mc_integrate(|x| x[0] * x[0], |_| true, 40_000, 3).unwrap();
        assert!((m2.mean - 1.0).abs() < 3.0 * m2.std_error);
        let again = s.mc_integrate(|x| x[0] * x[0], |_| true, 40_000, 3).unwrap();
        assert_eq!(m2, again);
        let other = s.mc_integrate(|x| x[0] * x[0], |_| true, 40_000, 4).unwrap();
        let comb = (m2.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        assert!((m2.mean - other.mean).abs() < 4.0 * comb);
        let bad = s.mc_integrate(|x| 1.0 / (x[0] > 0.0) as u8 as f64, |_| true, 100, 3);
        assert!(matches!(bad, Err(Error::NonFiniteSample { .. })));
        assert!(s.mc_integrate(|_| 1.0, |_| true, 0, 3).is_err());
    }

    #[test]
    fn mc_error_halves_with_fourfold_samples() {
        let s = GaussianProductSpace::plane();
        let a = s.mc_integrate(|x| x[0], |_| true, 16_384, 9).unwrap();
        let b = s.mc_integrate(|x| x[0], |_| true, 65_536, 9).unwrap();
        let r = a.std_error / b.std_error;
        assert!((r - 2.0).abs() < 0.1, "{r}");
    }

    #[test]
    fn quad_2d_examples() {
        let sq = PlanarDomain::rectangle(0.0, 1.0, 0.0, 1.0).unwrap();
        let v = quad_integrate_2d(WeightMode::Lebesgue, &[sq], |_| 1.0, &Quad2dOptions::default()).unwrap();
        assert!(close(v.value, 1.0, 1e-12));
        let disc = PlanarDomain::disc([0.0, 0.0], 1.0).unwrap();
        let v = quad_integrate_2d(WeightMode::Lebesgue, &[disc], |_| 1.0, &Quad2dOptions::tol(1e-8)).unwrap();
        assert!((v.value - PI).abs() < 1e-7 * PI);
        let hp = PlanarDomain::half_plane([1.0, 0.0], 0.0).unwrap();
        assert_eq!(
            quad_integrate_2d(WeightMode::Lebesgue, &[hp], |_| 1.0, &Quad2dOptions::default()),
            Err(Error::UnboundedRegion)
        );
    }

    #[test]
    fn quad_2d_hat_gradient_on_k2() {
        // |∇f₂| = 4 on the part of the radius-1/4 disc about (4,0) inside K₂
        let k2 = PlanarDomain::rhomb(2).unwrap();
        let a = [4.0, 0.0];
        let support = PlanarDomain::disc(a, 0.25).unwrap();
        let o = Quad2dOptions::tol(1e-9).with_circle(a, 0.25);
        let v = quad_integrate_2d(WeightMode::Lebesgue, &[k2, support], |_| 4.0, &o).unwrap();
        assert!((v.value - 0.5f64.atan() / 4.0).abs() < 1e-8, "{}", v.value);
    }

    #[test]
    fn gaussian_relative_anchor() {
        // ∫_{disc(a, r)} ϱ/ϱ(a) for large |a|: compare with polar evaluation
        let a = [256.0, 0.0];
        let r = 1.0 / 256.0;
        let disc = PlanarDomain::disc(a, r).unwrap();
        let v = quad_integrate_2d(
            WeightMode::GaussianRelative { anchor: a },
            &[disc.clone()],
            |_| 1.0,
            &Quad2dOptions::tol(1e-9),
        )
        .unwrap();
        let p = polar_integrate(
            a,
            r,
            &[disc],
            &[],
            &[],
            |rr, th| (-(256.0 * rr * th.cos()) - 0.5 * rr * rr).exp(),
            QuadOptions::rel(1e-11),
        )
        .unwrap();
        assert!((v.value / p.value - 1.0).abs() < 1e-7);
        assert!(close(v.reference_log, -32768.0 - LN_2PI, 1e-9));
        assert!(v.to_log_weight().value() == 0.0);
    }

    proptest! {
        #[test]
        fn ratio_bounds_hold(r in 0.0f64..50.0, th in 0.0f64..TAU, phi in 0.0f64..TAU, frac in 0.0f64..=1.0) {
            let x = [r * th.cos(), r * th.sin()];
            let d = frac * 1.0f64.min(1.0 / r);
            let y = [x[0] + d * phi.cos(), x[1] + d * phi.sin()];
            prop_assert!(density_ratio_in_bounds(x, y));
        }

        #[test]
        fn log_density_symmetric(a in -100.0f64..100.0, b in -100.0f64..100.0) {
            let s = GaussianProductSpace::plane();
            prop_assert_eq!(s.log_density(&[a, b]).unwrap(), s.log_density(&[-a, -b]).unwrap());
        }
    }
}
