//! One-dimensional quadrature: adaptive Gauss–Kronrod (7/15) and fixed
//! Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Stopping rule for adaptive integration: stop once the error estimate is
/// below `max(abs_tol, rel_tol·|value|)`.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol: 0.0,
            ..Self::default()
        }
    }

    pub fn with_abs(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_limit(mut self, max_subdivisions: usize) -> Self {
        self.max_subdivisions = max_subdivisions;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Piece {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Adaptive integral of `f` over `[a, b]`; either bound may be infinite.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadEstimate> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Adaptive integral over `[points[0], points[last]]`, seeding the
/// subdivision at every listed point (kinks, jumps, support edges).
///
/// The outer points may be infinite; interior points must be finite.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: QuadOptions,
) -> Result<QuadEstimate> {
    if points.len() < 2 {
        return Ok(QuadEstimate {
            value: 0.0,
            error: 0.0,
            subdivisions: 0,
        });
    }
    let lo = points[0];
    let hi = points[points.len() - 1];
    if lo > hi {
        let rev: Vec<f64> = points.iter().rev().copied().collect();
        let est = integrate_sorted(f, &rev, opts)?;
        return Ok(QuadEstimate {
            value: -est.value,
            ..est
        });
    }
    integrate_sorted(f, points, opts)
}

fn integrate_sorted<F: FnMut(f64) -> f64>(f: F, points: &[f64], opts: QuadOptions) -> Result<QuadEstimate> {
    if points[0].is_infinite() || points[points.len() - 1].is_infinite() {
        integrate_infinite(f, points, opts)
    } else {
        integrate_finite(f, points, opts)
    }
}

fn integrate_finite<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], opts: QuadOptions) -> Result<QuadEstimate> {
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let p = gk15(&mut f, w[0], w[1]);
            value += p.value;
            error += p.error;
            heap.push(p);
        }
    }
    adapt(&mut f, heap, value, error, opts)
}

fn adapt<F: FnMut(f64) -> f64>(
    f: &mut F,
    mut heap: BinaryHeap<Piece>,
    mut value: f64,
    mut error: f64,
    opts: QuadOptions,
) -> Result<QuadEstimate> {
    let mut subdivisions = heap.len();
    // pieces at machine resolution; kept with their error, never split again
    let mut frozen: Vec<Piece> = Vec::new();
    while error > opts.target(value) {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= 1e-14 * worst.a.abs().max(worst.b.abs()) {
            frozen.push(worst);
            continue;
        }
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::QuadratureLimit {
                tol: opts.target(value),
                evaluations: subdivisions,
                estimate: value,
                error,
            });
        }
        let left = gk15(f, worst.a, mid);
        let right = gk15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
    // re-sum to shed the drift of the running totals
    let (value, error) = heap
        .iter()
        .chain(frozen.iter())
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(QuadEstimate {
        value,
        error,
        subdivisions,
    })
}

fn integrate_infinite<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], opts: QuadOptions) -> Result<QuadEstimate> {
    let lo = points[0];
    let hi = points[points.len() - 1];
    let interior: Vec<f64> = points[1..points.len() - 1].to_vec();
    let mut total = QuadEstimate {
        value: 0.0,
        error: 0.0,
        subdivisions: 0,
    };
    let add = |e: QuadEstimate, total: &mut QuadEstimate| {
        total.value += e.value;
        total.error += e.error;
        total.subdivisions += e.subdivisions;
    };
    match (lo.is_infinite(), hi.is_infinite(), interior.is_empty()) {
        (true, true, true) => {
            // t = u / (1 - u²)
            let g = |u: f64| {
                let d = 1.0 - u * u;
                let t = u / d;
                let v = f(t);
                if v == 0.0 {
                    0.0
                } else {
                    v * (1.0 + u * u) / (d * d)
                }
            };
            let e = integrate_finite(g, &[-1.0, 0.0, 1.0], opts)?;
            add(e, &mut total);
        }
        _ => {
            let first = if lo.is_infinite() {
                *interior.first().unwrap_or(&0.0)
            } else {
                lo
            };
            let last = if hi.is_infinite() {
                *interior.last().unwrap_or(&first)
            } else {
                hi
            };
            if lo.is_infinite() {
                let e = integrate_finite(
                    |u: f64| {
                        let d = 1.0 - u;
                        let v = f(first - u / d);
                        if v == 0.0 {
                            0.0
                        } else {
                            v / (d * d)
                        }
                    },
                    &[0.0, 1.0],
                    opts,
                )?;
                add(e, &mut total);
            }
            let mut mids = vec![first];
            mids.extend(interior.iter().copied().filter(|&p| p > first && p < last));
            mids.push(last);
            if last > first {
                let e = integrate_finite(&mut f, &mids, opts)?;
                add(e, &mut total);
            }
            if hi.is_infinite() {
                let e = integrate_finite(
                    |u: f64| {
                        let d = 1.0 - u;
                        let v = f(last + u / d);
                        if v == 0.0 {
                            0.0
                        } else {
                            v / (d * d)
                        }
                    },
                    &[0.0, 1.0],
                    opts,
                )?;
                add(e, &mut total);
            }
        }
    }
    Ok(total)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (p, pm1) = if n == 0 { (1.0, 0.0) } else if n == 1 { (x, 1.0) } else { (p1, p0) };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre nodes/weights on `[a, b]` split at `breaks`,
/// `per_piece` nodes per piece.
pub fn composite_gauss_legendre(points: &[f64], per_piece: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(per_piece);
    let mut out = Vec::with_capacity(per_piece * points.len());
    for seg in points.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        for (xi, wi) in x.iter().zip(&w) {
            out.push((c + h * xi, h * wi));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let e = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, QuadOptions::default()).unwrap();
        assert!((e.value - (15.0 / 4.0 - 3.0 + 3.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_over_real_line() {
        let e = integrate(|x| (-0.5 * x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, QuadOptions::default()).unwrap();
        assert!((e.value - (2.0 * PI).sqrt()).abs() < 1e-10);
        let half = integrate(|x| (-0.5 * x * x).exp(), 0.0, f64::INFINITY, QuadOptions::default()).unwrap();
        assert!((half.value - (PI / 2.0).sqrt()).abs() < 1e-10);
        let split = integrate_with_breaks(
            |x| (-0.5 * x * x).exp(),
            &[f64::NEG_INFINITY, -1.0, 0.5, f64::INFINITY],
            QuadOptions::default(),
        )
        .unwrap();
        assert!((split.value - (2.0 * PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn endpoint_singularity() {
        let e = integrate(|x| x.sqrt(), 0.0, 1.0, QuadOptions::rel(1e-10)).unwrap();
        assert!((e.value - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn jump_with_and_without_breakpoint() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let with = integrate_with_breaks(step, &[0.0, 0.3, 1.0], QuadOptions::default()).unwrap();
        assert!((with.value - 1.7).abs() < 1e-14);
        let without = integrate(step, 0.0, 1.0, QuadOptions::rel(1e-9).with_limit(5000)).unwrap();
        assert!((without.value - 1.7).abs() < 1e-8);
    }

    #[test]
    fn limit_is_reported() {
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-9, 1.0, QuadOptions::rel(1e-14).with_limit(10));
        assert!(matches!(r, Err(Error::QuadratureLimit { .. })));
    }

    #[test]
    fn legendre_rule() {
        for n in [1usize, 2, 5, 12, 40] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            // exact for degree 2n-1
            let deg = 2 * n - 2;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((q - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "n={n}");
        }
    }
}
