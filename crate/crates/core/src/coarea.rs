//! Grid total variation, level-set perimeters and the coarea identity.
//!
//! A [`GridFunction`] carries node values on a rectangular lattice plus a
//! node mask. A cell is *active* when its four corners are masked in; total
//! variation and perimeters are both taken over active cells, so the two
//! sides of the coarea identity see the same region.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Point2, Result};

const MAGIC: &[u8; 8] = b"GBVGRID1";

/// Node values on `origin + (i·hx, j·hy)`, `0 ≤ i < nx`, `0 ≤ j < ny`,
/// stored row-major (`j·nx + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    origin: Point2,
    spacing: [f64; 2],
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    mask: Vec<bool>,
}

/// Perimeter of `{g > t}` inside the active region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSetReport {
    /// The level actually used (after any nudge).
    pub t: f64,
    pub perimeter: f64,
    /// `min g < t < max g` on the mask, i.e. the contour is nonempty in principle.
    pub inside_region_flag: bool,
    /// Set when the requested level hit a node value and was moved by this amount.
    pub nudged_by: Option<f64>,
}

/// Both sides of `∫|∇g| = ∫ P({g > t}) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoareaCheck {
    pub total_variation: f64,
    pub perimeter_integral: f64,
    pub residual: f64,
    pub levels: usize,
}

/// JSON sidecar of the binary grid layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSidecar {
    pub nx: usize,
    pub ny: usize,
    pub origin: Point2,
    pub spacing: [f64; 2],
    /// Runs `[start, length]` of masked-in nodes in row-major order.
    pub mask_runs: Vec<[usize; 2]>,
}

impl GridFunction {
    pub fn new(origin: Point2, spacing: [f64; 2], nx: usize, ny: usize, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if !(spacing[0] > 0.0 && spacing[1] > 0.0) {
            return Err(Error::MalformedGrid(format!("spacing must be positive, got {spacing:?}")));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::MalformedGrid(format!("need at least 2x2 nodes, got {nx}x{ny}")));
        }
        if values.len() != nx * ny || mask.len() != nx * ny {
            return Err(Error::MalformedGrid(format!(
                "expected {} values and mask entries, got {} and {}",
                nx * ny,
                values.len(),
                mask.len()
            )));
        }
        if let Some(k) = (0..nx * ny).find(|&k| mask[k] && !values[k].is_finite()) {
            return Err(Error::MalformedGrid(format!("non-finite value at masked node {k}")));
        }
        Ok(Self {
            origin,
            spacing,
            nx,
            ny,
            values,
            mask,
        })
    }

    /// Samples `f` on the `nx × ny` lattice spanning `[lo, hi]`; nodes where
    /// `inside` is false are masked out (and stored as 0).
    pub fn sample<F, M>(lo: Point2, hi: Point2, nx: usize, ny: usize, f: F, inside: M) -> Result<Self>
    where
        F: Fn(Point2) -> f64,
        M: Fn(Point2) -> bool,
    {
        if nx < 2 || ny < 2 || !(hi[0] > lo[0] && hi[1] > lo[1]) {
            return Err(Error::MalformedGrid("degenerate sampling box".into()));
        }
        let hx = (hi[0] - lo[0]) / (nx - 1) as f64;
        let hy = (hi[1] - lo[1]) / (ny - 1) as f64;
        let mut values = Vec::with_capacity(nx * ny);
        let mut mask = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let x = [lo[0] + i as f64 * hx, lo[1] + j as f64 * hy];
                let m = inside(x);
                mask.push(m);
                values.push(if m { f(x) } else { 0.0 });
            }
        }
        Self::new(lo, [hx, hy], nx, ny, values, mask)
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn node(&self, i: usize, j: usize) -> Point2 {
        [
            self.origin[0] + i as f64 * self.spacing[0],
            self.origin[1] + j as f64 * self.spacing[1],
        ]
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    /// New grid with `h(g)` applied at every masked node.
    pub fn map<H: Fn(f64) -> f64>(&self, h: H) -> Self {
        let mut out = self.clone();
        for (v, &m) in out.values.iter_mut().zip(&self.mask) {
            if m {
                *v = h(*v);
            }
        }
        out
    }

    fn cell_active(&self, i: usize, j: usize) -> bool {
        self.mask[self.idx(i, j)]
            && self.mask[self.idx(i + 1, j)]
            && self.mask[self.idx(i, j + 1)]
            && self.mask[self.idx(i + 1, j + 1)]
    }

    fn active_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.ny - 1).flat_map(move |j| (0..self.nx - 1).map(move |i| (i, j))).filter(|&(i, j)| self.cell_active(i, j))
    }

    /// Number of active cells.
    pub fn active_cell_count(&self) -> usize {
        self.active_cells().count()
    }

    /// `(min, max)` over masked nodes.
    pub fn range(&self) -> Option<(f64, f64)> {
        let mut it = self.values.iter().zip(&self.mask).filter(|(_, &m)| m).map(|(v, _)| *v);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    /// `Σ_cells |∇g(center)|·w(center)·hx·hy` over active cells, the gradient
    /// taken by central differences at the cell midpoint.
    pub fn total_variation(&self, weight: Option<&dyn Fn(Point2) -> f64>) -> f64 {
        let [hx, hy] = self.spacing;
        let mut sum = 0.0;
        for (i, j) in self.active_cells() {
            let v00 = self.value(i, j);
            let v10 = self.value(i + 1, j);
            let v01 = self.value(i, j + 1);
            let v11 = self.value(i + 1, j + 1);
            let gx = (v10 + v11 - v00 - v01) / (2.0 * hx);
            let gy = (v01 + v11 - v00 - v10) / (2.0 * hy);
            let w = match weight {
                Some(w) => {
                    let c = self.node(i, j);
                    w([c[0] + 0.5 * hx, c[1] + 0.5 * hy])
                }
                None => 1.0,
            };
            sum += gx.hypot(gy) * w;
        }
        sum * hx * hy
    }

    /// Length of `{g = t}` inside the active cells by marching squares.
    pub fn level_perimeter(&self, t: f64) -> Result<LevelSetReport> {
        self.level_perimeter_weighted(t, None)
    }

    /// As [`level_perimeter`](Self::level_perimeter), each segment weighted by
    /// `w` at its midpoint.
    pub fn level_perimeter_weighted(&self, t: f64, weight: Option<&dyn Fn(Point2) -> f64>) -> Result<LevelSetReport> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: "level must be finite".into(),
            });
        }
        let Some((lo, hi)) = self.range() else {
            return Err(Error::MalformedGrid("empty mask".into()));
        };
        let mut level = t;
        let mut nudged_by = None;
        let hits = |l: f64| self.values.iter().zip(&self.mask).any(|(v, &m)| m && *v == l);
        if hits(level) {
            let eps = 1e-12 * (hi - lo).max(f64::MIN_POSITIVE);
            // move toward the interior of the range so end levels stay meaningful
            let dir = if t >= 0.5 * (lo + hi) { -1.0 } else { 1.0 };
            let mut k = 1.0;
            while hits(level) {
                level = t + dir * k * eps;
                k *= 2.0;
            }
            nudged_by = Some(level - t);
        }
        let inside = lo < level && level < hi;
        let mut perimeter = 0.0;
        if inside {
            for (i, j) in self.active_cells() {
                perimeter += self.cell_contour(i, j, level, weight);
            }
        }
        Ok(LevelSetReport {
            t: level,
            perimeter,
            inside_region_flag: inside,
            nudged_by,
        })
    }

    fn cell_contour(&self, i: usize, j: usize, t: f64, weight: Option<&dyn Fn(Point2) -> f64>) -> f64 {
        // corners counterclockwise: (i,j), (i+1,j), (i+1,j+1), (i,j+1)
        let p = [self.node(i, j), self.node(i + 1, j), self.node(i + 1, j + 1), self.node(i, j + 1)];
        let v = [
            self.value(i, j),
            self.value(i + 1, j),
            self.value(i + 1, j + 1),
            self.value(i, j + 1),
        ];
        let above = v.map(|x| x > t);
        let count = above.iter().filter(|&&a| a).count();
        if count == 0 || count == 4 {
            return 0.0;
        }
        // crossing on edge k (corner k -> corner k+1)
        let cross = |k: usize| -> Option<Point2> {
            let l = (k + 1) % 4;
            if above[k] == above[l] {
                return None;
            }
            let s = (t - v[k]) / (v[l] - v[k]);
            Some([p[k][0] + s * (p[l][0] - p[k][0]), p[k][1] + s * (p[l][1] - p[k][1])])
        };
        let seg = |a: Point2, b: Point2| -> f64 {
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            match weight {
                Some(w) => len * w([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]),
                None => len,
            }
        };
        let pts: Vec<Point2> = (0..4).filter_map(cross).collect();
        if pts.len() == 2 {
            return seg(pts[0], pts[1]);
        }
        // saddle: cut off the corners whose state differs from the cell average
        let center_above = (v[0] + v[1] + v[2] + v[3]) / 4.0 > t;
        let mut total = 0.0;
        for k in 0..4 {
            if above[k] != center_above {
                let before = cross((k + 3) % 4).expect("saddle edges all cross");
                let after = cross(k).expect("saddle edges all cross");
                total += seg(before, after);
            }
        }
        total
    }

    /// Levels for the `t`-integral: `t_samples + 1` uniform points over the
    /// value range, plus `breakpoints` inside it.
    pub fn coarea_identity_check(&self, t_samples: usize, breakpoints: &[f64]) -> Result<CoareaCheck> {
        if t_samples < 16 {
            return Err(Error::InvalidParameter {
                name: "t_samples",
                reason: format!("need at least 16 levels, got {t_samples}"),
            });
        }
        let tv = self.total_variation(None);
        let (lo, hi) = self.range().ok_or_else(|| Error::MalformedGrid("empty mask".into()))?;
        if tv == 0.0 || hi <= lo {
            return Ok(CoareaCheck {
                total_variation: tv,
                perimeter_integral: 0.0,
                residual: 0.0,
                levels: 0,
            });
        }
        let mut ts: Vec<f64> = (0..=t_samples)
            .map(|k| lo + (hi - lo) * k as f64 / t_samples as f64)
            .collect();
        ts.extend(breakpoints.iter().copied().filter(|b| *b > lo && *b < hi));
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut ps = Vec::with_capacity(ts.len());
        for &t in &ts {
            ps.push(self.level_perimeter(t)?.perimeter);
        }
        let integral: f64 = ts
            .windows(2)
            .zip(ps.windows(2))
            .map(|(t, p)| 0.5 * (t[1] - t[0]) * (p[0] + p[1]))
            .sum();
        Ok(CoareaCheck {
            total_variation: tv,
            perimeter_integral: integral,
            residual: (tv - integral).abs() / tv,
            levels: ts.len(),
        })
    }

    pub fn sidecar(&self) -> GridSidecar {
        let mut runs = Vec::new();
        let mut k = 0;
        while k < self.mask.len() {
            if self.mask[k] {
                let start = k;
                while k < self.mask.len() && self.mask[k] {
                    k += 1;
                }
                runs.push([start, k - start]);
            } else {
                k += 1;
            }
        }
        GridSidecar {
            nx: self.nx,
            ny: self.ny,
            origin: self.origin,
            spacing: self.spacing,
            mask_runs: runs,
        }
    }

    /// Flat little-endian layout: magic, `nx`, `ny` (u64), origin and spacing
    /// (f64 ×4), then `nx·ny` f64 values row-major.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.nx as u64).to_le_bytes())?;
        w.write_all(&(self.ny as u64).to_le_bytes())?;
        for v in [self.origin[0], self.origin[1], self.spacing[0], self.spacing[1]] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R, sidecar: &GridSidecar) -> Result<Self> {
        let io = |e: std::io::Error| Error::MalformedGrid(e.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(Error::MalformedGrid("bad magic".into()));
        }
        let mut b8 = [0u8; 8];
        let mut next_u64 = |r: &mut R| -> Result<u64> {
            r.read_exact(&mut b8).map_err(io)?;
            Ok(u64::from_le_bytes(b8))
        };
        let nx = next_u64(&mut r)? as usize;
        let ny = next_u64(&mut r)? as usize;
        let mut head = [0.0; 4];
        for h in head.iter_mut() {
            *h = f64::from_bits(next_u64(&mut r)?);
        }
        if nx != sidecar.nx || ny != sidecar.ny || head != [sidecar.origin[0], sidecar.origin[1], sidecar.spacing[0], sidecar.spacing[1]] {
            return Err(Error::MalformedGrid("binary header disagrees with sidecar".into()));
        }
        let n = nx.checked_mul(ny).ok_or_else(|| Error::MalformedGrid("dims overflow".into()))?;
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(f64::from_bits(next_u64(&mut r)?));
        }
        let mut mask = vec![false; n];
        for &[start, len] in &sidecar.mask_runs {
            if start + len > n {
                return Err(Error::MalformedGrid("mask run out of range".into()));
            }
            mask[start..start + len].iter_mut().for_each(|m| *m = true);
        }
        Self::new([head[0], head[1]], [head[2], head[3]], nx, ny, values, mask)
    }
}

/// A named test function for the coarea identity, with the levels where its
/// perimeter profile has kinks.
#[derive(Debug, Clone)]
pub struct LibraryEntry {
    pub name: String,
    pub grid: GridFunction,
    pub breakpoints: Vec<f64>,
}

/// The coarea test library at `res × res` nodes: a plane, a cone, a
/// truncated paraboloid, a smoothed indicator, and `f_m` on the wedge of
/// `K_m` (apex-rescaled coordinates) for each `m` in `hat_ms`.
pub fn coarea_library(res: usize, hat_ms: &[u32]) -> Result<Vec<LibraryEntry>> {
    let disc = |x: Point2| x[0].hypot(x[1]) <= 1.0;
    let smooth_step = |u: f64| {
        let u = u.clamp(0.0, 1.0);
        u * u * (3.0 - 2.0 * u)
    };
    let mut lib = vec![
        LibraryEntry {
            name: "plane".into(),
            grid: GridFunction::sample([0.0, 0.0], [1.0, 1.0], res, res, |x| x[0], |_| true)?,
            breakpoints: vec![],
        },
        LibraryEntry {
            name: "cone".into(),
            grid: GridFunction::sample([-1.0, -1.0], [1.0, 1.0], res, res, |x| x[0].hypot(x[1]), disc)?,
            breakpoints: vec![],
        },
        LibraryEntry {
            name: "truncated_paraboloid".into(),
            grid: GridFunction::sample([-1.0, -1.0], [1.0, 1.0], res, res, |x| (2.0 * (x[0] * x[0] + x[1] * x[1])).min(1.0), |_| true)?,
            breakpoints: vec![1.0],
        },
        LibraryEntry {
            name: "smoothed_indicator".into(),
            grid: GridFunction::sample(
                [-1.0, -1.0],
                [1.0, 1.0],
                res,
                res,
                |x| smooth_step((0.7 - x[0].hypot(x[1])) / 0.3),
                |_| true,
            )?,
            breakpoints: vec![0.0, 1.0],
        },
    ];
    for &m in hat_ms {
        let hat = crate::norms::HatFunction::new(m)?;
        lib.push(LibraryEntry {
            name: format!("hat_m{m}"),
            grid: GridFunction::sample([-1.25, -0.65], [0.05, 0.65], res, res, |u| hat.eval_local(u), |u| hat.local_in_rhomb(u))?,
            breakpoints: vec![0.0],
        });
    }
    Ok(lib)
}

/// `H₁(U ∩ ∂E_t) / (m·H₁(K_m ∩ ∂S_t))` for a candidate extension sampled in
/// apex-rescaled coordinates (both lengths scale by `m⁻²`, which cancels).
pub fn perimeter_comparison(g_ext_local: &GridFunction, hat: &crate::norms::HatFunction, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::EmptyLevelSet(t));
    }
    let m = hat.m() as f64;
    // arc length of ∂S_t ∩ K_m in local units
    let arc = 2.0 * hat.half_angle() * (1.0 - t);
    let p = g_ext_local.level_perimeter(t)?.perimeter;
    Ok(p / (m * arc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::HatFunction;
    use std::f64::consts::PI;

    fn unit_square(n: usize, f: impl Fn(Point2) -> f64) -> GridFunction {
        GridFunction::sample([0.0, 0.0], [1.0, 1.0], n, n, f, |_| true).unwrap()
    }

    #[test]
    fn plane_examples() {
        let g = unit_square(65, |x| x[0]);
        assert!((g.total_variation(None) - 1.0).abs() < 1e-12);
        let r = g.level_perimeter(0.5).unwrap();
        assert!((r.perimeter - 1.0).abs() < 1e-12);
        assert!(r.nudged_by.is_some());
        let r = g.level_perimeter(0.3).unwrap();
        assert!((r.perimeter - 1.0).abs() < 1e-12 && r.nudged_by.is_none());
        assert_eq!(g.level_perimeter(2.0).unwrap().perimeter, 0.0);
        let c = g.coarea_identity_check(64, &[]).unwrap();
        assert!(c.residual < 1e-9, "{c:?}");
        assert!(g.coarea_identity_check(8, &[]).is_err());
    }

    #[test]
    fn constant_has_no_variation() {
        let g = unit_square(17, |_| 3.0);
        assert_eq!(g.total_variation(None), 0.0);
        assert_eq!(g.coarea_identity_check(16, &[]).unwrap().residual, 0.0);
    }

    #[test]
    fn circle_length_converges() {
        let mut prev = f64::INFINITY;
        for n in [65usize, 129, 257] {
            let g = GridFunction::sample([-1.0, -1.0], [1.0, 1.0], n, n, |x| x[0].hypot(x[1]), |x| x[0].hypot(x[1]) < 1.0)
                .unwrap();
            let r = g.level_perimeter(0.5).unwrap();
            let err = (r.perimeter / PI - 1.0).abs();
            assert!(err < 0.02);
            assert!(err < prev, "{n}: {err} vs {prev}");
            prev = err;
        }
    }

    #[test]
    fn saddle_cell_uses_average() {
        // corners 1,0,1,0 around the cell: average 0.5
        let g = GridFunction::new([0.0, 0.0], [1.0, 1.0], 2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![true; 4]).unwrap();
        let low = g.level_perimeter(0.25).unwrap().perimeter;
        let high = g.level_perimeter(0.75).unwrap().perimeter;
        // t = 0.25 < avg: the low corners are cut off; t = 0.75: the high ones
        let d = (0.25f64.powi(2) * 2.0).sqrt();
        assert!((low - 2.0 * d).abs() < 1e-12);
        assert!((high - 2.0 * d).abs() < 1e-12);
    }

    #[test]
    fn truncation_does_not_increase_variation() {
        let g = unit_square(101, |x| 3.0 * x[0] * x[0] - x[1] - 0.5);
        let trunc = g.map(|v| v.clamp(0.0, 1.0));
        assert!(trunc.total_variation(None) <= g.total_variation(None));
        // for g₀ ∈ [0,1] the truncation is the identity
        let g0 = unit_square(101, |x| 0.5 * (x[0] + x[1]));
        let t0 = g0.map(|v| v.clamp(0.0, 1.0));
        assert_eq!(g0, t0);
    }

    #[test]
    fn library_identity_at_moderate_resolution() {
        for e in coarea_library(257, &[4, 8]).unwrap() {
            let c = e.grid.coarea_identity_check(64, &e.breakpoints).unwrap();
            assert!(c.residual < 0.02, "{}: {c:?}", e.name);
        }
    }

    #[test]
    fn hat_in_local_frame() {
        let hat = HatFunction::new(4).unwrap();
        let g = GridFunction::sample([-2.0, -2.0], [2.0, 2.0], 401, 401, |u| hat.eval_local(u), |_| true).unwrap();
        // radial hat: full circle contour, ratio ≈ π / (m·arctan(1/m))·... ≥ 1
        let r = perimeter_comparison(&g, &hat, 0.5).unwrap();
        let exact = 2.0 * PI * 0.5 / (4.0 * 2.0 * 0.25f64.atan() * 0.5);
        assert!((r / exact - 1.0).abs() < 0.01, "{r} {exact}");
        assert!(matches!(perimeter_comparison(&g, &hat, 1.0), Err(Error::EmptyLevelSet(_))));
        // arc length closed form in absolute units for m = 4, t = 0.5
        assert!((hat.level_arc_length(0.5) - 0.015_31).abs() < 1e-5);
    }

    #[test]
    fn zero_extension_perimeter_at_least_support_radius() {
        for m in [4u32, 8] {
            let hat = HatFunction::new(m).unwrap();
            let g = GridFunction::sample(
                [-2.0, -2.0],
                [2.0, 2.0],
                801,
                801,
                |u| if hat.local_in_rhomb(u) { hat.eval_local(u) } else { 0.0 },
                |u| u[0].hypot(u[1]) < 2.0,
            )
            .unwrap();
            // local unit = m⁻² in absolute length
            let p = g.level_perimeter(0.5).unwrap().perimeter;
            assert!(p >= 1.0 * 0.98, "m={m}: {p}");
        }
    }

    #[test]
    fn binary_round_trip() {
        let g = GridFunction::sample([-1.0, 0.5], [1.0, 2.0], 7, 5, |x| x[0] * x[1], |x| x[0] < 0.6).unwrap();
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 16 + 32 + 8 * 35);
        let side = g.sidecar();
        let json = serde_json::to_string(&side).unwrap();
        let side2: GridSidecar = serde_json::from_str(&json).unwrap();
        let back = GridFunction::read_binary(&buf[..], &side2).unwrap();
        assert_eq!(back, g);
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(GridFunction::read_binary(&bad[..], &side).is_err());
        assert!(GridFunction::read_binary(&buf[..20], &side).is_err());
    }

    #[test]
    fn rejects_malformed() {
        assert!(GridFunction::new([0.0, 0.0], [0.0, 1.0], 2, 2, vec![0.0; 4], vec![true; 4]).is_err());
        assert!(GridFunction::new([0.0, 0.0], [1.0, 1.0], 2, 2, vec![0.0; 3], vec![true; 4]).is_err());
        assert!(GridFunction::new([0.0, 0.0], [1.0, 1.0], 2, 2, vec![f64::NAN; 4], vec![true; 4]).is_err());
        assert!(GridFunction::new([0.0, 0.0], [1.0, 1.0], 2, 2, vec![f64::NAN; 4], vec![false; 4]).is_ok());
    }
}
