//! Convex planar domains, their line sections, and products of rhombs.
//!
//! All domains are open: membership uses strict inequalities and boundary
//! points are excluded.

use serde::{Deserialize, Serialize};

use crate::{dot2, norm2, sub2, Error, Point2, Result};

/// Open convex region of the plane.
///
/// `Rhomb { m }` is `K_m`, the open rhomb with vertices `(±m², 0)` and
/// `(0, ±m)`. `HalfPlane { normal, offset }` is `{x : ⟨normal, x⟩ > offset}`.
/// Polygon vertices are listed counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanarDomain {
    Rhomb { m: u32 },
    Disc { center: Point2, radius: f64 },
    HalfPlane { normal: Point2, offset: f64 },
    Polygon { vertices: Vec<Point2> },
}

/// `{t : x + t·h ∈ U}` for an open convex `U`; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionInterval {
    pub t_lower: f64,
    pub t_upper: f64,
    pub nonempty: bool,
}

impl SectionInterval {
    pub const EMPTY: SectionInterval = SectionInterval {
        t_lower: 0.0,
        t_upper: 0.0,
        nonempty: false,
    };

    pub const FULL: SectionInterval = SectionInterval {
        t_lower: f64::NEG_INFINITY,
        t_upper: f64::INFINITY,
        nonempty: true,
    };

    pub fn new(t_lower: f64, t_upper: f64) -> Self {
        if t_lower < t_upper {
            Self {
                t_lower,
                t_upper,
                nonempty: true,
            }
        } else {
            Self::EMPTY
        }
    }

    pub fn length(&self) -> f64 {
        if self.nonempty {
            self.t_upper - self.t_lower
        } else {
            0.0
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.nonempty && t > self.t_lower && t < self.t_upper
    }

    pub fn intersect(&self, other: &SectionInterval) -> SectionInterval {
        if !self.nonempty || !other.nonempty {
            return Self::EMPTY;
        }
        Self::new(self.t_lower.max(other.t_lower), self.t_upper.min(other.t_upper))
    }
}

/// A boundary quadrature node: point on `∂U`, outward unit normal, arc-length weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub point: Point2,
    pub normal: Point2,
    pub weight: f64,
}

impl PlanarDomain {
    /// `K_m`; requires `m ≥ 2`.
    pub fn rhomb(m: u32) -> Result<Self> {
        let d = PlanarDomain::Rhomb { m };
        d.validate()?;
        Ok(d)
    }

    pub fn disc(center: Point2, radius: f64) -> Result<Self> {
        let d = PlanarDomain::Disc { center, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn half_plane(normal: Point2, offset: f64) -> Result<Self> {
        let d = PlanarDomain::HalfPlane { normal, offset };
        d.validate()?;
        Ok(d)
    }

    pub fn polygon(vertices: Vec<Point2>) -> Result<Self> {
        let d = PlanarDomain::Polygon { vertices };
        d.validate()?;
        Ok(d)
    }

    /// Axis-aligned rectangle `(x0, x1) × (y0, y1)`.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        Self::polygon(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PlanarDomain::Rhomb { m } if *m < 2 => Err(Error::InvalidParameter {
                name: "m",
                reason: format!("rhomb requires m >= 2, got {m}"),
            }),
            PlanarDomain::Disc { radius, center } if !(*radius > 0.0) || !center.iter().all(|c| c.is_finite()) => {
                Err(Error::InvalidParameter {
                    name: "radius",
                    reason: format!("disc needs a positive radius and finite center, got {radius}"),
                })
            }
            PlanarDomain::HalfPlane { normal, offset } if !(norm2(*normal) > 0.0) || !offset.is_finite() => {
                Err(Error::InvalidParameter {
                    name: "normal",
                    reason: "half-plane normal must be nonzero".into(),
                })
            }
            PlanarDomain::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(Error::InvalidParameter {
                        name: "vertices",
                        reason: format!("polygon needs at least 3 vertices, got {n}"),
                    });
                }
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                    if !(cross > 0.0) {
                        return Err(Error::InvalidParameter {
                            name: "vertices",
                            reason: "polygon must be strictly convex and counterclockwise".into(),
                        });
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Vertices of polygonal kinds (counterclockwise), empty otherwise.
    pub fn vertices(&self) -> Vec<Point2> {
        match self {
            PlanarDomain::Rhomb { m } => {
                let m = *m as f64;
                vec![[m * m, 0.0], [0.0, m], [-m * m, 0.0], [0.0, -m]]
            }
            PlanarDomain::Polygon { vertices } => vertices.clone(),
            _ => Vec::new(),
        }
    }

    /// Constraints `⟨a, x⟩ < b` whose intersection is the domain (polygonal kinds).
    fn half_planes(&self) -> Vec<(Point2, f64)> {
        match self {
            PlanarDomain::HalfPlane { normal, offset } => vec![([-normal[0], -normal[1]], -offset)],
            PlanarDomain::Rhomb { .. } | PlanarDomain::Polygon { .. } => {
                let v = self.vertices();
                let n = v.len();
                (0..n)
                    .map(|i| {
                        let p = v[i];
                        let q = v[(i + 1) % n];
                        // outward normal of a ccw edge
                        let a = [q[1] - p[1], p[0] - q[0]];
                        (a, dot2(a, p))
                    })
                    .collect()
            }
            PlanarDomain::Disc { .. } => Vec::new(),
        }
    }

    pub fn contains(&self, x: Point2) -> bool {
        match self {
            PlanarDomain::Rhomb { m } => {
                let m = *m as f64;
                x[0].abs() / (m * m) + x[1].abs() / m < 1.0
            }
            PlanarDomain::Disc { center, radius } => norm2(sub2(x, *center)) < *radius,
            PlanarDomain::HalfPlane { normal, offset } => dot2(*normal, x) > *offset,
            PlanarDomain::Polygon { .. } => self.half_planes().iter().all(|(a, b)| dot2(*a, x) < *b),
        }
    }

    /// Exact section `{t : x + t·h ∈ U}` by clipping against the boundary.
    pub fn section(&self, x: Point2, h: Point2) -> Result<SectionInterval> {
        if !(norm2(h) > 0.0) {
            return Err(Error::ZeroDirection);
        }
        Ok(match self {
            PlanarDomain::Disc { center, radius } => {
                // |x - c + t h|² < r²
                let d = sub2(x, *center);
                let a = dot2(h, h);
                let b = dot2(d, h);
                let c = dot2(d, d) - radius * radius;
                let disc = b * b - a * c;
                if disc <= 0.0 {
                    SectionInterval::EMPTY
                } else {
                    let s = disc.sqrt();
                    // stable roots
                    let q = -(b + b.signum() * s);
                    let (r1, r2) = if q != 0.0 { (q / a, c / q) } else { (-s / a, s / a) };
                    SectionInterval::new(r1.min(r2), r1.max(r2))
                }
            }
            _ => {
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                for (a, b) in self.half_planes() {
                    // ⟨a, x⟩ + t⟨a, h⟩ < b
                    let ah = dot2(a, h);
                    let slack = b - dot2(a, x);
                    if ah > 0.0 {
                        hi = hi.min(slack / ah);
                    } else if ah < 0.0 {
                        lo = lo.max(slack / ah);
                    } else if slack <= 0.0 {
                        return Ok(SectionInterval::EMPTY);
                    }
                }
                SectionInterval::new(lo, hi)
            }
        })
    }

    /// Bounding box `[min, max]`, `None` for unbounded domains.
    pub fn bounding_box(&self) -> Option<[Point2; 2]> {
        match self {
            PlanarDomain::Disc { center, radius } => Some([
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ]),
            PlanarDomain::HalfPlane { .. } => None,
            _ => {
                let v = self.vertices();
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for p in v {
                    for k in 0..2 {
                        lo[k] = lo[k].min(p[k]);
                        hi[k] = hi[k].max(p[k]);
                    }
                }
                Some([lo, hi])
            }
        }
    }

    /// Points where a coordinate-aligned section changes shape along axis `axis`
    /// (vertex coordinates, disc extremes).
    pub fn breakpoints(&self, axis: usize) -> Vec<f64> {
        match self {
            PlanarDomain::Disc { center, radius } => vec![center[axis] - radius, center[axis] + radius],
            PlanarDomain::HalfPlane { .. } => Vec::new(),
            _ => self.vertices().iter().map(|p| p[axis]).collect(),
        }
    }

    /// Euclidean distance from an interior point to the boundary.
    pub fn distance_to_boundary(&self, x: Point2) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::NotInDomain);
        }
        Ok(match self {
            PlanarDomain::Disc { center, radius } => radius - norm2(sub2(x, *center)),
            _ => self
                .half_planes()
                .iter()
                .map(|(a, b)| (b - dot2(*a, x)) / norm2(*a))
                .fold(f64::INFINITY, f64::min),
        })
    }

    /// Radius of the largest disc about the origin contained in the closure.
    pub fn inradius_about_origin(&self) -> f64 {
        match self {
            PlanarDomain::Disc { center, radius } => (radius - norm2(*center)).max(0.0),
            _ => self
                .half_planes()
                .iter()
                .map(|(a, b)| b / norm2(*a))
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
        }
    }

    /// Outward unit normal at a boundary point (nearest edge for polygons).
    pub fn outward_normal(&self, x: Point2) -> Point2 {
        match self {
            PlanarDomain::Disc { center, .. } => {
                let d = sub2(x, *center);
                let n = norm2(d);
                [d[0] / n, d[1] / n]
            }
            _ => {
                let (a, _) = self
                    .half_planes()
                    .into_iter()
                    .min_by(|(a1, b1), (a2, b2)| {
                        let g1 = ((b1 - dot2(*a1, x)) / norm2(*a1)).abs();
                        let g2 = ((b2 - dot2(*a2, x)) / norm2(*a2)).abs();
                        g1.total_cmp(&g2)
                    })
                    .expect("polygonal domain has edges");
                let n = norm2(a);
                [a[0] / n, a[1] / n]
            }
        }
    }

    /// Quadrature nodes on `∂U` with arc-length weights: Gauss–Legendre per
    /// edge for polygonal kinds, the periodic trapezoid rule on circles. The
    /// boundary of a half-plane is clipped to `|s| ≤ clip` around the foot of
    /// the normal from the origin.
    pub fn boundary_quadrature(&self, nodes: usize, clip: f64) -> Vec<BoundaryNode> {
        match self {
            PlanarDomain::Disc { center, radius } => {
                let w = 2.0 * std::f64::consts::PI * radius / nodes as f64;
                (0..nodes)
                    .map(|k| {
                        let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / nodes as f64;
                        let normal = [th.cos(), th.sin()];
                        BoundaryNode {
                            point: [center[0] + radius * normal[0], center[1] + radius * normal[1]],
                            normal,
                            weight: w,
                        }
                    })
                    .collect()
            }
            PlanarDomain::HalfPlane { normal, offset } => {
                let n = norm2(*normal);
                let u = [normal[0] / n, normal[1] / n];
                let foot = [u[0] * offset / n, u[1] * offset / n];
                let tangent = [-u[1], u[0]];
                // split at the foot where the Gaussian weight peaks
                let s0 = -dot2(foot, tangent);
                let mut pts = vec![-clip + s0.min(0.0), s0, clip + s0.max(0.0)];
                pts.dedup();
                crate::quad::composite_gauss_legendre(&pts, nodes)
                    .into_iter()
                    .map(|(s, w)| BoundaryNode {
                        point: [foot[0] + s * tangent[0], foot[1] + s * tangent[1]],
                        normal: [-u[0], -u[1]],
                        weight: w,
                    })
                    .collect()
            }
            _ => {
                let v = self.vertices();
                let k = v.len();
                let mut out = Vec::with_capacity(k * nodes);
                for i in 0..k {
                    let p = v[i];
                    let q = v[(i + 1) % k];
                    let len = norm2(sub2(q, p));
                    let normal = [(q[1] - p[1]) / len, (p[0] - q[0]) / len];
                    for (s, w) in crate::quad::composite_gauss_legendre(&[0.0, len], nodes) {
                        let f = s / len;
                        out.push(BoundaryNode {
                            point: [p[0] + f * (q[0] - p[0]), p[1] + f * (q[1] - p[1])],
                            normal,
                            weight: w,
                        });
                    }
                }
                out
            }
        }
    }

    /// Short identifier used in reports.
    pub fn label(&self) -> String {
        match self {
            PlanarDomain::Rhomb { m } => format!("K_{m}"),
            PlanarDomain::Disc { center, radius } => format!("disc({},{};{})", center[0], center[1], radius),
            PlanarDomain::HalfPlane { normal, offset } => {
                format!("halfplane({},{};{})", normal[0], normal[1], offset)
            }
            PlanarDomain::Polygon { vertices } => format!("polygon[{}]", vertices.len()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("domain serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: PlanarDomain = serde_json::from_str(s).map_err(|e| Error::InvalidParameter {
            name: "domain",
            reason: e.to_string(),
        })?;
        d.validate()?;
        Ok(d)
    }
}

/// Section of an intersection of convex domains.
pub fn section_of_all(domains: &[PlanarDomain], x: Point2, h: Point2) -> Result<SectionInterval> {
    let mut s = SectionInterval::FULL;
    for d in domains {
        s = s.intersect(&d.section(x, h)?);
    }
    Ok(s)
}

/// First block index of a [`ProductDomain`].
pub const FIRST_BLOCK: u32 = 2;

/// Truncation of `∏ K_m` (blocks `m = 2..=truncation`), optionally
/// intersected with the ball `Σ m⁻²|x_m|² ≤ l_norm_bound` of the weighted
/// space `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDomain {
    pub truncation: u32,
    pub l_norm_bound: Option<f64>,
}

impl ProductDomain {
    pub fn new(truncation: u32, l_norm_bound: Option<f64>) -> Result<Self> {
        if truncation < FIRST_BLOCK {
            return Err(Error::InvalidParameter {
                name: "truncation",
                reason: format!("need at least one block (M >= {FIRST_BLOCK})"),
            });
        }
        Ok(Self {
            truncation,
            l_norm_bound,
        })
    }

    pub fn block_count(&self) -> usize {
        (self.truncation - FIRST_BLOCK + 1) as usize
    }

    /// Block indices `m` in order.
    pub fn blocks(&self) -> impl Iterator<Item = u32> {
        FIRST_BLOCK..=self.truncation
    }

    fn check_len(&self, x: &[Point2]) -> Result<()> {
        if x.len() != self.block_count() {
            return Err(Error::DimensionMismatch {
                expected: self.block_count(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `Σ_m m⁻² |x_m|²`.
    pub fn l_norm_squared(&self, x: &[Point2]) -> f64 {
        self.blocks()
            .zip(x)
            .map(|(m, p)| dot2(*p, *p) / (m as f64 * m as f64))
            .sum()
    }

    pub fn contains(&self, x: &[Point2]) -> Result<bool> {
        self.check_len(x)?;
        let in_blocks = self
            .blocks()
            .zip(x)
            .all(|(m, p)| PlanarDomain::Rhomb { m }.contains(*p));
        let in_ball = self.l_norm_bound.is_none_or(|b| self.l_norm_squared(x) <= b);
        Ok(in_blocks && in_ball)
    }
}

/// Sufficient test that the truncated ℓ²-ball of `radius` about `x` stays in
/// the product domain: every block is at distance `≥ radius` from `∂K_m`
/// (and the `L`-ball leaves room for the perturbation).
pub fn h_open_witness(domain: &ProductDomain, x: &[Point2], radius: f64) -> Result<bool> {
    if !domain.contains(x)? {
        return Err(Error::NotInDomain);
    }
    if radius <= 0.0 {
        return Ok(true);
    }
    for (m, p) in domain.blocks().zip(x) {
        if (PlanarDomain::Rhomb { m }).distance_to_boundary(*p)? < radius {
            return Ok(false);
        }
    }
    if let Some(bound) = domain.l_norm_bound {
        // ‖x + z‖_L ≤ ‖x‖_L + ‖z‖_L and ‖z‖_L ≤ |z|/2 for blocks m ≥ 2
        let reach = domain.l_norm_squared(x).sqrt() + radius / FIRST_BLOCK as f64;
        if reach * reach > bound {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Truncated ellipsoid membership `Σ_{n≤M} n⁻² x_n² < 1` (`x_n` indexed from 1).
pub fn ellipsoid_contains(x: &[f64], truncation: usize) -> bool {
    x.iter()
        .take(truncation)
        .enumerate()
        .map(|(i, v)| v * v / ((i + 1) as f64).powi(2))
        .sum::<f64>()
        < 1.0
}

/// Finite-`N` diagnostic `N⁻¹ Σ_{n≤N} x_n²`; tends to 1 for Gaussian samples.
pub fn z_statistic(x: &[f64], n: usize) -> f64 {
    let n = n.min(x.len());
    if n == 0 {
        return 0.0;
    }
    x[..n].iter().map(|v| v * v).sum::<f64>() / n as f64
}
