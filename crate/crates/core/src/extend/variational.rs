//! Minimal-norm `p = 2` extension of `f_m` off the rhomb.
//!
//! Work in apex-rescaled coordinates `x = a + m⁻² u` on the box `[−2, 2]²`.
//! For any `G` on `U = {|u| < 2}`,
//!
//! ```text
//! ‖G‖²_{2,1,U} / ϱ(a) ≥ ∫_U (|∇_u g|² + m⁻⁴ g²) w du,   w = ϱ(x)/ϱ(a),
//! ```
//!
//! (the left side uses the sum of the two `L²` norms, which dominates the
//! square root of the sum of squares). The right side is discretized with
//! edge weights for the Dirichlet part and node weights for the mass part,
//! and minimized over grid functions equal to `f_m` on the wedge nodes. The
//! wedge condition is all that ties `G` to `f_m`, so the minimum bounds every
//! global extension from below, up to discretization.

use serde::{Deserialize, Serialize};

use super::sweep::CostMethod;
use crate::norms::{HatFunction, HatRegion, NormWeight};
use crate::{Error, Point2, Result};

/// Half-width of the rescaled box and radius of `U`.
pub const LOCAL_HALF_WIDTH: f64 = 2.0;

/// Coarsest level of the nested warm start.
const COARSEST: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Outside,
    Fixed,
    Free,
}

/// The rescaled grid a certificate was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Cells per axis on `[−2, 2]²`.
    pub resolution: usize,
    pub spacing: f64,
    pub half_width: f64,
    pub disc_radius: f64,
}

/// Lower bound on the cost of extending `f_m` from `K_m`, relative to
/// `ϱ(a)^{1/p}`: `ratio = local_min_norm / base_norm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionCostCertificate {
    pub m: u32,
    pub p: f64,
    pub method: CostMethod,
    /// Lower bound on `ϱ(a)^{-1/p}‖G‖_{p,1,U}` for any extension `G`.
    pub local_min_norm: f64,
    /// `ϱ(a)^{-1/p}‖f_m‖_{p,1,K_m}`.
    pub base_norm: f64,
    pub ratio: f64,
    pub grid_spec: Option<GridSpec>,
    /// `|local_min_norm − (same at half resolution)|`, or the quadrature
    /// error for the coarea route.
    pub discretization_error: f64,
    pub cg_iterations: usize,
    pub cg_residual: f64,
}

impl ExtensionCostCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// A CG solution on one grid.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Full node vector (fixed data, free values, zeros outside `U`).
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// The discrete minimization problem on one grid.
#[derive(Debug, Clone)]
pub struct ExtensionProblem {
    hat: HatFunction,
    res: usize,
    n: usize,
    h: f64,
    mass: f64,
    state: Vec<Node>,
    data: Vec<f64>,
    w_node: Vec<f64>,
    /// weight of edge (i,j)–(i+1,j); 0 when inactive
    w_x: Vec<f64>,
    /// weight of edge (i,j)–(i,j+1); 0 when inactive
    w_y: Vec<f64>,
    free: Vec<usize>,
}

impl ExtensionProblem {
    /// Data fixed on the wedge nodes `u₁ + m|u₂| < 0` inside `U`.
    pub fn new(m: u32, resolution: usize) -> Result<Self> {
        let hat = HatFunction::new(m)?;
        Self::with_fixed(m, resolution, move |u| hat.local_in_rhomb(u))
    }

    /// Data fixed wherever `fixed(u)` holds inside `U`.
    pub fn with_fixed<P: Fn(Point2) -> bool>(m: u32, resolution: usize, fixed: P) -> Result<Self> {
        let hat = HatFunction::new(m)?;
        if resolution < 8 || resolution % 2 != 0 {
            return Err(Error::InvalidParameter {
                name: "resolution",
                reason: format!("need an even resolution >= 8, got {resolution}"),
            });
        }
        let n = resolution + 1;
        let h = 2.0 * LOCAL_HALF_WIDTH / resolution as f64;
        let mut state = vec![Node::Outside; n * n];
        let mut data = vec![0.0; n * n];
        let mut w_node = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                let u = Self::coord(h, i, j);
                if u[0].hypot(u[1]) < LOCAL_HALF_WIDTH {
                    w_node[k] = hat.local_weight(u);
                    if fixed(u) {
                        state[k] = Node::Fixed;
                        data[k] = hat.eval_local(u);
                    } else {
                        state[k] = Node::Free;
                    }
                }
            }
        }
        let mut w_x = vec![0.0; n * n];
        let mut w_y = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                if state[k] == Node::Outside {
                    continue;
                }
                let u = Self::coord(h, i, j);
                if i + 1 < n && state[k + 1] != Node::Outside {
                    w_x[k] = hat.local_weight([u[0] + 0.5 * h, u[1]]);
                }
                if j + 1 < n && state[k + n] != Node::Outside {
                    w_y[k] = hat.local_weight([u[0], u[1] + 0.5 * h]);
                }
            }
        }
        let free = (0..n * n).filter(|&k| state[k] == Node::Free).collect();
        let mf = m as f64;
        Ok(Self {
            hat,
            res: resolution,
            n,
            h,
            mass: mf.powi(-4),
            state,
            data,
            w_node,
            w_x,
            w_y,
            free,
        })
    }

    fn coord(h: f64, i: usize, j: usize) -> Point2 {
        [-LOCAL_HALF_WIDTH + i as f64 * h, -LOCAL_HALF_WIDTH + j as f64 * h]
    }

    pub fn hat(&self) -> HatFunction {
        self.hat
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            resolution: self.res,
            spacing: self.h,
            half_width: LOCAL_HALF_WIDTH,
            disc_radius: LOCAL_HALF_WIDTH,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    pub fn node_coord(&self, k: usize) -> Point2 {
        Self::coord(self.h, k % self.n, k / self.n)
    }

    pub fn free_indices(&self) -> &[usize] {
        &self.free
    }

    pub fn fixed_count(&self) -> usize {
        self.state.iter().filter(|s| **s == Node::Fixed).count()
    }

    pub fn is_fixed(&self, k: usize) -> bool {
        self.state[k] == Node::Fixed
    }

    /// Samples a candidate on the grid; fixed nodes always carry `f_m`.
    /// Returns the largest disagreement of the candidate with the data.
    pub fn sample<G: Fn(Point2) -> f64>(&self, g: G) -> (Vec<f64>, f64) {
        let mut v = vec![0.0; self.n * self.n];
        let mut gap: f64 = 0.0;
        for k in 0..v.len() {
            match self.state[k] {
                Node::Outside => {}
                Node::Fixed => {
                    gap = gap.max((g(self.node_coord(k)) - self.data[k]).abs());
                    v[k] = self.data[k];
                }
                Node::Free => v[k] = g(self.node_coord(k)),
            }
        }
        (v, gap)
    }

    /// `Σ_e w_e (Δg)² + m⁻⁴ h² Σ_i w_i g_i²` for a full node vector.
    pub fn objective(&self, g: &[f64]) -> f64 {
        let n = self.n;
        let mut dirichlet = 0.0;
        let mut mass = 0.0;
        for j in 0..n {
            let mut row_d = 0.0;
            let mut row_m = 0.0;
            for i in 0..n {
                let k = j * n + i;
                if self.state[k] == Node::Outside {
                    continue;
                }
                row_m += self.w_node[k] * g[k] * g[k];
                if self.w_x[k] > 0.0 {
                    let d = g[k + 1] - g[k];
                    row_d += self.w_x[k] * d * d;
                }
                if self.w_y[k] > 0.0 {
                    let d = g[k + n] - g[k];
                    row_d += self.w_y[k] * d * d;
                }
            }
            dirichlet += row_d;
            mass += row_m;
        }
        dirichlet + self.mass * self.h * self.h * mass
    }

    /// `Σ` edge weights at node `k`, split into the four directions
    /// (−x, +x, −y, +y) with neighbor indices.
    fn stencil(&self, k: usize) -> [(usize, f64); 4] {
        let n = self.n;
        let (i, j) = (k % n, k / n);
        [
            (k.wrapping_sub(1), if i > 0 { self.w_x[k - 1] } else { 0.0 }),
            (k + 1, self.w_x[k]),
            (k.wrapping_sub(n), if j > 0 { self.w_y[k - n] } else { 0.0 }),
            (k + n, self.w_y[k]),
        ]
    }

    /// Jacobi-preconditioned CG on the free nodes, to `‖r‖ ≤ tol·‖b‖`.
    pub fn solve(&self, tol: f64, warm: Option<&[f64]>) -> Result<Solution> {
        let nf = self.free.len();
        let mut slot = vec![u32::MAX; self.n * self.n];
        for (s, &k) in self.free.iter().enumerate() {
            slot[k] = s as u32;
        }
        let mut diag = vec![0.0; nf];
        let mut nb = vec![[u32::MAX; 4]; nf];
        let mut nw = vec![[0.0; 4]; nf];
        let mut b = vec![0.0; nf];
        let mh2 = self.mass * self.h * self.h;
        for (s, &k) in self.free.iter().enumerate() {
            let mut d = mh2 * self.w_node[k];
            for (e, (nbk, w)) in self.stencil(k).into_iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                d += w;
                match self.state[nbk] {
                    Node::Free => {
                        nb[s][e] = slot[nbk];
                        nw[s][e] = w;
                    }
                    Node::Fixed => b[s] += w * self.data[nbk],
                    Node::Outside => unreachable!("active edges join nodes inside U"),
                }
            }
            diag[s] = d;
        }
        let apply = |x: &[f64], y: &mut [f64]| {
            for s in 0..nf {
                let mut acc = diag[s] * x[s];
                for e in 0..4 {
                    let t = nb[s][e];
                    if t != u32::MAX {
                        acc -= nw[s][e] * x[t as usize];
                    }
                }
                y[s] = acc;
            }
        };
        let dot = |a: &[f64], b: &[f64]| -> f64 {
            // fixed-size chunks keep the summation order independent of length changes elsewhere
            a.chunks(4096).zip(b.chunks(4096)).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>()).sum()
        };
        let mut x: Vec<f64> = match warm {
            Some(w) => self.free.iter().map(|&k| w[k]).collect(),
            None => vec![0.0; nf],
        };
        let bnorm = dot(&b, &b).sqrt();
        let mut full = self.data.clone();
        if nf == 0 || bnorm == 0.0 {
            for (s, &k) in self.free.iter().enumerate() {
                full[k] = if bnorm == 0.0 { 0.0 } else { x[s] };
            }
            let objective = self.objective(&full);
            return Ok(Solution {
                values: full,
                objective,
                iterations: 0,
                residual: 0.0,
            });
        }
        let mut r = vec![0.0; nf];
        apply(&x, &mut r);
        for s in 0..nf {
            r[s] = b[s] - r[s];
        }
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; nf];
        let mut rz = dot(&r, &z);
        let cap = 40 * self.n + 2000;
        let mut iterations = 0;
        let mut rel = dot(&r, &r).sqrt() / bnorm;
        while rel > tol {
            if iterations >= cap {
                return Err(Error::CgNotConverged {
                    iterations,
                    residual: rel,
                });
            }
            apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for s in 0..nf {
                x[s] += alpha * p[s];
                r[s] -= alpha * ap[s];
            }
            for s in 0..nf {
                z[s] = r[s] / diag[s];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for s in 0..nf {
                p[s] = z[s] + beta * p[s];
            }
            iterations += 1;
            rel = dot(&r, &r).sqrt() / bnorm;
        }
        for (s, &k) in self.free.iter().enumerate() {
            full[k] = x[s];
        }
        let objective = self.objective(&full);
        Ok(Solution {
            values: full,
            objective,
            iterations,
            residual: rel,
        })
    }

    /// Bilinear prolongation of a solution on the half-resolution grid.
    pub fn prolong(&self, coarse: &[f64]) -> Vec<f64> {
        let nc = self.res / 2 + 1;
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let (ci, cj) = (i / 2, j / 2);
                let (di, dj) = (i % 2, j % 2);
                let at = |a: usize, b: usize| coarse[b.min(nc - 1) * nc + a.min(nc - 1)];
                out[j * n + i] = match (di, dj) {
                    (0, 0) => at(ci, cj),
                    (1, 0) => 0.5 * (at(ci, cj) + at(ci + 1, cj)),
                    (0, 1) => 0.5 * (at(ci, cj) + at(ci, cj + 1)),
                    _ => 0.25 * (at(ci, cj) + at(ci + 1, cj) + at(ci, cj + 1) + at(ci + 1, cj + 1)),
                };
            }
        }
        out
    }
}

/// Solves on `resolution` and on every halving down to [`COARSEST`], each
/// level warm-started from the one below. Returns the finest and the
/// half-resolution solutions.
fn nested_solve(m: u32, resolution: usize, tol: f64) -> Result<(ExtensionProblem, Solution, Option<Solution>)> {
    let mut levels = vec![resolution];
    while levels.last().is_some_and(|&r| r % 2 == 0 && r / 2 >= COARSEST && (r / 2) % 2 == 0) {
        let r = levels.last().unwrap() / 2;
        levels.push(r);
    }
    levels.reverse();
    let mut prev: Option<Solution> = None;
    let mut half: Option<Solution> = None;
    let mut last = None;
    for (idx, &r) in levels.iter().enumerate() {
        let problem = ExtensionProblem::new(m, r)?;
        let warm = prev.as_ref().map(|s| problem.prolong(&s.values));
        let sol = problem.solve(tol, warm.as_deref())?;
        if idx + 1 == levels.len() {
            half = prev.take();
            last = Some((problem, sol));
        } else {
            prev = Some(sol);
        }
    }
    let (problem, sol) = last.expect("at least one level");
    Ok((problem, sol, half))
}

/// Certificate for `p = 2`: `local_min_norm = sqrt(min objective)` on a
/// `resolution²` grid, CG to relative residual `tol`.
pub fn min_norm_extension_p2(m: u32, resolution: usize, tol: f64) -> Result<ExtensionCostCertificate> {
    if m < 4 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("cost certificates need m >= 4, got {m}"),
        });
    }
    // the wedge must be several cells wide at unit distance from the apex
    let width = 2.0 / m as f64;
    let h = 2.0 * LOCAL_HALF_WIDTH / resolution as f64;
    if width < 4.0 * h {
        return Err(Error::GridTooCoarse(format!(
            "wedge width {width:.4} at radius 1 spans fewer than 4 cells of size {h:.4}; use resolution >= {}",
            (8.0 * LOCAL_HALF_WIDTH * m as f64).ceil()
        )));
    }
    let (problem, sol, half) = nested_solve(m, resolution, tol)?;
    let local = sol.objective.sqrt();
    let coarse = half.map(|s| s.objective.sqrt());
    let base = problem
        .hat()
        .sobolev_norm(2.0, NormWeight::GaussianRelative, HatRegion::Rhomb, 1e-11)?
        .relative();
    Ok(ExtensionCostCertificate {
        m,
        p: 2.0,
        method: CostMethod::Variational { resolution, tol },
        local_min_norm: local,
        base_norm: base,
        ratio: local / base,
        grid_spec: Some(problem.grid_spec()),
        discretization_error: coarse.map_or(f64::NAN, |c| (local - c).abs()),
        cg_iterations: sol.iterations,
        cg_residual: sol.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fully_fixed_problem_costs_nothing_extra() {
        let p = ExtensionProblem::with_fixed(4, 64, |_| true).unwrap();
        assert!(p.free_indices().is_empty());
        let s = p.solve(1e-10, None).unwrap();
        let (own, gap) = p.sample(|u| (1.0 - u[0].hypot(u[1])).max(0.0));
        assert_eq!(gap, 0.0);
        assert_eq!(s.iterations, 0);
        assert!((s.objective.sqrt() / p.objective(&own).sqrt() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn solution_is_first_order_optimal() {
        let p = ExtensionProblem::new(4, 96).unwrap();
        let s = p.solve(1e-12, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let free = p.free_indices();
        for _ in 0..100 {
            let mut v = s.values.clone();
            for &k in free {
                v[k] += 1e-3 * rng.random_range(-1.0..1.0);
            }
            assert!(p.objective(&v) > s.objective);
        }
    }

    #[test]
    fn candidates_are_not_cheaper() {
        let p = ExtensionProblem::new(8, 128).unwrap();
        let s = p.solve(1e-10, None).unwrap();
        let hat = p.hat();
        let zero_ext = |u: Point2| if hat.local_in_rhomb(u) { hat.eval_local(u) } else { 0.0 };
        let radial = |u: Point2| hat.eval_local(u);
        // reflected-type: fold the angle back into the wedge
        let alpha = hat.half_angle();
        let folded = |u: Point2| {
            let r = u[0].hypot(u[1]);
            let th = u[1].atan2(u[0]).abs();
            let fade = ((th - (std::f64::consts::PI - alpha)) / alpha + 1.0).clamp(0.0, 1.0);
            (1.0 - r).max(0.0) * fade
        };
        for g in [&zero_ext as &dyn Fn(Point2) -> f64, &radial, &folded] {
            let (v, gap) = p.sample(g);
            assert!(gap < 1e-12);
            assert!(p.objective(&v) >= s.objective);
        }
    }

    #[test]
    fn prolongation_reproduces_linear_functions() {
        let fine = ExtensionProblem::new(4, 64).unwrap();
        let coarse = ExtensionProblem::new(4, 32).unwrap();
        let lin = |u: Point2| 1.0 + 2.0 * u[0] - u[1];
        let cv: Vec<f64> = (0..coarse.node_count()).map(|k| lin(coarse.node_coord(k))).collect();
        let fv = fine.prolong(&cv);
        for k in 0..fine.node_count() {
            assert!((fv[k] - lin(fine.node_coord(k))).abs() < 1e-12);
        }
    }

    #[test]
    fn certificate_small_grid() {
        let c = min_norm_extension_p2(4, 128, 1e-9).unwrap();
        assert!(c.ratio > 1.0 && c.local_min_norm > 0.0);
        assert!(c.discretization_error.is_finite());
        let json = c.to_json();
        let back: ExtensionCostCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        assert!(matches!(min_norm_extension_p2(16, 64, 1e-8), Err(Error::GridTooCoarse(_))));
        assert!(min_norm_extension_p2(3, 128, 1e-8).is_err());
    }
}
