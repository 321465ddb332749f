//! McShane extension `g(x) = inf_y f(y) + C|x − y|` over grid nodes of `V`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domains::PlanarDomain;
use crate::{norm2, sub2, Error, Point2, Result};

/// Pairs checked by the Lipschitz spot test.
const SPOT_PAIRS: usize = 4000;

/// The lower McShane envelope built from the values of `f` on the nodes of
/// an `n × n` lattice over the bounding box of `V`.
#[derive(Debug, Clone)]
pub struct McShaneExtension {
    nodes: Vec<(Point2, f64)>,
    lipschitz: f64,
}

impl McShaneExtension {
    /// Fails with [`Error::LipschitzViolation`] when a sampled pair of nodes
    /// violates `|f(x) − f(y)| ≤ C|x − y|` (relative slack `1e-12`).
    pub fn new<F: Fn(Point2) -> f64>(f: F, domain: &PlanarDomain, lipschitz: f64, n: usize, seed: u64) -> Result<Self> {
        let Some([lo, hi]) = domain.bounding_box() else {
            return Err(Error::UnboundedRegion);
        };
        if !(lipschitz >= 0.0) || n < 2 {
            return Err(Error::InvalidParameter {
                name: "lipschitz",
                reason: "need C >= 0 and at least 2 nodes per axis".into(),
            });
        }
        let mut nodes = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let x = [
                    lo[0] + (hi[0] - lo[0]) * i as f64 / (n - 1) as f64,
                    lo[1] + (hi[1] - lo[1]) * j as f64 / (n - 1) as f64,
                ];
                if domain.contains(x) {
                    nodes.push((x, f(x)));
                }
            }
        }
        if nodes.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..SPOT_PAIRS {
            let (x, fx) = nodes[rng.random_range(0..nodes.len())];
            let (y, fy) = nodes[rng.random_range(0..nodes.len())];
            let gap = (fx - fy).abs();
            let bound = lipschitz * norm2(sub2(x, y));
            if gap > bound * (1.0 + 1e-12) + 1e-14 {
                return Err(Error::LipschitzViolation { gap, bound });
            }
        }
        Ok(Self { nodes, lipschitz })
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn nodes(&self) -> &[(Point2, f64)] {
        &self.nodes
    }

    pub fn eval(&self, x: Point2) -> f64 {
        self.nodes
            .iter()
            .map(|(y, fy)| fy + self.lipschitz * norm2(sub2(x, *y)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `g(x)` for a one-off evaluation.
pub fn mcshane_extend<F: Fn(Point2) -> f64>(f: F, domain: &PlanarDomain, lipschitz: f64, n: usize, x: Point2) -> Result<f64> {
    Ok(McShaneExtension::new(f, domain, lipschitz, n, 0)?.eval(x))
}
