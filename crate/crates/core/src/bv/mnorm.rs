//! `‖f‖_M = ‖f‖_{L¹(U,γ)} + sup_{|h| ≤ 1} ‖f β_h‖_{L¹(U,γ)}` over a finite
//! direction net.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domains::PlanarDomain;
use crate::gauss::{quad_integrate_2d, Quad2dOptions, WeightMode};
use crate::{dot2, Point2, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MNormRecord {
    pub l1_part: f64,
    /// Largest `‖f β_h‖_{L¹(U)}` over `direction_set`.
    pub sup_beta_part: f64,
    pub direction_set: Vec<Point2>,
    pub argmax: usize,
}

impl MNormRecord {
    pub fn m_norm(&self) -> f64 {
        self.l1_part + self.sup_beta_part
    }
}

/// `e₁`, `e₂` and `n_random` seeded unit vectors.
pub fn direction_net(n_random: usize, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = vec![[1.0, 0.0], [0.0, 1.0]];
    v.extend((0..n_random).map(|_| {
        let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        [th.cos(), th.sin()]
    }));
    v
}

/// Integrals over `U ∩ {|x| < 12}`; the Gaussian mass outside is below `1e-31`.
pub fn m_norm<F: Fn(Point2) -> f64>(f: F, domain: &PlanarDomain, directions: &[Point2], tol: f64) -> Result<MNormRecord> {
    let disc = PlanarDomain::disc([0.0, 0.0], 12.0)?;
    let regions = [disc, domain.clone()];
    let mode = WeightMode::GaussianRelative { anchor: [0.0, 0.0] };
    let opts = Quad2dOptions {
        tol,
        abs_tol: 1e-300,
        ..Quad2dOptions::default()
    };
    let two_pi = std::f64::consts::TAU;
    let l1 = quad_integrate_2d(mode, &regions, |x| f(x).abs(), &opts)?.value / two_pi;
    let mut best = (0.0, 0);
    for (i, h) in directions.iter().enumerate() {
        let v = quad_integrate_2d(mode, &regions, |x| (f(x) * dot2(x, *h)).abs(), &opts)?.value / two_pi;
        if v > best.0 {
            best = (v, i);
        }
    }
    Ok(MNormRecord {
        l1_part: l1,
        sup_beta_part: best.0,
        direction_set: directions.to_vec(),
        argmax: best.1,
    })
}
