//! Reflection across `{ĥ = 0}`: `f̃(x) = f(x − 2ĥ(x)h)` for `ĥ(x) < 0`.

use serde::{Deserialize, Serialize};

use crate::domains::PlanarDomain;
use crate::gauss::{quad_integrate_2d, Direction, Quad2dOptions, WeightMode};
use crate::{Error, Point2, Result};

fn check_unit(h: &Direction) -> Result<()> {
    if (h.h_norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: format!("reflection needs a unit direction, |h| = {}", h.h_norm()),
        });
    }
    Ok(())
}

fn mirror(h: &Direction, x: &[f64], hx: f64) -> Vec<f64> {
    x.iter().zip(h.coordinates()).map(|(xi, hi)| xi - 2.0 * hx * hi).collect()
}

/// `f̃(x)`; on the null set `{ĥ = 0}` the value comes from the positive side.
pub fn reflect_halfspace<F: Fn(&[f64]) -> f64>(f: F, h: &Direction, x: &[f64]) -> Result<f64> {
    check_unit(h)?;
    let hx = h.apply(x)?;
    if hx >= 0.0 {
        Ok(f(x))
    } else {
        Ok(f(&mirror(h, x, hx)))
    }
}

/// `∇f̃(x) = R ∇f(Rx)` with `R = I − 2hhᵀ` on the negative side.
pub fn reflect_gradient<G: Fn(&[f64]) -> Vec<f64>>(grad: G, h: &Direction, x: &[f64]) -> Result<Vec<f64>> {
    check_unit(h)?;
    let hx = h.apply(x)?;
    if hx >= 0.0 {
        return Ok(grad(x));
    }
    let g = grad(&mirror(h, x, hx));
    let gh: f64 = g.iter().zip(h.coordinates()).map(|(a, b)| a * b).sum();
    Ok(mirror(h, &g, gh))
}

/// `L^p(γ)` norms of `f` on `V = {ĥ > 0}` and of `f̃` on the plane, for
/// values and gradients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionReport {
    pub p: f64,
    pub lp_on_v: f64,
    pub lp_reflected: f64,
    pub grad_on_v: f64,
    pub grad_reflected: f64,
}

impl ReflectionReport {
    /// `‖f̃‖/‖f‖_V`, equal to `2^{1/p}`.
    pub fn value_factor(&self) -> f64 {
        self.lp_reflected / self.lp_on_v
    }

    pub fn gradient_factor(&self) -> f64 {
        self.grad_reflected / self.grad_on_v
    }
}

/// Computes the four norms by quadrature on the disc of radius `12`
/// (reflection invariant; the Gaussian tail beyond it is below `1e-31`).
/// The reflected side is integrated independently of the original one.
pub fn reflection_norms<F, G>(f: F, grad: G, h: Point2, p: f64, tol: f64) -> Result<ReflectionReport>
where
    F: Fn(Point2) -> f64,
    G: Fn(Point2) -> Point2,
{
    let dir = Direction::new(h.to_vec());
    check_unit(&dir)?;
    let disc = PlanarDomain::disc([0.0, 0.0], 12.0)?;
    let pos = PlanarDomain::half_plane(h, 0.0)?;
    let neg = PlanarDomain::half_plane([-h[0], -h[1]], 0.0)?;
    let mode = WeightMode::GaussianRelative { anchor: [0.0, 0.0] };
    let opts = Quad2dOptions {
        tol,
        abs_tol: 1e-300,
        ..Quad2dOptions::default()
    };
    let ft = |x: Point2| reflect_halfspace(|y: &[f64]| f([y[0], y[1]]), &dir, &x).expect("unit direction");
    let gt = |x: Point2| {
        let g = reflect_gradient(|y: &[f64]| grad([y[0], y[1]]).to_vec(), &dir, &x).expect("unit direction");
        [g[0], g[1]]
    };
    let int = |region: &PlanarDomain, q: &dyn Fn(Point2) -> f64| -> Result<f64> {
        Ok(quad_integrate_2d(mode, &[disc.clone(), region.clone()], |x| q(x).abs().powf(p), &opts)?.value
            / (2.0 * std::f64::consts::PI))
    };
    let lp_v = int(&pos, &|x| f(x))?;
    let lp_n = int(&neg, &ft)?;
    let gr_v = int(&pos, &|x| crate::norm2(grad(x)))?;
    let gr_n = int(&neg, &|x| crate::norm2(gt(x)))?;
    Ok(ReflectionReport {
        p,
        lp_on_v: lp_v.powf(1.0 / p),
        lp_reflected: (lp_v + lp_n).powf(1.0 / p),
        grad_on_v: gr_v.powf(1.0 / p),
        grad_reflected: (gr_v + gr_n).powf(1.0 / p),
    })
}
