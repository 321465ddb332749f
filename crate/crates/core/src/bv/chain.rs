//! `ψ(f)` for `ψ ∈ C¹_b`: the ac part picks up `ψ'(f)`, each jump the
//! quotient `(ψ(f₊) − ψ(f₋)) / (f₊ − f₋)`.

use std::sync::Arc;

use super::line::{lambda_1d, Bv1d, Continuous, Jump, RealFn, SharedDensity};
use super::measure::FinVectorMeasure;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ChainRule {
    pub composed: Bv1d,
    /// One quotient per input jump.
    pub jump_quotients: Vec<f64>,
    pub lambda: FinVectorMeasure,
    /// Lipschitz constant of `ψ` used for the variation bound.
    pub lipschitz: f64,
}

impl ChainRule {
    /// `Var(Λψ(f)) ≤ L·Var(Λf)` (relative slack `1e-9`).
    pub fn variation_bound_holds(&self, input: &FinVectorMeasure) -> Result<bool> {
        let out = self.lambda.variation()?;
        let inp = input.variation()?;
        Ok(out <= self.lipschitz * inp * (1.0 + 1e-9) + 1e-14)
    }
}

/// `sup |ψ'|` over a sample of `[min f, max f]`.
fn estimate_lipschitz(f: &Bv1d, dpsi: &RealFn) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut see = |v: f64| {
        lo = lo.min(v);
        hi = hi.max(v);
    };
    for j in f.jumps() {
        see(j.left);
        see(j.right);
    }
    for t in f.breakpoints() {
        see(f.value(t));
    }
    for i in 0..=400 {
        see(f.value(-20.0 + 40.0 * i as f64 / 400.0));
    }
    (0..=1000)
        .map(|i| dpsi(lo + (hi - lo) * i as f64 / 1000.0).abs())
        .fold(0.0, f64::max)
}

/// Composes `ψ ∘ f` and its derivative measure against `density`.
///
/// `lipschitz = None` estimates `sup |ψ'|` on the range of `f`.
pub fn chain_rule(f: &Bv1d, psi: RealFn, dpsi: RealFn, lipschitz: Option<f64>, density: SharedDensity) -> Result<ChainRule> {
    if let Some(j) = f.jumps().iter().find(|j| j.left == j.right) {
        return Err(Error::InvalidParameter {
            name: "f",
            reason: format!("zero-height jump at t = {}", j.t),
        });
    }
    let lipschitz = lipschitz.unwrap_or_else(|| estimate_lipschitz(f, &dpsi));
    let jump_quotients: Vec<f64> = f
        .jumps()
        .iter()
        .map(|j| (psi(j.right) - psi(j.left)) / (j.right - j.left))
        .collect();
    let kept: Vec<Jump> = f
        .jumps()
        .iter()
        .map(|j| Jump {
            t: j.t,
            left: psi(j.left),
            right: psi(j.right),
        })
        .filter(|j| j.left != j.right)
        .collect();
    let (g, p, dp) = (f.clone(), psi.clone(), dpsi.clone());
    let steps: Vec<(f64, f64)> = kept.iter().map(|j| (j.t, j.height())).collect();
    let value = move |t: f64| {
        let s: f64 = steps.iter().take_while(|(tj, _)| *tj <= t).map(|(_, h)| h).sum();
        p(g.value(t)) - s
    };
    let g = f.clone();
    let derivative = move |t: f64| dp(g.value(t)) * g.ac_derivative(t);
    let continuous = Continuous::Smooth {
        value: Arc::new(value),
        derivative: Arc::new(derivative),
        breaks: f.breakpoints(),
    };
    let composed = Bv1d::new(continuous, kept)?;
    let lambda = lambda_1d(&composed, density);
    Ok(ChainRule {
        composed,
        jump_quotients,
        lambda,
        lipschitz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bv::line::GaussianLine;

    fn rho() -> SharedDensity {
        GaussianLine::standard().shared()
    }

    #[test]
    fn cube_of_heaviside() {
        let f = Bv1d::indicator(0.0, f64::INFINITY).unwrap();
        let c = chain_rule(&f, Arc::new(|t: f64| t.powi(3)), Arc::new(|t: f64| 3.0 * t * t), None, rho()).unwrap();
        assert_eq!(c.jump_quotients, vec![1.0]);
        assert_eq!(c.composed.value(1.0), 1.0);
        assert_eq!(c.composed.value(-1.0), 0.0);
    }

    #[test]
    fn doubling_doubles_variation() {
        let f = Bv1d::with_jumps(Continuous::PiecewiseLinear(vec![[-1.0, 0.0], [0.5, 1.5], [2.0, -1.0]]), &[(0.0, 0.7), (1.0, -2.0)]).unwrap();
        let lf = lambda_1d(&f, rho());
        let c = chain_rule(&f, Arc::new(|t| 2.0 * t), Arc::new(|_| 2.0), Some(2.0), rho()).unwrap();
        let (a, b) = (c.lambda.variation().unwrap(), lf.variation().unwrap());
        assert!((a - 2.0 * b).abs() < 1e-12 * b, "{a} vs {b}");
        assert!(c.variation_bound_holds(&lf).unwrap());
        assert_eq!(c.jump_quotients, vec![2.0, 2.0]);
    }

    #[test]
    fn identity_is_identity() {
        let f = Bv1d::with_jumps(Continuous::PiecewiseLinear(vec![[0.0, 1.0], [1.0, 0.0]]), &[(0.5, 3.0)]).unwrap();
        let c = chain_rule(&f, Arc::new(|t| t), Arc::new(|_| 1.0), None, rho()).unwrap();
        assert_eq!(c.lipschitz, 1.0);
        for t in [-1.0, 0.2, 0.5, 0.9, 3.0] {
            assert!((c.composed.value(t) - f.value(t)).abs() < 1e-15);
        }
        assert_eq!(c.composed.jumps(), f.jumps());
    }
}
