//! Log-scale weights and underflow-safe accumulation.

use serde::{Deserialize, Serialize};

/// A nonnegative quantity stored as `exp(log_value + reference_log)`.
///
/// `reference_log` is an anchor such as `log ϱ(a)` that is kept apart so that
/// ratios against the anchor stay representable when the absolute value
/// underflows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogWeight {
    pub log_value: f64,
    pub reference_log: f64,
}

impl LogWeight {
    pub fn new(log_value: f64, reference_log: f64) -> Self {
        Self {
            log_value,
            reference_log,
        }
    }

    /// Wraps a plain nonnegative value with anchor 0.
    pub fn from_value(value: f64) -> Self {
        Self::new(value.ln(), 0.0)
    }

    pub fn zero() -> Self {
        Self::new(f64::NEG_INFINITY, 0.0)
    }

    /// Value relative to the anchor, `exp(log_value)`.
    pub fn relative(&self) -> f64 {
        self.log_value.exp()
    }

    /// Natural log of the absolute value.
    pub fn absolute_log(&self) -> f64 {
        if self.log_value == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.log_value + self.reference_log
        }
    }

    /// Absolute value; underflows to 0 when the anchor is tiny.
    pub fn value(&self) -> f64 {
        self.absolute_log().exp()
    }

    /// Re-expresses the weight against another anchor.
    pub fn rebase(&self, reference_log: f64) -> Self {
        Self::new(self.absolute_log() - reference_log, reference_log)
    }

    /// `self^exponent`, anchor included.
    pub fn powf(&self, exponent: f64) -> Self {
        Self::new(self.log_value * exponent, self.reference_log * exponent)
    }

    /// Sum of two weights expressed against the anchor of `self`.
    pub fn add(&self, other: &LogWeight) -> Self {
        let other = other.rebase(self.reference_log);
        Self::new(log_add_exp(self.log_value, other.log_value), self.reference_log)
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn anchors_far_apart() {
        // ϱ((m²,0)) for m = 32 is e^{-524288}/2π; the sum must not lose the larger term.
        let a = LogWeight::new(0.0, -524288.0);
        let b = LogWeight::new(0.0, -8.0);
        let s = a.add(&b);
        assert!((s.absolute_log() + 8.0).abs() < 1e-12);
    }

    #[test]
    fn zero_is_neutral() {
        let z = LogWeight::zero();
        let w = LogWeight::new(1.5, 2.0);
        assert_eq!(w.add(&z).absolute_log(), w.absolute_log());
        assert_eq!(z.value(), 0.0);
    }

    proptest! {
        #[test]
        fn log_sum_exp_matches_direct(xs in proptest::collection::vec(-30.0f64..30.0, 1..20)) {
            let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
            prop_assert!((log_sum_exp(&xs) - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }

        #[test]
        fn rebase_preserves_value(lv in -50.0f64..50.0, r1 in -1e4f64..1e4, r2 in -1e4f64..1e4) {
            let w = LogWeight::new(lv, r1);
            let v = w.rebase(r2);
            prop_assert!((w.absolute_log() - v.absolute_log()).abs() < 1e-9 * (1.0 + r1.abs() + r2.abs()));
        }
    }
}
