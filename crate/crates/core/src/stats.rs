//! Binomial confidence intervals for Monte Carlo error estimates.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

/// Two-sided exact (Clopper-Pearson) interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Clopper-Pearson interval for `errors` successes out of `trials` at
/// confidence `1 - alpha`.
pub fn clopper_pearson(errors: u64, trials: u64, alpha: f64) -> Interval {
    assert!(trials > 0 && errors <= trials, "need 0 <= errors <= trials, trials > 0");
    let (k, n) = (errors as f64, trials as f64);
    let half = alpha / 2.0;
    let lo = if errors == 0 {
        0.0
    } else if errors == trials {
        half.powf(1.0 / n)
    } else {
        Beta::new(k, n - k + 1.0).expect("positive shapes").inverse_cdf(half)
    };
    let hi = if errors == trials {
        1.0
    } else if errors == 0 {
        1.0 - half.powf(1.0 / n)
    } else {
        Beta::new(k + 1.0, n - k).expect("positive shapes").inverse_cdf(1.0 - half)
    };
    Interval { lo, hi }
}

/// 95% Clopper-Pearson interval.
pub fn clopper_pearson_95(errors: u64, trials: u64) -> Interval {
    clopper_pearson(errors, trials, 0.05)
}

/// Binomial standard error `sqrt(p (1 - p) / trials)`.
pub fn standard_error(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}
