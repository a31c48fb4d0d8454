//! Channel capacity by alternating maximisation (Blahut-Arimoto).
//!
//! Each sweep has the standard sandwich `I(P, W) <= C <= max_x D(W(.|x) || PW)`,
//! and iteration stops once the two sides are within the tolerance.

use super::info::{kl, output_distribution};
use super::{Dmc, InputDistribution};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub capacity_bits: f64,
    pub input: InputDistribution,
    /// Upper minus lower bound at termination.
    pub gap: f64,
    pub iterations: usize,
}

pub fn capacity(w: &Dmc, tol: f64) -> Result<CapacityResult> {
    capacity_from(w, tol, DEFAULT_MAX_ITER, None)
}

/// Capacity with an explicit iteration cap and optional warm start.
pub fn capacity_from(
    w: &Dmc,
    tol: f64,
    max_iter: usize,
    start: Option<&[f64]>,
) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let nx = w.input_size();
    let mut p: Vec<f64> = match start {
        Some(s) if s.len() == nx => s.iter().map(|v| v.max(1e-300)).collect(),
        _ => vec![1.0 / nx as f64; nx],
    };
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);

    let mut divs = vec![0.0; nx];
    let mut gap = f64::INFINITY;
    for it in 0..max_iter {
        let dist = InputDistribution::new_unchecked(p.clone());
        let q = output_distribution(&dist, w);
        for (x, d) in divs.iter_mut().enumerate() {
            *d = kl(w.row(x), &q);
        }
        let lower: f64 = p.iter().zip(&divs).map(|(a, d)| a * d).sum();
        let upper = divs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        gap = (upper - lower).max(0.0);
        if gap <= tol {
            return Ok(CapacityResult {
                capacity_bits: lower.max(0.0),
                input: dist,
                gap,
                iterations: it,
            });
        }
        // multiplicative update P(x) <- P(x) 2^{D(W_x || PW)} / Z
        let shift = upper;
        let mut z = 0.0;
        for (px, d) in p.iter_mut().zip(&divs) {
            *px *= (d - shift).exp2();
            z += *px;
        }
        p.iter_mut().for_each(|v| *v /= z);
    }
    Err(Error::NonConvergence {
        what: "capacity",
        iterations: max_iter,
        gap,
    })
}

impl InputDistribution {
    /// Wraps a vector already known to be a probability vector up to rounding.
    pub(crate) fn new_unchecked(probs: Vec<f64>) -> Self {
        InputDistribution::from_weights(probs).expect("positive weights")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::info::{binary_entropy, mutual_information};
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_capacities() {
        assert_abs_diff_eq!(capacity(&Dmc::bsc(0.0).unwrap(), 1e-9).unwrap().capacity_bits, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(capacity(&Dmc::bsc(0.5).unwrap(), 1e-9).unwrap().capacity_bits, 0.0, epsilon = 1e-9);
        let c = capacity(&Dmc::bsc(0.11).unwrap(), 1e-9).unwrap().capacity_bits;
        assert_abs_diff_eq!(c, 1.0 - binary_entropy(0.11), epsilon = 1e-9);
        assert_abs_diff_eq!(c, 0.5001, epsilon = 1e-3);
        let e = capacity(&Dmc::bec(0.3).unwrap(), 1e-9).unwrap().capacity_bits;
        assert_abs_diff_eq!(e, 0.7, epsilon = 1e-9);
    }

    #[test]
    fn z_channel_capacity_matches_closed_form() {
        // C = log2(1 + (1-q) q^{q/(1-q)})
        let q: f64 = 0.3;
        let closed = (1.0 + (1.0 - q) * q.powf(q / (1.0 - q))).log2();
        let r = capacity(&Dmc::z_channel(q).unwrap(), 1e-11).unwrap();
        assert_abs_diff_eq!(r.capacity_bits, closed, epsilon = 1e-10);
        let i = mutual_information(&r.input, &Dmc::z_channel(q).unwrap()).unwrap();
        assert!(i >= r.capacity_bits - 1e-11);
    }

    #[test]
    fn rejects_bad_tolerance_and_reports_cap() {
        assert!(capacity(&Dmc::bsc(0.1).unwrap(), 0.0).is_err());
        let z = Dmc::z_channel(0.4).unwrap();
        match capacity_from(&z, 1e-15, 3, None) {
            Err(Error::NonConvergence { gap, .. }) => assert!(gap > 0.0),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
