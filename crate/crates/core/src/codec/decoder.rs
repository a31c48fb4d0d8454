//! Sequential threshold decoder with re-decoding at every deadline.
//!
//! At deadline `d` the decoder walks `j = 1..k`. With the earlier estimates
//! fixed, a candidate `g_j` qualifies iff some continuation `g_{j+1..d}` makes
//! the accumulated density over blocks `j..d` exceed `(d - j + 1) log2 M`.
//! A unique qualifier is adopted; otherwise the estimate is message 1.
//!
//! The existence test is a depth-first search over continuations. A subtree
//! is skipped only when even the best possible score on every remaining
//! block cannot reach the threshold, so the search is exact.

use super::codebook::{BlockObs, CodebookAccess, ScoreTable};

pub struct Decoder<'a, C: CodebookAccess> {
    cb: &'a C,
    table: &'a ScoreTable,
    delay: usize,
    log_m: f64,
}

impl<'a, C: CodebookAccess> Decoder<'a, C> {
    pub fn new(cb: &'a C, table: &'a ScoreTable, delay: usize) -> Self {
        Decoder { cb, table, delay, log_m: (cb.messages() as f64).log2() }
    }

    /// Zero-based estimate of message `k` (one-based) from blocks `1..=k+T-1`.
    ///
    /// # Panics
    /// If `obs` does not hold exactly `k + T - 1` blocks.
    pub fn decode(&self, k: usize, obs: &[BlockObs]) -> u32 {
        *self.estimates(k, obs).last().expect("k >= 1")
    }

    /// Estimates of messages `1..=k` made at deadline `k + T - 1`.
    pub fn estimates(&self, k: usize, obs: &[BlockObs]) -> Vec<u32> {
        assert!(k >= 1, "message index is one-based");
        let d = k + self.delay - 1;
        assert_eq!(obs.len(), d, "decoder needs exactly k + T - 1 blocks");
        let m = self.cb.messages();
        if m == 1 {
            return vec![0; k];
        }
        let mut ub_suffix = vec![0.0; d + 1];
        for b in (0..d).rev() {
            ub_suffix[b] = ub_suffix[b + 1] + obs[b].upper_bound;
        }
        let mut scratch = vec![0u32; 2 * self.table.input_size().max(2) * self.table.output_size()];
        let mut estimates = Vec::with_capacity(k);
        let mut prefix = self.cb.root();
        for j in 0..k {
            let thr = (d - j) as f64 * self.log_m;
            let margin = 1e-9 * (1.0 + thr.abs());
            let mut qualifiers = 0;
            let mut chosen = 0;
            for g in 0..m {
                let node = self.cb.child(&prefix, g);
                let s = self.cb.score(&node, &obs[j], self.table, &mut scratch);
                let ok = if j + 1 == d {
                    s > thr
                } else {
                    s + ub_suffix[j + 1] >= thr - margin
                        && self.exists(&node, j + 1, d, s, thr, margin, &ub_suffix, obs, &mut scratch)
                };
                if ok {
                    qualifiers += 1;
                    chosen = g;
                    if qualifiers > 1 {
                        break;
                    }
                }
            }
            let estimate = if qualifiers == 1 { chosen } else { 0 };
            estimates.push(estimate);
            prefix = self.cb.child(&prefix, estimate);
        }
        estimates
    }

    /// Whether some continuation below `node` through block `d` beats `thr`.
    #[allow(clippy::too_many_arguments)]
    fn exists(
        &self,
        node: &C::Node,
        b: usize,
        d: usize,
        partial: f64,
        thr: f64,
        margin: f64,
        ub_suffix: &[f64],
        obs: &[BlockObs],
        scratch: &mut [u32],
    ) -> bool {
        if b + 1 == d {
            return self.cb.any_child_exceeds(node, &obs[b], self.table, scratch, partial, thr);
        }
        for g in 0..self.cb.messages() {
            let child = self.cb.child(node, g);
            let total = partial + self.cb.score(&child, &obs[b], self.table, scratch);
            if total + ub_suffix[b + 1] >= thr - margin
                && self.exists(&child, b + 1, d, total, thr, margin, ub_suffix, obs, scratch)
            {
                return true;
            }
        }
        false
    }
}
