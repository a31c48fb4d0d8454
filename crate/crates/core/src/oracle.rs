//! Exact error probabilities of tiny streaming codes by full enumeration.
//!
//! Two quantities are computed: the error of the threshold decoder for every
//! message, and the error of the genie-aided MAP decoder that knows the true
//! past messages and sees either all outputs up to the deadline or only the
//! last `T` blocks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{BlockObs, CodebookAccess, Simulator, StreamingConfig, TableCodebook, TableEntry};
use crate::error::{Error, Result};

/// Largest enumeration `M^{T_S} |Y|^{n T_S}` accepted.
pub const ENUMERATION_LIMIT: f64 = 1e8;

/// Relative tolerance under which two posterior weights count as tied.
pub const MAP_TIE_TOL: f64 = 1e-12;

/// Output sequences per parallel chunk; partial sums are merged in order.
const CHUNK: usize = 1 << 10;

/// A streaming code with an explicit codebook, small enough to enumerate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct TinyInstance {
    config: StreamingConfig,
    table: TableCodebook,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    config: StreamingConfig,
    codebook: Vec<TableEntry>,
}

impl TryFrom<RawInstance> for TinyInstance {
    type Error = Error;
    fn try_from(raw: RawInstance) -> Result<Self> {
        let c = &raw.config;
        let table = TableCodebook::from_entries(c.n, c.m, c.total_blocks(), c.channel.input_size(), &raw.codebook)?;
        TinyInstance::new(raw.config, table)
    }
}

impl From<TinyInstance> for RawInstance {
    fn from(inst: TinyInstance) -> Self {
        RawInstance { codebook: inst.table.entries(), config: inst.config }
    }
}

impl TinyInstance {
    /// Checks that the table covers depth `S + T - 1` and the enumeration guard.
    pub fn new(config: StreamingConfig, table: TableCodebook) -> Result<Self> {
        if table.depth() != config.total_blocks()
            || table.block_length() != config.n
            || table.messages() != config.m
        {
            return Err(Error::ShapeMismatch("codebook table must match n, M and depth S + T - 1".into()));
        }
        let size = enumeration_size(&config);
        if size > ENUMERATION_LIMIT {
            return Err(Error::Guard { what: "M^(S+T-1) |Y|^(n (S+T-1)) enumeration", value: size, limit: ENUMERATION_LIMIT });
        }
        Ok(TinyInstance { config, table })
    }

    /// Instance whose table is the keyed random codebook of `config`.
    pub fn from_config(config: StreamingConfig) -> Result<Self> {
        let sim = Simulator::new(config.clone())?;
        let table = TableCodebook::materialize(sim.codebook(), config.total_blocks());
        TinyInstance::new(config, table)
    }

    pub fn config(&self) -> &StreamingConfig {
        &self.config
    }

    pub fn table(&self) -> &TableCodebook {
        &self.table
    }

    fn tree(&self) -> CodeTree {
        let c = &self.config;
        let m = c.m as usize;
        let mut words = Vec::with_capacity(c.total_blocks());
        for depth in 1..=c.total_blocks() {
            let count = m.pow(depth as u32);
            let level = (0..count)
                .map(|idx| {
                    let prefix = digits(idx, m, depth);
                    self.table.lookup(&prefix).expect("complete table").to_vec()
                })
                .collect();
            words.push(level);
        }
        CodeTree { m, words }
    }
}

fn enumeration_size(c: &StreamingConfig) -> f64 {
    let tb = c.total_blocks() as f64;
    (c.m as f64).powf(tb) * (c.channel.output_size() as f64).powf(c.n as f64 * tb)
}

/// Base-`radix` digits of `idx`, most significant first, `len` of them.
fn digits(mut idx: usize, radix: usize, len: usize) -> Vec<u32> {
    let mut d = vec![0u32; len];
    for slot in d.iter_mut().rev() {
        *slot = (idx % radix) as u32;
        idx /= radix;
    }
    d
}

/// Codewords by depth; the node of prefix `g^b` has index `sum g_i M^{b-1-i}`.
struct CodeTree {
    m: usize,
    words: Vec<Vec<Vec<usize>>>,
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn merge(&mut self, other: &Sum) {
        self.add(other.s);
        self.add(other.c);
    }

    fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// `W^n(y | x)` for one block.
fn block_likelihood(w: &crate::channel::Dmc, x: &[usize], y: &[usize]) -> f64 {
    x.iter().zip(y).map(|(&a, &b)| w.prob(a, b)).product()
}

/// Exact per-message error probabilities of the threshold decoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactErrors {
    /// `P(G_k_hat != G_k)` for `k = 1..=S`.
    pub per_message: Vec<f64>,
    pub max: f64,
    /// Largest deviation of `sum_y P(y | g)` from 1 over all `g`.
    pub normalization_error: f64,
}

pub fn exact_streaming_error(inst: &TinyInstance) -> Result<ExactErrors> {
    let c = inst.config();
    let sim = Simulator::with_codebook(c.clone(), inst.table.clone())?;
    let tree = inst.tree();
    let (n, blocks, s) = (c.n, c.total_blocks(), c.streams);
    let ny = c.channel.output_size();
    let paths = tree.m.pow(blocks as u32);
    let outputs = ny.pow((n * blocks) as u32);
    let weight = 1.0 / paths as f64;

    let partials: Vec<(Vec<Sum>, Vec<Sum>)> = (0..outputs.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut err = vec![Sum::default(); s];
            let mut mass = vec![Sum::default(); paths];
            let mut like = vec![vec![0.0; 0]; blocks];
            for yi in chunk * CHUNK..((chunk + 1) * CHUNK).min(outputs) {
                let y: Vec<usize> = digits(yi, ny, n * blocks).into_iter().map(|v| v as usize).collect();
                let obs: Vec<BlockObs> =
                    y.chunks(n).map(|b| BlockObs::new(b.to_vec(), sim.score_table())).collect();
                let decoded = sim.decode_stream(&obs);
                for (b, level) in tree.words.iter().enumerate() {
                    like[b] = level.iter().map(|x| block_likelihood(&c.channel, x, &obs[b].symbols)).collect();
                }
                for (g, m_slot) in mass.iter_mut().enumerate() {
                    let path = digits(g, tree.m, blocks);
                    let mut p = 1.0;
                    let mut node = 0;
                    for b in 0..blocks {
                        node = node * tree.m + path[b] as usize;
                        p *= like[b][node];
                    }
                    if p == 0.0 {
                        continue;
                    }
                    m_slot.add(p);
                    for k in 0..s {
                        if decoded[k] != path[k] {
                            err[k].add(p * weight);
                        }
                    }
                }
            }
            (err, mass)
        })
        .collect();

    let mut err = vec![Sum::default(); s];
    let mut mass = vec![Sum::default(); paths];
    for (e, m) in &partials {
        err.iter_mut().zip(e).for_each(|(a, b)| a.merge(b));
        mass.iter_mut().zip(m).for_each(|(a, b)| a.merge(b));
    }
    let per_message: Vec<f64> = err.iter().map(|e| e.value().clamp(0.0, 1.0)).collect();
    let normalization_error = mass.iter().map(|m| (m.value() - 1.0).abs()).fold(0.0, f64::max);
    if normalization_error > 1e-9 {
        return Err(Error::Precondition(format!("output probabilities sum to 1 only within {normalization_error:e}")));
    }
    let max = per_message.iter().copied().fold(0.0, f64::max);
    Ok(ExactErrors { per_message, max, normalization_error })
}

/// Error probability of the MAP estimate of message `k` (one-based) given
/// the true messages `1..k-1` and the outputs up to block `k + T - 1`; with
/// `window_only` the outputs before block `k` are withheld.
pub fn exact_feedforward_map_error(inst: &TinyInstance, k: usize, window_only: bool) -> Result<f64> {
    let c = inst.config();
    if k == 0 || k > c.streams {
        return Err(Error::Precondition(format!("message index {k} outside 1..={}", c.streams)));
    }
    let tree = inst.tree();
    let (n, m, ny) = (c.n, tree.m, c.channel.output_size());
    let deadline = c.deadline(k);
    let first = if window_only { k - 1 } else { 0 };
    let seen = deadline - first;
    let outputs = ny.pow((n * seen) as u32);
    let futures = m.pow((deadline - k) as u32);
    let pasts = m.pow((k - 1) as u32);
    // each (past, g_k, continuation) path has prior weight 1 / M^deadline
    let weight = 1.0 / (pasts * m * futures) as f64;

    let mut total = Sum::default();
    for past_idx in 0..pasts {
        let past = digits(past_idx, m, k - 1);
        let partials: Vec<Sum> = (0..outputs.div_ceil(CHUNK))
            .into_par_iter()
            .map(|chunk| {
                let mut err = Sum::default();
                let mut post = vec![Sum::default(); m];
                for yi in chunk * CHUNK..((chunk + 1) * CHUNK).min(outputs) {
                    let y: Vec<usize> = digits(yi, ny, n * seen).into_iter().map(|v| v as usize).collect();
                    post.iter_mut().for_each(|p| *p = Sum::default());
                    for (g, slot) in post.iter_mut().enumerate() {
                        for f in 0..futures {
                            let mut path = past.clone();
                            path.push(g as u32);
                            path.extend(digits(f, m, deadline - k));
                            let mut p = 1.0;
                            let mut node = 0;
                            for (b, &gb) in path.iter().enumerate() {
                                node = node * m + gb as usize;
                                if b >= first {
                                    let yb = &y[(b - first) * n..(b - first + 1) * n];
                                    p *= block_likelihood(&c.channel, &tree.words[b][node], yb);
                                }
                            }
                            slot.add(p);
                        }
                    }
                    let likes: Vec<f64> = post.iter().map(Sum::value).collect();
                    let best = map_decision(&likes);
                    for (g, &l) in likes.iter().enumerate() {
                        if g != best {
                            err.add(l * weight);
                        }
                    }
                }
                err
            })
            .collect();
        for p in &partials {
            total.merge(p);
        }
    }
    Ok(total.value().clamp(0.0, 1.0))
}

/// Index of the largest weight; weights within a relative `MAP_TIE_TOL` of
/// the maximum are tied and the smallest such index wins.
fn map_decision(likes: &[f64]) -> usize {
    let max = likes.iter().copied().fold(0.0, f64::max);
    likes.iter().position(|&l| l >= max * (1.0 - MAP_TIE_TOL)).unwrap_or(0)
}
