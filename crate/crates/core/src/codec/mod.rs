//! Streaming block code: prefix-indexed random codebook, block encoder,
//! channel simulation and the sequential threshold decoder.
//!
//! Messages are one-based at the public boundary and zero-based inside.

mod codebook;
mod decoder;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use codebook::{BlockObs, CodebookAccess, LazyCodebook, ScoreTable, TableCodebook, TableEntry};
pub use decoder::Decoder;

use crate::channel::{capacity, ChannelSpec, Dmc, InputDistribution, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::rng::{domain, sample_index, Stream, StreamKey};
use crate::stats::{clopper_pearson_95, Interval};

/// Largest number of message paths `M^{T_S}` the exhaustive decoder accepts.
pub const SEARCH_LIMIT: f64 = 1e8;

/// Everything that determines a simulated streaming code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct StreamingConfig {
    /// Block length.
    pub n: usize,
    /// Messages per block.
    pub m: u32,
    /// Decoding delay in blocks.
    pub delay: usize,
    /// Number of messages that are decoded.
    pub streams: usize,
    pub channel: Dmc,
    pub input: InputDistribution,
    pub master_seed: u64,
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    n: usize,
    #[serde(rename = "M")]
    m: u32,
    #[serde(rename = "T")]
    delay: usize,
    #[serde(rename = "S")]
    streams: usize,
    channel: ChannelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_dist: Option<InputDistribution>,
    master_seed: u64,
}

impl TryFrom<RawConfig> for StreamingConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        let channel = raw.channel.resolve()?;
        let input = match raw.input_dist {
            Some(p) => p,
            None => capacity(&channel, DEFAULT_TOL)?.input,
        };
        StreamingConfig::new(raw.n, raw.m, raw.delay, raw.streams, channel, input, raw.master_seed)
    }
}

impl From<StreamingConfig> for RawConfig {
    fn from(c: StreamingConfig) -> Self {
        RawConfig {
            n: c.n,
            m: c.m,
            delay: c.delay,
            streams: c.streams,
            channel: ChannelSpec::Matrix(c.channel),
            input_dist: Some(c.input),
            master_seed: c.master_seed,
        }
    }
}

impl StreamingConfig {
    pub fn new(
        n: usize,
        m: u32,
        delay: usize,
        streams: usize,
        channel: Dmc,
        input: InputDistribution,
        master_seed: u64,
    ) -> Result<Self> {
        if n == 0 || m == 0 || delay == 0 || streams == 0 {
            return Err(Error::Precondition(format!(
                "n, M, T, S must all be >= 1 (got n={n}, M={m}, T={delay}, S={streams})"
            )));
        }
        input.check_compatible(&channel)?;
        Ok(StreamingConfig { n, m, delay, streams, channel, input, master_seed })
    }

    /// Total number of transmitted blocks `S + T - 1`.
    pub fn total_blocks(&self) -> usize {
        self.streams + self.delay - 1
    }

    /// Deadline (one-based block index) of message `k`.
    pub fn deadline(&self, k: usize) -> usize {
        k + self.delay - 1
    }

    /// Number of message paths the decoder may have to search.
    pub fn search_size(&self) -> f64 {
        (self.m as f64).powi(self.total_blocks() as i32)
    }
}

/// Result of one simulated transmission of a message stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    /// All `S + T - 1` messages sent, auxiliary ones included, one-based.
    pub transmitted: Vec<u32>,
    /// Estimates of messages `1..=S`, one-based.
    pub decoded: Vec<u32>,
    pub errors: Vec<bool>,
}

/// Error-rate estimate for one message index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageError {
    pub k: usize,
    pub errors: u64,
    pub trials: u64,
    pub eps_hat: f64,
    pub ci: Interval,
}

impl MessageError {
    fn new(k: usize, errors: u64, trials: u64) -> Self {
        MessageError { k, errors, trials, eps_hat: errors as f64 / trials as f64, ci: clopper_pearson_95(errors, trials) }
    }
}

/// Per-message estimates and the maximum over messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub trials: u64,
    pub per_message: Vec<MessageError>,
    /// The message with the largest `eps_hat`; ties go to the smallest `k`.
    pub max: MessageError,
}

impl ErrorEstimate {
    /// Summary CSV with columns `k, errors, trials, eps_hat, ci_lo, ci_hi`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "errors", "trials", "eps_hat", "ci_lo", "ci_hi"])?;
        for e in &self.per_message {
            w.write_record([
                e.k.to_string(),
                e.errors.to_string(),
                e.trials.to_string(),
                e.eps_hat.to_string(),
                e.ci.lo.to_string(),
                e.ci.hi.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Trials per parallel batch; outcomes are merged in trial order.
const BATCH: u64 = 1 << 12;

/// A streaming code ready to simulate.
pub struct Simulator<C: CodebookAccess> {
    config: StreamingConfig,
    codebook: C,
    table: ScoreTable,
}

impl Simulator<LazyCodebook> {
    /// Simulator over the keyed lazy codebook of `config`.
    pub fn new(config: StreamingConfig) -> Result<Self> {
        let cb = LazyCodebook::new(config.n, config.m, &config.input, config.master_seed);
        Simulator::with_codebook(config, cb)
    }
}

impl<C: CodebookAccess> Simulator<C> {
    /// Simulator over an explicit codebook, which must cover depth `S + T - 1`.
    pub fn with_codebook(config: StreamingConfig, codebook: C) -> Result<Self> {
        if codebook.block_length() != config.n || codebook.messages() != config.m {
            return Err(Error::ShapeMismatch("codebook does not match n and M".into()));
        }
        let size = config.search_size();
        if size > SEARCH_LIMIT {
            return Err(Error::Guard { what: "M^(S+T-1) decoder search size", value: size, limit: SEARCH_LIMIT });
        }
        let table = ScoreTable::new(&config.input, &config.channel)?;
        Ok(Simulator { config, codebook, table })
    }

    pub fn config(&self) -> &StreamingConfig {
        &self.config
    }

    pub fn codebook(&self) -> &C {
        &self.codebook
    }

    fn node(&self, prefix: &[u32]) -> C::Node {
        prefix.iter().fold(self.codebook.root(), |node, &g| self.codebook.child(&node, g))
    }

    /// Codeword of block `k` (one-based) for the one-based prefix `g^k`.
    pub fn encode_block(&self, k: usize, prefix: &[u32]) -> Result<Vec<usize>> {
        if k == 0 || k > self.config.total_blocks() {
            return Err(Error::Precondition(format!("block index {k} outside 1..={}", self.config.total_blocks())));
        }
        if prefix.len() != k || prefix.iter().any(|&g| g == 0 || g > self.config.m) {
            return Err(Error::Precondition(format!("prefix must hold {k} messages in 1..={}", self.config.m)));
        }
        let zero: Vec<u32> = prefix.iter().map(|g| g - 1).collect();
        Ok(self.codebook.codeword(&self.node(&zero)))
    }

    /// One-based estimate of message `k` from the first `k + T - 1` output blocks.
    pub fn decode_at_deadline(&self, k: usize, y_blocks: &[Vec<usize>]) -> Result<u32> {
        let c = &self.config;
        if k == 0 || k > c.streams {
            return Err(Error::Precondition(format!("message index {k} outside 1..={}", c.streams)));
        }
        if y_blocks.len() != c.deadline(k) {
            return Err(Error::ShapeMismatch(format!("need {} output blocks, got {}", c.deadline(k), y_blocks.len())));
        }
        let ny = c.channel.output_size();
        if y_blocks.iter().any(|b| b.len() != c.n || b.iter().any(|&y| y >= ny)) {
            return Err(Error::ShapeMismatch(format!("output blocks must hold {} symbols below {ny}", c.n)));
        }
        let obs: Vec<BlockObs> = y_blocks.iter().map(|b| BlockObs::new(b.clone(), &self.table)).collect();
        Ok(self.decoder().decode(k, &obs) + 1)
    }

    /// Zero-based estimates of messages `1..=S`, each made at its own deadline.
    pub(crate) fn decode_stream(&self, obs: &[BlockObs]) -> Vec<u32> {
        let dec = self.decoder();
        (1..=self.config.streams).map(|k| dec.decode(k, &obs[..self.config.deadline(k)])).collect()
    }

    pub(crate) fn score_table(&self) -> &ScoreTable {
        &self.table
    }

    fn decoder(&self) -> Decoder<'_, C> {
        Decoder::new(&self.codebook, &self.table, self.config.delay)
    }

    /// Simulates trial `trial`; a pure function of the master seed and `trial`.
    pub fn run_trial(&self, trial: u64) -> TrialOutcome {
        let c = &self.config;
        let key = StreamKey::new(c.master_seed, domain::TRIAL).child(trial);
        let mut msg_stream = key.child(0).stream();
        let mut noise = key.child(1).stream();
        let blocks = c.total_blocks();
        let sent: Vec<u32> = (0..blocks).map(|_| msg_stream.next_below(c.m as u64) as u32).collect();
        let mut node = self.codebook.root();
        let mut obs = Vec::with_capacity(blocks);
        for &g in &sent {
            node = self.codebook.child(&node, g);
            let x = self.codebook.codeword(&node);
            obs.push(BlockObs::new(transmit_block(&c.channel, &x, &mut noise), &self.table));
        }
        let decoded = self.decode_stream(&obs);
        let errors = decoded.iter().zip(&sent).map(|(d, g)| d != g).collect();
        TrialOutcome {
            trial,
            transmitted: sent.iter().map(|g| g + 1).collect(),
            decoded: decoded.iter().map(|g| g + 1).collect(),
            errors,
        }
    }

    /// Runs trials `0..trials` in parallel and aggregates per-message error
    /// counts. Outcomes are written to `records` as JSON lines in trial order.
    pub fn estimate_errors(&self, trials: u64, mut records: Option<&mut dyn Write>) -> Result<ErrorEstimate> {
        if trials == 0 {
            return Err(Error::Precondition("need at least one trial".into()));
        }
        let s = self.config.streams;
        let mut counts = vec![0u64; s];
        let mut start = 0;
        while start < trials {
            let end = (start + BATCH).min(trials);
            match records.as_deref_mut() {
                Some(out) => {
                    let outcomes: Vec<TrialOutcome> = (start..end).into_par_iter().map(|t| self.run_trial(t)).collect();
                    for o in &outcomes {
                        add_errors(&mut counts, &o.errors);
                        serde_json::to_writer(&mut *out, o)?;
                        out.write_all(b"\n")?;
                    }
                }
                None => {
                    let batch = (start..end)
                        .into_par_iter()
                        .map(|t| {
                            let mut c = vec![0u64; s];
                            add_errors(&mut c, &self.run_trial(t).errors);
                            c
                        })
                        .reduce(
                            || vec![0u64; s],
                            |mut a, b| {
                                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                                a
                            },
                        );
                    counts.iter_mut().zip(&batch).for_each(|(x, y)| *x += y);
                }
            }
            start = end;
        }
        let per_message: Vec<MessageError> =
            counts.iter().enumerate().map(|(i, &e)| MessageError::new(i + 1, e, trials)).collect();
        let max = per_message
            .iter()
            .fold(None::<&MessageError>, |best, e| match best {
                Some(b) if b.errors >= e.errors => Some(b),
                _ => Some(e),
            })
            .expect("S >= 1")
            .clone();
        Ok(ErrorEstimate { trials, per_message, max })
    }
}

fn add_errors(counts: &mut [u64], errors: &[bool]) {
    for (c, &e) in counts.iter_mut().zip(errors) {
        *c += e as u64;
    }
}

/// Passes a block through the channel, drawing each output by inverse CDF on
/// the row of its input symbol.
pub fn transmit_block(w: &Dmc, x: &[usize], stream: &mut Stream) -> Vec<usize> {
    x.iter().map(|&xi| sample_index(w.row(xi), stream.next_f64())).collect()
}
