//! Prefix-indexed random codebooks.
//!
//! A codebook is a tree: the node at depth `k` is a message prefix `g^k` and
//! carries the block-`k` codeword. The lazy codebook keys every node by a
//! 64-bit value derived from its parent, so codewords are regenerated on
//! demand. The table codebook stores an explicit map and exists for tiny
//! instances and fixtures.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::channel::{DensityTable, Dmc, InputDistribution};
use crate::error::{Error, Result};
use crate::rng::{domain, sample_index, StreamKey};

/// Per-symbol information densities used to score blocks.
///
/// Unlike [`DensityTable`], entries are defined for every pair: `-inf` when
/// `W(y|x) = 0` and `+inf` when `W(y|x) > 0 = PW(y)`.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    nx: usize,
    ny: usize,
    density: Vec<f64>,
    column_max: Vec<f64>,
}

impl ScoreTable {
    pub fn new(p: &InputDistribution, w: &Dmc) -> Result<Self> {
        let table = DensityTable::new(p, w)?;
        let (nx, ny) = (w.input_size(), w.output_size());
        let mut density = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                let d = table.get(x, y);
                density.push(if d.is_nan() {
                    if w.prob(x, y) > 0.0 {
                        f64::INFINITY
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    d
                });
            }
        }
        let column_max = (0..ny)
            .map(|y| (0..nx).map(|x| density[x * ny + y]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        Ok(ScoreTable { nx, ny, density, column_max })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.density[x * self.ny + y]
    }

    pub fn input_size(&self) -> usize {
        self.nx
    }

    pub fn output_size(&self) -> usize {
        self.ny
    }

    /// `sum_{x,y} N(x,y) i(x;y)` summed in a fixed order, skipping empty
    /// cells; any impossible transition makes the score `-inf`.
    #[inline]
    pub fn score_counts(&self, counts: &[u32]) -> f64 {
        let mut total = 0.0;
        for (c, &d) in counts.iter().zip(&self.density) {
            if *c > 0 {
                if d == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                total += *c as f64 * d;
            }
        }
        total
    }
}

const LUT_LIMIT: usize = 1 << 14;

/// One received block, with the bit masks used by the binary fast path.
#[derive(Debug, Clone)]
pub struct BlockObs {
    pub symbols: Vec<usize>,
    /// Number of occurrences of each output symbol.
    pub output_counts: Vec<u32>,
    /// Word `y * words + w` has bit `j` set iff symbol `64 w + j` equals `y`.
    masks: Vec<u64>,
    words: usize,
    /// Scores indexed by `sum_y ones_y * stride_y`, where `ones_y` counts the
    /// codeword ones at positions with output `y` (binary single-word blocks).
    lut: Vec<f64>,
    strides: [usize; 4],
    /// Largest score any codeword can attain on this block.
    pub upper_bound: f64,
}

impl BlockObs {
    pub fn new(symbols: Vec<usize>, table: &ScoreTable) -> Self {
        let ny = table.output_size();
        let words = symbols.len().div_ceil(64);
        let mut masks = vec![0u64; words * ny];
        let mut output_counts = vec![0u32; ny];
        for (j, &y) in symbols.iter().enumerate() {
            masks[y * words + j / 64] |= 1u64 << (j % 64);
            output_counts[y] += 1;
        }
        let mut upper_bound = 0.0;
        for (y, &c) in output_counts.iter().enumerate() {
            if c > 0 {
                upper_bound += c as f64 * table.column_max[y];
            }
        }
        let (lut, strides) = Self::lookup_table(&output_counts, words, table);
        BlockObs { symbols, output_counts, masks, words, lut, strides, upper_bound }
    }

    /// Precomputed scores for every count pattern when there are few enough.
    fn lookup_table(output_counts: &[u32], words: usize, table: &ScoreTable) -> (Vec<f64>, [usize; 4]) {
        let ny = output_counts.len();
        let mut strides = [0usize; 4];
        if words != 1 || ny > 4 || table.input_size() != 2 {
            return (Vec::new(), strides);
        }
        let mut size = 1usize;
        for y in 0..ny {
            strides[y] = size;
            size *= output_counts[y] as usize + 1;
        }
        if size > LUT_LIMIT {
            return (Vec::new(), strides);
        }
        let mut lut = Vec::with_capacity(size);
        let mut counts = [0u32; 8];
        for idx in 0..size {
            for y in 0..ny {
                let ones = ((idx / strides[y]) % (output_counts[y] as usize + 1)) as u32;
                counts[ny + y] = ones;
                counts[y] = output_counts[y] - ones;
            }
            lut.push(table.score_counts(&counts[..2 * ny]));
        }
        (lut, strides)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Read access to a prefix-indexed codebook. Message indices are zero-based.
pub trait CodebookAccess: Sync {
    type Node: Clone + Send;

    fn block_length(&self) -> usize;
    fn messages(&self) -> u32;
    fn root(&self) -> Self::Node;
    fn child(&self, node: &Self::Node, g: u32) -> Self::Node;
    /// Codeword of the block whose prefix ends at `node`.
    fn codeword(&self, node: &Self::Node) -> Vec<usize>;

    /// Block score `i(x(node); y)`. `scratch` holds `|X| |Y|` counters.
    fn score(&self, node: &Self::Node, obs: &BlockObs, table: &ScoreTable, scratch: &mut [u32]) -> f64 {
        scratch.iter_mut().for_each(|c| *c = 0);
        let ny = table.output_size();
        for (x, &y) in self.codeword(node).iter().zip(&obs.symbols) {
            scratch[x * ny + y] += 1;
        }
        table.score_counts(scratch)
    }

    /// Whether some child `g` of `node` has `partial + score > thr`.
    fn any_child_exceeds(
        &self,
        node: &Self::Node,
        obs: &BlockObs,
        table: &ScoreTable,
        scratch: &mut [u32],
        partial: f64,
        thr: f64,
    ) -> bool {
        (0..self.messages()).any(|g| partial + self.score(&self.child(node, g), obs, table, scratch) > thr)
    }
}

/// Keyed lazy codebook: node keys are `child(parent, g)` and codeword symbols
/// are read from the node's counter stream.
#[derive(Debug, Clone)]
pub struct LazyCodebook {
    n: usize,
    m: u32,
    root: u64,
    probs: Vec<f64>,
    /// Uniform binary input: symbol `j` is bit `j mod 64` of word `j / 64`.
    binary_uniform: bool,
}

impl LazyCodebook {
    pub fn new(n: usize, m: u32, input: &InputDistribution, master_seed: u64) -> Self {
        let probs = input.probs().to_vec();
        let binary_uniform = probs.len() == 2 && probs[0] == 0.5 && probs[1] == 0.5;
        LazyCodebook {
            n,
            m,
            root: StreamKey::new(master_seed, domain::CODEBOOK).0,
            probs,
            binary_uniform,
        }
    }

    pub fn uses_bit_path(&self) -> bool {
        self.binary_uniform
    }

    #[inline]
    fn word_mask(&self, w: usize) -> u64 {
        let rem = self.n - 64 * w;
        if rem >= 64 {
            u64::MAX
        } else {
            (1u64 << rem) - 1
        }
    }
}

impl CodebookAccess for LazyCodebook {
    type Node = u64;

    fn block_length(&self) -> usize {
        self.n
    }

    fn messages(&self) -> u32 {
        self.m
    }

    fn root(&self) -> u64 {
        self.root
    }

    #[inline]
    fn child(&self, node: &u64, g: u32) -> u64 {
        StreamKey(*node).child(g as u64).0
    }

    fn codeword(&self, node: &u64) -> Vec<usize> {
        let key = StreamKey(*node);
        if self.binary_uniform {
            (0..self.n).map(|j| ((key.word((j / 64) as u64) >> (j % 64)) & 1) as usize).collect()
        } else {
            let mut s = key.stream();
            (0..self.n).map(|_| sample_index(&self.probs, s.next_f64())).collect()
        }
    }

    #[inline]
    fn score(&self, node: &u64, obs: &BlockObs, table: &ScoreTable, scratch: &mut [u32]) -> f64 {
        if !self.binary_uniform {
            scratch.iter_mut().for_each(|c| *c = 0);
            let ny = table.output_size();
            let mut s = StreamKey(*node).stream();
            for &y in &obs.symbols {
                let x = sample_index(&self.probs, s.next_f64());
                scratch[x * ny + y] += 1;
            }
            return table.score_counts(scratch);
        }
        let ny = table.output_size();
        let key = StreamKey(*node);
        let words = obs.words;
        if !obs.lut.is_empty() {
            let c = key.word(0) & self.word_mask(0);
            let mut idx = 0;
            for y in 0..ny {
                idx += (c & obs.masks[y]).count_ones() as usize * obs.strides[y];
            }
            return obs.lut[idx];
        }
        if words == 1 && ny <= 4 {
            // single word, counts kept on the stack
            let c = key.word(0) & self.word_mask(0);
            let mut counts = [0u32; 8];
            for y in 0..ny {
                let ones = (c & obs.masks[y]).count_ones();
                counts[ny + y] = ones;
                counts[y] = obs.output_counts[y] - ones;
            }
            return table.score_counts(&counts[..2 * ny]);
        }
        scratch[ny..2 * ny].iter_mut().for_each(|c| *c = 0);
        for w in 0..words {
            let c = key.word(w as u64) & self.word_mask(w);
            for y in 0..ny {
                scratch[ny + y] += (c & obs.masks[y * words + w]).count_ones();
            }
        }
        for y in 0..ny {
            scratch[y] = obs.output_counts[y] - scratch[ny + y];
        }
        table.score_counts(&scratch[..2 * ny])
    }

    fn any_child_exceeds(
        &self,
        node: &u64,
        obs: &BlockObs,
        table: &ScoreTable,
        scratch: &mut [u32],
        partial: f64,
        thr: f64,
    ) -> bool {
        if !self.binary_uniform || obs.lut.is_empty() {
            return (0..self.m).any(|g| partial + self.score(&self.child(node, g), obs, table, scratch) > thr);
        }
        let scan = LeafScan { node: *node, m: self.m, mask: self.word_mask(0), obs, partial, thr };
        match table.output_size() {
            2 => scan.run::<2>(),
            3 => scan.run::<3>(),
            _ => scan.run::<4>(),
        }
    }
}

/// Batched test over all children of one node on a single-word binary block.
/// Keys, popcounts and table indices for a batch are computed in straight-line
/// loops so they vectorise; the comparison is the same as the scalar path.
struct LeafScan<'a> {
    node: u64,
    m: u32,
    mask: u64,
    obs: &'a BlockObs,
    partial: f64,
    thr: f64,
}

impl LeafScan<'_> {
    fn run<const NY: usize>(&self) -> bool {
        #[cfg(target_arch = "x86_64")]
        {
            if std::is_x86_feature_detected!("avx512f")
                && std::is_x86_feature_detected!("avx512dq")
                && std::is_x86_feature_detected!("avx512vpopcntdq")
            {
                // SAFETY: the required features were detected at run time.
                return unsafe { self.run_avx512::<NY>() };
            }
        }
        self.run_generic::<NY>()
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx512f,avx512dq,avx512vpopcntdq,avx512vl,avx512bw,avx2")]
    unsafe fn run_avx512<const NY: usize>(&self) -> bool {
        self.run_generic::<NY>()
    }

    #[inline(always)]
    fn run_generic<const NY: usize>(&self) -> bool {
        const CHUNK: usize = 64;
        let key = StreamKey(self.node);
        let mut masks = [0u64; NY];
        let mut strides = [0u64; NY];
        for y in 0..NY.min(self.obs.output_counts.len()) {
            masks[y] = self.obs.masks[y] & self.mask;
            strides[y] = self.obs.strides[y] as u64;
        }
        let mut idx = [0u64; CHUNK];
        let mut g0 = 0u32;
        while g0 < self.m {
            let len = CHUNK.min((self.m - g0) as usize);
            for (i, slot) in idx.iter_mut().enumerate() {
                let c = key.child((g0 as usize + i) as u64).word(0);
                let mut ix = 0u64;
                for y in 0..NY {
                    ix += (c & masks[y]).count_ones() as u64 * strides[y];
                }
                *slot = ix;
            }
            for &ix in &idx[..len] {
                if self.partial + self.obs.lut[ix as usize] > self.thr {
                    return true;
                }
            }
            g0 += len as u32;
        }
        false
    }
}

/// Explicit codebook over all prefixes up to a fixed depth.
#[derive(Debug, Clone, PartialEq)]
pub struct TableCodebook {
    n: usize,
    m: u32,
    depth: usize,
    map: HashMap<Vec<u32>, Vec<usize>>,
}

/// One table entry in the JSON format; prefixes are one-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub prefix: Vec<u32>,
    pub codeword: Vec<usize>,
}

impl TableCodebook {
    /// Validates completeness over every prefix of length `1..=depth`.
    pub fn from_entries(n: usize, m: u32, depth: usize, input_size: usize, entries: &[TableEntry]) -> Result<Self> {
        let mut map = HashMap::new();
        for e in entries {
            if e.prefix.is_empty() || e.prefix.len() > depth || e.prefix.iter().any(|&g| g == 0 || g > m) {
                return Err(Error::Precondition(format!("invalid table prefix {:?}", e.prefix)));
            }
            if e.codeword.len() != n || e.codeword.iter().any(|&x| x >= input_size) {
                return Err(Error::Precondition(format!("invalid codeword for prefix {:?}", e.prefix)));
            }
            let key: Vec<u32> = e.prefix.iter().map(|g| g - 1).collect();
            if map.insert(key, e.codeword.clone()).is_some() {
                return Err(Error::Precondition(format!("duplicate prefix {:?}", e.prefix)));
            }
        }
        let expected: u64 = (1..=depth).map(|k| (m as u64).pow(k as u32)).sum();
        if map.len() as u64 != expected {
            return Err(Error::Precondition(format!(
                "table has {} entries, a complete table of depth {depth} has {expected}",
                map.len()
            )));
        }
        Ok(TableCodebook { n, m, depth, map })
    }

    /// Materialises any codebook down to `depth`.
    pub fn materialize<C: CodebookAccess>(cb: &C, depth: usize) -> Self {
        let mut map = HashMap::new();
        let mut frontier = vec![(Vec::new(), cb.root())];
        for _ in 0..depth {
            let mut next = Vec::new();
            for (prefix, node) in &frontier {
                for g in 0..cb.messages() {
                    let child = cb.child(node, g);
                    let mut p: Vec<u32> = prefix.clone();
                    p.push(g);
                    map.insert(p.clone(), cb.codeword(&child));
                    next.push((p, child));
                }
            }
            frontier = next;
        }
        TableCodebook { n: cb.block_length(), m: cb.messages(), depth, map }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Entries sorted by prefix, one-based.
    pub fn entries(&self) -> Vec<TableEntry> {
        let mut keys: Vec<&Vec<u32>> = self.map.keys().collect();
        keys.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        keys.into_iter()
            .map(|k| TableEntry { prefix: k.iter().map(|g| g + 1).collect(), codeword: self.map[k].clone() })
            .collect()
    }

    pub fn lookup(&self, prefix: &[u32]) -> Option<&[usize]> {
        self.map.get(prefix).map(|v| v.as_slice())
    }
}

impl CodebookAccess for TableCodebook {
    type Node = Vec<u32>;

    fn block_length(&self) -> usize {
        self.n
    }

    fn messages(&self) -> u32 {
        self.m
    }

    fn root(&self) -> Vec<u32> {
        Vec::new()
    }

    fn child(&self, node: &Vec<u32>, g: u32) -> Vec<u32> {
        let mut p = node.clone();
        p.push(g);
        p
    }

    fn codeword(&self, node: &Vec<u32>) -> Vec<usize> {
        self.map.get(node).cloned().unwrap_or_else(|| panic!("prefix {node:?} beyond table depth {}", self.depth))
    }
}
