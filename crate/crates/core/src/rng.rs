//! Counter-based keyed random streams.
//!
//! Every random quantity in a simulation is a pure function of a 64-bit key
//! and a counter, so any codeword, message draw or channel realisation can be
//! regenerated on demand without carrying generator state around. Keys are
//! derived hierarchically (`master -> trial -> purpose`) with the SplitMix64
//! finalizer as the mixing function.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const CHILD: u64 = 0xD1B5_4A32_D192_ED03;

/// SplitMix64 output finalizer.
#[inline(always)]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Domain tags separating independent uses of one master seed.
pub mod domain {
    pub const CODEBOOK: u64 = 0x636F_6465_626F_6F6B;
    pub const TRIAL: u64 = 0x7472_6961_6C73_0001;
    pub const MESSAGES: u64 = 0x6D73_6773_0000_0002;
    pub const CHANNEL: u64 = 0x6368_616E_0000_0003;
    pub const SWEEP: u64 = 0x7377_6565_7000_0004;
    pub const SAMPLE: u64 = 0x7361_6D70_6C65_0005;
}

/// A 64-bit stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(pub u64);

impl StreamKey {
    pub fn new(seed: u64, domain: u64) -> Self {
        StreamKey(mix64(mix64(seed ^ domain).wrapping_add(GOLDEN)))
    }

    /// Key for the `index`-th child of this key.
    #[inline(always)]
    pub fn child(self, index: u64) -> Self {
        StreamKey(mix64(self.0 ^ index.wrapping_add(1).wrapping_mul(CHILD)))
    }

    /// The `counter`-th 64-bit word of this key's stream.
    #[inline(always)]
    pub fn word(self, counter: u64) -> u64 {
        mix64(self.0 ^ counter.wrapping_add(1).wrapping_mul(GOLDEN))
    }

    pub fn stream(self) -> Stream {
        Stream {
            key: self,
            counter: 0,
        }
    }
}

/// Sequential reader over a keyed stream.
#[derive(Debug, Clone)]
pub struct Stream {
    key: StreamKey,
    counter: u64,
}

impl Stream {
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let w = self.key.word(self.counter);
        self.counter += 1;
        w
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)` by multiply-high reduction.
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}

/// Inverse-CDF draw from a probability vector given a uniform `u`.
#[inline]
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    // rounding in the running sum
    last_positive
}
