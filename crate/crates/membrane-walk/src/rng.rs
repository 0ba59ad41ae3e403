//! Counter-based splittable random streams.
//!
//! Every logical stream is keyed by `(master seed, experiment, phase,
//! replicate, family)` and generates the SplitMix64 output sequence for the
//! mixed key. Streams are therefore
//!
//! * deterministic: the `i`-th draw of a stream is a pure function of the key
//!   and `i`, independent of thread scheduling,
//! * splittable: sibling streams (one per increment family of the coupled
//!   walk construction) are obtained by varying the family tag only.
//!
//! This is a statistical generator, not a cryptographic one.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Increment family of a walk replicate: one stream for the base increments,
/// one per membrane point, plus auxiliary lanes for statistics helpers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamFamily {
    /// Increments of the underlying standard walk.
    Base,
    /// Kick increments of the membrane point with the given index.
    Membrane(usize),
    /// Extra draws that are not walk increments (dither, bootstrap, ...).
    Aux(u64),
}

impl StreamFamily {
    fn tag(self) -> u64 {
        match self {
            StreamFamily::Base => 0,
            StreamFamily::Membrane(i) => 1 + i as u64,
            StreamFamily::Aux(k) => (1 << 32) + k,
        }
    }
}

/// Full key of one logical stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub experiment: u64,
    pub phase: u64,
    pub replicate: u64,
    pub family: StreamFamily,
}

/// SplitMix64 evaluated at `key + counter * GOLDEN`.
#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: StreamKey) -> Self {
        Self::from_words(&[
            key.seed,
            key.experiment,
            key.phase,
            key.replicate,
            key.family.tag(),
        ])
    }

    /// Chain-mix an arbitrary word tuple into a stream key.
    pub fn from_words(words: &[u64]) -> Self {
        let mut k = 0x243F_6A88_85A3_08D3u64; // arbitrary nonzero start
        for (i, &w) in words.iter().enumerate() {
            k = mix64(k ^ w.wrapping_add(GOLDEN.wrapping_mul(i as u64 + 1)));
        }
        CounterRng { key: k, counter: 0 }
    }

    /// Number of draws consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)));
        self.counter += 1;
        v
    }

    /// Uniform on `[0, 1)` with 53 significant bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`, safe as an inverse-transform argument.
    #[inline]
    pub fn next_open_closed(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exactly uniform integer in `[0, n)` (Lemire multiply-shift with
    /// rejection, so atoms such as `1/4` are hit with exact probability).
    #[inline]
    pub fn uniform_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let mut x = self.next_u64();
        let mut m = x as u128 * n as u128;
        let mut lo = m as u64;
        if lo < n {
            let threshold = n.wrapping_neg() % n;
            while lo < threshold {
                x = self.next_u64();
                m = x as u128 * n as u128;
                lo = m as u64;
            }
        }
        (m >> 64) as u64
    }
}
