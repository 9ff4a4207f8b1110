//! Portable, fully specified PRNG used for every random decision in the
//! pipeline.
//!
//! Sampling, shuffling, parameter initialization and permutation tests all
//! draw from xoshiro256** seeded through splitmix64. Both algorithms are
//! published with reference implementations (Blackman & Vigna), so a
//! reimplementation in any language can reproduce the exact streams:
//!
//! * seeding: four rounds of splitmix64 over the 64-bit seed give the
//!   initial state `s[0..4]`;
//! * output: `rotl(s[1] * 5, 7) * 9`, followed by the xoshiro256 state
//!   transition.
//!
//! Substreams for parallel or structured work are derived with
//! [`Rng::substream`], which mixes a label into the seed via splitmix64
//! instead of jumping, so replicate `i` of a permutation test has the same
//! stream no matter which worker thread runs it.

/// One splitmix64 step: advances `state` and returns the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xoshiro256** generator.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    /// Seed via splitmix64, the scheme recommended by the algorithm authors.
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng { s }
    }

    /// Derive an independent stream for a labelled sub-task.
    ///
    /// The label is folded into the parent seed with splitmix64 so that
    /// `substream(a) == substream(a)` and distinct labels give uncorrelated
    /// streams regardless of draw order on the parent.
    pub fn substream(seed: u64, label: u64) -> Self {
        let mut sm = seed ^ 0xA076_1D64_78BD_642F_u64.wrapping_mul(label | 1);
        let mixed = splitmix64(&mut sm).wrapping_add(label);
        Rng::from_seed(mixed)
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform integer in `0..bound` by rejection, bias-free.
    ///
    /// Fixed algorithm (masked rejection) so streams are identical across
    /// platforms and compiler versions.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below(0)");
        if bound == 1 {
            return 0;
        }
        let mask = u64::MAX >> (bound - 1).leading_zeros();
        loop {
            let v = self.next_u64() & mask;
            if v < bound {
                return v;
            }
        }
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Fisher-Yates shuffle with the fixed index order `n-1 .. 1`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// A random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }
}
