//! Small deterministic pseudo-random generator for randomized checks.
//!
//! Validation and the seeded property suites need reproducible randomness
//! that works identically on every platform, so we use SplitMix64 rather
//! than pulling in an RNG crate.

/// SplitMix64 generator. Deterministic for a fixed seed.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..bound` (`bound > 0`).
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }

    /// Small signed integer in `-range..=range`.
    pub fn small_int(&mut self, range: i64) -> i64 {
        let span = (2 * range + 1) as u64;
        self.below(span) as i64 - range
    }

    /// Small nonzero signed integer in `-range..=range`.
    pub fn small_nonzero(&mut self, range: i64) -> i64 {
        loop {
            let v = self.small_int(range);
            if v != 0 {
                return v;
            }
        }
    }
}
