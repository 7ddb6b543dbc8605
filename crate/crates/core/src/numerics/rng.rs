//! SplitMix64 pseudo-random generator.
//!
//! Chosen for cross-implementation reproducibility: the whole state is one
//! `u64` and the update is three xor-shift-multiply rounds, so any other
//! implementation seeded identically produces the identical stream. The
//! derived draws below (`next_f64`, `uniform_usize`, `exponential`) each
//! consume exactly one `next_u64`, which keeps stream accounting trivial for
//! re-implementation oracles.

/// Deterministic seeded generator. Single-owner: advance it sequentially,
/// never share one instance across threads.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    /// Derive an independent child seed from a base seed and an index.
    /// Used so parallel schedules over indexed work items stay reproducible.
    pub fn child_seed(base: u64, index: u64) -> u64 {
        let mut rng = Rng::new(base ^ index.wrapping_mul(0xA076_1D64_78BD_642F));
        rng.next_u64()
    }

    /// Next 64 uniform bits (Vigna's SplitMix64).
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits of precision. One `next_u64`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n). One `next_u64` via the widening-multiply
    /// map `(x * n) >> 64`; the O(n/2^64) bias is irrelevant here.
    pub fn uniform_usize(&mut self, n: usize) -> usize {
        assert!(n > 0, "uniform_usize needs a nonempty range");
        (((self.next_u64() as u128) * (n as u128)) >> 64) as usize
    }

    /// Uniform in [lo, hi). One `next_u64`.
    pub fn uniform_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Exponential with the given mean, by inversion. One `next_u64`.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        if mean == 0.0 {
            return 0.0;
        }
        // 1 - u is in (0, 1], so ln is finite.
        -mean * (1.0 - self.next_f64()).ln()
    }

    /// Fisher-Yates shuffle; consumes len-1 draws for len >= 2.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.uniform_usize(i + 1);
            items.swap(i, j);
        }
    }
}
