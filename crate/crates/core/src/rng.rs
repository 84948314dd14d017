//! Seeded randomness.
//!
//! Everything stochastic in this crate (synthetic data, sensing noise, DP
//! mechanisms, Monte-Carlo sweeps) draws from [`SplitMix64`], a 64-bit
//! splittable generator with a fixed, documented update rule. Using a
//! hand-pinned algorithm instead of an external RNG crate keeps every seeded
//! result bit-reproducible across builds and library versions.

/// SplitMix64 generator (Steele, Lea & Flood; the same constants used by
/// `java.util.SplittableRandom`).
///
/// State update: `s += 0x9E3779B97F4A7C15`; output is the finalized mix of
/// the new state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Derive an independent stream for a sub-task. The salt is mixed through
    /// the same finalizer so nearby (seed, salt) pairs decorrelate.
    pub fn derive(seed: u64, salt: u64) -> Self {
        let mut root = SplitMix64::new(seed ^ salt.wrapping_mul(0xBF58_476D_1CE4_E5B9));
        let s = root.next_u64();
        SplitMix64::new(s)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in the open interval (0, 1): 53-bit mantissa offset by
    /// half an ulp so 0.0 and 1.0 are never returned. Open endpoints keep the
    /// inverse-CDF samplers below away from their poles.
    pub fn next_open01(&mut self) -> f64 {
        (((self.next_u64() >> 11) as f64) + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform draw in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform draw in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, bound) by widening multiply (Lemire); the tiny
    /// modulo bias at 64 bits is far below anything observable here.
    pub fn next_below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        let wide = (self.next_u64() as u128) * (bound as u128);
        (wide >> 64) as usize
    }

    /// Fair coin.
    pub fn next_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Standard Laplace draw (location 0, scale 1) by inverse CDF.
    pub fn laplace(&mut self) -> f64 {
        let u = self.next_open01() - 0.5;
        -u.signum() * (1.0 - 2.0 * u.abs()).ln()
    }

    /// Standard Cauchy draw by inverse CDF: tan(pi * (U - 1/2)).
    pub fn cauchy(&mut self) -> f64 {
        (std::f64::consts::PI * (self.next_open01() - 0.5)).tan()
    }

    /// Sample `k` distinct indices from 0..n (partial Fisher-Yates), returned
    /// in shuffled order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        debug_assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.next_below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}
