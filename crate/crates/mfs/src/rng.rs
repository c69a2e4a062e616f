//! Deterministic pseudo-random numbers for instance synthesis and random starts.
//!
//! Everything that consumes randomness in this crate draws from [`SplitMix64`],
//! the counter-based 64-bit generator of Steele, Lea and Flood (the update is a
//! fixed-increment counter whose value is hashed by a finalizer, so output `i`
//! is a pure function of `seed + i*GAMMA`). Counter-based generation keeps runs
//! bit-reproducible across platforms and lets us carve independent streams out
//! of one root seed.
//!
//! Stream splitting: [`substream_seed`] hashes `(seed, stream)` into a fresh
//! seed, so `SplitMix64::substream(seed, k)` yields statistically independent
//! generators for distinct `k`. The crate reserves stream ids in
//! [`streams`]: instance data is drawn from `streams::INSTANCE`, random start
//! points from `streams::START` (further split per start index).
//!
//! Derived distributions:
//! - uniforms are taken from the top 53 bits, offset to the open interval
//!   `(0, 1)` so that `ln(u)` is always finite and strict inequalities against
//!   0 and 1 hold surely;
//! - Gaussians use the Box-Muller transform `sqrt(-2 ln u1) * cos(2*pi*u2)`
//!   with no partner caching, so each draw consumes exactly two uniforms.

/// Weyl-sequence increment used by SplitMix64 (the "golden gamma").
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Reserved stream identifiers for [`substream_seed`].
pub mod streams {
    /// Stream feeding instance-data draws (matrices, planted point, offsets).
    pub const INSTANCE: u64 = 1;
    /// Stream feeding random start points.
    pub const START: u64 = 2;
}

/// Stafford "variant 13" finalizer, the output hash of SplitMix64.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of substream `stream` of the generator rooted at `seed`.
///
/// Distinct `(seed, stream)` pairs map to well-separated seeds; composing the
/// function (`substream_seed(substream_seed(a, b), c)`) nests streams.
#[inline]
pub fn substream_seed(seed: u64, stream: u64) -> u64 {
    mix64(seed ^ mix64(stream.wrapping_add(GOLDEN_GAMMA)))
}

/// SplitMix64 generator state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Generator rooted at `seed`.
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Generator for substream `stream` of root `seed` (see [`substream_seed`]).
    pub fn substream(seed: u64, stream: u64) -> Self {
        Self::new(substream_seed(seed, stream))
    }

    /// Next raw 64-bit output.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw from the open interval `(0, 1)`.
    ///
    /// Uses the top 53 bits offset by half an ulp: `(k + 0.5) * 2^-53` with
    /// `k` in `[0, 2^53)`, hence the endpoints are never produced.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64 + 0.5) * SCALE
    }

    /// Standard normal draw via the Box-Muller transform (two uniforms per draw).
    #[inline]
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Uniform index in `[0, bound)`.
    ///
    /// Plain modulo reduction: the bias is at most `bound / 2^64`, irrelevant
    /// for the index ranges used here, and the draw count stays fixed (one
    /// `u64` per index), which keeps streams reproducible.
    #[inline]
    pub fn next_index(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "next_index: empty range");
        (self.next_u64() % bound as u64) as usize
    }
}
