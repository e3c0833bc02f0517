//! Deterministic, splittable, jumpable pseudorandom streams.
//!
//! Encoder and decoder reconstruct identical codebooks from a shared seed, so
//! the stream must support three things:
//!
//! 1. **Determinism** — equal `(seed, substream_id)` gives byte-identical
//!    draw sequences on every platform (the generator core is fixed-width
//!    integer arithmetic only).
//! 2. **Splitting** — distinct `substream_id`s give statistically
//!    independent streams from the same seed.
//! 3. **Jumping** — [`SeededStream::jump_to`]`(k)` repositions the stream so
//!    that the next draw equals draw `k` (0-indexed) of a fresh stream, in
//!    O(1) time, so a decoder can recover the `k`-th codebook entry without
//!    generating the first `k - 1`.
//!
//! # Draw accounting
//!
//! The unit of the draw counter is one `u64` output of the generator. Every
//! sampler documents its *stride* — the number of draws it consumes:
//!
//! | sampler | draws |
//! |---|---|
//! | [`SeededStream::draw_u64`], [`SeededStream::draw_unit`], [`SeededStream::draw_exp`] | 1 |
//! | [`SeededStream::draw_gaussian`] | 2 |
//! | [`SeededStream::draw_gaussian_vec`] (dim d) | 2d |
//! | [`SeededStream::draw_sphere_uniform`] (dim d) | 2d |
//!
//! Rejection samplers ([`SeededStream::draw_gamma`],
//! [`SeededStream::draw_gamma_trunc01`]) consume a random number of draws and
//! therefore must only be used on *local* streams where no jump contract is
//! needed; this is asserted nowhere but documented here and at the samplers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scale factor mapping the top 53 bits of a `u64` to `[0, 1)`.
const U53_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

/// A reproducible, jumpable pseudorandom stream.
///
/// Streams are value-like: cloning yields an independent cursor over the same
/// underlying sequence. A single stream must not be shared mutably across
/// threads; give each parallel task its own substream instead.
#[derive(Clone, Debug)]
pub struct SeededStream {
    rng: ChaCha8Rng,
    seed: u64,
    substream_id: u64,
}

impl SeededStream {
    /// Creates the stream identified by `(seed, substream_id)`, positioned at
    /// draw 0.
    pub fn new(seed: u64, substream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(substream_id);
        SeededStream {
            rng,
            seed,
            substream_id,
        }
    }

    /// The seed this stream was created with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The substream label this stream was created with.
    pub fn substream_id(&self) -> u64 {
        self.substream_id
    }

    /// A fresh stream with the same seed but a different substream label,
    /// positioned at draw 0.
    pub fn substream(&self, substream_id: u64) -> Self {
        SeededStream::new(self.seed, substream_id)
    }

    /// Current draw index: the number of `u64` draws consumed so far.
    pub fn position(&self) -> u64 {
        // The generator counts 32-bit words; one draw is two words.
        (self.rng.get_word_pos() / 2) as u64
    }

    /// Repositions the stream so the next draw is draw `k` (0-indexed) of a
    /// fresh stream. O(1) regardless of `k`.
    pub fn jump_to(&mut self, k: u64) {
        self.rng.set_word_pos(2 * k as u128);
    }

    /// A clone of this stream repositioned at draw `k`.
    pub fn clone_at(&self, k: u64) -> Self {
        let mut s = self.clone();
        s.jump_to(k);
        s
    }

    /// One raw generator output. Stride 1.
    pub fn draw_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in `[0, 1)` with 53 random bits. Stride 1.
    pub fn draw_unit(&mut self) -> f64 {
        (self.draw_u64() >> 11) as f64 * U53_SCALE
    }

    /// Uniform draw in `(0, 1]` (shifted by half an ulp of the 53-bit grid so
    /// that `ln` is always finite). Stride 1.
    pub fn draw_unit_open_zero(&mut self) -> f64 {
        ((self.draw_u64() >> 11) + 1) as f64 * U53_SCALE
    }

    /// Exp(1) draw via inverse CDF `-ln U` with `U ∈ (0, 1]`. Stride 1.
    pub fn draw_exp(&mut self) -> f64 {
        -self.draw_unit_open_zero().ln()
    }

    /// Standard normal draw via the Box–Muller cosine branch:
    /// `sqrt(-2 ln U1) cos(2π U2)`. Stride 2 (fixed; the sine branch is
    /// discarded so vector jumps stay aligned).
    pub fn draw_standard_normal(&mut self) -> f64 {
        let u1 = self.draw_unit_open_zero();
        let u2 = self.draw_unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Normal draw with the given mean and variance. Stride 2.
    pub fn draw_gaussian(&mut self, mean: f64, var: f64) -> f64 {
        assert!(var >= 0.0, "variance must be non-negative");
        mean + var.sqrt() * self.draw_standard_normal()
    }

    /// Isotropic normal vector with per-coordinate variance `var` around
    /// `mean`. Stride `2 * dim`.
    pub fn draw_gaussian_vec(&mut self, mean: &[f64], var: f64) -> Vec<f64> {
        assert!(!mean.is_empty(), "dimension must be positive");
        mean.iter().map(|&m| self.draw_gaussian(m, var)).collect()
    }

    /// Uniform draw from the unit sphere in `dim` dimensions (normalised
    /// isotropic Gaussian). Stride `2 * dim`.
    ///
    /// In the measure-zero event that all Gaussian coordinates are exactly
    /// zero, returns the first standard basis vector so the stride stays
    /// fixed.
    pub fn draw_sphere_uniform(&mut self, dim: usize) -> Vec<f64> {
        assert!(dim > 0, "dimension must be positive");
        let mut v: Vec<f64> = (0..dim).map(|_| self.draw_standard_normal()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            let mut e = vec![0.0; dim];
            e[0] = 1.0;
            return e;
        }
        for x in &mut v {
            *x /= norm;
        }
        v
    }

    /// Gamma(shape, 1) draw for `shape ∈ (0, 1)` using a rejection sampler.
    ///
    /// Consumes a variable number of draws — local streams only.
    pub fn draw_gamma(&mut self, shape: f64) -> f64 {
        assert!(
            shape > 0.0 && shape < 1.0,
            "shape must lie in (0, 1), got {shape}"
        );
        // Rejection scheme for sub-unit shape: with probability p ∝ e the
        // candidate comes from the polynomial piece x = p^{1/shape} on (0,1],
        // accepted with probability e^{-x}; otherwise from the exponential
        // tail x = -ln((b - p)/shape) on (1,∞), accepted with probability
        // x^{shape-1}.
        let b = (shape + std::f64::consts::E) / std::f64::consts::E;
        loop {
            let p = b * self.draw_unit();
            if p <= 1.0 {
                let x = p.powf(1.0 / shape);
                if self.draw_unit_open_zero() <= (-x).exp() {
                    return x;
                }
            } else {
                let x = -((b - p) / shape).ln();
                if x > 0.0 && self.draw_unit_open_zero() <= x.powf(shape - 1.0) {
                    return x;
                }
            }
        }
    }

    /// Gamma(shape, 1) draw conditioned on the interval `(0, 1]`, for
    /// `shape ∈ (0, 1)`: repeatedly draws Gamma(shape, 1) until the value is
    /// at most 1. The result has CDF `γ(shape, v) / γ(shape, 1)` on `[0, 1]`.
    ///
    /// Consumes a variable number of draws — local streams only. The
    /// per-attempt acceptance probability of the outer truncation loop is
    /// `γ(shape, 1) / Γ(shape)`.
    pub fn draw_gamma_trunc01(&mut self, shape: f64) -> f64 {
        loop {
            let v = self.draw_gamma(shape);
            if v <= 1.0 {
                return v;
            }
        }
    }
}
