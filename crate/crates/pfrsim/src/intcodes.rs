//! Prefix-free integer codes for transmitted indices, plus expected-size
//! accounting.
//!
//! The encoder communicates a positive integer `K` whose distribution
//! concentrates on small values; what matters downstream is the expected
//! codeword length as a function of `E[log₂ K]`. Two codecs are provided:
//!
//! * **Elias delta** — a universal code with length
//!   `⌊log₂k⌋ + 2⌊log₂(⌊log₂k⌋ + 1)⌋ + 1`, giving expected size at most
//!   `E + 2 log₂(E + 1) + 1` bits when `E = E[log₂ K]`.
//! * **Zipf–Shannon lengths** — Shannon-code lengths `⌈-log₂ p(k)⌉` for the
//!   power-law pmf `p(k) ∝ k^{-λ}` with `λ = 1 + 1/E`, giving expected size
//!   at most `E + log₂(E + 1) + 2` bits. Only the lengths are exposed; the
//!   arithmetic-coding realisation is out of scope because size accounting
//!   is all the experiments need.
//!
//! Bit order within a [`BitString`] is most-significant-first.

use crate::numeric::zeta;
use crate::{Error, Result};

/// An ordered sequence of bits, most-significant-first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    /// An empty bit string.
    pub fn new() -> Self {
        BitString { bits: Vec::new() }
    }

    /// Length in bits.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// True when no bits are present.
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Appends one bit.
    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// The bit at position `i` (0 = first transmitted, most significant).
    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// All bits in order.
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// True when `self` is a (strict or equal) prefix of `other`.
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len() <= other.len() && self.bits[..] == other.bits[..self.len()]
    }

    /// Renders the bits as a `0`/`1` string.
    pub fn to_binary_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl Default for BitString {
    fn default() -> Self {
        Self::new()
    }
}

/// Appends the `width` low bits of `value`, most-significant-first.
fn push_binary(out: &mut BitString, value: u64, width: u32) {
    for i in (0..width).rev() {
        out.push((value >> i) & 1 == 1);
    }
}

/// Elias delta codeword for `k ≥ 1`.
///
/// Layout: with `n = ⌊log₂ k⌋` and `l = ⌊log₂(n + 1)⌋`, emit `l` zeros, the
/// `l + 1`-bit binary of `n + 1`, then the low `n` bits of `k`.
pub fn elias_delta_encode(k: u64) -> Result<BitString> {
    if k == 0 {
        return Err(Error::invalid("Elias delta encodes positive integers"));
    }
    let n = 63 - k.leading_zeros(); // ⌊log₂ k⌋
    let np1 = (n + 1) as u64;
    let l = 63 - np1.leading_zeros(); // ⌊log₂(n+1)⌋
    let mut out = BitString::new();
    for _ in 0..l {
        out.push(false);
    }
    push_binary(&mut out, np1, l + 1);
    push_binary(&mut out, k, n);
    Ok(out)
}

/// Decodes a single Elias delta codeword occupying the whole bit string.
pub fn elias_delta_decode(bits: &BitString) -> Result<u64> {
    let mut pos = 0usize;
    let total = bits.len();
    let err = |msg: &str| Error::MalformedBits(msg.to_string());
    // Count leading zeros.
    let mut l = 0usize;
    while pos < total && !bits.bit(pos) {
        l += 1;
        pos += 1;
    }
    if pos >= total {
        return Err(err("ran out of bits reading the length-of-length unary"));
    }
    if l >= 64 {
        return Err(err("length-of-length unary exceeds 64 bits"));
    }
    // Read l + 1 bits of n + 1 (starting with the terminating 1).
    let mut np1: u64 = 0;
    for _ in 0..l + 1 {
        if pos >= total {
            return Err(err("ran out of bits reading the exponent"));
        }
        np1 = (np1 << 1) | u64::from(bits.bit(pos));
        pos += 1;
    }
    let n = np1 - 1;
    if n >= 64 {
        return Err(err("exponent exceeds 64 bits"));
    }
    // Read n low bits of k below the implicit leading 1.
    let mut k: u64 = 1;
    for _ in 0..n {
        if pos >= total {
            return Err(err("ran out of bits reading the mantissa"));
        }
        k = (k << 1) | u64::from(bits.bit(pos));
        pos += 1;
    }
    if pos != total {
        return Err(err("trailing bits after the codeword"));
    }
    Ok(k)
}

/// Elias delta codeword length in bits:
/// `⌊log₂k⌋ + 2⌊log₂(⌊log₂k⌋ + 1)⌋ + 1`.
pub fn elias_delta_len(k: u64) -> Result<usize> {
    if k == 0 {
        return Err(Error::invalid("Elias delta encodes positive integers"));
    }
    let n = (63 - k.leading_zeros()) as usize;
    let l = (63 - ((n + 1) as u64).leading_zeros()) as usize;
    Ok(n + 2 * l + 1)
}

/// Shannon-code length `⌈-log₂ p(k)⌉` bits under the Zipf pmf
/// `p(k) = k^{-λ} / ζ(λ)`, for `k ≥ 1` and `λ > 1`.
pub fn zipf_shannon_length(k: u64, lambda: f64) -> Result<u64> {
    if k == 0 {
        return Err(Error::invalid("Zipf lengths are defined for k >= 1"));
    }
    if !(lambda > 1.0) {
        return Err(Error::invalid(format!("need lambda > 1, got {lambda}")));
    }
    let z = zeta(lambda)?;
    let neg_log2_p = lambda * (k as f64).log2() + z.log2();
    Ok(neg_log2_p.ceil().max(0.0) as u64)
}

/// A Zipf–Shannon length calculator with the normaliser cached, for hot
/// loops that query many lengths under one exponent.
#[derive(Clone, Copy, Debug)]
pub struct ZipfCodec {
    lambda: f64,
    log2_zeta: f64,
}

impl ZipfCodec {
    /// Builds the codec for exponent `λ > 1`.
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 1.0) {
            return Err(Error::invalid(format!("need lambda > 1, got {lambda}")));
        }
        Ok(ZipfCodec {
            lambda,
            log2_zeta: zeta(lambda)?.log2(),
        })
    }

    /// The exponent.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Shannon-code length `⌈λ log₂ k + log₂ ζ(λ)⌉` for `k ≥ 1`.
    pub fn length(&self, k: u64) -> u64 {
        debug_assert!(k >= 1);
        (self.lambda * (k as f64).log2() + self.log2_zeta)
            .ceil()
            .max(0.0) as u64
    }
}

/// The length-minimising Zipf exponent `λ = 1 + 1/E` for a target mean
/// `E = E[log₂ K] > 0`.
pub fn choose_lambda(mean_log2_k: f64) -> Result<f64> {
    if !(mean_log2_k > 0.0) || !mean_log2_k.is_finite() {
        return Err(Error::invalid(format!(
            "need a positive finite mean log₂K, got {mean_log2_k}"
        )));
    }
    Ok(1.0 + 1.0 / mean_log2_k)
}

/// Expected-codeword-size bounds as a function of `E = E[log₂ K] ≥ 0`:
/// returns `(E + 2 log₂(E + 1) + 1, E + log₂(E + 1) + 2)` for the Elias
/// delta and Zipf–Shannon codecs respectively.
pub fn expected_size_bounds(mean_log2_k: f64) -> (f64, f64) {
    assert!(mean_log2_k >= 0.0, "mean log₂K must be non-negative");
    let e = mean_log2_k;
    let log_term = (e + 1.0).log2();
    (e + 2.0 * log_term + 1.0, e + log_term + 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn smallest_codeword_is_single_one() {
        let c = elias_delta_encode(1).unwrap();
        assert_eq!(c.to_binary_string(), "1");
        assert_eq!(elias_delta_len(1).unwrap(), 1);
    }

    #[test]
    fn codeword_for_ten() {
        let c = elias_delta_encode(10).unwrap();
        assert_eq!(c.to_binary_string(), "00100010");
        assert_eq!(elias_delta_len(10).unwrap(), 8);
    }

    #[test]
    fn first_few_codewords_match_reference_table() {
        // Independently derived reference table for k = 1..8.
        let expect = [
            (1u64, "1"),
            (2, "0100"),
            (3, "0101"),
            (4, "01100"),
            (5, "01101"),
            (6, "01110"),
            (7, "01111"),
            (8, "00100000"),
        ];
        for (k, s) in expect {
            assert_eq!(elias_delta_encode(k).unwrap().to_binary_string(), s, "k={k}");
        }
    }

    #[test]
    fn length_formula_matches_codeword_length() {
        for k in 1..5000u64 {
            assert_eq!(
                elias_delta_encode(k).unwrap().len(),
                elias_delta_len(k).unwrap(),
                "k={k}"
            );
        }
    }

    #[test]
    fn roundtrip_over_a_wide_range() {
        for k in (1..100_000u64).step_by(7) {
            let c = elias_delta_encode(k).unwrap();
            assert_eq!(elias_delta_decode(&c).unwrap(), k);
        }
        for k in [1u64, 2, u32::MAX as u64, u64::MAX / 2, u64::MAX] {
            let c = elias_delta_encode(k).unwrap();
            assert_eq!(elias_delta_decode(&c).unwrap(), k);
        }
    }

    #[test]
    fn decode_rejects_malformed_inputs() {
        assert!(elias_delta_decode(&BitString::new()).is_err());
        let mut zeros = BitString::new();
        zeros.push(false);
        zeros.push(false);
        assert!(elias_delta_decode(&zeros).is_err());
        // Valid codeword with a trailing bit.
        let mut c = elias_delta_encode(5).unwrap();
        c.push(true);
        assert!(elias_delta_decode(&c).is_err());
    }

    #[test]
    fn encode_rejects_zero() {
        assert!(elias_delta_encode(0).is_err());
        assert!(elias_delta_len(0).is_err());
        assert!(zipf_shannon_length(0, 2.0).is_err());
    }

    #[test]
    fn elias_prefix_free_exhaustive() {
        let codes: Vec<BitString> = (1..=(1u64 << 12))
            .map(|k| elias_delta_encode(k).unwrap())
            .collect();
        // Group by length to keep the pairwise check quadratic-but-fast.
        for (i, a) in codes.iter().enumerate() {
            for (j, b) in codes.iter().enumerate() {
                if i != j && a.len() <= b.len() && a.is_prefix_of(b) {
                    panic!("codeword {} is a prefix of {}", i + 1, j + 1);
                }
            }
        }
    }

    #[test]
    fn kraft_sums_at_most_one() {
        let mut elias_sum = 0.0f64;
        for k in 1..=(1u64 << 16) {
            elias_sum += (2.0f64).powi(-(elias_delta_len(k).unwrap() as i32));
        }
        assert!(elias_sum <= 1.0 + 1e-12, "Elias Kraft sum {elias_sum}");

        for lambda in [1.5f64, 2.0, 3.0] {
            let mut zipf_sum = 0.0f64;
            for k in 1..=(1u64 << 16) {
                zipf_sum += (2.0f64).powi(-(zipf_shannon_length(k, lambda).unwrap() as i32));
            }
            assert!(zipf_sum <= 1.0 + 1e-12, "Zipf Kraft sum {zipf_sum}");
        }
    }

    #[test]
    fn lambda_from_mean_one_is_two() {
        assert_abs_diff_eq!(choose_lambda(1.0).unwrap(), 2.0, epsilon = 1e-15);
        assert!(choose_lambda(0.0).is_err());
        assert!(choose_lambda(-1.0).is_err());
    }

    #[test]
    fn zipf_length_of_one_is_log_zeta() {
        for lambda in [1.5f64, 2.0, 4.0] {
            let z = zeta(lambda).unwrap();
            let expect = z.log2().ceil().max(0.0) as u64;
            assert_eq!(zipf_shannon_length(1, lambda).unwrap(), expect);
        }
        // λ = 2: ζ = π²/6 ≈ 1.645, so one bit.
        assert_eq!(zipf_shannon_length(1, 2.0).unwrap(), 1);
    }

    #[test]
    fn zipf_expected_length_respects_bound() {
        // For any pmf of K with mean log₂K equal to E, coding with
        // λ = 1 + 1/E keeps the expected length within E + log₂(E+1) + 2.
        // Checked on geometric-like empirical laws.
        for &(p_geo, cap) in &[(0.5f64, 64u64), (0.25, 256), (0.75, 32)] {
            // Truncated geometric pmf over 1..=cap.
            let mut probs: Vec<f64> = (1..=cap)
                .map(|k| (1.0 - p_geo) * p_geo.powi(k as i32 - 1))
                .collect();
            let total: f64 = probs.iter().sum();
            for p in &mut probs {
                *p /= total;
            }
            let e_log2: f64 = probs
                .iter()
                .enumerate()
                .map(|(i, p)| p * ((i + 1) as f64).log2())
                .sum();
            if e_log2 <= 0.0 {
                continue;
            }
            let lambda = choose_lambda(e_log2).unwrap();
            let mean_len: f64 = probs
                .iter()
                .enumerate()
                .map(|(i, p)| p * zipf_shannon_length(i as u64 + 1, lambda).unwrap() as f64)
                .sum();
            let (_, zipf_bound) = expected_size_bounds(e_log2);
            assert!(
                mean_len <= zipf_bound + 1e-9,
                "mean {mean_len} vs bound {zipf_bound} (E={e_log2})"
            );
        }
    }

    #[test]
    fn elias_expected_length_respects_bound() {
        // Same empirical laws, Elias delta codec against E + 2log₂(E+1) + 1.
        let p_geo = 0.5f64;
        let cap = 64u64;
        let mut probs: Vec<f64> = (1..=cap)
            .map(|k| (1.0 - p_geo) * p_geo.powi(k as i32 - 1))
            .collect();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        let e_log2: f64 = probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * ((i + 1) as f64).log2())
            .sum();
        let mean_len: f64 = probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * elias_delta_len(i as u64 + 1).unwrap() as f64)
            .sum();
        let (elias_bound, _) = expected_size_bounds(e_log2);
        assert!(mean_len <= elias_bound + 1e-9, "mean {mean_len} vs {elias_bound}");
    }

    #[test]
    fn cached_codec_matches_direct_lengths() {
        let codec = ZipfCodec::new(1.75).unwrap();
        for k in 1..2000u64 {
            assert_eq!(codec.length(k), zipf_shannon_length(k, 1.75).unwrap());
        }
        assert!(ZipfCodec::new(1.0).is_err());
    }

    #[test]
    fn size_bound_values() {
        let (e0, z0) = expected_size_bounds(0.0);
        assert_abs_diff_eq!(e0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z0, 2.0, epsilon = 1e-12);
        // E = 3: 3 + 2*log₂4 + 1 = 8 and 3 + log₂4 + 2 = 7.
        let (e3, z3) = expected_size_bounds(3.0);
        assert_abs_diff_eq!(e3, 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z3, 7.0, epsilon = 1e-12);
    }

    #[test]
    fn size_bounds_are_monotone() {
        let mut prev = expected_size_bounds(0.0);
        for i in 1..100 {
            let cur = expected_size_bounds(i as f64 * 0.25);
            assert!(cur.0 > prev.0 && cur.1 > prev.1);
            prev = cur;
        }
    }
}
