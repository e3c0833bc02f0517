//! Discrete exponential functional representation.
//!
//! Attach an i.i.d. Exp(1) mark `Z_u` to every symbol of a finite alphabet.
//! For a pmf `p`, the selected symbol is `argmin_u Z_u / p(u)`; over fresh
//! mark processes the selection is distributed exactly as `p`. Because the
//! marks are shared, two parties using *different* pmfs over the same marks
//! select the same symbol with high probability when the pmfs are close —
//! the quantitative form is [`pml_bound`] — which is the engine behind every
//! decode-what-the-encoder-selected construction in this crate.
//!
//! [`refine`] converts a prior joint pmf over `V × U` into a posterior-like
//! table using the ranks of the marks: the result of observing "how
//! plausible each `u` is" without committing to a unique decode. Soft
//! decisions of this kind compose across network hops.

use crate::numeric::harmonic;
use crate::rng::SeededStream;
use crate::{Error, Result};
use rayon::prelude::*;

/// A probability mass function over the dense alphabet `0..len`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Validating constructor: entries must be non-negative, finite, and sum
    /// to 1 within 1e-9 (the tolerance absorbs accumulation error on large
    /// alphabets).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("pmf over an empty alphabet"));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::invalid("pmf entries must be finite and >= 0"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("pmf sums to {sum}, expected 1")));
        }
        Ok(Pmf { probs })
    }

    /// Builds a pmf by normalising non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("empty weight vector"));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::invalid("weights must be finite and >= 0"));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::invalid("weights sum to zero"));
        }
        Ok(Pmf {
            probs: weights.iter().map(|w| w / sum).collect(),
        })
    }

    /// Uniform pmf over `n` symbols.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        Pmf {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Point mass at `at` over `n` symbols.
    pub fn delta(n: usize, at: usize) -> Self {
        assert!(at < n);
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Pmf { probs }
    }

    /// Alphabet size.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    /// True when the alphabet is empty (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of symbol `u`.
    pub fn prob(&self, u: usize) -> f64 {
        self.probs[u]
    }

    /// Log-probability of symbol `u`; `-inf` for zero mass.
    pub fn ln_prob(&self, u: usize) -> f64 {
        self.probs[u].ln()
    }

    /// The raw probability vector.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Inverse-CDF sample. Consumes exactly one draw.
    pub fn sample(&self, stream: &mut SeededStream) -> usize {
        let u = stream.draw_unit();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // Guard against accumulated rounding: return the last symbol with
        // positive mass.
        self.probs
            .iter()
            .rposition(|&p| p > 0.0)
            .expect("pmf has positive mass")
    }
}

/// A joint pmf over the product alphabet `V × U`, stored densely row-major
/// (`v` major).
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf {
    nv: usize,
    nu: usize,
    table: Vec<f64>,
}

impl JointPmf {
    /// Validating constructor; `table` is row-major with `nv * nu` entries
    /// summing to 1 within 1e-9.
    pub fn new(nv: usize, nu: usize, table: Vec<f64>) -> Result<Self> {
        if nv == 0 || nu == 0 {
            return Err(Error::invalid("joint pmf with an empty axis"));
        }
        if table.len() != nv * nu {
            return Err(Error::invalid("joint pmf table has wrong size"));
        }
        if table.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::invalid("joint entries must be finite and >= 0"));
        }
        let sum: f64 = table.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("joint pmf sums to {sum}")));
        }
        Ok(JointPmf { nv, nu, table })
    }

    /// Number of `V` symbols.
    pub fn nv(&self) -> usize {
        self.nv
    }

    /// Number of `U` symbols.
    pub fn nu(&self) -> usize {
        self.nu
    }

    /// Joint probability of `(v, u)`.
    pub fn prob(&self, v: usize, u: usize) -> f64 {
        self.table[v * self.nu + u]
    }

    /// Marginal probability of `v`.
    pub fn marginal_v(&self, v: usize) -> f64 {
        self.table[v * self.nu..(v + 1) * self.nu].iter().sum()
    }

    /// The `v`-th row (unnormalised slice of the joint).
    pub fn row(&self, v: usize) -> &[f64] {
        &self.table[v * self.nu..(v + 1) * self.nu]
    }
}

/// One Exp(1) mark per symbol of a finite alphabet — the shared codebook of
/// the discrete representation.
#[derive(Clone, Debug)]
pub struct ExpProcess {
    marks: Vec<f64>,
}

impl ExpProcess {
    /// Generates `n` i.i.d. Exp(1) marks from the stream (consuming exactly
    /// `n` draws). The measure-zero event of an exactly-zero draw is clamped
    /// to the smallest positive double so all marks are strictly positive.
    pub fn generate(n: usize, stream: &mut SeededStream) -> Self {
        assert!(n > 0, "alphabet must be non-empty");
        let marks = (0..n)
            .map(|_| {
                let z = stream.draw_exp();
                if z > 0.0 {
                    z
                } else {
                    f64::MIN_POSITIVE
                }
            })
            .collect();
        ExpProcess { marks }
    }

    /// Wraps explicit marks; all must be strictly positive and finite.
    pub fn from_marks(marks: Vec<f64>) -> Result<Self> {
        if marks.is_empty() {
            return Err(Error::invalid("empty mark vector"));
        }
        if marks.iter().any(|&z| !z.is_finite() || z <= 0.0) {
            return Err(Error::invalid("marks must be finite and > 0"));
        }
        Ok(ExpProcess { marks })
    }

    /// Alphabet size.
    pub fn len(&self) -> usize {
        self.marks.len()
    }

    /// True when there are no marks (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    /// The mark vector.
    pub fn marks(&self) -> &[f64] {
        &self.marks
    }
}

/// Selection ratio `Z_u / p(u)`, with `1/0 = +inf`.
#[inline]
fn ratio(z: f64, p: f64) -> f64 {
    if p > 0.0 {
        z / p
    } else {
        f64::INFINITY
    }
}

/// The represented symbol: `argmin_u Z_u / p(u)`.
///
/// Over fresh mark processes the output is distributed exactly as `p`.
/// Floating-point ties are broken toward the smallest symbol index.
pub fn efr_argmin(proc: &ExpProcess, p: &Pmf) -> Result<usize> {
    if p.len() != proc.len() {
        return Err(Error::invalid(format!(
            "pmf over {} symbols against {} marks",
            p.len(),
            proc.len()
        )));
    }
    let mut best = f64::INFINITY;
    let mut arg = None;
    for u in 0..p.len() {
        let r = ratio(proc.marks[u], p.prob(u));
        if r < best {
            best = r;
            arg = Some(u);
        } else if arg.is_none() && p.prob(u) > 0.0 {
            // First positive-mass symbol with an infinite ratio tie.
            arg = Some(u);
        }
    }
    arg.ok_or_else(|| Error::invalid("pmf has no positive mass"))
}

/// 1-based rank of symbol `u` when the alphabet is sorted by ascending
/// `Z_u / p(u)`. Ties are broken by symbol index; zero-probability symbols
/// (infinite ratio) rank after all finite ratios.
pub fn efr_rank(proc: &ExpProcess, p: &Pmf, u: usize) -> usize {
    assert_eq!(p.len(), proc.len(), "alphabet mismatch");
    assert!(u < p.len(), "symbol out of range");
    let ru = ratio(proc.marks[u], p.prob(u));
    let mut rank = 1;
    for v in 0..p.len() {
        let rv = ratio(proc.marks[v], p.prob(v));
        if rv < ru || (rv == ru && v < u) {
            rank += 1;
        }
    }
    rank
}

/// The refinement of a joint pmf by a mark process: a table over `V × U`
/// whose `(v, u)` entry is `Q_V(v) / (rank_v(u) · H_{|U|})`, where
/// `rank_v(u)` ranks `u` by ascending `Z_u / Q_{U|V}(u|v)` within row `v` and
/// `H_n` is the exact harmonic sum.
///
/// Row `v` always sums to `Q_V(v)`, so the table remains a joint pmf. The
/// table depends on the marks only through their ranks, hence is invariant
/// under scaling all marks by a positive constant.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinedJoint {
    nv: usize,
    nu: usize,
    table: Vec<f64>,
}

impl RefinedJoint {
    /// Number of `V` symbols.
    pub fn nv(&self) -> usize {
        self.nv
    }

    /// Number of `U` symbols.
    pub fn nu(&self) -> usize {
        self.nu
    }

    /// Refined joint probability of `(v, u)`.
    pub fn prob(&self, v: usize, u: usize) -> f64 {
        self.table[v * self.nu + u]
    }

    /// Row sum, equal to the prior `Q_V(v)` by construction.
    pub fn row_sum(&self, v: usize) -> f64 {
        self.table[v * self.nu..(v + 1) * self.nu].iter().sum()
    }

    /// Consumes the refinement into a plain joint pmf.
    pub fn into_joint(self) -> JointPmf {
        JointPmf {
            nv: self.nv,
            nu: self.nu,
            table: self.table,
        }
    }
}

/// Computes the refinement of `q_joint` by `proc` (see [`RefinedJoint`]).
///
/// `proc` must carry one mark per `U` symbol.
pub fn refine(q_joint: &JointPmf, proc: &ExpProcess) -> Result<RefinedJoint> {
    let (nv, nu) = (q_joint.nv(), q_joint.nu());
    if proc.len() != nu {
        return Err(Error::invalid(format!(
            "process over {} marks against |U| = {nu}",
            proc.len()
        )));
    }
    let h = harmonic(nu);
    let mut table = vec![0.0; nv * nu];
    let mut order: Vec<usize> = (0..nu).collect();
    let mut ranks = vec![0usize; nu];
    for v in 0..nv {
        let qv = q_joint.marginal_v(v);
        if qv <= 0.0 {
            continue; // Row stays all-zero, matching Q_V(v) = 0.
        }
        let row = q_joint.row(v);
        // Rank by ascending Z_u / Q(u|v); the conditional's normaliser is
        // constant within the row so the joint entries rank identically.
        order.sort_by(|&a, &b| {
            let ra = ratio(proc.marks[a], row[a]);
            let rb = ratio(proc.marks[b], row[b]);
            ra.partial_cmp(&rb).unwrap().then(a.cmp(&b))
        });
        for (pos, &u) in order.iter().enumerate() {
            ranks[u] = pos + 1;
        }
        for u in 0..nu {
            table[v * nu + u] = qv / (ranks[u] as f64 * h);
        }
        // Restore identity order for the next row's sort.
        for (i, o) in order.iter_mut().enumerate() {
            *o = i;
        }
    }
    Ok(RefinedJoint { nv, nu, table })
}

/// Mismatch bound for two selections over shared marks:
/// `1 - (1 + ratio)^{-1}` where `ratio = p1(u)/p2(u)` at the selected symbol.
/// An infinite ratio yields 1.
pub fn pml_bound(ratio_p1_over_p2: f64) -> f64 {
    assert!(
        ratio_p1_over_p2 >= 0.0,
        "ratio must be non-negative, got {ratio_p1_over_p2}"
    );
    1.0 - 1.0 / (1.0 + ratio_p1_over_p2)
}

/// Monte-Carlo estimate of the probability that the representations of `p1`
/// and `p2` over shared marks disagree. Returns `(estimate, stderr)`.
///
/// Trial `t` uses substream `t` of `seed`, so results are reproducible and
/// trials are embarrassingly parallel.
pub fn estimate_mismatch(p1: &Pmf, p2: &Pmf, trials: u64, seed: u64) -> Result<(f64, f64)> {
    if p1.len() != p2.len() {
        return Err(Error::invalid("pmfs over different alphabets"));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let n = p1.len();
    let mismatches: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut stream = SeededStream::new(seed, t);
            let proc = ExpProcess::generate(n, &mut stream);
            let a = efr_argmin(&proc, p1).expect("validated pmf");
            let b = efr_argmin(&proc, p2).expect("validated pmf");
            u64::from(a != b)
        })
        .sum();
    let p_hat = mismatches as f64 / trials as f64;
    let stderr = (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
    Ok((p_hat, stderr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{chi_square_critical, chi_square_statistic};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn argmin_on_point_mass_ignores_marks() {
        let proc = ExpProcess::from_marks(vec![9.0, 0.001, 5.0]).unwrap();
        let p = Pmf::delta(3, 2);
        assert_eq!(efr_argmin(&proc, &p).unwrap(), 2);
    }

    #[test]
    fn argmin_uniform_is_plain_argmin_of_marks() {
        let proc = ExpProcess::from_marks(vec![0.2, 0.9]).unwrap();
        assert_eq!(efr_argmin(&proc, &Pmf::uniform(2)).unwrap(), 0);
    }

    #[test]
    fn argmin_weighs_marks_by_probability() {
        // ratios: 0.5/0.9 = 0.556, 0.04/0.1 = 0.400 -> symbol 1.
        let proc = ExpProcess::from_marks(vec![0.5, 0.04]).unwrap();
        let p = Pmf::new(vec![0.9, 0.1]).unwrap();
        assert_eq!(efr_argmin(&proc, &p).unwrap(), 1);
        assert_eq!(efr_rank(&proc, &p, 0), 2);
        assert_eq!(efr_rank(&proc, &p, 1), 1);
    }

    #[test]
    fn rank_of_argmin_is_one() {
        let mut stream = SeededStream::new(3, 0);
        let p = Pmf::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        for _ in 0..100 {
            let proc = ExpProcess::generate(4, &mut stream);
            let u = efr_argmin(&proc, &p).unwrap();
            assert_eq!(efr_rank(&proc, &p, u), 1);
        }
    }

    #[test]
    fn zero_probability_symbols_rank_last() {
        let proc = ExpProcess::from_marks(vec![0.1, 0.2, 0.3]).unwrap();
        let p = Pmf::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(efr_rank(&proc, &p, 1), 1);
        // Infinite-ratio ties break by index.
        assert_eq!(efr_rank(&proc, &p, 0), 2);
        assert_eq!(efr_rank(&proc, &p, 2), 3);
    }

    #[test]
    fn argmin_rejects_zero_pmf() {
        let proc = ExpProcess::from_marks(vec![1.0]).unwrap();
        let p = Pmf { probs: vec![0.0] };
        assert!(efr_argmin(&proc, &p).is_err());
    }

    #[test]
    fn selection_is_distributed_as_p() {
        // Chi-square goodness of fit over fresh processes at significance
        // 1e-3.
        let p = Pmf::new(vec![0.5, 0.25, 0.125, 0.125]).unwrap();
        let trials = 100_000u64;
        let mut counts = vec![0u64; 4];
        for t in 0..trials {
            let mut stream = SeededStream::new(555, t);
            let proc = ExpProcess::generate(4, &mut stream);
            counts[efr_argmin(&proc, &p).unwrap()] += 1;
        }
        let stat = chi_square_statistic(&counts, p.probs(), trials);
        let crit = chi_square_critical(1e-3, 3);
        assert!(stat < crit, "chi2 {stat} >= {crit}");
    }

    #[test]
    fn rank_bound_dominance() {
        // E[rank_q(U_p)] <= E[p/q(U_p)] + 1, Monte Carlo against the
        // exhaustive right-hand side.
        let p = Pmf::new(vec![0.6, 0.25, 0.1, 0.05]).unwrap();
        let q = Pmf::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let trials = 100_000u64;
        let mut ranks = Vec::with_capacity(trials as usize);
        for t in 0..trials {
            let mut stream = SeededStream::new(808, t);
            let proc = ExpProcess::generate(4, &mut stream);
            let u = efr_argmin(&proc, &p).unwrap();
            ranks.push(efr_rank(&proc, &q, u) as f64);
        }
        let (mean, se) = crate::numeric::mean_stderr(&ranks);
        let rhs: f64 = (0..4).map(|u| p.prob(u) * p.prob(u) / q.prob(u)).sum::<f64>() + 1.0;
        assert!(mean <= rhs + 3.0 * se, "mean rank {mean} vs bound {rhs}");
    }

    #[test]
    fn refine_uniform_two_symbols() {
        // Single v, uniform over two u: top-ranked gets 1/(1*1.5) = 2/3.
        let joint = JointPmf::new(1, 2, vec![0.5, 0.5]).unwrap();
        let proc = ExpProcess::from_marks(vec![0.4, 0.9]).unwrap();
        let r = refine(&joint, &proc).unwrap();
        assert_abs_diff_eq!(r.prob(0, 0), 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.prob(0, 1), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn refine_preserves_row_sums() {
        let joint = JointPmf::new(2, 3, vec![0.1, 0.2, 0.05, 0.3, 0.15, 0.2]).unwrap();
        let mut stream = SeededStream::new(17, 0);
        for _ in 0..50 {
            let proc = ExpProcess::generate(3, &mut stream);
            let r = refine(&joint, &proc).unwrap();
            for v in 0..2 {
                assert_abs_diff_eq!(r.row_sum(v), joint.marginal_v(v), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn refine_handles_zero_mass_rows() {
        let joint = JointPmf::new(2, 2, vec![0.0, 0.0, 0.6, 0.4]).unwrap();
        let proc = ExpProcess::from_marks(vec![1.0, 2.0]).unwrap();
        let r = refine(&joint, &proc).unwrap();
        assert_eq!(r.row_sum(0), 0.0);
        assert_abs_diff_eq!(r.row_sum(1), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn refinement_bound_dominance() {
        // E[1/Q'(v, U_p)] <= (ln|U| + 1)/Q_V(v) * (E[p/Q_{U|V}(U_p|v)] + 1)
        // where Q' is the refined joint. Monte Carlo against the exhaustive
        // right-hand side, at a fixed v.
        let joint = JointPmf::new(2, 4, vec![0.1, 0.15, 0.2, 0.05, 0.2, 0.1, 0.1, 0.1]).unwrap();
        let p = Pmf::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let v = 0usize;
        let qv = joint.marginal_v(v);
        let trials = 100_000u64;
        let mut inv = Vec::with_capacity(trials as usize);
        for t in 0..trials {
            let mut stream = SeededStream::new(909, t);
            let proc = ExpProcess::generate(4, &mut stream);
            let u = efr_argmin(&proc, &p).unwrap();
            let r = refine(&joint, &proc).unwrap();
            inv.push(1.0 / r.prob(v, u));
        }
        let (mean, se) = crate::numeric::mean_stderr(&inv);
        let expected_ratio: f64 = (0..4)
            .map(|u| {
                let q_cond = joint.prob(v, u) / qv;
                p.prob(u) * p.prob(u) / q_cond
            })
            .sum();
        let rhs = ((4.0_f64).ln() + 1.0) / qv * (expected_ratio + 1.0);
        assert!(mean <= rhs + 3.0 * se, "mean {mean} vs bound {rhs}");
    }

    #[test]
    fn pml_bound_values() {
        assert_eq!(pml_bound(0.0), 0.0);
        assert_abs_diff_eq!(pml_bound(1.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(pml_bound(3.0), 0.75, epsilon = 1e-15);
        assert_eq!(pml_bound(f64::INFINITY), 1.0);
    }

    #[test]
    fn identical_pmfs_never_mismatch() {
        let p = Pmf::new(vec![0.3, 0.7]).unwrap();
        let (est, _) = estimate_mismatch(&p, &p, 1000, 1).unwrap();
        assert_eq!(est, 0.0);
    }

    #[test]
    fn disjoint_supports_always_mismatch() {
        let p1 = Pmf::new(vec![1.0, 0.0]).unwrap();
        let p2 = Pmf::new(vec![0.0, 1.0]).unwrap();
        let (est, _) = estimate_mismatch(&p1, &p2, 1000, 2).unwrap();
        assert_eq!(est, 1.0);
    }

    #[test]
    fn mismatch_dominated_by_matching_bound() {
        // Empirical mismatch <= E_{U~p1}[1 - (1 + p1/p2(U))^{-1}] + 3 se.
        let p1 = Pmf::new(vec![0.7, 0.3]).unwrap();
        let p2 = Pmf::new(vec![0.3, 0.7]).unwrap();
        let trials = 100_000;
        let (est, se) = estimate_mismatch(&p1, &p2, trials, 3).unwrap();
        let rhs: f64 = (0..2)
            .map(|u| p1.prob(u) * pml_bound(p1.prob(u) / p2.prob(u)))
            .sum();
        assert!(est <= rhs + 3.0 * se, "est {est} vs bound {rhs}");
    }

    #[test]
    fn sample_matches_pmf_counts() {
        let p = Pmf::new(vec![0.2, 0.5, 0.3]).unwrap();
        let mut stream = SeededStream::new(99, 0);
        let n = 200_000u64;
        let mut counts = vec![0u64; 3];
        for _ in 0..n {
            counts[p.sample(&mut stream)] += 1;
        }
        let stat = chi_square_statistic(&counts, p.probs(), n);
        assert!(stat < chi_square_critical(1e-3, 2), "chi2 {stat}");
    }

    proptest! {
        #[test]
        fn scaling_marks_preserves_argmin_and_ranks(
            weights in proptest::collection::vec(1e-3_f64..1.0, 2..6),
            marks in proptest::collection::vec(1e-6_f64..10.0, 6),
            scale in 1e-3_f64..1e3,
        ) {
            let n = weights.len();
            let p = Pmf::from_weights(&weights).unwrap();
            let base = ExpProcess::from_marks(marks[..n].to_vec()).unwrap();
            let scaled = ExpProcess::from_marks(
                marks[..n].iter().map(|z| z * scale).collect(),
            ).unwrap();
            prop_assert_eq!(
                efr_argmin(&base, &p).unwrap(),
                efr_argmin(&scaled, &p).unwrap()
            );
            for u in 0..n {
                prop_assert_eq!(efr_rank(&base, &p, u), efr_rank(&scaled, &p, u));
            }
        }

        #[test]
        fn scaling_marks_preserves_refinement(
            row0 in proptest::collection::vec(1e-3_f64..1.0, 3),
            row1 in proptest::collection::vec(1e-3_f64..1.0, 3),
            marks in proptest::collection::vec(1e-6_f64..10.0, 3),
            scale in 1e-3_f64..1e3,
        ) {
            let mut table: Vec<f64> = row0.iter().chain(row1.iter()).copied().collect();
            let sum: f64 = table.iter().sum();
            for x in &mut table { *x /= sum; }
            let joint = JointPmf::new(2, 3, table).unwrap();
            let base = ExpProcess::from_marks(marks.clone()).unwrap();
            let scaled = ExpProcess::from_marks(
                marks.iter().map(|z| z * scale).collect(),
            ).unwrap();
            let a = refine(&joint, &base).unwrap();
            let b = refine(&joint, &scaled).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn ranks_are_a_permutation(
            weights in proptest::collection::vec(0.0_f64..1.0, 2..6),
            seed in 0u64..1000,
        ) {
            prop_assume!(weights.iter().sum::<f64>() > 0.0);
            let p = Pmf::from_weights(&weights).unwrap();
            let mut stream = SeededStream::new(seed, 0);
            let proc = ExpProcess::generate(p.len(), &mut stream);
            let mut seen = vec![false; p.len()];
            for u in 0..p.len() {
                let r = efr_rank(&proc, &p, u);
                prop_assert!(r >= 1 && r <= p.len());
                prop_assert!(!seen[r - 1]);
                seen[r - 1] = true;
            }
        }
    }
}
