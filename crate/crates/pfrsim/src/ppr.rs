//! Poisson private representation: exact channel simulation with a
//! differentially private index.
//!
//! Shared randomness defines an infinite codebook `Z_1, Z_2, …  ~ Q` (one
//! sample per arrival of a local rate-1 Poisson clock `T_1 < T_2 < …`).
//! Writing `r(z) = dP/dQ(z)` and `T̃_i = T_i / r(Z_i)`, the encoder selects
//! index `K` with conditional law
//!
//! ```text
//! Pr(K = k | process) = T̃_k^{-α} / Σ_i T̃_i^{-α},      α ∈ (1, ∞],
//! ```
//!
//! realised as `K = argmin_i T̃_i^α V_i` with auxiliary i.i.d. Exp(1) marks
//! `V_i`. The decoder regenerates `Z_K` from the shared stream alone. The
//! output is distributed *exactly* as `P`, and the soft selection makes the
//! index's conditional pmf stable under bounded density perturbations
//! (ratio at most `e^{2αε}` when the densities are pointwise within `e^ε`),
//! which is the privacy lever. `α = ∞` degenerates to the plain argmin —
//! exact simulation with no index privacy.
//!
//! # Encoder
//!
//! The encoder never materialises the infinite process. Points are generated
//! in increasing order of the scan level `B_i := T_i^α · min(V_i, 1)`, whose
//! point process on the level axis is Poisson with mean measure
//! `m(b) = (e^{-1} + γ(1 - 1/α, 1)) · b^{1/α}`; level increments are realised
//! by feeding Exp(1) steps through the inverse of `m`. Given its level, a
//! point lies on the `V > 1` branch (then `T = b^{1/α}`, `V - 1 ~ Exp(1)`)
//! with probability `e^{-1} / (e^{-1} + γ₁)`, else on the `V ≤ 1` branch
//! (then `V` is a unit-truncated Gamma(1 - 1/α) and `T = (b/V)^{1/α}`).
//! A min-heap keyed by `T` releases points in arrival order exactly when no
//! future point can precede them, so codebook samples can be drawn
//! sequentially; the scan stops once no pending or future point can beat the
//! incumbent weight, using `r* ≥ sup r` as the optimism bound.
//!
//! The level variable is scaled by `α` relative to the bare inverse of `m`;
//! scaling all times by a constant multiplies every weight `T̃_i^α V_i` by
//! the same constant, so selection probabilities, indices, and termination
//! are unaffected.

use crate::numeric::{grid_then_golden, ln_gamma, lower_inc_gamma};
use crate::pfr::Pmf;
use crate::rng::SeededStream;
use crate::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

/// `log₂ 3.56`, the constant in the simple expected-index-size bound.
pub const LOG2_3_56: f64 = 1.831_877_241_191_673_06;

/// The selection sharpness parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Alpha {
    /// Soft selection with exponent `α ∈ (1, ∞)`.
    Finite(f64),
    /// Plain argmin selection (no index privacy).
    Infinite,
}

/// Encoder parameters.
#[derive(Clone, Copy, Debug)]
pub struct PprParams {
    /// Selection sharpness; see [`Alpha`].
    pub alpha: Alpha,
}

impl PprParams {
    /// Finite-`α` parameters; requires `α > 1` strictly.
    pub fn finite(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must satisfy 1 < alpha < ∞, got {alpha}")));
        }
        Ok(PprParams {
            alpha: Alpha::Finite(alpha),
        })
    }

    /// Argmin mode (`α = ∞`).
    pub fn infinite() -> Self {
        PprParams {
            alpha: Alpha::Infinite,
        }
    }
}

/// A proposal distribution that can be sampled from a [`SeededStream`] with a
/// fixed, documented draw stride, so sample `k` (0-indexed) always starts at
/// draw `k * stride`.
pub trait Proposal {
    /// The sample type.
    type Sample;

    /// Number of stream draws consumed per sample (must be exact).
    fn stride(&self) -> u64;

    /// Draws one sample, consuming exactly [`Proposal::stride`] draws.
    fn sample(&self, stream: &mut SeededStream) -> Self::Sample;
}

/// Discrete pmfs are proposals with stride 1 (inverse-CDF sampling).
impl Proposal for Pmf {
    type Sample = usize;

    fn stride(&self) -> u64 {
        1
    }

    fn sample(&self, stream: &mut SeededStream) -> usize {
        Pmf::sample(self, stream)
    }
}

/// The density ratio `r(z) = dP/dQ(z)` together with a certified upper bound
/// `r* ≥ sup_z r(z)`.
///
/// An observed ratio above `r*` (beyond a 1e-9 relative tolerance) is a
/// contract violation: continuing would silently corrupt the output
/// distribution, so evaluation fails hard instead. Ratios within the
/// tolerance band are clamped to `r*`.
pub struct DensityRatio<T: ?Sized> {
    r_star: f64,
    ratio_fn: Box<dyn Fn(&T) -> f64 + Send + Sync>,
}

impl<T: ?Sized> DensityRatio<T> {
    /// Wraps a ratio function with its certified sup bound (finite, > 0).
    pub fn new(
        r_star: f64,
        ratio_fn: impl Fn(&T) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !r_star.is_finite() || r_star <= 0.0 {
            return Err(Error::invalid(format!(
                "r_star must be finite and positive, got {r_star}"
            )));
        }
        Ok(DensityRatio {
            r_star,
            ratio_fn: Box::new(ratio_fn),
        })
    }

    /// The certified sup bound.
    pub fn r_star(&self) -> f64 {
        self.r_star
    }

    /// Evaluates the ratio, enforcing `0 ≤ r ≤ r*`.
    pub fn eval(&self, z: &T) -> Result<f64> {
        let r = (self.ratio_fn)(z);
        if !r.is_finite() || r < 0.0 {
            return Err(Error::NonFiniteRatio(r));
        }
        if r > self.r_star * (1.0 + 1e-9) {
            return Err(Error::RatioBoundExceeded {
                observed: r,
                bound: self.r_star,
            });
        }
        Ok(r.min(self.r_star))
    }
}

/// Outcome of an encode call.
#[derive(Clone, Copy, Debug)]
pub struct EncodeResult {
    /// Selected index (1-based arrival index into the shared codebook).
    pub k: u64,
    /// Number of codebook points examined; always `≥ k`.
    pub points_examined: u64,
    /// The selected point's weight `T̃_K^α V_K` (or `T̃_K` when `α = ∞`).
    pub w_star: f64,
    /// Wall-clock seconds spent encoding.
    pub wall_time: f64,
}

/// A pending scan point: arrival time, auxiliary mark, the best-case weight
/// it could attain (its weight if the ratio reached `r*`), and whether that
/// best case beat the incumbent when the point was generated.
#[derive(Clone, Copy, Debug)]
struct HeapPoint {
    t: f64,
    v: f64,
    bound: f64,
    viable: bool,
    seq: u64,
}

impl PartialEq for HeapPoint {
    fn eq(&self, other: &Self) -> bool {
        self.t == other.t && self.seq == other.seq
    }
}
impl Eq for HeapPoint {}
impl PartialOrd for HeapPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap and we want min-by-t, with
        // exact-tie release in insertion order (measure-zero event).
        other
            .t
            .partial_cmp(&self.t)
            .expect("scan times are never NaN")
            .then(other.seq.cmp(&self.seq))
    }
}

/// A pending point whose best case still beat the incumbent when pushed,
/// kept in a max-by-arrival-time heap so the scan knows how far it must run.
#[derive(Clone, Copy, Debug)]
struct ViablePoint {
    t: f64,
    bound: f64,
    seq: u64,
}

impl PartialEq for ViablePoint {
    fn eq(&self, other: &Self) -> bool {
        self.t == other.t && self.seq == other.seq
    }
}
impl Eq for ViablePoint {}
impl PartialOrd for ViablePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ViablePoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.t
            .partial_cmp(&other.t)
            .expect("scan times are never NaN")
            .then(self.seq.cmp(&other.seq))
    }
}

/// `x^α` with a fast path for the common quadratic case.
#[inline]
fn pow_alpha(x: f64, alpha: f64) -> f64 {
    if alpha == 2.0 {
        x * x
    } else {
        x.powf(alpha)
    }
}

/// `v^{-1/α}` with a fast path for the common quadratic case.
#[inline]
fn pow_neg_inv_alpha(v: f64, inv_alpha: f64) -> f64 {
    if inv_alpha == 0.5 {
        v.sqrt().recip()
    } else {
        v.powf(-inv_alpha)
    }
}

/// Exact encoding: selects the index `K` with
/// `Pr(K = k | process) ∝ T̃_k^{-α}` and terminates almost surely.
///
/// `shared` is the codebook stream template (cloned and rewound internally,
/// so any cursor state of the argument is ignored); `local` supplies the
/// encoder's private randomness and is advanced in place.
pub fn encode<P: Proposal>(
    params: &PprParams,
    proposal: &P,
    ratio: &DensityRatio<P::Sample>,
    shared: &SeededStream,
    local: &mut SeededStream,
) -> Result<EncodeResult> {
    encode_impl(params, proposal, ratio, shared, local, None)
}

/// Truncated encoding: identical scan, but stops after examining
/// `n_points ≥ 1` codebook points (or at exact termination, whichever comes
/// first) and selects among the points seen so far.
///
/// Conditioned on the time process, the selection law is the exact soft
/// selection restricted to the first `n_points` arrivals; with the same
/// streams, the result coincides with [`encode`] exactly when the exact
/// selection falls within the first `n_points` arrivals, so the agreement
/// rate tends to 1 as `n_points` grows.
pub fn encode_truncated<P: Proposal>(
    params: &PprParams,
    proposal: &P,
    ratio: &DensityRatio<P::Sample>,
    shared: &SeededStream,
    local: &mut SeededStream,
    n_points: u64,
) -> Result<EncodeResult> {
    if n_points == 0 {
        return Err(Error::invalid("n_points must be at least 1"));
    }
    encode_impl(params, proposal, ratio, shared, local, Some(n_points))
}

fn encode_impl<P: Proposal>(
    params: &PprParams,
    proposal: &P,
    ratio: &DensityRatio<P::Sample>,
    shared: &SeededStream,
    local: &mut SeededStream,
    max_points: Option<u64>,
) -> Result<EncodeResult> {
    let start = Instant::now();
    let r_star = ratio.r_star();
    let mut codebook = shared.clone_at(0);

    let mut w_star = f64::INFINITY;
    let mut k_star = 0u64;
    let mut popped = 0u64;

    match params.alpha {
        Alpha::Infinite => {
            // Plain argmin over T̃_i = T_i / r(Z_i): once t / r* can no
            // longer beat the incumbent, neither can any later arrival.
            let mut t = 0.0f64;
            loop {
                t += local.draw_exp();
                if t / r_star >= w_star {
                    break;
                }
                popped += 1;
                let z = proposal.sample(&mut codebook);
                let r = ratio.eval(&z)?;
                let w = if r > 0.0 { t / r } else { f64::INFINITY };
                if w < w_star {
                    w_star = w;
                    k_star = popped;
                }
                if let Some(limit) = max_points {
                    if popped >= limit && k_star >= 1 {
                        break;
                    }
                }
            }
        }
        Alpha::Finite(alpha) if max_points.is_some() => {
            // Truncated scan: release points in arrival order, evaluating
            // every release, and stop once the point budget is spent.
            let limit = max_points.expect("guarded");
            let inv_alpha = 1.0 / alpha;
            let gamma1 = lower_inc_gamma(1.0 - inv_alpha, 1.0);
            let c = (-1.0f64).exp() + gamma1;
            let p_time_branch = (-1.0f64).exp() / c;
            let mut level_clock = 0.0f64; // Exp(1) accumulator on the level axis.
            let mut heap: BinaryHeap<HeapPoint> = BinaryHeap::new();
            let mut n_viable = 0u64;
            let mut seq = 0u64;
            let mut done = false;

            while !done {
                level_clock += local.draw_exp();
                // Scan time: branch-1 points arrive exactly here; branch-2
                // points arrive later by the factor v^{-1/α}.
                let t_scan = level_clock * alpha / c;
                if n_viable == 0 && (t_scan / r_star).powf(alpha) >= w_star {
                    break;
                }
                let (t, v) = if local.draw_unit() < p_time_branch {
                    (t_scan, local.draw_exp() + 1.0)
                } else {
                    let v = local.draw_gamma_trunc01(1.0 - inv_alpha);
                    (t_scan * v.powf(-inv_alpha), v)
                };
                let bound = (t / r_star).powf(alpha) * v;
                let viable = bound <= w_star;
                heap.push(HeapPoint { t, v, bound, viable, seq });
                seq += 1;
                n_viable += u64::from(viable);

                // Release every pending point that no future point can
                // precede in arrival order.
                while let Some(top) = heap.peek() {
                    if top.t > t_scan {
                        break;
                    }
                    let point = heap.pop().expect("peeked");
                    n_viable -= u64::from(point.viable);
                    popped += 1;
                    let z = proposal.sample(&mut codebook);
                    let r = ratio.eval(&z)?;
                    let w = if r > 0.0 {
                        (point.t / r).powf(alpha) * point.v
                    } else {
                        f64::INFINITY
                    };
                    if w < w_star {
                        w_star = w;
                        k_star = popped;
                    }
                    if popped >= limit && k_star >= 1 {
                        done = true;
                        break;
                    }
                }
            }
        }
        Alpha::Finite(alpha) => {
            // Exact scan with two exact prunings that keep the examined set
            // small. A released point whose best-case weight (its weight if
            // the ratio attained r*) exceeds the incumbent can never be
            // selected, so its evaluation is skipped. And once the scan
            // frontier itself exceeds the incumbent, no future arrival can
            // be selected either; the scan then only has to resolve the
            // arrival ordinals of the pending best-case survivors, counting
            // the dead arrivals between them instead of processing each one.
            let inv_alpha = 1.0 / alpha;
            let gamma1 = lower_inc_gamma(1.0 - inv_alpha, 1.0);
            let c = (-1.0f64).exp() + gamma1;
            let p_time_branch = (-1.0f64).exp() / c;
            let scan_scale = alpha / c;
            let stride = proposal.stride();
            let mut level_clock = 0.0f64; // Exp(1) accumulator on the level axis.
            let mut heap: BinaryHeap<HeapPoint> = BinaryHeap::new();
            let mut vheap: BinaryHeap<ViablePoint> = BinaryHeap::new();
            let mut seq = 0u64;

            // Scan position up to which pending points have been released
            // (and, if still worth it, examined).
            let mut t_released = 0.0f64;

            'scan: loop {
                level_clock += local.draw_exp();
                let t_scan = level_clock * scan_scale;
                let frontier = pow_alpha(t_scan / r_star, alpha);

                if frontier >= w_star {
                    // No future arrival can beat the incumbent (its best
                    // case is at least the frontier, for either branch).
                    // Drop pending entries that died or were already
                    // released and examined; what remains decides the scan:
                    // nothing viable → done; viable points about to be
                    // released this level → process the level normally;
                    // only far-deferred viable points → switch to counting.
                    let far_straggler = loop {
                        match vheap.peek() {
                            Some(top) if top.bound > w_star || top.t <= t_released => {
                                vheap.pop();
                            }
                            Some(top) => break top.t > t_scan,
                            None => break 'scan,
                        }
                    };
                    if far_straggler {
                        // Only far-deferred viable points remain (the heap
                        // top has the largest arrival). Their weights are
                        // pinned up to the ratio at their codebook slot (a
                        // deferred point's weight is bound · (r*/r)^α), so
                        // the scan only needs their ordinals: count the
                        // dead arrivals separating them.
                        let mut stragglers: Vec<ViablePoint> = vheap
                            .drain()
                            .filter(|p| p.bound <= w_star && p.t > t_released)
                            .collect();
                        stragglers.sort_by(|a, b| {
                            a.t.partial_cmp(&b.t)
                                .expect("scan times are never NaN")
                                .then(a.seq.cmp(&b.seq))
                        });
                        let mut counts = vec![0u64; stragglers.len()];
                        for p in heap.drain() {
                            if stragglers.iter().any(|s| s.seq == p.seq) {
                                continue;
                            }
                            if let Some(i) = stragglers
                                .iter()
                                .position(|s| (p.t, p.seq) < (s.t, s.seq))
                            {
                                counts[i] += 1;
                            }
                        }
                        let mut idx = 0usize;
                        let mut t_chase = t_scan;
                        loop {
                            // Resolve every straggler the scan has reached.
                            while idx < stragglers.len() && stragglers[idx].t <= t_chase {
                                let s = stragglers[idx];
                                popped += counts[idx] + 1;
                                if s.bound <= w_star {
                                    let mut cb = shared.clone_at((popped - 1) * stride);
                                    let z = proposal.sample(&mut cb);
                                    let r = ratio.eval(&z)?;
                                    if r > 0.0 {
                                        let w = s.bound * pow_alpha(r_star / r, alpha);
                                        if w < w_star {
                                            w_star = w;
                                            k_star = popped;
                                        }
                                    }
                                }
                                idx += 1;
                            }
                            if idx >= stragglers.len()
                                || stragglers[idx..].iter().all(|s| s.bound > w_star)
                            {
                                break 'scan;
                            }
                            // Place the current level's arrival. It is dead
                            // on arrival (best case ≥ frontier > incumbent),
                            // so only its position among the stragglers
                            // matters. The draws mirror the full scan so
                            // that a truncated run over the same streams
                            // sees the identical arrival process.
                            if local.draw_unit() < p_time_branch {
                                let _ = local.draw_exp();
                                counts[idx] += 1;
                            } else {
                                let v = local.draw_gamma_trunc01(1.0 - inv_alpha);
                                let t_arr = t_chase * pow_neg_inv_alpha(v, inv_alpha);
                                seq += 1;
                                if let Some(i) = stragglers[idx..]
                                    .iter()
                                    .position(|s| (t_arr, seq) < (s.t, s.seq))
                                {
                                    counts[idx + i] += 1;
                                }
                            }
                            level_clock += local.draw_exp();
                            t_chase = level_clock * scan_scale;
                        }
                    }
                }

                let (t, v, bound) = if local.draw_unit() < p_time_branch {
                    let v = local.draw_exp() + 1.0;
                    (t_scan, v, frontier * v)
                } else {
                    // Deferred branch: arrival t · v^{-1/α} gives the exact
                    // best-case identity bound = frontier.
                    let v = local.draw_gamma_trunc01(1.0 - inv_alpha);
                    (t_scan * pow_neg_inv_alpha(v, inv_alpha), v, frontier)
                };
                let viable = bound <= w_star;
                heap.push(HeapPoint { t, v, bound, viable, seq });
                if viable {
                    vheap.push(ViablePoint { t, bound, seq });
                }
                seq += 1;

                // Release every pending point that no future point can
                // precede in arrival order; evaluate only those whose best
                // case still beats the incumbent.
                while let Some(top) = heap.peek() {
                    if top.t > t_scan {
                        break;
                    }
                    let point = heap.pop().expect("peeked");
                    popped += 1;
                    if point.bound <= w_star {
                        let mut cb = shared.clone_at((popped - 1) * stride);
                        let z = proposal.sample(&mut cb);
                        let r = ratio.eval(&z)?;
                        if r > 0.0 {
                            let w = pow_alpha(point.t / r, alpha) * point.v;
                            if w < w_star {
                                w_star = w;
                                k_star = popped;
                            }
                        }
                    }
                }
                t_released = t_scan;
            }
        }
    }

    debug_assert!(k_star >= 1, "termination requires a selected point");
    Ok(EncodeResult {
        k: k_star,
        points_examined: popped,
        w_star,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Decoding: returns codebook sample `k` (1-based) in O(1) time by jumping
/// the shared stream to draw `(k - 1) * stride`.
pub fn decode<P: Proposal>(proposal: &P, k: u64, shared: &SeededStream) -> Result<P::Sample> {
    if k == 0 {
        return Err(Error::invalid("indices are 1-based"));
    }
    let mut stream = shared.clone_at((k - 1) * proposal.stride());
    Ok(proposal.sample(&mut stream))
}

/// The conditional index pmf `Pr(K = k) ∝ t̃_k^{-α}` over a finite list of
/// reweighted times, computed stably in log space.
pub fn conditional_index_pmf(tilde_t: &[f64], alpha: f64) -> Result<Pmf> {
    if tilde_t.is_empty() {
        return Err(Error::invalid("empty time list"));
    }
    if !(alpha > 1.0) {
        return Err(Error::invalid(format!("alpha must exceed 1, got {alpha}")));
    }
    if tilde_t.iter().any(|&t| !t.is_finite() || t <= 0.0) {
        return Err(Error::invalid("times must be finite and positive"));
    }
    let log_w: Vec<f64> = tilde_t.iter().map(|&t| -alpha * t.ln()).collect();
    let m = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_w.iter().map(|&lw| (lw - m).exp()).collect();
    Pmf::from_weights(&weights)
}

/// Upper bound, in bits, on `E[log₂ K]` as a function of `α ∈ (1, ∞]` and
/// the divergence budget `D(P‖Q)` in bits.
///
/// Returns the smaller of the closed-form bound
/// `D + log₂(3.56)/min{(α-1)/2, 1}` and the `η`-optimised bound
/// `D + inf_η  η^{-1} log₂(c_{α,η} + 1)` with
/// `c_{α,η} = Γ(1-(η+1)/α) Γ(η+1) / Γ(1-1/α)^{η+1}` over
/// `η ∈ (0, 1] ∩ (0, α-1)`. Pass `f64::INFINITY` for the argmin mode, where
/// the `η`-optimised form reduces to `D + 1`.
pub fn expected_logk_bound(alpha: f64, kl_bits: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::invalid(format!("alpha must exceed 1, got {alpha}")));
    }
    if !(kl_bits >= 0.0) || !kl_bits.is_finite() {
        return Err(Error::invalid(format!("divergence must be finite and >= 0, got {kl_bits}")));
    }
    if alpha.is_infinite() {
        // c_{∞,η} = Γ(η+1); η = 1 gives log₂ 2 = 1, which is optimal on
        // (0, 1] since η^{-1} log₂(Γ(η+1)+1) decreases toward η = 1.
        return Ok(kl_bits + (LOG2_3_56).min(1.0));
    }
    let simple = LOG2_3_56 / (((alpha - 1.0) / 2.0).min(1.0));
    let hi = 1.0f64.min(alpha - 1.0);
    let objective = |eta: f64| -> f64 {
        let arg = 1.0 - (eta + 1.0) / alpha;
        if arg <= 0.0 || eta <= 0.0 {
            return f64::INFINITY;
        }
        let ln_c = ln_gamma(arg) + ln_gamma(eta + 1.0)
            - (eta + 1.0) * ln_gamma(1.0 - 1.0 / alpha);
        (ln_c.exp() + 1.0).log2() / eta
    };
    let (_, refined) = grid_then_golden(objective, hi * 1e-6, hi, 400);
    Ok(kl_bits + simple.min(refined))
}

/// Privacy inflation of the index under soft selection: a base mechanism
/// that is `(ε, δ)`-DP yields a transmitted index that is `(2αε, 2δ)`-DP.
pub fn privacy_inflation(eps: f64, delta: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(eps >= 0.0) {
        return Err(Error::invalid(format!("eps must be >= 0, got {eps}")));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::invalid(format!("delta must lie in [0,1], got {delta}")));
    }
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must satisfy 1 < alpha < ∞, got {alpha}")));
    }
    Ok((2.0 * alpha * eps, 2.0 * delta))
}

/// Metric-privacy inflation coefficient: a base mechanism satisfying
/// `ε·d(x,x')`-privacy yields an index satisfying `2αε·d(x,x')`-privacy.
pub fn metric_privacy_coefficient(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must satisfy 1 < alpha < ∞, got {alpha}")));
    }
    Ok(2.0 * alpha)
}

/// The largest `α` for which the sharpened conversion applies: given slack
/// parameters `ε̃ ∈ (0, 1]` and `δ̃ ∈ (0, 1/3]`, returns
/// `α = e^{-4.2} δ̃ ε̃² / (-ln δ̃) + 1`; running the encoder at any
/// `α' ∈ (1, α]` on an `(ε, δ)`-DP base mechanism makes the index
/// `(α'ε + ε̃, 2(δ + δ̃))`-DP.
pub fn alpha_for_tight_dp(eps_tilde: f64, delta_tilde: f64) -> Result<f64> {
    if !(eps_tilde > 0.0 && eps_tilde <= 1.0) {
        return Err(Error::invalid(format!("eps_tilde must lie in (0,1], got {eps_tilde}")));
    }
    if !(delta_tilde > 0.0 && delta_tilde <= 1.0 / 3.0) {
        return Err(Error::invalid(format!("delta_tilde must lie in (0,1/3], got {delta_tilde}")));
    }
    Ok((-4.2f64).exp() * delta_tilde * eps_tilde * eps_tilde / (-delta_tilde.ln()) + 1.0)
}
