//! Covering machinery for channel families and one-shot secrecy schemes.
//!
//! Both schemes in this module communicate through an imperfectly known
//! channel: the true transition law is only known to lie in a family, so the
//! decoder is designed against a fixed *reference* channel and robustness is
//! bought with a covering argument — replace the family by a finite subfamily
//! that has every family member within a total-variation radius, take a union
//! bound over the subfamily, and absorb the radius as an additive slack.
//! [`covering_bound`] caps how large such a subfamily must be for arbitrary
//! families on fixed alphabets, and [`greedy_cover`] constructs one for a
//! concrete finite family.
//!
//! **Information hiding** ([`HidingSpec`]): an encoder observing a state
//! `s_e` embeds a message `m` into a signal `x` subject to an embedding
//! distortion limit; an attacker maps `x` to `y` through an arbitrary member
//! of an attack family; a decoder observing `(y, s_d)` must recover the
//! message and produce a reconstruction `x_hat(m̂, y)` close to `x`. A trial
//! fails if the embedding distortion is exceeded, the reconstruction
//! distortion is exceeded, or the message is wrong. Encoder and decoder
//! share a codebook through a common random process: the encoder selects the
//! exponential-race argmin ([`crate::pfr::efr_argmin`]) over the product
//! alphabet `(u, m)` under its state-conditional law tied to the true
//! message, and the decoder re-runs the race under its posterior times a
//! uniform message prior. [`hiding_bound`] evaluates the analytic failure
//! cap; [`hiding_run`] measures failure empirically.
//!
//! **Wiretap coding** ([`WiretapSpec`]): a sender communicates `m` to a
//! receiver through a channel from one family while an eavesdropper listens
//! through a channel from another. The codebook is an infinite marked
//! Poisson process; each message owns an infinite subsequence of codewords,
//! and the sender picks one of the first [`WiretapSpec::candidates`] of them
//! uniformly at random. Randomizing over candidates keeps the transmitted
//! codeword distribution smooth enough that, averaged over the candidate
//! set, the eavesdropper's conditional observation law approaches its
//! marginal — the joint law of `(m, z)` approaches independence — while the
//! receiver can still isolate the sent codeword. [`wiretap_bound`] caps
//! `error + nu * secrecy_tv`; [`wiretap_run`] estimates both empirically.
//!
//! # Channel convention
//!
//! A channel with `n_in` inputs and `n_out` outputs is a dense
//! `n_out × n_in` matrix stored row-major as `mat[y * n_in + x]`; column `x`
//! is the output pmf for input `x` and must sum to 1 within `1e-12`. The
//! distance between two channels is the worst case over inputs of the
//! total-variation distance between corresponding columns.

use rayon::prelude::*;

use crate::adn::pick;
use crate::numeric::mean_stderr;
use crate::pfr::{efr_argmin, pml_bound, ExpProcess, Pmf};
use crate::rng::SeededStream;
use crate::{Error, Result};

/// Per-column normalization tolerance for stochastic matrices.
const CHANNEL_TOL: f64 = 1e-12;

/// Normalization tolerance for probability tables.
const PMF_TOL: f64 = 1e-9;

/// Cap on the number of cells in the empirical `(message, eavesdropper
/// output)` histogram used for the plug-in secrecy estimate.
pub const TV_HISTOGRAM_CAP: usize = 4096;

/// Cap on dense table sizes built by this module.
const MAX_TABLE_CELLS: usize = 1 << 20;

/// Distortion function on a pair of symbol indices.
pub type DistortionFn = Box<dyn Fn(usize, usize) -> f64 + Send + Sync>;

/// Reconstruction map `(message, channel output) -> signal symbol`.
pub type ReconstructionFn = Box<dyn Fn(usize, usize) -> usize + Send + Sync>;

/// Checks that `mat` is a valid `n_out × n_in` column-stochastic matrix.
fn validate_channel(mat: &[f64], n_in: usize, n_out: usize, what: &str) -> Result<()> {
    if n_in == 0 || n_out == 0 {
        return Err(Error::invalid(format!("{what}: empty alphabet")));
    }
    if mat.len() != n_in * n_out {
        return Err(Error::invalid(format!(
            "{what}: expected {} entries, got {}",
            n_in * n_out,
            mat.len()
        )));
    }
    for x in 0..n_in {
        let mut sum = 0.0;
        for y in 0..n_out {
            let p = mat[y * n_in + x];
            if !p.is_finite() || p < 0.0 {
                return Err(Error::invalid(format!(
                    "{what}: entry ({y}, {x}) is {p}"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > CHANNEL_TOL {
            return Err(Error::invalid(format!(
                "{what}: column {x} sums to {sum}, expected 1"
            )));
        }
    }
    Ok(())
}

/// Checks that `table` is a probability table of the expected length.
fn validate_pmf_table(table: &[f64], len: usize, what: &str) -> Result<()> {
    if table.len() != len {
        return Err(Error::invalid(format!(
            "{what}: expected {len} entries, got {}",
            table.len()
        )));
    }
    let mut sum = 0.0;
    for &p in table {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::invalid(format!("{what}: entry {p} out of range")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PMF_TOL {
        return Err(Error::invalid(format!(
            "{what}: sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// A finite family of channels on shared input/output alphabets.
///
/// Members are `n_out × n_in` column-stochastic matrices (see the module
/// docs for the storage convention).
#[derive(Clone, Debug)]
pub struct ChannelSet {
    n_in: usize,
    n_out: usize,
    channels: Vec<Vec<f64>>,
}

impl ChannelSet {
    /// Validates and wraps a family of channels.
    pub fn new(n_in: usize, n_out: usize, channels: Vec<Vec<f64>>) -> Result<Self> {
        for (i, ch) in channels.iter().enumerate() {
            validate_channel(ch, n_in, n_out, &format!("channel {i}"))?;
        }
        Ok(ChannelSet {
            n_in,
            n_out,
            channels,
        })
    }

    /// Number of member channels.
    pub fn len(&self) -> usize {
        self.channels.len()
    }

    /// Whether the family has no members.
    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Input alphabet size.
    pub fn n_in(&self) -> usize {
        self.n_in
    }

    /// Output alphabet size.
    pub fn n_out(&self) -> usize {
        self.n_out
    }

    /// The `i`-th member matrix.
    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    /// Transition probability `member i: input x -> output y`.
    pub fn prob(&self, i: usize, y: usize, x: usize) -> f64 {
        self.channels[i][y * self.n_in + x]
    }

    /// Worst-case-over-inputs total variation between members `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.channels[i], &self.channels[j]);
        let mut worst = 0.0f64;
        for x in 0..self.n_in {
            let mut tv = 0.0;
            for y in 0..self.n_out {
                tv += (a[y * self.n_in + x] - b[y * self.n_in + x]).abs();
            }
            worst = worst.max(0.5 * tv);
        }
        worst
    }
}

/// Upper bound on the size of a minimal radius-`eps` cover of *any* family
/// of channels from `size_x` inputs to `size_y` outputs, under the
/// worst-case-over-inputs total-variation distance:
/// `(1/(2 eps) + (size_y + 1)/2) ^ (size_x * size_y)`.
///
/// The radius must be positive; `eps = +inf` gives the limiting value
/// `((size_y + 1)/2) ^ (size_x * size_y)`.
pub fn covering_bound(size_x: usize, size_y: usize, eps: f64) -> f64 {
    let base = 1.0 / (2.0 * eps) + (size_y as f64 + 1.0) / 2.0;
    base.powf((size_x * size_y) as f64)
}

/// Builds a radius-`eps` cover of `set` from its own members: scans the
/// family in index order and keeps every member farther than `eps` (in
/// worst-case-over-inputs total variation) from all members kept so far.
///
/// Every member of `set` ends up within `eps` of some returned index, and
/// the returned members are pairwise more than `eps` apart. Negative radii
/// are clamped to zero.
pub fn greedy_cover(set: &ChannelSet, eps: f64) -> Vec<usize> {
    let eps = eps.max(0.0);
    let mut centers: Vec<usize> = Vec::new();
    for i in 0..set.len() {
        if !centers.iter().any(|&c| set.distance(i, c) <= eps) {
            centers.push(i);
        }
    }
    centers
}

/// Draws an index uniformly from `0..n` using one stream draw.
fn draw_index(stream: &mut SeededStream, n: usize) -> usize {
    ((stream.draw_unit() * n as f64) as usize).min(n - 1)
}

/// Samples an output of channel `mat` (stored `[y * n_in + x]`) for input
/// `x` using one externally supplied uniform variate.
fn pick_column(mat: &[f64], n_in: usize, n_out: usize, x: usize, t: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for y in 0..n_out {
        let p = mat[y * n_in + x];
        if p > 0.0 {
            last_positive = y;
            acc += p;
            if t < acc {
                return y;
            }
        }
    }
    last_positive
}

/// Plug-in total-variation distance between an empirical joint histogram
/// (over `n_m * n_z` cells, `counts[m * n_z + z]`) and the product of its
/// empirical marginals.
fn plugin_tv(counts: &[u64], n_m: usize, n_z: usize, total: u64) -> f64 {
    let n = total as f64;
    let mut row = vec![0u64; n_m];
    let mut col = vec![0u64; n_z];
    for m in 0..n_m {
        for z in 0..n_z {
            row[m] += counts[m * n_z + z];
            col[z] += counts[m * n_z + z];
        }
    }
    let mut tv = 0.0;
    for m in 0..n_m {
        for z in 0..n_z {
            let joint = counts[m * n_z + z] as f64 / n;
            let prod = (row[m] as f64 / n) * (col[z] as f64 / n);
            tv += (joint - prod).abs();
        }
    }
    0.5 * tv
}

// ---------------------------------------------------------------------------
// Information hiding
// ---------------------------------------------------------------------------

/// An information-hiding instance.
///
/// The generative model per trial: states `(s_e, s_d) ~ p_state`; the
/// encoder sees `s_e` and the message `m` (uniform on `l` values), selects
/// an auxiliary symbol `u`, and emits `x` with `(u, x) ~ p_ux[s_e]`; the
/// attacker produces `y` through one member of `attacks`; the decoder sees
/// `(y, s_d)` and outputs `(m̂, x_hat(m̂, y))`. The decoder's posterior is
/// computed against the `reference` attack channel, so the scheme degrades
/// gracefully (and the analytic cap stays valid) when the true attack is
/// merely close to a covered one.
pub struct HidingSpec {
    /// Encoder-side state alphabet size.
    pub n_se: usize,
    /// Decoder-side state alphabet size.
    pub n_sd: usize,
    /// Auxiliary alphabet size.
    pub n_u: usize,
    /// Emitted-signal alphabet size.
    pub n_x: usize,
    /// Attack-output alphabet size.
    pub n_y: usize,
    /// Joint state pmf, flattened `[s_e * n_sd + s_d]`.
    pub p_state: Vec<f64>,
    /// Per-`s_e` joint pmf over `(u, x)`, flattened `u * n_x + x`.
    pub p_ux: Vec<Vec<f64>>,
    /// Reference attack channel (`n_y × n_x`, column-stochastic) the
    /// decoder is designed against.
    pub reference: Vec<f64>,
    /// Family of attack channels the scheme must survive.
    pub attacks: ChannelSet,
    /// Number of messages.
    pub l: usize,
    /// Embedding distortion `d1(s_e, x)`.
    pub d1: DistortionFn,
    /// Embedding distortion limit.
    pub max_d1: f64,
    /// Reconstruction distortion `d2(x, x_hat)`.
    pub d2: DistortionFn,
    /// Reconstruction distortion limit.
    pub max_d2: f64,
    /// Reconstruction map `(m, y) -> x_hat`.
    pub x_hat: ReconstructionFn,
}

/// Empirical statistics from simulated hiding trials.
#[derive(Clone, Copy, Debug)]
pub struct HidingStats {
    /// Fraction of trials that failed (distortion exceeded or message
    /// wrong).
    pub failure_rate: f64,
    /// Standard error of `failure_rate`.
    pub failure_stderr: f64,
    /// Fraction of trials where the decoder's selected `(u, m)` differed
    /// from the encoder's.
    pub mismatch_rate: f64,
    /// Standard error of `mismatch_rate`.
    pub mismatch_stderr: f64,
    /// Number of trials.
    pub trials: u64,
}

/// Precomputed dense tables shared by the hiding bound and simulator.
struct HidingTables {
    /// `[s_e][u]`: auxiliary conditional `P(u | s_e)`.
    p_u_given_se: Vec<Vec<f64>>,
    /// `[s_e][u * n_x + x]`: signal conditional `P(x | s_e, u)` with
    /// uniform fallback on zero-mass rows.
    x_rows: Vec<Vec<f64>>,
    /// `[y * n_sd + s_d][u]`: decoder posterior under the reference attack,
    /// normalized; meaningful only where `post_mass > 0`.
    post: Vec<Vec<f64>>,
    /// `[y * n_sd + s_d]`: reference-model probability of the conditioning
    /// event.
    post_mass: Vec<f64>,
}

impl HidingSpec {
    /// Checks all table shapes, normalizations, and the range of `x_hat`.
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("n_se", self.n_se),
            ("n_sd", self.n_sd),
            ("n_u", self.n_u),
            ("n_x", self.n_x),
            ("n_y", self.n_y),
            ("l", self.l),
        ] {
            if n == 0 {
                return Err(Error::invalid(format!("hiding: {name} must be positive")));
            }
        }
        let cells = [self.n_se, self.n_sd, self.n_u, self.n_x, self.n_y, self.l]
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&c| c <= MAX_TABLE_CELLS);
        if cells.is_none() {
            return Err(Error::AlphabetOverflow(format!(
                "hiding: alphabet product exceeds {MAX_TABLE_CELLS} cells"
            )));
        }
        validate_pmf_table(&self.p_state, self.n_se * self.n_sd, "hiding: p_state")?;
        if self.p_ux.len() != self.n_se {
            return Err(Error::invalid(
                "hiding: p_ux must have one table per encoder state",
            ));
        }
        for (s, table) in self.p_ux.iter().enumerate() {
            validate_pmf_table(table, self.n_u * self.n_x, &format!("hiding: p_ux[{s}]"))?;
        }
        validate_channel(&self.reference, self.n_x, self.n_y, "hiding: reference")?;
        if self.attacks.is_empty() {
            return Err(Error::invalid("hiding: attack family is empty"));
        }
        if self.attacks.n_in() != self.n_x || self.attacks.n_out() != self.n_y {
            return Err(Error::invalid(
                "hiding: attack family shape does not match (n_x, n_y)",
            ));
        }
        for m in 0..self.l {
            for y in 0..self.n_y {
                let xh = (self.x_hat)(m, y);
                if xh >= self.n_x {
                    return Err(Error::invalid(format!(
                        "hiding: x_hat({m}, {y}) = {xh} out of range"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Builds the dense conditionals used by both the bound and the
    /// simulator.
    fn tables(&self) -> HidingTables {
        let (n_se, n_sd, n_u, n_x, n_y) = (self.n_se, self.n_sd, self.n_u, self.n_x, self.n_y);
        let mut p_u_given_se = vec![vec![0.0; n_u]; n_se];
        let mut x_rows = vec![vec![0.0; n_u * n_x]; n_se];
        for se in 0..n_se {
            for u in 0..n_u {
                let pu: f64 = (0..n_x).map(|x| self.p_ux[se][u * n_x + x]).sum();
                p_u_given_se[se][u] = pu;
                for x in 0..n_x {
                    x_rows[se][u * n_x + x] = if pu > 0.0 {
                        self.p_ux[se][u * n_x + x] / pu
                    } else {
                        1.0 / n_x as f64
                    };
                }
            }
        }
        // Reference joint over (s_e, s_d, u, x, y), reduced to the decoder
        // posterior P(u | y, s_d) and the conditioning mass P(y, s_d).
        let mut post = vec![vec![0.0; n_u]; n_y * n_sd];
        let mut post_mass = vec![0.0; n_y * n_sd];
        for se in 0..n_se {
            for sd in 0..n_sd {
                let ws = self.p_state[se * n_sd + sd];
                if ws <= 0.0 {
                    continue;
                }
                for u in 0..n_u {
                    for x in 0..n_x {
                        let wux = self.p_ux[se][u * n_x + x];
                        if wux <= 0.0 {
                            continue;
                        }
                        for y in 0..n_y {
                            let wy = self.reference[y * n_x + x];
                            if wy <= 0.0 {
                                continue;
                            }
                            let w = ws * wux * wy;
                            post[y * n_sd + sd][u] += w;
                            post_mass[y * n_sd + sd] += w;
                        }
                    }
                }
            }
        }
        for (row, &mass) in post.iter_mut().zip(post_mass.iter()) {
            if mass > 0.0 {
                for v in row.iter_mut() {
                    *v /= mass;
                }
            }
        }
        HidingTables {
            p_u_given_se,
            x_rows,
            post,
            post_mass,
        }
    }
}

/// Exact per-attack expectation inside the hiding cap: the mean over the
/// instance's generative law (with attack `attack_index` producing `y`) of
/// `1` minus the product of the two distortion indicators and the race
/// success probability `(1 + l * P(u|s_e) / posterior(u|y,s_d))^{-1}`.
/// Zero-mass posterior cells contribute the worst case `1`.
pub fn hiding_term(spec: &HidingSpec, attack_index: usize) -> Result<f64> {
    spec.validate()?;
    if attack_index >= spec.attacks.len() {
        return Err(Error::invalid("hiding: attack index out of range"));
    }
    let t = spec.tables();
    let attack = spec.attacks.channel(attack_index);
    let (n_sd, n_x, n_y, l) = (spec.n_sd, spec.n_x, spec.n_y, spec.l);
    let mut total = 0.0;
    for se in 0..spec.n_se {
        for sd in 0..n_sd {
            let ws = spec.p_state[se * n_sd + sd];
            if ws <= 0.0 {
                continue;
            }
            for u in 0..spec.n_u {
                let pu = t.p_u_given_se[se][u];
                for x in 0..n_x {
                    let wux = spec.p_ux[se][u * n_x + x];
                    if wux <= 0.0 {
                        continue;
                    }
                    let ok1 = (spec.d1)(se, x) <= spec.max_d1;
                    for y in 0..n_y {
                        let wy = attack[y * n_x + x];
                        if wy <= 0.0 {
                            continue;
                        }
                        let dens = if t.post_mass[y * n_sd + sd] > 0.0 {
                            t.post[y * n_sd + sd][u]
                        } else {
                            0.0
                        };
                        let success = if dens > 0.0 {
                            1.0 - pml_bound(l as f64 * pu / dens)
                        } else {
                            0.0
                        };
                        for m in 0..l {
                            let ok2 = (spec.d2)(x, (spec.x_hat)(m, y)) <= spec.max_d2;
                            let integrand = if ok1 && ok2 { 1.0 - success } else { 1.0 };
                            total += ws * wux * wy * integrand / l as f64;
                        }
                    }
                }
            }
        }
    }
    Ok(total)
}

/// Analytic cap on the worst-case failure probability over the whole attack
/// family: `|cover| * sup_attack hiding_term + eps`, where the cover is
/// built by [`greedy_cover`] at radius `eps`.
pub fn hiding_bound(spec: &HidingSpec, eps: f64) -> Result<f64> {
    spec.validate()?;
    if !(eps >= 0.0) {
        return Err(Error::invalid("hiding: cover radius must be >= 0"));
    }
    let cover = greedy_cover(&spec.attacks, eps).len();
    let mut sup: f64 = 0.0;
    for i in 0..spec.attacks.len() {
        sup = sup.max(hiding_term(spec, i)?);
    }
    Ok(cover as f64 * sup + eps)
}

/// Simulates the hiding scheme against attack `attack_index`.
///
/// Per trial, a shared exponential race over the `(u, m)` product alphabet
/// couples the encoder (racing under `P(u | s_e)` tied to the true message)
/// and the decoder (racing under its reference posterior times a uniform
/// message prior); zero-mass posterior rows fall back to uniform. Trials
/// use independent substreams of `seed` and run in parallel.
pub fn hiding_run(
    spec: &HidingSpec,
    attack_index: usize,
    trials: u64,
    seed: u64,
) -> Result<HidingStats> {
    spec.validate()?;
    if attack_index >= spec.attacks.len() {
        return Err(Error::invalid("hiding: attack index out of range"));
    }
    if trials == 0 {
        return Err(Error::invalid("hiding: trial count must be positive"));
    }
    let t = spec.tables();
    let (n_sd, n_u, n_x, n_y, l) = (spec.n_sd, spec.n_u, spec.n_x, spec.n_y, spec.l);
    let attack = spec.attacks.channel(attack_index);
    // Encoder pmfs over (u, m), one per (s_e, m): mass P(u | s_e) on the
    // true message column, zero elsewhere.
    let enc_pmfs: Vec<Pmf> = (0..spec.n_se * l)
        .map(|sm| {
            let (se, m) = (sm / l, sm % l);
            let mut w = vec![0.0; n_u * l];
            for u in 0..n_u {
                w[u * l + m] = t.p_u_given_se[se][u];
            }
            Pmf::from_weights(&w)
        })
        .collect::<Result<_>>()?;
    // Decoder pmfs over (u, m), one per (y, s_d).
    let dec_pmfs: Vec<Pmf> = (0..n_y * n_sd)
        .map(|ys| {
            let mut w = vec![0.0; n_u * l];
            for u in 0..n_u {
                let dens = if t.post_mass[ys] > 0.0 {
                    t.post[ys][u]
                } else {
                    1.0 / n_u as f64
                };
                for m in 0..l {
                    w[u * l + m] = dens / l as f64;
                }
            }
            Pmf::from_weights(&w)
        })
        .collect::<Result<_>>()?;
    let records: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut stream = SeededStream::new(seed, trial);
            let sm = pick(&spec.p_state, stream.draw_unit());
            let (se, sd) = (sm / n_sd, sm % n_sd);
            let m = draw_index(&mut stream, l);
            let proc = ExpProcess::generate(n_u * l, &mut stream);
            let enc = efr_argmin(&proc, &enc_pmfs[se * l + m])?;
            let u = enc / l;
            let x = pick(&t.x_rows[se][u * n_x..(u + 1) * n_x], stream.draw_unit());
            let y = pick_column(attack, n_x, n_y, x, stream.draw_unit());
            let dec = efr_argmin(&proc, &dec_pmfs[y * n_sd + sd])?;
            let m_hat = dec % l;
            let xh = (spec.x_hat)(m_hat, y);
            let fail = (spec.d1)(se, x) > spec.max_d1
                || (spec.d2)(x, xh) > spec.max_d2
                || m_hat != m;
            Ok((fail, dec != enc))
        })
        .collect::<Result<_>>()?;
    let fails: Vec<f64> = records
        .iter()
        .map(|&(f, _)| if f { 1.0 } else { 0.0 })
        .collect();
    let mismatches: Vec<f64> = records
        .iter()
        .map(|&(_, mm)| if mm { 1.0 } else { 0.0 })
        .collect();
    let (failure_rate, failure_stderr) = mean_stderr(&fails);
    let (mismatch_rate, mismatch_stderr) = mean_stderr(&mismatches);
    Ok(HidingStats {
        failure_rate,
        failure_stderr,
        mismatch_rate,
        mismatch_stderr,
        trials,
    })
}

// ---------------------------------------------------------------------------
// Wiretap coding
// ---------------------------------------------------------------------------

/// A compound wiretap instance.
///
/// The sender draws `(u, x) ~ p_ux` through the codebook (the auxiliary `u`
/// is the codeword symbol, `x` the channel input); the receiver observes
/// `y` through a member of `decode_family` and the eavesdropper observes
/// `z` through a member of `eaves_family`. The decoder's posterior is
/// computed against `ref_decode`, and the analytic secrecy term against
/// `ref_eaves`.
pub struct WiretapSpec {
    /// Auxiliary/codeword alphabet size.
    pub n_u: usize,
    /// Channel-input alphabet size.
    pub n_x: usize,
    /// Receiver-output alphabet size.
    pub n_y: usize,
    /// Eavesdropper-output alphabet size.
    pub n_z: usize,
    /// Joint pmf over `(u, x)`, flattened `u * n_x + x`.
    pub p_ux: Vec<f64>,
    /// Reference receiver channel (`n_y × n_x`).
    pub ref_decode: Vec<f64>,
    /// Reference eavesdropper channel (`n_z × n_x`).
    pub ref_eaves: Vec<f64>,
    /// Family of possible receiver channels.
    pub decode_family: ChannelSet,
    /// Family of possible eavesdropper channels.
    pub eaves_family: ChannelSet,
    /// Number of messages.
    pub l: usize,
    /// Number of same-message codewords the sender randomizes over.
    pub candidates: usize,
    /// Exponent of the soft-covering secrecy term (comparison batch size).
    pub batch: usize,
    /// Weight of the secrecy total-variation term in the combined
    /// objective.
    pub nu: f64,
    /// Cover radius for the receiver family.
    pub eps_decode: f64,
    /// Cover radius for the eavesdropper family.
    pub eps_eaves: f64,
}

/// Empirical statistics from simulated wiretap trials.
#[derive(Clone, Copy, Debug)]
pub struct WiretapStats {
    /// Fraction of trials with a wrong message decision.
    pub error_rate: f64,
    /// Standard error of `error_rate`.
    pub error_stderr: f64,
    /// Plug-in total-variation distance between the empirical `(m, z)`
    /// joint and the product of its empirical marginals. Biased upward at
    /// finite sample sizes: even under exact independence its expectation
    /// is of order `tv_sampling_scale`.
    pub secrecy_tv: f64,
    /// Scale of the plug-in estimator's bias and fluctuation,
    /// `sqrt(cells / trials) / 2`; dominance checks should allow several
    /// multiples of it.
    pub tv_sampling_scale: f64,
    /// Number of trials.
    pub trials: u64,
}

/// Precomputed dense tables for the wiretap bound and simulator.
struct WiretapTables {
    /// Marginal `P(u)`.
    p_u: Vec<f64>,
    /// `[u][x]`: conditional `P(x | u)` with uniform fallback.
    x_rows: Vec<Vec<f64>>,
    /// `[y][u]`: decoder posterior under `ref_decode` (normalized where
    /// `mass_y > 0`).
    post_y: Vec<Vec<f64>>,
    /// `[y]`: reference receiver-output mass.
    mass_y: Vec<f64>,
    /// `[z][u]`: eavesdropper posterior under `ref_eaves`.
    post_z: Vec<Vec<f64>>,
    /// `[z]`: reference eavesdropper-output mass.
    mass_z: Vec<f64>,
}

impl WiretapSpec {
    /// Checks table shapes, normalizations, and counting parameters.
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("n_u", self.n_u),
            ("n_x", self.n_x),
            ("n_y", self.n_y),
            ("n_z", self.n_z),
            ("l", self.l),
            ("candidates", self.candidates),
            ("batch", self.batch),
        ] {
            if n == 0 {
                return Err(Error::invalid(format!("wiretap: {name} must be positive")));
            }
        }
        if self.batch > i32::MAX as usize {
            return Err(Error::invalid("wiretap: batch too large"));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::invalid("wiretap: nu must be finite and >= 0"));
        }
        if !(self.eps_decode >= 0.0) || !(self.eps_eaves >= 0.0) {
            return Err(Error::invalid("wiretap: cover radii must be >= 0"));
        }
        validate_pmf_table(&self.p_ux, self.n_u * self.n_x, "wiretap: p_ux")?;
        validate_channel(&self.ref_decode, self.n_x, self.n_y, "wiretap: ref_decode")?;
        validate_channel(&self.ref_eaves, self.n_x, self.n_z, "wiretap: ref_eaves")?;
        for (family, n_out, what) in [
            (&self.decode_family, self.n_y, "decode"),
            (&self.eaves_family, self.n_z, "eaves"),
        ] {
            if family.is_empty() {
                return Err(Error::invalid(format!("wiretap: {what} family is empty")));
            }
            if family.n_in() != self.n_x || family.n_out() != n_out {
                return Err(Error::invalid(format!(
                    "wiretap: {what} family shape does not match the spec"
                )));
            }
        }
        let cells = [self.n_u, self.n_x, self.n_y.max(self.n_z), self.l]
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&c| c <= MAX_TABLE_CELLS);
        if cells.is_none() {
            return Err(Error::AlphabetOverflow(format!(
                "wiretap: alphabet product exceeds {MAX_TABLE_CELLS} cells"
            )));
        }
        Ok(())
    }

    /// Builds the marginal/conditional tables used by the bound and the
    /// simulator.
    fn tables(&self) -> WiretapTables {
        let (n_u, n_x, n_y, n_z) = (self.n_u, self.n_x, self.n_y, self.n_z);
        let mut p_u = vec![0.0; n_u];
        let mut x_rows = vec![vec![0.0; n_x]; n_u];
        for u in 0..n_u {
            let pu: f64 = (0..n_x).map(|x| self.p_ux[u * n_x + x]).sum();
            p_u[u] = pu;
            for x in 0..n_x {
                x_rows[u][x] = if pu > 0.0 {
                    self.p_ux[u * n_x + x] / pu
                } else {
                    1.0 / n_x as f64
                };
            }
        }
        let posterior = |mat: &[f64], n_out: usize| {
            let mut post = vec![vec![0.0; n_u]; n_out];
            let mut mass = vec![0.0; n_out];
            for u in 0..n_u {
                for x in 0..n_x {
                    let w = self.p_ux[u * n_x + x];
                    if w <= 0.0 {
                        continue;
                    }
                    for o in 0..n_out {
                        let wo = mat[o * n_x + x];
                        if wo <= 0.0 {
                            continue;
                        }
                        post[o][u] += w * wo;
                        mass[o] += w * wo;
                    }
                }
            }
            for (row, &m) in post.iter_mut().zip(mass.iter()) {
                if m > 0.0 {
                    for v in row.iter_mut() {
                        *v /= m;
                    }
                }
            }
            (post, mass)
        };
        let (post_y, mass_y) = posterior(&self.ref_decode, n_y);
        let (post_z, mass_z) = posterior(&self.ref_eaves, n_z);
        WiretapTables {
            p_u,
            x_rows,
            post_y,
            mass_y,
            post_z,
            mass_z,
        }
    }
}

/// Exact per-receiver-channel expectation inside the wiretap error cap:
/// the mean, over `(u, x) ~ p_ux` and `y` from the selected member of the
/// receiver family, of `min{l * candidates * P(u) / posterior(u|y), 1}`
/// with the posterior taken under `ref_decode`. Zero-mass posterior cells
/// contribute `1`.
pub fn wiretap_error_term(spec: &WiretapSpec, d_index: usize) -> Result<f64> {
    spec.validate()?;
    if d_index >= spec.decode_family.len() {
        return Err(Error::invalid("wiretap: receiver channel index out of range"));
    }
    let t = spec.tables();
    let ch = spec.decode_family.channel(d_index);
    let la = (spec.l * spec.candidates) as f64;
    let mut total = 0.0;
    for u in 0..spec.n_u {
        for x in 0..spec.n_x {
            let w = spec.p_ux[u * spec.n_x + x];
            if w <= 0.0 {
                continue;
            }
            for y in 0..spec.n_y {
                let wy = ch[y * spec.n_x + x];
                if wy <= 0.0 {
                    continue;
                }
                let dens = if t.mass_y[y] > 0.0 { t.post_y[y][u] } else { 0.0 };
                let term = if dens > 0.0 {
                    (la * t.p_u[u] / dens).min(1.0)
                } else {
                    1.0
                };
                total += w * wy * term;
            }
        }
    }
    Ok(total)
}

/// Exact per-eavesdropper-channel expectation inside the wiretap secrecy
/// cap: the mean, over `(u, x) ~ p_ux` and `z` from the selected member of
/// the eavesdropper family, of `(1 + P(u) / posterior(u|z))^{-batch}` with
/// the posterior taken under `ref_eaves`. Zero-mass posterior rows
/// contribute the worst case `1`.
pub fn wiretap_secrecy_term(spec: &WiretapSpec, e_index: usize) -> Result<f64> {
    spec.validate()?;
    if e_index >= spec.eaves_family.len() {
        return Err(Error::invalid(
            "wiretap: eavesdropper channel index out of range",
        ));
    }
    let t = spec.tables();
    let ch = spec.eaves_family.channel(e_index);
    let b = spec.batch as i32;
    let mut total = 0.0;
    for u in 0..spec.n_u {
        for x in 0..spec.n_x {
            let w = spec.p_ux[u * spec.n_x + x];
            if w <= 0.0 {
                continue;
            }
            for z in 0..spec.n_z {
                let wz = ch[z * spec.n_x + x];
                if wz <= 0.0 {
                    continue;
                }
                let term = if t.mass_z[z] <= 0.0 {
                    1.0
                } else {
                    let dens = t.post_z[z][u];
                    if dens > 0.0 {
                        (1.0 + t.p_u[u] / dens).powi(-b)
                    } else {
                        0.0
                    }
                };
                total += w * wz * term;
            }
        }
    }
    Ok(total)
}

/// Analytic cap on `error + nu * secrecy_tv` over the two families:
///
/// `|cover_D| * sup_D error_term + eps_decode
///  + nu * (|cover_E| * (2 * sup_E secrecy_term + sqrt(batch/candidates))
///          + eps_eaves)`
///
/// with covers built by [`greedy_cover`] at the spec's radii.
pub fn wiretap_bound(spec: &WiretapSpec) -> Result<f64> {
    spec.validate()?;
    let cover_d = greedy_cover(&spec.decode_family, spec.eps_decode).len();
    let cover_e = greedy_cover(&spec.eaves_family, spec.eps_eaves).len();
    let mut sup_err: f64 = 0.0;
    for i in 0..spec.decode_family.len() {
        sup_err = sup_err.max(wiretap_error_term(spec, i)?);
    }
    let mut sup_sec: f64 = 0.0;
    for i in 0..spec.eaves_family.len() {
        sup_sec = sup_sec.max(wiretap_secrecy_term(spec, i)?);
    }
    let err_part = cover_d as f64 * sup_err + spec.eps_decode;
    let sec_part = cover_e as f64
        * (2.0 * sup_sec + (spec.batch as f64 / spec.candidates as f64).sqrt())
        + spec.eps_eaves;
    Ok(err_part + spec.nu * sec_part)
}

/// Simulates the wiretap scheme against the channel pair
/// `(decode_family[pair.0], eaves_family[pair.1])`.
///
/// Per trial the infinite codebook is reduced to the finitely many
/// quantities that matter. The arrivals carrying the true message form a
/// thinned stream with inter-arrival times `l * Exp(1)` and marks i.i.d.
/// `P(u)`; the encoder simulates the first `rank` of them (`rank` uniform
/// on `1..=candidates`) and transmits the mark of the last. Every `(u, m)`
/// class is then scored by its first arrival: classes already seen keep
/// their observed time, unseen true-message classes get the memoryless
/// residual `v + l/P(u) * Exp(1)` past the last simulated arrival, and
/// other-message classes get a fresh `l/P(u) * Exp(1)`. The decoder
/// minimizes `time * P(u) / posterior(u|y)` (uniform fallback on zero-mass
/// posterior rows) and outputs the message component of the winning class;
/// because a class's score is minimized by its first arrival, this
/// reproduces the argmin over the infinite codebook exactly.
///
/// Returns the empirical error rate and the plug-in secrecy total
/// variation; the `(m, z)` histogram must fit in [`TV_HISTOGRAM_CAP`]
/// cells. Trials use independent substreams of `seed` and run in
/// parallel.
pub fn wiretap_run(
    spec: &WiretapSpec,
    pair: (usize, usize),
    trials: u64,
    seed: u64,
) -> Result<WiretapStats> {
    spec.validate()?;
    let (d_index, e_index) = pair;
    if d_index >= spec.decode_family.len() {
        return Err(Error::invalid("wiretap: receiver channel index out of range"));
    }
    if e_index >= spec.eaves_family.len() {
        return Err(Error::invalid(
            "wiretap: eavesdropper channel index out of range",
        ));
    }
    if trials == 0 {
        return Err(Error::invalid("wiretap: trial count must be positive"));
    }
    let cells = spec
        .l
        .checked_mul(spec.n_z)
        .filter(|&c| c <= TV_HISTOGRAM_CAP);
    let cells = match cells {
        Some(c) => c,
        None => {
            return Err(Error::AlphabetOverflow(format!(
                "wiretap: secrecy histogram needs {} cells, cap is {}",
                spec.l as u128 * spec.n_z as u128,
                TV_HISTOGRAM_CAP
            )))
        }
    };
    let t = spec.tables();
    let (n_u, n_x, n_y, n_z, l) = (spec.n_u, spec.n_x, spec.n_y, spec.n_z, spec.l);
    let d_ch = spec.decode_family.channel(d_index);
    let e_ch = spec.eaves_family.channel(e_index);
    // Decoder posterior rows with uniform fallback where the reference
    // model gives the observation zero mass.
    let dec_rows: Vec<Vec<f64>> = (0..n_y)
        .map(|y| {
            if t.mass_y[y] > 0.0 {
                t.post_y[y].clone()
            } else {
                vec![1.0 / n_u as f64; n_u]
            }
        })
        .collect();
    let records: Vec<(bool, usize, usize)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut stream = SeededStream::new(seed, trial);
            let m = draw_index(&mut stream, l);
            let rank = 1 + draw_index(&mut stream, spec.candidates);
            let mut v = 0.0;
            let mut first = vec![f64::INFINITY; n_u];
            let mut u_true = 0;
            for _ in 0..rank {
                v += l as f64 * stream.draw_exp();
                u_true = pick(&t.p_u, stream.draw_unit());
                if first[u_true].is_infinite() {
                    first[u_true] = v;
                }
            }
            let x = pick(&t.x_rows[u_true], stream.draw_unit());
            let y = pick_column(d_ch, n_x, n_y, x, stream.draw_unit());
            let z = pick_column(e_ch, n_x, n_z, x, stream.draw_unit());
            let row = &dec_rows[y];
            let mut best = f64::INFINITY;
            let mut best_m = 0;
            for u in 0..n_u {
                let pu = t.p_u[u];
                if pu <= 0.0 {
                    continue;
                }
                for mp in 0..l {
                    let s = if mp == m {
                        if first[u].is_finite() {
                            first[u]
                        } else {
                            v + l as f64 / pu * stream.draw_exp()
                        }
                    } else {
                        l as f64 / pu * stream.draw_exp()
                    };
                    if row[u] > 0.0 {
                        let score = s * pu / row[u];
                        if score < best {
                            best = score;
                            best_m = mp;
                        }
                    }
                }
            }
            (best_m != m, m, z)
        })
        .collect();
    let errors: Vec<f64> = records
        .iter()
        .map(|&(e, _, _)| if e { 1.0 } else { 0.0 })
        .collect();
    let (error_rate, error_stderr) = mean_stderr(&errors);
    let mut counts = vec![0u64; cells];
    for &(_, m, z) in &records {
        counts[m * n_z + z] += 1;
    }
    let secrecy_tv = plugin_tv(&counts, l, n_z, trials);
    Ok(WiretapStats {
        error_rate,
        error_stderr,
        secrecy_tv,
        tv_sampling_scale: 0.5 * (cells as f64 / trials as f64).sqrt(),
        trials,
    })
}
