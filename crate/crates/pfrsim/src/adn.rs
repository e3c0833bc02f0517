//! One-shot coding over acyclic discrete networks.
//!
//! A network has `N` nodes processed in index order. Node `i` observes an
//! input `Y_i` drawn from a channel that may depend on all earlier outputs
//! and inputs, decodes auxiliary symbols chosen by earlier nodes, picks its
//! own auxiliary `U_i`, and emits an output `X_i`. All alphabets are finite
//! and all kernels are dense row-stochastic tables.
//!
//! The simulated scheme shares one exponential mark process per node (the
//! codebook for that node's auxiliary alphabet). Encoders select their
//! auxiliary by the ratio-minimising rule; decoders rebuild soft posteriors
//! for not-yet-decoded auxiliaries by chaining rank-based refinements and
//! then apply the same selection rule to the resulting marginal. Because a
//! selection depends only on the codebook and the conditioning pmf, a run
//! with genie-supplied true auxiliaries (the "ideal" pass) and the real
//! decoding run (the "actual" pass) coincide pathwise until the first
//! decoding mismatch, which is what makes the computable bound a dominance
//! bound for the simulated error rate.
//!
//! Index conventions (all 0-based):
//! * Channel row for node `i`: mixed radix over
//!   `[x_0, .., x_{i-1}, y_0, .., y_{i-1}]`, first entry most significant.
//! * `p_u` row for node `i`: `[y_i, u'_0, .., u'_{d'_i - 1}]` where `u'_j`
//!   is the auxiliary of origin node `origins[i][j]`.
//! * `p_x` row for node `i`: `[y_i, u_i, u'_0, .., u'_{d'_i - 1}]`.
//! * Joint-table flattening: `[x_0..x_{N-1}, y_0..y_{N-1}, u_0..u_{N-1}]`,
//!   first coordinate most significant.
//!
//! Rows that condition on a zero-probability event (reachable only after a
//! decoding mistake) fall back to the uniform distribution; any convention
//! there leaves the dominance bound intact because such rows are never hit
//! before the first mismatch.

use crate::numeric::mean_stderr;
use crate::pfr::{efr_argmin, refine, ExpProcess, JointPmf, Pmf};
use crate::rng::SeededStream;
use crate::{Error, Result};
use rayon::prelude::*;

/// Hard cap on the number of cells in the dense ideal joint table.
pub const MAX_JOINT_CELLS: usize = 1 << 20;

/// Dense conditional kernel: `rows` conditioning indices, each row a pmf
/// over `cols` outcomes.
#[derive(Clone, Debug)]
pub struct CondTable {
    rows: usize,
    cols: usize,
    table: Vec<f64>,
}

impl CondTable {
    /// Validating constructor; every row must sum to 1 within 1e-9.
    pub fn new(rows: usize, cols: usize, table: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("conditional table with an empty axis"));
        }
        if table.len() != rows * cols {
            return Err(Error::invalid(format!(
                "conditional table has {} entries, expected {}",
                table.len(),
                rows * cols
            )));
        }
        if table.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::invalid("conditional entries must be finite and >= 0"));
        }
        for r in 0..rows {
            let s: f64 = table[r * cols..(r + 1) * cols].iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("row {r} sums to {s}, expected 1")));
            }
        }
        Ok(CondTable { rows, cols, table })
    }

    /// Builds a table by evaluating `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut table = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                table.push(f(r, c));
            }
        }
        CondTable::new(rows, cols, table)
    }

    /// Deterministic kernel: row `r` is a point mass at `f(r)`.
    pub fn from_delta(rows: usize, cols: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        CondTable::from_fn(rows, cols, |r, c| if f(r) == c { 1.0 } else { 0.0 })
    }

    /// Number of conditioning indices.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Outcome alphabet size.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// The pmf conditioned on row `r`.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.table[r * self.cols..(r + 1) * self.cols]
    }
}

/// Channel structure of an acyclic network: per-node input/output alphabet
/// sizes and the input kernels `P(y_i | x_0..x_{i-1}, y_0..y_{i-1})`.
#[derive(Clone, Debug)]
pub struct Network {
    /// Output alphabet size of each node.
    pub x_sizes: Vec<usize>,
    /// Input alphabet size of each node.
    pub y_sizes: Vec<usize>,
    /// One kernel per node; row index mixes all earlier outputs then inputs.
    pub channels: Vec<CondTable>,
}

/// Code structure layered on a [`Network`].
#[derive(Clone, Debug)]
pub struct CodingSpec {
    /// `origins[i]` lists the earlier nodes whose auxiliaries node `i`
    /// decodes, in decoding order; the first `unique_counts[i]` entries are
    /// committed to uniquely, the rest only shape the soft posteriors.
    pub origins: Vec<Vec<usize>>,
    /// Number of uniquely decoded positions per node (`<= origins[i].len()`).
    pub unique_counts: Vec<usize>,
    /// Auxiliary alphabet size of each node.
    pub u_sizes: Vec<usize>,
    /// Auxiliary kernels `P(u_i | y_i, u'_0..u'_{d'-1})`.
    pub p_u: Vec<CondTable>,
    /// Output kernels `P(x_i | y_i, u_i, u'_0..u'_{d'-1})`.
    pub p_x: Vec<CondTable>,
}

/// Error predicate over the realised outputs and inputs `(x^N, y^N)`.
pub struct ErrorSet(pub Box<dyn Fn(&[usize], &[usize]) -> bool + Send + Sync>);

impl ErrorSet {
    /// Wraps a predicate on `(outputs, inputs)`.
    pub fn new(f: impl Fn(&[usize], &[usize]) -> bool + Send + Sync + 'static) -> Self {
        ErrorSet(Box::new(f))
    }

    /// Evaluates the predicate.
    pub fn contains(&self, xs: &[usize], ys: &[usize]) -> bool {
        (self.0)(xs, ys)
    }
}

/// A variable of the network, used to take marginals of the ideal joint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    /// Output of a node.
    X(usize),
    /// Input of a node.
    Y(usize),
    /// Auxiliary of a node.
    U(usize),
}

fn flatten(values: &[usize], sizes: &[usize]) -> usize {
    debug_assert_eq!(values.len(), sizes.len());
    let mut idx = 0;
    for (v, s) in values.iter().zip(sizes) {
        debug_assert!(v < s);
        idx = idx * s + v;
    }
    idx
}

fn unflatten(mut idx: usize, sizes: &[usize], out: &mut [usize]) {
    for pos in (0..sizes.len()).rev() {
        out[pos] = idx % sizes[pos];
        idx /= sizes[pos];
    }
}

/// Samples from a row using an externally supplied uniform variate, so two
/// draws with equal rows and equal variates coincide (the coupling used to
/// compare the ideal and actual passes). A zero-mass row falls back to the
/// uniform distribution.
pub(crate) fn pick(row: &[f64], t: f64) -> usize {
    let total: f64 = row.iter().sum();
    if total <= 0.0 {
        return ((t * row.len() as f64) as usize).min(row.len() - 1);
    }
    let target = t * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if target < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Exact joint distribution of `(X^N, Y^N, U^N)` under the ideal coupling,
/// stored as one dense table.
#[derive(Clone, Debug)]
pub struct IdealJoint {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    n: usize,
    probs: Vec<f64>,
}

/// Dense marginal over an ordered list of variables.
#[derive(Clone, Debug)]
pub struct Marginal {
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl Marginal {
    /// Alphabet sizes of the retained variables, in order.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Probability of a value tuple.
    pub fn prob(&self, values: &[usize]) -> f64 {
        self.probs[flatten(values, &self.sizes)]
    }

    /// The dense table.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

impl IdealJoint {
    fn var_pos(&self, var: Var) -> usize {
        match var {
            Var::X(i) => i,
            Var::Y(i) => self.n + i,
            Var::U(i) => 2 * self.n + i,
        }
    }

    /// Alphabet size of a variable.
    pub fn size_of(&self, var: Var) -> usize {
        self.sizes[self.var_pos(var)]
    }

    /// Extracts the value of `var` from a flat cell index.
    pub fn extract(&self, flat: usize, var: Var) -> usize {
        let pos = self.var_pos(var);
        (flat / self.strides[pos]) % self.sizes[pos]
    }

    /// The dense table over `[x_0.., y_0.., u_0..]`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Splits a flat cell index into `(outputs, inputs, auxiliaries)`.
    pub fn split(&self, flat: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut xs = vec![0; self.n];
        let mut ys = vec![0; self.n];
        let mut us = vec![0; self.n];
        for i in 0..self.n {
            xs[i] = self.extract(flat, Var::X(i));
            ys[i] = self.extract(flat, Var::Y(i));
            us[i] = self.extract(flat, Var::U(i));
        }
        (xs, ys, us)
    }

    /// Exact marginal over the given variables, in the given order.
    pub fn marginal(&self, vars: &[Var]) -> Marginal {
        let sizes: Vec<usize> = vars.iter().map(|&v| self.size_of(v)).collect();
        let total: usize = sizes.iter().product();
        let mut probs = vec![0.0; total];
        let mut vals = vec![0; vars.len()];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            for (slot, &v) in vals.iter_mut().zip(vars) {
                *slot = self.extract(flat, v);
            }
            probs[flatten(&vals, &sizes)] += p;
        }
        Marginal { sizes, probs }
    }
}

/// Conditional lookup table for one decoded position: the exact marginal
/// over `[prefix auxiliaries, u_k, tail auxiliaries, y_i]`.
#[derive(Clone, Debug)]
struct CondCache {
    marg: Marginal,
    prefix_len: usize,
    nu: usize,
    tail_len: usize,
}

impl CondCache {
    /// Writes the unnormalised row over `u_k` given the conditioning values
    /// into `out`; returns its sum.
    fn row_into(&self, prefix: &[usize], tail: &[usize], y: usize, out: &mut [f64]) -> f64 {
        debug_assert_eq!(prefix.len(), self.prefix_len);
        debug_assert_eq!(tail.len(), self.tail_len);
        debug_assert_eq!(out.len(), self.nu);
        let sizes = self.marg.sizes();
        let mut vals = Vec::with_capacity(sizes.len());
        vals.extend_from_slice(prefix);
        vals.push(0);
        vals.extend_from_slice(tail);
        vals.push(y);
        let base = flatten(&vals, sizes);
        let stride: usize = sizes[self.prefix_len + 1..].iter().product();
        let mut sum = 0.0;
        for (u, slot) in out.iter_mut().enumerate() {
            let p = self.marg.probs()[base + u * stride];
            *slot = p;
            sum += p;
        }
        sum
    }
}

/// One realisation of the coupled ideal/actual passes.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    /// Genie-assisted outputs `x^N`.
    pub ideal_xs: Vec<usize>,
    /// Genie-assisted inputs `y^N`.
    pub ideal_ys: Vec<usize>,
    /// Genie-assisted auxiliaries `u^N`.
    pub ideal_us: Vec<usize>,
    /// Actual outputs.
    pub actual_xs: Vec<usize>,
    /// Actual inputs.
    pub actual_ys: Vec<usize>,
    /// Actual auxiliaries.
    pub actual_us: Vec<usize>,
    /// Whether any uniquely decoded auxiliary differed from the true one.
    pub decode_mismatch: bool,
}

/// Monte-Carlo summary of the simulated scheme.
#[derive(Clone, Copy, Debug)]
pub struct SchemeStats {
    /// Fraction of trials whose actual `(x^N, y^N)` hit the error set.
    pub error_rate: f64,
    /// Standard error of `error_rate`.
    pub stderr: f64,
    /// Fraction of trials whose ideal `(x^N, y^N)` hit the error set.
    pub ideal_error_rate: f64,
    /// Fraction of trials with at least one unique-decoding mismatch.
    pub mismatch_rate: f64,
    /// Number of trials.
    pub trials: u64,
}

/// Value of the computable dominance bound.
#[derive(Clone, Copy, Debug)]
pub struct BoundReport {
    /// Expectation of `min{error indicator + sum of bound terms, 1}`.
    pub value: f64,
    /// Standard error (0 for exact enumeration).
    pub stderr: f64,
    /// Number of evaluations that hit a zero-probability conditioning event
    /// (each contributes the capped value 1).
    pub zero_denominator_events: u64,
}

/// A validated network + coding spec with all derived tables precomputed.
pub struct Adn {
    net: Network,
    spec: CodingSpec,
    joint: IdealJoint,
    /// `cond[i][j][k - j]` serves decoded position `j` of node `i`, chain
    /// step `k` (`j <= k < d_i`).
    cond: Vec<Vec<Vec<CondCache>>>,
}

impl Adn {
    /// Validates the pair and precomputes the ideal joint plus every
    /// conditional table the decoders and the bound need.
    pub fn new(net: Network, spec: CodingSpec) -> Result<Self> {
        let n = net.x_sizes.len();
        if n == 0 {
            return Err(Error::invalid("network with no nodes"));
        }
        if net.y_sizes.len() != n || net.channels.len() != n {
            return Err(Error::invalid("network field lengths disagree"));
        }
        if spec.origins.len() != n
            || spec.unique_counts.len() != n
            || spec.u_sizes.len() != n
            || spec.p_u.len() != n
            || spec.p_x.len() != n
        {
            return Err(Error::invalid("coding spec field lengths disagree"));
        }
        if net
            .x_sizes
            .iter()
            .chain(&net.y_sizes)
            .chain(&spec.u_sizes)
            .any(|&s| s == 0)
        {
            return Err(Error::invalid("alphabet sizes must be positive"));
        }
        let mut cells: usize = 1;
        for i in 0..n {
            cells = cells
                .checked_mul(net.x_sizes[i])
                .and_then(|c| c.checked_mul(net.y_sizes[i]))
                .and_then(|c| c.checked_mul(spec.u_sizes[i]))
                .filter(|&c| c <= MAX_JOINT_CELLS)
                .ok_or_else(|| {
                    Error::AlphabetOverflow(format!(
                        "ideal joint table would exceed {MAX_JOINT_CELLS} cells"
                    ))
                })?;
        }
        for i in 0..n {
            let d = spec.origins[i].len();
            if spec.unique_counts[i] > d {
                return Err(Error::invalid(format!(
                    "node {i}: unique count exceeds decode-list length"
                )));
            }
            let mut seen = vec![false; i];
            for &a in &spec.origins[i] {
                if a >= i {
                    return Err(Error::invalid(format!(
                        "node {i}: decode origin {a} is not an earlier node"
                    )));
                }
                if seen[a] {
                    return Err(Error::invalid(format!(
                        "node {i}: duplicate decode origin {a}"
                    )));
                }
                seen[a] = true;
            }
            let hist: usize = net.x_sizes[..i]
                .iter()
                .chain(&net.y_sizes[..i])
                .product();
            if net.channels[i].rows() != hist || net.channels[i].cols() != net.y_sizes[i] {
                return Err(Error::invalid(format!("node {i}: channel shape mismatch")));
            }
            let aux: usize = spec.origins[i][..spec.unique_counts[i]]
                .iter()
                .map(|&a| spec.u_sizes[a])
                .product();
            if spec.p_u[i].rows() != net.y_sizes[i] * aux || spec.p_u[i].cols() != spec.u_sizes[i]
            {
                return Err(Error::invalid(format!(
                    "node {i}: auxiliary kernel shape mismatch"
                )));
            }
            if spec.p_x[i].rows() != net.y_sizes[i] * spec.u_sizes[i] * aux
                || spec.p_x[i].cols() != net.x_sizes[i]
            {
                return Err(Error::invalid(format!("node {i}: output kernel shape mismatch")));
            }
        }

        let joint = build_ideal_joint(&net, &spec)?;
        let mut cond = Vec::with_capacity(n);
        for i in 0..n {
            let d = spec.origins[i].len();
            let dp = spec.unique_counts[i];
            let mut per_j = Vec::with_capacity(dp);
            for j in 0..dp {
                let mut per_k = Vec::with_capacity(d - j);
                for k in j..d {
                    let mut vars: Vec<Var> =
                        spec.origins[i][..j].iter().map(|&a| Var::U(a)).collect();
                    vars.push(Var::U(spec.origins[i][k]));
                    vars.extend(spec.origins[i][k + 1..].iter().map(|&a| Var::U(a)));
                    vars.push(Var::Y(i));
                    per_k.push(CondCache {
                        marg: joint.marginal(&vars),
                        prefix_len: j,
                        nu: spec.u_sizes[spec.origins[i][k]],
                        tail_len: d - k - 1,
                    });
                }
                per_j.push(per_k);
            }
            cond.push(per_j);
        }
        Ok(Adn { net, spec, joint, cond })
    }

    /// The network.
    pub fn network(&self) -> &Network {
        &self.net
    }

    /// The coding spec.
    pub fn coding_spec(&self) -> &CodingSpec {
        &self.spec
    }

    /// The exact ideal joint table.
    pub fn ideal_joint(&self) -> &IdealJoint {
        &self.joint
    }

    fn channel_row_index(&self, i: usize, xs: &[usize], ys: &[usize]) -> usize {
        let mut idx = 0;
        for m in 0..i {
            idx = idx * self.net.x_sizes[m] + xs[m];
        }
        for m in 0..i {
            idx = idx * self.net.y_sizes[m] + ys[m];
        }
        idx
    }

    fn p_u_row_index(&self, i: usize, y: usize, aux: &[usize]) -> usize {
        let mut idx = y;
        for (j, &a) in self.spec.origins[i][..self.spec.unique_counts[i]]
            .iter()
            .enumerate()
        {
            idx = idx * self.spec.u_sizes[a] + aux[j];
        }
        idx
    }

    fn p_x_row_index(&self, i: usize, y: usize, u: usize, aux: &[usize]) -> usize {
        let mut idx = y * self.spec.u_sizes[i] + u;
        for (j, &a) in self.spec.origins[i][..self.spec.unique_counts[i]]
            .iter()
            .enumerate()
        {
            idx = idx * self.spec.u_sizes[a] + aux[j];
        }
        idx
    }

    /// Draws one sample of `(x^N, y^N, u^N)` from the ideal joint by forward
    /// simulation (no codebooks involved).
    pub fn sample_ideal(&self, stream: &mut SeededStream) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let n = self.net.x_sizes.len();
        let (mut xs, mut ys, mut us) = (vec![0; n], vec![0; n], vec![0; n]);
        for i in 0..n {
            let hist = self.channel_row_index(i, &xs, &ys);
            ys[i] = pick(self.net.channels[i].row(hist), stream.draw_unit());
            let aux: Vec<usize> = self.spec.origins[i][..self.spec.unique_counts[i]]
                .iter()
                .map(|&a| us[a])
                .collect();
            let urow = self.spec.p_u[i].row(self.p_u_row_index(i, ys[i], &aux));
            us[i] = pick(urow, stream.draw_unit());
            let xrow = self.spec.p_x[i].row(self.p_x_row_index(i, ys[i], us[i], &aux));
            xs[i] = pick(xrow, stream.draw_unit());
        }
        (xs, ys, us)
    }

    /// Soft-decoding chain for decoded position `j` of node `i`: returns the
    /// selection pmf for the auxiliary of origin `origins[i][j]` given the
    /// node input `y`, the previously decoded values `prefix`, and the
    /// codebook processes.
    fn decode_pmf(
        &self,
        i: usize,
        j: usize,
        y: usize,
        prefix: &[usize],
        processes: &[ExpProcess],
    ) -> Result<Pmf> {
        let d = self.spec.origins[i].len();
        // Posterior over the flattened tail `[k+1 .. d)`; starts as the
        // point mass on the empty tail.
        let mut q: Vec<f64> = vec![1.0];
        let mut tail_sizes: Vec<usize> = Vec::new();
        let mut tail_vals = vec![0usize; d];
        for k in (j + 1..d).rev() {
            let cache = &self.cond[i][j][k - j];
            let nu = cache.nu;
            let s_tail = q.len();
            let mut table = vec![0.0; s_tail * nu];
            let mut row = vec![0.0; nu];
            for v in 0..s_tail {
                unflatten(v, &tail_sizes, &mut tail_vals[..tail_sizes.len()]);
                let sum = cache.row_into(prefix, &tail_vals[..tail_sizes.len()], y, &mut row);
                if sum > 0.0 {
                    for u in 0..nu {
                        table[v * nu + u] = q[v] * row[u] / sum;
                    }
                } else {
                    // Unreachable conditioning: spread q[v] uniformly.
                    for u in 0..nu {
                        table[v * nu + u] = q[v] / nu as f64;
                    }
                }
            }
            let jp = JointPmf::new(s_tail, nu, table)?;
            let refined = refine(&jp, &processes[self.spec.origins[i][k]])?;
            let mut next = vec![0.0; nu * s_tail];
            for u in 0..nu {
                for v in 0..s_tail {
                    next[u * s_tail + v] = refined.prob(v, u);
                }
            }
            q = next;
            tail_sizes.insert(0, nu);
        }
        let nu = self.spec.u_sizes[self.spec.origins[i][j]];
        let mut tilde = vec![0.0; nu];
        let cache = &self.cond[i][j][0];
        let mut row = vec![0.0; nu];
        for (v, &qv) in q.iter().enumerate() {
            if qv <= 0.0 {
                continue;
            }
            unflatten(v, &tail_sizes, &mut tail_vals[..tail_sizes.len()]);
            let sum = cache.row_into(prefix, &tail_vals[..tail_sizes.len()], y, &mut row);
            if sum > 0.0 {
                for u in 0..nu {
                    tilde[u] += qv * row[u] / sum;
                }
            } else {
                for slot in tilde.iter_mut() {
                    *slot += qv / nu as f64;
                }
            }
        }
        let total: f64 = tilde.iter().sum();
        if total <= 0.0 {
            return Ok(Pmf::uniform(nu));
        }
        for slot in tilde.iter_mut() {
            *slot /= total;
        }
        Pmf::new(tilde)
    }

    /// Runs the coupled ideal and actual passes once, sharing codebooks and
    /// channel/output noise between them.
    pub fn run_trial(&self, stream: &mut SeededStream) -> Result<TrialRecord> {
        let n = self.net.x_sizes.len();
        let processes: Vec<ExpProcess> = (0..n)
            .map(|i| ExpProcess::generate(self.spec.u_sizes[i], stream))
            .collect();
        let y_noise: Vec<f64> = (0..n).map(|_| stream.draw_unit()).collect();
        let x_noise: Vec<f64> = (0..n).map(|_| stream.draw_unit()).collect();

        let (mut ixs, mut iys, mut ius) = (vec![0; n], vec![0; n], vec![0; n]);
        for i in 0..n {
            let hist = self.channel_row_index(i, &ixs, &iys);
            iys[i] = pick(self.net.channels[i].row(hist), y_noise[i]);
            let aux: Vec<usize> = self.spec.origins[i][..self.spec.unique_counts[i]]
                .iter()
                .map(|&a| ius[a])
                .collect();
            let urow = self.spec.p_u[i].row(self.p_u_row_index(i, iys[i], &aux));
            ius[i] = select_from_row(&processes[i], urow)?;
            let xrow = self.spec.p_x[i].row(self.p_x_row_index(i, iys[i], ius[i], &aux));
            ixs[i] = pick(xrow, x_noise[i]);
        }

        let (mut axs, mut ays, mut aus) = (vec![0; n], vec![0; n], vec![0; n]);
        let mut mismatch = false;
        for i in 0..n {
            let hist = self.channel_row_index(i, &axs, &ays);
            ays[i] = pick(self.net.channels[i].row(hist), y_noise[i]);
            let dp = self.spec.unique_counts[i];
            let mut decoded = Vec::with_capacity(dp);
            for j in 0..dp {
                let pmf = self.decode_pmf(i, j, ays[i], &decoded, &processes)?;
                let hat = efr_argmin(&processes[self.spec.origins[i][j]], &pmf)?;
                if hat != ius[self.spec.origins[i][j]] {
                    mismatch = true;
                }
                decoded.push(hat);
            }
            let urow = self.spec.p_u[i].row(self.p_u_row_index(i, ays[i], &decoded));
            aus[i] = select_from_row(&processes[i], urow)?;
            let xrow = self.spec.p_x[i].row(self.p_x_row_index(i, ays[i], aus[i], &decoded));
            axs[i] = pick(xrow, x_noise[i]);
        }

        Ok(TrialRecord {
            ideal_xs: ixs,
            ideal_ys: iys,
            ideal_us: ius,
            actual_xs: axs,
            actual_ys: ays,
            actual_us: aus,
            decode_mismatch: mismatch,
        })
    }

    /// Simulates `trials` independent trials and reports empirical error
    /// statistics for the actual pass.
    pub fn run_scheme(&self, error: &ErrorSet, master_seed: u64, trials: u64) -> Result<SchemeStats> {
        if trials == 0 {
            return Err(Error::invalid("trial count must be positive"));
        }
        let records: Vec<(bool, bool, bool)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut stream = SeededStream::new(master_seed, t);
                let rec = self.run_trial(&mut stream)?;
                let actual_err = error.contains(&rec.actual_xs, &rec.actual_ys);
                let ideal_err = error.contains(&rec.ideal_xs, &rec.ideal_ys);
                Ok((actual_err, ideal_err, rec.decode_mismatch))
            })
            .collect::<Result<_>>()?;
        let flags: Vec<f64> = records
            .iter()
            .map(|&(a, _, _)| if a { 1.0 } else { 0.0 })
            .collect();
        let (error_rate, stderr) = mean_stderr(&flags);
        let ideal_error_rate =
            records.iter().filter(|&&(_, b, _)| b).count() as f64 / trials as f64;
        let mismatch_rate = records.iter().filter(|&&(_, _, c)| c).count() as f64 / trials as f64;
        Ok(SchemeStats {
            error_rate,
            stderr,
            ideal_error_rate,
            mismatch_rate,
            trials,
        })
    }

    /// The bound term for decoded position `j` of node `i`, evaluated at one
    /// sample `(x^N, y^N, u^N)` (the outputs are unused; the term depends
    /// only on inputs and auxiliaries). Returns the term and whether a
    /// zero-probability conditioning event was hit (in which case the term
    /// is infinite).
    pub fn bound_b(
        &self,
        i: usize,
        j: usize,
        _xs: &[usize],
        ys: &[usize],
        us: &[usize],
    ) -> (f64, bool) {
        let origins = &self.spec.origins[i];
        let d = origins.len();
        debug_assert!(j < self.spec.unique_counts[i]);
        let mut term = 1.0;
        for k in j + 1..d {
            term *= (self.spec.u_sizes[origins[k]] as f64).ln() + 1.0;
        }
        let mut zero_den = false;
        let prefix: Vec<usize> = origins[..j].iter().map(|&a| us[a]).collect();
        for k in j..d {
            let a = origins[k];
            let aux: Vec<usize> = self.spec.origins[a][..self.spec.unique_counts[a]]
                .iter()
                .map(|&m| us[m])
                .collect();
            let num = self.spec.p_u[a].row(self.p_u_row_index(a, ys[a], &aux))[us[a]];
            let cache = &self.cond[i][j][k - j];
            let tail: Vec<usize> = origins[k + 1..].iter().map(|&m| us[m]).collect();
            let mut row = vec![0.0; cache.nu];
            let sum = cache.row_into(&prefix, &tail, ys[i], &mut row);
            let ratio = if sum > 0.0 && row[us[a]] > 0.0 {
                num / (row[us[a]] / sum)
            } else {
                zero_den = true;
                f64::INFINITY
            };
            term *= ratio + if k > j { 1.0 } else { 0.0 };
            if !term.is_finite() {
                return (f64::INFINITY, zero_den);
            }
        }
        (term, zero_den)
    }

    fn capped_sum(&self, xs: &[usize], ys: &[usize], us: &[usize], err: bool) -> (f64, bool) {
        let mut s = if err { 1.0 } else { 0.0 };
        let mut flagged = false;
        'outer: for i in 0..self.net.x_sizes.len() {
            for j in 0..self.spec.unique_counts[i] {
                if s >= 1.0 {
                    break 'outer;
                }
                let (b, z) = self.bound_b(i, j, xs, ys, us);
                flagged |= z;
                s += b;
            }
        }
        (s.min(1.0), flagged)
    }

    /// The computable dominance bound
    /// `E[min{1{(X,Y) in error set} + sum of bound terms, 1}]` over the ideal
    /// joint. With `mc_samples = 0` the expectation is an exact sum over the
    /// dense table; otherwise it is a Monte-Carlo average of `mc_samples`
    /// forward simulations seeded by `seed`.
    pub fn bound_total(
        &self,
        error: &ErrorSet,
        mc_samples: u64,
        seed: u64,
    ) -> Result<BoundReport> {
        if mc_samples == 0 {
            let mut value = 0.0;
            let mut flags = 0u64;
            for (flat, &p) in self.joint.probs().iter().enumerate() {
                if p <= 0.0 {
                    continue;
                }
                let (xs, ys, us) = self.joint.split(flat);
                let err = error.contains(&xs, &ys);
                let (s, flagged) = self.capped_sum(&xs, &ys, &us, err);
                value += p * s;
                if flagged {
                    flags += 1;
                }
            }
            return Ok(BoundReport {
                value,
                stderr: 0.0,
                zero_denominator_events: flags,
            });
        }
        let evals: Vec<(f64, bool)> = (0..mc_samples)
            .into_par_iter()
            .map(|t| {
                let mut stream = SeededStream::new(seed, t);
                let (xs, ys, us) = self.sample_ideal(&mut stream);
                let err = error.contains(&xs, &ys);
                self.capped_sum(&xs, &ys, &us, err)
            })
            .collect();
        let values: Vec<f64> = evals.iter().map(|&(v, _)| v).collect();
        let (value, stderr) = mean_stderr(&values);
        let flags = evals.iter().filter(|&&(_, f)| f).count() as u64;
        Ok(BoundReport {
            value,
            stderr,
            zero_denominator_events: flags,
        })
    }
}

/// Selects a symbol from a codebook process under an unnormalised row
/// (uniform fallback when the row has no mass).
fn select_from_row(proc: &ExpProcess, row: &[f64]) -> Result<usize> {
    let total: f64 = row.iter().sum();
    let pmf = if total > 0.0 {
        Pmf::from_weights(row)?
    } else {
        Pmf::uniform(row.len())
    };
    efr_argmin(proc, &pmf)
}

fn build_ideal_joint(net: &Network, spec: &CodingSpec) -> Result<IdealJoint> {
    let n = net.x_sizes.len();
    let sizes: Vec<usize> = net
        .x_sizes
        .iter()
        .chain(&net.y_sizes)
        .chain(&spec.u_sizes)
        .copied()
        .collect();
    let total: usize = sizes.iter().product();
    let mut strides = vec![1usize; sizes.len()];
    for pos in (0..sizes.len() - 1).rev() {
        strides[pos] = strides[pos + 1] * sizes[pos + 1];
    }
    let joint = IdealJoint {
        sizes,
        strides,
        n,
        probs: vec![0.0; total],
    };
    let mut probs = vec![0.0; total];
    let (mut xs, mut ys, mut us) = (vec![0; n], vec![0; n], vec![0; n]);
    for flat in 0..total {
        for i in 0..n {
            xs[i] = joint.extract(flat, Var::X(i));
            ys[i] = joint.extract(flat, Var::Y(i));
            us[i] = joint.extract(flat, Var::U(i));
        }
        let mut p = 1.0;
        for i in 0..n {
            let mut hist = 0;
            for m in 0..i {
                hist = hist * net.x_sizes[m] + xs[m];
            }
            for m in 0..i {
                hist = hist * net.y_sizes[m] + ys[m];
            }
            p *= net.channels[i].row(hist)[ys[i]];
            if p <= 0.0 {
                break;
            }
            let mut urow = ys[i];
            for &a in &spec.origins[i][..spec.unique_counts[i]] {
                urow = urow * spec.u_sizes[a] + us[a];
            }
            p *= spec.p_u[i].row(urow)[us[i]];
            if p <= 0.0 {
                break;
            }
            let mut xrow = ys[i] * spec.u_sizes[i] + us[i];
            for &a in &spec.origins[i][..spec.unique_counts[i]] {
                xrow = xrow * spec.u_sizes[a] + us[a];
            }
            p *= spec.p_x[i].row(xrow)[xs[i]];
            if p <= 0.0 {
                break;
            }
        }
        if p > 0.0 {
            probs[flat] = p;
        }
    }
    Ok(IdealJoint { probs, ..joint })
}

// ---------------------------------------------------------------------------
// Preset builders. Each returns the network, the coding spec, and the error
// predicate for a classical setting, expressed in the node conventions of
// this module. Messages enter either through a node input (with the
// auxiliary deterministically tied to the observed message) or as a fresh
// uniform component of the auxiliary itself (an encoder-chosen bin index).
// ---------------------------------------------------------------------------

/// Point-to-point channel coding: node 0 observes a uniform message in
/// `[l]`, ties its auxiliary `(x, m)` to it with codeword law `p_x`, and
/// emits the codeword; node 1 observes the channel output (`channel` rows
/// are codeword symbols) and emits the decoded message.
pub fn build_p2p(
    p_x: &Pmf,
    channel: &CondTable,
    l: usize,
) -> Result<(Network, CodingSpec, ErrorSet)> {
    let nx = p_x.len();
    if channel.rows() != nx {
        return Err(Error::invalid("channel rows must match codeword alphabet"));
    }
    let ny = channel.cols();
    let net = Network {
        x_sizes: vec![nx, l],
        y_sizes: vec![l, ny],
        channels: vec![
            CondTable::from_fn(1, l, |_, _| 1.0 / l as f64)?,
            {
                let ch = channel.clone();
                CondTable::from_fn(nx * l, ny, move |r, c| ch.row(r / l)[c])?
            },
        ],
    };
    let px0 = p_x.clone();
    let spec = CodingSpec {
        origins: vec![vec![], vec![0]],
        unique_counts: vec![0, 1],
        u_sizes: vec![nx * l, 1],
        p_u: vec![
            CondTable::from_fn(l, nx * l, move |m, u| {
                if u % l == m {
                    px0.prob(u / l)
                } else {
                    0.0
                }
            })?,
            CondTable::from_fn(ny * (nx * l), 1, |_, _| 1.0)?,
        ],
        p_x: vec![
            CondTable::from_delta(l * (nx * l), nx, move |r| (r % (nx * l)) / l)?,
            CondTable::from_delta(ny * (nx * l), l, move |r| r % l)?,
        ],
    };
    let error = ErrorSet::new(move |xs, ys| xs[1] != ys[0]);
    Ok((net, spec, error))
}

/// Channel coding with state known at the encoder: node 0 observes
/// `(state, message)`, draws its auxiliary `(u, m)` tied to the message with
/// `u ~ p_u_given_s`, and emits `x_fn(u, s)`; `channel` rows are flattened
/// `[x, s]`. Node 1 decodes and emits the message estimate.
pub fn build_gelfand_pinsker(
    p_s: &Pmf,
    p_u_given_s: &CondTable,
    x_fn: impl Fn(usize, usize) -> usize + 'static,
    x_size: usize,
    channel: &CondTable,
    l: usize,
) -> Result<(Network, CodingSpec, ErrorSet)> {
    let ns = p_s.len();
    let nu = p_u_given_s.cols();
    if p_u_given_s.rows() != ns {
        return Err(Error::invalid("state-conditional rows must match state alphabet"));
    }
    if channel.rows() != x_size * ns {
        return Err(Error::invalid("channel rows must be flattened [x, s]"));
    }
    let ny = channel.cols();
    let ps0 = p_s.clone();
    let pus = p_u_given_s.clone();
    let ch = channel.clone();
    let net = Network {
        x_sizes: vec![x_size, l],
        y_sizes: vec![ns * l, ny],
        channels: vec![
            CondTable::from_fn(1, ns * l, move |_, sm| ps0.prob(sm / l) / l as f64)?,
            CondTable::from_fn(x_size * (ns * l), ny, move |r, c| {
                let x = r / (ns * l);
                let s = (r % (ns * l)) / l;
                ch.row(x * ns + s)[c]
            })?,
        ],
    };
    let spec = CodingSpec {
        origins: vec![vec![], vec![0]],
        unique_counts: vec![0, 1],
        u_sizes: vec![nu * l, 1],
        p_u: vec![
            CondTable::from_fn(ns * l, nu * l, move |sm, um| {
                if um % l == sm % l {
                    pus.row(sm / l)[um / l]
                } else {
                    0.0
                }
            })?,
            CondTable::from_fn(ny * (nu * l), 1, |_, _| 1.0)?,
        ],
        p_x: vec![
            CondTable::from_delta((ns * l) * (nu * l), x_size, move |r| {
                let sm = r / (nu * l);
                let um = r % (nu * l);
                x_fn(um / l, sm / l)
            })?,
            CondTable::from_delta(ny * (nu * l), l, move |r| r % l)?,
        ],
    };
    let error = ErrorSet::new(move |xs, ys| xs[1] != ys[0] % l);
    Ok((net, spec, error))
}

/// Lossy source coding with decoder side information: node 0 observes the
/// source, draws `(u, bin)` with a fresh uniform bin in `[l]`, and emits the
/// bin; node 1 observes `(bin, t)` with `t ~ p_t_given_x`, decodes, and
/// emits `z_fn(u, t)`. The error set is `dist(source, reconstruction) >
/// d_max`.
#[allow(clippy::too_many_arguments)]
pub fn build_wyner_ziv(
    p_x: &Pmf,
    p_t_given_x: &CondTable,
    p_u_given_x: &CondTable,
    z_fn: impl Fn(usize, usize) -> usize + 'static,
    z_size: usize,
    l: usize,
    dist: impl Fn(usize, usize) -> f64 + Send + Sync + 'static,
    d_max: f64,
) -> Result<(Network, CodingSpec, ErrorSet)> {
    let nx = p_x.len();
    let nt = p_t_given_x.cols();
    let nu = p_u_given_x.cols();
    if p_t_given_x.rows() != nx || p_u_given_x.rows() != nx {
        return Err(Error::invalid("source-conditional rows must match source alphabet"));
    }
    let px0 = p_x.clone();
    let ptx = p_t_given_x.clone();
    let pux = p_u_given_x.clone();
    let net = Network {
        x_sizes: vec![l, z_size],
        y_sizes: vec![nx, l * nt],
        channels: vec![
            CondTable::from_fn(1, nx, move |_, x| px0.prob(x))?,
            CondTable::from_fn(l * nx, l * nt, move |r, c| {
                let (m, x) = (r / nx, r % nx);
                if c / nt == m {
                    ptx.row(x)[c % nt]
                } else {
                    0.0
                }
            })?,
        ],
    };
    let spec = CodingSpec {
        origins: vec![vec![], vec![0]],
        unique_counts: vec![0, 1],
        u_sizes: vec![nu * l, 1],
        p_u: vec![
            CondTable::from_fn(nx, nu * l, move |x, um| pux.row(x)[um / l] / l as f64)?,
            CondTable::from_fn((l * nt) * (nu * l), 1, |_, _| 1.0)?,
        ],
        p_x: vec![
            CondTable::from_delta(nx * (nu * l), l, move |r| (r % (nu * l)) % l)?,
            CondTable::from_delta((l * nt) * (nu * l), z_size, move |r| {
                let y = r / (nu * l);
                let um = r % (nu * l);
                z_fn(um / l, y % nt)
            })?,
        ],
    };
    let error = ErrorSet::new(move |xs, ys| dist(ys[0], xs[1]) > d_max);
    Ok((net, spec, error))
}

/// Side-information source coding where the receiver wants a function of
/// source and side information: identical transport to [`build_wyner_ziv`]
/// but the error set compares the reconstruction against `f(x, t)`.
#[allow(clippy::too_many_arguments)]
pub fn build_coding_for_computing(
    p_x: &Pmf,
    p_t_given_x: &CondTable,
    p_u_given_x: &CondTable,
    z_fn: impl Fn(usize, usize) -> usize + 'static,
    z_size: usize,
    f: impl Fn(usize, usize) -> usize + Send + Sync + 'static,
    l: usize,
    dist: impl Fn(usize, usize) -> f64 + Send + Sync + 'static,
    d_max: f64,
) -> Result<(Network, CodingSpec, ErrorSet)> {
    let nt = p_t_given_x.cols();
    let (net, spec, _) = build_wyner_ziv(
        p_x,
        p_t_given_x,
        p_u_given_x,
        z_fn,
        z_size,
        l,
        |_, _| 0.0,
        f64::INFINITY,
    )?;
    let error = ErrorSet::new(move |xs, ys| dist(f(ys[0], ys[1] % nt), xs[1]) > d_max);
    Ok((net, spec, error))
}

/// Two-sender multiple access: nodes 0 and 1 tie `(codeword, message)`
/// auxiliaries to independent uniform messages; node 2 observes the channel
/// output (`channel` rows flattened `[x1, x2]`), decodes both (second sender
/// first), and emits the message pair `m1 * l2 + m2`.
pub fn build_mac(
    p_x1: &Pmf,
    p_x2: &Pmf,
    channel: &CondTable,
    l1: usize,
    l2: usize,
) -> Result<(Network, CodingSpec, ErrorSet)> {
    let n1 = p_x1.len();
    let n2 = p_x2.len();
    if channel.rows() != n1 * n2 {
        return Err(Error::invalid("channel rows must be flattened [x1, x2]"));
    }
    let ny = channel.cols();
    let ch = channel.clone();
    let pa = p_x1.clone();
    let pb = p_x2.clone();
    let net = Network {
        x_sizes: vec![n1, n2, l1 * l2],
        y_sizes: vec![l1, l2, ny],
        channels: vec![
            CondTable::from_fn(1, l1, |_, _| 1.0 / l1 as f64)?,
            CondTable::from_fn(n1 * l1, l2, |_, _| 1.0 / l2 as f64)?,
            CondTable::from_fn(n1 * n2 * l1 * l2, ny, move |r, c| {
                let x2 = (r / (l1 * l2)) % n2;
                let x1 = r / (n2 * l1 * l2);
                ch.row(x1 * n2 + x2)[c]
            })?,
        ],
    };
    let u1 = n1 * l1;
    let u2 = n2 * l2;
    let spec = CodingSpec {
        origins: vec![vec![], vec![], vec![1, 0]],
        unique_counts: vec![0, 0, 2],
        u_sizes: vec![u1, u2, 1],
        p_u: vec![
            CondTable::from_fn(l1, u1, move |m, u| if u % l1 == m { pa.prob(u / l1) } else { 0.0 })?,
            CondTable::from_fn(l2, u2, move |m, u| if u % l2 == m { pb.prob(u / l2) } else { 0.0 })?,
            CondTable::from_fn(ny * u2 * u1, 1, |_, _| 1.0)?,
        ],
        p_x: vec![
            CondTable::from_delta(l1 * u1, n1, move |r| (r % u1) / l1)?,
            CondTable::from_delta(l2 * u2, n2, move |r| (r % u2) / l2)?,
            CondTable::from_delta(ny * u2 * u1, l1 * l2, move |r| {
                let ua = r % u1;
                let ub = (r / u1) % u2;
                (ua % l1) * l2 + (ub % l2)
            })?,
        ],
    };
    let error = ErrorSet::new(move |xs, ys| xs[2] != ys[0] * l2 + ys[1]);
    Ok((net, spec, error))
}

/// Broadcast with private messages: node 0 ties `(u1, m1)` to message 1 and
/// forwards `u1`; node 1 observes `(u1, m2)` (the channel injects the fresh
/// second message), ties `(u2, m2)` with `u2 ~ P(u2 | u1)` from the joint,
/// and emits `x_fn(u1, u2)`; nodes 2 and 3 observe the two components of
/// `channel` (rows are inputs `x`, columns flattened `[y1, y2]`) and emit
/// their message estimates.
#[allow(clippy::too_many_arguments)]
pub fn build_broadcast(
    p_u1u2: &JointPmf,
    x_fn: impl Fn(usize, usize) -> usize + 'static,
    x_size: usize,
    channel: &CondTable,
    y1_size: usize,
    y2_size: usize,
    l1: usize,
    l2: usize,
) -> Result<(Network, CodingSpec, ErrorSet)> {
    let n1 = p_u1u2.nv();
    let n2 = p_u1u2.nu();
    if channel.rows() != x_size || channel.cols() != y1_size * y2_size {
        return Err(Error::invalid("channel must map x to flattened [y1, y2]"));
    }
    // Marginal of the first channel output per input.
    let mut marg1 = vec![0.0; x_size * y1_size];
    for x in 0..x_size {
        for y1 in 0..y1_size {
            for y2 in 0..y2_size {
                marg1[x * y1_size + y1] += channel.row(x)[y1 * y2_size + y2];
            }
        }
    }
    let ch = channel.clone();
    let m1c = marg1.clone();
    let net = Network {
        x_sizes: vec![n1, x_size, l1, l2],
        y_sizes: vec![l1, n1 * l2, y1_size, y2_size],
        channels: vec![
            CondTable::from_fn(1, l1, |_, _| 1.0 / l1 as f64)?,
            CondTable::from_fn(n1 * l1, n1 * l2, move |r, c| {
                let u1 = r / l1;
                if c / l2 == u1 {
                    1.0 / l2 as f64
                } else {
                    0.0
                }
            })?,
            CondTable::from_fn(n1 * x_size * l1 * (n1 * l2), y1_size, move |r, c| {
                let x = (r / (l1 * (n1 * l2))) % x_size;
                marg1[x * y1_size + c]
            })?,
            CondTable::from_fn(
                n1 * x_size * l1 * l1 * (n1 * l2) * y1_size,
                y2_size,
                move |r, c| {
                    let y3 = r % y1_size;
                    let x = (r / (l1 * l1 * (n1 * l2) * y1_size)) % x_size;
                    let den = m1c[x * y1_size + y3];
                    if den > 0.0 {
                        ch.row(x)[y3 * y2_size + c] / den
                    } else {
                        1.0 / y2_size as f64
                    }
                },
            )?,
        ],
    };
    let pj = p_u1u2.clone();
    let pj2 = p_u1u2.clone();
    let u1s = n1 * l1;
    let u2s = n2 * l2;
    let spec = CodingSpec {
        origins: vec![vec![], vec![], vec![0], vec![1]],
        unique_counts: vec![0, 0, 1, 1],
        u_sizes: vec![u1s, u2s, 1, 1],
        p_u: vec![
            CondTable::from_fn(l1, u1s, move |m, u| {
                if u % l1 == m {
                    pj.marginal_v(u / l1)
                } else {
                    0.0
                }
            })?,
            CondTable::from_fn(n1 * l2, u2s, move |r, u| {
                let (u1, m2) = (r / l2, r % l2);
                if u % l2 != m2 {
                    return 0.0;
                }
                let pv = pj2.marginal_v(u1);
                if pv > 0.0 {
                    pj2.prob(u1, u / l2) / pv
                } else {
                    1.0 / n2 as f64
                }
            })?,
            CondTable::from_fn(y1_size * u1s, 1, |_, _| 1.0)?,
            CondTable::from_fn(y2_size * u2s, 1, |_, _| 1.0)?,
        ],
        p_x: vec![
            CondTable::from_delta(l1 * u1s, n1, move |r| (r % u1s) / l1)?,
            CondTable::from_delta((n1 * l2) * u2s, x_size, move |r| {
                let u1 = (r / u2s) / l2;
                let u2 = (r % u2s) / l2;
                x_fn(u1, u2)
            })?,
            CondTable::from_delta(y1_size * u1s, l1, move |r| r % l1)?,
            CondTable::from_delta(y2_size * u2s, l2, move |r| r % l2)?,
        ],
    };
    let error = ErrorSet::new(move |xs, ys| xs[2] != ys[0] || xs[3] != ys[1] % l2);
    Ok((net, spec, error))
}

/// Three-node relay: node 0 ties `(x, m)` to the message and emits the
/// codeword; node 1 observes the first hop (`ch_relay` rows are codewords),
/// draws its auxiliary from `p_u_given_yr`, and emits `xr_fn(yr, u)`; node 2
/// observes the second hop (`ch_out` rows flattened `[x, xr, yr]`), decodes
/// the message auxiliary uniquely with the relay auxiliary soft-decoded, and
/// emits the message estimate.
#[allow(clippy::too_many_arguments)]
pub fn build_relay(
    p_x: &Pmf,
    ch_relay: &CondTable,
    p_u_given_yr: &CondTable,
    xr_fn: impl Fn(usize, usize) -> usize + 'static,
    xr_size: usize,
    ch_out: &CondTable,
    l: usize,
) -> Result<(Network, CodingSpec, ErrorSet)> {
    let nx = p_x.len();
    let nyr = ch_relay.cols();
    let nu = p_u_given_yr.cols();
    if ch_relay.rows() != nx {
        return Err(Error::invalid("first-hop rows must match codeword alphabet"));
    }
    if p_u_given_yr.rows() != nyr {
        return Err(Error::invalid("relay-conditional rows must match first-hop output"));
    }
    if ch_out.rows() != nx * xr_size * nyr {
        return Err(Error::invalid("second-hop rows must be flattened [x, xr, yr]"));
    }
    let ny = ch_out.cols();
    let px0 = p_x.clone();
    let chr = ch_relay.clone();
    let cho = ch_out.clone();
    let puyr = p_u_given_yr.clone();
    let u1 = nx * l;
    let net = Network {
        x_sizes: vec![nx, xr_size, l],
        y_sizes: vec![l, nyr, ny],
        channels: vec![
            CondTable::from_fn(1, l, |_, _| 1.0 / l as f64)?,
            CondTable::from_fn(nx * l, nyr, move |r, c| chr.row(r / l)[c])?,
            CondTable::from_fn(nx * xr_size * l * nyr, ny, move |r, c| {
                let yr = r % nyr;
                let xr = (r / (l * nyr)) % xr_size;
                let x = r / (xr_size * l * nyr);
                cho.row((x * xr_size + xr) * nyr + yr)[c]
            })?,
        ],
    };
    let spec = CodingSpec {
        origins: vec![vec![], vec![], vec![0, 1]],
        unique_counts: vec![0, 0, 1],
        u_sizes: vec![u1, nu, 1],
        p_u: vec![
            CondTable::from_fn(l, u1, move |m, u| if u % l == m { px0.prob(u / l) } else { 0.0 })?,
            CondTable::from_fn(nyr, nu, move |yr, u| puyr.row(yr)[u])?,
            CondTable::from_fn(ny * u1, 1, |_, _| 1.0)?,
        ],
        p_x: vec![
            CondTable::from_delta(l * u1, nx, move |r| (r % u1) / l)?,
            CondTable::from_delta(nyr * nu, xr_size, move |r| xr_fn(r / nu, r % nu))?,
            CondTable::from_delta(ny * u1, l, move |r| r % l)?,
        ],
    };
    let error = ErrorSet::new(move |xs, ys| xs[2] != ys[0]);
    Ok((net, spec, error))
}

/// Two-source cascade: node 0 observes the first source, draws `(u, m2)`
/// with a fresh bin in `[lt2]`, and forwards the pair; node 1 observes
/// `(u, x)`, draws `(v, m1)` with a fresh bin in `[lt1]`, and emits the
/// first-hop bin; node 2 observes `(second source, m1, m2)`, decodes both
/// encoder auxiliaries, forms `z_fn(u, v, y)` with a fresh bin in `[lt3]`,
/// and emits that bin; node 3 observes `(m2, m3)`, decodes with the first
/// encoder auxiliary soft, and emits the reconstruction. `p_uv_given_x` rows
/// are sources, columns flattened `[u, v]`. The error set is
/// `dist(x, y, reconstruction) > d_max`.
#[allow(clippy::too_many_arguments)]
pub fn build_cascade(
    p_xy: &JointPmf,
    p_uv_given_x: &CondTable,
    nu: usize,
    z_fn: impl Fn(usize, usize, usize) -> usize + 'static,
    z_size: usize,
    lt1: usize,
    lt2: usize,
    lt3: usize,
    dist: impl Fn(usize, usize, usize) -> f64 + Send + Sync + 'static,
    d_max: f64,
) -> Result<(Network, CodingSpec, ErrorSet)> {
    let nx = p_xy.nv();
    let nyy = p_xy.nu();
    if p_uv_given_x.rows() != nx || p_uv_given_x.cols() % nu != 0 {
        return Err(Error::invalid("auxiliary-pair rows must match first source"));
    }
    let nv = p_uv_given_x.cols() / nu;
    let u1 = nu * lt2;
    let u2 = nv * lt1;
    let u3 = z_size * lt3;
    let y3 = nyy * lt1 * lt2;
    let y4 = lt2 * lt3;
    let pxy = p_xy.clone();
    let pxy2 = p_xy.clone();
    let puv = p_uv_given_x.clone();
    let net = Network {
        x_sizes: vec![u1, lt1, lt3, z_size],
        y_sizes: vec![nx, nu * nx, y3, y4],
        channels: vec![
            CondTable::from_fn(1, nx, move |_, x| pxy.marginal_v(x))?,
            // Node 1 observes (u-component of x_0, y_0) noiselessly.
            CondTable::from_delta(u1 * nx, nu * nx, move |r| {
                let x0 = r / nx;
                let x = r % nx;
                (x0 / lt2) * nx + x
            })?,
            // Node 2 observes (second source, m1, m2).
            CondTable::from_fn(u1 * lt1 * nx * (nu * nx), y3, move |r, c| {
                let x = (r / (nu * nx)) % nx;
                let m1 = (r / (nx * nu * nx)) % lt1;
                let m2 = (r / (lt1 * nx * nu * nx)) % lt2;
                let y = c / (lt1 * lt2);
                let cm1 = (c / lt2) % lt1;
                let cm2 = c % lt2;
                if cm1 != m1 || cm2 != m2 {
                    return 0.0;
                }
                let px = pxy2.marginal_v(x);
                if px > 0.0 {
                    pxy2.prob(x, y) / px
                } else {
                    1.0 / nyy as f64
                }
            })?,
            // Node 3 observes (m2 from node 0's emitted pair, m3 = x_2).
            CondTable::from_delta(
                u1 * lt1 * lt3 * nx * (nu * nx) * y3,
                y4,
                move |r| {
                    let x2 = (r / (nx * (nu * nx) * y3)) % lt3;
                    let x0 = r / (lt1 * lt3 * nx * (nu * nx) * y3);
                    (x0 % lt2) * lt3 + x2
                },
            )?,
        ],
    };
    let puv2 = puv.clone();
    let spec = CodingSpec {
        origins: vec![vec![], vec![], vec![1, 0], vec![2, 0]],
        unique_counts: vec![0, 0, 2, 1],
        u_sizes: vec![u1, u2, u3, 1],
        p_u: vec![
            // (u, m2) with u from the pair marginal and a fresh bin.
            CondTable::from_fn(nx, u1, move |x, um| {
                let u = um / lt2;
                let mut p = 0.0;
                for v in 0..nv {
                    p += puv.row(x)[u * nv + v];
                }
                p / lt2 as f64
            })?,
            // (v, m1) with v conditioned on (u, x) and a fresh bin.
            CondTable::from_fn(nu * nx, u2, move |r, vm| {
                let (u, x) = (r / nx, r % nx);
                let mut den = 0.0;
                for v in 0..nv {
                    den += puv2.row(x)[u * nv + v];
                }
                let pv = if den > 0.0 {
                    puv2.row(x)[u * nv + vm / lt1] / den
                } else {
                    1.0 / nv as f64
                };
                pv / lt1 as f64
            })?,
            // (z, m3): z deterministic from decoded (v, m1), (u, m2) and y.
            {
                let zf = z_fn;
                CondTable::from_fn(y3 * u2 * u1, u3, move |r, zm| {
                    let um = r % u1;
                    let vm = (r / u1) % u2;
                    let yall = r / (u1 * u2);
                    let y = yall / (lt1 * lt2);
                    if zm / lt3 == zf(um / lt2, vm / lt1, y) {
                        1.0 / lt3 as f64
                    } else {
                        0.0
                    }
                })?
            },
            CondTable::from_fn(y4 * u3, 1, |_, _| 1.0)?,
        ],
        p_x: vec![
            CondTable::from_delta(nx * u1, u1, move |r| r % u1)?,
            CondTable::from_delta((nu * nx) * u2, lt1, move |r| (r % u2) % lt1)?,
            CondTable::from_delta(y3 * u3 * u2 * u1, lt3, move |r| {
                ((r / (u1 * u2)) % u3) % lt3
            })?,
            CondTable::from_delta(y4 * u3, z_size, move |r| (r % u3) / lt3)?,
        ],
    };
    let error = ErrorSet::new(move |xs, ys| {
        let y = ys[2] / (lt1 * lt2);
        dist(ys[0], y, xs[3]) > d_max
    });
    Ok((net, spec, error))
}

/// Canned demonstration instances for the seven classical layouts, with
/// small binary/quaternary alphabets sized so the dominance bound is
/// informative (strictly below 1) and exact enumeration stays cheap.
///
/// The same instances back the command-line `adn` subcommand and the
/// whole-scheme dominance checks, so every preset's computable bound has an
/// independent closed-form cross-check in the test suite.
pub mod presets {
    use super::*;

    /// Names accepted by [`build`], in canonical order.
    pub const NAMES: [&str; 7] = [
        "p2p",
        "gelfand_pinsker",
        "wyner_ziv",
        "mac",
        "broadcast",
        "relay",
        "cascade",
    ];

    fn bsc(flip: f64) -> Result<CondTable> {
        CondTable::new(2, 2, vec![1.0 - flip, flip, flip, 1.0 - flip])
    }

    /// Symmetric channel on a 4-symbol alphabet: stay with probability
    /// `1 - 3 flip`, move to each other symbol with probability `flip`.
    fn qsc(flip: f64) -> Result<CondTable> {
        CondTable::from_fn(4, 4, |r, c| if r == c { 1.0 - 3.0 * flip } else { flip })
    }

    fn p2p() -> Result<(Network, CodingSpec, ErrorSet)> {
        build_p2p(&Pmf::uniform(4), &qsc(0.04)?, 2)
    }

    fn gelfand_pinsker() -> Result<(Network, CodingSpec, ErrorSet)> {
        let p_s = Pmf::new(vec![0.6, 0.4])?;
        let p_us = CondTable::new(2, 2, vec![0.85, 0.15, 0.2, 0.8])?;
        let channel = CondTable::from_fn(4, 2, |r, c| {
            let (x, s) = (r / 2, r % 2);
            if c == (x ^ s) {
                0.92
            } else {
                0.08
            }
        })?;
        build_gelfand_pinsker(&p_s, &p_us, |u, _s| u, 2, &channel, 2)
    }

    fn wyner_ziv() -> Result<(Network, CodingSpec, ErrorSet)> {
        let p_x = Pmf::new(vec![0.35, 0.4, 0.25])?;
        let p_tx = CondTable::from_fn(3, 3, |r, c| if r == c { 0.8 } else { 0.1 })?;
        let p_ux = CondTable::from_fn(3, 2, |r, c| {
            let bit = usize::from(r == 2);
            if c == bit {
                0.9
            } else {
                0.1
            }
        })?;
        build_wyner_ziv(
            &p_x,
            &p_tx,
            &p_ux,
            |u, t| if u == 1 { 2 } else { t.min(1) },
            3,
            2,
            |x, z| if x == z { 0.0 } else { 1.0 },
            0.0,
        )
    }

    fn mac() -> Result<(Network, CodingSpec, ErrorSet)> {
        let channel = CondTable::from_fn(4, 3, |r, c| {
            let sum = r / 2 + r % 2;
            if c == sum {
                0.9
            } else if (c as i64 - sum as i64).abs() == 1 {
                if sum == 1 {
                    0.05
                } else {
                    0.1
                }
            } else {
                0.0
            }
        })?;
        build_mac(&Pmf::uniform(2), &Pmf::uniform(2), &channel, 2, 2)
    }

    fn broadcast() -> Result<(Network, CodingSpec, ErrorSet)> {
        let p_u1u2 = JointPmf::new(2, 2, vec![0.4, 0.1, 0.1, 0.4])?;
        let channel = CondTable::from_fn(2, 4, |x, c| {
            let (y1, y2) = (c / 2, c % 2);
            let p1 = if y1 == x { 0.94 } else { 0.06 };
            let p2 = if y2 == x { 0.88 } else { 0.12 };
            p1 * p2
        })?;
        build_broadcast(&p_u1u2, |u1, u2| u1 ^ u2, 2, &channel, 2, 2, 2, 2)
    }

    fn relay() -> Result<(Network, CodingSpec, ErrorSet)> {
        let ch_relay = bsc(0.08)?;
        let p_u_yr = CondTable::new(2, 2, vec![0.9, 0.1, 0.1, 0.9])?;
        // Second hop: the output flips the codeword with a noise level that
        // improves when the relay forwards a matching symbol.
        let ch_out = CondTable::from_fn(8, 2, |r, c| {
            let yr = r % 2;
            let xr = (r / 2) % 2;
            let x = r / 4;
            let flip = if xr == yr { 0.06 } else { 0.22 };
            if c == x {
                1.0 - flip
            } else {
                flip
            }
        })?;
        build_relay(&Pmf::uniform(2), &ch_relay, &p_u_yr, |_yr, u| u, 2, &ch_out, 2)
    }

    fn cascade() -> Result<(Network, CodingSpec, ErrorSet)> {
        let p_xy = JointPmf::new(2, 2, vec![0.4, 0.1, 0.15, 0.35])?;
        // Auxiliary pair: u a noisy copy of x, v = u with a rare flip.
        let p_uv_x = CondTable::from_fn(2, 4, |x, c| {
            let (u, v) = (c / 2, c % 2);
            let pu = if u == x { 0.85 } else { 0.15 };
            let pv = if v == u { 0.9 } else { 0.1 };
            pu * pv
        })?;
        build_cascade(
            &p_xy,
            &p_uv_x,
            2,
            |u, v, y| (u + v + y) % 2,
            2,
            2,
            2,
            2,
            |_x, _y, _z| 0.0,
            f64::INFINITY,
        )
    }

    /// Builds the named instance; errors on unknown names.
    pub fn build(name: &str) -> Result<(Network, CodingSpec, ErrorSet)> {
        match name {
            "p2p" => p2p(),
            "gelfand_pinsker" => gelfand_pinsker(),
            "wyner_ziv" => wyner_ziv(),
            "mac" => mac(),
            "broadcast" => broadcast(),
            "relay" => relay(),
            "cascade" => cascade(),
            other => Err(Error::invalid(format!(
                "unknown preset {other:?}; expected one of {NAMES:?}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{chi_square_critical, chi_square_statistic};

    fn bsc(flip: f64) -> CondTable {
        CondTable::new(2, 2, vec![1.0 - flip, flip, flip, 1.0 - flip]).unwrap()
    }

    /// Symmetric channel on a 4-symbol alphabet: stay with probability
    /// `1 - 3 * flip`, move to each other symbol with probability `flip`.
    fn qsc(flip: f64) -> CondTable {
        CondTable::from_fn(4, 4, |r, c| if r == c { 1.0 - 3.0 * flip } else { flip }).unwrap()
    }

    fn exact_expect_min(joint: &IdealJoint, f: impl Fn(usize) -> f64) -> f64 {
        joint
            .probs()
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p > 0.0)
            .map(|(flat, &p)| p * f(flat).min(1.0))
            .sum()
    }

    #[test]
    fn single_message_never_errs() {
        // With one message and a noiseless channel the decoder's posterior
        // is a point mass at the true auxiliary, so decoding is exact and no
        // error can occur.
        let (net, spec, err) = build_p2p(&Pmf::uniform(2), &bsc(0.0), 1).unwrap();
        let adn = Adn::new(net, spec).unwrap();
        let stats = adn.run_scheme(&err, 11, 2000).unwrap();
        assert_eq!(stats.error_rate, 0.0);
        assert_eq!(stats.mismatch_rate, 0.0);
    }

    #[test]
    fn noiseless_p2p_has_exact_mark_competition_odds() {
        // A noiseless binary channel reveals the codeword but not the
        // message, so the decoder compares the mark of the true auxiliary
        // (the minimum of two Exp(1) draws, hence Exp(2)) against an
        // independent Exp(1); the error probability is exactly 1/3.
        let (net, spec, err) = build_p2p(&Pmf::uniform(2), &bsc(0.0), 2).unwrap();
        let adn = Adn::new(net, spec).unwrap();
        let trials = 20_000;
        let stats = adn.run_scheme(&err, 11, trials).unwrap();
        assert_eq!(stats.ideal_error_rate, 0.0);
        assert_eq!(stats.error_rate, stats.mismatch_rate);
        let se = (2.0 / 9.0 / trials as f64).sqrt();
        assert!(
            (stats.error_rate - 1.0 / 3.0).abs() <= 3.0 * se,
            "error rate {} not within 3 standard errors of 1/3",
            stats.error_rate
        );
    }

    #[test]
    fn p2p_bound_matches_closed_form() {
        let (net, spec, err) = build_p2p(&Pmf::uniform(4), &qsc(0.04), 2).unwrap();
        let adn = Adn::new(net, spec).unwrap();
        let report = adn.bound_total(&err, 0, 0).unwrap();
        assert_eq!(report.zero_denominator_events, 0);
        // Closed form: E[min{L * 2^{-i(X; Y)}, 1}] over the codeword/channel
        // pair, with the information density from exact marginals.
        let joint = adn.ideal_joint();
        let mxy = joint.marginal(&[Var::X(0), Var::Y(1)]);
        let mx = joint.marginal(&[Var::X(0)]);
        let my = joint.marginal(&[Var::Y(1)]);
        let closed = exact_expect_min(joint, |flat| {
            let x = joint.extract(flat, Var::X(0));
            let y = joint.extract(flat, Var::Y(1));
            2.0 * mx.prob(&[x]) * my.prob(&[y]) / mxy.prob(&[x, y])
        });
        assert!((report.value - closed).abs() < 1e-12, "{} vs {closed}", report.value);
        assert!(report.value < 1.0);
    }

    #[test]
    fn p2p_empirical_error_dominated_by_bound() {
        let (net, spec, err) = build_p2p(&Pmf::uniform(4), &qsc(0.04), 2).unwrap();
        let adn = Adn::new(net, spec).unwrap();
        let bound = adn.bound_total(&err, 0, 0).unwrap();
        let stats = adn.run_scheme(&err, 23, 10_000).unwrap();
        assert!(
            stats.error_rate <= bound.value + 3.0 * stats.stderr,
            "{} > {} + 3 * {}",
            stats.error_rate,
            bound.value,
            stats.stderr
        );
        // The actual pass can only err when the ideal pass errs or decoding
        // slipped; this holds per trial, so it holds for the rates.
        assert!(stats.error_rate <= stats.ideal_error_rate + stats.mismatch_rate + 1e-12);
    }

    #[test]
    fn bound_monte_carlo_agrees_with_exact() {
        let (net, spec, err) = build_p2p(&Pmf::uniform(4), &qsc(0.06), 3).unwrap();
        let adn = Adn::new(net, spec).unwrap();
        let exact = adn.bound_total(&err, 0, 0).unwrap();
        let mc = adn.bound_total(&err, 40_000, 7).unwrap();
        assert!(
            (mc.value - exact.value).abs() <= 4.0 * mc.stderr.max(1e-4),
            "{} vs {}",
            mc.value,
            exact.value
        );
    }

    #[test]
    fn ideal_pass_matches_ideal_joint() {
        // The genie-assisted pass must reproduce the ideal joint even though
        // auxiliaries come from shared codebooks rather than fresh draws.
        let (net, spec, err) =
            build_p2p(&Pmf::new(vec![0.7, 0.3]).unwrap(), &bsc(0.12), 2).unwrap();
        let adn = Adn::new(net, spec).unwrap();
        let n = adn.network().x_sizes.len();
        let trials = 20_000u64;
        let mut counts = vec![0u64; adn.ideal_joint().probs().len()];
        for t in 0..trials {
            let mut stream = SeededStream::new(404, t);
            let rec = adn.run_trial(&mut stream).unwrap();
            let mut flat = 0;
            for (i, &s) in adn.ideal_joint().sizes.iter().enumerate() {
                let v = if i < n {
                    rec.ideal_xs[i]
                } else if i < 2 * n {
                    rec.ideal_ys[i - n]
                } else {
                    rec.ideal_us[i - 2 * n]
                };
                flat = flat * s + v;
            }
            counts[flat] += 1;
            // The actual pass can only err if the ideal pass errs or some
            // unique decode slipped; check it trial by trial.
            let a_err = err.contains(&rec.actual_xs, &rec.actual_ys);
            let i_err = err.contains(&rec.ideal_xs, &rec.ideal_ys);
            assert!(!a_err || i_err || rec.decode_mismatch);
        }
        let stat = chi_square_statistic(&counts, adn.ideal_joint().probs(), trials);
        let df = adn.ideal_joint().probs().iter().filter(|&&p| p > 0.0).count() - 1;
        let crit = chi_square_critical(1e-3, df);
        assert!(stat < crit, "chi-square {stat} >= {crit}");
    }

    #[test]
    fn gelfand_pinsker_bound_matches_closed_form() {
        // Binary state, binary auxiliary correlated with the state, channel
        // output corrupted by the state.
        let p_s = Pmf::new(vec![0.6, 0.4]).unwrap();
        let p_us = CondTable::new(2, 2, vec![0.85, 0.15, 0.2, 0.8]).unwrap();
        let channel = CondTable::from_fn(4, 2, |r, c| {
            let (x, s) = (r / 2, r % 2);
            let out = x ^ s;
            if c == out {
                0.92
            } else {
                0.08
            }
        })
        .unwrap();
        let (net, spec, err) =
            build_gelfand_pinsker(&p_s, &p_us, |u, _s| u, 2, &channel, 2).unwrap();
        let adn = Adn::new(net, spec).unwrap();
        let report = adn.bound_total(&err, 0, 0).unwrap();
        let joint = adn.ideal_joint();
        // The closed form uses the densities of the auxiliary *component*
        // (composite / l) against the state component and the channel
        // output; the message tie must not be counted as correlation.
        let l = 2usize;
        let (nu_c, ns_c, ny_c) = (2usize, 2usize, 2usize);
        let m_usy = joint.marginal(&[Var::U(0), Var::Y(0), Var::Y(1)]);
        let mut p_usy = vec![0.0; nu_c * ns_c * ny_c];
        let mut vals = [0usize; 3];
        for (idx, &q) in m_usy.probs().iter().enumerate() {
            if q <= 0.0 {
                continue;
            }
            unflatten(idx, m_usy.sizes(), &mut vals);
            p_usy[((vals[0] / l) * ns_c + vals[1] / l) * ny_c + vals[2]] += q;
        }
        let p_at = |u: usize, s: Option<usize>, y: Option<usize>| -> f64 {
            let mut acc = 0.0;
            for ss in 0..ns_c {
                for yy in 0..ny_c {
                    if s.map_or(true, |v| v == ss) && y.map_or(true, |v| v == yy) {
                        acc += p_usy[(u * ns_c + ss) * ny_c + yy];
                    }
                }
            }
            acc
        };
        let mut p_s_marg = vec![0.0; ns_c];
        let mut p_y_marg = vec![0.0; ny_c];
        for u in 0..nu_c {
            for s in 0..ns_c {
                p_s_marg[s] += p_at(u, Some(s), None);
            }
            for y in 0..ny_c {
                p_y_marg[y] += p_at(u, None, Some(y));
            }
        }
        let closed = exact_expect_min(joint, |flat| {
            let u = joint.extract(flat, Var::U(0)) / l;
            let s = joint.extract(flat, Var::Y(0)) / l;
            let y = joint.extract(flat, Var::Y(1));
            let pu = p_at(u, None, None);
            let i_uy = p_at(u, None, Some(y)) / (pu * p_y_marg[y]);
            let i_us = p_at(u, Some(s), None) / (pu * p_s_marg[s]);
            l as f64 / i_uy * i_us
        });
        assert!(
            (report.value - closed).abs() < 1e-12,
            "{} vs {closed}",
            report.value
        );
        assert!(report.value < 1.0);
        let stats = adn.run_scheme(&err, 91, 10_000).unwrap();
        assert!(stats.error_rate <= report.value + 3.0 * stats.stderr);
    }

    #[test]
    fn wyner_ziv_lossless_with_perfect_side_information() {
        // Side information equals the source and the reconstruction copies
        // the decoded auxiliary; the conditioning pins the auxiliary
        // exactly, so no trial can err.
        let p_x = Pmf::new(vec![0.5, 0.25, 0.25]).unwrap();
        let ident = CondTable::from_delta(3, 3, |x| x).unwrap();
        let (net, spec, err) = build_wyner_ziv(
            &p_x,
            &ident,
            &ident,
            |u, _t| u,
            3,
            2,
            |x, z| if x == z { 0.0 } else { 1.0 },
            0.0,
        )
        .unwrap();
        let adn = Adn::new(net, spec).unwrap();
        let stats = adn.run_scheme(&err, 5, 2000).unwrap();
        assert_eq!(stats.error_rate, 0.0);
    }

    #[test]
    fn wyner_ziv_bound_matches_closed_form() {
        let p_x = Pmf::new(vec![0.35, 0.4, 0.25]).unwrap();
        let p_tx = CondTable::from_fn(3, 3, |r, c| if r == c { 0.8 } else { 0.1 }).unwrap();
        let p_ux = CondTable::from_fn(3, 2, |r, c| {
            // Coarse binary description of the ternary source.
            let bit = usize::from(r == 2);
            if c == bit {
                0.9
            } else {
                0.1
            }
        })
        .unwrap();
        let l = 2usize;
        let (net, spec, err) = build_wyner_ziv(
            &p_x,
            &p_tx,
            &p_ux,
            |u, t| if u == 1 { 2 } else { t.min(1) },
            3,
            l,
            |x, z| if x == z { 0.0 } else { 1.0 },
            0.0,
        )
        .unwrap();
        let adn = Adn::new(net, spec).unwrap();
        let report = adn.bound_total(&err, 0, 0).unwrap();
        let joint = adn.ideal_joint();
        let nt = 3usize;
        // Closed form: error indicator plus the decoding term built from the
        // densities of the composite auxiliary against the source and the
        // side-information component of node 1's input.
        let m_u = joint.marginal(&[Var::U(0)]);
        let m_x = joint.marginal(&[Var::Y(0)]);
        let m_ux = joint.marginal(&[Var::U(0), Var::Y(0)]);
        let m_uy = joint.marginal(&[Var::U(0), Var::Y(1)]);
        let nu_comp = m_u.probs().len();
        let mut m_ut = vec![0.0; nu_comp * nt];
        for (idx, &q) in m_uy.probs().iter().enumerate() {
            m_ut[(idx / m_uy.sizes()[1]) * nt + idx % nt] += q;
        }
        let mut m_t = vec![0.0; nt];
        for (idx, &q) in joint.marginal(&[Var::Y(1)]).probs().iter().enumerate() {
            m_t[idx % nt] += q;
        }
        let closed = {
            let mut acc = 0.0;
            for (flat, &p) in joint.probs().iter().enumerate() {
                if p <= 0.0 {
                    continue;
                }
                let (xs, ys, us) = joint.split(flat);
                let (um, x, t) = (us[0], ys[0], ys[1] % nt);
                let ind = if err.contains(&xs, &ys) { 1.0 } else { 0.0 };
                let i_ut = m_ut[um * nt + t] / (m_u.prob(&[um]) * m_t[t]);
                let i_ux = m_ux.prob(&[um, x]) / (m_u.prob(&[um]) * m_x.prob(&[x]));
                acc += p * (ind + i_ux / (l as f64 * i_ut)).min(1.0);
            }
            acc
        };
        assert!(
            (report.value - closed).abs() < 1e-9,
            "{} vs {closed}",
            report.value
        );
        let stats = adn.run_scheme(&err, 17, 10_000).unwrap();
        assert!(stats.error_rate <= report.value + 3.0 * stats.stderr);
    }

    #[test]
    fn computing_error_set_compares_function_values() {
        let p_x = Pmf::uniform(2);
        let p_tx = bsc(0.2);
        let ident = CondTable::from_delta(2, 2, |x| x).unwrap();
        let (net, spec, err) = build_coding_for_computing(
            &p_x,
            &p_tx,
            &ident,
            |u, t| u ^ t,
            2,
            |x, t| x ^ t,
            2,
            |want, got| if want == got { 0.0 } else { 1.0 },
            0.0,
        )
        .unwrap();
        let adn = Adn::new(net, spec).unwrap();
        let report = adn.bound_total(&err, 0, 0).unwrap();
        let stats = adn.run_scheme(&err, 29, 10_000).unwrap();
        assert!(stats.error_rate <= report.value + 3.0 * stats.stderr);
        // With u = x decoded correctly, z = x xor t = f(x, t), so errors
        // require decoding mismatches.
        assert!(stats.error_rate <= stats.mismatch_rate + 1e-12);
    }

    #[test]
    fn mac_bound_matches_closed_form() {
        let (net, spec, err) = build_mac(&Pmf::uniform(2), &Pmf::uniform(2), &{
            // Noisy adder: y = x1 + x2 + noise in {0, 1, 2}.
            CondTable::from_fn(4, 3, |r, c| {
                let sum = r / 2 + r % 2;
                if c == sum {
                    0.9
                } else if (c as i64 - sum as i64).abs() == 1 {
                    if sum == 1 { 0.05 } else { 0.1 }
                } else {
                    0.0
                }
            })
            .unwrap()
        }, 2, 2)
        .unwrap();
        let adn = Adn::new(net, spec).unwrap();
        let report = adn.bound_total(&err, 0, 0).unwrap();
        let joint = adn.ideal_joint();
        let (l1, l2) = (2.0, 2.0);
        let gamma = (2.0f64 * 2.0).ln() + 1.0;
        let m12y = joint.marginal(&[Var::X(0), Var::X(1), Var::Y(2)]);
        let m1 = joint.marginal(&[Var::X(0)]);
        let m2 = joint.marginal(&[Var::X(1)]);
        let my = joint.marginal(&[Var::Y(2)]);
        let m1y = joint.marginal(&[Var::X(0), Var::Y(2)]);
        let m2y = joint.marginal(&[Var::X(1), Var::Y(2)]);
        let closed = exact_expect_min(joint, |flat| {
            let x1 = joint.extract(flat, Var::X(0));
            let x2 = joint.extract(flat, Var::X(1));
            let y = joint.extract(flat, Var::Y(2));
            let i_joint = m12y.prob(&[x1, x2, y]) / (m1.prob(&[x1]) * m2.prob(&[x2]) * my.prob(&[y]));
            // The senders are independent, so the conditional densities
            // simplify: i(x2; y | x1) = p(x1,x2,y) / (p(x1,y) p(x2)).
            let i_2g1 = m12y.prob(&[x1, x2, y]) / (m1y.prob(&[x1, y]) * m2.prob(&[x2]));
            let i_1g2 = m12y.prob(&[x1, x2, y]) / (m2y.prob(&[x2, y]) * m1.prob(&[x1]));
            gamma * l1 * l2 / i_joint + gamma * l2 / i_2g1 + l1 / i_1g2
        });
        assert!(
            (report.value - closed).abs() < 1e-9,
            "{} vs {closed}",
            report.value
        );
        let stats = adn.run_scheme(&err, 37, 10_000).unwrap();
        assert!(stats.error_rate <= report.value + 3.0 * stats.stderr);
    }

    #[test]
    fn broadcast_bound_matches_closed_form() {
        // Correlated auxiliaries, deterministic input map, product channel.
        let p_u1u2 = JointPmf::new(2, 2, vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let channel = CondTable::from_fn(2, 4, |x, c| {
            let (y1, y2) = (c / 2, c % 2);
            let p1 = if y1 == x { 0.94 } else { 0.06 };
            let p2 = if y2 == x { 0.88 } else { 0.12 };
            p1 * p2
        })
        .unwrap();
        let (net, spec, err) =
            build_broadcast(&p_u1u2, |u1, u2| u1 ^ u2, 2, &channel, 2, 2, 2, 2).unwrap();
        let adn = Adn::new(net, spec).unwrap();
        let report = adn.bound_total(&err, 0, 0).unwrap();
        let joint = adn.ideal_joint();
        let (l1, l2) = (2.0f64, 2.0f64);
        let m1y = joint.marginal(&[Var::U(0), Var::Y(2)]);
        let m1 = joint.marginal(&[Var::U(0)]);
        let my1 = joint.marginal(&[Var::Y(2)]);
        let m2y = joint.marginal(&[Var::U(1), Var::Y(3)]);
        let m2 = joint.marginal(&[Var::U(1)]);
        let my2 = joint.marginal(&[Var::Y(3)]);
        let m12 = joint.marginal(&[Var::U(0), Var::U(1)]);
        let closed = exact_expect_min(joint, |flat| {
            let u1 = joint.extract(flat, Var::U(0));
            let u2 = joint.extract(flat, Var::U(1));
            let y1 = joint.extract(flat, Var::Y(2));
            let y2 = joint.extract(flat, Var::Y(3));
            let i_11 = m1y.prob(&[u1, y1]) / (m1.prob(&[u1]) * my1.prob(&[y1]));
            let i_22 = m2y.prob(&[u2, y2]) / (m2.prob(&[u2]) * my2.prob(&[y2]));
            let i_12 = m12.prob(&[u1, u2]) / (m1.prob(&[u1]) * m2.prob(&[u2]));
            l1 / i_11 + l2 / i_22 * i_12
        });
        assert!(
            (report.value - closed).abs() < 1e-9,
            "{} vs {closed}",
            report.value
        );
        let stats = adn.run_scheme(&err, 53, 10_000).unwrap();
        assert!(stats.error_rate <= report.value + 3.0 * stats.stderr);
    }

    fn relay_instance() -> (Network, CodingSpec, ErrorSet) {
        let p_x = Pmf::uniform(2);
        let ch_relay = bsc(0.08);
        let p_u_yr = CondTable::new(2, 2, vec![0.9, 0.1, 0.1, 0.9]).unwrap();
        // Second hop: output flips the codeword with a noise level that
        // improves when the relay forwards a matching symbol.
        let ch_out = CondTable::from_fn(8, 2, |r, c| {
            let yr = r % 2;
            let xr = (r / 2) % 2;
            let x = r / 4;
            let flip = if xr == yr { 0.06 } else { 0.22 };
            if c == x {
                1.0 - flip
            } else {
                flip
            }
        })
        .unwrap();
        build_relay(&p_x, &ch_relay, &p_u_yr, |_yr, u| u, 2, &ch_out, 2).unwrap()
    }

    #[test]
    fn relay_bound_matches_closed_form() {
        let (net, spec, err) = relay_instance();
        let adn = Adn::new(net, spec).unwrap();
        let report = adn.bound_total(&err, 0, 0).unwrap();
        let joint = adn.ideal_joint();
        let l = 2.0f64;
        let gamma = 2.0f64.ln() + 1.0;
        let mxuy = joint.marginal(&[Var::X(0), Var::U(1), Var::Y(2)]);
        let mx = joint.marginal(&[Var::X(0)]);
        let muy = joint.marginal(&[Var::U(1), Var::Y(2)]);
        let mu = joint.marginal(&[Var::U(1)]);
        let my = joint.marginal(&[Var::Y(2)]);
        let muyr = joint.marginal(&[Var::U(1), Var::Y(1)]);
        let myr = joint.marginal(&[Var::Y(1)]);
        let closed = exact_expect_min(joint, |flat| {
            let x = joint.extract(flat, Var::X(0));
            let u = joint.extract(flat, Var::U(1));
            let y = joint.extract(flat, Var::Y(2));
            let yr = joint.extract(flat, Var::Y(1));
            let i_xuy = mxuy.prob(&[x, u, y]) / (mx.prob(&[x]) * muy.prob(&[u, y]));
            let i_uy = muy.prob(&[u, y]) / (mu.prob(&[u]) * my.prob(&[y]));
            let i_uyr = muyr.prob(&[u, yr]) / (mu.prob(&[u]) * myr.prob(&[yr]));
            gamma * l / i_xuy * (i_uyr / i_uy + 1.0)
        });
        assert!(
            (report.value - closed).abs() < 1e-9,
            "{} vs {closed}",
            report.value
        );
        let stats = adn.run_scheme(&err, 61, 10_000).unwrap();
        assert!(stats.error_rate <= report.value + 3.0 * stats.stderr);
    }

    #[test]
    fn cascade_bound_matches_closed_form() {
        let p_xy = JointPmf::new(2, 2, vec![0.4, 0.1, 0.15, 0.35]).unwrap();
        // Auxiliary pair: u a noisy copy of x, v = u xor a rare flip.
        let p_uv_x = CondTable::from_fn(2, 4, |x, c| {
            let (u, v) = (c / 2, c % 2);
            let pu = if u == x { 0.85 } else { 0.15 };
            let pv = if v == u { 0.9 } else { 0.1 };
            pu * pv
        })
        .unwrap();
        let (net, spec, err) = build_cascade(
            &p_xy,
            &p_uv_x,
            2,
            |u, v, y| (u + v + y) % 2,
            2,
            2,
            2,
            2,
            |_x, _y, _z| 0.0,
            f64::INFINITY,
        )
        .unwrap();
        let adn = Adn::new(net, spec).unwrap();
        let report = adn.bound_total(&err, 0, 0).unwrap();
        // Closed form from exact marginals of the ideal joint; the error
        // distortion is vacuous so only the decoding terms remain.
        let joint = adn.ideal_joint();
        let (lt1, lt2, lt3) = (2.0f64, 2.0f64, 2.0f64);
        let gamma = (2.0f64 * 2.0).ln() + 1.0;
        let nu = 2usize;
        let nv = 2usize;
        let nz = 2usize;
        // Components of the composite alphabets: u = us[0]/lt2,
        // v = us[1]/lt1, z = us[2]/lt3, x = ys[0], y = ys[2]/(lt1*lt2).
        let comp = |vars: &[Var], map: &dyn Fn(&[usize]) -> Vec<usize>, sizes: &[usize]| {
            let m = joint.marginal(vars);
            let mut probs = vec![0.0; sizes.iter().product()];
            let mut vals = vec![0; vars.len()];
            for (idx, &q) in m.probs().iter().enumerate() {
                if q <= 0.0 {
                    continue;
                }
                unflatten(idx, m.sizes(), &mut vals);
                probs[flatten(&map(&vals), sizes)] += q;
            }
            probs
        };
        // Marginals over reduced components.
        let m_uvy = comp(
            &[Var::U(0), Var::U(1), Var::Y(2)],
            &|v| vec![v[0] / 2, v[1] / 2, v[2] / 4],
            &[nu, nv, 2],
        );
        let m_uvx = comp(
            &[Var::U(0), Var::U(1), Var::Y(0)],
            &|v| vec![v[0] / 2, v[1] / 2, v[2]],
            &[nu, nv, 2],
        );
        let m_uv = comp(&[Var::U(0), Var::U(1)], &|v| vec![v[0] / 2, v[1] / 2], &[nu, nv]);
        let m_uy = comp(
            &[Var::U(0), Var::Y(2)],
            &|v| vec![v[0] / 2, v[1] / 4],
            &[nu, 2],
        );
        let m_ux = comp(
            &[Var::U(0), Var::Y(0)],
            &|v| vec![v[0] / 2, v[1]],
            &[nu, 2],
        );
        let m_u = comp(&[Var::U(0)], &|v| vec![v[0] / 2], &[nu]);
        let m_x = comp(&[Var::Y(0)], &|v| vec![v[0]], &[2]);
        let m_y = comp(&[Var::Y(2)], &|v| vec![v[0] / 4], &[2]);
        let m_zuvy = comp(
            &[Var::U(2), Var::U(0), Var::U(1), Var::Y(2)],
            &|v| vec![v[0] / 2, v[1] / 2, v[2] / 2, v[3] / 4],
            &[nz, nu, nv, 2],
        );
        let m_zu = comp(
            &[Var::U(2), Var::U(0)],
            &|v| vec![v[0] / 2, v[1] / 2],
            &[nz, nu],
        );
        let closed = exact_expect_min(joint, |flat| {
            let u = joint.extract(flat, Var::U(0)) / 2;
            let v = joint.extract(flat, Var::U(1)) / 2;
            let z = joint.extract(flat, Var::U(2)) / 2;
            let x = joint.extract(flat, Var::Y(0));
            let y = joint.extract(flat, Var::Y(2)) / 4;
            let p_uv_y = m_uvy[(u * nv + v) * 2 + y] / m_y[y];
            let p_uv_x = m_uvx[(u * nv + v) * 2 + x] / m_x[x];
            let i_uvx_y = p_uv_x / p_uv_y;
            let p_v_uy = m_uvy[(u * nv + v) * 2 + y] / m_uy[u * 2 + y];
            let p_v_ux = m_uvx[(u * nv + v) * 2 + x] / m_ux[u * 2 + x];
            let p_v_u = m_uv[u * nv + v] / m_u[u];
            let i_v_uy = p_v_uy / p_v_u;
            let i_v_ux = p_v_ux / p_v_u;
            let p_u_vy = m_uvy[(u * nv + v) * 2 + y]
                / (0..nu).map(|uu| m_uvy[(uu * nv + v) * 2 + y]).sum::<f64>();
            let i_u_vy = p_u_vy / m_u[u];
            let i_u_x = (m_ux[u * 2 + x] / m_x[x]) / m_u[u];
            let p_z_uvy = m_zuvy[((z * nu + u) * nv + v) * 2 + y]
                / (0..nz)
                    .map(|zz| m_zuvy[((zz * nu + u) * nv + v) * 2 + y])
                    .sum::<f64>();
            let p_z_u = m_zu[z * nu + u] / m_u[u];
            let i_z_vy_u = p_z_uvy / p_z_u;
            gamma / (lt1 * lt2) * i_uvx_y
                + gamma / lt1 * i_v_ux / i_v_uy
                + 1.0 / lt2 * i_u_x / i_u_vy
                + gamma / lt3 * i_z_vy_u * (i_u_x / lt2 + 1.0)
        });
        assert!(
            (report.value - closed).abs() < 1e-9,
            "{} vs {closed}",
            report.value
        );
        let stats = adn.run_scheme(&err, 71, 5000).unwrap();
        assert!(stats.error_rate <= report.value + 3.0 * stats.stderr);
    }

    #[test]
    fn rejects_malformed_specs() {
        let (net, mut spec, _) = build_p2p(&Pmf::uniform(2), &bsc(0.1), 2).unwrap();
        spec.origins[1] = vec![1];
        assert!(matches!(
            Adn::new(net, spec),
            Err(Error::InvalidParameter(_))
        ));

        let (net, mut spec, _) = build_p2p(&Pmf::uniform(2), &bsc(0.1), 2).unwrap();
        spec.unique_counts[1] = 2;
        assert!(Adn::new(net, spec).is_err());

        let bad = CondTable::new(1, 2, vec![0.7, 0.2]);
        assert!(bad.is_err());
    }

    #[test]
    fn rejects_oversized_joint() {
        // Per-node tables stay small but the joint product exceeds the cap:
        // 128 * 128 * 128 = 2^21 cells.
        let big = 1 << 7;
        let uni = 1.0 / big as f64;
        let net = Network {
            x_sizes: vec![big, big],
            y_sizes: vec![big, 1],
            channels: vec![
                CondTable::from_fn(1, big, |_, _| uni).unwrap(),
                CondTable::from_fn(big * big, 1, |_, _| 1.0).unwrap(),
            ],
        };
        let spec = CodingSpec {
            origins: vec![vec![], vec![]],
            unique_counts: vec![0, 0],
            u_sizes: vec![1, 1],
            p_u: vec![
                CondTable::from_fn(big, 1, |_, _| 1.0).unwrap(),
                CondTable::from_fn(1, 1, |_, _| 1.0).unwrap(),
            ],
            p_x: vec![
                CondTable::from_fn(big, big, |_, _| uni).unwrap(),
                CondTable::from_fn(1, big, |_, _| uni).unwrap(),
            ],
        };
        assert!(matches!(
            Adn::new(net, spec),
            Err(Error::AlphabetOverflow(_))
        ));
    }

    #[test]
    fn bound_term_flags_off_support_samples() {
        let (net, spec, _) = build_p2p(&Pmf::new(vec![1.0, 0.0]).unwrap(), &bsc(0.1), 2).unwrap();
        let adn = Adn::new(net, spec).unwrap();
        // Codeword symbol 1 has probability zero, so conditioning on it is a
        // zero-probability event.
        let (b, flagged) = adn.bound_b(1, 0, &[1, 0], &[0, 0], &[2 + 1, 0]);
        assert!(flagged);
        assert!(b.is_infinite());
    }

    #[test]
    fn scheme_is_reproducible() {
        let (net, spec, err) = relay_instance();
        let adn = Adn::new(net, spec).unwrap();
        let a = adn.run_scheme(&err, 99, 500).unwrap();
        let b = adn.run_scheme(&err, 99, 500).unwrap();
        assert_eq!(a.error_rate, b.error_rate);
        assert_eq!(a.mismatch_rate, b.mismatch_rate);
    }
}
