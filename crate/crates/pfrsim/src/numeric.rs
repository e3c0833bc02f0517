//! Special functions and statistical helpers shared across the crate.
//!
//! Everything here is deterministic, pure, and platform-stable (no libm
//! dependence beyond the standard `f64` intrinsics).

use crate::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// The gamma function.
pub fn gamma_fn(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to relative tolerance
/// `rel_tol` (with a small absolute floor so that near-zero integrals
/// terminate).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    let tol = rel_tol * whole.abs().max(1e-300) + 1e-300;
    recurse(f, a, fa, b, fb, fm, whole, tol, 60)
}

/// Lower incomplete gamma function `γ(s, x) = ∫_0^x t^{s-1} e^{-t} dt` for
/// shape `s ∈ (0, 1]` and `x ≥ 0`.
///
/// The integrand is singular at the origin for `s < 1`; the substitution
/// `t = u^{1/s}` removes the singularity, giving
/// `γ(s, x) = (1/s) ∫_0^{x^s} exp(-u^{1/s}) du` with a smooth integrand.
pub fn lower_inc_gamma(s: f64, x: f64) -> f64 {
    assert!(s > 0.0 && s <= 1.0, "shape must lie in (0, 1]");
    assert!(x >= 0.0, "argument must be non-negative");
    if x == 0.0 {
        return 0.0;
    }
    let upper = x.powf(s);
    let inv_s = 1.0 / s;
    adaptive_simpson(&|u: f64| (-u.powf(inv_s)).exp(), 0.0, upper, 1e-12) * inv_s
}

/// Bernoulli-number coefficients `B_{2j} / (2j)!` for Euler–Maclaurin.
const EM_COEFFS: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
];

/// Riemann zeta function `ζ(s)` for real `s > 1`, via Euler–Maclaurin
/// summation with `N = 64` explicit terms (relative accuracy well below
/// 1e-12 on the range used here).
pub fn zeta(s: f64) -> Result<f64> {
    if s <= 1.0 {
        return Err(Error::invalid(format!("zeta requires s > 1, got {s}")));
    }
    let n = 64.0_f64;
    let mut sum = 0.0;
    for k in 1..64_u32 {
        sum += (k as f64).powf(-s);
    }
    sum += 0.5 * n.powf(-s);
    sum += n.powf(1.0 - s) / (s - 1.0);
    // Correction terms: B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-(s+2j-1)}.
    let mut rising = s; // s(s+1)...(s+2j-2), starting at j=1 with just `s`.
    let mut power = n.powf(-s - 1.0);
    for (j, coeff) in EM_COEFFS.iter().enumerate() {
        sum += coeff * rising * power;
        if j + 1 < EM_COEFFS.len() {
            rising *= (s + 2.0 * j as f64 + 1.0) * (s + 2.0 * j as f64 + 2.0);
            power /= n * n;
        }
    }
    Ok(sum)
}

/// Exact harmonic sum `H_n = Σ_{i=1}^n 1/i`.
pub fn harmonic(n: usize) -> f64 {
    // Summed smallest-first for floating-point accuracy.
    (1..=n).rev().map(|i| 1.0 / i as f64).sum()
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n > 1, "need at least two observations");
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    n.cdf(x)
}

/// One-sample Kolmogorov–Smirnov statistic `D_n = sup_x |F_n(x) - F(x)|`
/// against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    assert!(!samples.is_empty());
    samples.sort_by(|a, b| a.partial_cmp(b).expect("no NaN samples"));
    let n = samples.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i as f64 + 1.0) / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(xs: &mut [f64], ys: &mut [f64]) -> f64 {
    assert!(!xs.is_empty() && !ys.is_empty());
    xs.sort_by(|a, b| a.partial_cmp(b).expect("no NaN samples"));
    ys.sort_by(|a, b| a.partial_cmp(b).expect("no NaN samples"));
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0_usize, 0_usize);
    let mut d = 0.0_f64;
    while i < n && j < m {
        let (x, y) = (xs[i], ys[j]);
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        d = d.max(diff);
    }
    d
}

/// Asymptotic Kolmogorov–Smirnov critical constant `c(sig) = sqrt(-ln(sig/2)/2)`.
///
/// One-sample critical value at size `n` is `c / sqrt(n)`; two-sample at sizes
/// `(n, m)` is `c * sqrt((n + m) / (n m))`.
pub fn ks_critical_constant(significance: f64) -> f64 {
    assert!(significance > 0.0 && significance < 1.0);
    (-(significance / 2.0).ln() / 2.0).sqrt()
}

/// One-sample KS critical value at the given significance and sample size.
pub fn ks_critical_one_sample(significance: f64, n: usize) -> f64 {
    ks_critical_constant(significance) / (n as f64).sqrt()
}

/// Two-sample KS critical value at the given significance and sample sizes.
pub fn ks_critical_two_sample(significance: f64, n: usize, m: usize) -> f64 {
    ks_critical_constant(significance) * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Chi-square goodness-of-fit statistic for observed counts against expected
/// probabilities. Cells with zero expectation must have zero counts.
pub fn chi_square_statistic(observed: &[u64], expected_probs: &[f64], total: u64) -> f64 {
    assert_eq!(observed.len(), expected_probs.len());
    let mut stat = 0.0;
    for (&o, &p) in observed.iter().zip(expected_probs) {
        let e = p * total as f64;
        if e > 0.0 {
            let diff = o as f64 - e;
            stat += diff * diff / e;
        } else {
            assert_eq!(o, 0, "observed mass in a zero-probability cell");
        }
    }
    stat
}

/// Upper quantile of the chi-square distribution with `df` degrees of freedom:
/// returns `q` with `P(X > q) = significance`.
pub fn chi_square_critical(significance: f64, df: usize) -> f64 {
    assert!(df >= 1);
    let dist = ChiSquared::new(df as f64).expect("valid dof");
    dist.inverse_cdf(1.0 - significance)
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, iters: u32) -> (f64, f64) {
    assert!(a < b);
    let inv_phi = 0.618_033_988_749_894_8_f64;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Coarse grid scan followed by golden-section refinement, for functions that
/// are smooth but whose unimodality we do not want to rely on globally.
/// Returns `(argmin, min)` over `[a, b]`.
pub fn grid_then_golden<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, grid: usize) -> (f64, f64) {
    assert!(a < b && grid >= 3);
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    let step = (b - a) / (grid as f64 - 1.0);
    for i in 0..grid {
        let x = a + step * i as f64;
        let v = f(x);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = a + step * best_i.saturating_sub(1) as f64;
    let hi = (a + step * (best_i + 1) as f64).min(b);
    golden_min(f, lo, hi, 120)
}

/// Scalar bisection for a continuous monotone function: finds `x ∈ [lo, hi]`
/// with `f(x) = 0`, assuming `f(lo)` and `f(hi)` have opposite signs.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: u32) -> f64 {
    let flo = f(lo);
    let fhi = f(hi);
    assert!(
        flo == 0.0 || fhi == 0.0 || (flo < 0.0) != (fhi < 0.0),
        "bisection bracket does not straddle a root"
    );
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    let sign_lo = flo < 0.0;
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
