//! Drivers for the network-coding, secrecy, and timing subcommands.

use crate::{AdnArgs, BenchArgs, SecrecyArgs, SecrecyScheme};
use anyhow::{Context, Result};
use pfrsim::adn::{presets, Adn};
use pfrsim::dme::{self, DmeConfig, MechanismKind};
use pfrsim::secrecy::{
    hiding_bound, hiding_run, wiretap_bound, wiretap_run, ChannelSet, HidingSpec, WiretapSpec,
};
use serde::Deserialize;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

/// Fixed CSV header for the `adn` subcommand.
pub const ADN_HEADER: &str = "experiment,preset,seed,trials,bound,bound_stderr,\
zero_denominator_events,error_rate,error_stderr,ideal_error_rate,\
mismatch_rate,dominated,wall_time_s";

/// Fixed CSV header for the `secrecy` subcommand.
pub const SECRECY_HEADER: &str = "experiment,scheme,attack,seed,trials,bound,\
failure_rate,failure_stderr,mismatch_rate,secrecy_tv,tv_sampling_scale,\
objective,wall_time_s";

fn emit(csv: String, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdnFileConfig {
    presets: Option<Vec<String>>,
    trials: Option<u64>,
    seed: Option<u64>,
}

pub fn run_adn(args: &AdnArgs) -> Result<()> {
    let file_cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => AdnFileConfig::default(),
    };
    let mut names: Vec<String> = if !args.presets.is_empty() {
        args.presets.clone()
    } else {
        file_cfg
            .presets
            .unwrap_or_else(|| presets::NAMES.iter().map(|s| s.to_string()).collect())
    };
    if names.iter().any(|n| n == "all") {
        names = presets::NAMES.iter().map(|s| s.to_string()).collect();
    }
    let trials = args.trials.or(file_cfg.trials).unwrap_or(100_000);
    let seed = args.seed.or(file_cfg.seed).unwrap_or(2024);

    let mut csv = String::from(ADN_HEADER);
    csv.push('\n');
    for name in &names {
        let start = Instant::now();
        eprintln!("adn: preset={name} trials={trials}");
        let (net, spec, err) = presets::build(name)?;
        let adn = Adn::new(net, spec)?;
        let bound = adn.bound_total(&err, 0, 0)?;
        let stats = adn.run_scheme(&err, seed, trials)?;
        let dominated = stats.error_rate <= bound.value + 3.0 * stats.stderr;
        let _ = writeln!(
            csv,
            "adn,{},{},{},{},{},{},{},{},{},{},{},{}",
            name,
            seed,
            stats.trials,
            bound.value,
            bound.stderr,
            bound.zero_denominator_events,
            stats.error_rate,
            stats.stderr,
            stats.ideal_error_rate,
            stats.mismatch_rate,
            dominated,
            start.elapsed().as_secs_f64(),
        );
    }
    emit(csv, args.out.as_deref())
}

/// Column-stochastic binary symmetric channel table (`[y * 2 + x]`).
fn bsc(p: f64) -> Vec<f64> {
    vec![1.0 - p, p, p, 1.0 - p]
}

/// A watermark-style instance: a uniform bit is embedded as the emitted
/// symbol itself, the attacker may apply any of three nearby binary
/// symmetric channels, and the decoder is designed against the middle one.
/// Distortion limits are vacuous so failures are exactly decoding errors.
fn hiding_instance() -> HidingSpec {
    HidingSpec {
        n_se: 1,
        n_sd: 1,
        n_u: 2,
        n_x: 2,
        n_y: 2,
        p_state: vec![1.0],
        p_ux: vec![vec![0.5, 0.0, 0.0, 0.5]],
        reference: bsc(0.10),
        attacks: ChannelSet::new(2, 2, vec![bsc(0.05), bsc(0.10), bsc(0.15)])
            .expect("static tables are valid"),
        l: 2,
        d1: Box::new(|_, _| 0.0),
        max_d1: 0.0,
        d2: Box::new(|_, _| 0.0),
        max_d2: 0.0,
        x_hat: Box::new(|_, _| 0),
    }
}

/// Radius used to cover the hiding instance's attack family.
const HIDING_COVER_EPS: f64 = 0.1;

/// A binary wiretap instance: clean main channel, very noisy eavesdropper,
/// 16 codeword candidates per message batched in fours, and both channel
/// families allowed to wobble within total variation 0.05 of the reference.
fn wiretap_instance() -> WiretapSpec {
    WiretapSpec {
        n_u: 2,
        n_x: 2,
        n_y: 2,
        n_z: 2,
        p_ux: vec![0.5, 0.0, 0.0, 0.5],
        ref_decode: bsc(0.05),
        ref_eaves: bsc(0.40),
        decode_family: ChannelSet::new(2, 2, vec![bsc(0.05), bsc(0.08)])
            .expect("static tables are valid"),
        eaves_family: ChannelSet::new(2, 2, vec![bsc(0.40), bsc(0.35)])
            .expect("static tables are valid"),
        l: 2,
        candidates: 16,
        batch: 4,
        nu: 1.0,
        eps_decode: 0.05,
        eps_eaves: 0.05,
    }
}

pub fn run_secrecy(args: &SecrecyArgs) -> Result<()> {
    let mut csv = String::from(SECRECY_HEADER);
    csv.push('\n');

    if matches!(args.scheme, SecrecyScheme::Hiding | SecrecyScheme::Both) {
        let spec = hiding_instance();
        let bound = hiding_bound(&spec, HIDING_COVER_EPS)?;
        for attack in 0..spec.attacks.len() {
            let start = Instant::now();
            eprintln!("secrecy: scheme=hiding attack={attack} trials={}", args.trials);
            let stats = hiding_run(&spec, attack, args.trials, args.seed + attack as u64)?;
            let _ = writeln!(
                csv,
                "secrecy,hiding,{},{},{},{},{},{},{},,,{},{}",
                attack,
                args.seed,
                stats.trials,
                bound,
                stats.failure_rate,
                stats.failure_stderr,
                stats.mismatch_rate,
                stats.failure_rate,
                start.elapsed().as_secs_f64(),
            );
        }
    }

    if matches!(args.scheme, SecrecyScheme::Wiretap | SecrecyScheme::Both) {
        let spec = wiretap_instance();
        let bound = wiretap_bound(&spec)?;
        for d in 0..spec.decode_family.len() {
            for e in 0..spec.eaves_family.len() {
                let start = Instant::now();
                eprintln!(
                    "secrecy: scheme=wiretap attack={d}-{e} trials={}",
                    args.trials
                );
                let stats = wiretap_run(
                    &spec,
                    (d, e),
                    args.trials,
                    args.seed + 100 + (d * 10 + e) as u64,
                )?;
                let objective = stats.error_rate + spec.nu * stats.secrecy_tv;
                let _ = writeln!(
                    csv,
                    "secrecy,wiretap,{d}-{e},{},{},{},{},{},,{},{},{},{}",
                    args.seed,
                    stats.trials,
                    bound,
                    stats.error_rate,
                    stats.error_stderr,
                    stats.secrecy_tv,
                    stats.tv_sampling_scale,
                    objective,
                    start.elapsed().as_secs_f64(),
                );
            }
        }
    }

    emit(csv, args.out.as_deref())
}

pub fn run_bench(args: &BenchArgs) -> Result<()> {
    let cfg = DmeConfig {
        n: args.n,
        d: args.d,
        clip: 1.0,
        eps: args.eps,
        delta: 1e-6,
        alpha: args.alpha,
        chunk_dim: args.chunk,
        bit_budget: args.budget,
        trials: args.trials,
        seed: args.seed,
        mechanism: MechanismKind::PprGaussian,
    };
    eprintln!(
        "ppr-bench: alpha={} chunk={} eps={} budget={} trials={} (wall times are \
         machine-dependent; nothing is asserted)",
        args.alpha, args.chunk, args.eps, args.budget, args.trials
    );
    let stats = dme::bench_ppr_chunk(&cfg)?;
    println!(
        "chunk_dim,eps_effective,trials,mean_wall_s,stderr_wall_s,points_mean,\
         points_max,mean_log2_k,mean_bits"
    );
    println!(
        "{},{},{},{},{},{},{},{},{}",
        stats.chunk_dim,
        stats.eps_effective,
        stats.trials,
        stats.mean_wall_s,
        stats.stderr_wall_s,
        stats.points_mean,
        stats.points_max,
        stats.mean_log2_k,
        stats.mean_bits,
    );
    Ok(())
}
