//! Grid configs, CSV emission, and the `dme` / `metric` drivers.

use crate::GridArgs;
use anyhow::{bail, Context, Result};
use pfrsim::dme::{self, DmeConfig, MechanismKind, TrialReport};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Fixed CSV header shared by the `dme` and `metric` subcommands. The
/// column order is stable (golden-tested); optional columns are left empty
/// when a transport does not report them.
pub const REPORT_HEADER: &str = "experiment,seed,mechanism,n,d,clip,eps,delta,\
alpha,chunk_dim,bit_budget,trials,eps_effective,mse,mse_stderr,\
mean_bits_per_client,bits_bound,central_eps,central_delta,local_eps,\
local_delta,metric_coeff,noise_std,points_mean,points_max,wall_time_s";

mod defaults {
    use pfrsim::dme::MechanismKind;

    pub fn n() -> u64 {
        500
    }
    pub fn d() -> usize {
        1000
    }
    pub fn clip() -> f64 {
        1.0
    }
    pub fn delta() -> f64 {
        1e-6
    }
    pub fn alpha() -> f64 {
        2.0
    }
    pub fn chunk_dim() -> usize {
        2
    }
    pub fn trials() -> usize {
        200
    }
    pub fn seed() -> u64 {
        2024
    }
    pub fn mechanisms() -> Vec<MechanismKind> {
        vec![MechanismKind::PprGaussian, MechanismKind::Csgm]
    }
}

/// JSON schema of a grid run. Scalar fields default to the reference layout
/// (500 clients, 1000 dimensions, unit clip, delta 1e-6, alpha 2, chunk
/// width 2, 200 trials, seed 2024); `eps_grid` and `budgets` are required.
/// The `dme` subcommand runs the Cartesian product mechanisms x eps_grid x
/// budgets in that nesting order; `metric` ignores `mechanisms` and emits a
/// compressed/baseline row pair per (eps, budget) point.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "defaults::n")]
    pub n: u64,
    #[serde(default = "defaults::d")]
    pub d: usize,
    #[serde(default = "defaults::clip")]
    pub clip: f64,
    #[serde(default = "defaults::delta")]
    pub delta: f64,
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::chunk_dim")]
    pub chunk_dim: usize,
    #[serde(default = "defaults::trials")]
    pub trials: usize,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    pub eps_grid: Vec<f64>,
    pub budgets: Vec<u64>,
    #[serde(default = "defaults::mechanisms")]
    pub mechanisms: Vec<MechanismKind>,
}

impl GridConfig {
    fn load(path: &Path, seed_override: Option<u64>) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: GridConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(seed) = seed_override {
            cfg.seed = seed;
        }
        if cfg.eps_grid.is_empty() || cfg.budgets.is_empty() {
            bail!("config needs at least one eps_grid entry and one budget");
        }
        Ok(cfg)
    }

    fn point(&self, mechanism: MechanismKind, eps: f64, bit_budget: u64) -> DmeConfig {
        DmeConfig {
            n: self.n,
            d: self.d,
            clip: self.clip,
            eps,
            delta: self.delta,
            alpha: self.alpha,
            chunk_dim: self.chunk_dim,
            bit_budget,
            trials: self.trials,
            seed: self.seed,
            mechanism,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One CSV row in the [`REPORT_HEADER`] column order. Numbers use Rust's
/// shortest round-trip notation with a `.` decimal separator; rows end with
/// a bare newline.
fn report_row(experiment: &str, cfg: &DmeConfig, rep: &TrialReport) -> String {
    let mut row = String::new();
    let _ = writeln!(
        row,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        experiment,
        cfg.seed,
        rep.mechanism.as_str(),
        cfg.n,
        cfg.d,
        cfg.clip,
        cfg.eps,
        cfg.delta,
        cfg.alpha,
        cfg.chunk_dim,
        cfg.bit_budget,
        rep.trials,
        rep.eps_effective,
        rep.mse,
        rep.mse_stderr,
        rep.mean_bits_per_client,
        opt(rep.bits_bound),
        opt(rep.central_eps),
        opt(rep.central_delta),
        opt(rep.local_eps),
        opt(rep.local_delta),
        opt(rep.metric_coeff),
        opt(rep.noise_std),
        rep.points_mean,
        rep.points_max,
        rep.wall_time_s,
    );
    row
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    config: &'a GridConfig,
    rows: &'a [TrialReport],
}

fn emit(
    experiment: &str,
    cfg: &GridConfig,
    rows: &[(DmeConfig, TrialReport)],
    args: &GridArgs,
) -> Result<()> {
    let mut csv = String::from(REPORT_HEADER);
    csv.push('\n');
    for (point, rep) in rows {
        csv.push_str(&report_row(experiment, point, rep));
    }
    fs::write(&args.out, csv).with_context(|| format!("writing {}", args.out.display()))?;

    let reports: Vec<TrialReport> = rows.iter().map(|(_, r)| r.clone()).collect();
    let summary = Summary {
        experiment,
        config: cfg,
        rows: &reports,
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    match &args.summary {
        Some(path) => {
            fs::write(path, json).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{json}"),
    }
    Ok(())
}

pub fn run_dme(args: &GridArgs) -> Result<()> {
    let cfg = GridConfig::load(&args.config, args.seed)?;
    for mech in &cfg.mechanisms {
        if !matches!(mech, MechanismKind::PprGaussian | MechanismKind::Csgm) {
            bail!(
                "mechanism {} belongs to the metric experiment; use the `metric` subcommand",
                mech.as_str()
            );
        }
    }
    let mut rows = Vec::new();
    for &mech in &cfg.mechanisms {
        for &eps in &cfg.eps_grid {
            for &budget in &cfg.budgets {
                let point = cfg.point(mech, eps, budget);
                eprintln!(
                    "dme: mechanism={} eps={} budget={} trials={}",
                    mech.as_str(),
                    eps,
                    budget,
                    point.trials
                );
                let rep = match mech {
                    MechanismKind::PprGaussian => dme::run_ppr_dme(&point)?,
                    MechanismKind::Csgm => dme::run_csgm_dme(&point)?,
                    _ => unreachable!("filtered above"),
                };
                rows.push((point, rep));
            }
        }
    }
    emit("dme", &cfg, &rows, args)
}

pub fn run_metric(args: &GridArgs) -> Result<()> {
    let cfg = GridConfig::load(&args.config, args.seed)?;
    let mut rows = Vec::new();
    for &eps in &cfg.eps_grid {
        for &budget in &cfg.budgets {
            let point = cfg.point(MechanismKind::PprLaplace, eps, budget);
            eprintln!("metric: eps={} budget={} trials={}", eps, budget, point.trials);
            let (compressed, baseline) = dme::run_metric_experiment(&point)?;
            rows.push((point.clone(), compressed));
            rows.push((point, baseline));
        }
    }
    emit("metric", &cfg, &rows, args)
}
