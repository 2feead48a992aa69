use std::fmt::Write as _;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::data::{mnist_test, mnist_train, synthetic_split, Dataset};
use crate::edgesim::{simulate, write_events, Simulation, EVENT_HEADER};
use crate::error::{contract, Result};
use crate::fedtrain::{
    mean_metrics, overhead_ratios, read_metrics, run_experiment, write_metrics_file, RoundMetrics, METRICS_HEADER,
};
use crate::models::{MNIST_CLASSES, MNIST_INPUT};

use super::config::{DataSource, ExperimentConfig};

/// Synthetic data is the same for every seed, like a fixed dataset.
const SYNTHETIC_DATA_SEED: u64 = 0x5359_4E54;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Replaces the config's seeds.
    pub seeds: Option<Vec<u64>>,
    pub out: PathBuf,
    /// Replaces the config's MNIST directory.
    pub data_dir: Option<PathBuf>,
    /// Forces synthetic data.
    pub synthetic: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seeds: None,
            out: PathBuf::from("runs"),
            data_dir: None,
            synthetic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmResult {
    pub name: String,
    pub per_seed: Vec<(u64, Vec<RoundMetrics>)>,
    pub mean: Vec<RoundMetrics>,
    pub simulations: Vec<(u64, Simulation)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub arm: String,
    pub final_accuracy: f64,
    pub comm_ratio: f64,
    pub comp_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub arms: Vec<ArmResult>,
    pub summary: Vec<SummaryRow>,
    /// Directory the CSVs were written to.
    pub out_dir: PathBuf,
}

impl RunReport {
    pub fn arm(&self, name: &str) -> Option<&ArmResult> {
        self.arms.iter().find(|a| a.name == name)
    }
}

pub fn load_data(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<(Dataset, Dataset)> {
    if opts.synthetic || cfg.data.source == DataSource::Synthetic {
        return synthetic_split(
            MNIST_CLASSES,
            cfg.data.synthetic_train_per_class,
            cfg.data.synthetic_test_per_class,
            MNIST_INPUT,
            SYNTHETIC_DATA_SEED,
        );
    }
    let dir = opts.data_dir.as_deref().unwrap_or(&cfg.data.dir);
    Ok((mnist_train(dir)?, mnist_test(dir)?))
}

/// Runs every arm for every seed, writes per-seed and seed-averaged CSVs
/// under `out/<name>/`, and summarizes each arm against the baseline arm.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport> {
    let (train, test) = load_data(cfg, opts)?;
    run_with_data(cfg, opts, &train, &test)
}

pub fn run_with_data(cfg: &ExperimentConfig, opts: &RunOptions, train: &Dataset, test: &Dataset) -> Result<RunReport> {
    let seeds = opts.seeds.clone().unwrap_or_else(|| cfg.seeds.clone());
    if seeds.is_empty() {
        return Err(contract("no seeds to run"));
    }
    let out_dir = opts.out.join(&cfg.name);
    std::fs::create_dir_all(&out_dir)?;
    std::fs::write(out_dir.join("resolved.toml"), cfg.resolved_toml())?;

    let mut arms = Vec::new();
    for arm in &cfg.arms {
        let mut per_seed = Vec::new();
        let mut simulations = Vec::new();
        for &seed in &seeds {
            let mut fed = arm.fed.clone();
            fed.seed = seed;
            let metrics = match &cfg.edgesim {
                Some(edge) => {
                    let sim = simulate(&fed, &edge.sim_config(&fed), train, test)?;
                    let mut file = File::create(out_dir.join(format!("{}_seed{seed}_events.csv", arm.name)))?;
                    write_events(&mut file, &sim.events)?;
                    let metrics = sim.rounds.iter().map(|r| r.metrics.clone()).collect();
                    simulations.push((seed, sim));
                    metrics
                }
                None => run_experiment(&fed, train, test)?.metrics,
            };
            write_metrics_file(&out_dir.join(format!("{}_seed{seed}.csv", arm.name)), &metrics)?;
            if let Some(last) = metrics.last() {
                eprintln!(
                    "{} seed {seed}: accuracy {:.4} after {} rounds",
                    arm.name, last.accuracy, last.round
                );
            }
            per_seed.push((seed, metrics));
        }
        let runs: Vec<Vec<RoundMetrics>> = per_seed.iter().map(|(_, m)| m.clone()).collect();
        let mean = mean_metrics(&runs)?;
        write_metrics_file(&out_dir.join(format!("{}_mean.csv", arm.name)), &mean)?;
        arms.push(ArmResult {
            name: arm.name.clone(),
            per_seed,
            mean,
            simulations,
        });
    }

    let base = arms
        .iter()
        .find(|a| a.name == cfg.baseline)
        .expect("baseline names an arm")
        .mean
        .clone();
    let summary = arms
        .iter()
        .map(|a| {
            let (comm_ratio, comp_ratio) = overhead_ratios(&a.mean, &base)?;
            Ok(SummaryRow {
                arm: a.name.clone(),
                final_accuracy: a.mean.last().map_or(0.0, |m| m.accuracy),
                comm_ratio,
                comp_ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunReport { arms, summary, out_dir })
}

/// Percentage truncated (not rounded) to two decimals: 1000/55000 prints
/// as 1.81%.
pub fn percent(ratio: f64) -> String {
    let hundredths = (ratio * 10_000.0 + 1e-9).floor();
    format!("{:.2}%", hundredths / 100.0)
}

pub fn format_summary(rows: &[SummaryRow], baseline: &str) -> String {
    let width = rows.iter().map(|r| r.arm.len()).max().unwrap_or(3).max(3);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<width$}  {:>9}  {:>10}  {:>10}",
        "arm", "accuracy", "comm_ratio", "comp_ratio"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<width$}  {:>9}  {:>10}  {:>10}",
            r.arm,
            percent(r.final_accuracy),
            percent(r.comm_ratio),
            percent(r.comp_ratio)
        );
    }
    let _ = writeln!(s, "ratios are cumulative overheads relative to `{baseline}`");
    s
}

/// Checks a CSV written by `run` against its schema and returns a one-line
/// description.
pub fn validate_csv(path: &Path) -> Result<String> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let header = text.lines().next().unwrap_or("");
    if header == METRICS_HEADER.join(",") {
        let rows = read_metrics(text.as_bytes())?;
        for w in rows.windows(2) {
            if w[1].round <= w[0].round
                || w[1].comm_cumulative < w[0].comm_cumulative
                || w[1].comp_cumulative < w[0].comp_cumulative
            {
                return Err(contract(format!("round {} breaks the cumulative ordering", w[1].round)));
            }
        }
        if rows.iter().any(|m| !(0.0..=1.0).contains(&m.accuracy)) {
            return Err(contract("accuracy outside [0, 1]"));
        }
        return Ok(format!("metrics: {} rows", rows.len()));
    }
    if header == EVENT_HEADER.join(",") {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut n = 0;
        for rec in r.records() {
            let rec = rec?;
            n += 1;
            let bad = || contract(format!("event row {n} is malformed"));
            if rec.len() != EVENT_HEADER.len() {
                return Err(bad());
            }
            rec[0].parse::<usize>().map_err(|_| bad())?;
            rec[1].parse::<u64>().map_err(|_| bad())?;
            rec[4].parse::<f64>().map_err(|_| bad())?;
            if rec[2] != rec[5] {
                return Err(bad());
            }
            if !rec[2].is_empty() {
                rec[2].parse::<usize>().map_err(|_| bad())?;
                rec[3].parse::<f64>().map_err(|_| bad())?;
                rec[6].parse::<f64>().map_err(|_| bad())?;
            }
        }
        return Ok(format!("events: {n} rows"));
    }
    Err(contract(format!("unrecognized CSV header `{header}`")))
}
