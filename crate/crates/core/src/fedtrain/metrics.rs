use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

pub const METRICS_HEADER: [&str; 5] = ["round", "accuracy", "loss", "comm_cumulative", "comp_cumulative"];

/// Per-round learning and overhead figures. Communication counts parameters
/// transmitted (down plus up); computation counts training samples processed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: usize,
    pub accuracy: f64,
    pub loss: f64,
    pub comm_cumulative: u64,
    pub comp_cumulative: u64,
}

/// `(comm_A / comm_B, comp_A / comp_B)` over two equally long runs.
pub fn overhead_ratios(a: &[RoundMetrics], b: &[RoundMetrics]) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(contract(format!(
            "runs differ in length: {} vs {} rounds",
            a.len(),
            b.len()
        )));
    }
    let (Some(la), Some(lb)) = (a.last(), b.last()) else {
        return Err(contract("overhead ratios need at least one round"));
    };
    if lb.comm_cumulative == 0 || lb.comp_cumulative == 0 {
        return Err(contract("reference run has zero overhead"));
    }
    Ok((
        la.comm_cumulative as f64 / lb.comm_cumulative as f64,
        la.comp_cumulative as f64 / lb.comp_cumulative as f64,
    ))
}

/// Round-by-round arithmetic mean across seeds. Counters use the floor of
/// their mean.
pub fn mean_metrics(runs: &[Vec<RoundMetrics>]) -> Result<Vec<RoundMetrics>> {
    let Some(first) = runs.first() else {
        return Ok(Vec::new());
    };
    if runs.iter().any(|r| r.len() != first.len()) {
        return Err(contract("cannot average runs of different lengths"));
    }
    let n = runs.len();
    Ok((0..first.len())
        .map(|i| {
            let rows: Vec<&RoundMetrics> = runs.iter().map(|r| &r[i]).collect();
            RoundMetrics {
                round: first[i].round,
                accuracy: rows.iter().map(|m| m.accuracy).sum::<f64>() / n as f64,
                loss: rows.iter().map(|m| m.loss).sum::<f64>() / n as f64,
                comm_cumulative: rows.iter().map(|m| m.comm_cumulative).sum::<u64>() / n as u64,
                comp_cumulative: rows.iter().map(|m| m.comp_cumulative).sum::<u64>() / n as u64,
            }
        })
        .collect())
}

pub fn write_metrics<W: Write>(out: W, metrics: &[RoundMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for m in metrics {
        w.serialize(m)?;
    }
    if metrics.is_empty() {
        w.write_record(METRICS_HEADER)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics_file(path: &Path, metrics: &[RoundMetrics]) -> Result<()> {
    write_metrics(std::fs::File::create(path)?, metrics)
}

pub fn read_metrics<R: Read>(input: R) -> Result<Vec<RoundMetrics>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != METRICS_HEADER {
        return Err(contract(format!("unexpected metrics header {header:?}")));
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<_>, _>>()?)
}
