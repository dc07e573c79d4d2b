//! Evaluation: open-world OWTA, closed-world HOTA, recall analyses and the
//! association top-1 benchmark.

mod assoc;
mod engine;
mod recall;
mod report;

pub use assoc::{assoc_top1_benchmark, AssocBenchConfig, AssocResult};
pub use engine::{compute_hota_closed, compute_owta, evaluate, match_detections, AlphaAccumulator, MatchRecord};
pub use recall::{
    detection_recall_analysis, recall_curve_csv, track_recall_curve, track_recall_csv, RecallRow, RecallTable,
    SizeBins,
};
pub use report::{Counts, EvalReport, MetricMeans, MetricSeries};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold applied to matching IoU in the detection and association benchmarks.
pub const RECALL_IOU: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// False positives are not counted (OWTA).
    #[default]
    Open,
    /// False positives lower detection accuracy (HOTA).
    Closed,
}

impl FromStr for EvalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(EvalMode::Open),
            "closed" => Ok(EvalMode::Closed),
            other => Err(Error::config(format!("mode must be open|closed, got {other:?}"))),
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Open => "open",
            EvalMode::Closed => "closed",
        })
    }
}

/// How per-video results combine into the dataset score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Accumulation {
    /// Counts and association sums pooled over all videos.
    #[default]
    Global,
    /// Metrics computed per video, then averaged over videos with ground truth.
    PerVideo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    /// Localization thresholds, strictly increasing, each in (0, 1).
    pub alphas: Vec<f64>,
    pub mode: EvalMode,
    /// In unknown mode, discard predictions matched to known-category ground truth.
    pub remove_other: bool,
    pub accumulation: Accumulation,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            alphas: default_alphas(),
            mode: EvalMode::Open,
            remove_other: true,
            accumulation: Accumulation::Global,
        }
    }
}

/// `0.05, 0.10, ..., 0.95`
pub fn default_alphas() -> Vec<f64> {
    (1..=19).map(|i| i as f64 / 20.0).collect()
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_alpha_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts[..] else {
        return Err(Error::config(format!("alpha grid must be start:stop:step, got {s:?}")));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::config(format!("bad number {x:?} in alpha grid")));
    let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
    if !(step > 0.0) || stop < start {
        return Err(Error::config(format!("alpha grid {s:?} is empty or has a non-positive step")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| start + i as f64 * step).map(|x| (x * 1e9).round() / 1e9).collect();
    validate_alphas(&grid)?;
    Ok(grid)
}

pub fn validate_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::config("alpha grid is empty"));
    }
    if let Some(a) = alphas.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
        return Err(Error::config(format!("alpha {a} outside (0, 1)")));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("alphas must be strictly increasing"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_alpha_grid("0.05:0.95:0.05").unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g, default_alphas());
        assert_eq!(parse_alpha_grid("0.5:0.5:0.1").unwrap(), vec![0.5]);
        assert!(parse_alpha_grid("0.5:0.1:0.1").is_err());
        assert!(parse_alpha_grid("0:0.5:0.1").is_err());
        assert!(parse_alpha_grid("0.1:0.5").is_err());
    }
}
