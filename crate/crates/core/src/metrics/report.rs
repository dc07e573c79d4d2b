use serde::{Deserialize, Serialize};

use super::EvalMode;
use crate::datamodel::SplitMode;

/// One value per alpha for each metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    #[serde(rename = "DetRe")]
    pub det_re: Vec<f64>,
    #[serde(rename = "AssA")]
    pub ass_a: Vec<f64>,
    #[serde(rename = "AssRe")]
    pub ass_re: Vec<f64>,
    #[serde(rename = "AssPr")]
    pub ass_pr: Vec<f64>,
    #[serde(rename = "OWTA")]
    pub owta: Vec<f64>,
    #[serde(rename = "DetA", default, skip_serializing_if = "Option::is_none")]
    pub det_a: Option<Vec<f64>>,
    #[serde(rename = "HOTA", default, skip_serializing_if = "Option::is_none")]
    pub hota: Option<Vec<f64>>,
}

/// Arithmetic means of [`MetricSeries`] over the alpha grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricMeans {
    #[serde(rename = "DetRe")]
    pub det_re: f64,
    #[serde(rename = "AssA")]
    pub ass_a: f64,
    #[serde(rename = "AssRe")]
    pub ass_re: f64,
    #[serde(rename = "AssPr")]
    pub ass_pr: f64,
    #[serde(rename = "OWTA")]
    pub owta: f64,
    #[serde(rename = "DetA", default, skip_serializing_if = "Option::is_none")]
    pub det_a: Option<f64>,
    #[serde(rename = "HOTA", default, skip_serializing_if = "Option::is_none")]
    pub hota: Option<f64>,
}

/// Raw accumulators. Open mode carries nothing that depends on unmatched
/// predictions, so extra false-positive tracks cannot change it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub gt_detections: u64,
    pub gt_tracks: u64,
    #[serde(rename = "TP")]
    pub tp: Vec<u64>,
    #[serde(rename = "FN")]
    pub fn_: Vec<u64>,
    #[serde(rename = "FP", default, skip_serializing_if = "Option::is_none")]
    pub fp: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: EvalMode,
    pub split: SplitMode,
    pub alphas: Vec<f64>,
    pub per_alpha: MetricSeries,
    pub mean: MetricMeans,
    pub counts: Counts,
    /// No ground-truth detections; every metric is reported as 0.
    pub empty: bool,
}

impl EvalReport {
    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

impl MetricSeries {
    pub fn means(&self) -> MetricMeans {
        MetricMeans {
            det_re: mean(&self.det_re),
            ass_a: mean(&self.ass_a),
            ass_re: mean(&self.ass_re),
            ass_pr: mean(&self.ass_pr),
            owta: mean(&self.owta),
            det_a: self.det_a.as_deref().map(mean),
            hota: self.hota.as_deref().map(mean),
        }
    }
}
