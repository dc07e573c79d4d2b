use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::RECALL_IOU;
use crate::datamodel::{GtView, ProposalSet};
use crate::error::{Error, Result};
use crate::geometry::box_iou;
use crate::par::Executor;
use crate::scoring::{select_top_k, ScoringMethod};

/// Size bins on `box area / image area`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeBins {
    /// Ratios at or above this are large.
    pub large: f64,
    /// Ratios at or above this (and below `large`) are medium.
    pub medium: f64,
}

impl Default for SizeBins {
    fn default() -> Self {
        SizeBins { large: 0.3, medium: 0.03 }
    }
}

impl SizeBins {
    /// 0 = small, 1 = medium, 2 = large.
    pub fn bin(&self, ratio: f64) -> usize {
        if ratio >= self.large {
            2
        } else if ratio >= self.medium {
            1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallRow {
    pub k: usize,
    pub overall: f64,
    /// `None` when the bin holds no ground truth.
    pub small: Option<f64>,
    pub medium: Option<f64>,
    pub large: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallTable {
    pub bins: SizeBins,
    /// Ground-truth detections per bin: small, medium, large.
    pub counts: [u64; 3],
    pub rows: Vec<RecallRow>,
}

/// Per ground-truth detection: its track, its size bin and the rank of the
/// best-ranked proposal covering it (IoU at least 0.5), if any.
struct GtHit {
    track: usize,
    bin: usize,
    rank: Option<usize>,
}

fn ranks(proposals: &ProposalSet, gt: &GtView, scoring: ScoringMethod, bins: SizeBins, exec: &Executor) -> Result<Vec<Vec<GtHit>>> {
    exec.try_map(&gt.videos, |v| {
        let image_area = v.width as f64 * v.height as f64;
        if image_area <= 0.0 && !v.tracks.is_empty() {
            return Err(Error::input(format!("video {:?} has no image size; size bins need one", v.name)));
        }
        let props = proposals.video(&v.name);
        let mut hits = Vec::new();
        for &f in &v.frames {
            let frame_props = props.and_then(|p| p.get(&f)).map(Vec::as_slice).unwrap_or(&[]);
            let order = select_top_k(frame_props, scoring, usize::MAX)?;
            for (ti, t) in v.tracks.iter().enumerate() {
                let Some(b) = t.detections.get(&f) else { continue };
                let rank = order.iter().position(|&(i, _)| box_iou(&frame_props[i].bbox, b) >= RECALL_IOU);
                hits.push(GtHit { track: ti, bin: bins.bin(b.area() / image_area), rank });
            }
        }
        Ok(hits)
    })
}

/// Detection recall of the top-`k` proposals per frame, overall and per size bin.
pub fn detection_recall_analysis(
    proposals: &ProposalSet,
    gt: &GtView,
    scoring: ScoringMethod,
    ks: &[usize],
    bins: SizeBins,
    exec: &Executor,
) -> Result<RecallTable> {
    if ks.contains(&0) {
        return Err(Error::config("k must be at least 1"));
    }
    let hits: Vec<GtHit> = ranks(proposals, gt, scoring, bins, exec)?.into_iter().flatten().collect();
    let mut counts = [0u64; 3];
    for h in &hits {
        counts[h.bin] += 1;
    }
    let rows = ks
        .iter()
        .map(|&k| {
            let mut rec = [0u64; 3];
            for h in hits.iter().filter(|h| h.rank.is_some_and(|r| r < k)) {
                rec[h.bin] += 1;
            }
            let frac = |b: usize| (counts[b] > 0).then(|| rec[b] as f64 / counts[b] as f64);
            let total: u64 = counts.iter().sum();
            RecallRow {
                k,
                overall: if total > 0 { rec.iter().sum::<u64>() as f64 / total as f64 } else { 0.0 },
                small: frac(0),
                medium: frac(1),
                large: frac(2),
            }
        })
        .collect();
    Ok(RecallTable { bins, counts, rows })
}

/// For each `p`, the fraction of ground-truth tracks with at least a fraction
/// `p` of their detections recalled by the top-`k` proposals.
pub fn track_recall_curve(
    proposals: &ProposalSet,
    gt: &GtView,
    scoring: ScoringMethod,
    k: usize,
    ps: &[f64],
    exec: &Executor,
) -> Result<Vec<(f64, f64)>> {
    if k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    if let Some(p) = ps.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::config(format!("track recall threshold {p} outside (0, 1]")));
    }
    let per_video = ranks(proposals, gt, scoring, SizeBins::default(), exec)?;
    let mut fractions = Vec::new();
    for (v, hits) in gt.videos.iter().zip(&per_video) {
        let mut recalled = vec![0usize; v.tracks.len()];
        let mut total = vec![0usize; v.tracks.len()];
        for h in hits {
            total[h.track] += 1;
            if h.rank.is_some_and(|r| r < k) {
                recalled[h.track] += 1;
            }
        }
        fractions.extend(total.iter().zip(&recalled).filter(|(t, _)| **t > 0).map(|(t, r)| *r as f64 / *t as f64));
    }
    Ok(ps
        .iter()
        .map(|&p| {
            let n = fractions.iter().filter(|&&f| f >= p).count();
            (p, if fractions.is_empty() { 0.0 } else { n as f64 / fractions.len() as f64 })
        })
        .collect())
}

pub fn recall_curve_csv(table: &RecallTable) -> String {
    let mut s = String::from("k,recall\n");
    for r in &table.rows {
        writeln!(s, "{},{}", r.k, r.overall).unwrap();
    }
    s
}

pub fn track_recall_csv(curve: &[(f64, f64)]) -> String {
    let mut s = String::from("p,track_recall\n");
    for (p, r) in curve {
        writeln!(s, "{p},{r}").unwrap();
    }
    s
}
