use super::report::{Counts, EvalReport, MetricSeries};
use super::{validate_alphas, Accumulation, EvalConfig, EvalMode};
use crate::datamodel::{EvalVideo, GtTrack, GtView, SplitMode, Track, TrackDet, TrackSet};
use crate::error::Result;
use crate::geometry::{box_iou, mask_to_box, BBox};
use crate::par::Executor;
use crate::similarity::SimilarityMatrix;
use crate::tracker::hungarian_assign;

/// Weight of IoU relative to the alignment score in per-frame matching.
pub const ALIGN_EPS: f64 = 1e-6;

/// Counts and association sums for one alpha.
///
/// The `ass_*` fields are sums over true positives, so dividing by `tp`
/// yields the mean.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AlphaAccumulator {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub ass_a: f64,
    pub ass_re: f64,
    pub ass_pr: f64,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        0.0
    }
}

impl AlphaAccumulator {
    pub fn add(&mut self, o: &AlphaAccumulator) {
        self.tp += o.tp;
        self.fn_ += o.fn_;
        self.fp += o.fp;
        self.ass_a += o.ass_a;
        self.ass_re += o.ass_re;
        self.ass_pr += o.ass_pr;
    }

    pub fn det_re(&self) -> f64 {
        ratio(self.tp as f64, (self.tp + self.fn_) as f64)
    }

    pub fn det_a(&self) -> f64 {
        ratio(self.tp as f64, (self.tp + self.fn_ + self.fp) as f64)
    }

    pub fn ass_a(&self) -> f64 {
        ratio(self.ass_a, self.tp as f64)
    }

    pub fn ass_re(&self) -> f64 {
        ratio(self.ass_re, self.tp as f64)
    }

    pub fn ass_pr(&self) -> f64 {
        ratio(self.ass_pr, self.tp as f64)
    }
}

/// Matching outcome for one video at one alpha.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchRecord {
    pub alpha: f64,
    pub frames: Vec<FrameMatches>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameMatches {
    pub frame: u32,
    /// `(gt track index, predicted track index)`
    pub pairs: Vec<(usize, usize)>,
    /// Predicted tracks whose detection here was discarded before matching.
    pub removed: Vec<usize>,
}

struct PreparedFrame {
    frame: u32,
    gt: Vec<usize>,
    preds: Vec<usize>,
    /// `gt x preds`, row-major.
    iou: Vec<f64>,
    excluded: usize,
    /// `excluded x preds`, row-major.
    ex_iou: Vec<f64>,
}

struct PreparedVideo {
    n_gt: usize,
    n_pred: usize,
    frames: Vec<PreparedFrame>,
}

fn det_box(d: &TrackDet) -> BBox {
    d.mask.as_ref().map_or(d.bbox, mask_to_box)
}

fn excluded_tracks<'a>(gt: &'a EvalVideo, mode: SplitMode, cfg: &EvalConfig) -> Vec<&'a GtTrack> {
    let mut out: Vec<&GtTrack> = gt.distractors.iter().collect();
    if mode == SplitMode::Unknown && cfg.remove_other {
        out.extend(&gt.other);
    }
    out
}

fn warn_on_overlap(video: &str, frame: u32, dets: &[&TrackDet]) {
    for i in 0..dets.len() {
        for j in i + 1..dets.len() {
            if let (Some(a), Some(b)) = (&dets[i].mask, &dets[j].mask) {
                if a.intersection_area(b).unwrap_or(0) > 0 {
                    log::warn!("event=overlapping_predictions video={video} frame={frame}");
                    return;
                }
            }
        }
    }
}

fn prepare(preds: &[Track], gt: &EvalVideo, mode: SplitMode, cfg: &EvalConfig) -> PreparedVideo {
    let excluded = excluded_tracks(gt, mode, cfg);
    let frames = gt
        .frames
        .iter()
        .map(|&f| {
            let gt_idx: Vec<usize> = (0..gt.tracks.len()).filter(|&g| gt.tracks[g].detections.contains_key(&f)).collect();
            let gt_boxes: Vec<BBox> = gt_idx.iter().map(|&g| gt.tracks[g].detections[&f]).collect();
            let pred_dets: Vec<(usize, &TrackDet)> =
                preds.iter().enumerate().filter_map(|(p, t)| t.detections.get(&f).map(|d| (p, d))).collect();
            let dets: Vec<&TrackDet> = pred_dets.iter().map(|x| x.1).collect();
            warn_on_overlap(&gt.name, f, &dets);
            let pred_boxes: Vec<BBox> = dets.iter().map(|d| det_box(d)).collect();
            let ex_boxes: Vec<BBox> = excluded.iter().filter_map(|t| t.detections.get(&f).copied()).collect();
            let cross = |rows: &[BBox]| -> Vec<f64> {
                rows.iter().flat_map(|g| pred_boxes.iter().map(move |p| box_iou(g, p))).collect()
            };
            PreparedFrame {
                frame: f,
                iou: cross(&gt_boxes),
                ex_iou: cross(&ex_boxes),
                excluded: ex_boxes.len(),
                gt: gt_idx,
                preds: pred_dets.iter().map(|x| x.0).collect(),
            }
        })
        .collect();
    PreparedVideo { n_gt: gt.tracks.len(), n_pred: preds.len(), frames }
}

/// Per frame: which detections survive removal, and matched `(gt, pred)`
/// positions within the frame's lists.
struct FrameOutcome {
    kept: Vec<bool>,
    pairs: Vec<(usize, usize)>,
}

fn match_prepared(pv: &PreparedVideo, alpha: f64) -> Vec<FrameOutcome> {
    // discard predictions that a joint one-to-one matching assigns to excluded ground truth
    let kept: Vec<Vec<bool>> = pv
        .frames
        .iter()
        .map(|fr| {
            let np = fr.preds.len();
            let mut kept = vec![true; np];
            if fr.excluded > 0 && np > 0 {
                let ng = fr.gt.len();
                let mut m = SimilarityMatrix::zeros(ng + fr.excluded, np);
                for r in 0..ng + fr.excluded {
                    for c in 0..np {
                        let v = if r < ng { fr.iou[r * np + c] } else { fr.ex_iou[(r - ng) * np + c] };
                        m.set(r, c, v);
                    }
                }
                for (r, c) in hungarian_assign(&m, alpha).matches {
                    if r >= ng {
                        kept[c] = false;
                    }
                }
            }
            kept
        })
        .collect();

    let mut gt_count = vec![0u64; pv.n_gt];
    let mut pred_count = vec![0u64; pv.n_pred];
    let mut potential = vec![0u64; pv.n_gt * pv.n_pred];
    for (fr, kept) in pv.frames.iter().zip(&kept) {
        let np = fr.preds.len();
        for &g in &fr.gt {
            gt_count[g] += 1;
        }
        for (c, &p) in fr.preds.iter().enumerate() {
            if !kept[c] {
                continue;
            }
            pred_count[p] += 1;
            for (r, &g) in fr.gt.iter().enumerate() {
                if fr.iou[r * np + c] >= alpha {
                    potential[g * pv.n_pred + p] += 1;
                }
            }
        }
    }
    let align = |g: usize, p: usize| {
        let pm = potential[g * pv.n_pred + p] as f64;
        pm / (gt_count[g] as f64 + pred_count[p] as f64 - pm)
    };

    pv.frames
        .iter()
        .zip(kept)
        .map(|(fr, kept)| {
            let np = fr.preds.len();
            let cols: Vec<usize> = (0..np).filter(|&c| kept[c]).collect();
            let mut m = SimilarityMatrix::zeros(fr.gt.len(), cols.len());
            for (r, &g) in fr.gt.iter().enumerate() {
                for (k, &c) in cols.iter().enumerate() {
                    let iou = fr.iou[r * np + c];
                    if iou >= alpha {
                        m.set(r, k, align(g, fr.preds[c]) + ALIGN_EPS * iou);
                    } else {
                        m.set_admissible(r, k, false);
                    }
                }
            }
            let pairs = hungarian_assign(&m, 0.0).matches.into_iter().map(|(r, k)| (r, cols[k])).collect();
            FrameOutcome { kept, pairs }
        })
        .collect()
}

fn accumulate(pv: &PreparedVideo, alpha: f64) -> AlphaAccumulator {
    let outcome = match_prepared(pv, alpha);
    let mut acc = AlphaAccumulator::default();
    let mut gt_count = vec![0u64; pv.n_gt];
    let mut pred_count = vec![0u64; pv.n_pred];
    let mut matches = vec![0u64; pv.n_gt * pv.n_pred];
    for (fr, o) in pv.frames.iter().zip(&outcome) {
        let kept = o.kept.iter().filter(|&&k| k).count() as u64;
        for &g in &fr.gt {
            gt_count[g] += 1;
        }
        for (c, &p) in fr.preds.iter().enumerate() {
            if o.kept[c] {
                pred_count[p] += 1;
            }
        }
        for &(r, c) in &o.pairs {
            matches[fr.gt[r] * pv.n_pred + fr.preds[c]] += 1;
        }
        let tp = o.pairs.len() as u64;
        acc.tp += tp;
        acc.fn_ += fr.gt.len() as u64 - tp;
        acc.fp += kept - tp;
    }
    for g in 0..pv.n_gt {
        for p in 0..pv.n_pred {
            let mc = matches[g * pv.n_pred + p];
            if mc == 0 {
                continue;
            }
            let (mc, gc, pc) = (mc as f64, gt_count[g] as f64, pred_count[p] as f64);
            acc.ass_a += mc * mc / (gc + pc - mc);
            acc.ass_re += mc * mc / gc;
            acc.ass_pr += mc * mc / pc;
        }
    }
    acc
}

/// Matches one video's predictions to its ground truth at a single alpha.
pub fn match_detections(preds: &[Track], gt: &EvalVideo, mode: SplitMode, alpha: f64, cfg: &EvalConfig) -> MatchRecord {
    let pv = prepare(preds, gt, mode, cfg);
    let frames = match_prepared(&pv, alpha)
        .into_iter()
        .zip(&pv.frames)
        .map(|(o, fr)| FrameMatches {
            frame: fr.frame,
            pairs: o.pairs.iter().map(|&(r, c)| (fr.gt[r], fr.preds[c])).collect(),
            removed: (0..fr.preds.len()).filter(|&c| !o.kept[c]).map(|c| fr.preds[c]).collect(),
        })
        .collect();
    MatchRecord { alpha, frames }
}

struct Metrics {
    det_re: f64,
    det_a: f64,
    ass_a: f64,
    ass_re: f64,
    ass_pr: f64,
}

impl From<&AlphaAccumulator> for Metrics {
    fn from(a: &AlphaAccumulator) -> Self {
        Metrics { det_re: a.det_re(), det_a: a.det_a(), ass_a: a.ass_a(), ass_re: a.ass_re(), ass_pr: a.ass_pr() }
    }
}

/// Evaluates predictions against a ground-truth view in the configured mode.
pub fn evaluate(preds: &TrackSet, gt: &GtView, cfg: &EvalConfig, exec: &Executor) -> Result<EvalReport> {
    validate_alphas(&cfg.alphas)?;
    for name in preds.videos.keys() {
        if !gt.videos.iter().any(|v| &v.name == name) {
            log::warn!("event=predictions_for_unknown_video video={name}");
        }
    }
    let no_tracks: Vec<Track> = Vec::new();
    let prepared: Vec<PreparedVideo> = exec.map(&gt.videos, |v| {
        prepare(preds.videos.get(&v.name).unwrap_or(&no_tracks), v, gt.mode, cfg)
    });
    let na = cfg.alphas.len();
    let units: Vec<(usize, usize)> = (0..prepared.len()).flat_map(|v| (0..na).map(move |a| (v, a))).collect();
    let accs = exec.map(&units, |&(v, a)| accumulate(&prepared[v], cfg.alphas[a]));

    let mut totals = vec![AlphaAccumulator::default(); na];
    for (&(_, a), acc) in units.iter().zip(&accs) {
        totals[a].add(acc);
    }

    let metrics: Vec<Metrics> = match cfg.accumulation {
        Accumulation::Global => totals.iter().map(Metrics::from).collect(),
        Accumulation::PerVideo => {
            let with_gt: Vec<usize> = (0..gt.videos.len()).filter(|&v| gt.videos[v].num_gt_detections() > 0).collect();
            let n = with_gt.len().max(1) as f64;
            (0..na)
                .map(|a| {
                    let mut m = Metrics { det_re: 0.0, det_a: 0.0, ass_a: 0.0, ass_re: 0.0, ass_pr: 0.0 };
                    for &v in &with_gt {
                        let x = Metrics::from(&accs[v * na + a]);
                        m.det_re += x.det_re;
                        m.det_a += x.det_a;
                        m.ass_a += x.ass_a;
                        m.ass_re += x.ass_re;
                        m.ass_pr += x.ass_pr;
                    }
                    Metrics {
                        det_re: m.det_re / n,
                        det_a: m.det_a / n,
                        ass_a: m.ass_a / n,
                        ass_re: m.ass_re / n,
                        ass_pr: m.ass_pr / n,
                    }
                })
                .collect()
        }
    };

    let closed = cfg.mode == EvalMode::Closed;
    let series = MetricSeries {
        det_re: metrics.iter().map(|m| m.det_re).collect(),
        ass_a: metrics.iter().map(|m| m.ass_a).collect(),
        ass_re: metrics.iter().map(|m| m.ass_re).collect(),
        ass_pr: metrics.iter().map(|m| m.ass_pr).collect(),
        owta: metrics.iter().map(|m| (m.det_re * m.ass_a).sqrt()).collect(),
        det_a: closed.then(|| metrics.iter().map(|m| m.det_a).collect()),
        hota: closed.then(|| metrics.iter().map(|m| (m.det_a * m.ass_a).sqrt()).collect()),
    };
    let gt_detections = gt.num_gt_detections() as u64;
    Ok(EvalReport {
        mode: cfg.mode,
        split: gt.mode,
        alphas: cfg.alphas.clone(),
        mean: series.means(),
        per_alpha: series,
        counts: Counts {
            gt_detections,
            gt_tracks: gt.num_tracks() as u64,
            tp: totals.iter().map(|t| t.tp).collect(),
            fn_: totals.iter().map(|t| t.fn_).collect(),
            fp: closed.then(|| totals.iter().map(|t| t.fp).collect()),
        },
        empty: gt_detections == 0,
    })
}

/// Open-world evaluation: false positives are ignored.
pub fn compute_owta(preds: &TrackSet, gt: &GtView, cfg: &EvalConfig, exec: &Executor) -> Result<EvalReport> {
    evaluate(preds, gt, &EvalConfig { mode: EvalMode::Open, ..cfg.clone() }, exec)
}

/// Closed-world evaluation: detection accuracy counts false positives.
pub fn compute_hota_closed(preds: &TrackSet, gt: &GtView, cfg: &EvalConfig, exec: &Executor) -> Result<EvalReport> {
    evaluate(preds, gt, &EvalConfig { mode: EvalMode::Closed, ..cfg.clone() }, exec)
}
