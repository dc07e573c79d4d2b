//! Pairwise association similarity between the proposals of two frames.
//!
//! Every method produces scores in `[0, 1]` where higher means more likely the
//! same object. Measures with another natural range are mapped monotonically:
//! GIoU via `(g + 1) / 2`, cosine similarity via `(c + 1) / 2`, and euclidean
//! distance via `1 / (1 + d)`.

mod chain;
mod kalman;
mod warp;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

pub use chain::{chain_association, ChainHop, ChainTrace};
pub use kalman::{kf_forecast, KalmanState, INITIAL_VARIANCE, MEASUREMENT_NOISE, PROCESS_NOISE};
pub use warp::warp_by_flow;

use crate::datamodel::Proposal;
use crate::error::{Error, Result};
use crate::geometry::{box_iou, giou, mask_iou, BBox, FlowField};

/// Dense score matrix with a per-entry admissibility flag.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    admissible: Vec<bool>,
    /// Unmapped measure when it differs from `values` (GIoU).
    raw: Option<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SimilarityMatrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
            admissible: vec![true; rows * cols],
            raw: None,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged similarity rows");
        let mut m = Self::zeros(rows.len(), cols);
        m.values = rows.concat();
        m
    }

    fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.values[i * cols + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.cols + j] = v;
    }

    #[inline]
    pub fn is_admissible(&self, i: usize, j: usize) -> bool {
        self.admissible[i * self.cols + j]
    }

    pub fn set_admissible(&mut self, i: usize, j: usize, ok: bool) {
        self.admissible[i * self.cols + j] = ok;
    }

    pub fn raw(&self, i: usize, j: usize) -> f64 {
        match &self.raw {
            Some(r) => r[i * self.cols + j],
            None => self.get(i, j),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// Best admissible column of row `i`; ties go to the lowest column.
    pub fn argmax_row(&self, i: usize) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols {
            if !self.is_admissible(i, j) {
                continue;
            }
            let v = self.get(i, j);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        best
    }

    /// Restricts to `row_ids x col_ids`, keeping admissibility and raw values.
    pub fn select(&self, row_ids: &[usize], col_ids: &[usize]) -> SimilarityMatrix {
        let mut out = Self::zeros(row_ids.len(), col_ids.len());
        for (a, &i) in row_ids.iter().enumerate() {
            for (b, &j) in col_ids.iter().enumerate() {
                out.set(a, b, self.get(i, j));
                out.set_admissible(a, b, self.is_admissible(i, j));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometricKind {
    BoxIou,
    MaskIou,
    Giou,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingMetric {
    Euclidean,
    Cosine,
}

/// Association similarity, one variant per studied method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[derive(Default)]
pub enum SimilarityMethod {
    Geometric(GeometricKind),
    /// Kalman forecast of the row box, then box IoU.
    KfBoxIou,
    /// IoU of the row proposal's externally regressed box for the target frame.
    Regression,
    /// Regressed box when available, Kalman forecast otherwise.
    KfRegression,
    /// Flow-warp the row proposal, then the geometric measure.
    Flow(GeometricKind),
    Embedding(EmbeddingMetric),
    /// Mean of flow-warped box IoU and cosine-mapped embedding similarity.
    #[default]
    Mix,
}


impl SimilarityMethod {
    pub fn needs_flow(&self) -> bool {
        matches!(self, SimilarityMethod::Flow(_) | SimilarityMethod::Mix)
    }

    pub fn needs_embedding(&self) -> bool {
        matches!(self, SimilarityMethod::Embedding(_) | SimilarityMethod::Mix)
    }
}

impl FromStr for SimilarityMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        use GeometricKind::*;
        use SimilarityMethod::*;
        Ok(match s.trim() {
            "box-iou" => Geometric(BoxIou),
            "mask-iou" => Geometric(MaskIou),
            "giou" => Geometric(Giou),
            "kf-box-iou" => KfBoxIou,
            "regression" => Regression,
            "kf-regression" => KfRegression,
            "flow-box-iou" => Flow(BoxIou),
            "flow-mask-iou" => Flow(MaskIou),
            "flow-giou" => Flow(Giou),
            "reid-euclidean" => Embedding(EmbeddingMetric::Euclidean),
            "reid-cosine" => Embedding(EmbeddingMetric::Cosine),
            "mix" => Mix,
            other => return Err(Error::config(format!("unknown similarity method {other:?}"))),
        })
    }
}

impl fmt::Display for SimilarityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GeometricKind::*;
        use SimilarityMethod::*;
        f.write_str(match self {
            Geometric(BoxIou) => "box-iou",
            Geometric(MaskIou) => "mask-iou",
            Geometric(Giou) => "giou",
            KfBoxIou => "kf-box-iou",
            Regression => "regression",
            KfRegression => "kf-regression",
            Flow(BoxIou) => "flow-box-iou",
            Flow(MaskIou) => "flow-mask-iou",
            Flow(Giou) => "flow-giou",
            Embedding(EmbeddingMetric::Euclidean) => "reid-euclidean",
            Embedding(EmbeddingMetric::Cosine) => "reid-cosine",
            Mix => "mix",
        })
    }
}

/// Source of optical flow between two frames of one video.
pub trait FlowProvider: Sync {
    fn flow(&self, from: u32, to: u32) -> Result<Option<Arc<FlowField>>>;
}

/// Provider with no flows at all.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoFlow;

impl FlowProvider for NoFlow {
    fn flow(&self, _: u32, _: u32) -> Result<Option<Arc<FlowField>>> {
        Ok(None)
    }
}

/// In-memory flows keyed by source frame; each field maps that frame to the
/// next frame of the stream being associated.
impl FlowProvider for BTreeMap<u32, Arc<FlowField>> {
    fn flow(&self, from: u32, _: u32) -> Result<Option<Arc<FlowField>>> {
        Ok(self.get(&from).cloned())
    }
}

/// Flows stored as `<dir>/<frame>.flo`, read on demand.
#[derive(Debug, Clone)]
pub struct FlowDir {
    pub dir: PathBuf,
}

impl FlowProvider for FlowDir {
    fn flow(&self, from: u32, _: u32) -> Result<Option<Arc<FlowField>>> {
        let path = self.dir.join(format!("{from}.flo"));
        if !path.exists() {
            return Ok(None);
        }
        FlowField::read(&path).map(|f| Some(Arc::new(f)))
    }
}

/// Inputs for one frame-pair similarity computation.
#[derive(Clone, Copy, Default)]
pub struct PairContext<'a> {
    pub from_frame: u32,
    pub to_frame: u32,
    pub flow: Option<&'a FlowField>,
    /// Per-row box histories for Kalman forecasting; a row without history
    /// is forecast from its own box alone.
    pub histories: Option<&'a [Vec<(u32, BBox)>]>,
}

fn require_flow<'a>(ctx: &PairContext<'a>) -> Result<&'a FlowField> {
    ctx.flow.ok_or_else(|| {
        Error::config(format!("flow from frame {} to {} is required but missing", ctx.from_frame, ctx.to_frame))
    })
}

pub fn sim_geometric<P: AsRef<Proposal>, Q: AsRef<Proposal>>(
    a: &[P],
    b: &[Q],
    kind: GeometricKind,
) -> Result<SimilarityMatrix> {
    let boxes_a: Vec<BBox> = a.iter().map(|p| p.as_ref().bbox).collect();
    let masks_a: Vec<Option<&crate::geometry::BinaryMask>> = a.iter().map(|p| p.as_ref().mask.as_ref()).collect();
    geometric_matrix(&boxes_a, &masks_a, b, kind)
}

fn geometric_matrix<Q: AsRef<Proposal>>(
    boxes_a: &[BBox],
    masks_a: &[Option<&crate::geometry::BinaryMask>],
    b: &[Q],
    kind: GeometricKind,
) -> Result<SimilarityMatrix> {
    let (n, m) = (boxes_a.len(), b.len());
    match kind {
        GeometricKind::BoxIou => Ok(SimilarityMatrix::from_fn(n, m, |i, j| box_iou(&boxes_a[i], &b[j].as_ref().bbox))),
        GeometricKind::Giou => {
            let mut out = SimilarityMatrix::zeros(n, m);
            let mut raw = vec![0.0; n * m];
            for i in 0..n {
                for j in 0..m {
                    let g = giou(&boxes_a[i], &b[j].as_ref().bbox);
                    raw[i * m + j] = g;
                    out.set(i, j, ((g + 1.0) / 2.0).clamp(0.0, 1.0));
                }
            }
            out.raw = Some(raw);
            Ok(out)
        }
        GeometricKind::MaskIou => {
            let missing = || Error::config("mask IoU similarity requires masks on every proposal");
            let ma: Vec<_> = masks_a.iter().map(|m| m.ok_or_else(missing)).collect::<Result<_>>()?;
            let mb: Vec<_> = b.iter().map(|p| p.as_ref().mask.as_ref().ok_or_else(missing)).collect::<Result<_>>()?;
            let mut out = SimilarityMatrix::zeros(n, m);
            for i in 0..n {
                for j in 0..m {
                    out.set(i, j, mask_iou(ma[i], mb[j])?);
                }
            }
            Ok(out)
        }
    }
}

fn embedding_of(p: &Proposal) -> Result<&[f32]> {
    p.embedding
        .as_deref()
        .ok_or_else(|| Error::config("embedding similarity requires embeddings on every proposal"))
}

fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        dot += x as f64 * y as f64;
        na += x as f64 * x as f64;
        nb += y as f64 * y as f64;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
    }
}

fn euclidean(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x as f64 - y as f64).powi(2)).sum::<f64>().sqrt()
}

/// Maps an embedding pair to `[0, 1]`.
pub fn embedding_similarity(a: &[f32], b: &[f32], metric: EmbeddingMetric) -> f64 {
    match metric {
        EmbeddingMetric::Cosine => (cosine(a, b) + 1.0) / 2.0,
        EmbeddingMetric::Euclidean => 1.0 / (1.0 + euclidean(a, b)),
    }
}

pub fn sim_embedding<P: AsRef<Proposal>, Q: AsRef<Proposal>>(
    a: &[P],
    b: &[Q],
    metric: EmbeddingMetric,
) -> Result<SimilarityMatrix> {
    let ea: Vec<&[f32]> = a.iter().map(|p| embedding_of(p.as_ref())).collect::<Result<_>>()?;
    let eb: Vec<&[f32]> = b.iter().map(|p| embedding_of(p.as_ref())).collect::<Result<_>>()?;
    if let Some(e) = ea.iter().chain(&eb).find(|e| e.len() != ea.first().or(eb.first()).unwrap().len()) {
        return Err(Error::config(format!("embedding length {} differs from the others", e.len())));
    }
    Ok(SimilarityMatrix::from_fn(a.len(), b.len(), |i, j| embedding_similarity(ea[i], eb[j], metric)))
}

/// Flow-warped row proposals: boxes and (if present) masks.
fn warp_rows<P: AsRef<Proposal>>(
    a: &[P],
    flow: &FlowField,
) -> Result<(Vec<BBox>, Vec<Option<crate::geometry::BinaryMask>>)> {
    let mut boxes = Vec::with_capacity(a.len());
    let mut masks = Vec::with_capacity(a.len());
    for p in a {
        let (b, m) = warp_by_flow(p.as_ref(), flow)?;
        boxes.push(b);
        masks.push(m);
    }
    Ok((boxes, masks))
}

pub fn sim_mix<P: AsRef<Proposal>, Q: AsRef<Proposal>>(a: &[P], b: &[Q], flow: &FlowField) -> Result<SimilarityMatrix> {
    let emb = sim_embedding(a, b, EmbeddingMetric::Cosine)?;
    let (boxes, _) = warp_rows(a, flow)?;
    Ok(SimilarityMatrix::from_fn(a.len(), b.len(), |i, j| {
        0.5 * box_iou(&boxes[i], &b[j].as_ref().bbox) + 0.5 * emb.get(i, j)
    }))
}

fn kf_rows<P: AsRef<Proposal>>(a: &[P], ctx: &PairContext<'_>) -> Result<Vec<BBox>> {
    a.iter()
        .enumerate()
        .map(|(i, p)| {
            let p = p.as_ref();
            match ctx.histories.and_then(|h| h.get(i)).filter(|h| !h.is_empty()) {
                Some(h) => kf_forecast(h, ctx.to_frame),
                None => Ok(p.bbox),
            }
        })
        .collect()
}

/// Computes the similarity matrix of `method` from frame `ctx.from_frame`
/// (rows) to `ctx.to_frame` (columns).
pub fn compute_similarity<P: AsRef<Proposal>, Q: AsRef<Proposal>>(
    method: SimilarityMethod,
    a: &[P],
    b: &[Q],
    ctx: &PairContext<'_>,
) -> Result<SimilarityMatrix> {
    match method {
        SimilarityMethod::Geometric(kind) => sim_geometric(a, b, kind),
        SimilarityMethod::KfBoxIou => {
            let boxes = kf_rows(a, ctx)?;
            Ok(SimilarityMatrix::from_fn(a.len(), b.len(), |i, j| box_iou(&boxes[i], &b[j].as_ref().bbox)))
        }
        SimilarityMethod::Regression | SimilarityMethod::KfRegression => {
            let kf = if method == SimilarityMethod::KfRegression { Some(kf_rows(a, ctx)?) } else { None };
            let boxes: Vec<BBox> = a
                .iter()
                .enumerate()
                .map(|(i, p)| match (p.as_ref().aux.get(&ctx.to_frame), &kf) {
                    (Some(b), _) => Ok(*b),
                    (None, Some(kf)) => Ok(kf[i]),
                    (None, None) => Err(Error::config(format!(
                        "regression similarity needs an aux box for frame {}",
                        ctx.to_frame
                    ))),
                })
                .collect::<Result<_>>()?;
            Ok(SimilarityMatrix::from_fn(a.len(), b.len(), |i, j| box_iou(&boxes[i], &b[j].as_ref().bbox)))
        }
        SimilarityMethod::Flow(kind) => {
            let flow = require_flow(ctx)?;
            let (boxes, masks) = warp_rows(a, flow)?;
            let mask_refs: Vec<_> = masks.iter().map(Option::as_ref).collect();
            geometric_matrix(&boxes, &mask_refs, b, kind)
        }
        SimilarityMethod::Embedding(metric) => sim_embedding(a, b, metric),
        SimilarityMethod::Mix => sim_mix(a, b, require_flow(ctx)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BinaryMask;
    use proptest::prelude::*;

    fn boxed(x1: f64, y1: f64, x2: f64, y2: f64) -> Proposal {
        Proposal::from_box(0, BBox { x1, y1, x2, y2 })
    }

    fn with_emb(mut p: Proposal, e: &[f32]) -> Proposal {
        p.embedding = Some(e.to_vec());
        p
    }

    #[test]
    fn box_iou_fixtures() {
        let a = vec![boxed(0., 0., 2., 2.), boxed(5., 5., 9., 9.)];
        let m = sim_geometric(&a, &a, GeometricKind::BoxIou).unwrap();
        assert_eq!((m.get(0, 0), m.get(1, 1)), (1.0, 1.0));
        let p = sim_geometric(&[boxed(0., 0., 2., 2.)], &[boxed(1., 1., 3., 3.)], GeometricKind::BoxIou).unwrap();
        assert!((p.get(0, 0) - 1.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn giou_is_mapped_and_raw_kept() {
        let m = sim_geometric(&[boxed(0., 0., 1., 1.)], &[boxed(2., 2., 3., 3.)], GeometricKind::Giou).unwrap();
        assert!((m.raw(0, 0) + 7.0 / 9.0).abs() < 1e-12);
        assert!((m.get(0, 0) - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn mask_iou_requires_masks() {
        let err = sim_geometric(&[boxed(0., 0., 1., 1.)], &[boxed(0., 0., 1., 1.)], GeometricKind::MaskIou);
        assert!(err.unwrap_err().is_config());
        let mut p = boxed(0., 0., 2., 2.);
        p.mask = Some(BinaryMask::from_box(4, 4, &p.bbox));
        let m = sim_geometric(&[p.clone()], &[p], GeometricKind::MaskIou).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
    }

    #[test]
    fn embedding_maps() {
        let a = with_emb(boxed(0., 0., 1., 1.), &[1.0, 0.0]);
        let same = with_emb(boxed(0., 0., 1., 1.), &[1.0, 0.0]);
        let ortho = with_emb(boxed(0., 0., 1., 1.), &[0.0, 1.0]);
        let opp = with_emb(boxed(0., 0., 1., 1.), &[-1.0, 0.0]);
        let cos = sim_embedding(&[a.clone()], &[same.clone(), ortho, opp.clone()], EmbeddingMetric::Cosine).unwrap();
        assert_eq!(cos.row(0), &[1.0, 0.5, 0.0]);
        let euc = sim_embedding(&[a], &[same, opp], EmbeddingMetric::Euclidean).unwrap();
        assert_eq!(euc.get(0, 0), 1.0);
        assert!((euc.get(0, 1) - 1.0 / 3.0).abs() < 1e-12);
        assert!(sim_embedding(&[boxed(0., 0., 1., 1.)], &[boxed(0., 0., 1., 1.)], EmbeddingMetric::Cosine)
            .unwrap_err()
            .is_config());
    }

    #[test]
    fn mix_averages_components() {
        let a = with_emb(boxed(0., 0., 4., 4.), &[1.0, 0.0]);
        let m = sim_mix(&[a.clone()], &[a], &FlowField::zeros(10, 10)).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
        // box IoU 4/10 = 0.4, cosine 0.6 maps to 0.8
        let q = with_emb(boxed(0., 0., 7., 1.), &[1.0, 0.0]);
        let c = with_emb(boxed(3., 0., 10., 1.), &[0.6, 0.8]);
        let m = sim_mix(&[q], &[c], &FlowField::zeros(12, 4)).unwrap();
        assert!((m.get(0, 0) - 0.6).abs() < 1e-6);
    }

    #[test]
    fn flow_methods_need_flow() {
        let a = [boxed(0., 0., 2., 2.)];
        let ctx = PairContext { from_frame: 0, to_frame: 1, ..Default::default() };
        let err = compute_similarity(SimilarityMethod::Flow(GeometricKind::BoxIou), &a, &a, &ctx).unwrap_err();
        assert!(err.is_config());
        let flow = FlowField::uniform(10, 10, 3.0, 0.0);
        let ctx = PairContext { flow: Some(&flow), ..ctx };
        let b = [boxed(3., 0., 5., 2.)];
        let m = compute_similarity(SimilarityMethod::Flow(GeometricKind::BoxIou), &a, &b, &ctx).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
    }

    #[test]
    fn regression_uses_aux_boxes() {
        let mut p = boxed(0., 0., 2., 2.);
        p.aux.insert(30, BBox { x1: 4., y1: 0., x2: 6., y2: 2. });
        let target = [boxed(4., 0., 6., 2.)];
        let ctx = PairContext { from_frame: 0, to_frame: 30, ..Default::default() };
        let m = compute_similarity(SimilarityMethod::Regression, &[p.clone()], &target, &ctx).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
        let ctx_missing = PairContext { to_frame: 31, ..ctx };
        assert!(compute_similarity(SimilarityMethod::Regression, &[p.clone()], &target, &ctx_missing)
            .unwrap_err()
            .is_config());
        // Kalman fallback with a single observation keeps the box
        let m = compute_similarity(SimilarityMethod::KfRegression, &[p.clone()], &[p.clone()], &ctx_missing).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
    }

    #[test]
    fn method_names_round_trip() {
        for s in [
            "box-iou", "mask-iou", "giou", "kf-box-iou", "regression", "kf-regression", "flow-box-iou",
            "flow-mask-iou", "flow-giou", "reid-euclidean", "reid-cosine", "mix",
        ] {
            assert_eq!(s.parse::<SimilarityMethod>().unwrap().to_string(), s);
        }
        assert!("optical".parse::<SimilarityMethod>().unwrap_err().is_config());
    }

    #[test]
    fn argmax_respects_admissibility_and_ties() {
        let mut m = SimilarityMatrix::from_rows(&[vec![0.5, 0.9, 0.9]]);
        assert_eq!(m.argmax_row(0), Some((1, 0.9)));
        m.set_admissible(0, 1, false);
        assert_eq!(m.argmax_row(0), Some((2, 0.9)));
    }

    fn arb_props() -> impl Strategy<Value = Vec<Proposal>> {
        proptest::collection::vec(
            (0.0..20.0f64, 0.0..20.0f64, 1.0..10.0f64, 1.0..10.0f64, -1.0..1.0f32, -1.0..1.0f32)
                .prop_map(|(x, y, w, h, e0, e1)| with_emb(boxed(x, y, x + w, y + h), &[e0, e1, 0.5])),
            1..6,
        )
    }

    proptest! {
        #[test]
        fn permutation_equivariance_and_range(a in arb_props(), b in arb_props(), seed in 0usize..100) {
            for kind in [GeometricKind::BoxIou, GeometricKind::Giou] {
                let m = sim_geometric(&a, &b, kind).unwrap();
                let mut perm: Vec<usize> = (0..a.len()).collect();
                perm.rotate_left(seed % a.len());
                let pa: Vec<Proposal> = perm.iter().map(|&i| a[i].clone()).collect();
                let mp = sim_geometric(&pa, &b, kind).unwrap();
                for (r, &i) in perm.iter().enumerate() {
                    for j in 0..b.len() {
                        prop_assert_eq!(mp.get(r, j), m.get(i, j));
                        prop_assert!((0.0..=1.0).contains(&m.get(i, j)));
                    }
                }
            }
            for metric in [EmbeddingMetric::Cosine, EmbeddingMetric::Euclidean] {
                let m = sim_embedding(&a, &b, metric).unwrap();
                for i in 0..a.len() { for j in 0..b.len() {
                    prop_assert!((0.0..=1.0).contains(&m.get(i, j)));
                }}
            }
        }
    }
}
