use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::datamodel::{
    write_proposals, AnnotationFile, AnnotationRecord, CategoryRecord, CategorySplit, Dataset, ImageRecord, Proposal,
    ProposalSet, Track, TrackDet, TrackSet, VideoRecord,
};
use crate::error::{Error, Result};
use crate::geometry::{BBox, FlowField};
use crate::par::Executor;
use crate::tracker::FlowSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Motion {
    Static,
    #[default]
    Linear,
    /// Objects paired head-on in one lane. They pass each other between two
    /// annotated frames, each landing exactly where the other was.
    Crossing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub videos: usize,
    /// Annotated frames per video.
    pub frames: u32,
    pub objects: usize,
    pub motion: Motion,
    pub width: u32,
    pub height: u32,
    pub box_width: u32,
    /// Frame-index spacing between annotated frames.
    pub frame_step: u32,
    /// Standard deviation of per-coordinate box noise, in pixels.
    pub jitter: f64,
    pub drop_prob: f64,
    /// Mean number of clutter proposals per frame.
    pub clutter_rate: f64,
    pub embedding_dim: usize,
    pub embedding_noise: f64,
    pub flows: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 0,
            videos: 2,
            frames: 6,
            objects: 2,
            motion: Motion::Linear,
            width: 160,
            height: 120,
            box_width: 16,
            frame_step: 1,
            jitter: 0.0,
            drop_prob: 0.0,
            clutter_rate: 0.0,
            embedding_dim: 8,
            embedding_noise: 0.0,
            flows: true,
        }
    }
}

/// Known category in every generated split.
pub const KNOWN_CATEGORY: u64 = 1;

fn lanes(cfg: &ScenarioConfig) -> usize {
    match cfg.motion {
        Motion::Crossing => cfg.objects.div_ceil(2),
        _ => cfg.objects,
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::config(m));
        for (name, p) in [("drop_prob", self.drop_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        for (name, s) in [("jitter", self.jitter), ("embedding_noise", self.embedding_noise), ("clutter_rate", self.clutter_rate)] {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("{name} must be finite and non-negative, got {s}"));
            }
        }
        if self.frames == 0 || self.frame_step == 0 {
            return bad("frames and frame_step must be positive".into());
        }
        if self.embedding_dim == 0 {
            return bad("embedding_dim must be positive".into());
        }
        let l = lanes(self).max(1) as u32;
        if self.height / l < 6 {
            return bad(format!("{} lanes do not fit in height {}", l, self.height));
        }
        if self.box_width == 0 || self.box_width >= self.width {
            return bad(format!("box_width {} must be in 1..width", self.box_width));
        }
        if self.motion == Motion::Crossing {
            let travel = (self.frames - 1) * crossing_speed(self);
            if travel + self.box_width > self.width {
                return bad(format!(
                    "crossing needs width >= {} for {} frames of box width {}",
                    travel + self.box_width,
                    self.frames,
                    self.box_width
                ));
            }
        }
        Ok(())
    }
}

fn crossing_speed(cfg: &ScenarioConfig) -> u32 {
    // fast enough that consecutive boxes of one object never overlap
    cfg.box_width + 4
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_MOTION: u64 = u64::MAX;
const STREAM_EMBEDDING: u64 = u64::MAX - 1;
const STREAM_CLUTTER: u64 = u64::MAX - 2;

/// Independent generator for one `(seed, video, frame, object)` cell, so
/// output does not depend on generation order.
pub fn stream(seed: u64, video: u64, frame: u64, object: u64) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    for x in [video, frame, object] {
        h = splitmix64(h ^ x);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Generated corpus with everything needed to track and evaluate it.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub dataset: Dataset,
    pub proposals: ProposalSet,
    /// Per video, flow from each annotated frame to the next one.
    pub flows: BTreeMap<String, BTreeMap<u32, Arc<FlowField>>>,
    pub split: CategorySplit,
}

struct ObjectPath {
    lane: u32,
    x0: i64,
    vx: i64,
}

struct VideoOut {
    name: String,
    boxes: Vec<Vec<BBox>>,
    proposals: BTreeMap<u32, Vec<Proposal>>,
    flows: BTreeMap<u32, Arc<FlowField>>,
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let n = Normal::new(0.0, 1.0).unwrap();
    loop {
        let v: Vec<f64> = (0..dim).map(|_| n.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn paths(cfg: &ScenarioConfig, video: u64) -> Vec<ObjectPath> {
    let span = (cfg.frames - 1) as i64;
    let room = (cfg.width - cfg.box_width) as i64;
    (0..cfg.objects)
        .map(|o| {
            let mut rng = stream(cfg.seed, video, STREAM_MOTION, o as u64);
            match cfg.motion {
                Motion::Static => ObjectPath { lane: o as u32, x0: rng.random_range(0..=room), vx: 0 },
                Motion::Linear => {
                    let vmax = if span == 0 { 0 } else { (room / span).min(4) };
                    let vx = rng.random_range(-vmax..=vmax);
                    let (lo, hi) = if vx >= 0 { (0, room - vx * span) } else { (-vx * span, room) };
                    ObjectPath { lane: o as u32, x0: rng.random_range(lo..=hi), vx }
                }
                Motion::Crossing => {
                    let v = crossing_speed(cfg) as i64;
                    let travel = v * span;
                    let lane = (o / 2) as u32;
                    if o % 2 == 1 || o + 1 < cfg.objects {
                        // the pair shares x0, so draw it from the pair's stream
                        let mut pr = stream(cfg.seed, video, STREAM_MOTION, (o - o % 2) as u64);
                        let x0 = pr.random_range(0..=room - travel);
                        if o % 2 == 0 {
                            ObjectPath { lane, x0, vx: v }
                        } else {
                            ObjectPath { lane, x0: x0 + travel, vx: -v }
                        }
                    } else {
                        ObjectPath { lane, x0: rng.random_range(0..=room), vx: 0 }
                    }
                }
            }
        })
        .collect()
}

fn gen_video(cfg: &ScenarioConfig, v: usize) -> VideoOut {
    let vid = v as u64;
    let lane_h = cfg.height / lanes(cfg).max(1) as u32;
    let ps = paths(cfg, vid);
    let boxes: Vec<Vec<BBox>> = ps
        .iter()
        .map(|p| {
            (0..cfg.frames as i64)
                .map(|t| {
                    let x = (p.x0 + p.vx * t) as f64;
                    BBox {
                        x1: x,
                        y1: (p.lane * lane_h + 2) as f64,
                        x2: x + cfg.box_width as f64,
                        y2: ((p.lane + 1) * lane_h - 2) as f64,
                    }
                })
                .collect()
        })
        .collect();
    let means: Vec<Vec<f64>> = (0..cfg.objects)
        .map(|o| unit_vector(&mut stream(cfg.seed, vid, STREAM_EMBEDDING, o as u64), cfg.embedding_dim))
        .collect();

    let jitter = Normal::new(0.0, cfg.jitter.max(0.0)).unwrap();
    let emb_noise = Normal::new(0.0, cfg.embedding_noise.max(0.0)).unwrap();
    let round = |x: f64| (x * 100.0).round() / 100.0;
    let mut proposals = BTreeMap::new();
    for t in 0..cfg.frames {
        let frame = t * cfg.frame_step;
        let mut list = Vec::new();
        for (o, obj_boxes) in boxes.iter().enumerate() {
            let mut rng = stream(cfg.seed, vid, t as u64, o as u64);
            if cfg.drop_prob > 0.0 && rng.random::<f64>() < cfg.drop_prob {
                continue;
            }
            let b = obj_boxes[t as usize];
            let bbox = if cfg.jitter > 0.0 {
                let x1 = round(b.x1 + jitter.sample(&mut rng));
                let y1 = round(b.y1 + jitter.sample(&mut rng));
                let x2 = round((b.x2 + jitter.sample(&mut rng)).max(x1 + 1.0));
                let y2 = round((b.y2 + jitter.sample(&mut rng)).max(y1 + 1.0));
                BBox { x1, y1, x2, y2 }
            } else {
                b
            };
            let known = 1 + (o as u64 % 3) == KNOWN_CATEGORY;
            let mut p = Proposal::from_box(frame, bbox);
            p.objectness = Some(0.95);
            p.scores = vec![if known { 0.8 } else { 0.05 }];
            p.embedding = Some(
                means[o]
                    .iter()
                    .map(|m| (m + if cfg.embedding_noise > 0.0 { emb_noise.sample(&mut rng) } else { 0.0 }) as f32)
                    .collect(),
            );
            list.push(p);
        }
        let mut rng = stream(cfg.seed, vid, t as u64, STREAM_CLUTTER);
        let whole = cfg.clutter_rate.floor() as usize;
        let extra = usize::from(rng.random::<f64>() < cfg.clutter_rate.fract());
        for _ in 0..whole + extra {
            let w = rng.random_range(cfg.box_width..=2 * cfg.box_width).min(cfg.width) as f64;
            let h = rng.random_range(4..=lane_h.max(4)).min(cfg.height) as f64;
            let x1 = rng.random_range(0.0..=(cfg.width as f64 - w)).floor();
            let y1 = rng.random_range(0.0..=(cfg.height as f64 - h)).floor();
            let mut p = Proposal::from_box(frame, BBox { x1, y1, x2: x1 + w, y2: y1 + h });
            p.objectness = Some(round(rng.random_range(0.05..0.3)));
            p.scores = vec![round(rng.random_range(0.0..0.2))];
            p.embedding = Some(unit_vector(&mut rng, cfg.embedding_dim).into_iter().map(|x| x as f32).collect());
            list.push(p);
        }
        proposals.insert(frame, list);
    }

    let mut flows = BTreeMap::new();
    if cfg.flows {
        for t in 0..cfg.frames.saturating_sub(1) {
            let mut field = FlowField::zeros(cfg.width, cfg.height);
            for (p, obj_boxes) in ps.iter().zip(&boxes) {
                let b = obj_boxes[t as usize].clip(cfg.width, cfg.height);
                for row in b.y1 as u32..b.y2 as u32 {
                    for col in b.x1 as u32..b.x2 as u32 {
                        field.set(col, row, [p.vx as f32, 0.0]);
                    }
                }
            }
            flows.insert(t * cfg.frame_step, Arc::new(field));
        }
    }
    VideoOut { name: format!("synth{v:04}"), boxes, proposals, flows }
}

/// Generates a corpus; identical configs give identical output.
pub fn gen_scenario(cfg: &ScenarioConfig, exec: &Executor) -> Result<Scenario> {
    cfg.validate()?;
    let idx: Vec<usize> = (0..cfg.videos).collect();
    let videos = exec.map(&idx, |&v| gen_video(cfg, v));

    let mut file = AnnotationFile {
        categories: (1..=3).map(|c| CategoryRecord { id: c, name: format!("category{c}") }).collect(),
        ..Default::default()
    };
    let (mut image_id, mut ann_id) = (0u64, 0u64);
    for (v, out) in videos.iter().enumerate() {
        let video_id = v as u64 + 1;
        file.videos.push(VideoRecord {
            id: video_id,
            name: out.name.clone(),
            width: Some(cfg.width),
            height: Some(cfg.height),
            length: Some(cfg.frames * cfg.frame_step),
        });
        for t in 0..cfg.frames {
            image_id += 1;
            file.images.push(ImageRecord {
                id: image_id,
                video_id,
                frame_index: t * cfg.frame_step,
                width: cfg.width,
                height: cfg.height,
            });
            for (o, b) in out.boxes.iter().enumerate() {
                ann_id += 1;
                file.annotations.push(AnnotationRecord {
                    id: ann_id,
                    image_id,
                    bbox: Some(b[t as usize].to_xywh()),
                    segmentation: None,
                    track_id: video_id * 1000 + o as u64 + 1,
                    category_id: 1 + o as u64 % 3,
                });
            }
        }
    }
    let dataset = Dataset::from_file(file)?;
    let mut proposals = ProposalSet::default();
    let mut flows = BTreeMap::new();
    for out in videos {
        proposals.videos.insert(out.name.clone(), out.proposals);
        if cfg.flows {
            flows.insert(out.name, out.flows);
        }
    }
    Ok(Scenario {
        dataset,
        proposals,
        flows,
        split: CategorySplit { known: [KNOWN_CATEGORY].into(), distractor: Default::default() },
    })
}

impl Scenario {
    pub fn flow_source(&self) -> FlowSource {
        if self.flows.is_empty() {
            FlowSource::None
        } else {
            FlowSource::Memory(self.flows.clone())
        }
    }

    /// Ground truth converted to predicted tracks (perfect predictions).
    pub fn perfect_tracks(&self) -> TrackSet {
        let mut set = TrackSet::default();
        for (v, tracks) in self.dataset.videos.iter().zip(&self.dataset.gt_tracks) {
            let out = tracks
                .iter()
                .map(|t| Track {
                    id: t.id,
                    detections: t
                        .detections
                        .iter()
                        .map(|(&f, &b)| (f, TrackDet { bbox: b, mask: None, score: 1.0 }))
                        .collect(),
                })
                .collect();
            set.videos.insert(v.name.clone(), out);
        }
        set
    }

    /// Writes `annotations.json`, `proposals.jsonl`, `split.json` and
    /// `flows/<video>/<frame>.flo` under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let io = |p: &Path| {
            let p = p.to_path_buf();
            move |e| Error::io(p, e)
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let ann = dir.join("annotations.json");
        std::fs::write(&ann, self.dataset.to_json()).map_err(io(&ann))?;
        let split = dir.join("split.json");
        std::fs::write(&split, serde_json::to_string_pretty(&self.split).unwrap() + "\n").map_err(io(&split))?;
        let props = dir.join("proposals.jsonl");
        let mut buf = Vec::new();
        write_proposals(&self.proposals, &mut buf).map_err(io(&props))?;
        std::fs::write(&props, buf).map_err(io(&props))?;
        for (video, fields) in &self.flows {
            let vdir = dir.join("flows").join(video);
            std::fs::create_dir_all(&vdir).map_err(io(&vdir))?;
            for (f, field) in fields {
                field.write(vdir.join(format!("{f}.flo")))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_free_proposals_equal_gt() {
        let s = gen_scenario(&ScenarioConfig { objects: 3, ..Default::default() }, &Executor::sequential()).unwrap();
        for (v, tracks) in s.dataset.videos.iter().zip(&s.dataset.gt_tracks) {
            let props = &s.proposals.videos[&v.name];
            for t in tracks {
                for (f, b) in &t.detections {
                    assert!(props[f].iter().any(|p| p.bbox == *b));
                }
            }
            assert_eq!(props.values().map(Vec::len).sum::<usize>(), 3 * 6);
        }
    }

    #[test]
    fn full_drop_leaves_only_clutter() {
        let cfg = ScenarioConfig { drop_prob: 1.0, clutter_rate: 2.0, ..Default::default() };
        let s = gen_scenario(&cfg, &Executor::sequential()).unwrap();
        for props in s.proposals.videos.values().flat_map(|v| v.values()) {
            assert_eq!(props.len(), 2);
            assert!(props.iter().all(|p| p.objectness.unwrap() < 0.3));
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let cfg = ScenarioConfig { jitter: 1.5, clutter_rate: 1.3, embedding_noise: 0.1, drop_prob: 0.2, seed: 7, ..Default::default() };
        let a = gen_scenario(&cfg, &Executor::sequential()).unwrap();
        let b = gen_scenario(&cfg, &Executor::new(4)).unwrap();
        let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        a.write_to(da.path()).unwrap();
        b.write_to(db.path()).unwrap();
        for f in ["annotations.json", "proposals.jsonl", "split.json", "flows/synth0001/3.flo"] {
            assert_eq!(std::fs::read(da.path().join(f)).unwrap(), std::fs::read(db.path().join(f)).unwrap(), "{f}");
        }
        let c = gen_scenario(&ScenarioConfig { seed: 8, ..cfg }, &Executor::sequential()).unwrap();
        assert_ne!(a.proposals, c.proposals);
    }

    #[test]
    fn objects_stay_inside_the_frame() {
        for motion in [Motion::Static, Motion::Linear, Motion::Crossing] {
            let cfg = ScenarioConfig { objects: 5, frames: 6, motion, seed: 3, ..Default::default() };
            let s = gen_scenario(&cfg, &Executor::sequential()).unwrap();
            for b in s.dataset.gt_tracks.iter().flatten().flat_map(|t| t.detections.values()) {
                assert!(b.x1 >= 0.0 && b.x2 <= 160.0 && b.y1 >= 0.0 && b.y2 <= 120.0, "{motion:?} {b:?}");
            }
        }
    }

    #[test]
    fn crossing_pairs_trade_places() {
        let cfg = ScenarioConfig { objects: 2, frames: 6, motion: Motion::Crossing, ..Default::default() };
        let s = gen_scenario(&cfg, &Executor::sequential()).unwrap();
        let t = &s.dataset.gt_tracks[0];
        assert_eq!(t[0].detections[&2], t[1].detections[&3]);
        assert_eq!(t[1].detections[&2], t[0].detections[&3]);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn generation_is_a_function_of_the_config(seed in 0u64..1000, objects in 1usize..6, clutter in 0.0f64..3.0, jitter in 0.0f64..2.0) {
            let cfg = ScenarioConfig { seed, objects, clutter_rate: clutter, jitter, videos: 2, frames: 4, ..Default::default() };
            let a = gen_scenario(&cfg, &Executor::sequential()).unwrap();
            let b = gen_scenario(&cfg, &Executor::new(3)).unwrap();
            proptest::prop_assert_eq!(&a.proposals, &b.proposals);
            proptest::prop_assert_eq!(a.dataset.to_json(), b.dataset.to_json());
            proptest::prop_assert_eq!(&a.flows, &b.flows);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ScenarioConfig { drop_prob: 1.5, ..Default::default() }.validate().is_err());
        assert!(ScenarioConfig { jitter: -1.0, ..Default::default() }.validate().is_err());
        assert!(ScenarioConfig { motion: Motion::Crossing, frames: 30, ..Default::default() }.validate().is_err());
    }
}
