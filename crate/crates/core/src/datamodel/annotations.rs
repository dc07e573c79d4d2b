use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, RleJson};

/// On-disk annotation file (TAO/COCO style).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AnnotationFile {
    #[serde(default)]
    pub videos: Vec<VideoRecord>,
    #[serde(default)]
    pub images: Vec<ImageRecord>,
    #[serde(default)]
    pub annotations: Vec<AnnotationRecord>,
    #[serde(default)]
    pub categories: Vec<CategoryRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VideoRecord {
    pub id: u64,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: u64,
    pub video_id: u64,
    pub frame_index: u32,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: u64,
    pub image_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segmentation: Option<RleJson>,
    pub track_id: u64,
    pub category_id: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryRecord {
    pub id: u64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub image_id: u64,
    pub frame_index: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Video {
    pub id: u64,
    pub name: String,
    pub width: u32,
    pub height: u32,
    /// Total frame count of the video, annotated or not.
    pub length: u32,
    /// Annotated frames, strictly increasing by frame index.
    pub frames: Vec<Frame>,
}

impl Video {
    pub fn frame_indices(&self) -> Vec<u32> {
        self.frames.iter().map(|f| f.frame_index).collect()
    }
}

/// Ground-truth track: one identity with boxes on annotated frames.
#[derive(Debug, Clone, PartialEq)]
pub struct GtTrack {
    pub id: u64,
    pub category: u64,
    pub detections: BTreeMap<u32, BBox>,
}

/// Immutable, validated annotation set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    /// Sorted by video id.
    pub videos: Vec<Video>,
    /// Parallel to `videos`; tracks sorted by id.
    pub gt_tracks: Vec<Vec<GtTrack>>,
    pub categories: BTreeMap<u64, String>,
}

fn record_err(kind: &str, id: u64, message: impl Into<String>) -> Error {
    Error::parse(format!("{kind} id={id}"), message)
}

impl Dataset {
    pub fn from_file(file: AnnotationFile) -> Result<Self> {
        let mut categories = BTreeMap::new();
        for c in &file.categories {
            if categories.insert(c.id, c.name.clone()).is_some() {
                return Err(record_err("category", c.id, "duplicate category id"));
            }
        }

        let mut video_pos: HashMap<u64, usize> = HashMap::new();
        let mut sorted_videos = file.videos.clone();
        sorted_videos.sort_by_key(|v| v.id);
        let mut videos = Vec::with_capacity(sorted_videos.len());
        for v in sorted_videos {
            if video_pos.insert(v.id, videos.len()).is_some() {
                return Err(record_err("video", v.id, "duplicate video id"));
            }
            videos.push(Video {
                id: v.id,
                name: v.name,
                width: v.width.unwrap_or(0),
                height: v.height.unwrap_or(0),
                length: v.length.unwrap_or(0),
                frames: Vec::new(),
            });
        }
        let mut names = HashSet::new();
        for v in &videos {
            if !names.insert(v.name.as_str()) {
                return Err(record_err("video", v.id, format!("duplicate video name {:?}", v.name)));
            }
        }

        let mut image_loc: HashMap<u64, (usize, u32)> = HashMap::new();
        let mut dims_seen: Vec<Option<(u32, u32)>> = vec![None; videos.len()];
        for img in &file.images {
            let &vi = video_pos
                .get(&img.video_id)
                .ok_or_else(|| record_err("image", img.id, format!("unknown video_id {}", img.video_id)))?;
            if image_loc.insert(img.id, (vi, img.frame_index)).is_some() {
                return Err(record_err("image", img.id, "duplicate image id"));
            }
            match dims_seen[vi] {
                None => dims_seen[vi] = Some((img.width, img.height)),
                Some(d) if d != (img.width, img.height) => {
                    return Err(record_err("image", img.id, "image size differs from other frames of its video"));
                }
                _ => {}
            }
            videos[vi].frames.push(Frame { image_id: img.id, frame_index: img.frame_index });
        }
        for (v, dims) in videos.iter_mut().zip(dims_seen) {
            v.frames.sort_by_key(|f| f.frame_index);
            if let Some(w) = v.frames.windows(2).find(|w| w[0].frame_index == w[1].frame_index) {
                return Err(record_err(
                    "image",
                    w[1].image_id,
                    format!("frame index {} repeated in video {}", w[1].frame_index, v.id),
                ));
            }
            if let Some((w, h)) = dims {
                v.width = w;
                v.height = h;
            }
            let last = v.frames.last().map(|f| f.frame_index + 1).unwrap_or(0);
            v.length = v.length.max(last);
        }

        let mut ann_ids = HashSet::new();
        // track id -> (video index, category, detections)
        let mut tracks: BTreeMap<u64, (usize, u64, BTreeMap<u32, BBox>)> = BTreeMap::new();
        for a in &file.annotations {
            if !ann_ids.insert(a.id) {
                return Err(record_err("annotation", a.id, "duplicate annotation id"));
            }
            let &(vi, frame) = image_loc
                .get(&a.image_id)
                .ok_or_else(|| record_err("annotation", a.id, format!("unknown image_id {}", a.image_id)))?;
            if !categories.contains_key(&a.category_id) {
                return Err(record_err("annotation", a.id, format!("unknown category_id {}", a.category_id)));
            }
            let bbox = match (&a.bbox, &a.segmentation) {
                (Some(xywh), _) => {
                    BBox::from_xywh(*xywh).map_err(|e| record_err("annotation", a.id, e.to_string()))?
                }
                (None, Some(rle)) => rle
                    .to_mask()
                    .map_err(|e| record_err("annotation", a.id, e.to_string()))?
                    .to_box(),
                (None, None) => return Err(record_err("annotation", a.id, "neither bbox nor segmentation")),
            };
            let entry = tracks.entry(a.track_id).or_insert_with(|| (vi, a.category_id, BTreeMap::new()));
            if entry.0 != vi {
                return Err(record_err("annotation", a.id, format!("track {} spans several videos", a.track_id)));
            }
            if entry.1 != a.category_id {
                return Err(record_err("annotation", a.id, format!("track {} changes category", a.track_id)));
            }
            if entry.2.insert(frame, bbox).is_some() {
                return Err(record_err(
                    "annotation",
                    a.id,
                    format!("track {} annotated twice in frame {frame}", a.track_id),
                ));
            }
        }

        let mut gt_tracks = vec![Vec::new(); videos.len()];
        for (id, (vi, category, detections)) in tracks {
            gt_tracks[vi].push(GtTrack { id, category, detections });
        }
        Ok(Dataset { videos, gt_tracks, categories })
    }

    pub fn from_json(text: &str, location: &str) -> Result<Self> {
        let file: AnnotationFile =
            serde_json::from_str(text).map_err(|e| Error::parse(location, e.to_string()))?;
        Self::from_file(file)
    }

    pub fn to_file(&self) -> AnnotationFile {
        let mut file = AnnotationFile {
            categories: self
                .categories
                .iter()
                .map(|(&id, name)| CategoryRecord { id, name: name.clone() })
                .collect(),
            ..Default::default()
        };
        let mut next_ann = 1;
        for (v, tracks) in self.videos.iter().zip(&self.gt_tracks) {
            file.videos.push(VideoRecord {
                id: v.id,
                name: v.name.clone(),
                width: Some(v.width),
                height: Some(v.height),
                length: Some(v.length),
            });
            let mut image_of = HashMap::new();
            for f in &v.frames {
                image_of.insert(f.frame_index, f.image_id);
                file.images.push(ImageRecord {
                    id: f.image_id,
                    video_id: v.id,
                    frame_index: f.frame_index,
                    width: v.width,
                    height: v.height,
                });
            }
            for t in tracks {
                for (frame, b) in &t.detections {
                    file.annotations.push(AnnotationRecord {
                        id: next_ann,
                        image_id: image_of[frame],
                        bbox: Some(b.to_xywh()),
                        segmentation: None,
                        track_id: t.id,
                        category_id: t.category,
                    });
                    next_ann += 1;
                }
            }
        }
        file
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("annotation file serializes")
    }

    pub fn video_by_name(&self, name: &str) -> Option<usize> {
        self.videos.iter().position(|v| v.name == name)
    }

    pub fn num_gt_tracks(&self) -> usize {
        self.gt_tracks.iter().map(Vec::len).sum()
    }
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Dataset::from_json(&text, &path.display().to_string())
}
