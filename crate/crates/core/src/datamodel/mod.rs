//! Annotation, proposal, track and category-split ingestion.

mod annotations;
mod proposals;
mod split;
mod tracks;

pub use annotations::{
    load_annotations, AnnotationFile, AnnotationRecord, CategoryRecord, Dataset, Frame, GtTrack, ImageRecord,
    Video, VideoRecord,
};
pub use proposals::{
    load_proposals, read_proposals, write_proposals, Proposal, ProposalSet, VideoProposals, SCORE_SUM_EPS,
};
pub use split::{apply_split, load_split, CategorySplit, EvalVideo, GtView, SplitMode};
pub use tracks::{load_tracks, read_tracks, write_tracks, Track, TrackDet, TrackSet};
