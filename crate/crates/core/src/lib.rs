//! Open-world multi-object tracking toolkit.
//!
//! The crate has two halves. The evaluation half computes OWTA (and the
//! closed-world HOTA it generalizes) together with the recall and association
//! analyses used to study proposal-based trackers. The tracking half is a
//! proposal-driven tracking-by-detection pipeline: proposal scoring, pairwise
//! similarity, Hungarian association with keep-alive, offline tracklet merging
//! and pixel-level overlap removal.
//!
//! Everything downstream of neural inference is covered; detector proposals,
//! optical flow and appearance embeddings are consumed as files.

// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod datamodel;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod par;
pub mod scoring;
pub mod similarity;
pub mod synth;
pub mod tracker;

pub use error::{Error, Result, Stage};
