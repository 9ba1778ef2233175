//! Dataset tooling: auto-labels from detections, a quality gate, augmentation
//! with negative-sample control, manifest records and edge scoring.

mod augment;
mod label;
mod manifest;
mod score;

pub use augment::{augment, plan_augmentations, AugmentOp, AugmentSpec, AugmentedSample};
pub use label::{quality_filter, rasterize_label, QualityGate};
pub use manifest::{assign_splits, DatasetManifest, ManifestRecord, Split, SplitWeights};
pub use score::{ods_ois, score_edges, score_soft, threshold_grid, EdgeScore, MatchCounts, OdsOis};
