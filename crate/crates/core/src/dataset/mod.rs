//! Images, expert annotations, feature vectors, splits and style sets.

mod annotations;
mod features;
mod manifest;
mod splits;
mod style_sets;
pub mod synthetic;

pub use annotations::{ingest_annotations, read_annotations, Annotation, AnnotationStore, LabelCounts};
pub use features::{FeatureTable, ImageRecord, FEATURE_MAGIC, FEATURE_VERSION};
pub use manifest::{DatasetImage, DatasetManifest, DATASET_VERSION};
pub use splits::{assign_splits, Split, SplitAssignment, SplitFractions};
pub use style_sets::{build_style_set, clean_ground_truth, MembershipRule, StyleMembership, ValidationSetSpec};
