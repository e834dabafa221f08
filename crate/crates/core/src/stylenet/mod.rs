//! The trainable style head and its training machinery.

pub mod checkpoint;
pub mod gradient;
pub mod grid;
pub mod head;
pub mod loss;
pub mod rmsprop;
pub mod train;

pub use checkpoint::Checkpoint;
pub use gradient::{batch_gradient, comparison_gradient, objective, regularizer_gradient, BatchGradient, PairExample};
pub use grid::{grid_search, select_best, GridCell, GridOutcome, GridSpec};
pub use head::{ForwardResult, Params, ScoreSource, StyleHead, DEFAULT_HIDDEN};
pub use loss::{bt_loss, sigmoid};
pub use rmsprop::RmsProp;
pub use train::{
    accuracy, fit, resolve_labeled, train, EpochMetrics, LabeledExamples, Objective, TrainConfig, TrainOutcome,
};
