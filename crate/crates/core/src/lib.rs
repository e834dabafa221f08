//! Style-compatibility learning and furniture suggestion.
//!
//! The crate learns a per-image style spectrum from noisy multi-expert
//! style labels. Expert labels are turned into pairwise comparison labels
//! ("image i carries more *Modern* labels than image j"), and a small
//! two-layer head over precomputed image features is trained with a
//! Bradley-Terry pairwise loss through a weight-shared siamese pair.
//!
//! The hidden activation of that head is used as a style embedding. Furniture
//! items are compared through the embeddings of the scene images they appear
//! in, which powers single-seed and multi-seed suggestions and a scene-level
//! compatibility energy.
//!
//! Module map:
//!
//! - [`dataset`]: annotations, label counts, feature files, splits, style sets,
//!   synthetic data.
//! - [`comparisons`]: comparison-label generation and sampling.
//! - [`stylenet`]: the trainable head, loss, gradients, RMSProp, training and
//!   grid search, checkpoints.
//! - [`compat`]: furniture registry, visual validation, furniture distance,
//!   ranking strategies and the precomputed compatibility index.
//! - [`eval`]: classification and retrieval metrics, expert agreement, the
//!   discrete-label baseline and evaluation reports.
//! - [`service`]: the HTTP suggestion service.
//! - [`cli`]: the command-line pipeline driver.

pub mod cli;
pub mod comparisons;
pub mod compat;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod rng;
pub mod service;
pub mod style;
pub mod stylenet;

pub use error::{Error, Result};
pub use style::{StyleId, Styles};
