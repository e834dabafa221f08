//! Classification and retrieval metrics, expert agreement, the discrete
//! baseline, and evaluation reports.

mod agreement;
mod baseline;
pub mod metrics;
mod report;
mod retrieval;

pub use agreement::{agreement_cell, agreement_matrix, AgreementMatrix};
pub use baseline::{baseline_train_discrete, CrossEntropyObjective};
pub use metrics::{average_precision, hit_at_k, ndcg, RankedQuery, RetrievalRun};
pub use report::{
    classification_report, evaluate, ClassificationReport, EvaluationReport, RetrievalReport, StyleAccuracy,
    REPORT_FORMAT, REPORT_VERSION,
};
pub use retrieval::{retrieval_run, retrieve_nearest, Neighbor};
