//! Every example under examples/ must run to completion.

mod comparison_labels {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/comparison_labels.rs"));
}

mod train_style_head {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/train_style_head.rs"));
}

mod hyperparameter_grid {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/hyperparameter_grid.rs"));
}

mod discrete_baseline {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/discrete_baseline.rs"));
}

mod evaluation_report {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/evaluation_report.rs"));
}

mod furniture_index {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/furniture_index.rs"));
}

mod suggestion_service {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/suggestion_service.rs"));
}

mod cli_pipeline {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/cli_pipeline.rs"));
}

#[test]
fn comparison_labels_runs() {
    comparison_labels::run_example().expect("comparison_labels example failed");
}

#[test]
fn train_style_head_runs() {
    train_style_head::run_example().expect("train_style_head example failed");
}

#[test]
fn hyperparameter_grid_runs() {
    hyperparameter_grid::run_example().expect("hyperparameter_grid example failed");
}

#[test]
fn discrete_baseline_runs() {
    discrete_baseline::run_example().expect("discrete_baseline example failed");
}

#[test]
fn evaluation_report_runs() {
    evaluation_report::run_example().expect("evaluation_report example failed");
}

#[test]
fn furniture_index_runs() {
    furniture_index::run_example().expect("furniture_index example failed");
}

#[test]
fn suggestion_service_runs() {
    suggestion_service::run_example().expect("suggestion_service example failed");
}

#[test]
fn cli_pipeline_runs() {
    cli_pipeline::run_example().expect("cli_pipeline example failed");
}
