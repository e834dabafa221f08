use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::compat::embed_table;
use crate::dataset::{AnnotationStore, FeatureTable, StyleMembership};
use crate::error::{Error, Result};
use crate::eval::agreement::{agreement_matrix, AgreementMatrix};
use crate::eval::retrieval::retrieval_run;
use crate::style::Styles;
use crate::stylenet::StyleHead;

pub const REPORT_FORMAT: &str = "stylerank-eval";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleAccuracy {
    pub style: String,
    pub support: usize,
    pub correct: usize,
    /// `None` when no test image carries the style.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub per_style: Vec<StyleAccuracy>,
    /// Correct predictions over all labeled examples.
    pub overall: f64,
    /// Unweighted mean over styles with nonzero support.
    pub macro_average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalReport {
    pub queries: usize,
    pub excluded_queries: usize,
    pub cutoff: usize,
    pub recall_at_1: f64,
    pub recall_at_cutoff: f64,
    pub map: f64,
    pub map_at_cutoff: f64,
    pub ndcg: f64,
    pub ndcg_at_cutoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub format: String,
    pub version: u32,
    pub styles: Vec<String>,
    pub test_images: usize,
    pub classification: ClassificationReport,
    pub retrieval: RetrievalReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement: Option<AgreementMatrix>,
}

/// Per-style and aggregate accuracy of argmax predictions. An image listed
/// under several styles is scored once per listed style.
pub fn classification_report(
    head: &StyleHead,
    features: &FeatureTable,
    truth: &StyleMembership,
    styles: &Styles,
) -> Result<ClassificationReport> {
    if truth.is_empty() {
        return Err(Error::Empty("ground-truth set"));
    }
    let mut support = vec![0usize; styles.len()];
    let mut correct = vec![0usize; styles.len()];
    for (id, s) in &truth.entries {
        if s.0 >= styles.len() {
            return Err(Error::UnknownStyle(s.to_string()));
        }
        support[s.0] += 1;
        if head.classify(features.require(id)?)? == *s {
            correct[s.0] += 1;
        }
    }
    let per_style: Vec<StyleAccuracy> = styles
        .ids()
        .map(|s| StyleAccuracy {
            style: styles.name(s).to_string(),
            support: support[s.0],
            correct: correct[s.0],
            accuracy: (support[s.0] > 0).then(|| correct[s.0] as f64 / support[s.0] as f64),
        })
        .collect();
    let present: Vec<f64> = per_style.iter().filter_map(|p| p.accuracy).collect();
    Ok(ClassificationReport {
        overall: correct.iter().sum::<usize>() as f64 / truth.len() as f64,
        macro_average: present.iter().sum::<f64>() / present.len() as f64,
        per_style,
    })
}

/// Classification and retrieval metrics for a trained head on a labeled
/// test set, plus the expert agreement matrix when annotations are given.
pub fn evaluate(
    head: &StyleHead,
    features: &FeatureTable,
    truth: &StyleMembership,
    styles: &Styles,
    annotations: Option<&AnnotationStore>,
    cutoff: usize,
) -> Result<EvaluationReport> {
    if cutoff == 0 {
        return Err(Error::InvalidConfig("cutoff must be at least 1".into()));
    }
    let classification = classification_report(head, features, truth, styles)?;

    let mut test_features = FeatureTable::new(features.dim());
    let mut last: Option<&str> = None;
    for (id, _) in &truth.entries {
        if last != Some(id.as_str()) {
            test_features.push(id.as_str(), features.require(id)?)?;
            last = Some(id);
        }
    }
    let embeddings = embed_table(head, &test_features)?;
    let run = retrieval_run(&embeddings, truth)?;
    let retrieval = RetrievalReport {
        queries: run.queries.len(),
        excluded_queries: run.excluded,
        cutoff,
        recall_at_1: run.recall_at_k(1),
        recall_at_cutoff: run.recall_at_k(cutoff),
        map: run.mean_average_precision(None),
        map_at_cutoff: run.mean_average_precision(Some(cutoff)),
        ndcg: run.ndcg(None),
        ndcg_at_cutoff: run.ndcg(Some(cutoff)),
    };

    Ok(EvaluationReport {
        format: REPORT_FORMAT.to_string(),
        version: REPORT_VERSION,
        styles: styles.names().to_vec(),
        test_images: test_features.len(),
        classification,
        retrieval,
        agreement: annotations.map(agreement_matrix),
    })
}

impl EvaluationReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("evaluation report", e))
    }

    /// Flat `section,metric,style,value` rows. Missing values are empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "section,metric,style,value")?;
        let c = &self.classification;
        for p in &c.per_style {
            let v = p.accuracy.map(|a| a.to_string()).unwrap_or_default();
            writeln!(w, "classification,accuracy,{},{v}", p.style)?;
        }
        writeln!(w, "classification,overall,,{}", c.overall)?;
        writeln!(w, "classification,macro_average,,{}", c.macro_average)?;
        let r = &self.retrieval;
        let k = r.cutoff;
        for (name, v) in [
            ("recall_at_1".to_string(), r.recall_at_1),
            (format!("recall_at_{k}"), r.recall_at_cutoff),
            ("map".to_string(), r.map),
            (format!("map_at_{k}"), r.map_at_cutoff),
            ("ndcg".to_string(), r.ndcg),
            (format!("ndcg_at_{k}"), r.ndcg_at_cutoff),
        ] {
            writeln!(w, "retrieval,{name},,{v}")?;
        }
        writeln!(w, "retrieval,queries,,{}", r.queries)?;
        writeln!(w, "retrieval,excluded_queries,,{}", r.excluded_queries)?;
        if let Some(m) = &self.agreement {
            for (a, row) in m.cells.iter().enumerate() {
                for (b, cell) in row.iter().enumerate() {
                    if let Some(v) = cell {
                        writeln!(w, "agreement,{},{},{v}", m.styles[a], m.styles[b])?;
                    }
                }
            }
        }
        Ok(())
    }
}
