//! Exact-match scoring against single or multiple reference products.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{read_records, DatasetError, DatasetRecord};
use crate::molgraph::{parse_smiles, write_canonical};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("unparseable reference '{smiles}': {message}")]
    Reference { smiles: String, message: String },
    #[error("empty reference set")]
    NoReferences,
    #[error("{0}: empty file")]
    Empty(PathBuf),
    #[error("{predictions} predictions for {references} reference records")]
    LineCount { predictions: usize, references: usize },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl Score {
    fn new(total: usize, correct: usize) -> Self {
        Score {
            total,
            correct,
            accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub per_template: BTreeMap<usize, Score>,
}

fn canonical(s: &str) -> Option<String> {
    if s.trim().is_empty() {
        return None;
    }
    parse_smiles(s.trim()).ok().map(|m| write_canonical(&m))
}

fn canonical_references(refs: &[String]) -> Result<BTreeSet<String>, EvalError> {
    if refs.is_empty() {
        return Err(EvalError::NoReferences);
    }
    refs.iter()
        .map(|r| {
            parse_smiles(r)
                .map(|m| write_canonical(&m))
                .map_err(|e| EvalError::Reference {
                    smiles: r.clone(),
                    message: e.to_string(),
                })
        })
        .collect()
}

/// Whether `prediction` is canonically equal to any reference. An
/// unparseable prediction is a miss; an unparseable reference is an error.
pub fn exact_match(prediction: &str, references: &[String]) -> Result<bool, EvalError> {
    let refs = canonical_references(references)?;
    Ok(canonical(prediction).is_some_and(|p| refs.contains(&p)))
}

/// Score line-aligned predictions against records.
pub fn evaluate_records(predictions: &[String], records: &[DatasetRecord]) -> Result<EvalReport, EvalError> {
    if predictions.len() != records.len() {
        return Err(EvalError::LineCount {
            predictions: predictions.len(),
            references: records.len(),
        });
    }
    let mut per: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut correct = 0;
    for (p, r) in predictions.iter().zip(records) {
        let hit = exact_match(p, &r.products)?;
        let e = per.entry(r.template_id).or_default();
        e.0 += 1;
        if hit {
            e.1 += 1;
            correct += 1;
        }
    }
    let total = Score::new(records.len(), correct);
    Ok(EvalReport {
        total: total.total,
        correct,
        accuracy: total.accuracy,
        per_template: per.into_iter().map(|(k, (t, c))| (k, Score::new(t, c))).collect(),
    })
}

/// `pred_file` holds one SMILES per line (blank lines are wrong answers);
/// `ref_file` holds dataset records.
pub fn evaluate(pred_file: &Path, ref_file: &Path) -> Result<EvalReport, EvalError> {
    let text = fs::read_to_string(pred_file).map_err(|source| EvalError::Io {
        path: pred_file.to_path_buf(),
        source,
    })?;
    let predictions: Vec<String> = text.lines().map(str::to_string).collect();
    if predictions.is_empty() {
        return Err(EvalError::Empty(pred_file.to_path_buf()));
    }
    let records = read_records(ref_file)?;
    if records.is_empty() {
        return Err(EvalError::Empty(ref_file.to_path_buf()));
    }
    evaluate_records(&predictions, &records)
}
