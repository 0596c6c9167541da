//! Whole-corpus and length-binned scoring of predictions against a split.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::DatasetRecord;

use super::codebleu::{codebleu, CodeBleu, CodeBleuWeights};
use super::{bleu, exact_match, MetricError};

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub count: usize,
    pub bleu: f64,
    pub codebleu: CodeBleu,
    pub em: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthBin {
    /// Inclusive line-count range; `max` is absent for the open last bin.
    pub min: usize,
    pub max: Option<usize>,
    /// Absent when no reference falls in the bin.
    pub scores: Option<Scores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    #[serde(flatten)]
    pub overall: Scores,
    pub by_length: Vec<LengthBin>,
}

pub const LENGTH_BINS: [(usize, Option<usize>); 5] =
    [(1, Some(3)), (4, Some(6)), (7, Some(9)), (10, Some(12)), (13, None)];

/// Non-blank lines of a program.
pub fn line_count(code: &str) -> usize {
    code.lines().filter(|l| !l.trim().is_empty()).count()
}

pub fn scores(candidates: &[&str], references: &[&str], weights: &CodeBleuWeights) -> Result<Scores, MetricError> {
    Ok(Scores {
        count: candidates.len(),
        bleu: bleu(candidates, references)?,
        codebleu: codebleu(candidates, references, weights)?,
        em: exact_match(candidates, references)?,
    })
}

/// Scores `predictions` against `references`. Both must cover exactly the
/// same ids.
pub fn report(
    predictions: &[Prediction],
    references: &[DatasetRecord],
    weights: &CodeBleuWeights,
) -> Result<MetricReport, MetricError> {
    let preds: BTreeMap<&str, &str> = predictions.iter().map(|p| (p.id.as_str(), p.code.as_str())).collect();
    let ref_ids: BTreeSet<&str> = references.iter().map(|r| r.id.as_str()).collect();
    let missing: Vec<String> = ref_ids
        .iter()
        .filter(|id| !preds.contains_key(*id))
        .map(|s| s.to_string())
        .collect();
    let unexpected: Vec<String> = preds
        .keys()
        .filter(|id| !ref_ids.contains(*id))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() || !unexpected.is_empty() || references.is_empty() || preds.len() != predictions.len() {
        return Err(MetricError::IdMismatch { missing, unexpected });
    }
    let pairs: Vec<(&str, &str)> = references
        .iter()
        .map(|r| (preds[r.id.as_str()], r.code.as_str()))
        .collect();
    let (c, r): (Vec<&str>, Vec<&str>) = pairs.iter().copied().unzip();
    let overall = scores(&c, &r, weights)?;
    let mut by_length = Vec::new();
    for (min, max) in LENGTH_BINS {
        let sel: Vec<(&str, &str)> = pairs
            .iter()
            .copied()
            .filter(|(_, r)| {
                let n = line_count(r);
                n >= min && max.is_none_or(|m| n <= m)
            })
            .collect();
        let scores = if sel.is_empty() {
            None
        } else {
            let (c, r): (Vec<&str>, Vec<&str>) = sel.into_iter().unzip();
            Some(scores(&c, &r, weights)?)
        };
        by_length.push(LengthBin { min, max, scores });
    }
    Ok(MetricReport { overall, by_length })
}
