//! Code generation metrics: BLEU, CodeBLEU and exact match.

mod bleu;
mod codebleu;
mod report;

use thiserror::Error;

pub use bleu::{bleu, code_tokens, weighted_ngram, NgramCounts, MAX_N};
pub use codebleu::{
    ast_counts, codebleu, dataflow_counts, dataflow_edges, program_tree, CodeBleu, CodeBleuWeights, DefUse, Tree,
};
pub use report::{line_count, report, scores, LengthBin, MetricReport, Prediction, Scores, LENGTH_BINS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("{candidates} candidates but {references} references")]
    LengthMismatch { candidates: usize, references: usize },
    #[error("no candidate/reference pairs")]
    EmptyCorpus,
    #[error("reference {0} does not parse")]
    ReferenceUnparseable(usize),
    #[error("prediction ids do not match reference ids ({} missing, {} unexpected)", missing.len(), unexpected.len())]
    IdMismatch {
        missing: Vec<String>,
        unexpected: Vec<String>,
    },
}

/// Strips trailing whitespace from every line and ends with one newline.
pub fn normalize(code: &str) -> String {
    let mut out: String = code.lines().map(|l| l.trim_end()).collect::<Vec<_>>().join("\n");
    let trimmed = out.trim_end_matches('\n').len();
    out.truncate(trimmed);
    out.push('\n');
    out
}

/// Percentage of pairs equal after [`normalize`].
pub fn exact_match<S: AsRef<str>, T: AsRef<str>>(candidates: &[S], references: &[T]) -> Result<f64, MetricError> {
    bleu::check_lengths(candidates.len(), references.len())?;
    let hits = candidates
        .iter()
        .zip(references)
        .filter(|(c, r)| normalize(c.as_ref()) == normalize(r.as_ref()))
        .count();
    Ok(100.0 * hits as f64 / candidates.len() as f64)
}
