//! Corpus BLEU over code tokens, with an optional per-token weight on
//! unigram counts.

use std::collections::HashMap;

use crate::codeparse::lexer::{tokenize, Tok, SUPPORTED_KW};
use crate::codeparse::parse;
use crate::maskgen::word_tokenize;

use super::MetricError;

pub const MAX_N: usize = 4;

/// Lexer tokens (without layout tokens) when `code` parses, otherwise
/// whitespace-and-punctuation splitting.
pub fn code_tokens(code: &str) -> Vec<String> {
    if parse(code).is_ok() {
        if let Ok(toks) = tokenize(code) {
            return toks
                .into_iter()
                .filter(|t| !matches!(t.tok, Tok::Newline | Tok::Indent | Tok::Dedent | Tok::Eof))
                .map(|t| code[t.span.0..t.span.1].to_string())
                .collect();
        }
    }
    word_tokenize(code)
}

pub fn is_keyword_token(t: &str) -> bool {
    SUPPORTED_KW.contains(&t)
}

fn ngrams(toks: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut m: HashMap<&[String], usize> = HashMap::new();
    for g in toks.windows(n) {
        *m.entry(g).or_default() += 1;
    }
    m
}

/// Clipped n-gram matches and candidate n-gram totals, pooled over a corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NgramCounts {
    pub matches: [f64; MAX_N],
    pub totals: [f64; MAX_N],
    pub cand_len: usize,
    pub ref_len: usize,
}

impl NgramCounts {
    /// Adds one pair. Unigrams are weighted by `weight(token)`; longer
    /// n-grams count 1 each.
    pub fn add(&mut self, cand: &[String], reference: &[String], weight: &impl Fn(&str) -> f64) {
        self.cand_len += cand.len();
        self.ref_len += reference.len();
        for n in 1..=MAX_N {
            let (c, r) = (ngrams(cand, n), ngrams(reference, n));
            let w = |g: &[String]| if n == 1 { weight(&g[0]) } else { 1.0 };
            for (g, &count) in &c {
                let clipped = count.min(r.get(g).copied().unwrap_or(0));
                self.matches[n - 1] += w(g) * clipped as f64;
                self.totals[n - 1] += w(g) * count as f64;
            }
        }
    }

    /// BLEU in [0, 1]. Orders n >= 2 without any match use (m+1)/(t+1).
    pub fn score(&self) -> f64 {
        if self.cand_len == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        for n in 0..MAX_N {
            let (m, t) = (self.matches[n], self.totals[n]);
            let p = if n > 0 && m == 0.0 {
                (m + 1.0) / (t + 1.0)
            } else if t > 0.0 {
                m / t
            } else {
                0.0
            };
            if p == 0.0 {
                return 0.0;
            }
            log_sum += p.ln() / MAX_N as f64;
        }
        let (c, r) = (self.cand_len as f64, self.ref_len as f64);
        let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
        bp * log_sum.exp()
    }
}

pub(crate) fn check_lengths(c: usize, r: usize) -> Result<(), MetricError> {
    if c != r {
        return Err(MetricError::LengthMismatch {
            candidates: c,
            references: r,
        });
    }
    if c == 0 {
        return Err(MetricError::EmptyCorpus);
    }
    Ok(())
}

pub(crate) fn pooled<S: AsRef<str>, T: AsRef<str>>(
    candidates: &[S],
    references: &[T],
    weight: impl Fn(&str) -> f64,
) -> NgramCounts {
    let mut counts = NgramCounts::default();
    for (c, r) in candidates.iter().zip(references) {
        counts.add(&code_tokens(c.as_ref()), &code_tokens(r.as_ref()), &weight);
    }
    counts
}

/// Corpus-level BLEU on a 0-100 scale.
pub fn bleu<S: AsRef<str>, T: AsRef<str>>(candidates: &[S], references: &[T]) -> Result<f64, MetricError> {
    check_lengths(candidates.len(), references.len())?;
    Ok(100.0 * pooled(candidates, references, |_| 1.0).score())
}

/// BLEU in [0, 1] with keyword unigrams counted `factor` times.
pub fn weighted_ngram<S: AsRef<str>, T: AsRef<str>>(
    candidates: &[S],
    references: &[T],
    factor: f64,
) -> Result<f64, MetricError> {
    check_lengths(candidates.len(), references.len())?;
    Ok(pooled(
        candidates,
        references,
        |t| if is_keyword_token(t) { factor } else { 1.0 },
    )
    .score())
}
