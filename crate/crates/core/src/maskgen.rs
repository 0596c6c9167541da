//! Masked-token pretraining samples.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{DatasetRecord, Split};

pub const MASK: &str = "[MASK]";
pub const SEP: &str = "[SEP]";
pub const DEFAULT_MASK_PROB: f64 = 0.15;

const OPERATORS: [&str; 14] = [
    "**=", "//=", "==", "!=", "<=", ">=", "//", "**", "+=", "-=", "*=", "/=", "%=", "->",
];

/// A token with its character span `[start, end)` in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Word-level tokenization. Whitespace separates tokens, `[SEP]` and `[MASK]`
/// stay whole, quoted strings stay whole, and punctuation is split off.
pub fn word_tokenize_spans(t: &str) -> Vec<Token> {
    let chars: Vec<char> = t.chars().collect();
    let starts_with = |i: usize, pat: &str| pat.chars().enumerate().all(|(k, c)| chars.get(i + k) == Some(&c));
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if let Some(special) = [SEP, MASK].into_iter().find(|s| starts_with(i, s)) {
            i += special.chars().count();
        } else if c == '\'' || c == '"' {
            let mut k = i + 1;
            let mut closed = false;
            while k < chars.len() {
                if chars[k] == '\\' {
                    k += 2;
                    continue;
                }
                if chars[k] == c {
                    closed = true;
                    break;
                }
                k += 1;
            }
            i = if closed { k + 1 } else { i + 1 };
        } else if c.is_alphanumeric() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
        } else if let Some(op) = OPERATORS.iter().find(|op| starts_with(i, op)) {
            i += op.len();
        } else {
            i += 1;
        }
        out.push(Token {
            text: chars[start..i].iter().collect(),
            start,
            end: i,
        });
    }
    out
}

pub fn word_tokenize(t: &str) -> Vec<String> {
    word_tokenize_spans(t).into_iter().map(|t| t.text).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedSample {
    pub original: Vec<String>,
    pub masked: Vec<String>,
    pub mask_positions: Vec<usize>,
}

impl MaskedSample {
    /// Puts the original tokens back at the masked positions.
    pub fn reconstruct(&self) -> Vec<String> {
        let mut out = self.masked.clone();
        for &i in &self.mask_positions {
            out[i] = self.original[i].clone();
        }
        out
    }
}

fn mask_indices(tokens: &[String], p: f64, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.as_str() != SEP)
        .filter(|_| rng.gen::<f64>() < p)
        .map(|(i, _)| i)
        .collect()
}

/// Replaces each token except `[SEP]` by `[MASK]` with probability `p`.
pub fn mask(tokens: &[String], p: f64, seed: u64) -> MaskedSample {
    assert!((0.0..=1.0).contains(&p), "mask probability {p} outside [0, 1]");
    let mask_positions = mask_indices(tokens, p, seed);
    let mut masked = tokens.to_vec();
    for &i in &mask_positions {
        masked[i] = MASK.to_string();
    }
    MaskedSample {
        original: tokens.to_vec(),
        masked,
        mask_positions,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSource {
    Code,
    Encoding,
}

/// One line of the pretraining JSONL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PretrainRecord {
    pub source: SampleSource,
    pub original: String,
    pub masked: String,
    pub mask_spans: Vec<[usize; 2]>,
}

impl PretrainRecord {
    /// Masks `text` at word level and records the character spans that were
    /// replaced.
    pub fn from_text(source: SampleSource, text: &str, p: f64, seed: u64) -> PretrainRecord {
        let spans = word_tokenize_spans(text);
        let tokens: Vec<String> = spans.iter().map(|t| t.text.clone()).collect();
        let sample = mask(&tokens, p, seed);
        let chars: Vec<char> = text.chars().collect();
        let mut masked = String::with_capacity(text.len());
        let mut mask_spans = Vec::with_capacity(sample.mask_positions.len());
        let mut cursor = 0;
        for &i in &sample.mask_positions {
            let t = &spans[i];
            masked.extend(&chars[cursor..t.start]);
            masked.push_str(MASK);
            mask_spans.push([t.start, t.end]);
            cursor = t.end;
        }
        masked.extend(&chars[cursor..]);
        PretrainRecord {
            source,
            original: text.to_string(),
            masked,
            mask_spans,
        }
    }

    /// Rebuilds the original text from `masked` by filling each span back in.
    /// Returns `None` when `masked` and the spans disagree.
    pub fn unmask(&self) -> Option<String> {
        let orig: Vec<char> = self.original.chars().collect();
        let mut rest = self.masked.as_str();
        let mut out = String::with_capacity(self.original.len());
        let mut cursor = 0;
        for &[s, e] in &self.mask_spans {
            let gap: String = orig.get(cursor..s)?.iter().collect();
            rest = rest.strip_prefix(gap.as_str())?.strip_prefix(MASK)?;
            out.push_str(&gap);
            out.extend(orig.get(s..e)?);
            cursor = e;
        }
        let tail: String = orig[cursor..].iter().collect();
        (rest == tail).then(|| out + &tail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaskError {
    #[error("record {id} belongs to split {split}; pretraining data must be train only")]
    SplitLeakage { id: String, split: Split },
}

fn sample_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// One code sample per original and augmented record, then one encoding
/// sample (modified string) per original record.
pub fn build_pretrain_corpus(
    train: &[DatasetRecord],
    augmented: &[DatasetRecord],
    p: f64,
    seed: u64,
) -> Result<Vec<PretrainRecord>, MaskError> {
    if let Some(r) = train.iter().chain(augmented).find(|r| r.split != Split::Train) {
        return Err(MaskError::SplitLeakage {
            id: r.id.clone(),
            split: r.split,
        });
    }
    let codes = train
        .iter()
        .chain(augmented)
        .map(|r| (SampleSource::Code, r.code.as_str()));
    let encodings = train.iter().map(|r| (SampleSource::Encoding, r.enc_modified.as_str()));
    Ok(codes
        .chain(encodings)
        .enumerate()
        .map(|(i, (src, text))| PretrainRecord::from_text(src, text, p, sample_seed(seed, i)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            word_tokenize("start fun1, OVAL [SEP]"),
            toks(&["start", "fun1", ",", "OVAL", "[SEP]"])
        );
        assert!(word_tokenize("").is_empty());
        assert_eq!(word_tokenize("[MASK]"), toks(&["[MASK]"]));
        assert_eq!(
            word_tokenize("y = ((16 + x) - 20)"),
            toks(&["y", "=", "(", "(", "16", "+", "x", ")", "-", "20", ")"])
        );
        assert_eq!(
            word_tokenize("print('a b', x)"),
            toks(&["print", "(", "'a b'", ",", "x", ")"])
        );
        assert_eq!(
            word_tokenize("if a<=b//2:"),
            toks(&["if", "a", "<=", "b", "//", "2", ":"])
        );
    }

    #[test]
    fn mask_extremes() {
        let t = toks(&["start", "fun1", ",", "OVAL", "[SEP]"]);
        let none = mask(&t, 0.0, 1);
        assert_eq!(none.masked, t);
        assert!(none.mask_positions.is_empty());
        let all = mask(&t, 1.0, 1);
        assert_eq!(all.masked, toks(&["[MASK]", "[MASK]", "[MASK]", "[MASK]", "[SEP]"]));
        assert_eq!(all.reconstruct(), t);
    }

    #[test]
    fn text_spans_rebuild_original() {
        let text = "def f(x):\n    return 'é' + x\n";
        let r = PretrainRecord::from_text(SampleSource::Code, text, 0.5, 4);
        assert!(!r.mask_spans.is_empty());
        assert_eq!(r.unmask().as_deref(), Some(text));
        assert_eq!(r.masked.matches(MASK).count(), r.mask_spans.len());
    }

    #[test]
    fn pretrain_counts_and_leakage() {
        let mut a = DatasetRecord::from_source("def f(x):\n    return x\n", "t").unwrap();
        a.split = Split::Train;
        let mut b = a.clone();
        b.provenance.parent_id = Some(a.id.clone());
        let out = build_pretrain_corpus(&[a.clone()], &[b.clone(), b], 0.15, 0).unwrap();
        assert_eq!(out.len(), 4);
        assert_eq!(out.iter().filter(|r| r.source == SampleSource::Encoding).count(), 1);
        assert!(build_pretrain_corpus(&[], &[], 0.15, 0).unwrap().is_empty());
        a.split = Split::Test;
        assert!(matches!(
            build_pretrain_corpus(&[a], &[], 0.15, 0),
            Err(MaskError::SplitLeakage { .. })
        ));
    }
}
