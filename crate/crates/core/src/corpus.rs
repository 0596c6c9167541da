//! Dataset records, corpus building, splitting and JSONL persistence.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::augment::AugMode;
use crate::code2flow::lower;
use crate::codeparse::{canonicalize, parse, print_canonical, ParseError, Program};
use crate::encode::{encode, EncodingVariant};
use crate::flowgraph::FlowGraph;

const SEP_JOIN: &str = " [SEP] ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    Val,
    Unassigned,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Val => "val",
            Split::Unassigned => "unassigned",
        })
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            "val" => Ok(Split::Val),
            "unassigned" => Ok(Split::Unassigned),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub parent_id: Option<String>,
    pub aug_mode: Option<AugMode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub code: String,
    pub graph: FlowGraph,
    pub enc_tuple: String,
    pub enc_string: String,
    pub enc_modified: String,
    pub split: Split,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("block text of node {node} contains the separator \" [SEP] \"")]
    SeparatorInText { node: String },
}

/// Graph and encodings derived from one code text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derived {
    pub graph: FlowGraph,
    pub enc_tuple: String,
    pub enc_string: String,
    pub enc_modified: String,
}

/// Lowers `p` and computes its three encodings.
pub fn derive(p: &Program) -> Result<Derived, RecordError> {
    let graph = lower(p);
    if let Some(n) = graph.nodes.iter().find(|n| n.text.contains(SEP_JOIN)) {
        return Err(RecordError::SeparatorInText { node: n.id.clone() });
    }
    let enc = |v| encode(&graph, v).expect("lowered graphs are valid");
    Ok(Derived {
        enc_tuple: enc(EncodingVariant::Tuple),
        enc_string: enc(EncodingVariant::String),
        enc_modified: enc(EncodingVariant::ModifiedString),
        graph,
    })
}

pub fn content_id(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            h.update([0u8]);
        }
        h.update(p.as_bytes());
    }
    hex::encode(h.finalize())[..16].to_string()
}

impl DatasetRecord {
    /// Builds an unassigned record from source text. The stored code is the
    /// canonical form of the parsed program.
    pub fn from_source(src: &str, source: &str) -> Result<DatasetRecord, RecordError> {
        let p = canonicalize(&parse(src)?);
        Self::from_program(&p, source)
    }

    pub fn from_program(p: &Program, source: &str) -> Result<DatasetRecord, RecordError> {
        let code = print_canonical(p);
        let d = derive(p)?;
        Ok(DatasetRecord {
            id: content_id(&[&code]),
            code,
            graph: d.graph,
            enc_tuple: d.enc_tuple,
            enc_string: d.enc_string,
            enc_modified: d.enc_modified,
            split: Split::Unassigned,
            provenance: Provenance {
                source: source.to_string(),
                parent_id: None,
                aug_mode: None,
            },
        })
    }

    /// Recomputes graph and encodings from `code` and compares them with the
    /// stored values byte for byte.
    pub fn regenerates(&self) -> bool {
        let Ok(p) = parse(&self.code) else {
            return false;
        };
        let Ok(d) = derive(&p) else {
            return false;
        };
        d.graph.to_json() == self.graph.to_json()
            && d.enc_tuple == self.enc_tuple
            && d.enc_string == self.enc_string
            && d.enc_modified == self.enc_modified
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skip {
    pub index: usize,
    pub source: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildOutput {
    pub records: Vec<DatasetRecord>,
    pub skipped: Vec<Skip>,
    pub warnings: Vec<String>,
}

/// Builds records from `(source name, text)` pairs. Out-of-subset programs
/// are skipped and duplicates (same canonical code) are dropped.
pub fn build(programs: &[(String, String)]) -> BuildOutput {
    let mut out = BuildOutput::default();
    let mut seen = HashSet::new();
    for (index, (source, text)) in programs.iter().enumerate() {
        match DatasetRecord::from_source(text, source) {
            Ok(r) => {
                if seen.insert(r.id.clone()) {
                    out.records.push(r);
                } else {
                    out.warnings
                        .push(format!("duplicate program {source} (id {}) dropped", r.id));
                }
            }
            Err(e) => out.skipped.push(Skip {
                index,
                source: source.clone(),
                reason: skip_reason(&e),
            }),
        }
    }
    out
}

fn skip_reason(e: &RecordError) -> String {
    match e {
        RecordError::Parse(ParseError::Unsupported { .. }) => format!("UnsupportedFeature: {e}"),
        RecordError::Parse(ParseError::Syntax { .. }) => format!("SyntaxError: {e}"),
        RecordError::SeparatorInText { .. } => format!("SeparatorCollision: {e}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitRatio {
    pub train: u32,
    pub test: u32,
    pub val: u32,
}

impl Default for SplitRatio {
    fn default() -> Self {
        SplitRatio {
            train: 85,
            test: 10,
            val: 5,
        }
    }
}

impl FromStr for SplitRatio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<u32> = s
            .split(':')
            .map(|p| p.trim().parse::<u32>().map_err(|e| format!("bad ratio `{s}`: {e}")))
            .collect::<Result<_, _>>()?;
        let [train, test, val] = parts[..] else {
            return Err(format!("ratio `{s}` must have three parts"));
        };
        if train + test + val != 100 {
            return Err(format!("ratio `{s}` does not sum to 100"));
        }
        Ok(SplitRatio { train, test, val })
    }
}

impl SplitRatio {
    /// Split sizes for `n` records by largest-remainder rounding. Ties in the
    /// remainder go to train, then test, then val.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let shares = [self.train as usize, self.test as usize, self.val as usize];
        let mut counts = shares.map(|s| n * s / 100);
        let rems = shares.map(|s| n * s % 100);
        let mut left = n - counts.iter().sum::<usize>();
        let mut order = [0usize, 1, 2];
        order.sort_by_key(|&i| std::cmp::Reverse(rems[i]));
        for i in order {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        (counts[0], counts[1], counts[2])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("record {id} already has split {split}")]
    AlreadySplit { id: String, split: Split },
}

/// Assigns splits by a seeded permutation. Records keep their input order.
pub fn split(mut records: Vec<DatasetRecord>, ratio: SplitRatio, seed: u64) -> Result<Vec<DatasetRecord>, SplitError> {
    if let Some(r) = records.iter().find(|r| r.split != Split::Unassigned) {
        return Err(SplitError::AlreadySplit {
            id: r.id.clone(),
            split: r.split,
        });
    }
    let (train, test, _) = ratio.sizes(records.len());
    let mut perm: Vec<usize> = (0..records.len()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    for (rank, &i) in perm.iter().enumerate() {
        records[i].split = if rank < train {
            Split::Train
        } else if rank < train + test {
            Split::Test
        } else {
            Split::Val
        };
    }
    Ok(records)
}

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, JsonlError> {
    parse_jsonl(BufReader::new(File::open(path)?))
}

/// Parses one JSON value per line. Blank lines are ignored; line numbers in
/// errors are 1-based.
pub fn parse_jsonl<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>, JsonlError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line).map_err(|e| JsonlError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), JsonlError> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}
