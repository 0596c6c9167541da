//! Identifier-renaming augmentation.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codeparse::{
    all_names, apply_renaming, identifiers, is_builtin, is_keyword, parse, print_canonical, Program, Renaming,
};
use crate::corpus::{content_id, derive, DatasetRecord, Provenance, Split};

pub const FUNCTION_NAME_LEN: (usize, usize) = (4, 13);
pub const VARIABLE_NAME_LEN: (usize, usize) = (1, 3);

const FIRST_CHARS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_";
const REST_CHARS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_0123456789";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugMode {
    Functions,
    Variables,
    Both,
}

impl AugMode {
    pub const ALL: [AugMode; 3] = [AugMode::Functions, AugMode::Variables, AugMode::Both];

    fn renames_functions(self) -> bool {
        matches!(self, AugMode::Functions | AugMode::Both)
    }

    fn renames_variables(self) -> bool {
        matches!(self, AugMode::Variables | AugMode::Both)
    }
}

impl fmt::Display for AugMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AugMode::Functions => "functions",
            AugMode::Variables => "variables",
            AugMode::Both => "both",
        })
    }
}

impl FromStr for AugMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "functions" => Ok(AugMode::Functions),
            "variables" => Ok(AugMode::Variables),
            "both" => Ok(AugMode::Both),
            other => Err(format!("unknown augmentation mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentationSpec {
    pub mode: AugMode,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AugmentError {
    #[error("record {id} is in split {split}; only train records are augmented")]
    NotTrain { id: String, split: Split },
    #[error("record {id} does not rebuild: {reason}")]
    Corrupt { id: String, reason: String },
}

fn mode_rng(spec: AugmentationSpec) -> ChaCha8Rng {
    let salt = match spec.mode {
        AugMode::Functions => 1u64,
        AugMode::Variables => 2,
        AugMode::Both => 3,
    };
    ChaCha8Rng::seed_from_u64(spec.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn fresh_name(rng: &mut ChaCha8Rng, (lo, hi): (usize, usize), taken: &BTreeSet<String>) -> String {
    loop {
        let len = rng.gen_range(lo..=hi);
        let mut s = String::with_capacity(len);
        s.push(FIRST_CHARS[rng.gen_range(0..FIRST_CHARS.len())] as char);
        for _ in 1..len {
            s.push(REST_CHARS[rng.gen_range(0..REST_CHARS.len())] as char);
        }
        if !is_keyword(&s) && !is_builtin(&s) && !taken.contains(&s) {
            return s;
        }
    }
}

/// Draws the renaming for `p` under `spec` without applying it.
pub fn draw_renaming(p: &Program, spec: AugmentationSpec) -> Renaming {
    let ids = identifiers(p);
    let mut taken = all_names(p);
    let mut rng = mode_rng(spec);
    let mut r = Renaming::default();
    if spec.mode.renames_functions() {
        for f in &ids.functions {
            let new = fresh_name(&mut rng, FUNCTION_NAME_LEN, &taken);
            taken.insert(new.clone());
            r.functions.insert(f.clone(), new);
        }
    }
    if spec.mode.renames_variables() {
        for v in &ids.variables {
            let new = fresh_name(&mut rng, VARIABLE_NAME_LEN, &taken);
            taken.insert(new.clone());
            r.variables.insert(v.clone(), new);
        }
    }
    r
}

/// Renames identifiers of `p` according to `spec.mode`. Returns the new
/// program together with the map that was applied.
pub fn rename_with_map(p: &Program, spec: AugmentationSpec) -> (Program, Renaming) {
    let r = draw_renaming(p, spec);
    (apply_renaming(p, &r), r)
}

pub fn rename(p: &Program, spec: AugmentationSpec) -> Program {
    rename_with_map(p, spec).0
}

/// Returns the input records followed by three renamed variants of each
/// (functions, variables, both), all tagged train.
pub fn augment_corpus(records: &[DatasetRecord], seed: u64) -> Result<Vec<DatasetRecord>, AugmentError> {
    if let Some(r) = records.iter().find(|r| r.split != Split::Train) {
        return Err(AugmentError::NotTrain {
            id: r.id.clone(),
            split: r.split,
        });
    }
    let mut out = records.to_vec();
    for (index, rec) in records.iter().enumerate() {
        let corrupt = |reason: String| AugmentError::Corrupt {
            id: rec.id.clone(),
            reason,
        };
        let p = parse(&rec.code).map_err(|e| corrupt(e.to_string()))?;
        for mode in AugMode::ALL {
            let spec = AugmentationSpec {
                mode,
                seed: seed ^ index as u64,
            };
            let q = rename(&p, spec);
            let code = print_canonical(&q);
            let d = derive(&q).map_err(|e| corrupt(e.to_string()))?;
            out.push(DatasetRecord {
                id: content_id(&[&rec.id, &mode.to_string(), &code]),
                code,
                graph: d.graph,
                enc_tuple: d.enc_tuple,
                enc_string: d.enc_string,
                enc_modified: d.enc_modified,
                split: Split::Train,
                provenance: Provenance {
                    source: rec.provenance.source.clone(),
                    parent_id: Some(rec.id.clone()),
                    aug_mode: Some(mode),
                },
            });
        }
    }
    Ok(out)
}
