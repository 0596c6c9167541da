//! Sequence encodings of a flowchart.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::codeparse::str_repr;
use crate::flowgraph::{linearize, BlockKind, FlowGraph, InvalidGraph};

pub const SEP: &str = "[SEP]";
const SEP_JOIN: &str = " [SEP] ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncodingVariant {
    Tuple,
    String,
    ModifiedString,
}

impl EncodingVariant {
    pub const ALL: [EncodingVariant; 3] = [
        EncodingVariant::Tuple,
        EncodingVariant::String,
        EncodingVariant::ModifiedString,
    ];
}

impl fmt::Display for EncodingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingVariant::Tuple => "tuple",
            EncodingVariant::String => "string",
            EncodingVariant::ModifiedString => "modified",
        })
    }
}

impl FromStr for EncodingVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tuple" => Ok(EncodingVariant::Tuple),
            "string" => Ok(EncodingVariant::String),
            "modified" => Ok(EncodingVariant::ModifiedString),
            other => Err(format!("unknown encoding variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("malformed encoding segment {index}: {segment:?}")]
    MalformedEncoding { index: usize, segment: String },
}

/// Serializes the blocks of `g` in linearized order. Edge labels are not part
/// of any encoding.
pub fn encode(g: &FlowGraph, v: EncodingVariant) -> Result<String, InvalidGraph> {
    let blocks = linearize(g)?;
    let pairs = blocks.iter().map(|n| (n.text.as_str(), n.kind));
    Ok(match v {
        EncodingVariant::Tuple => {
            let items: Vec<String> = pairs
                .map(|(t, k)| format!("({}, '{}')", str_repr(t), k.shape_token()))
                .collect();
            format!("[{}]", items.join(", "))
        }
        EncodingVariant::String => pairs
            .map(|(t, k)| format!("{{{t},{}}}", k.shape_token()))
            .collect::<Vec<_>>()
            .join(","),
        EncodingVariant::ModifiedString => pairs
            .map(|(t, k)| format!("{t}, {}", k.shape_token()))
            .collect::<Vec<_>>()
            .join(SEP_JOIN),
    })
}

/// Splits a modified-string encoding back into `(text, shape token)` pairs.
pub fn decode_modified(t: &str) -> Result<Vec<(String, String)>, EncodeError> {
    if t.is_empty() {
        return Ok(Vec::new());
    }
    t.split(SEP_JOIN)
        .enumerate()
        .map(|(index, seg)| {
            let bad = || EncodeError::MalformedEncoding {
                index,
                segment: seg.to_string(),
            };
            let (text, shape) = seg.rsplit_once(", ").ok_or_else(bad)?;
            BlockKind::from_shape_token(shape).ok_or_else(bad)?;
            Ok((text.to_string(), shape.to_string()))
        })
        .collect()
}
