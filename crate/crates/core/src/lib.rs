//! Flowchart and code conversion toolkit.

pub mod augment;
pub mod code2flow;
pub mod codeparse;
pub mod corpus;
pub mod encode;
pub mod flow2code;
pub mod flowgraph;
pub mod maskgen;
pub mod metrics;
pub mod render;
pub mod synth;
pub mod vision;

pub use augment::{AugMode, AugmentationSpec};
pub use codeparse::{parse, print_canonical, ParseError, Program};
pub use corpus::{DatasetRecord, Split, SplitRatio};
pub use encode::{decode_modified, encode, EncodingVariant};
pub use flowgraph::{BlockKind, EdgeLabel, FlowEdge, FlowGraph, FlowNode, InvalidGraph};
pub use maskgen::PretrainRecord;
pub use metrics::{CodeBleu, MetricReport, Prediction};
pub use vision::{OcrAdapter, OcrBox, VisionError, VisionWarning};
