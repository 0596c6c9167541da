//! Turning detections and text boxes into a flow graph.

use std::collections::HashSet;

use crate::flowgraph::{validate, BlockKind, EdgeLabel, FlowEdge, FlowGraph, FlowNode};

use super::arrows::{ArrowDetection, LABEL_RADIUS};
use super::bitmap::point_in_polygon;
use super::shapes::ShapeDetection;
use super::{OcrBox, VisionError, VisionWarning};

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub graph: FlowGraph,
    pub warnings: Vec<VisionWarning>,
}

/// Joins the boxes of one block in reading order: lines top to bottom,
/// boxes left to right within a line.
fn reading_order(mut boxes: Vec<&OcrBox>) -> String {
    boxes.sort_by(|a, b| a.center().1.total_cmp(&b.center().1));
    let mut lines: Vec<Vec<&OcrBox>> = Vec::new();
    for b in boxes {
        match lines.last_mut() {
            Some(line) if (b.center().1 - line[0].center().1).abs() < line[0].h.min(b.h) as f64 / 2.0 => line.push(b),
            _ => lines.push(vec![b]),
        }
    }
    lines
        .into_iter()
        .flat_map(|mut line| {
            line.sort_by_key(|b| b.x);
            line.into_iter().map(|b| b.text.trim())
        })
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Node ids are `n0, n1, ..` in the order of `shapes`.
pub fn assemble(shapes: &[ShapeDetection], arrows: &[ArrowDetection], ocr: &[OcrBox]) -> Result<Assembly, VisionError> {
    let mut texts: Vec<Vec<&OcrBox>> = vec![Vec::new(); shapes.len()];
    let mut warnings = Vec::new();
    for b in ocr {
        let c = b.center();
        if let Some(i) = shapes.iter().position(|s| point_in_polygon(c, &s.polygon)) {
            texts[i].push(b);
        } else if !arrows.iter().any(|a| b.distance_to(a.tail) <= LABEL_RADIUS) {
            warnings.push(VisionWarning::UnassignedText {
                text: b.text.clone(),
                bbox: (b.x, b.y, b.w, b.h),
            });
        }
    }
    let id = |i: usize| format!("n{i}");
    let nodes: Vec<FlowNode> = shapes
        .iter()
        .zip(texts)
        .enumerate()
        .map(|(i, (s, t))| FlowNode::new(id(i), s.kind, reading_order(t)))
        .collect();

    let mut edges = Vec::new();
    let mut unlabeled = HashSet::new();
    for a in arrows {
        if shapes[a.from].kind == BlockKind::Decision && a.label == EdgeLabel::Unlabeled {
            unlabeled.insert(a.from);
        }
        edges.push(FlowEdge::new(id(a.from), id(a.to), a.label));
    }
    if let Some(&i) = unlabeled.iter().min() {
        return Err(VisionError::MissingBranchLabel { node: id(i) });
    }
    let graph = FlowGraph { nodes, edges };
    validate(&graph)?;
    Ok(Assembly { graph, warnings })
}
