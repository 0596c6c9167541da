//! Recovering a flowchart from a clean raster render: block detection,
//! arrow tracing, text acquisition and assembly.

mod arrows;
mod assemble;
mod bitmap;
mod ocr;
mod shapes;

use std::path::Path;

use image::GrayImage;
use thiserror::Error;

use crate::flowgraph::InvalidGraph;

pub use arrows::{detect_arrows, ArrowDetection, LABEL_RADIUS, SNAP_RADIUS};
pub use assemble::{assemble, Assembly};
pub use ocr::{read_text, sidecar_path, write_sidecar, OcrAdapter, OcrBox};
pub use shapes::{classify_quad, detect_shapes, BBox, ShapeDetection, DEFAULT_THRESHOLD, MIN_BLOCK_SIDE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VisionError {
    #[error("OCR adapter failed: {0}")]
    AdapterFailure(String),
    #[error("cannot read image: {0}")]
    Image(String),
    #[error("arrow end at ({x:.1}, {y:.1}) is not attached to any block")]
    DanglingArrow { x: f64, y: f64 },
    #[error("decision {node} has an out-edge without a Yes/No label")]
    MissingBranchLabel { node: String },
    #[error("assembled graph is invalid: {0}")]
    InvalidAssembly(#[from] InvalidGraph),
}

/// Non-fatal findings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VisionWarning {
    UnclassifiableComponent { bbox: BBox },
    UnassignedText { text: String, bbox: (i64, i64, i64, i64) },
}

impl std::fmt::Display for VisionWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VisionWarning::UnclassifiableComponent { bbox: b } => {
                write!(f, "unclassifiable component at ({}, {}) size {}x{}", b.x, b.y, b.w, b.h)
            }
            VisionWarning::UnassignedText {
                text,
                bbox: (x, y, w, h),
            } => {
                write!(f, "text {text:?} at ({x}, {y}) size {w}x{h} lies in no block")
            }
        }
    }
}

/// Runs the whole pipeline on an image with already recognized text.
pub fn recover(img: &GrayImage, ocr: &[OcrBox]) -> Result<Assembly, VisionError> {
    let (shapes, mut warnings) = detect_shapes(img, DEFAULT_THRESHOLD);
    let arrows = detect_arrows(img, DEFAULT_THRESHOLD, &shapes, ocr)?;
    let mut out = assemble(&shapes, &arrows, ocr)?;
    warnings.append(&mut out.warnings);
    out.warnings = warnings;
    Ok(out)
}

/// Reads an image file and its text through `adapter`, then recovers the
/// graph.
pub fn recover_file(path: &Path, adapter: &OcrAdapter) -> Result<Assembly, VisionError> {
    let img = image::open(path)
        .map_err(|e| VisionError::Image(format!("{}: {e}", path.display())))?
        .to_luma8();
    let ocr = read_text(path, adapter)?;
    recover(&img, &ocr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code2flow::lower;
    use crate::codeparse::parse;
    use crate::flowgraph::fixtures::fun1_table_graph;
    use crate::flowgraph::{is_isomorphic, BlockKind, EdgeLabel, FlowGraph};
    use crate::render::{render_png, INK};
    use image::Luma;

    fn closed_loop(g: &FlowGraph, scale: f64) -> Assembly {
        let (img, boxes) = render_png(g, scale).unwrap();
        recover(&img, &boxes).unwrap()
    }

    #[test]
    fn fun1_shapes_top_to_bottom() {
        let (img, _) = render_png(&fun1_table_graph(), 2.0).unwrap();
        let (shapes, warnings) = detect_shapes(&img, DEFAULT_THRESHOLD);
        let kinds: Vec<BlockKind> = shapes.iter().map(|s| s.kind).collect();
        use BlockKind::*;
        assert_eq!(kinds, [Terminal, InputOutput, Process, InputOutput, Terminal]);
        assert!(warnings.is_empty());
        assert!(shapes
            .iter()
            .filter(|s| s.kind != Terminal)
            .all(|s| s.polygon.len() == 4));
        assert!(shapes
            .iter()
            .filter(|s| s.kind == Terminal)
            .all(|s| s.polygon.len() >= 8));
    }

    #[test]
    fn fun1_arrows_join_consecutive_blocks() {
        let (img, boxes) = render_png(&fun1_table_graph(), 2.0).unwrap();
        let (shapes, _) = detect_shapes(&img, DEFAULT_THRESHOLD);
        let arrows = detect_arrows(&img, DEFAULT_THRESHOLD, &shapes, &boxes).unwrap();
        let pairs: Vec<(usize, usize)> = arrows.iter().map(|a| (a.from, a.to)).collect();
        assert_eq!(pairs, [(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert!(arrows
            .iter()
            .all(|a| a.head != a.tail && a.label == EdgeLabel::Unlabeled));
    }

    #[test]
    fn fun1_closed_loop() {
        let g = fun1_table_graph();
        let out = closed_loop(&g, 2.0);
        assert!(is_isomorphic(&out.graph, &g), "{:#?}", out.graph);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn branching_closed_loop() {
        let src = "def f(a, b):\n    s = 0\n    while a > b:\n        if a % 2 == 0:\n            s += a\n        elif b > 3:\n            return s\n        else:\n            print(a)\n        a -= 1\n    return s\n";
        let g = lower(&parse(src).unwrap());
        for scale in [2.0, 3.0] {
            let out = closed_loop(&g, scale);
            assert!(is_isomorphic(&out.graph, &g), "scale {scale}: {:#?}", out.graph);
        }
    }

    #[test]
    fn shapes_without_arrows() {
        let g = fun1_table_graph();
        let (mut img, boxes) = render_png(&g, 2.0).unwrap();
        let (shapes, _) = detect_shapes(&img, DEFAULT_THRESHOLD);
        // Erase everything outside the blocks.
        for (x, y, p) in img.enumerate_pixels_mut() {
            let c = (x as f64 + 0.5, y as f64 + 0.5);
            if !shapes.iter().any(|s| {
                let b = s.bbox;
                c.0 >= b.x as f64 && c.0 <= (b.x + b.w) as f64 && c.1 >= b.y as f64 && c.1 <= (b.y + b.h) as f64
            }) {
                *p = Luma([255]);
            }
        }
        assert!(detect_arrows(&img, DEFAULT_THRESHOLD, &shapes, &boxes)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn arrow_far_from_blocks_dangles() {
        let mut img = GrayImage::from_pixel(560, 200, Luma([255]));
        let mut ink = |x: u32, y: u32| img.put_pixel(x, y, Luma([INK]));
        for x in 300..500 {
            for y in 50..150 {
                if !(303..497).contains(&x) || !(53..147).contains(&y) {
                    ink(x, y);
                }
            }
        }
        // Shaft 20..226, head 226..250 pointing right; tip 50px from the box.
        for x in 20..226 {
            for y in 99..102 {
                ink(x, y);
            }
        }
        for k in 0..24u32 {
            let half = 10 * (24 - k) / 24;
            for y in 100 - half..=100 + half {
                ink(226 + k, y);
            }
        }
        let (shapes, _) = detect_shapes(&img, DEFAULT_THRESHOLD);
        assert_eq!(shapes.len(), 1);
        let err = detect_arrows(&img, DEFAULT_THRESHOLD, &shapes, &[]).unwrap_err();
        assert!(matches!(err, VisionError::DanglingArrow { .. }), "{err:?}");
    }

    fn ocr(text: &str, x: i64, y: i64) -> OcrBox {
        OcrBox {
            text: text.into(),
            x,
            y,
            w: 20,
            h: 10,
            conf: 0.9,
        }
    }

    fn square(kind: BlockKind, x: f64, y: f64) -> ShapeDetection {
        ShapeDetection {
            kind,
            bbox: BBox {
                x: x as u32,
                y: y as u32,
                w: 100,
                h: 100,
            },
            polygon: vec![(x, y), (x + 100.0, y), (x + 100.0, y + 100.0), (x, y + 100.0)],
        }
    }

    fn arrow(from: usize, to: usize, label: EdgeLabel) -> ArrowDetection {
        ArrowDetection {
            tail: (0.0, 0.0),
            head: (1.0, 1.0),
            from,
            to,
            label,
        }
    }

    #[test]
    fn stray_text_is_a_warning() {
        let shapes = [
            square(BlockKind::Terminal, 0.0, 0.0),
            square(BlockKind::Terminal, 0.0, 200.0),
        ];
        let boxes = [
            ocr("start", 10, 10),
            ocr("f", 40, 12),
            ocr("end", 10, 240),
            ocr("stray", 500, 500),
        ];
        let out = assemble(&shapes, &[arrow(0, 1, EdgeLabel::Unlabeled)], &boxes).unwrap();
        assert_eq!(out.graph.nodes[0].text, "start f");
        assert_eq!(
            out.warnings,
            [VisionWarning::UnassignedText {
                text: "stray".into(),
                bbox: (500, 500, 20, 10)
            }]
        );
    }

    #[test]
    fn unlabeled_decision_edges() {
        use BlockKind::*;
        let shapes = [
            square(Terminal, 0.0, 0.0),
            square(Decision, 0.0, 200.0),
            square(Terminal, 0.0, 400.0),
            square(Terminal, 200.0, 400.0),
        ];
        let boxes = [
            ocr("start", 10, 10),
            ocr("x > 1", 10, 240),
            ocr("end", 10, 440),
            ocr("end", 210, 440),
        ];
        let arrows = [
            arrow(0, 1, EdgeLabel::Unlabeled),
            arrow(1, 2, EdgeLabel::Unlabeled),
            arrow(1, 3, EdgeLabel::Unlabeled),
        ];
        assert_eq!(
            assemble(&shapes, &arrows, &boxes).unwrap_err(),
            VisionError::MissingBranchLabel { node: "n1".into() }
        );
        let arrows = [
            arrow(0, 1, EdgeLabel::Unlabeled),
            arrow(1, 2, EdgeLabel::Yes),
            arrow(1, 3, EdgeLabel::No),
        ];
        assert!(assemble(&shapes, &arrows, &boxes).is_ok());
        let arrows = [arrow(0, 1, EdgeLabel::Unlabeled)];
        assert!(matches!(
            assemble(&shapes, &arrows, &boxes),
            Err(VisionError::InvalidAssembly(_))
        ));
    }

    #[test]
    fn sidecar_for_fun1() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fun1.png");
        let (img, boxes) = render_png(&fun1_table_graph(), 2.0).unwrap();
        img.save(&path).unwrap();
        write_sidecar(&path, &boxes).unwrap();
        let read = read_text(&path, &OcrAdapter::Sidecar).unwrap();
        let texts: Vec<&str> = read.iter().map(|b| b.text.as_str()).collect();
        assert_eq!(
            texts,
            [
                "start fun1",
                "input: X",
                "y = ((16 + x) - 20)",
                "output: y",
                "end function return"
            ]
        );
        let out = recover_file(&path, &OcrAdapter::Sidecar).unwrap();
        assert!(is_isomorphic(&out.graph, &fun1_table_graph()));
    }
}
