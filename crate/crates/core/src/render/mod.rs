//! Flowchart drawing: layout, SVG output and rasterization.

mod font;
pub mod layout;
mod raster;
mod svg;

use image::GrayImage;
use thiserror::Error;

use crate::flowgraph::{FlowGraph, InvalidGraph};
use crate::vision::OcrBox;

pub use font::text_width;
pub use layout::{block_size, layout, Layout};
pub use raster::{INK, PAPER};
pub use svg::{parse_svg, Document, Element};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error(transparent)]
    InvalidGraph(#[from] InvalidGraph),
    #[error("text of node {node} does not fit its block at the minimum font size: {text:?}")]
    TextTooWide { node: String, text: String },
    #[error("unsupported SVG: {0}")]
    Svg(String),
}

pub fn to_svg(g: &FlowGraph) -> Result<String, RenderError> {
    Ok(svg::write_svg(g, &layout(g)?))
}

/// Draws `svg` at `scale` pixels per unit.
pub fn rasterize(svg: &str, scale: f64) -> Result<GrayImage, RenderError> {
    assert!(scale > 0.0, "scale must be positive");
    Ok(raster::paint(&parse_svg(svg)?, scale))
}

/// Pixel boxes of every text element, as an OCR engine would report them.
pub fn text_boxes(svg: &str, scale: f64) -> Result<Vec<OcrBox>, RenderError> {
    let doc = parse_svg(svg)?;
    Ok(doc
        .elements
        .iter()
        .filter_map(|el| match el {
            Element::Text { text, x, y, size } => {
                let x0 = (x * scale).floor();
                let y0 = (y * scale).floor();
                let x1 = ((x + text_width(text, *size)) * scale).ceil();
                let y1 = ((y + size) * scale).ceil();
                Some(OcrBox {
                    text: text.clone(),
                    x: x0 as i64,
                    y: y0 as i64,
                    w: (x1 - x0).max(1.0) as i64,
                    h: (y1 - y0).max(1.0) as i64,
                    conf: 1.0,
                })
            }
            _ => None,
        })
        .collect())
}

/// Renders `g` straight to pixels together with its ground-truth text boxes.
pub fn render_png(g: &FlowGraph, scale: f64) -> Result<(GrayImage, Vec<OcrBox>), RenderError> {
    let svg = to_svg(g)?;
    Ok((rasterize(&svg, scale)?, text_boxes(&svg, scale)?))
}
