//! SVG output for a layout, and the reader for the element subset the
//! rasterizer understands.

use std::fmt::Write;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::flowgraph::{BlockKind, FlowGraph};

use super::layout::{Layout, Point, EDGE_STROKE, SHAPE_STROKE};
use super::RenderError;

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn points_attr(pts: &[Point]) -> String {
    pts.iter()
        .map(|&(x, y)| format!("{},{}", num(x), num(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn path_d(pts: &[Point], close: bool) -> String {
    let mut d = String::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        if i > 0 {
            d.push(' ');
        }
        let _ = write!(d, "{cmd} {} {}", num(x), num(y));
    }
    if close {
        d.push_str(" Z");
    }
    d
}

pub fn write_svg(g: &FlowGraph, l: &Layout) -> String {
    let mut s = String::new();
    let (w, h) = (num(l.width), num(l.height));
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let sw = num(SHAPE_STROKE);
    for sh in &l.shapes {
        let id = escape(g.nodes[sh.node].id.as_str());
        let common = format!(r#"class="block" data-node="{id}" fill="none" stroke="black" stroke-width="{sw}""#);
        match sh.kind {
            BlockKind::Terminal => {
                let _ = writeln!(
                    s,
                    r#"<ellipse {common} cx="{}" cy="{}" rx="{}" ry="{}"/>"#,
                    num(sh.cx),
                    num(sh.cy),
                    num(sh.w / 2.0),
                    num(sh.h / 2.0)
                );
            }
            BlockKind::Process => {
                let _ = writeln!(
                    s,
                    r#"<rect {common} x="{}" y="{}" width="{}" height="{}"/>"#,
                    num(sh.cx - sh.w / 2.0),
                    num(sh.top()),
                    num(sh.w),
                    num(sh.h)
                );
            }
            BlockKind::InputOutput | BlockKind::Decision => {
                let _ = writeln!(s, r#"<polygon {common} points="{}"/>"#, points_attr(&sh.polygon()));
            }
        }
    }
    let ew = num(EDGE_STROKE);
    for a in &l.arrows {
        let _ = writeln!(
            s,
            r#"<path class="edge" fill="none" stroke="black" stroke-width="{ew}" d="{}"/>"#,
            path_d(&a.points, false)
        );
        let _ = writeln!(
            s,
            r#"<path class="head" fill="black" stroke="none" d="{}"/>"#,
            path_d(&a.head, true)
        );
    }
    for t in &l.texts {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="{}" font-family="monospace" dominant-baseline="text-before-edge" fill="black">{}</text>"#,
            num(t.x),
            num(t.y),
            num(t.size),
            escape(t.text.as_str())
        );
    }
    s.push_str("</svg>\n");
    s
}

/// A drawing primitive read back from SVG, in document units.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Stroke {
        points: Vec<Point>,
        closed: bool,
        width: f64,
    },
    Fill(Vec<Point>),
    Text {
        text: String,
        x: f64,
        y: f64,
        size: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub width: f64,
    pub height: f64,
    pub elements: Vec<Element>,
}

fn bad(msg: impl Into<String>) -> RenderError {
    RenderError::Svg(msg.into())
}

struct Attrs(Vec<(String, String)>);

impl Attrs {
    fn of(e: &BytesStart) -> Result<Attrs, RenderError> {
        let mut v = Vec::new();
        for a in e.attributes() {
            let a = a.map_err(|e| bad(e.to_string()))?;
            let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
            let val = a.unescape_value().map_err(|e| bad(e.to_string()))?.into_owned();
            v.push((key, val));
        }
        Ok(Attrs(v))
    }

    fn get(&self, k: &str) -> Option<&str> {
        self.0.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str())
    }

    fn num(&self, k: &str) -> Result<f64, RenderError> {
        let v = self.get(k).ok_or_else(|| bad(format!("missing attribute {k}")))?;
        v.trim()
            .trim_end_matches("px")
            .parse()
            .map_err(|_| bad(format!("attribute {k}={v:?} is not a number")))
    }

    fn num_or(&self, k: &str, default: f64) -> Result<f64, RenderError> {
        if self.get(k).is_some() {
            self.num(k)
        } else {
            Ok(default)
        }
    }

    fn filled(&self) -> bool {
        self.get("fill") != Some("none")
    }

    fn stroke_width(&self) -> Result<Option<f64>, RenderError> {
        match self.get("stroke") {
            None | Some("none") => Ok(None),
            Some(_) => Ok(Some(self.num_or("stroke-width", 1.0)?)),
        }
    }
}

fn numbers(s: &str) -> Result<Vec<f64>, RenderError> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| bad(format!("bad number {t:?}"))))
        .collect()
}

fn pairs(v: &[f64]) -> Vec<Point> {
    v.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

/// Parses the absolute `M`/`L`/`Z` path subset.
fn parse_path(d: &str) -> Result<(Vec<Point>, bool), RenderError> {
    let mut pts = Vec::new();
    let mut closed = false;
    let spaced: String = d
        .chars()
        .flat_map(|c| {
            if c.is_ascii_alphabetic() {
                vec![' ', c, ' ']
            } else {
                vec![c]
            }
        })
        .collect();
    let mut nums = Vec::new();
    for tok in spaced
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
    {
        match tok {
            "M" | "L" => {}
            "Z" | "z" => closed = true,
            t => nums.push(
                t.parse::<f64>()
                    .map_err(|_| bad(format!("unsupported path token {t:?}")))?,
            ),
        }
    }
    pts.extend(pairs(&nums));
    Ok((pts, closed))
}

fn shape_elements(attrs: &Attrs, outline: Vec<Point>, closed: bool, out: &mut Vec<Element>) -> Result<(), RenderError> {
    if attrs.filled() {
        out.push(Element::Fill(outline.clone()));
    }
    if let Some(width) = attrs.stroke_width()? {
        out.push(Element::Stroke {
            points: outline,
            closed,
            width,
        });
    }
    Ok(())
}

fn ellipse_points(cx: f64, cy: f64, rx: f64, ry: f64) -> Vec<Point> {
    (0..180)
        .map(|i| {
            let a = i as f64 * std::f64::consts::TAU / 180.0;
            (cx + rx * a.cos(), cy + ry * a.sin())
        })
        .collect()
}

pub fn parse_svg(svg: &str) -> Result<Document, RenderError> {
    let mut reader = Reader::from_str(svg);
    let mut doc = Document {
        width: 0.0,
        height: 0.0,
        elements: Vec::new(),
    };
    let mut seen_root = false;
    let mut open_text: Option<(f64, f64, f64, String)> = None;
    loop {
        let ev = reader.read_event().map_err(|e| bad(e.to_string()))?;
        match ev {
            Event::Eof => break,
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_start = matches!(ev, Event::Start(_));
                let attrs = Attrs::of(e)?;
                match e.name().as_ref() {
                    b"svg" => {
                        doc.width = attrs.num("width")?;
                        doc.height = attrs.num("height")?;
                        seen_root = true;
                    }
                    b"rect" => {
                        let (x, y) = (attrs.num("x")?, attrs.num("y")?);
                        let (w, h) = (attrs.num("width")?, attrs.num("height")?);
                        let pts = vec![(x, y), (x + w, y), (x + w, y + h), (x, y + h)];
                        shape_elements(&attrs, pts, true, &mut doc.elements)?;
                    }
                    b"ellipse" => {
                        let pts =
                            ellipse_points(attrs.num("cx")?, attrs.num("cy")?, attrs.num("rx")?, attrs.num("ry")?);
                        shape_elements(&attrs, pts, true, &mut doc.elements)?;
                    }
                    b"polygon" => {
                        let pts = pairs(&numbers(attrs.get("points").unwrap_or(""))?);
                        shape_elements(&attrs, pts, true, &mut doc.elements)?;
                    }
                    b"path" => {
                        let (pts, closed) = parse_path(attrs.get("d").unwrap_or(""))?;
                        if closed && attrs.filled() {
                            doc.elements.push(Element::Fill(pts.clone()));
                        }
                        if let Some(width) = attrs.stroke_width()? {
                            doc.elements.push(Element::Stroke {
                                points: pts,
                                closed,
                                width,
                            });
                        }
                    }
                    b"text" if is_start => {
                        open_text = Some((
                            attrs.num("x")?,
                            attrs.num("y")?,
                            attrs.num_or("font-size", 16.0)?,
                            String::new(),
                        ));
                    }
                    _ => {}
                }
            }
            Event::Text(t) => {
                if let Some(open) = open_text.as_mut() {
                    open.3.push_str(&t.unescape().map_err(|e| bad(e.to_string()))?);
                }
            }
            Event::End(e) if e.name().as_ref() == b"text" => {
                if let Some((x, y, size, text)) = open_text.take() {
                    doc.elements.push(Element::Text { text, x, y, size });
                }
            }
            _ => {}
        }
    }
    if !seen_root {
        return Err(bad("no <svg> root element"));
    }
    Ok(doc)
}
