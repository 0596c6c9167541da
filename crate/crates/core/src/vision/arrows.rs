//! Arrow tracing on the ink left after blocks and text are removed.
//!
//! Edges are drawn as orthogonal polylines, so the residual is read as long
//! horizontal and vertical runs. Runs in adjacent rows (or columns) form a
//! segment, segments whose ends meet form a chain, and the chain end next
//! to a solid triangle blob is the head.

use image::GrayImage;
use serde::{Deserialize, Serialize};

use crate::flowgraph::{BlockKind, EdgeLabel};

use super::bitmap::{boundary_distance, ink_regions, point_in_polygon, Bitmap, Point};
use super::shapes::{BBox, ShapeDetection};
use super::{OcrBox, VisionError};

/// Farthest an arrow end may be from the block it attaches to.
pub const SNAP_RADIUS: f64 = 10.0;
/// Farthest a Yes/No text may be from the arrow tail it labels.
pub const LABEL_RADIUS: f64 = 30.0;
/// Minimum segment length in stroke widths.
const MIN_RUN_STROKES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrowDetection {
    pub tail: Point,
    pub head: Point,
    /// Index of the source block in the shape list.
    pub from: usize,
    /// Index of the target block in the shape list.
    pub to: usize,
    pub label: EdgeLabel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    horizontal: bool,
    /// Center line coordinate across the segment.
    at: f64,
    lo: f64,
    hi: f64,
}

impl Segment {
    fn ends(&self) -> [Point; 2] {
        if self.horizontal {
            [(self.lo, self.at), (self.hi, self.at)]
        } else {
            [(self.at, self.lo), (self.at, self.hi)]
        }
    }
}

fn near_shape(p: Point, s: &ShapeDetection) -> bool {
    let b = s.bbox;
    let (x0, y0) = (b.x as f64 - 2.0, b.y as f64 - 2.0);
    let (x1, y1) = ((b.x + b.w) as f64 + 2.0, (b.y + b.h) as f64 + 2.0);
    if p.0 < x0 || p.0 > x1 || p.1 < y0 || p.1 > y1 {
        return false;
    }
    point_in_polygon(p, &s.polygon) || boundary_distance(p, &s.polygon) <= 1.0
}

/// Ink that belongs to neither a block (outline or inner text) nor an OCR
/// box. A block outline is the whole component it was detected from.
fn residual(img: &GrayImage, threshold: u8, shapes: &[ShapeDetection], ocr: &[OcrBox]) -> Bitmap {
    let mut bm = Bitmap::binarize(img, threshold);
    for (pixels, bounds) in ink_regions(&bm) {
        let bbox = BBox::from(bounds);
        if shapes.iter().any(|s| s.bbox == bbox) {
            for (x, y) in pixels {
                bm.set(x, y, false);
            }
        }
    }
    for y in 0..bm.height {
        for x in 0..bm.width {
            let p = (x as f64 + 0.5, y as f64 + 0.5);
            if bm.bits[y * bm.width + x] && shapes.iter().any(|s| near_shape(p, s)) {
                bm.set(x, y, false);
            }
        }
    }
    for b in ocr {
        let x0 = (b.x - 1).max(0) as usize;
        let y0 = (b.y - 1).max(0) as usize;
        let x1 = ((b.x + b.w + 1).max(0) as usize).min(bm.width);
        let y1 = ((b.y + b.h + 1).max(0) as usize).min(bm.height);
        for y in y0..y1 {
            for x in x0..x1 {
                bm.set(x, y, false);
            }
        }
    }
    bm
}

/// Median over ink pixels of the shorter of the horizontal and vertical
/// runs through the pixel.
fn stroke_width(bm: &Bitmap) -> Option<usize> {
    let w = bm.width;
    let n = bm.bits.len();
    // Vertical run lengths from a downward and an upward pass.
    let mut up = vec![0u32; n];
    for i in 0..n {
        if bm.bits[i] {
            up[i] = 1 + if i >= w { up[i - w] } else { 0 };
        }
    }
    let mut vert = vec![0u32; n];
    for i in (0..n).rev() {
        if bm.bits[i] {
            vert[i] = if i + w < n && bm.bits[i + w] {
                vert[i + w]
            } else {
                up[i]
            };
        }
    }
    let mut widths = Vec::new();
    for y in 0..bm.height {
        let row = &bm.bits[y * w..(y + 1) * w];
        let mut x = 0;
        while x < w {
            if !row[x] {
                x += 1;
                continue;
            }
            let s = x;
            while x < w && row[x] {
                x += 1;
            }
            widths.extend((s..x).map(|k| vert[y * w + k].min((x - s) as u32) as usize));
        }
    }
    if widths.is_empty() {
        return None;
    }
    let mid = widths.len() / 2;
    Some(*widths.select_nth_unstable(mid).1)
}

/// Centroids of the blobs where a `(2t+1)`-square fits entirely in ink.
fn head_blobs(bm: &Bitmap, t: usize) -> Vec<Point> {
    let (w, h) = (bm.width, bm.height);
    let mut sum = vec![0u32; (w + 1) * (h + 1)];
    for y in 0..h {
        for x in 0..w {
            sum[(y + 1) * (w + 1) + x + 1] =
                bm.bits[y * w + x] as u32 + sum[y * (w + 1) + x + 1] + sum[(y + 1) * (w + 1) + x]
                    - sum[y * (w + 1) + x];
        }
    }
    let r = t;
    let side = 2 * r + 1;
    let mut core = Bitmap::new(w, h);
    for y in r..h.saturating_sub(r) {
        for x in r..w.saturating_sub(r) {
            if !bm.bits[y * w + x] {
                continue;
            }
            let (x0, y0, x1, y1) = (x - r, y - r, x + r + 1, y + r + 1);
            let s = sum[y1 * (w + 1) + x1] + sum[y0 * (w + 1) + x0] - sum[y0 * (w + 1) + x1] - sum[y1 * (w + 1) + x0];
            if s as usize == side * side {
                core.set(x, y, true);
            }
        }
    }
    ink_regions(&core)
        .iter()
        .map(|(px, _)| {
            let n = px.len() as f64;
            let sx: f64 = px.iter().map(|p| p.0 as f64 + 0.5).sum();
            let sy: f64 = px.iter().map(|p| p.1 as f64 + 0.5).sum();
            (sx / n, sy / n)
        })
        .collect()
}

/// Groups runs of at least `min_len` pixels in adjacent lines into segments.
fn segments(bm: &Bitmap, horizontal: bool, min_len: usize) -> Vec<Segment> {
    let (outer, inner) = if horizontal {
        (bm.height, bm.width)
    } else {
        (bm.width, bm.height)
    };
    let get = |o: usize, i: usize| {
        if horizontal {
            bm.bits[o * bm.width + i]
        } else {
            bm.bits[i * bm.width + o]
        }
    };
    // (first line, last line, lo, hi, last run lo, last run hi)
    let mut open: Vec<(usize, usize, usize, usize, usize, usize)> = Vec::new();
    let mut done = Vec::new();
    for o in 0..outer {
        let mut runs = Vec::new();
        let mut i = 0;
        while i < inner {
            if !get(o, i) {
                i += 1;
                continue;
            }
            let s = i;
            while i < inner && get(o, i) {
                i += 1;
            }
            if i - s >= min_len {
                runs.push((s, i));
            }
        }
        let mut next = Vec::new();
        for (s, e) in runs {
            let hit = open.iter().position(|g| g.1 + 1 == o && s < g.5 && g.4 < e);
            match hit {
                Some(k) => {
                    let mut g = open.swap_remove(k);
                    g.1 = o;
                    g.2 = g.2.min(s);
                    g.3 = g.3.max(e);
                    g.4 = s;
                    g.5 = e;
                    next.push(g);
                }
                None => next.push((o, o, s, e, s, e)),
            }
        }
        done.append(&mut open);
        open = next;
    }
    done.append(&mut open);
    done.into_iter()
        .map(|(a, b, lo, hi, _, _)| Segment {
            horizontal,
            at: (a + b + 1) as f64 / 2.0,
            lo: lo as f64,
            hi: hi as f64,
        })
        .collect()
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Links segment ends that meet at a corner and returns the two free ends of
/// every open chain.
fn chains(segs: &[Segment], join: f64) -> Vec<[Point; 2]> {
    let n = segs.len();
    // link[s][end] = (other segment, its end)
    let mut link: Vec<[Option<(usize, usize)>; 2]> = vec![[None; 2]; n];
    let mut cands = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if segs[i].horizontal == segs[j].horizontal {
                continue;
            }
            for (ei, p) in segs[i].ends().into_iter().enumerate() {
                for (ej, q) in segs[j].ends().into_iter().enumerate() {
                    let d = dist(p, q);
                    if d <= join {
                        cands.push((d, i, ei, j, ej));
                    }
                }
            }
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, i, ei, j, ej) in cands {
        if link[i][ei].is_none() && link[j][ej].is_none() {
            link[i][ei] = Some((j, ej));
            link[j][ej] = Some((i, ei));
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let Some(free) = (0..2).find(|&e| link[s][e].is_none()) else {
            continue;
        };
        let start = segs[s].ends()[free];
        let (mut cur, mut end) = (s, 1 - free);
        seen[cur] = true;
        while let Some((nxt, ne)) = link[cur][end] {
            cur = nxt;
            end = 1 - ne;
            seen[cur] = true;
        }
        out.push([start, segs[cur].ends()[end]]);
    }
    out
}

fn snap(p: Point, shapes: &[ShapeDetection]) -> Result<usize, VisionError> {
    shapes
        .iter()
        .enumerate()
        .map(|(i, s)| (i, boundary_distance(p, &s.polygon)))
        .filter(|&(_, d)| d <= SNAP_RADIUS)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .ok_or(VisionError::DanglingArrow { x: p.0, y: p.1 })
}

fn branch_label(tail: Point, ocr: &[OcrBox]) -> EdgeLabel {
    ocr.iter()
        .filter_map(|b| {
            let label = match b.text.trim().to_ascii_lowercase().as_str() {
                "yes" => EdgeLabel::Yes,
                "no" => EdgeLabel::No,
                _ => return None,
            };
            let d = b.distance_to(tail);
            (d <= LABEL_RADIUS).then_some((d, label))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map_or(EdgeLabel::Unlabeled, |(_, l)| l)
}

/// Traces every headed arrow and attaches both ends to blocks. Chains with
/// no arrowhead are ignored.
pub fn detect_arrows(
    img: &GrayImage,
    threshold: u8,
    shapes: &[ShapeDetection],
    ocr: &[OcrBox],
) -> Result<Vec<ArrowDetection>, VisionError> {
    let bm = residual(img, threshold, shapes, ocr);
    let Some(t) = stroke_width(&bm) else {
        return Ok(Vec::new());
    };
    let heads = head_blobs(&bm, t);
    let min_len = MIN_RUN_STROKES * t;
    let mut segs = segments(&bm, true, min_len);
    segs.extend(segments(&bm, false, min_len));
    let reach = (MIN_RUN_STROKES * t) as f64;

    let mut found = Vec::new();
    for [a, b] in chains(&segs, 2.0 * t as f64) {
        let near = |p: Point| heads.iter().map(|&h| dist(p, h)).fold(f64::INFINITY, f64::min);
        let (da, db) = (near(a), near(b));
        if da.min(db) > reach {
            continue;
        }
        let (tail, head) = if da < db { (b, a) } else { (a, b) };
        let from = snap(tail, shapes)?;
        let to = snap(head, shapes)?;
        let label = if shapes[from].kind == BlockKind::Decision {
            branch_label(tail, ocr)
        } else {
            EdgeLabel::Unlabeled
        };
        found.push(ArrowDetection {
            tail,
            head,
            from,
            to,
            label,
        });
    }
    found.sort_by(|a, b| (a.from, a.to).cmp(&(b.from, b.to)).then(a.tail.1.total_cmp(&b.tail.1)));
    Ok(found)
}
