//! Top-down placement of blocks, orthogonal edge routing and text fitting.
//!
//! Blocks are stacked one per row in linearized order on a shared center
//! line. An edge to the next row drops straight down; every other edge runs
//! through a vertical lane beside the blocks: a Decision's No edge on the
//! right, everything else on the left. Lanes are assigned shortest span
//! first, innermost first, so nested spans do not cross.

use std::collections::HashMap;

use crate::flowgraph::{linearize_indices, BlockKind, EdgeLabel, FlowGraph};

use super::font::text_width;
use super::RenderError;

pub type Point = (f64, f64);

pub const GAP: f64 = 60.0;
pub const MARGIN: f64 = 40.0;
pub const SLANT: f64 = 20.0;
/// Distance between a block outline and the arrow end near it.
pub const ARROW_GAP: f64 = 3.0;
pub const HEAD_LEN: f64 = 12.0;
pub const HEAD_WIDTH: f64 = 10.0;
pub const LANE_OFFSET: f64 = 30.0;
pub const LANE_STEP: f64 = 12.0;
pub const SHAPE_STROKE: f64 = 2.0;
pub const EDGE_STROKE: f64 = 1.5;
pub const FONT_SIZE: f64 = 16.0;
pub const MIN_FONT_SIZE: f64 = 10.0;
pub const LABEL_FONT_SIZE: f64 = 12.0;
const TEXT_PAD: f64 = 3.0;
const LANE_CLEARANCE: f64 = 8.0;

pub fn block_size(kind: BlockKind) -> (f64, f64) {
    match kind {
        BlockKind::Process | BlockKind::InputOutput => (220.0, 60.0),
        BlockKind::Terminal => (180.0, 50.0),
        BlockKind::Decision => (160.0, 160.0),
    }
}

const WIDEST: f64 = 110.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub node: usize,
    pub kind: BlockKind,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl Shape {
    pub fn top(&self) -> f64 {
        self.cy - self.h / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.cy + self.h / 2.0
    }

    /// x of the outline on `side` at height `y`.
    pub fn boundary_x(&self, side: Side, y: f64) -> f64 {
        let dy = y - self.cy;
        let half = match self.kind {
            BlockKind::Process => self.w / 2.0,
            BlockKind::Terminal => {
                let r = (dy / (self.h / 2.0)).clamp(-1.0, 1.0);
                self.w / 2.0 * (1.0 - r * r).sqrt()
            }
            BlockKind::Decision => self.w / 2.0 - dy.abs() * self.w / self.h,
            BlockKind::InputOutput => {
                let down = (y - self.top()) / self.h;
                return match side {
                    Side::Right => self.cx + self.w / 2.0 - SLANT * down,
                    Side::Left => self.cx - self.w / 2.0 + SLANT * (1.0 - down),
                };
            }
        };
        self.cx + side.sign() * half
    }

    /// Outline vertices; ellipses are approximated by 180 points, as an SVG
    /// reader does.
    pub fn polygon(&self) -> Vec<Point> {
        let (x0, y0) = (self.cx - self.w / 2.0, self.top());
        let (x1, y1) = (self.cx + self.w / 2.0, self.bottom());
        match self.kind {
            BlockKind::Process => vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)],
            BlockKind::InputOutput => {
                vec![(x0 + SLANT, y0), (x1, y0), (x1 - SLANT, y1), (x0, y1)]
            }
            BlockKind::Decision => vec![(self.cx, y0), (x1, self.cy), (self.cx, y1), (x0, self.cy)],
            BlockKind::Terminal => (0..180)
                .map(|i| {
                    let a = i as f64 * std::f64::consts::TAU / 180.0;
                    (self.cx + self.w / 2.0 * a.cos(), self.cy + self.h / 2.0 * a.sin())
                })
                .collect(),
        }
    }

    /// Whether a centered text box of the given size stays clear of the
    /// outline.
    fn fits(&self, text_w: f64, size: f64) -> bool {
        let hw = text_w / 2.0 + TEXT_PAD;
        let hh = size / 2.0 + TEXT_PAD;
        let (a, b) = (self.w / 2.0 - SHAPE_STROKE, self.h / 2.0 - SHAPE_STROKE);
        match self.kind {
            BlockKind::Process => hw <= a && hh <= b,
            BlockKind::InputOutput => hh <= b && hw <= a - SLANT * (self.h / 2.0 + hh) / self.h,
            BlockKind::Terminal => (hw / a).powi(2) + (hh / b).powi(2) <= 1.0,
            BlockKind::Decision => hw / a + hh / b <= 1.0,
        }
    }

    /// Vertical offsets from `cy` where arrows may enter a side, top to
    /// bottom. Diamonds keep their side vertex free for the branch exits.
    fn entry_offsets(&self, side_exit: bool) -> Vec<f64> {
        let all: &[f64] = match self.kind {
            BlockKind::Decision => &[-60.0, -48.0, -36.0, -24.0, 24.0, 36.0, 48.0, 60.0],
            BlockKind::Terminal => &[-12.0, 0.0, 12.0],
            _ => &[-24.0, -12.0, 0.0, 12.0, 24.0],
        };
        all.iter().copied().filter(|&o| !(side_exit && o == 0.0)).collect()
    }

    fn max_entry_offset(&self) -> f64 {
        match self.kind {
            BlockKind::Decision => 60.0,
            BlockKind::Terminal => 12.0,
            _ => 24.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Text {
    pub text: String,
    /// Left edge.
    pub x: f64,
    /// Top edge.
    pub y: f64,
    pub size: f64,
    /// The block this text labels; `None` for branch labels.
    pub node: Option<usize>,
}

impl Text {
    pub fn width(&self) -> f64 {
        text_width(&self.text, self.size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrow {
    pub edge: usize,
    /// Polyline from the tail to the base of the head.
    pub points: Vec<Point>,
    /// Tip first, then the two base corners.
    pub head: [Point; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub width: f64,
    pub height: f64,
    pub shapes: Vec<Shape>,
    pub arrows: Vec<Arrow>,
    pub texts: Vec<Text>,
}

struct LaneEdge {
    edge: usize,
    src: usize,
    dst: usize,
    side: Side,
    exit: Point,
    lane: usize,
}

pub fn layout(g: &FlowGraph) -> Result<Layout, RenderError> {
    let order = linearize_indices(g)?;
    let index: HashMap<&str, usize> = g.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();

    let mut row = vec![0usize; g.nodes.len()];
    let mut shapes: Vec<Option<Shape>> = vec![None; g.nodes.len()];
    let mut y = 0.0;
    for (r, &i) in order.iter().enumerate() {
        row[i] = r;
        let kind = g.nodes[i].kind;
        let (w, h) = block_size(kind);
        shapes[i] = Some(Shape {
            node: i,
            kind,
            cx: 0.0,
            cy: y + h / 2.0,
            w,
            h,
        });
        y += h + GAP;
    }
    let shapes: Vec<Shape> = shapes
        .into_iter()
        .map(|s| s.expect("linearize covers all nodes"))
        .collect();

    let mut texts = Vec::new();
    for &i in &order {
        texts.push(block_text(g, &shapes[i])?);
    }

    let mut arrows = Vec::new();
    let mut lane_edges = Vec::new();
    let mut side_exit = vec![[false; 2]; g.nodes.len()];
    for (ei, e) in g.edges.iter().enumerate() {
        let (u, v) = (index[e.src.as_str()], index[e.dst.as_str()]);
        let (su, sv) = (&shapes[u], &shapes[v]);
        let decision = su.kind == BlockKind::Decision;
        if row[v] == row[u] + 1 && e.label != EdgeLabel::No {
            let pts = vec![(su.cx, su.bottom() + ARROW_GAP), (sv.cx, sv.top() - ARROW_GAP)];
            arrows.push(finish_arrow(ei, pts));
            if e.label == EdgeLabel::Yes {
                texts.push(label("Yes", su.cx + 6.0, su.bottom() + 4.0));
            }
            continue;
        }
        let side = if decision && e.label == EdgeLabel::No {
            Side::Right
        } else {
            Side::Left
        };
        let exit = (su.boundary_x(side, su.cy), su.cy);
        side_exit[u][side as usize] = true;
        match e.label {
            EdgeLabel::No => texts.push(label("No", exit.0 + 6.0, su.cy - 4.0 - LABEL_FONT_SIZE)),
            EdgeLabel::Yes => {
                let w = text_width("Yes", LABEL_FONT_SIZE);
                texts.push(label("Yes", exit.0 - 6.0 - w, su.cy - 4.0 - LABEL_FONT_SIZE));
            }
            EdgeLabel::Unlabeled => {}
        }
        lane_edges.push(LaneEdge {
            edge: ei,
            src: u,
            dst: v,
            side,
            exit,
            lane: 0,
        });
    }

    assign_lanes(&mut lane_edges, &shapes);
    let slots = assign_slots(&lane_edges, &shapes, &side_exit);
    for (k, le) in lane_edges.iter().enumerate() {
        let (su, sv) = (&shapes[le.src], &shapes[le.dst]);
        let s = le.side.sign();
        let lane_x = su.cx + s * (WIDEST + LANE_OFFSET + LANE_STEP * le.lane as f64);
        let entry_y = sv.cy + slots[k];
        let tip_x = entry_tip_x(sv, le.side, entry_y);
        let start = (le.exit.0 + s * ARROW_GAP, le.exit.1);
        let pts = vec![start, (lane_x, start.1), (lane_x, entry_y), (tip_x, entry_y)];
        arrows.push(finish_arrow(le.edge, pts));
    }
    arrows.sort_by_key(|a| a.edge);

    Ok(place(shapes_in_order(shapes, &order), arrows, texts))
}

fn shapes_in_order(shapes: Vec<Shape>, order: &[usize]) -> Vec<Shape> {
    order.iter().map(|&i| shapes[i].clone()).collect()
}

fn label(text: &str, x: f64, y: f64) -> Text {
    Text {
        text: text.to_string(),
        x,
        y,
        size: LABEL_FONT_SIZE,
        node: None,
    }
}

fn block_text(g: &FlowGraph, s: &Shape) -> Result<Text, RenderError> {
    let text = &g.nodes[s.node].text;
    let mut size = FONT_SIZE;
    while size >= MIN_FONT_SIZE {
        let w = text_width(text, size);
        if s.fits(w, size) {
            return Ok(Text {
                text: text.clone(),
                x: s.cx - w / 2.0,
                y: s.cy - size / 2.0,
                size,
                node: Some(s.node),
            });
        }
        size -= 1.0;
    }
    Err(RenderError::TextTooWide {
        node: g.nodes[s.node].id.clone(),
        text: text.clone(),
    })
}

/// Head triangle for a tip and unit direction of travel: tip, then the two
/// base corners.
fn head_triangle(tip: Point, (ux, uy): Point) -> [Point; 3] {
    let base = (tip.0 - ux * HEAD_LEN, tip.1 - uy * HEAD_LEN);
    let (px, py) = (-uy * HEAD_WIDTH / 2.0, ux * HEAD_WIDTH / 2.0);
    [tip, (base.0 + px, base.1 + py), (base.0 - px, base.1 - py)]
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    ((p.0 - a.0 - t * dx).powi(2) + (p.1 - a.1 - t * dy).powi(2)).sqrt()
}

/// Smallest distance between two disjoint closed polygons.
fn polygon_gap(a: &[Point], b: &[Point]) -> f64 {
    let one_way = |a: &[Point], b: &[Point]| {
        a.iter()
            .flat_map(|&p| (0..b.len()).map(move |i| segment_distance(p, b[i], b[(i + 1) % b.len()])))
            .fold(f64::INFINITY, f64::min)
    };
    one_way(a, b).min(one_way(b, a))
}

/// x of the tip of a horizontal arrow entering `s` from `side` at `y`. The
/// tip starts one gap outside the outline and moves out until the whole head
/// clears the outline by that gap, which matters on slanted and curved sides.
fn entry_tip_x(s: &Shape, side: Side, y: f64) -> f64 {
    let sign = side.sign();
    let outline = s.polygon();
    let mut x = s.boundary_x(side, y) + sign * ARROW_GAP;
    while polygon_gap(&head_triangle((x, y), (-sign, 0.0)), &outline) < ARROW_GAP {
        x += sign * 0.5;
    }
    x
}

/// Shortens the polyline by the head length and builds the head triangle.
fn finish_arrow(edge: usize, mut pts: Vec<Point>) -> Arrow {
    let tip = *pts.last().expect("arrow has points");
    let prev = pts[pts.len() - 2];
    let (dx, dy) = (tip.0 - prev.0, tip.1 - prev.1);
    let len = (dx * dx + dy * dy).sqrt();
    let head = head_triangle(tip, (dx / len, dy / len));
    *pts.last_mut().unwrap() = (tip.0 - dx / len * HEAD_LEN, tip.1 - dy / len * HEAD_LEN);
    Arrow {
        edge,
        points: pts,
        head,
    }
}

fn assign_lanes(edges: &mut [LaneEdge], shapes: &[Shape]) {
    for side in [Side::Left, Side::Right] {
        let mut spans: Vec<(usize, f64, f64)> = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.side == side)
            .map(|(k, e)| {
                let (su, sv) = (&shapes[e.src], &shapes[e.dst]);
                let pad = sv.max_entry_offset() + HEAD_WIDTH / 2.0 + LANE_CLEARANCE;
                if su.cy < sv.cy {
                    (k, su.cy - LANE_CLEARANCE, sv.cy + pad)
                } else {
                    (k, sv.cy - pad, su.cy + LANE_CLEARANCE)
                }
            })
            .collect();
        spans.sort_by(|a, b| {
            (a.2 - a.1)
                .total_cmp(&(b.2 - b.1))
                .then(edges[a.0].edge.cmp(&edges[b.0].edge))
        });
        let mut lanes: Vec<Vec<(f64, f64)>> = Vec::new();
        for (k, lo, hi) in spans {
            let free = lanes.iter().position(|l| l.iter().all(|&(a, b)| hi <= a || b <= lo));
            let lane = free.unwrap_or_else(|| {
                lanes.push(Vec::new());
                lanes.len() - 1
            });
            lanes[lane].push((lo, hi));
            edges[k].lane = lane;
        }
    }
}

/// Entry offsets for every lane edge. Entries from above sit above entries
/// from below; within each group the order keeps horizontals from crossing
/// the lanes of their neighbours.
fn assign_slots(edges: &[LaneEdge], shapes: &[Shape], side_exit: &[[bool; 2]]) -> Vec<f64> {
    let mut groups: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (k, e) in edges.iter().enumerate() {
        groups.entry((e.dst, e.side as usize)).or_default().push(k);
    }
    let mut keys: Vec<_> = groups.keys().copied().collect();
    keys.sort();
    let mut out = vec![0.0; edges.len()];
    for key in keys {
        let members = &groups[&key];
        let sv = &shapes[key.0];
        let from_above = |k: usize| shapes[edges[k].src].cy < sv.cy;
        let mut above: Vec<usize> = members.iter().copied().filter(|&k| from_above(k)).collect();
        let mut below: Vec<usize> = members.iter().copied().filter(|&k| !from_above(k)).collect();
        above.sort_by_key(|&k| (edges[k].lane, edges[k].edge));
        below.sort_by_key(|&k| (std::cmp::Reverse(edges[k].lane), edges[k].edge));
        let ordered: Vec<usize> = above.iter().chain(&below).copied().collect();
        let offsets = sv.entry_offsets(side_exit[key.0][key.1]);
        let (n, k) = (offsets.len(), ordered.len());
        if k <= n {
            let mid = offsets.iter().position(|&o| o >= 0.0).unwrap_or(n);
            let start = mid.saturating_sub(above.len()).min(n - k);
            for (j, &e) in ordered.iter().enumerate() {
                out[e] = offsets[start + j];
            }
        } else {
            let (lo, hi) = (offsets[0], offsets[n - 1]);
            for (j, &e) in ordered.iter().enumerate() {
                out[e] = lo + (hi - lo) * j as f64 / (k - 1) as f64;
            }
        }
    }
    out
}

/// Moves everything so the drawing starts at the margin and sizes the
/// canvas.
fn place(mut shapes: Vec<Shape>, mut arrows: Vec<Arrow>, mut texts: Vec<Text>) -> Layout {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    let mut grow = |x: f64, y: f64| {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    };
    for s in &shapes {
        grow(s.cx - s.w / 2.0, s.top());
        grow(s.cx + s.w / 2.0, s.bottom());
    }
    for a in &arrows {
        for &(x, y) in a.points.iter().chain(&a.head) {
            grow(x, y);
        }
    }
    for t in &texts {
        grow(t.x, t.y);
        grow(t.x + t.width(), t.y + t.size);
    }
    let dx = (MARGIN - x0).ceil();
    let dy = (MARGIN - y0).ceil();
    for s in &mut shapes {
        s.cx += dx;
        s.cy += dy;
    }
    for a in &mut arrows {
        for p in a.points.iter_mut().chain(a.head.iter_mut()) {
            p.0 += dx;
            p.1 += dy;
        }
    }
    for t in &mut texts {
        t.x += dx;
        t.y += dy;
    }
    Layout {
        width: (x1 + dx + MARGIN).ceil(),
        height: (y1 + dy + MARGIN).ceil(),
        shapes,
        arrows,
        texts,
    }
}
