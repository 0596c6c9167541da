//! Binary scanline rasterizer. A pixel is inked when its center falls inside
//! a primitive; there is no anti-aliasing.

use image::{GrayImage, Luma};

use super::font::{glyph_strokes, ADVANCE};
use super::layout::Point;
use super::svg::{Document, Element};

pub const INK: u8 = 0;
pub const PAPER: u8 = 255;

struct Canvas {
    img: GrayImage,
    scale: f64,
}

impl Canvas {
    fn center(&self, px: u32, py: u32) -> Point {
        ((px as f64 + 0.5) / self.scale, (py as f64 + 0.5) / self.scale)
    }

    /// Pixel range covering `[lo, hi]` in document units on one axis.
    fn span(&self, lo: f64, hi: f64, limit: u32) -> std::ops::Range<u32> {
        let a = ((lo * self.scale).floor().max(0.0) as u32).min(limit);
        let b = ((hi * self.scale).ceil().max(0.0) as u32).min(limit);
        a..b
    }

    fn cover(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, inside: impl Fn(Point) -> bool) {
        let (w, h) = self.img.dimensions();
        for py in self.span(y0, y1, h) {
            for px in self.span(x0, x1, w) {
                if inside(self.center(px, py)) {
                    self.img.put_pixel(px, py, Luma([INK]));
                }
            }
        }
    }

    /// Butt-capped segment of width `w`. The signed-distance test is
    /// half-open so a stroke covers `round(w * scale)` pixels.
    fn segment(&mut self, a: Point, b: Point, w: f64) {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        if len2 == 0.0 {
            return;
        }
        let len = len2.sqrt();
        let hw = w / 2.0;
        self.cover(
            a.0.min(b.0) - hw,
            a.1.min(b.1) - hw,
            a.0.max(b.0) + hw,
            a.1.max(b.1) + hw,
            |(x, y)| {
                let (qx, qy) = (x - a.0, y - a.1);
                let t = (qx * dx + qy * dy) / len2;
                let d = (dx * qy - dy * qx) / len;
                (0.0..=1.0).contains(&t) && -hw <= d && d < hw
            },
        );
    }

    fn disc(&mut self, c: Point, r: f64) {
        self.cover(c.0 - r, c.1 - r, c.0 + r, c.1 + r, |(x, y)| {
            (x - c.0).powi(2) + (y - c.1).powi(2) < r * r
        });
    }

    fn stroke(&mut self, pts: &[Point], closed: bool, w: f64) {
        for pair in pts.windows(2) {
            self.segment(pair[0], pair[1], w);
        }
        if closed && pts.len() > 2 {
            self.segment(pts[pts.len() - 1], pts[0], w);
            for &p in pts {
                self.disc(p, w / 2.0);
            }
        } else if pts.len() > 2 {
            for &p in &pts[1..pts.len() - 1] {
                self.disc(p, w / 2.0);
            }
        }
    }

    /// Even-odd scanline fill.
    fn fill(&mut self, pts: &[Point]) {
        if pts.len() < 3 {
            return;
        }
        let (w, h) = self.img.dimensions();
        let y0 = pts.iter().map(|p| p.1).fold(f64::MAX, f64::min);
        let y1 = pts.iter().map(|p| p.1).fold(f64::MIN, f64::max);
        for py in self.span(y0, y1, h) {
            let y = (py as f64 + 0.5) / self.scale;
            let mut xs = Vec::new();
            for i in 0..pts.len() {
                let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
                if (a.1 <= y && y < b.1) || (b.1 <= y && y < a.1) {
                    xs.push(a.0 + (y - a.1) / (b.1 - a.1) * (b.0 - a.0));
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks_exact(2) {
                for px in self.span(pair[0], pair[1], w) {
                    let x = (px as f64 + 0.5) / self.scale;
                    if pair[0] <= x && x < pair[1] {
                        self.img.put_pixel(px, py, Luma([INK]));
                    }
                }
            }
        }
    }

    fn text(&mut self, text: &str, x: f64, y: f64, size: f64) {
        let adv = size * ADVANCE;
        let w = size * 0.08;
        for (i, ch) in text.chars().enumerate() {
            for (a, b) in glyph_strokes(ch, x + i as f64 * adv, y, adv, size) {
                self.segment(a, b, w);
                self.disc(a, w / 2.0);
                self.disc(b, w / 2.0);
            }
        }
    }
}

pub fn paint(doc: &Document, scale: f64) -> GrayImage {
    let w = (doc.width * scale).ceil().max(1.0) as u32;
    let h = (doc.height * scale).ceil().max(1.0) as u32;
    let mut c = Canvas {
        img: GrayImage::from_pixel(w, h, Luma([PAPER])),
        scale,
    };
    for el in &doc.elements {
        match el {
            Element::Stroke { points, closed, width } => c.stroke(points, *closed, *width),
            Element::Fill(points) => c.fill(points),
            Element::Text { text, x, y, size } => c.text(text, *x, *y, *size),
        }
    }
    c.img
}
