//! Binary masks, connected components and outer contours.

use image::GrayImage;

pub type Point = (f64, f64);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl Bitmap {
    pub fn new(width: usize, height: usize) -> Bitmap {
        Bitmap {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    /// Ink is every pixel darker than `threshold`.
    pub fn binarize(img: &GrayImage, threshold: u8) -> Bitmap {
        Bitmap {
            width: img.width() as usize,
            height: img.height() as usize,
            bits: img.pixels().map(|p| p.0[0] < threshold).collect(),
        }
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }
}

/// Inclusive pixel bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Bounds {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }
}

#[derive(Debug, Clone)]
pub struct Component {
    pub pixels: Vec<(usize, usize)>,
    pub bounds: Bounds,
    /// Encloses at least one background region.
    pub has_hole: bool,
    /// Lies inside a hole of another component.
    pub nested: bool,
}

const N8: [(i64, i64); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Labels the connected regions of `want`-valued pixels by union-find over
/// row runs. Returns a label per pixel (`0` for pixels of the other value)
/// and the region count; labels follow the raster order of each region's
/// first pixel.
fn label(b: &Bitmap, want: bool, diagonal: bool) -> (Vec<u32>, u32) {
    let w = b.width;
    // (row, start, end) per run, in raster order.
    let mut runs: Vec<(usize, usize, usize)> = Vec::new();
    let mut parent: Vec<usize> = Vec::new();
    let mut prev_row = 0..0;
    for y in 0..b.height {
        let row = &b.bits[y * w..(y + 1) * w];
        let first = runs.len();
        let mut x = 0;
        while x < w {
            if row[x] != want {
                x += 1;
                continue;
            }
            let s = x;
            while x < w && row[x] == want {
                x += 1;
            }
            let id = runs.len();
            runs.push((y, s, x));
            parent.push(id);
            let reach = diagonal as usize;
            for k in prev_row.clone() {
                let (_, ps, pe) = runs[k];
                if ps < x + reach && s < pe + reach {
                    let (ra, rb) = (find(&mut parent, k), find(&mut parent, id));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        prev_row = first..runs.len();
    }
    let mut labels = vec![0u32; b.bits.len()];
    let mut id_of = vec![0u32; runs.len()];
    let mut next = 0;
    for (k, &(y, s, e)) in runs.iter().enumerate() {
        let r = find(&mut parent, k);
        if id_of[r] == 0 {
            next += 1;
            id_of[r] = next;
        }
        labels[y * w + s..y * w + e].fill(id_of[r]);
    }
    (labels, next)
}

/// Pixels and bounds of each 8-connected ink region, in raster order of its
/// first pixel.
pub fn ink_regions(b: &Bitmap) -> Vec<(Vec<(usize, usize)>, Bounds)> {
    let (ink, n) = label(b, true, true);
    let mut out: Vec<(Vec<(usize, usize)>, Bounds)> = (0..n)
        .map(|_| {
            (
                Vec::new(),
                Bounds {
                    x0: usize::MAX,
                    y0: usize::MAX,
                    x1: 0,
                    y1: 0,
                },
            )
        })
        .collect();
    for (i, &l) in ink.iter().enumerate() {
        if l > 0 {
            let (x, y) = (i % b.width, i / b.width);
            let (px, bd) = &mut out[l as usize - 1];
            px.push((x, y));
            bd.x0 = bd.x0.min(x);
            bd.y0 = bd.y0.min(y);
            bd.x1 = bd.x1.max(x);
            bd.y1 = bd.y1.max(y);
        }
    }
    out
}

/// 8-connected ink components in raster order of their first pixel, with
/// hole and nesting flags from the 4-connected background.
pub fn components(b: &Bitmap) -> (Vec<Component>, Vec<u32>) {
    let (ink, n) = label(b, true, true);
    let (bg, m) = label(b, false, false);
    let w = b.width;

    let mut outside = vec![false; m as usize + 1];
    for x in 0..w {
        outside[bg[x] as usize] = true;
        outside[bg[(b.height - 1) * w + x] as usize] = true;
    }
    for y in 0..b.height {
        outside[bg[y * w] as usize] = true;
        outside[bg[y * w + w - 1] as usize] = true;
    }

    let mut comps: Vec<Component> = (0..n)
        .map(|_| Component {
            pixels: Vec::new(),
            bounds: Bounds {
                x0: usize::MAX,
                y0: usize::MAX,
                x1: 0,
                y1: 0,
            },
            has_hole: false,
            nested: false,
        })
        .collect();
    let mut seen_bg = vec![false; m as usize + 1];
    for (i, (&l, &r)) in ink.iter().zip(&bg).enumerate() {
        let (x, y) = (i % w, i / w);
        if l > 0 {
            let c = &mut comps[l as usize - 1];
            if c.pixels.is_empty() {
                c.nested = x > 0 && !outside[bg[i - 1] as usize];
            }
            c.pixels.push((x, y));
            let bd = &mut c.bounds;
            bd.x0 = bd.x0.min(x);
            bd.y0 = bd.y0.min(y);
            bd.x1 = bd.x1.max(x);
            bd.y1 = bd.y1.max(y);
        } else if !outside[r as usize] && !seen_bg[r as usize] {
            // First pixel of a hole: the ink right above it encloses it.
            seen_bg[r as usize] = true;
            let above = ink[i - w];
            if above > 0 {
                comps[above as usize - 1].has_hole = true;
            }
        }
    }
    (comps, ink)
}

/// Moore-neighbour trace of the outer boundary of component `id`, starting
/// at its first raster pixel. Returns pixel centers in clockwise order.
pub fn outer_contour(labels: &[u32], width: usize, height: usize, id: u32, start: (usize, usize)) -> Vec<Point> {
    let inside = |x: i64, y: i64| {
        x >= 0
            && y >= 0
            && (x as usize) < width
            && (y as usize) < height
            && labels[y as usize * width + x as usize] == id
    };
    let p0 = (start.0 as i64, start.1 as i64);
    let mut out = vec![(p0.0 as f64 + 0.5, p0.1 as f64 + 0.5)];
    // State: current pixel and the index of its background neighbour the
    // clockwise search starts after. The first raster pixel's west
    // neighbour is background.
    let mut state = (p0, 0usize);
    let mut first: Option<((i64, i64), usize)> = None;
    loop {
        let (p, back) = state;
        let next = (1..=8).find_map(|k| {
            let idx = (back + k) % 8;
            let q = (p.0 + N8[idx].0, p.1 + N8[idx].1);
            inside(q.0, q.1).then(|| {
                let prev = (p.0 + N8[(idx + 7) % 8].0, p.1 + N8[(idx + 7) % 8].1);
                let rel = (prev.0 - q.0, prev.1 - q.1);
                (q, N8.iter().position(|&d| d == rel).expect("prev is adjacent to q"))
            })
        });
        let Some(next) = next else {
            return out;
        };
        match first {
            None => first = Some(next),
            Some(f) if f == next => break,
            _ => {}
        }
        state = next;
        out.push((next.0 .0 as f64 + 0.5, next.0 .1 as f64 + 0.5));
    }
    if out.len() > 1 && out.last() == out.first() {
        out.pop();
    }
    out
}

/// Ray-casting point-in-polygon test.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.1 > p.1) != (b.1 > p.1) {
            let x = a.0 + (p.1 - a.1) / (b.1 - a.1) * (b.0 - a.0);
            if p.0 < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    ((p.0 - a.0 - t * dx).powi(2) + (p.1 - a.1 - t * dy).powi(2)).sqrt()
}

/// Distance from `p` to the outline of a closed polygon.
pub fn boundary_distance(p: Point, poly: &[Point]) -> f64 {
    (0..poly.len())
        .map(|i| segment_distance(p, poly[i], poly[(i + 1) % poly.len()]))
        .fold(f64::INFINITY, f64::min)
}
