//! Block detection: closed outer contours classified by their simplified
//! polygon or an ellipse fit.

use image::GrayImage;
use serde::{Deserialize, Serialize};

use crate::flowgraph::BlockKind;

use super::bitmap::{components, outer_contour, segment_distance, Bitmap, Bounds, Point};
use super::VisionWarning;

pub const DEFAULT_THRESHOLD: u8 = 128;
/// Components smaller than this on either side are never blocks.
pub const MIN_BLOCK_SIDE: usize = 40;
const ELLIPSE_RMS: f64 = 0.02;
const SIMPLIFY_TOLERANCE: f64 = 0.02;
const ANGLE_TOLERANCE_DEG: f64 = 3.0;
const ELLIPSE_POINTS: usize = 64;

/// Pixel rectangle, origin top-left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl From<Bounds> for BBox {
    fn from(b: Bounds) -> BBox {
        BBox {
            x: b.x0 as u32,
            y: b.y0 as u32,
            w: b.width() as u32,
            h: b.height() as u32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeDetection {
    pub kind: BlockKind,
    pub bbox: BBox,
    /// Outer outline; 4 vertices for polygons, an ellipse approximation for
    /// terminals.
    pub polygon: Vec<Point>,
}

fn angle_deg(a: Point, b: Point) -> f64 {
    (b.1 - a.1).atan2(b.0 - a.0).to_degrees().rem_euclid(180.0)
}

/// Difference between two undirected line angles.
fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

fn axis_parallel(a: Point, b: Point) -> bool {
    let ang = angle_deg(a, b);
    angle_diff(ang, 0.0) <= ANGLE_TOLERANCE_DEG || angle_diff(ang, 90.0) <= ANGLE_TOLERANCE_DEG
}

/// Classifies a 4-vertex outline.
pub fn classify_quad(v: &[Point]) -> Option<BlockKind> {
    if v.len() != 4 {
        return None;
    }
    if (0..4).all(|i| axis_parallel(v[i], v[(i + 1) % 4])) {
        return Some(BlockKind::Process);
    }
    if axis_parallel(v[0], v[2]) && axis_parallel(v[1], v[3]) {
        return Some(BlockKind::Decision);
    }
    let side = |i: usize| angle_deg(v[i], v[(i + 1) % 4]);
    if angle_diff(side(0), side(2)) <= ANGLE_TOLERANCE_DEG && angle_diff(side(1), side(3)) <= ANGLE_TOLERANCE_DEG {
        return Some(BlockKind::InputOutput);
    }
    None
}

fn split_chain(pts: &[Point], a: usize, b: usize, tol: f64, out: &mut Vec<usize>) {
    let n = pts.len();
    let len = (b + n - a) % n;
    let mut best = (0.0, None);
    for k in 1..len {
        let i = (a + k) % n;
        let d = segment_distance(pts[i], pts[a], pts[b]);
        if d > best.0 {
            best = (d, Some(i));
        }
    }
    if let (d, Some(i)) = best {
        if d > tol {
            split_chain(pts, a, i, tol, out);
            out.push(i);
            split_chain(pts, i, b, tol, out);
        }
    }
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Recursive farthest-point simplification of a closed contour.
pub fn simplify_closed(pts: &[Point], tol: f64) -> Vec<Point> {
    if pts.len() < 3 {
        return pts.to_vec();
    }
    let far = |from: Point| {
        (0..pts.len())
            .max_by(|&i, &j| dist(pts[i], from).total_cmp(&dist(pts[j], from)))
            .expect("non-empty")
    };
    let a = far(pts[0]);
    let b = far(pts[a]);
    let mut idx = vec![a];
    split_chain(pts, a, b, tol, &mut idx);
    idx.push(b);
    split_chain(pts, b, a, tol, &mut idx);
    // Rotate so the topmost (then leftmost) vertex comes first.
    let first = (0..idx.len())
        .min_by(|&i, &j| {
            let (p, q) = (pts[idx[i]], pts[idx[j]]);
            p.1.total_cmp(&q.1).then(p.0.total_cmp(&q.0))
        })
        .expect("non-empty");
    idx.rotate_left(first);
    idx.into_iter().map(|i| pts[i]).collect()
}

fn perimeter(pts: &[Point]) -> f64 {
    (0..pts.len()).map(|i| dist(pts[i], pts[(i + 1) % pts.len()])).sum()
}

/// RMS of the normalized radial error against the ellipse inscribed in the
/// contour's bounding box.
fn ellipse_residual(pts: &[Point], b: Bounds) -> f64 {
    let cx = (b.x0 + b.x1 + 1) as f64 / 2.0;
    let cy = (b.y0 + b.y1 + 1) as f64 / 2.0;
    let a = b.width() as f64 / 2.0 - 0.5;
    let c = b.height() as f64 / 2.0 - 0.5;
    if a <= 0.0 || c <= 0.0 {
        return f64::INFINITY;
    }
    let sum: f64 = pts
        .iter()
        .map(|&(x, y)| (((x - cx) / a).powi(2) + ((y - cy) / c).powi(2)).sqrt() - 1.0)
        .map(|r| r * r)
        .sum();
    (sum / pts.len() as f64).sqrt()
}

fn ellipse_polygon(b: Bounds) -> Vec<Point> {
    let cx = (b.x0 + b.x1 + 1) as f64 / 2.0;
    let cy = (b.y0 + b.y1 + 1) as f64 / 2.0;
    let (a, c) = (b.width() as f64 / 2.0, b.height() as f64 / 2.0);
    (0..ELLIPSE_POINTS)
        .map(|i| {
            let t = i as f64 * std::f64::consts::TAU / ELLIPSE_POINTS as f64;
            (cx + a * t.cos(), cy + c * t.sin())
        })
        .collect()
}

/// Finds flowchart blocks, top to bottom then left to right. Closed
/// components that fit no block kind are reported as warnings.
pub fn detect_shapes(img: &GrayImage, threshold: u8) -> (Vec<ShapeDetection>, Vec<VisionWarning>) {
    let bm = Bitmap::binarize(img, threshold);
    if bm.bits.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let (comps, labels) = components(&bm);
    let mut shapes = Vec::new();
    let mut warnings = Vec::new();
    for (k, c) in comps.iter().enumerate() {
        if !c.has_hole || c.nested || c.bounds.width().min(c.bounds.height()) < MIN_BLOCK_SIDE {
            continue;
        }
        let contour = outer_contour(&labels, bm.width, bm.height, k as u32 + 1, c.pixels[0]);
        let kind_poly = if ellipse_residual(&contour, c.bounds) < ELLIPSE_RMS {
            Some((BlockKind::Terminal, ellipse_polygon(c.bounds)))
        } else {
            let poly = simplify_closed(&contour, SIMPLIFY_TOLERANCE * perimeter(&contour));
            classify_quad(&poly).map(|k| (k, poly))
        };
        match kind_poly {
            Some((kind, polygon)) => shapes.push(ShapeDetection {
                kind,
                bbox: c.bounds.into(),
                polygon,
            }),
            None => warnings.push(VisionWarning::UnclassifiableComponent { bbox: c.bounds.into() }),
        }
    }
    shapes.sort_by_key(|s| (s.bbox.y, s.bbox.x));
    (shapes, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Luma;

    fn outline(w: u32, h: u32, draw: impl Fn(i64, i64) -> bool) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| Luma([if draw(x as i64, y as i64) { 0 } else { 255 }]))
    }

    #[test]
    fn blank_image_has_no_shapes() {
        let (s, w) = detect_shapes(&GrayImage::from_pixel(100, 80, Luma([255])), DEFAULT_THRESHOLD);
        assert!(s.is_empty() && w.is_empty());
        assert!(detect_shapes(&GrayImage::new(0, 0), DEFAULT_THRESHOLD).0.is_empty());
    }

    #[test]
    fn rectangle_is_process() {
        let img = outline(300, 200, |x, y| {
            let inx = (30..230).contains(&x);
            let iny = (40..140).contains(&y);
            inx && iny && (!(33..227).contains(&x) || !(43..137).contains(&y))
        });
        let (s, _) = detect_shapes(&img, DEFAULT_THRESHOLD);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].kind, BlockKind::Process);
        let b = s[0].bbox;
        assert!((b.x as i64 - 30).abs() <= 2 && (b.y as i64 - 40).abs() <= 2);
        assert!((b.w as i64 - 200).abs() <= 2 && (b.h as i64 - 100).abs() <= 2);
        assert_eq!(s[0].polygon.len(), 4);
    }

    #[test]
    fn open_and_small_components_are_ignored() {
        let img = outline(200, 200, |x, y| {
            (x == 50 && (10..190).contains(&y)) || ((150..170).contains(&x) && (150..170).contains(&y))
        });
        assert!(detect_shapes(&img, DEFAULT_THRESHOLD).0.is_empty());
    }

    #[test]
    fn quad_classes() {
        let sq = [(0.0, 0.0), (10.0, 0.0), (10.0, 5.0), (0.0, 5.0)];
        assert_eq!(classify_quad(&sq), Some(BlockKind::Process));
        let dia = [(5.0, 0.0), (10.0, 5.0), (5.0, 10.0), (0.0, 5.0)];
        assert_eq!(classify_quad(&dia), Some(BlockKind::Decision));
        let par = [(2.0, 0.0), (12.0, 0.0), (10.0, 6.0), (0.0, 6.0)];
        assert_eq!(classify_quad(&par), Some(BlockKind::InputOutput));
        let kite = [(5.0, 0.0), (10.0, 3.0), (5.0, 10.0), (0.0, 3.0)];
        assert_eq!(classify_quad(&kite), Some(BlockKind::Decision));
        let trapezoid = [(2.0, 0.0), (8.0, 0.0), (10.0, 6.0), (0.0, 6.0)];
        assert_eq!(classify_quad(&trapezoid), None);
        // A square rotated by 2 degrees still has axis-parallel sides within
        // tolerance; by 45 degrees it reads as a diamond.
        let r = |deg: f64| {
            let t = deg.to_radians();
            [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]
                .map(|(x, y): (f64, f64)| (x * t.cos() - y * t.sin(), x * t.sin() + y * t.cos()))
        };
        assert_eq!(classify_quad(&r(2.0)), Some(BlockKind::Process));
        assert_eq!(classify_quad(&r(45.0)), Some(BlockKind::Decision));
        assert_eq!(classify_quad(&r(20.0)), Some(BlockKind::InputOutput));
    }
}
