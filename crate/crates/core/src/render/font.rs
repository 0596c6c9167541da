//! Sixteen-segment stroke font. Every glyph is a set of straight strokes
//! inside a unit cell, so text extents follow from the character count.

type P = (f64, f64);

const TL: P = (0.0, 0.0);
const TM: P = (0.5, 0.0);
const TR: P = (1.0, 0.0);
const ML: P = (0.0, 0.5);
const C: P = (0.5, 0.5);
const MR: P = (1.0, 0.5);
const BL: P = (0.0, 1.0);
const BM: P = (0.5, 1.0);
const BR: P = (1.0, 1.0);

fn segment(code: char) -> (P, P) {
    match code {
        'A' => (TL, TM),
        'B' => (TM, TR),
        'C' => (TR, MR),
        'D' => (MR, BR),
        'E' => (BR, BM),
        'F' => (BM, BL),
        'G' => (BL, ML),
        'H' => (ML, TL),
        'I' => (ML, C),
        'J' => (C, MR),
        'K' => (TL, C),
        'L' => (TM, C),
        'M' => (TR, C),
        'N' => (C, BL),
        'O' => (C, BM),
        'P' => (C, BR),
        'Q' => ((0.5, 0.85), BM),
        _ => unreachable!("unknown segment code {code}"),
    }
}

fn codes(ch: char) -> &'static str {
    match ch.to_ascii_uppercase() {
        ' ' => "",
        '0' => "ABCDEFGHMN",
        '1' => "CDM",
        '2' => "ABCJIGFE",
        '3' => "ABCDEFJ",
        '4' => "HIJCD",
        '5' => "ABHIJDEF",
        '6' => "ABHGFEDJI",
        '7' => "ABCD",
        '8' => "ABCDEFGHIJ",
        '9' => "ABCDEFHIJ",
        'A' => "ABCDGHIJ",
        'B' => "ABCDEFLOJ",
        'C' => "ABHGFE",
        'D' => "ABCDEFLO",
        'E' => "ABHGFEI",
        'F' => "ABHGI",
        'G' => "ABHGFEDJ",
        'H' => "HGCDIJ",
        'I' => "ABLOEF",
        'J' => "CDEFG",
        'K' => "HGIMP",
        'L' => "HGFE",
        'M' => "HGCDKM",
        'N' => "HGCDKP",
        'O' => "ABCDEFGH",
        'P' => "ABCHGIJ",
        'Q' => "ABCDEFGHP",
        'R' => "ABCHGIJP",
        'S' => "ABHIJDEF",
        'T' => "ABLO",
        'U' => "HGFEDC",
        'V' => "HGNM",
        'W' => "HGCDNP",
        'X' => "KMNP",
        'Y' => "KMO",
        'Z' => "ABMNFE",
        '(' => "MP",
        ')' => "KN",
        '[' => "AHGF",
        ']' => "BCDE",
        '<' => "MP",
        '>' => "KN",
        '+' => "IJLO",
        '-' => "IJ",
        '*' => "IJKLMNOP",
        '/' => "MN",
        '%' => "AMNE",
        '=' => "IJEF",
        ',' => "N",
        '.' => "Q",
        ':' => "LQ",
        '!' => "LQ",
        '\'' => "L",
        '"' => "LC",
        '_' => "EF",
        '?' => "ABCJQ",
        _ => "ABCDEFGH",
    }
}

/// Strokes for `ch` drawn in the box at `(x, y)` of size `w` by `h`.
pub fn glyph_strokes(ch: char, x: f64, y: f64, w: f64, h: f64) -> Vec<(P, P)> {
    let (ix, iy) = (x + 0.2 * w, y + 0.12 * h);
    let (iw, ih) = (0.6 * w, 0.76 * h);
    codes(ch)
        .chars()
        .map(|c| {
            let (a, b) = segment(c);
            ((ix + a.0 * iw, iy + a.1 * ih), (ix + b.0 * iw, iy + b.1 * ih))
        })
        .collect()
}

/// Horizontal advance per character as a fraction of the font size.
pub const ADVANCE: f64 = 0.5;

pub fn text_width(text: &str, size: f64) -> f64 {
    text.chars().count() as f64 * size * ADVANCE
}
