//! Text acquisition through an external OCR command or a ground-truth
//! sidecar file.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use super::VisionError;

/// A recognized text fragment with its pixel box (origin top-left).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrBox {
    pub text: String,
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
    pub conf: f64,
}

impl OcrBox {
    pub fn center(&self) -> (f64, f64) {
        (self.x as f64 + self.w as f64 / 2.0, self.y as f64 + self.h as f64 / 2.0)
    }

    /// Euclidean distance from `p` to the box (0 inside).
    pub fn distance_to(&self, p: (f64, f64)) -> f64 {
        let dx = (self.x as f64 - p.0).max(p.0 - (self.x + self.w) as f64).max(0.0);
        let dy = (self.y as f64 - p.1).max(p.1 - (self.y + self.h) as f64).max(0.0);
        (dx * dx + dy * dy).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OcrAdapter {
    /// Run `program args.. <image>` and parse its standard output.
    Command(Vec<String>),
    /// Read `<image>.gt.json` written by the renderer.
    Sidecar,
}

pub fn sidecar_path(image: &Path) -> PathBuf {
    let mut s = image.as_os_str().to_owned();
    s.push(".gt.json");
    PathBuf::from(s)
}

pub fn write_sidecar(image: &Path, boxes: &[OcrBox]) -> std::io::Result<()> {
    let json = serde_json::to_string(boxes).map_err(std::io::Error::from)?;
    std::fs::write(sidecar_path(image), json)
}

fn parse_boxes(text: &str) -> Result<Vec<OcrBox>, VisionError> {
    let boxes: Vec<OcrBox> =
        serde_json::from_str(text).map_err(|e| VisionError::AdapterFailure(format!("malformed JSON: {e}")))?;
    if let Some(b) = boxes.iter().find(|b| b.w <= 0 || b.h <= 0) {
        return Err(VisionError::AdapterFailure(format!("box {:?} has no area", b.text)));
    }
    Ok(boxes)
}

pub fn read_text(image: &Path, adapter: &OcrAdapter) -> Result<Vec<OcrBox>, VisionError> {
    match adapter {
        OcrAdapter::Sidecar => {
            let path = sidecar_path(image);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| VisionError::AdapterFailure(format!("{}: {e}", path.display())))?;
            parse_boxes(&text)
        }
        OcrAdapter::Command(argv) => {
            let (prog, args) = argv
                .split_first()
                .ok_or_else(|| VisionError::AdapterFailure("empty adapter command".into()))?;
            let out = Command::new(prog)
                .args(args)
                .arg(image)
                .output()
                .map_err(|e| VisionError::AdapterFailure(format!("{prog}: {e}")))?;
            if !out.status.success() {
                return Err(VisionError::AdapterFailure(format!(
                    "{prog} exited with {}: {}",
                    out.status,
                    String::from_utf8_lossy(&out.stderr).trim()
                )));
            }
            parse_boxes(&String::from_utf8_lossy(&out.stdout))
        }
    }
}
