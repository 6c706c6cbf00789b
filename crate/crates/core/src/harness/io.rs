use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};

use super::Sequence;
use crate::error::{Error, Result};
use crate::imaging::{BoundingBox, GrayFrame};
use crate::plane::Plane;
use crate::tracker::TrackResult;

const FRAME_EXTENSIONS: [&str; 4] = ["pgm", "pnm", "png", "PGM"];

/// Parses `x,y,w,h` (comma or tab separated, 1-based top-left corner).
pub fn parse_truth_line(line: &str) -> Result<BoundingBox> {
    let malformed = |reason: &str| Error::MalformedTruth {
        line: line.to_string(),
        reason: reason.to_string(),
    };
    let fields: Vec<&str> = line.trim().split([',', '\t']).map(str::trim).collect();
    if fields.len() != 4 {
        return Err(malformed("expected 4 fields"));
    }
    let mut v = [0.0; 4];
    for (slot, field) in v.iter_mut().zip(&fields) {
        *slot = field
            .parse::<f64>()
            .map_err(|_| malformed("non-numeric field"))?;
        if !slot.is_finite() {
            return Err(malformed("non-finite field"));
        }
    }
    let [x, y, w, h] = v;
    if w <= 0.0 || h <= 0.0 {
        return Err(malformed("width and height must be positive"));
    }
    BoundingBox::new(x - 1.0 + w / 2.0, y - 1.0 + h / 2.0, w, h)
}

pub fn format_truth_line(b: &BoundingBox) -> String {
    format!("{},{},{},{}", b.left() + 1.0, b.top() + 1.0, b.w, b.h)
}

pub fn read_truth(path: &Path) -> Result<Vec<BoundingBox>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(parse_truth_line)
        .collect()
}

fn frame_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| FRAME_EXTENSIONS.contains(&e))
        })
        .collect();
    paths.sort();
    Ok(paths)
}

fn load_frame(path: &Path) -> Result<GrayFrame> {
    let img = image::open(path)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?
        .to_luma8();
    let (w, h) = img.dimensions();
    GrayFrame::from_u8(w as usize, h as usize, img.as_raw())
}

/// Loads every image in `image_dir` in lexicographic order, plus the
/// ground truth when given.
pub fn load_sequence(image_dir: &Path, truth_path: Option<&Path>) -> Result<Sequence> {
    let frames = frame_paths(image_dir)?
        .iter()
        .map(|p| load_frame(p))
        .collect::<Result<Vec<_>>>()?;
    if frames.is_empty() {
        return Err(Error::InvalidFrame(format!(
            "no image files in {}",
            image_dir.display()
        )));
    }
    let truth = truth_path.map(read_truth).transpose()?;
    let name = image_dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    Sequence::new(name, frames, truth)
}

fn write_pgm(path: &Path, width: usize, height: usize, bytes: &[u8]) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    PnmEncoder::new(out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(bytes, width as u32, height as u32, ExtendedColorType::L8)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes `frame_0001.pgm…` and, when present, `groundtruth_rect.txt`.
pub fn save_sequence(seq: &Sequence, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, frame) in seq.frames.iter().enumerate() {
        let path = dir.join(format!("frame_{:04}.pgm", i + 1));
        write_pgm(&path, frame.width(), frame.height(), &frame.to_u8())?;
    }
    if let Some(truth) = &seq.truth {
        let mut text = String::new();
        for b in truth {
            let _ = writeln!(text, "{}", format_truth_line(b));
        }
        fs::write(dir.join("groundtruth_rect.txt"), text)?;
    }
    Ok(())
}

const RESULTS_HEADER: &str = "frame,cx,cy,w,h,peak,scale_factor,center_error";

pub fn write_results_csv(
    path: &Path,
    results: &[TrackResult],
    truth: Option<&[BoundingBox]>,
) -> Result<()> {
    let mut text = String::from(RESULTS_HEADER);
    text.push('\n');
    for (i, r) in results.iter().enumerate() {
        let peak = r.position_peak.map(|p| p.to_string()).unwrap_or_default();
        let err = truth
            .and_then(|t| t.get(i))
            .map(|t| r.bbox.center_distance(t).to_string())
            .unwrap_or_default();
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            r.frame_index, r.bbox.cx, r.bbox.cy, r.bbox.w, r.bbox.h, peak, r.scale_factor, err
        );
    }
    fs::write(path, text)?;
    Ok(())
}

/// Reads the boxes back out of a results file.
pub fn read_results_csv(path: &Path) -> Result<Vec<BoundingBox>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == RESULTS_HEADER => {}
        _ => {
            return Err(Error::ResultsCsv {
                line: 1,
                reason: format!("expected header {RESULTS_HEADER:?}"),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let bad = |reason: String| Error::ResultsCsv {
                line: i + 1,
                reason,
            };
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() != 8 {
                return Err(bad(format!("expected 8 fields, got {}", fields.len())));
            }
            let num = |k: usize| {
                fields[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("field {k}: {e}")))
            };
            BoundingBox::new(num(1)?, num(2)?, num(3)?, num(4)?)
        })
        .collect()
}

/// Writes a response map as an 8-bit image, min-max normalized, with the
/// zero-displacement cell moved to the image center.
pub fn dump_response(path: &Path, response: &Plane) -> Result<()> {
    let centered = response.circshift(
        (response.rows() / 2) as isize,
        (response.cols() / 2) as isize,
    );
    let lo = centered
        .data()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = centered
        .data()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let bytes: Vec<u8> = centered
        .data()
        .iter()
        .map(|v| (255.0 * (v - lo) / span).round() as u8)
        .collect();
    write_pgm(path, response.cols(), response.rows(), &bytes)
}
