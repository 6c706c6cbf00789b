//! Deterministic synthetic sequences: a textured rectangle moving and
//! zooming over a static textured background.
//!
//! Both textures are continuous (bilinear over a random control grid), so
//! sub-pixel motion and zoom resample them exactly. The target reflects off
//! the frame borders, reversing the offending velocity component.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Sequence;
use crate::error::{Error, Result};
use crate::imaging::{BoundingBox, GrayFrame};

const BACKGROUND_SPACING: f64 = 12.0;
const TARGET_GRID: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    /// Pixels per frame.
    pub motion: (f64, f64),
    /// Size multiplier per frame.
    pub zoom: f64,
    pub seed: u64,
    /// Initial target size; defaults to a fifth of the smaller frame side.
    pub target: Option<(f64, f64)>,
}

impl SynthSpec {
    pub fn new(width: usize, height: usize, frames: usize) -> Self {
        SynthSpec {
            width,
            height,
            frames,
            motion: (0.0, 0.0),
            zoom: 1.0,
            seed: 0,
            target: None,
        }
    }

    pub fn initial_size(&self) -> (f64, f64) {
        self.target.unwrap_or_else(|| {
            let side = (self.width.min(self.height) as f64 / 5.0).round();
            (side, side)
        })
    }
}

/// Bilinear lookup into a row-major control grid at continuous grid coordinates.
fn grid_sample(grid: &[f64], cols: usize, rows: usize, gx: f64, gy: f64) -> f64 {
    let gx = gx.clamp(0.0, (cols - 1) as f64);
    let gy = gy.clamp(0.0, (rows - 1) as f64);
    let (x0, y0) = (gx.floor() as usize, gy.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(cols - 1), (y0 + 1).min(rows - 1));
    let (fx, fy) = (gx - x0 as f64, gy - y0 as f64);
    let top = grid[y0 * cols + x0] * (1.0 - fx) + grid[y0 * cols + x1] * fx;
    let bottom = grid[y1 * cols + x0] * (1.0 - fx) + grid[y1 * cols + x1] * fx;
    top * (1.0 - fy) + bottom * fy
}

fn inside(b: &BoundingBox, width: usize, height: usize) -> bool {
    b.left() >= 0.0
        && b.top() >= 0.0
        && b.left() + b.w <= width as f64
        && b.top() + b.h <= height as f64
}

fn truth_boxes(spec: &SynthSpec) -> Result<Vec<BoundingBox>> {
    let (w0, h0) = spec.initial_size();
    let (mut vx, mut vy) = spec.motion;
    let (mut cx, mut cy) = (spec.width as f64 / 2.0, spec.height as f64 / 2.0);
    let mut boxes = Vec::with_capacity(spec.frames);
    for t in 0..spec.frames {
        let s = spec.zoom.powi(t as i32);
        let (w, h) = (w0 * s, h0 * s);
        if t > 0 {
            if !inside(
                &BoundingBox::new(cx + vx, cy, w, h)?,
                spec.width,
                spec.height,
            ) {
                vx = -vx;
            }
            if !inside(
                &BoundingBox::new(cx, cy + vy, w, h)?,
                spec.width,
                spec.height,
            ) {
                vy = -vy;
            }
            cx += vx;
            cy += vy;
        }
        let b = BoundingBox::new(cx, cy, w, h)?;
        if !inside(&b, spec.width, spec.height) {
            return Err(Error::TargetOutOfFrame(t + 1));
        }
        boxes.push(b);
    }
    Ok(boxes)
}

pub fn synth_sequence(spec: &SynthSpec) -> Result<Sequence> {
    if spec.width < 64 || spec.height < 64 {
        return Err(Error::InvalidParams(format!(
            "synthetic frames must be at least 64x64, got {}x{}",
            spec.width, spec.height
        )));
    }
    if spec.frames < 2 {
        return Err(Error::InvalidParams(
            "synthetic sequence needs >= 2 frames".into(),
        ));
    }
    if !(spec.zoom > 0.0 && spec.zoom.is_finite())
        || !spec.motion.0.is_finite()
        || !spec.motion.1.is_finite()
    {
        return Err(Error::InvalidParams(
            "motion and zoom must be finite, zoom > 0".into(),
        ));
    }
    let truth = truth_boxes(spec)?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bg_cols = (spec.width as f64 / BACKGROUND_SPACING).ceil() as usize + 2;
    let bg_rows = (spec.height as f64 / BACKGROUND_SPACING).ceil() as usize + 2;
    let background: Vec<f64> = (0..bg_cols * bg_rows)
        .map(|_| rng.gen_range(0.15..0.55))
        .collect();
    let target: Vec<f64> = (0..TARGET_GRID * TARGET_GRID)
        .map(|_| rng.gen_range(0.0..1.0))
        .collect();

    let frames = truth
        .iter()
        .map(|b| {
            let mut data = Vec::with_capacity(spec.width * spec.height);
            for y in 0..spec.height {
                let py = y as f64 + 0.5;
                for x in 0..spec.width {
                    let px = x as f64 + 0.5;
                    let (u, v) = ((px - b.left()) / b.w, (py - b.top()) / b.h);
                    let value = if (0.0..1.0).contains(&u) && (0.0..1.0).contains(&v) {
                        let span = (TARGET_GRID - 1) as f64;
                        grid_sample(&target, TARGET_GRID, TARGET_GRID, u * span, v * span)
                    } else {
                        grid_sample(
                            &background,
                            bg_cols,
                            bg_rows,
                            px / BACKGROUND_SPACING,
                            py / BACKGROUND_SPACING,
                        )
                    };
                    // 8-bit quantization so in-memory and saved frames agree.
                    data.push((value * 255.0).round() / 255.0);
                }
            }
            GrayFrame::new(spec.width, spec.height, data)
        })
        .collect::<Result<Vec<_>>>()?;

    Sequence::new(format!("synth-{}", spec.seed), frames, Some(truth))
}
