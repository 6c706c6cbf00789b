//! Scale-pool search: every candidate block size is resampled to the patch
//! size and scored with the HOG-only scale filter; the strongest peak wins.

use crate::error::{Error, Result};
use crate::features::{scale_features, CosineWindow};
use crate::filter_bank::{peak_locate, respond, FilterModel};
use crate::imaging::{sample_patch, GrayFrame};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalePyramid {
    factors: Vec<f64>,
    sizes: Vec<(usize, usize)>,
    base: (f64, f64),
    pad: f64,
}

impl ScalePyramid {
    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    /// Block `(width, height)` in frame pixels for every level.
    pub fn sizes(&self) -> &[(usize, usize)] {
        &self.sizes
    }

    pub fn base(&self) -> (f64, f64) {
        self.base
    }

    pub fn pad(&self) -> f64 {
        self.pad
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn middle(&self) -> usize {
        self.factors.len() / 2
    }
}

/// Levels `a^n`, `n = -(S-1)/2 ..= (S-1)/2`, of a `width × height` target.
pub fn pyramid(width: f64, height: f64, a: f64, levels: usize, pad: f64) -> Result<ScalePyramid> {
    if levels.is_multiple_of(2) {
        return Err(Error::InvalidPyramid(format!(
            "level count {levels} must be odd"
        )));
    }
    if !(a > 1.0 && a.is_finite()) {
        return Err(Error::InvalidPyramid(format!(
            "scale step {a} must exceed 1"
        )));
    }
    if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
        return Err(Error::InvalidPyramid(format!(
            "target size {width}x{height}"
        )));
    }
    if !(pad >= 1.0 && pad.is_finite()) {
        return Err(Error::InvalidPyramid(format!("padding {pad} must be >= 1")));
    }
    let half = (levels / 2) as i32;
    let factors: Vec<f64> = (-half..=half).map(|n| a.powi(n)).collect();
    let sizes = factors
        .iter()
        .map(|f| {
            (
                ((f * pad * width).round() as usize).max(1),
                ((f * pad * height).round() as usize).max(1),
            )
        })
        .collect();
    Ok(ScalePyramid {
        factors,
        sizes,
        base: (width, height),
        pad,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleResult {
    pub index: usize,
    pub factor: f64,
    pub peak: f64,
    pub displacement: (i64, i64),
}

/// Scores every pyramid level around `center = (cx, cy)` and returns the
/// strongest. Ties go to the level nearest the middle, then the lower index.
pub fn best_scale(
    frame: &GrayFrame,
    center: (f64, f64),
    scale_model: &FilterModel,
    pyr: &ScalePyramid,
    win: &CosineWindow,
) -> Result<ScaleResult> {
    let scored = scale_responses(frame, center, scale_model, pyr, win)?;
    let mid = pyr.middle();
    let mut best: Option<ScaleResult> = None;
    for r in scored {
        best = match best {
            None => Some(r),
            Some(b) => {
                let closer = r.index.abs_diff(mid) < b.index.abs_diff(mid);
                if r.peak > b.peak || (r.peak == b.peak && closer) {
                    Some(r)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.ok_or_else(|| Error::InvalidPyramid("empty pyramid".into()))
}

/// One scored result per level, in pyramid order.
pub fn scale_responses(
    frame: &GrayFrame,
    center: (f64, f64),
    scale_model: &FilterModel,
    pyr: &ScalePyramid,
    win: &CosineWindow,
) -> Result<Vec<ScaleResult>> {
    let (w, h) = pyr.base();
    let pad = pyr.pad();
    pyr.factors()
        .iter()
        .enumerate()
        .map(|(index, &factor)| {
            let patch = sample_patch(
                frame,
                center.0,
                center.1,
                factor * pad * w,
                factor * pad * h,
            )?;
            let z = scale_features(&patch, win)?;
            let peak = peak_locate(&respond(scale_model, &z)?);
            Ok(ScaleResult {
                index,
                factor,
                peak: peak.value,
                displacement: (peak.dy, peak.dx),
            })
        })
        .collect()
}
