//! Per-frame tracking loop: position estimate, scale estimate, model update.

use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{
    patch_features, scale_features, CosineWindow, FeatureMap, CELL, TEMPLATE_SIDE,
};
use crate::filter_bank::{self, peak_locate, respond, FilterModel, ResponseMap};
use crate::imaging::{
    block_extent, extract_block, sample_patch, BoundingBox, GrayFrame, Patch, PATCH_SIDE,
};
use crate::scale_search::{best_scale, pyramid};
use crate::spectral::{gaussian_label, GaussianLabel};

/// Smallest box side the tracker will report, in pixels.
pub const MIN_BOX_SIDE: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerParams {
    pub lambda: f64,
    pub eta: f64,
    /// Label width in cells.
    pub sigma: f64,
    pub scale_levels: usize,
    pub scale_step: f64,
    pub pad: f64,
    pub patch_side: usize,
    pub template_side: usize,
    pub cell: usize,
}

impl Default for TrackerParams {
    fn default() -> Self {
        TrackerParams {
            lambda: 0.01,
            eta: 0.025,
            // sqrt(32·32) / 16
            sigma: 2.0,
            scale_levels: 7,
            scale_step: 1.005,
            pad: 2.0,
            patch_side: PATCH_SIDE,
            template_side: TEMPLATE_SIDE,
            cell: CELL,
        }
    }
}

impl TrackerParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidParams(what));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be > 0, got {}", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return bad(format!("eta must be in [0, 1], got {}", self.eta));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be > 0, got {}", self.sigma));
        }
        if self.scale_levels.is_multiple_of(2) {
            return bad(format!(
                "scale_levels must be odd, got {}",
                self.scale_levels
            ));
        }
        if !(self.scale_step > 1.0 && self.scale_step.is_finite()) {
            return bad(format!("scale_step must exceed 1, got {}", self.scale_step));
        }
        if !(self.pad >= 1.0 && self.pad.is_finite()) {
            return bad(format!("pad must be >= 1, got {}", self.pad));
        }
        if self.patch_side != PATCH_SIDE
            || self.template_side != TEMPLATE_SIDE
            || self.cell != CELL
            || self.patch_side != self.template_side * self.cell
        {
            return bad(format!(
                "geometry is fixed at patch {PATCH_SIDE}, template {TEMPLATE_SIDE}, cell {CELL}"
            ));
        }
        Ok(())
    }

    /// Reads `key=value` overrides on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = TrackerParams::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| Error::Config {
                line: idx + 1,
                reason,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key=value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let real = || value.parse::<f64>().map_err(|e| err(format!("{key}: {e}")));
            let int = || {
                value
                    .parse::<usize>()
                    .map_err(|e| err(format!("{key}: {e}")))
            };
            match key {
                "lambda" => p.lambda = real()?,
                "eta" => p.eta = real()?,
                "sigma" => p.sigma = real()?,
                "scale_levels" => p.scale_levels = int()?,
                "scale_step" => p.scale_step = real()?,
                "pad" => p.pad = real()?,
                "patch_side" => p.patch_side = int()?,
                "template_side" => p.template_side = int()?,
                "cell" => p.cell = int()?,
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone)]
pub struct TrackerState {
    pub bbox: BoundingBox,
    pub position_model: FilterModel,
    pub scale_model: FilterModel,
    pub label: GaussianLabel,
    /// 1-based number of the last processed frame.
    pub frame_index: usize,
    pub params: TrackerParams,
    window: CosineWindow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackResult {
    pub frame_index: usize,
    pub bbox: BoundingBox,
    /// `None` on the initialization frame.
    pub position_peak: Option<f64>,
    pub scale_factor: f64,
    pub response: Option<ResponseMap>,
}

fn sample_features(
    frame: &GrayFrame,
    bbox: &BoundingBox,
    pad: f64,
    win: &CosineWindow,
) -> Result<(FeatureMap, FeatureMap)> {
    let block = extract_block(frame, bbox, 1.0, pad)?;
    let (position, _) = patch_features(&Patch::from_block(&block), win)?;
    // Sampled exactly as the scale search samples its levels.
    let patch = sample_patch(frame, bbox.cx, bbox.cy, pad * bbox.w, pad * bbox.h)?;
    Ok((position, scale_features(&patch, win)?))
}

pub fn init(frame: &GrayFrame, bbox: BoundingBox, params: TrackerParams) -> Result<TrackerState> {
    params.validate()?;
    bbox.validate()?;
    if bbox.w < 1.0 || bbox.h < 1.0 {
        return Err(Error::InvalidBox(format!(
            "target {}x{} is smaller than one pixel",
            bbox.w, bbox.h
        )));
    }
    let window = CosineWindow::new(params.template_side, params.template_side);
    let label = gaussian_label(params.template_side, params.template_side, params.sigma)?;
    let (pos, scale) = sample_features(frame, &bbox, params.pad, &window)?;
    Ok(TrackerState {
        bbox,
        position_model: filter_bank::train_init(&pos, &label, params.lambda)?,
        scale_model: filter_bank::train_init(&scale, &label, params.lambda)?,
        label,
        frame_index: 1,
        params,
        window,
    })
}

/// Result record for the initialization frame.
pub fn init_result(state: &TrackerState) -> TrackResult {
    TrackResult {
        frame_index: state.frame_index,
        bbox: state.bbox,
        position_peak: None,
        scale_factor: 1.0,
        response: None,
    }
}

pub fn step(state: &TrackerState, frame: &GrayFrame) -> Result<(TrackerState, TrackResult)> {
    let p = &state.params;
    let old = state.bbox;

    // Position at the previous scale.
    let (pos_z, _) = sample_features(frame, &old, p.pad, &state.window)?;
    let response = respond(&state.position_model, &pos_z)?;
    let peak = peak_locate(&response);
    let px_per_cell_x =
        p.cell as f64 * block_extent(old.w, 1.0, p.pad) as f64 / p.patch_side as f64;
    let px_per_cell_y =
        p.cell as f64 * block_extent(old.h, 1.0, p.pad) as f64 / p.patch_side as f64;
    let cx = (old.cx + peak.dx as f64 * px_per_cell_x).clamp(0.0, frame.width() as f64);
    let cy = (old.cy + peak.dy as f64 * px_per_cell_y).clamp(0.0, frame.height() as f64);

    // Scale around the new center.
    let pyr = pyramid(old.w, old.h, p.scale_step, p.scale_levels, p.pad)?;
    let scale = best_scale(frame, (cx, cy), &state.scale_model, &pyr, &state.window)?;
    let bbox = BoundingBox::new(
        cx,
        cy,
        (old.w * scale.factor).max(MIN_BOX_SIDE),
        (old.h * scale.factor).max(MIN_BOX_SIDE),
    )?;

    // One training sample from the final box updates both filters.
    let (pos_f, scale_f) = sample_features(frame, &bbox, p.pad, &state.window)?;
    let position_model = filter_bank::update(&state.position_model, &pos_f, &state.label, p.eta)?;
    let scale_model = filter_bank::update(&state.scale_model, &scale_f, &state.label, p.eta)?;

    let next = TrackerState {
        bbox,
        position_model,
        scale_model,
        label: state.label.clone(),
        frame_index: state.frame_index + 1,
        params: state.params.clone(),
        window: state.window.clone(),
    };
    let result = TrackResult {
        frame_index: next.frame_index,
        bbox,
        position_peak: Some(peak.value),
        scale_factor: scale.factor,
        response: Some(response),
    };
    Ok((next, result))
}
