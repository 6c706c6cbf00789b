//! Frames, target boxes and the fixed-size search patch.
//!
//! Pixel `(x, y)` covers the continuous square `[x, x+1) × [y, y+1)`, so a
//! box centered at `cx` with width `w` spans `[cx - w/2, cx + w/2)`.

use crate::error::{Error, Result};

/// Side of the square patch every candidate block is resampled to.
pub const PATCH_SIDE: usize = 128;

/// Luma weights (ITU-R BT.601).
pub fn to_gray(r: f64, g: f64, b: f64) -> f64 {
    (0.299 * r + 0.587 * g + 0.114 * b).clamp(0.0, 1.0)
}

/// Single-channel image with row-major intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidFrame(format!("empty frame {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidFrame(format!(
                "{} intensities for a {width}x{height} frame",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidFrame(format!("intensity {v} outside [0, 1]")));
        }
        Ok(GrayFrame {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a frame from 8-bit samples, dividing by 255.
    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            bytes.iter().map(|&b| f64::from(b) / 255.0).collect(),
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Nearest-edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> f64 {
        let xc = x.clamp(0, self.width as i64 - 1) as usize;
        let yc = y.clamp(0, self.height as i64 - 1) as usize;
        self.get(xc, yc)
    }

    /// Multiplies every intensity by `alpha`, which must keep values in `[0, 1]`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.data.iter().map(|v| v * alpha).collect(),
        )
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

/// Center-based axis-aligned box in frame pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        let b = BoundingBox { cx, cy, w, h };
        b.validate()?;
        Ok(b)
    }

    pub fn from_top_left(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(x + w / 2.0, y + h / 2.0, w, h)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.cx, self.cy, self.w, self.h]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::NonFinite("bounding box"));
        }
        if self.w <= 0.0 || self.h <= 0.0 {
            return Err(Error::InvalidBox(format!(
                "non-positive size {}x{}",
                self.w, self.h
            )));
        }
        Ok(())
    }

    pub fn left(&self) -> f64 {
        self.cx - self.w / 2.0
    }

    pub fn top(&self) -> f64 {
        self.cy - self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center_distance(&self, other: &BoundingBox) -> f64 {
        (self.cx - other.cx).hypot(self.cy - other.cy)
    }

    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let ix = (self.left() + self.w).min(other.left() + other.w) - self.left().max(other.left());
        let iy = (self.top() + self.h).min(other.top() + other.h) - self.top().max(other.top());
        let inter = ix.max(0.0) * iy.max(0.0);
        let union = self.area() + other.area() - inter;
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }
}

/// A block resampled to `PATCH_SIDE × PATCH_SIDE`.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch(GrayFrame);

impl Patch {
    pub fn new(frame: GrayFrame) -> Result<Self> {
        if frame.width != PATCH_SIDE || frame.height != PATCH_SIDE {
            return Err(Error::DimensionMismatch {
                expected: format!("{PATCH_SIDE}x{PATCH_SIDE} patch"),
                actual: format!("{}x{}", frame.width, frame.height),
            });
        }
        Ok(Patch(frame))
    }

    /// Resamples an arbitrary block to the patch size.
    pub fn from_block(block: &GrayFrame) -> Self {
        Patch(resize_bilinear(block, PATCH_SIDE, PATCH_SIDE))
    }

    pub fn frame(&self) -> &GrayFrame {
        &self.0
    }
}

/// Pixel count of a crop along one axis: `round(scale·pad·extent)`, at least 1.
pub fn block_extent(extent: f64, scale: f64, pad: f64) -> usize {
    ((scale * pad * extent).round() as usize).max(1)
}

/// Crops `round(scale·pad·w) × round(scale·pad·h)` pixels centered on the
/// box, replicating edge pixels outside the frame.
pub fn extract_block(
    frame: &GrayFrame,
    bbox: &BoundingBox,
    scale: f64,
    pad: f64,
) -> Result<GrayFrame> {
    bbox.validate()?;
    if !scale.is_finite() || !pad.is_finite() {
        return Err(Error::NonFinite("extraction scale"));
    }
    if scale <= 0.0 || pad < 1.0 {
        return Err(Error::InvalidParams(format!(
            "extraction needs scale > 0 and pad >= 1, got scale={scale} pad={pad}"
        )));
    }
    let ow = block_extent(bbox.w, scale, pad);
    let oh = block_extent(bbox.h, scale, pad);
    extract_sized(frame, bbox.cx, bbox.cy, ow, oh)
}

/// Crops an `ow × oh` block centered at `(cx, cy)` with edge replication.
pub fn extract_sized(
    frame: &GrayFrame,
    cx: f64,
    cy: f64,
    ow: usize,
    oh: usize,
) -> Result<GrayFrame> {
    if !cx.is_finite() || !cy.is_finite() {
        return Err(Error::NonFinite("block center"));
    }
    let (ow, oh) = (ow.max(1), oh.max(1));
    let left = (cx - ow as f64 / 2.0 + 0.5).floor() as i64;
    let top = (cy - oh as f64 / 2.0 + 0.5).floor() as i64;
    let mut data = Vec::with_capacity(ow * oh);
    for y in 0..oh as i64 {
        for x in 0..ow as i64 {
            data.push(frame.get_clamped(left + x, top + y));
        }
    }
    Ok(GrayFrame {
        width: ow,
        height: oh,
        data,
    })
}

/// Bilinearly samples a `ew × eh` region centered at `(cx, cy)` straight
/// into a patch, without rounding the extent to whole pixels. Coordinates
/// follow the pixel-center convention of `resize_bilinear`; samples outside
/// the frame replicate the nearest edge.
pub fn sample_patch(frame: &GrayFrame, cx: f64, cy: f64, ew: f64, eh: f64) -> Result<Patch> {
    if ![cx, cy, ew, eh].iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("sampling region"));
    }
    if ew <= 0.0 || eh <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "sampling extent {ew}x{eh} must be positive"
        )));
    }
    let taps = |center: f64, extent: f64| -> Vec<(i64, f64)> {
        let start = center - extent / 2.0;
        let step = extent / PATCH_SIDE as f64;
        (0..PATCH_SIDE)
            .map(|i| {
                let s = start + (i as f64 + 0.5) * step - 0.5;
                let f = s.floor();
                (f as i64, s - f)
            })
            .collect()
    };
    let xs = taps(cx, ew);
    let ys = taps(cy, eh);
    let mut data = Vec::with_capacity(PATCH_SIDE * PATCH_SIDE);
    for &(y0, fy) in &ys {
        for &(x0, fx) in &xs {
            let top = frame.get_clamped(x0, y0) * (1.0 - fx) + frame.get_clamped(x0 + 1, y0) * fx;
            let bottom =
                frame.get_clamped(x0, y0 + 1) * (1.0 - fx) + frame.get_clamped(x0 + 1, y0 + 1) * fx;
            data.push((top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0));
        }
    }
    Ok(Patch(GrayFrame {
        width: PATCH_SIDE,
        height: PATCH_SIDE,
        data,
    }))
}

/// Source sample positions and weights along one axis for pixel-center
/// aligned resampling.
fn axis_taps(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let ratio = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let s = ((i as f64 + 0.5) * ratio - 0.5).clamp(0.0, (src - 1) as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

/// Bilinear resize with pixel-center alignment and edge clamping.
pub fn resize_bilinear(block: &GrayFrame, out_w: usize, out_h: usize) -> GrayFrame {
    let (out_w, out_h) = (out_w.max(1), out_h.max(1));
    let xs = axis_taps(block.width, out_w);
    let ys = axis_taps(block.height, out_h);
    let mut data = Vec::with_capacity(out_w * out_h);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let top = block.get(x0, y0) * (1.0 - fx) + block.get(x1, y0) * fx;
            let bottom = block.get(x0, y1) * (1.0 - fx) + block.get(x1, y1) * fx;
            data.push((top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0));
        }
    }
    GrayFrame {
        width: out_w,
        height: out_h,
        data,
    }
}
