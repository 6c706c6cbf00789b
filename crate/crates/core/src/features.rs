//! Gray + HOG feature maps on a 32×32 cell grid.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::imaging::{GrayFrame, Patch};
use crate::plane::Plane;

/// Cell side in patch pixels.
pub const CELL: usize = 4;
/// Side of the cell grid (and of every filter template).
pub const TEMPLATE_SIDE: usize = 32;
/// Number of HOG channels produced by [`hog32`].
pub const HOG_CHANNELS: usize = 32;

const SENSITIVE_BINS: usize = 18;
const INSENSITIVE_BINS: usize = 9;
const CLIP: f64 = 0.2;
const TEXTURE_WEIGHT: f64 = 0.2357;
const NORM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    planes: Vec<Plane>,
    windowed: bool,
}

impl FeatureMap {
    pub fn new(planes: Vec<Plane>, windowed: bool) -> Result<Self> {
        if let Some(first) = planes.first() {
            if let Some(bad) = planes.iter().find(|p| !p.same_shape(first)) {
                return Err(Error::DimensionMismatch {
                    expected: format!("{}x{}", first.rows(), first.cols()),
                    actual: format!("{}x{}", bad.rows(), bad.cols()),
                });
            }
        }
        if planes
            .iter()
            .any(|p| p.data().iter().any(|v| !v.is_finite()))
        {
            return Err(Error::NonFinite("feature map"));
        }
        Ok(FeatureMap { planes, windowed })
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn rows(&self) -> usize {
        self.planes.first().map_or(0, Plane::rows)
    }

    pub fn cols(&self) -> usize {
        self.planes.first().map_or(0, Plane::cols)
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn plane(&self, channel: usize) -> &Plane {
        &self.planes[channel]
    }

    pub fn windowed(&self) -> bool {
        self.windowed
    }

    pub fn scaled(&self, factor: f64) -> FeatureMap {
        FeatureMap {
            planes: self.planes.iter().map(|p| p.scaled(factor)).collect(),
            windowed: self.windowed,
        }
    }

    pub fn circshift(&self, dy: isize, dx: isize) -> FeatureMap {
        FeatureMap {
            planes: self.planes.iter().map(|p| p.circshift(dy, dx)).collect(),
            windowed: self.windowed,
        }
    }
}

/// Separable Hann taper, zero on the border rows and columns.
#[derive(Debug, Clone)]
pub struct CosineWindow {
    weights: Plane,
}

fn hann(n: usize, len: usize) -> f64 {
    if len < 2 {
        return 1.0;
    }
    0.5 * (1.0 - (2.0 * PI * n as f64 / (len - 1) as f64).cos())
}

impl CosineWindow {
    pub fn new(rows: usize, cols: usize) -> Self {
        CosineWindow {
            weights: Plane::from_fn(rows, cols, |i, j| hann(i, rows) * hann(j, cols)),
        }
    }

    /// All-ones weights; multiplying by it leaves planes unchanged.
    pub fn flat(rows: usize, cols: usize) -> Self {
        CosineWindow {
            weights: Plane::from_fn(rows, cols, |_, _| 1.0),
        }
    }

    pub fn weights(&self) -> &Plane {
        &self.weights
    }
}

impl Default for CosineWindow {
    fn default() -> Self {
        Self::new(TEMPLATE_SIDE, TEMPLATE_SIDE)
    }
}

fn check_cells(image: &GrayFrame, cell: usize) -> Result<(usize, usize)> {
    if cell == 0 || !image.width().is_multiple_of(cell) || !image.height().is_multiple_of(cell) {
        return Err(Error::DimensionMismatch {
            expected: format!("sides divisible by cell size {cell}"),
            actual: format!("{}x{}", image.width(), image.height()),
        });
    }
    Ok((image.height() / cell, image.width() / cell))
}

/// Mean-pooled, zero-mean intensity plane.
pub fn gray_channel(patch: &Patch) -> Plane {
    gray_cells(patch.frame(), CELL).expect("patch side is a multiple of the cell size")
}

pub fn gray_cells(image: &GrayFrame, cell: usize) -> Result<Plane> {
    let (rows, cols) = check_cells(image, cell)?;
    let norm = 1.0 / (cell * cell) as f64;
    let mut plane = Plane::from_fn(rows, cols, |i, j| {
        let mut sum = 0.0;
        for y in i * cell..(i + 1) * cell {
            for x in j * cell..(j + 1) * cell {
                sum += image.get(x, y);
            }
        }
        sum * norm
    });
    let mean = plane.mean();
    plane.data_mut().iter_mut().for_each(|v| *v -= mean);
    Ok(plane)
}

/// Unit vectors for the nine contrast-insensitive orientations (20° apart).
fn orientation_basis() -> [(f64, f64); INSENSITIVE_BINS] {
    let mut basis = [(0.0, 0.0); INSENSITIVE_BINS];
    for (o, b) in basis.iter_mut().enumerate() {
        let theta = o as f64 * PI / INSENSITIVE_BINS as f64;
        *b = (theta.cos(), theta.sin());
    }
    basis
}

/// Cells receiving pixel `p` under bilinear spatial binning, with weights.
/// Cell centers sit at `(k + 0.5)·cell`; weight falls off linearly to zero
/// one cell away. Cells outside `0..n` are dropped.
fn cell_taps(p: usize, cell: usize, n: usize) -> Vec<(usize, f64)> {
    let pos = (p as f64 + 0.5) / cell as f64 - 0.5;
    let k = pos.floor();
    let frac = pos - k;
    [(k as i64, 1.0 - frac), (k as i64 + 1, frac)]
        .into_iter()
        .filter(|&(c, w)| c >= 0 && (c as usize) < n && w > 0.0)
        .map(|(c, w)| (c as usize, w))
        .collect()
}

/// 32-channel HOG on `cell × cell` cells.
///
/// Gradient magnitudes are spread over the four nearest cells bilinearly.
/// Channel layout: 18 contrast-sensitive orientations, 9 contrast-insensitive
/// orientations, 4 texture (normalization energy) channels, and the mean
/// gradient magnitude of the cell.
pub fn hog32(patch: &Patch, cell: usize) -> Result<Vec<Plane>> {
    hog_cells(patch.frame(), cell)
}

/// [`hog32`] for any image whose sides are multiples of `cell`.
pub fn hog_cells(image: &GrayFrame, cell: usize) -> Result<Vec<Plane>> {
    let (rows, cols) = check_cells(image, cell)?;
    let basis = orientation_basis();
    let ncells = rows * cols;

    let row_taps: Vec<_> = (0..image.height())
        .map(|y| cell_taps(y, cell, rows))
        .collect();
    let col_taps: Vec<_> = (0..image.width())
        .map(|x| cell_taps(x, cell, cols))
        .collect();

    let mut hist = vec![0.0; ncells * SENSITIVE_BINS];
    let mut magnitude = vec![0.0; ncells];
    for (y, rtaps) in row_taps.iter().enumerate() {
        for (x, ctaps) in col_taps.iter().enumerate() {
            let (xi, yi) = (x as i64, y as i64);
            let dx = image.get_clamped(xi + 1, yi) - image.get_clamped(xi - 1, yi);
            let dy = image.get_clamped(xi, yi + 1) - image.get_clamped(xi, yi - 1);
            let m = dx.hypot(dy);
            if m == 0.0 {
                continue;
            }
            let mut best = 0.0;
            let mut bin = 0;
            for (o, &(u, v)) in basis.iter().enumerate() {
                let dot = u * dx + v * dy;
                if dot > best {
                    best = dot;
                    bin = o;
                } else if -dot > best {
                    best = -dot;
                    bin = o + INSENSITIVE_BINS;
                }
            }
            for &(cy, wy) in rtaps {
                for &(cx, wx) in ctaps {
                    let c = cy * cols + cx;
                    let w = wx * wy * m;
                    hist[c * SENSITIVE_BINS + bin] += w;
                    magnitude[c] += w;
                }
            }
        }
    }

    let energy: Vec<f64> = (0..ncells)
        .map(|c| {
            let h = &hist[c * SENSITIVE_BINS..(c + 1) * SENSITIVE_BINS];
            (0..INSENSITIVE_BINS)
                .map(|o| (h[o] + h[o + INSENSITIVE_BINS]).powi(2))
                .sum()
        })
        .collect();
    let energy_at = |i: i64, j: i64| {
        let ic = i.clamp(0, rows as i64 - 1) as usize;
        let jc = j.clamp(0, cols as i64 - 1) as usize;
        energy[ic * cols + jc]
    };

    let mut planes = vec![Plane::zeros(rows, cols); HOG_CHANNELS];
    let area = (cell * cell) as f64;
    for i in 0..rows {
        for j in 0..cols {
            let c = i * cols + j;
            let h = &hist[c * SENSITIVE_BINS..(c + 1) * SENSITIVE_BINS];
            let (ii, jj) = (i as i64, j as i64);
            // One factor per 2×2 block of cells containing this cell.
            let norms = [(0, 0), (-1, 0), (0, -1), (-1, -1)].map(|(di, dj)| {
                let (bi, bj) = (ii + di, jj + dj);
                let e = energy_at(bi, bj)
                    + energy_at(bi + 1, bj)
                    + energy_at(bi, bj + 1)
                    + energy_at(bi + 1, bj + 1);
                1.0 / (e + NORM_EPS).sqrt()
            });

            let mut texture = [0.0; 4];
            for o in 0..SENSITIVE_BINS {
                let mut sum = 0.0;
                for (k, n) in norms.iter().enumerate() {
                    let v = (h[o] * n).min(CLIP);
                    sum += v;
                    texture[k] += v;
                }
                planes[o].set(i, j, 0.5 * sum);
            }
            for o in 0..INSENSITIVE_BINS {
                let folded = h[o] + h[o + INSENSITIVE_BINS];
                let sum: f64 = norms.iter().map(|n| (folded * n).min(CLIP)).sum();
                planes[SENSITIVE_BINS + o].set(i, j, 0.5 * sum);
            }
            for (k, t) in texture.iter().enumerate() {
                planes[SENSITIVE_BINS + INSENSITIVE_BINS + k].set(i, j, TEXTURE_WEIGHT * t);
            }
            planes[HOG_CHANNELS - 1].set(i, j, magnitude[c] / area);
        }
    }
    Ok(planes)
}

/// Stacks `[gray?, hog…]` and applies the window to every plane.
pub fn assemble(
    gray: &Plane,
    hog: &[Plane],
    win: &CosineWindow,
    include_gray: bool,
) -> Result<FeatureMap> {
    let w = win.weights();
    let sources = include_gray.then_some(gray).into_iter().chain(hog.iter());
    let mut planes = Vec::with_capacity(hog.len() + usize::from(include_gray));
    for p in sources {
        if !p.same_shape(w) {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", w.rows(), w.cols()),
                actual: format!("{}x{}", p.rows(), p.cols()),
            });
        }
        let data = p.data().iter().zip(w.data()).map(|(a, b)| a * b).collect();
        planes.push(Plane::from_vec(p.rows(), p.cols(), data)?);
    }
    FeatureMap::new(planes, true)
}

/// Features of one patch: the 33-channel position map and the 32-channel
/// HOG-only scale map share one HOG computation.
pub fn patch_features(patch: &Patch, win: &CosineWindow) -> Result<(FeatureMap, FeatureMap)> {
    let gray = gray_channel(patch);
    let hog = hog32(patch, CELL)?;
    Ok((
        assemble(&gray, &hog, win, true)?,
        assemble(&gray, &hog, win, false)?,
    ))
}

/// HOG-only windowed map used by the scale filter.
pub fn scale_features(patch: &Patch, win: &CosineWindow) -> Result<FeatureMap> {
    let hog = hog32(patch, CELL)?;
    assemble(&Plane::zeros(0, 0), &hog, win, false)
}
