//! Radix-2 transforms and the two-pass (rows, then columns) 2-D FFT.
//!
//! Forward transforms are un-normalized; inverse transforms carry the `1/N`
//! factor per pass, so a 2-D inverse is scaled by `1/(rows·cols)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::plane::Plane;

/// Row-major complex grid, the frequency-domain counterpart of a [`Plane`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    rows: usize,
    cols: usize,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Spectrum {
            rows,
            cols,
            values: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} values", rows * cols),
                actual: format!("{} values", values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("spectrum"));
        }
        Ok(Spectrum { rows, cols, values })
    }

    pub fn from_real(plane: &Plane) -> Self {
        Spectrum {
            rows: plane.rows(),
            cols: plane.cols(),
            values: plane
                .data()
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.cols + col]
    }

    pub fn real_part(&self) -> Plane {
        Plane::from_fn(self.rows, self.cols, |i, j| self.get(i, j).re)
    }

    pub fn scaled(&self, factor: f64) -> Spectrum {
        Spectrum {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Spectrum) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_shape(&self, other: &Spectrum) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                actual: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(())
    }
}

/// Precomputed bit-reversal permutation and twiddles for one length.
struct Radix2Plan {
    len: usize,
    reversed: Vec<usize>,
    twiddles: Vec<Complex64>,
}

impl Radix2Plan {
    fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let bits = len.trailing_zeros();
        let reversed = (0..len)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        Ok(Radix2Plan {
            len,
            reversed,
            twiddles,
        })
    }

    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(buf.len(), self.len);
        let n = self.len;
        for i in 0..n {
            let j = self.reversed[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w };
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
        if inverse {
            let scale = 1.0 / n as f64;
            for v in buf.iter_mut() {
                *v *= scale;
            }
        }
    }
}

/// 1-D DFT of a power-of-two length vector.
pub fn dft1d(x: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    let plan = Radix2Plan::new(x.len())?;
    let mut out = x.to_vec();
    plan.run(&mut out, inverse);
    Ok(out)
}

/// 2-D transform as a row pass into a transposed intermediate buffer
/// followed by a column pass over that buffer.
pub fn fft2d_complex(input: &Spectrum, inverse: bool) -> Result<Spectrum> {
    let (rows, cols) = (input.rows, input.cols);
    let row_plan = Radix2Plan::new(cols)?;
    let col_plan = Radix2Plan::new(rows)?;

    // Row pass; results are written column-major so each column is contiguous.
    let mut transposed = vec![Complex64::new(0.0, 0.0); rows * cols];
    let mut line = vec![Complex64::new(0.0, 0.0); cols];
    for r in 0..rows {
        line.copy_from_slice(&input.values[r * cols..(r + 1) * cols]);
        row_plan.run(&mut line, inverse);
        for (c, v) in line.iter().enumerate() {
            transposed[c * rows + r] = *v;
        }
    }

    // Column pass, read back out of the intermediate buffer.
    let mut values = vec![Complex64::new(0.0, 0.0); rows * cols];
    for c in 0..cols {
        let column = &mut transposed[c * rows..(c + 1) * rows];
        col_plan.run(column, inverse);
        for (r, v) in column.iter().enumerate() {
            values[r * cols + c] = *v;
        }
    }
    Ok(Spectrum { rows, cols, values })
}

/// Forward 2-D transform of a real plane.
pub fn fft2d(plane: &Plane) -> Result<Spectrum> {
    fft2d_complex(&Spectrum::from_real(plane), false)
}

pub fn ifft2d(spectrum: &Spectrum) -> Result<Spectrum> {
    fft2d_complex(spectrum, true)
}

/// Desired correlation output: a Gaussian bump with its peak at cell (0, 0)
/// using circular distances, together with its transform.
#[derive(Debug, Clone)]
pub struct GaussianLabel {
    sigma: f64,
    plane: Plane,
    spectrum: Spectrum,
}

impl GaussianLabel {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }
}

pub fn gaussian_label(rows: usize, cols: usize, sigma: f64) -> Result<GaussianLabel> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "label sigma must be > 0, got {sigma}"
        )));
    }
    let denom = 2.0 * sigma * sigma;
    let plane = Plane::from_fn(rows, cols, |i, j| {
        let di = i.min(rows - i) as f64;
        let dj = j.min(cols - j) as f64;
        (-(di * di + dj * dj) / denom).exp()
    });
    let spectrum = fft2d(&plane)?;
    Ok(GaussianLabel {
        sigma,
        plane,
        spectrum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointwiseOp {
    Mul,
    /// `conj(a) · b`
    ConjMul,
    Add,
}

pub fn pointwise(a: &Spectrum, b: &Spectrum, op: PointwiseOp) -> Result<Spectrum> {
    a.check_shape(b)?;
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| match op {
            PointwiseOp::Mul => x * y,
            PointwiseOp::ConjMul => x.conj() * y,
            PointwiseOp::Add => x + y,
        })
        .collect();
    Ok(Spectrum {
        rows: a.rows,
        cols: a.cols,
        values,
    })
}
