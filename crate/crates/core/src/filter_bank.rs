//! Multi-channel discriminative correlation filter.
//!
//! The model keeps per-channel numerators `A = conj(G)·F` and a shared real
//! denominator `B = Σ |F|²`. Detection evaluates
//! `y = F⁻¹{ Σ conj(A)·Z / (B + λ) }`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::pipeline_emu::BatchSchedule;
use crate::plane::Plane;
use crate::spectral::{fft2d, ifft2d, GaussianLabel, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct FilterModel {
    numerators: Vec<Spectrum>,
    denominator: Plane,
    lambda: f64,
}

/// Correlation output on the template grid.
pub type ResponseMap = Plane;

/// Peak of a response map decoded into a signed cell displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub dy: i64,
    pub dx: i64,
    pub value: f64,
}

impl FilterModel {
    pub fn channels(&self) -> usize {
        self.numerators.len()
    }

    pub fn numerators(&self) -> &[Spectrum] {
        &self.numerators
    }

    pub fn denominator(&self) -> &Plane {
        &self.denominator
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn check_sample(&self, f: &FeatureMap) -> Result<()> {
        if f.channels() != self.channels() {
            return Err(Error::ChannelMismatch {
                model: self.channels(),
                sample: f.channels(),
            });
        }
        if f.rows() != self.denominator.rows() || f.cols() != self.denominator.cols() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.denominator.rows(), self.denominator.cols()),
                actual: format!("{}x{}", f.rows(), f.cols()),
            });
        }
        Ok(())
    }
}

/// Numerators `conj(G)·F^l` and the real denominator `Σ |F^k|²` of one sample.
fn sample_terms(f: &FeatureMap, label: &GaussianLabel) -> Result<(Vec<Spectrum>, Plane)> {
    if f.channels() == 0 {
        return Err(Error::NoChannels);
    }
    let g = label.spectrum();
    if g.rows() != f.rows() || g.cols() != f.cols() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", g.rows(), g.cols()),
            actual: format!("{}x{}", f.rows(), f.cols()),
        });
    }
    let mut denominator = Plane::zeros(f.rows(), f.cols());
    let mut numerators = Vec::with_capacity(f.channels());
    for plane in f.planes() {
        let spec = fft2d(plane)?;
        for (d, v) in denominator.data_mut().iter_mut().zip(spec.values()) {
            *d += v.norm_sqr();
        }
        let num: Vec<Complex64> = g
            .values()
            .iter()
            .zip(spec.values())
            .map(|(gv, fv)| gv.conj() * fv)
            .collect();
        numerators.push(Spectrum::from_vec(f.rows(), f.cols(), num)?);
    }
    Ok((numerators, denominator))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    Ok(())
}

pub fn train_init(f: &FeatureMap, label: &GaussianLabel, lambda: f64) -> Result<FilterModel> {
    check_lambda(lambda)?;
    let (numerators, denominator) = sample_terms(f, label)?;
    Ok(FilterModel {
        numerators,
        denominator,
        lambda,
    })
}

/// Exponential running average of numerators and denominator with rate `eta`.
pub fn update(
    model: &FilterModel,
    f_t: &FeatureMap,
    label: &GaussianLabel,
    eta: f64,
) -> Result<FilterModel> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParams(format!(
            "eta must be in [0, 1], got {eta}"
        )));
    }
    model.check_sample(f_t)?;
    // Endpoints are exact copies; the blend below would flip the sign of zeros.
    if eta == 0.0 {
        return Ok(model.clone());
    }
    if eta == 1.0 {
        return train_init(f_t, label, model.lambda);
    }
    let (new_nums, new_den) = sample_terms(f_t, label)?;
    let keep = 1.0 - eta;
    let numerators = model
        .numerators
        .iter()
        .zip(&new_nums)
        .map(|(old, new)| {
            let values = old
                .values()
                .iter()
                .zip(new.values())
                .map(|(a, b)| keep * a + eta * b)
                .collect();
            Spectrum::from_vec(old.rows(), old.cols(), values)
        })
        .collect::<Result<Vec<_>>>()?;
    let den = model
        .denominator
        .data()
        .iter()
        .zip(new_den.data())
        .map(|(a, b)| keep * a + eta * b)
        .collect();
    Ok(FilterModel {
        numerators,
        denominator: Plane::from_vec(new_den.rows(), new_den.cols(), den)?,
        lambda: model.lambda,
    })
}

fn accumulate(acc: &mut Spectrum, numerator: &Spectrum, sample: &Spectrum) {
    for ((a, n), z) in acc
        .values_mut()
        .iter_mut()
        .zip(numerator.values())
        .zip(sample.values())
    {
        *a += n.conj() * z;
    }
}

fn finish_response(model: &FilterModel, mut acc: Spectrum) -> Result<ResponseMap> {
    let lambda = model.lambda;
    for (a, b) in acc.values_mut().iter_mut().zip(model.denominator.data()) {
        *a /= b + lambda;
    }
    Ok(ifft2d(&acc)?.real_part())
}

/// Correlation response of `z`, channels summed in ascending order.
pub fn respond(model: &FilterModel, z: &FeatureMap) -> Result<ResponseMap> {
    model.check_sample(z)?;
    let mut acc = Spectrum::zeros(z.rows(), z.cols());
    for (num, plane) in model.numerators.iter().zip(z.planes()) {
        accumulate(&mut acc, num, &fft2d(plane)?);
    }
    finish_response(model, acc)
}

/// Same response as [`respond`], accumulated batch by batch in schedule order.
pub fn respond_batched(
    model: &FilterModel,
    z: &FeatureMap,
    schedule: &BatchSchedule,
) -> Result<ResponseMap> {
    model.check_sample(z)?;
    schedule.validate(model.channels())?;
    let mut acc = Spectrum::zeros(z.rows(), z.cols());
    for batch in schedule.batches() {
        let mut lanes = batch.clone();
        lanes.sort_unstable();
        for ch in lanes {
            accumulate(&mut acc, &model.numerators[ch], &fft2d(z.plane(ch))?);
        }
    }
    finish_response(model, acc)
}

/// Argmax with wrap-around decoding; the first maximum in row-major order wins.
pub fn peak_locate(y: &ResponseMap) -> Peak {
    let (rows, cols) = (y.rows(), y.cols());
    let mut best = (0, 0, f64::NEG_INFINITY);
    for i in 0..rows {
        for j in 0..cols {
            let v = y.get(i, j);
            if v > best.2 {
                best = (i, j, v);
            }
        }
    }
    let decode = |idx: usize, len: usize| {
        if idx > len / 2 {
            idx as i64 - len as i64
        } else {
            idx as i64
        }
    };
    Peak {
        dy: decode(best.0, rows),
        dx: decode(best.1, cols),
        value: best.2,
    }
}
