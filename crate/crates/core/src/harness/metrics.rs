use crate::error::{Error, Result};
use crate::imaging::BoundingBox;
use crate::tracker::TrackResult;

/// Center distance below which a frame counts as precise.
pub const PRECISION_THRESHOLD: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub frames: usize,
    pub mean_center_error: f64,
    pub precision_at_20: f64,
    pub mean_iou: f64,
    /// Frames per second over tracking steps, when timing is known.
    pub fps: Option<f64>,
}

impl std::fmt::Display for Metrics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "frames             {}", self.frames)?;
        writeln!(f, "mean center error  {:.3} px", self.mean_center_error)?;
        writeln!(f, "precision@20px     {:.4}", self.precision_at_20)?;
        writeln!(f, "mean IoU           {:.4}", self.mean_iou)?;
        match self.fps {
            Some(fps) => write!(f, "fps                {fps:.1}"),
            None => write!(f, "fps                n/a"),
        }
    }
}

pub fn evaluate_boxes(results: &[BoundingBox], truth: &[BoundingBox]) -> Result<Metrics> {
    if results.len() != truth.len() {
        return Err(Error::TruthCountMismatch {
            truth: truth.len(),
            frames: results.len(),
        });
    }
    let n = results.len();
    if n == 0 {
        return Ok(Metrics {
            frames: 0,
            mean_center_error: 0.0,
            precision_at_20: 1.0,
            mean_iou: 1.0,
            fps: None,
        });
    }
    let errors: Vec<f64> = results
        .iter()
        .zip(truth)
        .map(|(r, t)| r.center_distance(t))
        .collect();
    let ious: f64 = results.iter().zip(truth).map(|(r, t)| r.iou(t)).sum();
    Ok(Metrics {
        frames: n,
        mean_center_error: errors.iter().sum::<f64>() / n as f64,
        precision_at_20: errors.iter().filter(|&&e| e <= PRECISION_THRESHOLD).count() as f64
            / n as f64,
        mean_iou: ious / n as f64,
        fps: None,
    })
}

pub fn evaluate(results: &[TrackResult], truth: &[BoundingBox]) -> Result<Metrics> {
    let boxes: Vec<BoundingBox> = results.iter().map(|r| r.bbox).collect();
    evaluate_boxes(&boxes, truth)
}
