//! Sequence I/O, synthetic sequences, metrics and the tracking driver.

mod io;
mod metrics;
mod synth;

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::imaging::{BoundingBox, GrayFrame};
use crate::tracker::{init, init_result, step, TrackResult, TrackerParams};

pub use io::{
    dump_response, format_truth_line, load_sequence, parse_truth_line, read_results_csv,
    read_truth, save_sequence, write_results_csv,
};
pub use metrics::{evaluate, evaluate_boxes, Metrics};
pub use synth::{synth_sequence, SynthSpec};

#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub frames: Vec<GrayFrame>,
    pub truth: Option<Vec<BoundingBox>>,
}

impl Sequence {
    pub fn new(
        name: String,
        frames: Vec<GrayFrame>,
        truth: Option<Vec<BoundingBox>>,
    ) -> Result<Self> {
        if let Some(t) = &truth {
            if t.len() != frames.len() {
                return Err(Error::TruthCountMismatch {
                    truth: t.len(),
                    frames: frames.len(),
                });
            }
        }
        Ok(Sequence {
            name,
            frames,
            truth,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct TrackRun {
    /// One record per frame, the first being the initialization frame.
    pub results: Vec<TrackResult>,
    /// Wall time spent inside `step` calls.
    pub step_time: Duration,
}

impl TrackRun {
    pub fn fps(&self) -> Option<f64> {
        let steps = self.results.len().saturating_sub(1);
        let secs = self.step_time.as_secs_f64();
        (steps > 0 && secs > 0.0).then(|| steps as f64 / secs)
    }

    pub fn boxes(&self) -> Vec<BoundingBox> {
        self.results.iter().map(|r| r.bbox).collect()
    }
}

/// Initializes on the first frame with `initial` and steps through the rest.
pub fn run_tracker(
    frames: &[GrayFrame],
    initial: BoundingBox,
    params: &TrackerParams,
) -> Result<TrackRun> {
    let first = frames
        .first()
        .ok_or_else(|| Error::InvalidFrame("sequence has no frames".into()))?;
    let mut state = init(first, initial, params.clone())?;
    let mut results = Vec::with_capacity(frames.len());
    results.push(init_result(&state));
    let mut step_time = Duration::ZERO;
    for frame in &frames[1..] {
        let start = Instant::now();
        let (next, result) = step(&state, frame)?;
        step_time += start.elapsed();
        state = next;
        results.push(result);
    }
    Ok(TrackRun { results, step_time })
}
