//! Correlation-filter visual tracker with a cost emulator for its hardware
//! dataflow.
//!
//! The tracker learns a 33-channel (gray + HOG) position filter and a
//! 32-channel (HOG) scale filter on a 32×32 cell grid. Each frame it locates
//! the target with the position filter, scores a seven-level scale pool
//! around the new center, and blends one fresh training sample into both
//! filters. [`pipeline_emu`] models the same workload on batched filter
//! lanes and a time-multiplexed FFT core.

pub mod error;
pub mod features;
pub mod filter_bank;
pub mod harness;
pub mod imaging;
pub mod pipeline_emu;
pub mod plane;
pub mod scale_search;
pub mod spectral;
pub mod tracker;

pub use error::{Error, Result};
pub use features::{CosineWindow, FeatureMap};
pub use filter_bank::{FilterModel, Peak, ResponseMap};
pub use imaging::{BoundingBox, GrayFrame, Patch};
pub use pipeline_emu::{BatchSchedule, EmuConfig, EmuReport};
pub use plane::Plane;
pub use scale_search::{ScalePyramid, ScaleResult};
pub use spectral::{GaussianLabel, Spectrum};
pub use tracker::{TrackResult, TrackerParams, TrackerState};
