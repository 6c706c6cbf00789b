//! Cost model of the hardware dataflow: channels are processed in batches
//! over a few filter lanes, and every 2-D transform is serialized as 1-D
//! row and column passes on a shared, time-multiplexed FFT core.
//!
//! All resource numbers produced here are modeled estimates.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Length of every 1-D pass (the template side).
pub const FFT_LEN: usize = 32;

/// Ordered channel groups; each group is handled by the filter lanes at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchSchedule {
    batches: Vec<Vec<usize>>,
}

impl BatchSchedule {
    pub fn new(batches: Vec<Vec<usize>>) -> Self {
        BatchSchedule { batches }
    }

    pub fn batches(&self) -> &[Vec<usize>] {
        &self.batches
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.batches.iter().map(Vec::len).collect()
    }

    pub fn max_batch(&self) -> usize {
        self.batches.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Checks that the batches partition `0..channels` exactly.
    pub fn validate(&self, channels: usize) -> Result<()> {
        let mut seen = vec![false; channels];
        for &ch in self.batches.iter().flatten() {
            match seen.get_mut(ch) {
                None => {
                    return Err(Error::InvalidSchedule(format!(
                        "channel {ch} out of range for {channels} channels"
                    )))
                }
                Some(true) => {
                    return Err(Error::InvalidSchedule(format!(
                        "channel {ch} scheduled twice"
                    )))
                }
                Some(s) => *s = true,
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidSchedule(format!(
                "channel {missing} never scheduled"
            )));
        }
        Ok(())
    }
}

/// Splits `d` channels into contiguous runs whose sizes differ by at most
/// one, larger runs first. Never emits empty batches, so fewer than
/// `num_batches` runs come back when `d < num_batches`.
pub fn make_batches(d: usize, num_batches: usize, lane_count: usize) -> Result<BatchSchedule> {
    if d == 0 {
        return Err(Error::InvalidSchedule("no channels to schedule".into()));
    }
    if num_batches.saturating_mul(lane_count) < d {
        return Err(Error::InfeasibleBatches {
            channels: d,
            batches: num_batches,
            lanes: lane_count,
        });
    }
    let runs = num_batches.min(d);
    let (base, extra) = (d / runs, d % runs);
    let mut start = 0;
    let batches = (0..runs)
        .map(|b| {
            let len = base + usize::from(b < extra);
            let run: Vec<usize> = (start..start + len).collect();
            start += len;
            run
        })
        .collect();
    Ok(BatchSchedule { batches })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FftKind {
    ForwardRows,
    ForwardCols,
    InverseRows,
    InverseCols,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaneId {
    Channel(usize),
    Response,
}

/// One 1-D pass on the FFT core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FftJob {
    pub kind: FftKind,
    pub plane: PlaneId,
    /// Batch the pass belongs to; `None` for the final inverse transform.
    pub batch: Option<usize>,
    pub length: usize,
}

fn forward_jobs(jobs: &mut Vec<FftJob>, schedule: &BatchSchedule) {
    for (b, batch) in schedule.batches().iter().enumerate() {
        for &ch in batch {
            for kind in [FftKind::ForwardRows, FftKind::ForwardCols] {
                jobs.extend((0..FFT_LEN).map(|_| FftJob {
                    kind,
                    plane: PlaneId::Channel(ch),
                    batch: Some(b),
                    length: FFT_LEN,
                }));
            }
        }
    }
}

/// Serializes a detection (forward transforms of every sample channel, then
/// one inverse transform of the accumulated response) onto a single core.
/// Produces `64·d + 64` jobs.
pub fn schedule_fft_core(d: usize, schedule: &BatchSchedule) -> Result<Vec<FftJob>> {
    if d == 0 {
        return Err(Error::InvalidSchedule("empty workload".into()));
    }
    schedule.validate(d)?;
    let mut jobs = Vec::with_capacity(2 * FFT_LEN * (d + 1));
    forward_jobs(&mut jobs, schedule);
    for kind in [FftKind::InverseRows, FftKind::InverseCols] {
        jobs.extend((0..FFT_LEN).map(|_| FftJob {
            kind,
            plane: PlaneId::Response,
            batch: None,
            length: FFT_LEN,
        }));
    }
    Ok(jobs)
}

/// Forward transforms of a training sample for the model update: `64·d` jobs.
pub fn schedule_training(d: usize, schedule: &BatchSchedule) -> Result<Vec<FftJob>> {
    if d == 0 {
        return Err(Error::InvalidSchedule("empty workload".into()));
    }
    schedule.validate(d)?;
    let mut jobs = Vec::with_capacity(2 * FFT_LEN * d);
    forward_jobs(&mut jobs, schedule);
    Ok(jobs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostParams {
    /// Cycles for one 1-D pass on the core.
    pub per_fft_cycles: u64,
    /// Cycles the filter lanes spend on the pointwise products of one batch.
    pub pointwise_cycles_per_batch: u64,
    pub overhead_cycles: u64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            per_fft_cycles: 112,
            pointwise_cycles_per_batch: 1024,
            overhead_cycles: 0,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        if self.per_fft_cycles < FFT_LEN as u64 {
            return Err(Error::InvalidParams(format!(
                "per_fft_cycles {} is below the {FFT_LEN}-sample streaming bound",
                self.per_fft_cycles
            )));
        }
        Ok(())
    }
}

fn distinct_batches(jobs: &[FftJob]) -> u64 {
    jobs.iter()
        .filter_map(|j| j.batch)
        .collect::<BTreeSet<_>>()
        .len() as u64
}

/// Single-core cost: every pass back to back, plus one pointwise pass per
/// batch touched by the jobs, plus fixed overhead.
pub fn cycle_count(jobs: &[FftJob], params: &CostParams) -> u64 {
    jobs.len() as u64 * params.per_fft_cycles
        + distinct_batches(jobs) * params.pointwise_cycles_per_batch
        + params.overhead_cycles
}

/// FFT-phase cycles when `jobs` passes are interleaved over `cores` cores.
pub fn fft_phase_cycles(jobs: usize, per_fft_cycles: u64, cores: usize) -> u64 {
    let cores = cores.max(1);
    jobs.div_ceil(cores) as u64 * per_fft_cycles
}

/// Emulator configuration, read from `key=value` text.
#[derive(Debug, Clone, PartialEq)]
pub struct EmuConfig {
    pub per_fft_cycles: u64,
    pub lane_count: usize,
    pub num_batches: usize,
    pub clock_hz: f64,
    pub overhead_cycles: u64,
    pub pointwise_cycles_per_batch: u64,
    pub position_channels: usize,
    pub scale_channels: usize,
    pub scale_levels: usize,
    /// FFT cores serving the scale pipeline; the position pipeline has one.
    pub scale_fft_cores: usize,
}

impl Default for EmuConfig {
    fn default() -> Self {
        EmuConfig {
            per_fft_cycles: 112,
            lane_count: 5,
            num_batches: 8,
            clock_hz: 100e6,
            // One 128×128 patch streamed through interpolation at a pixel per cycle.
            overhead_cycles: 16_384,
            pointwise_cycles_per_batch: 1024,
            position_channels: 33,
            scale_channels: 32,
            scale_levels: 7,
            scale_fft_cores: 4,
        }
    }
}

impl EmuConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = EmuConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                reason: "expected key=value".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |reason: String| Error::Config {
                line: line_no,
                reason,
            };
            let int = || value.parse::<u64>().map_err(|e| bad(format!("{key}: {e}")));
            match key {
                "per_fft_cycles" => cfg.per_fft_cycles = int()?,
                "lane_count" => cfg.lane_count = int()? as usize,
                "num_batches" => cfg.num_batches = int()? as usize,
                "overhead_cycles" => cfg.overhead_cycles = int()?,
                "pointwise_cycles_per_batch" => cfg.pointwise_cycles_per_batch = int()?,
                "position_channels" => cfg.position_channels = int()? as usize,
                "scale_channels" => cfg.scale_channels = int()? as usize,
                "scale_levels" => cfg.scale_levels = int()? as usize,
                "scale_fft_cores" => cfg.scale_fft_cores = int()? as usize,
                "clock_hz" => {
                    cfg.clock_hz = value
                        .parse::<f64>()
                        .map_err(|e| bad(format!("{key}: {e}")))?
                }
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.cost_params().validate()?;
        if !(self.clock_hz > 0.0 && self.clock_hz.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "clock_hz must be > 0, got {}",
                self.clock_hz
            )));
        }
        if self.lane_count == 0 || self.scale_fft_cores == 0 || self.scale_levels == 0 {
            return Err(Error::InvalidParams(
                "lane_count, scale_fft_cores and scale_levels must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn cost_params(&self) -> CostParams {
        CostParams {
            per_fft_cycles: self.per_fft_cycles,
            pointwise_cycles_per_batch: self.pointwise_cycles_per_batch,
            overhead_cycles: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ResourceCategory {
    Registers,
    Luts,
    BlockRam,
    Dsp,
}

impl ResourceCategory {
    pub const ALL: [ResourceCategory; 4] = [
        ResourceCategory::Registers,
        ResourceCategory::Luts,
        ResourceCategory::BlockRam,
        ResourceCategory::Dsp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResourceCategory::Registers => "registers",
            ResourceCategory::Luts => "luts",
            ResourceCategory::BlockRam => "block_ram",
            ResourceCategory::Dsp => "dsp",
        }
    }

    /// Published utilization of the reference FPGA build: (count, percent).
    pub fn published(self) -> (u64, u32) {
        match self {
            ResourceCategory::Registers => (95_485, 23),
            ResourceCategory::Luts => (68_433, 33),
            ResourceCategory::BlockRam => (179, 40),
            ResourceCategory::Dsp => (143, 17),
        }
    }

    // Per-unit estimates: one filter lane (complex MAC + divider + buffers),
    // one 32-point pipelined FFT core, and the shared front end
    // (extraction, interpolation, HOG, control).
    fn per_lane(self) -> u64 {
        match self {
            ResourceCategory::Registers => 6_000,
            ResourceCategory::Luts => 4_000,
            ResourceCategory::BlockRam => 8,
            ResourceCategory::Dsp => 12,
        }
    }

    fn per_fft_core(self) -> u64 {
        match self {
            ResourceCategory::Registers => 5_000,
            ResourceCategory::Luts => 3_500,
            ResourceCategory::BlockRam => 4,
            ResourceCategory::Dsp => 9,
        }
    }

    fn fixed(self) -> u64 {
        match self {
            ResourceCategory::Registers => 40_000,
            ResourceCategory::Luts => 30_000,
            ResourceCategory::BlockRam => 100,
            ResourceCategory::Dsp => 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceLine {
    pub category: ResourceCategory,
    pub lanes: u64,
    pub fft: u64,
    pub fixed: u64,
}

impl ResourceLine {
    pub fn total(&self) -> u64 {
        self.lanes + self.fft + self.fixed
    }
}

/// Modeled resource usage, linear in lanes and in FFT cores.
pub fn resource_report(lane_count: usize, fft_cores: usize) -> Vec<ResourceLine> {
    ResourceCategory::ALL
        .iter()
        .map(|&category| ResourceLine {
            category,
            lanes: category.per_lane() * lane_count as u64,
            fft: category.per_fft_core() * fft_cores as u64,
            fixed: category.fixed(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmuReport {
    /// 1-D passes per frame across both pipelines.
    pub fft_invocations: u64,
    pub position_cycles: u64,
    pub scale_cycles: u64,
    pub cycles_per_frame: u64,
    pub clock_hz: f64,
    pub fps_estimate: f64,
    pub lanes: usize,
    pub fft_cores: usize,
    pub position_batches: Vec<usize>,
    pub modeled_resources: Vec<ResourceLine>,
}

/// Full-frame model: the position pipeline (one core) and the scale
/// pipeline (`scale_fft_cores` cores) run side by side, each covering its
/// detection and its model-update transforms. Frame cycles are the slower
/// pipeline plus shared overhead.
pub fn emulate(cfg: &EmuConfig) -> Result<EmuReport> {
    cfg.validate()?;
    let cost = cfg.cost_params();

    let pos_sched = make_batches(cfg.position_channels, cfg.num_batches, cfg.lane_count)?;
    let pos_detect = schedule_fft_core(cfg.position_channels, &pos_sched)?;
    let pos_train = schedule_training(cfg.position_channels, &pos_sched)?;
    let position_cycles = cycle_count(&pos_detect, &cost) + cycle_count(&pos_train, &cost);

    let scale_sched = make_batches(cfg.scale_channels, cfg.num_batches, cfg.lane_count)?;
    let level = schedule_fft_core(cfg.scale_channels, &scale_sched)?;
    let scale_train = schedule_training(cfg.scale_channels, &scale_sched)?;
    let scale_jobs = cfg.scale_levels * level.len() + scale_train.len();
    let scale_pointwise = (cfg.scale_levels as u64 + 1)
        * scale_sched.batches().len() as u64
        * cost.pointwise_cycles_per_batch;
    let scale_cycles =
        fft_phase_cycles(scale_jobs, cost.per_fft_cycles, cfg.scale_fft_cores) + scale_pointwise;

    let cycles_per_frame = position_cycles.max(scale_cycles) + cfg.overhead_cycles;
    let fft_cores = 1 + cfg.scale_fft_cores;
    Ok(EmuReport {
        fft_invocations: (pos_detect.len() + pos_train.len() + scale_jobs) as u64,
        position_cycles,
        scale_cycles,
        cycles_per_frame,
        clock_hz: cfg.clock_hz,
        fps_estimate: cfg.clock_hz / cycles_per_frame as f64,
        lanes: cfg.lane_count,
        fft_cores,
        position_batches: pos_sched.sizes(),
        modeled_resources: resource_report(cfg.lane_count, fft_cores),
    })
}

pub fn render_text(report: &EmuReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "pipeline emulation (MODELED)");
    let _ = writeln!(s, "  position batches     {:?}", report.position_batches);
    let _ = writeln!(s, "  filter lanes         {}", report.lanes);
    let _ = writeln!(s, "  fft cores            {}", report.fft_cores);
    let _ = writeln!(s, "  1-D fft passes/frame {}", report.fft_invocations);
    let _ = writeln!(s, "  position cycles      {}", report.position_cycles);
    let _ = writeln!(s, "  scale cycles         {}", report.scale_cycles);
    let _ = writeln!(s, "  cycles/frame         {}", report.cycles_per_frame);
    let _ = writeln!(s, "  clock                {:.0} Hz", report.clock_hz);
    let _ = writeln!(s, "  fps estimate         {:.2}", report.fps_estimate);
    let _ = writeln!(s, "resources (MODELED vs published reference build)");
    for line in &report.modeled_resources {
        let (count, pct) = line.category.published();
        let _ = writeln!(
            s,
            "  {:<10} modeled {:>7}   published {:>6} ({pct}%)",
            line.category.name(),
            line.total(),
            count
        );
    }
    s
}

pub fn render_csv(report: &EmuReport) -> String {
    let mut s = String::from("category,modeled_count,paper_reference_count,paper_utilization\n");
    for line in &report.modeled_resources {
        let (count, pct) = line.category.published();
        let _ = writeln!(
            s,
            "{},{},{},{}%",
            line.category.name(),
            line.total(),
            count,
            pct
        );
    }
    s
}
