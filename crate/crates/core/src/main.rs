use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cftrack::harness::{
    dump_response, evaluate_boxes, load_sequence, parse_truth_line, read_results_csv, read_truth,
    run_tracker, save_sequence, synth_sequence, write_results_csv, SynthSpec,
};
use cftrack::pipeline_emu::{emulate, render_csv, render_text, EmuConfig};
use cftrack::{Error, Result, TrackerParams};

#[derive(Parser)]
#[command(
    name = "cftrack",
    version,
    about = "Correlation-filter tracker and dataflow emulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track a target through a directory of grayscale frames.
    Track {
        /// Directory of .pgm/.pnm/.png frames, read in name order.
        #[arg(long)]
        seq: PathBuf,
        /// Ground truth (x,y,w,h per line); its first box initializes the tracker.
        #[arg(long)]
        gt: Option<PathBuf>,
        /// Initial box as x,y,w,h when no ground truth is given.
        #[arg(long)]
        init: Option<String>,
        /// Results CSV to write.
        #[arg(long)]
        out: PathBuf,
        /// key=value tracker parameter overrides.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Directory for per-frame response images.
        #[arg(long)]
        dump_response: Option<PathBuf>,
    },
    /// Render a synthetic sequence with exact ground truth.
    Synth {
        /// Output directory for frames and ground truth.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        frames: usize,
        /// Pixels per frame as vx,vy.
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        motion: String,
        #[arg(long, default_value_t = 1.0)]
        zoom: f64,
        /// Frame size as WxH.
        #[arg(long, default_value = "320x240")]
        size: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score a results file against ground truth.
    Eval {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        gt: PathBuf,
    },
    /// Print the modeled cycle and resource report.
    Emulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the resource table as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn parse_pair(text: &str, sep: char, what: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidParams(format!("{what} must look like a{sep}b, got {text:?}"));
    let (a, b) = text.split_once(sep).ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Track {
            seq,
            gt,
            init,
            out,
            params,
            dump_response: dump_dir,
        } => {
            let sequence = load_sequence(&seq, gt.as_deref())?;
            let params = match params {
                Some(p) => TrackerParams::load(&p)?,
                None => TrackerParams::default(),
            };
            let initial = match (&init, &sequence.truth) {
                (Some(text), _) => parse_truth_line(text)?,
                (None, Some(truth)) => truth[0],
                (None, None) => {
                    return Err(Error::InvalidParams(
                        "an initial box is required: pass --gt or --init".into(),
                    ))
                }
            };
            let run = run_tracker(&sequence.frames, initial, &params)?;
            write_results_csv(&out, &run.results, sequence.truth.as_deref())?;
            if let Some(dir) = dump_dir {
                fs::create_dir_all(&dir)?;
                for r in &run.results {
                    if let Some(resp) = &r.response {
                        dump_response(
                            &dir.join(format!("response_{:04}.pgm", r.frame_index)),
                            resp,
                        )?;
                    }
                }
            }
            if let Some(truth) = &sequence.truth {
                let mut metrics = evaluate_boxes(&run.boxes(), truth)?;
                metrics.fps = run.fps();
                println!("{metrics}");
            } else if let Some(fps) = run.fps() {
                println!("frames {}  fps {fps:.1}", run.results.len());
            }
        }
        Command::Synth {
            out,
            frames,
            motion,
            zoom,
            size,
            seed,
        } => {
            let (w, h) = parse_pair(&size, 'x', "size")?;
            if w.fract() != 0.0 || h.fract() != 0.0 || w < 1.0 || h < 1.0 {
                return Err(Error::InvalidParams(format!(
                    "size must be whole pixels, got {size}"
                )));
            }
            let spec = SynthSpec {
                motion: parse_pair(&motion, ',', "motion")?,
                zoom,
                seed,
                ..SynthSpec::new(w as usize, h as usize, frames)
            };
            let sequence = synth_sequence(&spec)?;
            save_sequence(&sequence, &out)?;
            println!("wrote {} frames to {}", sequence.len(), out.display());
        }
        Command::Eval { results, gt } => {
            let boxes = read_results_csv(&results)?;
            let truth = read_truth(&gt)?;
            println!("{}", evaluate_boxes(&boxes, &truth)?);
        }
        Command::Emulate { config, csv } => {
            let cfg = match config {
                Some(p) => EmuConfig::load(&p)?,
                None => EmuConfig::default(),
            };
            let report = emulate(&cfg)?;
            print!("{}", render_text(&report));
            let table = render_csv(&report);
            println!();
            print!("{table}");
            if let Some(path) = csv {
                fs::write(path, table)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
