//! End-to-end tracker behaviour on synthetic sequences.

use cftrack::features::{gray_channel, hog32, scale_features, CosineWindow, CELL};
use cftrack::filter_bank::train_init;
use cftrack::harness::{evaluate_boxes, run_tracker, synth_sequence, SynthSpec};
use cftrack::imaging::{sample_patch, GrayFrame, Patch};
use cftrack::scale_search::{best_scale, pyramid};
use cftrack::spectral::gaussian_label;
use cftrack::tracker::{init, step};
use cftrack::TrackerParams;

/// Whole-scene magnification about the frame center, bilinear, edge-clamped.
fn optical_zoom(f: &GrayFrame, z: f64) -> GrayFrame {
    let (w, h) = (f.width(), f.height());
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let sx = cx + (x as f64 + 0.5 - cx) / z - 0.5;
            let sy = cy + (y as f64 + 0.5 - cy) / z - 0.5;
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = (sx - x0, sy - y0);
            let g = |a: f64, b: f64| f.get_clamped(a as i64, b as i64);
            let top = g(x0, y0) * (1.0 - fx) + g(x0 + 1.0, y0) * fx;
            let bottom = g(x0, y0 + 1.0) * (1.0 - fx) + g(x0 + 1.0, y0 + 1.0) * fx;
            data.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    GrayFrame::new(w, h, data).unwrap()
}

#[test]
fn static_target_stays_within_three_pixels() {
    let seq = synth_sequence(&SynthSpec {
        seed: 3,
        ..SynthSpec::new(320, 240, 100)
    })
    .unwrap();
    let truth = seq.truth.unwrap();
    let run = run_tracker(&seq.frames, truth[0], &TrackerParams::default()).unwrap();
    for (r, t) in run.results.iter().zip(&truth) {
        assert!(r.bbox.center_distance(t) <= 3.0, "frame {}", r.frame_index);
    }
}

#[test]
fn translation_mean_error_within_three_pixels() {
    let seq = synth_sequence(&SynthSpec {
        motion: (2.0, 0.0),
        seed: 5,
        ..SynthSpec::new(320, 240, 100)
    })
    .unwrap();
    let truth = seq.truth.unwrap();
    let run = run_tracker(&seq.frames, truth[0], &TrackerParams::default()).unwrap();
    let m = evaluate_boxes(&run.boxes(), &truth).unwrap();
    assert!(m.mean_center_error <= 3.0, "{m}");
    assert_eq!(m.precision_at_20, 1.0);
}

#[test]
fn zoom_cumulative_scale_within_five_percent() {
    let seq = synth_sequence(&SynthSpec {
        zoom: 1.005,
        seed: 2,
        ..SynthSpec::new(320, 240, 60)
    })
    .unwrap();
    let truth = seq.truth.unwrap();
    let run = run_tracker(&seq.frames, truth[0], &TrackerParams::default()).unwrap();
    let estimate = run.results.last().unwrap().bbox.w / truth[0].w;
    let expected = 1.005f64.powi(60);
    assert!((estimate - expected).abs() / expected <= 0.05, "{estimate}");
}

#[test]
fn box_changes_by_exactly_one_pyramid_factor() {
    let seq = synth_sequence(&SynthSpec {
        motion: (1.0, -1.0),
        zoom: 0.998,
        seed: 9,
        ..SynthSpec::new(256, 192, 30)
    })
    .unwrap();
    let truth = seq.truth.unwrap();
    let params = TrackerParams::default();
    let factors = pyramid(1.0, 1.0, params.scale_step, params.scale_levels, params.pad)
        .unwrap()
        .factors()
        .to_vec();
    let mut state = init(&seq.frames[0], truth[0], params).unwrap();
    for frame in &seq.frames[1..] {
        let (next, result) = step(&state, frame).unwrap();
        assert!(factors.contains(&result.scale_factor));
        assert_eq!(next.bbox.w, state.bbox.w * result.scale_factor);
        assert_eq!(next.bbox.h, state.bbox.h * result.scale_factor);
        state = next;
    }
}

#[test]
fn runs_are_bit_identical() {
    let seq = synth_sequence(&SynthSpec {
        motion: (2.0, 1.0),
        seed: 1,
        ..SynthSpec::new(200, 160, 20)
    })
    .unwrap();
    let t0 = seq.truth.as_ref().unwrap()[0];
    let a = run_tracker(&seq.frames, t0, &TrackerParams::default()).unwrap();
    let b = run_tracker(&seq.frames, t0, &TrackerParams::default()).unwrap();
    assert_eq!(a.results, b.results);
}

#[test]
fn half_intensity_keeps_tracking_accuracy() {
    let seq = synth_sequence(&SynthSpec {
        motion: (2.0, 1.0),
        seed: 7,
        ..SynthSpec::new(320, 240, 100)
    })
    .unwrap();
    let truth = seq.truth.unwrap();
    let dim: Vec<_> = seq.frames.iter().map(|f| f.scaled(0.5).unwrap()).collect();
    let run = run_tracker(&dim, truth[0], &TrackerParams::default()).unwrap();
    let m = evaluate_boxes(&run.boxes(), &truth).unwrap();
    assert!(m.mean_center_error <= 3.0, "{m}");
    assert_eq!(m.precision_at_20, 1.0);
}

#[test]
fn normalized_hog_is_intensity_invariant_and_raw_channels_scale() {
    let seq = synth_sequence(&SynthSpec::new(320, 240, 2)).unwrap();
    let b = seq.truth.as_ref().unwrap()[0];
    let frame = &seq.frames[0];
    let full = sample_patch(frame, b.cx, b.cy, 2.0 * b.w, 2.0 * b.h).unwrap();
    let half = Patch::new(full.frame().scaled(0.5).unwrap()).unwrap();
    let (hf, hh) = (hog32(&full, CELL).unwrap(), hog32(&half, CELL).unwrap());
    for ch in 0..31 {
        assert!(hf[ch].max_abs_diff(&hh[ch]) < 1e-6, "channel {ch}");
    }
    assert!(hf[31].scaled(0.5).max_abs_diff(&hh[31]) < 1e-12);
    assert!(
        gray_channel(&full)
            .scaled(0.5)
            .max_abs_diff(&gray_channel(&half))
            < 1e-12
    );
}

fn scale_fixture(seed: u64) -> (GrayFrame, cftrack::BoundingBox) {
    let seq = synth_sequence(&SynthSpec {
        seed,
        target: Some((48.0, 48.0)),
        ..SynthSpec::new(320, 240, 2)
    })
    .unwrap();
    (seq.frames[0].clone(), seq.truth.unwrap()[0])
}

#[test]
fn best_scale_finds_static_and_adjacent_levels() {
    let win = CosineWindow::default();
    let label = gaussian_label(32, 32, 2.0).unwrap();
    let (frame, b) = scale_fixture(0);
    let f = scale_features(
        &sample_patch(&frame, b.cx, b.cy, 2.0 * b.w, 2.0 * b.h).unwrap(),
        &win,
    )
    .unwrap();
    let model = train_init(&f, &label, 0.01).unwrap();
    let pyr = pyramid(b.w, b.h, 1.005, 7, 2.0).unwrap();

    let same = best_scale(&frame, (b.cx, b.cy), &model, &pyr, &win).unwrap();
    assert_eq!(same.factor, 1.0);
    let bigger = best_scale(
        &optical_zoom(&frame, 1.005),
        (b.cx, b.cy),
        &model,
        &pyr,
        &win,
    )
    .unwrap();
    assert_eq!(bigger.index, 4);
    let smaller = best_scale(
        &optical_zoom(&frame, 1.0 / 1.005),
        (b.cx, b.cy),
        &model,
        &pyr,
        &win,
    )
    .unwrap();
    assert_eq!(smaller.index, 2);
}
