use std::fs;
use std::path::Path;

use facetrack_bench::image_io::{load_image, save_png};
use facetrack_bench::keypoint_csv::{format_keypoints, load_keypoints};
use facetrack_bench::results::{format_curves, format_results, parse_results, read_results, write_results, ResultRow};
use facetrack_bench::runner::{run_to_dir, InitMode, RunOptions};
use facetrack_bench::sequence::{load_boxes, load_detections, load_sequence, Detection, GROUND_TRUTH_FILE};
use facetrack_bench::synth::{synth_sequence, write_sequence, Scenario, SynthConfig};
use facetrack_bench::BenchError;
use facetrack_core::metrics::evaluate;
use facetrack_core::{BoundingBox, Image, Keypoint};
use proptest::prelude::*;
use tempfile::tempdir;

fn short(scenario: Scenario, frames: usize) -> SynthConfig {
    SynthConfig {
        frames,
        ..SynthConfig::new(scenario)
    }
}

fn write_short_translation(dir: &Path, frames: usize) {
    let seq = synth_sequence(&short(Scenario::Translation { vx: 2.0, vy: 0.0 }, frames)).unwrap();
    write_sequence(&seq, dir).unwrap();
}

#[test]
fn png_round_trip() {
    let dir = tempdir().unwrap();
    let img = Image::from_rgb_fn(7, 5, |x, y| [x as u8 * 30, y as u8 * 40, 99]).unwrap();
    let path = dir.path().join("a.png");
    save_png(&img, &path).unwrap();
    assert_eq!(load_image(&path).unwrap(), img);
    assert!(matches!(
        load_image(&dir.path().join("missing.png")),
        Err(BenchError::Io { .. } | BenchError::Image { .. })
    ));
}

#[test]
fn sequence_directory_loads_in_order() {
    let dir = tempdir().unwrap();
    write_short_translation(dir.path(), 12);
    let seq = load_sequence(dir.path()).unwrap();
    assert_eq!(seq.len(), 12);
    assert!(seq.frames[0].ends_with("img/0001.png"));
    assert!(seq.frames[11].ends_with("img/0012.png"));
    assert_eq!(seq.ground_truth[1].x - seq.ground_truth[0].x, 2.0);
}

#[test]
fn box_count_mismatch_is_reported() {
    let dir = tempdir().unwrap();
    write_short_translation(dir.path(), 5);
    let gt = dir.path().join(GROUND_TRUTH_FILE);
    let text = fs::read_to_string(&gt).unwrap();
    let fewer: Vec<&str> = text.lines().take(4).collect();
    fs::write(&gt, fewer.join("\n")).unwrap();
    match load_sequence(dir.path()) {
        Err(BenchError::CountMismatch { frames, boxes, .. }) => assert_eq!((frames, boxes), (5, 4)),
        other => panic!("expected a count mismatch, got {other:?}"),
    }
}

#[test]
fn missing_frames_and_bad_lines() {
    let dir = tempdir().unwrap();
    assert!(load_sequence(dir.path()).is_err());
    let gt = dir.path().join("gt.txt");
    fs::write(&gt, "1,2,3,4\n1 2 3\n").unwrap();
    match load_boxes(&gt) {
        Err(BenchError::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn detections_sorted_by_score() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("d.csv");
    fs::write(
        &path,
        "frame,x,y,w,h,score\n1,0,0,10,10,0.2\n1,5,5,10,10,0.9\n3,1,1,4,4,0.5\n",
    )
    .unwrap();
    let dets = load_detections(&path, 3).unwrap();
    assert_eq!(dets.len(), 3);
    assert_eq!(dets[0].len(), 2);
    assert_eq!(dets[0][0].score, 0.9);
    assert_eq!(dets[0][0].bbox, BoundingBox::new(5.0, 5.0, 10.0, 10.0));
    assert!(dets[1].is_empty());
    assert_eq!(
        dets[2][0],
        Detection {
            bbox: BoundingBox::new(1.0, 1.0, 4.0, 4.0),
            score: 0.5
        }
    );
}

#[test]
fn detections_reject_bad_rows() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("d.csv");
    for bad in ["1,0,0,-3,10,0.5\n", "4,0,0,3,3,0.5\n", "1,0,0,3,3\n", "0,0,0,3,3,1\n"] {
        fs::write(&path, bad).unwrap();
        assert!(load_detections(&path, 3).is_err(), "{bad:?} accepted");
    }
}

#[test]
fn keypoint_file_round_trip() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("k.csv");
    let mut descriptor = vec![0.0f32; 128];
    descriptor[3] = 1.0;
    let kp = Keypoint {
        x: 12.5,
        y: 7.0,
        scale: 1.6,
        descriptor,
    };
    let frames = vec![vec![kp.clone()], Vec::new()];
    fs::write(&path, format_keypoints(&frames)).unwrap();
    let back = load_keypoints(&path, 2).unwrap();
    assert_eq!(back, frames);

    fs::write(&path, "frame,x,y,scale\n1,2,3,1.0,0.5\n").unwrap();
    match load_keypoints(&path, 2) {
        Err(BenchError::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn results_round_trip_through_disk() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let rows = vec![
        ResultRow {
            frame: 0,
            bbox: BoundingBox::new(1.5, 2.0, 30.0, 31.25),
            score: 0.0,
            occluded: false,
        },
        ResultRow {
            frame: 1,
            bbox: BoundingBox::new(3.0, 2.0, 30.0, 31.25),
            score: 0.41,
            occluded: true,
        },
    ];
    write_results(&path, &rows).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("frame,x,y,w,h,score,occluded\n1,"));
    assert_eq!(read_results(&path).unwrap(), rows);
}

proptest! {
    #[test]
    fn results_text_round_trips(
        raw in prop::collection::vec((-1e4f64..1e4, -1e4f64..1e4, 1e-3f64..1e3, 1e-3f64..1e3, 0.0f64..2.0, any::<bool>()), 0..20)
    ) {
        let rows: Vec<ResultRow> = raw
            .iter()
            .enumerate()
            .map(|(i, r)| ResultRow { frame: i, bbox: BoundingBox::new(r.0, r.1, r.2, r.3), score: r.4, occluded: r.5 })
            .collect();
        let back = parse_results(Path::new("mem"), &format_results(&rows)).unwrap();
        prop_assert_eq!(back, rows);
    }
}

#[test]
fn curves_file_has_fixed_rows() {
    let gt = vec![BoundingBox::new(0.0, 0.0, 10.0, 10.0); 3];
    let curves = evaluate(&gt, &gt).unwrap();
    let text = format_curves(&curves);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "curve,threshold,value");
    assert_eq!(lines.iter().filter(|l| l.starts_with("precision,")).count(), 51);
    assert_eq!(lines.iter().filter(|l| l.starts_with("success,")).count(), 21);
    assert_eq!(lines[1], "precision,0,1");
    assert_eq!(lines[52], "success,0,1");
}

#[test]
fn run_writes_every_artifact() {
    let seq_dir = tempdir().unwrap();
    write_short_translation(seq_dir.path(), 6);
    let out = tempdir().unwrap();
    let opts = RunOptions {
        overlays: true,
        ..RunOptions::default()
    };
    let summary = run_to_dir(seq_dir.path(), &opts, out.path()).unwrap();
    assert_eq!(summary.frames, 6);
    assert_eq!(summary.precision_at_20, 1.0);

    let rows = read_results(&out.path().join("results.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0].frame, 0);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["frames"], 6);
    assert!(out.path().join("curves.csv").is_file());
    let overlays = fs::read_dir(out.path().join("overlays")).unwrap().count();
    assert_eq!(overlays, 6);
}

#[test]
fn detection_init_needs_a_first_frame_detection() {
    let seq_dir = tempdir().unwrap();
    write_short_translation(seq_dir.path(), 4);
    let det = seq_dir.path().join("detections.csv");
    fs::write(&det, "frame,x,y,w,h,score\n2,100,90,60,60,0.9\n").unwrap();
    let out = tempdir().unwrap();
    let opts = RunOptions {
        init: InitMode::Detections,
        ..RunOptions::default()
    };
    assert!(matches!(
        run_to_dir(seq_dir.path(), &opts, out.path()),
        Err(BenchError::Init(_))
    ));
}

#[test]
fn synth_is_deterministic_per_seed() {
    let cfg = short(
        Scenario::Occlusion {
            start: 3,
            end: 5,
            coverage: 1.0,
        },
        8,
    );
    let a = synth_sequence(&cfg).unwrap();
    let b = synth_sequence(&cfg).unwrap();
    assert_eq!(a.frames, b.frames);
    assert_eq!(a.detections, b.detections);
    let c = synth_sequence(&SynthConfig { seed: 8, ..cfg }).unwrap();
    assert_ne!(a.frames, c.frames);
    assert!(a.detections[2..5].iter().all(Vec::is_empty));
    assert!(!a.detections[1].is_empty());
}

#[test]
fn synth_rejects_bad_scenarios() {
    for sc in [
        Scenario::Occlusion {
            start: 6,
            end: 3,
            coverage: 1.0,
        },
        Scenario::Occlusion {
            start: 1,
            end: 3,
            coverage: 1.5,
        },
        Scenario::ScaleRamp { start: 1.0, end: -1.0 },
        Scenario::Translation { vx: 50.0, vy: 0.0 },
    ] {
        assert!(synth_sequence(&short(sc, 10)).is_err(), "{sc:?} accepted");
    }
}
