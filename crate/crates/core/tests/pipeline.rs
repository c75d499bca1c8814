use std::path::Path;

use pdot360::aggregate::FrameVerdict;
use pdot360::classifier::{write_predictions, PredictionRecord};
use pdot360::dataset::{negative_yaws, parse_annotations, CropLabel, FrameAnnotation, PdotSet};
use pdot360::pipeline::{
    cmd_build_direct_dataset, cmd_build_pdot_dataset, cmd_crop, cmd_eval, cmd_identify, cmd_segment, cmd_synth,
    read_jsonl, write_jsonl, GroundTruthLabel, RunConfig, StartYawMode,
};
use pdot360::synth::{ground_truth_pdot, Arm, CameraPose, SceneKind, SceneSample, Vec2};
use pdot360::Error;

const WIDTH: usize = 512;

fn small() -> RunConfig {
    RunConfig {
        out_size: 64,
        ..RunConfig::default()
    }
}

fn synth(dir: &Path, count: usize, seed: u64) -> pdot360::pipeline::SynthManifest {
    let cfg = RunConfig { seed, ..small() };
    cmd_synth(count, WIDTH, dir, &cfg).unwrap()
}

#[test]
fn synth_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path(), 5, 1);
    assert_eq!(m.entries.len(), 30);
    for e in &m.entries {
        assert!(dir.path().join(&e.depth).is_file());
        assert!(dir.path().join(&e.shaded).is_file());
    }
    for f in ["scenes.jsonl", "labels.jsonl", "annotations.jsonl", "manifest.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let anns = parse_annotations(dir.path().join("annotations.jsonl")).unwrap();
    assert_eq!(anns.len(), 30);
    assert_eq!(anns.iter().filter(|a| a.is_omnidirectional()).count(), 5);
}

#[test]
fn synth_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    synth(a.path(), 2, 42);
    synth(b.path(), 2, 42);
    for f in ["manifest.json", "scenes.jsonl", "depth/x_0001.png", "shaded/omni_0000.png"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let c = tempfile::tempdir().unwrap();
    synth(c.path(), 2, 43);
    assert_ne!(
        std::fs::read(a.path().join("scenes.jsonl")).unwrap(),
        std::fs::read(c.path().join("scenes.jsonl")).unwrap()
    );
}

#[test]
fn synth_zero_count() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path(), 0, 0);
    assert!(m.entries.is_empty());
    assert!(dir.path().join("manifest.json").is_file());
}

/// Directory holding only the depth panoramas of one scene kind.
fn kind_dir(src: &Path, kind: &str) -> tempfile::TempDir {
    let out = tempfile::tempdir().unwrap();
    for e in std::fs::read_dir(src.join("depth")).unwrap() {
        let p = e.unwrap().path();
        if p.file_name().unwrap().to_string_lossy().starts_with(&format!("{kind}_")) {
            std::fs::copy(&p, out.path().join(p.file_name().unwrap())).unwrap();
        }
    }
    out
}

#[test]
fn x_junctions_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { seed: 9, ..small() };
    // ten X scenes: generate 10 per kind and keep the X panoramas
    cmd_synth(10, WIDTH, dir.path(), &cfg).unwrap();
    let x = kind_dir(dir.path(), "x");
    let out = cmd_identify(Some(x.path()), &small()).unwrap();
    assert_eq!(out.verdicts.len(), 10);
    // a diagonal view can see past a junction corner, so only a lower bound holds
    assert!(out.verdicts.iter().all(|v| v.is_intersection && v.pdot_count >= 4), "{:?}", out.verdicts);

    let strict = RunConfig { k: 5, ..small() };
    let out = cmd_identify(Some(x.path()), &strict).unwrap();
    let over = out.verdicts.iter().filter(|v| v.pdot_count >= 5).count();
    assert_eq!(out.verdicts.iter().filter(|v| v.is_intersection).count(), over);
    assert!(over <= 1, "{over} X scenes counted five or more PDoTs");
}

#[test]
fn identify_then_eval_on_a_corpus() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 4, 5);
    let out = cmd_identify(Some(&dir.path().join("depth")), &small()).unwrap();
    let ids: Vec<&str> = out.verdicts.iter().map(|v| v.frame_id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort_unstable();
    assert_eq!(ids, sorted);
    let labels: Vec<GroundTruthLabel> = read_jsonl(dir.path().join("labels.jsonl")).unwrap();
    let report = cmd_eval(&out.verdicts, &labels, "depth", "synthetic").unwrap();
    assert_eq!(report.overall.total(), 24);
    assert_eq!(report.accuracy(), 1.0);
    assert_eq!(report.groups.len(), 6);
}

#[test]
fn identify_is_reproducible_with_random_start() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 1, 3);
    let cfg = RunConfig {
        start_yaw: StartYawMode::Random,
        seed: 11,
        workers: 3,
        ..small()
    };
    let a = cmd_identify(Some(&dir.path().join("depth")), &cfg).unwrap();
    let b = cmd_identify(Some(&dir.path().join("depth")), &RunConfig { workers: 1, ..cfg.clone() }).unwrap();
    assert_eq!(a.verdicts, b.verdicts);
    let va = tempfile::tempdir().unwrap();
    write_jsonl(va.path().join("a.jsonl"), &a.verdicts).unwrap();
    write_jsonl(va.path().join("b.jsonl"), &b.verdicts).unwrap();
    assert_eq!(
        std::fs::read(va.path().join("a.jsonl")).unwrap(),
        std::fs::read(va.path().join("b.jsonl")).unwrap()
    );
}

#[test]
fn unreadable_images_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 1, 2);
    let depth = dir.path().join("depth");
    std::fs::write(depth.join("broken.png"), b"not a png").unwrap();
    let out = cmd_identify(Some(&depth), &small()).unwrap();
    assert_eq!(out.verdicts.len(), 6);
    assert_eq!(out.skipped, vec!["broken".to_string()]);
}

#[test]
fn predictions_mode_uses_the_table_only() {
    let dir = tempfile::tempdir().unwrap();
    let preds = dir.path().join("p.jsonl");
    let recs: Vec<PredictionRecord> = (0..16)
        .map(|i| PredictionRecord {
            frame_id: format!("frame{}", i / 8),
            view_index: i % 8,
            // frame0: three travelable views, frame1: two
            score: if (i / 8 == 0 && i % 8 < 3) || (i / 8 == 1 && i % 8 < 2) { 0.9 } else { 0.1 },
        })
        .collect();
    write_predictions(&preds, &recs).unwrap();
    let cfg = RunConfig {
        classifier: format!("predictions:{}", preds.display()),
        ..small()
    };
    let out = cmd_identify(None, &cfg).unwrap();
    assert_eq!(out.verdicts.len(), 2);
    assert!(out.verdicts[0].is_intersection);
    assert!(!out.verdicts[1].is_intersection);

    // a frame listed in the input but absent from the table is a hard error
    let list = dir.path().join("frames.txt");
    std::fs::write(&list, "frame0.png\nframe2.png\n").unwrap();
    assert!(matches!(
        cmd_identify(Some(&list), &cfg),
        Err(Error::MissingPrediction { .. })
    ));
}

#[test]
fn crop_writes_a_ring_per_frame() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 1, 4);
    let out = tempfile::tempdir().unwrap();
    let m = cmd_crop(&dir.path().join("shaded").join("t_0000.png"), out.path(), &small()).unwrap();
    assert_eq!(m.entries.len(), 8);
    assert!(!m.ring_overlapping);
    for e in &m.entries {
        let img = image::open(out.path().join(&e.path)).unwrap();
        assert_eq!((img.width(), img.height()), (64, 64));
    }
    let sixteen = RunConfig {
        views: 16,
        fov_deg: 22.5,
        ..small()
    };
    let m = cmd_crop(&dir.path().join("depth"), out.path(), &sixteen).unwrap();
    assert_eq!(m.entries.len(), 6 * 16);
}

#[test]
fn pdot_dataset_from_synthetic_corpus() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 2, 8);
    let anns = parse_annotations(dir.path().join("annotations.jsonl")).unwrap();
    let out = tempfile::tempdir().unwrap();
    let cfg = RunConfig { seed: 3, ..small() };
    let m = cmd_build_pdot_dataset(&anns, &dir.path().join("shaded"), out.path(), &cfg).unwrap();
    assert_eq!(m.positives, m.negatives);
    assert_eq!(m.balance_shortfall, 0);
    assert!(m.skipped_frames.is_empty());
    for e in &m.entries {
        assert!(out.path().join(&e.path).is_file());
    }
    // positives of annotated frames sit within 5 deg of an annotated PDoT
    for e in m.entries.iter().filter(|e| e.label == CropLabel::Positive) {
        let a = anns.iter().find(|a| a.frame_id == e.frame_id).unwrap();
        if !a.is_omnidirectional() {
            let near = a
                .yaws()
                .iter()
                .any(|&p| pdot360::geometry::inner_yaw_angle(p, e.yaw_deg.to_radians()) <= 5f64.to_radians() + 1e-9);
            assert!(near, "{e:?}");
        }
    }
    let out2 = tempfile::tempdir().unwrap();
    let again = cmd_build_pdot_dataset(&anns, &dir.path().join("shaded"), out2.path(), &cfg).unwrap();
    assert_eq!(
        std::fs::read(out.path().join("manifest.json")).unwrap(),
        std::fs::read(out2.path().join("manifest.json")).unwrap()
    );
    assert_eq!(again.entries.len(), m.entries.len());
    assert!(m.entries.iter().any(|e| e.label == CropLabel::Negative));
}

#[test]
fn missing_images_are_reported() {
    let anns = vec![FrameAnnotation {
        frame_id: "nowhere".into(),
        video_id: "v".into(),
        frame_index: 0,
        fps: 30.0,
        is_key_intersection: true,
        pdots: PdotSet::Yaws(vec![0.0, 1.5, 3.0]),
    }];
    let empty = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let m = cmd_build_pdot_dataset(&anns, empty.path(), out.path(), &small()).unwrap();
    assert_eq!(m.skipped_frames, vec!["nowhere".to_string()]);
    assert!(m.entries.is_empty());
}

#[test]
fn direct_dataset_manifest() {
    let anns: Vec<FrameAnnotation> = (0..=400u64)
        .map(|i| FrameAnnotation {
            frame_id: format!("walk_{i:04}"),
            video_id: "walk".into(),
            frame_index: i,
            fps: 30.0,
            is_key_intersection: i == 300,
            pdots: PdotSet::Yaws(Vec::new()),
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("direct.json");
    let cfg = RunConfig {
        keep_negative: 1.0,
        ..small()
    };
    let m = cmd_build_direct_dataset(&anns, None, &out, &cfg).unwrap();
    assert_eq!(m.entries.len(), 41);
    let f310 = m.entries.iter().find(|e| e.frame.frame_index == 310).unwrap();
    assert_eq!(f310.frame.label, 1.0);
    assert!(out.is_file());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"run_config\""));
}

#[test]
fn segment_from_verdict_file() {
    let dir = tempfile::tempdir().unwrap();
    let verdicts: Vec<FrameVerdict> = (0..100)
        .map(|i| FrameVerdict {
            frame_id: format!("{i:03}"),
            pdot_count: 0,
            is_intersection: (10..=12).contains(&i) || (80..=84).contains(&i),
            decisions: Vec::new(),
            k: 3,
        })
        .collect();
    let p = dir.path().join("v.jsonl");
    write_jsonl(&p, &verdicts).unwrap();
    let back: Vec<FrameVerdict> = read_jsonl(&p).unwrap();
    let cfg = RunConfig { min_run: 3, ..small() };
    let m = cmd_segment("walk", &back, &cfg).unwrap();
    assert_eq!(m.split_points, vec![11, 82]);
    assert_eq!(
        m.segments.iter().map(|s| (s.start_frame, s.end_frame)).collect::<Vec<_>>(),
        vec![(0, 11), (12, 82), (83, 99)]
    );
}

#[test]
fn narrow_y_scene_exercises_the_discard_rule() {
    let arms = [
        Arm { azimuth: 0.0, width: 4.0, length: 25.0 },
        Arm { azimuth: 40f64.to_radians(), width: 4.0, length: 25.0 },
        Arm { azimuth: 200f64.to_radians(), width: 5.0, length: 25.0 },
    ];
    let scene = SceneSample::from_arms(SceneKind::Y, &arms, CameraPose::new(Vec2::new(0.0, 0.0), 0.3), 3.0).unwrap();
    assert!(scene.gt_is_intersection);
    for &y in &scene.gt_pdot_yaws {
        assert!(ground_truth_pdot(&scene.map, &scene.pose, y, 0.4, 6.0));
    }
    let ann = FrameAnnotation {
        frame_id: "y40".into(),
        video_id: "v".into(),
        frame_index: 0,
        fps: 30.0,
        is_key_intersection: true,
        pdots: PdotSet::Yaws(scene.gt_pdot_yaws.clone()),
    };
    let mut neg: Vec<f64> = negative_yaws(&ann).iter().map(|y| y.to_degrees().rem_euclid(360.0)).collect();
    neg.sort_by(|a, b| a.total_cmp(b));
    // the 0-40 gap is dropped; the two 160 deg gaps each give a bisector
    assert_eq!(neg.len(), 2);
    assert!((neg[0] - 120.0).abs() < 1e-9 && (neg[1] - 280.0).abs() < 1e-9, "{neg:?}");
    for &n in &neg {
        assert!(!ground_truth_pdot(&scene.map, &scene.pose, n.to_radians(), 0.4, 6.0));
    }
}

#[test]
fn canonical_x_junctions_have_four_pdots() {
    use pdot360::synth::{generate_scene_with, render_depth_panorama, SceneParams};
    use rand::SeedableRng;

    let dir = tempfile::tempdir().unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    for i in 0..10 {
        let s = generate_scene_with(SceneKind::X, &SceneParams::canonical(), &mut rng).unwrap();
        let (depth, _) = render_depth_panorama(&s.map, &s.pose, WIDTH).unwrap();
        depth.save_png(dir.path().join(format!("x{i}.png"))).unwrap();
    }
    let out = cmd_identify(Some(dir.path()), &small()).unwrap();
    assert_eq!(out.verdicts.len(), 10);
    assert!(out.verdicts.iter().all(|v| v.is_intersection && v.pdot_count == 4), "{:?}", out.verdicts);
    let strict = RunConfig { k: 5, ..small() };
    let out = cmd_identify(Some(dir.path()), &strict).unwrap();
    assert_eq!(out.verdicts.iter().filter(|v| v.is_intersection).count(), 0);
}
