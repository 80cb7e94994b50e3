#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use summalign_core::dataset::{annotation_to_json, load_annotation, load_features};
use summalign_core::evaluation::{EvalLevel, EvalReport, GamePair};
use summalign_core::segmentation::{knn_shot_boundaries, KnnSbdConfig};
use summalign_core::{align_all, FrameFeatureSequence, Interval, Shot, SummaryAnnotation};

pub const FPS: f32 = 2.0;
pub const MATCH_ID: &str = "desk-match";

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join("desk_match")
}

pub fn summalign() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_summalign"));
    c.env_remove("SUMMALIGN_DATA_DIR");
    c
}

pub fn run(args: &[&str]) -> Output {
    summalign().args(args).output().expect("binary runs")
}

/// A ten-minute broadcast made of shots whose features drift slowly, and a
/// summary built from excerpts of some of those shots (one replayed out of
/// order). Returns the summary, the broadcast and the excerpt sources.
pub fn build_fixture() -> (FrameFeatureSequence, FrameFeatureSequence, SummaryAnnotation) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let dim = 8;
    let mut rows: Vec<Vec<f32>> = Vec::new();
    let mut shots = Vec::new();
    while rows.len() < 1200 {
        let len = rng.random_range(24..64).min(1200 - rows.len());
        let base: Vec<f32> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let dir: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let start = rows.len();
        for n in 0..len {
            let drift = 0.02 * n as f32;
            rows.push(base.iter().zip(&dir).map(|(b, d)| b + d * drift).collect());
        }
        shots.push((start, start + len));
    }
    let broadcast = FrameFeatureSequence::from_rows("broadcast", FPS, &rows).unwrap();

    let picks = [2usize, 5, 9, 14, 11, 20, 26];
    let mut summary_rows = Vec::new();
    let mut sources = Vec::new();
    for &p in &picks {
        let (s, e) = shots[p];
        let len = rng.random_range(12..=(e - s).min(40));
        let off = rng.random_range(0..=(e - s - len));
        summary_rows.extend((s + off..s + off + len).map(|k| broadcast.row(k).to_vec()));
        sources.push(Interval::new(s + off, s + off + len, FPS as f64).unwrap());
    }
    let summary = FrameFeatureSequence::from_rows(MATCH_ID, FPS, &summary_rows).unwrap();
    let truth = SummaryAnnotation::new(MATCH_ID, FPS as f64, &sources).unwrap();
    (summary, broadcast, truth)
}

/// segment → align → evaluate through the library on the committed fixture.
pub fn library_report(dir: &Path) -> String {
    let summary = load_features(dir.join("summary.sfeat")).unwrap();
    let broadcast = load_features(dir.join("broadcast.sfeat")).unwrap();
    let truth = load_annotation(dir.join("truth.json")).unwrap();
    let shots = knn_shot_boundaries(&summary, &KnnSbdConfig::default()).unwrap();
    let predicted: Vec<Shot> = align_all(&shots, &summary, &broadcast)
        .iter()
        .filter_map(|p| p.final_interval())
        .map(|i| Shot { interval: i, score: None })
        .collect();
    let games = [GamePair { match_id: truth.match_id.clone(), predicted, truth }];
    let mut json = EvalReport::build(EvalLevel::Frame, &games, &[]).unwrap().to_json();
    if !json.ends_with('\n') {
        json.push('\n');
    }
    json
}

pub fn write_fixture(dir: &Path) {
    let (summary, broadcast, truth) = build_fixture();
    std::fs::create_dir_all(dir).unwrap();
    summalign_core::dataset::save_features(&summary, dir.join("summary.sfeat")).unwrap();
    summalign_core::dataset::save_features(&broadcast, dir.join("broadcast.sfeat")).unwrap();
    std::fs::write(dir.join("truth.json"), annotation_to_json(&truth)).unwrap();
    std::fs::write(dir.join("golden_report.json"), library_report(dir)).unwrap();
}

/// Runs the three pipeline commands in `work` and returns the report bytes.
pub fn cli_pipeline(fixture: &Path, work: &Path) -> Result<Vec<u8>, String> {
    let p = |name: &str| fixture.join(name).to_string_lossy().into_owned();
    let w = |name: &str| work.join(name).to_string_lossy().into_owned();
    let steps: [Vec<String>; 3] = [
        vec![
            "segment".into(),
            "--features".into(),
            p("summary.sfeat"),
            "--match-id".into(),
            MATCH_ID.into(),
            "--out".into(),
            w("shots.json"),
        ],
        vec![
            "align".into(),
            "--summary-features".into(),
            p("summary.sfeat"),
            "--broadcast-features".into(),
            p("broadcast.sfeat"),
            "--shots".into(),
            w("shots.json"),
            "--out".into(),
            w("proposals.json"),
        ],
        vec![
            "evaluate".into(),
            "--pred".into(),
            w("proposals.json"),
            "--truth".into(),
            p("truth.json"),
            "--level".into(),
            "frame".into(),
            "--out".into(),
            w("report.json"),
        ],
    ];
    for args in &steps {
        let out = summalign().args(args).output().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{} failed: {}", args[0], String::from_utf8_lossy(&out.stderr)));
        }
    }
    std::fs::read(work.join("report.json")).map_err(|e| e.to_string())
}
