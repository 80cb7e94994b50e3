use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;
use summalign_core::dataset::{load_annotation, load_features, load_match, League, ShotList, SummaryAnnotation};
use summalign_core::evaluation::{
    at_t_select_shots, default_shot_sweep, phase_distribution, weighted_phase_average, EvalLevel, EvalReport,
    GamePair, PhaseDistribution, ShotMatchConfig,
};
use summalign_core::review::ProposalSet;
use summalign_core::segmentation::{knn_shot_boundaries, threshold_shot_boundaries, KnnSbdConfig, TransitionScores};
use summalign_core::summarization::{
    chunk_samples, infer, ingest_scores, summarize, ChunkPredictions, ChunkSpec, LossConfig, MixupConfig,
    PredictionsFile, SummarizeConfig, TrainConfig,
};
use summalign_core::{align_all, Error as CoreError, Shot};

use crate::args::{
    AlignArgs, EvaluateArgs, Level, SegmentArgs, SegmentMethod, ServeArgs, StatsArgs, SummarizeArgs, TrainArgs,
};
use crate::output::{emit, resolve, with_newline, RunManifest};
use crate::UsageError;

pub fn segment(a: &SegmentArgs) -> Result<()> {
    let features_path = resolve(&a.features);
    let features = load_features(&features_path)?;
    let mut manifest = RunManifest::new("segment", serde_json::Value::Null);
    manifest.input(&features_path)?;
    let shots = match a.method {
        SegmentMethod::Knn => {
            let cfg = KnnSbdConfig {
                k: a.k,
                outlier_min_run: a.outlier_min_run,
                distance: a.distance.into(),
            };
            manifest.config = json!({ "method": "knn", "knn": cfg });
            knn_shot_boundaries(&features, &cfg)?
        }
        SegmentMethod::Threshold => {
            let Some(scores) = &a.scores else {
                return Err(UsageError("--method threshold requires --scores".into()).into());
            };
            let scores_path = resolve(scores);
            let mut ts = TransitionScores::load(&scores_path)?;
            manifest.input(&scores_path)?;
            if let Some(t) = a.threshold {
                ts.threshold = t;
            }
            if ts.frames() != features.len() {
                return Err(CoreError::Shape(format!(
                    "{} transition scores for {} frames",
                    ts.scores.len(),
                    features.len()
                ))
                .into());
            }
            manifest.config = json!({ "method": "threshold", "threshold": ts.threshold });
            threshold_shot_boundaries(&ts, features.fps())?
        }
    };
    let list = ShotList {
        match_id: a.match_id.clone().unwrap_or_else(|| features.source_id().to_string()),
        fps: features.fps(),
        shots: shots.into_iter().map(|i| Shot { interval: i, score: None }).collect(),
    };
    emit(out(&a.out).as_deref(), &with_newline(list.to_json()), &manifest)
}

pub fn align(a: &AlignArgs) -> Result<()> {
    let (sp, bp, shp) = (resolve(&a.summary_features), resolve(&a.broadcast_features), resolve(&a.shots));
    let summary = load_features(&sp)?;
    let broadcast = load_features(&bp)?;
    let shots = read_shot_list(&shp)?;
    if shots.fps != summary.fps() {
        return Err(CoreError::Unit(summary.fps(), shots.fps).into());
    }
    let intervals: Vec<_> = shots.shots.iter().map(|s| s.interval).collect();
    let set = ProposalSet {
        match_id: a.match_id.clone().unwrap_or(shots.match_id),
        fps: broadcast.fps(),
        broadcast_frames: Some(broadcast.len()),
        proposals: align_all(&intervals, &summary, &broadcast),
    };
    let mut manifest = RunManifest::new("align", json!({}));
    for p in [&sp, &bp, &shp] {
        manifest.input(p)?;
    }
    emit(out(&a.out).as_deref(), &with_newline(serde_json::to_string_pretty(&set)?), &manifest)
}

pub fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let (pred, truth) = (resolve(&a.pred), resolve(&a.truth));
    let games = load_games(&pred, &truth)?;
    let level = match a.level {
        Level::Frame => EvalLevel::Frame,
        Level::Shot => EvalLevel::Shot,
        Level::AtT => EvalLevel::AtT,
    };
    let configs = shot_configs(a)?;
    let report = EvalReport::build(level, &games, &configs)?;
    let text = if a.csv { report.to_csv() } else { with_newline(report.to_json()) };
    let mut manifest = RunManifest::new(
        "evaluate",
        json!({ "level": level, "shot_configs": if level == EvalLevel::Shot { json!(configs) } else { json!(null) }, "csv": a.csv }),
    );
    manifest.input(&pred)?;
    manifest.input(&truth)?;
    emit(out(&a.out).as_deref(), &text, &manifest)
}

fn shot_configs(a: &EvaluateArgs) -> Result<Vec<ShotMatchConfig>> {
    if a.iou.is_empty() && a.tolerance.is_empty() {
        return Ok(default_shot_sweep());
    }
    let ious = if a.iou.is_empty() { vec![summalign_core::evaluation::IOU_GRID[0]] } else { a.iou.clone() };
    let tols = if a.tolerance.is_empty() { vec![0.0] } else { a.tolerance.clone() };
    let mut out = Vec::new();
    for &i in &ious {
        for &t in &tols {
            out.push(ShotMatchConfig::new(i, t)?);
        }
    }
    Ok(out)
}

/// A predicted summary is either a shot list or a proposal file, in which
/// case the surviving proposals' final intervals are used.
fn read_predicted(path: &Path) -> Result<ShotList> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(CoreError::from)?;
    if value.get("proposals").is_some() {
        let set: ProposalSet = serde_json::from_value(value).map_err(CoreError::from)?;
        set.validate()?;
        let shots = set
            .proposals
            .iter()
            .filter_map(|p| p.final_interval())
            .map(|i| Shot { interval: i, score: None })
            .collect();
        return Ok(ShotList { match_id: set.match_id, fps: set.fps, shots });
    }
    Ok(ShotList::from_json(&text)?)
}

fn read_shot_list(path: &Path) -> Result<ShotList> {
    let text = fs::read_to_string(path).map_err(CoreError::from)?;
    Ok(ShotList::from_json(&text)?)
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(CoreError::from)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            p.is_file() && name.ends_with(".json") && !name.ends_with(".manifest.json")
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Pairs predictions with ground truth. Two files form one game; two
/// directories are paired by `match_id`, and every truth needs a prediction.
fn load_games(pred: &Path, truth: &Path) -> Result<Vec<GamePair>> {
    match (pred.is_dir(), truth.is_dir()) {
        (false, false) => {
            let p = read_predicted(pred)?;
            let t = load_annotation(truth)?;
            if p.match_id != t.match_id {
                log::warn!("prediction {} evaluated against truth {}", p.match_id, t.match_id);
            }
            Ok(vec![GamePair { match_id: t.match_id.clone(), predicted: p.shots, truth: t }])
        }
        (true, true) => {
            let mut preds: BTreeMap<String, ShotList> = BTreeMap::new();
            for f in json_files(pred)? {
                let p = read_predicted(&f).with_context(|| format!("in {}", f.display()))?;
                if preds.contains_key(&p.match_id) {
                    return Err(CoreError::Input(format!("two predictions for match {}", p.match_id)).into());
                }
                preds.insert(p.match_id.clone(), p);
            }
            let mut truths: Vec<SummaryAnnotation> = json_files(truth)?
                .iter()
                .map(|f| load_annotation(f).with_context(|| format!("in {}", f.display())))
                .collect::<Result<_>>()?;
            truths.sort_by(|a, b| a.match_id.cmp(&b.match_id));
            truths
                .into_iter()
                .map(|t| {
                    let p = preds
                        .remove(&t.match_id)
                        .ok_or_else(|| CoreError::Input(format!("no prediction for match {}", t.match_id)))?;
                    Ok(GamePair { match_id: t.match_id.clone(), predicted: p.shots, truth: t })
                })
                .collect()
        }
        _ => Err(UsageError("--pred and --truth must both be files or both be directories".into()).into()),
    }
}

pub fn summarize_cmd(a: &SummarizeArgs) -> Result<()> {
    let scores_path = resolve(&a.scores);
    let (preds, clamped) = ingest_scores(&scores_path)?;
    if clamped > 0 {
        log::warn!("{clamped} score(s) clamped into [0, 1]");
    }
    let mut manifest = RunManifest::new("summarize", serde_json::Value::Null);
    manifest.input(&scores_path)?;
    let mut cfg = match &a.config {
        Some(p) => {
            let p = resolve(p);
            manifest.input(&p)?;
            SummarizeConfig::load(&p)?
        }
        None => SummarizeConfig { fps: preds.fps, ..SummarizeConfig::default() },
    };
    if let Some(c) = a.chunk_s {
        cfg.chunk_size_s = c;
    }
    if let Some(t) = a.score_threshold {
        cfg.score_threshold = t;
    }
    if a.no_nms {
        cfg.nms = false;
    }
    cfg.validate()?;
    if cfg.fps != preds.fps {
        return Err(CoreError::Unit(cfg.fps, preds.fps).into());
    }
    let total = match &a.features {
        Some(f) => {
            let f = resolve(f);
            let features = load_features(&f)?;
            manifest.input(&f)?;
            if features.fps() != preds.fps {
                return Err(CoreError::Unit(features.fps(), preds.fps).into());
            }
            Some(features.len())
        }
        None => None,
    };
    preds.validate(&cfg.chunk_spec()?, total)?;
    let decoded = summarize(&preds, &cfg)?;
    if decoded.dropped > 0 {
        log::info!("{} degenerate proposal(s) dropped", decoded.dropped);
    }
    let shots = match a.target_s {
        Some(t) => at_t_select_shots(&decoded.shots, t, preds.fps)?,
        None => decoded.shots,
    };
    manifest.config = json!({ "summarize": cfg, "target_s": a.target_s });
    let list = ShotList { match_id: preds.match_id.clone(), fps: preds.fps, shots };
    emit(out(&a.out).as_deref(), &with_newline(list.to_json()), &manifest)
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    config: &'a TrainConfig,
    chunk_size_s: f64,
    final_loss: Option<f64>,
    #[serde(flatten)]
    report: &'a summalign_core::summarization::TrainReport,
}

pub fn train_ref(a: &TrainArgs) -> Result<()> {
    let (fp, tp) = (resolve(&a.features), resolve(&a.truth));
    let features = load_features(&fp)?;
    let truth = load_annotation(&tp)?;
    if truth.fps != features.fps() {
        return Err(CoreError::Unit(features.fps(), truth.fps).into());
    }
    let mixup = match (a.mixup_alpha, a.mixup_beta) {
        (None, None) => None,
        (Some(alpha), Some(beta)) => Some(MixupConfig { alpha, beta }),
        (Some(alpha), None) => Some(MixupConfig { alpha, beta: alpha }),
        (None, Some(_)) => return Err(UsageError("--mixup-beta requires --mixup-alpha".into()).into()),
    };
    let cfg = TrainConfig {
        epochs: a.epochs,
        lr: a.lr,
        seed: a.seed,
        loss: LossConfig::new(a.lambda)?,
        pe_dim: a.pe_dim,
        mixup,
    };
    let spec = ChunkSpec::new(a.chunk_s, features.fps())?;
    let batch = chunk_samples(&features, &truth.shots, &spec)?;
    let report = summalign_core::summarization::train(&batch, &cfg)?;

    let mut manifest = RunManifest::new("train-ref", json!({ "train": cfg, "chunk_size_s": a.chunk_s }));
    manifest.input(&fp)?;
    manifest.input(&tp)?;

    if let Some(pp) = &a.predictions {
        let chunks = batch
            .iter()
            .map(|s| {
                Ok(ChunkPredictions {
                    origin_frame: s.origin,
                    preds: infer(&report.weights, s.dim, &s.features)?,
                })
            })
            .collect::<Result<Vec<_>, CoreError>>()?;
        let file = PredictionsFile { match_id: truth.match_id.clone(), fps: features.fps(), chunks };
        emit(Some(&resolve(pp)), &with_newline(file.to_json()), &manifest)?;
    }

    let doc = TrainOutput {
        config: &cfg,
        chunk_size_s: a.chunk_s,
        final_loss: report.losses.last().copied(),
        report: &report,
    };
    emit(out(&a.out).as_deref(), &with_newline(serde_json::to_string_pretty(&doc)?), &manifest)
}

#[derive(Serialize)]
struct MatchStats {
    match_id: String,
    league: League,
    season: String,
    distribution: PhaseDistribution,
}

#[derive(Serialize)]
struct GroupStats {
    league: League,
    season: String,
    games: usize,
    distribution: PhaseDistribution,
}

#[derive(Serialize)]
struct StatsReport {
    matches: Vec<MatchStats>,
    groups: Vec<GroupStats>,
    weighted_average: PhaseDistribution,
}

/// Phase distribution per match, per league/season group (mean over its
/// games) and the game-weighted average over groups.
pub fn stats(a: &StatsArgs) -> Result<()> {
    let (sd, md) = (resolve(&a.summaries), resolve(&a.matches));
    let mut records = BTreeMap::new();
    for f in json_files(&md)? {
        let r = load_match(&f).with_context(|| format!("in {}", f.display()))?;
        records.insert(r.match_id.clone(), r);
    }
    let mut matches = Vec::new();
    for f in json_files(&sd)? {
        let s = load_annotation(&f).with_context(|| format!("in {}", f.display()))?;
        let r = records
            .get(&s.match_id)
            .ok_or_else(|| CoreError::Input(format!("no match record for {}", s.match_id)))?;
        matches.push(MatchStats {
            match_id: s.match_id.clone(),
            league: r.league,
            season: r.season.clone(),
            distribution: phase_distribution(&s, r)?,
        });
    }
    matches.sort_by(|a, b| a.match_id.cmp(&b.match_id));

    let mut grouped: BTreeMap<(League, String), Vec<&PhaseDistribution>> = BTreeMap::new();
    for m in &matches {
        grouped.entry((m.league, m.season.clone())).or_default().push(&m.distribution);
    }
    let groups: Vec<GroupStats> = grouped
        .into_iter()
        .map(|((league, season), ds)| {
            let distribution = weighted_phase_average(&ds.iter().map(|d| (1, (*d).clone())).collect::<Vec<_>>());
            GroupStats { league, season, games: ds.len(), distribution }
        })
        .collect();
    let weighted_average =
        weighted_phase_average(&groups.iter().map(|g| (g.games, g.distribution.clone())).collect::<Vec<_>>());
    let report = StatsReport { matches, groups, weighted_average };

    let mut manifest = RunManifest::new("stats", json!({}));
    manifest.input(&sd)?;
    manifest.input(&md)?;
    emit(out(&a.out).as_deref(), &with_newline(serde_json::to_string_pretty(&report)?), &manifest)
}

pub fn serve(a: &ServeArgs) -> Result<()> {
    let cfg = summalign_service::ServiceConfig {
        data_dir: resolve(&a.data),
        addr: std::net::SocketAddr::new(a.host, a.port),
        ui_dir: a.ui.as_deref().map(resolve),
    };
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async {
        let handle = summalign_service::serve(cfg).await?;
        eprintln!("listening on http://{}", handle.local_addr());
        tokio::signal::ctrl_c().await?;
        handle.shutdown().await?;
        Ok::<_, anyhow::Error>(())
    })
}

fn out(p: &Option<PathBuf>) -> Option<PathBuf> {
    p.as_deref().map(resolve)
}
