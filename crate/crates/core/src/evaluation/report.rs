use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{at_t_metrics, frame_metrics, macro_average, shot_level_metrics, FrameMetrics, ShotMatchConfig};
use crate::dataset::{Interval, Shot, SummaryAnnotation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalLevel {
    Frame,
    Shot,
    AtT,
}

/// Metrics of one game under one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRow {
    pub match_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iou_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance_s: Option<f64>,
    #[serde(flatten)]
    pub metrics: FrameMetrics,
    /// Both sides empty; scores are 1 by convention.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub vacuous: bool,
}

/// Per-configuration mean over games.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iou_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance_s: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou: f64,
    pub games: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub level: EvalLevel,
    pub games: Vec<GameRow>,
    #[serde(rename = "macro")]
    pub macro_rows: Vec<MacroRow>,
}

/// One game's prediction paired with its ground truth.
#[derive(Debug, Clone)]
pub struct GamePair {
    pub match_id: String,
    pub predicted: Vec<Shot>,
    pub truth: SummaryAnnotation,
}

impl EvalReport {
    /// Evaluates every game at `level`. `shot_configs` is only used at shot level.
    pub fn build(level: EvalLevel, games: &[GamePair], shot_configs: &[ShotMatchConfig]) -> Result<Self> {
        let configs: Vec<Option<ShotMatchConfig>> = match level {
            EvalLevel::Shot if shot_configs.is_empty() => {
                return Err(Error::Input("shot-level evaluation needs at least one configuration".into()))
            }
            EvalLevel::Shot => shot_configs.iter().copied().map(Some).collect(),
            _ => vec![None],
        };
        let mut rows = Vec::new();
        let mut macros = Vec::new();
        for cfg in &configs {
            let mut per_game = Vec::with_capacity(games.len());
            for g in games {
                let metrics = match (level, cfg) {
                    (EvalLevel::Frame, _) => {
                        let pred: Vec<Interval> = g.predicted.iter().map(|s| s.interval).collect();
                        frame_metrics(&pred, &g.truth.shots)?
                    }
                    (EvalLevel::Shot, Some(cfg)) => shot_level_metrics(&g.predicted, &g.truth.shots, cfg)?,
                    (EvalLevel::AtT, _) => at_t_metrics(&g.predicted, &g.truth)?,
                    (EvalLevel::Shot, None) => unreachable!("shot level always has a config"),
                };
                per_game.push(metrics);
                rows.push(GameRow {
                    match_id: g.match_id.clone(),
                    iou_threshold: cfg.map(|c| c.iou_threshold),
                    tolerance_s: cfg.map(|c| c.tolerance_s),
                    vacuous: metrics.vacuous(),
                    metrics,
                });
            }
            let m = macro_average(&per_game);
            macros.push(MacroRow {
                iou_threshold: cfg.map(|c| c.iou_threshold),
                tolerance_s: cfg.map(|c| c.tolerance_s),
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
                iou: m.iou,
                games: m.games,
            });
        }
        Ok(EvalReport {
            level,
            games: rows,
            macro_rows: macros,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// Flat table: one line per game row, then one `MACRO` line per configuration.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("match_id,iou_threshold,tolerance_s,precision,recall,f1,iou,tp,fp,fn\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.games {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{},{},{},{:.4},{:.4},{:.4},{:.4},{},{},{}",
                r.match_id,
                opt(r.iou_threshold),
                opt(r.tolerance_s),
                m.precision,
                m.recall,
                m.f1,
                m.iou,
                m.tp,
                m.fp,
                m.fn_
            );
        }
        for r in &self.macro_rows {
            let _ = writeln!(
                out,
                "MACRO,{},{},{:.4},{:.4},{:.4},{:.4},,,",
                opt(r.iou_threshold),
                opt(r.tolerance_s),
                r.precision,
                r.recall,
                r.f1,
                r.iou
            );
        }
        out
    }
}

/// The default shot-level sweep: every IoU threshold without tolerance, then
/// every tolerance at the lowest IoU threshold.
pub fn default_shot_sweep() -> Vec<ShotMatchConfig> {
    let mut out: Vec<ShotMatchConfig> = super::IOU_GRID
        .iter()
        .map(|&t| ShotMatchConfig { iou_threshold: t, tolerance_s: 0.0 })
        .collect();
    out.extend(super::TOLERANCE_GRID_S.iter().skip(1).map(|&tol| ShotMatchConfig {
        iou_threshold: super::IOU_GRID[0],
        tolerance_s: tol,
    }));
    out
}
