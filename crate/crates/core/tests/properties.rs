use std::collections::BTreeSet;

use proptest::prelude::*;
use summalign_core::dataset::{annotation_from_json, annotation_to_json, normalize_intervals};
use summalign_core::evaluation::{
    at_t_select, frame_metrics, shot_level_metrics, ShotMatchConfig, IOU_GRID, TOLERANCE_GRID_S,
};
use summalign_core::review::{ProposalSet, ReviewAction, ReviewSession, SessionState, JOURNAL_FILE};
use summalign_core::segmentation::{knn_shot_boundaries, threshold_shot_boundaries, KnnSbdConfig, TransitionScores};
use summalign_core::summarization::{
    decode_boundaries, encode_targets, loss_cls, loss_reg, nms, FramePredictions, FrameTargets,
};
use summalign_core::{
    align_shot, AlignmentProposal, FrameFeatureSequence, Interval, ProposalStatus, Shot, SummaryAnnotation,
};

const FPS: f64 = 2.0;

fn intervals(max_frame: usize, max_count: usize) -> impl Strategy<Value = Vec<Interval>> {
    prop::collection::vec((0..max_frame, 1usize..120), 0..max_count).prop_map(|v| {
        v.into_iter()
            .map(|(s, len)| Interval::new(s, s + len, FPS).unwrap())
            .collect()
    })
}

fn scored(max_frame: usize, max_count: usize) -> impl Strategy<Value = Vec<Shot>> {
    prop::collection::vec((0..max_frame, 1usize..120, 0.0f64..=1.0), 0..max_count).prop_map(|v| {
        v.into_iter()
            .map(|(s, len, c)| Shot::scored(Interval::new(s, s + len, FPS).unwrap(), c).unwrap())
            .collect()
    })
}

fn frames_of(v: &[Interval]) -> BTreeSet<usize> {
    v.iter().flat_map(|i| i.start()..i.end()).collect()
}

fn features(rows: Vec<Vec<i8>>) -> FrameFeatureSequence {
    let rows: Vec<Vec<f32>> = rows.into_iter().map(|r| r.into_iter().map(f32::from).collect()).collect();
    FrameFeatureSequence::from_rows("p", FPS as f32, &rows).unwrap()
}

fn feature_rows(frames: std::ops::Range<usize>, dim: usize) -> impl Strategy<Value = Vec<Vec<i8>>> {
    prop::collection::vec(prop::collection::vec(-4i8..4, dim), frames)
}

fn is_partition(parts: &[Interval], n: usize) -> bool {
    parts.first().map(|p| p.start()) == Some(0)
        && parts.last().map(|p| p.end()) == Some(n)
        && parts.windows(2).all(|w| w[0].end() == w[1].start())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_keeps_frames_and_is_idempotent(v in intervals(5000, 30)) {
        let n = normalize_intervals(&v).unwrap();
        prop_assert_eq!(frames_of(&n), frames_of(&v));
        prop_assert!(n.windows(2).all(|w| w[0].end() < w[1].start()));
        prop_assert_eq!(normalize_intervals(&n).unwrap(), n);
    }

    #[test]
    fn duration_times_fps_is_length(s in 0usize..100_000, len in 1usize..100_000,
                                    fps in prop::sample::select(vec![1.0, 2.0, 4.0, 5.0, 10.0, 25.0, 30.0, 0.5])) {
        let i = Interval::new(s, s + len, fps).unwrap();
        let back = i.duration_s() * fps;
        if [0.5, 1.0, 2.0, 4.0].contains(&fps) {
            prop_assert_eq!(back, len as f64);
        } else {
            prop_assert!((back - len as f64).abs() <= 2.0 * f64::EPSILON * len as f64);
        }
        prop_assert_eq!(Interval::from_seconds(i.start_s(), i.end_s(), fps).unwrap(), i);
    }

    #[test]
    fn features_round_trip_bit_exact(rows in prop::collection::vec(prop::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), 3), 1..40)) {
        let f = FrameFeatureSequence::from_rows("x", 2.0, &rows).unwrap();
        let back = FrameFeatureSequence::from_bytes("x", &f.to_bytes()).unwrap();
        prop_assert_eq!(
            back.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            f.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.sfeat");
        summalign_core::dataset::save_features(&f, &path).unwrap();
        prop_assert_eq!(summalign_core::dataset::load_features(&path).unwrap(), f);
    }

    #[test]
    fn annotation_json_round_trip(v in intervals(20_000, 20)) {
        let a = SummaryAnnotation::new("m", FPS, &v).unwrap();
        prop_assert_eq!(annotation_from_json(&annotation_to_json(&a)).unwrap(), a);
    }

    #[test]
    fn knn_partitions_and_ignores_scale(rows in feature_rows(2..60, 3), k in 1usize..12,
                                        scale in prop::sample::select(vec![0.25f32, 2.0, 8.0])) {
        let f = features(rows);
        let cfg = KnnSbdConfig { k, ..KnnSbdConfig::default() };
        let parts = knn_shot_boundaries(&f, &cfg).unwrap();
        prop_assert!(is_partition(&parts, f.len()));
        prop_assert_eq!(&knn_shot_boundaries(&f, &cfg).unwrap(), &parts);
        // power-of-two factors keep every distance comparison exact
        let scaled: Vec<f32> = f.as_slice().iter().map(|v| v * scale).collect();
        let g = FrameFeatureSequence::new("p", 2.0, f.dim(), scaled).unwrap();
        prop_assert_eq!(knn_shot_boundaries(&g, &cfg).unwrap(), parts);
    }

    #[test]
    fn lower_threshold_never_fewer_shots(scores in prop::collection::vec(0.0f64..=1.0, 1..200),
                                         a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let n_lo = threshold_shot_boundaries(&TransitionScores::new(scores.clone(), lo).unwrap(), FPS).unwrap();
        let n_hi = threshold_shot_boundaries(&TransitionScores::new(scores.clone(), hi).unwrap(), FPS).unwrap();
        prop_assert!(is_partition(&n_lo, scores.len() + 1));
        prop_assert!(n_lo.len() >= n_hi.len());
    }

    #[test]
    fn alignment_translation_and_scale(b_rows in feature_rows(20..120, 3), s_rows in feature_rows(10..20, 3),
                                       offset in -3i8..3, len in 1usize..10) {
        let b = features(b_rows);
        let s = features(s_rows);
        let shot = Interval::new(0, len.min(s.len()), FPS).unwrap();
        let base = align_shot(&s, &shot, &b).unwrap();
        prop_assert!(base.distance >= 0.0);

        let shift = |f: &FrameFeatureSequence, c: f32| {
            FrameFeatureSequence::new("t", 2.0, f.dim(), f.as_slice().iter().map(|v| v + c).collect()).unwrap()
        };
        let moved = align_shot(&shift(&s, offset as f32), &shot, &shift(&b, offset as f32)).unwrap();
        prop_assert!((moved.distance - base.distance).abs() <= 1e-9 * base.distance.max(1.0));

        let scale = |f: &FrameFeatureSequence| {
            FrameFeatureSequence::new("t", 2.0, f.dim(), f.as_slice().iter().map(|v| v * 4.0).collect()).unwrap()
        };
        let scaled = align_shot(&scale(&s), &shot, &scale(&b)).unwrap();
        prop_assert_eq!(scaled.broadcast_interval, base.broadcast_interval);
        prop_assert!((scaled.distance - 4.0 * base.distance).abs() <= 1e-9 * base.distance.max(1.0));
    }

    #[test]
    fn shot_recall_monotone(pred in intervals(3000, 15), truth in intervals(3000, 15)) {
        let shots: Vec<Shot> = pred.iter().map(|&i| Shot::new(i, None).unwrap()).collect();
        let recall = |iou: f64, tol: f64| {
            shot_level_metrics(&shots, &truth, &ShotMatchConfig::new(iou, tol).unwrap()).unwrap().recall
        };
        for w in IOU_GRID.windows(2) {
            prop_assert!(recall(w[1], 0.0) <= recall(w[0], 0.0));
        }
        for w in TOLERANCE_GRID_S.windows(2) {
            prop_assert!(recall(0.05, w[1]) >= recall(0.05, w[0]));
        }
    }

    #[test]
    fn metrics_ignore_order_and_satisfy_identities(pred in intervals(3000, 15), truth in intervals(3000, 15)) {
        let m = frame_metrics(&pred, &truth).unwrap();
        let mut rev = pred.clone();
        rev.reverse();
        prop_assert_eq!(frame_metrics(&rev, &truth).unwrap(), m);
        if m.precision + m.recall > 0.0 {
            let h = 2.0 * m.precision * m.recall / (m.precision + m.recall);
            prop_assert!((m.f1 - h).abs() < 1e-12);
        }
        prop_assert!(m.iou <= m.precision.min(m.recall) + 1e-12);

        let shots: Vec<Shot> = pred.iter().map(|&i| Shot::new(i, None).unwrap()).collect();
        let rev_shots: Vec<Shot> = rev.iter().map(|&i| Shot::new(i, None).unwrap()).collect();
        let cfg = ShotMatchConfig::new(0.35, 20.0).unwrap();
        prop_assert_eq!(
            shot_level_metrics(&shots, &truth, &cfg).unwrap(),
            shot_level_metrics(&rev_shots, &truth, &cfg).unwrap()
        );
    }

    #[test]
    fn at_t_duration_exact(shots in scored(5000, 20), t_s in 0.0f64..600.0) {
        let disjoint = nms(&shots).unwrap();
        let total: usize = disjoint.iter().map(|s| s.interval.len()).sum();
        let sel = at_t_select(&disjoint, t_s, FPS).unwrap();
        let got: usize = sel.iter().map(Interval::len).sum();
        let budget = (t_s * FPS).round() as usize;
        prop_assert_eq!(got, budget.min(total));
    }

    #[test]
    fn decode_inverts_encode(truth in intervals(600, 10), start in 0usize..400, len in 1usize..240) {
        let truth = normalize_intervals(&truth).unwrap();
        let chunk = Interval::new(start, start + len, FPS).unwrap();
        let t = encode_targets(&chunk, &truth).unwrap();
        let preds = FramePredictions::new(t.cls.clone(), t.offsets.clone()).unwrap();
        let decoded = decode_boundaries(&preds, chunk.start(), FPS, 0.5).unwrap();
        let kept: Vec<Interval> = nms(&decoded.shots).unwrap().iter().map(|s| s.interval).collect();
        let expected: Vec<Interval> = truth.iter().copied().filter(|i| i.intersects(&chunk)).collect();
        prop_assert_eq!(kept, expected);
    }

    #[test]
    fn losses_non_negative_and_order_free(
        rows in prop::collection::vec((0.0f64..=1.0, prop::bool::ANY, -5.0f64..5.0, -1i32..6), 1..60),
        rot in 0usize..60,
    ) {
        let preds = FramePredictions::new(
            rows.iter().map(|r| r.0).collect(),
            rows.iter().map(|r| [r.2, -r.2]).collect(),
        ).unwrap();
        let targets = FrameTargets {
            cls: rows.iter().map(|r| if r.1 { 1.0 } else { 0.0 }).collect(),
            offsets: rows.iter().map(|r| [r.3 as f64, (r.3 - 1) as f64]).collect(),
        };
        let cls = loss_cls(std::slice::from_ref(&preds), std::slice::from_ref(&targets)).unwrap();
        let reg = loss_reg(std::slice::from_ref(&preds), std::slice::from_ref(&targets)).unwrap();
        prop_assert!(cls >= 0.0 && reg >= 0.0);

        let k = rot % rows.len();
        fn rotate<T: Clone>(v: &[T], k: usize) -> Vec<T> {
            let mut v = v.to_vec();
            v.rotate_left(k);
            v
        }
        let p2 = FramePredictions::new(rotate(&preds.scores, k), rotate(&preds.offsets, k)).unwrap();
        let t2 = FrameTargets { cls: rotate(&targets.cls, k), offsets: rotate(&targets.offsets, k) };
        // split into two chunks as well, which must not matter either
        let (pa, pb) = (p2.scores.split_at(k), p2.offsets.split_at(k));
        let (ta, tb) = (t2.cls.split_at(k), t2.offsets.split_at(k));
        let batch_p = [
            FramePredictions { scores: pa.0.to_vec(), offsets: pb.0.to_vec() },
            FramePredictions { scores: pa.1.to_vec(), offsets: pb.1.to_vec() },
        ];
        let batch_t = [
            FrameTargets { cls: ta.0.to_vec(), offsets: tb.0.to_vec() },
            FrameTargets { cls: ta.1.to_vec(), offsets: tb.1.to_vec() },
        ];
        prop_assert!((loss_cls(&batch_p, &batch_t).unwrap() - cls).abs() < 1e-9);
        prop_assert!((loss_reg(&batch_p, &batch_t).unwrap() - reg).abs() < 1e-9);
    }

    #[test]
    fn nms_disjoint_covering_idempotent(shots in scored(2000, 40)) {
        let kept = nms(&shots).unwrap();
        prop_assert!(kept.windows(2).all(|w| w[0].interval.end() <= w[1].interval.start()));
        for s in &shots {
            if !kept.contains(s) {
                prop_assert!(kept.iter().any(|k| k.interval.intersects(&s.interval) && k.score >= s.score));
            }
        }
        prop_assert_eq!(nms(&kept).unwrap(), kept);
    }
}

fn proposal(i: usize) -> AlignmentProposal {
    AlignmentProposal {
        shot_index: i,
        summary_interval: Interval::new(0, 10, FPS).unwrap(),
        broadcast_interval: Interval::new(i * 20, i * 20 + 10, FPS).unwrap(),
        distance: 0.5,
        status: ProposalStatus::Proposed,
        adjusted_interval: None,
        failure: None,
    }
}

fn action(kind: u8, s: usize) -> ReviewAction {
    match kind {
        0 => ReviewAction::Accept,
        1 => ReviewAction::Reject,
        _ => ReviewAction::Adjust {
            interval: Interval::new(s, s + 7, FPS).unwrap(),
        },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn journal_replay_and_truncation(ops in prop::collection::vec((0usize..4, 0u8..3, 0usize..80), 1..25)) {
        let set = ProposalSet {
            match_id: "m".into(),
            fps: FPS,
            broadcast_frames: Some(100),
            proposals: (0..4).map(proposal).collect(),
        };
        let dir = tempfile::tempdir().unwrap();
        let mut session = ReviewSession::create(dir.path(), &set).unwrap().with_snapshot_every(5);
        let mut states = vec![session.state().clone()];
        for (k, (i, kind, s)) in ops.iter().enumerate() {
            let v = session.state().versions[*i];
            session.act(*i, action(*kind, *s), v, "r", k as u64).unwrap();
            states.push(session.state().clone());
        }
        let final_state = session.state().clone();
        drop(session);
        let reopened = ReviewSession::open(dir.path()).unwrap();
        prop_assert_eq!(reopened.state(), &final_state);

        let text = std::fs::read_to_string(dir.path().join(JOURNAL_FILE)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let records: Vec<_> = lines.iter().map(|l| serde_json::from_str(l).unwrap()).collect();
        prop_assert_eq!(&SessionState::replay(set.clone(), &records).unwrap(), &final_state);

        for cut in 0..=lines.len() {
            let mut prefix: String = lines[..cut].iter().map(|l| format!("{l}\n")).collect();
            if cut < lines.len() {
                // half of the next record, as after a crash mid-write
                prefix.push_str(&lines[cut][..lines[cut].len() / 2]);
            }
            std::fs::write(dir.path().join(JOURNAL_FILE), prefix).unwrap();
            let reopened = ReviewSession::open(dir.path()).unwrap();
            prop_assert_eq!(reopened.state(), &states[cut]);
        }
    }
}
