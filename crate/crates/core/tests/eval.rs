mod common;

use contoursim::eval::{
    equivalent_clicks, export_curves, flip_average, mine_finetune_set, run_click_eval, run_contour_eval,
    simulate_next_click, zoom_in, EquivalentClicks, NocValue,
};
use contoursim::raster::iou;
use contoursim::rng::derive_seed;
use contoursim::segmenter::{predict_filled_baseline, SegmenterSpec};
use contoursim::{
    generate_contour, BinaryMask, EvalConfig, InteractionEncoding, Polarity, ProbabilityMask, Segmenter,
    SegmenterAnswer, SegmenterError, SegmenterQuery,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn settings() -> Vec<EvalConfig> {
    let mut out = Vec::new();
    for zoom_in in [false, true] {
        for flip_average in [false, true] {
            out.push(EvalConfig {
                zoom_in,
                flip_average,
                ..EvalConfig::default()
            });
        }
    }
    out
}

#[test]
fn oracle_is_perfect_under_every_setting() {
    let dir = tempfile::tempdir().unwrap();
    let index = common::fixture_dataset(dir.path());
    for config in settings() {
        let contour = run_contour_eval(&SegmenterSpec::Oracle, &index, &config).unwrap();
        assert_eq!(contour.aggregates.mean_iou_at_1, Some(1.0), "{config:?}");
        assert!(contour.summary_csv().contains("mean_iou_at_1,100.00"));
        let clicks = run_click_eval(&SegmenterSpec::Oracle, &index, &config)
            .unwrap()
            .with_contour_results(&contour);
        for s in &clicks.samples {
            assert_eq!(s.noc_at_k, Some(NocValue::Clicks(1)), "{config:?} {s:?}");
            assert_eq!(s.equivalent_clicks, Some(EquivalentClicks::Clicks(1)));
            assert_eq!(s.iou_per_click.len(), 20);
            assert!(s.iou_per_click.iter().all(|&v| v == 1.0));
        }
        let curves = export_curves(&clicks).unwrap();
        assert!(curves
            .csv
            .lines()
            .skip(1)
            .all(|l| l.starts_with(|c: char| c.is_ascii_digit()) && l.contains(",100.00,100.00")));
    }
}

#[test]
fn baseline_matches_the_exact_outline_sample() {
    let dir = tempfile::tempdir().unwrap();
    let index = common::fixture_dataset(dir.path());
    let report = run_contour_eval(&SegmenterSpec::Baseline, &index, &EvalConfig::default()).unwrap();
    let exact = report.samples.iter().find(|s| s.image_id == "0000003").unwrap();
    assert_eq!(exact.iou_at_1_contour, Some(1.0));
    for s in &report.samples {
        let v = s.iou_at_1_contour.unwrap();
        assert!(v > 0.3 && v <= 1.0, "{s:?}");
    }
}

#[test]
fn baseline_passes_generated_contours_through() {
    let dir = tempfile::tempdir().unwrap();
    let index = common::fixture_dataset(dir.path());
    let mined = mine_finetune_set(&SegmenterSpec::Baseline, &index, 5, -1.0, &EvalConfig::default()).unwrap();
    assert_eq!(mined.kept.len(), 5);
    for m in &mined.kept {
        let gt = BinaryMask::read_png(&m.mask_path).unwrap();
        assert_eq!(m.iou, iou(&m.contour, &gt).unwrap());
    }
}

#[test]
fn empty_segmenter_never_converges() {
    let dir = tempfile::tempdir().unwrap();
    let index = common::fixture_dataset(dir.path());
    let config = EvalConfig {
        max_clicks: 6,
        ..EvalConfig::default()
    };
    let report = run_click_eval(&SegmenterSpec::Empty, &index, &config).unwrap();
    for s in &report.samples {
        assert_eq!(s.noc_at_k, Some(NocValue::NotReached));
        assert_eq!(s.iou_per_click, vec![0.0; 6]);
    }
    assert_eq!(report.aggregates.mean_noc_at_k, Some(6.0));
    assert_eq!(report.aggregates.not_reached, 5);

    let mined = mine_finetune_set(&SegmenterSpec::Empty, &index, 1, 0.97, &config).unwrap();
    assert!(mined.kept.is_empty());
    assert_eq!(mined.total, 5);
}

#[test]
fn oracle_mining_keeps_everything() {
    let dir = tempfile::tempdir().unwrap();
    let index = common::fixture_dataset(dir.path());
    let mined = mine_finetune_set(&SegmenterSpec::Oracle, &index, 1, 0.97, &EvalConfig::default()).unwrap();
    assert_eq!(mined.kept.len(), 5);
    assert!(mined.kept.iter().all(|m| m.iou == 1.0));
    let again = mine_finetune_set(&SegmenterSpec::Oracle, &index, 1, 0.97, &EvalConfig::default()).unwrap();
    assert_eq!(
        mined.kept.iter().map(|m| &m.contour).collect::<Vec<_>>(),
        again.kept.iter().map(|m| &m.contour).collect::<Vec<_>>()
    );
    for (i, m) in mined.kept.iter().enumerate() {
        let gt = BinaryMask::read_png(&m.mask_path).unwrap();
        assert_eq!(
            m.contour,
            generate_contour(&gt, derive_seed(1, i as u64)).unwrap().filled
        );
    }
}

#[test]
fn baseline_clicks_improve_monotonically_on_convex_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let entries: Vec<_> = common::fixture_entries()
        .into_iter()
        .map(|mut e| {
            e.annotations.retain(|a| a.neg_contours.is_empty());
            e
        })
        .collect();
    let convex = vec![
        entries[0].clone(),
        contoursim::dataset::ImageEntry {
            image_id: "0000004".into(),
            annotations: vec![contoursim::dataset::AnnotationEntry {
                pos_contours: vec![common::circle_polygon(96, 96, 48.0, 48.0, 30.0, 24)],
                neg_contours: vec![],
                mask: common::disk(96, 96, 48.0, 48.0, 30.0),
            }],
        },
        entries[2].clone(),
    ];
    let index = contoursim::write_dataset(dir.path(), &convex).unwrap();
    for zoom_in in [false, true] {
        let config = EvalConfig {
            zoom_in,
            ..EvalConfig::default()
        };
        let report = run_click_eval(&SegmenterSpec::Baseline, &index, &config).unwrap();
        for s in &report.samples {
            assert!(s.error.is_none(), "{s:?}");
            for pair in s.iou_per_click.windows(2) {
                assert!(
                    pair[1] >= pair[0],
                    "{} zoom={zoom_in}: {:?}",
                    s.image_id,
                    s.iou_per_click
                );
            }
            assert!(s.iou_per_click.last().unwrap() > &0.5);
        }
    }
}

#[test]
fn aggregation_ignores_record_order() {
    let dir = tempfile::tempdir().unwrap();
    let index = common::fixture_dataset(dir.path());
    let config = EvalConfig {
        max_clicks: 5,
        ..EvalConfig::default()
    };
    let reference = run_click_eval(&SegmenterSpec::Baseline, &index, &config).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    for _ in 0..3 {
        let mut shuffled = index.clone();
        shuffled.records.shuffle(&mut rng);
        let report = run_click_eval(&SegmenterSpec::Baseline, &shuffled, &config).unwrap();
        assert_eq!(report, reference);
        assert_eq!(report.summary_csv(), reference.summary_csv());
    }
}

#[test]
fn curve_export_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let index = common::fixture_dataset(dir.path());
    let config = EvalConfig {
        max_clicks: 3,
        ..EvalConfig::default()
    };
    let contour = run_contour_eval(&SegmenterSpec::Baseline, &index, &config).unwrap();
    let report = run_click_eval(&SegmenterSpec::Baseline, &index, &config)
        .unwrap()
        .with_contour_results(&contour);
    let a = export_curves(&report).unwrap();
    let b = export_curves(&report).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.csv.lines().count(), 4);
    assert!(a.svg.starts_with("<svg") && a.svg.trim_end().ends_with("</svg>"));
}

#[test]
fn equivalent_clicks_examples() {
    assert_eq!(equivalent_clicks(&[0.7, 0.85, 0.93], 0.9), EquivalentClicks::Clicks(3));
    assert_eq!(equivalent_clicks(&[0.95], 0.9), EquivalentClicks::Clicks(1));
    assert_eq!(equivalent_clicks(&[0.5, 0.88, 0.7], 0.9), EquivalentClicks::BeyondMax);
}

/// Squared distance to the nearest pixel outside `region`, with everything
/// beyond the frame counted as outside.
fn brute_click(gt: &BinaryMask, pred: &BinaryMask) -> Option<(u32, u32, Polarity)> {
    let fn_ = gt.difference(pred).unwrap();
    let fp = pred.difference(gt).unwrap();
    if fn_.is_empty() && fp.is_empty() {
        return None;
    }
    let (region, pol) = if fn_.count() >= fp.count() {
        (fn_, Polarity::Positive)
    } else {
        (fp, Polarity::Negative)
    };
    let (w, h) = region.dims();
    let mut best: Option<(i64, u32, u32)> = None;
    for y in 0..h {
        for x in 0..w {
            if !region.get(x, y) {
                continue;
            }
            let mut d = i64::MAX;
            for qy in -1..=h as i64 {
                for qx in -1..=w as i64 {
                    if !region.get_signed(qx, qy) {
                        let (dx, dy) = (qx - x as i64, qy - y as i64);
                        d = d.min(dx * dx + dy * dy);
                    }
                }
            }
            if best.is_none_or(|b| d > b.0) {
                best = Some((d, x, y));
            }
        }
    }
    best.map(|(_, x, y)| (x, y, pol))
}

#[test]
fn click_examples() {
    let gt = common::rect(41, 41, 10, 10, 31, 31);
    let c = simulate_next_click(&gt, &BinaryMask::new(41, 41)).unwrap();
    assert_eq!((c.x, c.y, c.polarity), (20, 20, Polarity::Positive));

    let gt = common::rect(60, 60, 5, 5, 20, 20);
    let blob = common::disk(60, 60, 45.5, 44.5, 8.0);
    let mut pred = gt.union(&blob).unwrap();
    pred.set(5, 5, false);
    let c = simulate_next_click(&gt, &pred).unwrap();
    assert_eq!((c.x, c.y, c.polarity), (45, 44, Polarity::Negative));

    let gt = common::rect(20, 10, 0, 0, 4, 4);
    let pred = common::rect(20, 10, 0, 0, 4, 4)
        .difference(&common::rect(20, 10, 0, 0, 2, 2))
        .unwrap()
        .union(&common::rect(20, 10, 10, 0, 12, 2))
        .unwrap();
    assert_eq!(simulate_next_click(&gt, &pred).unwrap().polarity, Polarity::Positive);
    assert!(simulate_next_click(&gt, &gt).is_err());
}

fn mask_strategy(w: u32, h: u32) -> impl Strategy<Value = BinaryMask> {
    prop::collection::vec(prop::bool::weighted(0.4), (w * h) as usize)
        .prop_map(move |v| BinaryMask::from_vec(w, h, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn click_matches_distance_oracle(gt in mask_strategy(13, 11), pred in mask_strategy(13, 11)) {
        let expected = brute_click(&gt, &pred);
        match simulate_next_click(&gt, &pred) {
            Ok(c) => prop_assert_eq!(Some((c.x, c.y, c.polarity)), expected),
            Err(_) => prop_assert!(expected.is_none()),
        }
    }

    #[test]
    fn equivalent_clicks_match_linear_scan(curve in prop::collection::vec(0.0..=1.0f64, 1..25), target in 0.0..=1.0f64) {
        let mut expected = EquivalentClicks::BeyondMax;
        for (i, &v) in curve.iter().enumerate() {
            if v >= target {
                expected = EquivalentClicks::Clicks(i as u32 + 1);
                break;
            }
        }
        prop_assert_eq!(equivalent_clicks(&curve, target), expected);
    }

    #[test]
    fn zoom_pixels_round_trip(x0 in 0u32..150, y0 in 0u32..90, bw in 1u32..50, bh in 1u32..30, px in 0.0..1.0f64, py in 0.0..1.0f64) {
        let (w, h) = (200, 120);
        let pos = common::rect(w, h, x0, y0, (x0 + bw).min(w), (y0 + bh).min(h));
        let enc = InteractionEncoding { positive: pos, ..InteractionEncoding::blank(w, h, Default::default()) };
        let (_, win) = zoom_in(&enc, 1.4, None).unwrap();
        let x = win.crop.x0 + (px * win.crop.width() as f64) as u32;
        let y = win.crop.y0 + (py * win.crop.height() as f64) as u32;
        let (u, v) = win.forward_pixel(x, y);
        prop_assert_eq!(win.inverse_pixel(u, v), (x, y));
        let p = (x as f64 + 0.25, y as f64 + 0.75);
        let back = win.inverse(win.forward(p));
        prop_assert!((back.0 - p.0).abs() < 1e-9 && (back.1 - p.1).abs() < 1e-9);
    }
}

#[test]
fn zoom_examples() {
    let enc = |pos: BinaryMask| {
        let (w, h) = pos.dims();
        InteractionEncoding {
            positive: pos,
            ..InteractionEncoding::blank(w, h, Default::default())
        }
    };
    let (cropped, win) = zoom_in(&enc(common::rect(1000, 1000, 450, 450, 550, 550)), 1.4, None).unwrap();
    assert_eq!(
        (win.crop.x0, win.crop.y0, win.crop.x1, win.crop.y1),
        (430, 430, 570, 570)
    );
    assert_eq!(cropped.dims(), (140, 140));
    let (_, win) = zoom_in(&enc(BinaryMask::full(64, 48)), 1.4, None).unwrap();
    assert_eq!((win.crop.x0, win.crop.y0, win.crop.x1, win.crop.y1), (0, 0, 64, 48));
    assert!(zoom_in(&enc(BinaryMask::new(8, 8)), 1.4, None).is_err());
}

struct Split;

impl Segmenter for Split {
    fn name(&self) -> &str {
        "split"
    }

    fn predict(&mut self, q: &SegmenterQuery) -> Result<SegmenterAnswer, SegmenterError> {
        let (w, h) = q.dims();
        let v = if q.view.flipped { 0.0 } else { 1.0 };
        Ok(SegmenterAnswer {
            probabilities: ProbabilityMask::from_fn(w, h, |_, _| v),
        })
    }
}

#[test]
fn flip_average_examples() {
    let gt = common::l_shape(30, 20, 3, 2, 25, 18, 5);
    let mut enc = InteractionEncoding::blank(30, 20, Default::default());
    enc.positive = gt.clone();
    let query = SegmenterQuery::new(enc).with_ground_truth(gt.clone());

    let halves = flip_average(&mut Split, &query).unwrap();
    assert!(halves.probabilities.values().iter().all(|&v| v == 0.5));

    let mut oracle = contoursim::segmenter::OracleSegmenter;
    assert_eq!(
        flip_average(&mut oracle, &query).unwrap().probabilities,
        gt.to_probability()
    );

    let sym = common::rect(30, 20, 5, 4, 25, 16);
    let mut enc = InteractionEncoding::blank(30, 20, Default::default());
    enc.positive = sym;
    let q = SegmenterQuery::new(enc);
    let single = predict_filled_baseline(&q).unwrap();
    let mut baseline = contoursim::segmenter::FilledBaseline;
    assert_eq!(flip_average(&mut baseline, &q).unwrap(), single);
}
