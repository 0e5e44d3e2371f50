use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use logicpo_core::eval::{
    majority_vote, render_table, MetricsReport, score, score_bucketed, weighted_f1, Bucket, RunPredictions, TableRow,
    RATE_SUM_TOLERANCE,
};
use logicpo_core::story::Label;

const ALL: [Label; 4] = [Label::True, Label::False, Label::Uncertain, Label::Error];

struct Fixture {
    golds: Vec<Label>,
    counts: Vec<usize>,
    runs: Vec<RunPredictions>,
}

fn fixture(rng: &mut ChaCha8Rng) -> Fixture {
    let n = rng.gen_range(1..=60);
    let k = rng.gen_range(1..=5);
    let golds = (0..n).map(|_| *Label::GOLD.choose(rng).unwrap()).collect();
    let counts = (0..n).map(|_| rng.gen_range(1..=9)).collect();
    let runs = (0..k)
        .map(|r| RunPredictions { run_index: r, predictions: (0..n).map(|_| *ALL.choose(rng).unwrap()).collect() })
        .collect();
    Fixture { golds, counts, runs }
}

/// Support-weighted F1 from confusion counts, written out longhand.
fn reference_weighted_f1(golds: &[Label], preds: &[Label]) -> f64 {
    let mut total = 0.0;
    for c in Label::GOLD {
        let support = golds.iter().filter(|g| **g == c).count();
        if support == 0 {
            continue;
        }
        let mut tp = 0;
        let mut fp = 0;
        let mut fneg = 0;
        for (g, p) in golds.iter().zip(preds) {
            match (*g == c, *p == c) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fneg += 1,
                (false, false) => {}
            }
        }
        let f1 = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fneg) as f64 };
        total += support as f64 / golds.len() as f64 * f1;
    }
    total
}

#[test]
fn rates_always_sum_to_one_hundred() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let f = fixture(&mut rng);
        let r = score_bucketed(&f.golds, &f.counts, &f.runs).unwrap();
        assert!((r.rate_sum() - 100.0).abs() <= RATE_SUM_TOLERANCE, "{}", r.rate_sum());
        for (_, b) in &r.buckets {
            assert!((b.rate_sum() - 100.0).abs() <= RATE_SUM_TOLERANCE);
        }
        render_table(&[TableRow::from_report("x", &r)]).unwrap();
    }
}

#[test]
fn weighted_f1_matches_confusion_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        let f = fixture(&mut rng);
        let p = &f.runs[0].predictions;
        assert!((weighted_f1(&f.golds, p) - reference_weighted_f1(&f.golds, p)).abs() < 1e-12);
    }
}

#[test]
fn story_order_does_not_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let f = fixture(&mut rng);
        let mut order: Vec<usize> = (0..f.golds.len()).collect();
        order.shuffle(&mut rng);
        let golds: Vec<Label> = order.iter().map(|&i| f.golds[i]).collect();
        let runs: Vec<RunPredictions> = f
            .runs
            .iter()
            .map(|r| RunPredictions { run_index: r.run_index, predictions: order.iter().map(|&i| r.predictions[i]).collect() })
            .collect();
        let a = score(&f.golds, &f.runs).unwrap();
        let b = score(&golds, &runs).unwrap();
        for (x, y) in [
            (a.correct_pct, b.correct_pct),
            (a.incorrect_pct, b.incorrect_pct),
            (a.error_pct, b.error_pct),
            (a.weighted_f1, b.weighted_f1),
            (a.true_f1, b.true_f1),
        ] {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn majority_of_one_run_is_that_run() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let f = fixture(&mut rng);
        let one = [f.runs[0].clone()];
        assert_eq!(majority_vote(&one).predictions, f.runs[0].predictions);
    }
}

#[test]
fn majority_ties_and_errors() {
    let run = |p: Vec<Label>| RunPredictions { run_index: 0, predictions: p };
    use Label::*;
    let runs = [run(vec![True, Error, True]), run(vec![False, Error, Error]), run(vec![Uncertain, Error, True])];
    assert_eq!(majority_vote(&runs).predictions, vec![Uncertain, Error, True]);
}

#[test]
fn buckets_recombine_to_the_whole() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let f = fixture(&mut rng);
        let r = score_bucketed(&f.golds, &f.counts, &f.runs).unwrap();
        let stories: usize = r.buckets.iter().map(|(_, b)| b.stories).sum();
        assert_eq!(stories, f.golds.len());
        let picks: [fn(&MetricsReport) -> f64; 2] = [|m| m.correct_pct, |m| m.error_pct];
        for pick in picks {
            let weighted: f64 = r.buckets.iter().map(|(_, b)| pick(b) * b.stories as f64).sum::<f64>() / f.golds.len() as f64;
            assert!((weighted - pick(&r)).abs() < 1e-9);
        }
        for (b, sub) in &r.buckets {
            let expected = f.counts.iter().filter(|c| Bucket::of(**c) == *b).count();
            assert_eq!(sub.stories, expected);
        }
    }
}
