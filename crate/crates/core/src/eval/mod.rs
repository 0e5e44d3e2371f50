//! Run-averaged correctness rates, weighted F1 and majority voting.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::story::Label;

/// Tolerance for the correct + incorrect + error = 100 identity.
pub const RATE_SUM_TOLERANCE: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunPredictions {
    pub run_index: usize,
    pub predictions: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no runs to score")]
    NoRuns,
    #[error("no stories to score")]
    NoStories,
    #[error("run {run} has {got} predictions for {expected} stories")]
    Misaligned { run: usize, got: usize, expected: usize },
    #[error("gold label {0} is not a logical label")]
    BadGold(Label),
    #[error("row `{name}` rates sum to {sum:.2}, not 100")]
    RateSum { name: String, sum: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bucket {
    /// 1 or 2 premises.
    Small,
    /// 3 to 5 premises.
    Medium,
    /// More than 5 premises.
    Large,
}

impl Bucket {
    pub fn of(premises: usize) -> Bucket {
        match premises {
            0..=2 => Bucket::Small,
            3..=5 => Bucket::Medium,
            _ => Bucket::Large,
        }
    }

    pub const ALL: [Bucket; 3] = [Bucket::Small, Bucket::Medium, Bucket::Large];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub k: usize,
    pub stories: usize,
    pub correct_pct: f64,
    pub incorrect_pct: f64,
    pub error_pct: f64,
    pub weighted_f1: f64,
    pub true_f1: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub buckets: Vec<(Bucket, MetricsReport)>,
}

impl MetricsReport {
    pub fn rate_sum(&self) -> f64 {
        self.correct_pct + self.incorrect_pct + self.error_pct
    }
}

fn check(golds: &[Label], runs: &[RunPredictions]) -> Result<(), EvalError> {
    if runs.is_empty() {
        return Err(EvalError::NoRuns);
    }
    if golds.is_empty() {
        return Err(EvalError::NoStories);
    }
    if let Some(g) = golds.iter().find(|g| !g.is_gold()) {
        return Err(EvalError::BadGold(*g));
    }
    for r in runs {
        if r.predictions.len() != golds.len() {
            return Err(EvalError::Misaligned { run: r.run_index, got: r.predictions.len(), expected: golds.len() });
        }
    }
    Ok(())
}

/// Rates and F1 computed per run and averaged over runs.
pub fn score(golds: &[Label], runs: &[RunPredictions]) -> Result<MetricsReport, EvalError> {
    check(golds, runs)?;
    let n = golds.len() as f64;
    let (mut c, mut i, mut e, mut wf, mut tf) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in runs {
        let correct = golds.iter().zip(&r.predictions).filter(|(g, p)| g == p).count() as f64;
        let errors = r.predictions.iter().filter(|p| **p == Label::Error).count() as f64;
        c += 100.0 * correct / n;
        e += 100.0 * errors / n;
        i += 100.0 * (n - correct - errors) / n;
        wf += weighted_f1(golds, &r.predictions);
        tf += class_f1(golds, &r.predictions, Label::True);
    }
    let k = runs.len() as f64;
    Ok(MetricsReport {
        k: runs.len(),
        stories: golds.len(),
        correct_pct: c / k,
        incorrect_pct: i / k,
        error_pct: e / k,
        weighted_f1: wf / k,
        true_f1: tf / k,
        buckets: Vec::new(),
    })
}

/// F1 of one class. A class absent from both golds and predictions scores 1.
pub fn class_f1(golds: &[Label], preds: &[Label], class: Label) -> f64 {
    let tp = golds.iter().zip(preds).filter(|(g, p)| **g == class && **p == class).count() as f64;
    let gold = golds.iter().filter(|g| **g == class).count() as f64;
    let pred = preds.iter().filter(|p| **p == class).count() as f64;
    if gold == 0.0 && pred == 0.0 {
        return 1.0;
    }
    if tp == 0.0 {
        return 0.0;
    }
    let (p, r) = (tp / pred, tp / gold);
    2.0 * p * r / (p + r)
}

/// Support-weighted F1 over the gold classes. `Error` predictions count
/// against recall and precision of nothing, since no gold is `Error`.
pub fn weighted_f1(golds: &[Label], preds: &[Label]) -> f64 {
    let n = golds.len() as f64;
    Label::GOLD
        .iter()
        .map(|&c| {
            let support = golds.iter().filter(|g| **g == c).count() as f64;
            if support == 0.0 {
                0.0
            } else {
                support / n * class_f1(golds, preds, c)
            }
        })
        .sum()
}

/// Modal non-`Error` label per story; ties go to Uncertain, then False,
/// then True. Stories with only `Error` predictions stay `Error`.
pub fn majority_vote(runs: &[RunPredictions]) -> RunPredictions {
    let len = runs.first().map_or(0, |r| r.predictions.len());
    let predictions = (0..len)
        .map(|i| {
            let count = |l: Label| runs.iter().filter(|r| r.predictions.get(i) == Some(&l)).count();
            [Label::Uncertain, Label::False, Label::True]
                .into_iter()
                .map(|l| (l, count(l)))
                .filter(|(_, n)| *n > 0)
                .fold(None, |best: Option<(Label, usize)>, cur| match best {
                    Some(b) if b.1 >= cur.1 => Some(b),
                    _ => Some(cur),
                })
                .map_or(Label::Error, |(l, _)| l)
        })
        .collect();
    RunPredictions { run_index: 0, predictions }
}

/// Scores overall and per premise-count bucket; empty buckets are omitted.
pub fn score_bucketed(golds: &[Label], premise_counts: &[usize], runs: &[RunPredictions]) -> Result<MetricsReport, EvalError> {
    let mut report = score(golds, runs)?;
    if premise_counts.len() != golds.len() {
        return Err(EvalError::Misaligned { run: usize::MAX, got: premise_counts.len(), expected: golds.len() });
    }
    report.buckets = bucket_by_length(golds, premise_counts, runs)?;
    Ok(report)
}

pub fn bucket_by_length(
    golds: &[Label],
    premise_counts: &[usize],
    runs: &[RunPredictions],
) -> Result<Vec<(Bucket, MetricsReport)>, EvalError> {
    check(golds, runs)?;
    let mut out = Vec::new();
    for b in Bucket::ALL {
        let idx: Vec<usize> = (0..golds.len()).filter(|&i| Bucket::of(premise_counts[i]) == b).collect();
        if idx.is_empty() {
            continue;
        }
        let g: Vec<Label> = idx.iter().map(|&i| golds[i]).collect();
        let rs: Vec<RunPredictions> = runs
            .iter()
            .map(|r| RunPredictions { run_index: r.run_index, predictions: idx.iter().map(|&i| r.predictions[i]).collect() })
            .collect();
        out.push((b, score(&g, &rs)?));
    }
    Ok(out)
}

/// One line of the results table; F1 columns are on a 0-100 scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub name: String,
    pub correct: f64,
    pub incorrect: f64,
    pub error: f64,
    pub overall_f1: f64,
    pub true_f1: f64,
}

impl TableRow {
    pub fn from_report(name: impl Into<String>, r: &MetricsReport) -> Self {
        Self {
            name: name.into(),
            correct: r.correct_pct,
            incorrect: r.incorrect_pct,
            error: r.error_pct,
            overall_f1: 100.0 * r.weighted_f1,
            true_f1: 100.0 * r.true_f1,
        }
    }

    pub fn rate_sum(&self) -> f64 {
        self.correct + self.incorrect + self.error
    }
}

/// Renders rows as a fixed-width table, rejecting any row whose three rate
/// columns do not sum to 100.
pub fn render_table(rows: &[TableRow]) -> Result<String, EvalError> {
    let width = rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(0).max(6);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$} | {:>9} | {:>9} | {:>7} | {:>11} | {:>8}",
        "System", "Correct↑", "Incorrect", "Error↓", "Overall F1↑", "True F1↑"
    );
    let _ = writeln!(out, "{}", "-".repeat(width + 67));
    for r in rows {
        let sum = r.rate_sum();
        if (sum - 100.0).abs() > RATE_SUM_TOLERANCE {
            return Err(EvalError::RateSum { name: r.name.clone(), sum });
        }
        let _ = writeln!(
            out,
            "{:<width$} | {:>9.2} | {:>9.2} | {:>7.2} | {:>11.2} | {:>8.2}",
            r.name, r.correct, r.incorrect, r.error, r.overall_f1, r.true_f1
        );
    }
    out.push_str("F1 treats Error as a predicted-only class with no gold support.\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Error as E, False as F, True as T, Uncertain as U};

    fn run(p: &[Label]) -> RunPredictions {
        RunPredictions { run_index: 0, predictions: p.to_vec() }
    }

    #[test]
    fn perfect_run() {
        let g = [T, F, U, T];
        let r = score(&g, &[run(&g)]).unwrap();
        assert_eq!((r.correct_pct, r.incorrect_pct, r.error_pct), (100.0, 0.0, 0.0));
        assert_eq!((r.weighted_f1, r.true_f1), (1.0, 1.0));
    }

    #[test]
    fn errors_are_separate_from_incorrect() {
        let r = score(&[T, T, F, U], &[run(&[T, E, U, U])]).unwrap();
        assert_eq!((r.correct_pct, r.incorrect_pct, r.error_pct), (50.0, 25.0, 25.0));
    }

    #[test]
    fn misaligned_runs() {
        assert!(matches!(score(&[T, F], &[run(&[T])]), Err(EvalError::Misaligned { .. })));
        assert_eq!(score(&[T], &[]), Err(EvalError::NoRuns));
    }

    #[test]
    fn votes() {
        let rs = |cols: &[&[Label]]| cols.iter().map(|c| run(c)).collect::<Vec<_>>();
        assert_eq!(majority_vote(&rs(&[&[T], &[T], &[F]])).predictions, vec![T]);
        assert_eq!(majority_vote(&rs(&[&[T], &[F]])).predictions, vec![F]);
        assert_eq!(majority_vote(&rs(&[&[T], &[U]])).predictions, vec![U]);
        assert_eq!(majority_vote(&rs(&[&[E], &[E], &[E]])).predictions, vec![E]);
        assert_eq!(majority_vote(&rs(&[&[E], &[E], &[T]])).predictions, vec![T]);
    }

    #[test]
    fn bucket_boundaries() {
        assert_eq!(Bucket::of(2), Bucket::Small);
        assert_eq!(Bucket::of(5), Bucket::Medium);
        assert_eq!(Bucket::of(6), Bucket::Large);
    }

    #[test]
    fn table_rejects_bad_rows() {
        let row = TableRow { name: "x".into(), correct: 50.0, incorrect: 20.0, error: 20.0, overall_f1: 0.0, true_f1: 0.0 };
        assert!(matches!(render_table(&[row]), Err(EvalError::RateSum { .. })));
    }
}
