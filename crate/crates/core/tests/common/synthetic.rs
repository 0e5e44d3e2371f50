//! Twenty small stories with hand-labeled candidate pools.

use logicpo_core::story::{evaluate_block, CandidateRecord, GenerationMeta, Label, NlStory};

pub struct Fixture {
    pub corpus: Vec<NlStory>,
    pub candidates: Vec<CandidateRecord>,
    /// Label each candidate must receive, in `candidates` order. `None` for
    /// generation failures.
    pub hand_labels: Vec<Option<Label>>,
}

pub struct Tally {
    pub sft: [usize; 3],
    pub pref_sampled: [usize; 3],
    pub pref_all: [usize; 3],
    pub stories_without_match: usize,
}

/// Counts per gold label (True, False, Uncertain), worked out by hand: stories
/// cycle True/False/Uncertain, every fifth story has no correct candidate, and
/// matched stories yield two distinct correct and two distinct wrong texts.
pub const TALLY: Tally = Tally { sft: [12, 10, 10], pref_sampled: [12, 10, 10], pref_all: [24, 20, 20], stories_without_match: 4 };

fn meta(i: usize) -> GenerationMeta {
    GenerationMeta { model_name: "fixture".into(), shots: 2, temperature: 0.7, sample_index: i, timestamp: None }
}

fn completion(texts: &[&str], fols: &[String]) -> String {
    format!("Translation follows.\n{}", evaluate_block(texts, fols))
}

pub fn fixture() -> Fixture {
    let mut corpus = Vec::new();
    let mut candidates = Vec::new();
    let mut hand_labels = Vec::new();
    for i in 0..20 {
        let id = format!("s{i:02}");
        let k = format!("Obj{i}");
        let (a, b, c) = (format!("Alpha{i}"), format!("Beta{i}"), format!("Gamma{i}"));
        let (gold, premises, conclusion, wrong): (Label, [String; 2], String, [String; 3]) = match i % 3 {
            0 => (
                Label::True,
                [format!("all x. ({a}(x) -> {b}(x))"), format!("{a}({k})")],
                format!("{b}({k})"),
                [format!("all x. ({a}(x) -> {b}(x))"), format!("{a}({k})"), format!("-{b}({k})")],
            ),
            1 => (
                Label::False,
                [format!("all x. ({a}(x) -> -{b}(x))"), format!("{a}({k})")],
                format!("{b}({k})"),
                [format!("all x. ({a}(x) -> -{b}(x))"), format!("{a}({k})"), format!("-{b}({k})")],
            ),
            _ => (
                Label::Uncertain,
                [format!("all x. ({a}(x) -> {b}(x))"), format!("{c}({k})")],
                format!("{b}({k})"),
                [format!("all x. ({c}(x) -> {b}(x))"), format!("{c}({k})"), format!("{b}({k})")],
            ),
        };
        let wrong_label = match gold {
            Label::True => Label::False,
            Label::False => Label::True,
            _ => Label::True,
        };
        let texts = ["Every alpha is a beta.", "The object is an alpha.", "The object is a beta."];
        corpus.push(NlStory {
            id: id.clone(),
            premises: texts[..2].iter().map(|t| t.to_string()).collect(),
            conclusion: texts[2].to_string(),
            gold_label: gold,
            gold_fol: None,
        });

        let correct: Vec<String> = premises.iter().cloned().chain([conclusion.clone()]).collect();
        // Contrapositive of the rule: same label, different text.
        let variant: Vec<String> = match i % 3 {
            0 => vec![format!("all y. (-{b}(y) -> -{a}(y))"), premises[1].clone(), conclusion.clone()],
            1 => vec![format!("all y. ({b}(y) -> -{a}(y))"), premises[1].clone(), conclusion.clone()],
            _ => vec![format!("all y. (-{b}(y) -> -{a}(y))"), premises[1].clone(), conclusion.clone()],
        };
        let mut pool: Vec<(CandidateRecord, Option<Label>)> = Vec::new();
        let mut n = 0;
        let mut push = |raw: Option<String>, label: Option<Label>| {
            let rec = match raw {
                Some(r) => CandidateRecord::new(&id, meta(n), r, Some(2)),
                None => CandidateRecord::generation_failure(&id, meta(n), "timed out"),
            };
            n += 1;
            pool.push((rec, label));
        };
        if i % 5 != 4 {
            push(Some(completion(&texts, &correct)), Some(gold));
            push(Some(completion(&texts, &variant)), Some(gold));
            push(Some(completion(&texts, &correct)), Some(gold));
        }
        push(Some(completion(&texts, &wrong)), Some(wrong_label));
        push(Some(completion(&texts, &wrong)), Some(wrong_label));
        push(Some(format!("<EVALUATE>\nFOL:\t{a}({k}\nFOL:\t{b}({k})\n</EVALUATE>\n")), Some(Label::Error));
        push(None, None);
        for (rec, label) in pool {
            candidates.push(rec);
            hand_labels.push(label);
        }
    }
    Fixture { corpus, candidates, hand_labels }
}
