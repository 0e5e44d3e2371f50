mod input;
mod serve;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use logicpo_core::dataset::{self, BuildConfig, BuildManifest, Pairing, Targets};
use logicpo_core::eval::{majority_vote, render_table, score, score_bucketed, RunPredictions, TableRow};
use logicpo_core::lint::{lint_with, tag_failures, LintOptions};
use logicpo_core::oracle::{classify_with, cross_check, emit_external, CrossCheckOptions, LabelOptions, LabelResult};
use logicpo_core::prover::{refute_with, Budget};
use logicpo_core::clausify::to_clauses;
use logicpo_core::story::{bundled_exemplars, load_corpus, Corpus, FolStory, Label, NlStory};
use logicpo_core::syntax::{parse_formula, render, Dialect};
use logicpo_gen::{generate, Cache, GenConfig, RetryPolicy};

/// Marks errors caused by bad flags or missing inputs (exit code 2).
#[derive(Debug)]
struct ConfigError(String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ConfigError(msg.into()))
}

fn require_file(p: &Path) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(config_error(format!("no such file: {}", p.display())))
    }
}

#[derive(Parser)]
#[command(name = "logicpo", version, about = "Natural-language-to-FOL translation pipeline with a resolution-based label oracle")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// More log output on standard error (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct BudgetArgs {
    /// Wall-clock limit per refutation attempt, in seconds.
    #[arg(long, default_value_t = Budget::default().max_seconds)]
    max_seconds: f64,
    /// Limit on clauses kept by the prover.
    #[arg(long, default_value_t = Budget::default().max_kept_clauses)]
    max_kept_clauses: usize,
    /// Limit on given-clause iterations.
    #[arg(long, default_value_t = Budget::default().max_iterations)]
    max_iterations: usize,
    /// Derived clauses with deeper terms are discarded.
    #[arg(long, default_value_t = Budget::default().max_term_depth)]
    max_term_depth: usize,
}

impl BudgetArgs {
    fn budget(&self) -> Result<Budget> {
        let b = Budget {
            max_seconds: self.max_seconds,
            max_kept_clauses: self.max_kept_clauses,
            max_iterations: self.max_iterations,
            max_term_depth: self.max_term_depth,
        };
        b.validate().map_err(config_error)?;
        Ok(b)
    }

    fn options(&self) -> Result<LabelOptions> {
        Ok(LabelOptions::from(self.budget()?))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse formulas and print them back in canonical form.
    Parse {
        /// Formulas to parse; with --file, read one per line instead.
        formulas: Vec<String>,
        #[arg(long)]
        file: Option<PathBuf>,
        /// Output notation: ascii or unicode.
        #[arg(long, default_value = "ascii")]
        dialect: Dialect,
    },
    /// Try to prove the conclusion of a story and print the proof.
    Prove {
        #[arg(long)]
        story: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Print the logical label (True, False, Uncertain or Error) of a story.
    Classify {
        #[arg(long)]
        story: PathBuf,
        /// Print the full result as JSON.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Report predicate-consistency problems in a story.
    Lint {
        #[arg(long)]
        story: PathBuf,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        lint: LintArgs,
    },
    /// Sample candidate translations from a chat-completion endpoint.
    Gen(GenArgs),
    /// Label candidate records against a corpus and write labeled records.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Build SFT and preference datasets from labeled candidates.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        /// Candidate records; unlabeled ones are labeled first.
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Pair every chosen with every rejected sample (all) or pair randomly
        /// without replacement (sampled).
        #[arg(long, default_value = "sampled")]
        pairing: Pairing,
        #[arg(long)]
        sft_target: Option<usize>,
        #[arg(long)]
        pref_target: Option<usize>,
        /// Exemplars to include in stored prompts.
        #[arg(long, default_value_t = 0)]
        prompt_shots: usize,
        /// Exemplar corpus file (default: the two bundled examples).
        #[arg(long)]
        exemplars: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Score predictions against gold labels.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        /// Lines of {"story_id", "run", "label"}.
        #[arg(long)]
        predictions: PathBuf,
        /// Reduce runs to one by majority vote first.
        #[arg(long)]
        majority: bool,
        /// Add per-context-length rows.
        #[arg(long)]
        buckets: bool,
        /// Row name in the table.
        #[arg(long, default_value = "system")]
        name: String,
        /// Also write the report as JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Summaries: dataset counts, or label and failure histograms of candidates.
    Stats {
        /// Dataset directory written by `build`.
        #[arg(long, conflicts_with_all = ["corpus", "candidates"])]
        dataset: Option<PathBuf>,
        #[arg(long, requires = "candidates")]
        corpus: Option<PathBuf>,
        /// Labeled candidate records written by `ingest`.
        #[arg(long, requires = "corpus")]
        candidates: Option<PathBuf>,
    },
    /// Compare labels with an external Prover9 binary.
    Crosscheck {
        /// Story files.
        #[arg(long = "story")]
        stories: Vec<PathBuf>,
        /// Corpus whose gold FOL annotations are checked.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value = "prover9")]
        prover9: PathBuf,
        /// Print Prover9 input for each story instead of running it.
        #[arg(long)]
        emit: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Serve classification over HTTP (POST /classify).
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Args)]
struct LintArgs {
    #[arg(long, default_value_t = LintOptions::default().max_edit_distance)]
    max_edit_distance: usize,
    #[arg(long, default_value_t = LintOptions::default().max_prefix_suffix)]
    max_prefix_suffix: usize,
    #[arg(long, default_value_t = LintOptions::default().min_edit_length)]
    min_edit_length: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Exemplar corpus file (default: the two bundled examples).
    #[arg(long)]
    exemplars: Option<PathBuf>,
    /// Candidate records are written here.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, default_value_t = GenConfig::default().endpoint)]
    endpoint: String,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "OPENAI_API_KEY")]
    api_key_env: String,
    #[arg(long = "model", required = true)]
    models: Vec<String>,
    #[arg(long = "temperature", default_values_t = GenConfig::default().temperatures)]
    temperatures: Vec<f64>,
    #[arg(long = "shots", default_values_t = GenConfig::default().shots)]
    shots: Vec<usize>,
    #[arg(long, default_value_t = GenConfig::default().samples_per_story)]
    samples_per_story: usize,
    #[arg(long)]
    samples_per_combination: Option<usize>,
    #[arg(long, default_value_t = GenConfig::default().max_in_flight)]
    max_in_flight: usize,
    #[arg(long, default_value_t = RetryPolicy::default().max_attempts)]
    max_attempts: usize,
    #[arg(long, default_value_t = RetryPolicy::default().backoff_base_ms)]
    backoff_ms: u64,
    #[arg(long, default_value_t = GenConfig::default().request_timeout_secs)]
    timeout_secs: u64,
    #[arg(long)]
    max_tokens: Option<u32>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(2);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
        log::warn!("worker pool: {e}");
    }
    match run(cli.command, cli.seed, workers) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cmd: Command, seed: u64, workers: usize) -> Result<ExitCode> {
    match cmd {
        Command::Parse { formulas, file, dialect } => cmd_parse(formulas, file, dialect),
        Command::Prove { story, budget } => {
            let opts = budget.options()?;
            let story = story_arg(&story)?;
            let clauses = to_clauses(&story, &opts.clausify)?;
            let outcome = refute_with(&clauses.entailment_problem(), &opts.prover);
            println!("status: {:?}", outcome.status);
            println!("kept clauses: {}, iterations: {}, {:.3}s", outcome.kept_clause_count, outcome.iterations, outcome.elapsed_seconds);
            if let Some(proof) = &outcome.proof {
                print!("{proof}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { story, json, budget } => {
            let opts = budget.options()?;
            let story = story_arg(&story)?;
            let r = classify_with(&story, &opts);
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print_label(&r);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Lint { story, json, lint } => {
            let story = story_arg(&story)?;
            let opts = LintOptions {
                max_edit_distance: lint.max_edit_distance,
                max_prefix_suffix: lint.max_prefix_suffix,
                min_edit_length: lint.min_edit_length,
            };
            let diags = lint_with(&story, &opts);
            if json {
                println!("{}", serde_json::to_string_pretty(&diags)?);
            } else {
                for d in &diags {
                    println!("{d}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen(args) => cmd_gen(args),
        Command::Ingest { corpus, candidates, out, budget } => {
            let opts = budget.options()?;
            let corpus = corpus_arg(&corpus)?;
            let cands = labeled_candidates(&corpus, &candidates, &opts, true)?;
            let mut text = String::new();
            for c in &cands {
                text.push_str(&serde_json::to_string(c)?);
                text.push('\n');
            }
            dataset::write_atomic(&out, text.as_bytes()).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("labeled {} candidates", cands.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Build { corpus, candidates, out, pairing, sft_target, pref_target, prompt_shots, exemplars, budget } => {
            let opts = budget.options()?;
            let corpus = corpus_arg(&corpus)?;
            let exemplars = exemplars_arg(exemplars.as_deref())?;
            let cands = labeled_candidates(&corpus, &candidates, &opts, false)?;
            let cfg = BuildConfig { seed, pairing, targets: Targets { sft: sft_target, pref: pref_target }, prompt_shots };
            let ds = dataset::build(&corpus.stories, &cands, &exemplars, &cfg).map_err(|e| config_error(e.to_string()))?;
            let manifest = BuildManifest {
                seed,
                pairing,
                targets: cfg.targets,
                prompt_shots,
                budget: opts.prover.budget,
                stats: ds.stats.clone(),
            };
            dataset::emit(&ds, &out, &manifest).with_context(|| format!("writing {}", out.display()))?;
            print!("{}", ds.stats.table());
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { corpus, predictions, majority, buckets, name, report } => {
            cmd_eval(&corpus, &predictions, majority, buckets, &name, report.as_deref())
        }
        Command::Stats { dataset, corpus, candidates } => cmd_stats(dataset, corpus, candidates),
        Command::Crosscheck { stories, corpus, prover9, emit, budget } => {
            let budget = budget.budget()?;
            let mut list: Vec<FolStory> = Vec::new();
            for p in &stories {
                list.push(story_arg(p)?);
            }
            if let Some(c) = corpus {
                list.extend(corpus_arg(&c)?.stories.into_iter().filter_map(|s| s.gold_fol));
            }
            if emit {
                for s in &list {
                    println!("{}", emit_external(s, Some(budget.max_seconds.ceil() as u64)));
                }
                return Ok(ExitCode::SUCCESS);
            }
            let report = cross_check(&list, &CrossCheckOptions { binary: prover9, workers, budget });
            if let Some(why) = &report.skipped {
                println!("skipped: {why}");
                return Ok(ExitCode::SUCCESS);
            }
            for r in &report.rows {
                println!("{}\tinternal={}\texternal={}\t{}", r.index, r.internal, r.external, if r.agree { "agree" } else { "DISAGREE" });
            }
            match report.agreement_rate() {
                Some(rate) => println!("agreement: {}/{} ({:.1}%)", report.agreements(), report.rows.len(), 100.0 * rate),
                None => println!("no stories"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { addr, budget } => {
            serve::run(&addr, budget.options()?, workers)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_label(r: &LabelResult) {
    match (&r.error_reason, r.budget_limited) {
        (Some(reason), _) => println!("{} ({reason:?})", r.label),
        (None, true) => println!("{} (budget limited)", r.label),
        (None, false) => println!("{}", r.label),
    }
}

fn story_arg(p: &Path) -> Result<FolStory> {
    require_file(p)?;
    input::load_story(p)
}

fn corpus_arg(p: &Path) -> Result<Corpus> {
    require_file(p)?;
    let c = load_corpus(p).with_context(|| format!("reading {}", p.display()))?;
    for d in &c.diagnostics {
        log::warn!("{}: {d}", p.display());
    }
    Ok(c)
}

fn exemplars_arg(p: Option<&Path>) -> Result<Vec<(NlStory, FolStory)>> {
    let Some(p) = p else { return Ok(bundled_exemplars()) };
    let corpus = corpus_arg(p)?;
    let n = corpus.stories.len();
    let out: Vec<_> = corpus.stories.into_iter().filter_map(|s| s.gold_fol.clone().map(|f| (s, f))).collect();
    if out.len() != n {
        return Err(config_error(format!("{}: every exemplar needs premises_fol and conclusion_fol", p.display())));
    }
    Ok(out)
}

/// Loads candidates, realigns them with the corpus premise counts and labels
/// any that are unlabeled (or all of them when `relabel`).
fn labeled_candidates(corpus: &Corpus, path: &Path, opts: &LabelOptions, relabel: bool) -> Result<Vec<logicpo_core::story::CandidateRecord>> {
    require_file(path)?;
    let mut cands = input::load_candidates(path)?;
    let counts: BTreeMap<&str, usize> = corpus.stories.iter().map(|s| (s.id.as_str(), s.premises.len())).collect();
    for c in cands.iter_mut() {
        if relabel || c.label.is_none() {
            if let Some(&n) = counts.get(c.story_id.as_str()) {
                c.realign(n);
            }
        }
    }
    let (mut todo, done): (Vec<_>, Vec<_>) = cands.into_iter().enumerate().partition(|(_, c)| relabel || c.label.is_none());
    let mut batch: Vec<_> = todo.iter().map(|(_, c)| c.clone()).collect();
    dataset::label_all(&mut batch, opts);
    for ((_, slot), c) in todo.iter_mut().zip(batch) {
        *slot = c;
    }
    let mut all: Vec<_> = todo.into_iter().chain(done).collect();
    all.sort_by_key(|(i, _)| *i);
    Ok(all.into_iter().map(|(_, c)| c).collect())
}

fn cmd_parse(formulas: Vec<String>, file: Option<PathBuf>, dialect: Dialect) -> Result<ExitCode> {
    let mut inputs = formulas;
    if let Some(f) = file {
        require_file(&f)?;
        let text = fs::read_to_string(&f)?;
        inputs.extend(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from));
    }
    if inputs.is_empty() {
        return Err(config_error("no formulas given"));
    }
    let mut failed = false;
    for text in &inputs {
        match parse_formula(text) {
            Ok(f) => println!("{}", render(&f, dialect)),
            Err(diags) => {
                failed = true;
                eprintln!("{text}");
                for d in diags {
                    let start = text[..d.start.min(text.len())].chars().count();
                    let width = text.get(d.start..d.end.min(text.len())).map_or(1, |s| s.chars().count().max(1));
                    eprintln!("{}{} {}", " ".repeat(start), "^".repeat(width), d);
                }
            }
        }
    }
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn cmd_gen(a: GenArgs) -> Result<ExitCode> {
    let corpus = corpus_arg(&a.corpus)?;
    let exemplars = exemplars_arg(a.exemplars.as_deref())?;
    let cfg = GenConfig {
        endpoint: a.endpoint,
        api_key_env: Some(a.api_key_env),
        models: a.models,
        temperatures: a.temperatures,
        shots: a.shots,
        samples_per_story: a.samples_per_story,
        samples_per_combination: a.samples_per_combination,
        max_in_flight: a.max_in_flight,
        retry: RetryPolicy { max_attempts: a.max_attempts, backoff_base_ms: a.backoff_ms },
        request_timeout_secs: a.timeout_secs,
        max_tokens: a.max_tokens,
    };
    cfg.validate().map_err(config_error)?;
    let cache = a.cache_dir.map(Cache::new);
    let out = generate(&corpus.stories, &exemplars, &cfg, cache.as_ref()).map_err(|e| match e {
        logicpo_gen::GenError::Client(m) => anyhow::anyhow!(m),
        other => config_error(other.to_string()),
    })?;
    let mut text = String::new();
    for r in &out.records {
        text.push_str(&serde_json::to_string(&r.to_line())?);
        text.push('\n');
    }
    dataset::write_atomic(&a.out, text.as_bytes()).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!(
        "{} records ({} cached, {} requests, {} failed)",
        out.records.len(),
        out.stats.cache_hits,
        out.stats.requests,
        out.stats.failures
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
struct PredictionLine {
    story_id: String,
    #[serde(default)]
    run: usize,
    label: String,
}

fn cmd_eval(corpus: &Path, predictions: &Path, majority: bool, buckets: bool, name: &str, report: Option<&Path>) -> Result<ExitCode> {
    let corpus = corpus_arg(corpus)?;
    require_file(predictions)?;
    let mut runs: BTreeMap<usize, BTreeMap<String, Label>> = BTreeMap::new();
    for (i, line) in fs::read_to_string(predictions)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let p: PredictionLine = serde_json::from_str(line).with_context(|| format!("{}:{}", predictions.display(), i + 1))?;
        let label = p.label.parse::<Label>().map_err(|e| anyhow::anyhow!("{}:{}: {e}", predictions.display(), i + 1))?;
        runs.entry(p.run).or_default().insert(p.story_id, label);
    }
    if runs.is_empty() {
        bail!("{}: no predictions", predictions.display());
    }
    let golds: Vec<Label> = corpus.stories.iter().map(|s| s.gold_label).collect();
    let counts: Vec<usize> = corpus.stories.iter().map(|s| s.premises.len()).collect();
    // A story without a prediction in some run counts as an Error prediction.
    let mut rp: Vec<RunPredictions> = runs
        .iter()
        .map(|(run, m)| RunPredictions {
            run_index: *run,
            predictions: corpus.stories.iter().map(|s| m.get(&s.id).copied().unwrap_or(Label::Error)).collect(),
        })
        .collect();
    if majority {
        rp = vec![majority_vote(&rp)];
    }
    let r = if buckets { score_bucketed(&golds, &counts, &rp)? } else { score(&golds, &rp)? };
    let mut rows = vec![TableRow::from_report(name, &r)];
    for (b, sub) in &r.buckets {
        rows.push(TableRow::from_report(format!("{name} [{b:?}, n={}]", sub.stories), sub));
    }
    print!("{}", render_table(&rows)?);
    if let Some(p) = report {
        dataset::write_atomic(p, (serde_json::to_string_pretty(&r)? + "\n").as_bytes())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(dataset_dir: Option<PathBuf>, corpus: Option<PathBuf>, candidates: Option<PathBuf>) -> Result<ExitCode> {
    if let Some(dir) = dataset_dir {
        let path = dir.join("stats.json");
        require_file(&path)?;
        let stats: dataset::DatasetStats = serde_json::from_str(&fs::read_to_string(&path)?)?;
        print!("{}", stats.table());
        return Ok(ExitCode::SUCCESS);
    }
    let (Some(corpus), Some(candidates)) = (corpus, candidates) else {
        return Err(config_error("give --dataset, or --corpus with --candidates"));
    };
    let corpus = corpus_arg(&corpus)?;
    require_file(&candidates)?;
    let cands = input::load_candidates(&candidates)?;
    let gold: BTreeMap<&str, Label> = corpus.stories.iter().map(|s| (s.id.as_str(), s.gold_label)).collect();
    let mut by_label: BTreeMap<String, usize> = BTreeMap::new();
    for c in &cands {
        let key = c.label.as_ref().map_or("unlabeled".to_string(), |l| l.label.to_string());
        *by_label.entry(key).or_default() += 1;
    }
    for (k, n) in &by_label {
        println!("{k:<10} {n}");
    }
    let matched = cands
        .iter()
        .filter(|c| matches!((&c.label, gold.get(c.story_id.as_str())), (Some(l), Some(g)) if l.label == *g))
        .count();
    println!("matching gold: {matched}/{}", cands.len());
    let h = tag_failures(cands.iter().filter_map(|c| gold.get(c.story_id.as_str()).map(|g| (c, *g))));
    println!("L3_syntax {}\nconsistency_suspect {}\nother_logic {}", h.l3_syntax, h.consistency_suspect, h.other_logic);
    Ok(ExitCode::SUCCESS)
}
