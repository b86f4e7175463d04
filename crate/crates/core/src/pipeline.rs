//! Command implementations shared by the binary and the integration tests.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use crate::assignment::{self, TopicAssignment};
use crate::coherence::{self, CoherenceIndex, CoherenceReport};
use crate::config::{Mode, Needs, RunConfig};
use crate::error::{Error, Result};
use crate::popularity::{score_corpus, PopularityScores};
use crate::sampler::{self, Chain, Checkpoint, SamplerConfig, TopicModel};
use crate::synthetic::{self, GroundTruth, SyntheticSpec};
use crate::thread_model::{filter_min_descendants, parse_threads, write_threads, Corpus};

pub const MODEL_FILE: &str = "model.json";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = create(path)?;
    f(&mut w)?;
    finish(w, path)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestStats {
    pub threads: usize,
    pub comments: usize,
    pub tokens: usize,
    pub vocabulary: usize,
    pub duplicates: usize,
    pub orphans_dropped: usize,
    pub rejected_threads: usize,
    pub filtered_threads: usize,
}

/// Parses, filters and tokenizes the configured input.
pub fn load_corpus(cfg: &RunConfig) -> Result<(Corpus, IngestStats)> {
    let path = cfg
        .paths
        .input
        .as_deref()
        .ok_or_else(|| Error::Config("no input path configured".into()))?;
    let report = parse_threads(open(path)?, cfg.paths.format)?;
    let parsed = report.trees.len();
    let trees = filter_min_descendants(report.trees, cfg.filters.min_descendants);
    let filtered_threads = parsed - trees.len();
    let corpus = Corpus::build(trees, &cfg.tokenizer_config()?, cfg.tokenizer.min_count);
    let stats = IngestStats {
        threads: corpus.trees().len(),
        comments: corpus.num_comments(),
        tokens: corpus.num_tokens(),
        vocabulary: corpus.vocab().len(),
        duplicates: report.duplicates,
        orphans_dropped: report.orphans_dropped,
        rejected_threads: report.rejected.len(),
        filtered_threads,
    };
    info!(
        "{} threads, {} comments, {} tokens, vocabulary {}",
        stats.threads, stats.comments, stats.tokens, stats.vocabulary
    );
    Ok((corpus, stats))
}

/// Level-weighted scores, or all ones when popularity is switched off.
pub fn popularity_scores(cfg: &RunConfig, corpus: &Corpus) -> PopularityScores {
    if cfg.model.popularity {
        score_corpus(corpus, &cfg.weights)
    } else {
        PopularityScores::uniform(corpus.num_comments())
    }
}

pub fn sampler_config(cfg: &RunConfig) -> SamplerConfig {
    SamplerConfig {
        lambda: cfg.effective_lambda(),
        ..cfg.sampler.clone()
    }
}

/// Fits the model in the configured mode. Corpus mode also returns the
/// final chain checkpoint.
pub fn fit(
    cfg: &RunConfig,
    corpus: &Corpus,
    scores: &PopularityScores,
) -> Result<(TopicModel, Option<Checkpoint>)> {
    let sc = sampler_config(cfg);
    match cfg.model.mode {
        Mode::Corpus => {
            let mut chain = Chain::new(corpus, scores, &sc)?;
            chain.run_to_end();
            Ok((chain.estimate(corpus), Some(chain.checkpoint())))
        }
        Mode::Thread => Ok((sampler::run_per_thread(corpus, scores, &sc)?, None)),
    }
}

/// Labels every comment, blending along root paths when transitivity is on.
pub fn assign_topics(
    cfg: &RunConfig,
    model: &TopicModel,
    corpus: &Corpus,
) -> Result<Vec<TopicAssignment>> {
    if cfg.model.transitivity {
        assignment::assign_all(model, corpus, &cfg.transitivity_sequence())
    } else {
        assignment::assign_raw(model, corpus)
    }
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<IngestStats> {
    cfg.validate(Needs {
        input: true,
        reference: false,
        output: true,
    })?;
    let out = cfg.output_dir()?;
    let (corpus, stats) = load_corpus(cfg)?;
    let path = out.join("corpus.jsonl");
    write_with(&path, |w| write_threads(w, corpus.trees()))?;
    let path = out.join("vocab.csv");
    write_with(&path, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["index", "term", "frequency"])?;
        for (i, t) in corpus.vocab().terms().iter().enumerate() {
            c.write_record([&i.to_string(), t, &corpus.vocab().frequency(i).to_string()])?;
        }
        c.flush().map_err(|e| Error::io("vocab.csv", e))
    })?;
    let path = out.join("ingest.json");
    write_with(&path, |w| Ok(serde_json::to_writer_pretty(w, &stats)?))?;
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub ingest: IngestStats,
    pub topics: usize,
    pub lambda: f64,
    pub iterations: usize,
}

/// Trains and writes `model.json`, `phi.csv`, `theta.csv`,
/// `top_words.json`, `scores.csv`, `checkpoint.json` and `train.log`.
pub fn cmd_train(cfg: &RunConfig, resume: Option<&Path>) -> Result<TrainSummary> {
    cfg.validate(Needs {
        input: true,
        reference: false,
        output: true,
    })?;
    let out = cfg.output_dir()?;
    let (corpus, ingest) = load_corpus(cfg)?;
    let scores = popularity_scores(cfg, &corpus);

    let (model, checkpoint, lambda) = match resume {
        Some(path) => {
            if cfg.model.mode != Mode::Corpus {
                return Err(Error::Config("--resume needs corpus mode".into()));
            }
            let mut ck: Checkpoint = serde_json::from_reader(open(path)?)?;
            ck.config.iterations = cfg.sampler.iterations;
            let mut chain = Chain::resume(&corpus, &scores, &ck)?;
            info!("resuming at sweep {}", chain.iteration());
            chain.run_to_end();
            let lambda = chain.state().lambda();
            (chain.estimate(&corpus), Some(chain.checkpoint()), lambda)
        }
        None => {
            let (model, ck) = fit(cfg, &corpus, &scores)?;
            let lambda = sampler_config(cfg).lambda.resolve(&scores);
            (model, ck, lambda)
        }
    };

    write_with(&out.join(MODEL_FILE), |w| {
        Ok(serde_json::to_writer(w, &model)?)
    })?;
    write_with(&out.join("phi.csv"), |w| model.write_phi_csv(w))?;
    write_with(&out.join("theta.csv"), |w| model.write_theta_csv(w))?;
    write_with(&out.join("top_words.json"), |w| {
        model.write_top_words_json(cfg.evaluation.top_n, w)
    })?;
    write_with(&out.join("scores.csv"), |w| scores.write_csv(&corpus, w))?;
    if let Some(ck) = &checkpoint {
        write_with(&out.join("checkpoint.json"), |w| {
            Ok(serde_json::to_writer(w, ck)?)
        })?;
    }
    let summary = TrainSummary {
        ingest,
        topics: model.num_topics(),
        lambda,
        iterations: cfg.sampler.iterations,
    };
    let mut log = String::new();
    writeln!(log, "# config").unwrap();
    log.push_str(&cfg.to_toml());
    writeln!(log, "\n# summary").unwrap();
    log.push_str(&serde_json::to_string_pretty(&summary)?);
    log.push('\n');
    write_with(&out.join("train.log"), |w| {
        w.write_all(log.as_bytes())
            .map_err(|e| Error::io("train.log", e))
    })?;
    Ok(summary)
}

pub fn load_model(path: &Path) -> Result<TopicModel> {
    Ok(serde_json::from_reader(open(path)?)?)
}

fn model_path(cfg: &RunConfig, model: Option<&Path>) -> Result<PathBuf> {
    match model {
        Some(p) => Ok(p.to_owned()),
        None => Ok(cfg.output_dir()?.join(MODEL_FILE)),
    }
}

/// Writes `assignments.jsonl` next to the model.
pub fn cmd_assign(cfg: &RunConfig, model: Option<&Path>) -> Result<Vec<TopicAssignment>> {
    cfg.validate(Needs {
        input: true,
        reference: false,
        output: true,
    })?;
    let model = load_model(&model_path(cfg, model)?)?;
    let (corpus, _) = load_corpus(cfg)?;
    let assignments = assign_topics(cfg, &model, &corpus)?;
    write_with(&cfg.output_dir()?.join("assignments.jsonl"), |w| {
        assignment::write_jsonl(w, &assignments)
    })?;
    Ok(assignments)
}

/// Reads one document per line with the run's tokenizer.
pub fn read_reference(cfg: &RunConfig) -> Result<Vec<Vec<String>>> {
    let path = cfg
        .paths
        .reference
        .as_deref()
        .ok_or_else(|| Error::Config("no reference path configured".into()))?;
    let tokenizer = cfg.tokenizer_config()?;
    open(path)?
        .lines()
        .map(|l| {
            l.map(|l| crate::thread_model::tokenize(&l, &tokenizer))
                .map_err(|e| Error::io(path, e))
        })
        .collect()
}

/// Coherence of `model`'s top words against tokenized reference documents.
pub fn coherence_report(
    cfg: &RunConfig,
    model: &TopicModel,
    reference: &[Vec<String>],
) -> Result<CoherenceReport> {
    let top = model.top_words(cfg.evaluation.top_n);
    let needed = coherence::needed_terms(&top);
    let index: CoherenceIndex =
        coherence::build_index(reference, &needed, &cfg.evaluation.windows.sizes())?
            .with_epsilon(cfg.evaluation.epsilon);
    coherence::evaluate_model(model, &index, cfg.evaluation.top_n, &cfg.evaluation.windows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub coherence: CoherenceReport,
    pub accuracy: Option<f64>,
}

/// Writes `coherence.csv`, and `accuracy.json` when a truth file is set.
pub fn cmd_evaluate(cfg: &RunConfig, model: Option<&Path>) -> Result<EvalSummary> {
    let needs_input = cfg.paths.truth.is_some();
    cfg.validate(Needs {
        input: needs_input,
        reference: true,
        output: true,
    })?;
    let out = cfg.output_dir()?;
    let model = load_model(&model_path(cfg, model)?)?;
    let reference = read_reference(cfg)?;
    let report = coherence_report(cfg, &model, &reference)?;
    write_with(&out.join("coherence.csv"), |w| report.write_csv(w))?;

    let accuracy = match &cfg.paths.truth {
        Some(truth_path) => {
            let truth = GroundTruth::read_csv(open(truth_path)?)?;
            let (corpus, _) = load_corpus(cfg)?;
            let assignments = assign_topics(cfg, &model, &corpus)?;
            let acc = synthetic::assignment_accuracy(&assignments, &truth)?;
            write_with(&out.join("accuracy.json"), |w| {
                Ok(serde_json::to_writer_pretty(
                    w,
                    &serde_json::json!({ "accuracy": acc, "comments": truth.len() }),
                )?)
            })?;
            Some(acc)
        }
        None => None,
    };
    Ok(EvalSummary {
        coherence: report,
        accuracy,
    })
}

/// Writes `threads.jsonl`, `truth.csv` and `reference.txt`.
pub fn cmd_synth(spec: &SyntheticSpec, out: &Path) -> Result<()> {
    let data = synthetic::generate_data(spec)?;
    write_with(&out.join("threads.jsonl"), |w| {
        for r in &data.records {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")
                .map_err(|e| Error::io("threads.jsonl", e))?;
        }
        Ok(())
    })?;
    write_with(&out.join("truth.csv"), |w| data.truth.write_csv(w))?;
    let reference = synthetic::reference_corpus(spec)?;
    write_with(&out.join("reference.txt"), |w| {
        for doc in &reference {
            writeln!(w, "{doc}").map_err(|e| Error::io("reference.txt", e))?;
        }
        Ok(())
    })?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub coherence: Option<coherence::TopicCoherence>,
    pub accuracy: Option<f64>,
}

/// Trains the popularity-weighted model and the plain-LDA baseline on the same
/// input, evaluates both and writes `report.md` side by side.
pub fn cmd_report(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    cfg.validate(Needs {
        input: true,
        reference: false,
        output: true,
    })?;
    let out = cfg.output_dir()?.to_owned();
    let mut baseline = cfg.clone();
    baseline.lda_baseline();
    let mut rows = Vec::new();
    let reference = match cfg.paths.reference {
        Some(_) => Some(read_reference(cfg)?),
        None => None,
    };
    let truth = match &cfg.paths.truth {
        Some(p) => Some(GroundTruth::read_csv(open(p)?)?),
        None => None,
    };
    let (corpus, _) = load_corpus(cfg)?;
    for (name, run) in [("CSATM", cfg), ("LDA", &baseline)] {
        let mut run = run.clone();
        run.paths.output = Some(out.join(name.to_lowercase()));
        cmd_train(&run, None)?;
        let model = load_model(&run.output_dir()?.join(MODEL_FILE))?;
        let coherence = match &reference {
            Some(r) => {
                let report = coherence_report(&run, &model, r)?;
                write_with(&run.output_dir()?.join("coherence.csv"), |w| {
                    report.write_csv(w)
                })?;
                Some(report.average)
            }
            None => None,
        };
        let accuracy = match &truth {
            Some(t) => {
                let a = assign_topics(&run, &model, &corpus)?;
                Some(synthetic::assignment_accuracy(&a, t)?)
            }
            None => None,
        };
        rows.push(ReportRow {
            model: name.to_owned(),
            coherence,
            accuracy,
        });
    }
    let table = render_report(&rows);
    write_with(&out.join("report.md"), |w| {
        w.write_all(table.as_bytes())
            .map_err(|e| Error::io("report.md", e))
    })?;
    Ok(rows)
}

/// Markdown table with averaged coherence and assignment accuracy.
pub fn render_report(rows: &[ReportRow]) -> String {
    let mut s = String::from("| Model | Cv | Cp | Cuci | Cumass | Cnpmi | Ca | Accuracy |\n");
    s.push_str("|---|---|---|---|---|---|---|---|\n");
    let f = |x: Option<f64>| x.map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"));
    for r in rows {
        let c = r.coherence.as_ref();
        writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            r.model,
            f(c.map(|c| c.c_v)),
            f(c.map(|c| c.c_p)),
            f(c.map(|c| c.c_uci)),
            f(c.map(|c| c.c_umass)),
            f(c.map(|c| c.c_npmi)),
            f(c.map(|c| c.c_a)),
            f(r.accuracy),
        )
        .unwrap();
    }
    s
}
