use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use csatm::config::{Mode, RunConfig};
use csatm::pipeline;
use csatm::popularity::WeightSequence;
use csatm::sampler::Lambda;
use csatm::synthetic::SyntheticSpec;
use csatm::thread_model::InputFormat;

#[derive(Parser)]
#[command(
    name = "csatm",
    version,
    about = "Popularity-weighted topic models for reply trees"
)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and tokenize threads; write the normalized corpus and vocabulary.
    Ingest,
    /// Fit the topic model and write model artifacts.
    Train {
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Assign one topic per comment.
    Assign {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Coherence against the reference corpus, plus accuracy given a truth file.
    Evaluate {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Generate a planted-topic dataset.
    Synth {
        /// TOML file with generator settings.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Train the weighted model and the LDA baseline and compare them.
    Report,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeqKind {
    Arithmetic,
    Geometric,
    Harmonic,
}

#[derive(Args)]
struct Overrides {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<InputFormat>,
    #[arg(long, global = true)]
    reference: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    truth: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    topics: Option<usize>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// `auto` or a positive number.
    #[arg(long, global = true)]
    lambda: Option<Lambda>,
    #[arg(long = "weight-seq", global = true)]
    weight_seq: Option<SeqKind>,
    #[arg(long, global = true)]
    wc: Option<f64>,
    #[arg(long, global = true)]
    wd: Option<f64>,
    #[arg(long, global = true)]
    wr: Option<f64>,
    #[arg(long, global = true)]
    wb: Option<f64>,
    #[arg(long, global = true)]
    gravity: Option<f64>,
    #[arg(long, global = true)]
    iterations: Option<usize>,
    #[arg(long = "burn-in", global = true)]
    burn_in: Option<usize>,
    #[arg(long = "min-descendants", global = true)]
    min_descendants: Option<usize>,
    /// Uniform popularity and no transitivity.
    #[arg(long = "lda-baseline", global = true)]
    lda_baseline: bool,
    #[arg(long, global = true)]
    mode: Option<Mode>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        let paths = &mut cfg.paths;
        if let Some(p) = &self.input {
            paths.input = Some(p.clone());
        }
        if let Some(f) = self.format {
            paths.format = f;
        }
        if let Some(p) = &self.reference {
            paths.reference = Some(p.clone());
        }
        if let Some(p) = &self.out {
            paths.output = Some(p.clone());
        }
        if let Some(p) = &self.truth {
            paths.truth = Some(p.clone());
        }
        let s = &mut cfg.sampler;
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(v) = self.topics {
            s.topics = v;
        }
        if let Some(v) = self.alpha {
            s.alpha = v;
        }
        if let Some(v) = self.beta {
            s.beta = v;
        }
        if let Some(v) = self.lambda {
            s.lambda = v;
        }
        if let Some(v) = self.iterations {
            s.iterations = v;
        }
        if let Some(v) = self.burn_in {
            s.burn_in = v;
        }
        if let Some(v) = self.min_descendants {
            cfg.filters.min_descendants = v;
        }
        if let Some(m) = self.mode {
            cfg.model.mode = m;
        }
        cfg.weights = self.weights(cfg.weights);
        if self.lda_baseline {
            cfg.lda_baseline();
        }
    }

    /// Starts from the configured sequence when the kind matches, otherwise
    /// from that kind's defaults, then applies individual parameter flags.
    fn weights(&self, current: WeightSequence) -> WeightSequence {
        use WeightSequence::*;
        let base = match (self.weight_seq, current) {
            (None, cur) => cur,
            (Some(SeqKind::Arithmetic), cur @ Arithmetic { .. }) => cur,
            (Some(SeqKind::Geometric), cur @ Geometric { .. }) => cur,
            (Some(SeqKind::Harmonic), cur @ Harmonic { .. }) => cur,
            (Some(SeqKind::Arithmetic), _) => Arithmetic {
                c: 1.0,
                d: 0.25,
                floor: 0.0,
            },
            (Some(SeqKind::Geometric), _) => Geometric { c: 1.0, r: 0.5 },
            (Some(SeqKind::Harmonic), _) => Harmonic {
                c: 1.0,
                b: 1.0,
                gravity: 1.0,
            },
        };
        match base {
            Arithmetic { c, d, floor } => Arithmetic {
                c: self.wc.unwrap_or(c),
                d: self.wd.unwrap_or(d),
                floor,
            },
            Geometric { c, r } => Geometric {
                c: self.wc.unwrap_or(c),
                r: self.wr.unwrap_or(r),
            },
            Harmonic { c, b, gravity } => Harmonic {
                c: self.wc.unwrap_or(c),
                b: self.wb.unwrap_or(b),
                gravity: self.gravity.unwrap_or(gravity),
            },
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let o = &cli.overrides;
    if let Command::Synth { spec } = &cli.command {
        let mut s = match spec {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| csatm::Error::io(p, e))?;
                toml::from_str::<SyntheticSpec>(&text)
                    .map_err(|e| csatm::Error::Config(e.to_string()))?
            }
            None => SyntheticSpec::default(),
        };
        if let Some(seed) = o.seed {
            s.seed = seed;
        }
        let out = o
            .out
            .clone()
            .ok_or_else(|| csatm::Error::Config("synth needs --out".into()))?;
        pipeline::cmd_synth(&s, &out)?;
        println!("wrote synthetic dataset to {}", out.display());
        return Ok(());
    }

    let mut cfg = match &o.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    o.apply(&mut cfg);

    match &cli.command {
        Command::Ingest => {
            let stats = pipeline::cmd_ingest(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&stats)?);
        }
        Command::Train { resume } => {
            let summary = pipeline::cmd_train(&cfg, resume.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Assign { model } => {
            let a = pipeline::cmd_assign(&cfg, model.as_deref())?;
            println!("assigned {} comments", a.len());
        }
        Command::Evaluate { model } => {
            let summary = pipeline::cmd_evaluate(&cfg, model.as_deref())?;
            let avg = &summary.coherence.average;
            println!(
                "Cv {:.4}  Cp {:.4}  Cuci {:.4}  Cumass {:.4}  Cnpmi {:.4}  Ca {:.4}",
                avg.c_v, avg.c_p, avg.c_uci, avg.c_umass, avg.c_npmi, avg.c_a
            );
            if let Some(acc) = summary.accuracy {
                println!("accuracy {acc:.4}");
            }
        }
        Command::Report => {
            let rows = pipeline::cmd_report(&cfg)?;
            print!("{}", pipeline::render_report(&rows));
        }
        Command::Synth { .. } => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli).context("csatm failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let input_error = e
                .chain()
                .find_map(|c| c.downcast_ref::<csatm::Error>())
                .is_some_and(csatm::Error::is_input_error);
            ExitCode::from(if input_error { 2 } else { 1 })
        }
    }
}
