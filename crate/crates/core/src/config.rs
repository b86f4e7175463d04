//! Declarative run configuration (TOML).
//!
//! ```toml
//! [paths]
//! input = "threads.jsonl"
//! format = "generic-jsonl"      # or "pushshift"
//! reference = "reference.txt"   # one document per line
//! output = "out"
//! truth = "truth.csv"           # optional
//! stopwords = "stop.txt"        # optional
//!
//! [tokenizer]
//! min_len = 2
//! min_count = 1
//!
//! [weights]                     # popularity weight sequence
//! kind = "arithmetic"
//! c = 1.0
//! d = 0.25
//!
//! # [transitivity_weights]      # defaults to [weights]
//!
//! [model]
//! popularity = true             # false: p = 1 for every comment
//! transitivity = true           # false: label by the comment's own θ
//! mode = "corpus"               # or "thread"
//!
//! [sampler]
//! topics = 70
//! alpha = 0.1
//! beta = 0.01
//! lambda = "auto"
//! iterations = 1000
//! burn_in = 500
//! sample_lag = 0
//! seed = 1
//!
//! [evaluation]
//! top_n = 10
//!
//! [filters]
//! min_descendants = 0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coherence::MeasureWindows;
use crate::error::{Error, Result};
use crate::popularity::WeightSequence;
use crate::sampler::{Lambda, SamplerConfig};
use crate::thread_model::{InputFormat, TokenizerConfig};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub input: Option<PathBuf>,
    pub format: InputFormat,
    pub reference: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizerSettings {
    pub min_len: usize,
    pub min_count: u64,
}

impl Default for TokenizerSettings {
    fn default() -> Self {
        Self {
            min_len: 2,
            min_count: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Corpus,
    Thread,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "corpus" => Ok(Mode::Corpus),
            "thread" => Ok(Mode::Thread),
            other => Err(format!("mode must be `corpus` or `thread`, got `{other}`")),
        }
    }
}

/// Which structural signals the run uses. Both off is plain LDA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    pub popularity: bool,
    pub transitivity: bool,
    pub mode: Mode,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            popularity: true,
            transitivity: true,
            mode: Mode::Corpus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSettings {
    pub top_n: usize,
    pub windows: MeasureWindows,
    pub epsilon: f64,
}

impl Default for EvaluationSettings {
    fn default() -> Self {
        Self {
            top_n: 10,
            windows: MeasureWindows::default(),
            epsilon: crate::coherence::DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Filters {
    /// Threads whose root has fewer descendants are skipped.
    pub min_descendants: usize,
}

fn default_weights() -> WeightSequence {
    WeightSequence::Arithmetic {
        c: 1.0,
        d: 0.25,
        floor: 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub tokenizer: TokenizerSettings,
    pub weights: WeightSequence,
    pub transitivity_weights: Option<WeightSequence>,
    pub model: ModelSettings,
    pub sampler: SamplerConfig,
    pub evaluation: EvaluationSettings,
    pub filters: Filters,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            tokenizer: TokenizerSettings::default(),
            weights: default_weights(),
            transitivity_weights: None,
            model: ModelSettings::default(),
            sampler: SamplerConfig::default(),
            evaluation: EvaluationSettings::default(),
            filters: Filters::default(),
        }
    }
}

/// What a command needs to find on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Needs {
    pub input: bool,
    pub reference: bool,
    pub output: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// Sets the plain-LDA baseline: uniform popularity (so `λ = 1`) and
    /// labels from each comment's own distribution.
    pub fn lda_baseline(&mut self) {
        self.model.popularity = false;
        self.model.transitivity = false;
    }

    /// Scaling ratio for this run. Uniform popularity always uses 1.
    pub fn effective_lambda(&self) -> Lambda {
        if self.model.popularity {
            self.sampler.lambda
        } else {
            Lambda::Fixed(1.0)
        }
    }

    pub fn transitivity_sequence(&self) -> WeightSequence {
        self.transitivity_weights.unwrap_or(self.weights)
    }

    pub fn tokenizer_config(&self) -> Result<TokenizerConfig> {
        let mut t = TokenizerConfig {
            min_len: self.tokenizer.min_len,
            ..Default::default()
        };
        if let Some(path) = &self.paths.stopwords {
            t.load_stopwords(path)?;
        }
        Ok(t)
    }

    pub fn output_dir(&self) -> Result<&Path> {
        self.paths
            .output
            .as_deref()
            .ok_or_else(|| Error::Config("no output directory configured".into()))
    }

    /// Checks every parameter range and required path before any work.
    pub fn validate(&self, needs: Needs) -> Result<()> {
        self.weights.validated()?;
        if let Some(t) = self.transitivity_weights {
            t.validated()?;
        }
        self.sampler.validate()?;
        if self.tokenizer.min_count == 0 {
            return Err(Error::Config("tokenizer.min_count must be >= 1".into()));
        }
        if self.evaluation.top_n < 2 {
            return Err(Error::Config("evaluation.top_n must be >= 2".into()));
        }
        if self.evaluation.epsilon.is_nan() || self.evaluation.epsilon <= 0.0 {
            return Err(Error::Config("evaluation.epsilon must be > 0".into()));
        }
        if self.evaluation.windows.sizes().contains(&0) {
            return Err(Error::Config("window sizes must be >= 1".into()));
        }
        let require = |p: &Option<PathBuf>, what: &str| -> Result<()> {
            match p {
                None => Err(Error::Config(format!("no {what} path configured"))),
                Some(p) if !p.exists() => Err(Error::Config(format!(
                    "{what} path `{}` does not exist",
                    p.display()
                ))),
                Some(_) => Ok(()),
            }
        };
        if needs.input {
            require(&self.paths.input, "input")?;
        }
        if needs.reference {
            require(&self.paths.reference, "reference")?;
        }
        if needs.output {
            self.output_dir()?;
        }
        if self.paths.truth.is_some() {
            require(&self.paths.truth, "truth")?;
        }
        if self.paths.stopwords.is_some() {
            require(&self.paths.stopwords, "stopwords")?;
        }
        Ok(())
    }
}
