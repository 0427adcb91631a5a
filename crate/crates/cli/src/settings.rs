//! Training options: command-line flags over a `key=value` config file over
//! defaults.
//!
//! Config keys are the long flag names without dashes (`dim=100`,
//! `min-count=5`). A `config.` prefix is accepted so run manifests can be fed
//! back in; other dotted keys are ignored.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Result;
use clap::Args;
use csg_core::model::Which;
use csg_core::trainer::{Architecture, FusionMethod, FusionSpec, GammaSchedule, TrainConfig};

use crate::error::usage;
use crate::manifest::RunManifest;

const KEYS: &[&str] = &[
    "corpus",
    "output",
    "arch",
    "fusion",
    "gamma",
    "dim",
    "window",
    "negative",
    "epochs",
    "lr",
    "min-count",
    "threads",
    "seed",
    "subsample",
    "dynamic-window",
    "exclude-target-from-context",
    "which",
    "save-text",
    "read-vocab",
    "save-vocab",
    "probe-center",
    "probe-words",
    "probe-output",
];

/// Keys a manifest carries that are not options.
const MANIFEST_KEYS: &[&str] = &["command", "version", "wall_seconds"];

#[derive(Args, Default)]
pub struct TrainArgs {
    /// key=value file of any options below; flags win over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Preprocessed corpus, one sentence per line.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Vector file; `.txt`/`.vec` is written as text, anything else as binary.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// sg, cbow or csg [default: sg]
    #[arg(long)]
    pub arch: Option<ArchName>,
    /// ef or lf; csg only [default: ef]
    #[arg(long)]
    pub fusion: Option<FusionMethod>,
    /// Fixed value in [0, 1], `linear` or `random`; csg only [default: linear]
    #[arg(long)]
    pub gamma: Option<GammaSchedule>,
    /// [default: 200]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Neighbors on each side [default: 5]
    #[arg(long)]
    pub window: Option<usize>,
    /// Negative samples per positive [default: 5]
    #[arg(long)]
    pub negative: Option<usize>,
    /// [default: 5]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Starting learning rate [default: 0.025]
    #[arg(long)]
    pub lr: Option<f32>,
    /// [default: 5]
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Hogwild workers; only 1 is reproducible [default: all cores]
    #[arg(long)]
    pub threads: Option<usize>,
    /// [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Frequent-word subsampling threshold, e.g. 1e-4 [default: off]
    #[arg(long)]
    pub subsample: Option<f64>,
    /// Shrink each window to a random size in 1..=window.
    #[arg(long)]
    pub dynamic_window: bool,
    /// Leave the predicted neighbor out of the context vector.
    #[arg(long)]
    pub exclude_target_from_context: bool,
    /// Matrix to save: input or output [default: input]
    #[arg(long)]
    pub which: Option<WhichName>,
    /// Also write a text copy next to a binary output.
    #[arg(long)]
    pub save_text: bool,
    /// Reuse a `word<TAB>count` vocabulary instead of counting the corpus.
    #[arg(long)]
    pub read_vocab: Option<PathBuf>,
    /// Write the vocabulary as `word<TAB>count` lines.
    #[arg(long)]
    pub save_vocab: Option<PathBuf>,
    /// Log positive scores whenever this word is the center.
    #[arg(long)]
    pub probe_center: Option<String>,
    /// Comma-separated neighbors to track for `--probe-center`.
    #[arg(long, value_delimiter = ',')]
    pub probe_words: Option<Vec<String>>,
    /// Probe CSV path [default: <output>.probe.csv]
    #[arg(long)]
    pub probe_output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArchName {
    Sg,
    Cbow,
    Csg,
}

impl FromStr for ArchName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sg" => Ok(ArchName::Sg),
            "cbow" => Ok(ArchName::Cbow),
            "csg" => Ok(ArchName::Csg),
            _ => Err(format!("unknown architecture `{s}` (expected sg, cbow or csg)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WhichName(pub Which);

impl FromStr for WhichName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "input" | "in" => Ok(WhichName(Which::Input)),
            "output" | "out" => Ok(WhichName(Which::Output)),
            _ => Err(format!("unknown matrix `{s}` (expected input or output)")),
        }
    }
}

#[derive(Default)]
pub struct ConfigFile {
    source: String,
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn parse(source: &str, text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(usage(format!("{source}:{}: expected key=value", idx + 1)));
            };
            let key = key.trim();
            let key = key.strip_prefix("config.").unwrap_or(key);
            if key.contains('.') || MANIFEST_KEYS.contains(&key) {
                continue;
            }
            if !KEYS.contains(&key) {
                return Err(usage(format!("{source}:{}: unknown option `{key}`", idx + 1)));
            }
            values.insert(key.to_owned(), value.trim().to_owned());
        }
        Ok(ConfigFile {
            source: source.to_owned(),
            values,
        })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .filter(|v| !v.is_empty())
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| usage(format!("{}: bad value for `{key}`: {e}", self.source)))
            })
            .transpose()
    }
}

/// Fully merged training options.
#[derive(Debug)]
pub struct TrainSettings {
    pub corpus: PathBuf,
    pub output: PathBuf,
    pub config: TrainConfig,
    pub which: Which,
    pub save_text: bool,
    pub read_vocab: Option<PathBuf>,
    pub save_vocab: Option<PathBuf>,
    pub probe: Option<(String, Vec<String>)>,
    pub probe_output: PathBuf,
}

fn merge<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

impl TrainSettings {
    pub fn resolve(args: TrainArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Self::resolve_with(args, &file)
    }

    pub fn resolve_with(args: TrainArgs, file: &ConfigFile) -> Result<Self> {
        let defaults = TrainConfig::default();
        let corpus = merge(args.corpus, file, "corpus")?.ok_or_else(|| usage("--corpus is required"))?;
        let output = merge(args.output, file, "output")?.ok_or_else(|| usage("--output is required"))?;

        let arch = merge(args.arch, file, "arch")?.unwrap_or(ArchName::Sg);
        let fusion = merge(args.fusion, file, "fusion")?;
        let gamma = merge(args.gamma, file, "gamma")?;
        let architecture = match arch {
            ArchName::Csg => Architecture::Contextual(FusionSpec::new(
                fusion.unwrap_or(FusionMethod::Early),
                gamma.unwrap_or(GammaSchedule::LinearUp),
            )?),
            _ if fusion.is_some() => return Err(usage("--fusion requires --arch csg")),
            _ if gamma.is_some() => return Err(usage("--gamma requires --arch csg")),
            ArchName::Sg => Architecture::SkipGram,
            ArchName::Cbow => Architecture::Cbow,
        };

        let threads = merge(args.threads, file, "threads")?
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let flag_or = |flag: bool, key: &str| -> Result<bool> {
            Ok(flag || file.get::<bool>(key)?.unwrap_or(false))
        };
        let config = TrainConfig {
            architecture,
            dim: merge(args.dim, file, "dim")?.unwrap_or(defaults.dim),
            window: merge(args.window, file, "window")?.unwrap_or(defaults.window),
            negatives: merge(args.negative, file, "negative")?.unwrap_or(defaults.negatives),
            epochs: merge(args.epochs, file, "epochs")?.unwrap_or(defaults.epochs),
            initial_lr: merge(args.lr, file, "lr")?.unwrap_or(defaults.initial_lr),
            min_count: merge(args.min_count, file, "min-count")?.unwrap_or(defaults.min_count),
            threads,
            seed: merge(args.seed, file, "seed")?.unwrap_or(defaults.seed),
            subsample: merge(args.subsample, file, "subsample")?,
            dynamic_window: flag_or(args.dynamic_window, "dynamic-window")?,
            exclude_target_from_context: flag_or(
                args.exclude_target_from_context,
                "exclude-target-from-context",
            )?,
            update_mode: defaults.update_mode,
        };
        config.validate()?;

        let probe_center = merge(args.probe_center, file, "probe-center")?;
        let probe_words = match args.probe_words {
            Some(words) => Some(words),
            None => file
                .get::<String>("probe-words")?
                .map(|s| s.split(',').map(|w| w.trim().to_owned()).collect()),
        };
        let probe = match (probe_center, probe_words) {
            (Some(center), Some(words)) if !words.is_empty() => Some((center, words)),
            (None, None) => None,
            _ => return Err(usage("--probe-center and --probe-words must be given together")),
        };
        let probe_output = merge(args.probe_output, file, "probe-output")?
            .unwrap_or_else(|| crate::manifest::sibling(&output, "probe.csv"));

        Ok(TrainSettings {
            corpus,
            config,
            which: merge(args.which, file, "which")?.map_or(Which::Input, |w| w.0),
            save_text: flag_or(args.save_text, "save-text")?,
            read_vocab: merge(args.read_vocab, file, "read-vocab")?,
            save_vocab: merge(args.save_vocab, file, "save-vocab")?,
            probe,
            probe_output,
            output,
        })
    }

    /// Record every option as `config.<key>` so the manifest can be replayed.
    pub fn record(&self, manifest: &mut RunManifest) {
        let c = &self.config;
        manifest.set_path("config.corpus", &self.corpus);
        manifest.set_path("config.output", &self.output);
        manifest.set("config.arch", c.architecture.name());
        if let Architecture::Contextual(fusion) = c.architecture {
            manifest.set("config.fusion", fusion.method);
            manifest.set("config.gamma", fusion.schedule);
        }
        manifest.set("config.dim", c.dim);
        manifest.set("config.window", c.window);
        manifest.set("config.negative", c.negatives);
        manifest.set("config.epochs", c.epochs);
        manifest.set("config.lr", c.initial_lr);
        manifest.set("config.min-count", c.min_count);
        manifest.set("config.threads", c.threads);
        manifest.set("config.seed", c.seed);
        if let Some(t) = c.subsample {
            manifest.set("config.subsample", t);
        }
        manifest.set("config.dynamic-window", c.dynamic_window);
        manifest.set("config.exclude-target-from-context", c.exclude_target_from_context);
        manifest.set(
            "config.which",
            match self.which {
                Which::Input => "input",
                Which::Output => "output",
            },
        );
        manifest.set("config.save-text", self.save_text);
        if let Some(p) = &self.read_vocab {
            manifest.set_path("config.read-vocab", p);
        }
        if let Some(p) = &self.save_vocab {
            manifest.set_path("config.save-vocab", p);
        }
        if let Some((center, words)) = &self.probe {
            manifest.set("config.probe-center", center);
            manifest.set("config.probe-words", words.join(","));
            manifest.set_path("config.probe-output", &self.probe_output);
        }
    }
}

#[cfg(test)]
mod tests {
    use anyhow::Context;

    use super::*;

    fn args() -> TrainArgs {
        TrainArgs {
            corpus: Some("c.txt".into()),
            output: Some("v.bin".into()),
            threads: Some(1),
            ..TrainArgs::default()
        }
    }

    #[test]
    fn defaults() {
        let s = TrainSettings::resolve_with(args(), &ConfigFile::default()).unwrap();
        let d = TrainConfig::default();
        assert_eq!(s.config, TrainConfig { threads: 1, ..d });
        assert_eq!(s.which, Which::Input);
        assert!(s.probe.is_none());
        assert_eq!(s.probe_output, PathBuf::from("v.bin.probe.csv"));
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = ConfigFile::parse("f", "dim=50\nwindow=3\n# comment\narch=csg\ngamma=0.5\n").unwrap();
        let a = TrainArgs {
            dim: Some(80),
            ..args()
        };
        let s = TrainSettings::resolve_with(a, &file).unwrap();
        assert_eq!(s.config.dim, 80);
        assert_eq!(s.config.window, 3);
        assert_eq!(s.config.negatives, 5);
        assert_eq!(
            s.config.architecture,
            Architecture::Contextual(FusionSpec {
                method: FusionMethod::Early,
                schedule: GammaSchedule::Fixed(0.5)
            })
        );
    }

    #[test]
    fn conflicts_are_usage_errors() {
        let a = TrainArgs {
            fusion: Some(FusionMethod::Late),
            ..args()
        };
        let err = TrainSettings::resolve_with(a, &ConfigFile::default()).unwrap_err();
        assert_eq!(crate::error::exit_code(&err), crate::error::USAGE);

        let file = ConfigFile::parse("f", "gamma=0.3").unwrap();
        assert!(TrainSettings::resolve_with(args(), &file).is_err());

        let a = TrainArgs {
            arch: Some(ArchName::Csg),
            fusion: Some(FusionMethod::Late),
            gamma: Some(GammaSchedule::Fixed(1.0)),
            ..args()
        };
        let err = TrainSettings::resolve_with(a, &ConfigFile::default()).unwrap_err();
        assert_eq!(crate::error::exit_code(&err), crate::error::USAGE);
    }

    #[test]
    fn config_file_errors() {
        assert!(ConfigFile::parse("f", "dimension=5").is_err());
        assert!(ConfigFile::parse("f", "dim 5").is_err());
        let file = ConfigFile::parse("f", "dim=five").unwrap();
        assert!(TrainSettings::resolve_with(args(), &file).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let a = TrainArgs {
            arch: Some(ArchName::Csg),
            fusion: Some(FusionMethod::Late),
            gamma: Some(GammaSchedule::RandomUniform),
            subsample: Some(1e-4),
            dynamic_window: true,
            probe_center: Some("ice".into()),
            probe_words: Some(vec!["the".into(), "cold".into()]),
            ..args()
        };
        let first = TrainSettings::resolve_with(a, &ConfigFile::default()).unwrap();
        let mut manifest = RunManifest::new("train");
        first.record(&mut manifest);
        let dir = tempfile::tempdir().unwrap();
        let path = manifest.write_next_to(&dir.path().join("v.bin")).unwrap();
        let file = ConfigFile::load(&path).unwrap();
        let second = TrainSettings::resolve_with(TrainArgs::default(), &file).unwrap();
        assert_eq!(second.config, first.config);
        assert_eq!(second.corpus, first.corpus);
        assert_eq!(second.output, first.output);
        assert_eq!(second.probe, first.probe);
    }

    #[test]
    fn missing_config_is_usage_error() {
        let err = ConfigFile::load(Path::new("/nonexistent/run.cfg")).context("loading").err().unwrap();
        assert_eq!(crate::error::exit_code(&err), crate::error::USAGE);
    }
}
