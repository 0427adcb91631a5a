//! Single-epoch throughput of every architecture at one config.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use anyhow::{Context, Result};
use csg_core::corpus::read_sentences;
use csg_core::trainer::{
    Architecture, FusionMethod, FusionSpec, GammaSchedule, TrainConfig, Trainer, TrainingCorpus,
};
use csg_core::vocab::{Vocabulary, WordCounter};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

use crate::error::usage;
use crate::manifest::RunManifest;
use crate::BenchArgs;

const SYNTHETIC_VOCAB: usize = 30_000;
const SYNTHETIC_SENTENCE: usize = 1000;

/// Zipf(1) tokens over `SYNTHETIC_VOCAB` ranks; word ids are the ranks.
pub fn synthetic_corpus(tokens: usize, seed: u64) -> (Vocabulary, TrainingCorpus) {
    let mut cdf = Vec::with_capacity(SYNTHETIC_VOCAB);
    let mut acc = 0.0;
    for rank in 1..=SYNTHETIC_VOCAB {
        acc += 1.0 / rank as f64;
        cdf.push(acc);
    }
    let mut rng = Pcg64Mcg::seed_from_u64(seed);
    let mut corpus = TrainingCorpus::default();
    let mut left = tokens;
    while left > 0 {
        let n = left.min(SYNTHETIC_SENTENCE);
        left -= n;
        corpus.push_ids((0..n).map(|_| {
            let u = rng.gen::<f64>() * acc;
            cdf.partition_point(|&c| c < u).min(SYNTHETIC_VOCAB - 1) as u32
        }));
    }
    // Counts follow the rank order exactly so ids and vocabulary order agree.
    let counts = (0..SYNTHETIC_VOCAB).map(|r| (format!("w{r:05}"), (SYNTHETIC_VOCAB - r) as u64));
    (Vocabulary::from_counts(counts).expect("distinct words"), corpus)
}

fn architectures() -> Vec<(&'static str, Architecture)> {
    let csg = |method, schedule| Architecture::Contextual(FusionSpec { method, schedule });
    vec![
        ("sg", Architecture::SkipGram),
        ("cbow", Architecture::Cbow),
        ("csg_ef_0.5", csg(FusionMethod::Early, GammaSchedule::Fixed(0.5))),
        ("csg_lf_0.5", csg(FusionMethod::Late, GammaSchedule::Fixed(0.5))),
        ("csg_ef_random", csg(FusionMethod::Early, GammaSchedule::RandomUniform)),
    ]
}

pub fn run(args: BenchArgs) -> Result<()> {
    let (vocab, corpus, source) = match &args.corpus {
        Some(path) => {
            let open = || -> Result<_> {
                let file = File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
                Ok(read_sentences(BufReader::new(file)))
            };
            let mut counter = WordCounter::default();
            for s in open()? {
                counter.add(&s.context("reading corpus")?);
            }
            let vocab = counter.finish(TrainConfig::default().min_count)?;
            let mut corpus = TrainingCorpus::default();
            for s in open()? {
                corpus.push_sentence(&s?, &vocab);
            }
            (vocab, corpus, path.display().to_string())
        }
        None => {
            let (v, c) = synthetic_corpus(args.tokens, args.seed);
            (v, c, format!("synthetic zipf {} tokens", args.tokens))
        }
    };
    eprintln!("bench corpus: {source}, {} tokens, vocabulary {}", corpus.num_tokens(), vocab.len());

    let mut manifest = RunManifest::new("bench");
    manifest.set("corpus", &source);
    manifest.set("dim", args.dim);
    manifest.set("window", args.window);
    manifest.set("negative", args.negative);
    manifest.set("threads", args.threads);
    manifest.set("seed", args.seed);
    let mut lines = Vec::new();
    let mut sg_rate = None;
    for (name, architecture) in architectures() {
        let config = TrainConfig {
            architecture,
            dim: args.dim,
            window: args.window,
            negatives: args.negative,
            epochs: 1,
            min_count: 1,
            threads: args.threads,
            seed: args.seed,
            ..TrainConfig::default()
        };
        let out = Trainer::new(config, &vocab)?.train(&corpus)?;
        let rate = out.epochs[0].words_per_sec;
        let per_thread = rate / args.threads as f64;
        let sg = *sg_rate.get_or_insert(rate);
        eprintln!("{name:>14}: {rate:>10.0} tokens/s ({per_thread:.0} per thread, {:.2}x sg cost)", sg / rate);
        lines.push(format!("bench.{name}.tokens_per_sec={rate:.0}"));
        lines.push(format!("bench.{name}.tokens_per_sec_per_thread={per_thread:.0}"));
        lines.push(format!("bench.{name}.cost_vs_sg={:.3}", sg / rate));
    }
    let mut stdout = std::io::stdout().lock();
    for line in &lines {
        writeln!(stdout, "{line}")?;
    }
    if let Some(path) = &args.summary {
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        for line in &lines {
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        manifest.set_path("output.summary", path);
        manifest.write_next_to(path)?;
    }
    Ok(())
}
