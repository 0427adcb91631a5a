use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use anyhow::{Context, Result};
use csg_core::corpus::read_sentences;
use csg_core::eval::probe::write_probe_csv;
use csg_core::eval::ProbeSpec;
use csg_core::model::VectorFormat;
use csg_core::trainer::{Trainer, TrainingCorpus};
use csg_core::vocab::{Vocabulary, WordCounter};

use crate::error::usage;
use crate::manifest::{sha256_file, RunManifest};
use crate::settings::{TrainArgs, TrainSettings};
use crate::vectors;

fn open_corpus(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).map_err(|e| usage(format!("cannot open corpus {}: {e}", path.display())))?;
    Ok(BufReader::new(file))
}

fn load_vocab(settings: &TrainSettings) -> Result<Vocabulary> {
    let min_count = settings.config.min_count;
    if let Some(path) = &settings.read_vocab {
        let file = File::open(path).map_err(|e| usage(format!("cannot open vocabulary {}: {e}", path.display())))?;
        let vocab = Vocabulary::read(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
        let kept = vocab
            .words()
            .iter()
            .zip(vocab.counts())
            .filter(|&(_, &c)| c >= min_count)
            .map(|(w, &c)| (w.clone(), c));
        return Ok(Vocabulary::from_counts(kept)?);
    }
    let mut counter = WordCounter::default();
    for sentence in read_sentences(open_corpus(&settings.corpus)?) {
        counter.add(&sentence.context("reading corpus")?);
    }
    Ok(counter.finish(min_count)?)
}

pub fn run(args: TrainArgs) -> Result<()> {
    let settings = TrainSettings::resolve(args)?;
    let mut manifest = RunManifest::new("train");
    settings.record(&mut manifest);

    let vocab = load_vocab(&settings)?;
    let mut corpus = TrainingCorpus::default();
    for sentence in read_sentences(open_corpus(&settings.corpus)?) {
        corpus.push_sentence(&sentence.context("reading corpus")?, &vocab);
    }
    eprintln!(
        "vocabulary {} words, corpus {} sentences / {} in-vocabulary tokens",
        vocab.len(),
        corpus.num_sentences(),
        corpus.num_tokens()
    );
    manifest.set("corpus.sha256", sha256_file(&settings.corpus)?);
    manifest.set("corpus.sentences", corpus.num_sentences());
    manifest.set("corpus.tokens", corpus.num_tokens());
    manifest.set("vocab.size", vocab.len());
    if let Some(path) = &settings.save_vocab {
        vocab.write(BufWriter::new(File::create(path)?))?;
        manifest.set_path("output.vocab", path);
    }

    let mut trainer = Trainer::new(settings.config.clone(), &vocab)?.on_epoch(|r, _| {
        let gamma = r.gamma.map_or("-".to_owned(), |g| format!("{g:.3}"));
        eprintln!(
            "epoch {} gamma {gamma} lr {:.6} {:.0} words/s ({:.1} s)",
            r.epoch, r.lr, r.words_per_sec, r.seconds
        );
    });
    if let Some((center, words)) = &settings.probe {
        trainer = trainer.with_probe(ProbeSpec::new(&vocab, center, words)?)?;
    }
    let out = trainer.train(&corpus).context("training")?;

    for r in &out.epochs {
        let key = format!("epoch.{}", r.epoch);
        manifest.set(format!("{key}.gamma"), r.gamma.map_or("random".to_owned(), |g| g.to_string()));
        manifest.set(format!("{key}.lr"), r.lr);
        manifest.set(format!("{key}.words"), r.words);
        manifest.set(format!("{key}.words_per_sec"), format!("{:.0}", r.words_per_sec));
    }

    let vectors = out.model.word_vectors(&vocab, settings.which);
    let format = vectors::format_for_output(&settings.output);
    vectors::save(&settings.output, &vectors, format)?;
    manifest.set_path("output.vectors", &settings.output);
    if settings.save_text && format == VectorFormat::Binary {
        let text = settings.output.with_extension("txt");
        vectors::save(&text, &vectors, VectorFormat::Text)?;
        manifest.set_path("output.vectors_text", &text);
    }
    if settings.probe.is_some() {
        let file = File::create(&settings.probe_output)
            .with_context(|| format!("creating {}", settings.probe_output.display()))?;
        write_probe_csv(BufWriter::new(file), &out.probe)?;
        manifest.set_path("output.probe", &settings.probe_output);
    }
    let path = manifest.write_next_to(&settings.output)?;
    eprintln!("wrote {} and {}", settings.output.display(), path.display());
    Ok(())
}
