//! SG, CBOW and contextual skip-gram training with negative sampling.
//!
//! Workers update the shared embedding matrices without locks; concurrent
//! writes to the same row may lose updates. Only single-threaded runs are
//! bit-reproducible.

mod config;
mod kernels;
mod schedule;

pub use self::config::{
    Architecture, FusionMethod, FusionSpec, GammaSchedule, TrainConfig, UpdateMode,
};
pub use self::kernels::{
    context_vector, score_ef, score_lf, score_sg, train_pair_cbow, train_pair_csg, train_pair_sg,
    MatrixRows, Rows, Scratch,
};
pub use self::schedule::{epoch_gamma, gamma_for, lr_schedule, LR_FLOOR};

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::eval::probe::{ProbeBuffer, ProbeRecord, ProbeSpec};
use crate::model::{ExactSigmoid, Model, SigmoidTable};
use crate::vocab::{NoiseTable, Subsampler, Vocabulary, NOISE_POWER, NOISE_TABLE_SIZE};

/// Words a worker processes between learning-rate refreshes.
const LR_UPDATE_INTERVAL: u64 = 10_000;

/// In-vocabulary word ids, sentence by sentence. Out-of-vocabulary tokens are
/// removed before windowing; sentences left empty are dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrainingCorpus {
    tokens: Vec<u32>,
    offsets: Vec<usize>,
}

impl TrainingCorpus {
    pub fn encode<'a, I>(sentences: I, vocab: &Vocabulary) -> Self
    where
        I: IntoIterator<Item = &'a Sentence>,
    {
        let mut corpus = TrainingCorpus::default();
        for sentence in sentences {
            corpus.push_sentence(sentence, vocab);
        }
        corpus
    }

    pub fn push_sentence(&mut self, sentence: &Sentence, vocab: &Vocabulary) {
        let ids = sentence.tokens.iter().filter_map(|t| vocab.id(t));
        self.push_ids(ids);
    }

    pub fn push_ids<I: IntoIterator<Item = u32>>(&mut self, ids: I) {
        if self.offsets.is_empty() {
            self.offsets.push(0);
        }
        self.tokens.extend(ids);
        if self.tokens.len() > *self.offsets.last().unwrap() {
            self.offsets.push(self.tokens.len());
        }
    }

    pub fn num_tokens(&self) -> usize {
        self.tokens.len()
    }

    pub fn num_sentences(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn sentence(&self, idx: usize) -> &[u32] {
        &self.tokens[self.offsets[idx]..self.offsets[idx + 1]]
    }

    pub fn sentences(&self) -> impl Iterator<Item = &[u32]> {
        (0..self.num_sentences()).map(|i| self.sentence(i))
    }

    /// Contiguous sentence ranges with roughly equal token counts.
    pub fn partition(&self, parts: usize) -> Vec<Range<usize>> {
        let parts = parts.max(1);
        let n = self.num_sentences();
        let total = self.num_tokens();
        let mut ranges = Vec::with_capacity(parts);
        let mut start = 0;
        for part in 1..=parts {
            let end = if part == parts {
                n
            } else {
                let goal = total * part / parts;
                // First sentence boundary at or after the goal token offset.
                self.offsets[1..].partition_point(|&off| off < goal).min(n).max(start)
            };
            ranges.push(start..end);
            start = end;
        }
        ranges
    }
}

/// Row view into a matrix shared by all workers.
///
/// Rows handed out by different copies may alias across threads; this is the
/// lock-free training contract. Within a thread, the input and output
/// matrices are distinct allocations and each borrow ends before the next
/// row of the same matrix is taken.
#[derive(Clone, Copy)]
struct SharedRows {
    ptr: *mut f32,
    rows: usize,
    dim: usize,
}

unsafe impl Send for SharedRows {}
unsafe impl Sync for SharedRows {}

impl SharedRows {
    /// Zero rows; every access panics until a real view replaces it.
    fn dangling(dim: usize) -> Self {
        SharedRows {
            ptr: std::ptr::NonNull::dangling().as_ptr(),
            rows: 0,
            dim,
        }
    }

    fn new(data: &mut [f32], dim: usize) -> Self {
        SharedRows {
            ptr: data.as_mut_ptr(),
            rows: data.len() / dim,
            dim,
        }
    }
}

impl Rows for SharedRows {
    #[inline]
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn row(&self, id: u32) -> &[f32] {
        assert!((id as usize) < self.rows);
        unsafe { std::slice::from_raw_parts(self.ptr.add(id as usize * self.dim), self.dim) }
    }

    #[inline]
    fn row_mut(&mut self, id: u32) -> &mut [f32] {
        assert!((id as usize) < self.rows);
        unsafe { std::slice::from_raw_parts_mut(self.ptr.add(id as usize * self.dim), self.dim) }
    }
}

/// Progress summary emitted at the end of every epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    /// Fusion weight used throughout the epoch; `None` for non-contextual
    /// models and the per-window random schedule.
    pub gamma: Option<f32>,
    /// Learning rate in effect when the epoch finished.
    pub lr: f32,
    pub words: u64,
    pub seconds: f64,
    pub words_per_sec: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub model: Model,
    pub epochs: Vec<EpochReport>,
    pub probe: Vec<ProbeRecord>,
}

/// Configured training run over one vocabulary.
pub struct Trainer<'a> {
    config: TrainConfig,
    vocab: &'a Vocabulary,
    probe: Option<ProbeSpec>,
    noise_table_size: usize,
    on_epoch: Option<Box<dyn FnMut(&EpochReport, &Model) + 'a>>,
}

impl<'a> Trainer<'a> {
    pub fn new(config: TrainConfig, vocab: &'a Vocabulary) -> Result<Self> {
        config.validate()?;
        if vocab.is_empty() {
            return Err(Error::EmptyVocabulary {
                min_count: config.min_count,
            });
        }
        Ok(Trainer {
            config,
            vocab,
            probe: None,
            noise_table_size: NOISE_TABLE_SIZE,
            on_epoch: None,
        })
    }

    pub fn with_probe(mut self, probe: ProbeSpec) -> Result<Self> {
        if self.config.architecture == Architecture::Cbow {
            return Err(Error::Config("the prediction probe needs a skip-gram architecture".into()));
        }
        self.probe = Some(probe);
        Ok(self)
    }

    pub fn with_noise_table_size(mut self, size: usize) -> Self {
        self.noise_table_size = size;
        self
    }

    /// Called after every epoch with its report and the model as it stands.
    pub fn on_epoch<F: FnMut(&EpochReport, &Model) + 'a>(mut self, callback: F) -> Self {
        self.on_epoch = Some(Box::new(callback));
        self
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// Train a freshly initialized model.
    pub fn train(self, corpus: &TrainingCorpus) -> Result<TrainOutput> {
        let model = Model::new(self.vocab.len(), self.config.dim, self.config.seed)?;
        self.train_model(model, corpus)
    }

    /// Continue training `model`, whose shape must match the vocabulary.
    pub fn train_model(mut self, mut model: Model, corpus: &TrainingCorpus) -> Result<TrainOutput> {
        let cfg = &self.config;
        if corpus.num_tokens() == 0 {
            return Err(Error::EmptyCorpus);
        }
        if model.vocab_size() != self.vocab.len() || model.dim() != cfg.dim {
            return Err(Error::Config("model shape does not match vocabulary/config".into()));
        }
        let noise = NoiseTable::new(self.vocab, NOISE_POWER, self.noise_table_size)?;
        let subsampler = cfg.subsample.map(|t| Subsampler::new(self.vocab, t));
        let sigmoid = SigmoidTable::default();
        let shared = Shared {
            config: cfg,
            noise: &noise,
            sigmoid: &sigmoid,
            subsampler: subsampler.as_ref(),
            probe: self.probe.as_ref(),
            words_done: AtomicU64::new(0),
            words_total: cfg.epochs as u64 * corpus.num_tokens() as u64,
        };

        let dim = cfg.dim;
        let ranges = corpus.partition(cfg.threads);
        let mut workers: Vec<Worker> = (0..ranges.len()).map(|idx| Worker::new(&shared, idx)).collect();

        let mut reports = Vec::with_capacity(cfg.epochs);
        let mut probe_records = Vec::new();
        for epoch in 1..=cfg.epochs {
            // Fresh views each epoch; the model is borrowed immutably again
            // once the workers are idle.
            let (input, output) = model.matrices_mut();
            let (input, output) = (SharedRows::new(input, dim), SharedRows::new(output, dim));
            for worker in &mut workers {
                worker.input = input;
                worker.output = output;
            }
            let watch = Stopwatch::start();
            let words: u64 = if workers.len() == 1 {
                workers[0].run_epoch(&shared, corpus, ranges[0].clone(), epoch)
            } else {
                run_parallel(&shared, &mut workers, corpus, &ranges, epoch)
            };
            let seconds = watch.seconds();

            if let Some(spec) = self.probe.as_ref() {
                let mut merged = spec.buffer();
                for worker in &mut workers {
                    if let Some(buf) = worker.probe.as_mut() {
                        merged.merge(buf);
                        buf.clear();
                    }
                }
                probe_records.extend(spec.records(epoch, &merged));
            }

            if !model.is_finite() {
                return Err(Error::NonFinite { epoch });
            }

            let gamma = match cfg.architecture {
                Architecture::Contextual(fusion) => epoch_gamma(fusion.schedule, epoch, cfg.epochs),
                _ => None,
            };
            let report = EpochReport {
                epoch,
                gamma,
                lr: lr_schedule(
                    cfg.initial_lr,
                    shared.words_done.load(Ordering::Relaxed),
                    shared.words_total,
                ),
                words,
                seconds,
                words_per_sec: if seconds > 0.0 { words as f64 / seconds } else { 0.0 },
            };
            if let Some(callback) = self.on_epoch.as_mut() {
                callback(&report, &model);
            }
            reports.push(report);
        }
        drop(workers);

        Ok(TrainOutput {
            model,
            epochs: reports,
            probe: probe_records,
        })
    }
}

/// Train with default hooks and return only the model.
pub fn train(corpus: &TrainingCorpus, vocab: &Vocabulary, config: &TrainConfig) -> Result<Model> {
    Ok(Trainer::new(config.clone(), vocab)?.train(corpus)?.model)
}

#[cfg(not(target_arch = "wasm32"))]
fn run_parallel(
    shared: &Shared,
    workers: &mut [Worker],
    corpus: &TrainingCorpus,
    ranges: &[Range<usize>],
    epoch: usize,
) -> u64 {
    std::thread::scope(|scope| {
        let handles: Vec<_> = workers
            .iter_mut()
            .zip(ranges)
            .map(|(worker, range)| {
                let range = range.clone();
                scope.spawn(move || worker.run_epoch(shared, corpus, range, epoch))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("training worker panicked")).sum()
    })
}

#[cfg(target_arch = "wasm32")]
fn run_parallel(
    shared: &Shared,
    workers: &mut [Worker],
    corpus: &TrainingCorpus,
    ranges: &[Range<usize>],
    epoch: usize,
) -> u64 {
    workers
        .iter_mut()
        .zip(ranges)
        .map(|(worker, range)| worker.run_epoch(shared, corpus, range.clone(), epoch))
        .sum()
}

struct Shared<'a> {
    config: &'a TrainConfig,
    noise: &'a NoiseTable,
    sigmoid: &'a SigmoidTable,
    subsampler: Option<&'a Subsampler>,
    probe: Option<&'a ProbeSpec>,
    words_done: AtomicU64,
    words_total: u64,
}

struct Worker {
    input: SharedRows,
    output: SharedRows,
    rng: Pcg64Mcg,
    scratch: Scratch,
    context: Vec<f32>,
    pair_context: Vec<f32>,
    samples: Vec<u32>,
    context_words: Vec<u32>,
    sentence: Vec<u32>,
    probe: Option<ProbeBuffer>,
    lr: f32,
}

impl Worker {
    fn new(shared: &Shared, idx: usize) -> Self {
        let dim = shared.config.dim;
        let seed = shared.config.seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Worker {
            input: SharedRows::dangling(dim),
            output: SharedRows::dangling(dim),
            rng: Pcg64Mcg::seed_from_u64(seed),
            scratch: Scratch::new(dim),
            context: vec![0.0; dim],
            pair_context: vec![0.0; dim],
            samples: Vec::with_capacity(shared.config.negatives + 1),
            context_words: Vec::with_capacity(2 * shared.config.window),
            sentence: Vec::new(),
            probe: shared.probe.map(ProbeSpec::buffer),
            lr: shared.config.initial_lr,
        }
    }

    fn run_epoch(
        &mut self,
        shared: &Shared,
        corpus: &TrainingCorpus,
        range: Range<usize>,
        epoch: usize,
    ) -> u64 {
        let cfg = shared.config;
        let mut words = 0u64;
        let mut unreported = 0u64;
        self.lr = lr_schedule(
            cfg.initial_lr,
            shared.words_done.load(Ordering::Relaxed),
            shared.words_total,
        );
        for idx in range {
            let raw = corpus.sentence(idx);
            words += raw.len() as u64;
            unreported += raw.len() as u64;
            if unreported >= LR_UPDATE_INTERVAL {
                let done = shared.words_done.fetch_add(unreported, Ordering::Relaxed) + unreported;
                unreported = 0;
                self.lr = lr_schedule(cfg.initial_lr, done, shared.words_total);
            }

            self.sentence.clear();
            match shared.subsampler {
                Some(sub) => {
                    let rng = &mut self.rng;
                    self.sentence.extend(raw.iter().copied().filter(|&w| sub.keep(w, rng)));
                }
                None => self.sentence.extend_from_slice(raw),
            }
            let sentence = std::mem::take(&mut self.sentence);
            match cfg.architecture {
                Architecture::SkipGram => self.skip_gram(shared, &sentence),
                Architecture::Contextual(fusion) => self.contextual(shared, &sentence, fusion, epoch),
                Architecture::Cbow => self.cbow(shared, &sentence),
            }
            self.sentence = sentence;
        }
        shared.words_done.fetch_add(unreported, Ordering::Relaxed);
        words
    }

    #[inline]
    fn window(&mut self, cfg: &TrainConfig) -> usize {
        if cfg.dynamic_window {
            self.rng.gen_range(1..=cfg.window as u64) as usize
        } else {
            cfg.window
        }
    }

    #[inline]
    fn draw_samples(&mut self, shared: &Shared, target: u32) {
        self.samples.clear();
        self.push_samples(shared, target);
    }

    /// Appends `target` and its negatives to `samples`.
    #[inline]
    fn push_samples(&mut self, shared: &Shared, target: u32) {
        self.samples.push(target);
        for _ in 0..shared.config.negatives {
            let negative = shared.noise.sample_excluding(target, &mut self.rng);
            self.samples.push(negative);
        }
    }

    /// Draws the samples for every neighbor of one window up front, so the
    /// noise-table lookups are independent loads rather than a chain.
    fn draw_window(&mut self, shared: &Shared, sentence: &[u32], pos: usize, window: usize) {
        self.samples.clear();
        let neighbors = pos.saturating_sub(window)..(pos + window + 1).min(sentence.len());
        for tpos in neighbors.filter(|&t| t != pos) {
            self.push_samples(shared, sentence[tpos]);
        }
    }

    fn skip_gram(&mut self, shared: &Shared, sentence: &[u32]) {
        for pos in 0..sentence.len() {
            let window = self.window(shared.config);
            let center = sentence[pos];
            let probing = shared.probe.filter(|p| p.center() == center);
            self.draw_window(shared, sentence, pos, window);
            let per_target = shared.config.negatives + 1;
            for chunk in 0..self.samples.len() / per_target {
                let samples = &self.samples[chunk * per_target..(chunk + 1) * per_target];
                let target = samples[0];
                if let Some(slot) = probing.and_then(|p| p.slot(target)) {
                    let score =
                        score_sg(&ExactSigmoid, self.input.row(center), self.output.row(target), 1.0);
                    self.probe.as_mut().unwrap().record(slot, score as f64);
                }
                let center_row = self.input.row_mut(center);
                train_pair_sg(
                    shared.sigmoid,
                    center_row,
                    &mut self.output,
                    samples,
                    self.lr,
                    &mut self.scratch,
                );
            }
        }
    }

    fn contextual(&mut self, shared: &Shared, sentence: &[u32], fusion: FusionSpec, epoch: usize) {
        let cfg = shared.config;
        for pos in 0..sentence.len() {
            let window = self.window(cfg);
            let center = sentence[pos];
            context_vector(&self.input, sentence, pos, window, &mut self.context);
            let gamma = gamma_for(fusion.schedule, epoch, cfg.epochs, &mut self.rng);
            let probing = shared.probe.filter(|p| p.center() == center);

            self.draw_window(shared, sentence, pos, window);
            let per_target = cfg.negatives + 1;
            for chunk in 0..self.samples.len() / per_target {
                let samples = &self.samples[chunk * per_target..(chunk + 1) * per_target];
                let target = samples[0];
                let context: &[f32] = if cfg.exclude_target_from_context {
                    let target_row = self.input.row(target);
                    for ((out, c), t) in self.pair_context.iter_mut().zip(&self.context).zip(target_row) {
                        *out = c - t;
                    }
                    &self.pair_context
                } else {
                    &self.context
                };
                if let Some(slot) = probing.and_then(|p| p.slot(target)) {
                    let (center_row, out_row) = (self.input.row(center), self.output.row(target));
                    let score = match fusion.method {
                        FusionMethod::Early => {
                            score_ef(&ExactSigmoid, context, center_row, out_row, gamma, 1.0)
                        }
                        FusionMethod::Late => {
                            score_lf(&ExactSigmoid, context, center_row, out_row, gamma, 1.0)
                        }
                    };
                    self.probe.as_mut().unwrap().record(slot, score as f64);
                }
                let center_row = self.input.row_mut(center);
                train_pair_csg(
                    shared.sigmoid,
                    fusion.method,
                    cfg.update_mode,
                    center_row,
                    context,
                    &mut self.output,
                    samples,
                    gamma,
                    self.lr,
                    &mut self.scratch,
                );
            }
        }
    }

    fn cbow(&mut self, shared: &Shared, sentence: &[u32]) {
        for pos in 0..sentence.len() {
            let window = self.window(shared.config);
            let lo = pos.saturating_sub(window);
            let hi = (pos + window + 1).min(sentence.len());
            self.context_words.clear();
            self.context_words
                .extend((lo..hi).filter(|&p| p != pos).map(|p| sentence[p]));
            if self.context_words.is_empty() {
                continue;
            }
            context_vector(&self.input, sentence, pos, window, &mut self.context);
            let scale = 1.0 / self.context_words.len() as f32;
            self.context.iter_mut().for_each(|x| *x *= scale);
            self.draw_samples(shared, sentence[pos]);
            train_pair_cbow(
                shared.sigmoid,
                &mut self.input,
                &self.context_words,
                &self.context,
                &mut self.output,
                &self.samples,
                self.lr,
                &mut self.scratch,
            );
        }
    }
}

struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    #[cfg(not(target_arch = "wasm32"))]
    fn seconds(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    #[cfg(target_arch = "wasm32")]
    fn seconds(&self) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_corpus() -> (Vocabulary, TrainingCorpus) {
        let text = "the quick brown fox jumps over the lazy dog\n\
                    the dog sleeps while the fox runs\n\
                    a quick dog and a lazy fox";
        let sentences: Vec<Sentence> = text.lines().map(Sentence::from_line).collect();
        let vocab = crate::vocab::build_vocab(&sentences, 1).unwrap();
        let corpus = TrainingCorpus::encode(&sentences, &vocab);
        (vocab, corpus)
    }

    fn small_config(architecture: Architecture) -> TrainConfig {
        TrainConfig {
            architecture,
            dim: 8,
            window: 2,
            negatives: 3,
            epochs: 3,
            min_count: 1,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn encode_drops_oov_and_empty_sentences() {
        let vocab = Vocabulary::from_counts([("a".to_owned(), 2), ("b".to_owned(), 1)]).unwrap();
        let sentences = ["a x b", "x y", "b"].map(Sentence::from_line);
        let corpus = TrainingCorpus::encode(&sentences, &vocab);
        assert_eq!(corpus.num_sentences(), 2);
        assert_eq!(corpus.sentence(0), [0, 1]);
        assert_eq!(corpus.sentence(1), [1]);
    }

    #[test]
    fn partition_covers_all_sentences() {
        let mut corpus = TrainingCorpus::default();
        for len in [5, 1, 1, 1, 9, 2, 3] {
            corpus.push_ids(std::iter::repeat(0).take(len));
        }
        for parts in 1..=9 {
            let ranges = corpus.partition(parts);
            assert_eq!(ranges.len(), parts);
            assert_eq!(ranges[0].start, 0);
            assert_eq!(ranges.last().unwrap().end, corpus.num_sentences());
            assert!(ranges.windows(2).all(|w| w[0].end == w[1].start));
        }
    }

    #[test]
    fn empty_corpus_rejected() {
        let (vocab, _) = toy_corpus();
        let err = Trainer::new(small_config(Architecture::SkipGram), &vocab)
            .unwrap()
            .with_noise_table_size(1000)
            .train(&TrainingCorpus::default());
        assert!(matches!(err, Err(Error::EmptyCorpus)));
    }

    #[test]
    fn single_thread_runs_are_reproducible() {
        let (vocab, corpus) = toy_corpus();
        let spec = FusionSpec::new(FusionMethod::Late, GammaSchedule::RandomUniform).unwrap();
        for arch in [Architecture::SkipGram, Architecture::Cbow, Architecture::Contextual(spec)] {
            let run = || {
                Trainer::new(small_config(arch), &vocab)
                    .unwrap()
                    .with_noise_table_size(1000)
                    .train(&corpus)
                    .unwrap()
                    .model
            };
            assert_eq!(run(), run(), "{arch:?}");
        }
    }

    #[test]
    fn epoch_reports() {
        let (vocab, corpus) = toy_corpus();
        let spec = FusionSpec::new(FusionMethod::Early, GammaSchedule::LinearUp).unwrap();
        let mut seen = Vec::new();
        let out = Trainer::new(small_config(Architecture::Contextual(spec)), &vocab)
            .unwrap()
            .with_noise_table_size(1000)
            .on_epoch(|r, _| seen.push(r.epoch))
            .train(&corpus)
            .unwrap();
        assert_eq!(seen, [1, 2, 3]);
        let gammas: Vec<_> = out.epochs.iter().map(|r| r.gamma).collect();
        assert_eq!(gammas, [Some(0.0), Some(0.5), Some(1.0)]);
        assert!(out.epochs.iter().all(|r| r.words == corpus.num_tokens() as u64));
        assert!(out.epochs.iter().all(|r| r.lr >= 0.025 * LR_FLOOR && r.lr <= 0.025));
    }

    #[test]
    fn multithreaded_training_stays_finite() {
        let (vocab, corpus) = toy_corpus();
        let config = TrainConfig {
            threads: 3,
            ..small_config(Architecture::SkipGram)
        };
        let model = Trainer::new(config, &vocab)
            .unwrap()
            .with_noise_table_size(1000)
            .train(&corpus)
            .unwrap()
            .model;
        assert!(model.is_finite());
    }

    #[test]
    fn cbow_probe_rejected() {
        let (vocab, _) = toy_corpus();
        let probe = ProbeSpec::new(&vocab, "fox", &["the"]).unwrap();
        assert!(Trainer::new(small_config(Architecture::Cbow), &vocab)
            .unwrap()
            .with_probe(probe)
            .is_err());
    }
}
