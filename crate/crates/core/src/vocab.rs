//! Vocabulary construction and the unigram noise distribution used for
//! negative sampling.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::Rng;

use crate::corpus::Sentence;
use crate::error::{Error, Result};

/// Default number of entries in the noise table.
pub const NOISE_TABLE_SIZE: usize = 10_000_000;

/// Default exponent applied to word counts in the noise distribution.
pub const NOISE_POWER: f64 = 0.75;

/// Redraws allowed when a negative sample hits the excluded word.
pub const NEGATIVE_RETRIES: usize = 16;

/// Word list sorted by descending frequency (ties lexicographic) with a
/// reverse index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    ids: HashMap<String, u32>,
    total_count: u64,
}

impl Vocabulary {
    /// Build from `(word, count)` pairs. Order of the input is irrelevant.
    pub fn from_counts<I>(counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut entries: Vec<(String, u64)> = counts.into_iter().collect();
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut ids = HashMap::with_capacity(entries.len());
        for (idx, (word, _)) in entries.iter().enumerate() {
            if ids.insert(word.clone(), idx as u32).is_some() {
                return Err(Error::Config(format!("duplicate vocabulary word `{word}`")));
            }
        }
        let total_count = entries.iter().map(|e| e.1).sum();
        let (words, counts) = entries.into_iter().unzip();
        Ok(Vocabulary {
            words,
            counts,
            ids,
            total_count,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    /// Persist as `word<TAB>count` lines in index order.
    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        for (word, count) in self.words.iter().zip(&self.counts) {
            writeln!(writer, "{word}\t{count}")?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut counts = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: &str| Error::Parse {
                line: idx + 1,
                message: message.to_owned(),
            };
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected word<TAB>count"))?;
            let count = count
                .trim()
                .parse()
                .map_err(|_| parse_err("count is not an integer"))?;
            counts.push((word.to_owned(), count));
        }
        Self::from_counts(counts)
    }
}

/// Count tokens and keep words occurring at least `min_count` times.
pub fn build_vocab<'a, I>(sentences: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a Sentence>,
{
    let mut counter = WordCounter::default();
    for sentence in sentences {
        counter.add(sentence);
    }
    counter.finish(min_count)
}

/// Incremental word counter for streamed corpora.
#[derive(Debug, Default)]
pub struct WordCounter {
    counts: HashMap<String, u64>,
}

impl WordCounter {
    pub fn add(&mut self, sentence: &Sentence) {
        for token in &sentence.tokens {
            match self.counts.get_mut(token.as_str()) {
                Some(count) => *count += 1,
                None => {
                    self.counts.insert(token.clone(), 1);
                }
            }
        }
    }

    pub fn finish(self, min_count: u64) -> Result<Vocabulary> {
        if min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        let vocab = Vocabulary::from_counts(
            self.counts.into_iter().filter(|&(_, count)| count >= min_count),
        )?;
        if vocab.is_empty() {
            return Err(Error::EmptyVocabulary { min_count });
        }
        Ok(vocab)
    }
}

/// Flat table of word indices; uniform draws over the table follow
/// `count^power / Σ count^power`.
#[derive(Clone, Debug)]
pub struct NoiseTable {
    table: Vec<u32>,
    power: f64,
}

impl NoiseTable {
    pub fn new(vocab: &Vocabulary, power: f64, table_size: usize) -> Result<Self> {
        if table_size < vocab.len() {
            return Err(Error::NoiseTableTooSmall {
                size: table_size,
                vocab: vocab.len(),
            });
        }
        if !(power > 0.0) {
            return Err(Error::Config(format!("noise power must be positive, got {power}")));
        }
        if vocab.is_empty() {
            return Err(Error::EmptyVocabulary { min_count: 0 });
        }

        let weights: Vec<f64> = vocab.counts().iter().map(|&c| (c as f64).powf(power)).collect();
        let norm: f64 = weights.iter().sum();

        // Cumulative rounding: each word receives its exact share ±1 and the
        // shares sum to exactly `table_size`.
        let mut table = Vec::with_capacity(table_size);
        let mut cumulative = 0.0;
        for (idx, weight) in weights.iter().enumerate() {
            cumulative += weight;
            let end = if idx + 1 == weights.len() {
                table_size
            } else {
                ((cumulative / norm) * table_size as f64).round() as usize
            };
            let end = end.clamp(table.len(), table_size);
            table.resize(end, idx as u32);
        }
        debug_assert_eq!(table.len(), table_size);
        Ok(NoiseTable { table, power })
    }

    pub fn with_defaults(vocab: &Vocabulary) -> Result<Self> {
        Self::new(vocab, NOISE_POWER, NOISE_TABLE_SIZE)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn entries(&self) -> &[u32] {
        &self.table
    }

    /// A single draw, uniform over table entries.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        // u64 keeps the stream identical on 32-bit targets.
        self.table[rng.gen_range(0..self.table.len() as u64) as usize]
    }

    /// A draw that avoids `exclude`, giving up after [`NEGATIVE_RETRIES`]
    /// redraws and keeping the last one.
    #[inline]
    pub fn sample_excluding<R: Rng + ?Sized>(&self, exclude: u32, rng: &mut R) -> u32 {
        let mut word = self.sample(rng);
        for _ in 0..NEGATIVE_RETRIES {
            if word != exclude {
                break;
            }
            word = self.sample(rng);
        }
        word
    }

    /// Draw `k` negatives avoiding `exclude`.
    pub fn draw_negatives<R: Rng + ?Sized>(&self, k: usize, exclude: u32, rng: &mut R) -> Vec<u32> {
        (0..k).map(|_| self.sample_excluding(exclude, rng)).collect()
    }
}

/// Frequent-word subsampling: keep probability `min(1, sqrt(t/f) + t/f)`,
/// `f` being the word's share of all corpus tokens.
#[derive(Clone, Debug)]
pub struct Subsampler {
    keep: Vec<f32>,
}

impl Subsampler {
    pub fn new(vocab: &Vocabulary, threshold: f64) -> Self {
        let total = vocab.total_count() as f64;
        let keep = vocab
            .counts()
            .iter()
            .map(|&count| {
                let ratio = threshold / (count as f64 / total);
                (ratio.sqrt() + ratio).min(1.0) as f32
            })
            .collect();
        Subsampler { keep }
    }

    pub fn keep_probability(&self, id: u32) -> f32 {
        self.keep[id as usize]
    }

    #[inline]
    pub fn keep<R: Rng + ?Sized>(&self, id: u32, rng: &mut R) -> bool {
        let p = self.keep[id as usize];
        p >= 1.0 || rng.gen::<f32>() < p
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_pcg::Pcg64Mcg;

    use super::*;

    fn sentences(text: &str) -> Vec<Sentence> {
        text.lines().map(Sentence::from_line).collect()
    }

    fn vocab_of(counts: &[(&str, u64)]) -> Vocabulary {
        Vocabulary::from_counts(counts.iter().map(|&(w, c)| (w.to_owned(), c))).unwrap()
    }

    #[test]
    fn min_count_filters() {
        let vocab = build_vocab(&sentences("a a a b"), 2).unwrap();
        assert_eq!(vocab.len(), 1);
        assert_eq!(vocab.id("a"), Some(0));
        assert_eq!(vocab.count(0), 3);
        assert_eq!(vocab.id("b"), None);
    }

    #[test]
    fn sorted_by_frequency_then_word() {
        let vocab = build_vocab(&sentences("a b b"), 1).unwrap();
        assert_eq!(vocab.words(), ["b", "a"]);
        let vocab = build_vocab(&sentences("z y x y"), 1).unwrap();
        assert_eq!(vocab.words(), ["y", "x", "z"]);
        assert_eq!(vocab.total_count(), 4);
    }

    #[test]
    fn empty_vocab_is_an_error() {
        assert!(matches!(
            build_vocab(&sentences("a b c"), 2),
            Err(Error::EmptyVocabulary { min_count: 2 })
        ));
    }

    #[test]
    fn persistence_round_trip() {
        let vocab = build_vocab(&sentences("the cat the dog\nthe end"), 1).unwrap();
        let mut buf = Vec::new();
        vocab.write(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("the\t3\n"));
        assert_eq!(Vocabulary::read(&buf[..]).unwrap(), vocab);
        assert!(Vocabulary::read(&b"word 3\n"[..]).is_err());
    }

    #[test]
    fn noise_table_split_8_to_1() {
        let vocab = vocab_of(&[("a", 16), ("b", 1)]);
        let table = NoiseTable::new(&vocab, 0.75, 9).unwrap();
        let a = table.entries().iter().filter(|&&w| w == 0).count();
        assert_eq!((a, table.len() - a), (8, 1));
    }

    #[test]
    fn noise_table_single_word() {
        let vocab = vocab_of(&[("only", 3)]);
        let table = NoiseTable::new(&vocab, 0.75, 100).unwrap();
        assert!(table.entries().iter().all(|&w| w == 0));
        let mut rng = Pcg64Mcg::seed_from_u64(1);
        assert_eq!(table.draw_negatives(3, 0, &mut rng), [0, 0, 0]);
    }

    #[test]
    fn noise_table_uniform_counts() {
        let counts: Vec<(String, u64)> = (0..7).map(|i| (format!("w{i}"), 5)).collect();
        let vocab = Vocabulary::from_counts(counts).unwrap();
        let table = NoiseTable::new(&vocab, 0.75, 1000).unwrap();
        for id in 0..7 {
            let n = table.entries().iter().filter(|&&w| w == id).count() as f64;
            assert!((n - 1000.0 / 7.0).abs() <= 1.0, "word {id}: {n}");
        }
    }

    #[test]
    fn noise_table_rejects_small_size() {
        let vocab = vocab_of(&[("a", 2), ("b", 1)]);
        assert!(matches!(
            NoiseTable::new(&vocab, 0.75, 1),
            Err(Error::NoiseTableTooSmall { .. })
        ));
    }

    #[test]
    fn negative_frequencies_follow_table() {
        let vocab = vocab_of(&[("a", 16), ("b", 1)]);
        let table = NoiseTable::new(&vocab, 0.75, 9).unwrap();
        let mut rng = Pcg64Mcg::seed_from_u64(9);
        let mut hits = [0u64; 2];
        for _ in 0..100_000 {
            for w in table.draw_negatives(5, u32::MAX, &mut rng) {
                hits[w as usize] += 1;
            }
        }
        let ratio = hits[0] as f64 / hits[1] as f64;
        assert!((ratio / 8.0 - 1.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn negatives_are_deterministic_and_avoid_excluded() {
        let vocab = vocab_of(&[("a", 16), ("b", 1)]);
        let table = NoiseTable::new(&vocab, 0.75, 9).unwrap();
        let draw = |seed| table.draw_negatives(50, 0, &mut Pcg64Mcg::seed_from_u64(seed));
        assert_eq!(draw(3), draw(3));
        // P(17 consecutive hits of `a`) = (8/9)^17 ≈ 0.13 per draw, so most avoid it.
        let avoided = draw(3).iter().filter(|&&w| w == 1).count();
        assert!(avoided > 25, "{avoided}");
    }

    #[test]
    fn subsampling_keeps_rare_words() {
        let vocab = vocab_of(&[("the", 1_000_000), ("rare", 1)]);
        let sub = Subsampler::new(&vocab, 1e-3);
        assert_eq!(sub.keep_probability(1), 1.0);
        let f = 1_000_000.0 / 1_000_001.0;
        let expected = ((1e-3 / f) as f64).sqrt() + 1e-3 / f;
        assert!((sub.keep_probability(0) as f64 - expected).abs() < 1e-6);
    }
}
