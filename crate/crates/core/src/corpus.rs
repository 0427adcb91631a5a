//! Raw text ingestion: lowercasing, sentence splitting, length filtering,
//! sentence sampling and chunking of unstructured token streams.
//!
//! Sentences end at a run of `.`, `!` or `?` that is followed by whitespace
//! or by the end of the line; the terminating run itself is removed. A line
//! break always ends the current sentence. Tokens are whatever whitespace
//! splitting yields after lowercasing.

use std::collections::VecDeque;
use std::fmt;
use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

use crate::error::{Error, Result};

/// A tokenized sentence. Tokens never contain whitespace.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
}

impl Sentence {
    pub fn new(tokens: Vec<String>) -> Self {
        debug_assert!(tokens.iter().all(|t| !t.is_empty() && !t.contains(char::is_whitespace)));
        Sentence { tokens }
    }

    /// Parse a line of the persisted one-sentence-per-line format.
    pub fn from_line(line: &str) -> Self {
        Sentence {
            tokens: line.split_whitespace().map(str::to_owned).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, token) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(token)?;
        }
        Ok(())
    }
}

/// Counters collected while preprocessing. Token counts cover retained
/// sentences only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub total_tokens: u64,
    pub total_sentences: u64,
    pub sentences_dropped: u64,
    /// Invalid UTF-8 sequences replaced by U+FFFD.
    pub invalid_utf8: u64,
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Split one (already lowercased) line into sentences.
fn split_sentences(line: &str) -> Vec<Vec<String>> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for token in line.split_whitespace() {
        let stripped = token.trim_end_matches(is_terminal);
        if !stripped.is_empty() {
            current.push(stripped.to_owned());
        }
        if stripped.len() != token.len() {
            sentences.push(std::mem::take(&mut current));
        }
    }
    sentences.push(current);
    sentences.retain(|s| !s.is_empty());
    sentences
}

/// Decode bytes as UTF-8, replacing invalid sequences. Returns the number of
/// replacements made.
fn decode_lossy(bytes: &[u8], out: &mut String) -> u64 {
    out.clear();
    let mut invalid = 0;
    for chunk in bytes.utf8_chunks() {
        out.push_str(chunk.valid());
        if !chunk.invalid().is_empty() {
            out.push(char::REPLACEMENT_CHARACTER);
            invalid += 1;
        }
    }
    invalid
}

/// Streaming preprocessor over raw text lines.
///
/// Yields retained sentences; [`Preprocessor::stats`] reports the counters
/// accumulated so far.
pub struct Preprocessor<R> {
    reader: R,
    min_sentence_tokens: usize,
    pending: VecDeque<Sentence>,
    stats: CorpusStats,
    buf: Vec<u8>,
    line: String,
    done: bool,
}

impl<R: BufRead> Preprocessor<R> {
    pub fn new(reader: R, min_sentence_tokens: usize) -> Result<Self> {
        if min_sentence_tokens == 0 {
            return Err(Error::Config("min_sentence_tokens must be at least 1".into()));
        }
        Ok(Preprocessor {
            reader,
            min_sentence_tokens,
            pending: VecDeque::new(),
            stats: CorpusStats::default(),
            buf: Vec::new(),
            line: String::new(),
            done: false,
        })
    }

    pub fn stats(&self) -> CorpusStats {
        self.stats
    }

    fn fill(&mut self) -> io::Result<()> {
        while self.pending.is_empty() && !self.done {
            self.buf.clear();
            if self.reader.read_until(b'\n', &mut self.buf)? == 0 {
                self.done = true;
                break;
            }
            self.stats.invalid_utf8 += decode_lossy(&self.buf, &mut self.line);
            let lowered = self.line.to_lowercase();
            for tokens in split_sentences(&lowered) {
                if tokens.len() < self.min_sentence_tokens {
                    self.stats.sentences_dropped += 1;
                } else {
                    self.stats.total_sentences += 1;
                    self.stats.total_tokens += tokens.len() as u64;
                    self.pending.push_back(Sentence { tokens });
                }
            }
        }
        Ok(())
    }
}

impl<R: BufRead> Iterator for Preprocessor<R> {
    type Item = io::Result<Sentence>;

    fn next(&mut self) -> Option<Self::Item> {
        if let Err(e) = self.fill() {
            self.done = true;
            return Some(Err(e));
        }
        self.pending.pop_front().map(Ok)
    }
}

/// Preprocess a whole reader into memory.
pub fn preprocess<R: BufRead>(
    raw_lines: R,
    min_sentence_tokens: usize,
) -> Result<(Vec<Sentence>, CorpusStats)> {
    let mut pre = Preprocessor::new(raw_lines, min_sentence_tokens)?;
    let sentences = pre.by_ref().collect::<io::Result<Vec<_>>>()?;
    Ok((sentences, pre.stats()))
}

/// Keep each item independently with probability `rate`.
pub struct Sampled<I> {
    inner: I,
    rate: f64,
    rng: Pcg64Mcg,
}

impl<I: Iterator> Iterator for Sampled<I> {
    type Item = I::Item;

    fn next(&mut self) -> Option<I::Item> {
        loop {
            let item = self.inner.next()?;
            // One draw per item keeps the stream aligned for a given seed.
            if self.rng.gen_bool(self.rate) {
                return Some(item);
            }
        }
    }
}

pub fn sample_sentences<I: IntoIterator>(
    sentences: I,
    rate: f64,
    seed: u64,
) -> Result<Sampled<I::IntoIter>> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Config(format!("sample rate {rate} outside [0, 1]")));
    }
    Ok(Sampled {
        inner: sentences.into_iter(),
        rate,
        rng: Pcg64Mcg::seed_from_u64(seed),
    })
}

/// Group an unbroken token stream into pseudo-sentences of `max_len` tokens.
pub struct Chunks<I> {
    tokens: I,
    max_len: usize,
}

impl<I: Iterator<Item = String>> Iterator for Chunks<I> {
    type Item = Sentence;

    fn next(&mut self) -> Option<Sentence> {
        let tokens: Vec<String> = self.tokens.by_ref().take(self.max_len).collect();
        if tokens.is_empty() {
            None
        } else {
            Some(Sentence { tokens })
        }
    }
}

pub fn chunk_unstructured<I>(tokens: I, max_len: usize) -> Result<Chunks<I::IntoIter>>
where
    I: IntoIterator<Item = String>,
{
    if max_len == 0 {
        return Err(Error::Config("chunk length must be at least 1".into()));
    }
    Ok(Chunks {
        tokens: tokens.into_iter(),
        max_len,
    })
}

/// Lowercased whitespace tokens of a reader, ignoring line structure.
pub fn read_tokens<R: BufRead>(mut reader: R) -> impl Iterator<Item = io::Result<String>> {
    let mut pending: VecDeque<String> = VecDeque::new();
    let mut buf = Vec::new();
    let mut text = String::new();
    std::iter::from_fn(move || loop {
        if let Some(token) = pending.pop_front() {
            return Some(Ok(token));
        }
        buf.clear();
        // text8 is a single 100MB line; read in bounded pieces split on spaces.
        match io::Read::take(&mut reader, 1 << 20).read_until(b' ', &mut buf) {
            Ok(0) => return None,
            Ok(_) => {
                decode_lossy(&buf, &mut text);
                pending.extend(text.to_lowercase().split_whitespace().map(str::to_owned));
            }
            Err(e) => return Some(Err(e)),
        }
    })
}

/// Read the persisted one-sentence-per-line format. Blank lines are skipped.
pub fn read_sentences<R: BufRead>(reader: R) -> impl Iterator<Item = io::Result<Sentence>> {
    reader.lines().filter_map(|line| match line {
        Ok(line) => {
            let sentence = Sentence::from_line(&line);
            (!sentence.is_empty()).then_some(Ok(sentence))
        }
        Err(e) => Some(Err(e)),
    })
}

pub fn write_sentences<'a, W, I>(mut writer: W, sentences: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Sentence>,
{
    for sentence in sentences {
        writeln!(writer, "{sentence}")?;
    }
    writer.flush()
}
