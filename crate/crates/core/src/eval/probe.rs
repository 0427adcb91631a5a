//! Prediction-probability probe: tracks how well a fixed center word predicts
//! selected neighbors over the epochs.
//!
//! The trainer calls [`ProbeBuffer::record`] with the exact-σ score of each
//! positive pair whose center is the probed word, before that pair's update.
//! Buffers are per worker and merged once per epoch.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

#[derive(Clone, Debug)]
pub struct ProbeSpec {
    center: u32,
    center_word: String,
    tracked: Vec<String>,
    slots: HashMap<u32, usize>,
}

impl ProbeSpec {
    /// Tracked words missing from the vocabulary are kept and simply never
    /// observed.
    pub fn new<S: AsRef<str>>(vocab: &Vocabulary, center_word: &str, tracked: &[S]) -> Result<Self> {
        let center = vocab
            .id(center_word)
            .ok_or_else(|| Error::UnknownWord(center_word.to_owned()))?;
        let tracked: Vec<String> = tracked.iter().map(|w| w.as_ref().to_owned()).collect();
        let slots = tracked
            .iter()
            .enumerate()
            .filter_map(|(slot, word)| vocab.id(word).map(|id| (id, slot)))
            .collect();
        Ok(ProbeSpec {
            center,
            center_word: center_word.to_owned(),
            tracked,
            slots,
        })
    }

    pub fn center(&self) -> u32 {
        self.center
    }

    pub fn center_word(&self) -> &str {
        &self.center_word
    }

    pub fn tracked(&self) -> &[String] {
        &self.tracked
    }

    #[inline]
    pub fn slot(&self, target: u32) -> Option<usize> {
        self.slots.get(&target).copied()
    }

    pub fn buffer(&self) -> ProbeBuffer {
        ProbeBuffer {
            sums: vec![0.0; self.tracked.len()],
            counts: vec![0; self.tracked.len()],
        }
    }

    /// Summarize merged buffers for one epoch.
    pub fn records(&self, epoch: usize, buffer: &ProbeBuffer) -> Vec<ProbeRecord> {
        self.tracked
            .iter()
            .enumerate()
            .map(|(slot, word)| {
                let n = buffer.counts[slot];
                ProbeRecord {
                    epoch,
                    context_word: word.clone(),
                    mean_score_x100: (n > 0).then(|| 100.0 * buffer.sums[slot] / n as f64),
                    observations: n,
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeBuffer {
    sums: Vec<f64>,
    counts: Vec<u64>,
}

impl ProbeBuffer {
    #[inline]
    pub fn record(&mut self, slot: usize, score: f64) {
        self.sums[slot] += score;
        self.counts[slot] += 1;
    }

    pub fn merge(&mut self, other: &ProbeBuffer) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn clear(&mut self) {
        self.sums.fill(0.0);
        self.counts.fill(0);
    }
}

/// Mean positive score (×100) of one tracked word during one epoch. The mean
/// is absent when the pair was never observed.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRecord {
    pub epoch: usize,
    pub context_word: String,
    pub mean_score_x100: Option<f64>,
    pub observations: u64,
}

pub const PROBE_CSV_HEADER: &str = "epoch,word,mean_x100,n";

pub fn write_probe_csv<W: Write>(mut writer: W, records: &[ProbeRecord]) -> Result<()> {
    writeln!(writer, "{PROBE_CSV_HEADER}")?;
    for r in records {
        match r.mean_score_x100 {
            Some(mean) => writeln!(writer, "{},{},{:.2},{}", r.epoch, r.context_word, mean, r.observations)?,
            None => writeln!(writer, "{},{},,{}", r.epoch, r.context_word, r.observations)?,
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn read_probe_csv<R: BufRead>(reader: R) -> Result<Vec<ProbeRecord>> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if idx == 0 && line.trim() == PROBE_CSV_HEADER || line.trim().is_empty() {
            continue;
        }
        let err = |message: &str| Error::Parse {
            line: idx + 1,
            message: message.to_owned(),
        };
        let fields: Vec<&str> = line.split(',').collect();
        let [epoch, word, mean, n] = fields[..] else {
            return Err(err("expected epoch,word,mean_x100,n"));
        };
        records.push(ProbeRecord {
            epoch: epoch.parse().map_err(|_| err("bad epoch"))?,
            context_word: word.to_owned(),
            mean_score_x100: if mean.is_empty() {
                None
            } else {
                Some(mean.parse().map_err(|_| err("bad mean"))?)
            },
            observations: n.parse().map_err(|_| err("bad count"))?,
        });
    }
    Ok(records)
}
