//! Parsers for word-similarity and analogy benchmark files. All words are
//! lowercased on load.

use std::io::BufRead;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityPair {
    pub word_a: String,
    pub word_b: String,
    pub human_score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityDataset {
    pub name: String,
    pub pairs: Vec<SimilarityPair>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimilarityFormat {
    /// Tab-separated; a header naming a `SimLex999` column selects it,
    /// otherwise the third column is the score.
    SimLex,
    /// Tab- or comma-separated `word1 word2 score`; header rows are skipped.
    WordSim,
    /// Space-separated triples, optional `-n`/`-v`/`-j` POS suffixes.
    Men,
}

impl SimilarityDataset {
    pub fn new(name: impl Into<String>, pairs: Vec<SimilarityPair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "similarity dataset has no pairs".into(),
            });
        }
        if let Some(p) = pairs.iter().find(|p| !p.human_score.is_finite()) {
            return Err(Error::Parse {
                line: 0,
                message: format!("non-finite score for ({}, {})", p.word_a, p.word_b),
            });
        }
        Ok(SimilarityDataset {
            name: name.into(),
            pairs,
        })
    }

    pub fn parse<R: BufRead>(name: &str, reader: R, format: SimilarityFormat) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut score_column = 2;
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = match format {
                SimilarityFormat::SimLex => line.split('\t').map(str::trim).collect(),
                SimilarityFormat::WordSim => line.split(['\t', ',']).map(str::trim).collect(),
                SimilarityFormat::Men => line.split_whitespace().collect(),
            };
            if format == SimilarityFormat::SimLex {
                if let Some(col) = fields.iter().position(|f| f.eq_ignore_ascii_case("simlex999")) {
                    score_column = col;
                    continue;
                }
            }
            let score = fields.get(score_column).and_then(|f| f.parse::<f64>().ok());
            let Some(score) = score else {
                if pairs.is_empty() {
                    // Column header.
                    continue;
                }
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected a score in column {}", score_column + 1),
                });
            };
            let word = |f: &str| {
                let w = f.to_lowercase();
                match format {
                    SimilarityFormat::Men => strip_pos_suffix(&w).to_owned(),
                    _ => w,
                }
            };
            pairs.push(SimilarityPair {
                word_a: word(fields[0]),
                word_b: word(fields[1]),
                human_score: score,
            });
        }
        Self::new(name, pairs)
    }
}

fn strip_pos_suffix(word: &str) -> &str {
    for suffix in ["-n", "-v", "-j"] {
        if let Some(stripped) = word.strip_suffix(suffix) {
            if !stripped.is_empty() {
                return stripped;
            }
        }
    }
    word
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectionKind {
    Semantic,
    Syntactic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalogySection {
    pub name: String,
    pub kind: SectionKind,
    /// `a : b :: c : d`
    pub questions: Vec<[String; 4]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalogyDataset {
    pub name: String,
    pub sections: Vec<AnalogySection>,
}

impl AnalogyDataset {
    pub fn num_questions(&self) -> usize {
        self.sections.iter().map(|s| s.questions.len()).sum()
    }

    /// Google format: `: section` headers; sections named `gram*` are
    /// syntactic, the rest semantic.
    pub fn parse_google<R: BufRead>(name: &str, reader: R) -> Result<Self> {
        let mut sections: Vec<AnalogySection> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(section) = line.strip_prefix(':') {
                let section = section.trim().to_owned();
                let kind = if section.starts_with("gram") {
                    SectionKind::Syntactic
                } else {
                    SectionKind::Semantic
                };
                sections.push(AnalogySection {
                    name: section,
                    kind,
                    questions: Vec::new(),
                });
                continue;
            }
            let question = parse_question(line, idx + 1)?;
            match sections.last_mut() {
                Some(section) => section.questions.push(question),
                None => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        message: "question before the first `: section` header".into(),
                    })
                }
            }
        }
        Ok(AnalogyDataset {
            name: name.to_owned(),
            sections,
        })
    }

    /// MSR format: four words per line (a stray `#` separator is ignored),
    /// all syntactic.
    pub fn parse_msr<R: BufRead>(name: &str, reader: R) -> Result<Self> {
        let mut questions = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            questions.push(parse_question(&line, idx + 1)?);
        }
        Ok(AnalogyDataset {
            name: name.to_owned(),
            sections: vec![AnalogySection {
                name: name.to_owned(),
                kind: SectionKind::Syntactic,
                questions,
            }],
        })
    }
}

fn parse_question(line: &str, line_no: usize) -> Result<[String; 4]> {
    let words: Vec<String> = line
        .split_whitespace()
        .filter(|w| *w != "#")
        .map(str::to_lowercase)
        .collect();
    <[String; 4]>::try_from(words).map_err(|words| Error::Parse {
        line: line_no,
        message: format!("expected 4 words, found {}", words.len()),
    })
}
