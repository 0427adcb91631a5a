//! Embedding matrices, sigmoid evaluation and word2vec-format persistence.

mod io;
mod sigmoid;

pub use self::io::{load_vectors, save_vectors, VectorFormat};
pub use self::sigmoid::{
    exact_sigmoid, ExactSigmoid, Sigmoid, SigmoidTable, SIGMOID_CLAMP, SIGMOID_RESOLUTION,
};

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

use crate::error::{Error, Result};
use crate::linalg;
use crate::vocab::Vocabulary;

/// Which embedding matrix to read or persist.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    /// The word vectors (`v`).
    Input,
    /// The context/prediction vectors (`v'`).
    Output,
}

/// Input and output embedding matrices, both `vocab_size × dim`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    dim: usize,
    input: Vec<f32>,
    output: Vec<f32>,
}

impl Model {
    /// Input entries uniform in `[-0.5/dim, 0.5/dim]`, output entries zero.
    pub fn new(vocab_size: usize, dim: usize, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(vocab_size, dim)?;
        let mut rng = Pcg64Mcg::seed_from_u64(seed);
        for x in &mut model.input {
            *x = (rng.gen::<f32>() - 0.5) / dim as f32;
        }
        Ok(model)
    }

    pub fn zeros(vocab_size: usize, dim: usize) -> Result<Self> {
        if vocab_size == 0 || dim == 0 {
            return Err(Error::Config(format!(
                "model shape must be non-zero, got {vocab_size}x{dim}"
            )));
        }
        Ok(Model {
            dim,
            input: vec![0.0; vocab_size * dim],
            output: vec![0.0; vocab_size * dim],
        })
    }

    /// Assemble from existing row-major matrices.
    pub fn from_parts(dim: usize, input: Vec<f32>, output: Vec<f32>) -> Result<Self> {
        if dim == 0 || input.is_empty() || input.len() != output.len() || input.len() % dim != 0 {
            return Err(Error::Config("inconsistent model matrices".into()));
        }
        Ok(Model { dim, input, output })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_size(&self) -> usize {
        self.input.len() / self.dim
    }

    pub fn input_row(&self, id: u32) -> &[f32] {
        let start = id as usize * self.dim;
        &self.input[start..start + self.dim]
    }

    pub fn output_row(&self, id: u32) -> &[f32] {
        let start = id as usize * self.dim;
        &self.output[start..start + self.dim]
    }

    pub fn input_row_mut(&mut self, id: u32) -> &mut [f32] {
        let start = id as usize * self.dim;
        &mut self.input[start..start + self.dim]
    }

    pub fn output_row_mut(&mut self, id: u32) -> &mut [f32] {
        let start = id as usize * self.dim;
        &mut self.output[start..start + self.dim]
    }

    pub fn matrix(&self, which: Which) -> &[f32] {
        match which {
            Which::Input => &self.input,
            Which::Output => &self.output,
        }
    }

    pub(crate) fn matrices_mut(&mut self) -> (&mut [f32], &mut [f32]) {
        (&mut self.input, &mut self.output)
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|x| x.is_finite())
    }

    /// Copy one matrix out together with its vocabulary.
    pub fn word_vectors(&self, vocab: &Vocabulary, which: Which) -> WordVectors {
        assert_eq!(vocab.len(), self.vocab_size(), "vocabulary/model size mismatch");
        WordVectors::new(vocab.words().to_vec(), self.dim, self.matrix(which).to_vec())
            .expect("model rows match vocabulary")
    }
}

/// Words with one embedding each, as loaded from a vector file.
#[derive(Clone, Debug, PartialEq)]
pub struct WordVectors {
    words: Vec<String>,
    dim: usize,
    data: Vec<f32>,
    index: HashMap<String, usize>,
}

impl WordVectors {
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 || data.len() != words.len() * dim {
            return Err(Error::Config(format!(
                "{} words with dimension {dim} need {} values, got {}",
                words.len(),
                words.len() * dim,
                data.len()
            )));
        }
        // First occurrence wins for duplicated words.
        let mut index = HashMap::with_capacity(words.len());
        for (i, word) in words.iter().enumerate() {
            index.entry(word.clone()).or_insert(i);
        }
        Ok(WordVectors {
            words,
            dim,
            data,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn row(&self, idx: usize) -> &[f32] {
        &self.data[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index(word).map(|i| self.row(i))
    }

    /// Rows scaled to unit length (zero rows stay zero).
    pub fn normalized(&self) -> WordVectors {
        let mut out = self.clone();
        out.normalize();
        out
    }

    pub fn normalize(&mut self) {
        for row in self.data.chunks_exact_mut(self.dim) {
            linalg::normalize(row);
        }
    }

    /// Multiply every component by `factor`.
    pub fn scale(&mut self, factor: f32) {
        self.data.iter_mut().for_each(|x| *x *= factor);
    }
}
