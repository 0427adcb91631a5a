//! Word embeddings with the contextual skip-gram model.
//!
//! The contextual model predicts each neighbor from both the center word and
//! the summed input vectors of the surrounding window, blending the two with
//! a fusion weight `γ` either before the dot product (early fusion) or after
//! the sigmoid (late fusion). Plain skip-gram and CBOW are included as
//! baselines.
//!
//! A typical pipeline:
//!
//! ```no_run
//! use csg_core::corpus::{preprocess, Sentence};
//! use csg_core::trainer::{Architecture, FusionMethod, FusionSpec, GammaSchedule, TrainConfig, Trainer, TrainingCorpus};
//! use csg_core::vocab::build_vocab;
//!
//! # fn main() -> csg_core::Result<()> {
//! let raw = std::io::BufReader::new(std::fs::File::open("wiki.txt")?);
//! let (sentences, _stats) = preprocess(raw, 10)?;
//! let vocab = build_vocab(&sentences, 5)?;
//! let corpus = TrainingCorpus::encode(&sentences, &vocab);
//! let fusion = FusionSpec::new(FusionMethod::Early, GammaSchedule::LinearUp)?;
//! let config = TrainConfig { architecture: Architecture::Contextual(fusion), ..TrainConfig::default() };
//! let output = Trainer::new(config, &vocab)?.train(&corpus)?;
//! # Ok(())
//! # }
//! ```

pub mod corpus;
mod error;
pub mod eval;
pub mod linalg;
pub mod model;
pub mod trainer;
pub mod vocab;

pub use crate::error::{Error, Result};
