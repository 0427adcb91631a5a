//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Three operations are exported: fusion score curves over `γ`, the `γ`
//! value each schedule assigns over a run, and a small probe experiment
//! that trains SG or CSG in the browser. The `*_series`/`run_*` functions
//! are plain Rust and tested natively; the `#[wasm_bindgen]` wrappers only
//! convert errors.

use csg_core::eval::ProbeSpec;
use csg_core::model::ExactSigmoid;
use csg_core::trainer::{
    gamma_for, score_ef, score_lf, Architecture, FusionMethod, FusionSpec, GammaSchedule, TrainConfig, Trainer,
    TrainingCorpus,
};
use csg_core::corpus::Sentence;
use csg_core::vocab::build_vocab;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;
use wasm_bindgen::prelude::*;

/// Noise table for the toy corpora; the default 10⁷ entries would dominate
/// start-up time in the browser.
pub const DEMO_NOISE_TABLE: usize = 100_000;

pub const FILLER: &str = "the";
pub const CENTER: &str = "ice";
pub const CONTENT: &str = "cold";

/// EF and LF positive scores for `steps` evenly spaced `γ` in `[0, 1]`,
/// given `⟨v_center, v'⟩` and `⟨v_con, v'⟩`. Returns the EF curve followed
/// by the LF curve.
pub fn fusion_series(center_dot: f32, context_dot: f32, steps: usize) -> Vec<f32> {
    let steps = steps.max(2);
    let gammas: Vec<f32> = (0..steps).map(|i| i as f32 / (steps - 1) as f32).collect();
    // One-dimensional vectors reproduce any pair of dot products.
    let (center, context, target) = ([center_dot], [context_dot], [1.0f32]);
    let ef = gammas.iter().map(|&g| score_ef(&ExactSigmoid, &context, &center, &target, g, 1.0));
    let lf = gammas.iter().map(|&g| score_lf(&ExactSigmoid, &context, &center, &target, g, 1.0));
    ef.chain(lf).collect()
}

/// `γ` for every window of a run with `windows_per_epoch` center positions
/// per epoch, in training order.
pub fn gamma_series(schedule: &str, epochs: usize, windows_per_epoch: usize, seed: u64) -> Result<Vec<f32>, String> {
    if epochs == 0 || windows_per_epoch == 0 {
        return Err("epochs and windows per epoch must be positive".into());
    }
    let schedule: GammaSchedule = schedule.parse().map_err(|e: csg_core::Error| e.to_string())?;
    let mut rng = Pcg64Mcg::seed_from_u64(seed);
    let mut out = Vec::with_capacity(epochs * windows_per_epoch);
    for epoch in 1..=epochs {
        for _ in 0..windows_per_epoch {
            out.push(gamma_for(schedule, epoch, epochs, &mut rng));
        }
    }
    Ok(out)
}

/// Sentences of 15 topic words where `the` fills a quarter of the slots at
/// random, and one sentence in five contains `ice cold`.
pub fn probe_corpus(sentences: usize, seed: u64) -> Vec<Sentence> {
    let mut rng = Pcg64Mcg::seed_from_u64(seed);
    (0..sentences)
        .map(|_| {
            let topic = rng.gen_range(0..20);
            let mut tokens: Vec<String> = (0..15)
                .map(|_| {
                    if rng.gen_bool(0.25) {
                        FILLER.to_owned()
                    } else {
                        format!("t{topic}w{}", rng.gen_range(0..10))
                    }
                })
                .collect();
            if rng.gen_bool(0.2) {
                let pos = rng.gen_range(1..14u64) as usize;
                tokens[pos] = CENTER.into();
                tokens[pos + 1] = CONTENT.into();
            }
            Sentence::new(tokens)
        })
        .collect()
}

/// Probe means (×100) for the filler and the content word after each epoch,
/// as `[filler_1 .. filler_E, content_1 .. content_E]`. Unobserved epochs
/// are NaN.
pub fn run_probe(arch: &str, gamma: &str, epochs: usize, dim: usize, sentences: usize, seed: u64) -> Result<Vec<f64>, String> {
    let architecture = match arch {
        "sg" => Architecture::SkipGram,
        "ef" | "lf" => {
            let method: FusionMethod = arch.parse().map_err(|e: csg_core::Error| e.to_string())?;
            let schedule: GammaSchedule = gamma.parse().map_err(|e: csg_core::Error| e.to_string())?;
            Architecture::Contextual(FusionSpec::new(method, schedule).map_err(|e| e.to_string())?)
        }
        other => return Err(format!("unknown architecture `{other}` (expected sg, ef or lf)")),
    };
    let text = probe_corpus(sentences, seed);
    let vocab = build_vocab(&text, 1).map_err(|e| e.to_string())?;
    let corpus = TrainingCorpus::encode(&text, &vocab);
    let config = TrainConfig {
        architecture,
        dim,
        epochs,
        min_count: 1,
        threads: 1,
        seed,
        ..TrainConfig::default()
    };
    let probe = ProbeSpec::new(&vocab, CENTER, &[FILLER, CONTENT]).map_err(|e| e.to_string())?;
    let out = Trainer::new(config, &vocab)
        .and_then(|t| t.with_noise_table_size(DEMO_NOISE_TABLE).with_probe(probe))
        .and_then(|t| t.train(&corpus))
        .map_err(|e| e.to_string())?;
    let mean = |epoch: usize, word: &str| {
        out.probe
            .iter()
            .find(|r| r.epoch == epoch && r.context_word == word)
            .and_then(|r| r.mean_score_x100)
            .unwrap_or(f64::NAN)
    };
    Ok([FILLER, CONTENT]
        .iter()
        .flat_map(|word| (1..=epochs).map(move |e| (e, *word)))
        .map(|(e, word)| mean(e, word))
        .collect())
}

#[wasm_bindgen(js_name = fusionCurves)]
pub fn fusion_curves(center_dot: f32, context_dot: f32, steps: usize) -> Vec<f32> {
    fusion_series(center_dot, context_dot, steps)
}

#[wasm_bindgen(js_name = gammaSchedule)]
pub fn gamma_schedule(schedule: &str, epochs: usize, windows_per_epoch: usize, seed: u32) -> Result<Vec<f32>, JsError> {
    gamma_series(schedule, epochs, windows_per_epoch, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = probeDemo)]
pub fn probe_demo(arch: &str, gamma: &str, epochs: usize, dim: usize, sentences: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    run_probe(arch, gamma, epochs, dim, sentences, seed as u64).map_err(|e| JsError::new(&e))
}
