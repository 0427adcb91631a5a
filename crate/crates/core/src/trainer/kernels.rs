//! Per-pair negative-sampling updates for SG, CBOW and contextual SG, and the
//! scores they are built on.
//!
//! Every kernel treats the first sample as the positive (label 1) and the
//! rest as negatives (label 0). The gradient coefficient is
//! `label - s`, where `s` is the probability-valued score of the sample being
//! a true neighbor.

use super::config::{FusionMethod, UpdateMode};
use crate::linalg::{add_assign, axpy, dot, exchange};
use crate::model::Sigmoid;

/// Row access into an embedding matrix.
pub trait Rows {
    fn dim(&self) -> usize;
    fn row(&self, id: u32) -> &[f32];
    fn row_mut(&mut self, id: u32) -> &mut [f32];
}

/// A borrowed row-major matrix.
pub struct MatrixRows<'a> {
    data: &'a mut [f32],
    dim: usize,
}

impl<'a> MatrixRows<'a> {
    pub fn new(data: &'a mut [f32], dim: usize) -> Self {
        assert!(dim > 0 && data.len() % dim == 0);
        MatrixRows { data, dim }
    }
}

impl Rows for MatrixRows<'_> {
    #[inline]
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn row(&self, id: u32) -> &[f32] {
        let start = id as usize * self.dim;
        &self.data[start..start + self.dim]
    }

    #[inline]
    fn row_mut(&mut self, id: u32) -> &mut [f32] {
        let start = id as usize * self.dim;
        &mut self.data[start..start + self.dim]
    }
}

/// Reusable buffers so the hot loop never allocates.
#[derive(Clone, Debug)]
pub struct Scratch {
    fused: Vec<f32>,
    center_grad: Vec<f32>,
}

impl Scratch {
    pub fn new(dim: usize) -> Self {
        Scratch {
            fused: vec![0.0; dim],
            center_grad: vec![0.0; dim],
        }
    }
}

/// Sum of the input vectors at positions `center ± 1..=window`, clipped to
/// the sentence. The center position itself is excluded.
pub fn context_vector<M: Rows + ?Sized>(
    input: &M,
    sentence: &[u32],
    center: usize,
    window: usize,
    out: &mut [f32],
) {
    out.fill(0.0);
    let start = center.saturating_sub(window);
    let end = (center + window + 1).min(sentence.len());
    for (pos, &word) in sentence.iter().enumerate().take(end).skip(start) {
        if pos != center {
            add_assign(out, input.row(word));
        }
    }
}

/// `σ(sign · ⟨v_center, v'_target⟩)`
#[inline]
pub fn score_sg<S: Sigmoid>(sigmoid: &S, center: &[f32], target: &[f32], sign: f32) -> f32 {
    sigmoid.sigmoid(sign * dot(center, target))
}

fn fuse(context: &[f32], center: &[f32], gamma: f32, out: &mut [f32]) {
    let keep = 1.0 - gamma;
    for ((o, c), v) in out.iter_mut().zip(context).zip(center) {
        *o = gamma * c + keep * v;
    }
}

/// Early fusion: `σ(sign · ⟨γ·v_con + (1−γ)·v_center, v'_target⟩)`
pub fn score_ef<S: Sigmoid>(
    sigmoid: &S,
    context: &[f32],
    center: &[f32],
    target: &[f32],
    gamma: f32,
    sign: f32,
) -> f32 {
    let mut fused = vec![0.0; center.len()];
    fuse(context, center, gamma, &mut fused);
    sigmoid.sigmoid(sign * dot(&fused, target))
}

/// Late fusion: `γ·σ(sign·⟨v_con, v'⟩) + (1−γ)·σ(sign·⟨v_center, v'⟩)`
pub fn score_lf<S: Sigmoid>(
    sigmoid: &S,
    context: &[f32],
    center: &[f32],
    target: &[f32],
    gamma: f32,
    sign: f32,
) -> f32 {
    late_mix(
        sigmoid,
        sign * dot(context, target),
        sign * dot(center, target),
        gamma,
    )
}

#[inline]
fn late_mix<S: Sigmoid>(sigmoid: &S, context_dot: f32, center_dot: f32, gamma: f32) -> f32 {
    gamma * sigmoid.sigmoid(context_dot) + (1.0 - gamma) * sigmoid.sigmoid(center_dot)
}

#[inline]
fn label(sample_idx: usize) -> f32 {
    if sample_idx == 0 {
        1.0
    } else {
        0.0
    }
}

/// Skip-gram update for one `(center, samples[0])` pair plus negatives
/// `samples[1..]`.
pub fn train_pair_sg<S: Sigmoid, O: Rows + ?Sized>(
    sigmoid: &S,
    center: &mut [f32],
    output: &mut O,
    samples: &[u32],
    lr: f32,
    scratch: &mut Scratch,
) {
    let grad = &mut scratch.center_grad;
    grad.fill(0.0);
    for (i, &word) in samples.iter().enumerate() {
        let out = output.row_mut(word);
        let f = dot(center, out);
        let g = (label(i) - sigmoid.sigmoid(f)) * lr;
        exchange(g, out, center, grad);
    }
    add_assign(center, grad);
}

/// Contextual skip-gram update for one pair.
///
/// In [`UpdateMode::Approximate`] the center vector receives the full
/// accumulated gradient and each output vector moves along `v_center`, as in
/// plain skip-gram but with the fused score in `g`. `context` is read only.
#[allow(clippy::too_many_arguments)]
pub fn train_pair_csg<S: Sigmoid, O: Rows + ?Sized>(
    sigmoid: &S,
    method: FusionMethod,
    mode: UpdateMode,
    center: &mut [f32],
    context: &[f32],
    output: &mut O,
    samples: &[u32],
    gamma: f32,
    lr: f32,
    scratch: &mut Scratch,
) {
    let Scratch {
        fused,
        center_grad: grad,
    } = scratch;
    grad.fill(0.0);
    match method {
        FusionMethod::Early => {
            fuse(context, center, gamma, fused);
            for (i, &word) in samples.iter().enumerate() {
                let out = output.row_mut(word);
                let g = (label(i) - sigmoid.sigmoid(dot(fused, out))) * lr;
                match mode {
                    UpdateMode::Approximate => exchange(g, out, center, grad),
                    UpdateMode::Exact => exchange(g, out, fused, grad),
                }
            }
            if mode == UpdateMode::Exact {
                grad.iter_mut().for_each(|x| *x *= 1.0 - gamma);
            }
        }
        FusionMethod::Late => {
            for (i, &word) in samples.iter().enumerate() {
                let out = output.row_mut(word);
                let context_dot = dot(context, out);
                let center_dot = dot(center, out);
                match mode {
                    UpdateMode::Approximate => {
                        let s = late_mix(sigmoid, context_dot, center_dot, gamma);
                        let g = (label(i) - s) * lr;
                        exchange(g, out, center, grad);
                    }
                    UpdateMode::Exact => {
                        // d/dθ of log s (positive) or log(1 − s) (negative).
                        let sc = sigmoid.sigmoid(context_dot);
                        let sv = sigmoid.sigmoid(center_dot);
                        let s = gamma * sc + (1.0 - gamma) * sv;
                        let coef = if i == 0 { 1.0 / s } else { -1.0 / (1.0 - s) } * lr;
                        let via_center = coef * (1.0 - gamma) * sv * (1.0 - sv);
                        let via_context = coef * gamma * sc * (1.0 - sc);
                        axpy(via_center, out, grad);
                        axpy(via_center, center, out);
                        axpy(via_context, context, out);
                    }
                }
            }
        }
    }
    add_assign(center, grad);
}

/// CBOW update: `context_mean` predicts `samples[0]`; the accumulated
/// gradient is added to every context word's input vector.
pub fn train_pair_cbow<S: Sigmoid, I: Rows + ?Sized, O: Rows + ?Sized>(
    sigmoid: &S,
    input: &mut I,
    context_words: &[u32],
    context_mean: &[f32],
    output: &mut O,
    samples: &[u32],
    lr: f32,
    scratch: &mut Scratch,
) {
    let grad = &mut scratch.center_grad;
    grad.fill(0.0);
    for (i, &word) in samples.iter().enumerate() {
        let out = output.row_mut(word);
        let g = (label(i) - sigmoid.sigmoid(dot(context_mean, out))) * lr;
        exchange(g, out, context_mean, grad);
    }
    for &word in context_words {
        add_assign(input.row_mut(word), grad);
    }
}
