use rand::Rng;

use super::config::GammaSchedule;

/// Smallest fraction of the initial learning rate ever used.
pub const LR_FLOOR: f32 = 1e-4;

/// Fusion weight for the given 1-based epoch. `RandomUniform` consumes one
/// draw from `rng`; the other schedules never touch it.
///
/// `LinearUp` over a single epoch is degenerate and yields 0.
#[inline]
pub fn gamma_for<R: Rng + ?Sized>(
    schedule: GammaSchedule,
    current_epoch: usize,
    total_epochs: usize,
    rng: &mut R,
) -> f32 {
    match epoch_gamma(schedule, current_epoch, total_epochs) {
        Some(gamma) => gamma,
        None => rng.gen::<f32>(),
    }
}

/// The weight shared by a whole epoch, or `None` when it varies per window.
pub fn epoch_gamma(schedule: GammaSchedule, current_epoch: usize, total_epochs: usize) -> Option<f32> {
    debug_assert!((1..=total_epochs).contains(&current_epoch));
    match schedule {
        GammaSchedule::Fixed(gamma) => Some(gamma),
        GammaSchedule::LinearUp if total_epochs <= 1 => Some(0.0),
        GammaSchedule::LinearUp => Some((current_epoch - 1) as f32 / (total_epochs - 1) as f32),
        GammaSchedule::RandomUniform => None,
    }
}

/// Linear decay over the whole training budget, floored at
/// `initial_lr * LR_FLOOR`.
#[inline]
pub fn lr_schedule(initial_lr: f32, words_done: u64, words_total: u64) -> f32 {
    let progress = if words_total == 0 {
        1.0
    } else {
        words_done.min(words_total) as f64 / words_total as f64
    };
    initial_lr * (1.0 - progress).max(LR_FLOOR as f64) as f32
}
