use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How the center-word and context predictions are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FusionMethod {
    /// Blend `v_con` and `v_center` before the dot product.
    Early,
    /// Blend the two sigmoid scores after the dot products.
    Late,
}

/// Fusion weight over the course of training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaSchedule {
    Fixed(f32),
    /// `(epoch - 1) / (epochs - 1)`, constant within an epoch.
    LinearUp,
    /// A fresh `U(0, 1)` draw for every center-word window.
    RandomUniform,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusionSpec {
    pub method: FusionMethod,
    pub schedule: GammaSchedule,
}

impl FusionSpec {
    pub fn new(method: FusionMethod, schedule: GammaSchedule) -> Result<Self> {
        let spec = FusionSpec { method, schedule };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let GammaSchedule::Fixed(gamma) = self.schedule {
            if !(0.0..=1.0).contains(&gamma) {
                return Err(Error::Config(format!("fusion weight {gamma} outside [0, 1]")));
            }
            if self.method == FusionMethod::Late && gamma == 1.0 {
                return Err(Error::Config(
                    "late fusion with gamma = 1 is identical to early fusion with gamma = 1; \
                     use --fusion ef"
                        .into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Architecture {
    SkipGram,
    Cbow,
    Contextual(FusionSpec),
}

impl Architecture {
    pub fn name(&self) -> &'static str {
        match self {
            Architecture::SkipGram => "sg",
            Architecture::Cbow => "cbow",
            Architecture::Contextual(_) => "csg",
        }
    }
}

/// Which gradient the CSG kernels apply.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UpdateMode {
    /// Full-strength center update with `v'` moved along `v_center`; the
    /// context words are not touched.
    #[default]
    Approximate,
    /// Exact gradient of the fused log-loss for `v_center` and `v'`, holding
    /// `v_con` fixed. Used to check the kernels against finite differences.
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub architecture: Architecture,
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f32,
    pub min_count: u64,
    pub threads: usize,
    pub seed: u64,
    /// Frequent-word subsampling threshold; `None` disables it.
    pub subsample: Option<f64>,
    /// Shrink each window uniformly at random to `1..=window`.
    pub dynamic_window: bool,
    /// Leave the predicted neighbor out of `v_con`.
    pub exclude_target_from_context: bool,
    pub update_mode: UpdateMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            architecture: Architecture::SkipGram,
            dim: 200,
            window: 5,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            min_count: 5,
            threads: 1,
            seed: 1,
            subsample: None,
            dynamic_window: false,
            exclude_target_from_context: false,
            update_mode: UpdateMode::Approximate,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_owned()));
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if self.window == 0 {
            return fail("window must be at least 1");
        }
        if self.negatives == 0 {
            return fail("negative sample count must be at least 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return fail("learning rate must be positive");
        }
        if self.min_count == 0 {
            return fail("min_count must be at least 1");
        }
        if self.threads == 0 {
            return fail("threads must be at least 1");
        }
        if let Some(t) = self.subsample {
            if !(t > 0.0 && t.is_finite()) {
                return fail("subsample threshold must be positive");
            }
        }
        if let Architecture::Contextual(fusion) = &self.architecture {
            fusion.validate()?;
        }
        Ok(())
    }
}

impl FromStr for FusionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ef" | "early" => Ok(FusionMethod::Early),
            "lf" | "late" => Ok(FusionMethod::Late),
            other => Err(Error::Config(format!("unknown fusion method `{other}`"))),
        }
    }
}

impl fmt::Display for FusionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FusionMethod::Early => "ef",
            FusionMethod::Late => "lf",
        })
    }
}

impl FromStr for GammaSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "0to1" => Ok(GammaSchedule::LinearUp),
            "random" | "ran" => Ok(GammaSchedule::RandomUniform),
            value => value
                .parse::<f32>()
                .ok()
                .filter(|g| (0.0..=1.0).contains(g))
                .map(GammaSchedule::Fixed)
                .ok_or_else(|| {
                    Error::Config(format!("gamma must be in [0, 1], `linear` or `random`, got `{s}`"))
                }),
        }
    }
}

impl fmt::Display for GammaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaSchedule::Fixed(g) => write!(f, "{g}"),
            GammaSchedule::LinearUp => f.write_str("linear"),
            GammaSchedule::RandomUniform => f.write_str("random"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_hyperparameters() {
        let c = TrainConfig::default();
        assert_eq!((c.dim, c.window, c.negatives, c.epochs, c.min_count), (200, 5, 5, 5, 5));
        assert_eq!(c.initial_lr, 0.025);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn zero_epochs_rejected() {
        let c = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn late_fusion_at_one_rejected() {
        assert!(FusionSpec::new(FusionMethod::Late, GammaSchedule::Fixed(1.0)).is_err());
        assert!(FusionSpec::new(FusionMethod::Early, GammaSchedule::Fixed(1.0)).is_ok());
        assert!(FusionSpec::new(FusionMethod::Late, GammaSchedule::Fixed(0.75)).is_ok());
        assert!(FusionSpec::new(FusionMethod::Early, GammaSchedule::Fixed(1.5)).is_err());
    }

    #[test]
    fn parse_schedules() {
        assert_eq!("linear".parse::<GammaSchedule>().unwrap(), GammaSchedule::LinearUp);
        assert_eq!("random".parse::<GammaSchedule>().unwrap(), GammaSchedule::RandomUniform);
        assert_eq!("0.25".parse::<GammaSchedule>().unwrap(), GammaSchedule::Fixed(0.25));
        assert!("1.2".parse::<GammaSchedule>().is_err());
        assert!("x".parse::<GammaSchedule>().is_err());
        assert_eq!("LF".parse::<FusionMethod>().unwrap(), FusionMethod::Late);
    }
}
