/// Logistic function evaluator used by the training kernels.
pub trait Sigmoid {
    fn sigmoid(&self, x: f32) -> f32;
}

/// `1 / (1 + e^-x)` evaluated in double precision.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactSigmoid;

impl Sigmoid for ExactSigmoid {
    #[inline]
    fn sigmoid(&self, x: f32) -> f32 {
        exact_sigmoid(x as f64) as f32
    }
}

#[inline]
pub fn exact_sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Number of bins over `[-clamp, clamp]`.
pub const SIGMOID_RESOLUTION: usize = 1000;
pub const SIGMOID_CLAMP: f32 = 6.0;

/// Precomputed σ on a uniform grid with linear interpolation between grid
/// points. Inputs beyond `±clamp` evaluate to `σ(±clamp)`.
#[derive(Clone, Debug)]
pub struct SigmoidTable {
    values: Vec<f32>,
    clamp: f32,
    scale: f32,
}

impl SigmoidTable {
    pub fn new(resolution: usize, clamp: f32) -> Self {
        assert!(resolution >= 1 && clamp > 0.0);
        let step = 2.0 * clamp as f64 / resolution as f64;
        let values = (0..=resolution)
            .map(|i| exact_sigmoid(-clamp as f64 + i as f64 * step) as f32)
            .collect();
        SigmoidTable {
            values,
            clamp,
            scale: resolution as f32 / (2.0 * clamp),
        }
    }

    pub fn resolution(&self) -> usize {
        self.values.len() - 1
    }

    pub fn clamp(&self) -> f32 {
        self.clamp
    }
}

impl Default for SigmoidTable {
    fn default() -> Self {
        Self::new(SIGMOID_RESOLUTION, SIGMOID_CLAMP)
    }
}

impl Sigmoid for SigmoidTable {
    #[inline]
    fn sigmoid(&self, x: f32) -> f32 {
        let last = self.values.len() - 1;
        if x >= self.clamp {
            return self.values[last];
        }
        if x <= -self.clamp {
            return self.values[0];
        }
        let pos = (x + self.clamp) * self.scale;
        let idx = (pos as usize).min(last - 1);
        let frac = pos - idx as f32;
        let lo = self.values[idx];
        lo + frac * (self.values[idx + 1] - lo)
    }
}
