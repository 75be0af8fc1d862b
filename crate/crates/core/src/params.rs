use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Model parameters `(p, k, alpha)` of the kicked p-spin.
///
/// `p >= 2` is the interaction order, `k >= 0` the kick strength and
/// `alpha` the precession angle in radians, normalized into `[0, 2pi)`.
/// The sine and cosine of `alpha` are cached since every map step uses them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    p: u32,
    k: f64,
    alpha: f64,
    cos_alpha: f64,
    sin_alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    p: u32,
    k: f64,
    alpha: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.p, raw.k, raw.alpha)
    }
}

impl From<ModelParams> for RawParams {
    fn from(params: ModelParams) -> Self {
        RawParams { p: params.p, k: params.k, alpha: params.alpha }
    }
}

impl ModelParams {
    pub fn new(p: u32, k: f64, alpha: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
        }
        if !k.is_finite() || k < 0.0 {
            return Err(Error::InvalidParameter(format!("k must be finite and >= 0, got {k}")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be finite, got {alpha}")));
        }
        let alpha = normalize_angle(alpha);
        let (sin_alpha, cos_alpha) = alpha.sin_cos();
        Ok(ModelParams { p, k, alpha, cos_alpha, sin_alpha })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cos_alpha(&self) -> f64 {
        self.cos_alpha
    }

    pub fn sin_alpha(&self) -> f64 {
        self.sin_alpha
    }

    pub fn is_even(&self) -> bool {
        self.p % 2 == 0
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        ModelParams::new(self.p, k, self.alpha)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        ModelParams::new(self.p, self.k, alpha)
    }
}

/// Maps an angle into `[0, 2pi)`.
pub(crate) fn normalize_angle(angle: f64) -> f64 {
    let reduced = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if reduced >= TAU {
        0.0
    } else {
        reduced
    }
}

/// `x^n` by repeated multiplication; `ipow(0, 0) == 1`.
#[inline]
pub(crate) fn ipow(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}
