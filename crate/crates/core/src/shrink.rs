//! p-shrinkage thresholding.
//!
//! `s_p^mu(x) = sign(x) * max(|x| - mu * |x|^(p-1), 0)`, with `s(0) = 0`.
//! At `p = 1` this is soft thresholding at `mu`; as `p -> -inf` it approaches
//! hard thresholding, leaving large inputs untouched.

use crate::error::{Error, Result};

/// Exponent `p <= 1` and weight `mu > 0` of the p-shrinkage operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShrinkParams {
    p: f64,
    mu: f64,
}

impl ShrinkParams {
    pub fn new(p: f64, mu: f64) -> Result<Self> {
        if !p.is_finite() || p > 1.0 {
            return Err(Error::param(format!("shrinkage exponent p must be finite and <= 1, got {p}")));
        }
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::param(format!("shrinkage weight mu must be finite and > 0, got {mu}")));
        }
        Ok(Self { p, mu })
    }

    /// Parameters whose zero-crossing sits at `tau`: `mu = tau^(2 - p)`.
    ///
    /// For `p = 1` this is plain soft thresholding at `tau`.
    pub fn with_threshold(p: f64, tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::param(format!("threshold must be finite and > 0, got {tau}")));
        }
        let mu = if p == 1.0 { tau } else { tau.powf(2.0 - p) };
        Self::new(p, mu)
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Magnitude below which the output is zero: `mu^(1 / (2 - p))`.
    pub fn zero_crossing(&self) -> f64 {
        self.mu.powf(1.0 / (2.0 - self.p))
    }
}

/// Scalar p-shrinkage `sign(x) * max(|x| - mu |x|^(p-1), 0)`.
#[inline]
pub fn p_shrink(x: f64, params: ShrinkParams) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let a = x.abs();
    let penalty = if params.p == 1.0 { params.mu } else { params.mu * a.powf(params.p - 1.0) };
    // a - inf = -inf for tiny |x| at very negative p, which the max clamps
    let v = (a - penalty).max(0.0);
    v.copysign(x)
}

/// Elementwise [`p_shrink`] over a nonnegative singular spectrum.
pub fn p_shrink_spectrum(sbar: &[f64], params: ShrinkParams) -> Vec<f64> {
    sbar.iter().map(|&s| p_shrink(s, params)).collect()
}
