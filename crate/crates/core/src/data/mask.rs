use rand::seq::index;

use super::synth::RngSeed;
use crate::error::{Error, Result};
use crate::talg::{Dims, Tensor3};

/// Observed index set `Omega`, stored as strictly increasing linear indices
/// in tensor storage order (`i1` fastest).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingMask {
    dims: Dims,
    observed: Vec<usize>,
    flags: Vec<bool>,
}

impl SamplingMask {
    /// Mask from arbitrary-order indices; rejects duplicates and indices out
    /// of range.
    pub fn from_indices(dims: Dims, mut indices: Vec<usize>) -> Result<Self> {
        let total = Tensor3::zeros(dims).len();
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::param(format!("duplicate observed index {}", w[0])));
        }
        if let Some(&last) = indices.last() {
            if last >= total {
                return Err(Error::param(format!("observed index {last} out of range for {dims:?}")));
            }
        }
        let mut flags = vec![false; total];
        for &i in &indices {
            flags[i] = true;
        }
        Ok(Self { dims, observed: indices, flags })
    }

    /// Every entry observed.
    pub fn full(dims: Dims) -> Self {
        let total = Tensor3::zeros(dims).len();
        Self { dims, observed: (0..total).collect(), flags: vec![true; total] }
    }

    /// Mask of the entries where `pred(i1, i2, i3)` holds.
    pub fn from_predicate(dims: Dims, pred: impl Fn(usize, usize, usize) -> bool) -> Self {
        let t = Tensor3::from_fn(dims, |i, j, k| if pred(i, j, k) { 1.0 } else { 0.0 });
        let idx = t.as_slice().iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect();
        Self::from_indices(dims, idx).expect("indices from a predicate are valid")
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn indices(&self) -> &[usize] {
        &self.observed
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.observed.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    #[inline]
    pub fn contains(&self, linear: usize) -> bool {
        self.flags[linear]
    }

    /// Observation flags in storage order.
    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// Sampling rate `|Omega| / (I1 I2 I3)`.
    pub fn sampling_rate(&self) -> f64 {
        self.observed.len() as f64 / self.flags.len() as f64
    }

    fn check(&self, x: &Tensor3) -> Result<()> {
        if x.dims() != self.dims {
            return Err(Error::dims(format!("mask {:?} vs tensor {:?}", self.dims, x.dims())));
        }
        Ok(())
    }

    /// `P_Omega(x)`: keeps observed entries, zeroes the rest.
    pub fn project(&self, x: &Tensor3) -> Result<Tensor3> {
        self.check(x)?;
        let mut out = Tensor3::zeros(self.dims);
        let (src, dst) = (x.as_slice(), out.as_mut_slice());
        for &i in &self.observed {
            dst[i] = src[i];
        }
        Ok(out)
    }

    /// `P_Omega-bar(x) = x - P_Omega(x)`.
    pub fn project_complement(&self, x: &Tensor3) -> Result<Tensor3> {
        self.check(x)?;
        let mut out = x.clone();
        let dst = out.as_mut_slice();
        for &i in &self.observed {
            dst[i] = 0.0;
        }
        Ok(out)
    }

    /// Number of observed entries in each frontal slice.
    pub fn per_slice_counts(&self) -> Vec<usize> {
        let slice = self.dims[0] * self.dims[1];
        let mut counts = vec![0; self.dims[2]];
        for &i in &self.observed {
            counts[i / slice] += 1;
        }
        counts
    }
}

/// Uniform random mask with exactly `round(sr * I1 I2 I3)` entries, drawn
/// without replacement from stream 1 of `seed`.
pub fn gen_mask(dims: Dims, sr: f64, seed: RngSeed) -> Result<SamplingMask> {
    if !(sr > 0.0 && sr <= 1.0) {
        return Err(Error::param(format!("sampling rate must be in (0, 1], got {sr}")));
    }
    let total = Tensor3::zeros(dims).len();
    let count = (sr * total as f64).round() as usize;
    if count == 0 {
        return Err(Error::param(format!("sampling rate {sr} observes no entry of {dims:?}")));
    }
    if count == total {
        return Ok(SamplingMask::full(dims));
    }
    let mut rng = seed.rng(RngSeed::MASK_STREAM);
    let picked = index::sample(&mut rng, total, count).into_vec();
    SamplingMask::from_indices(dims, picked)
}

/// `P_Omega(x)` as a free function.
pub fn project(x: &Tensor3, mask: &SamplingMask) -> Result<Tensor3> {
    mask.project(x)
}
