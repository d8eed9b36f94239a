use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Shape `(I1, I2, I3)` of a third-order tensor.
pub type Dims = [usize; 3];

fn check_dims(dims: Dims) -> Result<usize> {
    if dims.contains(&0) {
        return Err(Error::param(format!("tensor dims must be positive, got {dims:?}")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::param(format!("tensor dims {dims:?} overflow")))
}

/// Dense real third-order tensor.
///
/// Entries are stored with `i1` varying fastest, then `i2`, then `i3`, so each
/// frontal slice `X^(k)` is a contiguous column-major `I1 x I2` block.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    dims: Dims,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dims: Dims) -> Self {
        let len = check_dims(dims).expect("invalid tensor dims");
        Self { dims, data: vec![0.0; len] }
    }

    /// Builds a tensor from storage-order values, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_vec(dims: Dims, data: Vec<f64>) -> Result<Self> {
        let len = check_dims(dims)?;
        if data.len() != len {
            return Err(Error::dims(format!(
                "dims {dims:?} need {len} values, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dims);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let idx = t.index(i, j, k);
                    t.data[idx] = f(i, j, k);
                }
            }
        }
        t
    }

    /// Tensor whose frontal slices are the given column-major `I1 x I2` matrices.
    pub fn from_slices(rows: usize, cols: usize, slices: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols * slices.len());
        for s in slices {
            if s.len() != rows * cols {
                return Err(Error::dims("frontal slice has the wrong length"));
            }
            data.extend_from_slice(s);
        }
        Self::from_vec([rows, cols, slices.len()], data)
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.index(i, j, k);
        self.data[idx] = v;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Frontal slice `k` (0-based) as a column-major `I1 x I2` block.
    pub fn frontal(&self, k: usize) -> &[f64] {
        let n = self.dims[0] * self.dims[1];
        &self.data[k * n..(k + 1) * n]
    }

    pub fn frontal_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.dims[0] * self.dims[1];
        &mut self.data[k * n..(k + 1) * n]
    }

    pub fn fro_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sq().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn check_same_dims(&self, other: &Tensor3, what: &str) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::dims(format!(
                "{what}: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor3 {
        Tensor3 { dims: self.dims, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, c: f64) -> Tensor3 {
        self.map(|v| c * v)
    }

    /// `self + alpha * other`; panics on shape mismatch.
    pub fn add_scaled(&self, alpha: f64, other: &Tensor3) -> Tensor3 {
        assert_eq!(self.dims, other.dims, "add_scaled: shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + alpha * b).collect();
        Tensor3 { dims: self.dims, data }
    }

    /// `||self - other||_F`; panics on shape mismatch.
    pub fn distance(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.dims, other.dims, "distance: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.dims, other.dims, "dot: shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn to_complex(&self) -> FTensor3 {
        FTensor3 {
            dims: self.dims,
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

impl Add for &Tensor3 {
    type Output = Tensor3;
    fn add(self, rhs: &Tensor3) -> Tensor3 {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &Tensor3 {
    type Output = Tensor3;
    fn sub(self, rhs: &Tensor3) -> Tensor3 {
        self.add_scaled(-1.0, rhs)
    }
}

impl Mul<&Tensor3> for f64 {
    type Output = Tensor3;
    fn mul(self, rhs: &Tensor3) -> Tensor3 {
        rhs.scaled(self)
    }
}

/// Complex third-order tensor, same layout as [`Tensor3`]. Holds mode-3 DFT
/// images.
#[derive(Clone, Debug, PartialEq)]
pub struct FTensor3 {
    dims: Dims,
    data: Vec<Complex64>,
}

impl FTensor3 {
    pub fn zeros(dims: Dims) -> Self {
        let len = check_dims(dims).expect("invalid tensor dims");
        Self { dims, data: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn from_vec(dims: Dims, data: Vec<Complex64>) -> Result<Self> {
        let len = check_dims(dims)?;
        if data.len() != len {
            return Err(Error::dims(format!(
                "dims {dims:?} need {len} values, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.data[self.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Complex64) {
        let idx = self.index(i, j, k);
        self.data[idx] = v;
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn frontal(&self, k: usize) -> &[Complex64] {
        let n = self.dims[0] * self.dims[1];
        &self.data[k * n..(k + 1) * n]
    }

    pub fn frontal_mut(&mut self, k: usize) -> &mut [Complex64] {
        let n = self.dims[0] * self.dims[1];
        &mut self.data[k * n..(k + 1) * n]
    }

    /// Largest elementwise deviation from the conjugate symmetry
    /// `slice[k] == conj(slice[I3 - k])` that the DFT of a real tensor obeys.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let n3 = self.dims[2];
        let mut worst: f64 = 0.0;
        for k in 1..n3 {
            let a = self.frontal(k);
            let b = self.frontal(n3 - k);
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y.conj()).norm());
            }
        }
        worst
    }
}
