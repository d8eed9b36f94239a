use faer::{Mat, MatRef};
use num_complex::Complex64;
use rayon::prelude::*;

use super::fourier::{
    complex_slice, dft_mode3, idft_mode3, independent_slices, is_self_conjugate,
    mirror_conjugate_slices, store_slice,
};
use super::tensor::{FTensor3, Tensor3};
use crate::error::{Error, Result};
use crate::shrink::{p_shrink, ShrinkParams};

/// Relative tolerance used for tubal and multi rank when none is given.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

struct SliceSvd {
    u: Mat<Complex64>,
    s: Vec<f64>,
    v: Mat<Complex64>,
}

fn to_complex_mat(m: MatRef<'_, f64>) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(m[(i, j)], 0.0))
}

/// SVD of Fourier slice `k`. Self-conjugate slices are real and go through
/// the real SVD so their factors stay real after the inverse DFT.
fn slice_svd(xbar: &FTensor3, k: usize, full: bool) -> Result<SliceSvd> {
    let m = complex_slice(xbar, k);
    let n3 = xbar.dims()[2];
    let fail = |_| Error::SvdFailure { slice: k };
    if is_self_conjugate(k, n3) {
        let re = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
        let svd = if full { re.svd() } else { re.thin_svd() }.map_err(fail)?;
        let s = svd.S().column_vector().iter().copied().collect();
        Ok(SliceSvd { u: to_complex_mat(svd.U()), s, v: to_complex_mat(svd.V()) })
    } else {
        let svd = if full { m.svd() } else { m.thin_svd() }.map_err(fail)?;
        let s = svd.S().column_vector().iter().map(|c| c.re).collect();
        Ok(SliceSvd { u: svd.U().to_owned(), s, v: svd.V().to_owned() })
    }
}

fn slice_singular_values(xbar: &FTensor3, k: usize) -> Result<Vec<f64>> {
    let m = complex_slice(xbar, k);
    let mut s = m.singular_values().map_err(|_| Error::SvdFailure { slice: k })?;
    for v in s.iter_mut() {
        *v = v.max(0.0);
    }
    // faer returns them nonincreasing already; keep the invariant explicit
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Fourier-domain singular values `sbar(i, k)`, shape `min(I1, I2) x I3`.
///
/// All norms and ranks are evaluated on this spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum {
    rank_len: usize,
    depth: usize,
    values: Vec<f64>,
}

impl SingularSpectrum {
    /// Spectrum from per-slice columns, each nonincreasing and nonnegative.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let depth = columns.len();
        let rank_len = columns.first().map_or(0, Vec::len);
        if depth == 0 || columns.iter().any(|c| c.len() != rank_len) {
            return Err(Error::dims("spectrum columns must be nonempty and equally long"));
        }
        Ok(Self { rank_len, depth, values: columns.concat() })
    }

    /// `min(I1, I2)`.
    #[inline]
    pub fn rank_len(&self) -> usize {
        self.rank_len
    }

    /// `I3`.
    #[inline]
    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[k * self.rank_len + i]
    }

    /// Singular values of Fourier slice `k`, nonincreasing.
    pub fn column(&self, k: usize) -> &[f64] {
        &self.values[k * self.rank_len..(k + 1) * self.rank_len]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest singular value over all slices (the tensor spectral norm).
    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, &v| m.max(v))
    }

    /// Number of singular tubes with some Fourier value above
    /// `tol * spectral_norm`.
    pub fn tubal_rank(&self, tol: f64) -> usize {
        let cut = tol * self.spectral_norm();
        if self.spectral_norm() == 0.0 {
            return 0;
        }
        (0..self.rank_len)
            .filter(|&i| (0..self.depth).any(|k| self.get(i, k) > cut))
            .count()
    }

    /// Rank of every Fourier slice under the same relative cut.
    pub fn multi_rank(&self, tol: f64) -> Vec<usize> {
        let max = self.spectral_norm();
        if max == 0.0 {
            return vec![0; self.depth];
        }
        let cut = tol * max;
        (0..self.depth)
            .map(|k| self.column(k).iter().filter(|&&v| v > cut).count())
            .collect()
    }

    /// Tensor average rank: the mean of the multi-rank.
    pub fn average_rank(&self, tol: f64) -> f64 {
        self.multi_rank(tol).iter().sum::<usize>() as f64 / self.depth as f64
    }

    /// Tensor nuclear norm, `(1/I3) * sum of all sbar`.
    pub fn tnn(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.depth as f64
    }

    /// Tensor p-shrinkage nuclear norm, `(1/I3) * sum s_p^mu(sbar)`.
    ///
    /// Defined for `p < 1`; the `p = 1` case is [`tnn`](Self::tnn).
    pub fn ptnn(&self, p: f64, mu: f64) -> Result<f64> {
        if p >= 1.0 {
            return Err(Error::param(format!("p-TNN needs p < 1, got {p}")));
        }
        let params = ShrinkParams::new(p, mu)?;
        Ok(self.ptnn_with(params))
    }

    pub(crate) fn ptnn_with(&self, params: ShrinkParams) -> f64 {
        self.values.iter().map(|&s| p_shrink(s, params)).sum::<f64>() / self.depth as f64
    }
}

/// t-SVD factors `x = U * S * V^T` together with the Fourier spectrum.
#[derive(Clone, Debug)]
pub struct TSvd {
    pub u: Tensor3,
    pub s: Tensor3,
    pub v: Tensor3,
    pub sbar: SingularSpectrum,
}

impl TSvd {
    pub fn spectrum(&self) -> &SingularSpectrum {
        &self.sbar
    }

    pub fn tubal_rank(&self, tol: f64) -> usize {
        self.sbar.tubal_rank(tol)
    }

    pub fn multi_rank(&self, tol: f64) -> Vec<usize> {
        self.sbar.multi_rank(tol)
    }

    pub fn tnn(&self) -> f64 {
        self.sbar.tnn()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.sbar.spectral_norm()
    }

    pub fn ptnn(&self, p: f64, mu: f64) -> Result<f64> {
        self.sbar.ptnn(p, mu)
    }
}

/// Full t-SVD. Only Fourier slices `0..=I3/2` are decomposed; the others are
/// their conjugates.
pub fn tsvd(x: &Tensor3) -> Result<TSvd> {
    let [n1, n2, n3] = x.dims();
    let xbar = dft_mode3(x);
    let half = independent_slices(n3);
    let slices = (0..half)
        .into_par_iter()
        .map(|k| slice_svd(&xbar, k, true))
        .collect::<Result<Vec<_>>>()?;

    let m = n1.min(n2);
    let mut ubar = FTensor3::zeros([n1, n1, n3]);
    let mut sbar_t = FTensor3::zeros([n1, n2, n3]);
    let mut vbar = FTensor3::zeros([n2, n2, n3]);
    let mut columns = vec![Vec::new(); n3];
    for (k, sv) in slices.into_iter().enumerate() {
        store_slice(&mut ubar, k, sv.u.as_ref());
        store_slice(&mut vbar, k, sv.v.as_ref());
        for (i, &s) in sv.s.iter().enumerate().take(m) {
            sbar_t.set(i, i, k, Complex64::new(s, 0.0));
        }
        if k > 0 && k < n3 - k {
            columns[n3 - k] = sv.s.clone();
        }
        columns[k] = sv.s;
    }
    mirror_conjugate_slices(&mut ubar);
    mirror_conjugate_slices(&mut sbar_t);
    mirror_conjugate_slices(&mut vbar);

    Ok(TSvd {
        u: idft_mode3(&ubar),
        s: idft_mode3(&sbar_t),
        v: idft_mode3(&vbar),
        sbar: SingularSpectrum::from_columns(columns)?,
    })
}

/// Fourier-domain singular values only, without factors.
pub fn singular_spectrum(x: &Tensor3) -> Result<SingularSpectrum> {
    let n3 = x.dims()[2];
    let xbar = dft_mode3(x);
    let half = independent_slices(n3);
    let cols = (0..half)
        .into_par_iter()
        .map(|k| slice_singular_values(&xbar, k))
        .collect::<Result<Vec<_>>>()?;
    let mut columns = vec![Vec::new(); n3];
    for (k, c) in cols.into_iter().enumerate() {
        if k > 0 && k < n3 - k {
            columns[n3 - k] = c.clone();
        }
        columns[k] = c;
    }
    SingularSpectrum::from_columns(columns)
}

/// Tensor generalized singular value thresholding: `U * D * V^T` where the
/// Fourier singular values of `z` are passed through `s_p^mu`.
///
/// With `p = 1` this is singular value soft thresholding of every Fourier
/// slice at `mu`.
pub fn tgsvt(z: &Tensor3, params: ShrinkParams) -> Result<Tensor3> {
    let [n1, n2, n3] = z.dims();
    let zbar = dft_mode3(z);
    let half = independent_slices(n3);
    let slices = (0..half)
        .into_par_iter()
        .map(|k| -> Result<Mat<Complex64>> {
            let sv = slice_svd(&zbar, k, false)?;
            let d: Vec<f64> = sv.s.iter().map(|&s| p_shrink(s, params)).collect();
            let keep = d.iter().take_while(|&&v| v > 0.0).count();
            if keep == 0 {
                return Ok(Mat::zeros(n1, n2));
            }
            let us = Mat::from_fn(n1, keep, |i, j| sv.u[(i, j)] * d[j]);
            let vk = sv.v.as_ref().subcols(0, keep);
            Ok(&us * vk.adjoint())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = FTensor3::zeros([n1, n2, n3]);
    for (k, m) in slices.iter().enumerate() {
        store_slice(&mut out, k, m.as_ref());
    }
    mirror_conjugate_slices(&mut out);
    Ok(idft_mode3(&out))
}
