//! Reference implementations used as test oracles. They rely on nalgebra and
//! a naive DFT only, never on the library's FFT or SVD paths.
#![allow(dead_code)]

use nalgebra::{DMatrix, Complex};
use ptnn::Tensor3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(dims: [usize; 3], rng: &mut impl Rng) -> Tensor3 {
    Tensor3::from_fn(dims, |_, _, _| rng.random_range(-1.0..1.0))
}

pub fn random_dims(rng: &mut impl Rng, max: [usize; 3]) -> [usize; 3] {
    [rng.random_range(1..=max[0]), rng.random_range(1..=max[1]), rng.random_range(1..=max[2])]
}

pub fn rel_err(a: &Tensor3, b: &Tensor3) -> f64 {
    let num: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.as_slice().iter().map(|y| y * y).sum();
    if den == 0.0 { num.sqrt() } else { (num / den).sqrt() }
}

/// Frontal slice `k` as an nalgebra matrix.
pub fn slice(x: &Tensor3, k: usize) -> DMatrix<f64> {
    let [n1, n2, _] = x.dims();
    DMatrix::from_fn(n1, n2, |i, j| x.get(i, j, k))
}

/// `bcirc(x)`: block `(r, c)` is frontal slice `(r - c) mod I3`.
pub fn bcirc(x: &Tensor3) -> DMatrix<f64> {
    let [n1, n2, n3] = x.dims();
    let mut m = DMatrix::zeros(n1 * n3, n2 * n3);
    for r in 0..n3 {
        for c in 0..n3 {
            let k = (r + n3 - c) % n3;
            for i in 0..n1 {
                for j in 0..n2 {
                    m[(r * n1 + i, c * n2 + j)] = x.get(i, j, k);
                }
            }
        }
    }
    m
}

/// Stacks frontal slices vertically.
pub fn unfold(x: &Tensor3) -> DMatrix<f64> {
    let [n1, n2, n3] = x.dims();
    DMatrix::from_fn(n1 * n3, n2, |r, j| x.get(r % n1, j, r / n1))
}

pub fn fold(m: &DMatrix<f64>, n3: usize) -> Tensor3 {
    let n1 = m.nrows() / n3;
    Tensor3::from_fn([n1, m.ncols(), n3], |i, j, k| m[(k * n1 + i, j)])
}

/// `fold(bcirc(a) * unfold(b))`.
pub fn tprod(a: &Tensor3, b: &Tensor3) -> Tensor3 {
    fold(&(bcirc(a) * unfold(b)), a.dims()[2])
}

/// Slice 0 transposed, slices 1.. transposed in reverse order.
pub fn transpose(x: &Tensor3) -> Tensor3 {
    let [n1, n2, n3] = x.dims();
    Tensor3::from_fn([n2, n1, n3], |i, j, k| x.get(j, i, (n3 - k) % n3))
}

pub fn identity(n: usize, n3: usize) -> Tensor3 {
    Tensor3::from_fn([n, n, n3], |i, j, k| if i == j && k == 0 { 1.0 } else { 0.0 })
}

/// Unnormalized DFT of every tube by the defining sum.
pub fn naive_dft(x: &Tensor3) -> Vec<DMatrix<C64>> {
    let [n1, n2, n3] = x.dims();
    (0..n3)
        .map(|k| {
            DMatrix::from_fn(n1, n2, |i, j| {
                (0..n3)
                    .map(|t| {
                        let ang = -2.0 * std::f64::consts::PI * (k * t) as f64 / n3 as f64;
                        C64::from_polar(x.get(i, j, t), ang)
                    })
                    .sum()
            })
        })
        .collect()
}

/// Singular values of every Fourier slice, each sorted descending.
pub fn fourier_singular_values(x: &Tensor3) -> Vec<Vec<f64>> {
    naive_dft(x)
        .into_iter()
        .map(|m| {
            let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            s
        })
        .collect()
}

/// Matrix singular value soft thresholding at `tau` of every Fourier slice,
/// transformed back by the naive inverse DFT.
pub fn slicewise_svt(x: &Tensor3, tau: f64) -> Tensor3 {
    let [n1, n2, n3] = x.dims();
    let shrunk: Vec<DMatrix<C64>> = naive_dft(x)
        .into_iter()
        .map(|m| {
            let svd = m.svd(true, true);
            let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
            let d = DMatrix::from_diagonal(&svd.singular_values.map(|s| C64::new((s - tau).max(0.0), 0.0)));
            u * d * vt
        })
        .collect();
    Tensor3::from_fn([n1, n2, n3], |i, j, t| {
        let v: C64 = (0..n3)
            .map(|k| {
                let ang = 2.0 * std::f64::consts::PI * (k * t) as f64 / n3 as f64;
                shrunk[k][(i, j)] * C64::from_polar(1.0, ang)
            })
            .sum();
        v.re / n3 as f64
    })
}

/// Minimizer of `1/2 (x - z)^2 + tau |x|` over a uniform grid of step `h`.
pub fn grid_prox_l1(z: f64, tau: f64, h: f64) -> f64 {
    let lim = z.abs() + 1.0;
    let n = (2.0 * lim / h) as i64;
    (0..=n)
        .map(|i| -lim + i as f64 * h)
        .min_by(|a, b| {
            let fa = 0.5 * (a - z).powi(2) + tau * a.abs();
            let fb = 0.5 * (b - z).powi(2) + tau * b.abs();
            fa.total_cmp(&fb)
        })
        .unwrap()
}

/// Non-decreasing check allowing `allowed` strict decreases.
pub fn inversions(xs: &[f64], increasing: bool) -> usize {
    xs.windows(2).filter(|w| if increasing { w[1] < w[0] } else { w[1] > w[0] }).count()
}
