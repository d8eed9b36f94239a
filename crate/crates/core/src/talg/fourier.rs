use faer::{Mat, MatRef};
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::tensor::{FTensor3, Tensor3};
use crate::error::{Error, Result};

/// Applies a length-`I3` FFT to every tube `x(i1, i2, :)` in place.
fn fft_tubes(data: &mut [Complex64], tubes: usize, n3: usize, inverse: bool) {
    if n3 == 1 {
        return;
    }
    // gather tubes contiguously, transform in one batch, scatter back
    let mut buf = vec![Complex64::new(0.0, 0.0); tubes * n3];
    for k in 0..n3 {
        for t in 0..tubes {
            buf[t * n3 + k] = data[k * tubes + t];
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n3) } else { planner.plan_fft_forward(n3) };
    fft.process(&mut buf);
    for k in 0..n3 {
        for t in 0..tubes {
            data[k * tubes + t] = buf[t * n3 + k];
        }
    }
}

/// Unnormalized forward DFT along mode 3.
pub fn dft_mode3(x: &Tensor3) -> FTensor3 {
    let [n1, n2, n3] = x.dims();
    let mut out = x.to_complex();
    fft_tubes(out.as_mut_slice(), n1 * n2, n3, false);
    out
}

/// Inverse of [`dft_mode3`]: inverse DFT along mode 3 scaled by `1/I3`,
/// keeping the real part.
pub fn idft_mode3(x: &FTensor3) -> Tensor3 {
    let [n1, n2, n3] = x.dims();
    let mut buf = x.as_slice().to_vec();
    fft_tubes(&mut buf, n1 * n2, n3, true);
    let scale = 1.0 / n3 as f64;
    let data = buf.into_iter().map(|c| c.re * scale).collect();
    Tensor3::from_vec(x.dims(), data).expect("inverse DFT of finite data is finite")
}

/// Number of leading Fourier slices that determine the rest for a real
/// tensor: slices `k > I3/2` are conjugates of slice `I3 - k`.
#[inline]
pub(crate) fn independent_slices(n3: usize) -> usize {
    n3 / 2 + 1
}

/// Fourier slices `0` and (for even `I3`) `I3/2` of a real tensor are real.
#[inline]
pub(crate) fn is_self_conjugate(k: usize, n3: usize) -> bool {
    k == 0 || 2 * k == n3
}

/// Fills slices `k > I3/2` from their conjugate partners.
pub(crate) fn mirror_conjugate_slices(x: &mut FTensor3) {
    let n3 = x.dims()[2];
    for k in independent_slices(n3)..n3 {
        let src: Vec<Complex64> = x.frontal(n3 - k).iter().map(|c| c.conj()).collect();
        x.frontal_mut(k).copy_from_slice(&src);
    }
}

/// `unfold(x)`: the frontal slices stacked vertically, `(I1*I3) x I2`.
pub fn unfold(x: &Tensor3) -> Mat<f64> {
    let [n1, n2, _] = x.dims();
    Mat::from_fn(n1 * x.dims()[2], n2, |r, c| x.get(r % n1, c, r / n1))
}

/// Inverse of [`unfold`] for a tensor with `i3` frontal slices.
pub fn fold(m: MatRef<'_, f64>, n3: usize) -> Result<Tensor3> {
    if n3 == 0 || m.nrows() % n3 != 0 {
        return Err(Error::dims(format!("cannot fold {} rows into {n3} slices", m.nrows())));
    }
    let n1 = m.nrows() / n3;
    Ok(Tensor3::from_fn([n1, m.ncols(), n3], |i, j, k| m[(k * n1 + i, j)]))
}

/// Block-circulant matrix of `x`, `(I1*I3) x (I2*I3)`: block `(r, c)` is the
/// frontal slice `(r - c) mod I3`.
pub fn bcirc(x: &Tensor3) -> Mat<f64> {
    let [n1, n2, n3] = x.dims();
    Mat::from_fn(n1 * n3, n2 * n3, |row, col| {
        let (br, i) = (row / n1, row % n1);
        let (bc, j) = (col / n2, col % n2);
        x.get(i, j, (br + n3 - bc) % n3)
    })
}

pub(crate) fn complex_slice(x: &FTensor3, k: usize) -> MatRef<'_, Complex64> {
    let [n1, n2, _] = x.dims();
    MatRef::from_column_major_slice(x.frontal(k), n1, n2)
}

pub(crate) fn store_slice(x: &mut FTensor3, k: usize, m: MatRef<'_, Complex64>) {
    let n1 = m.nrows();
    let dst = x.frontal_mut(k);
    for j in 0..m.ncols() {
        for i in 0..n1 {
            dst[j * n1 + i] = m[(i, j)];
        }
    }
}

/// t-product `a * b`, computed as slicewise products in the Fourier domain.
pub fn tprod(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    let [n1, d, n3] = a.dims();
    let [d2, n2, n3b] = b.dims();
    if d != d2 || n3 != n3b {
        return Err(Error::dims(format!(
            "t-product needs (I1,d,I3) * (d,I2,I3), got {:?} * {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let abar = dft_mode3(a);
    let bbar = dft_mode3(b);
    let mut cbar = FTensor3::zeros([n1, n2, n3]);
    for k in 0..independent_slices(n3) {
        let c = complex_slice(&abar, k) * complex_slice(&bbar, k);
        store_slice(&mut cbar, k, c.as_ref());
    }
    mirror_conjugate_slices(&mut cbar);
    Ok(idft_mode3(&cbar))
}

/// Tensor transpose: every frontal slice transposed, slices `2..I3` in
/// reverse order, so that `(a * b)^T = b^T * a^T`.
pub fn transpose(x: &Tensor3) -> Tensor3 {
    let [n1, n2, n3] = x.dims();
    Tensor3::from_fn([n2, n1, n3], |i, j, k| x.get(j, i, (n3 - k) % n3))
}

/// Identity for the t-product: first frontal slice `I_n`, the rest zero.
pub fn identity_tensor(n: usize, n3: usize) -> Tensor3 {
    let mut t = Tensor3::zeros([n, n, n3]);
    for i in 0..n {
        t.set(i, i, 0, 1.0);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: &Tensor3, b: &Tensor3) -> f64 {
        a.distance(b) / b.fro_norm().max(1e-300)
    }

    fn pseudo_random(dims: [usize; 3], seed: u64) -> Tensor3 {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        Tensor3::from_fn(dims, |_, _, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn dft_of_depth_one_is_identity() {
        let x = pseudo_random([3, 4, 1], 1);
        assert_eq!(dft_mode3(&x), x.to_complex());
    }

    #[test]
    fn dft_of_zero_is_zero() {
        let x = Tensor3::zeros([2, 3, 5]);
        assert!(dft_mode3(&x).as_slice().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn dft_of_single_tube() {
        let mut x = Tensor3::zeros([1, 1, 3]);
        for (k, v) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            x.set(0, 0, k, v);
        }
        let f = dft_mode3(&x);
        // 3-point DFT by hand: w = exp(-2 pi i / 3)
        let h = 3f64.sqrt() / 2.0;
        let want = [(6.0, 0.0), (-1.5, h), (-1.5, -h)];
        for (k, (re, im)) in want.into_iter().enumerate() {
            let got = f.get(0, 0, k);
            assert!((got.re - re).abs() < 1e-12 && (got.im - im).abs() < 1e-12, "{k}: {got}");
        }
    }

    #[test]
    fn dft_round_trip_and_symmetry() {
        let x = pseudo_random([4, 3, 6], 7);
        let f = dft_mode3(&x);
        assert!(f.conjugate_symmetry_defect() < 1e-12);
        assert!(rel(&idft_mode3(&f), &x) < 1e-12);
    }

    #[test]
    fn bcirc_layouts() {
        let x = pseudo_random([2, 3, 1], 3);
        let m = bcirc(&x);
        assert_eq!((m.nrows(), m.ncols()), (2, 3));
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(m[(i, j)], x.get(i, j, 0));
            }
        }

        // slices A, B, C: first block column [A; B; C], second [C; A; B]
        let x = pseudo_random([2, 2, 3], 4);
        let m = bcirc(&x);
        for (br, bc, k) in [(0, 0, 0), (1, 0, 1), (2, 0, 2), (0, 1, 2), (1, 1, 0), (2, 1, 1)] {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(m[(br * 2 + i, bc * 2 + j)], x.get(i, j, k));
                }
            }
        }

        // I3 = 2: [[A, B], [B, A]]
        let x = pseudo_random([2, 2, 2], 5);
        let m = bcirc(&x);
        for (br, bc, k) in [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)] {
            assert_eq!(m[(br * 2, bc * 2 + 1)], x.get(0, 1, k));
        }
    }

    #[test]
    fn fold_inverts_unfold() {
        let x = pseudo_random([3, 2, 4], 9);
        assert_eq!(fold(unfold(&x).as_ref(), 4).unwrap(), x);
        assert!(fold(unfold(&x).as_ref(), 5).is_err());
    }

    #[test]
    fn tprod_depth_one_is_matmul() {
        let a = pseudo_random([3, 2, 1], 11);
        let b = pseudo_random([2, 4, 1], 12);
        let c = tprod(&a, &b).unwrap();
        for i in 0..3 {
            for j in 0..4 {
                let want: f64 = (0..2).map(|l| a.get(i, l, 0) * b.get(l, j, 0)).sum();
                assert!((c.get(i, j, 0) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tprod_rejects_mismatch() {
        let a = Tensor3::zeros([2, 3, 4]);
        assert!(tprod(&a, &Tensor3::zeros([2, 3, 4])).is_err());
        assert!(tprod(&a, &Tensor3::zeros([3, 3, 5])).is_err());
    }

    #[test]
    fn identity_is_neutral() {
        let x = pseudo_random([3, 4, 5], 13);
        assert!(rel(&tprod(&x, &identity_tensor(4, 5)).unwrap(), &x) < 1e-12);
        assert!(rel(&tprod(&identity_tensor(3, 5), &x).unwrap(), &x) < 1e-12);
        let f = dft_mode3(&identity_tensor(3, 4));
        for k in 0..4 {
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((f.get(i, j, k) - Complex64::new(want, 0.0)).norm() < 1e-15);
                }
            }
        }
        let b = bcirc(&identity_tensor(2, 3));
        for r in 0..6 {
            for c in 0..6 {
                assert_eq!(b[(r, c)], if r == c { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn transpose_properties() {
        let x = pseudo_random([2, 3, 1], 14);
        let t = transpose(&x);
        assert_eq!(t.dims(), [3, 2, 1]);
        assert_eq!(t.get(2, 1, 0), x.get(1, 2, 0));

        let x = pseudo_random([2, 3, 4], 15);
        assert_eq!(transpose(&transpose(&x)), x);

        let a = pseudo_random([2, 3, 3], 16);
        let b = pseudo_random([3, 2, 3], 17);
        let lhs = transpose(&tprod(&a, &b).unwrap());
        let rhs = tprod(&transpose(&b), &transpose(&a)).unwrap();
        assert!(rel(&lhs, &rhs) < 1e-12);
    }
}
