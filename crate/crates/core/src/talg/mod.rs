//! Third-order tensor algebra under the t-product.
//!
//! Everything spectral is computed in the mode-3 Fourier domain, where the
//! t-product becomes a set of independent frontal-slice matrix products and
//! the t-SVD a set of slice SVDs. For real tensors only slices
//! `0..=I3/2` are computed; the remaining slices are complex conjugates.

mod fourier;
mod tensor;
mod tsvd;

pub use fourier::{bcirc, dft_mode3, fold, identity_tensor, idft_mode3, tprod, transpose, unfold};
pub use tensor::{Dims, FTensor3, Tensor3};
pub use tsvd::{singular_spectrum, tgsvt, tsvd, SingularSpectrum, TSvd, DEFAULT_RANK_TOL};
