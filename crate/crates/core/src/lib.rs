//! Low-rank tensor completion under the tensor p-shrinkage nuclear norm.
//!
//! The crate is organised bottom-up:
//!
//! - [`talg`]: third-order tensor algebra in the mode-3 Fourier domain
//!   (t-product, t-SVD, tubal/multi rank, TNN, p-TNN and its thresholding
//!   operator).
//! - [`shrink`]: the scalar p-shrinkage operator.
//! - [`solver`]: the completion objective and the ADMM solver with adaptive
//!   momentum.
//! - [`data`]: synthetic low-tubal-rank data, sampling masks, binary tensor
//!   and mask files, and image ingestion.
//! - [`metrics`]: RSE, PSNR and SSIM.
//! - [`cli`]: the experiment harness behind the `ptnn` binary.

pub mod cli;
pub mod data;
pub mod error;
pub mod metrics;
pub mod shrink;
pub mod solver;
pub mod talg;

pub use error::{Error, Result};
pub use talg::{FTensor3, Tensor3};
