//! Recovery-quality metrics: relative square error, PSNR and SSIM.

use crate::error::{Error, Result};
use crate::talg::Tensor3;

/// Reported in place of `+inf` when the estimate is exact.
pub const PSNR_CAP_DB: f64 = 300.0;
/// Side of the non-overlapping SSIM windows.
pub const SSIM_WINDOW: usize = 8;
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;
/// Luminance weights for RGB to grey conversion.
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricReport {
    pub rse: f64,
    pub psnr: f64,
    /// Present only for `H x W x 3` tensors, which are treated as RGB.
    pub ssim: Option<f64>,
}

impl MetricReport {
    /// All metrics of `estimate` against the ground truth `truth`.
    pub fn compute(truth: &Tensor3, estimate: &Tensor3) -> Result<Self> {
        let (rse, psnr) = (rse(truth, estimate)?, psnr(truth, estimate)?);
        let ssim = if truth.dims()[2] == 3 {
            Some(ssim(&GreyImage::from_rgb(truth)?, &GreyImage::from_rgb(estimate)?)?)
        } else {
            None
        };
        Ok(Self { rse, psnr, ssim })
    }
}

fn check_truth(x: &Tensor3, xstar: &Tensor3) -> Result<()> {
    x.check_same_dims(xstar, "metric")?;
    if x.max_abs() == 0.0 {
        return Err(Error::param("ground truth tensor is zero"));
    }
    Ok(())
}

/// `||xstar - x||_F / ||x||_F`.
pub fn rse(x: &Tensor3, xstar: &Tensor3) -> Result<f64> {
    check_truth(x, xstar)?;
    Ok(x.distance(xstar) / x.fro_norm())
}

/// `10 log10(max|x|^2 / mse)`, capped at [`PSNR_CAP_DB`].
pub fn psnr(x: &Tensor3, xstar: &Tensor3) -> Result<f64> {
    check_truth(x, xstar)?;
    let mse = normalized_recovery_error(x, xstar)?;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    let peak = x.max_abs();
    Ok((10.0 * (peak * peak / mse).log10()).min(PSNR_CAP_DB))
}

/// Mean squared error `||xstar - x||_F^2 / (I1 I2 I3)`.
pub fn normalized_recovery_error(x: &Tensor3, xstar: &Tensor3) -> Result<f64> {
    x.check_same_dims(xstar, "metric")?;
    let sq: f64 = x.as_slice().iter().zip(xstar.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sq / x.len() as f64)
}

/// Single-channel image, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GreyImage {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl GreyImage {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols || data.is_empty() {
            return Err(Error::dims(format!("{} values for a {rows}x{cols} image", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    /// Frontal slice `k` of a tensor.
    pub fn from_slice(x: &Tensor3, k: usize) -> Result<Self> {
        let [r, c, _] = x.dims();
        Self::new(r, c, x.frontal(k).to_vec())
    }

    /// Luminance of an `H x W x 3` RGB tensor.
    pub fn from_rgb(x: &Tensor3) -> Result<Self> {
        let [r, c, ch] = x.dims();
        if ch != 3 {
            return Err(Error::dims(format!("RGB tensor needs 3 slices, got {ch}")));
        }
        let (red, green, blue) = (x.frontal(0), x.frontal(1), x.frontal(2));
        let data = (0..r * c)
            .map(|i| LUMA[0] * red[i] + LUMA[1] * green[i] + LUMA[2] * blue[i])
            .collect();
        Self::new(r, c, data)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + self.rows * j]
    }
}

fn window_mean(img: &GreyImage, rows: &[usize], cols: &[usize]) -> f64 {
    let mut s = 0.0;
    for &j in cols {
        for &i in rows {
            s += img.get(i, j);
        }
    }
    s / (rows.len() * cols.len()) as f64
}

fn window_cov(a: &GreyImage, ma: f64, b: &GreyImage, mb: f64, rows: &[usize], cols: &[usize]) -> f64 {
    let mut s = 0.0;
    for &j in cols {
        for &i in rows {
            s += (a.get(i, j) - ma) * (b.get(i, j) - mb);
        }
    }
    s / (rows.len() * cols.len()) as f64
}

fn tiles(n: usize) -> Vec<Vec<usize>> {
    (0..n).step_by(SSIM_WINDOW).map(|s| (s..(s + SSIM_WINDOW).min(n)).collect()).collect()
}

/// Mean SSIM over non-overlapping `8 x 8` windows; edge windows are
/// truncated, so images smaller than 8 use a single window.
pub fn ssim(img: &GreyImage, imgstar: &GreyImage) -> Result<f64> {
    if img.shape() != imgstar.shape() {
        return Err(Error::dims(format!("images {:?} vs {:?}", img.shape(), imgstar.shape())));
    }
    let (row_tiles, col_tiles) = (tiles(img.rows), tiles(img.cols));
    let mut total = 0.0;
    for cols in &col_tiles {
        for rows in &row_tiles {
            let (mx, my) = (window_mean(img, rows, cols), window_mean(imgstar, rows, cols));
            let vx = window_cov(img, mx, img, mx, rows, cols);
            let vy = window_cov(imgstar, my, imgstar, my, rows, cols);
            let cxy = window_cov(img, mx, imgstar, my, rows, cols);
            let num = (2.0 * mx * my + SSIM_C1) * (2.0 * cxy + SSIM_C2);
            let den = (mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2);
            total += num / den;
        }
    }
    Ok(total / (row_tiles.len() * col_tiles.len()) as f64)
}
