//! RGB images as `H x W x 3` tensors with values in `[0, 1]`.
//!
//! Binary PPM (P6, maxval 255) is the baseline format; PNG is accepted too.
//! The format is chosen from the file extension when writing.

use std::path::Path;

use image::{ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::talg::Tensor3;

/// Tensor from 8-bit RGB pixels: `x(row, col, channel) = value / 255`.
pub fn rgb_to_tensor(img: &RgbImage) -> Tensor3 {
    let (w, h) = img.dimensions();
    Tensor3::from_fn([h as usize, w as usize, 3], |i, j, c| {
        f64::from(img.get_pixel(j as u32, i as u32)[c]) / 255.0
    })
}

/// 8-bit RGB pixels from an `H x W x 3` tensor, clamping to `[0, 1]` and
/// rounding to the nearest level.
pub fn tensor_to_rgb(x: &Tensor3) -> Result<RgbImage> {
    let [h, w, c] = x.dims();
    if c != 3 {
        return Err(Error::dims(format!("image tensor needs 3 channels, got {c}")));
    }
    let (w32, h32) = match (u32::try_from(w), u32::try_from(h)) {
        (Ok(w), Ok(h)) => (w, h),
        _ => return Err(Error::dims(format!("image {h}x{w} too large"))),
    };
    Ok(RgbImage::from_fn(w32, h32, |j, i| {
        let px = |ch| quantize(x.get(i as usize, j as usize, ch));
        image::Rgb([px(0), px(1), px(2)])
    }))
}

#[inline]
fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn image_to_tensor(path: impl AsRef<Path>) -> Result<Tensor3> {
    let img = image::open(path.as_ref())?;
    Ok(rgb_to_tensor(&img.into_rgb8()))
}

pub fn tensor_to_image(x: &Tensor3, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = ImageFormat::from_path(path).unwrap_or(ImageFormat::Pnm);
    let img = tensor_to_rgb(x)?;
    if format == ImageFormat::Pnm {
        let mut bytes = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
        bytes.extend_from_slice(img.as_raw());
        std::fs::write(path, bytes)?;
        return Ok(());
    }
    img.save_with_format(path, format)?;
    Ok(())
}

/// Whether the path names an image rather than a tensor file.
pub fn is_image_path(path: impl AsRef<Path>) -> bool {
    matches!(
        ImageFormat::from_path(path.as_ref()),
        Ok(ImageFormat::Pnm | ImageFormat::Png)
    )
}
