//! Synthetic data, sampling masks and file formats.

mod image;
mod io;
mod mask;
mod synth;

pub use self::image::{image_to_tensor, is_image_path, rgb_to_tensor, tensor_to_image, tensor_to_rgb};
pub use io::{
    decode_mask, decode_tensor, encode_mask, encode_tensor, read_mask, read_tensor, write_mask,
    write_tensor, FORMAT_VERSION, MASK_MAGIC, TENSOR_MAGIC,
};
pub use mask::{gen_mask, project, SamplingMask};
pub use synth::{gaussian, gen_lowrank, RngSeed};
