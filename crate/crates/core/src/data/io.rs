//! Binary tensor (`TNS3`) and mask (`MSK3`) files.
//!
//! Both are little-endian: 4 magic bytes, a `u32` format version (1), the
//! three dims as `u64`, then the payload. Tensors store `I1*I2*I3` `f64`
//! values in storage order; masks store a `u64` count followed by that many
//! strictly increasing `u64` linear indices.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::mask::SamplingMask;
use crate::error::{Error, Result};
use crate::talg::{Dims, Tensor3};

pub const TENSOR_MAGIC: &[u8; 4] = b"TNS3";
pub const MASK_MAGIC: &[u8; 4] = b"MSK3";
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 + 3 * 8;

struct Reader<'a> {
    kind: &'static str,
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn bad(&self, reason: impl Into<String>) -> Error {
        Error::Format { kind: self.kind, reason: reason.into() }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(self.bad(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<(Dims, usize)> {
        if self.take(4)? != magic {
            return Err(self.bad("bad magic bytes"));
        }
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(self.bad(format!("unsupported version {version}")));
        }
        let mut dims = [0usize; 3];
        for d in dims.iter_mut() {
            *d = usize::try_from(self.u64()?).map_err(|_| self.bad("dimension overflow"))?;
        }
        if dims.contains(&0) {
            return Err(self.bad(format!("zero dimension in {dims:?}")));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or_else(|| self.bad(format!("dimension overflow in {dims:?}")))?;
        Ok((dims, total))
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

fn header_bytes(magic: &[u8; 4], dims: Dims) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    out
}

pub fn encode_tensor(x: &Tensor3) -> Vec<u8> {
    let mut out = header_bytes(TENSOR_MAGIC, x.dims());
    out.reserve(8 * x.len());
    for v in x.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_tensor(buf: &[u8]) -> Result<Tensor3> {
    let mut r = Reader { kind: "tensor", buf, pos: 0 };
    let (dims, total) = r.header(TENSOR_MAGIC)?;
    let expected = total.checked_mul(8).ok_or_else(|| r.bad("payload size overflow"))?;
    if r.remaining() != expected {
        return Err(r.bad(format!(
            "payload has {} bytes, dims {dims:?} need {expected}",
            r.remaining()
        )));
    }
    let data = r
        .take(expected)?
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Tensor3::from_vec(dims, data)
}

pub fn encode_mask(m: &SamplingMask) -> Vec<u8> {
    let mut out = header_bytes(MASK_MAGIC, m.dims());
    out.extend_from_slice(&(m.len() as u64).to_le_bytes());
    for &i in m.indices() {
        out.extend_from_slice(&(i as u64).to_le_bytes());
    }
    out
}

pub fn decode_mask(buf: &[u8]) -> Result<SamplingMask> {
    let mut r = Reader { kind: "mask", buf, pos: 0 };
    let (dims, total) = r.header(MASK_MAGIC)?;
    let count = usize::try_from(r.u64()?).map_err(|_| r.bad("count overflow"))?;
    if count > total {
        return Err(r.bad(format!("count {count} exceeds {total} entries")));
    }
    if r.remaining() != count * 8 {
        return Err(r.bad(format!("payload has {} bytes, count {count} needs {}", r.remaining(), count * 8)));
    }
    let mut indices = Vec::with_capacity(count);
    for _ in 0..count {
        let i = r.u64()?;
        let i = usize::try_from(i).map_err(|_| r.bad("index overflow"))?;
        if i >= total {
            return Err(r.bad(format!("index {i} out of range for {dims:?}")));
        }
        if let Some(&prev) = indices.last() {
            if i <= prev {
                let what = if i == prev { "duplicate" } else { "unsorted" };
                return Err(r.bad(format!("{what} index {i}")));
            }
        }
        indices.push(i);
    }
    SamplingMask::from_indices(dims, indices)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    Ok(())
}

pub fn write_tensor(path: impl AsRef<Path>, x: &Tensor3) -> Result<()> {
    write_atomic(path.as_ref(), &encode_tensor(x))
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor3> {
    decode_tensor(&fs::read(path)?)
}

pub fn write_mask(path: impl AsRef<Path>, m: &SamplingMask) -> Result<()> {
    write_atomic(path.as_ref(), &encode_mask(m))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<SamplingMask> {
    decode_mask(&fs::read(path)?)
}
