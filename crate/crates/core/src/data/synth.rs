use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::talg::{tprod, Dims, Tensor3};

/// Seed for the portable generator behind all synthetic data.
///
/// Streams are `ChaCha8Rng::seed_from_u64(seed)` with `set_stream(s)`; the
/// low-rank factors use stream 0 and sampling masks stream 1, so a tensor and
/// its mask can share a seed without sharing random numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub const TENSOR_STREAM: u64 = 0;
    pub const MASK_STREAM: u64 = 1;

    pub fn rng(self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }

    pub fn offset(self, by: u64) -> RngSeed {
        RngSeed(self.0.wrapping_add(by))
    }
}

/// Standard normal tensor, filled in storage order.
pub fn gaussian(dims: Dims, rng: &mut impl Rng) -> Tensor3 {
    let n = Tensor3::zeros(dims).len();
    let data = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    Tensor3::from_vec(dims, data).expect("gaussian samples are finite")
}

/// `P * Q` with `P: I1 x r x I3`, `Q: r x I2 x I3` i.i.d. N(0, 1); tubal rank
/// at most `r`.
pub fn gen_lowrank(dims: Dims, r: usize, seed: RngSeed) -> Result<Tensor3> {
    let [n1, n2, n3] = dims;
    if r == 0 || r > n1.min(n2) {
        return Err(Error::param(format!("tubal rank {r} must be in 1..={}", n1.min(n2))));
    }
    let mut rng = seed.rng(RngSeed::TENSOR_STREAM);
    let p = gaussian([n1, r, n3], &mut rng);
    let q = gaussian([r, n2, n3], &mut rng);
    tprod(&p, &q)
}
