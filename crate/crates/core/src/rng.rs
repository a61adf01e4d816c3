//! Seeded random sources. Every randomized routine takes an explicit
//! generator; nothing reads ambient entropy.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{CMat, C64};

pub type LatticeRng = ChaCha8Rng;

/// Generator for `seed`, on stream 0.
pub fn seeded(seed: u64) -> LatticeRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent sub-stream of `seed`. Streams never overlap for distinct
/// `stream` values.
pub fn split(seed: u64, stream: u64) -> LatticeRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Complex number with real and imaginary parts uniform in [-1, 1).
pub fn complex(rng: &mut LatticeRng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn matrix(rng: &mut LatticeRng, dim: usize) -> CMat {
    DMatrix::from_fn(dim, dim, |_, _| complex(rng))
}

/// Random matrix shifted towards the identity so it is well conditioned.
pub fn well_conditioned(rng: &mut LatticeRng, dim: usize) -> CMat {
    let mut m = matrix(rng, dim) * C64::new(0.5, 0.0);
    for i in 0..dim {
        m[(i, i)] += C64::new(2.0, 0.0);
    }
    m
}

pub fn hermitian(rng: &mut LatticeRng, dim: usize) -> CMat {
    let m = matrix(rng, dim);
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}
