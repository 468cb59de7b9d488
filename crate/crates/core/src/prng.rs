//! Baseline pseudo-random generator for the ordinary LMC drive, random
//! shifts, minibatch selection and synthetic data.
//!
//! The generator is ChaCha with 8 rounds (RFC 7539 block function, constants
//! `"expand 32-byte k"`). The 256-bit key is the little-endian `seed` followed
//! by 24 zero bytes; the 64-bit ChaCha stream (nonce) selects an independent
//! substream. Output words are consumed in block order, so a
//! `(seed, stream, counter)` triple names the same value on every platform.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::drive::inverse_normal_cdf;
use crate::scalar::Real;

/// Stream tags; the low 32 bits of a stream index carry a replicate or
/// chain number.
pub mod streams {
    pub const LMC_DRIVE: u64 = 1 << 32;
    pub const SHIFT: u64 = 2 << 32;
    pub const MINIBATCH: u64 = 3 << 32;
    pub const DATA: u64 = 4 << 32;
    pub const REFERENCE: u64 = 5 << 32;
    pub const IID_POINTS: u64 = 6 << 32;

    pub fn tagged(tag: u64, index: u64) -> u64 {
        tag | (index & 0xffff_ffff)
    }
}

#[derive(Clone, Debug)]
pub struct BaselinePrng {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl BaselinePrng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream);
        Self {
            inner,
            seed,
            stream,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform<T: Real>(&mut self) -> T {
        T::lit((self.inner.next_u64() >> 11) as f64 * f64::EPSILON / 2.0)
    }

    /// Uniform on the open interval `(0, 1)`: `(k + 1/2) 2^-53`.
    #[inline]
    pub fn uniform_open<T: Real>(&mut self) -> T {
        T::lit(((self.inner.next_u64() >> 11) as f64 + 0.5) * f64::EPSILON / 2.0)
    }

    /// Standard normal variate by inversion of an open uniform.
    #[inline]
    pub fn standard_normal<T: Real>(&mut self) -> T {
        let u: f64 = self.uniform_open();
        T::lit(inverse_normal_cdf(u).expect("open uniform is inside (0,1)"))
    }

    pub fn fill_normal<T: Real>(&mut self, out: &mut [T]) {
        for x in out {
            *x = self.standard_normal();
        }
    }

    /// Uniform integer in `0..n`.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// `amount` distinct indices from `0..len`.
    pub fn sample_indices(&mut self, len: usize, amount: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.inner, len, amount).into_vec()
    }
}

impl RngCore for BaselinePrng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
