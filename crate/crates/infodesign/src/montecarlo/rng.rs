//! Counter-addressed standard normals.
//!
//! Sample `i` of stream `s` under seed `k` always reads the same ChaCha8 words:
//! each pair of normals consumes exactly two `u64` (Box–Muller), so a sample of
//! dimension `d` occupies `4·⌈d/2⌉` 32-bit words starting at `i·4·⌈d/2⌉`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn words_per_sample(dim: usize) -> u128 {
    4 * dim.div_ceil(2) as u128
}

pub struct NormalStream {
    rng: ChaCha8Rng,
    dim: usize,
}

impl NormalStream {
    /// Positioned at sample `index`.
    pub fn new(seed: u64, stream: u64, dim: usize, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng.set_word_pos(index as u128 * words_per_sample(dim));
        NormalStream { rng, dim }
    }

    fn unit_open_closed(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn unit_closed_open(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fill `out` (length `dim`) with the next sample.
    pub fn next_sample(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        let mut k = 0;
        while k < self.dim {
            let u1 = self.unit_open_closed();
            let u2 = self.unit_closed_open();
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
            out[k] = r * c;
            if k + 1 < self.dim {
                out[k + 1] = r * s;
            }
            k += 2;
        }
    }
}

/// The normals of a single sample, independent of any other draw.
pub fn normals_at(seed: u64, stream: u64, dim: usize, index: u64) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    NormalStream::new(seed, stream, dim, index).next_sample(&mut out);
    out
}
