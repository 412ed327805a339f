//! Position-addressable Gaussian sample streams on ChaCha8.
//!
//! Sample `i` of stream `(seed, stream)` always consumes the 32-bit words
//! `[i * W, (i + 1) * W)` with `W = 4 * ceil(dim / 2)`: each Box–Muller pair
//! reads two `u64`. Any sample can therefore be regenerated independently.

use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::num::Vector;

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Uniform in `[0, 1)` with 53 random bits.
pub fn uniform01<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * TWO_POW_M53
}

fn box_muller<R: RngCore>(rng: &mut R) -> (f64, f64) {
    // u1 in (0, 1] so the log is finite.
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) * TWO_POW_M53;
    let u2 = uniform01(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (r * c, r * s)
}

/// Fills `out` with independent standard normals, one Box–Muller pair per two entries.
pub fn fill_normals<R: RngCore>(rng: &mut R, out: &mut [f64]) {
    let mut chunks = out.chunks_exact_mut(2);
    for pair in &mut chunks {
        let (a, b) = box_muller(rng);
        pair[0] = a;
        pair[1] = b;
    }
    if let [last] = chunks.into_remainder() {
        *last = box_muller(rng).0;
    }
}

pub fn normal_vector<R: RngCore>(rng: &mut R, dim: usize) -> Vector {
    let mut v = Vector::zeros(dim);
    fill_normals(rng, v.as_mut_slice());
    v
}

/// Uniform draw from the ball of the given radius.
pub fn uniform_in_ball<R: RngCore>(rng: &mut R, dim: usize, radius: f64) -> Vector {
    loop {
        let dir = normal_vector(rng, dim);
        let n = dir.norm();
        if n > 0.0 {
            let r = radius * uniform01(rng).powf(1.0 / dim as f64);
            return dir * (r / n);
        }
    }
}

/// SplitMix64 finalizer, used to derive per-task seeds from structured ids.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        let mut z = h ^ p.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian sample stream positioned at an arbitrary sample index.
pub struct SampleStream {
    rng: ChaCha8Rng,
    dim: usize,
}

impl SampleStream {
    pub fn words_per_sample(dim: usize) -> u128 {
        4 * dim.div_ceil(2) as u128
    }

    pub fn at(seed: u64, stream: u64, dim: usize, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng.set_word_pos(index as u128 * Self::words_per_sample(dim));
        Self { rng, dim }
    }

    pub fn next_sample(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        fill_normals(&mut self.rng, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_access_matches_sequential() {
        for dim in [1, 2, 5] {
            let mut seq = SampleStream::at(7, 3, dim, 0);
            let mut buf = vec![0.0; dim];
            let mut samples = Vec::new();
            for _ in 0..20 {
                seq.next_sample(&mut buf);
                samples.push(buf.clone());
            }
            for i in [0usize, 1, 13, 19] {
                let mut s = SampleStream::at(7, 3, dim, i as u64);
                s.next_sample(&mut buf);
                assert_eq!(buf, samples[i]);
            }
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = SampleStream::at(1, 0, 3, 0);
        let mut b = SampleStream::at(1, 1, 3, 0);
        let (mut x, mut y) = (vec![0.0; 3], vec![0.0; 3]);
        a.next_sample(&mut x);
        b.next_sample(&mut y);
        assert_ne!(x, y);
    }

    #[test]
    fn moments() {
        let mut s = SampleStream::at(42, 0, 2, 0);
        let mut buf = [0.0; 2];
        let n = 200_000;
        let (mut m, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            s.next_sample(&mut buf);
            for &x in &buf {
                m += x;
                m2 += x * x;
            }
        }
        let n = (2 * n) as f64;
        assert!((m / n).abs() < 0.01);
        assert!((m2 / n - 1.0).abs() < 0.01);
    }

    #[test]
    fn ball_radius() {
        let mut rng = seeded_rng(3);
        for _ in 0..100 {
            assert!(uniform_in_ball(&mut rng, 4, 2.0).norm() <= 2.0);
        }
    }
}
