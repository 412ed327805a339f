pub mod mc;
pub mod multinode;
pub mod relusq;
pub mod single;
pub mod spectral;

use rand_chacha::ChaCha8Rng;
use sobolev_core::mc::rng::{mix_seed, normal_vector, seeded_rng, uniform_in_ball};
use sobolev_core::num::Vector;

pub(crate) fn rng_for(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    let mut all = vec![seed];
    all.extend_from_slice(parts);
    seeded_rng(mix_seed(&all))
}

/// `(w, w*)` with a uniformly random unit teacher and `w = w* + e`, `e` uniform in the unit ball.
pub(crate) fn basin_pair(rng: &mut ChaCha8Rng, dim: usize) -> (Vector, Vector) {
    let wstar = normal_vector(rng, dim).normalize();
    let e = uniform_in_ball(rng, dim, 1.0);
    (&wstar + e, wstar)
}

/// Maps a field error to a NaN vector so the integrator reports the blow-up time.
pub(crate) fn nan_on_error(r: sobolev_core::Result<Vector>, dim: usize) -> Vector {
    r.unwrap_or_else(|_| Vector::from_element(dim, f64::NAN))
}
