//! Seeded uniform sampling in Euclidean balls.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Generator for stream `stream` of a seeded family. Streams are independent,
/// so run `k` of a batch never depends on how many runs came before it.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform point in the closed ball of the given radius in `R^dim`:
/// Gaussian direction, radius `R·u^(1/dim)`.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    if dim == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if crate::linalg::norm(&v) > 0.0 {
            break v;
        }
    };
    let n = crate::linalg::norm(&v);
    let u: f64 = rng.random();
    let r = radius * libm::pow(u, 1.0 / dim as f64);
    for c in &mut v {
        *c *= r / n;
    }
    // rounding can push the norm a hair above the radius
    let norm = crate::linalg::norm(&v);
    if norm > radius {
        for c in &mut v {
            *c *= radius / norm;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_stay_in_ball_and_fill_it() {
        let mut rng = stream_rng(7, 0);
        let mut max: f64 = 0.0;
        for _ in 0..10_000 {
            let v = uniform_in_ball(&mut rng, 4, 100.0);
            let n = crate::linalg::norm(&v);
            assert!(n <= 100.0);
            max = max.max(n);
        }
        assert!(max > 95.0);
    }

    #[test]
    fn streams_are_reproducible() {
        let a = uniform_in_ball(&mut stream_rng(3, 5), 3, 1.0);
        let b = uniform_in_ball(&mut stream_rng(3, 5), 3, 1.0);
        let c = uniform_in_ball(&mut stream_rng(3, 6), 3, 1.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_radius_is_origin() {
        let v = uniform_in_ball(&mut stream_rng(1, 1), 3, 0.0);
        assert!(v.iter().all(|c| *c == 0.0));
    }
}
