//! Deterministic point and direction samplers.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::{norm, scale};

/// Seeded generator used everywhere a stream of random numbers is needed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for item `index` of a run seeded with `seed`, so
/// per-item work can be scheduled in any order.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Uniformly distributed unit vector in `R^n`.
pub fn random_direction<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let r = norm(&g);
        if r > 1e-12 {
            return scale(&g, 1.0 / r);
        }
    }
}

/// Uniform point in the ball of radius `radius` about the origin.
pub fn random_in_ball<R: Rng>(n: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    let d = random_direction(n, rng);
    let s: f64 = rng.random::<f64>().powf(1.0 / n as f64);
    scale(&d, radius * s)
}

/// Fibonacci lattice of `count` nearly uniform points on `S^2`.
pub fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            vec![rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

/// Boundary directions: Fibonacci lattice for `n = 3`, seeded uniform
/// directions otherwise.
pub fn sphere_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if n == 3 {
        fibonacci_sphere(count)
    } else {
        let mut r = rng(seed);
        (0..count).map(|_| random_direction(n, &mut r)).collect()
    }
}

/// Coordinate axes in both orientations followed by `extra` seeded directions.
pub fn probe_directions(n: usize, extra: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * n + extra);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            dirs.push(e);
        }
    }
    let mut r = rng(seed);
    dirs.extend((0..extra).map(|_| random_direction(n, &mut r)));
    dirs
}

/// Antipodally balanced direction set: every direction appears with its negative.
pub fn balanced_directions(n: usize, pairs: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let mut dirs = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let d = random_direction(n, &mut r);
        dirs.push(scale(&d, -1.0));
        dirs.push(d);
    }
    dirs
}
