//! Seeded random inputs for sweeps and checks.
//!
//! All draws go through `ChaCha8Rng`, whose stream is fixed across
//! platforms, so one 64-bit seed reproduces every sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::composite::{LambdaSet, MapConfig, MIN_SEPARATION};
use crate::error::Result;
use crate::vector;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> SampleRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn unit_vector<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = vector::norm(&g);
        if n > 1e-8 {
            return vector::scale(&g, 1.0 / n);
        }
    }
}

/// Uniform point in the ball of the given radius about the origin.
pub fn point_in_ball<R: Rng>(rng: &mut R, d: usize, radius: f64) -> Vec<f64> {
    let u = unit_vector(rng, d);
    let rho = radius * rng.random::<f64>().powf(1.0 / d as f64);
    vector::scale(&u, rho)
}

/// Uniform point in an axis-aligned box.
pub fn point_in_box<R: Rng>(rng: &mut R, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter()
        .zip(hi)
        .map(|(a, b)| a + (b - a) * rng.random::<f64>())
        .collect()
}

/// Nonnegative vector summing to one: independent uniforms, normalized.
pub fn simplex<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let s: f64 = v.iter().sum();
        if s > 0.0 {
            return v.iter().map(|x| x / s).collect();
        }
    }
}

/// Random orthogonal matrix (row-major) by Gram-Schmidt on Gaussian columns.
pub fn orthogonal<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for c in &cols {
                let p = vector::dot(&v, c);
                v = vector::axpy(&v, -p, c);
            }
        }
        let n = vector::norm(&v);
        if n > 1e-6 {
            cols.push(vector::scale(&v, 1.0 / n));
        }
    }
    let mut m = vec![0.0; d * d];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..d {
            m[i * d + j] = c[i];
        }
    }
    m
}

/// `Q x` for a row-major `d x d` matrix `Q`.
pub fn apply(q: &[f64], x: &[f64]) -> Vec<f64> {
    let d = x.len();
    (0..d)
        .map(|i| vector::dot(&q[i * d..(i + 1) * d], x))
        .collect()
}

/// `m` centers drawn uniformly from the ball of radius `radius`, each at
/// least `min_sep` from the previous ones.
pub fn lambda_set<R: Rng>(
    rng: &mut R,
    d: usize,
    m: usize,
    radius: f64,
    min_sep: f64,
) -> Result<LambdaSet> {
    let min_sep = min_sep.max(MIN_SEPARATION * 10.0);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(m);
    while centers.len() < m {
        let p = point_in_ball(rng, d, radius);
        if centers.iter().all(|c| vector::distance(c, &p) >= min_sep) {
            centers.push(p);
        }
    }
    LambdaSet::new(d, centers)
}

/// A random configuration with `m` centers in the unit ball.
pub fn map_config<R: Rng>(rng: &mut R, d: usize, m: usize, k: f64) -> Result<MapConfig> {
    MapConfig::new(lambda_set(rng, d, m, 1.0, 1e-6)?, k)
}

/// Point in the ball of radius `radius` at distance at least `min_dist` from
/// every center.
pub fn point_away_from<R: Rng>(
    rng: &mut R,
    set: &LambdaSet,
    radius: f64,
    min_dist: f64,
) -> Vec<f64> {
    loop {
        let p = point_in_ball(rng, set.dim(), radius);
        if set.nearest(&p).1 >= min_dist {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_reproducible() {
        let a: Vec<f64> = unit_vector(&mut rng(7), 5);
        let b: Vec<f64> = unit_vector(&mut rng(7), 5);
        assert_eq!(a, b);
        assert_ne!(
            unit_vector(&mut rng_stream(7, 1), 5),
            unit_vector(&mut rng_stream(7, 2), 5)
        );
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let d = 6;
        let q = orthogonal(&mut rng(3), d);
        for i in 0..d {
            for j in 0..d {
                let ip: f64 = (0..d).map(|k| q[k * d + i] * q[k * d + j]).sum();
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn simplex_sums_to_one() {
        let mut r = rng(11);
        for d in 2..10 {
            let s = simplex(&mut r, d);
            assert!(s.iter().all(|v| *v >= 0.0));
            assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn lambda_set_respects_separation() {
        let set = lambda_set(&mut rng(5), 3, 20, 1.0, 0.1).unwrap();
        assert_eq!(set.len(), 20);
        assert!(set.min_pairwise_distance().unwrap() >= 0.1);
        assert!(set.bound() <= 1.0);
    }
}
