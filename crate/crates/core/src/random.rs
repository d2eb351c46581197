//! Seeded sampling helpers. Every random quantity in the crate is drawn from
//! an explicitly seeded ChaCha generator; parallel jobs use independent
//! streams of the same master seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StateRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> StateRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for job `index` under `seed`; results do not depend on which
/// thread runs the job.
pub fn substream(seed: u64, index: u64) -> StateRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seed for sample `index` of a batch, mixed with splitmix64.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard complex Gaussian (`E|z|^2 = 1`).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<Complex64> {
    // Filled row by row so the draw order is independent of storage layout.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<Complex64> {
    (0..len).map(|_| complex_gaussian(rng)).collect()
}

/// Uniformly distributed point on the unit sphere of `C^len`.
pub fn unit_sphere_point<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v = complex_gaussian_vector(len, rng);
        let norm = crate::linalg::vector_norm(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}
