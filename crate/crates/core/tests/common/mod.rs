#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use sbqs::tensor::{ComplexMatrix, DensityMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, d: usize) -> ComplexMatrix {
    DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn hermitian<R: Rng>(rng: &mut R, d: usize) -> ComplexMatrix {
    let m = gaussian_matrix(rng, d);
    (&m + m.adjoint()).scale(0.5)
}

pub fn density<R: Rng>(rng: &mut R, d: usize) -> DensityMatrix {
    let m = gaussian_matrix(rng, d);
    let p = &m * m.adjoint();
    let t = p.trace().re;
    DensityMatrix::new(p.unscale(t)).unwrap()
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
