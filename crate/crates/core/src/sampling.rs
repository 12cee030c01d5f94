//! Seeded random draws shared by generators.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Scalar;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<T: Scalar>(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<T> {
    // Row-major fill so the draw order reads naturally agent by agent.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let x: f64 = StandardNormal.sample(rng);
            m[(i, j)] = T::lit(x);
        }
    }
    m
}

pub fn gaussian_vector<T: Scalar>(len: usize, rng: &mut ChaCha8Rng) -> DVector<T> {
    DVector::from_fn(len, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        T::lit(x)
    })
}
