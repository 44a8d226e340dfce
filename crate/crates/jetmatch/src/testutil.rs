//! Seeded random generators shared by unit tests.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::liegroup::{exp_algebra, AlgebraElement, Rotation};

pub(crate) fn random_skew(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> AlgebraElement {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-scale..scale));
    AlgebraElement::new(m).unwrap()
}

pub(crate) fn random_rotation(rng: &mut ChaCha8Rng, n: usize) -> Rotation {
    exp_algebra(&random_skew(rng, n, 1.5))
}

pub(crate) fn random_jet(rng: &mut ChaCha8Rng, n: usize, k: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, k, |_, _| rng.random_range(-scale..scale))
}
