//! Seeded generators for test batteries and searches.
//!
//! Every consumer derives its stream from `(seed, stream)` so that runs are
//! reproducible independently of thread scheduling.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::group::FiniteAbelianGroup;
use crate::harmonic::GFunction;
use crate::operator::Operator;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / std::f64::consts::SQRT_2
}

/// Operator with i.i.d. complex Gaussian matrix entries, unit HS norm.
pub fn random_operator<R: Rng + ?Sized>(group: &FiniteAbelianGroup, rng: &mut R) -> Operator {
    let n = group.order();
    let m = DMatrix::from_fn(n, n, |_, _| complex_normal(rng));
    let op = Operator::from_matrix(group, m).expect("square");
    let norm = op.hs_norm();
    op.scale(1.0 / norm)
}

/// Hermitian part of [`random_operator`], rescaled to unit HS norm.
pub fn random_hermitian<R: Rng + ?Sized>(group: &FiniteAbelianGroup, rng: &mut R) -> Operator {
    let h = random_operator(group, rng).hermitian_part();
    let norm = h.hs_norm();
    h.scale(1.0 / norm)
}

/// Haar-random unit vector of L^2(G).
pub fn random_pure_vector<R: Rng + ?Sized>(group: &FiniteAbelianGroup, rng: &mut R) -> GFunction {
    let values = (0..group.order()).map(|_| complex_normal(rng)).collect();
    GFunction::new(group, values).expect("length").normalized().expect("nonzero")
}

/// Wishart-type state `X X* / tr` with `X` of shape `|G| x rank`.
pub fn random_state<R: Rng + ?Sized>(group: &FiniteAbelianGroup, rank: usize, rng: &mut R) -> Operator {
    let n = group.order();
    let x = DMatrix::from_fn(n, rank.max(1), |_, _| complex_normal(rng));
    let m = &x * x.adjoint();
    let tr: Complex64 = m.trace();
    Operator::from_matrix(group, m / tr).expect("square")
}
