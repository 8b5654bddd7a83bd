//! Seeded sampling helpers. All randomness flows from one SplitMix64 stream
//! (64-bit state, golden-ratio increment) so reports are reproducible.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::laurent::{LaurentMatrix, LaurentPoly};
use crate::matrix::Matrix;
use crate::scalar::{Backend, Exact, Float, Scalar};

pub type Prng = SplitMix64;

pub fn seeded(seed: u64) -> Prng {
    SplitMix64::seed_from_u64(seed)
}

/// Small Gaussian rational with numerators in [-4, 4] and denominators 1..=3.
pub fn exact(rng: &mut Prng) -> Exact {
    let re = Exact::from_ratio(rng.random_range(-4..=4), rng.random_range(1..=3));
    let im = Exact::from_ratio(rng.random_range(-4..=4), rng.random_range(1..=3));
    re + im * Exact::i()
}

pub fn exact_nonzero(rng: &mut Prng) -> Exact {
    loop {
        let x = exact(rng);
        if !x.is_zero() {
            return x;
        }
    }
}

pub fn float(rng: &mut Prng) -> Float {
    Float::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
}

pub fn float_nonzero(rng: &mut Prng) -> Float {
    loop {
        let x = float(rng);
        if x.norm() > 1e-3 {
            return x;
        }
    }
}

/// Backend-generic sample: small rationals on the exact backend, a uniform box on float.
pub fn scalar<S: Scalar>(rng: &mut Prng) -> S {
    match S::BACKEND {
        Backend::Exact => {
            let re = S::from_ratio(rng.random_range(-4..=4), rng.random_range(1..=3));
            let im = S::from_ratio(rng.random_range(-4..=4), rng.random_range(1..=3));
            re + im * S::i()
        }
        Backend::Float => S::from_f64_parts(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
    }
}

pub fn scalar_nonzero<S: Scalar>(rng: &mut Prng) -> S {
    loop {
        let x = scalar::<S>(rng);
        if x.abs_f64() > 1e-3 {
            return x;
        }
    }
}

pub fn vector<S: Scalar>(rng: &mut Prng, n: usize) -> Vec<S> {
    (0..n).map(|_| scalar(rng)).collect()
}

pub fn matrix<S: Scalar>(rng: &mut Prng, n: usize) -> Matrix<S> {
    Matrix::from_fn(n, n, |_, _| scalar(rng))
}

pub fn invertible_matrix<S: Scalar>(rng: &mut Prng, n: usize) -> Matrix<S> {
    loop {
        let m = matrix::<S>(rng, n);
        if m.inverse().is_some() && m.determinant().is_ok_and(|d| d.abs_f64() > 1e-6) {
            return m;
        }
    }
}

/// Polynomial gauge with nonzero constant determinant: a constant diagonal
/// scaling times one or two elementary factors I + c·ζᵏ·E_ij (i ≠ j, k ≤ max_deg).
pub fn unimodular_gauge<S: Scalar>(rng: &mut Prng, r: usize, max_deg: i64) -> LaurentMatrix<S> {
    let scaling: Vec<LaurentPoly<S>> =
        (0..r).map(|_| LaurentPoly::constant(S::from_i64(rng.random_range(1..=3)))).collect();
    let mut g = LaurentMatrix::diag(scaling);
    if r < 2 {
        return g;
    }
    for _ in 0..rng.random_range(1..=2) {
        let i = rng.random_range(0..r);
        let mut j = rng.random_range(0..r - 1);
        if j >= i {
            j += 1;
        }
        let mut e = LaurentMatrix::identity(r);
        let k = rng.random_range(0..=max_deg);
        e.set(i, j, LaurentPoly::monomial(scalar_nonzero(rng), k));
        g = g.mul(&e).expect("same size");
    }
    g
}
