//! Seeded random generators for the verification suites: node systems,
//! Hermitian matrices, unitaries, and commuting positive families. All
//! generators are driven by a caller-supplied ChaCha stream so that suites
//! are reproducible from a single 64-bit seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ddcore::NodeSystem;
use crate::matcalc::{eigh, HermitianMatrix};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A node system with values in [0.5, 4]. Draws landing within 5e-3 of an
/// existing node are snapped onto it (raising its multiplicity), so the
/// confluent code paths are exercised while near-confluent ill-conditioned
/// gaps are avoided.
pub fn random_nodes(rng: &mut ChaCha8Rng, max_order: usize) -> NodeSystem {
    let count = rng.gen_range(1..=max_order.max(1));
    let mut entries: Vec<(f64, usize)> = Vec::new();
    for _ in 0..count {
        let v: f64 = rng.gen_range(0.5..4.0);
        match entries.iter_mut().find(|(w, _)| (v - *w).abs() < 5e-3) {
            Some(entry) => entry.1 += 1,
            None => entries.push((v, 1)),
        }
    }
    NodeSystem::new(&entries).unwrap()
}

/// A dense complex matrix with entries uniform in the centered square of the
/// given half-width.
pub fn random_matrix(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
        )
    })
}

/// A random Hermitian matrix (m + m*)/2 with entry scale as given.
pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> HermitianMatrix {
    let m = random_matrix(rng, dim, scale);
    let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    HermitianMatrix::new(h).unwrap()
}

/// A Haar-ish random unitary: the eigenvector matrix of a random Hermitian.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<Complex64> {
    let h = random_hermitian(rng, dim, 1.0);
    eigh(&h).unwrap().unitary().clone()
}

/// A family of commuting Hermitian matrices built from one shared unitary
/// and independent spectra drawn from [lo, hi].
pub fn random_commuting_family(
    rng: &mut ChaCha8Rng,
    dim: usize,
    count: usize,
    lo: f64,
    hi: f64,
) -> Vec<HermitianMatrix> {
    let u = random_unitary(rng, dim);
    (0..count)
        .map(|_| {
            let diag = DMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    Complex64::new(rng.gen_range(lo..hi), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let m = &u * diag * u.adjoint();
            // Symmetrize away rounding from the conjugation.
            let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
            HermitianMatrix::new(h).unwrap()
        })
        .collect()
}
