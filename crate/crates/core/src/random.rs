//! Seeded random operators for tests, sweeps and the CLI.
//!
//! Unitaries are Haar distributed: Gaussian complex matrices orthonormalized
//! column by column (QR with a positive-diagonal R).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrixkit::{ComplexMatrix, C64};
use crate::walk::LinearChainSpec;

pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn gaussian(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn complex_gaussian(&mut self) -> C64 {
        C64::new(self.gaussian(), self.gaussian())
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| self.complex_gaussian())
    }

    /// Haar-random pure state amplitudes.
    pub fn random_ket(&mut self, dim: usize) -> Vec<C64> {
        let v: Vec<C64> = (0..dim).map(|_| self.complex_gaussian()).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|z| z / norm).collect()
    }

    /// Point on the probability simplex (uniform over the simplex).
    pub fn random_probabilities(&mut self, n: usize) -> Vec<f64> {
        let e: Vec<f64> = (0..n).map(|_| -self.uniform().max(1e-300).ln()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|x| x / s).collect()
    }
}

fn orthonormalize_columns(mut m: ComplexMatrix) -> ComplexMatrix {
    let (n, k) = m.dim();
    for c in 0..k {
        for _ in 0..2 {
            for p in 0..c {
                let proj: C64 = (0..n).map(|r| m[(r, p)].conj() * m[(r, c)]).sum();
                for r in 0..n {
                    let sub = proj * m[(r, p)];
                    m[(r, c)] -= sub;
                }
            }
        }
        let norm = (0..n).map(|r| m[(r, c)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            m[(r, c)] /= norm;
        }
    }
    m
}

pub fn haar_unitary(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    orthonormalize_columns(rng.gaussian_matrix(n, n))
}

pub fn random_isometry(rng: &mut SeededRng, n: usize, k: usize) -> ComplexMatrix {
    orthonormalize_columns(rng.gaussian_matrix(n, k))
}

/// Full-rank random density matrix (Ginibre ensemble).
pub fn random_density(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    let g = rng.gaussian_matrix(n, n);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    w.scale_real(1.0 / tr)
}

pub fn random_pure_density(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    ComplexMatrix::projector(&rng.random_ket(n))
}

/// Linear chain with Haar-random unitaries.
pub fn random_chain(rng: &mut SeededRng, n_nodes: usize, dh: usize, omega: f64) -> LinearChainSpec {
    let unitaries = (0..n_nodes.saturating_sub(1))
        .map(|_| haar_unitary(rng, dh))
        .collect();
    LinearChainSpec::new(n_nodes, omega, unitaries).expect("random chain is valid")
}
