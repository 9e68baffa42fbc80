//! Seeded random states, density matrices and unitaries.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{DensityMatrix, PureStateVector, QubitLabel, C64};
use crate::Result;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector of length `dim`.
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= n);
    v
}

pub fn haar_state<R: Rng + ?Sized>(labels: Vec<QubitLabel>, rng: &mut R) -> Result<PureStateVector> {
    let v = haar_vector(1 << labels.len(), rng);
    PureStateVector::from_unnormalized(labels, v)
}

/// Random mixed state of dimension `dim`: a Haar-random pure state on
/// `dim × dim` with the second factor traced out.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let v = haar_vector(dim * dim, rng);
    let a = DMatrix::from_row_slice(dim, dim, &v);
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

pub fn random_density<R: Rng + ?Sized>(labels: Vec<QubitLabel>, rng: &mut R) -> Result<DensityMatrix> {
    let m = random_density_matrix(1 << labels.len(), rng);
    DensityMatrix::from_matrix(labels, &m)
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the
/// diagonal phases of R divided out.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Pure state as a rank-one density matrix over raw dimensions.
pub fn projector(v: &[C64]) -> DMatrix<C64> {
    let d = v.len();
    DMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj())
}
