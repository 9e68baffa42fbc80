//! State-closeness measures. The matrix-level functions accept any square
//! Hermitian PSD matrices (not only qubit registers); the
//! [`DensityMatrix`] wrappers additionally require matching labels.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{DensityMatrix, C64};
use crate::error::{invalid, Result};

fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    SymmetricEigen::new(hermitize(m)).eigenvalues.iter().copied().collect()
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues at the
/// round-off level of the largest one are treated as zero, so that rank
/// deficient inputs do not pick up `√ε`-sized spurious components.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(hermitize(m));
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    let floor = top * 1e-14 * m.nrows().max(1) as f64;
    let roots = eig
        .eigenvalues
        .map(|l| C64::new(if l > floor { l.sqrt() } else { 0.0 }, 0.0));
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&roots) * v.adjoint()
}

fn check_square_pair(x: &DMatrix<C64>, y: &DMatrix<C64>) -> Result<()> {
    if x.nrows() != x.ncols() || y.nrows() != y.ncols() || x.nrows() != y.nrows() {
        return Err(invalid(format!(
            "dimension mismatch: {}×{} vs {}×{}",
            x.nrows(),
            x.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    Ok(())
}

/// `F(X,Y) = (tr √(√X Y √X))²`, computed as the squared sum of singular
/// values of `√Y √X`, which avoids square roots of tiny eigenvalues of
/// `√X Y √X`.
pub fn fidelity_matrices(x: &DMatrix<C64>, y: &DMatrix<C64>) -> Result<f64> {
    check_square_pair(x, y)?;
    let s: f64 = (psd_sqrt(y) * psd_sqrt(x)).singular_values().iter().sum();
    Ok((s * s).clamp(0.0, 1.0))
}

/// `D(X,Y) = tr|X − Y| / 2`.
pub fn trace_distance_matrices(x: &DMatrix<C64>, y: &DMatrix<C64>) -> Result<f64> {
    check_square_pair(x, y)?;
    let diff = x - y;
    let d: f64 = hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>() / 2.0;
    Ok(d.clamp(0.0, 1.0))
}

/// Bures distance from a fidelity value: `√(2 − 2√F)`.
pub fn bures_from_fidelity(f: f64) -> f64 {
    (2.0 - 2.0 * f.clamp(0.0, 1.0).sqrt()).max(0.0).sqrt()
}

pub fn bures_distance_matrices(x: &DMatrix<C64>, y: &DMatrix<C64>) -> Result<f64> {
    Ok(bures_from_fidelity(fidelity_matrices(x, y)?))
}

fn check_labels(x: &DensityMatrix, y: &DensityMatrix) -> Result<()> {
    if x.labels() != y.labels() {
        return Err(invalid("density matrices are over different qubit labels"));
    }
    Ok(())
}

pub fn fidelity(x: &DensityMatrix, y: &DensityMatrix) -> Result<f64> {
    check_labels(x, y)?;
    fidelity_matrices(&x.matrix(), &y.matrix())
}

pub fn trace_distance(x: &DensityMatrix, y: &DensityMatrix) -> Result<f64> {
    check_labels(x, y)?;
    trace_distance_matrices(&x.matrix(), &y.matrix())
}

pub fn bures_distance(x: &DensityMatrix, y: &DensityMatrix) -> Result<f64> {
    check_labels(x, y)?;
    bures_distance_matrices(&x.matrix(), &y.matrix())
}

/// `⟨ψ|ρ|ψ⟩` for a pure reference vector; equals `F(|ψ⟩⟨ψ|, ρ)`.
pub fn pure_fidelity(psi: &[C64], rho: &DMatrix<C64>) -> Result<f64> {
    if psi.len() != rho.nrows() || rho.nrows() != rho.ncols() {
        return Err(invalid("dimension mismatch"));
    }
    let d = psi.len();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        if psi[i] == C64::new(0.0, 0.0) {
            continue;
        }
        for j in 0..d {
            acc += psi[i].conj() * rho[(i, j)] * psi[j];
        }
    }
    Ok(acc.re.clamp(0.0, 1.0))
}
