//! Dense complex linear algebra helpers shared by the oracle and the
//! subspace solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending with
/// matching eigenvector columns.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let herm_err = (m - m.adjoint()).norm();
    if herm_err > 1e-8 * (1.0 + m.norm()) {
        return Err(Error::Numerical(format!(
            "matrix is not Hermitian (|M - M^H| = {herm_err:.3e})"
        )));
    }
    // Symmetrize away estimator-level noise before factorizing.
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

/// The unitary `exp(-i H t)` of a Hermitian `H`, built from its spectral
/// decomposition.
pub fn evolution_operator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(h)?;
    let phases = CVector::from_iterator(
        values.len(),
        values.iter().map(|&e| Complex64::from_polar(1.0, -e * t)),
    );
    let scaled = {
        let mut v = vectors.clone();
        for (c, phase) in phases.iter().enumerate() {
            v.column_mut(c).scale_mut(1.0);
            for r in 0..v.nrows() {
                v[(r, c)] *= phase;
            }
        }
        v
    };
    Ok(&scaled * vectors.adjoint())
}

/// Lower-triangular Cholesky factor of a Hermitian positive-definite matrix.
pub fn cholesky(m: &CMatrix) -> Result<CMatrix> {
    m.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))
}

pub fn real_diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(values[r], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
