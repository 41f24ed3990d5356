//! Independent brute-force ground truth.
//!
//! Everything here deliberately takes a different algorithmic path from the
//! production code: dense Hermitian eigensolves (Lanczos with full
//! reorthogonalization above the dense cutoff), scaling-and-squaring matrix
//! exponentials instead of spectral decomposition or Trotter products, a
//! Cholesky route for the generalized eigenproblem instead of whitening,
//! and a dense construction of the fixed-node effective operator.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{hermitian_eigen, CMatrix, CVector};
use crate::pauli::PauliOperator;
use crate::shell_model::SparseHamiltonian;
use crate::simulator::StateVector;
use crate::{Error, Result};

/// Largest dimension handled by dense eigensolves; larger sparse problems
/// go through Lanczos.
pub const DENSE_CUTOFF: usize = 1 << 12;

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Matching columns, when computed densely.
    pub eigenvectors: Option<CMatrix>,
}

/// The k lowest eigenpairs of a dense Hermitian matrix.
pub fn exact_spectrum_dense(h: &CMatrix, k: usize) -> Result<SpectrumResult> {
    if h.nrows() > DENSE_CUTOFF {
        return Err(Error::InvalidArgument(format!(
            "dense spectrum limited to dimension {DENSE_CUTOFF}, got {}",
            h.nrows()
        )));
    }
    let (vals, vecs) = hermitian_eigen(h)?;
    let k = k.min(vals.len());
    Ok(SpectrumResult {
        eigenvalues: vals[..k].to_vec(),
        eigenvectors: Some(vecs.columns(0, k).into_owned()),
    })
}

pub fn exact_spectrum_operator(op: &PauliOperator, k: usize) -> Result<SpectrumResult> {
    exact_spectrum_dense(&op.to_dense(), k)
}

/// The k lowest eigenvalues of a sparse Hamiltonian: dense below the
/// cutoff, Lanczos with full reorthogonalization above it.
pub fn exact_spectrum(h: &SparseHamiltonian, k: usize) -> Result<SpectrumResult> {
    if h.dim() <= DENSE_CUTOFF {
        return exact_spectrum_dense(&h.to_dense_complex(), k);
    }
    lanczos_lowest(h, k)
}

fn lanczos_lowest(h: &SparseHamiltonian, k: usize) -> Result<SpectrumResult> {
    let dim = h.dim();
    let max_iters = (8 * k + 80).min(dim);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    // Deterministic pseudo-random start vector.
    let mut v: Vec<f64> = (0..dim)
        .map(|i| {
            let x = (i as f64 + 1.0) * 0.754877666246693;
            (x - x.floor()) - 0.5 + 1e-3
        })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    for _ in 0..max_iters {
        let mut w = h.apply(&v);
        let alpha: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        alphas.push(alpha);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= alpha * vi;
        }
        if let Some(prev) = basis.last() {
            let beta_prev = *betas.last().unwrap();
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= beta_prev * pi;
            }
        }
        // Full reorthogonalization keeps the Ritz values honest.
        for b in &basis {
            let proj: f64 = w.iter().zip(b).map(|(a, c)| a * c).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= proj * bi;
            }
        }
        {
            let proj: f64 = w.iter().zip(&v).map(|(a, c)| a * c).sum();
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi -= proj * vi;
            }
        }
        basis.push(v.clone());
        let beta = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if beta < 1e-12 {
            break;
        }
        betas.push(beta);
        w.iter_mut().for_each(|x| *x /= beta);
        v = w;
    }
    let m = alphas.len();
    let mut tri = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        tri[(i, i)] = alphas[i];
        if i + 1 < m {
            tri[(i, i + 1)] = betas[i];
            tri[(i + 1, i)] = betas[i];
        }
    }
    let eig = tri.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(SpectrumResult {
        eigenvalues: vals[..k.min(vals.len())].to_vec(),
        eigenvectors: None,
    })
}

/// e^A by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm1: f64 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = norm1.log2().ceil().max(0.0) as u32 + 1;
    let scaled = a.map(|x| x / 2f64.powi(s as i32));
    let mut result = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
        if term.norm() < 1e-16 * result.norm() {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// e^{-iHt}|v> through the scaling-and-squaring exponential.
pub fn exact_evolution(h: &CMatrix, v: &StateVector, t: f64) -> Result<StateVector> {
    let u = expm(&h.map(|x| x * Complex64::new(0.0, -t)));
    let mut out = v.clone();
    out.apply_unitary(&u)?;
    Ok(out)
}

/// The sum of positive off-diagonal elements in column x (Eq.-style
/// sign-flip potential), computed by brute force from the dense matrix.
pub fn dense_sign_flip(h: &DMatrix<f64>, x: usize) -> f64 {
    (0..h.nrows())
        .filter(|&r| r != x && h[(r, x)] > 0.0)
        .map(|r| h[(r, x)])
        .sum()
}

/// Dense fixed-node Green's function G^fn for a real symmetric H:
/// off-diagonal -H_xx' where H_xx' <= 0 and gamma*H_xx' where H_xx' > 0;
/// diagonal Lambda - H_xx - (1+gamma) V_sf(x).
pub fn dense_fixed_node_green(h: &DMatrix<f64>, lambda: f64, gamma: f64) -> Result<DMatrix<f64>> {
    let n = h.nrows();
    let mut g = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let v = h[(x, y)];
            g[(x, y)] = if v <= 0.0 { -v } else { gamma * v };
        }
        let diag = lambda - h[(x, x)] - (1.0 + gamma) * dense_sign_flip(h, x);
        if diag < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lambda {lambda} too small: fixed-node diagonal {diag} at state {x}"
            )));
        }
        g[(x, x)] = diag;
    }
    Ok(g)
}

/// Spectrum of the effective fixed-node Hamiltonian Lambda*I - G^fn.
pub fn fixed_node_spectrum(
    h: &DMatrix<f64>,
    lambda: f64,
    gamma: f64,
    k: usize,
) -> Result<SpectrumResult> {
    let g = dense_fixed_node_green(h, lambda, gamma)?;
    let n = h.nrows();
    let eff = CMatrix::from_fn(n, n, |r, c| {
        Complex64::new(if r == c { lambda } else { 0.0 } - g[(r, c)], 0.0)
    });
    exact_spectrum_dense(&eff, k)
}

/// Deterministic mixed estimator (phi_T' O G^k phi)/(phi_T' G^k phi) by
/// dense power iteration; `obs = None` propagates H itself as O.
pub fn dense_mixed_energy(
    h: &DMatrix<f64>,
    g: &DMatrix<f64>,
    trial: &[f64],
    initial: &[f64],
    k: usize,
) -> f64 {
    let n = h.nrows();
    let mut v = DMatrix::<f64>::from_column_slice(n, 1, initial);
    for _ in 0..k {
        v = g * v;
        let norm = v.norm();
        if norm > 0.0 {
            v /= norm;
        }
    }
    let t = DMatrix::<f64>::from_column_slice(n, 1, trial);
    let hv = h * &v;
    let num: f64 = t.iter().zip(hv.iter()).map(|(a, b)| a * b).sum();
    let den: f64 = t.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    num / den
}

/// Generalized eigenproblem Hs c = E S c by the Cholesky route: S = L L†,
/// then the standard problem for L^-1 Hs L^-†. Fails on non-SPD S.
pub fn generalized_eig_cholesky(hs: &CMatrix, s: &CMatrix) -> Result<Vec<(f64, CVector)>> {
    let chol = s
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("overlap matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("Cholesky factor is singular".into()))?;
    let reduced = &linv * hs * linv.adjoint();
    let (vals, vecs) = hermitian_eigen(&reduced)?;
    let mut out = Vec::with_capacity(vals.len());
    for (idx, &e) in vals.iter().enumerate() {
        let y = vecs.column(idx).into_owned();
        let c = linv.adjoint() * y;
        out.push((e, c));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_spectrum() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(3.0, 0.0),
            c(1.0, 0.0),
            c(2.0, 0.0),
        ]));
        let s = exact_spectrum_dense(&h, 3).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = c(-1.0, 0.0);
        h[(1, 0)] = c(-1.0, 0.0);
        let s = exact_spectrum_dense(&h, 2).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_residuals_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let n = 12;
        let mut h = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = c(rng.gen_range(-1.0..1.0), if i == j { 0.0 } else { rng.gen_range(-1.0..1.0) });
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        let s = exact_spectrum_dense(&h, n).unwrap();
        let vecs = s.eigenvectors.as_ref().unwrap();
        for (k, &e) in s.eigenvalues.iter().enumerate() {
            let v = vecs.column(k);
            let r = &h * v - v * c(e, 0.0);
            assert!(r.norm() < 1e-9, "residual {} for eigenvalue {e}", r.norm());
        }
    }

    #[test]
    fn expm_matches_spectral_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 6;
        let mut h = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = c(rng.gen_range(-1.0..1.0), if i == j { 0.0 } else { rng.gen_range(-1.0..1.0) });
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        let t = 0.9;
        let u1 = expm(&h.map(|x| x * c(0.0, -t)));
        let u2 = crate::linalg::evolution_operator(&h, t).unwrap();
        assert!((u1 - u2).norm() < 1e-10);
    }

    #[test]
    fn evolution_trivial_cases() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        let v = StateVector::basis_state(1, 0);
        let out = exact_evolution(&h, &v, 0.0).unwrap();
        assert_eq!(out.amplitudes(), v.amplitudes());
        // H = Z, |0> picks up e^{-it}
        let t = 0.37;
        let out = exact_evolution(&h, &v, t).unwrap();
        assert!((out.amplitudes()[0] - c(t.cos(), -t.sin())).norm() < 1e-12);
    }

    #[test]
    fn sign_problem_free_fixed_node_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 8;
        let mut h = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = if i == j {
                    rng.gen_range(-1.0..1.0)
                } else {
                    -rng.gen_range(0.0..1.0)
                };
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let lambda = 10.0;
        let g = dense_fixed_node_green(&h, lambda, 0.0).unwrap();
        for i in 0..n {
            for j in 0..n {
                let eff = if i == j { lambda } else { 0.0 } - g[(i, j)];
                assert!((eff - h[(i, j)]).abs() < 1e-12);
            }
        }
        let fns = fixed_node_spectrum(&h, lambda, 0.0, 1).unwrap();
        let hc = CMatrix::from_fn(n, n, |r, c_| c(h[(r, c_)], 0.0));
        let ex = exact_spectrum_dense(&hc, 1).unwrap();
        assert!((fns.eigenvalues[0] - ex.eigenvalues[0]).abs() < 1e-10);
    }

    #[test]
    fn two_level_fixed_node_examples() {
        let h = DMatrix::<f64>::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let g = dense_fixed_node_green(&h, 2.0, 0.0).unwrap();
        assert_eq!(g, DMatrix::<f64>::identity(2, 2));
        let g = dense_fixed_node_green(&h, 2.0, 1.0).unwrap();
        assert_eq!(g, DMatrix::<f64>::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn cholesky_generalized_eig() {
        // Known 2x2: Hs = diag(2,5), S = I
        let hs = CMatrix::from_diagonal(&CVector::from_vec(vec![c(2.0, 0.0), c(5.0, 0.0)]));
        let s = CMatrix::identity(2, 2);
        let sol = generalized_eig_cholesky(&hs, &s).unwrap();
        assert!((sol[0].0 - 2.0).abs() < 1e-12);
        assert!((sol[1].0 - 5.0).abs() < 1e-12);
        // residual check on a random SPD pencil
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let n = 4;
        let a = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let s = &a * a.adjoint() + CMatrix::identity(n, n) * c(0.5, 0.0);
        let b = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let hs = (&b + b.adjoint()) * c(0.5, 0.0);
        for (e, v) in generalized_eig_cholesky(&hs, &s).unwrap() {
            let r = &hs * &v - &s * &v * c(e, 0.0);
            assert!(r.norm() < 1e-10, "pencil residual {}", r.norm());
        }
    }

    #[test]
    fn lanczos_matches_dense_on_small_problem() {
        use crate::shell_model::SparseHamiltonian;
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let n = 40;
        let mut triplets = Vec::new();
        for i in 0..n {
            triplets.push((i, i, rng.gen_range(-2.0..2.0)));
            for j in (i + 1)..n {
                if rng.gen_bool(0.15) {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    triplets.push((i, j, v));
                    triplets.push((j, i, v));
                }
            }
        }
        let h = SparseHamiltonian::from_triplets(n, triplets);
        let dense = exact_spectrum_dense(&h.to_dense_complex(), 3).unwrap();
        let lcz = lanczos_lowest(&h, 3).unwrap();
        for (a, b) in dense.eigenvalues.iter().zip(&lcz.eigenvalues) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}
