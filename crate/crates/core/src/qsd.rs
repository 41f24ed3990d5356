//! Quantum subspace diagonalization on a real-time Krylov basis.
//!
//! A run evolves an initial state |phi> to psi_i = e^{-iH t_i}|phi> with
//! t_i = i dt for i = 1..n, fills the subspace matrices H^s_ij =
//! <psi_i|H|psi_j> and S_ij = <psi_i|psi_j> either exactly or from the
//! shadow protocol, and solves the regularized generalized eigenvalue
//! problem H^s c = E S c for trial-state coefficients. Excited states
//! repeat the procedure with the previously found states projected out of
//! the basis (Gram-level filtering, no operator materialization needed).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{evolution_operator, hermitian_eigen, CMatrix, CVector};
use crate::pauli::{encode_occupation, map_fermion_operator, FermionMonomial, MappingScheme, PauliOperator};
use crate::shadows::{
    collect_pair_snapshots, estimate_offdiagonal, variance_bound, Ensemble, ShadowEstimate,
};
use crate::simulator::{evolve, StateVector, TrotterPlan};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialStatePrep {
    /// Fill the lowest single-particle energies at the sector's particle
    /// number.
    HartreeFock,
    /// e^{a_i a†_j - a_j a†_i} applied to the Hartree-Fock state.
    ExcitationOnHF { i: usize, j: usize },
    /// Explicit amplitudes over the full qubit register.
    Explicit(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceSpec {
    pub n: usize,
    pub dt: f64,
    pub prep: InitialStatePrep,
}

impl SubspaceSpec {
    pub fn new(n: usize, dt: f64, prep: InitialStatePrep) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("subspace dimension must be >= 1".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        Ok(SubspaceSpec { n, dt, prep })
    }
}

/// How Krylov states are generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvolutionBackend {
    /// Dense matrix exponential (n <= 12).
    Exact,
    /// First-order Trotter product with the given step.
    Trotter { dt: f64 },
}

/// How subspace matrix elements are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixMode {
    Exact,
    Shadow {
        n_shots: usize,
        ensemble: Ensemble,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Exact,
    Shadow { n_shots: usize },
}

#[derive(Debug, Clone)]
pub struct SubspaceMatrices {
    pub hs: CMatrix,
    pub s: CMatrix,
    pub provenance: Provenance,
    /// Standard error of one off-diagonal overlap entry, 0 in exact mode.
    pub entry_noise: f64,
}

/// A solved trial state: coefficients over an explicit list of register
/// states (the Krylov states of this and, for excited runs, earlier runs).
#[derive(Debug, Clone)]
pub struct TrialStateDescription {
    pub energy: f64,
    pub coefficients: Vec<Complex64>,
    pub basis: Vec<StateVector>,
    pub state: StateVector,
    pub spec: SubspaceSpec,
    /// Shadow sets for every (row, col) pair of `basis`, kept so the trial
    /// density matrix can be rebuilt from measurements alone.
    pub pair_estimates: Option<Vec<ShadowEstimate>>,
}

impl TrialStateDescription {
    /// rho_T as a dense matrix. With shadow estimates present this is the
    /// measured reconstruction sum_ab c_a c_b^* rho-hat_ab (Hermitized);
    /// otherwise the exact pure projector.
    pub fn density_matrix(&self) -> Result<CMatrix> {
        let n = self.state.n_qubits();
        let dim = 1usize << n;
        match &self.pair_estimates {
            None => {
                let mut m = CMatrix::zeros(dim, dim);
                for r in 0..dim {
                    for c in 0..dim {
                        m[(r, c)] =
                            self.state.amplitudes()[r] * self.state.amplitudes()[c].conj();
                    }
                }
                Ok(m)
            }
            Some(ests) => {
                let k = self.basis.len();
                let mut m = CMatrix::zeros(dim, dim);
                // Diagonal dyads are exact, mirroring the S_ii = 1 and
                // H_ii conventions of the subspace matrices.
                for (i, b) in self.basis.iter().enumerate() {
                    let w = self.coefficients[i].norm_sqr();
                    for r in 0..dim {
                        for c in 0..dim {
                            m[(r, c)] += b.amplitudes()[r]
                                * b.amplitudes()[c].conj()
                                * Complex64::new(w, 0.0);
                        }
                    }
                }
                for est in ests {
                    // E[rho-hat for pair (i,j)] = |psi_j><psi_i|
                    let (i, j) = (est.i, est.j);
                    debug_assert!(i < k && j < k);
                    let mut real = CMatrix::zeros(dim, dim);
                    let mut imag = CMatrix::zeros(dim, dim);
                    let mut n_real = 0usize;
                    for snap in est.snapshots() {
                        let inv = crate::shadows::inverse_channel(snap)?;
                        let signed = inv * Complex64::new(snap.sign as f64, 0.0);
                        match snap.part {
                            crate::shadows::Part::Real => {
                                real += signed;
                                n_real += 1;
                            }
                            crate::shadows::Part::Imag => imag += signed,
                        }
                    }
                    let shots = n_real as f64;
                    let rho_ij = real / Complex64::new(shots, 0.0)
                        + imag * Complex64::new(0.0, 1.0 / shots);
                    // (j, i) dyad plus its Hermitian transpose (the (i, j)
                    // dyad) from the same snapshot set.
                    let w = self.coefficients[j] * self.coefficients[i].conj();
                    m += &rho_ij * w;
                    m += rho_ij.adjoint() * w.conj();
                }
                let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
                Ok(herm)
            }
        }
    }
}

/// Hartree-Fock occupation mask: the `n_particles` lowest single-particle
/// energies, ties broken by mode index.
pub fn hartree_fock_mask(n_modes: usize, n_particles: usize, spe: &[f64]) -> Result<u64> {
    if spe.len() != n_modes {
        return Err(Error::DimensionMismatch(format!(
            "{} single-particle energies for {n_modes} modes",
            spe.len()
        )));
    }
    if n_particles > n_modes {
        return Err(Error::InvalidArgument(format!(
            "{n_particles} particles in {n_modes} modes"
        )));
    }
    let mut order: Vec<usize> = (0..n_modes).collect();
    order.sort_by(|&a, &b| spe[a].partial_cmp(&spe[b]).unwrap().then(a.cmp(&b)));
    Ok(order[..n_particles].iter().fold(0u64, |m, &p| m | 1 << p))
}

fn encoded_basis_state(n_modes: usize, mask: u64, scheme: MappingScheme) -> StateVector {
    let bits = encode_occupation(n_modes, mask, scheme);
    let mut index = 0u64;
    for q in 0..n_modes {
        if bits >> q & 1 == 1 {
            index |= 1 << (n_modes - 1 - q);
        }
    }
    StateVector::basis_state(n_modes, index)
}

/// Builds |phi> on the qubit register.
pub fn prepare_initial_state(
    prep: &InitialStatePrep,
    n_modes: usize,
    n_particles: usize,
    spe: &[f64],
    scheme: MappingScheme,
) -> Result<StateVector> {
    match prep {
        InitialStatePrep::Explicit(amps) => {
            let v: Vec<Complex64> = amps.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
            let mut state = StateVector::from_amplitudes(n_modes, v)?;
            state.normalize();
            Ok(state)
        }
        InitialStatePrep::HartreeFock => {
            let mask = hartree_fock_mask(n_modes, n_particles, spe)?;
            Ok(encoded_basis_state(n_modes, mask, scheme))
        }
        InitialStatePrep::ExcitationOnHF { i, j } => {
            if *i >= n_modes || *j >= n_modes {
                return Err(Error::InvalidArgument(format!(
                    "excitation modes ({i}, {j}) out of range for {n_modes} modes"
                )));
            }
            let mut state = prepare_initial_state(
                &InitialStatePrep::HartreeFock,
                n_modes,
                n_particles,
                spe,
                scheme,
            )?;
            if i != j {
                // U1 = e^{a_i a†_j - a_j a†_i}, exponentiated exactly: the
                // generator A is anti-Hermitian, so e^A = e^{-i (iA)}.
                let monos = vec![
                    FermionMonomial::new(vec![(*i, false), (*j, true)], Complex64::new(1.0, 0.0)),
                    FermionMonomial::new(vec![(*j, false), (*i, true)], Complex64::new(-1.0, 0.0)),
                ];
                let a = map_fermion_operator(n_modes, &monos, scheme)?;
                let mut ia = a.clone();
                ia.scale(Complex64::new(0.0, 1.0));
                let u = evolution_operator(&ia.to_dense(), 1.0)?;
                state.apply_unitary(&u)?;
            }
            Ok(state)
        }
    }
}

/// psi_i = e^{-iH t_i}|phi>, t_i = i dt for i = 1..n.
pub fn krylov_basis(
    h: &PauliOperator,
    phi: &StateVector,
    spec: &SubspaceSpec,
    backend: &EvolutionBackend,
) -> Result<Vec<StateVector>> {
    let mut out = Vec::with_capacity(spec.n);
    match backend {
        EvolutionBackend::Exact => {
            let u = evolution_operator(&h.to_dense(), spec.dt)?;
            let mut cur = phi.clone();
            for _ in 0..spec.n {
                cur.apply_unitary(&u)?;
                out.push(cur.clone());
            }
        }
        EvolutionBackend::Trotter { dt } => {
            let plan = TrotterPlan::new(h, *dt)?;
            let mut cur = phi.clone();
            for _ in 0..spec.n {
                cur = evolve(&plan, &cur, spec.dt)?;
                out.push(cur.clone());
            }
        }
    }
    Ok(out)
}

fn mix_seed(seed: u64, i: usize, j: usize) -> u64 {
    let mut x = seed
        ^ (i as u64).wrapping_mul(0x9E3779B97F4A7C15)
        ^ (j as u64).wrapping_mul(0xC2B2AE3D27D4EB4F);
    x ^= x >> 31;
    x = x.wrapping_mul(0xFF51AFD7ED558CCD);
    x ^= x >> 33;
    x
}

/// Overlap and Hamiltonian Gram matrices over an explicit state list. In
/// shadow mode each off-diagonal pair gets its own snapshot set (reused for
/// both observables); diagonals are exact per the conserved-quantity
/// argument.
fn gram_matrices(
    h: &PauliOperator,
    states: &[StateVector],
    mode: &MatrixMode,
) -> Result<(CMatrix, CMatrix, Vec<ShadowEstimate>)> {
    let k = states.len();
    let mut s = CMatrix::identity(k, k);
    let mut hs = CMatrix::zeros(k, k);
    let mut estimates = Vec::new();
    for i in 0..k {
        hs[(i, i)] = states[i].expectation(h)?;
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let (sij, hij, est) = match *mode {
                MatrixMode::Exact => {
                    let sij = states[i].inner(&states[j]);
                    let hij = states[i].apply_operator(h)?.inner(&states[j]);
                    (sij, hij, None)
                }
                MatrixMode::Shadow {
                    n_shots,
                    ensemble,
                    seed,
                } => {
                    let snaps = collect_pair_snapshots(
                        &states[i],
                        &states[j],
                        ensemble,
                        n_shots,
                        mix_seed(seed, i, j),
                    )?;
                    let est = ShadowEstimate::new(i, j, snaps)?;
                    let sij = estimate_offdiagonal(&est, None)?;
                    let hij = estimate_offdiagonal(&est, Some(h))?;
                    (sij, hij, Some(est))
                }
            };
            s[(i, j)] = sij;
            s[(j, i)] = sij.conj();
            hs[(i, j)] = hij;
            hs[(j, i)] = hij.conj();
            if let Some(e) = est {
                estimates.push(e);
            }
        }
    }
    Ok((s, hs, estimates))
}

/// Fills H^s and S for a single run per the spec'd conventions: the H^s
/// diagonal is the conserved <phi|H|phi> and the S diagonal is exactly 1.
pub fn build_subspace_matrices(
    h: &PauliOperator,
    phi: &StateVector,
    spec: &SubspaceSpec,
    mode: &MatrixMode,
    backend: &EvolutionBackend,
) -> Result<SubspaceMatrices> {
    let basis = krylov_basis(h, phi, spec, backend)?;
    let (s, hs, _) = gram_matrices(h, &basis, mode)?;
    let (provenance, entry_noise) = match *mode {
        MatrixMode::Exact => (Provenance::Exact, 0.0),
        MatrixMode::Shadow {
            n_shots, ensemble, ..
        } => (
            Provenance::Shadow { n_shots },
            variance_bound(None, phi.n_qubits(), ensemble, n_shots).sqrt(),
        ),
    };
    Ok(SubspaceMatrices {
        hs,
        s,
        provenance,
        entry_noise,
    })
}

/// Default relative eigenvalue cutoff for S: tight in exact mode, inflated
/// to three estimated noise standard deviations in shadow mode.
pub fn default_threshold(mats: &SubspaceMatrices) -> f64 {
    match mats.provenance {
        Provenance::Exact => 1e-12,
        Provenance::Shadow { .. } => (3.0 * mats.entry_noise).max(1e-6),
    }
}

fn solve_pencil(hs: &CMatrix, s: &CMatrix, threshold: f64) -> Result<Vec<(f64, CVector)>> {
    let k = s.nrows();
    let s_h = (s + s.adjoint()) * Complex64::new(0.5, 0.0);
    let hs_h = (hs + hs.adjoint()) * Complex64::new(0.5, 0.0);
    let (svals, svecs) = hermitian_eigen(&s_h)?;
    let lambda_max = svals.last().copied().unwrap_or(0.0);
    if lambda_max <= 0.0 {
        return Err(Error::Numerical(
            "overlap matrix has no positive eigenvalues".into(),
        ));
    }
    let retained: Vec<usize> = (0..k)
        .filter(|&i| svals[i] >= threshold * lambda_max)
        .collect();
    if retained.is_empty() {
        return Err(Error::Numerical(format!(
            "threshold {threshold} discards the whole overlap spectrum"
        )));
    }
    // Whitening: the retained columns scaled by 1/sqrt(lambda) map the
    // pencil onto an ordinary Hermitian eigenproblem.
    let mut w = CMatrix::zeros(k, retained.len());
    for (col, &i) in retained.iter().enumerate() {
        let scale = Complex64::new(1.0 / svals[i].sqrt(), 0.0);
        for r in 0..k {
            w[(r, col)] = svecs[(r, i)] * scale;
        }
    }
    // The exact whitened matrix is Hermitian; the products above amplify
    // rounding noise by 1/sqrt(lambda) in near-threshold directions, so
    // symmetrize before factorizing.
    let reduced = w.adjoint() * &hs_h * &w;
    let reduced = (&reduced + reduced.adjoint()) * Complex64::new(0.5, 0.0);
    let (evals, evecs) = hermitian_eigen(&reduced)?;
    let mut out = Vec::with_capacity(evals.len());
    for (idx, &e) in evals.iter().enumerate() {
        let c = &w * evecs.column(idx);
        out.push((e, c));
    }
    Ok(out)
}

/// Energies ascending with coefficient vectors normalized c†Sc = 1, after
/// discarding S eigendirections below `threshold` * lambda_max(S).
pub fn solve_generalized_eig(
    mats: &SubspaceMatrices,
    threshold: f64,
) -> Result<Vec<(f64, CVector)>> {
    solve_pencil(&mats.hs, &mats.s, threshold)
}

fn assemble_state(basis: &[StateVector], coeffs: &CVector) -> StateVector {
    let n = basis[0].n_qubits();
    let dim = 1usize << n;
    let mut amps = vec![Complex64::default(); dim];
    for (b, &c) in basis.iter().zip(coeffs.iter()) {
        for (a, &v) in amps.iter_mut().zip(b.amplitudes()) {
            *a += c * v;
        }
    }
    let mut state = StateVector::from_amplitudes(n, amps).unwrap();
    state.normalize();
    state
}

/// Solves the lowest state in the run's subspace with previously found
/// trial states projected out at the Gram level: the filtered basis is
/// conceptually (I - rho_m)...(I - rho_1)|psi_i>, realized as coordinate
/// operations on the joint Gram matrices.
fn filtered_solution(
    h: &PauliOperator,
    states: &[StateVector],
    cur_start: usize,
    prev: &[Vec<Complex64>],
    mode: &MatrixMode,
    threshold: Option<f64>,
) -> Result<(f64, CVector, Vec<ShadowEstimate>, f64)> {
    let k = states.len();
    let n_cur = k - cur_start;
    let (s_j, h_j, estimates) = gram_matrices(h, states, mode)?;
    // Coordinate columns of the filtered basis states.
    let mut x = CMatrix::zeros(k, n_cur);
    for col in 0..n_cur {
        x[(cur_start + col, col)] = Complex64::new(1.0, 0.0);
    }
    for coeffs in prev {
        let mut y = CVector::zeros(k);
        for (r, &c) in coeffs.iter().enumerate() {
            y[r] = c;
        }
        let sy = &s_j * &y;
        let norm_sq = (y.adjoint() * &sy)[(0, 0)].re;
        if norm_sq <= 0.0 {
            return Err(Error::Numerical(
                "previous trial state has nonpositive norm under the joint Gram matrix".into(),
            ));
        }
        // P = I - |g><g| in coordinates: X <- X - y (y† S X) / <g|g>
        let overlaps = sy.adjoint() * &x; // 1 x n_cur
        for col in 0..n_cur {
            let f = overlaps[(0, col)] / Complex64::new(norm_sq, 0.0);
            for r in 0..k {
                x[(r, col)] -= y[r] * f;
            }
        }
    }
    let s_f = x.adjoint() * &s_j * &x;
    let h_f = x.adjoint() * &h_j * &x;
    let entry_noise = match *mode {
        MatrixMode::Exact => 0.0,
        MatrixMode::Shadow {
            n_shots, ensemble, ..
        } => variance_bound(None, states[0].n_qubits(), ensemble, n_shots).sqrt(),
    };
    let thr = threshold.unwrap_or(match mode {
        MatrixMode::Exact => 1e-12,
        MatrixMode::Shadow { .. } => (3.0 * entry_noise).max(1e-6),
    });
    let solutions = solve_pencil(&h_f, &s_f, thr)?;
    let (energy, c_f) = solutions
        .into_iter()
        .next()
        .ok_or_else(|| Error::Numerical("empty filtered subspace".into()))?;
    let coords = &x * c_f;
    Ok((energy, coords, estimates, entry_noise))
}

/// Lowest-energy trial state of a single run.
pub fn ground_trial(
    h: &PauliOperator,
    phi: &StateVector,
    spec: &SubspaceSpec,
    mode: &MatrixMode,
    backend: &EvolutionBackend,
    threshold: Option<f64>,
) -> Result<TrialStateDescription> {
    let basis = krylov_basis(h, phi, spec, backend)?;
    let (energy, coords, estimates, _) =
        filtered_solution(h, &basis, 0, &[], mode, threshold)?;
    let state = assemble_state(&basis, &coords);
    Ok(TrialStateDescription {
        energy,
        coefficients: coords.iter().copied().collect(),
        basis,
        state,
        spec: spec.clone(),
        pair_estimates: if matches!(mode, MatrixMode::Shadow { .. }) {
            Some(estimates)
        } else {
            None
        },
    })
}

/// Lowest state of the excited run with all `previous` trial states
/// filtered out.
pub fn excited_trial(
    h: &PauliOperator,
    phi_e: &StateVector,
    spec: &SubspaceSpec,
    mode: &MatrixMode,
    backend: &EvolutionBackend,
    threshold: Option<f64>,
    previous: &[TrialStateDescription],
) -> Result<TrialStateDescription> {
    // Joint state list: every state referenced by earlier runs, then this
    // run's Krylov basis. Earlier runs in a chain share their own basis
    // prefixes, so reuse the longest list.
    let mut states: Vec<StateVector> = Vec::new();
    let mut prev_coords: Vec<Vec<Complex64>> = Vec::new();
    for t in previous {
        if t.basis.len() > states.len() {
            // Chain invariant: each trial's basis extends the previous
            // one's. Verify the prefix matches rather than trusting it.
            for (a, b) in states.iter().zip(&t.basis) {
                if a.amplitudes() != b.amplitudes() {
                    return Err(Error::InvalidArgument(
                        "previous trial states must come from the same chain".into(),
                    ));
                }
            }
            states = t.basis.clone();
        }
        prev_coords.push(t.coefficients.clone());
    }
    let cur_start = states.len();
    let cur_basis = krylov_basis(h, phi_e, spec, backend)?;
    states.extend(cur_basis);
    // Pad earlier coefficient vectors to the joint length.
    for c in &mut prev_coords {
        c.resize(states.len(), Complex64::default());
    }
    let (energy, coords, estimates, _) =
        filtered_solution(h, &states, cur_start, &prev_coords, mode, threshold)?;
    let state = assemble_state(&states, &coords);
    Ok(TrialStateDescription {
        energy,
        coefficients: coords.iter().copied().collect(),
        basis: states,
        state,
        spec: spec.clone(),
        pair_estimates: if matches!(mode, MatrixMode::Shadow { .. }) {
            Some(estimates)
        } else {
            None
        },
    })
}

/// Sequentially solves ground + excited levels, filtering every previously
/// found state.
pub fn excited_chain(
    h: &PauliOperator,
    runs: &[(StateVector, SubspaceSpec)],
    mode: &MatrixMode,
    backend: &EvolutionBackend,
    threshold: Option<f64>,
) -> Result<Vec<TrialStateDescription>> {
    let mut trials: Vec<TrialStateDescription> = Vec::new();
    for (phi, spec) in runs {
        let t = if trials.is_empty() {
            ground_trial(h, phi, spec, mode, backend, threshold)?
        } else {
            excited_trial(h, phi, spec, mode, backend, threshold, &trials)?
        };
        trials.push(t);
    }
    Ok(trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::pauli::{Pauli, PauliString};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
        let amps: Vec<Complex64> = (0..1usize << n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut v = StateVector::from_amplitudes(n, amps).unwrap();
        v.normalize();
        v
    }

    fn random_hermitian_op(n: usize, n_terms: usize, rng: &mut impl Rng) -> PauliOperator {
        let mut op = PauliOperator::zero(n);
        for _ in 0..n_terms {
            let letters: Vec<Pauli> = (0..n)
                .map(|_| match rng.gen_range(0..4) {
                    0 => Pauli::I,
                    1 => Pauli::X,
                    2 => Pauli::Y,
                    _ => Pauli::Z,
                })
                .collect();
            op.add_term(
                PauliString::from_letters(letters),
                c(rng.gen_range(-1.0..1.0), 0.0),
            );
        }
        op
    }

    fn spec(n: usize, dt: f64) -> SubspaceSpec {
        SubspaceSpec::new(n, dt, InitialStatePrep::HartreeFock).unwrap()
    }

    #[test]
    fn one_dimensional_subspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let h = random_hermitian_op(2, 3, &mut rng);
        let phi = random_state(2, &mut rng);
        let mats = build_subspace_matrices(
            &h,
            &phi,
            &spec(1, 0.3),
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
        )
        .unwrap();
        assert_eq!(mats.s[(0, 0)], c(1.0, 0.0));
        let expect = phi.expectation(&h).unwrap();
        assert!((mats.hs[(0, 0)] - expect).norm() < 1e-12);
        let sols = solve_generalized_eig(&mats, 1e-10).unwrap();
        assert!((sols[0].0 - expect.re).abs() < 1e-12);
    }

    #[test]
    fn eigenstate_gives_proportional_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let h = random_hermitian_op(3, 4, &mut rng);
        let spect = oracle::exact_spectrum_operator(&h, 1).unwrap();
        let e0 = spect.eigenvalues[0];
        let v = spect.eigenvectors.unwrap().column(0).into_owned();
        let phi = StateVector::from_amplitudes(3, v.iter().copied().collect()).unwrap();
        let mats = build_subspace_matrices(
            &h,
            &phi,
            &spec(3, 0.4),
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
        )
        .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (mats.hs[(i, j)] - mats.s[(i, j)] * c(e0, 0.0)).norm() < 1e-9,
                    "entry ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn exact_entries_match_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let h = random_hermitian_op(3, 5, &mut rng);
        let phi = random_state(3, &mut rng);
        let dt = 0.35;
        let mats = build_subspace_matrices(
            &h,
            &phi,
            &spec(4, dt),
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
        )
        .unwrap();
        let hd = h.to_dense();
        for i in 0..4 {
            for j in 0..4 {
                let ti = (i + 1) as f64 * dt;
                let tj = (j + 1) as f64 * dt;
                // <phi| e^{iH t_i} H e^{-iH t_j} |phi>
                let psi_i = oracle::exact_evolution(&hd, &phi, ti).unwrap();
                let psi_j = oracle::exact_evolution(&hd, &phi, tj).unwrap();
                let hs_oracle = psi_i.apply_operator(&h).unwrap().inner(&psi_j);
                let s_oracle = psi_i.inner(&psi_j);
                assert!((mats.hs[(i, j)] - hs_oracle).norm() < 1e-9);
                if i != j {
                    assert!((mats.s[(i, j)] - s_oracle).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn generalized_eig_trivial_and_oracle() {
        // S = I, Hs = diag(2, 5)
        let mats = SubspaceMatrices {
            hs: CMatrix::from_diagonal(&CVector::from_vec(vec![c(2.0, 0.0), c(5.0, 0.0)])),
            s: CMatrix::identity(2, 2),
            provenance: Provenance::Exact,
            entry_noise: 0.0,
        };
        let sols = solve_generalized_eig(&mats, 1e-10).unwrap();
        assert!((sols[0].0 - 2.0).abs() < 1e-12);
        assert!((sols[1].0 - 5.0).abs() < 1e-12);
        assert!((sols[0].1[0].norm() - 1.0).abs() < 1e-12);

        // Random 4x4 pencil vs the Cholesky oracle.
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let n = 4;
        let a = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let s = &a * a.adjoint() + CMatrix::identity(n, n) * c(0.3, 0.0);
        let b = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let hs = (&b + b.adjoint()) * c(0.5, 0.0);
        let mats = SubspaceMatrices {
            hs: hs.clone(),
            s: s.clone(),
            provenance: Provenance::Exact,
            entry_noise: 0.0,
        };
        let mine = solve_generalized_eig(&mats, 1e-12).unwrap();
        let reference = oracle::generalized_eig_cholesky(&hs, &s).unwrap();
        for (m, r) in mine.iter().zip(&reference) {
            assert!((m.0 - r.0).abs() < 1e-10, "{} vs {}", m.0, r.0);
            // normalization c†Sc = 1
            let nrm = (m.1.adjoint() * &s * &m.1)[(0, 0)].re;
            assert!((nrm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn two_state_krylov_is_complete() {
        // H = -Z, phi = |+>: span{e^{-iHt}phi, e^{-2iHt}phi} is the whole
        // space, so the subspace ground energy is exactly -1.
        let mut h = PauliOperator::zero(1);
        h.add_term(PauliString::single(1, 0, Pauli::Z), c(-1.0, 0.0));
        let mut phi = StateVector::basis_state(1, 0);
        phi.apply_gate(crate::simulator::CliffordGate::H(0));
        let t = ground_trial(
            &h,
            &phi,
            &spec(2, 0.7),
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
            None,
        )
        .unwrap();
        assert!((t.energy + 1.0).abs() < 1e-10, "energy {}", t.energy);
    }

    #[test]
    fn ground_state_input_is_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let h = random_hermitian_op(2, 3, &mut rng);
        let spect = oracle::exact_spectrum_operator(&h, 1).unwrap();
        let v = spect.eigenvectors.unwrap().column(0).into_owned();
        let phi = StateVector::from_amplitudes(2, v.iter().copied().collect()).unwrap();
        let t = ground_trial(
            &h,
            &phi,
            &spec(1, 0.5),
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
            None,
        )
        .unwrap();
        assert!((t.energy - spect.eigenvalues[0]).abs() < 1e-9);
    }

    #[test]
    fn variational_and_monotonic_in_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..5 {
            let h = random_hermitian_op(3, 6, &mut rng);
            let phi = random_state(3, &mut rng);
            let evals = oracle::exact_spectrum_operator(&h, 8).unwrap().eigenvalues;
            let e0 = evals[0];
            // dt spreading the eigenphases over most of the unit circle
            // keeps the Vandermonde-structured overlap matrix invertible
            // out to full Krylov rank.
            let range = evals[7] - evals[0];
            let dt = 1.7 * std::f64::consts::PI / range;
            let mut last = f64::INFINITY;
            for n in 1..=8 {
                let t = ground_trial(
                    &h,
                    &phi,
                    &spec(n, dt),
                    &MatrixMode::Exact,
                    &EvolutionBackend::Exact,
                    None,
                )
                .unwrap();
                assert!(t.energy >= e0 - 1e-10, "variational bound broken");
                assert!(t.energy <= last + 1e-9, "not monotone at n={n}");
                last = t.energy;
            }
            // dim-8 space: 8 Krylov vectors reach full rank generically
            assert!((last - e0).abs() < 1e-8, "missed ground energy: {last} vs {e0}");
        }
    }

    #[test]
    fn shadow_mode_tracks_exact_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let h = random_hermitian_op(2, 3, &mut rng);
        let phi = random_state(2, &mut rng);
        // well-spread eigenphases keep S well conditioned, so the noise
        // threshold discards nothing and no truncation bias enters
        let evals = oracle::exact_spectrum_operator(&h, 4).unwrap().eigenvalues;
        let dt = 1.7 * std::f64::consts::PI / (evals[3] - evals[0]);
        let sp = spec(3, dt);
        let exact = ground_trial(
            &h,
            &phi,
            &sp,
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
            None,
        )
        .unwrap();
        let n_shots = 100_000;
        let shadow = ground_trial(
            &h,
            &phi,
            &sp,
            &MatrixMode::Shadow {
                n_shots,
                ensemble: Ensemble::Local,
                seed: 11,
            },
            &EvolutionBackend::Exact,
            None,
        )
        .unwrap();
        let sigma = variance_bound(Some(&h), 2, Ensemble::Local, n_shots).sqrt();
        assert!(
            (shadow.energy - exact.energy).abs() < 8.0 * sigma,
            "shadow {} vs exact {} (sigma {sigma})",
            shadow.energy,
            exact.energy
        );
    }

    #[test]
    fn excitation_prep_examples() {
        // 2 modes, 1 particle, eps0 < eps1 -> mode 0 occupied
        let hf = prepare_initial_state(
            &InitialStatePrep::HartreeFock,
            2,
            1,
            &[0.0, 1.0],
            MappingScheme::JordanWigner,
        )
        .unwrap();
        let expect = StateVector::from_occupation(2, 0b01);
        assert_eq!(hf.amplitudes(), expect.amplitudes());

        // i = j -> identity
        let same = prepare_initial_state(
            &InitialStatePrep::ExcitationOnHF { i: 1, j: 1 },
            2,
            1,
            &[0.0, 1.0],
            MappingScheme::JordanWigner,
        )
        .unwrap();
        assert_eq!(same.amplitudes(), hf.amplitudes());

        // Excitation vs dense exponential oracle.
        let exc = prepare_initial_state(
            &InitialStatePrep::ExcitationOnHF { i: 0, j: 1 },
            2,
            1,
            &[0.0, 1.0],
            MappingScheme::JordanWigner,
        )
        .unwrap();
        let monos = vec![
            FermionMonomial::new(vec![(0, false), (1, true)], c(1.0, 0.0)),
            FermionMonomial::new(vec![(1, false), (0, true)], c(-1.0, 0.0)),
        ];
        let a = map_fermion_operator(2, &monos, MappingScheme::JordanWigner).unwrap();
        let u = oracle::expm(&a.to_dense());
        let mut want = hf.clone();
        want.apply_unitary(&u).unwrap();
        for (x, y) in exc.amplitudes().iter().zip(want.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn hartree_fock_under_bravyi_kitaev() {
        // The encoded HF state must carry the right occupations: check
        // number-operator expectations under the BK mapping.
        let spe = [0.3, 0.1, 0.7, 0.5];
        let hf = prepare_initial_state(
            &InitialStatePrep::HartreeFock,
            4,
            2,
            &spe,
            MappingScheme::BravyiKitaev,
        )
        .unwrap();
        // lowest two energies: modes 1 and 0
        for mode in 0..4 {
            let mono = FermionMonomial::new(vec![(mode, true), (mode, false)], c(1.0, 0.0));
            let num = map_fermion_operator(4, &[mono], MappingScheme::BravyiKitaev).unwrap();
            let occ = hf.expectation(&num).unwrap().re;
            let want = if mode <= 1 { 1.0 } else { 0.0 };
            assert!((occ - want).abs() < 1e-12, "mode {mode}: {occ}");
        }
    }

    #[test]
    fn excited_trial_trivial_cases() {
        // 2-level H = diag(0, 1) as (I - Z)/2 on one qubit.
        let mut h = PauliOperator::zero(1);
        h.add_term(PauliString::identity(1), c(0.5, 0.0));
        h.add_term(PauliString::single(1, 0, Pauli::Z), c(-0.5, 0.0));
        let ground = ground_trial(
            &h,
            &StateVector::basis_state(1, 0),
            &spec(1, 0.5),
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
            None,
        )
        .unwrap();
        assert!(ground.energy.abs() < 1e-10);
        // phi_e = |1> is already orthogonal to the ground state: filter is
        // a no-op and the excited energy is exactly 1.
        let excited = excited_trial(
            &h,
            &StateVector::basis_state(1, 1),
            &spec(1, 0.5),
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
            None,
            &[ground.clone()],
        )
        .unwrap();
        assert!((excited.energy - 1.0).abs() < 1e-9, "E1 = {}", excited.energy);
        // overlap with the ground trial vanishes
        let overlap = ground.state.inner(&excited.state).norm();
        assert!(overlap < 1e-8, "filter left overlap {overlap}");
    }

    #[test]
    fn excited_trial_converges_to_first_excited() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        let h = random_hermitian_op(3, 6, &mut rng);
        let spect = oracle::exact_spectrum_operator(&h, 8).unwrap();
        let (e0, e1) = (spect.eigenvalues[0], spect.eigenvalues[1]);
        let range = spect.eigenvalues[7] - spect.eigenvalues[0];
        let dt = 1.7 * std::f64::consts::PI / range;
        let phi_g = random_state(3, &mut rng);
        let ground = ground_trial(
            &h,
            &phi_g,
            &spec(8, dt),
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
            None,
        )
        .unwrap();
        assert!((ground.energy - e0).abs() < 1e-8);
        let phi_e = random_state(3, &mut rng);
        let mut last = f64::INFINITY;
        for n in [2usize, 4, 8] {
            let t = excited_trial(
                &h,
                &phi_e,
                &spec(n, dt),
                &MatrixMode::Exact,
                &EvolutionBackend::Exact,
                None,
                &[ground.clone()],
            )
            .unwrap();
            assert!(t.energy >= e1 - 1e-8, "below E1: {} vs {e1}", t.energy);
            assert!(t.energy <= last + 1e-9);
            last = t.energy;
        }
        assert!((last - e1).abs() < 1e-6, "excited energy {last} vs {e1}");
    }

    #[test]
    fn gram_filter_matches_dense_projector() {
        // Cross-check the Gram-level filter against materializing
        // P = I - |g><g| on the register.
        let mut rng = ChaCha8Rng::seed_from_u64(58);
        let h = random_hermitian_op(2, 4, &mut rng);
        let phi_g = random_state(2, &mut rng);
        let phi_e = random_state(2, &mut rng);
        let ground = ground_trial(
            &h,
            &phi_g,
            &spec(4, 0.3),
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
            None,
        )
        .unwrap();
        let excited = excited_trial(
            &h,
            &phi_e,
            &spec(3, 0.3),
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
            None,
            &[ground.clone()],
        )
        .unwrap();
        // Dense route: project each excited-run Krylov state, rebuild the
        // 3x3 pencil, and solve with the Cholesky oracle.
        let basis = krylov_basis(&h, &phi_e, &spec(3, 0.3), &EvolutionBackend::Exact).unwrap();
        let g = &ground.state;
        let mut projected = Vec::new();
        for b in &basis {
            let ov = g.inner(b);
            let amps: Vec<Complex64> = b
                .amplitudes()
                .iter()
                .zip(g.amplitudes())
                .map(|(bi, gi)| bi - ov * gi)
                .collect();
            projected.push(StateVector::from_amplitudes(2, amps).unwrap());
        }
        let mut s = CMatrix::zeros(3, 3);
        let mut hs = CMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                s[(i, j)] = projected[i].inner(&projected[j]);
                hs[(i, j)] = projected[i].apply_operator(&h).unwrap().inner(&projected[j]);
            }
        }
        // strip near-null directions the same way before comparing
        let mats = SubspaceMatrices {
            hs,
            s,
            provenance: Provenance::Exact,
            entry_noise: 0.0,
        };
        let dense_low = solve_generalized_eig(&mats, 1e-10).unwrap()[0].0;
        assert!(
            (dense_low - excited.energy).abs() < 1e-8,
            "gram {} vs dense {}",
            excited.energy,
            dense_low
        );
    }

    #[test]
    fn chain_recovers_three_levels() {
        // 3-level diagonal toy on 2 qubits: H = diag(0, 1, 2, 6).
        let mut h = PauliOperator::zero(2);
        // diag(a,b,c,d) = ((a+b+c+d) II + (a+b-c-d) ZI + (a-b+c-d) IZ + (a-b-c+d) ZZ)/4
        let (a, b, cc, d) = (0.0, 1.0, 2.0, 6.0);
        h.add_term(PauliString::identity(2), c((a + b + cc + d) / 4.0, 0.0));
        h.add_term(
            PauliString::from_letters(vec![Pauli::Z, Pauli::I]),
            c((a + b - cc - d) / 4.0, 0.0),
        );
        h.add_term(
            PauliString::from_letters(vec![Pauli::I, Pauli::Z]),
            c((a - b + cc - d) / 4.0, 0.0),
        );
        h.add_term(
            PauliString::from_letters(vec![Pauli::Z, Pauli::Z]),
            c((a - b - cc + d) / 4.0, 0.0),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        // Generic initial states with support on all levels.
        let runs: Vec<(StateVector, SubspaceSpec)> = (0..3)
            .map(|_| (random_state(2, &mut rng), spec(4, 0.45)))
            .collect();
        let trials = excited_chain(
            &h,
            &runs,
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
            None,
        )
        .unwrap();
        let want = [0.0, 1.0, 2.0];
        for (t, w) in trials.iter().zip(want) {
            assert!((t.energy - w).abs() < 1e-8, "level energy {} vs {w}", t.energy);
        }
    }

    #[test]
    fn threshold_stability_under_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let h = random_hermitian_op(3, 5, &mut rng);
        let phi = random_state(3, &mut rng);
        let mats = build_subspace_matrices(
            &h,
            &phi,
            &spec(4, 0.3),
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
        )
        .unwrap();
        let clean = solve_generalized_eig(&mats, 1e-6).unwrap()[0].0;
        let sigma = 1e-8;
        let mut noisy = mats.clone();
        for i in 0..4 {
            for j in 0..4 {
                let dz = c(rng.gen_range(-sigma..sigma), rng.gen_range(-sigma..sigma));
                noisy.hs[(i, j)] += dz;
                noisy.s[(i, j)] += dz * c(0.5, 0.0);
            }
        }
        let perturbed = solve_generalized_eig(&noisy, 1e-6).unwrap()[0].0;
        // retained eigenvalues are >= 1e-6 * lambda_max, so the energy
        // shift is O(sigma / lambda_retained)
        assert!(
            (clean - perturbed).abs() < sigma / 1e-7,
            "unstable: {clean} vs {perturbed}"
        );
    }

    #[test]
    fn trial_density_from_shadows_approximates_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let h = random_hermitian_op(2, 3, &mut rng);
        let phi = random_state(2, &mut rng);
        let evals = oracle::exact_spectrum_operator(&h, 4).unwrap().eigenvalues;
        let dt = 1.7 * std::f64::consts::PI / (evals[3] - evals[0]);
        let sp = spec(2, dt);
        let exact = ground_trial(
            &h,
            &phi,
            &sp,
            &MatrixMode::Exact,
            &EvolutionBackend::Exact,
            None,
        )
        .unwrap();
        let shadow = ground_trial(
            &h,
            &phi,
            &sp,
            &MatrixMode::Shadow {
                n_shots: 60_000,
                ensemble: Ensemble::Local,
                seed: 3,
            },
            &EvolutionBackend::Exact,
            None,
        )
        .unwrap();
        let rho_exact = exact.density_matrix().unwrap();
        let rho_shadow = shadow.density_matrix().unwrap();
        // per-entry snapshot values reach 4^2, so at 6e4 shots the
        // entrywise standard error is a few times 1e-2; allow the
        // Frobenius distance a generous multiple of that
        let dist = (rho_exact - &rho_shadow).norm();
        assert!(dist < 0.35, "density reconstruction too far off: {dist}");
        // trace ~ c†Sc = 1
        let tr: Complex64 = (0..4).map(|k| rho_shadow[(k, k)]).sum();
        assert!((tr.re - 1.0).abs() < 0.05, "trace {tr}");
    }
}
