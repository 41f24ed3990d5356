//! Off-diagonal classical shadows.
//!
//! One round prepares (|0>(x)|b0> + |1>(x)|b1>)/sqrt(2) with an ancilla at
//! qubit 0, applies F on the ancilla (Hadamard for the real part, the phase
//! gate diag(1, -i) then Hadamard for the imaginary part), a random
//! Clifford on the register, and measures everything in the Z basis. The
//! ancilla bit supplies a +-1 sign; averaging sign-weighted inverted
//! snapshots over many rounds yields an unbiased estimate of
//! <b0|O|b1> for any observable O.
//!
//! The circuit form used for subspace matrix elements sets |b0> = |phi>
//! and |b1> = e^{+iH tDiff}|phi> with tDiff = t_i - t_j, so the estimate is
//! <phi|O e^{iH(t_i-t_j)}|phi> = H^s_ij (or S_ij with O = I), using that H
//! commutes with its own evolution.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;
use crate::pauli::{Pauli, PauliOperator};
use crate::simulator::{
    controlled_evolve, random_global_clifford, random_local_clifford, single_qubit_clifford,
    CliffordDescription, CliffordGate, StateVector, TrotterPlan,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    Real,
    Imag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Ensemble {
    /// Independent single-qubit Cliffords; estimator cost scales with Pauli
    /// weight, the default for local Hamiltonians.
    #[default]
    Local,
    /// Uniform n-qubit Cliffords; kept for cross-checks.
    Global,
}

/// One measurement record of the protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub sign: i8,
    pub part: Part,
    pub clifford: CliffordDescription,
    /// Register outcome; qubit k of the register is bit (n-1-k).
    pub outcome: u64,
    pub n_qubits: usize,
}

/// Applies a register-relative Clifford to a state whose register starts at
/// qubit `shift`.
fn apply_clifford_shifted(state: &mut StateVector, c: &CliffordDescription, shift: usize) {
    match c {
        CliffordDescription::LocalProduct(indices) => {
            for (q, &idx) in indices.iter().enumerate() {
                let m = single_qubit_clifford(idx as usize);
                state.apply_single(q + shift, &m);
            }
        }
        CliffordDescription::Global(gates) => {
            for &g in gates {
                let shifted = match g {
                    CliffordGate::H(q) => CliffordGate::H(q + shift),
                    CliffordGate::S(q) => CliffordGate::S(q + shift),
                    CliffordGate::X(q) => CliffordGate::X(q + shift),
                    CliffordGate::Z(q) => CliffordGate::Z(q + shift),
                    CliffordGate::Cx(c, t) => CliffordGate::Cx(c + shift, t + shift),
                };
                state.apply_gate(shifted);
            }
        }
    }
}

fn sample_register_clifford(
    n: usize,
    ensemble: Ensemble,
    rng: &mut impl Rng,
) -> CliffordDescription {
    match ensemble {
        Ensemble::Local => random_local_clifford(n, rng),
        Ensemble::Global => random_global_clifford(n, rng),
    }
}

/// F on the ancilla, random Clifford on the register, Z-measure all.
fn finish_round(
    mut state: StateVector,
    part: Part,
    ensemble: Ensemble,
    rng: &mut impl Rng,
) -> Snapshot {
    let n = state.n_qubits() - 1;
    if part == Part::Imag {
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::default();
        state.apply_single(0, &[[one, z], [z, Complex64::new(0.0, -1.0)]]);
    }
    state.apply_gate(CliffordGate::H(0));
    let clifford = sample_register_clifford(n, ensemble, rng);
    apply_clifford_shifted(&mut state, &clifford, 1);
    let z = state.sample_z(rng);
    let ancilla = z >> n & 1;
    Snapshot {
        sign: if ancilla == 0 { 1 } else { -1 },
        part,
        clifford,
        outcome: z & ((1 << n) - 1),
        n_qubits: n,
    }
}

/// One round of the two-branch protocol on explicit branch states.
pub fn shadow_round_pair(
    b0: &StateVector,
    b1: &StateVector,
    part: Part,
    ensemble: Ensemble,
    rng: &mut impl Rng,
) -> Result<Snapshot> {
    let state = StateVector::with_ancilla_branches(b0, b1)?;
    Ok(finish_round(state, part, ensemble, rng))
}

/// One round of the circuit: ancilla Hadamard, controlled e^{+iH tDiff} via
/// the Trotter plan, then the common tail.
pub fn shadow_round(
    phi: &StateVector,
    plan: &TrotterPlan,
    t_diff: f64,
    part: Part,
    ensemble: Ensemble,
    rng: &mut impl Rng,
) -> Result<Snapshot> {
    let n = phi.n_qubits();
    let mut state = StateVector::with_ancilla_branches(phi, phi)?;
    debug_assert_eq!(state.n_qubits(), n + 1);
    // controlled e^{+iH tDiff} = controlled evolution over time -tDiff
    state = controlled_evolve(plan, &state, -t_diff)?;
    Ok(finish_round(state, part, ensemble, rng))
}

/// Plain (unsigned) randomized measurement of a register state, for state
/// tomography cross-checks.
pub fn measure_in_random_basis(
    state: &StateVector,
    ensemble: Ensemble,
    rng: &mut impl Rng,
) -> Snapshot {
    let mut s = state.clone();
    let clifford = sample_register_clifford(s.n_qubits(), ensemble, rng);
    apply_clifford_shifted(&mut s, &clifford, 0);
    Snapshot {
        sign: 1,
        part: Part::Real,
        clifford,
        outcome: s.sample_z(rng),
        n_qubits: s.n_qubits(),
    }
}

/// Back-rotated single-qubit post-measurement state U† |z><z| U.
fn local_rho(clifford_index: u8, z_bit: u8) -> [[Complex64; 2]; 2] {
    let u = single_qubit_clifford(clifford_index as usize);
    // column z of U† is (conj(u[z][0]), conj(u[z][1]))
    let psi = [u[z_bit as usize][0].conj(), u[z_bit as usize][1].conj()];
    [
        [psi[0] * psi[0].conj(), psi[0] * psi[1].conj()],
        [psi[1] * psi[0].conj(), psi[1] * psi[1].conj()],
    ]
}

/// Dense M^-1 applied to the snapshot projector (n <= 12).
pub fn inverse_channel(snap: &Snapshot) -> Result<CMatrix> {
    let n = snap.n_qubits;
    if n > 12 {
        return Err(Error::InvalidArgument(format!(
            "dense snapshot inversion limited to 12 qubits, got {n}"
        )));
    }
    match &snap.clifford {
        CliffordDescription::LocalProduct(indices) => {
            let mut m = CMatrix::identity(1, 1);
            for (k, &idx) in indices.iter().enumerate() {
                let z = (snap.outcome >> (n - 1 - k) & 1) as u8;
                let rho = local_rho(idx, z);
                let mut f = CMatrix::zeros(2, 2);
                for r in 0..2 {
                    for c in 0..2 {
                        f[(r, c)] = 3.0 * rho[r][c]
                            - if r == c {
                                Complex64::new(1.0, 0.0)
                            } else {
                                Complex64::default()
                            };
                    }
                }
                m = m.kronecker(&f);
            }
            Ok(m)
        }
        CliffordDescription::Global(_) => {
            let mut psi = StateVector::basis_state(n, snap.outcome);
            psi.apply_clifford_inverse(&snap.clifford);
            let dim = 1usize << n;
            let mut m = CMatrix::zeros(dim, dim);
            let scale = Complex64::new(dim as f64 + 1.0, 0.0);
            for r in 0..dim {
                for c in 0..dim {
                    m[(r, c)] = scale * psi.amplitudes()[r] * psi.amplitudes()[c].conj();
                }
                m[(r, r)] -= Complex64::new(1.0, 0.0);
            }
            Ok(m)
        }
    }
}

/// sign * Tr(obs * M^-1(snapshot)) without materializing matrices;
/// `obs = None` means the identity (overlap estimation).
pub fn snapshot_value(snap: &Snapshot, obs: Option<&PauliOperator>) -> Result<Complex64> {
    let n = snap.n_qubits;
    let sign = Complex64::new(snap.sign as f64, 0.0);
    let Some(op) = obs else {
        // Both inverse channels are trace-preserving on trace-1 input.
        return Ok(sign);
    };
    if op.n_qubits() != n {
        return Err(Error::DimensionMismatch(format!(
            "observable on {} qubits, snapshot on {n}",
            op.n_qubits()
        )));
    }
    match &snap.clifford {
        CliffordDescription::LocalProduct(indices) => {
            let mut total = Complex64::default();
            for (s, &c) in op.terms() {
                let mut prod = Complex64::new(1.0, 0.0);
                for (k, &idx) in indices.iter().enumerate() {
                    let p = s.get(k);
                    if p == Pauli::I {
                        continue; // tr(3 rho - I) = 1
                    }
                    let z = (snap.outcome >> (n - 1 - k) & 1) as u8;
                    let rho = local_rho(idx, z);
                    let tr = match p {
                        Pauli::X => rho[0][1] + rho[1][0],
                        Pauli::Y => Complex64::new(0.0, 1.0) * (rho[0][1] - rho[1][0]),
                        Pauli::Z => rho[0][0] - rho[1][1],
                        Pauli::I => unreachable!(),
                    };
                    prod *= 3.0 * tr;
                }
                total += c * prod;
            }
            Ok(sign * total)
        }
        CliffordDescription::Global(_) => {
            let mut psi = StateVector::basis_state(n, snap.outcome);
            psi.apply_clifford_inverse(&snap.clifford);
            let expectation = psi.expectation(op)?;
            let dim = (1u64 << n) as f64;
            Ok(sign * ((dim + 1.0) * expectation - op.trace()))
        }
    }
}

/// Signed snapshots for one (i, j) matrix-element estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShadowEstimate {
    pub i: usize,
    pub j: usize,
    snapshots: Vec<Snapshot>,
    n_shots: usize,
}

impl ShadowEstimate {
    pub fn new(i: usize, j: usize, snapshots: Vec<Snapshot>) -> Result<Self> {
        let real = snapshots.iter().filter(|s| s.part == Part::Real).count();
        let imag = snapshots.len() - real;
        if real != imag {
            return Err(Error::InvalidArgument(format!(
                "unbalanced shadow parts: {real} real vs {imag} imaginary"
            )));
        }
        if real == 0 {
            return Err(Error::InvalidArgument("empty shadow estimate".into()));
        }
        Ok(ShadowEstimate {
            i,
            j,
            snapshots,
            n_shots: real,
        })
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn n_shots(&self) -> usize {
        self.n_shots
    }
}

/// Mean of sign-weighted inverted snapshots: Re-part mean + i * Im-part
/// mean, estimating <b0|obs|b1>.
pub fn estimate_offdiagonal(
    est: &ShadowEstimate,
    obs: Option<&PauliOperator>,
) -> Result<Complex64> {
    let mut re = Complex64::default();
    let mut im = Complex64::default();
    for snap in &est.snapshots {
        let v = snapshot_value(snap, obs)?;
        match snap.part {
            Part::Real => re += v,
            Part::Imag => im += v,
        }
    }
    let n = est.n_shots as f64;
    // obs is Hermitian in all uses, so per-part values are real up to
    // numerical noise; combining them as Re + i Im keeps that explicit.
    Ok(Complex64::new(re.re / n, im.re / n))
}

/// Collects `n_shots` rounds per part, in parallel, with per-round RNG
/// substreams derived from `seed` so results are reproducible regardless of
/// worker count.
pub fn collect_pair_snapshots(
    b0: &StateVector,
    b1: &StateVector,
    ensemble: Ensemble,
    n_shots: usize,
    seed: u64,
) -> Result<Vec<Snapshot>> {
    (0..2 * n_shots)
        .into_par_iter()
        .map(|k| {
            let part = if k < n_shots { Part::Real } else { Part::Imag };
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E3779B97F4A7C15));
            shadow_round_pair(b0, b1, part, ensemble, &mut rng)
        })
        .collect()
}

/// Squared shadow norm upper bound for the ensemble.
///
/// Local: by the triangle inequality over Pauli terms, ||O||_shadow <=
/// sum_i |c_i| 3^{w_i/2} with ||P||_shadow^2 = 3^weight for a single Pauli;
/// the square of that sum is returned. Global: 3 Tr(O^2) with Tr(O^2) =
/// 2^n sum |c_i|^2 by Pauli orthogonality.
pub fn shadow_norm_bound(obs: Option<&PauliOperator>, n_qubits: usize, ensemble: Ensemble) -> f64 {
    match obs {
        None => match ensemble {
            // Identity observable: the estimator is just the sign, bounded
            // by 1 in magnitude.
            Ensemble::Local | Ensemble::Global => 1.0,
        },
        Some(op) => match ensemble {
            Ensemble::Local => {
                let s: f64 = op
                    .terms()
                    .map(|(p, c)| c.norm() * 3f64.powf(p.weight() as f64 / 2.0))
                    .sum();
                s * s
            }
            Ensemble::Global => {
                let tr_o2: f64 =
                    op.terms().map(|(_, c)| c.norm_sqr()).sum::<f64>() * (1u64 << n_qubits) as f64;
                3.0 * tr_o2
            }
        },
    }
}

/// 2 ||obs||_shadow^2 / N: the real and imaginary parts contribute one
/// single-shot variance each.
pub fn variance_bound(
    obs: Option<&PauliOperator>,
    n_qubits: usize,
    ensemble: Ensemble,
    n_shots: usize,
) -> f64 {
    2.0 * shadow_norm_bound(obs, n_qubits, ensemble) / n_shots as f64
}

/// JSON-lines snapshot archive.
pub fn write_snapshots(w: &mut impl Write, snaps: &[Snapshot]) -> Result<()> {
    for s in snaps {
        serde_json::to_writer(&mut *w, s)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_snapshots(r: impl BufRead) -> Result<Vec<Snapshot>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
