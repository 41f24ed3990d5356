//! Dense state-vector simulation: single-qubit gates, analytic Pauli
//! exponentials, first-order Trotterized (controlled) real-time evolution,
//! Clifford application, and computational-basis sampling.
//!
//! Qubit `k` lives at bit `n - 1 - k` of an amplitude index, matching the
//! convention in [`crate::pauli`]; qubit 0 is the most significant bit, so
//! an ancilla placed at qubit 0 splits the amplitude vector into two
//! contiguous halves.

mod clifford;

pub use clifford::{
    random_global_clifford, random_local_clifford, single_qubit_clifford, CliffordDescription,
    CliffordGate, SparsePauli, N_SINGLE_QUBIT_CLIFFORDS,
};

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::CMatrix;
use crate::pauli::{PauliOperator, PauliString};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// Phase `<i|P|i^flip>` given precomputed index-space masks.
fn pauli_phase(i: u64, zmask: u64, ymask: u64, y_total: u32) -> Complex64 {
    let z_sign = if (i & zmask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    let y_up = (i & ymask).count_ones();
    let ipow = (y_up + 3 * (y_total - y_up)) % 4;
    let y_phase = match ipow {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    y_phase * z_sign
}

/// exp(-i theta P) applied in place: cos(theta) I - i sin(theta) P on each
/// flip-coupled amplitude pair.
fn pauli_exp_in_place(amps: &mut [Complex64], s: &PauliString, theta: f64) {
    let (flip, zmask, ymask) = s.masks();
    let y_total = ymask.count_ones();
    let (c, sn) = (theta.cos(), theta.sin());
    let mi = Complex64::new(0.0, -sn);
    if flip == 0 {
        for (i, a) in amps.iter_mut().enumerate() {
            let m = pauli_phase(i as u64, zmask, ymask, y_total);
            *a = (c + mi * m) * *a;
        }
    } else {
        let low = 1u64 << flip.trailing_zeros();
        for i in 0..amps.len() as u64 {
            if i & low != 0 {
                continue;
            }
            let j = i ^ flip;
            let mij = pauli_phase(i, zmask, ymask, y_total);
            let mji = pauli_phase(j, zmask, ymask, y_total);
            let (ai, aj) = (amps[i as usize], amps[j as usize]);
            amps[i as usize] = c * ai + mi * mij * aj;
            amps[j as usize] = c * aj + mi * mji * ai;
        }
    }
}

fn single_in_place(amps: &mut [Complex64], n: usize, qubit: usize, m: &[[Complex64; 2]; 2]) {
    let bit = 1usize << (n - 1 - qubit);
    for i in 0..amps.len() {
        if i & bit != 0 {
            continue;
        }
        let j = i | bit;
        let (a0, a1) = (amps[i], amps[j]);
        amps[i] = m[0][0] * a0 + m[0][1] * a1;
        amps[j] = m[1][0] * a0 + m[1][1] * a1;
    }
}

fn cx_in_place(amps: &mut [Complex64], n: usize, control: usize, target: usize) {
    let cbit = 1usize << (n - 1 - control);
    let tbit = 1usize << (n - 1 - target);
    for i in 0..amps.len() {
        if i & cbit != 0 && i & tbit == 0 {
            amps.swap(i, i | tbit);
        }
    }
}

fn gate_in_place(amps: &mut [Complex64], n: usize, gate: CliffordGate) {
    let i = Complex64::new(0.0, 1.0);
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::default();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match gate {
        CliffordGate::H(q) => single_in_place(
            amps,
            n,
            q,
            &[[o * r, o * r], [o * r, -o * r]],
        ),
        CliffordGate::S(q) => single_in_place(amps, n, q, &[[o, z], [z, i]]),
        CliffordGate::X(q) => single_in_place(amps, n, q, &[[z, o], [o, z]]),
        CliffordGate::Z(q) => single_in_place(amps, n, q, &[[o, z], [z, -o]]),
        CliffordGate::Cx(c, t) => cx_in_place(amps, n, c, t),
    }
}

fn unitary_in_place(amps: &mut [Complex64], u: &CMatrix) {
    let dim = amps.len();
    let mut out = vec![Complex64::default(); dim];
    for i in 0..dim {
        let mut acc = Complex64::default();
        for j in 0..dim {
            acc += u[(i, j)] * amps[j];
        }
        out[i] = acc;
    }
    amps.copy_from_slice(&out);
}

impl StateVector {
    /// Computational basis state |index>.
    pub fn basis_state(n_qubits: usize, index: u64) -> Self {
        let dim = 1usize << n_qubits;
        assert!((index as usize) < dim);
        let mut amps = vec![Complex64::default(); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    /// Product state with mode `p` of the occupation mask on qubit `p`.
    pub fn from_occupation(n_qubits: usize, mask: u64) -> Self {
        let mut index = 0u64;
        for p in 0..n_qubits {
            if mask >> p & 1 == 1 {
                index |= 1 << (n_qubits - 1 - p);
            }
        }
        Self::basis_state(n_qubits, index)
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {} qubits",
                amps.len(),
                n_qubits
            )));
        }
        Ok(StateVector { n_qubits, amps })
    }

    /// (|0> (x) b0 + |1> (x) b1) / sqrt(2), ancilla at qubit 0.
    pub fn with_ancilla_branches(b0: &StateVector, b1: &StateVector) -> Result<Self> {
        if b0.n_qubits != b1.n_qubits {
            return Err(Error::DimensionMismatch(
                "ancilla branches differ in qubit count".into(),
            ));
        }
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let amps = b0
            .amps
            .iter()
            .map(|a| a * r)
            .chain(b1.amps.iter().map(|a| a * r))
            .collect();
        Ok(StateVector {
            n_qubits: b0.n_qubits + 1,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    /// <self|other>.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn apply_single(&mut self, qubit: usize, m: &[[Complex64; 2]; 2]) {
        single_in_place(&mut self.amps, self.n_qubits, qubit, m);
    }

    pub fn apply_gate(&mut self, gate: CliffordGate) {
        gate_in_place(&mut self.amps, self.n_qubits, gate);
    }

    pub fn apply_clifford(&mut self, c: &CliffordDescription) {
        match c {
            CliffordDescription::LocalProduct(indices) => {
                assert_eq!(indices.len(), self.n_qubits);
                for (q, &idx) in indices.iter().enumerate() {
                    let m = single_qubit_clifford(idx as usize);
                    self.apply_single(q, &m);
                }
            }
            CliffordDescription::Global(gates) => {
                for &g in gates {
                    self.apply_gate(g);
                }
            }
        }
    }

    /// Applies the inverse (adjoint) of the Clifford.
    pub fn apply_clifford_inverse(&mut self, c: &CliffordDescription) {
        match c {
            CliffordDescription::LocalProduct(indices) => {
                for (q, &idx) in indices.iter().enumerate() {
                    let m = single_qubit_clifford(idx as usize);
                    let inv = [
                        [m[0][0].conj(), m[1][0].conj()],
                        [m[0][1].conj(), m[1][1].conj()],
                    ];
                    self.apply_single(q, &inv);
                }
            }
            CliffordDescription::Global(gates) => {
                for &g in gates.iter().rev() {
                    match g {
                        // S^-1 = S^3; the others are involutions.
                        CliffordGate::S(q) => {
                            for _ in 0..3 {
                                self.apply_gate(CliffordGate::S(q));
                            }
                        }
                        other => self.apply_gate(other),
                    }
                }
            }
        }
    }

    pub fn apply_pauli_exp(&mut self, s: &PauliString, theta: f64) {
        debug_assert_eq!(s.n_qubits(), self.n_qubits);
        pauli_exp_in_place(&mut self.amps, s, theta);
    }

    /// H|self> — generally not normalized.
    pub fn apply_operator(&self, op: &PauliOperator) -> Result<StateVector> {
        let amps = op.apply_to_amplitudes(&self.amps)?;
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps,
        })
    }

    pub fn expectation(&self, op: &PauliOperator) -> Result<Complex64> {
        Ok(self.inner(&self.apply_operator(op)?))
    }

    /// Applies a dense unitary (exact-evolution backend, n <= 12).
    pub fn apply_unitary(&mut self, u: &CMatrix) -> Result<()> {
        if u.nrows() != self.amps.len() || u.ncols() != self.amps.len() {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, state has dimension {}",
                u.nrows(),
                u.ncols(),
                self.amps.len()
            )));
        }
        unitary_in_place(&mut self.amps, u);
        Ok(())
    }

    /// Dense unitary on the register, conditioned on ancilla qubit 0.
    pub fn controlled_apply_unitary(&mut self, u: &CMatrix) -> Result<()> {
        let half = self.amps.len() / 2;
        if u.nrows() != half || u.ncols() != half {
            return Err(Error::DimensionMismatch(format!(
                "controlled unitary is {}x{}, register dimension {}",
                u.nrows(),
                u.ncols(),
                half
            )));
        }
        unitary_in_place(&mut self.amps[half..], u);
        Ok(())
    }

    /// Samples an amplitude index with probability |amplitude|^2; the
    /// outcome of qubit k is bit (n-1-k) of the result.
    pub fn sample_z(&self, rng: &mut impl Rng) -> u64 {
        let r: f64 = rng.gen::<f64>() * self.norm().powi(2);
        let mut acc = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if r < acc {
                return i as u64;
            }
        }
        self.amps.len() as u64 - 1
    }

    /// Outcome bit of a given qubit within a sampled index.
    pub fn outcome_bit(n_qubits: usize, index: u64, qubit: usize) -> u8 {
        (index >> (n_qubits - 1 - qubit) & 1) as u8
    }
}

/// First-order Trotter schedule for e^{-iHt}. Terms are ordered by
/// descending coefficient magnitude (ties broken by string letters) so a
/// plan is deterministic for a given operator; the ordering only shifts the
/// O(dt^2) error constant.
#[derive(Debug, Clone)]
pub struct TrotterPlan {
    n_qubits: usize,
    terms: Vec<(PauliString, f64)>,
    dt: f64,
}

impl TrotterPlan {
    pub fn new(op: &PauliOperator, dt: f64) -> Result<TrotterPlan> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if !op.is_hermitian(1e-10) {
            return Err(Error::InvalidArgument(
                "Trotter evolution requires a Hermitian operator".into(),
            ));
        }
        let mut terms: Vec<(PauliString, f64)> =
            op.terms().map(|(s, c)| (s.clone(), c.re)).collect();
        terms.sort_by(|a, b| {
            b.1.abs()
                .partial_cmp(&a.1.abs())
                .unwrap()
                .then_with(|| format!("{}", a.0).cmp(&format!("{}", b.0)))
        });
        Ok(TrotterPlan {
            n_qubits: op.n_qubits(),
            terms,
            dt,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    fn step_in_place(&self, amps: &mut [Complex64], dt: f64) {
        for (s, c) in &self.terms {
            pauli_exp_in_place(amps, s, c * dt);
        }
    }

    /// Number of whole steps closest to `t`, and the rounding residual.
    pub fn steps_for(&self, t: f64) -> (u64, f64) {
        let steps = (t / self.dt).round().max(0.0) as u64;
        (steps, t - steps as f64 * self.dt)
    }
}

/// One first-order step e^{-iH_M dt} ... e^{-iH_1 dt}.
pub fn trotter_step(plan: &TrotterPlan, v: &StateVector) -> Result<StateVector> {
    if v.n_qubits != plan.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "plan on {} qubits, state on {}",
            plan.n_qubits, v.n_qubits
        )));
    }
    let mut out = v.clone();
    plan.step_in_place(&mut out.amps, plan.dt);
    Ok(out)
}

/// e^{-iHt}|v> by repeated Trotter steps; t is rounded to the step grid.
pub fn evolve(plan: &TrotterPlan, v: &StateVector, t: f64) -> Result<StateVector> {
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "backward evolution not supported (t = {t})"
        )));
    }
    if v.n_qubits != plan.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "plan on {} qubits, state on {}",
            plan.n_qubits, v.n_qubits
        )));
    }
    let (steps, _residual) = plan.steps_for(t);
    let mut out = v.clone();
    for _ in 0..steps {
        plan.step_in_place(&mut out.amps, plan.dt);
    }
    Ok(out)
}

/// Controlled e^{-iHt} on the register (qubits 1..=n) conditioned on the
/// ancilla (qubit 0); `t` may be negative, which runs the steps with -dt.
pub fn controlled_evolve(plan: &TrotterPlan, v: &StateVector, t: f64) -> Result<StateVector> {
    if v.n_qubits != plan.n_qubits + 1 {
        return Err(Error::DimensionMismatch(format!(
            "controlled evolution needs {} qubits, state has {}",
            plan.n_qubits + 1,
            v.n_qubits
        )));
    }
    let (steps, _residual) = plan.steps_for(t.abs());
    let dt = if t < 0.0 { -plan.dt } else { plan.dt };
    let mut out = v.clone();
    let half = out.amps.len() / 2;
    for _ in 0..steps {
        plan.step_in_place(&mut out.amps[half..], dt);
    }
    Ok(out)
}
