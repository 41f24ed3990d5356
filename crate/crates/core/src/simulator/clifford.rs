//! Clifford descriptions and samplers: the 24-element single-qubit group
//! for local-product ensembles, and uniform n-qubit Cliffords as {H, S, X,
//! Z, CX} gate sequences, sampled by reducing random anticommuting Pauli
//! pairs qubit by qubit.

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const N_SINGLE_QUBIT_CLIFFORDS: usize = 24;

type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
    /// Cx(control, target)
    Cx(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CliffordDescription {
    /// Per-qubit index into the single-qubit Clifford group (0 = identity).
    LocalProduct(Vec<u8>),
    /// Gate sequence in application order.
    Global(Vec<CliffordGate>),
}

const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn mat_h() -> Mat2 {
    let o = Complex64::new(R, 0.0);
    [[o, o], [o, -o]]
}

fn mat_s() -> Mat2 {
    [
        [Complex64::new(1.0, 0.0), Complex64::default()],
        [Complex64::default(), Complex64::new(0.0, 1.0)],
    ]
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::default(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Equality up to global phase.
fn same_up_to_phase(a: &Mat2, b: &Mat2) -> bool {
    let mut phase = None;
    for i in 0..2 {
        for j in 0..2 {
            let (x, y) = (a[i][j], b[i][j]);
            if x.norm() < 1e-9 && y.norm() < 1e-9 {
                continue;
            }
            if x.norm() < 1e-9 || y.norm() < 1e-9 {
                return false;
            }
            let p = y / x;
            match phase {
                None => phase = Some(p),
                Some(q) => {
                    if (p - q).norm() > 1e-9 {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// The 24 single-qubit Cliffords, generated once by closing {H, S} under
/// multiplication and deduplicating up to global phase. Index 0 is the
/// identity.
fn clifford_table() -> &'static Vec<Mat2> {
    static TABLE: OnceLock<Vec<Mat2>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let id: Mat2 = [
            [Complex64::new(1.0, 0.0), Complex64::default()],
            [Complex64::default(), Complex64::new(1.0, 0.0)],
        ];
        let gens = [mat_h(), mat_s()];
        let mut table = vec![id];
        let mut frontier = vec![id];
        while let Some(m) = frontier.pop() {
            for g in &gens {
                let prod = mat_mul(g, &m);
                if !table.iter().any(|t| same_up_to_phase(t, &prod)) {
                    table.push(prod);
                    frontier.push(prod);
                }
            }
        }
        assert_eq!(table.len(), N_SINGLE_QUBIT_CLIFFORDS);
        table
    })
}

pub fn single_qubit_clifford(index: usize) -> Mat2 {
    clifford_table()[index]
}

pub fn random_local_clifford(n_qubits: usize, rng: &mut impl Rng) -> CliffordDescription {
    CliffordDescription::LocalProduct(
        (0..n_qubits)
            .map(|_| rng.gen_range(0..N_SINGLE_QUBIT_CLIFFORDS as u8))
            .collect(),
    )
}

/// A signed Pauli on plain qubit bits (bit k of `x`/`z` is qubit k), used
/// for tableau-style conjugation bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparsePauli {
    pub x: u64,
    pub z: u64,
    pub neg: bool,
}

impl SparsePauli {
    pub fn identity() -> Self {
        SparsePauli { x: 0, z: 0, neg: false }
    }

    pub fn anticommutes(&self, other: &SparsePauli) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 1
    }

    /// Conjugation by a Clifford gate: P -> G P G†.
    pub fn conjugate(&mut self, gate: CliffordGate) {
        match gate {
            CliffordGate::H(q) => {
                let b = 1u64 << q;
                let (xq, zq) = (self.x & b != 0, self.z & b != 0);
                // H X H = Z, H Z H = X, H Y H = -Y
                if xq && zq {
                    self.neg = !self.neg;
                }
                self.x = (self.x & !b) | if zq { b } else { 0 };
                self.z = (self.z & !b) | if xq { b } else { 0 };
            }
            CliffordGate::S(q) => {
                let b = 1u64 << q;
                let (xq, zq) = (self.x & b != 0, self.z & b != 0);
                // S X S† = Y, S Y S† = -X, S Z S† = Z
                if xq && zq {
                    self.neg = !self.neg;
                }
                if xq {
                    self.z ^= b;
                }
            }
            CliffordGate::X(q) => {
                if self.z & (1 << q) != 0 {
                    self.neg = !self.neg;
                }
            }
            CliffordGate::Z(q) => {
                if self.x & (1 << q) != 0 {
                    self.neg = !self.neg;
                }
            }
            CliffordGate::Cx(c, t) => {
                let (cb, tb) = (1u64 << c, 1u64 << t);
                let (xc, zc) = (self.x & cb != 0, self.z & cb != 0);
                let (xt, zt) = (self.x & tb != 0, self.z & tb != 0);
                // r ^= x_c z_t (x_t + z_c + 1)
                if xc && zt && (xt == zc) {
                    self.neg = !self.neg;
                }
                if xc {
                    self.x ^= tb;
                }
                if zt {
                    self.z ^= cb;
                }
            }
        }
    }
}

/// Uniform random non-identity signed Pauli supported on qubits q..n.
fn random_pauli_on(n: usize, q: usize, rng: &mut impl Rng) -> SparsePauli {
    loop {
        let mut p = SparsePauli::identity();
        for k in q..n {
            match rng.gen_range(0..4) {
                0 => {}
                1 => p.x |= 1 << k,
                2 => {
                    p.x |= 1 << k;
                    p.z |= 1 << k;
                }
                _ => p.z |= 1 << k,
            }
        }
        if p.x != 0 || p.z != 0 {
            p.neg = rng.gen();
            return p;
        }
    }
}

/// Gates mapping `p` (supported on qubits q..n, with x-part required after
/// the first loop) to X_q, also conjugating `other` along the way.
fn sweep_to_x(
    p: &mut SparsePauli,
    other: &mut SparsePauli,
    n: usize,
    q: usize,
    gates: &mut Vec<CliffordGate>,
) {
    let mut emit = |g: CliffordGate, p: &mut SparsePauli, o: &mut SparsePauli| {
        p.conjugate(g);
        o.conjugate(g);
        gates.push(g);
    };
    // Clear Z components so the support is X-only.
    for k in q..n {
        let b = 1u64 << k;
        if p.z & b != 0 {
            if p.x & b != 0 {
                emit(CliffordGate::S(k), p, other); // Y -> X (up to sign)
            } else {
                emit(CliffordGate::H(k), p, other); // Z -> X
            }
        }
    }
    // Move the support onto qubit q if needed.
    if p.x & (1 << q) == 0 {
        let s = (q..n).find(|k| p.x & (1 << k) != 0).expect("nonzero Pauli");
        emit(CliffordGate::Cx(s, q), p, other);
        emit(CliffordGate::Cx(q, s), p, other);
        emit(CliffordGate::Cx(s, q), p, other);
    }
    // Fold remaining X support into qubit q.
    for k in (q + 1)..n {
        if p.x & (1 << k) != 0 {
            emit(CliffordGate::Cx(q, k), p, other);
        }
    }
    debug_assert_eq!(p.x, 1 << q);
    debug_assert_eq!(p.z, 0);
}

/// Uniformly random n-qubit Clifford as a gate sequence.
///
/// For each qubit q a uniform anticommuting Pauli pair (P, Q) on qubits
/// q..n is drawn and a recorded gate sweep maps (P, Q) to (X_q, Z_q); the
/// recorded circuit is then inverted. Each sweep choice selects a uniform
/// coset representative, so the product is uniform over the group.
pub fn random_global_clifford(n_qubits: usize, rng: &mut impl Rng) -> CliffordDescription {
    let mut gates: Vec<CliffordGate> = Vec::new();
    for q in 0..n_qubits {
        let mut p = random_pauli_on(n_qubits, q, rng);
        let mut pq = loop {
            let cand = random_pauli_on(n_qubits, q, rng);
            if cand.anticommutes(&p) {
                break cand;
            }
        };
        sweep_to_x(&mut p, &mut pq, n_qubits, q, &mut gates);
        // P = ±X_q now; Q anticommutes with it, so z_q(Q) = 1.
        if (pq.x, pq.z) != (0, 1 << q) {
            let h = CliffordGate::H(q);
            p.conjugate(h);
            pq.conjugate(h);
            gates.push(h);
            sweep_to_x(&mut pq, &mut p, n_qubits, q, &mut gates);
            p.conjugate(h);
            pq.conjugate(h);
            gates.push(h);
        }
        debug_assert_eq!((p.x, p.z), (1 << q, 0));
        debug_assert_eq!((pq.x, pq.z), (0, 1 << q));
        if p.neg {
            p.conjugate(CliffordGate::Z(q));
            pq.conjugate(CliffordGate::Z(q));
            gates.push(CliffordGate::Z(q));
        }
        if pq.neg {
            p.conjugate(CliffordGate::X(q));
            pq.conjugate(CliffordGate::X(q));
            gates.push(CliffordGate::X(q));
        }
    }
    // Invert the recorded sweep: reversed order, S replaced by S^3.
    let mut inverse = Vec::with_capacity(gates.len() + 2);
    for &g in gates.iter().rev() {
        match g {
            CliffordGate::S(q) => {
                inverse.extend([CliffordGate::S(q); 3]);
            }
            other => inverse.push(other),
        }
    }
    CliffordDescription::Global(inverse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::pauli::{Pauli, PauliOperator, PauliString};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn twenty_four_single_qubit_cliffords() {
        assert_eq!(clifford_table().len(), 24);
        // Index 0 is the identity.
        let id = single_qubit_clifford(0);
        assert!((id[0][0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(id[0][1].norm() < 1e-12);
    }

    fn gate_matrix(n: usize, g: CliffordGate) -> CMatrix {
        let dim = 1usize << n;
        let mut u = CMatrix::zeros(dim, dim);
        let basis = |idx: usize| {
            let mut v = crate::simulator::StateVector::basis_state(n, idx as u64);
            v.apply_gate(g);
            v
        };
        for j in 0..dim {
            let col = basis(j);
            for i in 0..dim {
                u[(i, j)] = col.amplitudes()[i];
            }
        }
        u
    }

    fn sparse_to_operator(n: usize, p: &SparsePauli) -> PauliOperator {
        let mut s = PauliString::identity(n);
        for k in 0..n {
            let (x, z) = (p.x >> k & 1 == 1, p.z >> k & 1 == 1);
            let letter = match (x, z) {
                (false, false) => Pauli::I,
                (true, false) => Pauli::X,
                (true, true) => Pauli::Y,
                (false, true) => Pauli::Z,
            };
            s.set(k, letter);
        }
        let sign = if p.neg { -1.0 } else { 1.0 };
        PauliOperator::from_terms(n, [(s, Complex64::new(sign, 0.0))])
    }

    #[test]
    fn conjugation_rules_match_dense_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 3;
        let gates = [
            CliffordGate::H(0),
            CliffordGate::H(2),
            CliffordGate::S(1),
            CliffordGate::X(2),
            CliffordGate::Z(0),
            CliffordGate::Cx(0, 1),
            CliffordGate::Cx(2, 0),
        ];
        for g in gates {
            let u = gate_matrix(n, g);
            for _ in 0..20 {
                let p = random_pauli_on(n, 0, &mut rng);
                let mut q = p;
                q.conjugate(g);
                let lhs = &u * sparse_to_operator(n, &p).to_dense() * u.adjoint();
                let rhs = sparse_to_operator(n, &q).to_dense();
                assert!(
                    (lhs - rhs).norm() < 1e-10,
                    "conjugation mismatch for {g:?} on {p:?} -> {q:?}"
                );
            }
        }
    }

    #[test]
    fn global_clifford_single_qubit_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let trials = 24_000;
        let mut counts = vec![0usize; 24];
        for _ in 0..trials {
            let CliffordDescription::Global(gates) = random_global_clifford(1, &mut rng) else {
                unreachable!()
            };
            let mut m = [
                [Complex64::new(1.0, 0.0), Complex64::default()],
                [Complex64::default(), Complex64::new(1.0, 0.0)],
            ];
            for g in gates {
                let gm = match g {
                    CliffordGate::H(_) => mat_h(),
                    CliffordGate::S(_) => mat_s(),
                    CliffordGate::X(_) => [
                        [Complex64::default(), Complex64::new(1.0, 0.0)],
                        [Complex64::new(1.0, 0.0), Complex64::default()],
                    ],
                    CliffordGate::Z(_) => [
                        [Complex64::new(1.0, 0.0), Complex64::default()],
                        [Complex64::default(), Complex64::new(-1.0, 0.0)],
                    ],
                    CliffordGate::Cx(_, _) => panic!("no CX on one qubit"),
                };
                m = mat_mul(&gm, &m);
            }
            let idx = clifford_table()
                .iter()
                .position(|t| same_up_to_phase(t, &m))
                .expect("sampled matrix is a Clifford");
            counts[idx] += 1;
        }
        let expected = trials as f64 / 24.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // chi-square critical value, 23 dof, p = 1e-3
        assert!(chi2 < 49.73, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn global_clifford_maps_paulis_to_paulis() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 3;
        for _ in 0..5 {
            let CliffordDescription::Global(gates) = random_global_clifford(n, &mut rng) else {
                unreachable!()
            };
            let p = random_pauli_on(n, 0, &mut rng);
            let mut q = p;
            for &g in &gates {
                q.conjugate(g);
            }
            // Dense check of the whole sequence.
            let mut u = CMatrix::identity(1 << n, 1 << n);
            for &g in &gates {
                u = gate_matrix(n, g) * u;
            }
            let lhs = &u * sparse_to_operator(n, &p).to_dense() * u.adjoint();
            let rhs = sparse_to_operator(n, &q).to_dense();
            assert!((lhs - rhs).norm() < 1e-9);
        }
    }

    #[test]
    fn anticommutation_predicate() {
        let x = SparsePauli { x: 1, z: 0, neg: false };
        let z = SparsePauli { x: 0, z: 1, neg: false };
        let xx = SparsePauli { x: 3, z: 0, neg: false };
        let zz = SparsePauli { x: 0, z: 3, neg: false };
        assert!(x.anticommutes(&z));
        assert!(!xx.anticommutes(&zz));
    }
}
