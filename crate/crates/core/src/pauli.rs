//! Pauli strings, weighted Pauli operators, and fermion-to-qubit mappings
//! (Jordan-Wigner and Bravyi-Kitaev).
//!
//! Qubit `k` lives at bit `n - 1 - k` of a basis index, so qubit 0 is the
//! most significant position in a serialized bitstring.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;
use crate::{Error, Result, PRUNE_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Single-qubit product `self * other` as (phase-power-of-i, result).
    fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_letter(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// A tensor product of single-qubit Paulis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        PauliString(vec![Pauli::I; n_qubits])
    }

    pub fn from_letters(letters: Vec<Pauli>) -> Self {
        PauliString(letters)
    }

    /// Single non-identity letter at `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n_qubits);
        s.0[qubit] = p;
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        self.0[qubit]
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) {
        self.0[qubit] = p;
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// `(phase, string)` with `self * other = phase * string`.
    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        assert_eq!(self.0.len(), other.0.len());
        let mut ipow = 0u8;
        let letters = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| {
                let (k, r) = a.mul(b);
                ipow = (ipow + k) % 4;
                r
            })
            .collect();
        let phase = match ipow {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        (phase, PauliString(letters))
    }

    /// Index-space masks for applying this string to an amplitude vector:
    /// `(flip, z_phase, y)` where qubit k maps to bit `n-1-k`.
    pub fn masks(&self) -> (u64, u64, u64) {
        let n = self.0.len();
        let mut flip = 0u64;
        let mut zmask = 0u64;
        let mut ymask = 0u64;
        for (k, &p) in self.0.iter().enumerate() {
            let bit = 1u64 << (n - 1 - k);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    ymask |= bit;
                }
                Pauli::Z => zmask |= bit,
            }
        }
        (flip, zmask, ymask)
    }

    /// Matrix element `<i|P|j>` where `j = i ^ flip`; zero otherwise.
    pub fn matrix_element(&self, i: u64) -> Complex64 {
        let (_, zmask, ymask) = self.masks();
        let z_sign = if (i & zmask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let y_up = (i & ymask).count_ones();
        let y_total = ymask.count_ones();
        // <1|Y|0> = i, <0|Y|1> = -i.
        let ipow = (y_up + 3 * (y_total - y_up)) % 4;
        let y_phase = match ipow {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        y_phase * z_sign
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

/// A weighted sum of Pauli strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliOperator {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliOperator {
    pub fn zero(n_qubits: usize) -> Self {
        PauliOperator {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut op = Self::zero(n_qubits);
        op.add_term(PauliString::identity(n_qubits), Complex64::new(1.0, 0.0));
        op
    }

    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (PauliString, Complex64)>,
    ) -> Self {
        let mut op = Self::zero(n_qubits);
        for (s, c) in terms {
            op.add_term(s, c);
        }
        op.prune();
        op
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, s: &PauliString) -> Complex64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, s: PauliString, c: Complex64) {
        debug_assert_eq!(s.n_qubits(), self.n_qubits);
        *self.terms.entry(s).or_default() += c;
    }

    pub fn add(&mut self, other: &PauliOperator) {
        assert_eq!(self.n_qubits, other.n_qubits);
        for (s, c) in &other.terms {
            self.add_term(s.clone(), *c);
        }
        self.prune();
    }

    pub fn scale(&mut self, c: Complex64) {
        for v in self.terms.values_mut() {
            *v *= c;
        }
        self.prune();
    }

    pub fn mul(&self, other: &PauliOperator) -> PauliOperator {
        assert_eq!(self.n_qubits, other.n_qubits);
        let mut out = PauliOperator::zero(self.n_qubits);
        for (sa, ca) in &self.terms {
            for (sb, cb) in &other.terms {
                let (phase, s) = sa.mul(sb);
                out.add_term(s, ca * cb * phase);
            }
        }
        out.prune();
        out
    }

    /// Hermitian adjoint. Pauli strings are self-adjoint, so this only
    /// conjugates coefficients.
    pub fn dagger(&self) -> PauliOperator {
        PauliOperator {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c.conj())).collect(),
        }
    }

    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > PRUNE_EPS);
    }

    pub fn is_hermitian(&self, eps: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= eps)
    }

    /// Trace of the operator (2^n times the identity coefficient).
    pub fn trace(&self) -> Complex64 {
        self.coefficient(&PauliString::identity(self.n_qubits))
            * Complex64::new((1u64 << self.n_qubits) as f64, 0.0)
    }

    /// Applies the operator to a dense amplitude vector.
    pub fn apply_to_amplitudes(&self, amps: &[Complex64]) -> Result<Vec<Complex64>> {
        let dim = 1usize << self.n_qubits;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "operator on {} qubits applied to a vector of length {}",
                self.n_qubits,
                amps.len()
            )));
        }
        let mut out = vec![Complex64::default(); dim];
        for (s, &c) in &self.terms {
            let (flip, _, _) = s.masks();
            for i in 0..dim as u64 {
                let j = i ^ flip;
                let m = s.matrix_element(i);
                out[i as usize] += c * m * amps[j as usize];
            }
        }
        Ok(out)
    }

    /// Dense matrix form, for desk-scale cross-checks.
    pub fn to_dense(&self) -> CMatrix {
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for (s, &c) in &self.terms {
            let (flip, _, _) = s.masks();
            for i in 0..dim as u64 {
                let j = i ^ flip;
                m[(i as usize, j as usize)] += c * s.matrix_element(i);
            }
        }
        m
    }

    /// Debug dump, one `<coeff> <letters>` line per term, sorted by string.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<String> = self
            .terms
            .iter()
            .map(|(s, c)| format!("{:+}{:+}i {}", c.re, c.im, s))
            .collect();
        lines.sort();
        lines.join("\n")
    }

    pub fn from_text(n_qubits: usize, text: &str) -> Result<PauliOperator> {
        let mut op = PauliOperator::zero(n_qubits);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                line: lineno + 1,
                msg,
            };
            let (coeff, letters) = line
                .split_once(' ')
                .ok_or_else(|| err("expected '<coeff> <letters>'".into()))?;
            let coeff = coeff
                .strip_suffix('i')
                .ok_or_else(|| err("coefficient must end in 'i'".into()))?;
            let split = coeff.rfind(['+', '-']).filter(|&p| p > 0).ok_or_else(|| {
                err("coefficient must look like <re>+<im>i".into())
            })?;
            let re: f64 = coeff[..split].parse().map_err(|_| err("bad real part".into()))?;
            let im: f64 = coeff[split..].parse().map_err(|_| err("bad imag part".into()))?;
            let parsed: Option<Vec<Pauli>> = letters.chars().map(Pauli::from_letter).collect();
            let parsed = parsed.ok_or_else(|| err("bad Pauli letter".into()))?;
            if parsed.len() != n_qubits {
                return Err(err(format!("expected {n_qubits} letters")));
            }
            op.add_term(PauliString::from_letters(parsed), Complex64::new(re, im));
        }
        op.prune();
        Ok(op)
    }
}

/// A second-quantized monomial: ladder operators in left-to-right order
/// (the rightmost acts first) with a complex coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionMonomial {
    /// `(mode, is_creation)` pairs.
    pub ops: Vec<(usize, bool)>,
    pub coeff: Complex64,
}

impl FermionMonomial {
    pub fn new(ops: Vec<(usize, bool)>, coeff: Complex64) -> Self {
        FermionMonomial { ops, coeff }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MappingScheme {
    /// Default: simplest sign bookkeeping, identical physics.
    #[default]
    JordanWigner,
    BravyiKitaev,
}

/// Index sets of the occupation encoding: flipping mode j touches `update`,
/// the parity of modes < j is the joint parity of `parity`, and the
/// occupation of mode j is the joint parity of `occupation`.
fn encoding_sets(n: usize, j: usize, scheme: MappingScheme) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    match scheme {
        MappingScheme::JordanWigner => (vec![j], (0..j).collect(), vec![j]),
        MappingScheme::BravyiKitaev => {
            // Fenwick-tree (binary indexed tree) encoding, 1-based internally.
            let update = {
                let mut set = Vec::new();
                let mut i = j + 1;
                while i <= n {
                    set.push(i - 1);
                    i += i & i.wrapping_neg();
                }
                set
            };
            let prefix = |k: usize| -> Vec<usize> {
                let mut set = Vec::new();
                let mut i = k;
                while i > 0 {
                    set.push(i - 1);
                    i -= i & i.wrapping_neg();
                }
                set
            };
            let parity = prefix(j);
            // n_j = prefix(j+1) xor prefix(j), as parity sets.
            let mut occupation: Vec<usize> = Vec::new();
            for q in prefix(j + 1).into_iter().chain(prefix(j)) {
                if let Some(pos) = occupation.iter().position(|&x| x == q) {
                    occupation.remove(pos);
                } else {
                    occupation.push(q);
                }
            }
            (update, parity, occupation)
        }
    }
}

/// Qubit bit pattern encoding an occupation mask: flipping mode k flips the
/// qubits in its update set, so the encoded bits are the GF(2) image of the
/// occupations (the identity map for Jordan-Wigner).
pub fn encode_occupation(n_modes: usize, mask: u64, scheme: MappingScheme) -> u64 {
    let mut bits = 0u64;
    for k in 0..n_modes {
        if mask >> k & 1 == 1 {
            for q in encoding_sets(n_modes, k, scheme).0 {
                bits ^= 1 << q;
            }
        }
    }
    bits
}

fn z_string(n: usize, qubits: &[usize]) -> PauliString {
    let mut s = PauliString::identity(n);
    for &q in qubits {
        s.set(q, Pauli::Z);
    }
    s
}

fn x_string(n: usize, qubits: &[usize]) -> PauliString {
    let mut s = PauliString::identity(n);
    for &q in qubits {
        s.set(q, Pauli::X);
    }
    s
}

/// The qubit image of the creation operator for `mode`.
pub fn creation_operator(n_modes: usize, mode: usize, scheme: MappingScheme) -> PauliOperator {
    let (update, parity, occupation) = encoding_sets(n_modes, mode, scheme);
    // c†_j = X_update · [ Z_parity (I + Z_occupation) / 2 ]: project onto
    // unoccupied, pick up the prefix parity sign, then flip.
    let half = Complex64::new(0.5, 0.0);
    let mut diag = PauliOperator::zero(n_modes);
    diag.add_term(z_string(n_modes, &parity), half);
    let (phase, zz) = z_string(n_modes, &parity).mul(&z_string(n_modes, &occupation));
    diag.add_term(zz, half * phase);
    let mut flip = PauliOperator::zero(n_modes);
    flip.add_term(x_string(n_modes, &update), Complex64::new(1.0, 0.0));
    flip.mul(&diag)
}

/// The qubit image of the annihilation operator for `mode`.
pub fn annihilation_operator(n_modes: usize, mode: usize, scheme: MappingScheme) -> PauliOperator {
    creation_operator(n_modes, mode, scheme).dagger()
}

/// Maps a sum of second-quantized monomials to a qubit Pauli operator.
pub fn map_fermion_operator(
    n_modes: usize,
    monomials: &[FermionMonomial],
    scheme: MappingScheme,
) -> Result<PauliOperator> {
    let mut cache: HashMap<(usize, bool), PauliOperator> = HashMap::new();
    let mut out = PauliOperator::zero(n_modes);
    for monomial in monomials {
        let mut acc = PauliOperator::identity(n_modes);
        for &(mode, is_creation) in &monomial.ops {
            if mode >= n_modes {
                return Err(Error::InvalidArgument(format!(
                    "mode {mode} out of range for {n_modes} modes"
                )));
            }
            let op = cache.entry((mode, is_creation)).or_insert_with(|| {
                if is_creation {
                    creation_operator(n_modes, mode, scheme)
                } else {
                    annihilation_operator(n_modes, mode, scheme)
                }
            });
            acc = acc.mul(op);
        }
        acc.scale(monomial.coeff);
        out.add(&acc);
    }
    out.prune();
    Ok(out)
}
