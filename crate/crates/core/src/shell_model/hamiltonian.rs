use std::collections::HashMap;

use num_complex::Complex64;

use crate::linalg::CMatrix;
use crate::pauli::FermionMonomial;
use crate::{Error, Result, PRUNE_EPS};

use super::{clebsch_gordan, ConfigurationBasis, InteractionData, SingleParticleSpace, Tbme};

/// Whether interaction-file TBMEs carry the 1/sqrt(1+delta_ab) pair
/// normalization (the NuShellX-style convention) or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TbmeConvention {
    #[default]
    Normalized,
    Unnormalized,
}

/// Row-indexed real symmetric sparse matrix over a configuration basis.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseHamiltonian {
    /// Accumulates (row, col, value) triplets, summing duplicates and
    /// dropping anything below [`PRUNE_EPS`] (CG cancellation residue).
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc: HashMap<(usize, usize), f64> = HashMap::new();
        for (r, c, v) in triplets {
            *acc.entry((r, c)).or_insert(0.0) += v;
        }
        let mut rows = vec![Vec::new(); dim];
        for ((r, c), v) in acc {
            if v.abs() > PRUNE_EPS {
                rows[r].push((c, v));
            }
        }
        for row in &mut rows {
            row.sort_unstable_by_key(|&(c, _)| c);
        }
        SparseHamiltonian { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, r: usize) -> &[(usize, f64)] {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.rows[r]
            .binary_search_by_key(&c, |&(col, _)| col)
            .map(|i| self.rows[r][i].1)
            .unwrap_or(0.0)
    }

    pub fn n_nonzero(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `H v` for a dense real vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for (r, row) in self.rows.iter().enumerate() {
            out[r] = row.iter().map(|&(c, h)| h * v[c]).sum();
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.dim]; self.dim];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[r][c] = v;
            }
        }
        m
    }

    pub fn to_dense_complex(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] = Complex64::new(v, 0.0);
            }
        }
        m
    }

    pub fn is_hermitian(&self) -> bool {
        self.rows.iter().enumerate().all(|(r, row)| {
            row.iter().all(|&(c, v)| (self.get(c, r) - v).abs() <= 1e-12 * (1.0 + v.abs()))
        })
    }
}

fn annihilate(mask: u64, p: usize) -> Option<(u64, f64)> {
    if mask >> p & 1 == 0 {
        return None;
    }
    let sign = if ((mask & ((1u64 << p) - 1)).count_ones()) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    Some((mask & !(1u64 << p), sign))
}

fn create(mask: u64, p: usize) -> Option<(u64, f64)> {
    if mask >> p & 1 == 1 {
        return None;
    }
    let sign = if ((mask & ((1u64 << p) - 1)).count_ones()) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    Some((mask | (1u64 << p), sign))
}

/// Expands one coupled pair term `A†_{JMTM_T}(ab) A_{JMTM_T}(cd)` (summed
/// over M, M_T) into uncoupled (creation-pair, annihilation-pair) monomials
/// with their CG weights.
///
/// Each emitted entry is `(ia, ib, ic, id, weight)` for the operator
/// `c†_ia c†_ib c_id c_ic` in that left-to-right order.
fn coupled_pair_monomials(
    space: &SingleParticleSpace,
    tbme_orbitals: (usize, usize, usize, usize),
    j: u32,
    t: u32,
) -> Vec<(usize, usize, usize, usize, f64)> {
    let (a, b, c, d) = tbme_orbitals;
    let orbs = space.orbitals();
    let (ja, jb, jc, jd) = (
        orbs[a].j2 as i32,
        orbs[b].j2 as i32,
        orbs[c].j2 as i32,
        orbs[d].j2 as i32,
    );
    let jj2 = 2 * j as i32;
    let tt2 = 2 * t as i32;
    let mut out = Vec::new();
    let mut m2 = -jj2;
    while m2 <= jj2 {
        let mut mt2 = -tt2;
        while mt2 <= tt2 {
            // Creation side: sum over (ma, tza); (mb, tzb) forced.
            let mut cre = Vec::new();
            let mut ma = -ja;
            while ma <= ja {
                let mb = m2 - ma;
                if mb.abs() <= jb {
                    for tza in [-1, 1] {
                        let tzb = mt2 - tza;
                        if tzb.abs() != 1 {
                            continue;
                        }
                        let w = clebsch_gordan(ja, ma, jb, mb, jj2, m2)
                            * clebsch_gordan(1, tza, 1, tzb, tt2, mt2);
                        if w.abs() < PRUNE_EPS {
                            continue;
                        }
                        let (Some(ia), Some(ib)) =
                            (space.index_of(a, ma, tza), space.index_of(b, mb, tzb))
                        else {
                            continue;
                        };
                        if ia == ib {
                            continue;
                        }
                        cre.push((ia, ib, w));
                    }
                }
                ma += 2;
            }
            // Annihilation side mirrors it with (c, d).
            let mut ann = Vec::new();
            let mut mc = -jc;
            while mc <= jc {
                let md = m2 - mc;
                if md.abs() <= jd {
                    for tzc in [-1, 1] {
                        let tzd = mt2 - tzc;
                        if tzd.abs() != 1 {
                            continue;
                        }
                        let w = clebsch_gordan(jc, mc, jd, md, jj2, m2)
                            * clebsch_gordan(1, tzc, 1, tzd, tt2, mt2);
                        if w.abs() < PRUNE_EPS {
                            continue;
                        }
                        let (Some(ic), Some(id)) =
                            (space.index_of(c, mc, tzc), space.index_of(d, md, tzd))
                        else {
                            continue;
                        };
                        if ic == id {
                            continue;
                        }
                        ann.push((ic, id, w));
                    }
                }
                mc += 2;
            }
            for &(ia, ib, wc) in &cre {
                for &(ic, id, wa) in &ann {
                    out.push((ia, ib, ic, id, wc * wa));
                }
            }
            mt2 += 2;
        }
        m2 += 2;
    }
    out
}

fn effective_strength(tbme: &Tbme, convention: TbmeConvention) -> f64 {
    match convention {
        TbmeConvention::Unnormalized => tbme.v,
        TbmeConvention::Normalized => {
            let na = if tbme.a == tbme.b { std::f64::consts::SQRT_2 } else { 1.0 };
            let nc = if tbme.c == tbme.d { std::f64::consts::SQRT_2 } else { 1.0 };
            tbme.v / (na * nc)
        }
    }
}

/// Pair terms to expand for one TBME: the stored (ab;cd) term plus its
/// Hermitian conjugate (cd;ab) when the bra and ket pairs differ.
fn tbme_directions(tbme: &Tbme) -> Vec<(usize, usize, usize, usize)> {
    let fwd = (tbme.a, tbme.b, tbme.c, tbme.d);
    if (tbme.a, tbme.b) == (tbme.c, tbme.d) {
        vec![fwd]
    } else {
        vec![fwd, (tbme.c, tbme.d, tbme.a, tbme.b)]
    }
}

/// Assembles the sparse many-body Hamiltonian over `basis`.
pub fn build_hamiltonian(
    data: &InteractionData,
    space: &SingleParticleSpace,
    basis: &ConfigurationBasis,
    convention: TbmeConvention,
) -> Result<SparseHamiltonian> {
    if space.orbitals() != data.orbitals.as_slice() {
        return Err(Error::InvalidArgument(
            "single-particle space was not built from this interaction's orbitals".into(),
        ));
    }
    if basis.n_qubits() != space.n_states() {
        return Err(Error::DimensionMismatch(format!(
            "basis over {} states, space has {}",
            basis.n_qubits(),
            space.n_states()
        )));
    }

    // Expand every coupled pair term once; reuse across basis columns.
    let mut pair_terms: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    for tbme in &data.tbme {
        let v_eff = effective_strength(tbme, convention);
        for dir in tbme_directions(tbme) {
            for (ia, ib, ic, id, w) in coupled_pair_monomials(space, dir, tbme.j, tbme.t) {
                pair_terms.push((ia, ib, ic, id, v_eff * w));
            }
        }
    }

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for (col, &x) in basis.states().iter().enumerate() {
        let diag: f64 = (0..space.n_states())
            .filter(|&p| x >> p & 1 == 1)
            .map(|p| data.spe[space.states()[p].orbital])
            .sum();
        triplets.push((col, col, diag));

        for &(ia, ib, ic, id, w) in &pair_terms {
            // c†_ia c†_ib c_id c_ic |x>, rightmost operator first.
            let Some((m1, s1)) = annihilate(x, ic) else { continue };
            let Some((m2, s2)) = annihilate(m1, id) else { continue };
            let Some((m3, s3)) = create(m2, ib) else { continue };
            let Some((m4, s4)) = create(m3, ia) else { continue };
            if let Some(row) = basis.index_of(m4) {
                triplets.push((row, col, w * s1 * s2 * s3 * s4));
            }
        }
    }

    Ok(SparseHamiltonian::from_triplets(basis.dim(), triplets))
}

/// The same Hamiltonian as an explicit list of second-quantized monomials
/// over single-particle state indices, ready for a fermion-to-qubit mapping.
pub fn fermion_monomials(
    data: &InteractionData,
    space: &SingleParticleSpace,
    convention: TbmeConvention,
) -> Result<Vec<FermionMonomial>> {
    if space.orbitals() != data.orbitals.as_slice() {
        return Err(Error::InvalidArgument(
            "single-particle space was not built from this interaction's orbitals".into(),
        ));
    }
    let mut out = Vec::new();
    for (p, state) in space.states().iter().enumerate() {
        out.push(FermionMonomial::new(
            vec![(p, true), (p, false)],
            Complex64::new(data.spe[state.orbital], 0.0),
        ));
    }
    for tbme in &data.tbme {
        let v_eff = effective_strength(tbme, convention);
        for dir in tbme_directions(tbme) {
            for (ia, ib, ic, id, w) in coupled_pair_monomials(space, dir, tbme.j, tbme.t) {
                out.push(FermionMonomial::new(
                    vec![(ia, true), (ib, true), (id, false), (ic, false)],
                    Complex64::new(v_eff * w, 0.0),
                ));
            }
        }
    }
    Ok(out)
}
