use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::SingleParticleSpace;

/// Optional conserved-quantity filters applied when enumerating the basis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisConstraints {
    pub particle_count: Option<u32>,
    pub total_m2: Option<i32>,
    pub total_tz2: Option<i32>,
}

/// A many-body configuration basis: sorted, duplicate-free occupation masks
/// over the single-particle states, with O(1) inverse lookup.
///
/// Bit `p` of a mask is the occupation of single-particle state `p` in the
/// owning [`SingleParticleSpace`] ordering.
#[derive(Debug, Clone)]
pub struct ConfigurationBasis {
    n_states: usize,
    states: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl ConfigurationBasis {
    pub fn n_qubits(&self) -> usize {
        self.n_states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, i: usize) -> u64 {
        self.states[i]
    }

    pub fn index_of(&self, mask: u64) -> Option<usize> {
        self.index.get(&mask).copied()
    }
}

/// Enumerates all occupation masks satisfying the constraints, ascending.
///
/// An empty result is an error, not an empty basis: every downstream
/// consumer (Hamiltonian build, GFMC walk) requires at least one state.
pub fn enumerate_basis(
    space: &SingleParticleSpace,
    constraints: BasisConstraints,
) -> Result<ConfigurationBasis> {
    let n = space.n_states();
    if n == 0 || n > 63 {
        return Err(Error::InvalidArgument(format!(
            "single-particle space has {n} states; supported range is 1..=63"
        )));
    }
    let keep = |mask: u64| -> bool {
        constraints
            .total_m2
            .map_or(true, |m2| space.total_m2(mask) == m2)
            && constraints
                .total_tz2
                .map_or(true, |tz2| space.total_tz2(mask) == tz2)
    };

    let mut states = Vec::new();
    match constraints.particle_count {
        Some(0) => {
            if keep(0) {
                states.push(0);
            }
        }
        Some(k) => {
            if (k as usize) <= n {
                // Gosper's hack: next mask with the same popcount.
                let mut mask: u64 = (1u64 << k) - 1;
                let limit: u64 = 1u64 << n;
                while mask < limit {
                    if keep(mask) {
                        states.push(mask);
                    }
                    let c = mask & mask.wrapping_neg();
                    let r = mask + c;
                    if c == 0 || r >= limit {
                        break;
                    }
                    mask = (((r ^ mask) >> 2) / c) | r;
                }
            }
        }
        None => {
            if n > 28 {
                return Err(Error::InvalidArgument(
                    "unconstrained enumeration over more than 28 states is not supported".into(),
                ));
            }
            for mask in 0..(1u64 << n) {
                if keep(mask) {
                    states.push(mask);
                }
            }
        }
    }

    if states.is_empty() {
        return Err(Error::EmptyBasis);
    }
    let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    Ok(ConfigurationBasis {
        n_states: n,
        states,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shell_model::{Orbital, Species};

    fn sd_neutrons() -> SingleParticleSpace {
        let orbitals = vec![
            Orbital::parse("0d5/2").unwrap(),
            Orbital::parse("1s1/2").unwrap(),
            Orbital::parse("0d3/2").unwrap(),
        ];
        SingleParticleSpace::new(orbitals, Species::Neutrons, Default::default())
    }

    #[test]
    fn one_particle_in_two_states() {
        let space = SingleParticleSpace::new(
            vec![Orbital::parse("0s1/2").unwrap()],
            Species::Neutrons,
            Default::default(),
        );
        let basis = enumerate_basis(
            &space,
            BasisConstraints {
                particle_count: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(basis.states(), &[0b01, 0b10]);
    }

    #[test]
    fn full_shell_single_state() {
        let space = SingleParticleSpace::new(
            vec![Orbital::parse("0p3/2").unwrap()],
            Species::Neutrons,
            Default::default(),
        );
        let basis = enumerate_basis(
            &space,
            BasisConstraints {
                particle_count: Some(4),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(basis.states(), &[0b1111]);
    }

    #[test]
    fn sd_two_neutrons_m0_matches_brute_force() {
        let space = sd_neutrons();
        let basis = enumerate_basis(
            &space,
            BasisConstraints {
                particle_count: Some(2),
                total_m2: Some(0),
                ..Default::default()
            },
        )
        .unwrap();
        // Independent brute force over all C(12,2) = 66 pairs.
        let mut count = 0;
        for p in 0..12 {
            for q in (p + 1)..12 {
                let mask = (1u64 << p) | (1u64 << q);
                if space.total_m2(mask) == 0 {
                    count += 1;
                }
            }
        }
        assert!(count > 0);
        assert_eq!(basis.dim(), count);
        assert!(basis.states().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn empty_basis_is_an_error() {
        let space = sd_neutrons();
        let result = enumerate_basis(
            &space,
            BasisConstraints {
                particle_count: Some(1),
                total_m2: Some(99),
                ..Default::default()
            },
        );
        assert!(matches!(result, Err(Error::EmptyBasis)));
    }

    #[test]
    fn index_is_inverse_of_list() {
        let space = sd_neutrons();
        let basis = enumerate_basis(
            &space,
            BasisConstraints {
                particle_count: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        for (i, &s) in basis.states().iter().enumerate() {
            assert_eq!(basis.index_of(s), Some(i));
        }
    }
}
