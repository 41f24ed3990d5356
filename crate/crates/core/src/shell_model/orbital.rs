use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A spherical single-particle orbital, e.g. `0d5/2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Orbital {
    pub label: String,
    /// Radial quantum number.
    pub n: u32,
    /// Orbital angular momentum.
    pub l: u32,
    /// Twice the total angular momentum (odd).
    pub j2: u32,
}

const L_LETTERS: &[(char, u32)] = &[('s', 0), ('p', 1), ('d', 2), ('f', 3), ('g', 4)];

impl Orbital {
    /// Parses a label of the form `<n><l-letter><j2>/2`, e.g. `1s1/2`.
    pub fn parse(label: &str) -> Result<Orbital> {
        let bad = |msg: &str| Error::InvalidArgument(format!("orbital label '{label}': {msg}"));
        let letter_pos = label
            .char_indices()
            .find(|(_, c)| c.is_ascii_alphabetic())
            .ok_or_else(|| bad("missing l letter"))?
            .0;
        let n: u32 = label[..letter_pos]
            .parse()
            .map_err(|_| bad("bad radial quantum number"))?;
        let letter = label[letter_pos..].chars().next().unwrap();
        let l = L_LETTERS
            .iter()
            .find(|(c, _)| *c == letter)
            .map(|(_, l)| *l)
            .ok_or_else(|| bad("unknown l letter (expected one of s,p,d,f,g)"))?;
        let rest = &label[letter_pos + 1..];
        let j2: u32 = rest
            .strip_suffix("/2")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("expected trailing <j2>/2"))?;
        if j2 % 2 == 0 || j2 < 1 {
            return Err(bad("j2 must be a positive odd integer"));
        }
        if !(j2 == 2 * l + 1 || (l > 0 && j2 == 2 * l - 1)) {
            return Err(bad("j2 must be 2l-1 or 2l+1"));
        }
        Ok(Orbital {
            label: label.to_string(),
            n,
            l,
            j2,
        })
    }

    /// Number of magnetic substates (per isospin species).
    pub fn degeneracy(&self) -> u32 {
        self.j2 + 1
    }
}

impl fmt::Display for Orbital {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Which nucleon species populate the single-particle space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    Neutrons,
    Protons,
    Both,
}

/// Sign convention for the isospin projection.
///
/// The paper never states one; nuclear-structure codes disagree, so it is
/// configurable. `NeutronPositive` (tz2 = +1 for a neutron) is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum IsospinConvention {
    #[default]
    NeutronPositive,
    ProtonPositive,
}

impl IsospinConvention {
    pub fn neutron_tz2(self) -> i32 {
        match self {
            IsospinConvention::NeutronPositive => 1,
            IsospinConvention::ProtonPositive => -1,
        }
    }
}

/// One m-scheme single-particle state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SingleParticleState {
    /// Index into the owning space's orbital list.
    pub orbital: usize,
    /// Twice the angular-momentum projection.
    pub m2: i32,
    /// Twice the isospin projection.
    pub tz2: i32,
}

/// The ordered list of single-particle states the many-body basis is built
/// over. The ordering — (tz2, orbital index, m2), ascending — is fixed
/// because all fermionic phase conventions depend on it.
#[derive(Debug, Clone)]
pub struct SingleParticleSpace {
    orbitals: Vec<Orbital>,
    states: Vec<SingleParticleState>,
    index: HashMap<SingleParticleState, usize>,
    convention: IsospinConvention,
}

impl SingleParticleSpace {
    pub fn new(orbitals: Vec<Orbital>, species: Species, convention: IsospinConvention) -> Self {
        let neutron = convention.neutron_tz2();
        let tz_values: Vec<i32> = match species {
            Species::Neutrons => vec![neutron],
            Species::Protons => vec![-neutron],
            Species::Both => vec![-1, 1],
        };
        let mut states = Vec::new();
        let mut tz_sorted = tz_values;
        tz_sorted.sort_unstable();
        for &tz2 in &tz_sorted {
            for (orbital, orb) in orbitals.iter().enumerate() {
                let j2 = orb.j2 as i32;
                let mut m2 = -j2;
                while m2 <= j2 {
                    states.push(SingleParticleState { orbital, m2, tz2 });
                    m2 += 2;
                }
            }
        }
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        SingleParticleSpace {
            orbitals,
            states,
            index,
            convention,
        }
    }

    pub fn orbitals(&self) -> &[Orbital] {
        &self.orbitals
    }

    pub fn states(&self) -> &[SingleParticleState] {
        &self.states
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn convention(&self) -> IsospinConvention {
        self.convention
    }

    pub fn index_of(&self, orbital: usize, m2: i32, tz2: i32) -> Option<usize> {
        self.index
            .get(&SingleParticleState { orbital, m2, tz2 })
            .copied()
    }

    /// Twice the total angular-momentum projection of an occupation mask.
    pub fn total_m2(&self, mask: u64) -> i32 {
        self.states
            .iter()
            .enumerate()
            .filter(|(p, _)| mask >> p & 1 == 1)
            .map(|(_, s)| s.m2)
            .sum()
    }

    /// Twice the total isospin projection of an occupation mask.
    pub fn total_tz2(&self, mask: u64) -> i32 {
        self.states
            .iter()
            .enumerate()
            .filter(|(p, _)| mask >> p & 1 == 1)
            .map(|(_, s)| s.tz2)
            .sum()
    }
}
