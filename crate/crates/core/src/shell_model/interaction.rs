use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::Orbital;

/// One coupled two-body matrix element V_JT(ab;cd).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tbme {
    /// Orbital indices into [`InteractionData::orbitals`], with a <= b and
    /// c <= d enforced at parse time.
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
    /// Coupled angular momentum (not a twice-value).
    pub j: u32,
    /// Coupled isospin, 0 or 1.
    pub t: u32,
    /// Matrix element in MeV.
    pub v: f64,
}

/// Parsed interaction file: orbital list, single-particle energies, and
/// coupled two-body matrix elements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionData {
    pub orbitals: Vec<Orbital>,
    /// Single-particle energy (MeV) per orbital, indexed like `orbitals`.
    pub spe: Vec<f64>,
    pub tbme: Vec<Tbme>,
}

impl InteractionData {
    pub fn orbital_index(&self, label: &str) -> Option<usize> {
        self.orbitals.iter().position(|o| o.label == label)
    }
}

/// Parses the `SPE`/`TBME` interaction grammar from a file.
///
/// Grammar (whitespace separated, `#` starts a comment):
///
/// ```text
/// SPE  <label> <energy>
/// TBME <a> <b> <c> <d> <J> <T> <V>
/// ```
pub fn parse_interaction_file(path: impl AsRef<Path>) -> Result<InteractionData> {
    let text = std::fs::read_to_string(path)?;
    parse_interaction_str(&text)
}

pub fn parse_interaction_str(text: &str) -> Result<InteractionData> {
    let mut orbitals: Vec<Orbital> = Vec::new();
    let mut labels: HashMap<String, usize> = HashMap::new();
    let mut spe: Vec<f64> = Vec::new();
    let mut tbme: Vec<Tbme> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let err = |msg: String| Error::Parse { line, msg };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields[0] {
            "SPE" => {
                if fields.len() != 3 {
                    return Err(err("SPE expects: SPE <label> <energy>".into()));
                }
                let orbital = Orbital::parse(fields[1])
                    .map_err(|e| err(e.to_string()))?;
                let energy: f64 = fields[2]
                    .parse()
                    .map_err(|_| err(format!("bad energy '{}'", fields[2])))?;
                if labels.contains_key(&orbital.label) {
                    return Err(err(format!("duplicate SPE for orbital {}", orbital.label)));
                }
                labels.insert(orbital.label.clone(), orbitals.len());
                orbitals.push(orbital);
                spe.push(energy);
            }
            "TBME" => {
                if fields.len() != 8 {
                    return Err(err("TBME expects: TBME <a> <b> <c> <d> <J> <T> <V>".into()));
                }
                let idx = |label: &str| -> Result<usize> {
                    labels.get(label).copied().ok_or_else(|| Error::Parse {
                        line,
                        msg: format!("unknown orbital label '{label}' (no SPE line precedes it)"),
                    })
                };
                let (mut a, mut b) = (idx(fields[1])?, idx(fields[2])?);
                let (mut c, mut d) = (idx(fields[3])?, idx(fields[4])?);
                let j: u32 = fields[5]
                    .parse()
                    .map_err(|_| err(format!("bad J '{}'", fields[5])))?;
                let t: u32 = fields[6]
                    .parse()
                    .map_err(|_| err(format!("bad T '{}'", fields[6])))?;
                let v: f64 = fields[7]
                    .parse()
                    .map_err(|_| err(format!("bad V '{}'", fields[7])))?;
                if t > 1 {
                    return Err(err(format!("T must be 0 or 1, got {t}")));
                }
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                if c > d {
                    std::mem::swap(&mut c, &mut d);
                }
                let tri = |x: usize, y: usize| -> bool {
                    let (jx, jy) = (orbitals[x].j2 as i32, orbitals[y].j2 as i32);
                    let jj = 2 * j as i32;
                    jj >= (jx - jy).abs() && jj <= jx + jy
                };
                if !tri(a, b) || !tri(c, d) {
                    return Err(err(format!(
                        "J={j} violates the triangle rule for ({}, {}) or ({}, {})",
                        orbitals[a].label, orbitals[b].label, orbitals[c].label, orbitals[d].label
                    )));
                }
                tbme.push(Tbme { a, b, c, d, j, t, v });
            }
            other => {
                return Err(err(format!("unknown record type '{other}'")));
            }
        }
    }

    Ok(InteractionData {
        orbitals,
        spe,
        tbme,
    })
}
