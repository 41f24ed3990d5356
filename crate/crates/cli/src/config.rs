//! Flat `key = value` run configuration with dotted section keys.
//!
//! The format is deliberately dumb: one assignment per line, `#` comments,
//! later assignments win. Lists are comma separated. Every field of
//! [`RunConfig`] maps to one key, so diffs between experiment configs stay
//! one line per changed knob.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use shellmc::pauli::MappingScheme;
use shellmc::shadows::Ensemble;
use shellmc::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Ground,
    Excited(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    Exact,
    Trotter(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QsdMode {
    Exact,
    Shadow,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub interaction_file: PathBuf,
    /// Orbital labels to keep; empty means every orbital in the file.
    pub orbitals: Vec<String>,
    pub species: shellmc::shell_model::Species,
    pub particles: u32,
    pub m2: Option<i32>,
    pub tz2: Option<i32>,
    pub target: Target,
    pub mapping: MappingScheme,
    pub subspace_n: usize,
    pub subspace_dt: f64,
    pub backend: Backend,
    pub qsd_mode: QsdMode,
    pub qsd_threshold: Option<f64>,
    pub ensemble: Ensemble,
    pub shots: usize,
    pub shots_list: Vec<usize>,
    pub trotter_dt_list: Vec<f64>,
    pub shadow_seed: u64,
    pub lambda: Option<f64>,
    pub gamma: f64,
    pub walkers: usize,
    pub steps: usize,
    pub equilibration: Option<usize>,
    pub gfmc_seed: u64,
    pub energy_operator: shellmc::fngfmc::EnergyOperator,
    pub sweep_repeats: usize,
    pub output_dir: PathBuf,
}

fn parse_map(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            });
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

struct Fields {
    map: BTreeMap<String, String>,
}

impl Fields {
    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| bad(key, s)),
        }
    }

    fn parse_opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some("auto") => Ok(None),
            Some(s) => s.parse().map(Some).map_err(|_| bad(key, s)),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some(s) => s
                .split(',')
                .map(|p| p.trim().parse().map_err(|_| bad(key, s)))
                .collect(),
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::InvalidArgument(format!("config key `{key}`: cannot parse `{value}`"))
}

impl RunConfig {
    pub fn from_str_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig> {
        let mut map = parse_map(text)?;
        for kv in overrides {
            let Some((k, v)) = kv.split_once('=') else {
                return Err(Error::InvalidArgument(format!(
                    "override `{kv}` is not of the form key=value"
                )));
            };
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let f = Fields { map };

        let interaction_file = PathBuf::from(
            f.get("interaction.file")
                .ok_or_else(|| Error::InvalidArgument("missing key `interaction.file`".into()))?,
        );
        let species = match f.get("space.species").unwrap_or("neutrons") {
            "neutrons" => shellmc::shell_model::Species::Neutrons,
            "protons" => shellmc::shell_model::Species::Protons,
            "both" => shellmc::shell_model::Species::Both,
            other => return Err(bad("space.species", other)),
        };
        let target = match f.get("target.kind").unwrap_or("ground") {
            "ground" => Target::Ground,
            "excited" => Target::Excited(f.parse("target.level", 1usize)?),
            other => return Err(bad("target.kind", other)),
        };
        let mapping = match f.get("mapping.scheme").unwrap_or("jordan-wigner") {
            "jordan-wigner" => MappingScheme::JordanWigner,
            "bravyi-kitaev" => MappingScheme::BravyiKitaev,
            other => return Err(bad("mapping.scheme", other)),
        };
        let backend = match f.get("evolution.backend").unwrap_or("exact") {
            "exact" => Backend::Exact,
            "trotter" => Backend::Trotter(f.parse("evolution.trotter_dt", 0.05f64)?),
            other => return Err(bad("evolution.backend", other)),
        };
        let qsd_mode = match f.get("qsd.mode").unwrap_or("exact") {
            "exact" => QsdMode::Exact,
            "shadow" => QsdMode::Shadow,
            other => return Err(bad("qsd.mode", other)),
        };
        let ensemble = match f.get("shadow.ensemble").unwrap_or("local") {
            "local" => Ensemble::Local,
            "global" => Ensemble::Global,
            other => return Err(bad("shadow.ensemble", other)),
        };
        let energy_operator = match f.get("gfmc.operator").unwrap_or("true") {
            "true" => shellmc::fngfmc::EnergyOperator::True,
            "effective" => shellmc::fngfmc::EnergyOperator::Effective,
            other => return Err(bad("gfmc.operator", other)),
        };

        Ok(RunConfig {
            interaction_file,
            orbitals: f.list("space.orbitals")?,
            species,
            particles: f.parse("sector.particles", 2u32)?,
            m2: f.parse_opt("sector.m2")?,
            tz2: f.parse_opt("sector.tz2")?,
            target,
            mapping,
            subspace_n: f.parse("subspace.n", 4usize)?,
            subspace_dt: f.parse("subspace.dt", 0.2f64)?,
            backend,
            qsd_mode,
            qsd_threshold: f.parse_opt("qsd.threshold")?,
            ensemble,
            shots: f.parse("shadow.shots", 100_000usize)?,
            shots_list: f.list("shadow.shots_list")?,
            trotter_dt_list: f.list("trotter.dt_list")?,
            shadow_seed: f.parse("shadow.seed", 7u64)?,
            lambda: f.parse_opt("gfmc.lambda")?,
            gamma: f.parse("gfmc.gamma", 0.0f64)?,
            walkers: f.parse("gfmc.walkers", 200usize)?,
            steps: f.parse("gfmc.steps", 2000usize)?,
            equilibration: f.parse_opt("gfmc.equilibration")?,
            gfmc_seed: f.parse("gfmc.seed", 1u64)?,
            energy_operator,
            sweep_repeats: f.parse("sweep.repeats", 5usize)?,
            output_dir: PathBuf::from(f.get("output.dir").unwrap_or("out")),
        })
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidArgument(format!("cannot read config {}: {e}", path.display()))
        })?;
        let cfg = Self::from_str_with_overrides(&text, overrides)?;
        if !cfg.interaction_file.exists() {
            return Err(Error::InvalidArgument(format!(
                "interaction file {} does not exist",
                cfg.interaction_file.display()
            )));
        }
        Ok(cfg)
    }

    /// Worker count: the SHELLMC_WORKERS environment variable, default 1.
    pub fn n_workers() -> Result<usize> {
        match std::env::var("SHELLMC_WORKERS") {
            Err(_) => Ok(1),
            Ok(s) => s
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::InvalidArgument(format!("SHELLMC_WORKERS=`{s}` invalid"))),
        }
    }
}
