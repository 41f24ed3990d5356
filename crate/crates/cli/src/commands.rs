//! Subcommand implementations. Each writes its artifacts under
//! `config.output_dir` and prints a one-line summary to stdout.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use serde_json::json;

use shellmc::fngfmc::{
    run_fngfmc_with_series, EnergyEstimate, FixedNodeParams, TrialStateHandle,
};
use shellmc::oracle;
use shellmc::pauli::{encode_occupation, map_fermion_operator, PauliOperator};
use shellmc::qsd::{
    excited_chain, InitialStatePrep, MatrixMode, SubspaceSpec, TrialStateDescription,
};
use shellmc::shell_model::{
    build_hamiltonian, enumerate_basis, fermion_monomials, parse_interaction_file,
    BasisConstraints, ConfigurationBasis, InteractionData, IsospinConvention,
    SingleParticleSpace, SparseHamiltonian, TbmeConvention,
};
use shellmc::simulator::StateVector;
use shellmc::{Error, Result};

use crate::config::{Backend, QsdMode, RunConfig, Target};

/// Everything the subcommands share, built once from the config.
pub struct Workspace {
    pub config: RunConfig,
    pub space: SingleParticleSpace,
    pub basis: ConfigurationBasis,
    pub h_sparse: SparseHamiltonian,
    pub h_pauli: PauliOperator,
    /// Single-particle energy per register mode.
    pub spe_modes: Vec<f64>,
}

/// Restricts the interaction to the listed orbital labels, remapping
/// indices; an empty list keeps everything.
fn filter_interaction(data: InteractionData, labels: &[String]) -> Result<InteractionData> {
    if labels.is_empty() {
        return Ok(data);
    }
    let mut keep = Vec::new();
    for label in labels {
        let idx = data
            .orbital_index(label)
            .ok_or_else(|| Error::InvalidArgument(format!("orbital `{label}` not in file")))?;
        keep.push(idx);
    }
    let remap: Vec<Option<usize>> = (0..data.orbitals.len())
        .map(|i| keep.iter().position(|&k| k == i))
        .collect();
    let orbitals = keep.iter().map(|&i| data.orbitals[i].clone()).collect();
    let spe = keep.iter().map(|&i| data.spe[i]).collect();
    let tbme = data
        .tbme
        .iter()
        .filter_map(|t| {
            Some(shellmc::shell_model::Tbme {
                a: remap[t.a]?,
                b: remap[t.b]?,
                c: remap[t.c]?,
                d: remap[t.d]?,
                j: t.j,
                t: t.t,
                v: t.v,
            })
        })
        .collect();
    Ok(InteractionData {
        orbitals,
        spe,
        tbme,
    })
}

pub fn build_workspace(config: RunConfig) -> Result<Workspace> {
    let data = parse_interaction_file(&config.interaction_file)?;
    let data = filter_interaction(data, &config.orbitals)?;
    let space = SingleParticleSpace::new(
        data.orbitals.clone(),
        config.species,
        IsospinConvention::default(),
    );
    let constraints = BasisConstraints {
        particle_count: Some(config.particles),
        total_m2: config.m2,
        total_tz2: config.tz2,
    };
    let basis = enumerate_basis(&space, constraints)?;
    let h_sparse = build_hamiltonian(&data, &space, &basis, TbmeConvention::default())?;
    let monos = fermion_monomials(&data, &space, TbmeConvention::default())?;
    let h_pauli = map_fermion_operator(space.n_states(), &monos, config.mapping)?;
    let spe_modes = space
        .states()
        .iter()
        .map(|s| data.spe[s.orbital])
        .collect();
    Ok(Workspace {
        config,
        space,
        basis,
        h_sparse,
        h_pauli,
        spe_modes,
    })
}

impl Workspace {
    fn out_path(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.config.output_dir)?;
        Ok(self.config.output_dir.join(name))
    }

    /// Register state for one configuration mask, honoring the mapping's
    /// occupation encoding.
    fn register_state(&self, mask: u64) -> StateVector {
        let n = self.space.n_states();
        let bits = encode_occupation(n, mask, self.config.mapping);
        StateVector::from_occupation(n, bits)
    }

    /// Basis indices sorted by diagonal energy: index 0 is the in-sector
    /// Hartree-Fock determinant, the rest are the reference states for
    /// excited runs.
    fn determinants_by_energy(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.basis.dim()).collect();
        order.sort_by(|&a, &b| {
            self.h_sparse
                .get(a, a)
                .partial_cmp(&self.h_sparse.get(b, b))
                .unwrap()
                .then(a.cmp(&b))
        });
        order
    }

    fn hf_index(&self) -> usize {
        self.determinants_by_energy()[0]
    }

    fn matrix_mode(&self, shots: usize, seed: u64) -> MatrixMode {
        match self.config.qsd_mode {
            QsdMode::Exact => MatrixMode::Exact,
            QsdMode::Shadow => MatrixMode::Shadow {
                n_shots: shots,
                ensemble: self.config.ensemble,
                seed,
            },
        }
    }

    fn evolution_backend(&self) -> shellmc::qsd::EvolutionBackend {
        match self.config.backend {
            Backend::Exact => shellmc::qsd::EvolutionBackend::Exact,
            Backend::Trotter(dt) => shellmc::qsd::EvolutionBackend::Trotter { dt },
        }
    }

    fn n_levels(&self) -> usize {
        match self.config.target {
            Target::Ground => 1,
            Target::Excited(level) => level + 1,
        }
    }

    /// Solves the QSD chain down to the target level and returns every
    /// trial (ground first).
    pub fn solve_trials(
        &self,
        mode: &MatrixMode,
        backend: &shellmc::qsd::EvolutionBackend,
    ) -> Result<Vec<TrialStateDescription>> {
        let order = self.determinants_by_energy();
        let n_levels = self.n_levels();
        if n_levels > order.len() {
            return Err(Error::InvalidArgument(format!(
                "target level {} exceeds the sector dimension {}",
                n_levels - 1,
                order.len()
            )));
        }
        let spec = SubspaceSpec::new(
            self.config.subspace_n,
            self.config.subspace_dt,
            InitialStatePrep::HartreeFock,
        )?;
        let runs: Vec<(StateVector, SubspaceSpec)> = order[..n_levels]
            .iter()
            .map(|&i| (self.register_state(self.basis.state(i)), spec.clone()))
            .collect();
        excited_chain(
            &self.h_pauli,
            &runs,
            mode,
            backend,
            self.config.qsd_threshold,
        )
    }

    fn gfmc_params(&self, seed: u64) -> Result<FixedNodeParams> {
        Ok(FixedNodeParams {
            lambda: self.config.lambda,
            gamma: self.config.gamma,
            n_walkers: self.config.walkers,
            n_steps: self.config.steps,
            equilibration: self.config.equilibration,
            seed,
            n_workers: RunConfig::n_workers()?,
            energy_operator: self.config.energy_operator,
        })
    }

    /// Classical trial/initial vector: the reference determinant of the
    /// target level.
    fn classical_vector(&self) -> Vec<f64> {
        let idx = self.determinants_by_energy()[self.n_levels() - 1];
        let mut v = vec![0.0; self.basis.dim()];
        v[idx] = 1.0;
        v
    }

    fn encoded_basis_masks(&self) -> Vec<u64> {
        let n = self.space.n_states();
        self.basis
            .states()
            .iter()
            .map(|&m| encode_occupation(n, m, self.config.mapping))
            .collect()
    }

    fn run_gfmc(
        &self,
        trial: &TrialStateHandle,
        seed: u64,
    ) -> Result<(EnergyEstimate, Vec<(f64, f64)>)> {
        let params = self.gfmc_params(seed)?;
        let initial = self.classical_vector();
        let masks = self.encoded_basis_masks();
        run_fngfmc_with_series(&self.h_sparse, &params, trial, &initial, Some(&masks))
    }
}

const CSV_VERSION: &str = "shellmc-csv v1";

fn write_csv(path: &PathBuf, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {CSV_VERSION} {name}")?;
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

/// Running-estimate rows from a per-step (num, den) series: cumulative
/// ratio with a naive streaming standard error.
fn cumulative_rows(curve: &str, series: &[(f64, f64)], walkers: usize) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(series.len());
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for (step, &(n_k, d_k)) in series.iter().enumerate() {
        num += n_k;
        den += d_k;
        let e = num / den;
        // linearized per-step ratio fluctuations around the running value
        let m = (step + 1) as f64;
        let d_mean = den / m;
        let var: f64 = series[..=step]
            .iter()
            .map(|&(n_i, d_i)| {
                let delta = (n_i - e * d_i) / d_mean;
                delta * delta
            })
            .sum::<f64>()
            / (m - 1.0).max(1.0);
        let se = (var / m).sqrt();
        rows.push(vec![
            curve.to_string(),
            step.to_string(),
            fmt(e),
            fmt(se),
            ((step + 1) * walkers).to_string(),
        ]);
    }
    rows
}

pub fn cmd_build_ham(ws: &Workspace) -> Result<()> {
    let mut triplets = Vec::new();
    for r in 0..ws.h_sparse.dim() {
        for &(c, v) in ws.h_sparse.row(r) {
            triplets.push(json!([r, c, v]));
        }
    }
    let out = ws.out_path("ham.json")?;
    let doc = json!({
        "dim": ws.h_sparse.dim(),
        "n_qubits": ws.basis.n_qubits(),
        "n_nonzero": ws.h_sparse.n_nonzero(),
        "basis_states": ws.basis.states(),
        "triplets": triplets,
    });
    serde_json::to_writer_pretty(BufWriter::new(File::create(&out)?), &doc)?;
    println!(
        "build-ham: dim {} over {} modes, {} nonzeros -> {}",
        ws.h_sparse.dim(),
        ws.basis.n_qubits(),
        ws.h_sparse.n_nonzero(),
        out.display()
    );
    Ok(())
}

pub fn cmd_exact(ws: &Workspace, levels: usize) -> Result<()> {
    let k = levels.min(ws.h_sparse.dim());
    let spectrum = oracle::exact_spectrum(&ws.h_sparse, k)?;
    let out = ws.out_path("exact.json")?;
    let doc = json!({ "eigenvalues": spectrum.eigenvalues });
    serde_json::to_writer_pretty(BufWriter::new(File::create(&out)?), &doc)?;
    println!(
        "exact: lowest {k} eigenvalue(s) {:?} -> {}",
        spectrum.eigenvalues,
        out.display()
    );
    Ok(())
}

pub fn cmd_qsd(ws: &Workspace) -> Result<()> {
    let mode = ws.matrix_mode(ws.config.shots, ws.config.shadow_seed);
    let trials = ws.solve_trials(&mode, &ws.evolution_backend())?;
    let out = ws.out_path("qsd.json")?;
    let doc = json!({
        "energies": trials.iter().map(|t| t.energy).collect::<Vec<_>>(),
        "target_energy": trials.last().unwrap().energy,
        "coefficients": trials
            .last()
            .unwrap()
            .coefficients
            .iter()
            .map(|c| [c.re, c.im])
            .collect::<Vec<_>>(),
        "mode": match ws.config.qsd_mode {
            QsdMode::Exact => "exact",
            QsdMode::Shadow => "shadow",
        },
        "shots": ws.config.shots,
        "subspace_n": ws.config.subspace_n,
        "subspace_dt": ws.config.subspace_dt,
    });
    serde_json::to_writer_pretty(BufWriter::new(File::create(&out)?), &doc)?;
    println!(
        "qsd: target energy {:.6} ({} level(s)) -> {}",
        trials.last().unwrap().energy,
        trials.len(),
        out.display()
    );
    Ok(())
}

pub fn cmd_gfmc(ws: &Workspace) -> Result<()> {
    let trial = TrialStateHandle::ClassicalVector(ws.classical_vector());
    let (est, series) = ws.run_gfmc(&trial, ws.config.gfmc_seed)?;
    let rows = cumulative_rows("classical", &series, ws.config.walkers);
    write_csv(
        &ws.out_path("gfmc_steps.csv")?,
        "gfmc-steps",
        &["curve", "step", "energy", "stderr", "n_samples"],
        &rows,
    )?;
    let out = ws.out_path("gfmc.json")?;
    serde_json::to_writer_pretty(BufWriter::new(File::create(&out)?), &est)?;
    println!(
        "gfmc: E = {:.6} +- {:.6} ({} samples) -> {}",
        est.value,
        est.stderr,
        est.n_samples,
        out.display()
    );
    Ok(())
}

pub fn cmd_pipeline(ws: &Workspace) -> Result<()> {
    let level = ws.n_levels() - 1;
    let spectrum = oracle::exact_spectrum(&ws.h_sparse, level + 1)?;
    let e_exact = spectrum.eigenvalues[level];

    let mode = ws.matrix_mode(ws.config.shots, ws.config.shadow_seed);
    let trials = ws.solve_trials(&mode, &ws.evolution_backend())?;
    let quantum_trial = TrialStateHandle::QuantumShadow {
        trial: trials.last().unwrap().clone(),
        phi_ref: ws.register_state(ws.basis.state(ws.hf_index())),
    };
    let classical_trial = TrialStateHandle::ClassicalVector(ws.classical_vector());

    let (c_est, c_series) = ws.run_gfmc(&classical_trial, ws.config.gfmc_seed)?;
    let (q_est, q_series) = ws.run_gfmc(&quantum_trial, ws.config.gfmc_seed)?;

    let mut rows = cumulative_rows("classical", &c_series, ws.config.walkers);
    rows.extend(cumulative_rows("quantum", &q_series, ws.config.walkers));
    rows.push(vec![
        "exact".to_string(),
        "0".to_string(),
        fmt(e_exact),
        fmt(0.0),
        "0".to_string(),
    ]);
    write_csv(
        &ws.out_path("pipeline.csv")?,
        "pipeline",
        &["curve", "step", "energy", "stderr", "n_samples"],
        &rows,
    )?;

    let out = ws.out_path("summary.json")?;
    let doc = json!({
        "exact": e_exact,
        "qsd_energies": trials.iter().map(|t| t.energy).collect::<Vec<_>>(),
        "classical": c_est,
        "quantum": q_est,
        "classical_abs_bias": (c_est.value - e_exact).abs(),
        "quantum_abs_bias": (q_est.value - e_exact).abs(),
    });
    serde_json::to_writer_pretty(BufWriter::new(File::create(&out)?), &doc)?;
    println!(
        "pipeline: exact {:.6}, classical {:.6} +- {:.6}, quantum {:.6} +- {:.6} -> {}",
        e_exact,
        c_est.value,
        c_est.stderr,
        q_est.value,
        q_est.stderr,
        out.display()
    );
    Ok(())
}

fn mixed_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut x = base ^ a.wrapping_mul(0x9E3779B97F4A7C15) ^ b.wrapping_mul(0xC2B2AE3D27D4EB4F);
    x ^= x >> 33;
    x = x.wrapping_mul(0xD6E8FEB86659FD93);
    x ^= x >> 32;
    x
}

pub fn cmd_sweep_shots(ws: &Workspace) -> Result<()> {
    let shots_list = if ws.config.shots_list.is_empty() {
        vec![100, 1000, 100_000]
    } else {
        ws.config.shots_list.clone()
    };
    if ws.config.qsd_mode != QsdMode::Shadow {
        return Err(Error::InvalidArgument(
            "sweep-shots requires qsd.mode = shadow".into(),
        ));
    }
    let backend = ws.evolution_backend();
    let mut rows = Vec::new();
    for &shots in &shots_list {
        let mut energies = Vec::new();
        let mut samples = 0usize;
        for rep in 0..ws.config.sweep_repeats {
            let seed = mixed_seed(ws.config.shadow_seed, shots as u64, rep as u64);
            let mode = ws.matrix_mode(shots, seed);
            let trials = ws.solve_trials(&mode, &backend)?;
            let trial = TrialStateHandle::QuantumShadow {
                trial: trials.last().unwrap().clone(),
                phi_ref: ws.register_state(ws.basis.state(ws.hf_index())),
            };
            // fixed gfmc seed: the band isolates the shadow-shot noise
            let (est, _) = ws.run_gfmc(&trial, ws.config.gfmc_seed)?;
            energies.push(est.value);
            samples = est.n_samples;
        }
        let n = energies.len() as f64;
        let mean = energies.iter().sum::<f64>() / n;
        let band = (energies.iter().map(|e| (e - mean).powi(2)).sum::<f64>()
            / (n - 1.0).max(1.0))
        .sqrt();
        rows.push(vec![
            shots.to_string(),
            fmt(mean),
            fmt(band / n.sqrt()),
            fmt(band),
            ws.config.sweep_repeats.to_string(),
            samples.to_string(),
        ]);
    }
    let path = ws.out_path("sweep_shots.csv")?;
    write_csv(
        &path,
        "sweep-shots",
        &["shots", "energy", "stderr", "band", "repeats", "n_samples"],
        &rows,
    )?;
    println!("sweep-shots: {} setting(s) -> {}", rows.len(), path.display());
    Ok(())
}

pub fn cmd_sweep_trotter(ws: &Workspace) -> Result<()> {
    let dt_list = if ws.config.trotter_dt_list.is_empty() {
        vec![0.25, 0.1, 0.05, 0.025]
    } else {
        ws.config.trotter_dt_list.clone()
    };
    // Trotterization error is isolated by holding the matrix mode exact.
    let mode = MatrixMode::Exact;
    let reference = ws.solve_trials(&mode, &shellmc::qsd::EvolutionBackend::Exact)?;
    let e_ref = reference.last().unwrap().energy;
    let mut rows = Vec::new();
    for &dt in &dt_list {
        let trials = ws.solve_trials(&mode, &shellmc::qsd::EvolutionBackend::Trotter { dt })?;
        let e = trials.last().unwrap().energy;
        rows.push(vec![
            fmt(dt),
            fmt(e),
            fmt((e - e_ref).abs()),
            fmt(0.0),
            "1".to_string(),
        ]);
    }
    let path = ws.out_path("sweep_trotter.csv")?;
    write_csv(
        &path,
        "sweep-trotter",
        &["trotter_dt", "energy", "abs_diff_vs_exact_backend", "stderr", "n_samples"],
        &rows,
    )?;
    println!(
        "sweep-trotter: reference {:.6}, {} setting(s) -> {}",
        e_ref,
        rows.len(),
        path.display()
    );
    Ok(())
}
