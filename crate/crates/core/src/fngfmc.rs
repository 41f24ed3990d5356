//! Fixed-node Green's function Monte Carlo.
//!
//! The propagator G^fn keeps the negative off-diagonals of H (as positive
//! matrix elements), moves the positive ones onto the diagonal through the
//! sign-flip potential, and is therefore entrywise nonnegative: walkers
//! sample its columns without a sign problem. The price is the fixed-node
//! bias, an upper bound controlled by the quality of the trial state used
//! in the mixed estimator.

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qsd::TrialStateDescription;
use crate::shell_model::SparseHamiltonian;
use crate::simulator::StateVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Walker {
    pub config: usize,
    pub weight: f64,
}

/// Which operator the mixed estimator propagates in the numerator.
///
/// `True` is the physical Hamiltonian: the estimate carries the
/// trial-dependent fixed-node bias. `Effective` is Λ·I − G^fn, whose
/// dominant-eigenvector projection makes the estimate converge to the
/// lowest eigenvalue of the effective fixed-node Hamiltonian for any trial
/// with nonzero overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EnergyOperator {
    #[default]
    True,
    Effective,
}

#[derive(Debug, Clone)]
pub struct FixedNodeParams {
    /// Propagator shift; `None` applies the default policy
    /// max_x(H_xx + (1+γ)V_sf(x)) + 1.0.
    pub lambda: Option<f64>,
    pub gamma: f64,
    pub n_walkers: usize,
    pub n_steps: usize,
    /// Steps discarded before accumulation; `None` means the first 10%.
    pub equilibration: Option<usize>,
    pub seed: u64,
    pub n_workers: usize,
    pub energy_operator: EnergyOperator,
}

impl FixedNodeParams {
    pub fn new(n_walkers: usize, n_steps: usize, seed: u64) -> Self {
        FixedNodeParams {
            lambda: None,
            gamma: 0.0,
            n_walkers,
            n_steps,
            equilibration: None,
            seed,
            n_workers: 1,
            energy_operator: EnergyOperator::True,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidArgument(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        if self.n_walkers == 0 || self.n_steps == 0 || self.n_workers == 0 {
            return Err(Error::InvalidArgument(
                "walker count, step count, and worker count must be positive".into(),
            ));
        }
        let equil = self.equilibration_steps();
        if equil >= self.n_steps {
            return Err(Error::InvalidArgument(format!(
                "equilibration ({equil}) consumes every step ({})",
                self.n_steps
            )));
        }
        Ok(())
    }

    pub fn equilibration_steps(&self) -> usize {
        self.equilibration.unwrap_or(self.n_steps / 10)
    }
}

/// Mixed-estimator trial state.
pub enum TrialStateHandle {
    /// Amplitudes over the configuration basis.
    ClassicalVector(Vec<f64>),
    /// A QSD trial: rho_T evaluated against a fixed reference state.
    QuantumShadow {
        trial: TrialStateDescription,
        phi_ref: StateVector,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    /// Blocking-analysis provenance: block size at the stderr plateau.
    pub note: String,
}

/// V_sf(x): sum of the positive off-diagonal elements of column x (Eq. 8).
/// H must be symmetric, which makes the column available as a row.
pub fn sign_flip_potential(h: &SparseHamiltonian, x: usize) -> f64 {
    h.row(x)
        .iter()
        .filter(|&&(c, v)| c != x && v > 0.0)
        .map(|&(_, v)| v)
        .sum()
}

fn lambda_floor(h: &SparseHamiltonian, gamma: f64) -> f64 {
    (0..h.dim())
        .map(|x| h.get(x, x) + (1.0 + gamma) * sign_flip_potential(h, x))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Default shift policy: the smallest admissible Λ plus a 1.0 margin.
pub fn default_lambda(h: &SparseHamiltonian, gamma: f64) -> f64 {
    lambda_floor(h, gamma) + 1.0
}

/// The fixed-node propagator G^fn of Eq. 7: off-diagonal −H_x'x where
/// H_x'x ≤ 0 and γ·H_x'x where positive; diagonal Λ − H_xx − (1+γ)V_sf(x).
/// Every entry is nonnegative by construction.
pub fn fixed_node_green(
    h: &SparseHamiltonian,
    lambda: f64,
    gamma: f64,
) -> Result<SparseHamiltonian> {
    if !h.is_hermitian() {
        return Err(Error::InvalidArgument(
            "fixed-node construction requires a symmetric Hamiltonian".into(),
        ));
    }
    let floor = lambda_floor(h, gamma);
    if lambda < floor - 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "lambda {lambda} too small: the diagonal goes negative below {floor}"
        )));
    }
    let dim = h.dim();
    let mut triplets = Vec::new();
    for x in 0..dim {
        for &(xp, v) in h.row(x) {
            if xp == x {
                continue;
            }
            if v <= 0.0 {
                triplets.push((xp, x, -v));
            } else if gamma > 0.0 {
                triplets.push((xp, x, gamma * v));
            }
        }
        let diag = lambda - h.get(x, x) - (1.0 + gamma) * sign_flip_potential(h, x);
        triplets.push((x, x, diag.max(0.0)));
    }
    Ok(SparseHamiltonian::from_triplets(dim, triplets))
}

/// One projection step for every walker: sample x_{k+1} from the
/// column-normalized G^fn and fold the column sum into the weight. A zero
/// column freezes the walker at weight 0.
pub fn propagate_step(g: &SparseHamiltonian, walkers: &mut [Walker], rng: &mut impl Rng) {
    for w in walkers.iter_mut() {
        if w.weight == 0.0 {
            continue;
        }
        // G^fn is symmetric (H is), so column w.config is row w.config.
        let col = g.row(w.config);
        let total: f64 = col.iter().map(|&(_, v)| v).sum();
        if total <= 0.0 {
            w.weight = 0.0;
            continue;
        }
        let dist = WeightedIndex::new(col.iter().map(|&(_, v)| v)).unwrap();
        w.config = col[dist.sample(rng)].0;
        w.weight *= total;
    }
}

/// Records the walker population after every step.
pub fn propagate(
    g: &SparseHamiltonian,
    mut walkers: Vec<Walker>,
    n_steps: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<Walker>>> {
    if walkers.is_empty() {
        return Err(Error::InvalidArgument("no walkers to propagate".into()));
    }
    let mut record = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        propagate_step(g, &mut walkers, rng);
        record.push(walkers.clone());
    }
    Ok(record)
}

/// Stochastic reconfiguration: resample `target` walkers proportional to
/// |weight|; survivors carry uniform magnitudes preserving the total
/// absolute weight, with the original signs.
pub fn population_control(
    walkers: &[Walker],
    target: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Walker>> {
    let total_abs: f64 = walkers.iter().map(|w| w.weight.abs()).sum();
    if !(total_abs > 0.0) {
        return Err(Error::Numerical(
            "population control with zero total weight".into(),
        ));
    }
    let dist = WeightedIndex::new(walkers.iter().map(|w| w.weight.abs())).unwrap();
    let unit = total_abs / target as f64;
    let out = (0..target)
        .map(|_| {
            let src = &walkers[dist.sample(rng)];
            Walker {
                config: src.config,
                weight: unit * src.weight.signum(),
            }
        })
        .collect();
    Ok(out)
}

/// Per-configuration numerator/denominator values of the mixed estimator,
/// precomputed so each walker sample is one table lookup.
struct MixedTables {
    num: Vec<Complex64>,
    den: Vec<Complex64>,
}

fn apply_complex(h: &SparseHamiltonian, v: &[Complex64]) -> Vec<Complex64> {
    (0..h.dim())
        .map(|r| h.row(r).iter().map(|&(c, hv)| v[c] * hv).sum())
        .collect()
}

fn effective_apply(
    h_or_g: &SparseHamiltonian,
    lambda: f64,
    v: &[Complex64],
) -> Vec<Complex64> {
    // (Λ I − G) v
    let gv = apply_complex(h_or_g, v);
    v.iter()
        .zip(gv)
        .map(|(&x, y)| x * lambda - y)
        .collect()
}

/// Index of the basis configuration `mask` in the full qubit register,
/// matching `StateVector::from_occupation`.
fn amplitude_index(n_qubits: usize, mask: u64) -> usize {
    let mut idx = 0usize;
    for p in 0..n_qubits {
        if mask >> p & 1 == 1 {
            idx |= 1 << (n_qubits - 1 - p);
        }
    }
    idx
}

fn mixed_tables(
    h: &SparseHamiltonian,
    g: &SparseHamiltonian,
    lambda: f64,
    trial: &TrialStateHandle,
    op: EnergyOperator,
    basis_states: Option<&[u64]>,
) -> Result<MixedTables> {
    let dim = h.dim();
    let den: Vec<Complex64> = match trial {
        TrialStateHandle::ClassicalVector(phi) => {
            if phi.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "trial vector has {} entries for dimension {dim}",
                    phi.len()
                )));
            }
            phi.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        }
        TrialStateHandle::QuantumShadow { trial, phi_ref } => {
            // den(x) = Tr[rho_T |x><phi_ref|] = <phi_ref| rho_T |x>
            let states = basis_states.ok_or_else(|| {
                Error::InvalidArgument(
                    "quantum trial requires the configuration basis states".into(),
                )
            })?;
            if states.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "{} basis states for dimension {dim}",
                    states.len()
                )));
            }
            let rho = trial.density_matrix()?;
            let n_q = phi_ref.n_qubits();
            let full = 1usize << n_q;
            if rho.nrows() != full {
                return Err(Error::DimensionMismatch(
                    "trial density and reference register sizes differ".into(),
                ));
            }
            // row vector phi_ref† rho, then pick the embedded columns
            let mut row = vec![Complex64::default(); full];
            for c in 0..full {
                let mut acc = Complex64::default();
                for r in 0..full {
                    acc += phi_ref.amplitudes()[r].conj() * rho[(r, c)];
                }
                row[c] = acc;
            }
            states
                .iter()
                .map(|&mask| row[amplitude_index(n_q, mask)])
                .collect()
        }
    };
    let num = match op {
        EnergyOperator::True => apply_complex(h, &den),
        EnergyOperator::Effective => effective_apply(g, lambda, &den),
    };
    Ok(MixedTables { num, den })
}

/// Blocking analysis of a ratio estimator over a series of per-step
/// (numerator, denominator) sums: block-doubling, stderr taken at the
/// plateau (the maximum over levels with at least 8 blocks). Returns
/// (value, stderr, plateau block size, denominator z-score).
fn blocked_ratio(series: &[(f64, f64)]) -> Result<(f64, f64, usize)> {
    let num: f64 = series.iter().map(|s| s.0).sum();
    let den: f64 = series.iter().map(|s| s.1).sum();
    // Reliability guard: the denominator accumulator must be inconsistent
    // with zero, else the ratio is meaningless.
    let n = series.len() as f64;
    let den_mean = den / n;
    let den_var =
        series.iter().map(|s| (s.1 - den_mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let den_se = (den_var / n).sqrt();
    if den.abs() <= 5.0 * den_se * n || !den.is_finite() {
        return Err(Error::Unreliable(format!(
            "denominator accumulator {den:.3e} within 5 sigma of zero (sigma {:.3e})",
            den_se * n
        )));
    }
    let value = num / den;
    let mut level: Vec<(f64, f64)> = series.to_vec();
    let mut block = 1usize;
    let mut best = (0.0f64, 1usize);
    while level.len() >= 8 {
        let m = level.len() as f64;
        // jackknife-style spread of per-block ratios around the total
        let mean_n: f64 = level.iter().map(|s| s.0).sum::<f64>() / m;
        let mean_d: f64 = level.iter().map(|s| s.1).sum::<f64>() / m;
        let var: f64 = level
            .iter()
            .map(|s| {
                // linearized ratio fluctuation delta = (n_b - E d_b)/den_mean
                let delta = (s.0 - value * s.1) / mean_d;
                delta * delta
            })
            .sum::<f64>()
            / (m - 1.0);
        let se = (var / m).sqrt();
        if se > best.0 {
            best = (se, block);
        }
        let _ = mean_n;
        level = level
            .chunks(2)
            .filter(|c| c.len() == 2)
            .map(|c| (c[0].0 + c[1].0, c[0].1 + c[1].1))
            .collect();
        block *= 2;
    }
    Ok((value, best.0, best.1))
}

fn worker_seed(seed: u64, worker: usize) -> u64 {
    let mut x = seed ^ (worker as u64 + 1).wrapping_mul(0x9E3779B97F4A7C15);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58476D1CE4E5B9);
    x ^= x >> 27;
    x
}

fn init_walkers(initial: &[f64], n_walkers: usize, rng: &mut impl Rng) -> Result<Vec<Walker>> {
    let total: f64 = initial.iter().map(|x| x.abs()).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("initial vector is zero".into()));
    }
    let dist = WeightedIndex::new(initial.iter().map(|x| x.abs())).unwrap();
    Ok((0..n_walkers)
        .map(|_| {
            let x = dist.sample(rng);
            Walker {
                config: x,
                weight: initial[x].signum(),
            }
        })
        .collect())
}

struct WorkerResult {
    series: Vec<(f64, f64)>,
}

fn run_worker(
    g: &SparseHamiltonian,
    tables: &MixedTables,
    params: &FixedNodeParams,
    initial: &[f64],
    worker: usize,
) -> Result<WorkerResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(worker_seed(params.seed, worker));
    let mut walkers = init_walkers(initial, params.n_walkers, &mut rng)?;
    let equil = params.equilibration_steps();
    let mut series = Vec::with_capacity(params.n_steps - equil);
    for step in 0..params.n_steps {
        propagate_step(g, &mut walkers, &mut rng);
        walkers = population_control(&walkers, params.n_walkers, &mut rng)?;
        // Drop the per-step global growth factor (it is the same for the
        // numerator and denominator accumulators, so it cancels in the
        // ratio); otherwise weights scale like Lambda^k and overflow.
        let scale: f64 = walkers.iter().map(|w| w.weight.abs()).sum::<f64>()
            / params.n_walkers as f64;
        for w in &mut walkers {
            w.weight /= scale;
        }
        if step < equil {
            continue;
        }
        let mut num = Complex64::default();
        let mut den = Complex64::default();
        for w in &walkers {
            num += tables.num[w.config].conj() * w.weight;
            den += tables.den[w.config].conj() * w.weight;
        }
        series.push((num.re, den.re));
    }
    Ok(WorkerResult { series })
}

/// Full fixed-node pipeline: build G^fn, propagate walker populations with
/// per-step stochastic reconfiguration on parallel workers, and fold the
/// post-equilibration trajectory into the mixed estimator with a blocking
/// stderr. Deterministic for fixed (seed, n_workers).
pub fn run_fngfmc(
    h: &SparseHamiltonian,
    params: &FixedNodeParams,
    trial: &TrialStateHandle,
    initial: &[f64],
    basis_states: Option<&[u64]>,
) -> Result<EnergyEstimate> {
    run_fngfmc_with_series(h, params, trial, initial, basis_states).map(|(est, _)| est)
}

/// As [`run_fngfmc`] but also returns the merged post-equilibration
/// per-step (numerator, denominator) series, so callers can plot the
/// running estimate against accumulated steps.
pub fn run_fngfmc_with_series(
    h: &SparseHamiltonian,
    params: &FixedNodeParams,
    trial: &TrialStateHandle,
    initial: &[f64],
    basis_states: Option<&[u64]>,
) -> Result<(EnergyEstimate, Vec<(f64, f64)>)> {
    params.validate()?;
    if initial.len() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial vector has {} entries for dimension {}",
            initial.len(),
            h.dim()
        )));
    }
    let lambda = params.lambda.unwrap_or_else(|| default_lambda(h, params.gamma));
    let g = fixed_node_green(h, lambda, params.gamma)?;
    let tables = mixed_tables(h, &g, lambda, trial, params.energy_operator, basis_states)?;
    let results: Vec<Result<WorkerResult>> = (0..params.n_workers)
        .into_par_iter()
        .map(|w| run_worker(&g, &tables, params, initial, w))
        .collect();
    let mut series = Vec::new();
    for r in results {
        series.extend(r?.series);
    }
    let n_samples = series.len() * params.n_walkers;
    let (value, stderr, block) = blocked_ratio(&series)?;
    Ok((
        EnergyEstimate {
            value,
            stderr,
            n_samples,
            note: format!("blocking plateau at block size {block}"),
        },
        series,
    ))
}

/// Convenience wrapper for mixed-estimator evaluation over an existing
/// trajectory record, mirroring the standalone propagate().
pub fn mixed_energy(
    h: &SparseHamiltonian,
    g: &SparseHamiltonian,
    lambda: f64,
    trial: &TrialStateHandle,
    trajectory: &[Vec<Walker>],
    op: EnergyOperator,
    basis_states: Option<&[u64]>,
) -> Result<EnergyEstimate> {
    let tables = mixed_tables(h, g, lambda, trial, op, basis_states)?;
    let series: Vec<(f64, f64)> = trajectory
        .iter()
        .map(|walkers| {
            // Normalize out the per-step global weight growth so steps are
            // comparable in the blocking analysis; the ratio estimate is
            // unchanged by a positive per-step rescaling.
            let scale: f64 = walkers.iter().map(|w| w.weight.abs()).sum();
            let scale = if scale > 0.0 { scale } else { 1.0 };
            let mut num = Complex64::default();
            let mut den = Complex64::default();
            for w in walkers {
                num += tables.num[w.config].conj() * (w.weight / scale);
                den += tables.den[w.config].conj() * (w.weight / scale);
            }
            (num.re, den.re)
        })
        .collect();
    let n_samples: usize = trajectory.iter().map(Vec::len).sum();
    let (value, stderr, block) = blocked_ratio(&series)?;
    Ok(EnergyEstimate {
        value,
        stderr,
        n_samples,
        note: format!("blocking plateau at block size {block}"),
    })
}
