//! Qubit encodings into Fock levels and the search for the best one.
//!
//! The search ansatz places `ψ₀` and `ψ₁` on a chosen list of levels, each
//! written in hyperspherical angles with real amplitudes. On three levels
//! this is `sin α cos β |0⟩ + sin α sin β |1⟩ + cos α |2⟩`. Orthogonality is
//! encouraged by a quadratic penalty on `⟨ψ₀|ψ₁⟩` during the simplex search
//! and enforced exactly by Gram–Schmidt before every score.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::fidelity::{average_fidelity_closed, contract_bloch_average, transfer_tensor};
use crate::fock::FockVector;
use crate::nelder_mead::{self, NelderMeadOptions};
use crate::subchannel::Subspace;
use crate::tolerance;
use crate::C64;

pub const MIN_LEVELS: usize = 2;
pub const MAX_LEVELS: usize = 6;
/// Fidelities within this distance count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

fn padded(coeffs: &[C64], dim: usize) -> Result<FockVector> {
    if coeffs.len() > dim {
        return Err(Error::domain(format!("{} coefficients exceed truncation {dim}", coeffs.len())));
    }
    let mut amps = coeffs.to_vec();
    amps.resize(dim, C64::new(0.0, 0.0));
    FockVector::new(amps)
}

/// Qubit subspace from coefficient lists `ψ₀ = Σ c_n |n⟩`, `ψ₁ = Σ d_n |n⟩`.
pub fn encoding_from_coefficients(c: &[C64], d: &[C64], dim: usize) -> Result<Subspace> {
    Subspace::new(vec![padded(c, dim)?, padded(d, dim)?])
}

/// Unit vector with `angles.len() + 1` real amplitudes. The first angle sets
/// the weight of the highest level, the last one splits `|0⟩` and `|1⟩`.
pub fn hyperspherical(angles: &[f64]) -> Vec<f64> {
    let len = angles.len() + 1;
    let mut amps = vec![0.0; len];
    let mut rest = 1.0;
    for (j, t) in angles.iter().take(len - 2).enumerate() {
        amps[len - 1 - j] = rest * t.cos();
        rest *= t.sin();
    }
    let last = angles[len - 2];
    amps[0] = rest * last.cos();
    amps[1] = rest * last.sin();
    amps
}

/// `ψ₀ = sin α cos β|0⟩ + sin α sin β|1⟩ + cos α|2⟩`, `ψ₁` likewise with
/// `(γ, δ)`; fails unless the two are orthogonal.
pub fn three_level_encoding(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Subspace> {
    let a = hyperspherical(&[alpha, beta]);
    let b = hyperspherical(&[gamma, delta]);
    let residual = alpha.sin() * beta.cos() * gamma.sin() * delta.cos()
        + alpha.sin() * beta.sin() * gamma.sin() * delta.sin()
        + alpha.cos() * gamma.cos();
    if residual.abs() > tolerance::CONSTRAINT {
        return Err(Error::Constraint { residual: residual.abs() });
    }
    Subspace::new(vec![FockVector::from_real(&a)?, FockVector::from_real(&b)?])
}

/// One point of the search ansatz.
#[derive(Debug, Clone)]
pub struct EncodingAnsatz {
    pub levels: Vec<usize>,
    pub params: Vec<f64>,
    pub complex_phases: bool,
    /// `|⟨ψ₀|ψ₁⟩|` before the Gram–Schmidt projection.
    pub constraint_residual: f64,
}

impl EncodingAnsatz {
    pub fn param_count(levels: usize, complex_phases: bool) -> usize {
        let angles = 2 * (levels - 1);
        if complex_phases {
            2 * angles
        } else {
            angles
        }
    }

    pub fn new(levels: &[usize], params: &[f64], complex_phases: bool) -> Result<Self> {
        validate_levels(levels, usize::MAX)?;
        let want = Self::param_count(levels.len(), complex_phases);
        if params.len() != want {
            return Err(Error::domain(format!(
                "ansatz on {} levels takes {want} parameters, got {}",
                levels.len(),
                params.len()
            )));
        }
        let (a, b) = frame(levels.len(), params, complex_phases);
        let residual = inner(&a, &b).norm();
        Ok(Self { levels: levels.to_vec(), params: params.to_vec(), complex_phases, constraint_residual: residual })
    }

    /// Projected, orthonormal encoding embedded in `dim` levels.
    pub fn subspace(&self, dim: usize) -> Result<Subspace> {
        validate_levels(&self.levels, dim)?;
        let (a, b) = frame(self.levels.len(), &self.params, self.complex_phases);
        project(&self.levels, &a, &b, dim)
    }
}

fn validate_levels(levels: &[usize], dim: usize) -> Result<()> {
    if !(MIN_LEVELS..=MAX_LEVELS).contains(&levels.len()) {
        return Err(Error::domain(format!("ansatz needs {MIN_LEVELS}..={MAX_LEVELS} levels, got {}", levels.len())));
    }
    for (i, &k) in levels.iter().enumerate() {
        if k >= dim {
            return Err(Error::OutOfRange { index: k, dim });
        }
        if levels[..i].contains(&k) {
            return Err(Error::domain(format!("repeated level {k}")));
        }
    }
    Ok(())
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Amplitudes of `ψ₀, ψ₁` over the ansatz levels.
fn frame(levels: usize, params: &[f64], complex_phases: bool) -> (Vec<C64>, Vec<C64>) {
    let per = levels - 1;
    let build = |angles: &[f64], phases: Option<&[f64]>| -> Vec<C64> {
        hyperspherical(angles)
            .into_iter()
            .enumerate()
            .map(|(n, r)| match phases {
                Some(ph) if n > 0 => C64::from_polar(r, ph[n - 1]),
                _ => C64::new(r, 0.0),
            })
            .collect()
    };
    if complex_phases {
        (build(&params[..per], Some(&params[2 * per..3 * per])), build(&params[per..2 * per], Some(&params[3 * per..])))
    } else {
        (build(&params[..per], None), build(&params[per..2 * per], None))
    }
}

/// Gram–Schmidt of `b` against `a`, then embedding into `dim` levels.
fn project(levels: &[usize], a: &[C64], b: &[C64], dim: usize) -> Result<Subspace> {
    let overlap = inner(a, b);
    let b_perp: Vec<C64> = b.iter().zip(a).map(|(y, x)| y - x * overlap).collect();
    let norm = b_perp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-6 {
        return Err(Error::Constraint { residual: overlap.norm() });
    }
    let mut v0 = vec![C64::new(0.0, 0.0); dim];
    let mut v1 = vec![C64::new(0.0, 0.0); dim];
    for (i, &k) in levels.iter().enumerate() {
        v0[k] = a[i];
        v1[k] = b_perp[i] / norm;
    }
    Subspace::new(vec![FockVector::new(v0)?, FockVector::new(v1)?])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Initial simplex edge, radians.
    pub initial_scale: f64,
    /// Convergence threshold on the spread of objective values.
    pub spread_tol: f64,
    /// Objective evaluations per restart.
    pub max_evals: usize,
    /// Weight of `|⟨ψ₀|ψ₁⟩|²` in the objective.
    pub penalty: f64,
    /// Exploratory: also search relative phases.
    pub complex_phases: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { initial_scale: 0.3, spread_tol: 1e-10, max_evals: 2000, penalty: 1e3, complex_phases: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartRecord {
    pub params: Vec<f64>,
    /// Fidelity of the projected encoding, `None` when projection failed.
    pub fidelity: Option<f64>,
    pub constraint_residual: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best_fidelity: f64,
    pub best_params: Vec<f64>,
    pub best_encoding: Subspace,
    pub restarts_run: usize,
    pub history: Vec<RestartRecord>,
    /// Restarts whose fidelity ties the best within [`TIE_TOLERANCE`].
    pub tied_restarts: Vec<usize>,
}

pub fn optimize_encoding(
    ch: &KrausChannel,
    levels: &[usize],
    restarts: usize,
    seed: u64,
) -> Result<OptimizationResult> {
    optimize_encoding_with(ch, levels, restarts, seed, &OptimizerConfig::default())
}

/// Multi-start simplex search; restart `r` draws its start from stream `r`
/// of a ChaCha generator keyed by `seed`, so results do not depend on
/// scheduling.
pub fn optimize_encoding_with(
    ch: &KrausChannel,
    levels: &[usize],
    restarts: usize,
    seed: u64,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    validate_levels(levels, ch.dim())?;
    if restarts == 0 {
        return Err(Error::domain("at least one restart is required"));
    }
    let dim = ch.dim();
    let n_params = EncodingAnsatz::param_count(levels.len(), config.complex_phases);
    let score = |params: &[f64]| -> Option<f64> {
        let (a, b) = frame(levels.len(), params, config.complex_phases);
        let k = project(levels, &a, &b, dim).ok()?;
        transfer_tensor(ch, &k).ok().map(|t| contract_bloch_average(&t))
    };
    let objective = |params: &[f64]| -> f64 {
        let (a, b) = frame(levels.len(), params, config.complex_phases);
        let penalty = config.penalty * inner(&a, &b).norm_sqr();
        match score(params) {
            Some(f) => -f + penalty,
            None => 1.0 + penalty,
        }
    };
    let opts = NelderMeadOptions {
        initial_scale: config.initial_scale,
        spread_tol: config.spread_tol,
        max_evals: config.max_evals,
    };

    let history: Vec<RestartRecord> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let angles = 2 * (levels.len() - 1);
            let start: Vec<f64> = (0..n_params)
                .map(|j| {
                    if j < angles {
                        rng.random_range(0.0..std::f64::consts::PI)
                    } else {
                        rng.random_range(0.0..std::f64::consts::TAU)
                    }
                })
                .collect();
            let first = nelder_mead::minimize(objective, &start, &opts);
            // one polish from the best vertex with a fresh, smaller simplex
            let remaining = opts.max_evals.saturating_sub(first.evals);
            let polished = if remaining > n_params + 1 {
                let polish =
                    NelderMeadOptions { initial_scale: opts.initial_scale * 0.1, max_evals: remaining, ..opts };
                let second = nelder_mead::minimize(objective, &first.x, &polish);
                let evals = first.evals + second.evals;
                let best = if second.fx <= first.fx { second } else { first };
                nelder_mead::Minimum { evals, ..best }
            } else {
                first
            };
            let (a, b) = frame(levels.len(), &polished.x, config.complex_phases);
            RestartRecord {
                fidelity: score(&polished.x),
                constraint_residual: inner(&a, &b).norm(),
                params: polished.x,
                evaluations: polished.evals,
            }
        })
        .collect();

    let best_index = history
        .iter()
        .enumerate()
        .filter_map(|(i, rec)| rec.fidelity.map(|f| (i, f)))
        .fold(None::<(usize, f64)>, |acc, (i, f)| match acc {
            Some((_, bf)) if bf >= f => acc,
            _ => Some((i, f)),
        })
        .ok_or_else(|| {
            let worst = history.iter().map(|r| r.constraint_residual).fold(0.0, f64::max);
            Error::OptimizationFailure(format!(
                "all {restarts} restarts ended on parallel frames (largest overlap {worst:.3e})"
            ))
        })?
        .0;

    let best = &history[best_index];
    let ansatz = EncodingAnsatz::new(levels, &best.params, config.complex_phases)?;
    let best_encoding = ansatz.subspace(dim)?;
    let best_fidelity = average_fidelity_closed(ch, &best_encoding)?.value;
    let tied_restarts = history
        .iter()
        .enumerate()
        .filter(|(_, r)| r.fidelity.is_some_and(|f| best_fidelity - f <= TIE_TOLERANCE))
        .map(|(i, _)| i)
        .collect();
    Ok(OptimizationResult {
        best_fidelity,
        best_params: best.params.clone(),
        best_encoding,
        restarts_run: restarts,
        history,
        tied_restarts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFidelity {
    pub k: usize,
    pub s: usize,
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct PairSweep {
    /// Descending by fidelity; ties within [`TIE_TOLERANCE`] in `(k, s)` order.
    pub rows: Vec<PairFidelity>,
    /// Every pair tied with the best.
    pub top_ties: Vec<(usize, usize)>,
}

/// Average fidelity of `span{|k⟩, |s⟩}` for every `k < s ≤ max_level`.
pub fn contiguous_pair_sweep(ch: &KrausChannel, max_level: usize) -> Result<PairSweep> {
    if max_level >= ch.dim() {
        return Err(Error::OutOfRange { index: max_level, dim: ch.dim() });
    }
    let mut rows = Vec::new();
    for k in 0..max_level {
        for s in k + 1..=max_level {
            let sub = Subspace::from_levels(&[k, s], ch.dim())?;
            rows.push(PairFidelity { k, s, fidelity: average_fidelity_closed(ch, &sub)?.value });
        }
    }
    rows.sort_by(|a, b| b.fidelity.total_cmp(&a.fidelity));
    let mut start = 0;
    while start < rows.len() {
        let head = rows[start].fidelity;
        let end =
            rows[start..].iter().position(|r| head - r.fidelity > TIE_TOLERANCE).map_or(rows.len(), |p| start + p);
        rows[start..end].sort_by_key(|r| (r.k, r.s));
        start = end;
    }
    let top_ties = match rows.first() {
        Some(first) => {
            let best = rows.iter().map(|r| r.fidelity).fold(first.fidelity, f64::max);
            rows.iter().filter(|r| best - r.fidelity <= TIE_TOLERANCE).map(|r| (r.k, r.s)).collect()
        }
        None => Vec::new(),
    };
    Ok(PairSweep { rows, top_ties })
}
