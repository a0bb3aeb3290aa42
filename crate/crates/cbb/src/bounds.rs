//! Lower and upper bounds for one model from one relaxation.
//!
//! The lower bound is the certified dual bound of the semidefinite
//! relaxation, optionally tightened by rounds of triangle cuts. The upper
//! bound rounds the relaxation's one-body moments to signs and evaluates
//! the resulting configuration, so it is always attained by an explicit
//! spin assignment.

use crate::chordal::{chordal_extension, dependency_graph};
use crate::error::Result;
use crate::model::{energy, SpinConfiguration, SpinModel};
use crate::relaxation::{
    assemble, assemble_dense, find_violated_triangles, RelaxationProblem,
};
use crate::sdp::{self, SdpSolution, SolveOptions, SolveStatus};
use serde::{Deserialize, Serialize};

/// Which relaxation a node solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxationMode {
    /// Clique-wise blocks on a chordal extension of the coupling graph;
    /// cliques smaller than `n_t` get the level-2 basis.
    Chordal { n_t: usize },
    /// One level-1 block over all spins, ignoring graph structure. The
    /// baseline the clique-wise mode is benchmarked against.
    DenseLevelOne,
}

impl Default for RelaxationMode {
    fn default() -> Self {
        Self::Chordal { n_t: 7 }
    }
}

/// Triangle-cut loop controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutParams {
    pub enabled: bool,
    /// Re-solve at most this many times.
    pub max_rounds: usize,
    /// New cuts per round, most violated first.
    pub batch: usize,
    /// Minimum violation for a triple to be proposed.
    pub violation_tol: f64,
    /// Stop when a round improves the bound by less than
    /// `improvement_tol * (1 + |bound|)`.
    pub improvement_tol: f64,
}

impl Default for CutParams {
    fn default() -> Self {
        Self {
            enabled: false,
            max_rounds: 10,
            batch: 50,
            violation_tol: 1e-6,
            improvement_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct BoundParams {
    pub mode: RelaxationMode,
    pub sdp: SolveOptions,
    pub cuts: CutParams,
}

/// Certified bracket for one model.
#[derive(Clone, Debug)]
pub struct BoundResult {
    /// Certified lower bound on the ground-state energy.
    pub lower: f64,
    /// Energy of `config`, recomputed exactly on the model.
    pub upper: f64,
    pub config: SpinConfiguration,
    /// One-body moments of the final relaxation solve, indexed by spin.
    pub moments: Vec<f64>,
    /// Status of the last interior-point solve.
    pub status: SolveStatus,
    pub cut_rounds: usize,
    pub cuts_added: usize,
    /// Interior-point iterations summed over all solves.
    pub sdp_iterations: usize,
    /// Largest moment-block dimension in the relaxation.
    pub max_block_dim: usize,
}

/// Round one-body moments to a configuration: negative moments map to
/// spin down, everything else (ties included) to spin up.
pub fn extract_configuration(
    problem: &RelaxationProblem,
    y: &[f64],
    n: usize,
) -> SpinConfiguration {
    let spins: Vec<i8> = (0..n)
        .map(|i| match problem.singleton_variable(i) {
            Some(v) if y[v] < 0.0 => -1,
            _ => 1,
        })
        .collect();
    SpinConfiguration::new(spins).expect("signs are valid spins")
}

fn one_body_moments(problem: &RelaxationProblem, y: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| problem.singleton_variable(i).map_or(0.0, |v| y[v]))
        .collect()
}

/// Solve the relaxation for `model`, run the cut loop if enabled, and
/// report the certified bracket together with the rounded configuration.
pub fn compute(model: &SpinModel, params: &BoundParams) -> Result<BoundResult> {
    let mut problem = match params.mode {
        RelaxationMode::Chordal { n_t } => {
            let g = dependency_graph(model);
            let d = chordal_extension(&g);
            assemble(model, &d, n_t)?
        }
        RelaxationMode::DenseLevelOne => assemble_dense(model, 1)?,
    };
    let max_block_dim = problem.blocks().iter().map(|b| b.dim()).max().unwrap_or(0);
    let mut sol: SdpSolution = sdp::solve(&problem, &params.sdp);
    let mut lower = sol.dual_bound;
    let mut iterations = sol.iterations;
    let mut cut_rounds = 0;
    let mut cuts_added = 0;
    if params.cuts.enabled {
        for _ in 0..params.cuts.max_rounds {
            let new = find_violated_triangles(
                &problem,
                &sol.y,
                params.cuts.batch,
                params.cuts.violation_tol,
            );
            if new.is_empty() {
                break;
            }
            cuts_added += new.len();
            cut_rounds += 1;
            problem = problem.with_cuts(new);
            let next = sdp::solve(&problem, &params.sdp);
            iterations += next.iterations;
            let improvement = next.dual_bound - lower;
            lower = lower.max(next.dual_bound);
            sol = next;
            if improvement < params.cuts.improvement_tol * (1.0 + lower.abs()) {
                break;
            }
        }
    }
    let config = extract_configuration(&problem, &sol.y, model.n());
    let upper = energy(model, &config)?;
    Ok(BoundResult {
        lower,
        upper,
        config,
        moments: one_body_moments(&problem, &sol.y, model.n()),
        status: sol.status,
        cut_rounds,
        cuts_added,
        sdp_iterations: iterations,
        max_block_dim,
    })
}
