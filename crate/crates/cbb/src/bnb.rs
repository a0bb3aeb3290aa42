//! Best-first branch and bound over single spin fixings.
//!
//! Every node carries a reduced model (fixed spins folded into fields and
//! offset) and a certified lower bound for its subtree. Nodes are
//! expanded in order of that bound; children are evaluated when created,
//! either by the semidefinite relaxation or, small enough, by exhaustive
//! search. The incumbent configuration comes from sign-rounded moments
//! and its energy is always recomputed on the root model, so the final
//! `[lower, upper]` bracket is certified end to end: `lower` never
//! exceeds the true ground energy, `upper` is attained by `config`.
//!
//! The solver is deterministic: rerunning on the same model and
//! parameters reproduces every field of the certificate except
//! `wall_time`.

use crate::bounds::{self, BoundParams};
use crate::error::{Error, Result};
use crate::model::{brute_force_ground, energy, SpinConfiguration, SpinModel};
use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;
use std::time::Instant;

/// Which free spin a node branches on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchRule {
    /// The most decided spin: largest one-body moment magnitude.
    #[default]
    EasyFirst,
    /// The least decided spin: smallest one-body moment magnitude.
    HardFirst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    pub bounds: BoundParams,
    pub branch_rule: BranchRule,
    /// Converged when `upper - lower <= gap_tol * (1 + |upper|)`.
    pub gap_tol: f64,
    /// Budget on evaluated nodes.
    pub max_nodes: usize,
    pub max_seconds: Option<f64>,
    /// Subtrees with at most this many free spins are closed by
    /// exhaustive search; `0` disables the oracle entirely.
    pub oracle_leaf_threshold: usize,
    /// Evaluate the two children of a branching concurrently. The result
    /// is identical to the serial run.
    pub parallel_children: bool,
    /// Record one trace entry per evaluated node in the certificate.
    pub keep_trace: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            bounds: BoundParams::default(),
            branch_rule: BranchRule::EasyFirst,
            gap_tol: 1e-6,
            max_nodes: 10_000,
            max_seconds: None,
            oracle_leaf_threshold: 16,
            parallel_children: false,
            keep_trace: false,
        }
    }
}

/// One evaluated node, in evaluation order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub node: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Free spins remaining at the node.
    pub free: usize,
    /// `root`, `bound` (relaxation evaluated), `oracle` (closed by
    /// exhaustive search), or `exact` (no free spins left).
    pub action: String,
    /// The node's certified subtree lower bound.
    pub lower: f64,
    /// Incumbent energy after the node was absorbed.
    pub upper: f64,
    /// Certified global lower bound after the node was absorbed.
    pub global_lower: f64,
}

/// Outcome of a solve: a certified bracket plus the search statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Digest of the instance this certificate belongs to.
    pub instance_digest: String,
    /// Certified lower bound on the ground-state energy.
    pub lower: f64,
    /// Energy of `config` on the instance, computed exactly.
    pub upper: f64,
    /// `upper - lower`.
    pub gap: f64,
    pub config: SpinConfiguration,
    /// Whether the gap closed within `params.gap_tol`.
    pub converged: bool,
    pub nodes_explored: usize,
    pub branchings: usize,
    /// Largest moment-block dimension encountered.
    pub max_block_size: usize,
    /// Seconds spent; the only field allowed to differ across reruns.
    pub wall_time: f64,
    pub params: SolveParams,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<TraceEntry>>,
}

/// Scoring of an externally produced configuration (an annealer sample,
/// a heuristic output) against a certificate for the same instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub external_energy: f64,
    /// `external_energy - lower`: certified suboptimality of the external
    /// configuration. Nonnegative up to the gap tolerance.
    pub gap_to_lower: f64,
    /// `external_energy - upper`: how much the external configuration
    /// loses to the certificate's own state; negative means it wins.
    pub gap_to_upper: f64,
    /// Spin flips between the external and the certified configuration.
    pub hamming_distance: usize,
    /// Whether the external energy matches the certified lower bound
    /// within the certificate's gap tolerance.
    pub certified_ground: bool,
}

/// Score an external configuration against a certificate. Fails with
/// [`Error::DigestMismatch`] when the model is not the certified
/// instance.
pub fn verify_external(
    cert: &Certificate,
    model: &SpinModel,
    external: &SpinConfiguration,
) -> Result<VerifyReport> {
    if model.digest() != cert.instance_digest {
        return Err(Error::DigestMismatch);
    }
    let external_energy = energy(model, external)?;
    let hamming_distance = external.hamming_distance(&cert.config)?;
    let tol = cert.params.gap_tol * (1.0 + external_energy.abs());
    Ok(VerifyReport {
        external_energy,
        gap_to_lower: external_energy - cert.lower,
        gap_to_upper: external_energy - cert.upper,
        hamming_distance,
        certified_ground: external_energy - cert.lower <= tol,
    })
}

struct Node {
    model: SpinModel,
    /// Original index of each free spin, aligned with the reduced model.
    free: Vec<usize>,
    fixed: Vec<(usize, i8)>,
    depth: usize,
    lower: f64,
    moments: Vec<f64>,
    id: usize,
    seq: u64,
}

struct HeapEntry(Node);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.0.lower == other.0.lower && self.0.seq == other.0.seq
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    /// Max-heap inverted: the top is the smallest bound, oldest first.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .0
            .lower
            .total_cmp(&self.0.lower)
            .then_with(|| other.0.seq.cmp(&self.0.seq))
    }
}

/// Full configuration from a node's fixings plus a reduced configuration
/// for its free spins.
fn compose(
    n: usize,
    fixed: &[(usize, i8)],
    free: &[usize],
    reduced: &SpinConfiguration,
) -> SpinConfiguration {
    let mut spins = vec![0i8; n];
    for &(i, s) in fixed {
        spins[i] = s;
    }
    for (p, &orig) in free.iter().enumerate() {
        spins[orig] = reduced[p];
    }
    SpinConfiguration::new(spins).expect("composed spins are valid")
}

enum Evaluation {
    /// Certified bound plus branching data; the node stays open.
    Open { lower: f64, moments: Vec<f64>, config: SpinConfiguration, block: usize },
    /// Subtree solved exactly.
    Closed { config: SpinConfiguration, oracle: bool },
}

fn evaluate(model: &SpinModel, params: &SolveParams) -> Result<Evaluation> {
    if model.n() == 0 || model.n() <= params.oracle_leaf_threshold {
        let r = brute_force_ground(model)?;
        return Ok(Evaluation::Closed { config: r.config, oracle: model.n() > 0 });
    }
    let b = bounds::compute(model, &params.bounds)?;
    Ok(Evaluation::Open {
        lower: b.lower,
        moments: b.moments,
        config: b.config,
        block: b.max_block_dim,
    })
}

fn select_branch_spin(moments: &[f64], rule: BranchRule) -> usize {
    let mut best = 0usize;
    for (i, &m) in moments.iter().enumerate() {
        let better = match rule {
            BranchRule::EasyFirst => m.abs() > moments[best].abs(),
            BranchRule::HardFirst => m.abs() < moments[best].abs(),
        };
        if better {
            best = i;
        }
    }
    best
}

struct Search<'a, F: FnMut(&TraceEntry)> {
    params: &'a SolveParams,
    root: &'a SpinModel,
    incumbent_energy: f64,
    incumbent: SpinConfiguration,
    global_lower: f64,
    heap: BinaryHeap<HeapEntry>,
    nodes_explored: usize,
    branchings: usize,
    max_block: usize,
    next_seq: u64,
    trace: Vec<TraceEntry>,
    observer: F,
}

impl<F: FnMut(&TraceEntry)> Search<'_, F> {
    fn offer(&mut self, energy_value: f64, config: SpinConfiguration) {
        if energy_value < self.incumbent_energy {
            self.incumbent_energy = energy_value;
            self.incumbent = config;
        }
    }

    /// Clamp the certified global bound against the open nodes and the
    /// incumbent; monotone by construction.
    fn refresh_global(&mut self) {
        let open = self.heap.peek().map_or(f64::INFINITY, |e| e.0.lower);
        self.global_lower = self.global_lower.max(open.min(self.incumbent_energy));
    }

    fn record(
        &mut self,
        id: usize,
        parent: Option<usize>,
        depth: usize,
        free: usize,
        action: &str,
        lower: f64,
    ) {
        let entry = TraceEntry {
            node: id,
            parent,
            depth,
            free,
            action: action.to_string(),
            lower,
            upper: self.incumbent_energy,
            global_lower: self.global_lower,
        };
        (self.observer)(&entry);
        if self.params.keep_trace {
            self.trace.push(entry);
        }
    }

    /// Evaluate a child, absorb its configuration, and either push it or
    /// close it. Returns the trace data to emit once the global bound is
    /// refreshed.
    fn absorb_child(
        &mut self,
        model: SpinModel,
        free: Vec<usize>,
        fixed: Vec<(usize, i8)>,
        depth: usize,
        parent_lower: f64,
        parent: Option<usize>,
        evaluation: Evaluation,
    ) -> (usize, Option<usize>, usize, usize, &'static str, f64) {
        let id = self.nodes_explored;
        self.nodes_explored += 1;
        let n_free = free.len();
        match evaluation {
            Evaluation::Closed { config, oracle } => {
                let full = compose(self.root.n(), &fixed, &free, &config);
                let exact = energy(self.root, &full).expect("composed configuration");
                self.offer(exact, full);
                let action = if oracle { "oracle" } else { "exact" };
                // The subtree optimum is a valid lower bound for it.
                (id, parent, depth, n_free, action, exact.max(parent_lower))
            }
            Evaluation::Open { lower, moments, config, block } => {
                self.max_block = self.max_block.max(block);
                let full = compose(self.root.n(), &fixed, &free, &config);
                let exact = energy(self.root, &full).expect("composed configuration");
                self.offer(exact, full);
                // A child subtree can only tighten its parent's bound.
                let lower = lower.max(parent_lower);
                let seq = self.next_seq;
                self.next_seq += 1;
                self.heap.push(HeapEntry(Node {
                    model,
                    free,
                    fixed,
                    depth,
                    lower,
                    moments,
                    id,
                    seq,
                }));
                (id, parent, depth, n_free, "bound", lower)
            }
        }
    }
}

/// Solve to certified optimality (or budget exhaustion), reporting every
/// evaluated node to `observer` in evaluation order.
pub fn solve_cbb_observed(
    model: &SpinModel,
    params: &SolveParams,
    observer: impl FnMut(&TraceEntry),
) -> Result<Certificate> {
    let t0 = Instant::now();
    let mut search = Search {
        params,
        root: model,
        incumbent_energy: f64::INFINITY,
        incumbent: SpinConfiguration::new(vec![1; model.n()])?,
        global_lower: f64::NEG_INFINITY,
        heap: BinaryHeap::new(),
        nodes_explored: 0,
        branchings: 0,
        max_block: 0,
        next_seq: 0,
        trace: Vec::new(),
        observer,
    };

    // Root evaluation.
    let all: Vec<usize> = (0..model.n()).collect();
    let root_eval = evaluate(model, params)?;
    let (id, parent, depth, free, action, lower) =
        search.absorb_child(model.clone(), all, Vec::new(), 0, f64::NEG_INFINITY, None, root_eval);
    search.refresh_global();
    let root_action = if action == "bound" { "root" } else { action };
    search.record(id, parent, depth, free, root_action, lower);

    let mut converged = false;
    loop {
        let tol = params.gap_tol * (1.0 + search.incumbent_energy.abs());
        if search.incumbent_energy - search.global_lower <= tol {
            converged = true;
            break;
        }
        if search.nodes_explored + 2 > params.max_nodes {
            break;
        }
        if let Some(limit) = params.max_seconds {
            if t0.elapsed().as_secs_f64() > limit {
                break;
            }
        }
        let Some(HeapEntry(node)) = search.heap.pop() else {
            // Everything enumerated: the incumbent is optimal.
            search.global_lower = search.global_lower.max(search.incumbent_energy);
            converged = true;
            break;
        };
        debug_assert!(!node.free.is_empty(), "leaf node was pushed");

        let p = select_branch_spin(&node.moments, params.branch_rule);
        search.branchings += 1;
        let mut sides: Vec<(SpinModel, Vec<usize>, Vec<(usize, i8)>)> = Vec::with_capacity(2);
        for s in [-1i8, 1] {
            let child_model = crate::model::fix_spin(&node.model, p, s)?;
            let mut free = node.free.clone();
            let orig = free.remove(p);
            let mut fixed = node.fixed.clone();
            fixed.push((orig, s));
            sides.push((child_model, free, fixed));
        }
        let evals: Vec<Evaluation> = if params.parallel_children {
            let (a, b) = std::thread::scope(|scope| {
                let h = scope.spawn(|| evaluate(&sides[1].0, params));
                let a = evaluate(&sides[0].0, params);
                (a, h.join().expect("child evaluation panicked"))
            });
            vec![a?, b?]
        } else {
            let mut v = Vec::with_capacity(2);
            for side in &sides {
                v.push(evaluate(&side.0, params)?);
            }
            v
        };
        let mut pending = Vec::with_capacity(2);
        for ((child_model, free, fixed), eval) in sides.into_iter().zip(evals) {
            pending.push(search.absorb_child(
                child_model,
                free,
                fixed,
                node.depth + 1,
                node.lower,
                Some(node.id),
                eval,
            ));
        }
        search.refresh_global();
        for (id, parent, depth, free, action, lower) in pending {
            search.record(id, parent, depth, free, action, lower);
        }
    }

    let lower = search.global_lower.min(search.incumbent_energy);
    let upper = search.incumbent_energy;
    Ok(Certificate {
        instance_digest: model.digest(),
        lower,
        upper,
        gap: upper - lower,
        config: search.incumbent,
        converged,
        nodes_explored: search.nodes_explored,
        branchings: search.branchings,
        max_block_size: search.max_block,
        wall_time: t0.elapsed().as_secs_f64(),
        params: params.clone(),
        trace: if params.keep_trace { Some(search.trace) } else { None },
    })
}

/// Solve to certified optimality or budget exhaustion.
pub fn solve_cbb(model: &SpinModel, params: &SolveParams) -> Result<Certificate> {
    solve_cbb_observed(model, params, |_| {})
}
