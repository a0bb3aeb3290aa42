//! Interior-point solver for the block relaxations.
//!
//! Solves `min c'y  s.t.  S(y) = F0 + sum_k y_k F_k >= 0` where the cone
//! is the block-diagonal product of the moment blocks and the scalar cut
//! rows. The algorithm is a primal-dual path follower with Nesterov-Todd
//! scaling and a second-order predictor-corrector step. The dual matrix
//! `S` is always rebuilt from `y`, so dual feasibility is exact by
//! construction and the iteration only chases primal feasibility
//! (`<F_k, X> = c_k`) and the complementarity gap.
//!
//! Besides the nearly-feasible iterate, the solver reports a bound that
//! stays valid under inexact arithmetic. Every variable is an
//! off-diagonal entry of a unit-diagonal PSD block, hence `|y_k| <= 1`
//! for any feasible point, so for any PSD `X` each feasible `y` obeys
//!
//! ```text
//! c'y = sum_k <F_k, X> y_k + sum_k (c_k - <F_k, X>) y_k
//!     >= -<F0, X> - sum_k |c_k - <F_k, X>|.
//! ```
//!
//! The reported `dual_bound` applies this to an eigenvalue-shifted copy
//! of the iterate, keeps the best value across iterations, and therefore
//! lower-bounds the relaxation optimum even when the solve stops early.

mod lmi;
mod schur;

use crate::relaxation::RelaxationProblem;
use lmi::LmiProblem;
use nalgebra::{DMatrix, DVector};
use schur::SchurSolver;

/// Interior-point stopping parameters.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolveOptions {
    /// Largest allowed violation of `<F_k, X> = c_k`.
    pub feas_tol: f64,
    /// Relative complementarity gap at which to stop.
    pub gap_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { feas_tol: 1e-9, gap_tol: 1e-8, max_iterations: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// Tolerances met.
    Optimal,
    /// Iteration budget exhausted; the bound is still valid.
    MaxIterations,
    /// A factorization broke down or steps became too short; the bound
    /// reflects the best safely certified iterate.
    NumericalTrouble,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// Strictly feasible moment vector, the relaxation's decision point.
    pub y: Vec<f64>,
    /// Relaxation objective at `y`, model offset included. Feasibility of
    /// `y` makes this an upper bound on the relaxation optimum.
    pub objective: f64,
    /// Certified lower bound on the relaxation optimum (offset included),
    /// valid independently of solver accuracy.
    pub dual_bound: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Final `max_k |c_k - <F_k, X>|`.
    pub primal_residual: f64,
    /// Final complementarity gap over `1 + max(|objectives|)`.
    pub relative_gap: f64,
}

/// Block-diagonal symmetric matrix: dense moment blocks plus cut scalars.
#[derive(Clone, Debug)]
struct BlockVecs {
    mats: Vec<DMatrix<f64>>,
    cuts: Vec<f64>,
}

impl BlockVecs {
    fn zeros(lmi: &LmiProblem) -> Self {
        Self {
            mats: lmi.blocks.iter().map(|b| DMatrix::zeros(b.dim, b.dim)).collect(),
            cuts: vec![0.0; lmi.cuts.len()],
        }
    }

    fn identity(lmi: &LmiProblem, scale: f64) -> Self {
        Self {
            mats: lmi
                .blocks
                .iter()
                .map(|b| DMatrix::identity(b.dim, b.dim) * scale)
                .collect(),
            cuts: vec![scale; lmi.cuts.len()],
        }
    }

    fn dot(&self, other: &Self) -> f64 {
        let mats: f64 = self.mats.iter().zip(&other.mats).map(|(a, b)| a.dot(b)).sum();
        let cuts: f64 = self.cuts.iter().zip(&other.cuts).map(|(a, b)| a * b).sum();
        mats + cuts
    }

    /// `<F0, .>`: total trace plus cut scalars.
    fn f0_dot(&self) -> f64 {
        self.mats.iter().map(|m| m.trace()).sum::<f64>() + self.cuts.iter().sum::<f64>()
    }

    fn axpy(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.mats.iter_mut().zip(&other.mats) {
            *a += b * alpha;
        }
        for (a, b) in self.cuts.iter_mut().zip(&other.cuts) {
            *a += b * alpha;
        }
    }

    fn neg(&self) -> Self {
        Self { mats: self.mats.iter().map(|m| -m).collect(), cuts: self.cuts.iter().map(|c| -c).collect() }
    }
}

/// `S(y)` with unit diagonal, or the homogeneous `sum dy_k F_k`.
fn s_from_y(lmi: &LmiProblem, y: &[f64], unit_diagonal: bool) -> BlockVecs {
    let mut s = if unit_diagonal {
        BlockVecs::identity(lmi, 1.0)
    } else {
        BlockVecs::zeros(lmi)
    };
    for (b, block) in lmi.blocks.iter().enumerate() {
        let mat = &mut s.mats[b];
        for (v, positions) in &block.vars {
            let val = y[*v];
            for &(r, c) in positions {
                mat[(r, c)] = val;
                mat[(c, r)] = val;
            }
        }
    }
    for (i, cut) in lmi.cuts.iter().enumerate() {
        let base = if unit_diagonal { 1.0 } else { 0.0 };
        s.cuts[i] = base + cut.terms.iter().map(|&(v, g)| g * y[v]).sum::<f64>();
    }
    s
}

/// `<F_k, A>` for every variable: twice the off-diagonal sums plus cut
/// contributions.
fn dot_fk(lmi: &LmiProblem, a: &BlockVecs) -> Vec<f64> {
    let mut out = vec![0.0; lmi.m];
    for (b, block) in lmi.blocks.iter().enumerate() {
        let mat = &a.mats[b];
        for (v, positions) in &block.vars {
            let mut acc = 0.0;
            for &(r, c) in positions {
                acc += 2.0 * mat[(r, c)];
            }
            out[*v] += acc;
        }
    }
    for (i, cut) in lmi.cuts.iter().enumerate() {
        for &(v, g) in &cut.terms {
            out[v] += g * a.cuts[i];
        }
    }
    out
}

/// Per-block Nesterov-Todd scaling data.
pub(crate) struct BlockScale {
    /// Lower Cholesky factors of `X` and `S`.
    lx: DMatrix<f64>,
    ls: DMatrix<f64>,
    /// Scaling point factor: `W = R R'`, `R^-1 X R^-T = R' S R = diag(lam)`.
    r: DMatrix<f64>,
    rinv: DMatrix<f64>,
    pub(crate) w: DMatrix<f64>,
    lam: DVector<f64>,
}

pub(crate) struct CutScale {
    pub(crate) w: f64,
    lam: f64,
}

pub(crate) struct Scaling {
    pub(crate) blocks: Vec<BlockScale>,
    pub(crate) cuts: Vec<CutScale>,
}

fn scaling(x: &BlockVecs, s: &BlockVecs) -> Option<Scaling> {
    let mut blocks = Vec::with_capacity(x.mats.len());
    for (xm, sm) in x.mats.iter().zip(&s.mats) {
        let cx = xm.clone().cholesky()?;
        let cs = sm.clone().cholesky()?;
        let lx = cx.l();
        let ls = cs.l();
        let z = ls.transpose() * &lx;
        let svd = z.svd(true, true);
        let v = svd.v_t.as_ref()?.transpose();
        let lam = svd.singular_values.clone();
        if lam.iter().any(|&l| !(l > 0.0)) {
            return None;
        }
        let mut r = &lx * &v;
        let mut rinv_t = lx.tr_solve_lower_triangular(&v)?;
        for (i, mut col) in r.column_iter_mut().enumerate() {
            col *= 1.0 / lam[i].sqrt();
        }
        for (i, mut col) in rinv_t.column_iter_mut().enumerate() {
            col *= lam[i].sqrt();
        }
        let rinv = rinv_t.transpose();
        let mut w = &r * r.transpose();
        let wt = w.transpose();
        w = (&w + wt) * 0.5;
        blocks.push(BlockScale { lx, ls, r, rinv, w, lam });
    }
    let mut cuts = Vec::with_capacity(x.cuts.len());
    for (&xc, &sc) in x.cuts.iter().zip(&s.cuts) {
        if !(xc > 0.0 && sc > 0.0) {
            return None;
        }
        cuts.push(CutScale { w: (xc / sc).sqrt(), lam: (xc * sc).sqrt() });
    }
    Some(Scaling { blocks, cuts })
}

/// Solve the Newton system for a complementarity target `K`:
/// `dX + W dS W = K` subject to `<F_j, dX> = r_j` and `dS = sum dy_k F_k`.
fn direction(
    lmi: &LmiProblem,
    sc: &Scaling,
    schur: &SchurSolver,
    k: &BlockVecs,
    rvec: &[f64],
) -> (Vec<f64>, BlockVecs, BlockVecs) {
    let fk = dot_fk(lmi, k);
    let g: Vec<f64> = fk.iter().zip(rvec).map(|(a, b)| a - b).collect();
    let dy = schur.solve(&g);
    let ds = s_from_y(lmi, &dy, false);
    let mut dx = k.clone();
    for (b, scb) in sc.blocks.iter().enumerate() {
        let wdsw = &scb.w * &ds.mats[b] * &scb.w;
        dx.mats[b] -= &wdsw;
        let t = dx.mats[b].transpose();
        dx.mats[b] = (&dx.mats[b] + t) * 0.5;
    }
    for (i, scc) in sc.cuts.iter().enumerate() {
        dx.cuts[i] -= scc.w * scc.w * ds.cuts[i];
    }
    (dy, ds, dx)
}

/// Largest `alpha` in `[0, cap]` keeping `P + alpha D` inside the cone,
/// given the lower Cholesky factors of the current point `P`.
fn max_step_blocks(
    lower: impl Iterator<Item = DMatrix<f64>>,
    deltas: &BlockVecs,
    point_cuts: &[f64],
    cap: f64,
) -> f64 {
    let mut alpha = cap;
    for (l, d) in lower.zip(&deltas.mats) {
        let c1 = l.solve_lower_triangular(d).expect("Cholesky factor is nonsingular");
        let mid = l
            .solve_lower_triangular(&c1.transpose())
            .expect("Cholesky factor is nonsingular");
        let sym = (&mid + mid.transpose()) * 0.5;
        let lmin = sym.symmetric_eigenvalues().min();
        if lmin < -1e-14 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    for (&p, &d) in point_cuts.iter().zip(&deltas.cuts) {
        if d < 0.0 {
            alpha = alpha.min(-p / d);
        }
    }
    alpha
}

/// Second-order corrector target in the scaled space:
/// `K = R (sigma*mu*Lam^-1 - Lam - T) R'` with
/// `T_ij = (dXh dSh + dSh dXh)_ij / (lam_i + lam_j)`.
fn corrector_target(
    sc: &Scaling,
    sigma_mu: f64,
    dx_aff: &BlockVecs,
    ds_aff: &BlockVecs,
) -> BlockVecs {
    let mats = sc
        .blocks
        .iter()
        .enumerate()
        .map(|(b, scb)| {
            let dxh = &scb.rinv * &dx_aff.mats[b] * scb.rinv.transpose();
            let dsh = scb.r.transpose() * &ds_aff.mats[b] * &scb.r;
            let prod = &dxh * &dsh;
            let nsym = &prod + prod.transpose();
            let d = scb.lam.len();
            let mut inner = DMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    inner[(i, j)] = -nsym[(i, j)] / (scb.lam[i] + scb.lam[j]);
                }
                inner[(i, i)] += sigma_mu / scb.lam[i] - scb.lam[i];
            }
            let k = &scb.r * inner * scb.r.transpose();
            let kt = k.transpose();
            (&k + kt) * 0.5
        })
        .collect();
    let cuts = sc
        .cuts
        .iter()
        .enumerate()
        .map(|(i, scc)| {
            scc.w
                * (sigma_mu / scc.lam
                    - scc.lam
                    - dx_aff.cuts[i] * ds_aff.cuts[i] / scc.lam)
        })
        .collect();
    BlockVecs { mats, cuts }
}

/// Certified lower bound on `c'y` over the feasible set, from any block
/// iterate: shift each block PSD, clamp cut scalars, then apply the
/// bound from the module docs. Safe regardless of how inaccurate `x` is.
fn safe_bound(lmi: &LmiProblem, x: &BlockVecs) -> f64 {
    let mut xt = x.clone();
    for m in &mut xt.mats {
        let ev = m.symmetric_eigenvalues();
        let lmin = ev.min();
        let scale = ev.amax();
        let shift = (-lmin).max(0.0) + 1e-13 * (1.0 + scale);
        for i in 0..m.nrows() {
            m[(i, i)] += shift;
        }
    }
    for c in &mut xt.cuts {
        *c = c.max(0.0);
    }
    let residual: f64 = lmi
        .c
        .iter()
        .zip(dot_fk(lmi, &xt))
        .map(|(&c, fx)| (c - fx).abs())
        .sum();
    -xt.f0_dot() - residual
}

/// Smallest block eigenvalue (cut slacks included) of `S(y)`; negative
/// values measure infeasibility of `y`.
pub fn min_slack_eigenvalue(problem: &RelaxationProblem, y: &[f64]) -> f64 {
    let lmi = LmiProblem::build(problem);
    let s = s_from_y(&lmi, y, true);
    let mut min = f64::INFINITY;
    for m in &s.mats {
        min = min.min(m.symmetric_eigenvalues().min());
    }
    for &c in &s.cuts {
        min = min.min(c);
    }
    min
}

struct Stats {
    rvec: Vec<f64>,
    primal_residual: f64,
    objective_y: f64,
    gap: f64,
    relative_gap: f64,
}

fn stats(lmi: &LmiProblem, x: &BlockVecs, s: &BlockVecs, y: &[f64]) -> Stats {
    let fx = dot_fk(lmi, x);
    let rvec: Vec<f64> = lmi.c.iter().zip(&fx).map(|(c, f)| c - f).collect();
    let primal_residual = rvec.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let objective_y: f64 = lmi.c.iter().zip(y).map(|(c, v)| c * v).sum();
    let lower_est = -x.f0_dot();
    let gap = x.dot(s);
    let relative_gap = gap / (1.0 + objective_y.abs().max(lower_est.abs()));
    Stats { rvec, primal_residual, objective_y, gap, relative_gap }
}

/// Run the interior-point method on an assembled relaxation.
///
/// Never fails outright: numerical breakdowns surface as
/// [`SolveStatus::NumericalTrouble`] with the best certified bound found
/// so far. Deterministic for a fixed problem.
pub fn solve(problem: &RelaxationProblem, opts: &SolveOptions) -> SdpSolution {
    let lmi = LmiProblem::build(problem);
    let offset = problem.offset();
    if lmi.m == 0 {
        return SdpSolution {
            y: Vec::new(),
            objective: offset,
            dual_bound: offset,
            status: SolveStatus::Optimal,
            iterations: 0,
            primal_residual: 0.0,
            relative_gap: 0.0,
        };
    }
    let n_tot = lmi.cone_dim() as f64;
    let eta = lmi.c.iter().fold(1.0f64, |a, &c| a.max(c.abs()));
    let mut x = BlockVecs::identity(&lmi, eta);
    let mut y = vec![0.0; lmi.m];
    let mut s = s_from_y(&lmi, &y, true);
    let mut schur = SchurSolver::new(&lmi);
    let mut best_bound = f64::NEG_INFINITY;
    let mut iterations = 0;
    let status;
    let final_stats;
    loop {
        let st = stats(&lmi, &x, &s, &y);
        best_bound = best_bound.max(safe_bound(&lmi, &x));
        if st.primal_residual <= opts.feas_tol && st.relative_gap <= opts.gap_tol {
            status = SolveStatus::Optimal;
            final_stats = st;
            break;
        }
        if iterations >= opts.max_iterations {
            status = SolveStatus::MaxIterations;
            final_stats = st;
            break;
        }
        let Some(sc) = scaling(&x, &s) else {
            status = SolveStatus::NumericalTrouble;
            final_stats = st;
            break;
        };
        if schur.factor(&lmi, &sc).is_err() {
            status = SolveStatus::NumericalTrouble;
            final_stats = st;
            break;
        }
        let mu = st.gap / n_tot;

        // Predictor: pure Newton step toward the boundary.
        let k_aff = x.neg();
        let (_, ds_a, dx_a) = direction(&lmi, &sc, &schur, &k_aff, &st.rvec);
        let ap_aff = max_step_blocks(
            sc.blocks.iter().map(|b| b.lx.clone()),
            &dx_a,
            &x.cuts,
            1.0,
        );
        let ad_aff = max_step_blocks(
            sc.blocks.iter().map(|b| b.ls.clone()),
            &ds_a,
            &s.cuts,
            1.0,
        );
        let mu_aff = ((st.gap
            + ad_aff * x.dot(&ds_a)
            + ap_aff * dx_a.dot(&s)
            + ap_aff * ad_aff * dx_a.dot(&ds_a))
            / n_tot)
            .max(0.0);
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // Corrector with second-order term.
        let k = corrector_target(&sc, sigma * mu, &dx_a, &ds_a);
        let (dy, ds, dx) = direction(&lmi, &sc, &schur, &k, &st.rvec);
        let tau = 0.99;
        let ap = (tau
            * max_step_blocks(
                sc.blocks.iter().map(|b| b.lx.clone()),
                &dx,
                &x.cuts,
                f64::INFINITY,
            ))
        .min(1.0);
        let ad = (tau
            * max_step_blocks(
                sc.blocks.iter().map(|b| b.ls.clone()),
                &ds,
                &s.cuts,
                f64::INFINITY,
            ))
        .min(1.0);
        if !(ap > 1e-10 && ad > 1e-10) {
            status = SolveStatus::NumericalTrouble;
            final_stats = st;
            break;
        }
        x.axpy(ap, &dx);
        for (v, d) in y.iter_mut().zip(&dy) {
            *v += ad * d;
        }
        s = s_from_y(&lmi, &y, true);
        iterations += 1;
    }
    best_bound = best_bound.max(safe_bound(&lmi, &x));
    SdpSolution {
        y,
        objective: final_stats.objective_y + offset,
        dual_bound: best_bound + offset,
        status,
        iterations,
        primal_residual: final_stats.primal_residual,
        relative_gap: final_stats.relative_gap,
    }
}
