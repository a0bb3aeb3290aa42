//! Solve the root relaxation of a small lattice and compare the certified
//! lower bound against exhaustive search.
//!
//! The solver returns two objective values. `objective` is the value at
//! its feasible iterate; `dual_bound` is a bound that stays valid even if
//! the solve stopped early, so it is the number branch-and-bound trusts.

use cbb::chordal::{chordal_extension, dependency_graph};
use cbb::model::{brute_force_ground, gen_square};
use cbb::sdp::{self, SolveOptions};

fn main() {
    let model = gen_square(4, 1.5, 2);
    let decomp = chordal_extension(&dependency_graph(&model));
    let problem = cbb::relaxation::assemble(&model, &decomp, 7).unwrap();
    let solution = sdp::solve(&problem, &SolveOptions::default());

    let exact = brute_force_ground(&model).unwrap().energy;
    println!("status          = {:?}", solution.status);
    println!("iterations      = {}", solution.iterations);
    println!("primal residual = {:.2e}", solution.primal_residual);
    println!("relative gap    = {:.2e}", solution.relative_gap);
    println!("dual bound      = {:.9}", solution.dual_bound);
    println!("exact ground    = {:.9}", exact);
    println!("slack           = {:.2e}", exact - solution.dual_bound);

    assert!(solution.dual_bound <= exact + 1e-6 * (1.0 + exact.abs()));
}
