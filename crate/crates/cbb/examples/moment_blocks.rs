//! Assemble the clique-wise moment relaxation and inspect its structure:
//! one positive-semidefinite block per clique, sharing variables where
//! cliques overlap.
//!
//! A clique of size below the threshold gets the level-2 basis (constant,
//! singletons, pairs); larger cliques get level 1 (constant, singletons).
//! Products of basis monomials cancel squared spins, so every matrix
//! entry is itself a monomial and equal monomials anywhere in the problem
//! are one shared variable.

use cbb::chordal::{chordal_extension, dependency_graph};
use cbb::model::SpinModel;
use cbb::relaxation::{assemble, build_basis, Monomial};

fn main() {
    // Path 0-1-2: two cliques {0,1} and {1,2} overlapping in spin 1.
    let model =
        SpinModel::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)], vec![(1, 0.25)], 0.0).unwrap();
    let decomp = chordal_extension(&dependency_graph(&model));
    let problem = assemble(&model, &decomp, 7).unwrap();

    println!("variables = {}", problem.num_vars());
    for (k, block) in problem.blocks().iter().enumerate() {
        println!(
            "block {k}: clique {:?}, level {}, dim {}",
            block.clique, block.level, block.dim(),
        );
    }

    // Both blocks see <s1>; the assembly gives them the same variable.
    let shared = problem.variable(&Monomial::new(&[1])).unwrap();
    println!("shared variable for spin 1 has index {shared}");

    let basis = build_basis(&[0, 1, 2], 2);
    println!("level-2 basis of a 3-clique ({} monomials):", basis.len());
    for m in &basis {
        println!("  {:?}", m.indices());
    }

    println!("\nfull problem dump:");
    print!("{}", problem.export_text());
}
