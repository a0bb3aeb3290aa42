//! Flattened linear-matrix-inequality form of a relaxation.
//!
//! The solver works on `min c'y  s.t.  S(y) >= 0` where `S(y)` is block
//! diagonal: one matrix block per moment block, with ones on the diagonal
//! and `y` scattered into off-diagonal positions, plus one scalar row
//! `1 + g'y` per cut. Every off-diagonal position belongs to exactly one
//! variable, so the constraint matrices attached to distinct variables
//! have disjoint supports and the Schur system below stays positive
//! definite.

use crate::relaxation::RelaxationProblem;
use std::collections::BTreeMap;

/// One PSD block: unit diagonal plus variables at fixed positions.
pub(crate) struct LmiBlock {
    pub dim: usize,
    /// Per variable, the strict upper-triangle positions it occupies,
    /// ascending by variable index.
    pub vars: Vec<(usize, Vec<(usize, usize)>)>,
}

/// One scalar row `1 + sum coeff * y >= 0`, coefficients ascending by
/// variable index.
pub(crate) struct CutRow {
    pub terms: Vec<(usize, f64)>,
}

pub(crate) struct LmiProblem {
    pub m: usize,
    pub c: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
    pub cuts: Vec<CutRow>,
}

impl LmiProblem {
    pub fn build(p: &RelaxationProblem) -> Self {
        let m = p.num_vars();
        let mut c = vec![0.0; m];
        for &(v, coeff) in p.objective() {
            c[v] = coeff;
        }
        let blocks = p
            .blocks()
            .iter()
            .map(|b| {
                let mut by_var: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
                for &(r, col, v) in &b.entries {
                    by_var.entry(v).or_default().push((r, col));
                }
                LmiBlock { dim: b.dim(), vars: by_var.into_iter().collect() }
            })
            .collect();
        let cuts = p
            .cuts()
            .iter()
            .map(|cut| {
                let mut terms = cut.terms.clone();
                terms.sort_unstable_by_key(|&(v, _)| v);
                CutRow { terms }
            })
            .collect();
        Self { m, c, blocks, cuts }
    }

    /// Total dimension of the block-diagonal cone, scalar rows included.
    pub fn cone_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum::<usize>() + self.cuts.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordal::{chordal_extension, dependency_graph};
    use crate::model::SpinModel;
    use crate::relaxation::assemble;

    #[test]
    fn positions_partition_across_variables() {
        let m = SpinModel::new(
            3,
            vec![(0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)],
            vec![(0, 0.5)],
            0.0,
        )
        .unwrap();
        let g = dependency_graph(&m);
        let d = chordal_extension(&g);
        let p = assemble(&m, &d, usize::MAX).unwrap();
        let lmi = LmiProblem::build(&p);
        assert_eq!(lmi.m, 7);
        assert_eq!(lmi.cone_dim(), 7);
        let block = &lmi.blocks[0];
        let total: usize = block.vars.iter().map(|(_, pos)| pos.len()).sum();
        assert_eq!(total, 7 * 6 / 2);
        let mut seen = std::collections::HashSet::new();
        for (_, positions) in &block.vars {
            for &(r, c) in positions {
                assert!(r < c);
                assert!(seen.insert((r, c)), "position owned by two variables");
            }
        }
        assert_eq!(lmi.c.iter().filter(|&&v| v != 0.0).count(), 4);
    }
}
