//! Clique-wise moment relaxations.
//!
//! For each clique `C` a monomial basis is chosen: level 1 uses the empty
//! monomial and the singletons of `C`; level 2 adds all pair monomials.
//! The moment block for `C` has entry `(a, b)` equal to the moment of the
//! canonical product of basis monomials `a` and `b`, where products obey
//! the spin algebra `s_i^2 = 1`, so a product is the symmetric difference
//! of the index sets. Distinct basis elements never multiply to the empty
//! monomial, so diagonals are pinned to one and every off-diagonal entry
//! references a variable in one global monomial table shared across all
//! blocks; overlapping cliques agree on shared moments by construction.
//!
//! The objective collects `-J_ij` on pair monomials and `+h_i` on
//! singletons; constraining every block to be positive semidefinite and
//! minimizing gives a lower bound on the ground-state energy. Optional
//! triangle inequalities `+-y_ij +- y_ik +- y_jk >= -1` (even number of
//! minus signs) tighten level-1 blocks; level-2 blocks already imply them.

use crate::chordal::CliqueDecomposition;
use crate::error::{Error, Result};
use crate::model::{SpinConfiguration, SpinModel};
use nalgebra::DMatrix;
use std::collections::HashMap;
use std::fmt::Write as _;

/// Product of spin variables, kept as a sorted index set. The empty
/// monomial is the constant one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<usize>);

impl Monomial {
    /// Canonicalize a list of spin indices: repeated indices cancel in
    /// pairs, the rest are sorted.
    pub fn new(indices: &[usize]) -> Self {
        let mut v = indices.to_vec();
        v.sort_unstable();
        let mut out = Vec::with_capacity(v.len());
        let mut i = 0;
        while i < v.len() {
            if i + 1 < v.len() && v[i] == v[i + 1] {
                i += 2;
            } else {
                out.push(v[i]);
                i += 1;
            }
        }
        Self(out)
    }

    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Canonical product: symmetric difference of the index sets.
    pub fn product(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self(out)
    }

    /// Value of the monomial at a configuration.
    pub fn evaluate(&self, config: &SpinConfiguration) -> f64 {
        self.0.iter().map(|&i| f64::from(config[i])).product()
    }
}

/// Monomial basis of a clique at a relaxation level: the constant, the
/// singletons ascending, and for level 2 the pairs in lexicographic order.
pub fn build_basis(clique: &[usize], level: u8) -> Vec<Monomial> {
    assert!(level == 1 || level == 2, "only levels 1 and 2 are supported");
    let mut basis = vec![Monomial::one()];
    for &i in clique {
        basis.push(Monomial(vec![i]));
    }
    if level == 2 {
        for (k, &i) in clique.iter().enumerate() {
            for &j in &clique[k + 1..] {
                basis.push(Monomial(vec![i, j]));
            }
        }
    }
    basis
}

/// One moment block: the PSD constraint on a clique's moment matrix.
#[derive(Clone, Debug)]
pub struct Block {
    /// Sorted clique vertices this block covers.
    pub clique: Vec<usize>,
    /// Relaxation level, 1 or 2.
    pub level: u8,
    /// Basis monomials in canonical order; the matrix is `dim x dim`.
    pub basis: Vec<Monomial>,
    /// Strict upper-triangle entries `(row, col, variable)`, row-major.
    /// Diagonal entries are the constant one and are not stored.
    pub entries: Vec<(usize, usize, usize)>,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// One linear cut `sum_k coeff_k * y_k >= -1` over pair moments of a
/// vertex triple inside a single clique.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    /// `(variable, coefficient)`, each coefficient `+1` or `-1`.
    pub terms: Vec<(usize, f64)>,
    /// Identity for deduplication: sorted triple and sign pattern index.
    pub key: (usize, usize, usize, u8),
}

/// Assembled relaxation: shared variable table, PSD blocks, objective.
#[derive(Clone, Debug)]
pub struct RelaxationProblem {
    /// Monomial of each variable; index 0.. in creation order.
    var_monomials: Vec<Monomial>,
    var_index: HashMap<Monomial, usize>,
    blocks: Vec<Block>,
    /// Sparse objective `(variable, coefficient)`, sorted by variable.
    objective: Vec<(usize, f64)>,
    /// Constant carried by the model.
    offset: f64,
    cuts: Vec<Cut>,
}

impl RelaxationProblem {
    pub fn num_vars(&self) -> usize {
        self.var_monomials.len()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn objective(&self) -> &[(usize, f64)] {
        &self.objective
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn monomial(&self, var: usize) -> &Monomial {
        &self.var_monomials[var]
    }

    /// Variable of a monomial, when it appears in some block.
    pub fn variable(&self, m: &Monomial) -> Option<usize> {
        self.var_index.get(m).copied()
    }

    /// Variable of the one-body moment of spin `i`.
    pub fn singleton_variable(&self, i: usize) -> Option<usize> {
        self.variable(&Monomial(vec![i]))
    }

    /// Objective value at a moment vector, offset included.
    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.offset + self.objective.iter().map(|&(v, c)| c * y[v]).sum::<f64>()
    }

    /// Numeric moment matrix of block `b` at `y`: ones on the diagonal,
    /// `y` filled in through the block's entry map.
    pub fn block_matrix(&self, b: usize, y: &[f64]) -> DMatrix<f64> {
        let block = &self.blocks[b];
        let d = block.dim();
        let mut m = DMatrix::identity(d, d);
        for &(r, c, v) in &block.entries {
            m[(r, c)] = y[v];
            m[(c, r)] = y[v];
        }
        m
    }

    /// Moment vector of a configuration: every variable evaluated at it.
    pub fn moment_vector(&self, config: &SpinConfiguration) -> Vec<f64> {
        self.var_monomials.iter().map(|m| m.evaluate(config)).collect()
    }

    /// Extend with extra cuts, skipping keys already present.
    pub fn with_cuts(&self, new: Vec<Cut>) -> Self {
        let mut out = self.clone();
        let existing: std::collections::HashSet<_> =
            out.cuts.iter().map(|c| c.key).collect();
        out.cuts.extend(new.into_iter().filter(|c| !existing.contains(&c.key)));
        out
    }

    /// Sparse text form for differential testing: variables, block entry
    /// maps, objective triplets, cuts.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vars {}", self.num_vars());
        for (k, m) in self.var_monomials.iter().enumerate() {
            let idx: Vec<String> = m.indices().iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "var {k}: {}", idx.join(" "));
        }
        for (b, block) in self.blocks.iter().enumerate() {
            let cl: Vec<String> = block.clique.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(
                out,
                "block {b} level {} dim {} clique {}",
                block.level,
                block.dim(),
                cl.join(" ")
            );
            for &(r, c, v) in &block.entries {
                let _ = writeln!(out, "entry {r} {c} {v}");
            }
        }
        for &(v, c) in &self.objective {
            let _ = writeln!(out, "obj {v} {c}");
        }
        for cut in &self.cuts {
            let terms: Vec<String> =
                cut.terms.iter().map(|(v, c)| format!("{v} {c}")).collect();
            let _ = writeln!(out, "cut {}", terms.join(" "));
        }
        out
    }
}

struct Builder {
    var_monomials: Vec<Monomial>,
    var_index: HashMap<Monomial, usize>,
}

impl Builder {
    fn new() -> Self {
        Self { var_monomials: Vec::new(), var_index: HashMap::new() }
    }

    fn intern(&mut self, m: Monomial) -> usize {
        debug_assert!(!m.is_one());
        if let Some(&v) = self.var_index.get(&m) {
            return v;
        }
        let v = self.var_monomials.len();
        self.var_monomials.push(m.clone());
        self.var_index.insert(m, v);
        v
    }

    fn block(&mut self, clique: &[usize], level: u8) -> Block {
        let basis = build_basis(clique, level);
        let d = basis.len();
        let mut entries = Vec::with_capacity(d * (d - 1) / 2);
        for a in 0..d {
            for b in (a + 1)..d {
                let m = basis[a].product(&basis[b]);
                debug_assert!(!m.is_one(), "distinct basis monomials share a product");
                entries.push((a, b, self.intern(m)));
            }
        }
        Block { clique: clique.to_vec(), level, basis, entries }
    }
}

fn finish(
    builder: Builder,
    blocks: Vec<Block>,
    model: &SpinModel,
) -> Result<RelaxationProblem> {
    let mut objective: HashMap<usize, f64> = HashMap::new();
    for &(i, j, jij) in model.couplings() {
        let m = Monomial(vec![i, j]);
        let v = builder.var_index.get(&m).copied().ok_or_else(|| {
            Error::Inconsistent(format!("coupling ({i},{j}) not covered by any block"))
        })?;
        *objective.entry(v).or_insert(0.0) -= jij;
    }
    for &(i, h) in model.fields() {
        let m = Monomial(vec![i]);
        let v = builder.var_index.get(&m).copied().ok_or_else(|| {
            Error::Inconsistent(format!("spin {i} not covered by any block"))
        })?;
        *objective.entry(v).or_insert(0.0) += h;
    }
    let mut objective: Vec<(usize, f64)> = objective.into_iter().collect();
    objective.sort_unstable_by_key(|&(v, _)| v);
    Ok(RelaxationProblem {
        var_monomials: builder.var_monomials,
        var_index: builder.var_index,
        blocks,
        objective,
        offset: model.offset(),
        cuts: Vec::new(),
    })
}

/// Assemble the clique-wise relaxation. Cliques with fewer than `n_t`
/// vertices get level 2, the rest level 1; `n_t = 0` therefore means level
/// 1 everywhere and a large `n_t` level 2 everywhere.
pub fn assemble(
    model: &SpinModel,
    decomp: &CliqueDecomposition,
    n_t: usize,
) -> Result<RelaxationProblem> {
    let mut builder = Builder::new();
    let mut blocks = Vec::with_capacity(decomp.cliques().len());
    for clique in decomp.cliques() {
        let level = if clique.len() < n_t { 2 } else { 1 };
        blocks.push(builder.block(clique, level));
    }
    finish(builder, blocks, model)
}

/// Largest spin count accepted by the dense level-2 reference relaxation.
pub const DENSE_LEVEL2_CAP: usize = 12;

/// Single-block relaxation over all spins; the flat reference the
/// clique-wise assembly is tested against. Level 2 is capped at
/// [`DENSE_LEVEL2_CAP`] spins because its basis grows quadratically.
pub fn assemble_dense(model: &SpinModel, level: u8) -> Result<RelaxationProblem> {
    if level != 1 && level != 2 {
        return Err(Error::InvalidParams(format!("level {level} is not 1 or 2")));
    }
    if level == 2 && model.n() > DENSE_LEVEL2_CAP {
        return Err(Error::TooLarge {
            what: "dense level-2 relaxation",
            n: model.n(),
            cap: DENSE_LEVEL2_CAP,
        });
    }
    let all: Vec<usize> = (0..model.n()).collect();
    let mut builder = Builder::new();
    let blocks = if all.is_empty() { Vec::new() } else { vec![builder.block(&all, level)] };
    finish(builder, blocks, model)
}

/// The four triangle sign patterns with an even number of minus signs,
/// as coefficients on `(y_ij, y_ik, y_jk)`.
const TRIANGLE_PATTERNS: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// Scan level-1 blocks for vertex triples whose pair moments violate a
/// triangle inequality by more than `tol`; return the `max_new` most
/// violated as cuts, sorted by violation descending (ties by key).
/// Level-2 blocks are skipped: their PSD constraint implies all four
/// inequalities. Cuts already present in `problem` are not re-proposed.
pub fn find_violated_triangles(
    problem: &RelaxationProblem,
    y: &[f64],
    max_new: usize,
    tol: f64,
) -> Vec<Cut> {
    let existing: std::collections::HashSet<_> =
        problem.cuts.iter().map(|c| c.key).collect();
    let mut seen = std::collections::HashSet::new();
    let mut found: Vec<(f64, Cut)> = Vec::new();
    for block in &problem.blocks {
        if block.level != 1 {
            continue;
        }
        let c = &block.clique;
        for (ai, &i) in c.iter().enumerate() {
            for (bi, &j) in c.iter().enumerate().skip(ai + 1) {
                for &k in &c[bi + 1..] {
                    let (vij, vik, vjk) = match (
                        problem.variable(&Monomial(vec![i, j])),
                        problem.variable(&Monomial(vec![i, k])),
                        problem.variable(&Monomial(vec![j, k])),
                    ) {
                        (Some(a), Some(b), Some(c)) => (a, b, c),
                        _ => continue,
                    };
                    for (p, signs) in TRIANGLE_PATTERNS.iter().enumerate() {
                        let key = (i, j, k, p as u8);
                        let value =
                            signs[0] * y[vij] + signs[1] * y[vik] + signs[2] * y[vjk];
                        let violation = -1.0 - value;
                        if violation > tol
                            && !existing.contains(&key)
                            && seen.insert(key)
                        {
                            let cut = Cut {
                                terms: vec![
                                    (vij, signs[0]),
                                    (vik, signs[1]),
                                    (vjk, signs[2]),
                                ],
                                key,
                            };
                            found.push((violation, cut));
                        }
                    }
                }
            }
        }
    }
    found.sort_by(|a, b| {
        b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.key.cmp(&b.1.key))
    });
    found.truncate(max_new);
    found.into_iter().map(|(_, c)| c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordal::{chordal_extension, dependency_graph};
    use crate::model::{gen_random, gen_square, SpinModel};

    fn triangle_model() -> SpinModel {
        SpinModel::new(3, vec![(0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)], vec![], 0.0).unwrap()
    }

    fn chain_model() -> SpinModel {
        SpinModel::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)], vec![], 0.0).unwrap()
    }

    fn assemble_for(model: &SpinModel, n_t: usize) -> RelaxationProblem {
        let g = dependency_graph(model);
        let d = chordal_extension(&g);
        assemble(model, &d, n_t).unwrap()
    }

    #[test]
    fn monomial_algebra() {
        let a = Monomial::new(&[2, 1]);
        assert_eq!(a.indices(), &[1, 2]);
        assert_eq!(Monomial::new(&[1, 1]), Monomial::one());
        assert_eq!(Monomial::new(&[1, 2, 2, 3]).indices(), &[1, 3]);
        let b = Monomial::new(&[2, 3]);
        assert_eq!(a.product(&b).indices(), &[1, 3]);
        assert_eq!(a.product(&a), Monomial::one());
        assert_eq!(Monomial::one().product(&a), a);
    }

    #[test]
    fn basis_shapes() {
        let b1 = build_basis(&[0, 1, 2], 1);
        assert_eq!(b1.len(), 4);
        let b2 = build_basis(&[0, 1, 2], 2);
        assert_eq!(b2.len(), 7);
        assert_eq!(b2[0], Monomial::one());
        assert_eq!(b2[4].indices(), &[0, 1]);
        assert_eq!(b2[6].indices(), &[1, 2]);
        assert_eq!(build_basis(&[5], 2).len(), 2);
    }

    #[test]
    fn triangle_level2_block_is_7x7_with_identifications() {
        let p = assemble_for(&triangle_model(), 100);
        assert_eq!(p.blocks().len(), 1);
        let block = &p.blocks()[0];
        assert_eq!(block.dim(), 7);
        assert_eq!(block.entries.len(), 21);
        // Entry ({0},{0,1}) and entry (1,{1}) are both the moment of spin 1.
        let var_of = |r: usize, c: usize| {
            block.entries.iter().find(|&&(a, b, _)| (a, b) == (r, c)).unwrap().2
        };
        assert_eq!(var_of(1, 4), var_of(0, 2));
        assert_eq!(var_of(2, 6), var_of(0, 3));
        // Pair moments appear both as products of singletons and against one.
        assert_eq!(var_of(1, 2), var_of(0, 4));
        // Singleton times a disjoint pair yields the three-body moment, so
        // the variable set is 3 singletons + 3 pairs + 1 triple.
        assert_eq!(var_of(1, 6), var_of(2, 5));
        assert_eq!(var_of(1, 6), var_of(3, 4));
        assert_eq!(p.num_vars(), 7);
    }

    #[test]
    fn chain_level2_gives_two_4x4_blocks_sharing_middle_spin() {
        let p = assemble_for(&chain_model(), 7);
        assert_eq!(p.blocks().len(), 2);
        for b in p.blocks() {
            assert_eq!(b.level, 2);
            assert_eq!(b.dim(), 4);
        }
        let middle = p.singleton_variable(1).unwrap();
        for b in p.blocks() {
            assert!(
                b.entries.iter().any(|&(_, _, v)| v == middle),
                "middle-spin moment missing from a block"
            );
        }
        // 3 singletons + 2 pair moments; the pair vars are distinct.
        assert_eq!(p.num_vars(), 5);
        let p01 = p.variable(&Monomial::new(&[0, 1])).unwrap();
        let p12 = p.variable(&Monomial::new(&[1, 2])).unwrap();
        assert_ne!(p01, p12);
        assert!(p.variable(&Monomial::new(&[0, 2])).is_none());
    }

    #[test]
    fn level_assignment_follows_threshold() {
        let m = gen_square(3, 0.0, 0);
        let g = dependency_graph(&m);
        let d = chordal_extension(&g);
        let all1 = assemble(&m, &d, 0).unwrap();
        assert!(all1.blocks().iter().all(|b| b.level == 1));
        let all2 = assemble(&m, &d, usize::MAX).unwrap();
        assert!(all2.blocks().iter().all(|b| b.level == 2));
        for b in all1.blocks() {
            assert_eq!(b.dim(), b.clique.len() + 1);
        }
        for b in all2.blocks() {
            let c = b.clique.len();
            assert_eq!(b.dim(), 1 + c + c * (c - 1) / 2);
        }
        assert_eq!(all1.blocks().len(), d.cliques().len());
    }

    #[test]
    fn objective_matches_model_terms() {
        let m = SpinModel::new(
            3,
            vec![(0, 1, 2.0), (1, 2, -0.5)],
            vec![(0, 0.25), (2, -1.0)],
            0.5,
        )
        .unwrap();
        let p = assemble_for(&m, 7);
        let coeff = |mono: Monomial| {
            let v = p.variable(&mono).unwrap();
            p.objective().iter().find(|&&(k, _)| k == v).map(|&(_, c)| c).unwrap_or(0.0)
        };
        assert_eq!(coeff(Monomial::new(&[0, 1])), -2.0);
        assert_eq!(coeff(Monomial::new(&[1, 2])), 0.5);
        assert_eq!(coeff(Monomial::new(&[0])), 0.25);
        assert_eq!(coeff(Monomial::new(&[2])), -1.0);
        assert_eq!(p.offset(), 0.5);
    }

    #[test]
    fn moment_vectors_of_configurations_are_feasible() {
        for seed in [1u64, 2, 3] {
            let m = gen_random(10, 0.5, seed);
            for n_t in [0usize, 7, usize::MAX] {
                let p = assemble_for(&m, n_t);
                let mut src = crate::rng::Source::new(seed + 100);
                let spins: Vec<i8> =
                    (0..10).map(|_| if src.uniform() < 0.5 { -1 } else { 1 }).collect();
                let config = SpinConfiguration::new(spins).unwrap();
                let y = p.moment_vector(&config);
                for b in 0..p.blocks().len() {
                    let mat = p.block_matrix(b, &y);
                    let eig = mat.symmetric_eigen();
                    let min = eig.eigenvalues.min();
                    assert!(min >= -1e-9, "block {b} has eigenvalue {min}");
                }
                let e = crate::model::energy(&m, &config).unwrap();
                let obj = p.objective_value(&y);
                assert!((e - obj).abs() <= 1e-9 * (1.0 + e.abs()));
                for cut in find_violated_triangles(&p, &y, 100, 1e-9) {
                    panic!("configuration moments violate a triangle cut {:?}", cut.key);
                }
            }
        }
    }

    #[test]
    fn equal_monomials_share_one_variable_everywhere() {
        let m = gen_square(3, 1.0, 4);
        let p = assemble_for(&m, 5);
        let mut seen: HashMap<Monomial, usize> = HashMap::new();
        for block in p.blocks() {
            for &(r, c, v) in &block.entries {
                let mono = block.basis[r].product(&block.basis[c]);
                match seen.entry(mono) {
                    std::collections::hash_map::Entry::Occupied(e) => {
                        assert_eq!(*e.get(), v, "same monomial mapped to two variables");
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(v);
                    }
                }
            }
        }
        assert_eq!(seen.len(), p.num_vars());
    }

    // Independent count of the distinct monomials the assembly must create.
    fn expected_var_count(decomp: &CliqueDecomposition, n_t: usize) -> usize {
        let mut set = std::collections::HashSet::new();
        for clique in decomp.cliques() {
            let level = if clique.len() < n_t { 2 } else { 1 };
            let basis = build_basis(clique, level);
            for a in 0..basis.len() {
                for b in (a + 1)..basis.len() {
                    set.insert(basis[a].product(&basis[b]));
                }
            }
        }
        set.len()
    }

    #[test]
    fn variable_counts_match_independent_enumeration() {
        for (m, n_t) in [
            (gen_square(4, 0.5, 1), 7usize),
            (gen_random(12, 0.4, 2), 7),
            (gen_random(12, 0.4, 2), 0),
            (gen_square(3, 0.0, 0), usize::MAX),
        ] {
            let g = dependency_graph(&m);
            let d = chordal_extension(&g);
            let p = assemble(&m, &d, n_t).unwrap();
            assert_eq!(p.num_vars(), expected_var_count(&d, n_t));
        }
    }

    #[test]
    fn dense_reference_agrees_on_objective_and_caps() {
        let m = gen_random(8, 0.6, 5);
        let p = assemble_dense(&m, 2).unwrap();
        assert_eq!(p.blocks().len(), 1);
        assert_eq!(p.blocks()[0].dim(), 1 + 8 + 28);
        let mut src = crate::rng::Source::new(9);
        let spins: Vec<i8> = (0..8).map(|_| if src.uniform() < 0.5 { -1 } else { 1 }).collect();
        let config = SpinConfiguration::new(spins).unwrap();
        let e = crate::model::energy(&m, &config).unwrap();
        assert!((p.objective_value(&p.moment_vector(&config)) - e).abs() < 1e-9);
        assert!(assemble_dense(&gen_random(13, 0.5, 1), 2).is_err());
        assert!(assemble_dense(&m, 3).is_err());
        assert!(assemble_dense(&gen_square(5, 0.0, 0), 1).is_ok());
    }

    #[test]
    fn singleton_moments_exist_for_every_spin() {
        let m = gen_random(9, 0.2, 3);
        let p = assemble_for(&m, 7);
        for i in 0..9 {
            assert!(p.singleton_variable(i).is_some(), "spin {i} lacks a moment");
        }
    }

    #[test]
    fn triangle_cut_detection_arithmetic() {
        let m = triangle_model();
        let g = dependency_graph(&m);
        let d = chordal_extension(&g);
        let p = assemble(&m, &d, 0).unwrap();
        let vij = p.variable(&Monomial::new(&[0, 1])).unwrap();
        let vik = p.variable(&Monomial::new(&[0, 2])).unwrap();
        let vjk = p.variable(&Monomial::new(&[1, 2])).unwrap();
        let mut y = vec![0.0; p.num_vars()];
        y[vij] = -0.5;
        y[vik] = -0.5;
        y[vjk] = -0.5;
        let cuts = find_violated_triangles(&p, &y, 10, 1e-6);
        assert_eq!(cuts.len(), 1, "only the all-plus pattern is violated at -1.5");
        assert_eq!(cuts[0].key, (0, 1, 2, 0));
        // At a satisfiable point nothing is proposed.
        y[vij] = -1.0;
        y[vik] = 1.0;
        y[vjk] = -1.0;
        assert!(find_violated_triangles(&p, &y, 10, 1e-6).is_empty());
        // Existing cuts are not re-proposed.
        y[vij] = -0.5;
        y[vik] = -0.5;
        y[vjk] = -0.5;
        let p2 = p.with_cuts(cuts);
        assert!(find_violated_triangles(&p2, &y, 10, 1e-6).is_empty());
        assert_eq!(p2.cuts().len(), 1);
    }

    #[test]
    fn cut_ranking_and_batch_limit() {
        let m = gen_square(3, 0.0, 0);
        let g = dependency_graph(&m);
        let d = chordal_extension(&g);
        let p = assemble(&m, &d, 0).unwrap();
        let y = vec![-0.9; p.num_vars()];
        let all = find_violated_triangles(&p, &y, usize::MAX, 1e-6);
        assert!(!all.is_empty());
        let two = find_violated_triangles(&p, &y, 2, 1e-6);
        assert_eq!(two.len(), 2);
        assert_eq!(two[0], all[0]);
        assert_eq!(two[1], all[1]);
    }

    #[test]
    fn level2_blocks_are_not_scanned() {
        let m = triangle_model();
        let g = dependency_graph(&m);
        let d = chordal_extension(&g);
        let p = assemble(&m, &d, usize::MAX).unwrap();
        let vij = p.variable(&Monomial::new(&[0, 1])).unwrap();
        let vik = p.variable(&Monomial::new(&[0, 2])).unwrap();
        let vjk = p.variable(&Monomial::new(&[1, 2])).unwrap();
        let mut y = vec![0.0; p.num_vars()];
        y[vij] = -0.9;
        y[vik] = -0.9;
        y[vjk] = -0.9;
        assert!(find_violated_triangles(&p, &y, 10, 1e-6).is_empty());
    }

    #[test]
    fn export_text_shape() {
        let p = assemble_for(&chain_model(), 7);
        let text = p.export_text();
        assert!(text.starts_with("vars 5\n"));
        assert_eq!(text.matches("block ").count(), 2);
        assert_eq!(text.matches("obj ").count(), 2);
    }

    #[test]
    fn empty_model_assembles_empty_problem() {
        let m = SpinModel::empty(0);
        let g = dependency_graph(&m);
        let d = chordal_extension(&g);
        let p = assemble(&m, &d, 7).unwrap();
        assert_eq!(p.num_vars(), 0);
        assert!(p.blocks().is_empty());
        assert_eq!(p.objective_value(&[]), 0.0);
    }
}
