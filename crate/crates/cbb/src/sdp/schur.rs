//! Schur complement system of the interior-point method.
//!
//! Each Newton step reduces to `H dy = g` with
//! `H[j,k] = <F_j, W F_k W>` summed over blocks, where `F_k` places ones
//! at variable `k`'s positions and `W` is the block's scaling matrix.
//! With entries owned by exactly one variable the `F_k` are linearly
//! independent and `H` is positive definite.
//!
//! `H[j,k]` is nonzero only when `j` and `k` share a block or a cut, so
//! for clique-wise relaxations `H` inherits the decomposition's sparsity.
//! Small or dense systems use a dense Cholesky; large sparse ones a
//! simplicial sparse Cholesky on a fill-reducing elimination order.

use super::lmi::LmiProblem;
use super::Scaling;
use nalgebra::DMatrix;

/// Entry contribution of a variable pair under one block's scaling.
fn pair_value(w: &DMatrix<f64>, pj: &[(usize, usize)], pk: &[(usize, usize)]) -> f64 {
    let mut v = 0.0;
    for &(r, c) in pj {
        for &(rp, cp) in pk {
            v += 2.0 * (w[(r, rp)] * w[(c, cp)] + w[(r, cp)] * w[(c, rp)]);
        }
    }
    v
}

pub(crate) enum SchurSolver {
    Dense(DenseSchur),
    Sparse(SparseSchur),
}

impl SchurSolver {
    /// Pick a representation from the coupling structure. The sparse path
    /// pays off only when the co-occurrence graph is genuinely sparse.
    pub fn new(lmi: &LmiProblem) -> Self {
        let m = lmi.m;
        if m <= 400 {
            return Self::Dense(DenseSchur::new(m));
        }
        let structure = Structure::build(lmi);
        let half = m * (m + 1) / 2;
        if structure.nnz_lower() * 10 > half * 3 {
            return Self::Dense(DenseSchur::new(m));
        }
        Self::Sparse(SparseSchur::new(lmi, structure))
    }

    #[cfg(test)]
    pub fn new_dense(lmi: &LmiProblem) -> Self {
        Self::Dense(DenseSchur::new(lmi.m))
    }

    #[cfg(test)]
    pub fn new_sparse(lmi: &LmiProblem) -> Self {
        Self::Sparse(SparseSchur::new(lmi, Structure::build(lmi)))
    }

    #[cfg(test)]
    pub fn is_sparse(&self) -> bool {
        matches!(self, Self::Sparse(_))
    }

    /// Assemble `H` for the given scaling and factor it. Fails only when
    /// the factorization breaks down numerically.
    pub fn factor(&mut self, lmi: &LmiProblem, sc: &Scaling) -> Result<(), ()> {
        match self {
            Self::Dense(d) => d.factor(lmi, sc),
            Self::Sparse(s) => s.factor(lmi, sc),
        }
    }

    /// Solve `H dy = g` with the factor from the last `factor` call.
    pub fn solve(&self, g: &[f64]) -> Vec<f64> {
        match self {
            Self::Dense(d) => d.solve(g),
            Self::Sparse(s) => s.solve(g),
        }
    }
}

pub(crate) struct DenseSchur {
    m: usize,
    factor: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
}

impl DenseSchur {
    fn new(m: usize) -> Self {
        Self { m, factor: None }
    }

    fn factor(&mut self, lmi: &LmiProblem, sc: &Scaling) -> Result<(), ()> {
        let mut h = DMatrix::zeros(self.m, self.m);
        for (b, block) in lmi.blocks.iter().enumerate() {
            let w = &sc.blocks[b].w;
            for (a, (j, pj)) in block.vars.iter().enumerate() {
                for (k, pk) in block.vars[a..].iter() {
                    let v = pair_value(w, pj, pk);
                    h[(*k, *j)] += v;
                    if k != j {
                        h[(*j, *k)] += v;
                    }
                }
            }
        }
        for (i, cut) in lmi.cuts.iter().enumerate() {
            let w2 = sc.cuts[i].w * sc.cuts[i].w;
            for (a, &(j, gj)) in cut.terms.iter().enumerate() {
                for &(k, gk) in &cut.terms[a..] {
                    let v = w2 * gj * gk;
                    h[(k, j)] += v;
                    if k != j {
                        h[(j, k)] += v;
                    }
                }
            }
        }
        let max_diag = (0..self.m).fold(0.0f64, |acc, i| acc.max(h[(i, i)]));
        for ridge in [0.0, 1e-12, 1e-9] {
            let mut trial = h.clone();
            if ridge > 0.0 {
                for i in 0..self.m {
                    trial[(i, i)] += ridge * max_diag;
                }
            }
            if let Some(f) = trial.cholesky() {
                self.factor = Some(f);
                return Ok(());
            }
        }
        Err(())
    }

    fn solve(&self, g: &[f64]) -> Vec<f64> {
        let f = self.factor.as_ref().expect("solve before factor");
        let rhs = nalgebra::DVector::from_column_slice(g);
        f.solve(&rhs).as_slice().to_vec()
    }
}

/// Lower-triangular sparsity of `H`: per column, the sorted rows `>= col`
/// that can be nonzero because the two variables share a block or cut.
struct Structure {
    cols: Vec<Vec<usize>>,
}

impl Structure {
    fn build(lmi: &LmiProblem) -> Self {
        let mut sets: Vec<std::collections::BTreeSet<usize>> =
            vec![std::collections::BTreeSet::new(); lmi.m];
        let mut note = |vars: &[usize]| {
            for (a, &j) in vars.iter().enumerate() {
                for &k in &vars[a..] {
                    let (lo, hi) = if j <= k { (j, k) } else { (k, j) };
                    sets[lo].insert(hi);
                }
            }
        };
        for block in &lmi.blocks {
            let vars: Vec<usize> = block.vars.iter().map(|&(v, _)| v).collect();
            note(&vars);
        }
        for cut in &lmi.cuts {
            let vars: Vec<usize> = cut.terms.iter().map(|&(v, _)| v).collect();
            note(&vars);
        }
        Self { cols: sets.into_iter().map(|s| s.into_iter().collect()).collect() }
    }

    fn nnz_lower(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }
}

/// Simplicial sparse Cholesky `H = L L'` on a fill-reducing permutation.
///
/// The permutation groups variables by the first block that contains them
/// and eliminates later groups first; for clique-tree structured problems
/// this is close to a perfect elimination order. The symbolic phase then
/// computes the exact fill for whatever order was chosen, so correctness
/// never depends on that heuristic.
pub(crate) struct SparseSchur {
    m: usize,
    /// `perm[new] = old`, `inv[old] = new`.
    perm: Vec<usize>,
    inv: Vec<usize>,
    /// Column pointers and row indices of `L` (diagonal first, ascending).
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    /// Numeric values of `L`, aligned with `rows`.
    vals: Vec<f64>,
    /// Permuted lower-triangle structure of `H` with value scratch.
    h_cols: Vec<Vec<usize>>,
    h_vals: Vec<Vec<f64>>,
    /// For each block and each in-block pair `(a, b)` with
    /// `var_new[a] >= var_new[b]`: destination `(col_list, offset)`.
    block_slots: Vec<Vec<(u32, u32)>>,
    cut_slots: Vec<Vec<(u32, u32)>>,
}

impl SparseSchur {
    fn new(lmi: &LmiProblem, structure: Structure) -> Self {
        let m = lmi.m;
        let perm = ordering(lmi);
        let mut inv = vec![0usize; m];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        // Permuted H structure, lower triangle, sorted.
        let mut h_cols: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (lo, rows) in structure.cols.iter().enumerate() {
            for &hi in rows {
                let (a, b) = (inv[lo], inv[hi]);
                let (col, row) = if a <= b { (a, b) } else { (b, a) };
                h_cols[col].push(row);
            }
        }
        for col in &mut h_cols {
            col.sort_unstable();
            col.dedup();
        }
        let h_vals: Vec<Vec<f64>> = h_cols.iter().map(|c| vec![0.0; c.len()]).collect();

        // Index tables: where each block pair lands in h_vals.
        let locate = |h_cols: &Vec<Vec<usize>>, j_old: usize, k_old: usize| -> (u32, u32) {
            let (a, b) = (inv[j_old], inv[k_old]);
            let (col, row) = if a <= b { (a, b) } else { (b, a) };
            let off = h_cols[col].binary_search(&row).expect("structure covers pair");
            (col as u32, off as u32)
        };
        let block_slots = lmi
            .blocks
            .iter()
            .map(|block| {
                let mut slots = Vec::new();
                for (a, &(j, _)) in block.vars.iter().enumerate() {
                    for &(k, _) in &block.vars[a..] {
                        slots.push(locate(&h_cols, j, k));
                    }
                }
                slots
            })
            .collect();
        let cut_slots = lmi
            .cuts
            .iter()
            .map(|cut| {
                let mut slots = Vec::new();
                for (a, &(j, _)) in cut.terms.iter().enumerate() {
                    for &(k, _) in &cut.terms[a..] {
                        slots.push(locate(&h_cols, j, k));
                    }
                }
                slots
            })
            .collect();

        let (col_ptr, rows) = symbolic(m, &h_cols);
        let vals = vec![0.0; rows.len()];
        Self { m, perm, inv, col_ptr, rows, vals, h_cols, h_vals, block_slots, cut_slots }
    }

    fn assemble(&mut self, lmi: &LmiProblem, sc: &Scaling) {
        for col in &mut self.h_vals {
            col.iter_mut().for_each(|v| *v = 0.0);
        }
        for (b, block) in lmi.blocks.iter().enumerate() {
            let w = &sc.blocks[b].w;
            let mut slot = self.block_slots[b].iter();
            for (a, (_, pj)) in block.vars.iter().enumerate() {
                for (_, pk) in block.vars[a..].iter() {
                    let &(col, off) = slot.next().unwrap();
                    self.h_vals[col as usize][off as usize] += pair_value(w, pj, pk);
                }
            }
        }
        for (i, cut) in lmi.cuts.iter().enumerate() {
            let w2 = sc.cuts[i].w * sc.cuts[i].w;
            let mut slot = self.cut_slots[i].iter();
            for (a, &(_, gj)) in cut.terms.iter().enumerate() {
                for &(_, gk) in &cut.terms[a..] {
                    let &(col, off) = slot.next().unwrap();
                    self.h_vals[col as usize][off as usize] += w2 * gj * gk;
                }
            }
        }
    }

    fn factor(&mut self, lmi: &LmiProblem, sc: &Scaling) -> Result<(), ()> {
        self.assemble(lmi, sc);
        let max_diag = (0..self.m).fold(0.0f64, |acc, j| {
            debug_assert_eq!(self.h_cols[j].first(), Some(&j), "missing diagonal");
            acc.max(self.h_vals[j][0])
        });
        for ridge in [0.0, 1e-12, 1e-9] {
            if self.try_numeric(ridge * max_diag) {
                return Ok(());
            }
        }
        Err(())
    }

    /// Left-looking numeric factorization over the precomputed pattern.
    fn try_numeric(&mut self, ridge: f64) -> bool {
        let m = self.m;
        let nz = self.rows.len();
        self.vals.iter_mut().for_each(|v| *v = 0.0);
        // Scatter target: dense accumulator plus per-column update lists.
        let mut acc = vec![0.0f64; m];
        // next[k] = position in column k to process next; link[j] = head of
        // the list of columns whose next row is j.
        let mut next = vec![0usize; m];
        let mut link: Vec<i64> = vec![-1; m];
        let mut link_next: Vec<i64> = vec![-1; m];
        let _ = nz;
        for j in 0..m {
            // Load column j of H.
            for (idx, &r) in self.h_cols[j].iter().enumerate() {
                acc[r] = self.h_vals[j][idx];
            }
            acc[j] += ridge;
            // Apply updates from earlier columns k with L[j,k] != 0.
            let mut k = link[j];
            while k >= 0 {
                let kc = k as usize;
                let knext = link_next[kc];
                let p = next[kc];
                let ljk = self.vals[p];
                let end = self.col_ptr[kc + 1];
                for q in p..end {
                    acc[self.rows[q]] -= ljk * self.vals[q];
                }
                // Advance column k to its next row and relink.
                let p1 = p + 1;
                next[kc] = p1;
                if p1 < end {
                    let nr = self.rows[p1];
                    link_next[kc] = link[nr];
                    link[nr] = k;
                }
                k = knext;
            }
            // Finish column j.
            let start = self.col_ptr[j];
            let end = self.col_ptr[j + 1];
            let d = acc[j];
            if !(d > 0.0) || !d.is_finite() {
                // Reset scratch before bailing out.
                for q in start..end {
                    acc[self.rows[q]] = 0.0;
                }
                for v in &mut link {
                    *v = -1;
                }
                for v in &mut link_next {
                    *v = -1;
                }
                return false;
            }
            let dsqrt = d.sqrt();
            self.vals[start] = dsqrt;
            acc[j] = 0.0;
            for q in (start + 1)..end {
                let r = self.rows[q];
                self.vals[q] = acc[r] / dsqrt;
                acc[r] = 0.0;
            }
            next[j] = start + 1;
            if start + 1 < end {
                let nr = self.rows[start + 1];
                link_next[j] = link[nr];
                link[nr] = j as i64;
            }
        }
        true
    }

    fn solve(&self, g: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut b = vec![0.0; m];
        for old in 0..m {
            b[self.inv[old]] = g[old];
        }
        // Forward: L z = b.
        for j in 0..m {
            let start = self.col_ptr[j];
            let end = self.col_ptr[j + 1];
            let z = b[j] / self.vals[start];
            b[j] = z;
            for q in (start + 1)..end {
                b[self.rows[q]] -= self.vals[q] * z;
            }
        }
        // Backward: L' x = z.
        for j in (0..m).rev() {
            let start = self.col_ptr[j];
            let end = self.col_ptr[j + 1];
            let mut v = b[j];
            for q in (start + 1)..end {
                v -= self.vals[q] * b[self.rows[q]];
            }
            b[j] = v / self.vals[start];
        }
        let mut out = vec![0.0; m];
        for new in 0..m {
            out[self.perm[new]] = b[new];
        }
        out
    }
}

/// Fill-reducing permutation: variables keyed by the first block (in the
/// decomposition's order) containing them, groups eliminated in reverse.
/// Cut variables already live in blocks, so cuts need no special casing.
fn ordering(lmi: &LmiProblem) -> Vec<usize> {
    let mut first = vec![usize::MAX; lmi.m];
    for (b, block) in lmi.blocks.iter().enumerate() {
        for &(v, _) in &block.vars {
            if first[v] == usize::MAX {
                first[v] = b;
            }
        }
    }
    let mut perm: Vec<usize> = (0..lmi.m).collect();
    perm.sort_unstable_by(|&a, &b| {
        first[b].cmp(&first[a]).then_with(|| b.cmp(&a))
    });
    perm
}

/// Exact column structure of `L` for `H` with the given lower-triangle
/// pattern: the classic elimination-tree pass, merging each child column's
/// structure into its parent.
fn symbolic(m: usize, h_cols: &[Vec<usize>]) -> (Vec<usize>, Vec<usize>) {
    let mut parent: Vec<i64> = vec![-1; m];
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut mark = vec![usize::MAX; m];
    for j in 0..m {
        let mut rows: Vec<usize> = Vec::new();
        mark[j] = j;
        for &r in &h_cols[j] {
            if r != j {
                rows.push(r);
                mark[r] = j;
            }
        }
        for &child in &children[j] {
            for &r in &col_rows[child] {
                if r > j && mark[r] != j {
                    mark[r] = j;
                    rows.push(r);
                }
            }
        }
        rows.sort_unstable();
        if let Some(&p) = rows.first() {
            parent[j] = p as i64;
            children[p].push(j);
        }
        col_rows[j] = rows;
    }
    let mut col_ptr = vec![0usize; m + 1];
    for j in 0..m {
        col_ptr[j + 1] = col_ptr[j] + 1 + col_rows[j].len();
    }
    let mut rows = Vec::with_capacity(col_ptr[m]);
    for (j, cr) in col_rows.iter().enumerate() {
        rows.push(j);
        rows.extend_from_slice(cr);
    }
    (col_ptr, rows)
}
