//! Chordal structure of the coupling graph.
//!
//! The solver decomposes a model's dependency graph in three steps:
//!
//! 1. run the minimum-degree elimination game (lowest vertex index breaks
//!    ties), recording the neighborhood of each vertex at elimination,
//! 2. add the recorded fill edges, which makes the elimination order a
//!    perfect elimination ordering of the extended graph,
//! 3. read the maximal cliques off the elimination fronts.
//!
//! Chordality itself is checked independently with lexicographic BFS: the
//! reverse of a Lex-BFS visit order is a perfect elimination ordering
//! exactly when the graph is chordal, and a failed check is turned into an
//! explicit chordless cycle witness.

use crate::error::{Error, Result};
use crate::model::SpinModel;

/// Undirected graph with one vertex per spin and one edge per coupling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl DependencyGraph {
    /// Build a graph from an edge list. Self-loops and out-of-range
    /// indices are rejected; duplicate edges collapse.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidModel(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::IndexOutOfRange { index: a.max(b), size: n });
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut edge_count = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Ok(Self { n, adj, edge_count: edge_count / 2 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Edges as sorted `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for a in 0..self.n {
            for &b in &self.adj[a] {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Graph on the model's spins with one edge per stored coupling.
pub fn dependency_graph(model: &SpinModel) -> DependencyGraph {
    let edges: Vec<(usize, usize)> =
        model.couplings().iter().map(|&(a, b, _)| (a, b)).collect();
    DependencyGraph::new(model.n(), &edges).expect("model invariants imply a valid graph")
}

/// Outcome of a chordality check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChordalityCheck {
    Chordal,
    /// Vertices of a chordless cycle of length at least 4, in cycle order.
    ChordlessCycle(Vec<usize>),
}

/// Check chordality; on failure return a chordless cycle witness.
pub fn check_chordal(g: &DependencyGraph) -> ChordalityCheck {
    let visit = lex_bfs(g);
    let mut order: Vec<usize> = visit;
    order.reverse();
    if find_peo_violation(g, &order).is_none() {
        return ChordalityCheck::Chordal;
    }
    let cycle = find_chordless_cycle(g)
        .expect("a graph whose Lex-BFS ordering is not perfect contains a chordless cycle");
    ChordalityCheck::ChordlessCycle(cycle)
}

/// True when every cycle of length at least 4 has a chord.
pub fn is_chordal(g: &DependencyGraph) -> bool {
    matches!(check_chordal(g), ChordalityCheck::Chordal)
}

/// Lexicographic BFS visit order, smallest index first among ties.
fn lex_bfs(g: &DependencyGraph) -> Vec<usize> {
    let mut cells: Vec<Vec<usize>> = if g.n == 0 { Vec::new() } else { vec![(0..g.n).collect()] };
    let mut order = Vec::with_capacity(g.n);
    while let Some(first) = cells.first_mut() {
        let v = first.remove(0);
        if first.is_empty() {
            cells.remove(0);
        }
        order.push(v);
        let mut next = Vec::with_capacity(cells.len() * 2);
        for cell in cells {
            let (inside, outside): (Vec<usize>, Vec<usize>) =
                cell.into_iter().partition(|&u| g.has_edge(u, v));
            if !inside.is_empty() {
                next.push(inside);
            }
            if !outside.is_empty() {
                next.push(outside);
            }
        }
        cells = next;
    }
    order
}

/// First violation of the perfect-elimination property of `order`, as
/// `(v, u, w)`: `u`, `w` are later neighbors of `v` with no edge `u-w`.
pub(crate) fn find_peo_violation(
    g: &DependencyGraph,
    order: &[usize],
) -> Option<(usize, usize, usize)> {
    let mut pos = vec![0usize; g.n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    for &v in order {
        let later: Vec<usize> =
            g.neighbors(v).iter().copied().filter(|&u| pos[u] > pos[v]).collect();
        if later.len() < 2 {
            continue;
        }
        let &u = later.iter().min_by_key(|&&x| pos[x]).unwrap();
        for &w in &later {
            if w != u && !g.has_edge(u, w) {
                return Some((v, u, w));
            }
        }
    }
    None
}

/// Find some chordless cycle of length >= 4 by direct search: for a center
/// `x` with non-adjacent neighbors `u, w`, a shortest `u-w` path avoiding
/// the rest of `N[x]` closes into a chordless cycle through `x`.
fn find_chordless_cycle(g: &DependencyGraph) -> Option<Vec<usize>> {
    for x in 0..g.n {
        let nb = g.neighbors(x);
        for (ai, &u) in nb.iter().enumerate() {
            for &w in &nb[ai + 1..] {
                if g.has_edge(u, w) {
                    continue;
                }
                let mut blocked = vec![false; g.n];
                blocked[x] = true;
                for &y in nb {
                    blocked[y] = true;
                }
                blocked[u] = false;
                blocked[w] = false;
                if let Some(path) = shortest_path(g, u, w, &blocked) {
                    let mut cycle = vec![x];
                    cycle.extend(path);
                    debug_assert!(cycle.len() >= 4);
                    return Some(cycle);
                }
            }
        }
    }
    None
}

fn shortest_path(
    g: &DependencyGraph,
    from: usize,
    to: usize,
    blocked: &[bool],
) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; g.n];
    let mut queue = std::collections::VecDeque::new();
    prev[from] = from;
    queue.push_back(from);
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &u in g.neighbors(v) {
            if !blocked[u] && prev[u] == usize::MAX {
                prev[u] = v;
                queue.push_back(u);
            }
        }
    }
    None
}

/// Chordal extension of a graph together with its maximal cliques.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueDecomposition {
    /// Maximal cliques of the extended graph, each sorted ascending, listed
    /// by (minimal member, then lexicographic) order.
    cliques: Vec<Vec<usize>>,
    /// Vertex elimination order; a perfect elimination ordering of the
    /// extended graph.
    elimination_order: Vec<usize>,
    /// Edges added by elimination, `i < j`, sorted.
    fill_edges: Vec<(usize, usize)>,
}

impl CliqueDecomposition {
    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn elimination_order(&self) -> &[usize] {
        &self.elimination_order
    }

    pub fn fill_edges(&self) -> &[(usize, usize)] {
        &self.fill_edges
    }

    pub fn max_clique_size(&self) -> usize {
        self.cliques.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Original graph plus fill edges.
    pub fn extended(&self, g: &DependencyGraph) -> DependencyGraph {
        let mut edges = g.edges();
        edges.extend_from_slice(&self.fill_edges);
        DependencyGraph::new(g.n(), &edges).expect("fill edges lie in range")
    }

    /// Plain-text dump: elimination order, fill edges, one clique per line.
    pub fn dump(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let order: Vec<String> = self.elimination_order.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "order: {}", order.join(" "));
        for &(a, b) in &self.fill_edges {
            let _ = writeln!(out, "fill: {a} {b}");
        }
        for c in &self.cliques {
            let strs: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "clique: {}", strs.join(" "));
        }
        out
    }
}

/// Minimum-degree chordal extension.
///
/// Repeatedly eliminates a remaining vertex of minimum current degree
/// (lowest index on ties), turning its remaining neighborhood into a
/// clique. The fronts `{v} union N(v)` at elimination time, with dominated
/// sets removed, are exactly the maximal cliques of the extended graph.
/// Isolated vertices yield singleton cliques.
pub fn chordal_extension(g: &DependencyGraph) -> CliqueDecomposition {
    let n = g.n;
    let mut adj: Vec<std::collections::HashSet<usize>> =
        g.adj.iter().map(|l| l.iter().copied().collect()).collect();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    let mut fronts: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut fill = Vec::new();

    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (adj[v].len(), v))
            .expect("an alive vertex remains");
        let mut front: Vec<usize> = adj[v].iter().copied().collect();
        front.sort_unstable();
        for (i, &a) in front.iter().enumerate() {
            for &b in &front[i + 1..] {
                if adj[a].insert(b) {
                    adj[b].insert(a);
                    fill.push((a.min(b), a.max(b)));
                }
            }
        }
        for &u in &front {
            adj[u].remove(&v);
        }
        adj[v].clear();
        alive[v] = false;
        order.push(v);
        fronts.push(front);
    }
    fill.sort_unstable();

    // Candidate cliques, dropping those contained in another candidate.
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(n);
    for (k, &v) in order.iter().enumerate() {
        let mut c = fronts[k].clone();
        c.push(v);
        c.sort_unstable();
        candidates.push(c);
    }
    let mut keep = vec![true; candidates.len()];
    for i in 0..candidates.len() {
        if !keep[i] {
            continue;
        }
        for j in 0..candidates.len() {
            if i != j
                && keep[j]
                && candidates[i].len() <= candidates[j].len()
                && (candidates[i].len() < candidates[j].len() || i > j)
                && is_subset(&candidates[i], &candidates[j])
            {
                keep[i] = false;
                break;
            }
        }
    }
    let mut cliques: Vec<Vec<usize>> =
        candidates.into_iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect();
    cliques.sort();

    CliqueDecomposition { cliques, elimination_order: order, fill_edges: fill }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut it = b.iter();
    a.iter().all(|x| it.by_ref().any(|y| y == x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_chimera, gen_random, gen_square, gen_triangular};

    fn graph(n: usize, edges: &[(usize, usize)]) -> DependencyGraph {
        DependencyGraph::new(n, edges).unwrap()
    }

    /// Witness validity: a cycle of length >= 4 whose only edges among its
    /// vertices are the consecutive ones.
    fn assert_chordless_cycle(g: &DependencyGraph, cycle: &[usize]) {
        assert!(cycle.len() >= 4, "cycle {cycle:?} too short");
        let k = cycle.len();
        for i in 0..k {
            for j in (i + 1)..k {
                let consecutive = j == i + 1 || (i == 0 && j == k - 1);
                assert_eq!(
                    g.has_edge(cycle[i], cycle[j]),
                    consecutive,
                    "edge ({},{}) in cycle {cycle:?}",
                    cycle[i],
                    cycle[j]
                );
            }
        }
    }

    #[test]
    fn graph_basics() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(1, 0));
        assert!(!g.has_edge(0, 2));
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert!(DependencyGraph::new(2, &[(0, 0)]).is_err());
        assert!(DependencyGraph::new(2, &[(0, 5)]).is_err());
    }

    #[test]
    fn dependency_graph_of_model() {
        let m = gen_square(3, 1.5, 1);
        let g = dependency_graph(&m);
        assert_eq!(g.n(), 9);
        assert_eq!(g.edge_count(), 12);
    }

    #[test]
    fn paths_trees_and_complete_graphs_are_chordal() {
        assert!(is_chordal(&graph(3, &[(0, 1), (1, 2)])));
        assert!(is_chordal(&graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)])));
        assert!(is_chordal(&graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])));
        assert!(is_chordal(&graph(0, &[])));
        assert!(is_chordal(&graph(3, &[])));
    }

    #[test]
    fn four_cycle_yields_witness() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        match check_chordal(&g) {
            ChordalityCheck::ChordlessCycle(c) => {
                assert_eq!(c.len(), 4);
                assert_chordless_cycle(&g, &c);
            }
            ChordalityCheck::Chordal => panic!("4-cycle reported chordal"),
        }
    }

    #[test]
    fn six_cycle_with_long_chordless_hole() {
        let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]);
        match check_chordal(&g) {
            ChordalityCheck::ChordlessCycle(c) => assert_chordless_cycle(&g, &c),
            ChordalityCheck::Chordal => panic!("6-cycle reported chordal"),
        }
    }

    #[test]
    fn grid_is_not_chordal_but_extension_is() {
        let g = dependency_graph(&gen_square(3, 0.0, 0));
        assert!(!is_chordal(&g));
        let d = chordal_extension(&g);
        assert!(is_chordal(&d.extended(&g)));
    }

    #[test]
    fn path_extension_has_no_fill() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let d = chordal_extension(&g);
        assert!(d.fill_edges().is_empty());
        assert_eq!(d.cliques(), &[vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn four_cycle_extension() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let d = chordal_extension(&g);
        assert_eq!(d.fill_edges().len(), 1);
        assert_eq!(d.cliques().len(), 2);
        assert_eq!(d.max_clique_size(), 3);
    }

    #[test]
    fn complete_graph_is_one_clique() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let d = chordal_extension(&g);
        assert!(d.fill_edges().is_empty());
        assert_eq!(d.cliques(), &[vec![0, 1, 2, 3]]);
    }

    #[test]
    fn isolated_vertices_become_singleton_cliques() {
        let g = graph(3, &[(0, 1)]);
        let d = chordal_extension(&g);
        assert_eq!(d.cliques(), &[vec![0, 1], vec![2]]);
    }

    #[test]
    fn empty_graph_decomposition() {
        let d = chordal_extension(&graph(0, &[]));
        assert!(d.cliques().is_empty());
        assert_eq!(d.max_clique_size(), 0);
    }

    #[test]
    fn elimination_order_is_peo_of_extension() {
        for g in [
            dependency_graph(&gen_square(4, 0.0, 0)),
            dependency_graph(&gen_triangular(3, 4, 0.0, 0)),
            dependency_graph(&gen_chimera(2, 0.0, 0)),
            dependency_graph(&gen_random(12, 0.4, 5)),
        ] {
            let d = chordal_extension(&g);
            let ext = d.extended(&g);
            assert!(find_peo_violation(&ext, d.elimination_order()).is_none());
        }
    }

    #[test]
    fn cliques_cover_all_edges() {
        for g in [
            dependency_graph(&gen_square(5, 0.0, 0)),
            dependency_graph(&gen_chimera(2, 0.0, 0)),
            dependency_graph(&gen_random(14, 0.3, 2)),
        ] {
            let d = chordal_extension(&g);
            for (a, b) in g.edges() {
                assert!(
                    d.cliques().iter().any(|c| c.binary_search(&a).is_ok()
                        && c.binary_search(&b).is_ok()),
                    "edge ({a},{b}) not covered"
                );
            }
        }
    }

    #[test]
    fn no_clique_contains_another_and_order_is_canonical() {
        let g = dependency_graph(&gen_random(13, 0.35, 8));
        let d = chordal_extension(&g);
        let cs = d.cliques();
        for i in 0..cs.len() {
            assert!(cs[i].windows(2).all(|w| w[0] < w[1]), "clique not sorted");
            if i > 0 {
                assert!(cs[i - 1] < cs[i], "clique list not canonically ordered");
            }
            for j in 0..cs.len() {
                if i != j {
                    assert!(!is_subset(&cs[i], &cs[j]), "clique {i} inside {j}");
                }
            }
        }
    }

    #[test]
    fn extension_is_deterministic_and_idempotent() {
        let g = dependency_graph(&gen_random(12, 0.4, 3));
        let d1 = chordal_extension(&g);
        let d2 = chordal_extension(&g);
        assert_eq!(d1, d2);
        let ext = d1.extended(&g);
        let d3 = chordal_extension(&ext);
        assert!(d3.fill_edges().is_empty(), "extension of a chordal graph needs no fill");
        let mut a = d1.cliques().to_vec();
        let mut b = d3.cliques().to_vec();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    // Independent replay of the elimination game, structured differently:
    // BTreeSet adjacency, degrees recomputed from scratch each round.
    fn replay_min_degree(g: &DependencyGraph) -> (usize, usize) {
        use std::collections::BTreeSet;
        let mut adj: Vec<BTreeSet<usize>> =
            (0..g.n()).map(|v| g.neighbors(v).iter().copied().collect()).collect();
        let mut remaining: BTreeSet<usize> = (0..g.n()).collect();
        let mut fill = 0usize;
        let mut largest = 0usize;
        while !remaining.is_empty() {
            let v = remaining
                .iter()
                .copied()
                .map(|v| (adj[v].len(), v))
                .min()
                .map(|(_, v)| v)
                .unwrap();
            let front: Vec<usize> = adj[v].iter().copied().collect();
            largest = largest.max(front.len() + 1);
            for (i, &a) in front.iter().enumerate() {
                for &b in &front[i + 1..] {
                    if adj[a].insert(b) {
                        adj[b].insert(a);
                        fill += 1;
                    }
                }
            }
            for &u in &front {
                adj[u].remove(&v);
            }
            adj[v].clear();
            remaining.remove(&v);
        }
        (fill, largest)
    }

    #[test]
    fn grid_fill_matches_independent_replay() {
        let g = dependency_graph(&gen_square(3, 0.0, 0));
        let (fill, largest) = replay_min_degree(&g);
        let d = chordal_extension(&g);
        assert_eq!(d.fill_edges().len(), fill);
        assert_eq!(d.max_clique_size(), largest);
    }

    #[test]
    fn random_graphs_match_independent_replay() {
        for seed in [1u64, 4, 7, 11] {
            let g = dependency_graph(&gen_random(15, 0.3, seed));
            let (fill, largest) = replay_min_degree(&g);
            let d = chordal_extension(&g);
            assert_eq!(d.fill_edges().len(), fill, "seed {seed}");
            assert_eq!(d.max_clique_size(), largest, "seed {seed}");
        }
    }

    // Bron-Kerbosch with pivoting; independent oracle for maximal cliques.
    fn bron_kerbosch(g: &DependencyGraph) -> Vec<Vec<usize>> {
        fn recurse(
            g: &DependencyGraph,
            r: &mut Vec<usize>,
            mut p: Vec<usize>,
            mut x: Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if p.is_empty() && x.is_empty() {
                let mut c = r.clone();
                c.sort_unstable();
                out.push(c);
                return;
            }
            let pivot = p
                .iter()
                .chain(x.iter())
                .copied()
                .max_by_key(|&u| p.iter().filter(|&&w| g.has_edge(u, w)).count())
                .unwrap();
            let candidates: Vec<usize> =
                p.iter().copied().filter(|&v| !g.has_edge(pivot, v)).collect();
            for v in candidates {
                r.push(v);
                let p2 = p.iter().copied().filter(|&u| g.has_edge(u, v)).collect();
                let x2 = x.iter().copied().filter(|&u| g.has_edge(u, v)).collect();
                recurse(g, r, p2, x2, out);
                r.pop();
                p.retain(|&u| u != v);
                x.push(v);
            }
        }
        let mut out = Vec::new();
        let mut r = Vec::new();
        recurse(g, &mut r, (0..g.n()).collect(), Vec::new(), &mut out);
        out.sort();
        out
    }

    #[test]
    fn cliques_match_bron_kerbosch_oracle() {
        let graphs = vec![
            dependency_graph(&gen_square(3, 0.0, 0)),
            dependency_graph(&gen_square(4, 0.0, 0)),
            dependency_graph(&gen_triangular(3, 3, 0.0, 0)),
            dependency_graph(&gen_chimera(1, 0.0, 0)),
            dependency_graph(&gen_random(12, 0.3, 1)),
            dependency_graph(&gen_random(12, 0.5, 2)),
            graph(3, &[(0, 1)]),
        ];
        for g in graphs {
            let d = chordal_extension(&g);
            let ext = d.extended(&g);
            let expected = bron_kerbosch(&ext);
            assert_eq!(d.cliques(), expected.as_slice());
        }
    }

    #[test]
    fn dump_lists_order_fill_and_cliques() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let d = chordal_extension(&g);
        let text = d.dump();
        assert!(text.starts_with("order: "));
        assert_eq!(text.matches("fill: ").count(), 1);
        assert_eq!(text.matches("clique: ").count(), 2);
    }
}
