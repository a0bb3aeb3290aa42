//! Benchmark instance generators.
//!
//! All lattice families use unit couplings and, for `sigma > 0`, local
//! fields drawn as `sigma * z_i` with `z_i` standard normal, consumed in
//! spin-index order from a fresh seeded stream (see [`crate::rng`]). Equal
//! arguments therefore produce byte-identical instances.

use super::SpinModel;
use crate::rng::Source;

fn gaussian_fields(n: usize, sigma: f64, src: &mut Source) -> Vec<(usize, f64)> {
    assert!(sigma.is_finite() && sigma >= 0.0, "sigma must be finite and non-negative");
    if sigma == 0.0 {
        return Vec::new();
    }
    (0..n).map(|i| (i, sigma * src.gaussian())).collect()
}

/// Square lattice of `l * l` spins with open boundaries and `J = 1`.
///
/// `2 * l * (l - 1)` edges: one per horizontal and vertical neighbor pair.
pub fn gen_square(l: usize, sigma: f64, seed: u64) -> SpinModel {
    assert!(l >= 1, "side length must be at least 1");
    let n = l * l;
    let at = |r: usize, c: usize| r * l + c;
    let mut couplings = Vec::with_capacity(2 * l * (l - 1));
    for r in 0..l {
        for c in 0..l {
            if c + 1 < l {
                couplings.push((at(r, c), at(r, c + 1), 1.0));
            }
            if r + 1 < l {
                couplings.push((at(r, c), at(r + 1, c), 1.0));
            }
        }
    }
    let mut src = Source::new(seed);
    let fields = gaussian_fields(n, sigma, &mut src);
    SpinModel::new(n, couplings, fields, 0.0).expect("generator output is valid by construction")
}

/// Square grid of `rows * cols` spins plus one fixed diagonal per unit
/// square (`(r,c)-(r+1,c+1)`), all `J = 1`.
pub fn gen_triangular(rows: usize, cols: usize, sigma: f64, seed: u64) -> SpinModel {
    assert!(rows >= 1 && cols >= 1, "grid sides must be at least 1");
    let n = rows * cols;
    let at = |r: usize, c: usize| r * cols + c;
    let mut couplings = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                couplings.push((at(r, c), at(r, c + 1), 1.0));
            }
            if r + 1 < rows {
                couplings.push((at(r, c), at(r + 1, c), 1.0));
            }
            if r + 1 < rows && c + 1 < cols {
                couplings.push((at(r, c), at(r + 1, c + 1), 1.0));
            }
        }
    }
    let mut src = Source::new(seed);
    let fields = gaussian_fields(n, sigma, &mut src);
    SpinModel::new(n, couplings, fields, 0.0).expect("generator output is valid by construction")
}

/// Chimera graph: an `l * l` grid of complete bipartite `K_{4,4}` cells,
/// `8 * l * l` spins in total.
///
/// Cell `(r, c)` holds spins `8*(r*l + c) + k`, with `k in 0..4` the A side
/// and `k in 4..8` the B side. Within a cell every A spin couples to every
/// B spin. A spins couple to the same A spin of the cell below; B spins to
/// the same B spin of the cell to the right. `16*l*l + 8*l*(l-1)` edges.
pub fn gen_chimera(l: usize, sigma: f64, seed: u64) -> SpinModel {
    assert!(l >= 1, "side length must be at least 1");
    let n = 8 * l * l;
    let cell = |r: usize, c: usize| 8 * (r * l + c);
    let mut couplings = Vec::with_capacity(16 * l * l + 8 * l * (l - 1));
    for r in 0..l {
        for c in 0..l {
            let base = cell(r, c);
            for a in 0..4 {
                for b in 4..8 {
                    couplings.push((base + a, base + b, 1.0));
                }
            }
            if r + 1 < l {
                let below = cell(r + 1, c);
                for a in 0..4 {
                    couplings.push((base + a, below + a, 1.0));
                }
            }
            if c + 1 < l {
                let right = cell(r, c + 1);
                for b in 4..8 {
                    couplings.push((base + b, right + b, 1.0));
                }
            }
        }
    }
    let mut src = Source::new(seed);
    let fields = gaussian_fields(n, sigma, &mut src);
    SpinModel::new(n, couplings, fields, 0.0).expect("generator output is valid by construction")
}

/// Erdos-Renyi model: each pair `(i, j)` is coupled with probability `p`,
/// couplings and fields i.i.d. standard normal.
///
/// Draw order: pairs in lexicographic order, one uniform each, followed
/// immediately by the coupling value when the edge is kept; then one
/// normal per spin for the fields.
pub fn gen_random(n: usize, p: f64, seed: u64) -> SpinModel {
    assert!((0.0..=1.0).contains(&p), "edge probability must lie in [0, 1]");
    let mut src = Source::new(seed);
    let mut couplings = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if src.uniform() < p {
                couplings.push((i, j, src.gaussian()));
            }
        }
    }
    let fields = (0..n).map(|i| (i, src.gaussian())).collect();
    SpinModel::new(n, couplings, fields, 0.0).expect("generator output is valid by construction")
}
