//! Ising spin models: energy evaluation, exact enumeration, spin fixing,
//! benchmark instance generators, and the canonical text format.
//!
//! The Hamiltonian over configurations `s in {-1,+1}^n` is
//!
//! ```text
//! E(s) = -sum_{i<j} J_ij s_i s_j + sum_i h_i s_i + offset
//! ```
//!
//! Couplings are stored sparsely with `i < j`, zero entries are never kept,
//! and a model is fully determined by `(n, couplings, fields, offset)`.

mod gen;
mod io;

pub use gen::{gen_chimera, gen_random, gen_square, gen_triangular};
pub use io::{parse_configuration, parse_instance, serialize_instance};

use crate::error::{Error, Result};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest spin count accepted by [`brute_force_ground`].
pub const BRUTE_FORCE_CAP: usize = 24;

/// Sparse Ising model with pair couplings and local fields.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinModel {
    n: usize,
    couplings: Vec<(usize, usize, f64)>,
    fields: Vec<(usize, f64)>,
    offset: f64,
}

impl SpinModel {
    /// Build a model, normalizing each pair to `i < j` and sorting entries.
    ///
    /// Zero couplings and zero fields are dropped. Duplicate pairs or field
    /// indices, self-couplings, out-of-range indices, and non-finite values
    /// are rejected.
    pub fn new(
        n: usize,
        couplings: Vec<(usize, usize, f64)>,
        fields: Vec<(usize, f64)>,
        offset: f64,
    ) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::InvalidModel("offset must be finite".into()));
        }
        let mut cs = Vec::with_capacity(couplings.len());
        for (a, b, j) in couplings {
            if !j.is_finite() {
                return Err(Error::InvalidModel(format!("coupling ({a},{b}) is not finite")));
            }
            if a == b {
                return Err(Error::InvalidModel(format!("self-coupling at index {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::IndexOutOfRange { index: a.max(b), size: n });
            }
            if j != 0.0 {
                cs.push((a.min(b), a.max(b), j));
            }
        }
        cs.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        if let Some(w) = cs.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidModel(format!("duplicate coupling ({},{})", w[0].0, w[0].1)));
        }
        let mut fs = Vec::with_capacity(fields.len());
        for (i, h) in fields {
            if !h.is_finite() {
                return Err(Error::InvalidModel(format!("field at index {i} is not finite")));
            }
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, size: n });
            }
            if h != 0.0 {
                fs.push((i, h));
            }
        }
        fs.sort_unstable_by_key(|x| x.0);
        if let Some(w) = fs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidModel(format!("duplicate field index {}", w[0].0)));
        }
        Ok(Self { n, couplings: cs, fields: fs, offset })
    }

    /// Model with `n` spins and no terms.
    pub fn empty(n: usize) -> Self {
        Self { n, couplings: Vec::new(), fields: Vec::new(), offset: 0.0 }
    }

    /// Number of spins.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Couplings sorted by `(i, j)` with `i < j`; no zero entries.
    pub fn couplings(&self) -> &[(usize, usize, f64)] {
        &self.couplings
    }

    /// Fields sorted by index; no zero entries.
    pub fn fields(&self) -> &[(usize, f64)] {
        &self.fields
    }

    /// Constant energy offset accumulated by [`fix_spin`].
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Local field as a dense vector.
    pub fn field_vector(&self) -> Vec<f64> {
        let mut h = vec![0.0; self.n];
        for &(i, v) in &self.fields {
            h[i] = v;
        }
        h
    }

    /// Neighbor lists `(j, J_ij)` for every spin.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b, j) in &self.couplings {
            adj[a].push((b, j));
            adj[b].push((a, j));
        }
        adj
    }

    /// Hex SHA-256 digest of the canonical text form, ignoring the offset.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(io::canonical_text(self).as_bytes());
        let out = hasher.finalize();
        let mut s = String::with_capacity(64);
        for b in out {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

/// Assignment of every spin to -1 or +1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    /// Validate that every entry is -1 or +1.
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidModel(format!("spin value {bad} is not -1 or +1")));
        }
        Ok(Self(spins))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    /// Number of positions at which two configurations differ.
    pub fn hamming_distance(&self, other: &Self) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::Inconsistent(format!(
                "configuration lengths differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count())
    }
}

impl std::ops::Index<usize> for SpinConfiguration {
    type Output = i8;
    fn index(&self, i: usize) -> &i8 {
        &self.0[i]
    }
}

impl Serialize for SpinConfiguration {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpinConfiguration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<i8>::deserialize(d)?;
        SpinConfiguration::new(v).map_err(D::Error::custom)
    }
}

/// Exact ground state found by enumeration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub energy: f64,
    pub config: SpinConfiguration,
}

/// Energy of `config` under `model`, including the offset.
pub fn energy(model: &SpinModel, config: &SpinConfiguration) -> Result<f64> {
    if config.len() != model.n {
        return Err(Error::Inconsistent(format!(
            "configuration has {} spins, model has {}",
            config.len(),
            model.n
        )));
    }
    Ok(energy_of(model, config.spins()))
}

pub(crate) fn energy_of(model: &SpinModel, s: &[i8]) -> f64 {
    let mut e = model.offset;
    for &(a, b, j) in &model.couplings {
        e -= j * f64::from(s[a]) * f64::from(s[b]);
    }
    for &(i, h) in &model.fields {
        e += h * f64::from(s[i]);
    }
    e
}

/// Exact minimum energy and its lexicographically smallest configuration
/// (-1 ordered before +1), by full enumeration. Refuses `n > 24`.
///
/// Enumeration walks configurations in lexicographic order keeping an
/// incrementally updated energy; candidates within a small margin of the
/// incumbent are re-evaluated from scratch, and the running value is
/// re-synced periodically so drift can never hide a minimum.
pub fn brute_force_ground(model: &SpinModel) -> Result<OracleResult> {
    let n = model.n;
    if n > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge { what: "exact enumeration", n, cap: BRUTE_FORCE_CAP });
    }
    if n == 0 {
        return Ok(OracleResult {
            energy: model.offset,
            config: SpinConfiguration(Vec::new()),
        });
    }
    let adj = model.adjacency();
    let h = model.field_vector();

    // Bit p of the counter maps to spin n-1-p, so counting order is
    // lexicographic order with -1 (bit 0) before +1 (bit 1).
    let mut s = vec![-1i8; n];
    let mut e = energy_of(model, &s);
    let mut best = e;
    let mut best_s = s.clone();

    let total: u64 = 1 << n;
    for m in 1..total {
        let flips = m.trailing_zeros() as usize;
        for p in (0..=flips).rev() {
            let k = n - 1 - p;
            let sk = f64::from(s[k]);
            let mut coupling_sum = 0.0;
            for &(j, jkj) in &adj[k] {
                coupling_sum += jkj * f64::from(s[j]);
            }
            e += 2.0 * sk * coupling_sum - 2.0 * h[k] * sk;
            s[k] = -s[k];
        }
        if e <= best + 1e-6 * (1.0 + best.abs()) {
            let exact = energy_of(model, &s);
            e = exact;
            if exact < best {
                best = exact;
                best_s.copy_from_slice(&s);
            }
        } else if m & 0xffff == 0 {
            e = energy_of(model, &s);
        }
    }
    Ok(OracleResult { energy: best, config: SpinConfiguration(best_s) })
}

/// Fix spin `i` to `s`, returning the reduced model on the remaining spins.
///
/// Indices above `i` shift down by one. Couplings incident to `i` fold into
/// the fields (`h'_j = h_j - J_ij * s`) and the field of `i` folds into the
/// offset (`offset' = offset + h_i * s`), so ground energies are preserved:
/// the minimum of the reduced model equals the minimum of the original over
/// configurations with spin `i` fixed at `s`.
pub fn fix_spin(model: &SpinModel, i: usize, s: i8) -> Result<SpinModel> {
    if i >= model.n {
        return Err(Error::IndexOutOfRange { index: i, size: model.n });
    }
    if s != 1 && s != -1 {
        return Err(Error::InvalidModel(format!("spin value {s} is not -1 or +1")));
    }
    let sv = f64::from(s);
    let shift = |k: usize| if k < i { k } else { k - 1 };
    let mut h = model.field_vector();
    let mut offset = model.offset;
    let mut couplings = Vec::with_capacity(model.couplings.len());
    for &(a, b, j) in &model.couplings {
        if a == i {
            h[b] -= j * sv;
        } else if b == i {
            h[a] -= j * sv;
        } else {
            couplings.push((shift(a), shift(b), j));
        }
    }
    offset += h[i] * sv;
    let fields = (0..model.n)
        .filter(|&k| k != i && h[k] != 0.0)
        .map(|k| (shift(k), h[k]))
        .collect();
    SpinModel::new(model.n - 1, couplings, fields, offset)
}
