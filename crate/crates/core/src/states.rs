//! Density matrices over explicit tensor factorizations.
//!
//! Subsystem `0` is the leftmost, most significant tensor factor: the basis
//! index of `|i_0 i_1 … i_{n-1}>` is `Σ_j i_j · Π_{l>j} d_l`. Partitions and
//! index sets are 0-based in the API and printed 1-based.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, kron, kron_vec, norm, ComplexMatrix, C64, ONE, ZERO};

/// Largest total dimension accepted by [`SystemDims`].
pub const MAX_TOTAL_DIM: usize = 4096;
/// Trace and normalization tolerance for states.
pub const STATE_TOL: f64 = 1e-9;
/// `Tr ρ² ≥ 1 - PURITY_TOL` marks a state as pure.
pub const PURITY_TOL: f64 = 1e-9;

/// Local dimensions `d_0, …, d_{n-1}` of a composite system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SystemDims(Vec<usize>);

impl SystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::BadDims("at least one subsystem is required".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::BadDims(format!("local dimension {d} < 2")));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&t| t <= MAX_TOTAL_DIM);
        if total.is_none() {
            return Err(Error::BadDims(format!(
                "total dimension of {dims:?} exceeds {MAX_TOTAL_DIM}"
            )));
        }
        Ok(Self(dims))
    }

    /// `n` copies of a `d`-dimensional system.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn local(&self, i: usize) -> usize {
        self.0[i]
    }

    /// Concatenation (tensor product of the two systems).
    pub fn concat(&self, other: &Self) -> Result<Self> {
        Self::new([self.0.as_slice(), other.0.as_slice()].concat())
    }

    /// Dimensions of the listed subsystems, in the given order.
    pub fn select(&self, idx: &[usize]) -> Vec<usize> {
        idx.iter().map(|&i| self.0[i]).collect()
    }

    /// Per-subsystem digit strides (row-major, subsystem 0 most significant).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.0.len()];
        for j in (0..self.0.len().saturating_sub(1)).rev() {
            s[j] = s[j + 1] * self.0[j + 1];
        }
        s
    }
}

impl TryFrom<Vec<usize>> for SystemDims {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SystemDims> for Vec<usize> {
    fn from(d: SystemDims) -> Self {
        d.0
    }
}

/// Maps `(kept digits, traced digits)` to full basis indices.
///
/// `table[k * traced_dim + t]` is the full index whose kept subsystems read `k`
/// and whose remaining subsystems read `t`.
pub(crate) struct SplitIndex {
    pub kept_dim: usize,
    pub traced_dim: usize,
    pub table: Vec<usize>,
}

impl SplitIndex {
    pub fn new(dims: &[usize], keep: &[usize]) -> Self {
        let n = dims.len();
        let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
        let kept_dim: usize = keep.iter().map(|&i| dims[i]).product();
        let traced_dim: usize = traced.iter().map(|&i| dims[i]).product();
        let mut strides = vec![1usize; n];
        for j in (0..n.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * dims[j + 1];
        }
        let digits_to_offset = |subs: &[usize], mut idx: usize| -> usize {
            let mut off = 0;
            for &s in subs.iter().rev() {
                off += (idx % dims[s]) * strides[s];
                idx /= dims[s];
            }
            off
        };
        let kept_off: Vec<usize> = (0..kept_dim).map(|k| digits_to_offset(keep, k)).collect();
        let traced_off: Vec<usize> = (0..traced_dim).map(|t| digits_to_offset(&traced, t)).collect();
        let mut table = Vec::with_capacity(kept_dim * traced_dim);
        for &ko in &kept_off {
            for &to in &traced_off {
                table.push(ko + to);
            }
        }
        Self { kept_dim, traced_dim, table }
    }
}

/// Purity `Tr ρ_K²` of the reduced state of a pure vector on the subsystems in
/// `keep`.
pub fn reduced_purity_of_vector(psi: &[C64], dims: &[usize], keep: &[usize]) -> f64 {
    if keep.is_empty() || keep.len() == dims.len() {
        let n2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        return n2 * n2;
    }
    let split = SplitIndex::new(dims, keep);
    let (kd, td) = (split.kept_dim, split.traced_dim);
    // Gram matrix on the smaller side has the same nonzero spectrum.
    let mut acc = 0.0;
    if kd <= td {
        for a in 0..kd {
            for b in a..kd {
                let mut g = ZERO;
                for t in 0..td {
                    g += psi[split.table[a * td + t]] * psi[split.table[b * td + t]].conj();
                }
                acc += if a == b { g.norm_sqr() } else { 2.0 * g.norm_sqr() };
            }
        }
    } else {
        for a in 0..td {
            for b in a..td {
                let mut g = ZERO;
                for k in 0..kd {
                    g += psi[split.table[k * td + a]].conj() * psi[split.table[k * td + b]];
                }
                acc += if a == b { g.norm_sqr() } else { 2.0 * g.norm_sqr() };
            }
        }
    }
    acc
}

fn check_keep(n: usize, keep: &[usize]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::BadIndexSet("kept set is empty".into()));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() {
        return Err(Error::BadIndexSet(format!("duplicate indices in {keep:?}")));
    }
    if let Some(&bad) = sorted.iter().find(|&&i| i >= n) {
        return Err(Error::BadIndexSet(format!("index {bad} out of range for {n} subsystems")));
    }
    Ok(sorted)
}

/// A density matrix with its tensor factorization.
#[derive(Clone, Debug)]
pub struct QuantumState {
    dims: SystemDims,
    rho: ComplexMatrix,
    vector: Option<Vec<C64>>,
    purity: f64,
}

impl PartialEq for QuantumState {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.rho == other.rho
    }
}

impl QuantumState {
    /// Validated construction from a density matrix.
    pub fn from_density(dims: SystemDims, rho: ComplexMatrix) -> Result<Self> {
        let d = dims.total();
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::DimMismatch(format!(
                "density matrix is {}x{}, dims {:?} need {d}x{d}",
                rho.rows(),
                rho.cols(),
                dims.as_slice()
            )));
        }
        let herm = rho.hermitian_deviation();
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let low = eig_hermitian(&rho)?.values[0];
        if low < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {low:.3e}")));
        }
        Ok(Self::from_density_unchecked(dims, rho))
    }

    /// Construction for matrices already known to be states (outputs of CPTP
    /// maps, mixtures, partial traces).
    pub(crate) fn from_density_unchecked(dims: SystemDims, rho: ComplexMatrix) -> Self {
        let purity = rho.as_slice().iter().map(|z| z.norm_sqr()).sum();
        Self { dims, rho, vector: None, purity }
    }

    /// Pure state from a unit vector.
    pub fn from_vector(dims: SystemDims, psi: Vec<C64>) -> Result<Self> {
        if psi.len() != dims.total() {
            return Err(Error::DimMismatch(format!(
                "vector of length {} for dims {:?}",
                psi.len(),
                dims.as_slice()
            )));
        }
        let nrm = norm(&psi);
        if (nrm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(nrm));
        }
        Ok(Self::from_vector_unchecked(dims, psi))
    }

    pub(crate) fn from_vector_unchecked(dims: SystemDims, psi: Vec<C64>) -> Self {
        let rho = ComplexMatrix::outer(&psi, &psi);
        let n2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        Self { dims, rho, vector: Some(psi), purity: n2 * n2 }
    }

    /// Tensor product of one unit vector per subsystem.
    pub fn product_pure(locals: &[Vec<C64>], dims: &SystemDims) -> Result<Self> {
        if locals.len() != dims.len() {
            return Err(Error::DimMismatch(format!(
                "{} local vectors for {} subsystems",
                locals.len(),
                dims.len()
            )));
        }
        let mut psi = vec![ONE];
        for (i, v) in locals.iter().enumerate() {
            if v.len() != dims.local(i) {
                return Err(Error::DimMismatch(format!(
                    "subsystem {i} has dimension {} but vector has length {}",
                    dims.local(i),
                    v.len()
                )));
            }
            let nrm = norm(v);
            if (nrm - 1.0).abs() > STATE_TOL {
                return Err(Error::NotNormalized(nrm));
            }
            psi = kron_vec(&psi, v);
        }
        Ok(Self::from_vector_unchecked(dims.clone(), psi))
    }

    /// `(1/√d) Σ_i |ii>` on dims `(d, d)`.
    pub fn max_entangled(d: usize) -> Result<Self> {
        let dims = SystemDims::new(vec![d, d])?;
        let amp = 1.0 / (d as f64).sqrt();
        let mut psi = vec![ZERO; d * d];
        for i in 0..d {
            psi[i * d + i] = C64::new(amp, 0.0);
        }
        Ok(Self::from_vector_unchecked(dims, psi))
    }

    /// Computational basis state `|index>`.
    pub fn basis(dims: SystemDims, index: usize) -> Result<Self> {
        let d = dims.total();
        if index >= d {
            return Err(Error::BadIndexSet(format!("basis index {index} >= {d}")));
        }
        let mut psi = vec![ZERO; d];
        psi[index] = ONE;
        Ok(Self::from_vector_unchecked(dims, psi))
    }

    /// `I/D`
    pub fn maximally_mixed(dims: SystemDims) -> Self {
        let d = dims.total();
        let rho = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
        Self::from_density_unchecked(dims, rho)
    }

    /// `(|0…0> + … + |d-1…d-1>)/√d` on `n` qudits.
    pub fn ghz(n: usize, d: usize) -> Result<Self> {
        let dims = SystemDims::uniform(n, d)?;
        let total = dims.total();
        let step: usize = (0..n).map(|j| d.pow(j as u32)).sum();
        let amp = 1.0 / (d as f64).sqrt();
        let mut psi = vec![ZERO; total];
        for i in 0..d {
            psi[i * step] = C64::new(amp, 0.0);
        }
        Ok(Self::from_vector_unchecked(dims, psi))
    }

    /// `(|10…0> + |01…0> + … + |0…01>)/√n` on `n` qubits.
    pub fn w(n: usize) -> Result<Self> {
        let dims = SystemDims::uniform(n, 2)?;
        let amp = 1.0 / (n as f64).sqrt();
        let mut psi = vec![ZERO; dims.total()];
        for j in 0..n {
            psi[1 << j] = C64::new(amp, 0.0);
        }
        Ok(Self::from_vector_unchecked(dims, psi))
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn purity(&self) -> f64 {
        self.purity
    }

    pub fn is_pure(&self) -> bool {
        self.purity >= 1.0 - PURITY_TOL
    }

    /// The state vector when the state is pure (up to a global phase).
    pub fn pure_vector(&self) -> Option<Vec<C64>> {
        if let Some(v) = &self.vector {
            return Some(v.clone());
        }
        if !self.is_pure() {
            return None;
        }
        let eig = eig_hermitian(&self.rho).ok()?;
        Some(eig.vector(eig.values.len() - 1))
    }

    /// Cached vector, only when the state was built from one.
    pub fn vector(&self) -> Option<&[C64]> {
        self.vector.as_deref()
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let dims = self.dims.concat(&other.dims)?;
        Ok(match (&self.vector, &other.vector) {
            (Some(a), Some(b)) => Self::from_vector_unchecked(dims, kron_vec(a, b)),
            _ => Self::from_density_unchecked(dims, kron(&self.rho, &other.rho)),
        })
    }

    /// Reduced state on the subsystems in `keep` (kept in ascending order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let keep = check_keep(self.dims.len(), keep)?;
        let dims = SystemDims::new(self.dims.select(&keep))?;
        if keep.len() == self.dims.len() {
            return Ok(self.clone());
        }
        let split = SplitIndex::new(self.dims.as_slice(), &keep);
        let (kd, td) = (split.kept_dim, split.traced_dim);
        let mut out = ComplexMatrix::zeros(kd, kd);
        match &self.vector {
            Some(psi) => {
                for a in 0..kd {
                    for b in a..kd {
                        let mut g = ZERO;
                        for t in 0..td {
                            g += psi[split.table[a * td + t]] * psi[split.table[b * td + t]].conj();
                        }
                        out[(a, b)] = g;
                        out[(b, a)] = g.conj();
                    }
                }
            }
            None => {
                for a in 0..kd {
                    for b in 0..kd {
                        let mut g = ZERO;
                        for t in 0..td {
                            g += self.rho[(split.table[a * td + t], split.table[b * td + t])];
                        }
                        out[(a, b)] = g;
                    }
                }
            }
        }
        Ok(Self::from_density_unchecked(dims, out))
    }

    /// `Tr ρ_K²` for the reduced state on `keep`.
    pub fn reduced_purity(&self, keep: &[usize]) -> Result<f64> {
        let keep = check_keep(self.dims.len(), keep)?;
        match &self.vector {
            Some(psi) => Ok(reduced_purity_of_vector(psi, self.dims.as_slice(), &keep)),
            None => Ok(self.partial_trace(&keep)?.purity()),
        }
    }

    /// Convex combination `Σ p_i ρ_i`.
    pub fn mix(states: &[QuantumState], weights: &[f64]) -> Result<Self> {
        if states.is_empty() || states.len() != weights.len() {
            return Err(Error::WeightMismatch(format!(
                "{} states for {} weights",
                states.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::WeightMismatch(format!("negative weight in {weights:?}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::WeightMismatch(format!("weights sum to {total}")));
        }
        let dims = states[0].dims.clone();
        if let Some(s) = states.iter().find(|s| s.dims != dims) {
            return Err(Error::DimMismatch(format!(
                "cannot mix dims {:?} with {:?}",
                dims.as_slice(),
                s.dims.as_slice()
            )));
        }
        if states.len() == 1 {
            return Ok(states[0].clone());
        }
        let d = dims.total();
        let mut rho = ComplexMatrix::zeros(d, d);
        for (s, &w) in states.iter().zip(weights) {
            rho.add_scaled(&s.rho, C64::new(w, 0.0));
        }
        Ok(Self::from_density_unchecked(dims, rho))
    }
}

/// A partition of subsystem indices `0..n` into nonempty disjoint blocks,
/// blocks ordered by their least element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartitionSpec {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl PartitionSpec {
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::BadIndexSet("empty block".into()));
            }
            b.sort_unstable();
            for &i in b.iter() {
                if i >= n || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::BadIndexSet(format!("index {i} repeated or out of range")));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::BadIndexSet("blocks do not cover all subsystems".into()));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { n, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }
}

impl fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            let inner: Vec<String> = b.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "{{{}}}", inner.join(","))?;
        }
        Ok(())
    }
}

type PartitionTable = Mutex<HashMap<(usize, usize), Arc<Vec<PartitionSpec>>>>;

fn partition_table() -> &'static PartitionTable {
    static TABLE: OnceLock<PartitionTable> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// All partitions of `0..n` into exactly `k` blocks, in canonical form.
///
/// Lists are memoized per `(n, k)`; there are `S(n, k)` of them.
pub fn enumerate_partitions(n: usize, k: usize) -> Result<Arc<Vec<PartitionSpec>>> {
    if !(1 <= k && k <= n && n <= 12) {
        return Err(Error::BadArity(format!("need 1 <= k <= n <= 12, got n={n}, k={k}")));
    }
    if let Some(hit) = partition_table().lock().unwrap().get(&(n, k)) {
        return Ok(hit.clone());
    }
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    grow(&mut labels, 0, 0, n, k, &mut out);
    let list = Arc::new(out);
    partition_table()
        .lock()
        .unwrap()
        .entry((n, k))
        .or_insert_with(|| list.clone());
    Ok(list)
}

// Restricted growth strings: element i joins an existing block or opens the next one.
fn grow(labels: &mut [usize], i: usize, used: usize, n: usize, k: usize, out: &mut Vec<PartitionSpec>) {
    if i == n {
        if used == k {
            let mut blocks = vec![Vec::new(); k];
            for (e, &l) in labels.iter().enumerate() {
                blocks[l].push(e);
            }
            out.push(PartitionSpec { n, blocks });
        }
        return;
    }
    if n - i < k - used {
        return;
    }
    for l in 0..used {
        labels[i] = l;
        grow(labels, i + 1, used, n, k, out);
    }
    if used < k {
        labels[i] = used;
        grow(labels, i + 1, used + 1, n, k, out);
    }
}
