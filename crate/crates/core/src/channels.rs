//! CPTP maps in Kraus form, the named constructions used throughout the
//! examples, Choi matrices, superchannels and the parameterized family of
//! free channels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, kron, pauli_x, pauli_y, pauli_z, ComplexMatrix, C64, ONE};
use crate::optim::{orthonormalize_columns, DomainPoint, ParamManifold};
use crate::states::{QuantumState, SystemDims};

/// Completeness tolerance `‖Σ K†K − I‖_max`.
pub const COMPLETENESS_TOL: f64 = 1e-8;
/// Looser tolerance after composition and tensoring.
pub const COMPOSED_TOL: f64 = 1e-7;
/// Kraus operators with Frobenius norm below this are dropped.
const NEGLIGIBLE_KRAUS: f64 = 1e-13;

/// A quantum channel `ρ ↦ Σ K_i ρ K_i†`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    in_dims: SystemDims,
    out_dims: SystemDims,
    kraus: Vec<ComplexMatrix>,
}

impl Channel {
    /// Validated construction. Kraus families longer than `in_D · out_D` are
    /// reduced through the Choi matrix.
    pub fn new(in_dims: SystemDims, out_dims: SystemDims, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(in_dims, out_dims, kraus, COMPLETENESS_TOL)
    }

    fn with_tolerance(
        in_dims: SystemDims,
        out_dims: SystemDims,
        kraus: Vec<ComplexMatrix>,
        tol: f64,
    ) -> Result<Self> {
        let (din, dout) = (in_dims.total(), out_dims.total());
        if let Some(k) = kraus.iter().find(|k| k.rows() != dout || k.cols() != din) {
            return Err(Error::DimMismatch(format!(
                "Kraus operator is {}x{}, expected {dout}x{din}",
                k.rows(),
                k.cols()
            )));
        }
        let mut kraus: Vec<ComplexMatrix> =
            kraus.into_iter().filter(|k| k.frobenius_norm() > NEGLIGIBLE_KRAUS).collect();
        if kraus.is_empty() {
            return Err(Error::NotTracePreserving(1.0));
        }
        let dev = completeness_deviation(&kraus, din);
        if dev > tol {
            return Err(Error::NotTracePreserving(dev));
        }
        if kraus.len() > din * dout {
            kraus = kraus_from_choi(&choi_of_kraus(&kraus, din, dout), din, dout)?;
        }
        Ok(Self { in_dims, out_dims, kraus })
    }

    pub fn identity(dims: SystemDims) -> Self {
        let d = dims.total();
        Self { in_dims: dims.clone(), out_dims: dims, kraus: vec![ComplexMatrix::identity(d)] }
    }

    /// Single-Kraus channel `ρ ↦ U ρ U†`.
    pub fn unitary(u: ComplexMatrix, dims: SystemDims) -> Result<Self> {
        if u.rows() != dims.total() || u.cols() != dims.total() {
            return Err(Error::DimMismatch(format!(
                "unitary is {}x{}, dims {:?}",
                u.rows(),
                u.cols(),
                dims.as_slice()
            )));
        }
        let dev = u.unitarity_deviation();
        if dev > COMPLETENESS_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { in_dims: dims.clone(), out_dims: dims, kraus: vec![u] })
    }

    /// Two-qubit CNOT, `Σ_{i,j} |i><i| ⊗ |j><(i+j) mod 2|`.
    pub fn cnot() -> Self {
        let mut u = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                u[(2 * i + j, 2 * i + (i + j) % 2)] = ONE;
            }
        }
        Self::permutation_unchecked(u, SystemDims::uniform(2, 2).unwrap())
    }

    /// Two-qubit swap written as
    /// `Σ_i |i><i+1| ⊗ |i+1><i| + Σ_j |j><j| ⊗ |j><j|` (indices mod 2).
    pub fn swap() -> Self {
        let mut u = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            let ip = (i + 1) % 2;
            u[(2 * i + ip, 2 * ip + i)] += ONE;
        }
        for j in 0..2 {
            u[(3 * j, 3 * j)] += ONE;
        }
        Self::permutation_unchecked(u, SystemDims::uniform(2, 2).unwrap())
    }

    /// `|i_1, i_2, …, i_n> ↦ |i_1, i_1+i_2, …, i_1+i_n>` (mod `d`) on `n` qudits.
    pub fn ghz_entangler(n: usize, d: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadParam(format!("entangler needs n >= 2, got {n}")));
        }
        let dims = SystemDims::uniform(n, d)?;
        let total = dims.total();
        let mut u = ComplexMatrix::zeros(total, total);
        for idx in 0..total {
            let digits = to_digits(idx, n, d);
            let out: Vec<usize> = digits
                .iter()
                .enumerate()
                .map(|(j, &x)| if j == 0 { x } else { (digits[0] + x) % d })
                .collect();
            u[(from_digits(&out, d), idx)] = ONE;
        }
        Ok(Self::permutation_unchecked(u, dims))
    }

    /// `|i_1, i_2, …, i_n> ↦ |i_n, i_1, …, i_{n-1}>` on `n` qudits, so
    /// `ρ_1 ⊗ … ⊗ ρ_n ↦ ρ_n ⊗ ρ_1 ⊗ … ⊗ ρ_{n-1}`.
    pub fn cyclic_shift(n: usize, d: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadParam(format!("cyclic shift needs n >= 2, got {n}")));
        }
        let dims = SystemDims::uniform(n, d)?;
        let total = dims.total();
        let mut u = ComplexMatrix::zeros(total, total);
        for idx in 0..total {
            let digits = to_digits(idx, n, d);
            let mut out = Vec::with_capacity(n);
            out.push(digits[n - 1]);
            out.extend_from_slice(&digits[..n - 1]);
            u[(from_digits(&out, d), idx)] = ONE;
        }
        Ok(Self::permutation_unchecked(u, dims))
    }

    /// Qubit depolarizing channel `ρ ↦ (1−p) ρ + p I/2`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadParam(format!("depolarizing p = {p} outside [0, 1]")));
        }
        let kraus = vec![
            ComplexMatrix::identity(2).scale_real((1.0 - 0.75 * p).sqrt()),
            pauli_x().scale_real((p / 4.0).sqrt()),
            pauli_y().scale_real((p / 4.0).sqrt()),
            pauli_z().scale_real((p / 4.0).sqrt()),
        ];
        let dims = SystemDims::new(vec![2]).unwrap();
        Self::new(dims.clone(), dims, kraus)
    }

    /// `diag(1, 1, 1, e^{iθ})` on two qubits.
    pub fn controlled_phase(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::BadParam(format!("controlled phase angle {theta}")));
        }
        let u = ComplexMatrix::from_diag(&[ONE, ONE, ONE, C64::from_polar(1.0, theta)]);
        Self::unitary(u, SystemDims::uniform(2, 2).unwrap())
    }

    fn permutation_unchecked(u: ComplexMatrix, dims: SystemDims) -> Self {
        debug_assert!(u.unitarity_deviation() < 1e-12);
        Self { in_dims: dims.clone(), out_dims: dims, kraus: vec![u] }
    }

    pub fn in_dims(&self) -> &SystemDims {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &SystemDims {
        &self.out_dims
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Isometric channels map pure states to pure states.
    pub fn is_isometric(&self) -> bool {
        self.kraus.len() == 1
    }

    pub fn is_square(&self) -> bool {
        self.in_dims.total() == self.out_dims.total()
    }

    pub fn completeness_deviation(&self) -> f64 {
        completeness_deviation(&self.kraus, self.in_dims.total())
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        if state.dims().total() != self.in_dims.total() {
            return Err(Error::DimMismatch(format!(
                "channel input {:?}, state {:?}",
                self.in_dims.as_slice(),
                state.dims().as_slice()
            )));
        }
        if let (Some(psi), true) = (state.vector(), self.is_isometric()) {
            return Ok(QuantumState::from_vector_unchecked(self.out_dims.clone(), self.kraus[0].matvec(psi)));
        }
        let d = self.out_dims.total();
        let mut out = ComplexMatrix::zeros(d, d);
        match state.vector() {
            Some(psi) => {
                for k in &self.kraus {
                    out.add_outer(&k.matvec(psi), 1.0);
                }
            }
            None => {
                for k in &self.kraus {
                    let kr = k * state.rho();
                    out = &out + &(&kr * &k.adjoint());
                }
            }
        }
        Ok(QuantumState::from_density_unchecked(self.out_dims.clone(), out.hermitian_part()))
    }

    /// Image of a pure input vector under an isometric channel.
    pub fn apply_vector(&self, psi: &[C64]) -> Option<Vec<C64>> {
        self.is_isometric().then(|| self.kraus[0].matvec(psi))
    }

    /// Unnormalized-free Choi matrix `(N ⊗ Id)(|ψ⁺><ψ⁺|)` with normalized
    /// `|ψ⁺>`; the output factor comes first. Works for non-square channels.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        choi_of_kraus(&self.kraus, self.in_dims.total(), self.out_dims.total())
    }

    /// The Choi state on dims `(D, D)` of a square channel.
    pub fn choi(&self) -> Result<QuantumState> {
        let (din, dout) = (self.in_dims.total(), self.out_dims.total());
        if din != dout {
            return Err(Error::NotSquare(din, dout));
        }
        let dims = SystemDims::new(vec![dout, din])?;
        Ok(QuantumState::from_density_unchecked(dims, self.choi_matrix()))
    }

    /// Channel with the given Choi matrix (output factor first).
    pub fn from_choi(in_dims: SystemDims, out_dims: SystemDims, choi: &ComplexMatrix) -> Result<Self> {
        let (din, dout) = (in_dims.total(), out_dims.total());
        if choi.rows() != din * dout || choi.cols() != din * dout {
            return Err(Error::DimMismatch(format!("Choi matrix is {}x{}", choi.rows(), choi.cols())));
        }
        let kraus = kraus_from_choi(choi, din, dout)?;
        Self::with_tolerance(in_dims, out_dims, kraus, COMPOSED_TOL)
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Channel) -> Result<Self> {
        if inner.out_dims != self.in_dims {
            return Err(Error::DimMismatch(format!(
                "cannot compose: inner output {:?} vs outer input {:?}",
                inner.out_dims.as_slice(),
                self.in_dims.as_slice()
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * inner.kraus.len());
        for a in &self.kraus {
            for b in &inner.kraus {
                kraus.push(a * b);
            }
        }
        Self::with_tolerance(inner.in_dims.clone(), self.out_dims.clone(), kraus, COMPOSED_TOL)
    }

    /// `self ⊗ other` acting on the concatenated systems.
    pub fn tensor(&self, other: &Channel) -> Result<Self> {
        let in_dims = self.in_dims.concat(&other.in_dims)?;
        let out_dims = self.out_dims.concat(&other.out_dims)?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(kron(a, b));
            }
        }
        Self::with_tolerance(in_dims, out_dims, kraus, COMPOSED_TOL)
    }

    /// Convex combination `Σ p_i N_i`.
    pub fn mix(terms: &[(f64, &Channel)]) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::WeightMismatch("no channels to mix".into()));
        };
        if terms.iter().any(|(p, _)| *p < 0.0 || !p.is_finite()) {
            return Err(Error::WeightMismatch("negative weight".into()));
        }
        let total: f64 = terms.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::WeightMismatch(format!("weights sum to {total}")));
        }
        let mut kraus = Vec::new();
        for (p, ch) in terms {
            if ch.in_dims != first.in_dims || ch.out_dims != first.out_dims {
                return Err(Error::DimMismatch("cannot mix channels of different shapes".into()));
            }
            kraus.extend(ch.kraus.iter().map(|k| k.scale_real(p.sqrt())));
        }
        Self::with_tolerance(first.in_dims.clone(), first.out_dims.clone(), kraus, COMPOSED_TOL)
    }

    /// Largest difference between the actions of two channels on the given
    /// states.
    pub fn action_distance(&self, other: &Channel, states: &[QuantumState]) -> Result<f64> {
        let mut worst = 0.0f64;
        for s in states {
            let a = self.apply(s)?;
            let b = other.apply(s)?;
            worst = worst.max(a.rho().max_abs_diff(b.rho()));
        }
        Ok(worst)
    }
}

fn to_digits(mut idx: usize, n: usize, d: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for j in (0..n).rev() {
        digits[j] = idx % d;
        idx /= d;
    }
    digits
}

fn from_digits(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

fn completeness_deviation(kraus: &[ComplexMatrix], din: usize) -> f64 {
    let mut acc = ComplexMatrix::zeros(din, din);
    for k in kraus {
        acc = &acc + &(&k.adjoint() * k);
    }
    acc.max_abs_diff(&ComplexMatrix::identity(din))
}

/// `(1/din) Σ_k vec(K_k) vec(K_k)†` with `vec(K)[a·din + i] = K[a, i]`.
pub(crate) fn choi_of_kraus(kraus: &[ComplexMatrix], din: usize, dout: usize) -> ComplexMatrix {
    let mut j = ComplexMatrix::zeros(din * dout, din * dout);
    for k in kraus {
        j.add_outer(k.as_slice(), 1.0 / din as f64);
    }
    j
}

fn kraus_from_choi(choi: &ComplexMatrix, din: usize, dout: usize) -> Result<Vec<ComplexMatrix>> {
    let eig = eig_hermitian(&choi.hermitian_part())?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let mut kraus = Vec::new();
    for (k, &l) in eig.values.iter().enumerate().rev() {
        if l <= 1e-14 * top.max(1.0) {
            continue;
        }
        let scale = (l * din as f64).sqrt();
        let v: Vec<C64> = eig.vector(k).into_iter().map(|z| z * scale).collect();
        kraus.push(ComplexMatrix::from_vec(dout, din, v));
    }
    Ok(kraus)
}

/// A channel transformation `N ↦ post ∘ N ∘ pre`.
#[derive(Clone, Debug)]
pub struct Superchannel {
    pub pre: Channel,
    pub post: Channel,
}

impl Superchannel {
    pub fn new(pre: Channel, post: Channel) -> Self {
        Self { pre, post }
    }

    pub fn apply(&self, ch: &Channel) -> Result<Channel> {
        self.post.compose(&ch.compose(&self.pre)?)
    }
}

/// Haar-random unitary via Gram–Schmidt on a complex Ginibre matrix.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let data: Vec<C64> = (0..d * d)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    orthonormalize_columns(&ComplexMatrix::from_vec(d, d, data))
}

pub fn random_unitary_channel(dims: SystemDims, rng: &mut impl Rng) -> Channel {
    let u = random_unitary(dims.total(), rng);
    Channel { in_dims: dims.clone(), out_dims: dims, kraus: vec![u] }
}

/// Random CPTP map of the given Kraus rank (isometry from a Ginibre matrix).
pub fn random_channel(in_dims: SystemDims, out_dims: SystemDims, rank: usize, rng: &mut impl Rng) -> Result<Channel> {
    let manifold = ParamManifold::Kraus { in_dim: in_dims.total(), out_dim: out_dims.total(), rank };
    let point = manifold.decode(&manifold.random_theta(rng))?;
    let kraus = point.as_kraus().expect("Kraus manifold").to_vec();
    Channel::new(in_dims, out_dims, kraus)
}

/// Shape of one site of a free family: local dimension and Kraus rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SiteShape {
    pub dim: usize,
    pub kraus_rank: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// `M_1 ⊗ … ⊗ M_n` with arbitrary local channels.
    LocalProduct,
    /// `Σ_j q_j M_1^j ⊗ … ⊗ M_n^j`: local channels with shared randomness.
    MixtureOfLocalProducts,
}

/// Computable stand-in for the free channels: products of local channels
/// and convex mixtures of them. Every member maps fully separable states to
/// fully separable states, so minimizing over it overestimates a minimum
/// over all free channels.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeChannelFamily {
    kind: FamilyKind,
    sites: Vec<SiteShape>,
    mixture_size: usize,
}

impl FreeChannelFamily {
    /// Local products with full local Kraus rank `d²`.
    pub fn local_product(dims: &SystemDims) -> Self {
        Self {
            kind: FamilyKind::LocalProduct,
            sites: dims.as_slice().iter().map(|&d| SiteShape { dim: d, kraus_rank: d * d }).collect(),
            mixture_size: 1,
        }
    }

    /// Mixtures of `terms` local products.
    pub fn mixture(dims: &SystemDims, terms: usize) -> Result<Self> {
        if terms == 0 {
            return Err(Error::BadParam("mixture needs at least one term".into()));
        }
        Ok(Self { kind: FamilyKind::MixtureOfLocalProducts, mixture_size: terms, ..Self::local_product(dims) })
    }

    /// Caps every site's Kraus rank (rank 1 gives local unitaries).
    pub fn with_kraus_rank(mut self, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::BadParam("Kraus rank must be positive".into()));
        }
        for s in &mut self.sites {
            s.kraus_rank = rank.min(s.dim * s.dim);
        }
        Ok(self)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn sites(&self) -> &[SiteShape] {
        &self.sites
    }

    pub fn mixture_size(&self) -> usize {
        self.mixture_size
    }

    pub fn dims(&self) -> SystemDims {
        SystemDims::new(self.sites.iter().map(|s| s.dim).collect()).expect("validated at construction")
    }

    fn product_manifold(&self) -> ParamManifold {
        ParamManifold::Composite(
            self.sites
                .iter()
                .map(|s| ParamManifold::Kraus { in_dim: s.dim, out_dim: s.dim, rank: s.kraus_rank })
                .collect(),
        )
    }

    /// Parameter space of the family.
    pub fn manifold(&self) -> ParamManifold {
        match self.kind {
            FamilyKind::LocalProduct => self.product_manifold(),
            FamilyKind::MixtureOfLocalProducts => {
                let mut parts = vec![ParamManifold::Simplex(self.mixture_size)];
                parts.extend((0..self.mixture_size).map(|_| self.product_manifold()));
                ParamManifold::Composite(parts)
            }
        }
    }

    /// Parameters of the identity channel.
    pub fn identity_theta(&self) -> Vec<f64> {
        let ids = DomainPoint::Composite(
            self.sites.iter().map(|s| DomainPoint::Kraus(vec![ComplexMatrix::identity(s.dim)])).collect(),
        );
        let point = match self.kind {
            FamilyKind::LocalProduct => ids,
            FamilyKind::MixtureOfLocalProducts => {
                let mut parts = vec![DomainPoint::Simplex(vec![1.0 / self.mixture_size as f64; self.mixture_size])];
                parts.extend((0..self.mixture_size).map(|_| ids.clone()));
                DomainPoint::Composite(parts)
            }
        };
        self.manifold().encode(&point).expect("identity is encodable")
    }

    /// The member channel at a decoded point of [`Self::manifold`].
    pub fn instantiate(&self, point: &DomainPoint) -> Result<FreeChannel> {
        let bad = || Error::BadParam("point does not belong to this family's manifold".into());
        let sites_of = |p: &DomainPoint| -> Result<Vec<Channel>> {
            let parts = p.as_composite().ok_or_else(bad)?;
            if parts.len() != self.sites.len() {
                return Err(bad());
            }
            parts
                .iter()
                .zip(&self.sites)
                .map(|(q, s)| {
                    let k = q.as_kraus().ok_or_else(bad)?.to_vec();
                    let d = SystemDims::new(vec![s.dim])?;
                    Channel::new(d.clone(), d, k)
                })
                .collect()
        };
        match self.kind {
            FamilyKind::LocalProduct => FreeChannel::local_product(sites_of(point)?),
            FamilyKind::MixtureOfLocalProducts => {
                let parts = point.as_composite().ok_or_else(bad)?;
                let DomainPoint::Simplex(weights) = &parts[0] else {
                    return Err(bad());
                };
                let terms = weights
                    .iter()
                    .zip(&parts[1..])
                    .map(|(&w, p)| Ok((w, sites_of(p)?)))
                    .collect::<Result<Vec<_>>>()?;
                FreeChannel::mixture(terms)
            }
        }
    }

    /// A random member; standard normal parameters drawn from `seed`.
    pub fn sample(&self, seed: u64) -> FreeChannel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng)
    }

    pub fn sample_with(&self, rng: &mut impl Rng) -> FreeChannel {
        let m = self.manifold();
        let point = m.decode(&m.random_theta(rng)).expect("family manifold decodes");
        self.instantiate(&point).expect("decoded points are members")
    }
}

/// Samples a member of `family`.
pub fn sample_free_channel(family: &FreeChannelFamily, seed: u64) -> FreeChannel {
    family.sample(seed)
}

/// A channel together with its freeness certificate: weighted lists of
/// local channels whose tensor products it mixes.
#[derive(Clone, Debug)]
pub struct FreeChannel {
    channel: Channel,
    terms: Vec<(f64, Vec<Channel>)>,
}

impl FreeChannel {
    pub fn local_product(sites: Vec<Channel>) -> Result<Self> {
        Self::mixture(vec![(1.0, sites)])
    }

    pub fn mixture(terms: Vec<(f64, Vec<Channel>)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::WeightMismatch("no terms".into()));
        }
        let mut products = Vec::with_capacity(terms.len());
        for (_, sites) in &terms {
            let mut it = sites.iter();
            let first = it.next().ok_or_else(|| Error::BadParam("term without sites".into()))?;
            let mut acc = first.clone();
            for s in it {
                acc = acc.tensor(s)?;
            }
            products.push(acc);
        }
        let channel = if products.len() == 1 {
            products.pop().unwrap()
        } else {
            let weighted: Vec<(f64, &Channel)> = terms.iter().map(|(w, _)| *w).zip(products.iter()).collect();
            Channel::mix(&weighted)?
        };
        Ok(Self { channel, terms })
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn into_channel(self) -> Channel {
        self.channel
    }

    pub fn terms(&self) -> &[(f64, Vec<Channel>)] {
        &self.terms
    }

    /// Decomposes the image of a product pure input into weighted product
    /// pure states (local eigendecompositions of each term's output).
    pub fn image_decomposition(&self, locals: &[Vec<C64>]) -> Result<Vec<(f64, Vec<Vec<C64>>)>> {
        let mut out = Vec::new();
        for (w, sites) in &self.terms {
            if sites.len() != locals.len() {
                return Err(Error::DimMismatch("one local vector per site expected".into()));
            }
            let mut partial: Vec<(f64, Vec<Vec<C64>>)> = vec![(*w, Vec::new())];
            for (site, v) in sites.iter().zip(locals) {
                let input = QuantumState::from_vector(site.in_dims().clone(), v.clone())?;
                let eig = eig_hermitian(site.apply(&input)?.rho())?;
                let mut next = Vec::new();
                for (p, vecs) in &partial {
                    for (k, &l) in eig.values.iter().enumerate() {
                        if l > 1e-12 {
                            let mut vv = vecs.clone();
                            vv.push(eig.vector(k));
                            next.push((p * l, vv));
                        }
                    }
                }
                partial = next;
            }
            out.extend(partial);
        }
        Ok(out)
    }
}

/// Named channel constructors as used by the JSON schema.
pub fn named_channel(name: &str, params: &serde_json::Map<String, serde_json::Value>) -> Result<Channel> {
    let get_usize = |key: &str, default: Option<usize>| -> Result<usize> {
        match params.get(key) {
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| Error::BadParam(format!("params.{key} must be a nonnegative integer"))),
            None => default.ok_or_else(|| Error::BadParam(format!("params.{key} is required"))),
        }
    };
    let get_f64 = |key: &str, default: Option<f64>| -> Result<f64> {
        match params.get(key) {
            Some(v) => v.as_f64().ok_or_else(|| Error::BadParam(format!("params.{key} must be a number"))),
            None => default.ok_or_else(|| Error::BadParam(format!("params.{key} is required"))),
        }
    };
    match name {
        "cnot" => Ok(Channel::cnot()),
        "swap" => Ok(Channel::swap()),
        "cyclic_shift" => Channel::cyclic_shift(get_usize("n", None)?, get_usize("d", Some(2))?),
        "ghz_entangler" => Channel::ghz_entangler(get_usize("n", None)?, get_usize("d", Some(2))?),
        "depolarizing" => Channel::depolarizing(get_f64("p", None)?),
        "controlled_phase" => Channel::controlled_phase(get_f64("theta", None)?),
        "identity" => {
            let dims: Vec<usize> = match params.get("dims") {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|_| Error::BadParam("params.dims must be a list of integers".into()))?,
                None => vec![2],
            };
            Ok(Channel::identity(SystemDims::new(dims)?))
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn dims2() -> SystemDims {
        SystemDims::uniform(2, 2).unwrap()
    }

    fn plus() -> Vec<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![C64::new(s, 0.0), C64::new(s, 0.0)]
    }

    fn ket(i: usize) -> Vec<C64> {
        let mut v = vec![ZERO; 2];
        v[i] = ONE;
        v
    }

    fn random_states(dims: &SystemDims, count: usize, seed: u64) -> Vec<QuantumState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let d = dims.total();
                let g: Vec<C64> = (0..d * d)
                    .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect();
                let g = ComplexMatrix::from_vec(d, d, g);
                let r = &g * &g.adjoint();
                let tr = r.trace().re;
                QuantumState::from_density(dims.clone(), r.scale_real(1.0 / tr)).unwrap()
            })
            .collect()
    }

    #[test]
    fn cnot_on_example_one_input() {
        let input = QuantumState::product_pure(&[plus(), ket(0)], &dims2()).unwrap();
        let out = Channel::cnot().apply(&input).unwrap();
        let mut expected = ComplexMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            expected[(r, c)] = C64::new(0.5, 0.0);
        }
        assert!(out.rho().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn identity_and_depolarizing_actions() {
        let s = &random_states(&dims2(), 1, 1)[0];
        let out = Channel::identity(dims2()).apply(s).unwrap();
        assert!(out.rho().max_abs_diff(s.rho()) < 1e-15);

        let zero = QuantumState::basis(SystemDims::new(vec![2]).unwrap(), 0).unwrap();
        let dep = Channel::depolarizing(1.0).unwrap();
        assert_eq!(dep.kraus().len(), 4);
        let out = dep.apply(&zero).unwrap();
        assert!(out.rho().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);

        let d0 = Channel::depolarizing(0.0).unwrap();
        assert_eq!(d0.kraus().len(), 1);
        assert!(d0.kraus()[0].max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        assert!(matches!(Channel::depolarizing(1.5), Err(Error::BadParam(_))));
    }

    #[test]
    fn unitary_channels() {
        let cnot = Channel::cnot();
        assert_eq!(cnot.kraus().len(), 1);
        let expected = ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        assert_eq!(cnot.kraus()[0], expected);

        let u = Channel::ghz_entangler(3, 2).unwrap();
        let k = &u.kraus()[0];
        for idx in 0..8 {
            let (i, j, l) = (idx >> 2 & 1, idx >> 1 & 1, idx & 1);
            let out = (i << 2) | ((i ^ j) << 1) | (i ^ l);
            for r in 0..8 {
                assert_eq!(k[(r, idx)], if r == out { ONE } else { ZERO });
            }
        }
        assert!(matches!(
            Channel::unitary(ComplexMatrix::from_real_diag(&[1.0, 2.0]), SystemDims::new(vec![2]).unwrap()),
            Err(Error::NotUnitary(_))
        ));
        let id = Channel::unitary(ComplexMatrix::identity(2), SystemDims::new(vec![2]).unwrap()).unwrap();
        assert_eq!(id, Channel::identity(SystemDims::new(vec![2]).unwrap()));
    }

    #[test]
    fn swap_exchanges_factors() {
        // Two arbitrary qubit states: output is the swapped product.
        let a = random_states(&SystemDims::new(vec![2]).unwrap(), 2, 9);
        let input = a[0].tensor(&a[1]).unwrap();
        let out = Channel::swap().apply(&input).unwrap();
        let expected = a[1].tensor(&a[0]).unwrap();
        assert!(out.rho().max_abs_diff(expected.rho()) < 1e-15);
    }

    #[test]
    fn cyclic_shift_moves_last_factor_first() {
        let single = SystemDims::new(vec![2]).unwrap();
        let r = random_states(&single, 3, 4);
        let input = r[0].tensor(&r[1]).unwrap().tensor(&r[2]).unwrap();
        let out = Channel::cyclic_shift(3, 2).unwrap().apply(&input).unwrap();
        let expected = r[2].tensor(&r[0]).unwrap().tensor(&r[1]).unwrap();
        assert!(out.rho().max_abs_diff(expected.rho()) < 1e-14);
    }

    #[test]
    fn choi_examples() {
        let id = Channel::identity(SystemDims::new(vec![2]).unwrap());
        let bell = QuantumState::max_entangled(2).unwrap();
        assert!(id.choi().unwrap().rho().max_abs_diff(bell.rho()) < 1e-15);

        let dep = Channel::depolarizing(1.0).unwrap();
        assert!(dep.choi().unwrap().rho().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-15);

        // (CNOT ⊗ I)|ψ⁺> with |ψ⁺> on 4 ⊗ 4.
        let cnot = Channel::cnot();
        let mut phi = vec![ZERO; 16];
        for i in 0..4 {
            phi[i * 4 + i] = C64::new(0.5, 0.0);
        }
        let big = kron(&cnot.kraus()[0], &ComplexMatrix::identity(4));
        let v = big.matvec(&phi);
        let choi = cnot.choi().unwrap();
        assert!(choi.rho().max_abs_diff(&ComplexMatrix::outer(&v, &v)) < 1e-15);
        assert!(choi.is_pure());

        let nonsquare = Channel::new(
            SystemDims::new(vec![2]).unwrap(),
            SystemDims::new(vec![3]).unwrap(),
            vec![ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]])],
        )
        .unwrap();
        assert!(matches!(nonsquare.choi(), Err(Error::NotSquare(2, 3))));
    }

    #[test]
    fn composition_and_tensor() {
        let single = SystemDims::new(vec![2]).unwrap();
        let n = random_channel(single.clone(), single.clone(), 3, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let composed = Channel::identity(single.clone()).compose(&n).unwrap();
        let probes = random_states(&single, 5, 8);
        assert!(composed.action_distance(&n, &probes).unwrap() < 1e-12);

        let id2 = Channel::identity(single.clone());
        let t = id2.tensor(&id2).unwrap();
        assert_eq!(t.kraus()[0], ComplexMatrix::identity(4));

        let sq = Channel::cnot().compose(&Channel::cnot()).unwrap();
        for i in 0..4 {
            let b = QuantumState::basis(dims2(), i).unwrap();
            assert!(sq.apply(&b).unwrap().rho().max_abs_diff(b.rho()) < 1e-15);
        }
        assert!(matches!(Channel::cnot().compose(&n), Err(Error::DimMismatch(_))));
    }

    #[test]
    fn superchannel_examples() {
        let d3 = SystemDims::uniform(3, 2).unwrap();
        let probes = random_states(&d3, 4, 2);
        let id3 = Channel::identity(d3.clone());
        let n = random_channel(d3.clone(), d3.clone(), 2, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let trivial = Superchannel::new(id3.clone(), id3.clone());
        assert!(trivial.apply(&n).unwrap().action_distance(&n, &probes).unwrap() < 1e-12);

        let shift = Channel::cyclic_shift(3, 2).unwrap();
        let inverse = shift.compose(&shift).unwrap();
        let s = Superchannel::new(shift, inverse);
        assert!(s.apply(&id3).unwrap().action_distance(&id3, &probes).unwrap() < 1e-12);

        let dep = Channel::depolarizing(1.0).unwrap();
        let post = dep.tensor(&dep).unwrap();
        let u = random_unitary_channel(dims2(), &mut ChaCha8Rng::seed_from_u64(5));
        let out = Superchannel::new(Channel::identity(dims2()), post).apply(&u).unwrap();
        for b in 0..4 {
            let s = QuantumState::basis(dims2(), b).unwrap();
            let r = out.apply(&s).unwrap();
            assert!(r.rho().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-14);
        }
    }

    #[test]
    fn free_family_examples() {
        let single = SystemDims::new(vec![2]).unwrap();
        let id = Channel::identity(single.clone());
        let f = FreeChannel::local_product(vec![id.clone(), id.clone()]).unwrap();
        assert_eq!(f.channel(), &Channel::identity(dims2()));

        let x = Channel::unitary(pauli_x(), single.clone()).unwrap();
        let f = FreeChannel::local_product(vec![x, id]).unwrap();
        assert!(f.channel().kraus()[0].max_abs_diff(&kron(&pauli_x(), &ComplexMatrix::identity(2))) < 1e-15);

        let fam = FreeChannelFamily::mixture(&dims2(), 2).unwrap();
        let m = sample_free_channel(&fam, 42);
        assert!(m.channel().completeness_deviation() <= 1e-8);
        assert!(m.channel().kraus().len() <= 16);

        let fam = FreeChannelFamily::local_product(&dims2());
        let theta = fam.identity_theta();
        let id_member = fam.instantiate(&fam.manifold().decode(&theta).unwrap()).unwrap();
        assert!(id_member.channel().kraus()[0].max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn named_channel_lookup() {
        let mut params = serde_json::Map::new();
        params.insert("n".into(), 3.into());
        assert_eq!(named_channel("cyclic_shift", &params).unwrap(), Channel::cyclic_shift(3, 2).unwrap());
        assert!(matches!(named_channel("teleport", &params), Err(Error::UnknownName(_))));
        assert!(matches!(named_channel("depolarizing", &params), Err(Error::BadParam(_))));
    }

    #[test]
    fn kraus_choi_roundtrip_preserves_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = random_channel(dims2(), dims2(), 5, &mut rng).unwrap();
        let back = Channel::from_choi(dims2(), dims2(), &n.choi_matrix()).unwrap();
        let probes = random_states(&dims2(), 20, 18);
        assert!(back.action_distance(&n, &probes).unwrap() <= 1e-7);
        assert!(back.kraus().len() <= 16);
    }
}
