//! Channel-level measures: the Choi relative entropy `S_C`, the relative
//! entropy measure `ℜ_r`, the concurrence measure `ℜ_c`, the k-ME measure
//! `ℜ_k-ME`, and the strength value `K(N)` with its `Q_k` / `Γ_k` reading.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::channels::{choi_of_kraus, Channel, FreeChannelFamily};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, kron_vec, ComplexMatrix, C64};
use crate::optim::{maximize_with_starts, minimize_with_starts, DomainPoint, OptimizerConfig, ParamManifold, Telemetry};
use crate::state_measures::{concurrence_of_vector, kme_of_vector, relative_entropy_matrices, wootters_matrix};

/// Weight of the maximally mixed state mixed into the second Choi state.
pub const SMOOTHING_EPS: f64 = 1e-9;
/// Choi matrices closer than this are treated as equal.
const CHOI_EQUAL_TOL: f64 = 1e-12;
/// Output purity above `1 - OUTPUT_PURITY_TOL` counts as pure.
const OUTPUT_PURITY_TOL: f64 = 1e-8;

/// Which side of the exact quantity a reported value lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Exact,
    /// Never above the exact value (a maximum found by search).
    Lower,
    /// Never below the exact value (a minimum found by search, or a
    /// minimum over a restricted set).
    Upper,
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Lower => "lower",
            Self::Upper => "upper",
        })
    }
}

/// The extremizer behind a [`MeasureResult`], in JSON-friendly form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    None,
    /// One local unit vector per input subsystem.
    ProductState { locals: Vec<Vec<[f64; 2]>> },
    /// Kraus operators (probe channel or free channel) and their parameters.
    Channel { theta: Vec<f64>, kraus: Vec<Vec<Vec<[f64; 2]>>> },
}

impl Witness {
    fn product_state(locals: &[Vec<C64>]) -> Self {
        Self::ProductState { locals: locals.iter().map(|v| v.iter().map(|z| [z.re, z.im]).collect()).collect() }
    }

    fn channel(theta: Vec<f64>, kraus: &[ComplexMatrix]) -> Self {
        Self::Channel { theta, kraus: kraus.iter().map(ComplexMatrix::to_pairs).collect() }
    }

    pub fn locals(&self) -> Option<Vec<Vec<C64>>> {
        match self {
            Self::ProductState { locals } => {
                Some(locals.iter().map(|v| v.iter().map(|p| C64::new(p[0], p[1])).collect()).collect())
            }
            _ => None,
        }
    }

    pub fn kraus(&self) -> Option<Vec<ComplexMatrix>> {
        match self {
            Self::Channel { kraus, .. } => kraus.iter().map(|k| ComplexMatrix::from_pairs(k)).collect(),
            _ => None,
        }
    }
}

/// A computed measure with its bound direction and provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub measure: String,
    pub value: f64,
    pub bound: Bound,
    pub witness: Witness,
    pub telemetry: Telemetry,
    pub notes: Vec<String>,
}

fn check_square_pair(n: &Channel, m: &Channel) -> Result<usize> {
    for ch in [n, m] {
        if !ch.is_square() {
            return Err(Error::NotSquare(ch.in_dims().total(), ch.out_dims().total()));
        }
    }
    if n.in_dims().total() != m.in_dims().total() {
        return Err(Error::DimMismatch(format!(
            "channels act on dimensions {} and {}",
            n.in_dims().total(),
            m.in_dims().total()
        )));
    }
    Ok(n.in_dims().total())
}

fn composed_choi(outer: &[ComplexMatrix], probe: &[ComplexMatrix], d: usize) -> ComplexMatrix {
    let mut ops = Vec::with_capacity(outer.len() * probe.len());
    for a in outer {
        for b in probe {
            ops.push(a * b);
        }
    }
    choi_of_kraus(&ops, d, d)
}

fn smoothed(mut sigma: ComplexMatrix, d: usize) -> ComplexMatrix {
    sigma = sigma.scale_real(1.0 - SMOOTHING_EPS);
    sigma.add_scaled(&ComplexMatrix::identity(d), C64::new(SMOOTHING_EPS / d as f64, 0.0));
    sigma
}

/// `S(Choi(N∘X) ‖ Choi(M∘X))` with the second argument smoothed.
pub fn probe_objective(n: &Channel, m: &Channel, probe: &[ComplexMatrix]) -> Result<f64> {
    let d = check_square_pair(n, m)?;
    let jn = composed_choi(n.kraus(), probe, d);
    let jm = smoothed(composed_choi(m.kraus(), probe, d), d * d);
    relative_entropy_matrices(&jn, &jm)
}

/// Choi relative entropy `S_C(N‖M) = max_X S(Choi(N∘X) ‖ Choi(M∘X))`.
///
/// The probe `X` ranges over channels of Kraus rank `cfg.probe_rank`
/// (default: the dimension). The identity probe is always tried.
pub fn choi_relative_entropy(n: &Channel, m: &Channel, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    choi_relative_entropy_with_probes(n, m, cfg, &[])
}

/// [`choi_relative_entropy`] with extra starting probes (Kraus lists).
pub fn choi_relative_entropy_with_probes(
    n: &Channel,
    m: &Channel,
    cfg: &OptimizerConfig,
    probes: &[Vec<ComplexMatrix>],
) -> Result<MeasureResult> {
    let d = check_square_pair(n, m)?;
    if n.choi_matrix().max_abs_diff(&m.choi_matrix()) <= CHOI_EQUAL_TOL {
        return Ok(MeasureResult {
            measure: "sc".into(),
            value: 0.0,
            bound: Bound::Exact,
            witness: Witness::None,
            telemetry: Telemetry::empty(cfg.seed),
            notes: vec!["channels have equal Choi matrices; the objective vanishes for every probe".into()],
        });
    }
    let mut rank = cfg.probe_rank.unwrap_or(d).max(1);
    for p in probes {
        rank = rank.max(p.len());
    }
    let manifold = ParamManifold::Kraus { in_dim: d, out_dim: d, rank };
    let mut warm = vec![manifold
        .encode(&DomainPoint::Kraus(vec![ComplexMatrix::identity(d)]))
        .expect("identity probe fits every rank")];
    for p in probes {
        let theta = manifold
            .encode(&DomainPoint::Kraus(p.clone()))
            .ok_or_else(|| Error::DimMismatch(format!("probe does not act on dimension {d}")))?;
        warm.push(theta);
    }
    let best = maximize_with_starts(
        |pt| probe_objective(n, m, pt.as_kraus().expect("Kraus manifold")),
        &manifold,
        cfg,
        &warm,
    )?;
    let kraus = best.witness.as_kraus().expect("Kraus manifold").to_vec();
    Ok(MeasureResult {
        measure: "sc".into(),
        value: best.value,
        bound: Bound::Lower,
        witness: Witness::channel(best.theta, &kraus),
        telemetry: best.telemetry,
        notes: vec![format!(
            "probe Kraus rank {rank}; second Choi state smoothed with weight {SMOOTHING_EPS:e} of the maximally mixed state"
        )],
    })
}

/// `ℜ_r(N) = min_{M ∈ family} S_C(N‖M)` by alternating rounds.
///
/// Each round minimizes over the family against the probes collected so far,
/// then searches a new probe for the best member. The reported value is the
/// smallest probe search result, attained at the witness member.
pub fn measure_rr(n: &Channel, family: &FreeChannelFamily, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    if !n.is_square() {
        return Err(Error::NotSquare(n.in_dims().total(), n.out_dims().total()));
    }
    if family.dims() != *n.in_dims() {
        return Err(Error::DimMismatch(format!(
            "family acts on {:?}, channel on {:?}",
            family.dims().as_slice(),
            n.in_dims().as_slice()
        )));
    }
    let d = n.in_dims().total();
    let manifold = family.manifold();
    let inner_cfg = OptimizerConfig { starts: (cfg.starts / 4).max(1), ..cfg.clone() };
    let mut probes: Vec<Vec<ComplexMatrix>> = vec![vec![ComplexMatrix::identity(d)]];
    let mut telemetry = Telemetry::empty(cfg.seed);
    let mut warm = vec![family.identity_theta()];
    let mut best: Option<(f64, Vec<f64>, Channel)> = None;
    let mut notes = Vec::new();
    for round in 0..cfg.rounds.max(1) {
        let outer_cfg = cfg.clone().with_seed(cfg.seed.wrapping_add(round as u64));
        let outer = minimize_with_starts(
            |pt| {
                let m = family.instantiate(pt)?;
                let mut worst = f64::NEG_INFINITY;
                for p in &probes {
                    worst = worst.max(probe_objective(n, m.channel(), p)?);
                }
                Ok(worst)
            },
            &manifold,
            &outer_cfg,
            &warm,
        )?;
        telemetry.absorb(&outer.telemetry);
        let member = family.instantiate(&outer.witness)?.into_channel();
        let inner = choi_relative_entropy_with_probes(n, &member, &inner_cfg, &probes)?;
        telemetry.absorb(&inner.telemetry);
        let gap = inner.value - outer.value;
        if best.as_ref().is_none_or(|(v, _, _)| inner.value < *v) {
            best = Some((inner.value, outer.theta.clone(), member));
        }
        warm = vec![family.identity_theta(), best.as_ref().unwrap().1.clone()];
        if gap <= cfg.ftol.max(1e-9) {
            notes.push(format!("probe set stable after {} round(s)", round + 1));
            break;
        }
        if let Some(k) = inner.witness.kraus() {
            probes.push(k);
        }
    }
    let (value, theta, member) = best.expect("at least one round");
    notes.push(
        "minimum over a parameterized family of separable channels (an upper bound on the minimum over all free channels); each inner maximization over probes is itself a lower bound"
            .into(),
    );
    Ok(MeasureResult {
        measure: "rr".into(),
        value: value.max(0.0),
        bound: Bound::Upper,
        witness: Witness::channel(theta, member.kraus()),
        telemetry,
        notes,
    })
}

/// Output state of a product input, as a pure vector when it is one.
enum Output {
    Pure(Vec<C64>),
    Mixed(ComplexMatrix),
}

fn output_of(ch: &Channel, locals: &[Vec<C64>]) -> Result<Output> {
    let mut psi = locals[0].clone();
    for v in &locals[1..] {
        psi = kron_vec(&psi, v);
    }
    if let Some(out) = ch.apply_vector(&psi) {
        return Ok(Output::Pure(out));
    }
    let d = ch.out_dims().total();
    let mut rho = ComplexMatrix::zeros(d, d);
    for k in ch.kraus() {
        rho.add_outer(&k.matvec(&psi), 1.0);
    }
    let purity = rho.trace_product(&rho).re;
    if purity >= 1.0 - OUTPUT_PURITY_TOL {
        let eig = eig_hermitian(&rho)?;
        return Ok(Output::Pure(eig.vector(d - 1)));
    }
    Ok(Output::Mixed(rho))
}

fn encode_hints(manifold: &ParamManifold, hints: &[Vec<Vec<C64>>]) -> Result<Vec<Vec<f64>>> {
    hints
        .iter()
        .map(|h| {
            manifold
                .encode(&DomainPoint::ProductState(h.clone()))
                .ok_or_else(|| Error::DimMismatch("hint does not match the channel's input dims".into()))
        })
        .collect()
}

/// `ℜ_c(N) = max` over product pure inputs of the concurrence of `N(ρ)`.
///
/// Pure outputs use the pure-state formula and mixed two-qubit outputs use
/// Wootters' formula; other mixed outputs are refused.
pub fn measure_rc(n: &Channel, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    measure_rc_with_hints(n, cfg, &[])
}

/// [`measure_rc`] with extra starting inputs (one local vector per site).
pub fn measure_rc_with_hints(n: &Channel, cfg: &OptimizerConfig, hints: &[Vec<Vec<C64>>]) -> Result<MeasureResult> {
    let out_dims = n.out_dims().as_slice().to_vec();
    if out_dims.len() != 2 {
        return Err(Error::NotBipartite(out_dims.len()));
    }
    let manifold = ParamManifold::ProductStates(n.in_dims().as_slice().to_vec());
    let warm = encode_hints(&manifold, hints)?;
    let saw_mixed = Cell::new(false);
    let best = maximize_with_starts(
        |pt| match output_of(n, pt.as_product_state().expect("product manifold"))? {
            Output::Pure(v) => Ok(concurrence_of_vector(&v, &out_dims)),
            Output::Mixed(rho) if out_dims == [2, 2] => {
                saw_mixed.set(true);
                wootters_matrix(&rho)
            }
            Output::Mixed(_) => Err(Error::UnsupportedMixedOutput(out_dims.clone())),
        },
        &manifold,
        cfg,
        &warm,
    )?;
    let mut notes = Vec::new();
    if saw_mixed.get() {
        notes.push("mixed two-qubit outputs evaluated with Wootters' formula".into());
    }
    Ok(MeasureResult {
        measure: "rc".into(),
        value: best.value,
        bound: Bound::Lower,
        witness: Witness::product_state(best.witness.as_product_state().unwrap()),
        telemetry: best.telemetry,
        notes,
    })
}

/// `ℜ_k-ME(N) = max` over fully product pure inputs of the k-ME concurrence
/// of the output. Outputs must be pure.
pub fn measure_rkme(n: &Channel, k: usize, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    rkme_impl(n, k, cfg, false, &[]).map(|(r, _)| r)
}

/// [`measure_rkme`] with extra starting inputs (one local vector per site).
pub fn measure_rkme_with_hints(
    n: &Channel,
    k: usize,
    cfg: &OptimizerConfig,
    hints: &[Vec<Vec<C64>>],
) -> Result<MeasureResult> {
    rkme_impl(n, k, cfg, false, hints).map(|(r, _)| r)
}

/// With `skip_mixed`, mixed outputs score zero instead of failing; the
/// flag reports whether any were met.
fn rkme_impl(
    n: &Channel,
    k: usize,
    cfg: &OptimizerConfig,
    skip_mixed: bool,
    hints: &[Vec<Vec<C64>>],
) -> Result<(MeasureResult, bool)> {
    let out_dims = n.out_dims().as_slice().to_vec();
    let parts = out_dims.len();
    if k < 2 || k > parts {
        return Err(Error::BadArity(format!("k-ME measure needs 2 <= k <= {parts}, got k = {k}")));
    }
    let manifold = ParamManifold::ProductStates(n.in_dims().as_slice().to_vec());
    let warm = encode_hints(&manifold, hints)?;
    let saw_mixed = Cell::new(false);
    let best = maximize_with_starts(
        |pt| match output_of(n, pt.as_product_state().expect("product manifold"))? {
            Output::Pure(v) => kme_of_vector(&v, &out_dims, k),
            Output::Mixed(_) if skip_mixed => {
                saw_mixed.set(true);
                Ok(0.0)
            }
            Output::Mixed(_) => Err(Error::MixedOutputUnsupported),
        },
        &manifold,
        cfg,
        &warm,
    )?;
    let mut notes = Vec::new();
    if saw_mixed.get() {
        notes.push("mixed outputs were skipped; the value covers pure outputs only".into());
    }
    let result = MeasureResult {
        measure: format!("rkme(k={k})"),
        value: best.value,
        bound: Bound::Lower,
        witness: Witness::product_state(best.witness.as_product_state().unwrap()),
        telemetry: best.telemetry,
        notes,
    };
    Ok((result, saw_mixed.get()))
}

/// Strength value of a channel and the input that certifies it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrengthReport {
    /// Smallest `k` with `ℜ_k-ME > sep_tol`, or `n + 1`.
    pub k: usize,
    /// Input whose output is nonseparable in every `k`-partition.
    pub witness_state: Option<Vec<Vec<[f64; 2]>>>,
    /// `Q_K`.
    pub classification: String,
    /// Some outputs met during the search were mixed and were skipped.
    pub caveat: bool,
    /// `(k, ℜ_k-ME)` for every `k` evaluated.
    pub values: Vec<(usize, f64)>,
    pub telemetry: Telemetry,
}

/// `K(N)`: searches `k = 2, 3, …` and stops at the first positive `ℜ_k-ME`.
pub fn strength_value(n: &Channel, cfg: &OptimizerConfig) -> Result<StrengthReport> {
    let parts = n.out_dims().len();
    let mut values = Vec::new();
    let mut caveat = false;
    let mut telemetry = Telemetry::empty(cfg.seed);
    for k in 2..=parts {
        let (r, mixed) = rkme_impl(n, k, cfg, true, &[])?;
        caveat |= mixed;
        telemetry.absorb(&r.telemetry);
        values.push((k, r.value));
        if r.value > cfg.sep_tol {
            let Witness::ProductState { locals } = r.witness else { unreachable!() };
            return Ok(StrengthReport {
                k,
                witness_state: Some(locals),
                classification: format!("Q_{k}"),
                caveat,
                values,
                telemetry,
            });
        }
    }
    Ok(StrengthReport {
        k: parts + 1,
        witness_state: None,
        classification: format!("Q_{}", parts + 1),
        caveat,
        values,
        telemetry,
    })
}

/// Which `Γ_k` a channel belongs to, read off the zero pattern of `ℜ_k-ME`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    /// `(k, ℜ_k-ME)` for `k = 2..=n`.
    pub values: Vec<(usize, f64)>,
    /// Every `k` with `ℜ_k-ME ≤ sep_tol`, i.e. `N ∈ Γ_k`.
    pub members: Vec<usize>,
    /// Strength value implied by the pattern.
    pub strength: usize,
    /// Member of `Γ_n = Γ`.
    pub is_free: bool,
    /// The members are exactly `{2, …, K−1}`.
    pub consistent: bool,
    pub caveat: bool,
}

pub fn classify_gamma_k(n: &Channel, cfg: &OptimizerConfig) -> Result<GammaReport> {
    let parts = n.out_dims().len();
    let mut values = Vec::new();
    let mut caveat = false;
    for k in 2..=parts {
        let (r, mixed) = rkme_impl(n, k, cfg, true, &[])?;
        caveat |= mixed;
        values.push((k, r.value));
    }
    let members: Vec<usize> = values.iter().filter(|(_, v)| *v <= cfg.sep_tol).map(|(k, _)| *k).collect();
    let strength = values.iter().find(|(_, v)| *v > cfg.sep_tol).map_or(parts + 1, |(k, _)| *k);
    let consistent = members.iter().copied().eq(2..strength);
    Ok(GammaReport { is_free: members.contains(&parts), values, members, strength, consistent, caveat })
}
