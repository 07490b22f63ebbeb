//! Randomized checks of the axioms each measure is supposed to satisfy.
//!
//! Every inequality compares two optimized values. To keep a check from
//! failing on a merely unlucky search, the larger side is warm-started from
//! the smaller side's witness mapped through the free operations involved
//! (for `ℜ_c`, `V(ψ*)` decomposed into product states), so a violation
//! beyond the slack points at the implementation rather than the optimizer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel_measures::{
    choi_relative_entropy, choi_relative_entropy_with_probes, classify_gamma_k, measure_rc_with_hints,
    measure_rkme_with_hints, measure_rr, probe_objective, strength_value, MeasureResult,
};
use crate::channels::{random_channel, random_unitary, random_unitary_channel, Channel, FreeChannelFamily, Superchannel};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::optim::{minimize_with_starts, OptimizerConfig};
use crate::states::SystemDims;

/// One-sided slack for inequalities between optimized values.
pub const SLACK: f64 = 2e-3;
/// Slack for the sampled additivity check.
pub const ADDITIVITY_SLACK: f64 = 5e-3;
/// Nonnegativity tolerance.
pub const NONNEG_TOL: f64 = 1e-9;
/// Free channels must score at most this.
pub const FREE_ZERO_TOL: f64 = 1e-6;
/// In-family channels must have `ℜ_r` at most this.
pub const RR_ZERO_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Sc,
    Rr,
    Rc,
    Rkme,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sc" => Ok(Self::Sc),
            "rr" => Ok(Self::Rr),
            "rc" => Ok(Self::Rc),
            "rkme" => Ok(Self::Rkme),
            "all" => Ok(Self::All),
            other => Err(Error::BadParam(format!("unknown suite `{other}`"))),
        }
    }
}

/// Deliberate defects, used to confirm that the suites can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Report `-ℜ_c` instead of `ℜ_c`.
    SignFlipConcurrence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckConfig {
    pub trials: usize,
    pub seed: u64,
    /// Optimizer restarts per measure evaluation.
    pub starts: usize,
    /// Also run the expensive sampled additivity check.
    pub nightly: bool,
    pub fault: Option<Fault>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { trials: 20, seed: 0, starts: 8, nightly: false, fault: None }
    }
}

/// Outcome of one property over all its trials.
///
/// `worst_margin` is the smallest `allowed − observed` over the trials;
/// the property passes iff it is nonnegative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyOutcome {
    pub suite: String,
    pub name: String,
    pub trials: usize,
    pub pass: bool,
    pub worst_margin: f64,
    pub failures: usize,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub properties: Vec<PropertyOutcome>,
    pub pass: bool,
}

struct Tracker {
    suite: &'static str,
    name: &'static str,
    margins: Vec<f64>,
    notes: Vec<String>,
}

impl Tracker {
    fn new(suite: &'static str, name: &'static str) -> Self {
        Self { suite, name, margins: Vec::new(), notes: Vec::new() }
    }

    fn record(&mut self, margin: f64) {
        self.margins.push(if margin.is_nan() { f64::NEG_INFINITY } else { margin });
    }

    /// Runs one trial; an error counts as a failed trial.
    fn trial(&mut self, f: impl FnOnce() -> Result<f64>) {
        match f() {
            Ok(m) => self.record(m),
            Err(e) => {
                self.notes.push(format!("trial {}: {e}", self.margins.len()));
                self.record(f64::NEG_INFINITY);
            }
        }
    }

    fn finish(self) -> PropertyOutcome {
        let worst = self.margins.iter().copied().fold(f64::INFINITY, f64::min);
        let failures = self.margins.iter().filter(|&&m| m < 0.0).count();
        PropertyOutcome {
            suite: self.suite.into(),
            name: self.name.into(),
            trials: self.margins.len(),
            pass: failures == 0 && !self.margins.is_empty(),
            worst_margin: worst,
            failures,
            notes: self.notes,
        }
    }
}

/// Runs a suite; `All` runs every suite in turn.
pub fn run_suite(suite: Suite, cfg: &CheckConfig) -> Result<SuiteReport> {
    if cfg.trials == 0 {
        return Err(Error::BadParam("trials must be at least 1".into()));
    }
    let mut properties = Vec::new();
    let suites: &[Suite] = match suite {
        Suite::All => &[Suite::Sc, Suite::Rr, Suite::Rc, Suite::Rkme],
        _ => std::slice::from_ref(&suite),
    };
    for s in suites {
        properties.extend(match s {
            Suite::Sc => sc_suite(cfg),
            Suite::Rr => rr_suite(cfg),
            Suite::Rc => rc_suite(cfg),
            Suite::Rkme => rkme_suite(cfg),
            Suite::All => unreachable!(),
        });
    }
    let pass = properties.iter().all(|p| p.pass);
    Ok(SuiteReport { properties, pass })
}

fn rng_for(cfg: &CheckConfig, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    rng
}

fn opt(cfg: &CheckConfig, trial: usize) -> OptimizerConfig {
    OptimizerConfig::default().with_seed(cfg.seed.wrapping_add(trial as u64)).with_starts(cfg.starts)
}

fn qubit() -> SystemDims {
    SystemDims::new(vec![2]).expect("valid")
}

fn qubits(n: usize) -> SystemDims {
    SystemDims::uniform(n, 2).expect("valid")
}

fn random_qubit_channel(rng: &mut ChaCha8Rng) -> Result<Channel> {
    let rank = rng.random_range(1..=4);
    random_channel(qubit(), qubit(), rank, rng)
}

/// Full Kraus rank, hence a full-rank Choi matrix and finite `S_C(·‖M)`.
fn full_rank_qubit_channel(rng: &mut ChaCha8Rng) -> Result<Channel> {
    random_channel(qubit(), qubit(), 4, rng)
}

/// Random two-qubit channel; unitary half of the time, otherwise Kraus
/// rank 2 (mixed outputs).
fn random_two_qubit_channel(rng: &mut ChaCha8Rng) -> Result<Channel> {
    if rng.random_bool(0.5) {
        Ok(random_unitary_channel(qubits(2), rng))
    } else {
        random_channel(qubits(2), qubits(2), 2, rng)
    }
}

fn free_family(dims: &SystemDims, trial: usize) -> Result<FreeChannelFamily> {
    if trial.is_multiple_of(2) {
        Ok(FreeChannelFamily::local_product(dims))
    } else {
        FreeChannelFamily::mixture(dims, 2)
    }
}

fn local_unitaries(n: usize, rng: &mut ChaCha8Rng) -> Result<(Channel, Vec<ComplexMatrix>)> {
    let us: Vec<ComplexMatrix> = (0..n).map(|_| random_unitary(2, rng)).collect();
    let mut ch = Channel::unitary(us[0].clone(), qubit())?;
    for u in &us[1..] {
        ch = ch.tensor(&Channel::unitary(u.clone(), qubit())?)?;
    }
    Ok((ch, us))
}

fn random_weight(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.1..0.9)
}

// ----- S_C --------------------------------------------------------------
//
// Inequalities use second arguments of full Kraus rank: with a rank-deficient
// `M` the exact values can be infinite and only the smoothing decides the
// finite stand-ins, which are not comparable across dimensions.

fn sc_suite(cfg: &CheckConfig) -> Vec<PropertyOutcome> {
    let mut rng = rng_for(cfg, 1);
    let mut nonneg = Tracker::new("sc", "sc_nonnegativity");
    let mut mono = Tracker::new("sc", "sc_superchannel_monotonicity");
    let mut convex = Tracker::new("sc", "sc_joint_convexity");
    let mut superadd = Tracker::new("sc", "sc_superadditivity");
    for t in 0..cfg.trials {
        let o = opt(cfg, t);
        nonneg.trial(|| {
            let (n, m) = (random_qubit_channel(&mut rng)?, random_qubit_channel(&mut rng)?);
            Ok(choi_relative_entropy(&n, &m, &o)?.value + NONNEG_TOL)
        });
        mono.trial(|| {
            let (n, m) = (random_qubit_channel(&mut rng)?, full_rank_qubit_channel(&mut rng)?);
            let phi = Superchannel::new(random_qubit_channel(&mut rng)?, full_rank_qubit_channel(&mut rng)?);
            let lhs = choi_relative_entropy(&phi.apply(&n)?, &phi.apply(&m)?, &o)?;
            let probes = witness_probe(&lhs)
                .map(|x| phi.pre.compose(&x))
                .transpose()?
                .map(|c| vec![c.kraus().to_vec()])
                .unwrap_or_default();
            let rhs = choi_relative_entropy_with_probes(&n, &m, &o, &probes)?;
            Ok(rhs.value + SLACK - lhs.value)
        });
        convex.trial(|| {
            let p = random_weight(&mut rng);
            let (n1, n2) = (random_qubit_channel(&mut rng)?, random_qubit_channel(&mut rng)?);
            let (m1, m2) = (full_rank_qubit_channel(&mut rng)?, full_rank_qubit_channel(&mut rng)?);
            let n = Channel::mix(&[(p, &n1), (1.0 - p, &n2)])?;
            let m = Channel::mix(&[(p, &m1), (1.0 - p, &m2)])?;
            let lhs = choi_relative_entropy(&n, &m, &o)?;
            let probes: Vec<Vec<ComplexMatrix>> = lhs.witness.kraus().into_iter().collect();
            let r1 = choi_relative_entropy_with_probes(&n1, &m1, &o, &probes)?;
            let r2 = choi_relative_entropy_with_probes(&n2, &m2, &o, &probes)?;
            Ok(p * r1.value + (1.0 - p) * r2.value + SLACK - lhs.value)
        });
        superadd.trial(|| {
            let (n0, m0) = (random_qubit_channel(&mut rng)?, full_rank_qubit_channel(&mut rng)?);
            let (n1, m1) = (random_qubit_channel(&mut rng)?, full_rank_qubit_channel(&mut rng)?);
            let r0 = choi_relative_entropy(&n0, &m0, &o)?;
            let r1 = choi_relative_entropy(&n1, &m1, &o)?;
            let id = Channel::identity(qubit());
            let x0 = witness_probe(&r0).unwrap_or_else(|| id.clone());
            let x1 = witness_probe(&r1).unwrap_or(id);
            let probe = vec![x0.tensor(&x1)?.kraus().to_vec()];
            // The four-dimensional search only has to improve on the product
            // probe, so a short run suffices.
            let short = OptimizerConfig { starts: 1, max_iters: 300, ..o.clone() };
            let lhs = choi_relative_entropy_with_probes(&n0.tensor(&n1)?, &m0.tensor(&m1)?, &short, &probe)?;
            Ok(lhs.value + SLACK - r0.value - r1.value)
        });
    }
    vec![nonneg.finish(), mono.finish(), convex.finish(), superadd.finish()]
}

/// The probe channel of an `S_C` result; `None` for exact zeros.
fn witness_probe(r: &MeasureResult) -> Option<Channel> {
    let kraus = r.witness.kraus()?;
    let d = kraus[0].cols();
    let dims = if d == 2 { qubit() } else { SystemDims::new(vec![d]).ok()? };
    Channel::new(dims.clone(), dims, kraus).ok()
}

// ----- ℜ_r --------------------------------------------------------------

fn rr_cfg(cfg: &CheckConfig, trial: usize) -> OptimizerConfig {
    OptimizerConfig { starts: cfg.starts.min(4), rounds: 2, max_iters: 1500, probe_rank: Some(1), ..opt(cfg, trial) }
}

fn rr_suite(cfg: &CheckConfig) -> Vec<PropertyOutcome> {
    let mut rng = rng_for(cfg, 2);
    let dims = qubits(2);
    let family = FreeChannelFamily::local_product(&dims).with_kraus_rank(1).expect("rank 1 is valid");
    let mut nonneg = Tracker::new("rr", "rr_nonnegativity");
    let mut zero = Tracker::new("rr", "rr_zero_on_family_members");
    for t in 0..cfg.trials {
        let o = rr_cfg(cfg, t);
        nonneg.trial(|| {
            let n = random_unitary_channel(dims.clone(), &mut rng);
            Ok(measure_rr(&n, &family, &o)?.value + NONNEG_TOL)
        });
        zero.trial(|| {
            let (n, _) = local_unitaries(2, &mut rng)?;
            Ok(RR_ZERO_TOL - measure_rr(&n, &family, &o)?.value)
        });
    }
    let mut out = vec![nonneg.finish(), zero.finish()];
    if cfg.nightly {
        out.push(rr_restricted_additivity(cfg));
    }
    out
}

/// `min_M S(Choi(N)‖Choi(M))` over local unitaries: `ℜ_r` with the probe
/// fixed to the identity.
fn identity_probe_rr(n: &Channel, family: &FreeChannelFamily, o: &OptimizerConfig, warm: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let d = n.in_dims().total();
    let id = [ComplexMatrix::identity(d)];
    let mut starts = vec![family.identity_theta()];
    starts.extend_from_slice(warm);
    let r = minimize_with_starts(
        |pt| probe_objective(n, family.instantiate(pt)?.channel(), &id),
        &family.manifold(),
        o,
        &starts,
    )?;
    Ok((r.value, r.theta))
}

/// `ℜ_r'(N₀⊗N₁) ≥ ℜ_r(N₀) + ℜ_r(N₁)` with local unitary families and the
/// identity probe, computed on the doubled space.
fn rr_restricted_additivity(cfg: &CheckConfig) -> PropertyOutcome {
    let mut rng = rng_for(cfg, 5);
    let mut tr = Tracker::new("rr", "rr_restricted_additivity");
    tr.notes.push("identity probe only; local unitary families".into());
    let small = qubits(2);
    let fam = FreeChannelFamily::local_product(&small).with_kraus_rank(1).expect("valid");
    let doubled = FreeChannelFamily::local_product(&qubits(4)).with_kraus_rank(1).expect("valid");
    for t in 0..5 {
        let o = OptimizerConfig { starts: 2, max_iters: 400, ..opt(cfg, t) };
        tr.trial(|| {
            let n0 = random_unitary_channel(small.clone(), &mut rng);
            let n1 = random_unitary_channel(small.clone(), &mut rng);
            let (v0, th0) = identity_probe_rr(&n0, &fam, &o, &[])?;
            let (v1, th1) = identity_probe_rr(&n1, &fam, &o, &[])?;
            let joint = [th0, th1].concat();
            let short = OptimizerConfig { starts: 1, max_iters: 60, ..o.clone() };
            let (v, _) = identity_probe_rr(&n0.tensor(&n1)?, &doubled, &short, &[joint])?;
            Ok(v + ADDITIVITY_SLACK - v0 - v1)
        });
    }
    tr.finish()
}

// ----- ℜ_c --------------------------------------------------------------

fn rc(n: &Channel, o: &OptimizerConfig, hints: &[Vec<Vec<C64>>], fault: Option<Fault>) -> Result<MeasureResult> {
    let mut r = measure_rc_with_hints(n, o, hints)?;
    if fault == Some(Fault::SignFlipConcurrence) {
        r.value = -r.value;
    }
    Ok(r)
}

/// Product states whose mixture is `V(ψ)` for a free `V`.
fn pushed_hints(v: &crate::channels::FreeChannel, r: &MeasureResult) -> Result<Vec<Vec<Vec<C64>>>> {
    let Some(locals) = r.witness.locals() else { return Ok(Vec::new()) };
    Ok(v.image_decomposition(&locals)?.into_iter().map(|(_, s)| s).collect())
}

fn rc_suite(cfg: &CheckConfig) -> Vec<PropertyOutcome> {
    let mut rng = rng_for(cfg, 3);
    let dims = qubits(2);
    let f = cfg.fault;
    let mut nonneg = Tracker::new("rc", "rc_nonnegativity");
    let mut zero = Tracker::new("rc", "rc_zero_on_free_channels");
    let mut mono = Tracker::new("rc", "rc_monotonicity");
    let mut strong = Tracker::new("rc", "rc_strong_monotonicity");
    let mut convex = Tracker::new("rc", "rc_convexity");
    strong.notes.push("ensembles of free superchannels W_i∘·∘V_i with random weights".into());
    for t in 0..cfg.trials {
        let o = opt(cfg, t);
        nonneg.trial(|| Ok(rc(&random_two_qubit_channel(&mut rng)?, &o, &[], f)?.value + NONNEG_TOL));
        zero.trial(|| {
            let free = free_family(&dims, t)?.sample_with(&mut rng);
            Ok(FREE_ZERO_TOL - rc(free.channel(), &o, &[], f)?.value)
        });
        mono.trial(|| {
            let n = random_two_qubit_channel(&mut rng)?;
            let fam = free_family(&dims, t)?;
            let (v, w) = (fam.sample_with(&mut rng), fam.sample_with(&mut rng));
            let lhs = rc(&w.channel().compose(&n.compose(v.channel())?)?, &o, &[], f)?;
            let rhs = rc(&n, &o, &pushed_hints(&v, &lhs)?, f)?;
            Ok(rhs.value + SLACK - lhs.value)
        });
        strong.trial(|| {
            let n = random_two_qubit_channel(&mut rng)?;
            let fam = free_family(&dims, t)?;
            let terms = 3;
            let mut weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            let mut lhs = 0.0;
            let mut hints = Vec::new();
            for &p in &weights {
                let (v, w) = (fam.sample_with(&mut rng), fam.sample_with(&mut rng));
                let r = rc(&w.channel().compose(&n.compose(v.channel())?)?, &o, &[], f)?;
                lhs += p * r.value;
                hints.extend(pushed_hints(&v, &r)?);
            }
            let rhs = rc(&n, &o, &hints, f)?;
            Ok(rhs.value + SLACK - lhs)
        });
        convex.trial(|| {
            let p = random_weight(&mut rng);
            let n1 = random_two_qubit_channel(&mut rng)?;
            let n2 = random_two_qubit_channel(&mut rng)?;
            let lhs = rc(&Channel::mix(&[(p, &n1), (1.0 - p, &n2)])?, &o, &[], f)?;
            let hints: Vec<_> = lhs.witness.locals().into_iter().collect();
            let r1 = rc(&n1, &o, &hints, f)?;
            let r2 = rc(&n2, &o, &hints, f)?;
            Ok(p * r1.value + (1.0 - p) * r2.value + SLACK - lhs.value)
        });
    }
    vec![nonneg.finish(), zero.finish(), mono.finish(), strong.finish(), convex.finish()]
}

// ----- ℜ_k-ME -------------------------------------------------------------

fn rkme_suite(cfg: &CheckConfig) -> Vec<PropertyOutcome> {
    let mut rng = rng_for(cfg, 4);
    let mut nonneg = Tracker::new("rkme", "rkme_nonnegativity");
    let mut zero = Tracker::new("rkme", "rkme_zero_on_free_channels");
    let mut mono = Tracker::new("rkme", "rkme_monotonicity");
    let mut subadd = Tracker::new("rkme", "rkme_subadditivity");
    let mut order = Tracker::new("rkme", "strength_ordering_consistency");
    mono.notes.push("free operations are local unitaries (pure outputs required)".into());
    for t in 0..cfg.trials {
        let o = opt(cfg, t);
        let k = 2 + t % 2;
        nonneg.trial(|| {
            let n = random_unitary_channel(qubits(3), &mut rng);
            Ok(measure_rkme_with_hints(&n, k, &o, &[])?.value + NONNEG_TOL)
        });
        zero.trial(|| {
            let (free, _) = local_unitaries(3, &mut rng)?;
            Ok(FREE_ZERO_TOL - measure_rkme_with_hints(&free, k, &o, &[])?.value)
        });
        mono.trial(|| {
            let n = random_unitary_channel(qubits(3), &mut rng);
            let (v, vs) = local_unitaries(3, &mut rng)?;
            let (w, _) = local_unitaries(3, &mut rng)?;
            let lhs = measure_rkme_with_hints(&w.compose(&n.compose(&v)?)?, k, &o, &[])?;
            let hints: Vec<_> = lhs
                .witness
                .locals()
                .map(|l| l.iter().zip(&vs).map(|(x, u)| u.matvec(x)).collect())
                .into_iter()
                .collect();
            let rhs = measure_rkme_with_hints(&n, k, &o, &hints)?;
            Ok(rhs.value + SLACK - lhs.value)
        });
        subadd.trial(|| {
            let n = random_unitary_channel(qubits(3), &mut rng);
            let m = random_unitary_channel(qubits(3), &mut rng);
            let lhs = measure_rkme_with_hints(&n.tensor(&m)?, k, &o, &[])?;
            let (hn, hm): (Vec<_>, Vec<_>) = lhs
                .witness
                .locals()
                .map(|l| (l[..3].to_vec(), l[3..].to_vec()))
                .into_iter()
                .unzip();
            let rn = measure_rkme_with_hints(&n, k, &o, &hn)?;
            let rm = measure_rkme_with_hints(&m, k, &o, &hm)?;
            Ok(rn.value + rm.value + SLACK - lhs.value)
        });
        order.trial(|| {
            let n = ordering_sample(t, &mut rng)?;
            let s = strength_value(&n, &o)?;
            let g = classify_gamma_k(&n, &o)?;
            let ok = s.k == g.strength && g.consistent && g.is_free == (s.k == n.out_dims().len() + 1);
            Ok(if ok { 0.0 } else { -1.0 })
        });
    }
    vec![nonneg.finish(), zero.finish(), mono.finish(), subadd.finish(), order.finish()]
}

/// Three-qubit unitaries with varied strength values.
fn ordering_sample(t: usize, rng: &mut ChaCha8Rng) -> Result<Channel> {
    let (l, _) = local_unitaries(3, rng)?;
    let core = match t % 4 {
        0 => Channel::cyclic_shift(3, 2)?,
        1 => Channel::cnot().tensor(&Channel::identity(qubit()))?,
        2 => Channel::ghz_entangler(3, 2)?,
        _ => random_unitary_channel(qubits(3), rng),
    };
    l.compose(&core)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(fault: Option<Fault>) -> CheckConfig {
        CheckConfig { trials: 2, seed: 3, starts: 2, nightly: false, fault }
    }

    #[test]
    fn rc_suite_passes_and_detects_sign_flip() {
        let ok = run_suite(Suite::Rc, &quick(None)).unwrap();
        assert!(ok.pass, "{:#?}", ok.properties);
        let bad = run_suite(Suite::Rc, &quick(Some(Fault::SignFlipConcurrence))).unwrap();
        assert!(!bad.pass);
        assert!(bad.properties.iter().any(|p| p.name == "rc_nonnegativity" && !p.pass));
    }

    #[test]
    fn sc_and_rkme_suites_pass() {
        for suite in [Suite::Sc, Suite::Rkme] {
            let r = run_suite(suite, &quick(None)).unwrap();
            assert!(r.pass, "{:#?}", r.properties);
        }
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = CheckConfig { trials: 0, ..quick(None) };
        assert!(run_suite(Suite::Sc, &cfg).is_err());
    }
}
