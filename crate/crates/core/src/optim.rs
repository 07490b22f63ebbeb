//! Multi-start Nelder–Mead over parameterized search spaces.
//!
//! Every measure in the crate is an extremum over some set of quantum
//! objects (product states, channels, probability vectors). A
//! [`ParamManifold`] maps an unconstrained real vector onto that set, so the
//! optimizer itself never sees constraints. Starts are independent; start `i`
//! draws from ChaCha stream `i` of the configured seed, so results do not depend
//! on how or whether starts run concurrently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm_i_hermitian, norm, ComplexMatrix, C64, ZERO};

/// Optimizer knobs shared by every measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Independent random restarts.
    pub starts: usize,
    /// Nelder–Mead iteration budget per start.
    pub max_iters: usize,
    pub xtol: f64,
    pub ftol: f64,
    pub seed: u64,
    /// Weight of the scale-anchoring penalty on redundant parameter norms.
    pub penalty_weight: f64,
    /// Alternating outer/inner rounds for nested min-max problems.
    pub rounds: usize,
    /// Kraus rank of probe channels; `None` means the input dimension.
    pub probe_rank: Option<usize>,
    /// Values at or below this are reported as zero when classifying.
    pub sep_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            max_iters: 2000,
            xtol: 1e-8,
            ftol: 1e-10,
            seed: 0,
            penalty_weight: 1e-3,
            rounds: 5,
            probe_rank: None,
            sep_tol: 1e-6,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::BadParam("starts must be at least 1".into()));
        }
        if !(self.xtol > 0.0 && self.ftol > 0.0) {
            return Err(Error::BadParam("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// A search space together with its real parameterization.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamManifold {
    /// One unit vector per subsystem; `2 d_i` reals each.
    ProductStates(Vec<usize>),
    /// `exp(iH)` with `H` Hermitian; `D²` reals.
    Unitary(usize),
    /// Kraus families `in_dim -> out_dim` of the given rank, from the
    /// orthonormalized columns of a `(rank·out_dim) × in_dim` complex matrix.
    Kraus { in_dim: usize, out_dim: usize, rank: usize },
    /// Probability vectors via softmax.
    Simplex(usize),
    Composite(Vec<ParamManifold>),
}

/// A decoded point of a [`ParamManifold`].
#[derive(Clone, Debug, PartialEq)]
pub enum DomainPoint {
    ProductState(Vec<Vec<C64>>),
    Unitary(ComplexMatrix),
    Kraus(Vec<ComplexMatrix>),
    Simplex(Vec<f64>),
    Composite(Vec<DomainPoint>),
}

impl DomainPoint {
    pub fn as_product_state(&self) -> Option<&[Vec<C64>]> {
        match self {
            Self::ProductState(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_kraus(&self) -> Option<&[ComplexMatrix]> {
        match self {
            Self::Kraus(k) => Some(k),
            _ => None,
        }
    }

    pub fn as_composite(&self) -> Option<&[DomainPoint]> {
        match self {
            Self::Composite(parts) => Some(parts),
            _ => None,
        }
    }
}

impl ParamManifold {
    /// Number of real parameters.
    pub fn dof(&self) -> usize {
        match self {
            Self::ProductStates(dims) => dims.iter().map(|d| 2 * d).sum(),
            Self::Unitary(d) => d * d,
            Self::Kraus { in_dim, out_dim, rank } => 2 * rank * out_dim * in_dim,
            Self::Simplex(m) => *m,
            Self::Composite(parts) => parts.iter().map(Self::dof).sum(),
        }
    }

    pub fn decode(&self, theta: &[f64]) -> Result<DomainPoint> {
        if theta.len() != self.dof() {
            return Err(Error::BadLength { expected: self.dof(), got: theta.len() });
        }
        Ok(match self {
            Self::ProductStates(dims) => {
                let mut off = 0;
                let mut locals = Vec::with_capacity(dims.len());
                for &d in dims {
                    locals.push(unit_vector(&theta[off..off + 2 * d]));
                    off += 2 * d;
                }
                DomainPoint::ProductState(locals)
            }
            Self::Unitary(d) => DomainPoint::Unitary(expm_i_hermitian(&hermitian_from(*d, theta))?),
            Self::Kraus { in_dim, out_dim, rank } => {
                if rank * out_dim < *in_dim {
                    return Err(Error::BadParam(format!(
                        "Kraus rank {rank} too small for an isometry {in_dim} -> {}",
                        rank * out_dim
                    )));
                }
                DomainPoint::Kraus(kraus_from(*in_dim, *out_dim, *rank, theta))
            }
            Self::Simplex(_) => DomainPoint::Simplex(softmax(theta)),
            Self::Composite(parts) => {
                let mut off = 0;
                let mut pts = Vec::with_capacity(parts.len());
                for p in parts {
                    let n = p.dof();
                    pts.push(p.decode(&theta[off..off + n])?);
                    off += n;
                }
                DomainPoint::Composite(pts)
            }
        })
    }

    /// Parameters that decode to `point`, where an exact preimage is cheap.
    ///
    /// Unitaries have no encoder; Kraus families need at most `rank`
    /// operators (missing ones are padded with zeros).
    pub fn encode(&self, point: &DomainPoint) -> Option<Vec<f64>> {
        match (self, point) {
            (Self::ProductStates(dims), DomainPoint::ProductState(locals)) => {
                if dims.len() != locals.len() || dims.iter().zip(locals).any(|(d, v)| *d != v.len()) {
                    return None;
                }
                Some(locals.iter().flatten().flat_map(|z| [z.re, z.im]).collect())
            }
            (Self::Kraus { in_dim, out_dim, rank }, DomainPoint::Kraus(ops)) => {
                if ops.len() > *rank || ops.iter().any(|k| k.rows() != *out_dim || k.cols() != *in_dim) {
                    return None;
                }
                let mut theta = vec![0.0; self.dof()];
                for (i, z) in ops.iter().flat_map(|k| k.as_slice().iter()).enumerate() {
                    theta[2 * i] = z.re;
                    theta[2 * i + 1] = z.im;
                }
                Some(theta)
            }
            (Self::Simplex(m), DomainPoint::Simplex(p)) => {
                if p.len() != *m {
                    return None;
                }
                Some(p.iter().map(|x| x.max(1e-300).ln()).collect())
            }
            (Self::Composite(parts), DomainPoint::Composite(points)) => {
                if parts.len() != points.len() {
                    return None;
                }
                let mut out = Vec::with_capacity(self.dof());
                for (m, p) in parts.iter().zip(points) {
                    out.extend(m.encode(p)?);
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Standard normal draw of every parameter.
    pub fn random_theta(&self, rng: &mut impl Rng) -> Vec<f64> {
        (0..self.dof()).map(|_| rng.sample(StandardNormal)).collect()
    }

    /// Penalty on the directions the decoder ignores (vector scale, softmax
    /// shift), keeping the simplex from drifting along them.
    fn scale_penalty(&self, theta: &[f64]) -> f64 {
        match self {
            Self::ProductStates(dims) => {
                let mut off = 0;
                let mut acc = 0.0;
                for &d in dims {
                    let n2: f64 = theta[off..off + 2 * d].iter().map(|x| x * x).sum();
                    acc += log_sq(n2);
                    off += 2 * d;
                }
                acc
            }
            Self::Kraus { in_dim, .. } => {
                let n2: f64 = theta.iter().map(|x| x * x).sum();
                log_sq(n2 / *in_dim as f64)
            }
            Self::Unitary(_) => 0.0,
            Self::Simplex(m) => {
                let mean = theta.iter().sum::<f64>() / *m as f64;
                mean * mean
            }
            Self::Composite(parts) => {
                let mut off = 0;
                let mut acc = 0.0;
                for p in parts {
                    let n = p.dof();
                    acc += p.scale_penalty(&theta[off..off + n]);
                    off += n;
                }
                acc
            }
        }
    }
}

fn log_sq(n2: f64) -> f64 {
    let l = n2.max(1e-300).ln();
    l * l
}

fn unit_vector(raw: &[f64]) -> Vec<C64> {
    let v: Vec<C64> = raw.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
    let n = norm(&v);
    if n < 1e-150 || !n.is_finite() {
        let mut e = vec![ZERO; v.len()];
        e[0] = C64::new(1.0, 0.0);
        return e;
    }
    v.into_iter().map(|z| z / n).collect()
}

fn hermitian_from(d: usize, theta: &[f64]) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = C64::new(theta[i], 0.0);
    }
    let mut off = d;
    for p in 0..d {
        for q in (p + 1)..d {
            let z = C64::new(theta[off], theta[off + 1]);
            h[(p, q)] = z;
            h[(q, p)] = z.conj();
            off += 2;
        }
    }
    h
}

/// Orthonormal columns via modified Gram–Schmidt with reorthogonalization.
///
/// Rank-deficient input is completed with standard basis directions, so the
/// result is always an isometry.
pub(crate) fn orthonormalize_columns(a: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (a.rows(), a.cols());
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(cols);
    let project_out = |v: &mut Vec<C64>, q: &[Vec<C64>]| {
        for _ in 0..2 {
            for qi in q {
                let coeff: C64 = qi.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                for (vk, qk) in v.iter_mut().zip(qi) {
                    *vk -= coeff * qk;
                }
            }
        }
    };
    for j in 0..cols {
        let mut v = a.column(j);
        let scale = norm(&v);
        project_out(&mut v, &q);
        let mut n = norm(&v);
        if !n.is_finite() || n <= 1e-10 * scale.max(1e-300) {
            for e in 0..rows {
                let mut b = vec![ZERO; rows];
                b[e] = C64::new(1.0, 0.0);
                project_out(&mut b, &q);
                let nb = norm(&b);
                if nb > 0.5 {
                    v = b;
                    n = nb;
                    break;
                }
            }
        }
        q.push(v.into_iter().map(|z| z / n).collect());
    }
    ComplexMatrix::from_columns(&q)
}

fn kraus_from(in_dim: usize, out_dim: usize, rank: usize, theta: &[f64]) -> Vec<ComplexMatrix> {
    let data: Vec<C64> = theta.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
    let stacked = ComplexMatrix::from_vec(rank * out_dim, in_dim, data);
    let iso = orthonormalize_columns(&stacked);
    let flat = iso.into_vec();
    flat.chunks_exact(out_dim * in_dim)
        .map(|block| ComplexMatrix::from_vec(out_dim, in_dim, block.to_vec()))
        .collect()
}

fn softmax(theta: &[f64]) -> Vec<f64> {
    let m = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = theta.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Optimizer bookkeeping attached to every result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub starts: usize,
    pub warm_starts: usize,
    /// Nelder–Mead iterations, one entry per run (warm starts first).
    pub iterations: Vec<usize>,
    pub evaluations: usize,
    pub seed: u64,
    /// Index into `iterations` of the run that produced the result.
    pub best_run: usize,
}

impl Telemetry {
    pub fn empty(seed: u64) -> Self {
        Self { starts: 0, warm_starts: 0, iterations: Vec::new(), evaluations: 0, seed, best_run: 0 }
    }

    pub fn total_iterations(&self) -> usize {
        self.iterations.iter().sum()
    }

    /// Folds another run's counters into this one.
    pub fn absorb(&mut self, other: &Telemetry) {
        self.starts += other.starts;
        self.warm_starts += other.warm_starts;
        self.iterations.extend_from_slice(&other.iterations);
        self.evaluations += other.evaluations;
    }
}

/// Best point found by [`maximize`].
#[derive(Clone, Debug)]
pub struct Maximum {
    pub value: f64,
    pub theta: Vec<f64>,
    pub witness: DomainPoint,
    pub telemetry: Telemetry,
}

struct RunResult {
    value: f64,
    theta: Vec<f64>,
    iterations: usize,
    evaluations: usize,
}

/// Best value of `objective` over `starts` seeded Nelder–Mead runs.
///
/// For a maximization the result is a lower bound on the true maximum.
/// Objective errors are returned unchanged; a non-finite objective value is
/// reported as [`Error::ObjectiveFailure`] with the offending parameters.
pub fn maximize<F>(objective: F, manifold: &ParamManifold, cfg: &OptimizerConfig) -> Result<Maximum>
where
    F: Fn(&DomainPoint) -> Result<f64>,
{
    maximize_with_starts(objective, manifold, cfg, &[])
}

/// [`maximize`] with extra caller-supplied starting parameters.
///
/// Warm starts run before the random ones and do not perturb the random
/// streams, so adding them can only raise the result.
pub fn maximize_with_starts<F>(
    objective: F,
    manifold: &ParamManifold,
    cfg: &OptimizerConfig,
    warm: &[Vec<f64>],
) -> Result<Maximum>
where
    F: Fn(&DomainPoint) -> Result<f64>,
{
    cfg.validate()?;
    let dof = manifold.dof();
    for w in warm {
        if w.len() != dof {
            return Err(Error::BadLength { expected: dof, got: w.len() });
        }
    }
    let mut runs = Vec::with_capacity(warm.len() + cfg.starts);
    for w in warm {
        runs.push(nelder_mead(&objective, manifold, cfg, w.clone())?);
    }
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    for s in 0..cfg.starts {
        let mut rng = base.clone();
        rng.set_stream(s as u64);
        let x0 = manifold.random_theta(&mut rng);
        runs.push(nelder_mead(&objective, manifold, cfg, x0)?);
    }
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value > runs[best].value {
            best = i;
        }
    }
    let telemetry = Telemetry {
        starts: cfg.starts,
        warm_starts: warm.len(),
        iterations: runs.iter().map(|r| r.iterations).collect(),
        evaluations: runs.iter().map(|r| r.evaluations).sum(),
        seed: cfg.seed,
        best_run: best,
    };
    let winner = runs.swap_remove(best);
    let witness = manifold.decode(&winner.theta)?;
    Ok(Maximum { value: winner.value, theta: winner.theta, witness, telemetry })
}

/// Minimization through negation; the returned `value` is the minimum found
/// (an upper bound on the true minimum).
pub fn minimize_with_starts<F>(
    objective: F,
    manifold: &ParamManifold,
    cfg: &OptimizerConfig,
    warm: &[Vec<f64>],
) -> Result<Maximum>
where
    F: Fn(&DomainPoint) -> Result<f64>,
{
    let mut m = maximize_with_starts(|p| objective(p).map(|v| -v), manifold, cfg, warm)?;
    m.value = -m.value;
    Ok(m)
}

fn nelder_mead<F>(objective: &F, manifold: &ParamManifold, cfg: &OptimizerConfig, x0: Vec<f64>) -> Result<RunResult>
where
    F: Fn(&DomainPoint) -> Result<f64>,
{
    let n = x0.len();
    let mut best_value = f64::NEG_INFINITY;
    let mut best_theta = x0.clone();
    let mut evaluations = 0usize;

    // Internal cost: negated objective plus the scale penalty. The reported
    // value is always the raw objective at an evaluated point.
    let mut cost = |x: &[f64]| -> Result<(f64, f64)> {
        let point = manifold.decode(x)?;
        let f = objective(&point)?;
        evaluations += 1;
        if !f.is_finite() {
            return Err(Error::ObjectiveFailure {
                message: format!("objective returned {f}"),
                theta: x.to_vec(),
            });
        }
        if f > best_value {
            best_value = f;
            best_theta.copy_from_slice(x);
        }
        Ok((-f + cfg.penalty_weight * manifold.scale_penalty(x), f))
    };

    if n == 0 {
        cost(&x0)?;
        return Ok(RunResult { value: best_value, theta: best_theta, iterations: 1, evaluations });
    }

    // Adaptive coefficients for higher dimensions.
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.clone());
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += 0.5 * x0[i].abs().max(1.0);
        simplex.push(x);
    }
    let mut fvals = Vec::with_capacity(n + 1);
    let mut raw = Vec::with_capacity(n + 1);
    for x in &simplex {
        let (c, f) = cost(x)?;
        fvals.push(c);
        raw.push(f);
    }

    let mut iterations = 0usize;
    loop {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fvals[a].total_cmp(&fvals[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        fvals = order.iter().map(|&i| fvals[i]).collect();
        raw = order.iter().map(|&i| raw[i]).collect();

        // A flat objective cannot be improved by moving along the penalty.
        if raw.iter().all(|&f| f == raw[0]) {
            break;
        }
        let f_spread = (fvals[n] - fvals[0]).abs();
        if f_spread <= cfg.ftol {
            let x_spread = simplex[1..]
                .iter()
                .flat_map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if f_spread == 0.0 || x_spread <= cfg.xtol {
                break;
            }
        }
        if iterations >= cfg.max_iters {
            break;
        }

        let mut centroid = vec![0.0; n];
        for x in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = along(alpha);
        let (fr, rr) = cost(&xr)?;
        if fr < fvals[0] {
            let xe = along(alpha * beta);
            let (fe, re) = cost(&xe)?;
            if fe < fr {
                (simplex[n], fvals[n], raw[n]) = (xe, fe, re);
            } else {
                (simplex[n], fvals[n], raw[n]) = (xr, fr, rr);
            }
            continue;
        }
        if fr < fvals[n - 1] {
            (simplex[n], fvals[n], raw[n]) = (xr, fr, rr);
            continue;
        }
        let xc = if fr < fvals[n] { along(alpha * gamma) } else { along(-gamma) };
        let (fc, rc) = cost(&xc)?;
        if fc < fvals[n].min(fr) {
            (simplex[n], fvals[n], raw[n]) = (xc, fc, rc);
            continue;
        }
        let x0 = simplex[0].clone();
        for i in 1..=n {
            let xi: Vec<f64> = x0.iter().zip(&simplex[i]).map(|(b, x)| b + delta * (x - b)).collect();
            (fvals[i], raw[i]) = cost(&xi)?;
            simplex[i] = xi;
        }
    }
    Ok(RunResult { value: best_value, theta: best_theta, iterations, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn manifold_strategy() -> impl Strategy<Value = ParamManifold> {
        prop_oneof![
            prop::collection::vec(2usize..4, 1..4).prop_map(ParamManifold::ProductStates),
            (2usize..5).prop_map(ParamManifold::Unitary),
            (2usize..4, 2usize..4, 1usize..4)
                .prop_filter("isometry needs rank * out >= in", |(i, o, r)| r * o >= *i)
                .prop_map(|(i, o, r)| ParamManifold::Kraus { in_dim: i, out_dim: o, rank: r }),
            (1usize..6).prop_map(ParamManifold::Simplex),
        ]
    }

    fn check_point(p: &DomainPoint) -> std::result::Result<(), String> {
        match p {
            DomainPoint::ProductState(v) => {
                for x in v {
                    if (norm(x) - 1.0).abs() > 1e-8 {
                        return Err(format!("local norm {}", norm(x)));
                    }
                }
            }
            DomainPoint::Unitary(u) => {
                if u.unitarity_deviation() > 1e-8 {
                    return Err("not unitary".into());
                }
            }
            DomainPoint::Kraus(ops) => {
                let d = ops[0].cols();
                let mut acc = ComplexMatrix::zeros(d, d);
                for k in ops {
                    acc = &acc + &(&k.adjoint() * k);
                }
                if acc.max_abs_diff(&ComplexMatrix::identity(d)) > 1e-8 {
                    return Err("incomplete Kraus family".into());
                }
            }
            DomainPoint::Simplex(p) => {
                if p.iter().any(|&x| x < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-8 {
                    return Err("not a probability vector".into());
                }
            }
            DomainPoint::Composite(parts) => {
                for q in parts {
                    check_point(q)?;
                }
            }
        }
        Ok(())
    }

    #[test]
    fn decode_examples() {
        let m = ParamManifold::ProductStates(vec![2, 2]);
        let p = m.decode(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let zero = vec![C64::new(1.0, 0.0), ZERO];
        assert_eq!(p, DomainPoint::ProductState(vec![zero.clone(), zero]));

        let u = ParamManifold::Unitary(2).decode(&[0.0; 4]).unwrap();
        match u {
            DomainPoint::Unitary(u) => assert!(u.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15),
            _ => unreachable!(),
        }

        assert_eq!(
            ParamManifold::Simplex(2).decode(&[0.0, 0.0]).unwrap(),
            DomainPoint::Simplex(vec![0.5, 0.5])
        );
        assert!(matches!(
            ParamManifold::Simplex(2).decode(&[0.0]),
            Err(Error::BadLength { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn kraus_encode_roundtrip() {
        let m = ParamManifold::Kraus { in_dim: 2, out_dim: 2, rank: 3 };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let theta = m.random_theta(&mut rng);
        let p = m.decode(&theta).unwrap();
        let back = m.decode(&m.encode(&p).unwrap()).unwrap();
        let (a, b) = (p.as_kraus().unwrap(), back.as_kraus().unwrap());
        for (x, y) in a.iter().zip(b) {
            assert!(x.max_abs_diff(y) < 1e-12);
        }
        // The identity channel, padded with zero operators.
        let id = DomainPoint::Kraus(vec![ComplexMatrix::identity(2)]);
        let dec = m.decode(&m.encode(&id).unwrap()).unwrap();
        assert!(dec.as_kraus().unwrap()[0].max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn constant_objective_stops_immediately() {
        let m = ParamManifold::ProductStates(vec![2, 2]);
        let cfg = OptimizerConfig::default();
        let r = maximize(|_| Ok(0.5), &m, &cfg).unwrap();
        assert_eq!(r.value, 0.5);
        assert!(r.telemetry.iterations.iter().all(|&i| i == 1));
    }

    #[test]
    fn finds_quadratic_maximum() {
        let m = ParamManifold::Simplex(3);
        let cfg = OptimizerConfig::default().with_starts(4);
        // Max of -|p - target|² over the simplex is 0 at p = target.
        let target = [0.2, 0.3, 0.5];
        let r = maximize(
            |p| match p {
                DomainPoint::Simplex(p) => Ok(-p.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum::<f64>()),
                _ => unreachable!(),
            },
            &m,
            &cfg,
        )
        .unwrap();
        assert!(r.value > -1e-10, "{}", r.value);
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let m = ParamManifold::Simplex(2);
        let err = maximize(|_| Ok(f64::NAN), &m, &OptimizerConfig::default()).unwrap_err();
        match err {
            Error::ObjectiveFailure { theta, .. } => assert_eq!(theta.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn determinism_and_monotone_starts() {
        let m = ParamManifold::ProductStates(vec![2, 2]);
        let f = |p: &DomainPoint| -> Result<f64> {
            let v = p.as_product_state().unwrap();
            Ok((v[0][0] * v[1][1]).norm() + 0.3 * v[0][1].re)
        };
        let cfg = OptimizerConfig::default().with_starts(4).with_seed(11).with_max_iters(200);
        let a = maximize(f, &m, &cfg).unwrap();
        let b = maximize(f, &m, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.theta, b.theta);
        let more = maximize(f, &m, &cfg.clone().with_starts(8)).unwrap();
        assert!(more.value >= a.value);
        assert_eq!(more.telemetry.iterations[..4], a.telemetry.iterations[..]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn decode_always_valid(m in manifold_strategy(), seed in any::<u64>(), scale in 0.0f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let theta: Vec<f64> = m.random_theta(&mut rng).into_iter().map(|x| x * scale).collect();
            let p = m.decode(&theta).unwrap();
            prop_assert!(check_point(&p).is_ok(), "{:?}", check_point(&p));
        }

        #[test]
        fn composite_decode_valid(seed in any::<u64>()) {
            let m = ParamManifold::Composite(vec![
                ParamManifold::Kraus { in_dim: 2, out_dim: 2, rank: 4 },
                ParamManifold::Simplex(3),
                ParamManifold::ProductStates(vec![3]),
            ]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = m.decode(&m.random_theta(&mut rng)).unwrap();
            prop_assert!(check_point(&p).is_ok());
        }
    }
}
