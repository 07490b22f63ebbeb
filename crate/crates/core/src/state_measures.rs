//! Entanglement quantities of states: relative entropy, concurrence (pure and
//! two-qubit mixed), k-ME concurrence of pure states, and a sampled upper
//! bound on convex roofs.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, expm_i_hermitian, kron, pauli_y, sqrt_psd, ComplexMatrix, C64, ZERO};
use crate::optim::orthonormalize_columns;
use crate::states::{enumerate_partitions, reduced_purity_of_vector, QuantumState};

/// Eigenvalues of `σ` below this count as outside its support.
pub const SUPPORT_TOL: f64 = 1e-10;
/// `ρ`-weight on the kernel of `σ` above this makes the entropy infinite.
pub const LEAKAGE_TOL: f64 = 1e-8;
/// Purity deficits below this are rounding noise (the square root in the
/// concurrence would otherwise lift them to ~1e-8).
const DEFICIT_FLOOR: f64 = 64.0 * f64::EPSILON;

/// A relative entropy in bits; `value` is `+∞` on support violation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    pub support_violation: bool,
}

impl EntropyValue {
    pub fn is_finite(&self) -> bool {
        !self.support_violation
    }
}

fn same_shape(rho: &QuantumState, sigma: &QuantumState) -> Result<()> {
    if rho.dims().total() != sigma.dims().total() {
        return Err(Error::DimMismatch(format!(
            "relative entropy of states on {:?} and {:?}",
            rho.dims().as_slice(),
            sigma.dims().as_slice()
        )));
    }
    Ok(())
}

/// `Σ λ log₂ λ` over the positive spectrum.
fn neg_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let eig = eig_hermitian(rho)?;
    Ok(eig.values.iter().filter(|&&l| l > 0.0).map(|&l| l * l.log2()).sum())
}

/// `S(ρ‖σ) = Tr ρ (log₂ ρ − log₂ σ)`.
///
/// Computed on the support of `σ`; if `ρ` puts more than [`LEAKAGE_TOL`]
/// weight outside it the result is the `+∞` marker.
pub fn relative_entropy(rho: &QuantumState, sigma: &QuantumState) -> Result<EntropyValue> {
    same_shape(rho, sigma)?;
    let eig = eig_hermitian(sigma.rho())?;
    let mut cross = 0.0;
    for (k, &l) in eig.values.iter().enumerate() {
        let v = eig.vector(k);
        let w = rho.rho().matvec(&v).iter().zip(&v).map(|(a, b)| (b.conj() * a).re).sum::<f64>();
        if l < SUPPORT_TOL {
            if w > LEAKAGE_TOL {
                return Ok(EntropyValue { value: f64::INFINITY, support_violation: true });
            }
            continue;
        }
        cross += w * l.log2();
    }
    Ok(EntropyValue { value: neg_entropy(rho.rho())? - cross, support_violation: false })
}

/// `S(ρ‖(1−ε)σ + ε I/D)`, always finite for `ε > 0`.
pub fn relative_entropy_smoothed(rho: &QuantumState, sigma: &QuantumState, eps: f64) -> Result<f64> {
    same_shape(rho, sigma)?;
    let d = sigma.dims().total();
    let mut s = sigma.rho().scale_real(1.0 - eps);
    s.add_scaled(&ComplexMatrix::identity(d), C64::new(eps / d as f64, 0.0));
    relative_entropy_matrices(rho.rho(), &s)
}

/// Relative entropy of matrices already known to be states with `σ`
/// full rank.
pub(crate) fn relative_entropy_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let eig = eig_hermitian(sigma)?;
    let mut cross = 0.0;
    for (k, &l) in eig.values.iter().enumerate() {
        let v = eig.vector(k);
        let w = rho.matvec(&v).iter().zip(&v).map(|(a, b)| (b.conj() * a).re).sum::<f64>();
        cross += w * l.max(f64::MIN_POSITIVE).log2();
    }
    Ok(neg_entropy(rho)? - cross)
}

fn pure_bipartite(state: &QuantumState) -> Result<Vec<C64>> {
    if state.dims().len() != 2 {
        return Err(Error::NotBipartite(state.dims().len()));
    }
    state.pure_vector().filter(|_| state.is_pure()).ok_or(Error::NotPure)
}

/// `√(2(1 − Tr ρ₁²))` of a pure state on two parties.
pub fn concurrence_pure(state: &QuantumState) -> Result<f64> {
    let psi = pure_bipartite(state)?;
    Ok(concurrence_of_vector(&psi, state.dims().as_slice()))
}

pub(crate) fn concurrence_of_vector(psi: &[C64], dims: &[usize]) -> f64 {
    let p = reduced_purity_of_vector(psi, dims, &[0]);
    (2.0 * floor_deficit(1.0 - p)).sqrt()
}

/// Wootters' closed form for two qubits.
pub fn concurrence_wootters(state: &QuantumState) -> Result<f64> {
    if state.dims().as_slice() != [2, 2] {
        return Err(Error::DimMismatch(format!(
            "Wootters concurrence needs dims [2, 2], got {:?}",
            state.dims().as_slice()
        )));
    }
    wootters_matrix(state.rho())
}

pub(crate) fn wootters_matrix(rho: &ComplexMatrix) -> Result<f64> {
    let yy = kron(&pauli_y(), &pauli_y());
    let tilde = &(&yy * &rho.conj()) * &yy;
    let s = sqrt_psd(rho)?;
    let r = (&(&s * &tilde) * &s).hermitian_part();
    let mut l: Vec<f64> = eig_hermitian(&r)?.values.into_iter().map(|x| x.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// k-ME concurrence of a pure state: the minimum over k-partitions
/// `{A_1..A_k}` of `√(2 Σ_t (1 − Tr ρ²_{A_t}) / k)`.
pub fn kme_concurrence_pure(state: &QuantumState, k: usize) -> Result<f64> {
    let psi = state.pure_vector().filter(|_| state.is_pure()).ok_or(Error::NotPure)?;
    kme_of_vector(&psi, state.dims().as_slice(), k)
}

pub(crate) fn kme_of_vector(psi: &[C64], dims: &[usize], k: usize) -> Result<f64> {
    let n = dims.len();
    if k < 2 || k > n {
        return Err(Error::BadArity(format!("k-ME concurrence needs 2 <= k <= {n}, got k = {k}")));
    }
    let parts = enumerate_partitions(n, k)?;
    let mut purity: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut best = f64::INFINITY;
    for p in parts.iter() {
        let mut deficit = 0.0;
        for block in p.blocks() {
            let pur = *purity
                .entry(block.clone())
                .or_insert_with(|| reduced_purity_of_vector(psi, dims, block));
            deficit += floor_deficit(1.0 - pur);
        }
        best = best.min(deficit);
    }
    Ok((2.0 * best / k as f64).sqrt())
}

fn floor_deficit(x: f64) -> f64 {
    if x < DEFICIT_FLOOR {
        0.0
    } else {
        x
    }
}

/// Pure-state measure extended by [`convex_roof_upper_bound`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoofMeasure {
    Concurrence,
    Kme(usize),
}

impl RoofMeasure {
    fn eval(&self, psi: &[C64], dims: &[usize]) -> Result<f64> {
        match *self {
            Self::Concurrence => {
                if dims.len() != 2 {
                    return Err(Error::NotBipartite(dims.len()));
                }
                Ok(concurrence_of_vector(psi, dims))
            }
            Self::Kme(k) => kme_of_vector(psi, dims, k),
        }
    }
}

/// Upper bound on the convex roof `min Σ p_m C(ψ_m)` over sampled pure-state
/// decompositions.
///
/// Trial 0 is the eigendecomposition; later trials rotate the weighted
/// eigenvectors by a unitary, alternating Haar draws with shrinking
/// perturbations of the best rotation so far. The schedule depends only on
/// the trial index, so more trials never raise the result.
pub fn convex_roof_upper_bound(state: &QuantumState, measure: RoofMeasure, trials: usize, seed: u64) -> Result<f64> {
    let dims = state.dims().as_slice().to_vec();
    if let Some(psi) = state.vector().map(<[C64]>::to_vec).or_else(|| state.pure_vector().filter(|_| state.is_pure())) {
        return measure.eval(&psi, &dims);
    }
    let eig = eig_hermitian(state.rho())?;
    let d = eig.values.len();
    let cutoff = 1e-12 * eig.values[d - 1].max(1.0);
    // Subnormalized eigenvectors √λ_i |e_i>.
    let weighted: Vec<Vec<C64>> = (0..d)
        .rev()
        .filter(|&i| eig.values[i] > cutoff)
        .map(|i| {
            let s = eig.values[i].sqrt();
            eig.vector(i).into_iter().map(|z| z * s).collect()
        })
        .collect();
    let r = weighted.len();

    let average = |u: &ComplexMatrix| -> Result<f64> {
        let mut acc = 0.0;
        for j in 0..r {
            let mut phi = vec![ZERO; d];
            for (i, w) in weighted.iter().enumerate() {
                let c = u[(j, i)];
                for (x, y) in phi.iter_mut().zip(w) {
                    *x += c * y;
                }
            }
            let p: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
            if p <= 1e-300 {
                continue;
            }
            let s = p.sqrt();
            phi.iter_mut().for_each(|z| *z /= s);
            acc += p * measure.eval(&phi, &dims)?;
        }
        Ok(acc)
    };

    let mut best_u = ComplexMatrix::identity(r);
    let mut best = average(&best_u)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 1..trials.max(1) {
        let candidate = if t % 2 == 1 {
            haar(r, &mut rng)
        } else {
            let eps = 0.5 / (1.0 + t as f64 / 20.0);
            let mut h = ComplexMatrix::zeros(r, r);
            for a in 0..r {
                for b in a..r {
                    let z = if a == b {
                        C64::new(rng.sample(StandardNormal), 0.0)
                    } else {
                        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                    };
                    h[(a, b)] = z * eps;
                    h[(b, a)] = z.conj() * eps;
                }
            }
            &best_u * &expm_i_hermitian(&h)?
        };
        let v = average(&candidate)?;
        if v < best {
            best = v;
            best_u = candidate;
        }
    }
    Ok(best)
}

fn haar(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let data: Vec<C64> = (0..d * d)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    orthonormalize_columns(&ComplexMatrix::from_vec(d, d, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::random_unitary;
    use crate::states::SystemDims;
    use approx::assert_abs_diff_eq;

    fn qubit(a: f64, b: f64) -> QuantumState {
        QuantumState::from_vector(SystemDims::new(vec![2]).unwrap(), vec![C64::new(a, 0.0), C64::new(b, 0.0)]).unwrap()
    }

    fn random_state(dims: &SystemDims, rank: usize, rng: &mut impl Rng) -> QuantumState {
        let d = dims.total();
        let mut rho = ComplexMatrix::zeros(d, d);
        for _ in 0..rank {
            let v: Vec<C64> = (0..d)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            rho.add_outer(&v, 1.0);
        }
        let t = rho.trace().re;
        QuantumState::from_density(dims.clone(), rho.scale_real(1.0 / t)).unwrap()
    }

    fn random_pure(dims: &SystemDims, rng: &mut impl Rng) -> QuantumState {
        let v: Vec<C64> = (0..dims.total())
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let n = crate::linalg::norm(&v);
        QuantumState::from_vector(dims.clone(), v.into_iter().map(|z| z / n).collect()).unwrap()
    }

    fn werner(p: f64) -> QuantumState {
        let bell = QuantumState::max_entangled(2).unwrap();
        let mixed = QuantumState::maximally_mixed(SystemDims::uniform(2, 2).unwrap());
        QuantumState::mix(&[bell, mixed], &[p, 1.0 - p]).unwrap()
    }

    #[test]
    fn relative_entropy_examples() {
        let zero = qubit(1.0, 0.0);
        let one = qubit(0.0, 1.0);
        let half = QuantumState::maximally_mixed(SystemDims::new(vec![2]).unwrap());
        assert_abs_diff_eq!(relative_entropy(&zero, &zero).unwrap().value, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(relative_entropy(&zero, &half).unwrap().value, 1.0, epsilon = 1e-12);
        let inf = relative_entropy(&zero, &one).unwrap();
        assert!(inf.support_violation && inf.value.is_infinite());
        let smoothed = relative_entropy_smoothed(&zero, &one, 1e-12).unwrap();
        assert_abs_diff_eq!(smoothed, -(0.5e-12f64).log2(), epsilon = 1e-6);
    }

    #[test]
    fn relative_entropy_dim_mismatch() {
        let a = qubit(1.0, 0.0);
        let b = QuantumState::maximally_mixed(SystemDims::uniform(2, 2).unwrap());
        assert!(matches!(relative_entropy(&a, &b), Err(Error::DimMismatch(_))));
    }

    #[test]
    fn klein_joint_convexity_additivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d2 = SystemDims::new(vec![2]).unwrap();
        let d4 = SystemDims::uniform(2, 2).unwrap();
        for _ in 0..50 {
            let r = random_state(&d4, 3, &mut rng);
            let s = random_state(&d4, 4, &mut rng);
            let v = relative_entropy(&r, &s).unwrap().value;
            assert!(v >= -1e-9);
            assert!(v > 1e-7 || r.rho().max_abs_diff(s.rho()) <= 1e-7);
            assert_abs_diff_eq!(relative_entropy(&r, &r).unwrap().value, 0.0, epsilon = 1e-9);

            let (r2, s2) = (random_state(&d4, 2, &mut rng), random_state(&d4, 4, &mut rng));
            let p: f64 = rng.random();
            let lhs = relative_entropy(
                &QuantumState::mix(&[r.clone(), r2.clone()], &[p, 1.0 - p]).unwrap(),
                &QuantumState::mix(&[s.clone(), s2.clone()], &[p, 1.0 - p]).unwrap(),
            )
            .unwrap()
            .value;
            let rhs = p * v + (1.0 - p) * relative_entropy(&r2, &s2).unwrap().value;
            assert!(lhs <= rhs + 1e-7, "{lhs} > {rhs}");

            let (a, b) = (random_state(&d2, 2, &mut rng), random_state(&d2, 2, &mut rng));
            let joint = relative_entropy(&r.tensor(&a).unwrap(), &s.tensor(&b).unwrap()).unwrap().value;
            let sum = v + relative_entropy(&a, &b).unwrap().value;
            assert_abs_diff_eq!(joint, sum, epsilon = 1e-7);
        }
    }

    #[test]
    fn concurrence_examples() {
        let bell = QuantumState::max_entangled(2).unwrap();
        assert_abs_diff_eq!(concurrence_pure(&bell).unwrap(), 1.0, epsilon = 1e-12);
        let d = SystemDims::uniform(2, 2).unwrap();
        assert_abs_diff_eq!(concurrence_pure(&QuantumState::basis(d.clone(), 0).unwrap()).unwrap(), 0.0);
        let psi = vec![C64::new(0.3f64.sqrt(), 0.0), ZERO, ZERO, C64::new(0.7f64.sqrt(), 0.0)];
        let s = QuantumState::from_vector(d.clone(), psi).unwrap();
        assert_abs_diff_eq!(concurrence_pure(&s).unwrap(), 0.916515138991168, epsilon = 1e-12);
        assert_abs_diff_eq!(concurrence_wootters(&s).unwrap(), 0.916515138991168, epsilon = 1e-8);
        assert!(matches!(concurrence_pure(&werner(0.5)), Err(Error::NotPure)));
        let ghz = QuantumState::ghz(3, 2).unwrap();
        assert!(matches!(concurrence_pure(&ghz), Err(Error::NotBipartite(3))));
    }

    #[test]
    fn wootters_examples() {
        assert_abs_diff_eq!(concurrence_wootters(&QuantumState::max_entangled(2).unwrap()).unwrap(), 1.0, epsilon = 1e-8);
        let mixed = QuantumState::maximally_mixed(SystemDims::uniform(2, 2).unwrap());
        assert_abs_diff_eq!(concurrence_wootters(&mixed).unwrap(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(concurrence_wootters(&werner(0.8)).unwrap(), 0.7, epsilon = 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = SystemDims::uniform(2, 2).unwrap();
        for _ in 0..20 {
            let s = random_pure(&d, &mut rng);
            let dense = QuantumState::from_density(d.clone(), s.rho().clone()).unwrap();
            assert_abs_diff_eq!(concurrence_wootters(&dense).unwrap(), concurrence_pure(&s).unwrap(), epsilon = 1e-8);
        }
    }

    #[test]
    fn concurrence_local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = SystemDims::new(vec![2, 3]).unwrap();
        for _ in 0..20 {
            let s = random_pure(&d, &mut rng);
            let u = kron(&random_unitary(2, &mut rng), &random_unitary(3, &mut rng));
            let t = QuantumState::from_vector(d.clone(), u.matvec(s.vector().unwrap())).unwrap();
            assert_abs_diff_eq!(concurrence_pure(&s).unwrap(), concurrence_pure(&t).unwrap(), epsilon = 1e-8);
            assert!(concurrence_pure(&s).unwrap() <= (4.0f64 / 3.0).sqrt() + 1e-12);
        }
    }

    #[test]
    fn kme_examples() {
        assert_abs_diff_eq!(kme_concurrence_pure(&QuantumState::ghz(3, 2).unwrap(), 2).unwrap(), 1.0, epsilon = 1e-12);
        let w = QuantumState::w(3).unwrap();
        assert_abs_diff_eq!(kme_concurrence_pure(&w, 2).unwrap(), 0.9428090415820634, epsilon = 1e-12);
        let zero = QuantumState::basis(SystemDims::uniform(3, 2).unwrap(), 0).unwrap();
        for k in 2..=3 {
            assert_abs_diff_eq!(kme_concurrence_pure(&zero, k).unwrap(), 0.0);
        }
        assert!(matches!(kme_concurrence_pure(&w, 4), Err(Error::BadArity(_))));
        assert!(matches!(kme_concurrence_pure(&w, 1), Err(Error::BadArity(_))));
        let bell = QuantumState::max_entangled(2).unwrap();
        assert_abs_diff_eq!(kme_concurrence_pure(&bell, 2).unwrap(), concurrence_pure(&bell).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn kme_zero_pattern_in_k() {
        // Bell ⊗ |0>: separable across 12|3, entangled in 1|2|3.
        let bell0 = QuantumState::max_entangled(2)
            .unwrap()
            .tensor(&QuantumState::basis(SystemDims::new(vec![2]).unwrap(), 0).unwrap())
            .unwrap();
        assert_abs_diff_eq!(kme_concurrence_pure(&bell0, 2).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(kme_concurrence_pure(&bell0, 3).unwrap(), (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d3 = SystemDims::uniform(3, 2).unwrap();
        for _ in 0..50 {
            let s = random_pure(&d3, &mut rng);
            assert!(kme_concurrence_pure(&s, 2).unwrap() <= kme_concurrence_pure(&s, 3).unwrap() + 1e-9);
        }
        let d4 = SystemDims::uniform(4, 2).unwrap();
        for _ in 0..20 {
            let s = random_pure(&d4, &mut rng);
            for k in 3..=4 {
                if kme_concurrence_pure(&s, k).unwrap() <= 1e-9 {
                    assert!(kme_concurrence_pure(&s, k - 1).unwrap() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn roof_examples() {
        let bell = QuantumState::max_entangled(2).unwrap();
        assert_abs_diff_eq!(convex_roof_upper_bound(&bell, RoofMeasure::Concurrence, 1, 0).unwrap(), 1.0, epsilon = 1e-12);
        let mixed = QuantumState::maximally_mixed(SystemDims::uniform(2, 2).unwrap());
        assert!(convex_roof_upper_bound(&mixed, RoofMeasure::Concurrence, 200, 1).unwrap() <= 0.05);
        let v = convex_roof_upper_bound(&werner(0.8), RoofMeasure::Concurrence, 500, 2).unwrap();
        assert!((0.7..=0.9).contains(&v), "{v}");
    }

    #[test]
    fn roof_dominates_wootters_and_is_monotone_in_trials() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = SystemDims::uniform(2, 2).unwrap();
        for seed in 0..10 {
            let s = random_state(&d, 2 + seed as usize % 3, &mut rng);
            let w = concurrence_wootters(&s).unwrap();
            let few = convex_roof_upper_bound(&s, RoofMeasure::Concurrence, 20, seed).unwrap();
            let many = convex_roof_upper_bound(&s, RoofMeasure::Concurrence, 60, seed).unwrap();
            assert!(many <= few);
            assert!(many >= w - 1e-9, "{many} < {w}");
        }
    }
}
