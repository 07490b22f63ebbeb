//! Brute-force references for the optimized measures.
//!
//! Nothing here uses the optimizer or its parameterizations: grids are
//! explicit, free channels are sampled directly, and separability is read off
//! reduced purities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, C64};
use crate::state_measures::{concurrence_wootters, relative_entropy};
use crate::states::{enumerate_partitions, QuantumState, SystemDims};

/// Largest number of grid points [`grid_max_concurrence`] will evaluate.
pub const GRID_BUDGET: u128 = 100_000_000;
/// A block with reduced purity within this of 1 is a product across its cut.
pub const PURITY_PRODUCT_TOL: f64 = 1e-8;
/// Grid concurrences below this are rounding noise and reported as zero.
const GRID_ZERO: f64 = 1e-14;

fn qubit_grid(steps: usize) -> Vec<[C64; 2]> {
    let mut out = Vec::with_capacity((steps + 1) * steps);
    for i in 0..=steps {
        let a = i as f64 * std::f64::consts::FRAC_PI_2 / steps as f64;
        for j in 0..steps {
            let phi = j as f64 * std::f64::consts::TAU / steps as f64;
            out.push([C64::new(a.cos(), 0.0), C64::from_polar(a.sin(), phi)]);
            if i == 0 {
                // The phase is irrelevant at the pole.
                break;
            }
        }
    }
    out
}

/// Largest output concurrence of a two-qubit channel over a product-state
/// grid.
///
/// Each qubit is `(cos a, e^{iφ} sin a)` with `a = i·(π/2)/steps` for
/// `i = 0..=steps` and `φ = j·2π/steps` for `j < steps`, so doubling `steps`
/// refines the grid and keeps every old point.
pub fn grid_max_concurrence(ch: &Channel, steps: usize) -> Result<f64> {
    if ch.in_dims().as_slice() != [2, 2] || ch.out_dims().as_slice() != [2, 2] {
        return Err(Error::DimMismatch(format!(
            "grid oracle needs a two-qubit channel, got {:?} -> {:?}",
            ch.in_dims().as_slice(),
            ch.out_dims().as_slice()
        )));
    }
    if steps < 8 {
        return Err(Error::BadParam(format!("grid needs at least 8 steps, got {steps}")));
    }
    let points = (steps as u128).pow(4);
    if points > GRID_BUDGET {
        return Err(Error::TooLarge(points));
    }
    let grid = qubit_grid(steps);
    let dims = SystemDims::uniform(2, 2)?;
    let mut best = 0.0f64;
    for a in &grid {
        for b in &grid {
            let psi = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
            let value = if ch.kraus().len() == 1 {
                let o = ch.kraus()[0].matvec(&psi);
                2.0 * (o[0] * o[3] - o[1] * o[2]).norm()
            } else {
                let mut rho = ComplexMatrix::zeros(4, 4);
                for k in ch.kraus() {
                    rho.add_outer(&k.matvec(&psi), 1.0);
                }
                concurrence_wootters(&QuantumState::from_density(dims.clone(), rho.hermitian_part())?)?
            };
            if value > GRID_ZERO {
                best = best.max(value);
            }
        }
    }
    Ok(best)
}

/// Separability of a pure state across one partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionVerdict {
    /// 1-based, e.g. `{1,2}{3}`.
    pub partition: String,
    /// Reduced purity of each block.
    pub purities: Vec<f64>,
    pub separable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionCheck {
    pub k: usize,
    /// Nonseparable in every k-partition.
    pub nonseparable_everywhere: bool,
    pub partitions: Vec<PartitionVerdict>,
}

/// Checks every k-partition of a pure state: the state is a product across
/// a partition iff every block has a pure reduced state.
pub fn exhaustive_partition_check(state: &QuantumState, k: usize) -> Result<PartitionCheck> {
    if !state.is_pure() {
        return Err(Error::NotPure);
    }
    let n = state.dims().len();
    if n > 6 {
        return Err(Error::BadArity(format!("partition oracle handles n <= 6, got {n}")));
    }
    if k < 2 || k > n {
        return Err(Error::BadArity(format!("need 2 <= k <= {n}, got k = {k}")));
    }
    let mut partitions = Vec::new();
    for p in enumerate_partitions(n, k)?.iter() {
        let purities = p
            .blocks()
            .iter()
            .map(|b| state.partial_trace(b).map(|r| r.purity()))
            .collect::<Result<Vec<f64>>>()?;
        let separable = purities.iter().all(|&q| (q - 1.0).abs() <= PURITY_PRODUCT_TOL);
        partitions.push(PartitionVerdict { partition: p.to_string(), purities, separable });
    }
    Ok(PartitionCheck { k, nonseparable_everywhere: partitions.iter().all(|v| !v.separable), partitions })
}

/// Random local channel with `rank` Kraus operators: the columns of a
/// Ginibre matrix `G` made orthonormal as `G (G†G)^{-1/2}`.
fn random_local_channel(d: usize, rank: usize, rng: &mut impl Rng) -> Result<Channel> {
    let rows = rank * d;
    let g = ComplexMatrix::from_vec(
        rows,
        d,
        (0..rows * d).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect(),
    );
    let eig = eig_hermitian(&(&g.adjoint() * &g).hermitian_part())?;
    let inv_sqrt = eig.reconstruct_with(|l| C64::new(1.0 / l.max(1e-300).sqrt(), 0.0));
    let v = &g * &inv_sqrt;
    let kraus = (0..rank)
        .map(|r| {
            let mut k = ComplexMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    k[(i, j)] = v[(r * d + i, j)];
                }
            }
            k
        })
        .collect();
    let dims = SystemDims::new(vec![d])?;
    Channel::new(dims.clone(), dims, kraus)
}

/// Smallest `S(Choi(N) ‖ Choi(M))` over sampled local-product channels `M`.
///
/// Sample 0 is the identity; later samples draw every site independently with
/// Kraus rank cycling through `1..=d²`. Infinite values (support mismatch)
/// never win. The result upper-bounds the free-family minimum at the
/// identity probe.
pub fn sampled_free_distance_floor(ch: &Channel, samples: usize, seed: u64) -> Result<f64> {
    let target = ch.choi()?;
    let sites = ch.in_dims().as_slice().to_vec();
    if ch.out_dims().as_slice() != sites.as_slice() {
        return Err(Error::DimMismatch("free-distance oracle needs equal input and output factors".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for s in 0..samples.max(1) {
        let member = if s == 0 {
            Channel::identity(ch.in_dims().clone())
        } else {
            let mut acc: Option<Channel> = None;
            for &d in &sites {
                let rank = 1 + (s - 1) % (d * d);
                let local = random_local_channel(d, rank, &mut rng)?;
                acc = Some(match acc {
                    None => local,
                    Some(a) => a.tensor(&local)?,
                });
            }
            acc.expect("at least one site")
        };
        let v = relative_entropy(&target, &member.choi()?)?;
        if !v.support_violation {
            best = best.min(v.value.max(0.0));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_measures::kme_concurrence_pure;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_examples() {
        assert!(grid_max_concurrence(&Channel::cnot(), 32).unwrap() >= 0.999);
        assert_eq!(grid_max_concurrence(&Channel::swap(), 16).unwrap(), 0.0);
        let cz = Channel::controlled_phase(std::f64::consts::FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(grid_max_concurrence(&cz, 64).unwrap(), 0.7071067811865478, epsilon = 5e-3);
    }

    #[test]
    fn grid_guards() {
        assert!(matches!(grid_max_concurrence(&Channel::cnot(), 4096), Err(Error::TooLarge(_))));
        assert!(matches!(grid_max_concurrence(&Channel::cnot(), 4), Err(Error::BadParam(_))));
        let e = Channel::ghz_entangler(3, 2).unwrap();
        assert!(matches!(grid_max_concurrence(&e, 8), Err(Error::DimMismatch(_))));
    }

    #[test]
    fn grid_refinement_never_loses() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..3 {
            let ch = crate::channels::random_unitary_channel(SystemDims::uniform(2, 2).unwrap(), &mut rng);
            let coarse = grid_max_concurrence(&ch, 8).unwrap();
            let fine = grid_max_concurrence(&ch, 16).unwrap();
            assert!(fine >= coarse - 1e-12);
        }
        let noisy = Channel::depolarizing(0.3).unwrap().tensor(&Channel::depolarizing(0.0).unwrap()).unwrap();
        let ch = Channel::cnot().compose(&noisy).unwrap();
        assert!(grid_max_concurrence(&ch, 16).unwrap() >= grid_max_concurrence(&ch, 8).unwrap() - 1e-12);
    }

    #[test]
    fn partition_examples() {
        let ghz = exhaustive_partition_check(&QuantumState::ghz(3, 2).unwrap(), 2).unwrap();
        assert!(ghz.nonseparable_everywhere);
        assert_eq!(ghz.partitions.len(), 3);
        for v in &ghz.partitions {
            assert!(v.purities.iter().any(|&p| (p - 0.5).abs() < 1e-12));
        }
        let q = SystemDims::new(vec![2]).unwrap();
        let bell0 = QuantumState::max_entangled(2).unwrap().tensor(&QuantumState::basis(q, 0).unwrap()).unwrap();
        assert!(exhaustive_partition_check(&bell0, 3).unwrap().nonseparable_everywhere);
        assert!(!exhaustive_partition_check(&bell0, 2).unwrap().nonseparable_everywhere);
        let zero = QuantumState::basis(SystemDims::uniform(3, 2).unwrap(), 0).unwrap();
        for k in 2..=3 {
            assert!(exhaustive_partition_check(&zero, k).unwrap().partitions.iter().all(|v| v.separable));
        }
        assert!(matches!(
            exhaustive_partition_check(&QuantumState::maximally_mixed(SystemDims::uniform(2, 2).unwrap()), 2),
            Err(Error::NotPure)
        ));
    }

    #[test]
    fn partition_check_matches_kme() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let dims = SystemDims::uniform(4, 2).unwrap();
        let q = SystemDims::new(vec![2]).unwrap();
        for t in 0..30 {
            // Mix in states with product structure so both verdicts occur.
            let rand_vec = |n: usize, rng: &mut ChaCha8Rng| -> Vec<C64> {
                let v: Vec<C64> = (0..n).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
                let s = crate::linalg::norm(&v);
                v.into_iter().map(|z| z / s).collect()
            };
            let state = if t % 2 == 0 {
                QuantumState::from_vector(dims.clone(), rand_vec(16, &mut rng)).unwrap()
            } else {
                let a = QuantumState::from_vector(SystemDims::uniform(3, 2).unwrap(), rand_vec(8, &mut rng)).unwrap();
                let b = QuantumState::from_vector(q.clone(), rand_vec(2, &mut rng)).unwrap();
                a.tensor(&b).unwrap()
            };
            for k in 2..=4 {
                let check = exhaustive_partition_check(&state, k).unwrap();
                let kme = kme_concurrence_pure(&state, k).unwrap();
                assert_eq!(check.nonseparable_everywhere, kme > 1e-6, "k={k} kme={kme}");
            }
        }
    }

    #[test]
    fn free_floor_examples() {
        let id = Channel::identity(SystemDims::uniform(2, 2).unwrap());
        assert!(sampled_free_distance_floor(&id, 50, 1).unwrap() <= 1e-3);
        assert!(sampled_free_distance_floor(&Channel::cnot(), 2000, 7).unwrap() > 0.1);
    }
}
