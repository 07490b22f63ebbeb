//! State-level quantities: relative entropy, concurrence and its convex roof.

use chanent::state_measures::{concurrence_pure, concurrence_wootters, convex_roof_upper_bound, relative_entropy, RoofMeasure};
use chanent::states::{QuantumState, SystemDims};

fn main() -> chanent::error::Result<()> {
    let bell = QuantumState::max_entangled(2)?;
    let mixed = QuantumState::maximally_mixed(SystemDims::uniform(2, 2)?);
    println!("C(bell) = {:.6}", concurrence_pure(&bell)?);
    println!("S(bell || I/4) = {:.6} bits", relative_entropy(&bell, &mixed)?.value);
    println!("S(I/4 || bell) = {:?}", relative_entropy(&mixed, &bell)?.value);
    for p in [0.2, 0.5, 0.8] {
        let werner = QuantumState::mix(&[bell.clone(), mixed.clone()], &[p, 1.0 - p])?;
        println!("werner p={p}: Wootters {:.6}, sampled roof <= {:.6}",
            concurrence_wootters(&werner)?, convex_roof_upper_bound(&werner, RoofMeasure::Concurrence, 200, 1)?);
    }
    Ok(())
}
