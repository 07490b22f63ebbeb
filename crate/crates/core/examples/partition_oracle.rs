//! Exhaustive k-partition separability check of GHZ and W states.

use chanent::oracle::exhaustive_partition_check;
use chanent::state_measures::kme_concurrence_pure;
use chanent::states::QuantumState;

fn main() -> chanent::error::Result<()> {
    for (name, state) in [("GHZ", QuantumState::ghz(3, 2)?), ("W", QuantumState::w(3)?)] {
        for k in 2..=3 {
            let check = exhaustive_partition_check(&state, k)?;
            println!("{name} k={k}: C_k = {:.6}, nonseparable in every partition: {}",
                kme_concurrence_pure(&state, k)?, check.nonseparable_everywhere);
            for p in &check.partitions {
                println!("    {} separable: {}", p.partition, p.separable);
            }
        }
    }
    Ok(())
}
