//! Strength value and Γ_k membership of the cyclic shift and of the GHZ entangler.

use chanent::channel_measures::{classify_gamma_k, strength_value};
use chanent::channels::Channel;
use chanent::optim::OptimizerConfig;

fn main() -> chanent::error::Result<()> {
    let cfg = OptimizerConfig { starts: 8, seed: 1, ..OptimizerConfig::default() };
    for (name, ch) in [("cyclic shift", Channel::cyclic_shift(3, 2)?), ("GHZ entangler", Channel::ghz_entangler(3, 2)?)] {
        let s = strength_value(&ch, &cfg)?;
        let g = classify_gamma_k(&ch, &cfg)?;
        println!("{name}: K = {} ({}), values {:?}", s.k, s.classification, s.values);
        println!("  member of Γ_k for k in {:?}, free: {}, consistent: {}", g.members, g.is_free, g.consistent);
    }
    Ok(())
}
