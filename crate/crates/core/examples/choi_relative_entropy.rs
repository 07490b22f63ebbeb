//! Choi relative entropy between the identity and depolarizing channels.

use chanent::channel_measures::choi_relative_entropy;
use chanent::channels::Channel;
use chanent::optim::OptimizerConfig;
use chanent::states::SystemDims;

fn main() -> chanent::error::Result<()> {
    let id = Channel::identity(SystemDims::new(vec![2])?);
    let cfg = OptimizerConfig { starts: 16, seed: 1, ..OptimizerConfig::default() };
    for p in [0.25, 0.5, 1.0] {
        let r = choi_relative_entropy(&id, &Channel::depolarizing(p)?, &cfg)?;
        println!("S_C(id || depolarizing({p})) = {:.6} bits ({})", r.value, r.bound);
    }
    let same = choi_relative_entropy(&id, &id, &cfg)?;
    println!("S_C(id || id) = {} ({})", same.value, same.bound);
    Ok(())
}
