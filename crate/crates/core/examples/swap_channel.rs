//! The swap gate maps product inputs to product outputs, so it generates no entanglement.

use chanent::channel_measures::measure_rc;
use chanent::channels::Channel;
use chanent::optim::OptimizerConfig;

fn main() -> chanent::error::Result<()> {
    let cfg = OptimizerConfig { starts: 32, seed: 1, ..OptimizerConfig::default() };
    let r = measure_rc(&Channel::swap(), &cfg)?;
    println!("rc(SWAP) = {:.3e} ({})", r.value, r.bound);
    Ok(())
}
