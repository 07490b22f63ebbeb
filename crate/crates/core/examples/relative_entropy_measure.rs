//! Relative-entropy measure of CNOT against local product channels.

use chanent::channel_measures::measure_rr;
use chanent::channels::{Channel, FreeChannelFamily};
use chanent::optim::OptimizerConfig;

fn main() -> chanent::error::Result<()> {
    let cnot = Channel::cnot();
    let family = FreeChannelFamily::local_product(cnot.in_dims());
    let cfg = OptimizerConfig { starts: 4, rounds: 2, max_iters: 400, seed: 1, ..OptimizerConfig::default() };
    let r = measure_rr(&cnot, &family, &cfg)?;
    println!("rr(CNOT) <= {:.4} bits ({})", r.value, r.bound);
    for note in &r.notes {
        println!("  {note}");
    }
    Ok(())
}
