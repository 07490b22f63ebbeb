//! k-ME concurrence measure of the GHZ entangler for qubits and qutrits.

use chanent::channel_measures::measure_rkme;
use chanent::channels::Channel;
use chanent::optim::OptimizerConfig;

fn main() -> chanent::error::Result<()> {
    let cfg = OptimizerConfig { starts: 16, seed: 1, ..OptimizerConfig::default() };
    for (n, d) in [(3, 2), (2, 3)] {
        let r = measure_rkme(&Channel::ghz_entangler(n, d)?, 2, &cfg)?;
        let exact = (2.0 * (d as f64 - 1.0) / d as f64).sqrt();
        println!("n={n} d={d}: rkme(k=2) = {:.6} ({}), closed form {exact:.6}", r.value, r.bound);
    }
    Ok(())
}
