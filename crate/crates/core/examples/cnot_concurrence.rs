//! Concurrence-based measure of the CNOT gate, checked against the grid oracle.

use chanent::channel_measures::measure_rc;
use chanent::channels::Channel;
use chanent::optim::OptimizerConfig;
use chanent::oracle::grid_max_concurrence;

fn main() -> chanent::error::Result<()> {
    let cnot = Channel::cnot();
    let cfg = OptimizerConfig { starts: 32, seed: 1, ..OptimizerConfig::default() };
    let r = measure_rc(&cnot, &cfg)?;
    println!("rc(CNOT) = {:.6} ({})", r.value, r.bound);
    if let Some(locals) = r.witness.locals() {
        for (i, v) in locals.iter().enumerate() {
            println!("  input qubit {}: [{:.4}, {:.4}]", i + 1, v[0], v[1]);
        }
    }
    println!("grid(32)  = {:.6}", grid_max_concurrence(&cnot, 32)?);
    Ok(())
}
