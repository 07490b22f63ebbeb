//! Grid search over product inputs for controlled-phase gates.

use chanent::channels::Channel;
use chanent::oracle::grid_max_concurrence;

fn main() -> chanent::error::Result<()> {
    for k in 0..=4 {
        let theta = k as f64 * std::f64::consts::PI / 4.0;
        let cz = Channel::controlled_phase(theta)?;
        println!("theta = {theta:.4}: grid(16) = {:.6}, grid(32) = {:.6}, sin(theta/2) = {:.6}",
            grid_max_concurrence(&cz, 16)?, grid_max_concurrence(&cz, 32)?, (theta / 2.0).sin());
    }
    Ok(())
}
