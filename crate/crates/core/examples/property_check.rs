//! Runs the concurrence property suite, then again with a sign-flipped concurrence.

use chanent::properties::{run_suite, CheckConfig, Fault, Suite};

fn main() -> chanent::error::Result<()> {
    let cfg = CheckConfig { trials: 5, seed: 3, ..CheckConfig::default() };
    for fault in [None, Some(Fault::SignFlipConcurrence)] {
        let report = run_suite(Suite::Rc, &CheckConfig { fault, ..cfg.clone() })?;
        println!("fault {fault:?}: pass = {}", report.pass);
        for p in &report.properties {
            println!("  {:<30} {} worst margin {:.3e}", p.name, if p.pass { "ok" } else { "FAILED" }, p.worst_margin);
        }
    }
    Ok(())
}
