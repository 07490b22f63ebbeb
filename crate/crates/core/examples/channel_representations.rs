//! Kraus and Choi forms of a channel, composition, and a sampled free channel.

use chanent::channels::{Channel, FreeChannelFamily};
use chanent::linalg::C64;
use chanent::states::{QuantumState, SystemDims};

fn main() -> chanent::error::Result<()> {
    let cnot = Channel::cnot();
    let back = Channel::from_choi(cnot.in_dims().clone(), cnot.out_dims().clone(), &cnot.choi_matrix())?;
    println!("CNOT: {} Kraus operator(s), rebuilt from Choi with {}", cnot.kraus().len(), back.kraus().len());
    println!("  Choi difference after round trip: {:.2e}", cnot.choi_matrix().max_abs_diff(&back.choi_matrix()));

    let twice = cnot.compose(&cnot)?;
    let id = Channel::identity(cnot.in_dims().clone());
    println!("  CNOT∘CNOT vs identity, Choi difference: {:.2e}", twice.choi_matrix().max_abs_diff(&id.choi_matrix()));

    let dims = SystemDims::uniform(2, 2)?;
    let free = FreeChannelFamily::local_product(&dims).sample(7);
    let plus = vec![C64::new(0.5f64.sqrt(), 0.0); 2];
    let input = QuantumState::product_pure(&[plus.clone(), plus], &dims)?;
    let out = free.channel().apply(&input)?;
    let cz = Channel::controlled_phase(std::f64::consts::PI)?.apply(&input)?;
    println!("purity of qubit 1 after a local product channel: {:.4}", out.reduced_purity(&[0])?);
    println!("purity of qubit 1 after CZ:                      {:.4}", cz.reduced_purity(&[0])?);
    Ok(())
}
