//! Internal conversion efficiency from the herald rate and the loss chain.

use oam_interface::statistics::{loss_chain_internal_efficiency, LossChain};

fn main() -> oam_interface::Result<()> {
    let chain = LossChain::reference();
    let mut product = 1.0;
    for (label, t) in chain.stages() {
        product *= t;
        println!("{label:<32} {t:>5.2}  cumulative {product:.4}");
    }
    let eta = loss_chain_internal_efficiency(1.00e-3, &chain)?;
    println!("herald rate 1.00e-3 -> internal efficiency {eta:.4}");
    Ok(())
}
