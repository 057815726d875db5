//! Closed-form SFG power against direct integration of the coupled-wave equation.

use std::f64::consts::PI;

use oam_interface::beams::Beam;
use oam_interface::conversion::{sfg_power, CrystalParams};
use oam_interface::overlap::{direct_sfg_oracle, OracleGrid};

fn main() -> oam_interface::Result<()> {
    let crystal = CrystalParams::reference();
    println!(
        "{:>3} {:>5} {:>14} {:>14} {:>10}",
        "l", "xi", "closed [W]", "direct [W]", "rel dev"
    );
    for xi in [0.1, 0.3, 1.0] {
        let z0 = crystal.length / (2.0 * xi);
        let pump = Beam::new(
            795e-9,
            (795e-9 * z0 / (PI * crystal.n_pump)).sqrt(),
            crystal.n_pump,
            20.0,
        )?;
        for l in 0..=2 {
            let signal = Beam::new(
                1560e-9,
                (1560e-9 * z0 / (PI * crystal.n_signal)).sqrt(),
                crystal.n_signal,
                1e-3,
            )?
            .with_oam(l)?;
            let closed = sfg_power(&pump, &signal, &crystal)?;
            let direct = direct_sfg_oracle(&pump, &signal, &crystal, OracleGrid::default())?;
            println!(
                "{l:>3} {xi:>5.1} {closed:>14.6e} {direct:>14.6e} {:>10.2e}",
                (closed - direct).abs() / direct
            );
        }
    }
    Ok(())
}
