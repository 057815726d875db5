//! Beam-splitter model of the conversion: photon exchange against κL.

use std::f64::consts::PI;

use oam_interface::conversion::{heisenberg_evolve, pump_to_efficiency, ConversionChannel};

fn main() -> oam_interface::Result<()> {
    println!(
        "{:>8} {:>8} {:>10} {:>10}",
        "kL/pi", "eta", "<n_s>", "<n_sfg>"
    );
    for k in 0..=8 {
        let ch = ConversionChannel::new(k as f64 * PI / 8.0)?;
        let (ns, nsfg) = heisenberg_evolve(&ch, 1.0, 0.0)?;
        println!(
            "{:>8.3} {:>8.4} {ns:>10.4} {nsfg:>10.4}",
            k as f64 / 8.0,
            ch.efficiency()
        );
    }

    let p_max = 172.7;
    for pump in [5.0, 22.3, 100.0, 172.7, 250.0] {
        let e = pump_to_efficiency(pump, p_max)?;
        println!(
            "pump {pump:6.1} W: eta = {:.4}{}",
            e.eta,
            if e.over_rotated {
                " (over-rotated)"
            } else {
                ""
            }
        );
    }
    Ok(())
}
