//! Photon rates at the crystal face from gated APD count rates.

use oam_interface::statistics::{apd_calibrate, ApdCalibration};

fn main() -> oam_interface::Result<()> {
    for (state, count, t) in [
        ("H", 11.7e3, 0.80),
        ("V", 21.2e3, 0.79),
        ("D", 16.8e3, 0.74),
        ("A", 21.2e3, 0.67),
    ] {
        let cal = ApdCalibration::reference(t);
        let rate = apd_calibrate(count, &cal)?;
        println!(
            "{state}: {count:>8.0} counts/s, duty {:.4} -> {:.2e} photons/s",
            cal.duty(),
            rate
        );
    }
    Ok(())
}
