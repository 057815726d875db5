//! Overlap factor h(l, ξ) across focusing strengths, and the optimal ξ per mode.

use oam_interface::conversion::{CrystalParams, Wavelengths};
use oam_interface::overlap::{h_integral, optimize_xi, FocusGeometry};

fn main() -> oam_interface::Result<()> {
    let geom =
        FocusGeometry::for_crystal(0.3, 1.0, &Wavelengths::reference(), &CrystalParams::reference())?;

    println!("{:>6} {:>10} {:>10} {:>10}", "xi", "h(0)", "h(1)", "h(2)");
    for xi in [0.1, 0.2, 0.3, 0.5, 1.0, 2.0, 2.84] {
        let g = geom.with_xi(xi)?;
        let h: Vec<f64> = (0..=2)
            .map(|l| h_integral(l, &g, 1e-9).map(|r| r.value))
            .collect::<Result<_, _>>()?;
        println!("{xi:>6.2} {:>10.5} {:>10.5} {:>10.5}", h[0], h[1], h[2]);
    }

    for l in 0..=3 {
        let best = optimize_xi(l, &geom, (0.05, 6.0))?;
        println!("l = {l}: best xi = {:.3}, h = {:.5}", best.xi, best.h);
    }
    Ok(())
}
