//! Pump power needed for full conversion, and the efficiency at the operating point.

use oam_interface::conversion::{
    check_reported_quantum_efficiency, efficiency_report_with_p_max, normalized_efficiency_curve,
    p_max, CrystalParams, Wavelengths,
};
use oam_interface::overlap::FocusGeometry;

fn main() -> oam_interface::Result<()> {
    let crystal = CrystalParams::reference();
    let wl = Wavelengths::reference();
    let geom = FocusGeometry::for_crystal(0.3, 1.0, &wl, &crystal)?;
    let p0 = p_max(&crystal, &wl, &geom)?;
    println!("P_max(l=0) = {p0:.1} W  (SFG at {:.1} nm)", wl.sfg * 1e9);

    let circulating = 22.3;
    for (l, rel) in normalized_efficiency_curve(3, &geom)? {
        let r = efficiency_report_with_p_max(&wl, p0 / rel, circulating)?;
        println!(
            "l = {l}: eta_l/eta_0 = {rel:.3}, P_max = {:7.1} W, quantum eff {:.4}, power eff {:.4}",
            r.p_max, r.eta_quantum, r.eta_power
        );
    }

    // Power efficiency quoted in an experiment, converted to quantum efficiency.
    for (label, power, quantum) in [("l=0", 0.66, 0.224), ("l=1", 0.259, 0.0833)] {
        let c = check_reported_quantum_efficiency(power, quantum, wl.signal, 525e-9, 0.02)?;
        println!(
            "{label}: {power} -> {:.4} vs reported {quantum} ({:.1}%){}",
            c.computed,
            100.0 * c.relative_discrepancy,
            if c.flagged { "  FLAGGED" } else { "" }
        );
    }
    Ok(())
}
