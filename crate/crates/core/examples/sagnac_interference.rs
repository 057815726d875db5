//! Hybrid OAM-polarization state through the Sagnac, HWP and projection, then a fringe fit.

use std::f64::consts::PI;

use oam_interface::states::{
    fit_fringe, fringe_scan, hwp_transform, prepare_sagnac, upconvert_vertical_projection,
    ProjectionOp,
};

fn main() -> oam_interface::Result<()> {
    let l = 1;
    let proj = ProjectionOp::new(l, 0.0)?;
    println!("{:>8} {:>10}", "theta", "P(proj)");
    for k in 0..8 {
        let theta = k as f64 * PI / 4.0;
        let (state, p_v) =
            upconvert_vertical_projection(&hwp_transform(&prepare_sagnac(l, theta)?))?;
        println!(
            "{theta:>8.3} {:>10.4}  (V fraction {p_v:.2})",
            proj.expectation(&state)
        );
    }

    let ideal = fringe_scan(1.0, 1e4, 0.0, 36, None)?;
    let fit = fit_fringe(&ideal.thetas, &ideal.counts)?;
    println!(
        "noiseless: V = {:.4}, F = {:.4}",
        fit.visibility, fit.fidelity
    );

    let measured = fringe_scan(0.89, 2e4, 0.0, 36, Some(2016))?;
    let fit = fit_fringe(&measured.thetas, &measured.counts)?;
    println!(
        "V = 0.89 with Poisson counts: V = {:.4}, F = {:.4}",
        fit.visibility, fit.fidelity
    );
    Ok(())
}
