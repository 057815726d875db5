//! Petal patterns of up-converted superpositions, ICCD noise, and petal counting.

use oam_interface::imaging::{
    analyze_petals, iccd_acquire, render, GridSpec, IccdConfig, PgmScaling,
};
use oam_interface::states::{
    hwp_transform, prepare_sagnac, upconvert_vertical_projection, OamPolState, Polarization,
};

fn main() -> oam_interface::Result<()> {
    let waist = 1e-3;
    let out = std::env::temp_dir().join("oamqi_iccd_example");
    std::fs::create_dir_all(&out)?;

    let donut = render(
        &OamPolState::basis(1, Polarization::V)?,
        waist,
        GridSpec::for_ring(waist, 1)?,
    )?;
    let (w, h) = (donut.width(), donut.height());
    println!(
        "donut l=1: centre/peak = {:.1e}",
        donut.get(w / 2, h / 2) / donut.max()
    );

    for l in 1..=3 {
        let state = upconvert_vertical_projection(&hwp_transform(&prepare_sagnac(l, 0.0)?))?.0;
        let ideal = render(&state, waist, GridSpec::for_ring(waist, l as u32)?)?;
        let noisy = iccd_acquire(&ideal, &IccdConfig::reference(7))?;
        let a = analyze_petals(&noisy)?;
        println!(
            "l={l}: {} petals (modulation {:.2}, {:.0} sigma above background)",
            a.petals, a.modulation, a.range_over_noise
        );
        let path = out.join(format!("petals_l{l}.pgm"));
        std::fs::write(&path, noisy.to_pgm(PgmScaling::Normalize, &[]))?;
        println!("    wrote {}", path.display());
    }
    Ok(())
}
