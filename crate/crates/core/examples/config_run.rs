//! Loading, overriding and hashing an experiment configuration.

use oam_interface::config::ExperimentConfig;

fn main() -> oam_interface::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::default(),
    };
    cfg.validate()?;
    let wl = cfg.wavelengths()?;
    println!(
        "SFG wavelength {:.1} nm, xi {}",
        wl.sfg * 1e9,
        cfg.geometry.xi
    );
    println!("hash {}", cfg.hash());

    let reseeded = cfg.with_seed(42)?;
    println!("seed 42 hash {}", reseeded.hash());
    Ok(())
}
