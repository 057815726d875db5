//! Heralded-pair Monte Carlo before and after a lossy, noisy conversion channel.

use oam_interface::statistics::{
    analytic_g2, coincidence_histogram, g2_estimate, nonclassical_witness,
    signal_noise_for_target_g2, simulate_pairs, Channel, SourceModel,
};

fn main() -> oam_interface::Result<()> {
    let window = 2e-9;
    let source = SourceModel::heralded_reference(2016);
    let clicks = simulate_pairs(&source, Channel::Fixed(1.0))?;
    let e = g2_estimate(&clicks, window, 0.0)?;
    println!(
        "source: g2 = {:.1} ± {:.1} (analytic {:.1}), {} coincidences, witness {}",
        e.g2,
        e.err,
        analytic_g2(&source, 1.0)?,
        e.coincidences,
        nonclassical_witness(e.g2)?
    );

    let eta = 0.061;
    let converted = SourceModel {
        signal_noise_rate: signal_noise_for_target_g2(&source, eta, 25.0)?,
        ..source.with_seed(2017)
    };
    let clicks = simulate_pairs(&converted, Channel::Fixed(eta))?;
    let e = g2_estimate(&clicks, window, 0.0)?;
    println!(
        "after conversion (eta {eta}, noise {:.0}/s): g2 = {:.2} ± {:.2}, witness {}",
        converted.signal_noise_rate,
        e.g2,
        e.err,
        nonclassical_witness(e.g2)?
    );

    let hist = coincidence_histogram(&clicks, window, 5.0 * window)?;
    for (delay, count) in hist.delays.iter().zip(&hist.counts) {
        println!("  delay {:>6.1} ns: {count}", delay * 1e9);
    }
    Ok(())
}
