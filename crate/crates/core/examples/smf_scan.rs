//! Single-mode-fibre coupling and g² as the fibre is scanned across an OAM mode.

use oam_interface::config::ExperimentConfig;
use oam_interface::statistics::{g2_vs_position, smf_coupling_scan, PositionScan, SourceModel};

fn main() -> oam_interface::Result<()> {
    let cfg = ExperimentConfig::default();
    let w = cfg.smf.mode_waist;
    let ds: Vec<f64> = (0..=20).map(|k| (k as f64 - 10.0) * 0.25 * w).collect();

    for l in [1, 2] {
        let target = if l == 1 {
            cfg.smf.target_max_g2_l1
        } else {
            cfg.smf.target_max_g2_l2
        };
        let coupling = smf_coupling_scan(l, &ds, w, w)?;
        let mut scan = PositionScan {
            l,
            displacements: ds.clone(),
            mode_waist: w,
            fiber_waist: w,
            source: SourceModel {
                duration: cfg.smf.duration_per_point,
                ..SourceModel::heralded_reference(cfg.seed)
            },
            channel_efficiency: cfg.herald.channel_efficiency,
        };
        scan.calibrate_noise_floor(target)?;
        println!(
            "l = {l} (noise floor {:.0}/s)",
            scan.source.signal_noise_rate
        );
        for (p, (_, c)) in g2_vs_position(&scan)?.iter().zip(&coupling) {
            println!(
                "  d/w = {:>5.2}  coupling {c:.4}  g2 = {:6.2} ± {:.2}",
                p.d / w,
                p.estimate.g2,
                p.estimate.err
            );
        }
    }
    Ok(())
}
