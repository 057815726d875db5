use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::constants::{check_oam, FACTORIAL};
use crate::error::{positive, unit_interval, Result};
use crate::quadrature::{integrate_2d, QuadOptions, Rect};
use crate::rng::{stream_key, stream_rng};

use super::g2::{g2_estimate, G2Estimate};
use super::source::{signal_noise_for_target_g2, simulate_pairs, Channel, SourceModel};

const POSITION_DOMAIN: u16 = 19;
/// Integration half-width in units of the larger waist.
const EXTENT: f64 = 7.0;

/// Unit-power LG_{l,0} field at the waist plane.
fn lg_waist(abs_l: u32, w: f64, x: f64, y: f64) -> Complex64 {
    let r2 = (x * x + y * y) / (w * w);
    let norm = (2.0 / (PI * FACTORIAL[abs_l as usize])).sqrt() / w;
    let radial = (2.0 * r2).sqrt().powi(abs_l as i32) * (-r2).exp();
    // (x + iy)^|l| / r^|l| supplies e^{i|l|φ} without a branch at r = 0.
    let phase = Complex64::new(x, y).powu(abs_l) / (x * x + y * y).sqrt().powi(abs_l as i32);
    if abs_l == 0 {
        Complex64::new(norm * radial, 0.0)
    } else if x == 0.0 && y == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        phase * (norm * radial)
    }
}

/// Power fraction of an LG_l mode displaced by `d` (along x) that couples
/// into a single-mode fibre with Gaussian mode field `fiber_waist`.
///
/// The overlap of the two unit-power fields is integrated by adaptive
/// cubature. Rotating the plane by π maps a displacement −d onto d, so the
/// integral is always evaluated at |d|.
pub fn smf_coupling(l: i32, d: f64, mode_waist: f64, fiber_waist: f64) -> Result<f64> {
    let abs_l = check_oam(l)?;
    positive("mode_waist", mode_waist)?;
    positive("fiber_waist", fiber_waist)?;
    let d = d.abs();
    let reach = EXTENT * mode_waist.max(fiber_waist);
    let region = Rect::new(-reach, d + reach, -reach, reach);
    let opts = QuadOptions::relative(1e-10).with_abs_tol(1e-13);
    let overlap = integrate_2d(
        |x, y| lg_waist(abs_l, mode_waist, x - d, y) * lg_waist(0, fiber_waist, x, y),
        region,
        4,
        opts,
    )?;
    // |·|² of a dimensionless overlap; scaled area element is already in the fields.
    Ok(overlap.value.norm_sqr())
}

/// (d, coupling) for every displacement.
pub fn smf_coupling_scan(
    l: i32,
    displacements: &[f64],
    mode_waist: f64,
    fiber_waist: f64,
) -> Result<Vec<(f64, f64)>> {
    displacements
        .iter()
        .map(|&d| Ok((d, smf_coupling(l, d, mode_waist, fiber_waist)?)))
        .collect()
}

/// Fibre-position scan of heralded coincidences: the signal arm's transmission
/// is the channel efficiency times the SMF coupling, while the signal-arm
/// background stays fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionScan {
    pub l: i32,
    pub displacements: Vec<f64>,
    pub mode_waist: f64,
    pub fiber_waist: f64,
    pub source: SourceModel,
    pub channel_efficiency: f64,
}

impl PositionScan {
    /// Sets the signal-arm background so the best-coupled scan point reaches
    /// `target_max` in the analytic model. Returns the chosen rate.
    pub fn calibrate_noise_floor(&mut self, target_max: f64) -> Result<f64> {
        let best = smf_coupling_scan(
            self.l,
            &self.displacements,
            self.mode_waist,
            self.fiber_waist,
        )?
        .into_iter()
        .map(|(_, c)| c)
        .fold(0.0, f64::max);
        let rate =
            signal_noise_for_target_g2(&self.source, self.channel_efficiency * best, target_max)?;
        self.source.signal_noise_rate = rate;
        Ok(rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositionG2 {
    pub d: f64,
    pub coupling: f64,
    #[serde(flatten)]
    pub estimate: G2Estimate,
}

/// Runs [`simulate_pairs`] and [`g2_estimate`] at every fibre position. Each
/// position gets its own seed derived from (source seed, index).
pub fn g2_vs_position(scan: &PositionScan) -> Result<Vec<PositionG2>> {
    unit_interval("channel_efficiency", scan.channel_efficiency)?;
    let couplings = smf_coupling_scan(
        scan.l,
        &scan.displacements,
        scan.mode_waist,
        scan.fiber_waist,
    )?;
    couplings
        .into_iter()
        .enumerate()
        .map(|(k, (d, coupling))| {
            let seed =
                stream_rng(scan.source.rng_seed, stream_key(POSITION_DOMAIN, k as u64)).random();
            let src = scan.source.with_seed(seed);
            let eta = (scan.channel_efficiency * coupling).clamp(0.0, 1.0);
            let streams = simulate_pairs(&src, Channel::Fixed(eta))?;
            let estimate = g2_estimate(&streams, src.coincidence_window, 0.0)?;
            Ok(PositionG2 {
                d,
                coupling,
                estimate,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;

    const W: f64 = 5e-6;

    /// Matched waists: a displaced vacuum in the two circular modes.
    fn matched_oracle(l: u32, d: f64, w: f64) -> f64 {
        let u = d * d / (w * w);
        (-u).exp() * (u / 2.0).powi(l as i32) / FACTORIAL[l as usize]
    }

    #[test]
    fn orthogonality_and_identity() {
        assert!(smf_coupling(1, 0.0, W, W).unwrap() < 1e-12);
        assert!((smf_coupling(0, 0.0, W, W).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matches_closed_form_for_matched_waists() {
        for l in 0..=3 {
            for d in [0.3, 1.0, 1.7, 2.5] {
                let got = smf_coupling(l, d * W, W, W).unwrap();
                let want = matched_oracle(l as u32, d * W, W);
                assert!((got - want).abs() < 1e-8, "l={l} d={d}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn dip_at_centre_with_flanking_maxima() {
        let ds: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.1 * W).collect();
        let scan = smf_coupling_scan(1, &ds, W, W).unwrap();
        let centre = scan[20].1;
        let (imax, max) =
            scan.iter()
                .enumerate()
                .fold((0, 0.0), |b, (k, p)| if p.1 > b.1 { (k, p.1) } else { b });
        assert!(centre < 1e-12);
        assert!((max - 0.5 * (-1.0f64).exp()).abs() < 1e-8);
        assert_eq!(scan[40 - imax].1, max);
    }

    #[test]
    fn exact_zero_without_noise_is_insufficient_data() {
        let mut source = SourceModel::heralded_reference(1);
        source.duration = 0.01;
        let scan = PositionScan {
            l: 1,
            displacements: vec![0.0],
            mode_waist: W,
            fiber_waist: W,
            source,
            channel_efficiency: 0.5,
        };
        assert!(matches!(
            g2_vs_position(&scan),
            Err(Error::InsufficientData(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn symmetric_and_scale_invariant(l in 0i32..=3, d in 0.0f64..3.0, ratio in 0.6f64..1.6, s in 0.2f64..5.0) {
            let a = smf_coupling(l, d * W, W, ratio * W).unwrap();
            let b = smf_coupling(l, -d * W, W, ratio * W).unwrap();
            prop_assert_eq!(a, b);
            let c = smf_coupling(l, s * d * W, s * W, s * ratio * W).unwrap();
            prop_assert!((a - c).abs() < 1e-8, "{} vs {}", a, c);
            prop_assert!((0.0..=1.0 + 1e-9).contains(&a));
        }
    }
}
