use serde::Serialize;

use crate::error::{invalid, positive, Error, Result};

use super::source::ClickStreams;

/// Far-delay windows averaged for the accidental normalization.
pub const ACCIDENTAL_WINDOWS: usize = 50;
/// Offset of the first normalization window, in window widths.
pub const ACCIDENTAL_OFFSET_WINDOWS: usize = 100;

/// Number of (signal, idler) pairs with idler − signal in
/// [delay − w/2, delay + w/2).
fn coincidences_at(signal: &[f64], idler: &[f64], delay: f64, window: f64) -> u64 {
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut total = 0u64;
    for &s in signal {
        let a = s + delay - window / 2.0;
        let b = s + delay + window / 2.0;
        while lo < idler.len() && idler[lo] < a {
            lo += 1;
        }
        hi = hi.max(lo);
        while hi < idler.len() && idler[hi] < b {
            hi += 1;
        }
        total += (hi - lo) as u64;
    }
    total
}

/// Normalized cross-correlation at one delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G2Estimate {
    pub g2: f64,
    /// One-sigma counting error.
    pub err: f64,
    pub coincidences: u64,
    /// Mean coincidences per far-delay window.
    pub accidentals: f64,
    pub singles_s: u64,
    pub singles_i: u64,
}

/// g²(τ) as coincidences in a square window at delay τ over the mean count in
/// 50 windows placed 100 or more window widths away, where the arms are
/// uncorrelated. The error propagates √N on both counts.
pub fn g2_estimate(streams: &ClickStreams, window: f64, tau: f64) -> Result<G2Estimate> {
    positive("window", window)?;
    if !tau.is_finite() {
        return Err(invalid("tau", "must be finite"));
    }
    if streams.signal.is_empty() || streams.idler.is_empty() {
        return Err(Error::InsufficientData("empty click stream".into()));
    }
    let c = coincidences_at(&streams.signal, &streams.idler, tau, window);
    let far: u64 = (0..ACCIDENTAL_WINDOWS)
        .map(|k| {
            let delay = tau + (ACCIDENTAL_OFFSET_WINDOWS + k) as f64 * window;
            coincidences_at(&streams.signal, &streams.idler, delay, window)
        })
        .sum();
    if far == 0 {
        return Err(Error::InsufficientData(
            "no accidental coincidences in the normalization windows".into(),
        ));
    }
    let accidentals = far as f64 / ACCIDENTAL_WINDOWS as f64;
    let g2 = c as f64 / accidentals;
    let err = if c > 0 {
        g2 * (1.0 / c as f64 + 1.0 / far as f64).sqrt()
    } else {
        1.0 / accidentals
    };
    Ok(G2Estimate {
        g2,
        err,
        coincidences: c,
        accidentals,
        singles_s: streams.signal.len() as u64,
        singles_i: streams.idler.len() as u64,
    })
}

/// Cross-correlation above 2 cannot be produced by classical fields.
pub fn nonclassical_witness(g2_si: f64) -> Result<bool> {
    if !(g2_si >= 0.0) {
        return Err(invalid("g2", "must be non-negative"));
    }
    Ok(g2_si > 2.0)
}

/// Coincidence counts against idler − signal delay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceHistogram {
    pub bin_width: f64,
    /// Bin centres (s).
    pub delays: Vec<f64>,
    pub counts: Vec<u64>,
    pub singles_signal: u64,
    pub singles_idler: u64,
}

/// Histogram of idler − signal delays in [−max_delay, max_delay).
pub fn coincidence_histogram(
    streams: &ClickStreams,
    bin_width: f64,
    max_delay: f64,
) -> Result<CoincidenceHistogram> {
    positive("bin_width", bin_width)?;
    positive("max_delay", max_delay)?;
    let nbins = (2.0 * max_delay / bin_width).round() as usize;
    if nbins == 0 {
        return Err(invalid("max_delay", "must span at least one bin"));
    }
    let span = nbins as f64 * bin_width;
    let lower = -span / 2.0;
    let mut counts = vec![0u64; nbins];
    let idler = &streams.idler;
    let mut lo = 0usize;
    for &s in &streams.signal {
        while lo < idler.len() && idler[lo] < s + lower {
            lo += 1;
        }
        let mut k = lo;
        while k < idler.len() {
            let d = idler[k] - s - lower;
            if d >= span {
                break;
            }
            let b = ((d / bin_width) as usize).min(nbins - 1);
            counts[b] += 1;
            k += 1;
        }
    }
    Ok(CoincidenceHistogram {
        bin_width,
        delays: (0..nbins)
            .map(|b| lower + (b as f64 + 0.5) * bin_width)
            .collect(),
        counts,
        singles_signal: streams.signal.len() as u64,
        singles_idler: streams.idler.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistics::source::{analytic_g2, simulate_pairs, Channel, SourceModel};

    fn brute_force(signal: &[f64], idler: &[f64], delay: f64, w: f64) -> u64 {
        let mut n = 0;
        for s in signal {
            for i in idler {
                let d = i - s;
                if d >= delay - w / 2.0 && d < delay + w / 2.0 {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn sweep_matches_brute_force() {
        let src = SourceModel {
            pair_rate: 5e3,
            signal_noise_rate: 2e4,
            idler_noise_rate: 3e4,
            signal_det_eff: 0.8,
            idler_det_eff: 0.9,
            coincidence_window: 1e-6,
            duration: 0.05,
            rng_seed: 4,
        };
        let c = simulate_pairs(&src, Channel::Fixed(0.5)).unwrap();
        for delay in [0.0, 3e-6, -7e-6, 1e-4] {
            assert_eq!(
                coincidences_at(&c.signal, &c.idler, delay, 2e-6),
                brute_force(&c.signal, &c.idler, delay, 2e-6)
            );
        }
    }

    #[test]
    fn uncorrelated_streams_give_unity() {
        let src = SourceModel {
            pair_rate: 0.0,
            signal_noise_rate: 2e6,
            idler_noise_rate: 2e6,
            signal_det_eff: 1.0,
            idler_det_eff: 1.0,
            coincidence_window: 2e-9,
            duration: 0.5,
            rng_seed: 21,
        };
        let c = simulate_pairs(&src, Channel::Fixed(1.0)).unwrap();
        let e = g2_estimate(&c, 2e-9, 0.0).unwrap();
        assert!((e.g2 - 1.0).abs() < 3.0 * e.err, "{e:?}");
    }

    #[test]
    fn perfect_pairs_all_coincide() {
        let src = SourceModel {
            pair_rate: 1e4,
            signal_noise_rate: 0.0,
            idler_noise_rate: 0.0,
            signal_det_eff: 1.0,
            idler_det_eff: 1.0,
            coincidence_window: 2e-9,
            duration: 0.1,
            rng_seed: 2,
        };
        let c = simulate_pairs(&src, Channel::Fixed(1.0)).unwrap();
        let e = g2_estimate(&c, 2e-9, 0.0);
        assert_eq!(
            coincidences_at(&c.signal, &c.idler, 0.0, 2e-9),
            c.signal.len() as u64
        );
        assert_eq!(c.signal, c.idler);
        // With so few accidentals the normalization may be empty.
        if let Err(err) = e {
            assert!(matches!(err, Error::InsufficientData(_)));
        }
    }

    #[test]
    fn estimator_converges_as_inverse_root_duration() {
        let base = SourceModel {
            pair_rate: 1e6,
            signal_noise_rate: 1e6,
            idler_noise_rate: 5e5,
            signal_det_eff: 0.6,
            idler_det_eff: 0.5,
            coincidence_window: 2e-9,
            duration: 0.02,
            rng_seed: 8,
        };
        let target = analytic_g2(&base, 0.4).unwrap();
        let mut errs = Vec::new();
        for duration in [0.02, 0.08, 0.32] {
            let c = simulate_pairs(&SourceModel { duration, ..base }, Channel::Fixed(0.4)).unwrap();
            let e = g2_estimate(&c, 2e-9, 0.0).unwrap();
            assert!(
                (e.g2 - target).abs() < 3.0 * e.err,
                "T={duration}: {} vs {target} ± {}",
                e.g2,
                e.err
            );
            errs.push(e.err);
        }
        // Quadrupling the duration halves the error.
        for w in errs.windows(2) {
            assert!((w[0] / w[1] - 2.0).abs() < 0.2, "{errs:?}");
        }
    }

    #[test]
    fn witness_is_strict() {
        assert!(nonclassical_witness(162.0).unwrap());
        assert!(!nonclassical_witness(2.0).unwrap());
        assert!(!nonclassical_witness(1.0).unwrap());
        assert!(nonclassical_witness(-1.0).is_err());
    }

    #[test]
    fn histogram_peak_at_zero_delay() {
        let src = SourceModel {
            pair_rate: 5e4,
            signal_noise_rate: 1e5,
            idler_noise_rate: 1e5,
            signal_det_eff: 1.0,
            idler_det_eff: 1.0,
            coincidence_window: 1e-8,
            duration: 0.1,
            rng_seed: 3,
        };
        let c = simulate_pairs(&src, Channel::Fixed(1.0)).unwrap();
        let h = coincidence_histogram(&c, 1e-8, 1e-7).unwrap();
        assert_eq!(h.counts.len(), 20);
        let peak = h
            .counts
            .iter()
            .enumerate()
            .max_by_key(|(_, n)| **n)
            .unwrap()
            .0;
        assert!(h.delays[peak].abs() < 1e-8);
        let total: u64 = h.counts.iter().sum();
        assert!(total <= h.singles_signal * h.singles_idler);
    }
}
