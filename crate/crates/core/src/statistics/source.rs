use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::conversion::ConversionChannel;
use crate::error::{invalid, non_negative, positive, unit_interval, Error, Result};
use crate::rng::{stream_key, stream_rng};

/// Upper bound on the expected number of generated photons per run.
pub const EVENT_LIMIT: f64 = 1e8;

/// Events are generated in slices of this length, each with its own stream.
const SLICE: f64 = 0.01;

const PAIR_DOMAIN: u16 = 16;
const SIGNAL_NOISE_DOMAIN: u16 = 17;
const IDLER_NOISE_DOMAIN: u16 = 18;

/// Heralded photon-pair source with uncorrelated background in each arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    /// Pairs per second.
    pub pair_rate: f64,
    /// Background photons per second reaching each detector.
    pub signal_noise_rate: f64,
    pub idler_noise_rate: f64,
    pub signal_det_eff: f64,
    pub idler_det_eff: f64,
    /// Full width of the square coincidence window (s).
    pub coincidence_window: f64,
    /// Simulated acquisition time (s).
    pub duration: f64,
    pub rng_seed: u64,
}

impl SourceModel {
    /// Noise-free source with unit detection whose pair rate gives
    /// R·T_w = 1/161 in a 2 ns window, i.e. g² = 162.
    pub fn heralded_reference(seed: u64) -> Self {
        let window = 2e-9;
        Self {
            pair_rate: 1.0 / (161.0 * window),
            signal_noise_rate: 0.0,
            idler_noise_rate: 0.0,
            signal_det_eff: 1.0,
            idler_det_eff: 1.0,
            coincidence_window: window,
            duration: 0.5,
            rng_seed: seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("pair_rate", self.pair_rate)?;
        non_negative("signal_noise_rate", self.signal_noise_rate)?;
        non_negative("idler_noise_rate", self.idler_noise_rate)?;
        unit_interval("signal_det_eff", self.signal_det_eff)?;
        unit_interval("idler_det_eff", self.idler_det_eff)?;
        positive("coincidence_window", self.coincidence_window)?;
        positive("duration", self.duration)?;
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..self
        }
    }
}

/// Transmission applied to each signal photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// Survival probability sin²(κL).
    Conversion(ConversionChannel),
    Fixed(f64),
}

impl Channel {
    pub fn efficiency(&self) -> Result<f64> {
        match *self {
            Channel::Conversion(c) => Ok(c.efficiency()),
            Channel::Fixed(eta) => unit_interval("channel efficiency", eta),
        }
    }
}

impl From<ConversionChannel> for Channel {
    fn from(c: ConversionChannel) -> Self {
        Channel::Conversion(c)
    }
}

/// Time-ordered detection timestamps (s) for both arms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClickStreams {
    pub signal: Vec<f64>,
    pub idler: Vec<f64>,
    pub duration: f64,
}

impl ClickStreams {
    pub fn new(mut signal: Vec<f64>, mut idler: Vec<f64>, duration: f64) -> Result<Self> {
        positive("duration", duration)?;
        if signal.iter().chain(&idler).any(|t| !t.is_finite()) {
            return Err(invalid("timestamps", "must be finite"));
        }
        signal.sort_by(f64::total_cmp);
        idler.sort_by(f64::total_cmp);
        Ok(Self {
            signal,
            idler,
            duration,
        })
    }

    /// `timestamp_s,arm` rows, merged in time order (signal first on ties).
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(24 * (self.signal.len() + self.idler.len()) + 16);
        out.push_str("timestamp_s,arm\n");
        let (mut i, mut j) = (0, 0);
        while i < self.signal.len() || j < self.idler.len() {
            let take_signal =
                j == self.idler.len() || (i < self.signal.len() && self.signal[i] <= self.idler[j]);
            if take_signal {
                out.push_str(&format!("{:e},signal\n", self.signal[i]));
                i += 1;
            } else {
                out.push_str(&format!("{:e},idler\n", self.idler[j]));
                j += 1;
            }
        }
        out
    }
}

fn poisson_count(mean: f64, rng: &mut impl Rng) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| invalid("poisson mean", e.to_string()))?;
    Ok(d.sample(rng) as u64)
}

/// Monte Carlo pair source followed by the conversion channel.
///
/// Pair emission is a Poisson process; the signal photon survives the channel
/// with the channel efficiency and both photons are then thinned by their
/// detector efficiencies. Independent Poisson background is added in each arm
/// and thinned by the same detector efficiency. The acquisition is cut into
/// fixed slices, each drawing from its own stream keyed by (seed, slice), so
/// results depend only on the seed.
pub fn simulate_pairs(src: &SourceModel, channel: Channel) -> Result<ClickStreams> {
    src.validate()?;
    let eta = channel.efficiency()?;
    let expected =
        src.duration * (2.0 * src.pair_rate + src.signal_noise_rate + src.idler_noise_rate);
    if expected >= EVENT_LIMIT {
        return Err(Error::EventBudgetExceeded {
            expected,
            limit: EVENT_LIMIT,
        });
    }
    let p_signal = eta * src.signal_det_eff;
    let slices = (src.duration / SLICE).ceil() as u64;
    let mut signal = Vec::with_capacity((expected / 2.0) as usize + 16);
    let mut idler = Vec::with_capacity((expected / 2.0) as usize + 16);

    for k in 0..slices {
        let t0 = k as f64 * SLICE;
        let len = SLICE.min(src.duration - t0);
        if len <= 0.0 {
            break;
        }
        let mut rng = stream_rng(src.rng_seed, stream_key(PAIR_DOMAIN, k));
        let n = poisson_count(src.pair_rate * len, &mut rng)?;
        for _ in 0..n {
            let t = t0 + rng.random::<f64>() * len;
            // Both draws are made unconditionally so the stream layout does
            // not depend on the efficiencies.
            let (us, ui): (f64, f64) = (rng.random(), rng.random());
            if us < p_signal {
                signal.push(t);
            }
            if ui < src.idler_det_eff {
                idler.push(t);
            }
        }
        for (domain, rate, eff, out) in [
            (
                SIGNAL_NOISE_DOMAIN,
                src.signal_noise_rate,
                src.signal_det_eff,
                &mut signal,
            ),
            (
                IDLER_NOISE_DOMAIN,
                src.idler_noise_rate,
                src.idler_det_eff,
                &mut idler,
            ),
        ] {
            let mut rng = stream_rng(src.rng_seed, stream_key(domain, k));
            let n = poisson_count(rate * len, &mut rng)?;
            for _ in 0..n {
                let t = t0 + rng.random::<f64>() * len;
                if rng.random::<f64>() < eff {
                    out.push(t);
                }
            }
        }
    }
    ClickStreams::new(signal, idler, src.duration)
}

/// Expected g²(0) of [`simulate_pairs`] output for a square window T_w:
/// 1 + R·η·η_s·η_i / (S_s·S_i·T_w), where S_s and S_i are the singles rates.
pub fn analytic_g2(src: &SourceModel, channel_efficiency: f64) -> Result<f64> {
    src.validate()?;
    unit_interval("channel efficiency", channel_efficiency)?;
    let correlated = src.pair_rate * channel_efficiency * src.signal_det_eff * src.idler_det_eff;
    let ss = (src.pair_rate * channel_efficiency + src.signal_noise_rate) * src.signal_det_eff;
    let si = (src.pair_rate + src.idler_noise_rate) * src.idler_det_eff;
    let accidental = ss * si * src.coincidence_window;
    if accidental <= 0.0 {
        return Err(Error::InsufficientData("no singles in one arm".into()));
    }
    Ok(1.0 + correlated / accidental)
}

/// Signal-arm background rate that brings [`analytic_g2`] to `target`
/// (> 1) for the given channel efficiency. Errors if even a noise-free
/// signal arm cannot reach the target.
pub fn signal_noise_for_target_g2(
    src: &SourceModel,
    channel_efficiency: f64,
    target: f64,
) -> Result<f64> {
    let clean = analytic_g2(
        &SourceModel {
            signal_noise_rate: 0.0,
            ..*src
        },
        channel_efficiency,
    )?;
    if !(target > 1.0) || target > clean {
        return Err(invalid(
            "target g2",
            format!("must lie in (1, {clean}] for this source"),
        ));
    }
    // g² − 1 scales as R·η / (R·η + N) at fixed idler rate.
    let signal = src.pair_rate * channel_efficiency;
    Ok(signal * ((clean - 1.0) / (target - 1.0) - 1.0))
}
