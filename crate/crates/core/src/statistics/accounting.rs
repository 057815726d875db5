use serde::{Deserialize, Serialize};

use crate::error::{invalid, non_negative, positive, Error, Result};

/// Products below this are treated as a broken chain.
pub const MIN_CHAIN_PRODUCT: f64 = 1e-12;

/// Ordered list of labelled transmissions between source and detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, f64)>", into = "Vec<(String, f64)>")]
pub struct LossChain {
    stages: Vec<(String, f64)>,
}

impl LossChain {
    pub fn new(stages: Vec<(String, f64)>) -> Result<Self> {
        if stages.is_empty() {
            return Err(invalid("loss chain", "must contain at least one stage"));
        }
        for (label, t) in &stages {
            if !(*t > 0.0 && *t <= 1.0) {
                return Err(invalid(
                    "transmission",
                    format!("stage '{label}' = {t} is outside (0, 1]"),
                ));
            }
        }
        Ok(Self { stages })
    }

    /// Signal-photon losses of the heralded conversion experiment; the
    /// bandwidth mismatch (1 nm acceptance against a 2.44 nm photon) is one
    /// more stage.
    pub fn reference() -> Self {
        Self::new(
            [
                ("FC1 fibre coupling", 0.25),
                ("transmission to SFG crystal", 0.80),
                ("up-converted photon filtering", 0.80),
                ("FC3 fibre coupling", 0.50),
                ("bandwidth mismatch", 0.41),
                ("APD2 detection efficiency", 0.50),
            ]
            .into_iter()
            .map(|(l, t)| (l.to_string(), t))
            .collect(),
        )
        .expect("valid constants")
    }

    pub fn stages(&self) -> &[(String, f64)] {
        &self.stages
    }

    pub fn product(&self) -> f64 {
        self.stages.iter().map(|(_, t)| t).product()
    }
}

impl TryFrom<Vec<(String, f64)>> for LossChain {
    type Error = Error;
    fn try_from(v: Vec<(String, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LossChain> for Vec<(String, f64)> {
    fn from(c: LossChain) -> Self {
        c.stages
    }
}

/// Internal conversion efficiency: the herald rate divided by the product of
/// all external transmissions.
pub fn loss_chain_internal_efficiency(herald_rate: f64, chain: &LossChain) -> Result<f64> {
    if !(herald_rate > 0.0 && herald_rate <= 1.0) {
        return Err(invalid("herald_rate", "must lie in (0, 1]"));
    }
    let product = chain.product();
    if product < MIN_CHAIN_PRODUCT {
        return Err(Error::DegenerateChain { product });
    }
    Ok(herald_rate / product)
}

/// Gated InGaAs APD used to calibrate input photon rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApdCalibration {
    /// Gate trigger rate (Hz).
    pub trigger_rate: f64,
    /// Detection window per gate (s).
    pub gate_window: f64,
    pub det_eff_per_gate: f64,
    /// Transmission between the crystal input face and the APD fibre.
    pub optics_transmission: f64,
}

impl ApdCalibration {
    /// 30 MHz trigger with 1 ns gates (duty 1/33.33), 0.15 per-gate efficiency.
    pub fn reference(optics_transmission: f64) -> Self {
        Self {
            trigger_rate: 30e6,
            gate_window: 1e-9,
            det_eff_per_gate: 0.15,
            optics_transmission,
        }
    }

    pub fn duty(&self) -> f64 {
        self.trigger_rate * self.gate_window
    }

    pub fn validate(&self) -> Result<()> {
        positive("trigger_rate", self.trigger_rate)?;
        positive("gate_window", self.gate_window)?;
        let duty = self.duty();
        if !(duty > 0.0 && duty <= 1.0) {
            return Err(Error::InvalidCalibration(format!(
                "duty cycle {duty} outside (0, 1]"
            )));
        }
        if !(self.det_eff_per_gate > 0.0 && self.det_eff_per_gate <= 1.0) {
            return Err(Error::InvalidCalibration(
                "per-gate efficiency must lie in (0, 1]".into(),
            ));
        }
        if !(self.optics_transmission > 0.0 && self.optics_transmission <= 1.0) {
            return Err(Error::InvalidCalibration(
                "optics transmission must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Photon rate at the crystal face: count_rate / (duty · η_gate) · T.
///
/// Multiplying by the transmission, rather than dividing, is what reproduces
/// all four published crystal-face rates.
pub fn apd_calibrate(count_rate: f64, cal: &ApdCalibration) -> Result<f64> {
    non_negative("count_rate", count_rate)?;
    cal.validate()?;
    Ok(count_rate / (cal.duty() * cal.det_eff_per_gate) * cal.optics_transmission)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_chain_gives_0_061() {
        let c = LossChain::reference();
        assert!((c.product() - 0.0164).abs() < 1e-4);
        let eta = loss_chain_internal_efficiency(1.00e-3, &c).unwrap();
        assert!((eta - 0.061).abs() < 0.001, "{eta}");
    }

    #[test]
    fn unit_chain_is_identity() {
        let c = LossChain::new(vec![("a".into(), 1.0), ("b".into(), 1.0)]).unwrap();
        assert_eq!(loss_chain_internal_efficiency(0.3, &c).unwrap(), 0.3);
    }

    #[test]
    fn rejects_bad_chains() {
        assert!(LossChain::new(vec![]).is_err());
        assert!(LossChain::new(vec![("x".into(), 0.0)]).is_err());
        assert!(LossChain::new(vec![("x".into(), 1.2)]).is_err());
        let tiny = LossChain::new(vec![("x".into(), 1e-7), ("y".into(), 1e-7)]).unwrap();
        assert!(matches!(
            loss_chain_internal_efficiency(1e-3, &tiny),
            Err(Error::DegenerateChain { .. })
        ));
        assert!(loss_chain_internal_efficiency(0.0, &LossChain::reference()).is_err());
    }

    #[test]
    fn apd_rates() {
        let cases = [
            (11.7e3, 0.80, 2.08e6),
            (21.2e3, 0.79, 3.72e6),
            (16.8e3, 0.74, 2.76e6),
            (21.2e3, 0.67, 3.16e6),
        ];
        for (count, t, want) in cases {
            let got = apd_calibrate(count, &ApdCalibration::reference(t)).unwrap();
            assert!((got - want).abs() / want < 0.005, "{got} vs {want}");
        }
        assert_eq!(
            apd_calibrate(0.0, &ApdCalibration::reference(0.8)).unwrap(),
            0.0
        );
        let bad = ApdCalibration {
            det_eff_per_gate: 0.0,
            ..ApdCalibration::reference(0.8)
        };
        assert!(matches!(
            apd_calibrate(1.0, &bad),
            Err(Error::InvalidCalibration(_))
        ));
    }

    proptest! {
        #[test]
        fn chain_is_order_independent_and_multiplicative(
            ts in proptest::collection::vec(0.05f64..1.0, 1..8),
            x in 0.1f64..1.0,
            herald in 1e-5f64..1e-3,
        ) {
            let fwd: Vec<_> = ts.iter().enumerate().map(|(k, &t)| (format!("s{k}"), t)).collect();
            let mut rev = fwd.clone();
            rev.reverse();
            let a = loss_chain_internal_efficiency(herald, &LossChain::new(fwd.clone()).unwrap()).unwrap();
            let b = loss_chain_internal_efficiency(herald, &LossChain::new(rev).unwrap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
            let mut scaled = fwd;
            scaled[0].1 *= x;
            let c = loss_chain_internal_efficiency(herald, &LossChain::new(scaled).unwrap()).unwrap();
            prop_assert!((c - a / x).abs() <= 1e-12 * c);
        }
    }
}
