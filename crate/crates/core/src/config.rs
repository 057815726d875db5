//! Versioned experiment configuration shared by the CLI and the examples.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::beams::{Beam, BeamSpec};
use crate::conversion::{CrystalParams, Wavelengths};
use crate::error::{invalid, positive, unit_interval, Error, Result};
use crate::imaging::IccdConfig;
use crate::overlap::FocusGeometry;
use crate::statistics::{ApdCalibration, LossChain, SourceModel};

pub const SCHEMA_VERSION: u32 = 1;

/// Reference parameter file, embedded at build time.
pub const DEFAULT_CONFIG_JSON: &str = include_str!("../config/default.json");

/// Focusing parameters used instead of the beams' own ξ and α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub xi: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingSpec {
    /// Mode waist at the camera plane (m).
    pub mode_waist: f64,
    pub iccd: IccdConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceSpec {
    /// Visibility of the simulated output state.
    pub visibility: f64,
    /// Expected counts at a fringe maximum.
    pub peak_counts: f64,
    pub pinhole_phi: f64,
    pub phases: usize,
}

/// Heralded source before and after conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeraldSpec {
    pub source: SourceModel,
    /// Signal transmission through the converter and collection optics.
    pub channel_efficiency: f64,
    /// g² the post-conversion noise floor is calibrated to.
    pub post_conversion_g2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmfSpec {
    pub mode_waist: f64,
    pub fiber_waist: f64,
    /// Scan covers ±span·mode_waist.
    pub span_waists: f64,
    pub points: usize,
    /// Maximum g² the noise floor is calibrated to, for l = 1 and l = 2.
    pub target_max_g2_l1: f64,
    pub target_max_g2_l2: f64,
    /// Acquisition time per fibre position (s).
    pub duration_per_point: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApdState {
    pub label: String,
    /// APD count rate (counts/s).
    pub count_rate: f64,
    pub optics_transmission: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApdSpec {
    pub trigger_rate: f64,
    pub gate_window: f64,
    pub det_eff_per_gate: f64,
    pub states: Vec<ApdState>,
}

impl ApdSpec {
    pub fn calibration(&self, state: &ApdState) -> ApdCalibration {
        ApdCalibration {
            trigger_rate: self.trigger_rate,
            gate_window: self.gate_window,
            det_eff_per_gate: self.det_eff_per_gate,
            optics_transmission: state.optics_transmission,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    pub herald_rate: f64,
    pub chain: LossChain,
}

/// Complete, self-describing parameter set of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Free-form provenance notes; ignored by the simulation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub crystal: CrystalParams,
    pub pump: BeamSpec,
    pub signal: BeamSpec,
    pub geometry: GeometrySpec,
    /// Circulating pump power in the cavity (W).
    pub circulating_pump: f64,
    pub imaging: ImagingSpec,
    pub interference: InterferenceSpec,
    pub herald: HeraldSpec,
    pub smf: SmfSpec,
    pub losses: LossSpec,
    pub apd: ApdSpec,
    /// Master seed; overrides every component seed.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_json(DEFAULT_CONFIG_JSON).expect("shipped default config is valid")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolved()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Copies the master seed into every component and validates.
    pub fn resolved(mut self) -> Result<Self> {
        self.imaging.iccd.rng_seed = self.seed;
        self.herald.source.rng_seed = self.seed;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(self, seed: u64) -> Result<Self> {
        Self { seed, ..self }.resolved()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.crystal.validate()?;
        self.pump_beam()?;
        self.signal_beam()?;
        self.geometry()?;
        positive("circulating_pump", self.circulating_pump)?;
        positive("imaging.mode_waist", self.imaging.mode_waist)?;
        self.imaging.iccd.validate()?;
        unit_interval("interference.visibility", self.interference.visibility)?;
        positive("interference.peak_counts", self.interference.peak_counts)?;
        if self.interference.phases < 3 {
            return Err(invalid("interference.phases", "need at least 3"));
        }
        self.herald.source.validate()?;
        unit_interval("herald.channel_efficiency", self.herald.channel_efficiency)?;
        positive("smf.mode_waist", self.smf.mode_waist)?;
        positive("smf.fiber_waist", self.smf.fiber_waist)?;
        positive("smf.span_waists", self.smf.span_waists)?;
        positive("smf.duration_per_point", self.smf.duration_per_point)?;
        if self.smf.points < 2 {
            return Err(invalid("smf.points", "need at least 2"));
        }
        unit_interval("losses.herald_rate", self.losses.herald_rate)?;
        for s in &self.apd.states {
            self.apd.calibration(s).validate()?;
        }
        Ok(())
    }

    pub fn pump_beam(&self) -> Result<Beam> {
        Beam::try_from(self.pump)
    }

    pub fn signal_beam(&self) -> Result<Beam> {
        Beam::try_from(self.signal)
    }

    /// Pump and signal wavelengths from the beams; SFG by energy conservation.
    pub fn wavelengths(&self) -> Result<Wavelengths> {
        Wavelengths::from_pump_signal(self.pump.wavelength, self.signal.wavelength)
    }

    pub fn geometry(&self) -> Result<FocusGeometry> {
        FocusGeometry::for_crystal(
            self.geometry.xi,
            self.geometry.alpha,
            &self.wavelengths()?,
            &self.crystal,
        )
    }

    /// Canonical JSON (compact, field order fixed by the struct).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, lowercase hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical_json().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips() {
        let cfg = ExperimentConfig::default();
        let back =
            ExperimentConfig::from_json(&serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash(), back.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn master_seed_overrides_components() {
        let cfg = ExperimentConfig::default().with_seed(77).unwrap();
        assert_eq!(cfg.imaging.iccd.rng_seed, 77);
        assert_eq!(cfg.herald.source.rng_seed, 77);
        assert_ne!(
            cfg.hash(),
            ExperimentConfig::default().with_seed(78).unwrap().hash()
        );
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_CONFIG_JSON).unwrap();
        v["bogus"] = 1.into();
        assert!(matches!(
            ExperimentConfig::from_json(&v.to_string()),
            Err(Error::Config(_))
        ));
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_CONFIG_JSON).unwrap();
        v["schema_version"] = 99.into();
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_CONFIG_JSON).unwrap();
        v["crystal"]["length"] = (-1.0).into();
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn default_values() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.crystal, CrystalParams::reference());
        assert_eq!(cfg.imaging.iccd.frames_per_image, 360);
        assert_eq!(cfg.imaging.iccd.dark_count_mean, 600.0);
        let wl = cfg.wavelengths().unwrap();
        // 795 and 1560 nm combine to 526.6 nm; the nominal figure is 525 nm.
        assert!((wl.sfg - 526.6e-9).abs() < 0.1e-9);
        assert_eq!(cfg.losses.chain, LossChain::reference());
        assert_eq!(cfg.apd.states.len(), 4);
    }
}
