//! Gaussian and single-ring Laguerre-Gaussian field amplitudes.
//!
//! Fields are slowly varying envelopes in SI units, normalized so that
//! `2·ε0·n·c·∬|E|² dA` equals the beam power at every z.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{check_oam, EPSILON_0, FACTORIAL, RADIAL_CUTOFF, SPEED_OF_LIGHT};
use crate::error::{invalid, non_negative, positive, Error, Result};

/// One optical field inside the nonlinear medium.
///
/// The Rayleigh range is always derived from the stored fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BeamSpec", into = "BeamSpec")]
pub struct Beam {
    wavelength: f64,
    waist: f64,
    refractive_index: f64,
    power: f64,
    oam_l: i32,
}

/// Unvalidated serialized form of [`Beam`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    pub wavelength: f64,
    pub waist: f64,
    pub refractive_index: f64,
    pub power: f64,
    #[serde(default)]
    pub oam_l: i32,
}

impl TryFrom<BeamSpec> for Beam {
    type Error = Error;
    fn try_from(s: BeamSpec) -> Result<Self> {
        Beam::new(s.wavelength, s.waist, s.refractive_index, s.power)?.with_oam(s.oam_l)
    }
}

impl From<Beam> for BeamSpec {
    fn from(b: Beam) -> Self {
        BeamSpec {
            wavelength: b.wavelength,
            waist: b.waist,
            refractive_index: b.refractive_index,
            power: b.power,
            oam_l: b.oam_l,
        }
    }
}

impl Beam {
    /// A Gaussian (l = 0) beam.
    pub fn new(wavelength: f64, waist: f64, refractive_index: f64, power: f64) -> Result<Self> {
        positive("wavelength", wavelength)?;
        positive("waist", waist)?;
        non_negative("power", power)?;
        if !(refractive_index.is_finite() && refractive_index >= 1.0) {
            return Err(invalid(
                "refractive_index",
                format!("must be >= 1, got {refractive_index}"),
            ));
        }
        Ok(Self {
            wavelength,
            waist,
            refractive_index,
            power,
            oam_l: 0,
        })
    }

    /// Same beam carrying topological charge `l`.
    pub fn with_oam(mut self, l: i32) -> Result<Self> {
        check_oam(l)?;
        self.oam_l = l;
        Ok(self)
    }

    pub fn with_power(mut self, power: f64) -> Result<Self> {
        self.power = non_negative("power", power)?;
        Ok(self)
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn waist(&self) -> f64 {
        self.waist
    }
    pub fn refractive_index(&self) -> f64 {
        self.refractive_index
    }
    pub fn power(&self) -> f64 {
        self.power
    }
    pub fn oam_l(&self) -> i32 {
        self.oam_l
    }

    /// Z0 = π·n·w0²/λ.
    pub fn rayleigh_range(&self) -> f64 {
        PI * self.refractive_index * self.waist * self.waist / self.wavelength
    }

    /// Complex beam parameter factor 1 + i·z/Z0.
    pub fn q_factor(&self, z: f64) -> Complex64 {
        Complex64::new(1.0, z / self.rayleigh_range())
    }

    /// Beam radius w0·|1 + iz/Z0| at position z.
    pub fn radius_at(&self, z: f64) -> f64 {
        self.waist * self.q_factor(z).norm()
    }

    /// Radius beyond which the field is treated as zero in radial integrals.
    pub fn radial_cutoff(&self, z: f64) -> f64 {
        RADIAL_CUTOFF * self.radius_at(z)
    }

    /// Radius of maximum intensity at z: w(z)·sqrt(|l|/2).
    pub fn ring_radius(&self, z: f64) -> f64 {
        self.radius_at(z) * (f64::from(self.oam_l.unsigned_abs()) / 2.0).sqrt()
    }

    /// Intensity 2·ε0·n·c·|E|² of the field at a point.
    pub fn intensity(&self, r: f64, phi: f64, z: f64) -> Result<f64> {
        let e = lg_field(self, r, phi, z)?;
        Ok(2.0 * EPSILON_0 * self.refractive_index * SPEED_OF_LIGHT * e.norm_sqr())
    }
}

/// Complex field amplitude at a point, in cylindrical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub amplitude: Complex64,
    pub r: f64,
    pub phi: f64,
    pub z: f64,
}

impl FieldSample {
    pub fn at(beam: &Beam, r: f64, phi: f64, z: f64) -> Result<Self> {
        Ok(Self {
            amplitude: lg_field(beam, r, phi, z)?,
            r,
            phi,
            z,
        })
    }
}

/// Gaussian envelope
/// E(r, z) = sqrt(P/(π ε0 n c)) / (w0 q) · exp(−r²/(w0² q)), q = 1 + iz/Z0.
pub fn gaussian_field(beam: &Beam, r: f64, z: f64) -> Result<Complex64> {
    if beam.oam_l != 0 {
        return Err(Error::NotGaussian(beam.oam_l));
    }
    Ok(lg_envelope(beam, 0, r, z))
}

/// Single-ring Laguerre-Gaussian envelope with azimuthal phase exp(ilφ):
///
/// E(r, φ, z) = sqrt(P/(π |l|! ε0 n c)) · (√2 r)^|l| / (w0 q)^(|l|+1)
///              · exp(−r²/(w0² q)) · exp(ilφ)
pub fn lg_field(beam: &Beam, r: f64, phi: f64, z: f64) -> Result<Complex64> {
    let l = beam.oam_l;
    let a = check_oam(l)?;
    let env = lg_envelope(beam, a, r, z);
    if l == 0 {
        return Ok(env);
    }
    Ok(env * Complex64::from_polar(1.0, f64::from(l) * phi))
}

fn lg_envelope(beam: &Beam, abs_l: u32, r: f64, z: f64) -> Complex64 {
    let n = beam.refractive_index;
    let amp =
        (beam.power / (PI * FACTORIAL[abs_l as usize] * EPSILON_0 * n * SPEED_OF_LIGHT)).sqrt();
    let wq = beam.q_factor(z) * beam.waist;
    let radial = (2f64.sqrt() * r).powi(abs_l as i32);
    let gauss = (-(r * r) / (wq * beam.waist)).exp();
    amp * radial * gauss / wq.powi(abs_l as i32 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_1d, QuadOptions};
    use approx::assert_relative_eq;

    fn signal(l: i32) -> Beam {
        Beam::new(1560e-9, 33e-6, 1.816, 2.5e-3)
            .unwrap()
            .with_oam(l)
            .unwrap()
    }

    fn power_by_quadrature(beam: &Beam, z: f64) -> f64 {
        let cutoff = beam.radial_cutoff(z);
        let integral = integrate_1d(
            |r: f64| 2.0 * PI * r * lg_field(beam, r, 0.0, z).unwrap().norm_sqr(),
            0.0,
            cutoff,
            QuadOptions::relative(1e-12),
        )
        .unwrap();
        2.0 * EPSILON_0 * beam.refractive_index() * SPEED_OF_LIGHT * integral.value
    }

    #[test]
    fn rejects_invalid_beams() {
        assert!(Beam::new(0.0, 1e-5, 1.0, 1.0).is_err());
        assert!(Beam::new(1e-6, -1e-5, 1.0, 1.0).is_err());
        assert!(Beam::new(1e-6, 1e-5, 0.9, 1.0).is_err());
        assert!(Beam::new(1e-6, 1e-5, 1.0, -1.0).is_err());
        assert!(matches!(
            signal(0).with_oam(11),
            Err(Error::OamOutOfRange { l: 11, .. })
        ));
    }

    #[test]
    fn gaussian_peak_is_real_and_matches_closed_form() {
        let b = signal(0);
        let e = gaussian_field(&b, 0.0, 0.0).unwrap();
        let expected = (b.power() / (PI * EPSILON_0 * b.refractive_index() * SPEED_OF_LIGHT))
            .sqrt()
            / b.waist();
        assert_relative_eq!(e.re, expected, max_relative = 1e-14);
        assert_eq!(e.im, 0.0);
        let edge = gaussian_field(&b, b.waist(), 0.0).unwrap();
        assert_relative_eq!(edge.re, expected * (-1f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn gaussian_rejects_oam() {
        assert!(matches!(
            gaussian_field(&signal(1), 0.0, 0.0),
            Err(Error::NotGaussian(1))
        ));
    }

    #[test]
    fn power_normalization() {
        for l in [0, 1, 2, 3, 7, -4, 10] {
            let b = signal(l);
            let z0 = b.rayleigh_range();
            for z in [0.0, z0 / 2.0, z0] {
                assert_relative_eq!(power_by_quadrature(&b, z), b.power(), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn vortex_null_and_phase_winding() {
        let b = signal(1);
        assert_eq!(lg_field(&b, 0.0, 0.3, 0.0).unwrap().norm(), 0.0);
        let r = 20e-6;
        let a = lg_field(&b, r, 0.4, 1e-3).unwrap();
        let c = lg_field(&b, r, 0.4 + PI, 1e-3).unwrap();
        assert!((a + c).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn l2_ring_peaks_at_waist() {
        let b = signal(2);
        assert_relative_eq!(b.ring_radius(0.0), b.waist(), max_relative = 1e-15);
        let i = |r: f64| lg_field(&b, r, 0.0, 0.0).unwrap().norm_sqr();
        let w = b.waist();
        assert!(i(w) > i(0.99 * w));
        assert!(i(w) > i(1.01 * w));
    }

    #[test]
    fn l0_lg_matches_gaussian_pointwise() {
        let b = signal(0);
        for k in 0..100 {
            let r = k as f64 * 1e-6;
            let z = (k as f64 - 50.0) * 1e-4;
            let g = gaussian_field(&b, r, z).unwrap();
            let l = lg_field(&b, r, 1.234, z).unwrap();
            assert!((g - l).norm() <= 1e-12 * g.norm().max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn conjugate_symmetry_at_focus() {
        for l in 1..=5 {
            let p = signal(l);
            let m = signal(-l);
            for (r, phi) in [(10e-6, 0.3), (40e-6, 2.0), (5e-6, -1.1)] {
                let a = lg_field(&p, r, phi, 0.0).unwrap();
                let b = lg_field(&m, r, phi, 0.0).unwrap();
                assert!((a.conj() - b).norm() <= 1e-14 * a.norm());
            }
        }
    }

    #[test]
    fn serde_validates() {
        let bad = r#"{"wavelength":1e-6,"waist":-1.0,"refractive_index":1.5,"power":1.0}"#;
        assert!(serde_json::from_str::<Beam>(bad).is_err());
        let good =
            r#"{"wavelength":1e-6,"waist":1e-5,"refractive_index":1.5,"power":1.0,"oam_l":2}"#;
        let b: Beam = serde_json::from_str(good).unwrap();
        assert_eq!(b.oam_l(), 2);
    }

    proptest::proptest! {
        #[test]
        fn azimuthal_phase_winds_by_l(
            l in -10i32..=10,
            r in 1e-6f64..80e-6,
            phi1 in -3.0f64..3.0,
            phi2 in -3.0f64..3.0,
            z in -5e-3f64..5e-3,
        ) {
            let b = signal(l);
            let a1 = lg_field(&b, r, phi1, z).unwrap();
            let a2 = lg_field(&b, r, phi2, z).unwrap();
            proptest::prop_assume!(a1.norm() > 1e-200 && a2.norm() > 1e-200);
            let diff = (a2 / a1).arg();
            let expected = f64::from(l) * (phi2 - phi1);
            let wrapped = (diff - expected).rem_euclid(2.0 * PI);
            proptest::prop_assert!(wrapped < 1e-9 || (2.0 * PI - wrapped) < 1e-9);
        }
    }
}
