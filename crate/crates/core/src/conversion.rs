//! Conversion-efficiency and cavity-design calculators.
//!
//! Closed-form SFG power for a Gaussian pump of power P_p and an LG_l signal of
//! power P_s (undepleted pump, Δk = 0):
//!
//! ```text
//! P_SFG = 16π² d_eff² P_p P_s L 2^|l| h(|l|, ξ) / (ε0 c n_s n_SFG λ_SFG² λ_p)
//! ```
//!
//! The prefactor (linear in L, with 2^|l|) is the one reproduced by direct
//! integration of the field equations in [`crate::overlap::direct_sfg_oracle`].

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::beams::Beam;
use crate::constants::{check_oam, EPSILON_0, MAX_OAM, SPEED_OF_LIGHT};
use crate::error::{invalid, non_negative, positive, unit_interval, Error, Result};
use crate::overlap::{h_integral, FocusGeometry};

/// Tolerance used for h when it feeds a power or efficiency formula.
pub const DESIGN_H_TOL: f64 = 1e-9;

/// Nonlinear medium. Indices are per-wave inputs; no dispersion model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalParams {
    /// Crystal length (m).
    pub length: f64,
    /// Effective nonlinear coefficient (m/V).
    pub d_eff: f64,
    /// Poling period (m). Recorded only; Δk = 0 is assumed.
    pub poling_period: f64,
    pub n_pump: f64,
    pub n_signal: f64,
    pub n_sfg: f64,
}

impl CrystalParams {
    /// 10 mm type-I PPKTP SFG crystal (Λ = 9.375 μm). d_eff = 9.5 pm/V is
    /// (2/π)·d33 with d33 ≈ 15 pm/V; the indices are approximate KTP n_z values
    /// at 795, 1560 and 525 nm.
    pub fn reference() -> Self {
        Self {
            length: 10e-3,
            d_eff: 9.5e-12,
            poling_period: 9.375e-6,
            n_pump: 1.845,
            n_signal: 1.816,
            n_sfg: 1.889,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("length", self.length)?;
        positive("d_eff", self.d_eff)?;
        positive("poling_period", self.poling_period)?;
        positive("n_pump", self.n_pump)?;
        positive("n_signal", self.n_signal)?;
        positive("n_sfg", self.n_sfg)?;
        Ok(())
    }
}

/// Vacuum wavelengths of the three interacting waves (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wavelengths {
    pub pump: f64,
    pub signal: f64,
    pub sfg: f64,
}

impl Wavelengths {
    /// 795 nm pump, 1560 nm signal, 525 nm output.
    pub fn reference() -> Self {
        Self {
            pump: 795e-9,
            signal: 1560e-9,
            sfg: 525e-9,
        }
    }

    /// Output wavelength from energy conservation.
    pub fn from_pump_signal(pump: f64, signal: f64) -> Result<Self> {
        positive("pump", pump)?;
        positive("signal", signal)?;
        Ok(Self {
            pump,
            signal,
            sfg: 1.0 / (1.0 / pump + 1.0 / signal),
        })
    }

    pub fn validate(&self) -> Result<()> {
        positive("pump", self.pump)?;
        positive("signal", self.signal)?;
        positive("sfg", self.sfg)?;
        Ok(())
    }
}

/// Two-mode beam-splitter-like conversion channel with strength κL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConversionChannel {
    kappa_l: f64,
}

impl ConversionChannel {
    pub fn new(kappa_l: f64) -> Result<Self> {
        non_negative("kappa_l", kappa_l)?;
        Ok(Self { kappa_l })
    }

    /// Channel with single-photon efficiency sin²(κL) = `eta`, κL ∈ [0, π/2].
    pub fn from_efficiency(eta: f64) -> Result<Self> {
        unit_interval("eta", eta)?;
        Ok(Self {
            kappa_l: eta.sqrt().asin(),
        })
    }

    pub fn kappa_l(&self) -> f64 {
        self.kappa_l
    }

    /// sin²(κL).
    pub fn efficiency(&self) -> f64 {
        self.kappa_l.sin().powi(2)
    }
}

/// Mean photon numbers after the interaction length:
/// N_s' = cos²·N_s + sin²·N_SFG, N_SFG' = sin²·N_s + cos²·N_SFG.
pub fn heisenberg_evolve(
    channel: &ConversionChannel,
    n_signal_in: f64,
    n_sfg_in: f64,
) -> Result<(f64, f64)> {
    non_negative("n_signal_in", n_signal_in)?;
    non_negative("n_sfg_in", n_sfg_in)?;
    // cos² = 1 − sin² makes κL = π/2 an exact swap (sin(π/2) rounds to 1).
    let s2 = channel.kappa_l.sin().powi(2);
    let c2 = 1.0 - s2;
    Ok((
        c2 * n_signal_in + s2 * n_sfg_in,
        s2 * n_signal_in + c2 * n_sfg_in,
    ))
}

/// Efficiency at a given circulating pump power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpEfficiency {
    pub eta: f64,
    /// Pump exceeds P_max and the sin² law has turned over.
    pub over_rotated: bool,
}

/// η = sin²((π/2)·sqrt(P / P_max)).
pub fn pump_to_efficiency(circulating_pump: f64, p_max: f64) -> Result<PumpEfficiency> {
    non_negative("circulating_pump", circulating_pump)?;
    positive("p_max", p_max)?;
    let eta = (FRAC_PI_2 * (circulating_pump / p_max).sqrt())
        .sin()
        .powi(2);
    Ok(PumpEfficiency {
        eta,
        over_rotated: circulating_pump > p_max,
    })
}

/// P_max from a known overlap factor h(0, ξ):
/// ε0 c n_s n_SFG λ_p λ_s λ_SFG / (16π² d_eff² L h).
pub fn p_max_with_h(crystal: &CrystalParams, wavelengths: &Wavelengths, h0: f64) -> Result<f64> {
    crystal.validate()?;
    wavelengths.validate()?;
    positive("h0", h0)?;
    Ok(EPSILON_0
        * SPEED_OF_LIGHT
        * crystal.n_signal
        * crystal.n_sfg
        * wavelengths.pump
        * wavelengths.signal
        * wavelengths.sfg
        / (16.0 * PI * PI * crystal.d_eff.powi(2) * crystal.length * h0))
}

/// Circulating pump power for unity quantum efficiency.
pub fn p_max(
    crystal: &CrystalParams,
    wavelengths: &Wavelengths,
    geom: &FocusGeometry,
) -> Result<f64> {
    let h0 = h_integral(0, geom, DESIGN_H_TOL)?.value;
    p_max_with_h(crystal, wavelengths, h0)
}

#[allow(clippy::too_many_arguments)]
fn sfg_prefactor(
    d_eff: f64,
    length: f64,
    n_signal: f64,
    n_sfg: f64,
    lambda_pump: f64,
    lambda_sfg: f64,
) -> f64 {
    16.0 * PI * PI * d_eff * d_eff * length
        / (EPSILON_0 * SPEED_OF_LIGHT * n_signal * n_sfg * lambda_sfg * lambda_sfg * lambda_pump)
}

/// Closed-form SFG power for given powers, OAM index and geometry.
pub fn sfg_power_closed_form(
    crystal: &CrystalParams,
    wavelengths: &Wavelengths,
    pump_power: f64,
    signal_power: f64,
    l: i32,
    geom: &FocusGeometry,
) -> Result<f64> {
    crystal.validate()?;
    wavelengths.validate()?;
    non_negative("pump_power", pump_power)?;
    non_negative("signal_power", signal_power)?;
    let abs_l = check_oam(l)?;
    let h = h_integral(l, geom, DESIGN_H_TOL)?.value;
    let k = sfg_prefactor(
        crystal.d_eff,
        crystal.length,
        crystal.n_signal,
        crystal.n_sfg,
        wavelengths.pump,
        wavelengths.sfg,
    );
    Ok(k * pump_power * signal_power * 2f64.powi(abs_l as i32) * h)
}

/// SFG power for two concrete beams focused at the crystal centre. The
/// geometry and output wavelength follow from the beams; n_s is the signal
/// beam's index and n_SFG the crystal's.
pub fn sfg_power(pump: &Beam, signal: &Beam, crystal: &CrystalParams) -> Result<f64> {
    if pump.oam_l() != 0 {
        return Err(Error::NotGaussian(pump.oam_l()));
    }
    crystal.validate()?;
    let geom = FocusGeometry::from_beams(pump, signal, crystal.length)?;
    let wl = Wavelengths::from_pump_signal(pump.wavelength(), signal.wavelength())?;
    let per_beam = CrystalParams {
        n_signal: signal.refractive_index(),
        n_pump: pump.refractive_index(),
        ..*crystal
    };
    sfg_power_closed_form(
        &per_beam,
        &wl,
        pump.power(),
        signal.power(),
        signal.oam_l(),
        &geom,
    )
}

/// η_quantum = η_power·λ_SFG/λ_signal.
pub fn power_to_quantum_efficiency(
    eta_power: f64,
    lambda_signal: f64,
    lambda_sfg: f64,
) -> Result<f64> {
    non_negative("eta_power", eta_power)?;
    positive("lambda_signal", lambda_signal)?;
    positive("lambda_sfg", lambda_sfg)?;
    let q = eta_power * lambda_sfg / lambda_signal;
    if q > 1.0 {
        return Err(Error::ContractViolation(format!(
            "quantum efficiency {q} exceeds 1 (eta_power = {eta_power})"
        )));
    }
    Ok(q)
}

/// Comparison of a computed quantum efficiency with a reported one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumEfficiencyCheck {
    pub computed: f64,
    pub reported: f64,
    pub relative_discrepancy: f64,
    /// The discrepancy exceeds the requested tolerance.
    pub flagged: bool,
}

/// Converts `eta_power` and compares with `reported`, flagging relative
/// discrepancies above `rel_tol`.
pub fn check_reported_quantum_efficiency(
    eta_power: f64,
    reported: f64,
    lambda_signal: f64,
    lambda_sfg: f64,
    rel_tol: f64,
) -> Result<QuantumEfficiencyCheck> {
    positive("reported", reported)?;
    non_negative("rel_tol", rel_tol)?;
    let computed = power_to_quantum_efficiency(eta_power, lambda_signal, lambda_sfg)?;
    let relative_discrepancy = (computed - reported).abs() / reported;
    Ok(QuantumEfficiencyCheck {
        computed,
        reported,
        relative_discrepancy,
        flagged: relative_discrepancy > rel_tol,
    })
}

/// η(l)/η(0) for l = 0..=l_max at fixed pump and signal powers.
///
/// The ratio depends on the geometry alone; the default crystal and
/// wavelengths only set a common scale that cancels.
pub fn normalized_efficiency_curve(l_max: u32, geom: &FocusGeometry) -> Result<Vec<(i32, f64)>> {
    if l_max > MAX_OAM {
        return Err(invalid(
            "l_max",
            format!("must be <= {MAX_OAM}, got {l_max}"),
        ));
    }
    let crystal = CrystalParams::reference();
    let wl = Wavelengths::reference();
    let powers = (1.0, 1e-3);
    let base = sfg_power_closed_form(&crystal, &wl, powers.0, powers.1, 0, geom)?;
    let mut out = vec![(0, 1.0)];
    for l in 1..=l_max as i32 {
        let p = sfg_power_closed_form(&crystal, &wl, powers.0, powers.1, l, geom)?;
        out.push((l, p / base));
    }
    Ok(out)
}

/// Cavity operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyReport {
    /// P_SFG/P_signal. Exceeds 1 near full conversion since the pump supplies energy.
    pub eta_power: f64,
    pub eta_quantum: f64,
    pub p_max: f64,
    pub circulating_pump: f64,
    pub over_rotated: bool,
}

/// Quantum and power efficiency at `circulating_pump` for the design P_max.
pub fn efficiency_report(
    crystal: &CrystalParams,
    wavelengths: &Wavelengths,
    geom: &FocusGeometry,
    circulating_pump: f64,
) -> Result<EfficiencyReport> {
    let pm = p_max(crystal, wavelengths, geom)?;
    efficiency_report_with_p_max(wavelengths, pm, circulating_pump)
}

pub fn efficiency_report_with_p_max(
    wavelengths: &Wavelengths,
    p_max: f64,
    circulating_pump: f64,
) -> Result<EfficiencyReport> {
    let e = pump_to_efficiency(circulating_pump, p_max)?;
    Ok(EfficiencyReport {
        eta_power: e.eta * wavelengths.signal / wavelengths.sfg,
        eta_quantum: e.eta,
        p_max,
        circulating_pump,
        over_rotated: e.over_rotated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    fn geom(xi: f64) -> FocusGeometry {
        FocusGeometry::for_crystal(xi, 1.0, &Wavelengths::reference(), &CrystalParams::reference())
            .unwrap()
    }

    #[test]
    fn heisenberg_examples() {
        let swap = ConversionChannel::new(FRAC_PI_2).unwrap();
        let (s, f) = heisenberg_evolve(&swap, 1.0, 0.0).unwrap();
        assert_eq!((s, f), (0.0, 1.0));
        let id = ConversionChannel::new(0.0).unwrap();
        assert_eq!(heisenberg_evolve(&id, 3.0, 7.0).unwrap(), (3.0, 7.0));
        let half = ConversionChannel::new(FRAC_PI_4).unwrap();
        let (s, f) = heisenberg_evolve(&half, 1.0, 0.0).unwrap();
        assert_relative_eq!(s, 0.5, epsilon = 1e-15);
        assert_relative_eq!(f, 0.5, epsilon = 1e-15);
        assert!(heisenberg_evolve(&half, -1.0, 0.0).is_err());
        assert!(ConversionChannel::new(-0.1).is_err());
    }

    #[test]
    fn channel_from_efficiency_round_trips() {
        for eta in [0.0, 0.061, 0.5, 1.0] {
            assert_relative_eq!(
                ConversionChannel::from_efficiency(eta)
                    .unwrap()
                    .efficiency(),
                eta,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn pump_law_examples() {
        assert_relative_eq!(
            pump_to_efficiency(177.0, 177.0).unwrap().eta,
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(pump_to_efficiency(0.0, 177.0).unwrap().eta, 0.0);
        let e = pump_to_efficiency(22.3, 177.0).unwrap();
        assert!((e.eta - 0.280).abs() < 5e-4, "{}", e.eta);
        assert!(!e.over_rotated);
        assert!(pump_to_efficiency(200.0, 177.0).unwrap().over_rotated);
    }

    #[test]
    fn p_max_scaling() {
        let c = CrystalParams::reference();
        let wl = Wavelengths::reference();
        let base = p_max_with_h(&c, &wl, 0.242).unwrap();
        let longer = CrystalParams {
            length: 2.0 * c.length,
            ..c
        };
        let stronger = CrystalParams {
            d_eff: 2.0 * c.d_eff,
            ..c
        };
        assert_relative_eq!(
            p_max_with_h(&longer, &wl, 0.242).unwrap(),
            base / 2.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            p_max_with_h(&stronger, &wl, 0.242).unwrap(),
            base / 4.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn p_max_design_value() {
        let pm = p_max(
            &CrystalParams::reference(),
            &Wavelengths::reference(),
            &geom(0.3),
        )
        .unwrap();
        assert!((pm - 170.0).abs() <= 0.2 * 170.0, "P_max = {pm}");
    }

    #[test]
    fn quantum_efficiency_conversion() {
        let q = power_to_quantum_efficiency(0.66, 1560e-9, 525e-9).unwrap();
        assert!((q - 0.222).abs() < 5e-4);
        assert!(((q - 0.224) / 0.224).abs() < 0.02);
        assert_eq!(
            power_to_quantum_efficiency(0.0, 1560e-9, 525e-9).unwrap(),
            0.0
        );
        let q2 = power_to_quantum_efficiency(0.0893, 1560e-9, 525e-9).unwrap();
        assert!((q2 - 0.0301).abs() < 5e-5);
        assert!(((q2 - 0.0296) / 0.0296).abs() < 0.05);
        assert!(matches!(
            power_to_quantum_efficiency(3.5, 1560e-9, 525e-9),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn l1_reported_efficiency_is_flagged() {
        let c = check_reported_quantum_efficiency(0.259, 0.0833, 1560e-9, 525e-9, 0.02).unwrap();
        assert!(c.flagged);
        assert!(c.relative_discrepancy > 0.04 && c.relative_discrepancy < 0.05);
        let c0 = check_reported_quantum_efficiency(0.66, 0.224, 1560e-9, 525e-9, 0.02).unwrap();
        assert!(!c0.flagged);
    }

    #[test]
    fn sfg_power_is_bilinear() {
        let c = CrystalParams::reference();
        let wl = Wavelengths::reference();
        let g = geom(0.3);
        let p = sfg_power_closed_form(&c, &wl, 10.0, 1e-3, 1, &g).unwrap();
        assert_relative_eq!(
            sfg_power_closed_form(&c, &wl, 10.0, 2e-3, 1, &g).unwrap(),
            2.0 * p,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            sfg_power_closed_form(&c, &wl, 30.0, 1e-3, 1, &g).unwrap(),
            3.0 * p,
            max_relative = 1e-15
        );
        assert_eq!(
            sfg_power_closed_form(&c, &wl, 10.0, 0.0, 1, &g).unwrap(),
            0.0
        );
    }

    #[test]
    fn normalized_curve_decreases() {
        for xi in [0.1, 0.3, 1.0] {
            let curve = normalized_efficiency_curve(MAX_OAM, &geom(xi)).unwrap();
            assert_eq!(curve[0], (0, 1.0));
            for w in curve.windows(2) {
                assert!(w[1].1 < w[0].1, "xi={xi}: {:?}", w);
            }
        }
        assert!(normalized_efficiency_curve(MAX_OAM + 1, &geom(0.3)).is_err());
    }

    #[test]
    fn report_converts_to_power_efficiency() {
        let r = efficiency_report_with_p_max(&Wavelengths::reference(), 177.0, 22.3).unwrap();
        assert_relative_eq!(
            r.eta_power,
            r.eta_quantum * 1560.0 / 525.0,
            max_relative = 1e-12
        );
    }

    proptest::proptest! {
        #[test]
        fn photon_number_conserved(k in 0.0f64..20.0, a in 0.0f64..1e6, b in 0.0f64..1e6) {
            let ch = ConversionChannel::new(k).unwrap();
            let (s, f) = heisenberg_evolve(&ch, a, b).unwrap();
            proptest::prop_assert!(((s + f) - (a + b)).abs() <= 1e-12 * (a + b).max(1.0));
        }

        #[test]
        fn double_swap_is_identity(a in 0.0f64..1e6, b in 0.0f64..1e6) {
            let swap = ConversionChannel::new(FRAC_PI_2).unwrap();
            let (s, f) = heisenberg_evolve(&swap, a, b).unwrap();
            proptest::prop_assert_eq!(heisenberg_evolve(&swap, s, f).unwrap(), (a, b));
        }

        #[test]
        fn pump_law_monotone(p1 in 0.0f64..177.0, p2 in 0.0f64..177.0) {
            let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            proptest::prop_assert!(
                pump_to_efficiency(lo, 177.0).unwrap().eta <= pump_to_efficiency(hi, 177.0).unwrap().eta
            );
        }
    }
}
