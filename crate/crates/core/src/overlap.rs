//! Focusing/overlap factor h(l, ξ) for sum-frequency generation of a Gaussian
//! pump with an LG signal, plus a brute-force field-integration oracle.
//!
//! The overlap factor is
//!
//! ```text
//! h(l, ξ) = (1/ξ) ∬_{[-ξ, ξ]²} (1+ix)^l (1−iy)^l / D(x, y)^(l+1) dx dy
//! D(x, y) = (1+ix)(1−iy)[2 + i(x−y)/β] + α(1+ix/β)(1−iy/β)[2 + i(x−y)]
//! ```
//!
//! with x, y the longitudinal positions in units of the pump Rayleigh range,
//! α = w0s²/w0p² and β = Z0s/Z0p. The integrand maps to its complex conjugate
//! under x ↔ y, so the integral is real.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::beams::{lg_field, Beam};
use crate::constants::{check_oam, EPSILON_0, RADIAL_CUTOFF, SPEED_OF_LIGHT};
use crate::conversion::CrystalParams;
use crate::error::{invalid, positive, Error, Result};
use crate::quadrature::{gauss_legendre, integrate_2d, Integral, QuadOptions, Rect};

/// Dimensionless focusing geometry. β is always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FocusGeometry {
    xi: f64,
    alpha: f64,
    beta: f64,
}

impl FocusGeometry {
    /// Builds the geometry from ξ, α and the pump/signal wavelengths and
    /// indices: β = n_s·λ_p·α / (n_p·λ_s).
    pub fn new(
        xi: f64,
        alpha: f64,
        pump_wavelength: f64,
        signal_wavelength: f64,
        n_pump: f64,
        n_signal: f64,
    ) -> Result<Self> {
        positive("xi", xi)?;
        positive("alpha", alpha)?;
        positive("pump_wavelength", pump_wavelength)?;
        positive("signal_wavelength", signal_wavelength)?;
        positive("n_pump", n_pump)?;
        positive("n_signal", n_signal)?;
        let beta = n_signal * pump_wavelength * alpha / (n_pump * signal_wavelength);
        Ok(Self { xi, alpha, beta })
    }

    /// Geometry for the crystal's indices and the given wavelengths.
    pub fn for_crystal(
        xi: f64,
        alpha: f64,
        wavelengths: &crate::conversion::Wavelengths,
        crystal: &CrystalParams,
    ) -> Result<Self> {
        Self::new(
            xi,
            alpha,
            wavelengths.pump,
            wavelengths.signal,
            crystal.n_pump,
            crystal.n_signal,
        )
    }

    /// Geometry realised by two actual beams focused at the centre of a
    /// crystal of length `length`.
    pub fn from_beams(pump: &Beam, signal: &Beam, length: f64) -> Result<Self> {
        positive("length", length)?;
        let z0p = pump.rayleigh_range();
        let alpha = (signal.waist() / pump.waist()).powi(2);
        Self::new(
            length / (2.0 * z0p),
            alpha,
            pump.wavelength(),
            signal.wavelength(),
            pump.refractive_index(),
            signal.refractive_index(),
        )
    }

    /// Same α and β with a different ξ.
    pub fn with_xi(&self, xi: f64) -> Result<Self> {
        positive("xi", xi)?;
        Ok(Self { xi, ..*self })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Result of evaluating h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Quadrature error estimate plus the magnitude of the (ideally zero)
    /// imaginary part, both scaled by 1/ξ.
    #[serde(rename = "error")]
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

const MIN_TOL: f64 = 1e-10;
const MAX_TOL: f64 = 1e-3;
const H_EVALUATION_BUDGET: usize = 20_000_000;

/// The h(l, ξ) integrand at (x, y).
pub fn h_integrand(l: u32, geom: &FocusGeometry, x: f64, y: f64) -> Complex64 {
    let (alpha, beta) = (geom.alpha, geom.beta);
    let px = Complex64::new(1.0, x);
    let my = Complex64::new(1.0, -y);
    let px_b = Complex64::new(1.0, x / beta);
    let my_b = Complex64::new(1.0, -y / beta);
    let d = px * my * Complex64::new(2.0, (x - y) / beta)
        + alpha * px_b * my_b * Complex64::new(2.0, x - y);
    let l = l as i32;
    (px * my).powi(l) / d.powi(l + 1)
}

/// The raw double integral ∬_{[-ξ,ξ]²} of the h integrand, without the 1/ξ
/// prefactor. Negative `l` is mapped to |l|.
pub fn h_raw(l: i32, geom: &FocusGeometry, tol: f64) -> Result<Integral<Complex64>> {
    let abs_l = check_oam(l)?;
    if !(MIN_TOL..=MAX_TOL).contains(&tol) {
        return Err(invalid(
            "tol",
            format!("must lie in [{MIN_TOL:e}, {MAX_TOL:e}], got {tol}"),
        ));
    }
    let xi = geom.xi;
    let splits = (xi.ceil() as usize).clamp(2, 16);
    integrate_2d(
        |x, y| h_integrand(abs_l, geom, x, y),
        Rect::centered_square(xi),
        splits,
        QuadOptions::relative(tol).with_max_evaluations(H_EVALUATION_BUDGET),
    )
}

/// Evaluates h(l, ξ) to relative tolerance `tol` ∈ [1e-10, 1e-3].
pub fn h_integral(l: i32, geom: &FocusGeometry, tol: f64) -> Result<QuadratureResult> {
    let raw = h_raw(l, geom, tol).map_err(|e| match e {
        Error::QuadratureFailure {
            partial,
            error,
            evaluations,
        } => Error::QuadratureFailure {
            partial: partial / geom.xi,
            error: error / geom.xi,
            evaluations,
        },
        other => other,
    })?;
    Ok(QuadratureResult {
        value: raw.value.re / geom.xi,
        abs_error_estimate: (raw.error + raw.value.im.abs()) / geom.xi,
        evaluations: raw.evaluations,
    })
}

/// Resolution of the brute-force oracle: composite Gauss–Legendre with
/// `panels × order` nodes along each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleGrid {
    pub z_panels: usize,
    pub r_panels: usize,
    pub order: usize,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self {
            z_panels: 8,
            r_panels: 24,
            order: 12,
        }
    }
}

impl OracleGrid {
    fn refined(&self) -> Self {
        Self {
            z_panels: 2 * self.z_panels,
            r_panels: 2 * self.r_panels,
            order: self.order,
        }
    }
}

/// Maximum relative change between a grid and its refinement accepted by
/// [`direct_sfg_oracle`].
pub const ORACLE_REFINEMENT_LIMIT: f64 = 1e-3;

fn composite_nodes(a: f64, b: f64, panels: usize, rule: &(Vec<f64>, Vec<f64>)) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.0.len());
    for p in 0..panels {
        let c = a + h * (p as f64 + 0.5);
        for (x, w) in rule.0.iter().zip(&rule.1) {
            out.push((c + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

fn oracle_on_grid(
    pump: &Beam,
    signal: &Beam,
    crystal: &CrystalParams,
    grid: &OracleGrid,
) -> Result<f64> {
    let length = crystal.length;
    let lambda_sfg = 1.0 / (1.0 / pump.wavelength() + 1.0 / signal.wavelength());
    let omega_sfg = 2.0 * PI * SPEED_OF_LIGHT / lambda_sfg;
    let coupling = 2.0 * crystal.d_eff * omega_sfg / (crystal.n_sfg * SPEED_OF_LIGHT);

    let rule = gauss_legendre(grid.order);
    let zs = composite_nodes(-length / 2.0, length / 2.0, grid.z_panels, &rule);
    let r_max = RADIAL_CUTOFF
        * pump
            .radius_at(length / 2.0)
            .max(signal.radius_at(length / 2.0));
    let rs = composite_nodes(0.0, r_max, grid.r_panels, &rule);

    let mut radial = 0.0;
    for &(r, wr) in &rs {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(z, wz) in &zs {
            acc += lg_field(pump, r, 0.0, z)? * lg_field(signal, r, 0.0, z)? * wz;
        }
        // E_SFG = −i·coupling·∫ E_p E_s dz; |E_SFG|² carries no φ dependence.
        let e_sfg = Complex64::new(0.0, -coupling) * acc;
        radial += wr * r * e_sfg.norm_sqr();
    }
    Ok(2.0 * EPSILON_0 * SPEED_OF_LIGHT * crystal.n_sfg * 2.0 * PI * radial)
}

/// SFG power obtained by integrating the undepleted-pump coupled-wave
/// equation along z and the output intensity over the cross-section, using
/// the field expressions directly. The SFG wavelength follows from energy
/// conservation. Fails with [`Error::RefinementNeeded`] when doubling the
/// grid changes the result by more than [`ORACLE_REFINEMENT_LIMIT`].
pub fn direct_sfg_oracle(
    pump: &Beam,
    signal: &Beam,
    crystal: &CrystalParams,
    grid: OracleGrid,
) -> Result<f64> {
    if pump.oam_l() != 0 {
        return Err(Error::NotGaussian(pump.oam_l()));
    }
    if grid.z_panels == 0 || grid.r_panels == 0 || grid.order == 0 {
        return Err(invalid("grid", "panel counts and order must be >= 1"));
    }
    let coarse = oracle_on_grid(pump, signal, crystal, &grid)?;
    let fine = oracle_on_grid(pump, signal, crystal, &grid.refined())?;
    if fine == 0.0 {
        return Ok(0.0);
    }
    let relative_change = ((fine - coarse) / fine).abs();
    if relative_change > ORACLE_REFINEMENT_LIMIT {
        return Err(Error::RefinementNeeded {
            estimate: fine,
            relative_change,
        });
    }
    Ok(fine)
}

/// ξ maximizing h(l, ξ) on a range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiOptimum {
    pub xi: f64,
    pub h: f64,
    /// The maximum sits on an end of the searched range.
    pub on_boundary: bool,
}

const SCAN_POINTS: usize = 41;
const XI_REL_TOL: f64 = 1e-4;
const OPT_H_TOL: f64 = 1e-9;

/// Maximizes h(l, ξ) over `xi_range` for the α and β of `template`.
///
/// A uniform pre-scan brackets the maximum, then golden-section search
/// narrows it to a relative width of 1e-4.
pub fn optimize_xi(l: i32, template: &FocusGeometry, xi_range: (f64, f64)) -> Result<XiOptimum> {
    let (lo, hi) = xi_range;
    if !(lo > 0.0 && lo <= hi && hi <= 10.0) {
        return Err(invalid(
            "xi_range",
            format!("must satisfy 0 < lo <= hi <= 10, got [{lo}, {hi}]"),
        ));
    }
    let h_at =
        |xi: f64| -> Result<f64> { Ok(h_integral(l, &template.with_xi(xi)?, OPT_H_TOL)?.value) };

    if hi - lo <= XI_REL_TOL * hi {
        return Ok(XiOptimum {
            xi: lo,
            h: h_at(lo)?,
            on_boundary: true,
        });
    }

    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| {
            if i + 1 == SCAN_POINTS {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect();
    let values = grid.iter().map(|&x| h_at(x)).collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > values[b] { i } else { b });

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(SCAN_POINTS - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut hc = h_at(c)?;
    let mut hd = h_at(d)?;
    while (b - a) > XI_REL_TOL * 0.5 * (a + b) {
        if hc >= hd {
            b = d;
            d = c;
            hd = hc;
            c = b - inv_phi * (b - a);
            hc = h_at(c)?;
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + inv_phi * (b - a);
            hd = h_at(d)?;
        }
    }
    let mut xi = 0.5 * (a + b);
    let mut h = h_at(xi)?;
    // The scan endpoint itself may beat the interior candidate.
    if values[best] > h {
        xi = grid[best];
        h = values[best];
    }
    let on_boundary = (xi - lo).abs() <= XI_REL_TOL * hi || (hi - xi).abs() <= XI_REL_TOL * hi;
    Ok(XiOptimum { xi, h, on_boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conversion::Wavelengths;
    use approx::assert_relative_eq;

    fn reference_geometry(xi: f64) -> FocusGeometry {
        FocusGeometry::for_crystal(xi, 1.0, &Wavelengths::reference(), &CrystalParams::reference())
            .unwrap()
    }

    /// Independent check: tensor Gauss–Legendre on a fine uniform grid.
    fn h_by_gauss_legendre(l: u32, geom: &FocusGeometry, panels: usize) -> f64 {
        let rule = gauss_legendre(16);
        let nodes = composite_nodes(-geom.xi, geom.xi, panels, &rule);
        let mut s = Complex64::new(0.0, 0.0);
        for &(x, wx) in &nodes {
            for &(y, wy) in &nodes {
                s += h_integrand(l, geom, x, y) * (wx * wy);
            }
        }
        s.re / geom.xi
    }

    #[test]
    fn beta_is_derived() {
        let g = FocusGeometry::new(0.3, 2.0, 795e-9, 1560e-9, 1.845, 1.816).unwrap();
        assert_relative_eq!(
            g.beta(),
            1.816 * 795e-9 * 2.0 / (1.845 * 1560e-9),
            max_relative = 1e-15
        );
        assert!(FocusGeometry::new(0.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(FocusGeometry::new(0.3, -1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn from_beams_reproduces_definitions() {
        let pump = Beam::new(795e-9, 30e-6, 1.845, 1.0).unwrap();
        let signal = Beam::new(1560e-9, 45e-6, 1.816, 1.0).unwrap();
        let g = FocusGeometry::from_beams(&pump, &signal, 0.01).unwrap();
        assert_relative_eq!(
            g.xi(),
            0.01 / (2.0 * pump.rayleigh_range()),
            max_relative = 1e-14
        );
        assert_relative_eq!(g.alpha(), 2.25, max_relative = 1e-14);
        assert_relative_eq!(
            g.beta(),
            signal.rayleigh_range() / pump.rayleigh_range(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn reference_value_at_xi_0_3() {
        let r = h_integral(0, &reference_geometry(0.3), 1e-8).unwrap();
        assert!((r.value - 0.242).abs() <= 0.005, "h = {}", r.value);
    }

    #[test]
    fn small_xi_limit() {
        let r = h_integral(0, &reference_geometry(1e-3), 1e-8).unwrap();
        assert!(((r.value - 1e-3) / 1e-3).abs() < 0.01);
    }

    #[test]
    fn agrees_with_fixed_gauss_legendre() {
        for l in [0, 1, 2, 5] {
            for xi in [0.1, 0.3, 1.0, 3.0] {
                let g = reference_geometry(xi);
                let adaptive = h_integral(l, &g, 1e-10).unwrap().value;
                let fixed = h_by_gauss_legendre(l as u32, &g, 8);
                assert_relative_eq!(adaptive, fixed, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn integral_is_real() {
        for l in 0..=4 {
            for xi in [0.1, 0.3, 1.0, 2.5] {
                let raw = h_raw(l, &reference_geometry(xi), 1e-9).unwrap();
                assert!(raw.value.im.abs() / raw.value.re.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn depends_on_abs_l_only() {
        let g = reference_geometry(0.7);
        for l in 1..=4 {
            let p = h_integral(l, &g, 1e-9).unwrap();
            let m = h_integral(-l, &g, 1e-9).unwrap();
            assert_eq!(p.value.to_bits(), m.value.to_bits());
        }
    }

    #[test]
    fn tolerance_bounds_enforced() {
        let g = reference_geometry(0.3);
        assert!(h_integral(0, &g, 1e-12).is_err());
        assert!(h_integral(0, &g, 1e-2).is_err());
        assert!(h_integral(11, &g, 1e-6).is_err());
    }

    #[test]
    fn bit_identical_repeats() {
        let g = reference_geometry(1.3);
        let a = h_integral(2, &g, 1e-9).unwrap();
        let b = h_integral(2, &g, 1e-9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_range_returns_endpoint() {
        let opt = optimize_xi(0, &reference_geometry(1.0), (0.3, 0.3)).unwrap();
        assert_eq!(opt.xi, 0.3);
        assert!((opt.h - 0.242).abs() <= 0.005);
        assert!(opt.on_boundary);
    }

    #[test]
    fn optimum_dominates_samples() {
        let template = reference_geometry(1.0);
        let opt = optimize_xi(0, &template, (0.05, 5.0)).unwrap();
        assert!(!opt.on_boundary);
        for k in 0..20 {
            let xi = 0.05 + (5.0 - 0.05) * k as f64 / 19.0;
            let h = h_integral(0, &template.with_xi(xi).unwrap(), 1e-9)
                .unwrap()
                .value;
            assert!(opt.h >= h - 1e-12, "h({xi}) = {h} > {}", opt.h);
        }
    }

    #[test]
    fn l0_optimum_location() {
        // Brute-force scan of h(0, ξ) on a 0.01 grid brackets the maximum
        // between 0.55 and 0.60 for the default wavelengths and indices.
        let template = reference_geometry(1.0);
        let scan: Vec<(f64, f64)> = (1..=300)
            .map(|k| {
                let xi = k as f64 * 0.01;
                (
                    xi,
                    h_by_gauss_legendre(0, &template.with_xi(xi).unwrap(), 4),
                )
            })
            .collect();
        let best = scan
            .iter()
            .cloned()
            .fold((0.0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
        let opt = optimize_xi(0, &template, (0.05, 5.0)).unwrap();
        assert!((opt.xi - best.0).abs() <= 0.01, "{} vs {}", opt.xi, best.0);
        assert!((0.55..=0.60).contains(&opt.xi));
    }

    #[test]
    fn boundary_maximum_is_flagged() {
        let opt = optimize_xi(0, &reference_geometry(1.0), (0.05, 0.2)).unwrap();
        assert!(opt.on_boundary);
        assert_relative_eq!(opt.xi, 0.2, max_relative = 1e-4);
    }

    #[test]
    fn oracle_rejects_coarse_grid_and_vortex_pump() {
        let crystal = CrystalParams::reference();
        let pump = Beam::new(795e-9, 20e-6, 1.845, 10.0).unwrap();
        let signal = Beam::new(1560e-9, 20e-6, 1.816, 1e-3)
            .unwrap()
            .with_oam(2)
            .unwrap();
        let coarse = OracleGrid {
            z_panels: 1,
            r_panels: 1,
            order: 2,
        };
        assert!(matches!(
            direct_sfg_oracle(&pump, &signal, &crystal, coarse),
            Err(Error::RefinementNeeded { .. })
        ));
        assert!(matches!(
            direct_sfg_oracle(&signal, &pump, &crystal, OracleGrid::default()),
            Err(Error::NotGaussian(2))
        ));
    }

    #[test]
    fn oracle_is_linear_in_signal_power() {
        let crystal = CrystalParams::reference();
        let pump = Beam::new(795e-9, 25e-6, 1.845, 20.0).unwrap();
        let signal = Beam::new(1560e-9, 25e-6, 1.816, 1e-3)
            .unwrap()
            .with_oam(1)
            .unwrap();
        let p1 = direct_sfg_oracle(&pump, &signal, &crystal, OracleGrid::default()).unwrap();
        let p2 = direct_sfg_oracle(
            &pump,
            &signal.with_power(2e-3).unwrap(),
            &crystal,
            OracleGrid::default(),
        )
        .unwrap();
        let p0 = direct_sfg_oracle(
            &pump,
            &signal.with_power(0.0).unwrap(),
            &crystal,
            OracleGrid::default(),
        )
        .unwrap();
        assert_relative_eq!(p2, 2.0 * p1, max_relative = 1e-13);
        assert_eq!(p0, 0.0);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn positive_real_and_sign_blind(l in -3i32..=3, xi in 0.05f64..3.0, alpha in 0.3f64..3.0) {
            let g = FocusGeometry::new(xi, alpha, 795e-9, 1560e-9, 1.845, 1.816).unwrap();
            let raw = h_raw(l, &g, 1e-9).unwrap().value;
            proptest::prop_assert!(raw.re > 0.0);
            proptest::prop_assert!(raw.im.abs() < 1e-8 * raw.re);
            let plus = h_integral(l.abs(), &g, 1e-9).unwrap().value;
            proptest::prop_assert_eq!(h_integral(-l.abs(), &g, 1e-9).unwrap().value, plus);
        }
    }
}
