//! Physical constants (SI, CODATA 2018) and library-wide limits.

/// Vacuum permittivity ε0 in F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Speed of light in vacuum in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Largest |l| accepted by the field and overlap routines.
pub const MAX_OAM: u32 = 10;

/// n! for n = 0..=MAX_OAM.
pub const FACTORIAL: [f64; MAX_OAM as usize + 1] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362_880.0,
    3_628_800.0,
];

/// Radial cutoff in units of the local beam radius w0·|1 + iz/Z0|.
/// Beyond it the field intensity is below 1e-27 of its peak.
pub const RADIAL_CUTOFF: f64 = 8.0;

pub(crate) fn check_oam(l: i32) -> crate::Result<u32> {
    let a = l.unsigned_abs();
    if a > MAX_OAM {
        Err(crate::Error::OamOutOfRange { l, max: MAX_OAM })
    } else {
        Ok(a)
    }
}
