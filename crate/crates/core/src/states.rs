//! OAM ⊗ polarization states of the Sagnac-prepared signal photon.
//!
//! Sign convention: the up-converted state after the 22.5° half-wave plate
//! and vertical projection is (|l⟩ − e^{iθ}|−l⟩)/√2 ⊗ |V⟩. The interference
//! curve [`coincidence_curve`] is written for the phase with that minus sign
//! absorbed, so it equals the projector expectation evaluated at θ + π.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::constants::{check_oam, FACTORIAL};
use crate::error::{invalid, non_negative, positive, unit_interval, Error, Result};
use crate::rng::{stream_key, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Polarization {
    H,
    V,
}

/// Superposition over (OAM index, polarization) kets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OamPolState {
    terms: BTreeMap<(i32, Polarization), Complex64>,
}

const NULL_NORM: f64 = 1e-30;

impl OamPolState {
    /// State from explicit terms. Keys must be unique; no normalization is
    /// applied.
    pub fn from_terms<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i32, Polarization, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (l, pol, amp) in terms {
            check_oam(l)?;
            if map.insert((l, pol), amp).is_some() {
                return Err(invalid(
                    "terms",
                    format!("duplicate basis ket ({l}, {pol:?})"),
                ));
            }
        }
        Ok(Self { terms: map })
    }

    /// |l⟩ ⊗ |pol⟩.
    pub fn basis(l: i32, pol: Polarization) -> Result<Self> {
        Self::from_terms([(l, pol, Complex64::new(1.0, 0.0))])
    }

    pub fn amplitude(&self, l: i32, pol: Polarization) -> Complex64 {
        self.terms.get(&(l, pol)).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, Polarization, Complex64)> + '_ {
        self.terms.iter().map(|(&(l, p), &a)| (l, p, a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.terms
            .iter()
            .filter_map(|(k, a)| other.terms.get(k).map(|b| a.conj() * b))
            .sum()
    }

    /// Probability of each polarization.
    pub fn polarization_probabilities(&self) -> (f64, f64) {
        self.terms
            .iter()
            .fold((0.0, 0.0), |(h, v), (&(_, p), a)| match p {
                Polarization::H => (h + a.norm_sqr(), v),
                Polarization::V => (h, v + a.norm_sqr()),
            })
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, a)| (*k, a * factor)).collect(),
        }
    }
}

/// (|H⟩|l⟩ + e^{iθ}|V⟩|−l⟩)/√2.
pub fn prepare_sagnac(l: i32, theta: f64) -> Result<OamPolState> {
    if l < 1 {
        return Err(Error::DegenerateState(format!(
            "Sagnac superposition needs l >= 1, got {l}"
        )));
    }
    check_oam(l)?;
    OamPolState::from_terms([
        (l, Polarization::H, Complex64::new(FRAC_1_SQRT_2, 0.0)),
        (
            -l,
            Polarization::V,
            Complex64::from_polar(FRAC_1_SQRT_2, theta),
        ),
    ])
}

/// Half-wave plate at 22.5°: |H⟩ → (|H⟩+|V⟩)/√2, |V⟩ → (|H⟩−|V⟩)/√2.
pub fn hwp_transform(state: &OamPolState) -> OamPolState {
    let mut out: BTreeMap<(i32, Polarization), Complex64> = BTreeMap::new();
    for (&(l, pol), &a) in &state.terms {
        let a = a * FRAC_1_SQRT_2;
        let (h, v) = match pol {
            Polarization::H => (a, a),
            Polarization::V => (a, -a),
        };
        *out.entry((l, Polarization::H)).or_default() += h;
        *out.entry((l, Polarization::V)).or_default() += v;
    }
    out.retain(|_, a| a.norm_sqr() > 0.0);
    OamPolState { terms: out }
}

/// Keeps the V-polarized part (the phase-matched one), renormalized, and the
/// probability of that outcome.
pub fn upconvert_vertical_projection(state: &OamPolState) -> Result<(OamPolState, f64)> {
    let total = state.norm_sqr();
    let kept = OamPolState {
        terms: state
            .terms
            .iter()
            .filter(|((_, p), _)| *p == Polarization::V)
            .map(|(k, a)| (*k, *a))
            .collect(),
    };
    let p = kept.norm_sqr();
    if p <= NULL_NORM * total.max(1.0) {
        return Err(Error::NullProjection);
    }
    Ok((kept.scaled(1.0 / p.sqrt()), p))
}

/// Pinhole-and-fiber filter |Π⟩⟨Π| with |Π⟩ = (|l⟩ + e^{iφ}|−l⟩)/√2 ⊗ |V⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOp {
    bra: OamPolState,
    pinhole_phi: f64,
}

impl ProjectionOp {
    pub fn new(l: i32, pinhole_phi: f64) -> Result<Self> {
        if l < 1 {
            return Err(invalid("l", "pinhole projector needs l >= 1"));
        }
        let bra = OamPolState::from_terms([
            (l, Polarization::V, Complex64::new(FRAC_1_SQRT_2, 0.0)),
            (
                -l,
                Polarization::V,
                Complex64::from_polar(FRAC_1_SQRT_2, pinhole_phi),
            ),
        ])?;
        Ok(Self { bra, pinhole_phi })
    }

    pub fn pinhole_phi(&self) -> f64 {
        self.pinhole_phi
    }

    /// ⟨Φ|P|Φ⟩ = |⟨Π|Φ⟩|².
    pub fn expectation(&self, state: &OamPolState) -> f64 {
        self.bra.inner(state).norm_sqr()
    }
}

/// Relative coincidence rate cos²((θ − φ)/2), peak 1.
pub fn coincidence_curve(theta: f64, pinhole_phi: f64) -> f64 {
    (0.5 * (theta - pinhole_phi)).cos().powi(2)
}

/// Assumed mapping from the Sagnac input HWP axis angle to θ: θ = 4·angle.
pub fn theta_from_hwp_angle(angle: f64) -> f64 {
    4.0 * angle
}

/// Transverse intensity of a state built on a single |l| (a ± pair or one
/// ket), normalized so ∬ I dA equals the state's norm².
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntensityPattern {
    abs_l: u32,
    waist: f64,
    /// (amplitude of +|l|, amplitude of −|l|) per polarization.
    components: Vec<(Complex64, Complex64)>,
}

impl IntensityPattern {
    pub fn abs_l(&self) -> u32 {
        self.abs_l
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    /// Power-normalized ring profile (2r²/w²)^|l| e^{−2r²/w²} · 2/(π w² |l|!).
    pub fn donut(&self, r: f64) -> f64 {
        let w2 = self.waist * self.waist;
        let u = 2.0 * r * r / w2;
        u.powi(self.abs_l as i32) * (-u).exp() * 2.0 / (PI * w2 * FACTORIAL[self.abs_l as usize])
    }

    /// I(r, φ).
    pub fn eval(&self, r: f64, phi: f64) -> f64 {
        let l = f64::from(self.abs_l);
        let e_plus = Complex64::from_polar(1.0, l * phi);
        let e_minus = e_plus.conj();
        let angular: f64 = if self.abs_l == 0 {
            self.components.iter().map(|(a, _)| a.norm_sqr()).sum()
        } else {
            self.components
                .iter()
                .map(|(a, b)| (a * e_plus + b * e_minus).norm_sqr())
                .sum()
        };
        angular * self.donut(r)
    }

    pub fn eval_xy(&self, x: f64, y: f64) -> f64 {
        self.eval(x.hypot(y), y.atan2(x))
    }

    /// Radius of maximum intensity, w·sqrt(|l|/2).
    pub fn ring_radius(&self) -> f64 {
        self.waist * (f64::from(self.abs_l) / 2.0).sqrt()
    }
}

/// Intensity pattern of a state containing a single |l| value.
///
/// For (|l⟩ + e^{iθ}|−l⟩)/√2 this is ∝ r^{2l} e^{−2r²/w²} cos²(lφ − θ/2): 2l
/// petals with angular period π/l. A single |l⟩ gives the uniform donut.
pub fn intensity_pattern(state: &OamPolState, waist: f64) -> Result<IntensityPattern> {
    positive("waist", waist)?;
    let mut abs_values: Vec<u32> = state.terms().map(|(l, _, _)| l.unsigned_abs()).collect();
    abs_values.dedup();
    abs_values.sort_unstable();
    abs_values.dedup();
    let abs_l = match abs_values.as_slice() {
        [a] => *a,
        [] => return Err(Error::UnsupportedState("empty state".into())),
        many => {
            return Err(Error::UnsupportedState(format!(
                "pattern needs a single |l|, state has {many:?}"
            )))
        }
    };
    let l = abs_l as i32;
    let components = [Polarization::H, Polarization::V]
        .into_iter()
        .map(|p| {
            if l == 0 {
                (state.amplitude(0, p), Complex64::default())
            } else {
                (state.amplitude(l, p), state.amplitude(-l, p))
            }
        })
        .filter(|(a, b)| a.norm_sqr() + b.norm_sqr() > 0.0)
        .collect();
    Ok(IntensityPattern {
        abs_l,
        waist,
        components,
    })
}

/// V = (max − min)/(max + min).
pub fn visibility(max_count: f64, min_count: f64) -> Result<f64> {
    non_negative("min_count", min_count)?;
    if max_count < min_count {
        return Err(invalid("max_count", "must be >= min_count"));
    }
    if max_count + min_count == 0.0 {
        return Err(Error::UndefinedVisibility);
    }
    Ok((max_count - min_count) / (max_count + min_count))
}

/// F = (1 + V)/2 for the output ρ = V|Φ⟩⟨Φ| + (1 − V)·I/2.
pub fn fidelity_from_visibility(v: f64) -> Result<f64> {
    unit_interval("visibility", v)?;
    Ok(0.5 * (1.0 + v))
}

/// Least-squares fit of A·cos²((θ − φ0)/2) + B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeFit {
    pub amplitude: f64,
    pub offset: f64,
    pub phase: f64,
    /// A/(A + 2B).
    pub visibility: f64,
    pub fidelity: f64,
}

/// Fits a fringe by linear least squares on c0 + c1·cos θ + c2·sin θ.
pub fn fit_fringe(thetas: &[f64], counts: &[f64]) -> Result<FringeFit> {
    if thetas.len() != counts.len() {
        return Err(invalid("counts", "length differs from thetas"));
    }
    if thetas.len() < 3 {
        return Err(Error::InsufficientData(
            "fringe fit needs >= 3 phases".into(),
        ));
    }
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (&t, &c) in thetas.iter().zip(counts) {
        let basis = [1.0, t.cos(), t.sin()];
        for i in 0..3 {
            rhs[i] += basis[i] * c;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let [c0, c1, c2] = solve3(m, rhs)
        .ok_or_else(|| Error::InsufficientData("fringe phases do not span a full period".into()))?;
    let half_amp = c1.hypot(c2);
    let amplitude = 2.0 * half_amp;
    let offset = c0 - half_amp;
    let phase = c2.atan2(c1);
    let denom = amplitude + 2.0 * offset;
    if denom <= 0.0 {
        return Err(Error::UndefinedVisibility);
    }
    let v = (amplitude / denom).clamp(0.0, 1.0);
    Ok(FringeFit {
        amplitude,
        offset,
        phase,
        visibility: v,
        fidelity: fidelity_from_visibility(v)?,
    })
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 * m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())) {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    Some(x)
}

/// A phase scan of the filtered coincidence rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FringeScan {
    pub thetas: Vec<f64>,
    pub counts: Vec<f64>,
}

/// Coincidence counts over `phases` equally spaced θ ∈ [0, 2π) for an output
/// state with visibility `v` (depolarized fraction 1 − v):
/// peak·(v·cos²((θ − φ)/2) + (1 − v)/2). With `seed` the counts are Poisson
/// draws; without, the expected values.
pub fn fringe_scan(
    v: f64,
    peak_counts: f64,
    pinhole_phi: f64,
    phases: usize,
    seed: Option<u64>,
) -> Result<FringeScan> {
    unit_interval("visibility", v)?;
    non_negative("peak_counts", peak_counts)?;
    if phases < 3 {
        return Err(invalid("phases", "need at least 3"));
    }
    let thetas: Vec<f64> = (0..phases)
        .map(|k| 2.0 * PI * k as f64 / phases as f64)
        .collect();
    let counts = thetas
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mean = peak_counts * (v * coincidence_curve(t, pinhole_phi) + 0.5 * (1.0 - v));
            match seed {
                None => Ok(mean),
                Some(s) if mean > 0.0 => {
                    let mut rng = stream_rng(s, stream_key(FRINGE_DOMAIN, k as u64));
                    let d =
                        Poisson::new(mean).map_err(|e| invalid("peak_counts", e.to_string()))?;
                    Ok(d.sample(&mut rng))
                }
                Some(_) => Ok(0.0),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FringeScan { thetas, counts })
}

const FRINGE_DOMAIN: u16 = 3;
