//! Deterministic adaptive quadrature.
//!
//! Two routines are provided:
//!
//! * [`integrate_1d`]: globally adaptive 15-point Gauss–Kronrod on an interval.
//! * [`integrate_2d`]: globally adaptive tensor-product Gauss–Kronrod (15×15
//!   nodes, embedded 7×7 Gauss rule) on a rectangle, subdividing the panel with
//!   the largest error estimate into four quadrants.
//!
//! Both work for any [`QuadValue`] (real or complex integrands). The panel
//! queue is ordered by (error, creation index), so a given input always yields
//! the same subdivision sequence and bit-identical output.
//!
//! [`gauss_legendre`] computes fixed Gauss–Legendre rules of arbitrary order and
//! is used by the brute-force field oracle; it shares no code with the
//! Kronrod tables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (non-negative half).
/// Odd indices are shared with the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Weights of the 7-point Gauss rule at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The 15 Kronrod nodes on [-1, 1] in ascending order, with Kronrod weights
/// and Gauss weights (zero where the node is Kronrod-only).
fn kronrod_nodes() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for i in 0..8 {
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        out[i] = (-XGK[i], WGK[i], wg);
        out[14 - i] = (XGK[i], WGK[i], wg);
    }
    out
}

/// Values that can be integrated: closed under addition and real scaling,
/// with a magnitude for error control.
pub trait QuadValue: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Convergence controls. Iteration stops once the summed error estimate is
/// below `max(rel_tol·|value|, abs_tol)`.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evaluations: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_evaluations: 4_000_000,
        }
    }
}

impl QuadOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_evaluations(mut self, n: usize) -> Self {
        self.max_evaluations = n;
        self
    }

    fn tolerance(&self, value: f64) -> f64 {
        (self.rel_tol * value).max(self.abs_tol)
    }
}

/// Converged integral with its error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel<T, R> {
    region: R,
    value: T,
    error: f64,
    id: usize,
}

impl<T, R> PartialEq for Panel<T, R> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T, R> Eq for Panel<T, R> {}
impl<T, R> PartialOrd for Panel<T, R> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T, R> Ord for Panel<T, R> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on error; older panels first on ties.
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Sums panel values in creation order so the result does not depend on the
/// order in which the heap happens to yield them.
fn sum_panels<T: QuadValue, R>(panels: Vec<Panel<T, R>>) -> (T, f64) {
    let mut panels = panels;
    panels.sort_by_key(|p| p.id);
    panels
        .iter()
        .fold((T::zero(), 0.0), |(v, e), p| (v + p.value, e + p.error))
}

fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut k = T::zero();
    let mut g = T::zero();
    for (x, wk, wg) in kronrod_nodes() {
        let v = f(center + half * x);
        k = k + v * wk;
        if wg != 0.0 {
            g = g + v * wg;
        }
    }
    let k = k * half;
    let g = g * half;
    let err = (k + g * -1.0).magnitude();
    (k, err)
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate_1d<T, F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Integral<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let mut heap = BinaryHeap::new();
    let mut next_id = 0;
    let mut evaluations = 0;
    let mut total = T::zero();
    let mut total_err = 0.0;

    let (v, e) = gk15(&mut f, a, b);
    evaluations += 15;
    total = total + v;
    total_err += e;
    heap.push(Panel {
        region: (a, b),
        value: v,
        error: e,
        id: next_id,
    });
    next_id += 1;

    while total_err > opts.tolerance(total.magnitude()) {
        if evaluations + 30 > opts.max_evaluations || !total.is_finite_value() {
            let (value, error) = sum_panels(heap.into_vec());
            return Err(Error::QuadratureFailure {
                partial: value.magnitude(),
                error,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let (lo, hi) = worst.region;
        let mid = 0.5 * (lo + hi);
        total = total + worst.value * -1.0;
        total_err -= worst.error;
        for (s, t) in [(lo, mid), (mid, hi)] {
            let (v, e) = gk15(&mut f, s, t);
            evaluations += 15;
            total = total + v;
            total_err += e;
            heap.push(Panel {
                region: (s, t),
                value: v,
                error: e,
                id: next_id,
            });
            next_id += 1;
        }
    }

    let (value, error) = sum_panels(heap.into_vec());
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    /// The square `[-h, h]²`.
    pub fn centered_square(h: f64) -> Self {
        Self::new(-h, h, -h, h)
    }

    fn quadrants(&self) -> [Rect; 4] {
        let xm = 0.5 * (self.x0 + self.x1);
        let ym = 0.5 * (self.y0 + self.y1);
        [
            Rect::new(self.x0, xm, self.y0, ym),
            Rect::new(xm, self.x1, self.y0, ym),
            Rect::new(self.x0, xm, ym, self.y1),
            Rect::new(xm, self.x1, ym, self.y1),
        ]
    }
}

fn gk15_2d<T: QuadValue, F: FnMut(f64, f64) -> T>(f: &mut F, r: &Rect) -> (T, f64) {
    let cx = 0.5 * (r.x0 + r.x1);
    let hx = 0.5 * (r.x1 - r.x0);
    let cy = 0.5 * (r.y0 + r.y1);
    let hy = 0.5 * (r.y1 - r.y0);
    let nodes = kronrod_nodes();
    let mut k = T::zero();
    let mut g = T::zero();
    for &(x, wkx, wgx) in &nodes {
        let px = cx + hx * x;
        let mut kr = T::zero();
        let mut gr = T::zero();
        for &(y, wky, wgy) in &nodes {
            let v = f(px, cy + hy * y);
            kr = kr + v * wky;
            if wgy != 0.0 {
                gr = gr + v * wgy;
            }
        }
        k = k + kr * wkx;
        if wgx != 0.0 {
            g = g + gr * wgx;
        }
    }
    let area = hx * hy;
    let k = k * area;
    let g = g * area;
    let err = (k + g * -1.0).magnitude();
    (k, err)
}

/// Adaptive tensor-product Gauss–Kronrod cubature of `f(x, y)` over `region`.
///
/// `initial_splits` pre-divides each axis into that many equal parts, which
/// helps when the integrand has structure the first panel would miss.
pub fn integrate_2d<T, F>(
    mut f: F,
    region: Rect,
    initial_splits: usize,
    opts: QuadOptions,
) -> Result<Integral<T>>
where
    T: QuadValue,
    F: FnMut(f64, f64) -> T,
{
    const PER_PANEL: usize = 225;
    let n = initial_splits.max(1);
    let mut heap = BinaryHeap::new();
    let mut next_id = 0;
    let mut evaluations = 0;
    let mut total = T::zero();
    let mut total_err = 0.0;

    let dx = (region.x1 - region.x0) / n as f64;
    let dy = (region.y1 - region.y0) / n as f64;
    for j in 0..n {
        for i in 0..n {
            let x0 = region.x0 + dx * i as f64;
            let y0 = region.y0 + dy * j as f64;
            let x1 = if i + 1 == n { region.x1 } else { x0 + dx };
            let y1 = if j + 1 == n { region.y1 } else { y0 + dy };
            let rect = Rect::new(x0, x1, y0, y1);
            let (v, e) = gk15_2d(&mut f, &rect);
            evaluations += PER_PANEL;
            total = total + v;
            total_err += e;
            heap.push(Panel {
                region: rect,
                value: v,
                error: e,
                id: next_id,
            });
            next_id += 1;
        }
    }

    while total_err > opts.tolerance(total.magnitude()) {
        if evaluations + 4 * PER_PANEL > opts.max_evaluations || !total.is_finite_value() {
            let (value, error) = sum_panels(heap.into_vec());
            return Err(Error::QuadratureFailure {
                partial: value.magnitude(),
                error,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        total = total + worst.value * -1.0;
        total_err -= worst.error;
        for rect in worst.region.quadrants() {
            let (v, e) = gk15_2d(&mut f, &rect);
            evaluations += PER_PANEL;
            total = total + v;
            total_err += e;
            heap.push(Panel {
                region: rect,
                value: v,
                error: e,
                id: next_id,
            });
            next_id += 1;
        }
        // Running sums drift; resynchronise occasionally.
        if next_id % 4096 == 0 {
            let (v, e) = heap
                .iter()
                .fold((T::zero(), 0.0), |(v, e), p| (v + p.value, e + p.error));
            total = v;
            total_err = e;
        }
    }

    let (value, error) = sum_panels(heap.into_vec());
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

/// Gauss–Legendre nodes and weights of order `n` on [-1, 1], by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre order must be >= 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let nodes = kronrod_nodes();
        let wk: f64 = nodes.iter().map(|n| n.1).sum();
        let wg: f64 = nodes.iter().map(|n| n.2).sum();
        assert_relative_eq!(wk, 2.0, epsilon = 1e-15);
        assert_relative_eq!(wg, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn gk15_exact_for_degree_22_polynomials() {
        let mut f = |x: f64| x.powi(22) + 3.0 * x.powi(7);
        let (v, _) = gk15(&mut f, -1.0, 1.0);
        assert_relative_eq!(v, 2.0 / 23.0, epsilon = 1e-14);
    }

    #[test]
    fn integrates_gaussian_1d() {
        let r = integrate_1d(
            |x: f64| (-x * x).exp(),
            -10.0,
            10.0,
            QuadOptions::relative(1e-12),
        )
        .unwrap();
        assert_relative_eq!(r.value, std::f64::consts::PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn integrates_complex_oscillation() {
        // ∫_0^π e^{ix} dx = 2i
        let r = integrate_1d(
            |x: f64| Complex64::new(0.0, x).exp(),
            0.0,
            std::f64::consts::PI,
            QuadOptions::relative(1e-12),
        )
        .unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn integrates_2d_product() {
        // ∬ over [0,1]×[0,2] of x² e^y = (1/3)(e² − 1)
        let r = integrate_2d(
            |x: f64, y: f64| x * x * y.exp(),
            Rect::new(0.0, 1.0, 0.0, 2.0),
            1,
            QuadOptions::relative(1e-12),
        )
        .unwrap();
        assert_relative_eq!(r.value, (2f64.exp() - 1.0) / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn adapts_to_peaked_2d_integrand() {
        let a = 400.0;
        let r = integrate_2d(
            |x: f64, y: f64| (-a * (x * x + y * y)).exp(),
            Rect::centered_square(1.0),
            1,
            QuadOptions::relative(1e-10),
        )
        .unwrap();
        assert_relative_eq!(r.value, std::f64::consts::PI / a, max_relative = 1e-9);
        assert!(r.evaluations > 225);
    }

    #[test]
    fn budget_exhaustion_reports_partial_result() {
        let err = integrate_1d(
            |x: f64| 1.0 / x.abs().sqrt().max(1e-300),
            -1.0,
            1.0,
            QuadOptions::relative(1e-14).with_max_evaluations(200),
        )
        .unwrap_err();
        match err {
            Error::QuadratureFailure {
                partial,
                evaluations,
                ..
            } => {
                assert!(partial > 0.0);
                assert!(evaluations <= 200);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gauss_legendre_matches_known_rules() {
        let (x, w) = gauss_legendre(2);
        assert_relative_eq!(x[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(w[0], 1.0, epsilon = 1e-14);
        let (x, w) = gauss_legendre(20);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert_relative_eq!(s, 2.0 / 39.0, max_relative = 1e-12);
    }

    #[test]
    fn deterministic_output() {
        let f = |x: f64, y: f64| Complex64::new((x * y).sin(), (x + y).cos()) / (1.0 + x * x);
        let a = integrate_2d(
            f,
            Rect::centered_square(3.0),
            2,
            QuadOptions::relative(1e-11),
        )
        .unwrap();
        let b = integrate_2d(
            f,
            Rect::centered_square(3.0),
            2,
            QuadOptions::relative(1e-11),
        )
        .unwrap();
        assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
        assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());
    }
}
