//! Adaptive Gauss–Kronrod (7/15) quadrature with interval bisection, plus
//! the composite trapezoid rule used on fixed sample grids.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
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

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tuning for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    /// Absolute tolerance expressed as a multiple of the integrand's peak magnitude.
    pub peak_relative_tol: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
    /// Number of equal panels the interval is split into before adapting.
    pub initial_panels: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { peak_relative_tol: 1e-10, max_depth: 30, initial_panels: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut peak = fc.abs();
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        peak = peak.max(f1.abs()).max(f2.abs());
        kron += w * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (kron * half, ((kron - gauss) * half).abs(), peak)
}

/// Integrates `f` over `[a, b]` by globally adaptive bisection of the panel
/// with the largest Kronrod–Gauss discrepancy.
///
/// Panels that reach `max_depth` are frozen. If the summed error still
/// exceeds the tolerance once no panel can be split, the result is returned
/// with `converged = false`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: AdaptiveOptions) -> QuadResult {
    if b == a {
        return QuadResult { value: 0.0, error_estimate: 0.0, converged: true, evaluations: 0 };
    }
    let panels = opts.initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mut peak = 0.0f64;
    let mut evaluations = 0;

    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        let (value, error, p) = kronrod(&f, lo, hi);
        evaluations += 15;
        peak = peak.max(p);
        heap.push(Panel { a: lo, b: hi, value, error, depth: 0 });
    }

    loop {
        let total_value: f64 = frozen_value + heap.iter().map(|p| p.value).sum::<f64>();
        let total_error: f64 = frozen_error + heap.iter().map(|p| p.error).sum::<f64>();
        let tol = opts.peak_relative_tol * peak;
        if total_error <= tol {
            return QuadResult { value: total_value, error_estimate: total_error, converged: true, evaluations };
        }
        let Some(worst) = heap.pop() else {
            return QuadResult { value: total_value, error_estimate: total_error, converged: false, evaluations };
        };
        if worst.depth >= opts.max_depth {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error, p) = kronrod(&f, lo, hi);
            evaluations += 15;
            peak = peak.max(p);
            heap.push(Panel { a: lo, b: hi, value, error, depth: worst.depth + 1 });
        }
    }
}

/// Like [`integrate_adaptive`], but non-convergence is an error carrying the
/// estimates from before and after the last refinement pass.
pub fn integrate_or_fail<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<QuadResult> {
    let fine = integrate_adaptive(&f, a, b, opts);
    if fine.converged {
        return Ok(fine);
    }
    let coarse = integrate_adaptive(&f, a, b, AdaptiveOptions { max_depth: opts.max_depth.saturating_sub(1), ..opts });
    Err(Error::Convergence { previous: coarse.value, last: fine.value })
}

/// Composite trapezoid rule over samples `ys` at abscissae `xs`.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Trapezoid rule for `f` on `points` equally spaced nodes over `[a, b]`.
pub fn trapezoid_uniform<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, points: usize) -> f64 {
    assert!(points >= 2);
    let h = (b - a) / (points - 1) as f64;
    let inner: f64 = (1..points - 1).map(|i| f(a + h * i as f64)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}
