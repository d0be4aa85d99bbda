//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature.
//!
//! Panels are kept in a max-heap keyed on their error estimate; the worst
//! panel is bisected until the summed error estimate meets the tolerance or
//! the panel budget runs out. Integrands may be real or complex. Panel node
//! evaluations can be farmed out to rayon, but the reduction order is fixed so
//! results are bit-identical with and without parallelism.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Kronrod abscissae on [-1, 1]; odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_282_977_182_760,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights paired with `XGK[1], XGK[3], ..., XGK[9]`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Values that can be integrated: closed under addition and real scaling,
/// with a magnitude for error control.
pub trait QuadValue:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// What the relative part of a [`Tolerance`] is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorBasis {
    /// `|∫ f|`, the usual QUADPACK convention.
    Value,
    /// `∫ |f|`; robust for oscillatory integrands whose value may cancel to zero.
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub basis: ErrorBasis,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self {
            abs: 0.0,
            rel,
            basis: ErrorBasis::Value,
        }
    }

    pub fn magnitude(rel: f64) -> Self {
        Self {
            abs: 0.0,
            rel,
            basis: ErrorBasis::Magnitude,
        }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    fn target(&self, value: f64, magnitude: f64) -> f64 {
        let reference = match self.basis {
            ErrorBasis::Value => value,
            ErrorBasis::Magnitude => magnitude,
        };
        self.abs.max(self.rel * reference)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    /// Summed absolute error estimate over all panels.
    pub error: f64,
    /// `∫ |f|` over the domain.
    pub magnitude: f64,
    pub panels: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    magnitude: f64,
}

struct Ranked<T>(Panel<T>);

impl<T> PartialEq for Ranked<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Ranked<T> {}
impl<T> PartialOrd for Ranked<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Ranked<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .error
            .total_cmp(&other.0.error)
            // Ties go to the leftmost panel so the refinement order is fixed.
            .then_with(|| other.0.a.total_cmp(&self.0.a))
    }
}

/// QUADPACK's heuristic rescaling of the raw |K - G| difference.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// Adaptive Gauss–Kronrod integrator.
#[derive(Debug, Clone, Copy)]
pub struct GaussKronrod {
    tolerance: Tolerance,
    max_panels: usize,
    parallel: bool,
}

impl GaussKronrod {
    pub const DEFAULT_MAX_PANELS: usize = 20_000;

    pub fn new(tolerance: Tolerance) -> Self {
        Self {
            tolerance,
            max_panels: Self::DEFAULT_MAX_PANELS,
            parallel: false,
        }
    }

    pub fn max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels.max(1);
        self
    }

    /// Evaluate the 21 nodes of each panel on the rayon pool.
    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tolerance
    }

    pub fn integrate<T, F>(&self, f: F, a: f64, b: f64) -> Result<Estimate<T>>
    where
        T: QuadValue,
        F: Fn(f64) -> T + Sync,
    {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrate over `[points[0], points[last]]`, starting from one panel per
    /// consecutive pair of break points. Break points must be non-decreasing;
    /// zero-width panels are dropped.
    pub fn integrate_with_breaks<T, F>(&self, f: F, points: &[f64]) -> Result<Estimate<T>>
    where
        T: QuadValue,
        F: Fn(f64) -> T + Sync,
    {
        if points.len() < 2 {
            return Err(Error::Domain(
                "quadrature needs at least two break points".into(),
            ));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("quadrature limits must be finite".into()));
        }
        if points.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain(
                "quadrature break points must be sorted".into(),
            ));
        }
        let tol = self.tolerance;
        if !(tol.abs >= 0.0 && tol.rel >= 0.0) || (tol.abs == 0.0 && tol.rel == 0.0) {
            return Err(Error::Domain(
                "quadrature tolerance must be positive".into(),
            ));
        }

        let spans: Vec<(f64, f64)> = points
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1]))
            .collect();
        if spans.is_empty() {
            return Ok(Estimate {
                value: T::zero(),
                error: 0.0,
                magnitude: 0.0,
                panels: 0,
                evaluations: 0,
            });
        }

        let initial = self.evaluate_panels(&f, &spans);
        let mut evaluations = 21 * spans.len();
        let mut heap: BinaryHeap<Ranked<T>> = initial.into_iter().map(Ranked).collect();
        let (mut value, mut error, mut magnitude) = totals(&heap);
        let mut splits = 0usize;

        loop {
            let target = tol.target(value.magnitude(), magnitude);
            if error <= target {
                break;
            }
            if heap.len() >= self.max_panels {
                return Err(Error::NonConvergence {
                    achieved: error,
                    target,
                    panels: heap.len(),
                });
            }
            let worst = heap.pop().expect("heap is never empty here").0;
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Panel cannot be split further in floating point.
                return Err(Error::NonConvergence {
                    achieved: error,
                    target,
                    panels: heap.len() + 1,
                });
            }
            let halves = self.evaluate_panels(&f, &[(worst.a, mid), (mid, worst.b)]);
            evaluations += 42;
            value = value - worst.value;
            error -= worst.error;
            magnitude -= worst.magnitude;
            for h in &halves {
                value = value + h.value;
                error += h.error;
                magnitude += h.magnitude;
            }
            heap.extend(halves.into_iter().map(Ranked));
            splits += 1;
            // Running sums drift; resynchronise now and then.
            if splits.is_multiple_of(256) {
                (value, error, magnitude) = totals(&heap);
            }
            error = error.max(0.0);
        }

        let mut panels: Vec<Panel<T>> = heap.into_iter().map(|r| r.0).collect();
        panels.sort_by(|l, r| l.a.total_cmp(&r.a));
        let mut value = T::zero();
        let mut error = 0.0;
        let mut magnitude = 0.0;
        for p in &panels {
            value = value + p.value;
            error += p.error;
            magnitude += p.magnitude;
        }
        Ok(Estimate {
            value,
            error,
            magnitude,
            panels: panels.len(),
            evaluations,
        })
    }

    fn evaluate_panels<T, F>(&self, f: &F, spans: &[(f64, f64)]) -> Vec<Panel<T>>
    where
        T: QuadValue,
        F: Fn(f64) -> T + Sync,
    {
        let nodes: Vec<f64> = spans.iter().flat_map(|&(a, b)| panel_nodes(a, b)).collect();
        let values: Vec<T> = if self.parallel {
            nodes.par_iter().map(|&x| f(x)).collect()
        } else {
            nodes.iter().map(|&x| f(x)).collect()
        };
        spans
            .iter()
            .zip(values.chunks_exact(21))
            .map(|(&(a, b), fv)| kronrod_panel(a, b, fv))
            .collect()
    }
}

fn totals<T: QuadValue>(heap: &BinaryHeap<Ranked<T>>) -> (T, f64, f64) {
    let mut value = T::zero();
    let mut error = 0.0;
    let mut magnitude = 0.0;
    for r in heap.iter() {
        value = value + r.0.value;
        error += r.0.error;
        magnitude += r.0.magnitude;
    }
    (value, error, magnitude)
}

/// Node order: centre, then (-x_j, +x_j) for j = 0..10.
fn panel_nodes(a: f64, b: f64) -> impl Iterator<Item = f64> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    std::iter::once(centre).chain((0..10).flat_map(move |j| {
        let dx = half * XGK[j];
        [centre - dx, centre + dx]
    }))
}

fn kronrod_panel<T: QuadValue>(a: f64, b: f64, fv: &[T]) -> Panel<T> {
    let half = 0.5 * (b - a);
    let fc = fv[0];
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::zero();
    let mut abs_sum = fc.magnitude() * WGK[10];
    for j in 0..10 {
        let lo = fv[1 + 2 * j];
        let hi = fv[2 + 2 * j];
        let pair = lo + hi;
        kronrod = kronrod + pair * WGK[j];
        abs_sum += WGK[j] * (lo.magnitude() + hi.magnitude());
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[10] * (fc - mean).magnitude();
    for j in 0..10 {
        asc += WGK[j] * ((fv[1 + 2 * j] - mean).magnitude() + (fv[2 + 2 * j] - mean).magnitude());
    }
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let raw = ((kronrod - gauss) * half).magnitude();
    Panel {
        a,
        b,
        value: kronrod * half,
        error: rescale_error(raw, res_abs, res_asc),
        magnitude: res_abs,
    }
}

/// `n` equal panels spanning `[a, b]`, as break points.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|i| {
            if i == n {
                b
            } else {
                a + (b - a) * (i as f64) / (n as f64)
            }
        })
        .collect()
}
