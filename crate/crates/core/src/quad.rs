//! Adaptive Gauss–Kronrod (10/21-point) quadrature on finite and
//! semi-infinite intervals.
//!
//! The finite-interval driver is a global bisection scheme: the interval with
//! the largest error estimate is split until the summed estimate meets
//! `max(abs_tol, rel_tol * |integral|)` or the interval budget is exhausted.
//!
//! Semi-infinite integrals `[a, inf)` are split at `c = a + scale`. The finite
//! part is integrated directly and the tail through `tau = c / w^2`,
//! `w in (0, 1]`, which turns a `tau^(-3/2)` decay into a bounded integrand
//! and sends exponential decay smoothly to zero at `w = 0`.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// Kronrod abscissae, descending; odd indices are the Gauss points.
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
    0.123_491_976_262_065_851_077_600_525_637_006,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for `XGK[1], XGK[3], ..., XGK[9]`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-9, max_intervals: 2000 }
    }
}

impl QuadOptions {
    pub fn with_tolerance(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl Integral {
    pub const ZERO: Integral = Integral { value: 0.0, error: 0.0, converged: true };

    /// Converts a non-converged result into [`Error::Numerical`].
    pub fn into_result(self) -> Result<Integral> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Numerical { value: self.value, estimate: self.error })
        }
    }

    fn add(self, other: Integral) -> Integral {
        Integral {
            value: self.value + other.value,
            error: self.error + other.error,
            converged: self.converged && other.converged,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let resabs = abs_sum * half.abs();
    let resasc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * libm::pow(200.0 * error / resasc, 1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]`, optionally splitting at interior breakpoints
/// first (points outside `(a, b)` are ignored).
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Integral {
    if a == b {
        return Integral::ZERO;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    cuts.push(lo);
    cuts.extend(breaks.iter().copied().filter(|&p| p > lo && p < hi && p.is_finite()));
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in cuts.windows(2) {
        let seg = gk21(&mut f, w[0], w[1]);
        total += seg.value;
        total_err += seg.error;
        heap.push(seg);
    }
    let mut count = heap.len();
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if count >= opts.max_intervals {
            return Integral { value: sign * total, error: total_err, converged: false };
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval cannot be split further in floating point.
            return Integral { value: sign * total, error: total_err, converged: false };
        }
        let left = gk21(&mut f, worst.a, mid);
        let right = gk21(&mut f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        count += 1;
    }
    // Re-sum to shed accumulated cancellation from the running updates.
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Integral { value: sign * value, error, converged: true }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Integral {
    integrate_with_breaks(f, a, b, &[], opts)
}

/// Integrates `f` over `[a, b]` for an integrand concentrated near `a` that
/// decays beyond `a + scale`. Long ranges use the same `tau = c / w^2` map
/// as [`integrate_to_infinity`], so the early peak is never skipped by a
/// first rule spread over the whole range.
pub fn integrate_long<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    scale: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Integral {
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let c = if a > 0.0 { a + scale.max(a) } else { a + scale };
    if !(b > c) || c <= 0.0 {
        return integrate_with_breaks(f, a, b, breaks, opts);
    }
    let head = integrate_with_breaks(&mut f, a, c, breaks, opts);
    let tail_opts = QuadOptions {
        abs_tol: opts.abs_tol.max(opts.rel_tol * head.value.abs()) * 0.5,
        ..*opts
    };
    let tail = integrate(
        |w: f64| {
            let tau = c / (w * w);
            let v = f(tau);
            if v == 0.0 {
                0.0
            } else {
                v * 2.0 * c / (w * w * w)
            }
        },
        libm::sqrt(c / b),
        1.0,
        &tail_opts,
    );
    head.add(tail)
}

/// Integrates `f` over `[a, inf)`. `scale` is the length of the finite part
/// before the tail transform; choose it near where `f` starts to decay.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Integral {
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let c = if a > 0.0 { a + scale.max(a) } else { a + scale };
    let head = integrate_with_breaks(&mut f, a, c, breaks, opts);
    // The tail shares the tolerance budget relative to the head magnitude.
    let tail_opts = QuadOptions {
        abs_tol: opts.abs_tol.max(opts.rel_tol * head.value.abs()) * 0.5,
        ..*opts
    };
    let tail = if c > 0.0 {
        integrate(
            |w: f64| {
                if w <= 0.0 {
                    return 0.0;
                }
                let tau = c / (w * w);
                let v = f(tau);
                if v == 0.0 {
                    0.0
                } else {
                    v * 2.0 * c / (w * w * w)
                }
            },
            0.0,
            1.0,
            &tail_opts,
        )
    } else {
        // Non-positive split point: fall back to tau = c + u / (1 - u).
        integrate(
            |u: f64| {
                if u >= 1.0 {
                    return 0.0;
                }
                let om = 1.0 - u;
                f(c + u / om) / (om * om)
            },
            0.0,
            1.0,
            &tail_opts,
        )
    };
    head.add(tail)
}
