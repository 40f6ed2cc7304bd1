//! Closed-form impacts.
//!
//! The formulas are algebraically rearranged before evaluation so that the
//! large terms that cancel in the textbook arrangement never appear: `erf`
//! is replaced by `erfc` of the magnitude, large-time values are obtained
//! from the asymptote minus a convergent tail series, and the `1/x_n` group
//! is integrated directly when the source is close to the centre.

use core::f64::consts::PI;

use super::kernel::{series_coefficients, SERIES_TERMS};
use super::{Horizon, ImpactResult, Method, NoiseScenario};
use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};

fn require_uca(scenario: &NoiseScenario) -> Result<()> {
    if scenario.distance > 0.0 {
        Ok(())
    } else {
        Err(Error::Regime("uniform concentration assumption undefined at x_n = 0; use impact_volume"))
    }
}

/// Far-field asymptotic impact for arbitrary flow and degradation.
pub fn asymptotic_uca(scenario: &NoiseScenario) -> Result<ImpactResult> {
    scenario.validate()?;
    require_uca(scenario)?;
    let x = scenario.distance;
    let f = scenario.flow;
    let root = libm::sqrt(f.norm_sq() + 4.0 * scenario.degradation);
    let value = scenario.volume() / (4.0 * PI * x) * libm::exp(0.5 * x * (f.parallel - root));
    Ok(ImpactResult::exact(value, Method::UcaAsymptotic))
}

/// Far-field time-varying impact without flow or degradation.
pub fn uca_noflow_nodeg(t: f64, scenario: &NoiseScenario) -> Result<ImpactResult> {
    scenario.validate()?;
    require_uca(scenario)?;
    require_still(scenario, false)?;
    if t < 0.0 {
        return Err(Error::Domain("time must be non-negative"));
    }
    let x = scenario.distance;
    let value = if t == 0.0 {
        0.0
    } else {
        scenario.volume() / (4.0 * PI * x) * libm::erfc(x / (2.0 * libm::sqrt(t)))
    };
    Ok(ImpactResult::exact(value, Method::UcaNoFlowNoDeg))
}

fn require_still(scenario: &NoiseScenario, allow_degradation: bool) -> Result<()> {
    if !scenario.flow.is_zero() {
        return Err(Error::Regime("formula requires zero flow; use impact_volume or impact_uca"));
    }
    if !allow_degradation && scenario.degradation != 0.0 {
        return Err(Error::Regime("formula requires k = 0; use asymptotic_noflow or impact_volume"));
    }
    Ok(())
}

/// Asymptotic impact without flow for `k > 0`, any source position.
pub fn asymptotic_noflow(scenario: &NoiseScenario) -> Result<ImpactResult> {
    scenario.validate()?;
    require_still(scenario, true)?;
    let k = scenario.degradation;
    if k == 0.0 {
        return Err(Error::Regime("k = 0 has no degradation; use asymptotic_noflow_nodeg"));
    }
    let x = scenario.distance;
    let r = scenario.r_obs;
    let sk = libm::sqrt(k);
    let y = r * sk;
    let method = if x == 0.0 { Method::NoFlowAsymptoticAtReceiver } else { Method::NoFlowAsymptotic };
    let value = if x > r {
        // (r^3 / x) e^{-x sqrt k} (y cosh y - sinh y) / y^3
        let phi = if y < 1.0 {
            cosh_series(y)
        } else {
            0.5 * ((y - 1.0) * libm::exp(y - x * sk) + (y + 1.0) * libm::exp(-y - x * sk)) / (y * y * y)
        };
        let scale = if y < 1.0 { libm::exp(-x * sk) } else { 1.0 };
        r * r * r / x * scale * phi
    } else {
        // [1 - (1 + y) e^{-y} sinh(z) / z] / k with z = x sqrt k <= y
        let z = x * sk;
        if y < 0.5 {
            let one_minus_a = one_minus_1py_exp(y);
            let a = 1.0 - one_minus_a;
            (one_minus_a - a * sinhc_minus_one(z)) / k
        } else {
            let ab = if z == 0.0 {
                (1.0 + y) * libm::exp(-y)
            } else {
                (1.0 + y) * (libm::exp(z - y) - libm::exp(-z - y)) / (2.0 * z)
            };
            (1.0 - ab) / k
        }
    };
    Ok(ImpactResult::exact(value, method))
}

/// `(y cosh y - sinh y) / y^3 = sum_{n>=1} 2n y^(2n-2) / (2n+1)!`
fn cosh_series(y: f64) -> f64 {
    let y2 = y * y;
    let mut term = 1.0 / 3.0;
    let mut sum = term;
    let mut n = 1.0;
    while term > 1e-18 * sum {
        // ratio of consecutive terms
        term *= y2 * (n + 1.0) / (n * (2.0 * n + 2.0) * (2.0 * n + 3.0));
        sum += term;
        n += 1.0;
    }
    sum
}

/// `1 - (1 + y) e^{-y} = sum_{n>=2} (-1)^n (n-1) y^n / n!`
fn one_minus_1py_exp(y: f64) -> f64 {
    let mut pow_over_fact = y; // y^n / n!
    let mut sum = 0.0;
    for n in 2..40 {
        pow_over_fact *= y / n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * (n as f64 - 1.0) * pow_over_fact;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `sinh(z)/z - 1`
fn sinhc_minus_one(z: f64) -> f64 {
    if z > 0.5 {
        return libm::sinh(z) / z - 1.0;
    }
    let z2 = z * z;
    let mut term = z2 / 6.0;
    let mut sum = term;
    let mut n = 1.0;
    while term > 1e-18 * sum {
        term *= z2 / ((2.0 * n + 2.0) * (2.0 * n + 3.0));
        sum += term;
        n += 1.0;
    }
    sum
}

/// Asymptotic impact without flow or degradation.
pub fn asymptotic_noflow_nodeg(scenario: &NoiseScenario) -> Result<ImpactResult> {
    scenario.validate()?;
    require_still(scenario, false)?;
    Ok(ImpactResult::exact(
        still_asymptote(scenario.distance, scenario.r_obs),
        Method::NoFlowNoDegAsymptotic,
    ))
}

fn still_asymptote(x: f64, r: f64) -> f64 {
    if x > r {
        r * r * r / (3.0 * x)
    } else {
        0.5 * r * r - x * x / 6.0
    }
}

/// Exact time-varying impact without flow or degradation, for any source
/// position. `Horizon::Asymptotic` returns the limit.
pub fn timevarying_noflow_nodeg(horizon: impl Into<Horizon>, scenario: &NoiseScenario) -> Result<ImpactResult> {
    scenario.validate()?;
    require_still(scenario, false)?;
    let t = match horizon.into() {
        Horizon::Asymptotic => return asymptotic_noflow_nodeg(scenario),
        Horizon::At(t) => t,
    };
    if t < 0.0 {
        return Err(Error::Domain("time must be non-negative"));
    }
    let x = scenario.distance;
    let r = scenario.r_obs;
    let method = if x == 0.0 { Method::NoFlowNoDegAtReceiver } else { Method::NoFlowNoDeg };
    if t == 0.0 {
        return Ok(ImpactResult::exact(0.0, method));
    }
    let q = r + x;
    let value = if q * q < t {
        still_asymptote(x, r) - still_tail(x, r, t)
    } else if x == 0.0 {
        let sq = 2.0 * libm::sqrt(t);
        let eps = libm::erfc(r / sq);
        t - eps * (t - 0.5 * r * r) - r * libm::sqrt(t / PI) * libm::exp(-r * r / (4.0 * t))
    } else {
        still_small_time(x, r, t)
    };
    Ok(ImpactResult::exact(value, method))
}

/// `int_t^inf fraction(x, r, tau) dtau` from the large-time series.
fn still_tail(x: f64, r: f64, t: f64) -> f64 {
    let c = series_coefficients(x, r);
    let inv4t = 1.0 / (4.0 * t);
    // 4^{-(n+1/2)} t^{1/2-n}, starting at n = 1
    let mut pow = 1.0 / (8.0 * libm::sqrt(t));
    let mut sum = 0.0;
    for (n, cn) in c.iter().enumerate().take(SERIES_TERMS).skip(1) {
        sum += cn * pow / (n as f64 - 0.5);
        pow *= inv4t;
    }
    sum / libm::sqrt(PI)
}

fn still_small_time(x: f64, r: f64, t: f64) -> f64 {
    let d = r - x;
    let s = r + x;
    let beta = if d >= 0.0 { 1.0 } else { -1.0 };
    let sq = 2.0 * libm::sqrt(t);
    let root = libm::sqrt(t / PI);
    let erfc_of = |c: f64| libm::erfc(c / sq);
    let gauss = |c: f64| root * libm::exp(-c * c / (4.0 * t));
    let base = 0.5 * (1.0 + beta) * t - beta * erfc_of(d.abs()) * (0.25 * d * d + 0.5 * t)
        - erfc_of(s) * (0.25 * s * s + 0.5 * t)
        + 0.5 * d * gauss(d)
        + 0.5 * s * gauss(s);
    base + still_group(x, r, t, x < 0.05 * r)
}

/// The `1/x_n` terms, `(H(|d|) - H(s)) / x`. Near the centre the difference
/// is taken as `-(1/x) int_{|d|}^{s} H'(c) dc` instead.
fn still_group(x: f64, r: f64, t: f64, integrate: bool) -> f64 {
    let (lo, hi) = ((r - x).abs(), r + x);
    let sq = 2.0 * libm::sqrt(t);
    let root = libm::sqrt(t / PI);
    let erfc_of = |c: f64| libm::erfc(c / sq);
    let gauss = |c: f64| root * libm::exp(-c * c / (4.0 * t));
    if integrate {
        let h_prime = |c: f64| c * gauss(c) - 0.5 * c * c * erfc_of(c);
        let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-14, max_intervals: 100 };
        -quad::integrate(h_prime, lo, hi, &opts).value / x
    } else {
        let h = |c: f64| -erfc_of(c) * c * c * c / 6.0 + gauss(c) * (c * c - 2.0 * t) / 3.0;
        (h(lo) - h(hi)) / x
    }
}
