//! Impacts obtained by numerical quadrature.

use alloc::vec::Vec;
use core::cell::Cell;
use core::f64::consts::PI;

use super::kernel::{gaussian, sphere_fraction};
use super::{Horizon, ImpactResult, Method, NoiseScenario};
use crate::error::{Error, Result};
use crate::quad::{self, Integral, QuadOptions};

/// Interior points where the time integrands change character: the
/// diffusive arrival time and the flow passage time.
fn time_breaks(s: &NoiseScenario) -> Vec<f64> {
    let x = s.distance;
    let mut b = Vec::with_capacity(4);
    if x > 0.0 {
        b.push(x * x / 6.0);
    }
    b.push(s.r_obs * s.r_obs / 6.0);
    if s.flow.parallel > 0.0 && x > 0.0 {
        b.push(x / s.flow.parallel);
    }
    b
}

/// Length of the directly integrated segment before the tail transform;
/// covers arrival and flow passage with room to spare.
fn tail_scale(s: &NoiseScenario) -> f64 {
    let q = s.distance + s.r_obs;
    let mut c = (4.0 * q * q).max(1.0);
    if s.flow.parallel > 0.0 {
        c = c.max(3.0 * s.distance / s.flow.parallel);
    }
    c
}

fn integrate_horizon<F: FnMut(f64) -> f64>(
    f: F,
    horizon: Horizon,
    scenario: &NoiseScenario,
    opts: &QuadOptions,
) -> Result<Option<Integral>> {
    let breaks = time_breaks(scenario);
    match horizon {
        Horizon::At(t) if t < 0.0 => Err(Error::Domain("time must be non-negative")),
        Horizon::At(t) if t == 0.0 => Ok(None),
        Horizon::At(t) => Ok(Some(quad::integrate_long(f, 0.0, t, tail_scale(scenario), &breaks, opts))),
        Horizon::Asymptotic => {
            Ok(Some(quad::integrate_to_infinity(f, 0.0, tail_scale(scenario), &breaks, opts)))
        }
    }
}

fn finish(res: Option<Integral>, method: Method) -> Result<ImpactResult> {
    match res {
        None => Ok(ImpactResult { value: 0.0, method, est_error: 0.0, fallback: false }),
        Some(i) => {
            let i = i.into_result()?;
            Ok(ImpactResult { value: i.value.max(0.0), method, est_error: i.error, fallback: false })
        }
    }
}

/// Time integral of the centre concentration scaled by the receiver volume.
/// Valid for sources far from the receiver; any flow and degradation.
pub fn impact_uca(horizon: impl Into<Horizon>, scenario: &NoiseScenario) -> Result<ImpactResult> {
    impact_uca_with(horizon, scenario, &QuadOptions::default())
}

pub fn impact_uca_with(
    horizon: impl Into<Horizon>,
    scenario: &NoiseScenario,
    opts: &QuadOptions,
) -> Result<ImpactResult> {
    scenario.validate()?;
    if scenario.distance == 0.0 {
        return Err(Error::Regime("uniform concentration assumption undefined at x_n = 0; use impact_volume"));
    }
    let x = scenario.distance;
    let (pp, pn) = (scenario.flow.parallel, scenario.flow.perpendicular);
    let k = scenario.degradation;
    let v = scenario.volume();
    let f = |tau: f64| {
        let dx = x - pp * tau;
        let dy = pn * tau;
        v * gaussian(dx * dx + dy * dy, tau, k)
    };
    finish(integrate_horizon(f, horizon.into(), scenario, opts)?, Method::UcaQuadrature)
}

/// Time integral of the exact fraction of each released cloud inside the
/// receiver. Requires zero transverse flow; valid at any distance.
pub fn impact_volume(horizon: impl Into<Horizon>, scenario: &NoiseScenario) -> Result<ImpactResult> {
    impact_volume_with(horizon, scenario, &QuadOptions::default())
}

pub fn impact_volume_with(
    horizon: impl Into<Horizon>,
    scenario: &NoiseScenario,
    opts: &QuadOptions,
) -> Result<ImpactResult> {
    scenario.validate()?;
    if scenario.flow.perpendicular != 0.0 {
        return Err(Error::Regime("volume integral requires zero transverse flow; use impact_brute"));
    }
    let x = scenario.distance;
    let r = scenario.r_obs;
    let pp = scenario.flow.parallel;
    let k = scenario.degradation;
    let f = |tau: f64| sphere_fraction(pp * tau - x, r, tau) * libm::exp(-k * tau);
    finish(integrate_horizon(f, horizon.into(), scenario, opts)?, Method::VolumeQuadrature)
}

/// Tolerances for [`impact_brute`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteOptions {
    /// Tolerances of the outer time integral.
    pub outer: QuadOptions,
    /// Relative tolerance of each spatial level.
    pub inner_rel: f64,
}

impl Default for BruteOptions {
    fn default() -> Self {
        Self {
            outer: QuadOptions { abs_tol: 1e-12, rel_tol: 1e-8, max_intervals: 400 },
            inner_rel: 1e-10,
        }
    }
}

/// Reference impact from direct quadrature over time and the receiver
/// volume in spherical coordinates. Handles any flow direction; slow.
pub fn impact_brute(
    horizon: impl Into<Horizon>,
    scenario: &NoiseScenario,
    opts: &BruteOptions,
) -> Result<ImpactResult> {
    scenario.validate()?;
    let x0 = scenario.distance;
    let r_obs = scenario.r_obs;
    let p = scenario.flow.parallel;
    let q = scenario.flow.perpendicular;
    let k = scenario.degradation;
    let inner_failed = Cell::new(false);
    let inner = QuadOptions { abs_tol: 0.0, rel_tol: opts.inner_rel, max_intervals: 200 };

    // The squared distance to the cloud centre is symmetric under z -> -z,
    // so theta is folded onto [0, pi/2]; with no transverse flow it is also
    // symmetric under y -> -y and phi is folded onto [0, pi].
    let phi_max = if q == 0.0 { PI } else { 2.0 * PI };
    let fold = if q == 0.0 { 4.0 } else { 2.0 };

    let fraction = |tau: f64| -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        let cx = p * tau - x0;
        let cy = q * tau;
        let c_norm = libm::sqrt(cx * cx + cy * cy);
        let mut phi_c = libm::atan2(cy, cx);
        if phi_c < 0.0 {
            phi_c += 2.0 * PI;
        }
        let phi_breaks = [phi_c];
        let r_breaks = [c_norm];
        let base = x0 * x0 - 2.0 * tau * x0 * p + tau * tau * (p * p + q * q);
        let inv4t = 1.0 / (4.0 * tau);

        let over_r = |ri: f64| -> f64 {
            let over_theta = |theta: f64| -> f64 {
                let st = libm::sin(theta);
                let over_phi = |phi: f64| -> f64 {
                    let (sp, cp) = (libm::sin(phi), libm::cos(phi));
                    let rho2 = ri * ri + base + 2.0 * x0 * ri * cp * st
                        - 2.0 * tau * ri * (p * cp * st + q * sp * st);
                    libm::exp(-rho2.max(0.0) * inv4t)
                };
                let g = quad::integrate_with_breaks(over_phi, 0.0, phi_max, &phi_breaks, &inner);
                if !g.converged {
                    inner_failed.set(true);
                }
                g.value * st
            };
            let g = quad::integrate(over_theta, 0.0, 0.5 * PI, &inner);
            if !g.converged {
                inner_failed.set(true);
            }
            g.value * ri * ri
        };
        let g = quad::integrate_with_breaks(over_r, 0.0, r_obs, &r_breaks, &inner);
        if !g.converged {
            inner_failed.set(true);
        }
        fold * g.value * libm::pow(4.0 * PI * tau, -1.5) * libm::exp(-k * tau)
    };

    let res = integrate_horizon(fraction, horizon.into(), scenario, &opts.outer)?;
    if inner_failed.get() {
        let (value, estimate) = res.map(|i| (i.value, i.error)).unwrap_or((0.0, 0.0));
        return Err(Error::Numerical { value, estimate });
    }
    finish(res, Method::BruteForce)
}
