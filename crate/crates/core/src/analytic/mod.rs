//! Expected number of molecules from a continuously emitting point source
//! observed by a passive spherical receiver.
//!
//! All quantities are dimensionless. The receiver is centred at the origin,
//! the source sits at `(-x_n, 0, 0)`, and the flow components are resolved in
//! the source frame (`parallel` points from source to receiver). The source
//! starts emitting at `t = 0` with unit expected rate.

mod closed;
mod integrals;
mod kernel;

pub use closed::{
    asymptotic_noflow, asymptotic_noflow_nodeg, asymptotic_uca, timevarying_noflow_nodeg,
    uca_noflow_nodeg,
};
pub use integrals::{
    impact_brute, impact_uca, impact_uca_with, impact_volume, impact_volume_with, BruteOptions,
};
pub use kernel::sphere_fraction;

use crate::error::{ensure, Error, Result};
use crate::scaling::FlowSpec;

use core::f64::consts::PI;

/// Relative distance (in receiver radii) beyond which the uniform
/// concentration assumption is accepted by the dispatcher.
pub const FAR_FIELD_RATIO: f64 = 4.0;

/// One continuously emitting source relative to the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseScenario {
    pub distance: f64,
    pub r_obs: f64,
    pub degradation: f64,
    pub flow: FlowSpec,
}

impl NoiseScenario {
    pub fn new(distance: f64, r_obs: f64, degradation: f64, flow: FlowSpec) -> Result<Self> {
        let s = Self { distance, r_obs, degradation, flow };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.distance >= 0.0 && self.distance.is_finite(), "source distance must be non-negative")?;
        ensure(self.r_obs > 0.0 && self.r_obs.is_finite(), "receiver radius must be positive")?;
        ensure(self.degradation >= 0.0 && self.degradation.is_finite(), "degradation rate must be non-negative")?;
        ensure(
            self.flow.parallel.is_finite() && self.flow.perpendicular.is_finite(),
            "Peclet numbers must be finite",
        )
    }

    /// Receiver volume `4/3 pi r_obs^3`.
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.r_obs * self.r_obs * self.r_obs
    }

    /// Whether the dispatcher treats the source as far from the receiver.
    pub fn is_far(&self) -> bool {
        self.distance >= FAR_FIELD_RATIO * self.r_obs
    }
}

/// Observation horizon: a finite time since the source switched on, or the
/// asymptotic limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    At(f64),
    Asymptotic,
}

impl From<f64> for Horizon {
    fn from(t: f64) -> Self {
        Horizon::At(t)
    }
}

/// How an [`ImpactResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Time quadrature of the centre concentration times the volume.
    UcaQuadrature,
    /// Time quadrature of the exact sphere-fraction integrand (no transverse flow).
    VolumeQuadrature,
    /// Four-dimensional quadrature over the receiver and time.
    BruteForce,
    /// Far-field asymptote with arbitrary flow.
    UcaAsymptotic,
    /// Far-field time-varying form without flow or degradation.
    UcaNoFlowNoDeg,
    /// Asymptote without flow, with degradation.
    NoFlowAsymptotic,
    /// Asymptote without flow, with degradation, source at the centre.
    NoFlowAsymptoticAtReceiver,
    /// Exact time-varying form without flow or degradation.
    NoFlowNoDeg,
    /// Exact time-varying form without flow or degradation, source at the centre.
    NoFlowNoDegAtReceiver,
    /// Exact asymptote without flow or degradation.
    NoFlowNoDegAsymptotic,
}

impl Method {
    /// Short stable identifier used in output files.
    pub fn label(self) -> &'static str {
        match self {
            Method::UcaQuadrature => "uca-quadrature",
            Method::VolumeQuadrature => "volume-quadrature",
            Method::BruteForce => "brute-force",
            Method::UcaAsymptotic => "uca-asymptotic",
            Method::UcaNoFlowNoDeg => "uca-noflow-nodeg",
            Method::NoFlowAsymptotic => "noflow-asymptotic",
            Method::NoFlowAsymptoticAtReceiver => "noflow-asymptotic-x0",
            Method::NoFlowNoDeg => "noflow-nodeg",
            Method::NoFlowNoDegAtReceiver => "noflow-nodeg-x0",
            Method::NoFlowNoDegAsymptotic => "noflow-nodeg-asymptotic",
        }
    }

    pub fn is_closed_form(self) -> bool {
        !matches!(self, Method::UcaQuadrature | Method::VolumeQuadrature | Method::BruteForce)
    }
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.label())
    }
}

/// Expected dimensionless molecule count at the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactResult {
    pub value: f64,
    pub method: Method,
    /// Quadrature error estimate; zero for closed forms.
    pub est_error: f64,
    /// Set when no formula matched the regime and the brute-force oracle was
    /// used instead.
    pub fallback: bool,
}

impl ImpactResult {
    pub(crate) fn exact(value: f64, method: Method) -> Self {
        Self { value: value.max(0.0), method, est_error: 0.0, fallback: false }
    }
}

/// Impulse response at `point` a time `t` after a unit release at the source.
pub fn impulse_concentration(point: [f64; 3], t: f64, scenario: &NoiseScenario) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain("impulse response requires t > 0"));
    }
    let dx = point[0] + scenario.distance - scenario.flow.parallel * t;
    let dy = point[1] - scenario.flow.perpendicular * t;
    let dz = point[2];
    Ok(kernel::gaussian(dx * dx + dy * dy + dz * dz, t, scenario.degradation))
}

/// Impulse response at the receiver centre.
pub fn uca_concentration(t: f64, scenario: &NoiseScenario) -> Result<f64> {
    impulse_concentration([0.0; 3], t, scenario)
}

/// Selects the most specific applicable formula for the scenario.
///
/// Exact closed forms win over approximations and quadratures; the
/// far-field forms are used only when flow or degradation rule out an exact
/// one. Time-varying scenarios with transverse flow near the receiver fall
/// back to [`impact_brute`] and set `fallback`.
pub fn dispatch_impact(horizon: impl Into<Horizon>, scenario: &NoiseScenario) -> Result<ImpactResult> {
    scenario.validate()?;
    let horizon = horizon.into();
    let no_flow = scenario.flow.is_zero();
    let no_deg = scenario.degradation == 0.0;
    let x = scenario.distance;
    match horizon {
        Horizon::At(t) => {
            if t < 0.0 {
                return Err(Error::Domain("time must be non-negative"));
            }
            if no_flow && no_deg {
                timevarying_noflow_nodeg(t, scenario)
            } else if scenario.flow.perpendicular == 0.0 {
                impact_volume(t, scenario)
            } else if scenario.is_far() {
                impact_uca(t, scenario)
            } else {
                brute_fallback(horizon, scenario)
            }
        }
        Horizon::Asymptotic => {
            if no_flow && no_deg {
                asymptotic_noflow_nodeg(scenario)
            } else if no_flow {
                asymptotic_noflow(scenario)
            } else if scenario.is_far() && x > 0.0 {
                asymptotic_uca(scenario)
            } else if scenario.flow.perpendicular == 0.0 {
                impact_volume(Horizon::Asymptotic, scenario)
            } else {
                brute_fallback(horizon, scenario)
            }
        }
    }
}

/// Dispatch restricted to formulas built on the uniform concentration
/// assumption. Requires `x_n > 0`.
pub fn dispatch_impact_uca(horizon: impl Into<Horizon>, scenario: &NoiseScenario) -> Result<ImpactResult> {
    scenario.validate()?;
    let horizon = horizon.into();
    let simple = scenario.flow.is_zero() && scenario.degradation == 0.0;
    match horizon {
        Horizon::Asymptotic => asymptotic_uca(scenario),
        Horizon::At(t) if simple => uca_noflow_nodeg(t, scenario),
        Horizon::At(t) => impact_uca(t, scenario),
    }
}

fn brute_fallback(horizon: Horizon, scenario: &NoiseScenario) -> Result<ImpactResult> {
    let mut r = impact_brute(horizon, scenario, &BruteOptions::default())?;
    r.fallback = true;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(x: f64, r: f64, k: f64, pp: f64, pn: f64) -> NoiseScenario {
        NoiseScenario::new(x, r, k, FlowSpec::new(pp, pn).unwrap()).unwrap()
    }

    #[test]
    fn impulse_normalisation_and_degradation() {
        let s = sc(0.0, 1.0, 0.0, 0.0, 0.0);
        let c = impulse_concentration([0.0; 3], 1.0 / (4.0 * PI), &s).unwrap();
        assert!((c - 1.0).abs() < 1e-14);
        let s0 = sc(2.0, 1.0, 0.0, 0.0, 0.0);
        let s2 = sc(2.0, 1.0, 2.0, 0.0, 0.0);
        let a = uca_concentration(1.0, &s0).unwrap();
        let b = uca_concentration(1.0, &s2).unwrap();
        assert!((b / a - libm::exp(-2.0)).abs() < 1e-14);
        assert!(impulse_concentration([0.0; 3], 0.0, &s).is_err());
    }

    #[test]
    fn zero_time_limit_away_from_source() {
        let s = sc(1.0, 1.0, 0.0, 0.0, 0.0);
        assert_eq!(impulse_concentration([1.0, 0.0, 0.0], 1e-6, &s).unwrap(), 0.0);
    }

    #[test]
    fn centre_concentration_value() {
        let s = sc(1.0, 1.0, 0.0, 0.0, 0.0);
        let want = libm::pow(PI, -1.5) * libm::exp(-1.0);
        assert!((uca_concentration(0.25, &s).unwrap() - want).abs() < 1e-15);
        // Peak passage: spatial term is one.
        let f = sc(2.0, 1.0, 0.0, 4.0, 0.0);
        let t = 0.5;
        let want = libm::pow(4.0 * PI * t, -1.5);
        assert!((uca_concentration(t, &f).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn dispatch_routes() {
        let far_flow = sc(8.0, 1.0, 0.5, 1.0, 0.5);
        assert_eq!(dispatch_impact(Horizon::Asymptotic, &far_flow).unwrap().method, Method::UcaAsymptotic);
        let simple = sc(2.0, 1.0, 0.0, 0.0, 0.0);
        assert_eq!(dispatch_impact(3.0, &simple).unwrap().method, Method::NoFlowNoDeg);
        let centre = sc(0.0, 1.0, 1.0, 0.0, 0.0);
        assert_eq!(dispatch_impact(3.0, &centre).unwrap().method, Method::VolumeQuadrature);
        let centre_free = sc(0.0, 1.0, 0.0, 0.0, 0.0);
        assert_eq!(dispatch_impact(3.0, &centre_free).unwrap().method, Method::NoFlowNoDegAtReceiver);
        assert_eq!(dispatch_impact(Horizon::Asymptotic, &centre).unwrap().method, Method::NoFlowAsymptoticAtReceiver);
        assert_eq!(
            dispatch_impact(Horizon::Asymptotic, &centre_free).unwrap().method,
            Method::NoFlowNoDegAsymptotic
        );
        assert_eq!(dispatch_impact(Horizon::Asymptotic, &simple).unwrap().method, Method::NoFlowNoDegAsymptotic);
        let far_perp = sc(8.0, 1.0, 0.2, 0.0, 1.0);
        assert_eq!(dispatch_impact(2.0, &far_perp).unwrap().method, Method::UcaQuadrature);
    }

    #[test]
    fn dispatch_falls_back_to_brute_force() {
        let near_perp = sc(0.0, 1.0, 1.0, 0.0, 0.5);
        let r = dispatch_impact(0.5, &near_perp).unwrap();
        assert_eq!(r.method, Method::BruteForce);
        assert!(r.fallback);
    }

    #[test]
    fn dispatch_rejects_negative_time() {
        let s = sc(2.0, 1.0, 0.0, 0.0, 0.0);
        assert!(matches!(dispatch_impact(-1.0, &s), Err(Error::Domain(_))));
    }

    #[test]
    fn scenario_validation() {
        assert!(NoiseScenario::new(-1.0, 1.0, 0.0, FlowSpec::NONE).is_err());
        assert!(NoiseScenario::new(1.0, 0.0, 0.0, FlowSpec::NONE).is_err());
        assert!(NoiseScenario::new(1.0, 1.0, -0.1, FlowSpec::NONE).is_err());
    }
}
