//! Experiment configuration files.
//!
//! A config is TOML with one table per concern. Every physical quantity is a
//! string carrying its unit (`"50 nm"`); dimensionless alternatives use a
//! `_star` suffix and are relative to each curve's reference length.
//!
//! ```toml
//! kind = "noise-trace"
//!
//! [environment]
//! diffusivity = "1e-9 m^2/s"
//! r_obs = "50 nm"
//! degradation_star = 1.0
//!
//! [[noise]]
//! distance = "100 nm"
//! rate = "1.2e6 /s"
//!
//! [sampling]
//! from_star = 0.1
//! to_star = 100.0
//! points = 40
//! spacing = "log"
//!
//! [sim]
//! realizations = 1000
//! seed = 7
//! ```
//!
//! All sources sit on the negative x axis at their distance from the
//! receiver, so a velocity `[v_x, v_y]` gives each source the parallel and
//! transverse flow components `v_x` and `v_y`.

use std::fmt;
use std::path::Path;

use molnoise_core::analytic::NoiseScenario;
use molnoise_core::detector::{DetectorSpec, MAX_ISI_DEPTH};
use molnoise_core::interference::{Channel, ChannelModel, OldIsiMode, TransmitterSpec};
use molnoise_core::scaling::{self, Diffusivity, FlowSpec, Meters, PerSecond, ScalingContext, Seconds};
use molnoise_core::sim::{DegradationMode, Environment, LINEAR_DEGRADATION_LIMIT};
use serde::{Deserialize, Serialize};

use crate::units::{self, Dim};
use crate::Error;

/// Which experiment a config describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    NoiseTrace,
    Interferer,
    BerVsF,
    CustomSweep,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::NoiseTrace => "noise-trace",
            ExperimentKind::Interferer => "interferer",
            ExperimentKind::BerVsF => "ber-vs-f",
            ExperimentKind::CustomSweep => "custom-sweep",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeConfig {
    #[default]
    Linear,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelConfig {
    #[default]
    Uca,
    Volume,
}

/// Analytic formula family requested for a noise source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodConfig {
    /// Pick the most exact applicable formula.
    #[default]
    Auto,
    Uca,
    Volume,
    Brute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OldIsiConfig {
    Exact,
    Zero,
    Integral,
    Subtractive,
}

impl From<OldIsiConfig> for OldIsiMode {
    fn from(m: OldIsiConfig) -> Self {
        match m {
            OldIsiConfig::Exact => OldIsiMode::Exact,
            OldIsiConfig::Zero => OldIsiMode::Zero,
            OldIsiConfig::Integral => OldIsiMode::Integral,
            OldIsiConfig::Subtractive => OldIsiMode::Subtractive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub diffusivity: String,
    pub r_obs: String,
    pub degradation: Option<String>,
    pub degradation_star: Option<f64>,
    /// `[parallel, transverse]` velocity.
    pub velocity: Option<[String; 2]>,
    /// `[parallel, transverse]` Peclet numbers.
    pub peclet: Option<[f64; 2]>,
    pub reference_length: Option<String>,
    #[serde(default)]
    pub degradation_mode: ModeConfig,
    /// Receiver response model for transmitters.
    #[serde(default)]
    pub model: ModelConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub distance: String,
    pub rate: String,
    pub label: Option<String>,
    pub degradation_star: Option<f64>,
    pub peclet: Option<[f64; 2]>,
    #[serde(default)]
    pub method: MethodConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Intended,
    #[default]
    Interferer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmitterConfig {
    pub distance: String,
    pub interval: String,
    pub emitted: u64,
    #[serde(default = "default_p_one")]
    pub p_one: f64,
    #[serde(default)]
    pub role: Role,
    /// Number of bits sent in trace experiments.
    pub bits: Option<usize>,
    pub label: Option<String>,
    pub degradation_star: Option<f64>,
}

fn default_p_one() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub weights: Option<Vec<f64>>,
    /// Fixed threshold; optimised per row when absent.
    pub threshold: Option<u64>,
    #[serde(default)]
    pub isi_depths: Vec<usize>,
    #[serde(default = "default_old_isi")]
    pub old_isi: Vec<OldIsiConfig>,
    #[serde(default = "default_bits")]
    pub bits: usize,
    #[serde(default = "default_warmup")]
    pub warmup: usize,
    /// Degradation rates to sweep, relative to the transmitter distance.
    pub degradation_star: Option<Vec<f64>>,
}

fn default_samples() -> usize {
    10
}
fn default_old_isi() -> Vec<OldIsiConfig> {
    vec![OldIsiConfig::Integral]
}
fn default_bits() -> usize {
    100
}
fn default_warmup() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Zero runs the analytic part only.
    #[serde(default)]
    pub realizations: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub dt: Option<String>,
    pub dt_star: Option<f64>,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub t_star: Option<Vec<f64>>,
    pub from_star: Option<f64>,
    pub to_star: Option<f64>,
    pub points: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Distance,
    RObs,
    DegradationStar,
    PecletParallel,
    PecletPerpendicular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    /// Numbers for dimensionless parameters, unit strings for lengths.
    pub values: Vec<toml::Value>,
    /// Also evaluate the time-varying impact at this time.
    pub t_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub output: Option<String>,
    pub environment: EnvironmentConfig,
    #[serde(default)]
    pub noise: Vec<NoiseConfig>,
    #[serde(default)]
    pub transmitter: Vec<TransmitterConfig>,
    pub detector: Option<DetectorConfig>,
    #[serde(default)]
    pub sim: SimConfig,
    pub sampling: Option<SamplingConfig>,
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}

/// Everything wrong with a config, one message per violated invariant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, msg: impl Into<String>) {
        self.violations.push(msg.into());
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("config is valid");
        }
        for v in &self.violations {
            writeln!(f, "- {v}")?;
        }
        Ok(())
    }
}

/// Medium parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub diffusivity: f64,
    pub r_obs: f64,
    pub mode: DegradationMode,
    pub model: ChannelModel,
}

/// One continuously emitting source, resolved in both unit systems.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCase {
    pub label: String,
    pub distance: f64,
    pub rate: f64,
    pub degradation: f64,
    /// `[parallel, transverse]` velocity in m/s.
    pub velocity: [f64; 2],
    pub method: MethodConfig,
    pub scale: ScalingContext,
    pub scenario: NoiseScenario,
}

/// One impulse transmitter, resolved in both unit systems.
#[derive(Debug, Clone, PartialEq)]
pub struct TxCase {
    pub label: String,
    pub role: Role,
    pub distance: f64,
    pub interval: f64,
    pub emitted: u64,
    pub degradation: f64,
    pub velocity: [f64; 2],
    pub bits: usize,
    pub scale: ScalingContext,
    pub spec: TransmitterSpec,
    pub channel: Channel,
}

impl TxCase {
    pub fn environment(&self, medium: &Medium) -> Environment {
        Environment {
            diffusivity: medium.diffusivity,
            velocity: [self.velocity[0], self.velocity[1], 0.0],
            degradation: self.degradation,
            r_obs: medium.r_obs,
            mode: medium.mode,
        }
    }
}

impl NoiseCase {
    pub fn environment(&self, medium: &Medium) -> Environment {
        Environment {
            diffusivity: medium.diffusivity,
            velocity: [self.velocity[0], self.velocity[1], 0.0],
            degradation: self.degradation,
            r_obs: medium.r_obs,
            mode: medium.mode,
        }
    }
}

/// A validated config with every quantity in SI and dimensionless form.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub medium: Medium,
    pub noise: Vec<NoiseCase>,
    pub transmitters: Vec<TxCase>,
    /// Sample times in units of each curve's own time scale.
    pub t_star: Vec<f64>,
}

/// Table III step for continuous noise, in units of the time scale.
pub const DEFAULT_NOISE_DT_STAR: f64 = 0.1;
/// Table III step for transmitters.
pub const DEFAULT_TX_DT: f64 = 2e-6;

struct Ctx<'a> {
    report: &'a mut ValidationReport,
}

impl Ctx<'_> {
    fn quantity(&mut self, what: &str, s: &str, dim: Dim) -> Option<f64> {
        match units::parse(s, dim) {
            Ok(v) => Some(v),
            Err(e) => {
                self.report.push(format!("{what}: {e}"));
                None
            }
        }
    }
}

fn reference_length(explicit: Option<f64>, distance: f64, r_obs: f64) -> f64 {
    explicit.unwrap_or(if distance > 0.0 { distance } else { r_obs })
}

fn sample_grid(s: &SamplingConfig, report: &mut ValidationReport) -> Vec<f64> {
    if let Some(t) = &s.t_star {
        if s.from_star.is_some() || s.to_star.is_some() || s.points.is_some() {
            report.push("sampling: give either t_star or from_star/to_star/points, not both");
        }
        if t.iter().any(|v| !v.is_finite() || *v < 0.0) {
            report.push("sampling: t_star values must be non-negative");
        }
        if t.windows(2).any(|w| w[0] > w[1]) {
            report.push("sampling: t_star values must be sorted");
        }
        return t.clone();
    }
    let (Some(a), Some(b), Some(n)) = (s.from_star, s.to_star, s.points) else {
        report.push("sampling: need t_star or all of from_star, to_star, points");
        return Vec::new();
    };
    if !(a >= 0.0 && b > a && n >= 1) {
        report.push("sampling: need 0 <= from_star < to_star and points >= 1");
        return Vec::new();
    }
    if n == 1 {
        return vec![b];
    }
    match s.spacing {
        Spacing::Linear => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        Spacing::Log => {
            if a <= 0.0 {
                report.push("sampling: log spacing needs from_star > 0");
                return Vec::new();
            }
            let (la, lb) = (a.ln(), b.ln());
            (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

/// Checks every invariant and, if all hold, resolves the config.
pub fn resolve(config: &ExperimentConfig) -> (ValidationReport, Option<Resolved>) {
    let mut report = ValidationReport::default();
    let mut ctx = Ctx { report: &mut report };
    let env = &config.environment;
    let d = ctx.quantity("environment.diffusivity", &env.diffusivity, Dim::Diffusivity);
    let r_obs = ctx.quantity("environment.r_obs", &env.r_obs, Dim::Length);
    let k_dim = env.degradation.as_ref().and_then(|s| ctx.quantity("environment.degradation", s, Dim::Rate));
    let v_dim = env.velocity.as_ref().map(|[a, b]| {
        [
            ctx.quantity("environment.velocity[0]", a, Dim::Velocity).unwrap_or(0.0),
            ctx.quantity("environment.velocity[1]", b, Dim::Velocity).unwrap_or(0.0),
        ]
    });
    let l_explicit =
        env.reference_length.as_ref().and_then(|s| ctx.quantity("environment.reference_length", s, Dim::Length));
    let dt_dim = config.sim.dt.as_ref().and_then(|s| ctx.quantity("sim.dt", s, Dim::Time));

    if let Some(d) = d {
        if d <= 0.0 {
            report.push("environment.diffusivity must be positive");
        }
    }
    if let Some(r) = r_obs {
        if r <= 0.0 {
            report.push(format!("environment.r_obs must be positive (got {})", units::format_si(r, Dim::Length)));
        }
    }
    if env.degradation.is_some() && env.degradation_star.is_some() {
        report.push("environment: give degradation or degradation_star, not both");
    }
    if env.velocity.is_some() && env.peclet.is_some() {
        report.push("environment: give velocity or peclet, not both");
    }
    if k_dim.is_some_and(|k| k < 0.0) || env.degradation_star.is_some_and(|k| !(k >= 0.0)) {
        report.push("environment: degradation rate must be non-negative");
    }
    if l_explicit.is_some_and(|l| l <= 0.0) {
        report.push("environment.reference_length must be positive");
    }
    if config.sim.dt.is_some() && config.sim.dt_star.is_some() {
        report.push("sim: give dt or dt_star, not both");
    }
    if dt_dim.is_some_and(|v| v <= 0.0) || config.sim.dt_star.is_some_and(|v| !(v > 0.0)) {
        report.push("sim: time step must be positive");
    }

    let t_star = match &config.sampling {
        Some(s) => sample_grid(s, &mut report),
        None => Vec::new(),
    };

    let needs_sources = !matches!(config.kind, ExperimentKind::CustomSweep) || config.noise.is_empty();
    if config.noise.is_empty() && config.transmitter.is_empty() && needs_sources {
        report.push("no molecule sources configured");
    }

    let (Some(d), Some(r_obs)) = (d.filter(|&v| v > 0.0), r_obs.filter(|&v| v > 0.0)) else {
        // Still report unit errors in the sources.
        let mut ctx = Ctx { report: &mut report };
        for (i, n) in config.noise.iter().enumerate() {
            ctx.quantity(&format!("noise[{i}].distance"), &n.distance, Dim::Length);
            ctx.quantity(&format!("noise[{i}].rate"), &n.rate, Dim::Rate);
        }
        for (i, t) in config.transmitter.iter().enumerate() {
            ctx.quantity(&format!("transmitter[{i}].distance"), &t.distance, Dim::Length);
            ctx.quantity(&format!("transmitter[{i}].interval"), &t.interval, Dim::Time);
        }
        return (report, None);
    };
    let medium = Medium {
        diffusivity: d,
        r_obs,
        mode: match env.degradation_mode {
            ModeConfig::Linear => DegradationMode::Linear,
            ModeConfig::Exact => DegradationMode::Exact,
        },
        model: match env.model {
            ModelConfig::Uca => ChannelModel::Uca,
            ModelConfig::Volume => ChannelModel::Volume,
        },
    };
    let diff = Diffusivity(d);

    let mut noise = Vec::new();
    for (i, n) in config.noise.iter().enumerate() {
        let mut ctx = Ctx { report: &mut report };
        let name = format!("noise[{i}]");
        let (Some(x), Some(rate)) = (
            ctx.quantity(&format!("{name}.distance"), &n.distance, Dim::Length),
            ctx.quantity(&format!("{name}.rate"), &n.rate, Dim::Rate),
        ) else {
            continue;
        };
        if x < 0.0 {
            report.push(format!("{name}.distance must be non-negative"));
            continue;
        }
        if rate <= 0.0 {
            report.push(format!("{name}.rate must be positive"));
            continue;
        }
        let l = reference_length(l_explicit, x, r_obs);
        let Ok(n_ref) = scaling::noise_ref_count(PerSecond(rate), Meters(l), diff) else {
            report.push(format!("{name}: cannot build reference count"));
            continue;
        };
        let scale = ScalingContext::new(Meters(l), diff, n_ref).expect("positive scales");
        let k_star = n.degradation_star.or(env.degradation_star).unwrap_or_else(|| {
            scale.rate_to_star(PerSecond(k_dim.unwrap_or(0.0)))
        });
        let pe = n.peclet.or(env.peclet).unwrap_or_else(|| {
            let v = v_dim.unwrap_or([0.0, 0.0]);
            [scale.peclet(scaling::MetersPerSecond(v[0])), scale.peclet(scaling::MetersPerSecond(v[1]))]
        });
        let flow = FlowSpec { parallel: pe[0], perpendicular: pe[1] };
        let scenario = NoiseScenario { distance: x / l, r_obs: r_obs / l, degradation: k_star, flow };
        if let Err(e) = scenario.validate() {
            report.push(format!("{name}: {e}"));
            continue;
        }
        match n.method {
            MethodConfig::Uca if x == 0.0 => {
                report.push(format!("{name}: UCA requested with x_n = 0 (the concentration at the source is singular)"))
            }
            MethodConfig::Volume if flow.perpendicular != 0.0 => {
                report.push(format!("{name}: volume integral requested with transverse flow Pe_perp != 0"))
            }
            _ => {}
        }
        let label = n.label.clone().unwrap_or_else(|| format!("x={}", units::format_nm(x)));
        noise.push(NoiseCase {
            label,
            distance: x,
            rate,
            degradation: scale.rate_from_star(k_star).get(),
            velocity: [scale.velocity_from_peclet(pe[0]).get(), scale.velocity_from_peclet(pe[1]).get()],
            method: n.method,
            scale,
            scenario,
        });
    }

    let mut transmitters = Vec::new();
    for (i, t) in config.transmitter.iter().enumerate() {
        let mut ctx = Ctx { report: &mut report };
        let name = format!("transmitter[{i}]");
        let (Some(x), Some(interval)) = (
            ctx.quantity(&format!("{name}.distance"), &t.distance, Dim::Length),
            ctx.quantity(&format!("{name}.interval"), &t.interval, Dim::Time),
        ) else {
            continue;
        };
        if x < 0.0 || interval <= 0.0 || t.emitted == 0 || !(0.0..=1.0).contains(&t.p_one) {
            report.push(format!("{name}: need distance >= 0, interval > 0, emitted > 0 and p_one in [0, 1]"));
            continue;
        }
        if t.p_one == 0.0 {
            report.push(format!("{name}: p_one = 0 leaves no reference count"));
            continue;
        }
        let l = reference_length(l_explicit, x, r_obs);
        let n_ref = scaling::tx_ref_count(t.emitted as f64, Seconds(interval), t.p_one, Meters(l), diff)
            .expect("validated above");
        let scale = ScalingContext::new(Meters(l), diff, n_ref).expect("positive scales");
        let k_star = t.degradation_star.or(env.degradation_star).unwrap_or_else(|| {
            scale.rate_to_star(PerSecond(k_dim.unwrap_or(0.0)))
        });
        let pe = env.peclet.unwrap_or_else(|| {
            let v = v_dim.unwrap_or([0.0, 0.0]);
            [scale.peclet(scaling::MetersPerSecond(v[0])), scale.peclet(scaling::MetersPerSecond(v[1]))]
        });
        let flow = FlowSpec { parallel: pe[0], perpendicular: pe[1] };
        let spec = TransmitterSpec {
            distance: x / l,
            interval: scale.time_to_star(Seconds(interval)),
            emitted: t.emitted as f64 / n_ref,
            p_one: t.p_one,
            flow,
            start: 0.0,
        };
        let channel = match Channel::new(r_obs / l, k_star, medium.model) {
            Ok(c) => c,
            Err(e) => {
                report.push(format!("{name}: {e}"));
                continue;
            }
        };
        let label = t.label.clone().unwrap_or_else(|| format!("x={}", units::format_nm(x)));
        transmitters.push(TxCase {
            label,
            role: t.role,
            distance: x,
            interval,
            emitted: t.emitted,
            degradation: scale.rate_from_star(k_star).get(),
            velocity: [scale.velocity_from_peclet(pe[0]).get(), scale.velocity_from_peclet(pe[1]).get()],
            bits: t.bits.unwrap_or(8),
            scale,
            spec,
            channel,
        });
    }

    check_kind(config, &noise, &transmitters, &t_star, &mut report);
    check_steps(config, &medium, &noise, &transmitters, dt_dim, &mut report);

    if report.is_valid() {
        let resolved = Resolved { config: config.clone(), medium, noise, transmitters, t_star };
        (report, Some(resolved))
    } else {
        (report, None)
    }
}

fn check_kind(
    config: &ExperimentConfig,
    noise: &[NoiseCase],
    transmitters: &[TxCase],
    t_star: &[f64],
    report: &mut ValidationReport,
) {
    match config.kind {
        ExperimentKind::NoiseTrace => {
            if config.noise.is_empty() && !config.transmitter.is_empty() {
                report.push("noise-trace needs at least one [[noise]] source");
            }
            if config.sampling.is_none() {
                report.push("noise-trace needs a [sampling] table");
            }
        }
        ExperimentKind::Interferer => {
            if config.transmitter.is_empty() && !config.noise.is_empty() {
                report.push("interferer needs at least one [[transmitter]]");
            }
            if config.sampling.is_none() {
                report.push("interferer needs a [sampling] table");
            }
            for t in transmitters {
                if t.spec.distance == 0.0 {
                    report.push(format!("{}: interferer asymptote needs a distance > 0", t.label));
                }
            }
        }
        ExperimentKind::BerVsF => {
            let intended = transmitters.iter().filter(|t| t.role == Role::Intended).count();
            if intended != 1 && !config.transmitter.is_empty() {
                report.push(format!("ber-vs-f needs exactly one intended transmitter (found {intended})"));
            }
            for t in transmitters.iter().filter(|t| t.role == Role::Interferer) {
                if t.spec.distance == 0.0 {
                    report.push(format!("{}: interferer asymptote needs a distance > 0", t.label));
                }
            }
            match &config.detector {
                None => report.push("ber-vs-f needs a [detector] table"),
                Some(d) => {
                    if d.samples == 0 {
                        report.push("detector.samples must be at least 1");
                    }
                    if let Some(w) = &d.weights {
                        if w.len() != d.samples {
                            report.push("detector.weights must have one entry per sample");
                        } else if let Err(e) = DetectorSpec::new(w.clone(), 0, 0, OldIsiMode::Zero) {
                            report.push(format!("detector.weights: {e}"));
                        } else if w.iter().any(|&v| v != w[0]) {
                            report.push("detector.weights must be equal for the analytic error probability");
                        }
                    }
                    if d.isi_depths.is_empty() {
                        report.push("detector.isi_depths must list at least one depth");
                    }
                    if let Some(&f) = d.isi_depths.iter().find(|&&f| f > MAX_ISI_DEPTH) {
                        report.push(format!("detector.isi_depths: F = {f} exceeds the limit of {MAX_ISI_DEPTH}"));
                    }
                    if d.old_isi.contains(&OldIsiConfig::Exact) {
                        report.push("detector.old_isi: the exact mode needs a known sequence; use zero, integral or subtractive");
                    }
                    if d.warmup >= d.bits {
                        report.push("detector: warmup must be shorter than bits");
                    }
                    if d.degradation_star.as_ref().is_some_and(|v| v.iter().any(|k| !(*k >= 0.0))) {
                        report.push("detector.degradation_star values must be non-negative");
                    }
                }
            }
        }
        ExperimentKind::CustomSweep => {
            match &config.sweep {
                None => report.push("custom-sweep needs a [sweep] table"),
                Some(s) => {
                    if s.values.is_empty() {
                        report.push("sweep.values is empty");
                    }
                    for v in &s.values {
                        let ok = match s.parameter {
                            SweepParameter::Distance | SweepParameter::RObs => {
                                v.as_str().is_some_and(|s| units::parse(s, Dim::Length).is_ok_and(|x| x >= 0.0))
                            }
                            _ => v.as_float().or(v.as_integer().map(|i| i as f64)).is_some_and(f64::is_finite),
                        };
                        if !ok {
                            report.push(format!("sweep.values: bad value {v} for {:?}", s.parameter));
                        }
                    }
                }
            }
            if noise.is_empty() && !config.noise.is_empty() {
                // Individual noise errors were reported above.
            } else if config.noise.is_empty() {
                report.push("custom-sweep needs at least one [[noise]] source");
            }
        }
    }
    if matches!(config.kind, ExperimentKind::NoiseTrace | ExperimentKind::Interferer) && t_star.is_empty() {
        if config.sampling.is_some() && report.is_valid() {
            report.push("sampling: no sample times");
        }
    }
}

fn check_steps(
    config: &ExperimentConfig,
    medium: &Medium,
    noise: &[NoiseCase],
    transmitters: &[TxCase],
    dt_dim: Option<f64>,
    report: &mut ValidationReport,
) {
    if config.sim.realizations == 0 || medium.mode == DegradationMode::Exact {
        return;
    }
    for n in noise {
        let dt = noise_dt(config, n, dt_dim);
        if n.degradation * dt > LINEAR_DEGRADATION_LIMIT {
            report.push(format!(
                "{}: k*dt = {:.3} exceeds 0.1 in linear degradation mode; use degradation_mode = \"exact\" or a smaller step",
                n.label,
                n.degradation * dt
            ));
        }
    }
    if let (Some(sweep), Some(t)) = (
        config.detector.as_ref().and_then(|d| d.degradation_star.as_ref()),
        transmitters.iter().find(|t| t.role == Role::Intended),
    ) {
        let dt = tx_dt(config, t, dt_dim);
        for &ks in sweep {
            let k = t.scale.rate_from_star(ks).get();
            if k * dt > LINEAR_DEGRADATION_LIMIT {
                report.push(format!(
                    "detector.degradation_star = {ks}: k*dt = {:.3} exceeds 0.1 in linear degradation mode",
                    k * dt
                ));
            }
        }
    }
    for t in transmitters {
        let dt = tx_dt(config, t, dt_dim);
        if t.degradation * dt > LINEAR_DEGRADATION_LIMIT {
            report.push(format!(
                "{}: k*dt = {:.3} exceeds 0.1 in linear degradation mode; use degradation_mode = \"exact\" or a smaller step",
                t.label,
                t.degradation * dt
            ));
        }
    }
}

/// Simulation step for a noise curve in seconds.
pub fn noise_dt(config: &ExperimentConfig, n: &NoiseCase, dt_dim: Option<f64>) -> f64 {
    dt_dim.unwrap_or_else(|| n.scale.time_from_star(config.sim.dt_star.unwrap_or(DEFAULT_NOISE_DT_STAR)).get())
}

/// Simulation step for a transmitter curve in seconds.
pub fn tx_dt(config: &ExperimentConfig, t: &TxCase, dt_dim: Option<f64>) -> f64 {
    match config.sim.dt_star {
        Some(s) if dt_dim.is_none() => t.scale.time_from_star(s).get(),
        _ => dt_dim.unwrap_or(DEFAULT_TX_DT),
    }
}

/// Dimensional step resolved from the config, if one was given in seconds.
pub fn explicit_dt(config: &ExperimentConfig) -> Option<f64> {
    config.sim.dt.as_ref().and_then(|s| units::parse(s, Dim::Time).ok())
}

/// Validation only.
pub fn validate(config: &ExperimentConfig) -> ValidationReport {
    resolve(config).0
}
