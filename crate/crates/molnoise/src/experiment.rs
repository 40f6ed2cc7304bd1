//! Runs a resolved config and produces the CSV table and run manifest.
//!
//! Everything is computed in memory first; files are written only after the
//! whole experiment succeeded, so a failure never leaves partial output.
//! All values in the CSV are dimensionless, each curve in its own reference
//! scale (listed in the manifest).

use std::path::{Path, PathBuf};

use molnoise_core::analytic::{
    dispatch_impact, dispatch_impact_uca, impact_brute, impact_volume, BruteOptions, Horizon, ImpactResult,
    NoiseScenario,
};
use molnoise_core::detector::{expected_ber, optimize_threshold, DetectorSpec, Link};
use molnoise_core::interference::{asymptotic_interference, expected_observation, Channel, ChannelModel};
use molnoise_core::scaling::{FlowSpec, PerSecond};
use molnoise_core::sim::{simulate_bit_sequence, RealizationSpec, SourceSpec, TxSource};
use rand::Rng;
use serde_json::{json, Value};

use crate::config::{
    self, ExperimentConfig, ExperimentKind, MethodConfig, NoiseCase, Resolved, Role, SweepParameter, TxCase,
};
use crate::ensemble::{count_ensemble, score_traces, trace_ensemble, CountStats};
use crate::units::{self, Dim};
use crate::{Error, Result};

/// Files produced by one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outputs {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub csv: String,
    pub manifest: String,
}

/// In-memory result of an experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub csv: String,
    /// Manifest without the output file names.
    pub manifest: Value,
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub realizations: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            config.sim.seed = s;
        }
        if let Some(n) = self.realizations {
            config.sim.realizations = n;
        }
    }
}

/// Manifest path for a CSV path: `out.csv` becomes `out.manifest.json`.
pub fn manifest_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("manifest.json")
}

/// Validates, computes and writes the experiment. `out` overrides the
/// config's output path; the default is `<kind>.csv`.
pub fn run_experiment(config: &ExperimentConfig, out: Option<&Path>) -> Result<Outputs> {
    let report = compute(config)?;
    let csv_path = out
        .map(Path::to_path_buf)
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", config.kind)));
    let manifest_path = manifest_path(&csv_path);
    let mut manifest = report.manifest;
    manifest["csv"] = json!(csv_path.file_name().map(|f| f.to_string_lossy().into_owned()));
    let manifest = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Other(e.to_string()))? + "\n";
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&csv_path, &report.csv)?;
    std::fs::write(&manifest_path, &manifest)?;
    Ok(Outputs { csv_path, manifest_path, csv: report.csv, manifest })
}

/// Validates and computes the experiment without touching the filesystem.
pub fn compute(config: &ExperimentConfig) -> Result<Report> {
    let (report, resolved) = config::resolve(config);
    let resolved = resolved.ok_or(Error::Validation(report))?;
    let (header, rows) = match config.kind {
        ExperimentKind::NoiseTrace => noise_trace(&resolved)?,
        ExperimentKind::Interferer => interferer(&resolved)?,
        ExperimentKind::BerVsF => ber_vs_f(&resolved)?,
        ExperimentKind::CustomSweep => custom_sweep(&resolved)?,
    };
    let csv = write_csv(&header, &rows)?;
    Ok(Report { csv, manifest: manifest(&resolved, &header) })
}

type Row = Vec<String>;

fn write_csv(header: &[&str], rows: &[Row]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Other(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Other(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Other(e.to_string()))
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

fn sim_cells(stats: Option<&CountStats>, i: usize, ref_count: f64) -> [String; 2] {
    match stats {
        Some(s) => [num(s.mean(i) / ref_count), num(s.stderr(i) / ref_count)],
        None => [String::new(), String::new()],
    }
}

/// Distinct seed for each curve of an experiment.
fn curve_seed(seed: u64, curve: usize) -> u64 {
    seed.wrapping_add((curve as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn source_position(distance: f64) -> [f64; 3] {
    [-distance, 0.0, 0.0]
}

fn noise_impact(method: MethodConfig, h: Horizon, s: &NoiseScenario) -> Result<ImpactResult> {
    Ok(match method {
        MethodConfig::Auto => dispatch_impact(h, s)?,
        MethodConfig::Uca => dispatch_impact_uca(h, s)?,
        MethodConfig::Volume => impact_volume(h, s)?,
        MethodConfig::Brute => impact_brute(h, s, &BruteOptions::default())?,
    })
}

fn uca_impact(h: Horizon, s: &NoiseScenario) -> Result<Option<ImpactResult>> {
    if s.distance > 0.0 {
        Ok(Some(dispatch_impact_uca(h, s)?))
    } else {
        Ok(None)
    }
}

fn simulate_noise(r: &Resolved, n: &NoiseCase, times_star: &[f64], seed: u64) -> Result<Option<CountStats>> {
    let cfg = &r.config;
    if cfg.sim.realizations == 0 {
        return Ok(None);
    }
    let env = n.environment(&r.medium);
    let tu = n.scale.time_unit().get();
    let spec = RealizationSpec {
        dt: config::noise_dt(cfg, n, config::explicit_dt(cfg)),
        sample_times: times_star.iter().map(|t| t * tu).collect(),
        sources: vec![SourceSpec::Continuous { position: source_position(n.distance), rate: n.rate }],
    };
    let stats = count_ensemble(times_star.len(), cfg.sim.realizations as u64, seed, |rng| {
        molnoise_core::sim::run_realization(&env, &spec, rng)
    })?;
    Ok(Some(stats))
}

const NOISE_HEADER: [&str; 13] = [
    "curve",
    "distance_m",
    "t_star",
    "analytic_uca",
    "uca_method",
    "analytic",
    "method",
    "fallback",
    "asymptote",
    "asymptote_method",
    "sim_mean",
    "sim_stderr",
    "realizations",
];

fn noise_trace(r: &Resolved) -> Result<(Vec<&'static str>, Vec<Row>)> {
    let mut rows = Vec::new();
    for (c, n) in r.noise.iter().enumerate() {
        let s = &n.scenario;
        let asym = noise_impact(n.method, Horizon::Asymptotic, s)?;
        let sim = simulate_noise(r, n, &r.t_star, curve_seed(r.config.sim.seed, c))?;
        for (i, &t) in r.t_star.iter().enumerate() {
            let uca = uca_impact(Horizon::At(t), s)?;
            let a = noise_impact(n.method, Horizon::At(t), s)?;
            let [mean, se] = sim_cells(sim.as_ref(), i, n.scale.ref_count());
            rows.push(vec![
                n.label.clone(),
                num(n.distance),
                num(t),
                opt(uca.map(|u| u.value)),
                uca.map_or_else(String::new, |u| u.method.label().to_string()),
                num(a.value),
                a.method.label().to_string(),
                a.fallback.to_string(),
                num(asym.value),
                asym.method.label().to_string(),
                mean,
                se,
                r.config.sim.realizations.to_string(),
            ]);
        }
    }
    Ok((NOISE_HEADER.to_vec(), rows))
}

fn model_label(model: ChannelModel) -> &'static str {
    match model {
        ChannelModel::Uca => "uca",
        ChannelModel::Volume => "volume",
    }
}

fn interferer(r: &Resolved) -> Result<(Vec<&'static str>, Vec<Row>)> {
    let header = vec![
        "curve",
        "distance_m",
        "t_star",
        "interval",
        "analytic_mean",
        "asymptote",
        "model",
        "sim_mean",
        "sim_stderr",
        "realizations",
    ];
    let cfg = &r.config;
    let mut rows = Vec::new();
    for (c, t) in r.transmitters.iter().enumerate() {
        // Silent after its last bit.
        let last = r.t_star.last().map_or(0, |&ts| t.spec.current_interval(ts));
        let ones: Vec<bool> = (0..t.bits.max(last)).map(|j| j < t.bits).collect();
        let asym = asymptotic_interference(&t.spec, &t.channel)?;
        let sim = simulate_interferer(r, t, curve_seed(cfg.sim.seed, c))?;
        for (i, &ts) in r.t_star.iter().enumerate() {
            let mean = t.spec.p_one * expected_observation(ts, &[(t.spec, &ones)], &t.channel)?;
            let [sm, se] = sim_cells(sim.as_ref(), i, t.scale.ref_count());
            rows.push(vec![
                t.label.clone(),
                num(t.distance),
                num(ts),
                t.spec.current_interval(ts).to_string(),
                num(mean),
                num(asym),
                model_label(t.channel.model).to_string(),
                sm,
                se,
                cfg.sim.realizations.to_string(),
            ]);
        }
    }
    Ok((header, rows))
}

/// Impulse source with i.i.d. random bits, drawn from `rng`.
fn random_impulses<R: Rng + ?Sized>(t: &TxCase, bits: usize, rng: &mut R) -> SourceSpec {
    let times = (0..bits).filter(|_| rng.random::<f64>() < t.spec.p_one).map(|j| j as f64 * t.interval).collect();
    SourceSpec::Impulses { position: source_position(t.distance), count: t.emitted, times }
}

fn simulate_interferer(r: &Resolved, t: &TxCase, seed: u64) -> Result<Option<CountStats>> {
    let cfg = &r.config;
    if cfg.sim.realizations == 0 {
        return Ok(None);
    }
    let env = t.environment(&r.medium);
    let tu = t.scale.time_unit().get();
    let dt = config::tx_dt(cfg, t, config::explicit_dt(cfg));
    let sample_times: Vec<f64> = r.t_star.iter().map(|s| s * tu).collect();
    let stats = count_ensemble(r.t_star.len(), cfg.sim.realizations as u64, seed, |rng| {
        let spec = RealizationSpec { dt, sample_times: sample_times.clone(), sources: vec![random_impulses(t, t.bits, rng)] };
        molnoise_core::sim::run_realization(&env, &spec, rng)
    })?;
    Ok(Some(stats))
}

/// Intended link at dimensional degradation rate `k`, with the asymptotic
/// mean count of every other source as background.
fn link_at(r: &Resolved, intended: &TxCase, k: f64) -> Result<Link> {
    let k_star = |scale: &molnoise_core::scaling::ScalingContext| scale.rate_to_star(PerSecond(k));
    let channel = Channel::new(intended.channel.r_obs, k_star(&intended.scale), intended.channel.model)?;
    let mut background = 0.0;
    for t in r.transmitters.iter().filter(|t| t.role == Role::Interferer) {
        let ch = Channel::new(t.channel.r_obs, k_star(&t.scale), t.channel.model)?;
        background += asymptotic_interference(&t.spec, &ch)? * t.scale.ref_count();
    }
    for n in &r.noise {
        let s = NoiseScenario { degradation: k_star(&n.scale), ..n.scenario };
        background += dispatch_impact(Horizon::Asymptotic, &s)?.value * n.scale.ref_count();
    }
    Ok(Link::new(intended.spec, channel, intended.scale.ref_count())?.with_background(background))
}

fn ber_vs_f(r: &Resolved) -> Result<(Vec<&'static str>, Vec<Row>)> {
    let header = vec![
        "curve",
        "degradation_star",
        "old_isi",
        "isi_depth",
        "threshold",
        "expected_ber",
        "sim_ber",
        "sim_stderr",
        "realizations",
    ];
    let cfg = &r.config;
    let det = cfg.detector.as_ref().expect("validated");
    let intended = r.transmitters.iter().find(|t| t.role == Role::Intended).expect("validated");
    let sweep = det
        .degradation_star
        .clone()
        .unwrap_or_else(|| vec![intended.scale.rate_to_star(PerSecond(intended.degradation))]);
    let weights = det.weights.clone().unwrap_or_else(|| vec![1.0; det.samples]);
    let mut rows = Vec::new();
    for (c, &ks) in sweep.iter().enumerate() {
        let k = intended.scale.rate_from_star(ks).get();
        let link = link_at(r, intended, k)?;
        let traces = if cfg.sim.realizations > 0 {
            let env = molnoise_core::sim::Environment { degradation: k, ..intended.environment(&r.medium) };
            let dt = config::tx_dt(cfg, intended, config::explicit_dt(cfg));
            let tx = TxSource {
                position: source_position(intended.distance),
                emitted: intended.emitted,
                interval: intended.interval,
                p_one: intended.spec.p_one,
            };
            let horizon = det.bits as f64 * intended.interval;
            Some(trace_ensemble(cfg.sim.realizations as u64, curve_seed(cfg.sim.seed, c), |rng| {
                let mut extra = Vec::new();
                for t in r.transmitters.iter().filter(|t| t.role == Role::Interferer) {
                    let bits = (horizon / t.interval).ceil() as usize;
                    extra.push(random_impulses(t, bits, rng));
                }
                for n in &r.noise {
                    extra.push(SourceSpec::Continuous { position: source_position(n.distance), rate: n.rate });
                }
                simulate_bit_sequence(&env, &tx, det.samples, dt, det.bits, &extra, rng)
            })?)
        } else {
            None
        };
        for &mode in &det.old_isi {
            for &f in &det.isi_depths {
                let spec = DetectorSpec::new(weights.clone(), det.threshold.unwrap_or(0), f, mode.into())?;
                let (xi, ber) = match det.threshold {
                    Some(xi) => (xi, expected_ber(&link, &spec)?),
                    None => optimize_threshold(&link, &spec)?,
                };
                let (sb, se) = match &traces {
                    Some(tr) => {
                        let s = score_traces(tr, &spec.with_threshold(xi), det.warmup)?;
                        (num(s.ber), num(s.stderr))
                    }
                    None => (String::new(), String::new()),
                };
                rows.push(vec![
                    format!("k*={ks}"),
                    num(ks),
                    OldIsiModeLabel(mode.into()).to_string(),
                    f.to_string(),
                    xi.to_string(),
                    num(ber),
                    sb,
                    se,
                    cfg.sim.realizations.to_string(),
                ]);
            }
        }
    }
    Ok((header, rows))
}

struct OldIsiModeLabel(molnoise_core::interference::OldIsiMode);

impl std::fmt::Display for OldIsiModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.0.label())
    }
}

fn sweep_value(v: &toml::Value, p: SweepParameter) -> f64 {
    match p {
        SweepParameter::Distance | SweepParameter::RObs => {
            units::parse(v.as_str().expect("validated"), Dim::Length).expect("validated")
        }
        _ => v.as_float().or(v.as_integer().map(|i| i as f64)).expect("validated"),
    }
}

fn custom_sweep(r: &Resolved) -> Result<(Vec<&'static str>, Vec<Row>)> {
    let header = vec![
        "curve",
        "parameter",
        "value",
        "asymptote",
        "asymptote_method",
        "fallback",
        "uca_asymptote",
        "uca_method",
        "t_star",
        "analytic_t",
        "method_t",
        "sim_mean",
        "sim_stderr",
        "realizations",
    ];
    let cfg = &r.config;
    let sw = cfg.sweep.as_ref().expect("validated");
    let mut rows = Vec::new();
    let mut curve = 0;
    for n in &r.noise {
        let l = n.scale.length().get();
        for v in &sw.values {
            let raw = sweep_value(v, sw.parameter);
            let mut s = n.scenario;
            let mut case = n.clone();
            match sw.parameter {
                SweepParameter::Distance => {
                    s.distance = raw / l;
                    case.distance = raw;
                }
                SweepParameter::RObs => s.r_obs = raw / l,
                SweepParameter::DegradationStar => {
                    s.degradation = raw;
                    case.degradation = n.scale.rate_from_star(raw).get();
                }
                SweepParameter::PecletParallel => {
                    s.flow = FlowSpec { parallel: raw, ..s.flow };
                    case.velocity[0] = n.scale.velocity_from_peclet(raw).get();
                }
                SweepParameter::PecletPerpendicular => {
                    s.flow = FlowSpec { perpendicular: raw, ..s.flow };
                    case.velocity[1] = n.scale.velocity_from_peclet(raw).get();
                }
            }
            s.validate()?;
            case.scenario = s;
            let asym = noise_impact(n.method, Horizon::Asymptotic, &s)?;
            let uca = uca_impact(Horizon::Asymptotic, &s)?;
            let (at, sim) = match sw.t_star {
                Some(t) => {
                    let a = noise_impact(n.method, Horizon::At(t), &s)?;
                    let mut medium = r.medium;
                    if sw.parameter == SweepParameter::RObs {
                        medium.r_obs = raw;
                    }
                    let rr = Resolved { medium, ..r.clone() };
                    (Some(a), simulate_noise(&rr, &case, &[t], curve_seed(cfg.sim.seed, curve))?)
                }
                None => (None, None),
            };
            curve += 1;
            let [sm, se] = sim_cells(sim.as_ref(), 0, n.scale.ref_count());
            rows.push(vec![
                n.label.clone(),
                format!("{:?}", sw.parameter).to_lowercase(),
                num(raw),
                num(asym.value),
                asym.method.label().to_string(),
                asym.fallback.to_string(),
                opt(uca.map(|u| u.value)),
                uca.map_or_else(String::new, |u| u.method.label().to_string()),
                opt(sw.t_star),
                opt(at.map(|a| a.value)),
                at.map_or_else(String::new, |a| a.method.label().to_string()),
                sm,
                se,
                cfg.sim.realizations.to_string(),
            ]);
        }
    }
    Ok((header, rows))
}

fn manifest(r: &Resolved, header: &[&str]) -> Value {
    let noise: Vec<Value> = r
        .noise
        .iter()
        .map(|n| {
            json!({
                "label": n.label,
                "distance_m": n.distance,
                "rate_per_s": n.rate,
                "degradation_per_s": n.degradation,
                "velocity_m_per_s": n.velocity,
                "method": format!("{:?}", n.method).to_lowercase(),
                "reference_length_m": n.scale.length().get(),
                "time_unit_s": n.scale.time_unit().get(),
                "ref_count": n.scale.ref_count(),
                "distance_star": n.scenario.distance,
                "r_obs_star": n.scenario.r_obs,
                "degradation_star": n.scenario.degradation,
                "peclet": [n.scenario.flow.parallel, n.scenario.flow.perpendicular],
            })
        })
        .collect();
    let transmitters: Vec<Value> = r
        .transmitters
        .iter()
        .map(|t| {
            json!({
                "label": t.label,
                "role": format!("{:?}", t.role).to_lowercase(),
                "distance_m": t.distance,
                "interval_s": t.interval,
                "emitted": t.emitted,
                "p_one": t.spec.p_one,
                "bits": t.bits,
                "degradation_per_s": t.degradation,
                "velocity_m_per_s": t.velocity,
                "reference_length_m": t.scale.length().get(),
                "time_unit_s": t.scale.time_unit().get(),
                "ref_count": t.scale.ref_count(),
                "distance_star": t.spec.distance,
                "interval_star": t.spec.interval,
                "emitted_star": t.spec.emitted,
                "r_obs_star": t.channel.r_obs,
                "degradation_star": t.channel.degradation,
                "peclet": [t.spec.flow.parallel, t.spec.flow.perpendicular],
                "model": model_label(t.channel.model),
            })
        })
        .collect();
    json!({
        "tool": "molnoise",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": molnoise_core::VERSION,
        "kind": r.config.kind.label(),
        "seed": r.config.sim.seed,
        "realizations": r.config.sim.realizations,
        "columns": header,
        "config": serde_json::to_value(&r.config).unwrap_or(Value::Null),
        "resolved": {
            "diffusivity_m2_per_s": r.medium.diffusivity,
            "r_obs_m": r.medium.r_obs,
            "degradation_mode": format!("{:?}", r.medium.mode).to_lowercase(),
            "noise": noise,
            "transmitters": transmitters,
            "t_star": r.t_star,
        },
    })
}
