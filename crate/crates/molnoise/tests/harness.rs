//! Config resolution, experiment kinds and reproducibility.

use molnoise::config::{resolve, validate, ExperimentConfig};
use molnoise::experiment::{compute, run_experiment};
use molnoise::presets;

const TABLE_III: &str = r#"
kind = "ber-vs-f"
[environment]
diffusivity = "1e-9 m^2/s"
r_obs = "50 nm"
[[noise]]
distance = "400 nm"
rate = "1.2e6 /s"
[[transmitter]]
distance = "400 nm"
interval = "0.2 ms"
emitted = 10000
p_one = 0.5
role = "intended"
[[transmitter]]
distance = "1 um"
interval = "0.2 ms"
emitted = 10000
[detector]
samples = 10
isi_depths = [2, 4]
old_isi = ["integral", "subtractive"]
bits = 20
warmup = 10
[sim]
realizations = 8
seed = 5
dt = "2 us"
"#;

#[test]
fn table_iii_defaults_validate() {
    let cfg = ExperimentConfig::from_toml(TABLE_III).unwrap();
    let rep = validate(&cfg);
    assert!(rep.is_valid(), "{rep}");
    let r = resolve(&cfg).1.unwrap();
    let tx = &r.transmitters[0];
    assert!((tx.scale.ref_count() - 4000.0).abs() < 1e-9);
    assert!((tx.spec.interval - 1.25).abs() < 1e-12);
    assert!((tx.spec.emitted - 2.5).abs() < 1e-12);
    assert!((tx.channel.r_obs - 0.125).abs() < 1e-12);
    // Noise at 400 nm: N_REF = L^2 N_gen / D.
    assert!((r.noise[0].scale.ref_count() - 192.0).abs() < 1e-9);
}

#[test]
fn ber_with_interference_is_reproducible() {
    let cfg = ExperimentConfig::from_toml(TABLE_III).unwrap();
    let a = compute(&cfg).unwrap();
    let b = compute(&cfg).unwrap();
    assert_eq!(a.csv, b.csv);
    assert_eq!(a.manifest, b.manifest);
    let rows: Vec<&str> = a.csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        let ber: f64 = cells[5].parse().unwrap();
        let sim: f64 = cells[6].parse().unwrap();
        assert!(ber > 0.0 && ber < 0.5 && (0.0..=1.0).contains(&sim), "{row}");
    }
    let mut other = cfg.clone();
    other.sim.seed = 6;
    assert_ne!(compute(&other).unwrap().csv, a.csv);
}

#[test]
fn run_experiment_writes_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = presets::preset("fig-noise-v1-far").unwrap().unwrap();
    cfg.sim.realizations = 5;
    let p1 = dir.path().join("one.csv");
    let p2 = dir.path().join("two.csv");
    let o1 = run_experiment(&cfg, Some(&p1)).unwrap();
    run_experiment(&cfg, Some(&p2)).unwrap();
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert!(o1.manifest_path.ends_with("one.manifest.json"));
    // Far sources with transverse flow use the uniform-concentration forms.
    assert!(o1.csv.contains("uca-quadrature"));
}

#[test]
fn interferer_trace_tracks_expectation() {
    let text = r#"
kind = "interferer"
[environment]
diffusivity = "1e-9 m^2/s"
r_obs = "50 nm"
degradation_star = 1.0
[[transmitter]]
distance = "400 nm"
interval = "0.2 ms"
emitted = 10000
bits = 4
[sampling]
t_star = [1.0, 2.0, 3.0, 4.0, 5.0]
[sim]
realizations = 200
seed = 4
dt = "2 us"
"#;
    let report = compute(&ExperimentConfig::from_toml(text).unwrap()).unwrap();
    let mut r = csv::Reader::from_reader(report.csv.as_bytes());
    for rec in r.records() {
        let rec = rec.unwrap();
        let mean: f64 = rec[4].parse().unwrap();
        let sim: f64 = rec[7].parse().unwrap();
        let se: f64 = rec[8].parse().unwrap();
        assert!((sim - mean).abs() <= 4.0 * se + 1e-6, "t*={}: {sim} +/- {se} vs {mean}", &rec[2]);
    }
}

#[test]
fn custom_sweep_over_transverse_flow() {
    let text = r#"
kind = "custom-sweep"
[environment]
diffusivity = "1e-9 m^2/s"
r_obs = "50 nm"
[[noise]]
distance = "200 nm"
rate = "1.2e6 /s"
[sweep]
parameter = "peclet_perpendicular"
values = [0.0, 0.5, 1.0, 2.0]
t_star = 5.0
"#;
    let report = compute(&ExperimentConfig::from_toml(text).unwrap()).unwrap();
    let mut r = csv::Reader::from_reader(report.csv.as_bytes());
    let asym: Vec<f64> = r.records().map(|rec| rec.unwrap()[3].parse().unwrap()).collect();
    assert_eq!(asym.len(), 4);
    // Transverse flow only removes molecules.
    assert!(asym.windows(2).all(|w| w[1] < w[0]), "{asym:?}");
}

#[test]
fn sweep_with_bad_values_is_rejected() {
    let text = r#"
kind = "custom-sweep"
[environment]
diffusivity = "1e-9 m^2/s"
r_obs = "50 nm"
[[noise]]
distance = "200 nm"
rate = "1.2e6 /s"
[sweep]
parameter = "distance"
values = ["10 ms", 3.0]
"#;
    let rep = validate(&ExperimentConfig::from_toml(text).unwrap());
    assert_eq!(rep.violations.iter().filter(|v| v.contains("sweep.values")).count(), 2, "{rep}");
}
