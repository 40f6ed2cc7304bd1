//! Values frozen from 40-digit mpmath quadrature (see oracles.py).
#![allow(clippy::excessive_precision)]

use molnoise_core::analytic::{
    asymptotic_uca, dispatch_impact, impact_uca, impact_volume, sphere_fraction, uca_noflow_nodeg, Horizon,
    NoiseScenario,
};
use molnoise_core::detector::{poisson_sum_cdf, poisson_sum_sf};
use molnoise_core::scaling::FlowSpec;

fn sc(x: f64, r: f64, k: f64, pp: f64, pn: f64) -> NoiseScenario {
    NoiseScenario::new(x, r, k, FlowSpec::new(pp, pn).unwrap()).unwrap()
}

fn assert_rel(got: f64, want: f64, tol: f64, what: &str) {
    let e = ((got - want) / want).abs();
    assert!(e <= tol, "{what}: got {got:e}, want {want:e}, relative error {e:e}");
}

#[test]
fn sphere_fraction_matches_mpmath() {
    let cases = [
        (0.0, 1.0, 0.01, 0.99999999992010820755),
        (0.0, 1.0, 1.0, 0.081108588345324140636),
        (0.3, 1.0, 0.05, 0.95035354221423625265),
        (0.5, 1.0, 2.0, 0.029956234713876316876),
        (2.0, 0.5, 0.3, 0.0029298023362533521802),
        (5.0, 1.0, 10.0, 0.0015777523551307593116),
        (1.0, 1.0, 0.001, 0.48215875883847228867),
        (0.1, 2.0, 50.0, 0.0021022370125580210205),
    ];
    for (a, r, t, want) in cases {
        assert_rel(sphere_fraction(a, r, t), want, 1e-11, &format!("sphere_fraction({a}, {r}, {t})"));
    }
}

#[test]
fn exact_impact_matches_mpmath() {
    let cases = [
        (0.0, 1.0, 0.0, 1.0, 0.32085864943880087179),
        (0.5, 1.0, 0.0, 3.0, 0.35224591198998610288),
        (2.0, 0.5, 0.0, 10.0, 0.013648415159263557561),
        (1.0, 0.5, 1.0, 2.0, 0.015398584404018698629),
        (0.0, 1.0, 2.0, f64::INFINITY, 0.20653214124453100278),
        (3.0, 0.5, 0.5, f64::INFINITY, 0.0016858107026690154777),
        (0.2, 1.0, 0.0, f64::INFINITY, 0.49333333333333333259),
        (1.0, 0.5, 1.0, 100000.0, 0.015714955183164015799),
    ];
    for (x, r, k, t, want) in cases {
        let s = sc(x, r, k, 0.0, 0.0);
        let h = if t.is_finite() { Horizon::At(t) } else { Horizon::Asymptotic };
        let d = dispatch_impact(h, &s).unwrap();
        assert_rel(d.value, want, 1e-9, &format!("dispatch {} x={x} k={k} t={t}", d.method));
        let q = impact_volume(h, &s).unwrap();
        assert_rel(q.value, want, 1e-9, &format!("volume quadrature x={x} k={k} t={t}"));
    }
}

#[test]
fn uca_matches_mpmath() {
    for (x, r, t, want) in [
        (1.0, 0.25, 0.5, 0.0016526588951193442856),
        (2.0, 0.5, 10.0, 0.013640017625387021446),
        (5.0, 0.25, 100.0, 0.00075382667690808652814),
    ] {
        let s = sc(x, r, 0.0, 0.0, 0.0);
        assert_rel(uca_noflow_nodeg(t, &s).unwrap().value, want, 1e-12, "uca closed form");
        assert_rel(impact_uca(t, &s).unwrap().value, want, 1e-9, "uca quadrature");
    }
    for (x, r, k, pp, pn, want) in [
        (1.0, 0.25, 0.0, 0.0, 0.0, 0.0052083333333333333333),
        (2.0, 0.5, 1.0, 1.0, 0.0, 0.0060525900663754851861),
        (3.0, 0.25, 0.5, -1.0, 0.5, 0.000025925821486948163466),
        (1.0, 0.1, 0.0, 0.0, 2.0, 0.00012262648039048080301),
    ] {
        let s = sc(x, r, k, pp, pn);
        assert_rel(asymptotic_uca(&s).unwrap().value, want, 1e-13, "uca asymptote");
        assert_rel(impact_uca(Horizon::Asymptotic, &s).unwrap().value, want, 1e-9, "uca asymptote quadrature");
    }
}

#[test]
fn poisson_matches_mpmath() {
    for (lambda, xi, want) in [
        (0.5, 1, 0.6065306597126334236),
        (3.0, 2, 0.19914827347145577192),
        (10.0, 10, 0.45792971447185220831),
        (50.0, 40, 0.064570368921132975762),
        (200.0, 230, 0.97977480456034784749),
        (1000.0, 950, 0.054206673889018610327),
    ] {
        assert_rel(poisson_sum_cdf(lambda, xi), want, 1e-12, &format!("cdf({lambda}, {xi})"));
        assert_rel(poisson_sum_sf(lambda, xi), 1.0 - want, 1e-11, &format!("sf({lambda}, {xi})"));
    }
}
