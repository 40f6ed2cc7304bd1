//! Point-source kernels shared by the closed forms and the quadratures.

use core::f64::consts::PI;

use crate::quad::{self, QuadOptions};

/// Terms kept in the large-time series; the series is only used when its
/// expansion variable is below 1/4, where 16 terms reach machine precision.
pub(crate) const SERIES_TERMS: usize = 16;

/// `(4 pi t)^(-3/2) exp(-rho2 / (4t) - k t)`, evaluated in log space so tiny
/// times give 0 instead of `0 * inf`.
#[inline]
pub(crate) fn gaussian(rho2: f64, t: f64, k: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    libm::exp(-rho2 / (4.0 * t) - k * t - 1.5 * libm::log(4.0 * PI * t))
}

/// Coefficients `c_n` (index 0 unused) of the expansion
///
/// `fraction(a, r, t) = pi^(-1/2) sum_{n>=1} c_n (4t)^(-(n+1/2))`
///
/// of the Gaussian mass inside a sphere. Both binomial sums are free of
/// cancellation for any `a >= 0`, including `a = 0`.
pub(crate) fn series_coefficients(a: f64, r: f64) -> [f64; SERIES_TERMS] {
    let mut c = [0.0; SERIES_TERMS];
    let mut n_fact = 1.0;
    for n in 1..SERIES_TERMS {
        n_fact *= n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        // ((r+a)^(2n+1) + (r-a)^(2n+1)) / 2
        let m = 2 * n + 1;
        let even = binomial_sum(m, r, a, 0);
        // ((r+a)^(2n+2) - (r-a)^(2n+2)) / (2a)
        let odd = binomial_sum(m + 1, r, a, 1);
        c[n] = sign * (2.0 * even / (n_fact * m as f64) - odd / (n_fact * (n as f64 + 1.0)));
    }
    c
}

/// `sum_{j = parity, parity+2, ...} C(m, j) r^(m-j) a^(j - parity)`.
fn binomial_sum(m: usize, r: f64, a: f64, parity: usize) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=m {
        if j > 0 {
            binom = binom * (m + 1 - j) as f64 / j as f64;
        }
        if j % 2 == parity {
            total += binom * libm::pow(r, (m - j) as f64) * libm::pow(a, (j - parity) as f64);
        }
    }
    total
}

/// Fraction of a unit Gaussian cloud (variance `2t` per axis) centred at
/// distance `a` from the receiver centre that lies inside radius `r`.
pub fn sphere_fraction(a: f64, r: f64, t: f64) -> f64 {
    let a = a.abs();
    if t <= 0.0 {
        return if a < r {
            1.0
        } else if a == r {
            0.5
        } else {
            0.0
        };
    }
    let q = r + a;
    let value = if q * q < t {
        fraction_series(a, r, t)
    } else if r * r < 0.1 * t {
        small_sphere_fraction(a, r, t)
    } else {
        fraction_closed(a, r, t)
    };
    value.clamp(0.0, 1.0)
}

fn fraction_series(a: f64, r: f64, t: f64) -> f64 {
    let c = series_coefficients(a, r);
    let inv = 1.0 / (4.0 * t);
    let mut pow = libm::sqrt(inv) * inv;
    let mut sum = 0.0;
    for cn in c.iter().skip(1) {
        sum += cn * pow;
        pow *= inv;
    }
    sum / libm::sqrt(PI)
}

fn fraction_closed(a: f64, r: f64, t: f64) -> f64 {
    let s = 2.0 * libm::sqrt(t);
    let first = if a > r {
        0.5 * (libm::erfc((a - r) / s) - libm::erfc((a + r) / s))
    } else {
        0.5 * (libm::erf((r - a) / s) + libm::erf((r + a) / s))
    };
    let second = if a == 0.0 {
        -r / libm::sqrt(PI * t) * libm::exp(-r * r / (4.0 * t))
    } else {
        libm::sqrt(t / PI) / a * libm::exp(-(a - r) * (a - r) / (4.0 * t)) * libm::expm1(-a * r / t)
    };
    first + second
}

/// Radial shell integral used when the sphere is small against the cloud
/// width, where the closed form cancels badly. The integrand is positive.
fn small_sphere_fraction(a: f64, r: f64, t: f64) -> f64 {
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-14, max_intervals: 50 };
    if a == 0.0 {
        let g = quad::integrate(|rho| rho * rho * libm::exp(-rho * rho / (4.0 * t)), 0.0, r, &opts);
        return 4.0 * PI * g.value * libm::pow(4.0 * PI * t, -1.5);
    }
    let g = quad::integrate(
        |rho| {
            -rho * libm::exp(-(a - rho) * (a - rho) / (4.0 * t)) * libm::expm1(-a * rho / t)
        },
        0.0,
        r,
        &opts,
    );
    g.value * 4.0 * PI * t / a * libm::pow(4.0 * PI * t, -1.5)
}
