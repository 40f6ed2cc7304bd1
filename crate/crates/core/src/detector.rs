//! Weighted-sum detection and its bit error probability when every sample
//! is an independent Poisson count.
//!
//! Analytic error evaluation needs equal weights: the weighted sum is then a
//! scaled sum of counts, which is Poisson with the summed mean.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{ensure, Error, Result};
use crate::interference::{
    decompose_in_interval, old_isi_integral_phase, old_isi_subtractive_phase, tx_emission_impact, Channel,
    OldIsiMode, TransmitterSpec,
};

/// Largest explicit ISI depth accepted by [`expected_ber`]; enumeration
/// costs `2^(F+1)` patterns.
pub const MAX_ISI_DEPTH: usize = 24;

/// Weighted-sum detector: decide 1 iff `sum_m w_m n_m >= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSpec {
    pub weights: Vec<f64>,
    /// Threshold in the dimensional count domain.
    pub threshold: u64,
    /// Number of previous intervals treated explicitly.
    pub isi_depth: usize,
    pub old_isi: OldIsiMode,
}

impl DetectorSpec {
    pub fn new(weights: Vec<f64>, threshold: u64, isi_depth: usize, old_isi: OldIsiMode) -> Result<Self> {
        let spec = Self { weights, threshold, isi_depth, old_isi };
        spec.validate()?;
        Ok(spec)
    }

    /// `samples` unit weights.
    pub fn equal(samples: usize, threshold: u64, isi_depth: usize, old_isi: OldIsiMode) -> Result<Self> {
        Self::new(vec![1.0; samples], threshold, isi_depth, old_isi)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(!self.weights.is_empty(), "detector needs at least one sample per interval")?;
        ensure(
            self.weights.iter().all(|w| w.is_finite() && *w >= 0.0),
            "detector weights must be finite and non-negative",
        )
    }

    pub fn samples(&self) -> usize {
        self.weights.len()
    }

    pub fn with_threshold(&self, threshold: u64) -> Self {
        Self { threshold, ..self.clone() }
    }

    /// The shared weight if all weights are equal.
    pub fn common_weight(&self) -> Option<f64> {
        let w = *self.weights.first()?;
        self.weights.iter().all(|&v| v == w).then_some(w)
    }

    fn equal_weight(&self) -> Result<f64> {
        self.validate()?;
        self.common_weight()
            .ok_or(Error::Regime("analytic error probability needs equal weights; use simulation"))
    }
}

/// Smallest count sum `s` with `w * s >= xi`, evaluated exactly as
/// [`decide`] does. `u64::MAX` if no sum reaches the threshold.
fn count_threshold(w: f64, xi: u64) -> u64 {
    if xi == 0 {
        return 0;
    }
    if w == 0.0 {
        return u64::MAX;
    }
    let xi_f = xi as f64;
    let mut s = libm::ceil(xi_f / w) as u64;
    while s > 0 && w * (s - 1) as f64 >= xi_f {
        s -= 1;
    }
    while w * (s as f64) < xi_f {
        s += 1;
    }
    s
}

/// Dimensionless sample times of interval `j`: `((j-1) + m/M) T` for
/// `m = 1..=M`, so the last sample closes the interval.
pub fn sample_times(j: usize, spec: &DetectorSpec, interval: f64) -> Result<Vec<f64>> {
    ensure(j >= 1, "interval index starts at 1")?;
    let m_total = spec.samples() as f64;
    Ok((1..=spec.samples()).map(|m| ((j - 1) as f64 + m as f64 / m_total) * interval).collect())
}

/// Weighted-sum decision for the counts of one interval.
pub fn decide(observations: &[u64], spec: &DetectorSpec) -> Result<bool> {
    ensure(observations.len() == spec.samples(), "observation count must equal M")?;
    let xi = spec.threshold as f64;
    let sum = match spec.common_weight() {
        Some(w) => w * observations.iter().sum::<u64>() as f64,
        None => observations.iter().zip(&spec.weights).map(|(&n, &w)| w * n as f64).sum(),
    };
    Ok(sum >= xi)
}

/// `ln Gamma(n+1) - (n + 1/2) ln n + n - ln sqrt(2 pi)`.
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return libm::lgamma(n + 1.0) - (n + 0.5) * libm::log(n) + n - 0.5 * libm::log(2.0 * PI);
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x/np) + np - x` without cancellation near `x = np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        let mut j = 1.0;
        loop {
            ej *= v2;
            let s1 = s + ej / (2.0 * j + 1.0);
            if s1 == s {
                return s;
            }
            s = s1;
            j += 1.0;
        }
    }
    x * libm::log(x / np) + np - x
}

/// Poisson probability mass `e^-lambda lambda^i / i!`, accurate for large
/// arguments via the saddle-point form.
pub fn poisson_pmf(i: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    if i == 0 {
        return libm::exp(-lambda);
    }
    let x = i as f64;
    libm::exp(-stirlerr(x) - bd0(x, lambda)) / libm::sqrt(2.0 * PI * x)
}

/// `(P(X < xi), P(X >= xi))` for `X ~ Poisson(lambda)`; the smaller side is
/// summed directly and the other is its complement.
fn poisson_tails(lambda: f64, xi: u64) -> (f64, f64) {
    if xi == 0 {
        return (0.0, 1.0);
    }
    if lambda == 0.0 {
        return (1.0, 0.0);
    }
    if (xi - 1) as f64 <= lambda {
        // Terms shrink going down from xi - 1.
        let mut i = xi - 1;
        let mut term = poisson_pmf(i, lambda);
        let mut sum = term;
        while i > 0 && term > 0.0 {
            term *= i as f64 / lambda;
            i -= 1;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        (sum, 1.0 - sum)
    } else {
        let mut i = xi;
        let mut term = poisson_pmf(i, lambda);
        let mut sum = term;
        while term > 0.0 {
            i += 1;
            term *= lambda / i as f64;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        (1.0 - sum, sum)
    }
}

/// `P(X < xi) = e^-lambda sum_{i<xi} lambda^i / i!` for `X ~ Poisson(lambda)`.
pub fn poisson_sum_cdf(lambda: f64, xi: u64) -> f64 {
    poisson_tails(lambda, xi).0
}

/// `P(X >= xi)`, accurate when small.
pub fn poisson_sum_sf(lambda: f64, xi: u64) -> f64 {
    poisson_tails(lambda, xi).1
}

/// The intended transmitter as seen by the detector, plus the dimensional
/// mean count per sample from every other source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub tx: TransmitterSpec,
    pub channel: Channel,
    /// Reference molecule count converting dimensionless expectations to
    /// counts.
    pub ref_count: f64,
    /// Mean count per sample from noise sources and interferers.
    pub background: f64,
}

impl Link {
    pub fn new(tx: TransmitterSpec, channel: Channel, ref_count: f64) -> Result<Self> {
        tx.validate()?;
        ensure(ref_count > 0.0 && ref_count.is_finite(), "reference count must be positive")?;
        Ok(Self { tx, channel, ref_count, background: 0.0 })
    }

    pub fn with_background(mut self, background: f64) -> Self {
        self.background = background;
        self
    }

    fn validate(&self) -> Result<()> {
        self.tx.validate()?;
        ensure(self.ref_count > 0.0 && self.ref_count.is_finite(), "reference count must be positive")?;
        ensure(self.background >= 0.0 && self.background.is_finite(), "background mean must be non-negative")
    }
}

/// Error probability of bit `j` given the transmitted sequence, with ISI
/// beyond the detector's explicit depth treated per its old-ISI mode.
pub fn bit_error_prob_given_seq(j: usize, bits: &[bool], link: &Link, spec: &DetectorSpec) -> Result<f64> {
    let w = spec.equal_weight()?;
    link.validate()?;
    ensure(j >= 1 && bits.len() >= j, "bit sequence must cover interval j")?;
    let m_total = spec.samples() as f64;
    let mut lambda = 0.0;
    for m in 1..=spec.samples() {
        let phase = m as f64 / m_total * link.tx.interval;
        let d = decompose_in_interval(j, phase, bits, spec.isi_depth, &link.tx, &link.channel, spec.old_isi)?;
        lambda += link.ref_count * d.total() + link.background;
    }
    let s = count_threshold(w, spec.threshold);
    let (below, above) = poisson_tails(lambda, s);
    Ok(if bits[j - 1] { below } else { above })
}

/// Per-lag and old-ISI count means summed over the samples of a late
/// interval, with the sequence weights of the recent bits.
struct Patterns {
    /// Sum over samples of old ISI plus background.
    base: f64,
    /// Sum over samples of the current emission.
    current: f64,
    /// Recent-lag sums split into low and high halves of the pattern index.
    low: Vec<f64>,
    high: Vec<f64>,
    low_bits: usize,
    /// Probability of a recent pattern, indexed by its number of ones.
    by_ones: Vec<f64>,
    depth: usize,
    p_one: f64,
}

impl Patterns {
    fn build(link: &Link, spec: &DetectorSpec) -> Result<Self> {
        link.validate()?;
        let depth = spec.isi_depth;
        if depth > MAX_ISI_DEPTH {
            return Err(Error::Resource("explicit ISI depth above 24 is too costly to enumerate"));
        }
        let (tx, ch) = (&link.tx, &link.channel);
        let m_total = spec.samples() as f64;
        let mut lag = vec![0.0; depth + 1];
        let mut base = 0.0;
        for m in 1..=spec.samples() {
            let phase = m as f64 / m_total * tx.interval;
            for (i, g) in lag.iter_mut().enumerate() {
                *g += link.ref_count * tx_emission_impact(phase + i as f64 * tx.interval, tx, ch);
            }
            let old = match spec.old_isi {
                OldIsiMode::Exact => {
                    return Err(Error::InvalidParameter("expected BER needs an approximate old-ISI mode"))
                }
                OldIsiMode::Zero => 0.0,
                OldIsiMode::Integral => old_isi_integral_phase(phase, depth, tx, ch)?.value,
                OldIsiMode::Subtractive => old_isi_subtractive_phase(phase, depth, tx, ch)?.value,
            };
            base += link.ref_count * old + link.background;
        }
        let low_bits = depth / 2;
        let subset_sums = |g: &[f64]| {
            let mut sums = vec![0.0; 1 << g.len()];
            for (b, &v) in g.iter().enumerate() {
                for p in 0..(1usize << b) {
                    sums[p | (1 << b)] = sums[p] + v;
                }
            }
            sums
        };
        let low = subset_sums(&lag[1..=low_bits]);
        let high = subset_sums(&lag[low_bits + 1..]);
        let p = tx.p_one;
        let by_ones = (0..=depth)
            .map(|k| libm::pow(p, k as f64) * libm::pow(1.0 - p, (depth - k) as f64))
            .collect();
        Ok(Self { base, current: lag[0], low, high, low_bits, by_ones, depth, p_one: p })
    }

    fn count(&self) -> usize {
        1 << self.depth
    }

    /// (probability, mean count without the current emission) of pattern `p`.
    fn pattern(&self, p: usize) -> (f64, f64) {
        let lo = p & ((1 << self.low_bits) - 1);
        let hi = p >> self.low_bits;
        (self.by_ones[p.count_ones() as usize], self.base + self.low[lo] + self.high[hi])
    }

    fn max_mean(&self) -> f64 {
        self.base + self.current + self.low[self.low.len() - 1] + self.high[self.high.len() - 1]
    }
}

/// Expected error probability of a late bit, averaged exactly over all
/// `2^(F+1)` current and recent bit patterns.
pub fn expected_ber(link: &Link, spec: &DetectorSpec) -> Result<f64> {
    let w = spec.equal_weight()?;
    let pat = Patterns::build(link, spec)?;
    let s = count_threshold(w, spec.threshold);
    let mut total = 0.0;
    for p in 0..pat.count() {
        let (prob, mean) = pat.pattern(p);
        let miss = poisson_tails(mean + pat.current, s).0;
        let false_alarm = poisson_tails(mean, s).1;
        total += prob * (pat.p_one * miss + (1.0 - pat.p_one) * false_alarm);
    }
    Ok(total)
}

/// Adds `weight * P(X < s)` (or `P(X >= s)` when `!below`) to `acc[s]`
/// for every `s` in `0..acc.len()`.
fn accumulate_tails(lambda: f64, weight: f64, below: bool, acc: &mut [f64], pmf: &mut Vec<f64>) {
    let n = acc.len();
    if lambda == 0.0 {
        for (s, a) in acc.iter_mut().enumerate() {
            let p_below = if s == 0 { 0.0 } else { 1.0 };
            *a += weight * if below { p_below } else { 1.0 - p_below };
        }
        return;
    }
    // Mass outside [lo, hi) is below 1e-40.
    let spread = 14.0 * libm::sqrt(lambda) + 40.0;
    let lo = libm::floor((lambda - spread).max(0.0)) as usize;
    let hi = libm::ceil(lambda + spread) as usize + 1;
    pmf.clear();
    pmf.resize(hi - lo, 0.0);
    let mode = (libm::floor(lambda) as usize).clamp(lo, hi - 1);
    pmf[mode - lo] = poisson_pmf(mode as u64, lambda);
    for i in (lo..mode).rev() {
        pmf[i - lo] = pmf[i + 1 - lo] * (i + 1) as f64 / lambda;
    }
    for i in mode + 1..hi {
        pmf[i - lo] = pmf[i - 1 - lo] * lambda / i as f64;
    }
    if below {
        let mut cum = 0.0;
        for (s, a) in acc.iter_mut().enumerate() {
            if s > lo && s <= hi {
                cum += pmf[s - 1 - lo];
            }
            *a += weight * cum;
        }
    } else {
        let mut tail = 0.0;
        for i in (n.max(lo)..hi).rev() {
            tail += pmf[i - lo];
        }
        for s in (0..n).rev() {
            if s >= hi {
                continue;
            }
            if s >= lo {
                tail += pmf[s - lo];
            } else {
                tail = 1.0;
            }
            acc[s] += weight * tail;
        }
    }
}

/// Threshold minimising [`expected_ber`], found by sweeping every integer
/// threshold up to three times the largest mean weighted sum. Ties go to
/// the smaller threshold.
pub fn optimize_threshold(link: &Link, spec: &DetectorSpec) -> Result<(u64, f64)> {
    let w = spec.equal_weight()?;
    let pat = Patterns::build(link, spec)?;
    let xi_max = libm::ceil(3.0 * w * pat.max_mean()).max(1.0) as u64;
    // Counts above this bound decide 0 for every pattern up to 1e-40.
    let s_cap = libm::ceil(3.0 * pat.max_mean()) as u64 + 1;
    let s_max = count_threshold(w, xi_max).min(s_cap);
    let mut err = vec![0.0; s_max as usize + 1];
    let mut pmf = Vec::new();
    for p in 0..pat.count() {
        let (prob, mean) = pat.pattern(p);
        accumulate_tails(mean + pat.current, prob * pat.p_one, true, &mut err, &mut pmf);
        accumulate_tails(mean, prob * (1.0 - pat.p_one), false, &mut err, &mut pmf);
    }
    let eval = |xi: u64| {
        let s = count_threshold(w, xi);
        if s as usize >= err.len() {
            // Never decides 1.
            pat.p_one
        } else {
            err[s as usize]
        }
    };
    let mut best = (0, eval(0));
    for xi in 1..=xi_max {
        let e = eval(xi);
        if e < best.1 {
            best = (xi, e);
        }
    }
    Ok(best)
}
