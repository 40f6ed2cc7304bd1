//! Particle-based simulation of molecules diffusing with uniform drift and
//! first-order degradation, counted by a passive spherical receiver at the
//! origin. All quantities here are dimensional (metres, seconds).
//!
//! Counts are only needed at sample times, and the displacement over `n`
//! steps of Brownian motion with drift is a single Gaussian with `n` times
//! the per-step variance. [`run_realization`] therefore jumps each particle
//! from one sample time to the next, which has exactly the distribution of
//! stepping by `dt` in between.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::detector::{decide, DetectorSpec};
use crate::error::{ensure, Error, Result};

/// Largest `k dt` accepted by the linear degradation rule.
pub const LINEAR_DEGRADATION_LIMIT: f64 = 0.1;

/// How a particle's survival over one step is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegradationMode {
    /// Degrade with probability `k dt` per step; needs `k dt <= 0.1`.
    #[default]
    Linear,
    /// Survive with probability `exp(-k dt)`; valid for any step.
    Exact,
}

/// Physical medium and receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    /// Diffusion coefficient in m^2/s.
    pub diffusivity: f64,
    /// Uniform flow velocity in m/s.
    pub velocity: [f64; 3],
    /// First-order degradation rate in 1/s.
    pub degradation: f64,
    /// Receiver radius in m.
    pub r_obs: f64,
    pub mode: DegradationMode,
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        ensure(self.diffusivity >= 0.0 && self.diffusivity.is_finite(), "diffusion coefficient must be non-negative")?;
        ensure(self.velocity.iter().all(|v| v.is_finite()), "flow velocity must be finite")?;
        ensure(self.degradation >= 0.0 && self.degradation.is_finite(), "degradation rate must be non-negative")?;
        ensure(self.r_obs > 0.0 && self.r_obs.is_finite(), "receiver radius must be positive")
    }

    /// Survival probability over one step of length `dt`.
    pub fn step_survival(&self, dt: f64) -> Result<f64> {
        ensure(dt > 0.0 && dt.is_finite(), "time step must be positive")?;
        match self.mode {
            DegradationMode::Linear => {
                if self.degradation * dt > LINEAR_DEGRADATION_LIMIT {
                    return Err(Error::InvalidParameter(
                        "k*dt exceeds 0.1 in linear degradation mode; use exact mode or a smaller step",
                    ));
                }
                Ok(1.0 - self.degradation * dt)
            }
            DegradationMode::Exact => Ok(libm::exp(-self.degradation * dt)),
        }
    }

    /// Hazard rate `h` with survival `exp(-h n dt)` after `n` steps; in
    /// linear mode fractional step counts are interpolated geometrically.
    fn hazard(&self, dt: f64) -> f64 {
        match self.mode {
            DegradationMode::Linear => -libm::log1p(-self.degradation * dt) / dt,
            DegradationMode::Exact => self.degradation,
        }
    }
}

/// One molecule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub position: [f64; 3],
    pub alive: bool,
}

impl Particle {
    pub fn at(position: [f64; 3]) -> Self {
        Self { position, alive: true }
    }
}

/// Displacement by drift plus Gaussian diffusion over `elapsed` seconds.
#[inline]
fn displace<R: Rng + ?Sized>(p: &mut [f64; 3], env: &Environment, elapsed: f64, rng: &mut R) {
    let sigma = libm::sqrt(2.0 * env.diffusivity * elapsed);
    for (x, v) in p.iter_mut().zip(env.velocity) {
        let z: f64 = rng.sample(StandardNormal);
        *x += v * elapsed + sigma * z;
    }
}

/// Advances every live particle by one step: drift, independent Gaussian
/// displacement with variance `2 D dt` per axis, then degradation.
pub fn step<R: Rng + ?Sized>(particles: &mut [Particle], env: &Environment, dt: f64, rng: &mut R) -> Result<()> {
    env.validate()?;
    let survive = env.step_survival(dt)?;
    for p in particles.iter_mut().filter(|p| p.alive) {
        displace(&mut p.position, env, dt, rng);
        if survive < 1.0 && rng.random::<f64>() >= survive {
            p.alive = false;
        }
    }
    Ok(())
}

#[inline]
fn inside(p: &[f64; 3], r2: f64) -> bool {
    p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= r2
}

/// Live particles within the closed ball of radius `r_obs` at the origin.
pub fn count_in_receiver(particles: &[Particle], r_obs: f64) -> u64 {
    let r2 = r_obs * r_obs;
    particles.iter().filter(|p| p.alive && inside(&p.position, r2)).count() as u64
}

/// A molecule source, positioned relative to the receiver centre.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    /// Poisson process of single releases starting at time 0.
    Continuous { position: [f64; 3], rate: f64 },
    /// `count` molecules released at each listed time.
    Impulses { position: [f64; 3], count: u64, times: Vec<f64> },
}

impl SourceSpec {
    fn validate(&self) -> Result<()> {
        match self {
            SourceSpec::Continuous { position, rate } => {
                ensure(position.iter().all(|x| x.is_finite()), "source position must be finite")?;
                ensure(*rate > 0.0 && rate.is_finite(), "emission rate must be positive")
            }
            SourceSpec::Impulses { position, times, .. } => {
                ensure(position.iter().all(|x| x.is_finite()), "source position must be finite")?;
                ensure(times.iter().all(|t| t.is_finite() && *t >= 0.0), "emission times must be non-negative")?;
                ensure(times.windows(2).all(|w| w[0] <= w[1]), "emission times must be sorted")
            }
        }
    }
}

/// One realization: a step size, the sample schedule and the sources.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationSpec {
    pub dt: f64,
    /// Sorted observation times in seconds.
    pub sample_times: Vec<f64>,
    pub sources: Vec<SourceSpec>,
}

impl RealizationSpec {
    pub fn validate(&self, env: &Environment) -> Result<()> {
        env.validate()?;
        env.step_survival(self.dt)?;
        ensure(
            self.sample_times.iter().all(|t| t.is_finite() && *t >= 0.0),
            "sample times must be non-negative",
        )?;
        ensure(self.sample_times.windows(2).all(|w| w[0] <= w[1]), "sample times must be sorted")?;
        self.sources.iter().try_for_each(SourceSpec::validate)
    }
}

/// Sample times moved to the step boundary at or after each time.
pub fn align_to_steps(times: &[f64], dt: f64) -> Vec<f64> {
    times
        .iter()
        .map(|&t| {
            let n = libm::ceil(t / dt - 1e-9).max(0.0);
            n * dt
        })
        .collect()
}

/// Molecule counts at every sample time for one realization.
pub fn run_realization<R: Rng + ?Sized>(
    env: &Environment,
    spec: &RealizationSpec,
    rng: &mut R,
) -> Result<Vec<u64>> {
    spec.validate(env)?;
    let samples = align_to_steps(&spec.sample_times, spec.dt);
    let r2 = env.r_obs * env.r_obs;
    let hazard = env.hazard(spec.dt);
    // Each molecule draws its degradation time at release, which has the
    // same law as an independent survival trial per step.
    let death_time = |birth: f64, rng: &mut R| {
        if hazard > 0.0 {
            birth + rng.sample::<f64, _>(Exp1) / hazard
        } else {
            f64::INFINITY
        }
    };
    let mut particles: Vec<([f64; 3], f64)> = Vec::new();
    let mut counts = Vec::with_capacity(samples.len());
    let mut next_continuous: Vec<f64> = spec
        .sources
        .iter()
        .map(|s| match s {
            SourceSpec::Continuous { rate, .. } => rng.sample::<f64, _>(Exp1) / rate,
            SourceSpec::Impulses { .. } => f64::INFINITY,
        })
        .collect();
    let mut next_impulse = vec![0usize; spec.sources.len()];
    let mut now = 0.0;

    for &t in &samples {
        let elapsed = t - now;
        if elapsed > 0.0 {
            let mut keep = 0;
            for i in 0..particles.len() {
                let (mut p, death) = particles[i];
                if death >= t {
                    displace(&mut p, env, elapsed, rng);
                    particles[keep] = (p, death);
                    keep += 1;
                }
            }
            particles.truncate(keep);
        }
        // Releases in (now, t], propagated from their release time to t.
        for (si, source) in spec.sources.iter().enumerate() {
            match source {
                SourceSpec::Continuous { position, rate } => {
                    while next_continuous[si] <= t {
                        let birth = next_continuous[si];
                        let death = death_time(birth, rng);
                        if death >= t {
                            let mut p = *position;
                            displace(&mut p, env, t - birth, rng);
                            particles.push((p, death));
                        }
                        next_continuous[si] += rng.sample::<f64, _>(Exp1) / rate;
                    }
                }
                SourceSpec::Impulses { position, count, times } => {
                    while next_impulse[si] < times.len() && times[next_impulse[si]] <= t {
                        let birth = times[next_impulse[si]];
                        for _ in 0..*count {
                            let death = death_time(birth, rng);
                            if death >= t {
                                let mut p = *position;
                                displace(&mut p, env, t - birth, rng);
                                particles.push((p, death));
                            }
                        }
                        next_impulse[si] += 1;
                    }
                }
            }
        }
        now = t;
        counts.push(particles.iter().filter(|(p, _)| inside(p, r2)).count() as u64);
    }
    Ok(counts)
}

/// A transmitter for bit error simulation, in dimensional units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxSource {
    pub position: [f64; 3],
    pub emitted: u64,
    pub interval: f64,
    pub p_one: f64,
}

/// Outcome of one simulated bit sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BerCount {
    pub errors: u64,
    pub decisions: u64,
}

/// Transmitted bits and the counts at every detector sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitTrace {
    pub truth: Vec<bool>,
    /// `truth.len() * samples` counts, interval by interval.
    pub counts: Vec<u64>,
    pub samples: usize,
}

impl BitTrace {
    /// Counts of interval `j` (0-based).
    pub fn interval(&self, j: usize) -> &[u64] {
        &self.counts[j * self.samples..(j + 1) * self.samples]
    }

    /// Decision errors after the first `warmup` bits.
    pub fn score(&self, detector: &DetectorSpec, warmup: usize) -> Result<BerCount> {
        ensure(detector.samples() == self.samples, "detector sample count differs from the trace")?;
        let mut out = BerCount::default();
        for j in warmup..self.truth.len() {
            if decide(self.interval(j), detector)? != self.truth[j] {
                out.errors += 1;
            }
            out.decisions += 1;
        }
        Ok(out)
    }
}

/// Sends `bits` random bits and records `samples` counts per interval at
/// `((j-1) + m/M) T`. Other sources add molecules to the same receiver.
pub fn simulate_bit_sequence<R: Rng + ?Sized>(
    env: &Environment,
    tx: &TxSource,
    samples: usize,
    dt: f64,
    bits: usize,
    extra_sources: &[SourceSpec],
    rng: &mut R,
) -> Result<BitTrace> {
    ensure(samples >= 1, "need at least one sample per interval")?;
    ensure(tx.interval > 0.0 && tx.interval.is_finite(), "bit interval must be positive")?;
    ensure((0.0..=1.0).contains(&tx.p_one), "P1 must lie in [0, 1]")?;
    let truth: Vec<bool> = (0..bits).map(|_| rng.random::<f64>() < tx.p_one).collect();
    let times = truth
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(j, _)| j as f64 * tx.interval)
        .collect();
    let sample_times = (0..bits)
        .flat_map(|j| (1..=samples).map(move |m| (j as f64 + m as f64 / samples as f64) * tx.interval))
        .collect();
    let mut sources = vec![SourceSpec::Impulses { position: tx.position, count: tx.emitted, times }];
    sources.extend_from_slice(extra_sources);
    let spec = RealizationSpec { dt, sample_times, sources };
    let counts = run_realization(env, &spec, rng)?;
    Ok(BitTrace { truth, counts, samples })
}

/// Sends `bits` random bits, samples each interval at the detector's sample
/// times, and counts wrong decisions after the first `warmup` bits.
#[allow(clippy::too_many_arguments)]
pub fn run_ber_realization<R: Rng + ?Sized>(
    env: &Environment,
    tx: &TxSource,
    detector: &DetectorSpec,
    dt: f64,
    bits: usize,
    warmup: usize,
    extra_sources: &[SourceSpec],
    rng: &mut R,
) -> Result<BerCount> {
    ensure(warmup < bits, "warmup must be shorter than the bit sequence")?;
    detector.validate()?;
    simulate_bit_sequence(env, tx, detector.samples(), dt, bits, extra_sources, rng)?.score(detector, warmup)
}
