//! Transmitters that release impulses of molecules once per bit interval:
//! exact expected observations for known bit sequences, the continuous
//! emission approximation for interferers, and the split of a transmitter's
//! own signal into current, recent and old intersymbol interference.
//!
//! Interval `j` (1-based) of a transmitter starts at `start + (j-1) T`,
//! which is also the instant its molecules are released.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::analytic::{asymptotic_uca, sphere_fraction, NoiseScenario};
use crate::error::{ensure, Error, Result};
use crate::quad::{self, QuadOptions};
use crate::scaling::FlowSpec;

/// A transmitter in dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitterSpec {
    pub distance: f64,
    pub interval: f64,
    /// Molecules released for a binary 1.
    pub emitted: f64,
    pub p_one: f64,
    pub flow: FlowSpec,
    pub start: f64,
}

impl TransmitterSpec {
    pub fn new(distance: f64, interval: f64, emitted: f64, p_one: f64, flow: FlowSpec) -> Result<Self> {
        let tx = Self { distance, interval, emitted, p_one, flow, start: 0.0 };
        tx.validate()?;
        Ok(tx)
    }

    pub fn with_start(mut self, start: f64) -> Self {
        self.start = start;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.distance >= 0.0 && self.distance.is_finite(), "transmitter distance must be non-negative")?;
        ensure(self.interval > 0.0 && self.interval.is_finite(), "bit interval must be positive")?;
        ensure(self.emitted > 0.0 && self.emitted.is_finite(), "molecules per emission must be positive")?;
        ensure((0.0..=1.0).contains(&self.p_one), "P1 must lie in [0, 1]")?;
        ensure(self.start.is_finite(), "start time must be finite")?;
        ensure(self.flow.parallel.is_finite() && self.flow.perpendicular.is_finite(), "Peclet numbers must be finite")
    }

    /// Average emission rate `P1 * N_EM / T`.
    pub fn mean_rate(&self) -> f64 {
        self.p_one * self.emitted / self.interval
    }

    /// Interval in progress at time `t`, `floor((t - start)/T + 1)`; zero
    /// before the first emission.
    pub fn current_interval(&self, t: f64) -> usize {
        let u = (t - self.start) / self.interval;
        if u < 0.0 {
            0
        } else {
            libm::floor(u + 1.0) as usize
        }
    }

    /// Release time of interval `j`.
    pub fn emission_time(&self, j: usize) -> f64 {
        self.start + (j as f64 - 1.0) * self.interval
    }
}

/// How the receiver response to one impulse is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelModel {
    /// Concentration at the receiver centre times the receiver volume.
    #[default]
    Uca,
    /// Exact fraction of the released cloud inside the receiver.
    Volume,
}

/// Receiver and medium shared by all transmitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub r_obs: f64,
    pub degradation: f64,
    pub model: ChannelModel,
}

impl Channel {
    pub fn new(r_obs: f64, degradation: f64, model: ChannelModel) -> Result<Self> {
        ensure(r_obs > 0.0 && r_obs.is_finite(), "receiver radius must be positive")?;
        ensure(degradation >= 0.0 && degradation.is_finite(), "degradation rate must be non-negative")?;
        Ok(Self { r_obs, degradation, model })
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.r_obs * self.r_obs * self.r_obs
    }

    fn scenario(&self, tx: &TransmitterSpec) -> NoiseScenario {
        NoiseScenario { distance: tx.distance, r_obs: self.r_obs, degradation: self.degradation, flow: tx.flow }
    }
}

/// Centre concentration times receiver volume for a unit impulse.
fn uca_response(elapsed: f64, tx: &TransmitterSpec, ch: &Channel) -> f64 {
    if elapsed <= 0.0 {
        return 0.0;
    }
    let dx = tx.distance - tx.flow.parallel * elapsed;
    let dy = tx.flow.perpendicular * elapsed;
    let rho2 = dx * dx + dy * dy;
    ch.volume() * libm::exp(-rho2 / (4.0 * elapsed) - ch.degradation * elapsed - 1.5 * libm::log(4.0 * PI * elapsed))
}

/// Expected molecules observed `elapsed` after one release of `tx.emitted`
/// molecules. Zero for `elapsed <= 0`.
pub fn tx_emission_impact(elapsed: f64, tx: &TransmitterSpec, ch: &Channel) -> f64 {
    if elapsed <= 0.0 {
        return 0.0;
    }
    let unit = match ch.model {
        ChannelModel::Uca => uca_response(elapsed, tx, ch),
        ChannelModel::Volume => {
            // The cloud is isotropic, so only the centre distance matters.
            let cx = tx.flow.parallel * elapsed - tx.distance;
            let cy = tx.flow.perpendicular * elapsed;
            sphere_fraction(libm::sqrt(cx * cx + cy * cy), ch.r_obs, elapsed)
                * libm::exp(-ch.degradation * elapsed)
        }
    };
    tx.emitted * unit
}

/// Expected observation at `t` from all transmitters with known bits.
pub fn expected_observation(t: f64, transmitters: &[(TransmitterSpec, &[bool])], ch: &Channel) -> Result<f64> {
    ensure(t >= 0.0, "observation time must be non-negative")?;
    let mut total = 0.0;
    for (tx, bits) in transmitters {
        let jc = tx.current_interval(t);
        ensure(bits.len() >= jc, "bit sequence shorter than the intervals elapsed")?;
        for (j, &b) in bits.iter().enumerate().take(jc) {
            if b {
                total += tx_emission_impact(t - tx.emission_time(j + 1), tx, ch);
            }
        }
    }
    Ok(total)
}

/// Continuous-emission approximation of an interferer's steady impact.
pub fn asymptotic_interference(tx: &TransmitterSpec, ch: &Channel) -> Result<f64> {
    tx.validate()?;
    if tx.distance == 0.0 {
        return Err(Error::Regime("interferer asymptote needs x_u > 0"));
    }
    Ok(tx.mean_rate() * asymptotic_uca(&ch.scenario(tx))?.value)
}

/// Treatment of interference older than the explicitly modelled intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OldIsiMode {
    /// Sum the actual older emissions (needs the full bit sequence).
    Exact,
    /// Ignore them.
    Zero,
    /// Integrate a continuous emission from the oldest explicit interval back.
    #[default]
    Integral,
    /// Continuous-emission asymptote minus the expected explicit intervals.
    Subtractive,
}

impl OldIsiMode {
    pub fn label(self) -> &'static str {
        match self {
            OldIsiMode::Exact => "exact",
            OldIsiMode::Zero => "zero",
            OldIsiMode::Integral => "integral",
            OldIsiMode::Subtractive => "subtractive",
        }
    }
}

/// Validity of an old-interference approximation at one time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OldIsiStatus {
    Asymptotic,
    /// No interval is old enough yet; the value is zero.
    NotYetAsymptotic,
    /// The subtractive form went negative and was clamped to zero.
    Clamped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OldIsiEstimate {
    pub value: f64,
    pub status: OldIsiStatus,
}

impl OldIsiEstimate {
    const NOT_YET: OldIsiEstimate = OldIsiEstimate { value: 0.0, status: OldIsiStatus::NotYetAsymptotic };
}

/// Three-way split of a transmitter's expected observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsiDecomposition {
    pub current: f64,
    pub recent: f64,
    pub old: f64,
    pub depth: usize,
    pub interval: usize,
    pub old_status: OldIsiStatus,
}

impl IsiDecomposition {
    pub fn total(&self) -> f64 {
        self.current + self.recent + self.old
    }
}

/// Position of `t` as (interval, time since that interval's release).
fn locate(t: f64, tx: &TransmitterSpec) -> (usize, f64) {
    let j = tx.current_interval(t);
    (j, t - tx.emission_time(j.max(1)))
}

/// Splits the observation at `t` into the current interval, the `depth`
/// preceding ones, and everything older.
pub fn isi_decompose(
    t: f64,
    bits: &[bool],
    depth: usize,
    tx: &TransmitterSpec,
    ch: &Channel,
    mode: OldIsiMode,
) -> Result<IsiDecomposition> {
    ensure(t >= 0.0, "observation time must be non-negative")?;
    let (j, phase) = locate(t, tx);
    if j == 0 {
        return Ok(IsiDecomposition {
            current: 0.0,
            recent: 0.0,
            old: 0.0,
            depth,
            interval: 0,
            old_status: OldIsiStatus::NotYetAsymptotic,
        });
    }
    decompose_in_interval(j, phase, bits, depth, tx, ch, mode)
}

/// Split at `phase` after the release of interval `j`. Unlike
/// [`isi_decompose`] this accepts `phase == T`, so a sample at the very end
/// of interval `j` is still attributed to `j`.
pub fn decompose_in_interval(
    j: usize,
    phase: f64,
    bits: &[bool],
    depth: usize,
    tx: &TransmitterSpec,
    ch: &Channel,
    mode: OldIsiMode,
) -> Result<IsiDecomposition> {
    ensure(j >= 1, "interval index starts at 1")?;
    ensure(phase >= 0.0, "phase must be non-negative")?;
    ensure(bits.len() >= j, "bit sequence shorter than the intervals elapsed")?;
    let t_interval = tx.interval;
    let lag_impact = |lag: usize| tx_emission_impact(phase + lag as f64 * t_interval, tx, ch);
    let current = if bits[j - 1] { lag_impact(0) } else { 0.0 };
    let mut recent = 0.0;
    for lag in 1..=depth.min(j - 1) {
        if bits[j - 1 - lag] {
            recent += lag_impact(lag);
        }
    }
    let (old, old_status) = if j <= depth + 1 {
        (0.0, OldIsiStatus::NotYetAsymptotic)
    } else {
        match mode {
            OldIsiMode::Exact => {
                let mut old = 0.0;
                for lag in depth + 1..j {
                    if bits[j - 1 - lag] {
                        old += lag_impact(lag);
                    }
                }
                (old, OldIsiStatus::Asymptotic)
            }
            OldIsiMode::Zero => (0.0, OldIsiStatus::Asymptotic),
            OldIsiMode::Integral => {
                let e = old_isi_integral_phase(phase, depth, tx, ch)?;
                (e.value, e.status)
            }
            OldIsiMode::Subtractive => {
                let e = old_isi_subtractive_phase(phase, depth, tx, ch)?;
                (e.value, e.status)
            }
        }
    };
    Ok(IsiDecomposition { current, recent, old, depth, interval: j, old_status })
}

/// Old interference as a continuous emission at the average rate, released
/// from `t - (j_c - F - 1) T` back to minus infinity. Evaluated with the
/// uniform concentration assumption.
pub fn old_isi_integral(t: f64, depth: usize, tx: &TransmitterSpec, ch: &Channel) -> Result<OldIsiEstimate> {
    tx.validate()?;
    let (j, phase) = locate(t, tx);
    if j <= depth + 1 {
        return Ok(OldIsiEstimate::NOT_YET);
    }
    old_isi_integral_phase(phase, depth, tx, ch)
}

pub(crate) fn old_isi_integral_phase(phase: f64, depth: usize, tx: &TransmitterSpec, ch: &Channel) -> Result<OldIsiEstimate> {
    if tx.distance == 0.0 {
        return Err(Error::Regime("old interference integral needs x > 0"));
    }
    let tau0 = phase + depth as f64 * tx.interval;
    let rate = tx.mean_rate();
    let x = tx.distance;
    let value = if tx.flow.is_zero() && ch.degradation == 0.0 {
        if tau0 <= 0.0 {
            ch.volume() / (4.0 * PI * x)
        } else {
            ch.volume() / (4.0 * PI * x) * libm::erf(x / (2.0 * libm::sqrt(tau0)))
        }
    } else {
        let unit = |tau: f64| uca_response(tau, tx, ch);
        let scale = (4.0 * (x + ch.r_obs) * (x + ch.r_obs)).max(1.0).max(tau0);
        let mut breaks: Vec<f64> = Vec::new();
        breaks.push(tau0 + x * x / 6.0);
        if tx.flow.parallel > 0.0 {
            breaks.push(x / tx.flow.parallel);
        }
        quad::integrate_to_infinity(unit, tau0, scale, &breaks, &QuadOptions::default())
            .into_result()?
            .value
    };
    Ok(OldIsiEstimate { value: rate * value, status: OldIsiStatus::Asymptotic })
}

/// Old interference as the interferer asymptote minus the expected impact
/// of the current and `F` recent intervals. Negative results are clamped.
pub fn old_isi_subtractive(t: f64, depth: usize, tx: &TransmitterSpec, ch: &Channel) -> Result<OldIsiEstimate> {
    tx.validate()?;
    let (j, phase) = locate(t, tx);
    if j <= depth + 1 {
        return Ok(OldIsiEstimate::NOT_YET);
    }
    old_isi_subtractive_phase(phase, depth, tx, ch)
}

pub(crate) fn old_isi_subtractive_phase(
    phase: f64,
    depth: usize,
    tx: &TransmitterSpec,
    ch: &Channel,
) -> Result<OldIsiEstimate> {
    let total = asymptotic_interference(tx, ch)?;
    let mut explicit = 0.0;
    for lag in 0..=depth {
        explicit += tx.emitted * uca_response(phase + lag as f64 * tx.interval, tx, ch);
    }
    let value = total - tx.p_one * explicit;
    if value < 0.0 {
        Ok(OldIsiEstimate { value: 0.0, status: OldIsiStatus::Clamped })
    } else {
        Ok(OldIsiEstimate { value, status: OldIsiStatus::Asymptotic })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tx(x: f64, t: f64) -> TransmitterSpec {
        TransmitterSpec::new(x, t, 1.0, 0.5, FlowSpec::NONE).unwrap()
    }

    fn ch(k: f64) -> Channel {
        Channel::new(0.125, k, ChannelModel::Uca).unwrap()
    }

    #[test]
    fn interval_indexing() {
        let t = tx(1.0, 0.5);
        assert_eq!(t.current_interval(0.0), 1);
        assert_eq!(t.current_interval(0.49), 1);
        assert_eq!(t.current_interval(0.5), 2);
        assert_eq!(t.with_start(1.0).current_interval(0.5), 0);
    }

    #[test]
    fn impulse_impact_forms() {
        let t = tx(1.0, 1.0);
        let c = ch(0.0);
        assert_eq!(tx_emission_impact(0.0, &t, &c), 0.0);
        assert!(tx_emission_impact(1e-4, &t, &c) < 1e-300);
        let tau = 0.3;
        let want = c.volume() * libm::pow(4.0 * PI * tau, -1.5) * libm::exp(-1.0 / (4.0 * tau));
        assert!((tx_emission_impact(tau, &t, &c) / want - 1.0).abs() < 1e-14);
    }

    #[test]
    fn volume_and_uca_agree_far_away() {
        let t = tx(1.0, 1.0);
        let uca = ch(0.0);
        let vol = Channel { model: ChannelModel::Volume, ..uca };
        let tau = 1.0 / 6.0; // near the peak for x = 8 r_obs
        let a = tx_emission_impact(tau, &t, &uca);
        let b = tx_emission_impact(tau, &t, &vol);
        assert!((a / b - 1.0).abs() < 0.01, "{a} {b}");
    }

    #[test]
    fn single_bit_observation() {
        let t = tx(1.0, 0.5);
        let c = ch(0.0);
        let bits = [false, true, false, false];
        let got = expected_observation(1.2, &[(t, &bits)], &c).unwrap();
        assert_eq!(got, tx_emission_impact(0.7, &t, &c));
        let zeros = [false; 4];
        assert_eq!(expected_observation(1.2, &[(t, &zeros)], &c).unwrap(), 0.0);
        assert!(expected_observation(1.2, &[(t, &bits[..2])], &c).is_err());
    }

    #[test]
    fn decomposition_exhausts_short_histories() {
        let t = tx(1.0, 0.2);
        let c = ch(0.3);
        let bits = [true, true, false, true];
        let d = isi_decompose(0.7, &bits, 5, &t, &c, OldIsiMode::Integral).unwrap();
        assert_eq!(d.old, 0.0);
        assert_eq!(d.old_status, OldIsiStatus::NotYetAsymptotic);
        let full = expected_observation(0.7, &[(t, &bits)], &c).unwrap();
        assert!((d.total() - full).abs() <= 1e-15 * full);
    }

    #[test]
    fn old_integral_closed_form_matches_quadrature() {
        let t = tx(1.0, 0.05);
        // A tiny flow forces the quadrature path.
        let mut tq = t;
        tq.flow = FlowSpec::new(1e-12, 0.0).unwrap();
        let c = ch(0.0);
        let a = old_isi_integral(1.03, 2, &t, &c).unwrap().value;
        let b = old_isi_integral(1.03, 2, &tq, &c).unwrap().value;
        assert!((a / b - 1.0).abs() < 1e-8, "{a} {b}");
    }

    #[test]
    fn old_integral_vanishes_with_depth() {
        let t = tx(1.0, 0.05);
        let c = ch(0.0);
        let big = old_isi_integral(1e6, 1_000_000, &t, &c).unwrap().value;
        let full = t.mean_rate() * c.volume() / (4.0 * PI);
        // erf(1 / (2 sqrt(5e4))) to leading order
        let want = full * 2.0 / libm::sqrt(PI) / (2.0 * libm::sqrt(5e4));
        assert!((big / want - 1.0).abs() < 1e-3, "{big} {want}");
    }

    #[test]
    fn subtractive_without_ones_is_the_asymptote() {
        let mut t = tx(1.0, 0.05);
        t.p_one = 0.0;
        let c = ch(0.0);
        let e = old_isi_subtractive(3.01, 2, &t, &c).unwrap();
        assert_eq!(e.value, asymptotic_interference(&t, &c).unwrap());
    }

    #[test]
    fn subtractive_clamps() {
        // Right after a release the explicit term can exceed the asymptote.
        let t = tx(0.2, 5.0);
        let c = Channel::new(0.1, 0.0, ChannelModel::Uca).unwrap();
        let e = old_isi_subtractive(50.0 + 0.01, 0, &t, &c).unwrap();
        assert!(e.value >= 0.0);
    }

    #[test]
    fn asymptotic_interference_rejects_zero_distance() {
        let t = tx(0.0, 1.0);
        assert!(matches!(asymptotic_interference(&t, &ch(0.0)), Err(Error::Regime(_))));
    }
}
