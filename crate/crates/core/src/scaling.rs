//! Dimensional quantities and the reference scales that make them
//! dimensionless.
//!
//! Every model quantity is reduced with a reference length `L`, the molecule
//! diffusivity `D`, and a reference molecule count `N_REF`:
//!
//! | kind          | dimensionless form     |
//! |---------------|------------------------|
//! | length        | `x / L`                |
//! | time          | `D t / L^2`            |
//! | rate          | `L^2 k / D`            |
//! | velocity      | `v L / D` (Peclet)     |
//! | count         | `N / N_REF`            |
//! | concentration | `C L^3 / N_REF`        |

use crate::error::{ensure, Result};

macro_rules! quantity {
    ($(#[$m:meta])* $name:ident, $unit:literal) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
        pub struct $name(pub f64);

        impl $name {
            /// Raw value in SI units.
            #[inline]
            pub fn get(self) -> f64 {
                self.0
            }
        }

        impl core::fmt::Display for $name {
            fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
                write!(f, "{} {}", self.0, $unit)
            }
        }
    };
}

quantity!(
    /// Length in metres.
    Meters, "m"
);
quantity!(
    /// Time in seconds.
    Seconds, "s"
);
quantity!(
    /// First-order rate in 1/s.
    PerSecond, "1/s"
);
quantity!(
    /// Speed in m/s.
    MetersPerSecond, "m/s"
);
quantity!(
    /// Diffusion coefficient in m^2/s.
    Diffusivity, "m^2/s"
);
quantity!(
    /// Molecule count (may be fractional when it is an expectation).
    Molecules, "molecules"
);
quantity!(
    /// Concentration in molecules/m^3.
    Concentration, "1/m^3"
);

/// Reference scales for one analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingContext {
    length: f64,
    diffusion: f64,
    ref_count: f64,
    time_unit: f64,
}

impl ScalingContext {
    pub fn new(length: Meters, diffusion: Diffusivity, ref_count: f64) -> Result<Self> {
        ensure(length.0 > 0.0 && length.0.is_finite(), "reference length must be positive")?;
        ensure(diffusion.0 > 0.0 && diffusion.0.is_finite(), "diffusion coefficient must be positive")?;
        ensure(ref_count > 0.0 && ref_count.is_finite(), "reference count must be positive")?;
        Ok(Self {
            length: length.0,
            diffusion: diffusion.0,
            ref_count,
            time_unit: length.0 * length.0 / diffusion.0,
        })
    }

    pub fn length(&self) -> Meters {
        Meters(self.length)
    }

    pub fn diffusion(&self) -> Diffusivity {
        Diffusivity(self.diffusion)
    }

    pub fn ref_count(&self) -> f64 {
        self.ref_count
    }

    /// Reference concentration `N_REF / L^3`.
    pub fn ref_concentration(&self) -> Concentration {
        Concentration(self.ref_count / (self.length * self.length * self.length))
    }

    /// Physical time of one dimensionless time unit, `L^2 / D`.
    pub fn time_unit(&self) -> Seconds {
        Seconds(self.time_unit)
    }

    pub fn length_to_star(&self, x: Meters) -> f64 {
        x.0 / self.length
    }
    pub fn length_from_star(&self, x: f64) -> Meters {
        Meters(x * self.length)
    }

    pub fn time_to_star(&self, t: Seconds) -> f64 {
        t.0 / self.time_unit
    }
    pub fn time_from_star(&self, t: f64) -> Seconds {
        Seconds(t * self.time_unit)
    }

    pub fn rate_to_star(&self, k: PerSecond) -> f64 {
        k.0 * self.time_unit
    }
    pub fn rate_from_star(&self, k: f64) -> PerSecond {
        PerSecond(k / self.time_unit)
    }

    /// Peclet number `v L / D`.
    pub fn peclet(&self, v: MetersPerSecond) -> f64 {
        v.0 * self.length / self.diffusion
    }
    pub fn velocity_from_peclet(&self, pe: f64) -> MetersPerSecond {
        MetersPerSecond(pe * self.diffusion / self.length)
    }

    pub fn count_to_star(&self, n: Molecules) -> f64 {
        n.0 / self.ref_count
    }
    pub fn count_from_star(&self, n: f64) -> Molecules {
        Molecules(n * self.ref_count)
    }

    pub fn concentration_to_star(&self, c: Concentration) -> f64 {
        c.0 / self.ref_concentration().0
    }
    pub fn concentration_from_star(&self, c: f64) -> Concentration {
        Concentration(c * self.ref_concentration().0)
    }
}

/// Reference count that makes a continuous source of rate `gen_rate`
/// emit one dimensionless molecule per dimensionless time unit.
pub fn noise_ref_count(gen_rate: PerSecond, length: Meters, diffusion: Diffusivity) -> Result<f64> {
    ensure(gen_rate.0 > 0.0, "generation rate must be positive")?;
    ensure(length.0 > 0.0 && diffusion.0 > 0.0, "length and diffusion must be positive")?;
    Ok(length.0 * length.0 * gen_rate.0 / diffusion.0)
}

/// Reference count for a transmitter whose average emission rate is
/// `p_one * n_em / interval`.
pub fn tx_ref_count(
    n_em: f64,
    interval: Seconds,
    p_one: f64,
    length: Meters,
    diffusion: Diffusivity,
) -> Result<f64> {
    ensure(interval.0 > 0.0, "bit interval must be positive")?;
    ensure(n_em > 0.0, "molecules per emission must be positive")?;
    ensure((0.0..=1.0).contains(&p_one), "P1 must lie in [0, 1]")?;
    ensure(length.0 > 0.0 && diffusion.0 > 0.0, "length and diffusion must be positive")?;
    Ok(length.0 * length.0 * p_one * n_em / (interval.0 * diffusion.0))
}

/// Dimensionless flow, resolved per source: `parallel` points from the
/// source toward the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlowSpec {
    pub parallel: f64,
    pub perpendicular: f64,
}

impl FlowSpec {
    pub const NONE: FlowSpec = FlowSpec { parallel: 0.0, perpendicular: 0.0 };

    pub fn new(parallel: f64, perpendicular: f64) -> Result<Self> {
        ensure(parallel.is_finite() && perpendicular.is_finite(), "Peclet numbers must be finite")?;
        Ok(Self { parallel, perpendicular })
    }

    pub fn is_zero(&self) -> bool {
        self.parallel == 0.0 && self.perpendicular == 0.0
    }

    /// Squared magnitude of the flow.
    pub fn norm_sq(&self) -> f64 {
        self.parallel * self.parallel + self.perpendicular * self.perpendicular
    }
}
