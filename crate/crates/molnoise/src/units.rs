//! Parsing of physical quantities written with explicit units, such as
//! `"50 nm"`, `"0.2 ms"` or `"1e-9 m^2/s"`. Values are returned in SI.

use std::fmt;

/// Physical dimension of a configured quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Length,
    Time,
    Rate,
    Diffusivity,
    Velocity,
}

impl Dim {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dim::Length => &[("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("µm", 1e-6), ("nm", 1e-9), ("pm", 1e-12)],
            Dim::Time => &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("µs", 1e-6), ("ns", 1e-9)],
            Dim::Rate => &[("/s", 1.0), ("1/s", 1.0), ("s^-1", 1.0), ("Hz", 1.0), ("/ms", 1e3), ("/us", 1e6)],
            Dim::Diffusivity => &[
                ("m^2/s", 1.0),
                ("m2/s", 1.0),
                ("cm^2/s", 1e-4),
                ("um^2/s", 1e-12),
                ("µm^2/s", 1e-12),
                ("nm^2/s", 1e-18),
            ],
            Dim::Velocity => &[("m/s", 1.0), ("mm/s", 1e-3), ("um/s", 1e-6), ("µm/s", 1e-6), ("nm/s", 1e-9)],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Dim::Length => "length",
            Dim::Time => "time",
            Dim::Rate => "rate",
            Dim::Diffusivity => "diffusion coefficient",
            Dim::Velocity => "velocity",
        }
    }
}

/// Why a quantity string was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitError {
    pub input: String,
    pub reason: String,
}

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse {:?}: {}", self.input, self.reason)
    }
}

impl std::error::Error for UnitError {}

/// Parses `"<number> <unit>"` (the space is optional) into SI units.
pub fn parse(input: &str, dim: Dim) -> Result<f64, UnitError> {
    let err = |reason: String| UnitError { input: input.to_string(), reason };
    let s = input.trim();
    let split = s
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit() || c == '.' || c == '+' || c == '-' || ((c == 'e' || c == 'E') && i > 0))
        })
        .map_or(s.len(), |(i, _)| i);
    let (num, unit) = s.split_at(split);
    let value: f64 = num.parse().map_err(|_| err(format!("no leading number in {:?}", num)))?;
    let unit = unit.trim();
    if unit.is_empty() {
        return Err(err(format!("missing {} unit", dim.name())));
    }
    let scale = dim
        .units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|&(_, f)| f)
        .ok_or_else(|| {
            let known: Vec<&str> = dim.units().iter().map(|(u, _)| *u).collect();
            err(format!("unknown {} unit {:?} (expected one of {})", dim.name(), unit, known.join(", ")))
        })?;
    if !value.is_finite() {
        return Err(err("value is not finite".into()));
    }
    Ok(value * scale)
}

/// Formats an SI value with the given unit, for manifests and messages.
pub fn format_si(value: f64, dim: Dim) -> String {
    let unit = dim.units()[0].0;
    format!("{value:e} {unit}")
}

/// Formats a length in nanometres for curve labels.
pub fn format_nm(meters: f64) -> String {
    let nm = (meters * 1e15).round() / 1e6;
    format!("{nm} nm")
}
