//! Built-in experiments reproducing the published figures at desk scale.
//! Realization counts are reduced; raise them with `--realizations`.

use crate::{ExperimentConfig, Result};

/// `(name, TOML source)` for every preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig-noise-v0-k0", include_str!("../presets/fig-noise-v0-k0.toml")),
    ("fig-noise-v0-k1", include_str!("../presets/fig-noise-v0-k1.toml")),
    ("fig-noise-k", include_str!("../presets/fig-noise-k.toml")),
    ("fig-noise-v1-close", include_str!("../presets/fig-noise-v1-close.toml")),
    ("fig-noise-v1-far", include_str!("../presets/fig-noise-v1-far.toml")),
    ("fig-interferer", include_str!("../presets/fig-interferer.toml")),
    ("fig-isi", include_str!("../presets/fig-isi.toml")),
];

/// Preset names in listing order.
pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// TOML source of a preset.
pub fn source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parsed preset, or `None` for an unknown name.
pub fn preset(name: &str) -> Option<Result<ExperimentConfig>> {
    source(name).map(ExperimentConfig::from_toml)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::validate;

    #[test]
    fn all_presets_validate() {
        for name in names() {
            let cfg = preset(name).unwrap().unwrap();
            let rep = validate(&cfg);
            assert!(rep.is_valid(), "{name}: {rep}");
        }
        assert!(preset("nope").is_none());
    }
}
