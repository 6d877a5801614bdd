//! Experiment configs shipped with the binary.

use crate::config::ExperimentConfig;
use crate::error::CliError;

macro_rules! preset {
    ($name:literal) => {
        ($name, include_str!(concat!("../presets/", $name, ".toml")))
    };
}

const PRESETS: &[(&str, &str)] = &[
    preset!("free_torus_spectrum"),
    preset!("constant_shift"),
    preset!("counterexample_T2"),
    preset!("positivity_sweep"),
    preset!("index_identities"),
    preset!("sine_deformation"),
    preset!("weyl_check"),
    preset!("oracle_equivalence"),
    preset!("convergence"),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

/// TOML source of a preset.
pub fn source(name: &str) -> Result<&'static str, CliError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| CliError::UnknownPreset(name.to_string()))
}

pub fn load(name: &str) -> Result<ExperimentConfig, CliError> {
    ExperimentConfig::from_toml(source(name)?, &format!("preset {name}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_is_named_after_its_file() {
        for name in names() {
            let config = load(name).unwrap();
            assert_eq!(config.name, name);
            assert!(!config.description.is_empty());
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(load("nope"), Err(CliError::UnknownPreset(_))));
    }
}
