//! Scenario recipes bundled into the binary.

use crate::cli::config::ScenarioConfig;
use crate::error::{Error, Result};

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        /// `(name, TOML source)` for every bundled preset.
        pub const PRESETS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../../presets/", $name, ".toml")))),*
        ];
    };
}

presets!(
    "fig2", "fig4a", "fig4b", "fig4c", "fig5", "fig6", "fig7a", "fig7b", "fig8a", "fig8b", "fig9", "fig10a", "fig10b",
    "table1",
);

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset_source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::UnknownPreset {
            name: name.to_string(),
            available: preset_names().join(", "),
        })
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    ScenarioConfig::from_toml(preset_source(name)?)
}

/// Leading `#` lines of a preset, joined into one line.
pub fn preset_caption(name: &str) -> Result<String> {
    Ok(preset_source(name)?
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim())
        .collect::<Vec<_>>()
        .join(" "))
}
