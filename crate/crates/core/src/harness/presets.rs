//! Configurations reproducing the synthetic experiments, embedded at build time.

use crate::error::{Error, Result};
use crate::harness::ExperimentConfig;

pub const FIG1: &str = include_str!("../../../../presets/fig1.toml");
pub const FIG2_D2: &str = include_str!("../../../../presets/fig2_d2.toml");
pub const FIG2_D10: &str = include_str!("../../../../presets/fig2_d10.toml");

pub const NAMES: [&str; 3] = ["fig1", "fig2_d2", "fig2_d10"];

pub fn source(name: &str) -> Option<&'static str> {
    match name {
        "fig1" => Some(FIG1),
        "fig2_d2" => Some(FIG2_D2),
        "fig2_d10" => Some(FIG2_D10),
        _ => None,
    }
}

pub fn load(name: &str) -> Result<ExperimentConfig> {
    let text = source(name)
        .ok_or_else(|| Error::Config(format!("unknown preset {name:?}; expected one of {}", NAMES.join(", "))))?;
    ExperimentConfig::from_toml_str(text)
}
