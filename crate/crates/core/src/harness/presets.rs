use std::fmt;
use std::str::FromStr;

use super::config::RunConfig;
use crate::error::{Error, Result};

/// Shipped configs scaled down to the bundled problems; optimizer settings
/// follow the published recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Cosine over 200 steps from 1e-3, `sigma = 0.999`, `weight_decay = 0.01`.
    Cifar,
    /// 500 warmup steps to 6e-4 then cosine, `sigma = 0.99`, `weight_decay = 0.1`, clip 1.0.
    Gpt2Small,
    /// 500 warmup steps to 2e-4 then linear decay, `sigma = 0.98`, `weight_decay = 0.01`.
    Lora,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Cifar, Preset::Gpt2Small, Preset::Lora];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Cifar => "cifar",
            Preset::Gpt2Small => "gpt2_small",
            Preset::Lora => "lora",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            Preset::Cifar => include_str!("../../presets/cifar.json"),
            Preset::Gpt2Small => include_str!("../../presets/gpt2_small.json"),
            Preset::Lora => include_str!("../../presets/lora.json"),
        }
    }

    pub fn config(self) -> RunConfig {
        RunConfig::from_json(self.source()).expect("shipped presets are valid")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim_end_matches(".json").trim_end_matches(".preset");
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::config("preset", format!("unknown preset `{s}`")))
    }
}

/// Config of a shipped preset by name.
pub fn preset(name: &str) -> Result<RunConfig> {
    Ok(name.parse::<Preset>()?.config())
}
