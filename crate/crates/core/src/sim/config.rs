//! Experiment configuration, read from TOML.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::operators::OperatorFamily;
use crate::outer::CheckPlacement;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: CodeConfig,
    #[serde(default)]
    pub allocation: AllocationConfig,
    pub operator: OperatorConfig,
    pub channel: ChannelConfig,
    #[serde(default)]
    pub outer: Option<OuterConfig>,
    #[serde(default)]
    pub sc: Option<ScConfig>,
    #[serde(default)]
    pub amp: AmpSettings,
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    /// Information sections `L`.
    pub sections: usize,
    pub section_size: usize,
    /// Overall information rate; `n = ceil(L log2 M / R)`.
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub block_length: Option<usize>,
    #[serde(default = "default_power")]
    pub power: f64,
}

fn default_power() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AllocationConfig {
    #[default]
    Flat,
    Iterative {
        blocks: usize,
        rate_pa: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub family: OperatorFamily,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    /// `SNR_b` grid in dB; `inf` means a noise-free channel.
    pub snr_b_db: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuterConfig {
    /// Information sections per group, `K`.
    pub group_size: usize,
    /// Generator in Koopman notation, e.g. `"0x97"`.
    pub crc_poly: String,
    pub list_size: usize,
    #[serde(default = "default_true")]
    pub amp_again: bool,
    /// Defaults to `end`, or `middle` for spatially coupled operators.
    #[serde(default)]
    pub placement: Option<CheckPlacement>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScConfig {
    pub width: usize,
    pub length: usize,
}

impl Default for ScConfig {
    fn default() -> Self {
        Self { width: 6, length: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmpSettings {
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_halt_tol")]
    pub halt_tol: f64,
}

fn default_max_iters() -> usize {
    100
}

fn default_halt_tol() -> f64 {
    1e-5
}

impl Default for AmpSettings {
    fn default() -> Self {
        Self {
            max_iters: default_max_iters(),
            halt_tol: default_halt_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Maximum trials per SNR point.
    pub trials: usize,
    pub seed: u64,
    /// Stop a point once this many information-section errors are seen;
    /// 0 runs every trial.
    #[serde(default = "default_target_errors")]
    pub target_errors: usize,
}

fn default_target_errors() -> usize {
    100
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the normalized TOML form, hex encoded.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let c = &self.code;
        if c.sections == 0 || c.section_size < 2 || !c.section_size.is_power_of_two() {
            return bad(format!(
                "need L >= 1 and M a power of two >= 2 (L = {}, M = {})",
                c.sections, c.section_size
            ));
        }
        match (c.rate, c.block_length) {
            (Some(r), None) if r > 0.0 && r.is_finite() => {}
            (None, Some(n)) if n > 0 => {}
            _ => return bad("set exactly one of code.rate (> 0) and code.block_length (> 0)".into()),
        }
        if !(c.power > 0.0) {
            return bad(format!("power must be positive, got {}", c.power));
        }
        if let AllocationConfig::Iterative { blocks, rate_pa } = self.allocation {
            if blocks == 0 || !(rate_pa >= 0.0) {
                return bad("iterative allocation needs blocks >= 1 and rate_pa >= 0".into());
            }
            if self.operator.family == OperatorFamily::SpatiallyCoupled {
                return bad("spatially coupled operators use flat allocation".into());
            }
        }
        if self.channel.snr_b_db.is_empty() || self.channel.snr_b_db.iter().any(|s| s.is_nan()) {
            return bad("channel.snr_b_db must be a nonempty list of numbers".into());
        }
        if let Some(o) = &self.outer {
            if o.group_size == 0 || o.list_size == 0 {
                return bad("outer.group_size and outer.list_size must be at least 1".into());
            }
        }
        if self.sc.is_some() && self.operator.family != OperatorFamily::SpatiallyCoupled {
            return bad("[sc] is only used with family = \"spatially-coupled\"".into());
        }
        if let Some(sc) = &self.sc {
            if sc.width == 0 || sc.length == 0 {
                return bad("sc.width and sc.length must be at least 1".into());
            }
        }
        if self.amp.max_iters == 0 || !(self.amp.halt_tol > 0.0) {
            return bad("amp.max_iters >= 1 and amp.halt_tol > 0 required".into());
        }
        if self.run.trials == 0 {
            return bad("run.trials must be at least 1".into());
        }
        Ok(())
    }
}
