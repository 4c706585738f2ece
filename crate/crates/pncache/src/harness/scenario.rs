//! Scenario files: TOML with keys `K`, `L`, `K_P`, `N`, `gamma_num`,
//! `gamma_den`, `B`, `seed`, and optionally `perfect_users` (external user
//! labels of the perfect-CSIT set) and `demand` (one file per external user).

use std::path::Path;

use anyhow::Context;
use pncache_core::config::Relabeling;
use pncache_core::{validate_config, NetworkConfig, RawConfig};
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(rename = "K")]
    pub users: Option<i64>,
    #[serde(rename = "L")]
    pub antennas: Option<i64>,
    #[serde(rename = "K_P")]
    pub perfect_users: Option<i64>,
    #[serde(rename = "N")]
    pub files: Option<i64>,
    pub gamma_num: Option<i64>,
    pub gamma_den: Option<i64>,
    #[serde(rename = "B")]
    pub file_bits: Option<u64>,
    pub seed: Option<u64>,
    #[serde(rename = "perfect_users")]
    pub perfect_set: Option<Vec<u32>>,
    pub demand: Option<Vec<u32>>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields set in `other` take precedence.
    pub fn overlay(self, other: ScenarioFile) -> ScenarioFile {
        ScenarioFile {
            users: other.users.or(self.users),
            antennas: other.antennas.or(self.antennas),
            perfect_users: other.perfect_users.or(self.perfect_users),
            files: other.files.or(self.files),
            gamma_num: other.gamma_num.or(self.gamma_num),
            gamma_den: other.gamma_den.or(self.gamma_den),
            file_bits: other.file_bits.or(self.file_bits),
            seed: other.seed.or(self.seed),
            perfect_set: other.perfect_set.or(self.perfect_set),
            demand: other.demand.or(self.demand),
        }
    }

    /// Validated config plus the map from external to internal user labels.
    /// `N` defaults to `K` and `L` to `max(K_P, 1)`.
    pub fn resolve(&self) -> anyhow::Result<(NetworkConfig, Relabeling)> {
        let users = self.users.context("K (user count) is required")?;
        let perfect = self
            .perfect_users
            .or(self.perfect_set.as_ref().map(|s| s.len() as i64))
            .unwrap_or(0);
        let raw = RawConfig {
            users,
            antennas: self.antennas.unwrap_or(perfect.max(1)),
            perfect_users: perfect,
            files: self.files.unwrap_or(users),
            gamma_num: self.gamma_num.context("gamma_num is required")?,
            gamma_den: self.gamma_den.unwrap_or(1),
        };
        let config = validate_config(&raw)?;
        let relabel = match &self.perfect_set {
            Some(set) => {
                anyhow::ensure!(
                    set.len() as i64 == perfect,
                    "perfect_users lists {} users but K_P = {perfect}",
                    set.len()
                );
                Relabeling::new(config.users(), set)?
            }
            None => Relabeling::identity(config.users()),
        };
        Ok((config, relabel))
    }
}
