//! Run configuration: one JSON document capturing every knob of a training
//! or evaluation run. Unknown keys are rejected; every run writes back a
//! `resolved_config.json` with all effective values so artifacts are
//! reproducible from `(resolved_config.json, seed)` alone.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curriculum::CurriculumConfig;
use crate::env::EnvParams;
use crate::error::Error;
use crate::ppo::PpoConfig;
use crate::rewards::{RewardConfig, Stage};
use crate::terrain::{StairKind, TerrainMode, TerrainParams};
use crate::Result;

/// Environment variable that overrides the config seed.
pub const SEED_ENV_VAR: &str = "STAIRCLIMB_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TerrainRunConfig {
    pub kind: StairKind,
    pub mode: TerrainMode,
}

impl Default for TerrainRunConfig {
    fn default() -> Self {
        TerrainRunConfig { kind: StairKind::UShaped, mode: TerrainMode::Train }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Episodes per (terrain, level) cell.
    pub n_episodes: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { n_episodes: 300 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub stage: Stage,
    pub terrain: TerrainRunConfig,
    pub ppo: PpoConfig,
    pub env: EnvParams,
    pub rewards: RewardConfig,
    pub curriculum: CurriculumConfig,
    pub terrain_params: TerrainParams,
    pub eval: EvalConfig,
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            stage: Stage::Stage1,
            terrain: TerrainRunConfig::default(),
            ppo: PpoConfig::default(),
            env: EnvParams::default(),
            rewards: RewardConfig::default(),
            curriculum: CurriculumConfig::default(),
            terrain_params: TerrainParams::default(),
            eval: EvalConfig::default(),
            out_dir: "out".into(),
        }
    }
}

impl RunConfig {
    /// Parse a config file, apply the `STAIRCLIMB_SEED` override, sync the
    /// reward stage with the run stage, and validate.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))?;
        cfg.apply_seed_env()?;
        cfg.resolve();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply the seed override from the environment, when present.
    pub fn apply_seed_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV_VAR) {
            self.seed = v
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("{SEED_ENV_VAR} must be an unsigned integer, got `{v}`")))?;
        }
        Ok(())
    }

    /// Make derived fields consistent (the reward stage always follows the
    /// run stage).
    pub fn resolve(&mut self) {
        self.rewards.stage = self.stage;
    }

    pub fn validate(&self) -> Result<()> {
        self.ppo.validate()?;
        self.rewards.validate()?;
        if self.rewards.stage != self.stage {
            return Err(Error::Config("reward stage must match the run stage".into()));
        }
        if self.terrain.mode != TerrainMode::Train {
            return Err(Error::Config("training runs use train-mode terrain".into()));
        }
        if self.curriculum.initial_level < 1
            || self.curriculum.initial_level > self.terrain.mode.max_level()
        {
            return Err(Error::Config(format!(
                "curriculum initial_level {} out of range",
                self.curriculum.initial_level
            )));
        }
        if self.out_dir.is_empty() {
            return Err(Error::Config("out_dir must not be empty".into()));
        }
        Ok(())
    }

    /// Write the fully resolved config into `dir/resolved_config.json`.
    pub fn write_resolved(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join("resolved_config.json");
        fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_and_validates() {
        let mut cfg = RunConfig::default();
        cfg.resolve();
        cfg.validate().unwrap();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let json = r#"{"seed": 1, "not_a_field": true}"#;
        assert!(serde_json::from_str::<RunConfig>(json).is_err());
    }

    #[test]
    fn partial_configs_fill_defaults() {
        let json = r#"{"seed": 9, "stage": "stage2", "terrain": {"kind": "straight"}}"#;
        let mut cfg: RunConfig = serde_json::from_str(json).unwrap();
        cfg.resolve();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.stage, Stage::Stage2);
        assert_eq!(cfg.terrain.kind, StairKind::Straight);
        assert_eq!(cfg.ppo.gamma, 0.99);
        assert_eq!(cfg.rewards.stage, Stage::Stage2);
    }

    #[test]
    fn resolved_config_is_written_and_reloadable() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig { seed: 5, ..Default::default() };
        cfg.resolve();
        let path = cfg.write_resolved(dir.path()).unwrap();
        let text = fs::read_to_string(path).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn seed_env_override_parses_or_errors() {
        // Set and clear within one test to avoid cross-test env races.
        std::env::set_var(SEED_ENV_VAR, "1234");
        let mut cfg = RunConfig::default();
        cfg.apply_seed_env().unwrap();
        assert_eq!(cfg.seed, 1234);
        std::env::set_var(SEED_ENV_VAR, "not-a-number");
        assert!(cfg.apply_seed_env().is_err());
        std::env::remove_var(SEED_ENV_VAR);
    }
}
