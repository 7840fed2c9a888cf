//! Service configuration: a JSON file, then `IMPROVISE_*` environment overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use improvise_core::engine::EngineSettings;
use improvise_core::theory::{Key, Pitch};

pub const ENV_PREFIX: &str = "IMPROVISE_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub host: String,
    pub port: u16,
    pub content_dir: PathBuf,
    pub reports_dir: PathBuf,
    /// e.g. `"C major"`, `"Bb minor"`.
    pub default_key: String,
    pub default_tempo_bpm: f64,
    pub swing_ratio: f64,
    pub split_pitch: u8,
    pub hit_window_ms: f64,
    pub frame_rate: u32,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            host: "127.0.0.1".into(),
            port: 8765,
            content_dir: PathBuf::from("content"),
            reports_dir: PathBuf::from("reports"),
            default_key: "C major".into(),
            default_tempo_bpm: 120.0,
            swing_ratio: 1.0,
            split_pitch: 60,
            hit_window_ms: 100.0,
            frame_rate: 60,
        }
    }
}

impl Config {
    /// Reads `path` if given (defaults otherwise), applies the process
    /// environment and validates.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => Config::default(),
        };
        cfg.apply_env(std::env::vars())?;
        cfg.settings()?;
        Ok(cfg)
    }

    /// Applies `IMPROVISE_<KEY>` overrides, where `<KEY>` is a field name in
    /// upper case. Unrelated variables are ignored.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<()> {
        for (name, value) in vars {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else { continue };
            let bad = |e: &dyn std::fmt::Display| anyhow::anyhow!("{name}={value}: {e}");
            match key {
                "HOST" => self.host = value.clone(),
                "PORT" => self.port = value.parse().map_err(|e| bad(&e))?,
                "CONTENT_DIR" => self.content_dir = PathBuf::from(&value),
                "REPORTS_DIR" => self.reports_dir = PathBuf::from(&value),
                "DEFAULT_KEY" => self.default_key = value.clone(),
                "DEFAULT_TEMPO_BPM" => self.default_tempo_bpm = value.parse().map_err(|e| bad(&e))?,
                "SWING_RATIO" => self.swing_ratio = value.parse().map_err(|e| bad(&e))?,
                "SPLIT_PITCH" => self.split_pitch = value.parse().map_err(|e| bad(&e))?,
                "HIT_WINDOW_MS" => self.hit_window_ms = value.parse().map_err(|e| bad(&e))?,
                "FRAME_RATE" => self.frame_rate = value.parse().map_err(|e| bad(&e))?,
                // RUST_LOG-style knobs and the config path itself live elsewhere
                _ => {}
            }
        }
        Ok(())
    }

    pub fn settings(&self) -> Result<EngineSettings> {
        let key = Key::parse(&self.default_key).map_err(|e| anyhow::anyhow!("default_key: {e}"))?;
        if !(self.default_tempo_bpm.is_finite() && self.default_tempo_bpm > 0.0) {
            bail!("default_tempo_bpm must be positive, got {}", self.default_tempo_bpm);
        }
        if !(1.0..=3.0).contains(&self.swing_ratio) {
            bail!("swing_ratio must lie in 1.0..=3.0, got {}", self.swing_ratio);
        }
        if !(21..=108).contains(&self.split_pitch) {
            bail!("split_pitch must be a piano key (21..=108), got {}", self.split_pitch);
        }
        if !(self.hit_window_ms.is_finite() && self.hit_window_ms >= 0.0) {
            bail!("hit_window_ms must be non-negative, got {}", self.hit_window_ms);
        }
        if !(1..=1000).contains(&self.frame_rate) {
            bail!("frame_rate must lie in 1..=1000, got {}", self.frame_rate);
        }
        Ok(EngineSettings {
            key,
            tempo_bpm: self.default_tempo_bpm,
            swing_ratio: self.swing_ratio,
            split_pitch: Pitch::new(self.split_pitch as i32).expect("checked above"),
            hit_window_ms: self.hit_window_ms,
            ..EngineSettings::default()
        })
    }
}
