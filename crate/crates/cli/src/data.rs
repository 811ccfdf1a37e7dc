//! On-disk formats: stored observations and plain numeric series.

use std::path::Path;

use anyhow::{Context, Result};
use blindwave::{forward, ChannelData, PeriodicSignal};
use serde::{Deserialize, Serialize};

use crate::commands::ConfigError;

/// One channel of a stored replication, in the time domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoredChannel {
    pub alpha1: f64,
    pub alpha2: f64,
    pub y: Vec<f64>,
    pub g_obs: Vec<f64>,
}

/// Observations written by `simulate`. `eps` and `delta` are the per-sample
/// levels; `model_eps` and `model_delta` are what the estimator sees.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observations {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub model_eps: f64,
    pub model_delta: f64,
    pub channels: Vec<StoredChannel>,
    /// The true signal, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<f64>>,
}

impl Observations {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let obs: Self = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Ok(obs)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn channel_data(&self) -> Result<Vec<ChannelData>> {
        self.channels
            .iter()
            .map(|c| {
                Ok(ChannelData::new(
                    forward(&PeriodicSignal::new(c.y.clone())?),
                    forward(&PeriodicSignal::new(c.g_obs.clone())?),
                    c.alpha1,
                    c.alpha2,
                    self.model_eps,
                    self.model_delta,
                )?)
            })
            .collect()
    }

    pub fn truth_signal(&self) -> Result<Option<PeriodicSignal>> {
        Ok(match &self.truth {
            Some(t) => Some(PeriodicSignal::new(t.clone())?),
            None => None,
        })
    }
}

/// Numbers separated by whitespace or commas; `#` starts a comment.
pub fn read_series(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let v: f64 = tok.parse().map_err(|_| {
                ConfigError(format!("{}:{}: not a number: {tok}", path.display(), i + 1))
            })?;
            out.push(v);
        }
    }
    Ok(out)
}
