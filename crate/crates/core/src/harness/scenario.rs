//! Scenario files: everything needed to reproduce a Monte Carlo experiment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::EstimatorConfig;
use crate::kernels::KernelFamily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Grid size (power of two).
    pub n: usize,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Also run the known-kernel estimator on the same draws.
    #[serde(default)]
    pub oracle: bool,
    pub signal: SignalSpec,
    #[serde(rename = "channel")]
    pub channels: Vec<ChannelSpec>,
    pub noise: NoiseGrid,
    #[serde(default)]
    pub estimator: EstimatorSettings,
}

fn default_reps() -> usize {
    100
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalSpec {
    /// Random-sign wavelet coefficients on the boundary of a Besov ball.
    Besov {
        s: f64,
        p: f64,
        #[serde(default = "two")]
        q: f64,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Sum of smooth periodic bumps.
    Smoothblob,
    /// Bumps plus jump discontinuities.
    Piecewise,
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub nu: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub family: KernelFamily,
    #[serde(default)]
    pub phase_twist: f64,
    #[serde(default = "one")]
    pub alpha1: f64,
    #[serde(default = "one")]
    pub alpha2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMode {
    /// Known kernels: `δ = 0` everywhere.
    Zero,
    /// `δ = ε^γ`.
    Coupled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaSetting {
    Mode(DeltaMode),
    Values(Vec<f64>),
}

impl Default for DeltaSetting {
    fn default() -> Self {
        DeltaSetting::Mode(DeltaMode::Zero)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseGrid {
    /// Explicit `ε` values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    /// Inclusive range of integer base-2 exponents, e.g. `[-3, -9]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_log2: Option<[i32; 2]>,
    #[serde(default)]
    pub delta: DeltaSetting,
    /// Coupling exponent for `delta = "coupled"`.
    #[serde(default = "one")]
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSettings {
    #[serde(default = "one")]
    pub k_trunc: f64,
    #[serde(default = "one")]
    pub rho1: f64,
    #[serde(default = "one")]
    pub rho2: f64,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<u32>,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            k_trunc: 1.0,
            rho1: 1.0,
            rho2: 1.0,
            a: 1.0,
            m0: None,
            j: None,
        }
    }
}

impl EstimatorSettings {
    pub fn config(&self) -> EstimatorConfig {
        EstimatorConfig {
            k_trunc: self.k_trunc,
            rho1: self.rho1,
            rho2: self.rho2,
            a: self.a,
            m0_override: self.m0,
            j_override: self.j,
            ..EstimatorConfig::default()
        }
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario is always representable as TOML")
    }

    /// Two channels with different blur and memory, `δ = ε`, and a Besov
    /// signal with `s = 2`, `p = q = 2`. The kernel noise of the first
    /// channel has stronger memory than its signal noise, so the `δ` term
    /// dominates the risk. `ρ₁ = 3` keeps the `ε` threshold a few noise
    /// standard deviations above zero for `ν ≈ 1` kernels.
    pub fn default_scenario() -> Self {
        Self {
            n: 1 << 13,
            reps: 100,
            seed: 20_190_101,
            oracle: true,
            signal: SignalSpec::Besov {
                s: 2.0,
                p: 2.0,
                q: 2.0,
                radius: 1.0,
                seed: 1,
            },
            channels: vec![
                ChannelSpec {
                    nu: 1.0,
                    amplitude: 1.0,
                    family: KernelFamily::PowerLaw,
                    phase_twist: 0.0,
                    alpha1: 1.0,
                    alpha2: 0.6,
                },
                ChannelSpec {
                    nu: 1.5,
                    amplitude: 1.0,
                    family: KernelFamily::PowerLaw,
                    phase_twist: 0.0,
                    alpha1: 0.8,
                    alpha2: 0.9,
                },
            ],
            noise: NoiseGrid {
                eps: None,
                eps_log2: Some([-3, -9]),
                delta: DeltaSetting::Mode(DeltaMode::Coupled),
                gamma: 1.0,
            },
            estimator: EstimatorSettings {
                rho1: 3.0,
                ..EstimatorSettings::default()
            },
        }
    }

    /// `(ε, δ)` pairs in grid order.
    pub fn grid(&self) -> Result<Vec<(f64, f64)>> {
        let eps: Vec<f64> = match (&self.noise.eps, self.noise.eps_log2) {
            (Some(v), None) => v.clone(),
            (None, Some([a, b])) => {
                let step = if b >= a { 1 } else { -1 };
                let mut out = vec![];
                let mut e = a;
                loop {
                    out.push((e as f64).exp2());
                    if e == b {
                        break;
                    }
                    e += step;
                }
                out
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either eps or eps_log2, not both".into()))
            }
            (None, None) => return Err(Error::Config("noise grid needs eps or eps_log2".into())),
        };
        let delta: Vec<f64> = match &self.noise.delta {
            DeltaSetting::Mode(DeltaMode::Zero) => vec![0.0; eps.len()],
            DeltaSetting::Mode(DeltaMode::Coupled) => {
                eps.iter().map(|e| e.powf(self.noise.gamma)).collect()
            }
            DeltaSetting::Values(v) => {
                if v.len() != eps.len() {
                    return Err(Error::Config(format!(
                        "{} delta values for {} eps values",
                        v.len(),
                        eps.len()
                    )));
                }
                v.clone()
            }
        };
        Ok(eps.into_iter().zip(delta).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 64 || !self.n.is_power_of_two() {
            return Err(Error::Config(format!("n = {} must be a power of two >= 64", self.n)));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be positive".into()));
        }
        if self.channels.is_empty() {
            return Err(Error::Config("at least one [[channel]] is required".into()));
        }
        for (l, c) in self.channels.iter().enumerate() {
            if !(c.nu > 0.0 && c.amplitude > 0.0) {
                return Err(Error::Config(format!("channel {l}: nu and amplitude must be positive")));
            }
            for a in [c.alpha1, c.alpha2] {
                if !(a > 0.0 && a <= 1.0) {
                    return Err(Error::Config(format!("channel {l}: alpha {a} outside (0, 1]")));
                }
            }
        }
        if let SignalSpec::Besov { s, p, q, radius, .. } = &self.signal {
            if !(*p >= 1.0 && *q >= 1.0 && *radius > 0.0) {
                return Err(Error::Config("besov signal needs p, q >= 1 and radius > 0".into()));
            }
            if *s < (1.0 / p).max(0.5) {
                return Err(Error::Config(format!("besov smoothness s = {s} below max(1/p, 1/2)")));
            }
        }
        if !(self.noise.gamma > 0.0) {
            return Err(Error::Config("gamma must be positive".into()));
        }
        let grid = self.grid()?;
        if grid.is_empty() {
            return Err(Error::Config("noise grid is empty".into()));
        }
        for &(e, d) in &grid {
            if !(0.0..1.0).contains(&e) || !(0.0..1.0).contains(&d) {
                return Err(Error::Config(format!("noise levels ({e}, {d}) outside [0, 1)")));
            }
        }
        let decreasing = |xs: Vec<f64>| xs.windows(2).all(|w| w[1] < w[0]);
        let eps: Vec<f64> = grid.iter().map(|g| g.0).collect();
        let delta: Vec<f64> = grid.iter().map(|g| g.1).collect();
        if !decreasing(eps) {
            return Err(Error::Config("eps grid must be strictly decreasing".into()));
        }
        if delta.iter().any(|&d| d != 0.0) && !decreasing(delta) {
            return Err(Error::Config("delta grid must be strictly decreasing".into()));
        }
        self.estimator.config().validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}
