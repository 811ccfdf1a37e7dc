//! Adaptive hard-thresholding wavelet estimator for multichannel blind
//! deconvolution.
//!
//! Pipeline: a stabilized, inverse-variance weighted Fourier estimate of
//! `f̃(m)` (zero wherever some observed kernel coefficient is too small to
//! trust), Meyer wavelet analysis, level-dependent data-driven hard
//! thresholds, and reconstruction. Every intermediate decision is recorded
//! in an [`EstimateTrace`].

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{FourierSeries, PeriodicSignal};
use crate::meyer::{max_level_for, Band, MeyerBasis, WaveletCoeffs};

/// One channel's observations in the Fourier domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelData {
    /// `Ỹ_l(m)`, the observed blurred signal.
    pub y_tilde: FourierSeries,
    /// `g̃^δ_l(m)`, the observed kernel.
    pub g_obs: FourierSeries,
    pub alpha1: f64,
    pub alpha2: f64,
    pub eps: f64,
    pub delta: f64,
}

impl ChannelData {
    pub fn new(
        y_tilde: FourierSeries,
        g_obs: FourierSeries,
        alpha1: f64,
        alpha2: f64,
        eps: f64,
        delta: f64,
    ) -> Result<Self> {
        let c = Self {
            y_tilde,
            g_obs,
            alpha1,
            alpha2,
            eps,
            delta,
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        for (name, a) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1], got {a}")));
            }
        }
        for (name, v) in [("eps", self.eps), ("delta", self.delta)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if self.y_tilde.n() != self.g_obs.n() {
            return Err(Error::invalid("signal and kernel grids differ"));
        }
        Ok(())
    }

    /// Noise variance profile `ε^{2α₁}|m|^{α₁−1} + δ^{2α₂}|m|^{α₂−1}`.
    fn noise_profile(&self, m: i64) -> f64 {
        let mm = m.unsigned_abs().max(1) as f64;
        self.eps.powf(2.0 * self.alpha1) * mm.powf(self.alpha1 - 1.0)
            + self.delta.powf(2.0 * self.alpha2) * mm.powf(self.alpha2 - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorConfig {
    /// Truncation constant `k` in the kernel-reliability test.
    pub k_trunc: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// Besov radius surrogate used in the level-selection bounds.
    pub a: f64,
    pub m0_override: Option<u32>,
    pub j_override: Option<u32>,
    /// Weighted kernel energies at or below this are treated as zero.
    pub noise_floor_guard: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            k_trunc: 1.0,
            rho1: 1.0,
            rho2: 1.0,
            a: 1.0,
            m0_override: None,
            j_override: None,
            noise_floor_guard: 1e-300,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("k_trunc", self.k_trunc),
            ("a", self.a),
            ("noise_floor_guard", self.noise_floor_guard),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        // zero thresholds are allowed: they give the linear estimator
        for (name, v) in [("rho1", self.rho1), ("rho2", self.rho2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Common noise levels and grid of a channel list.
#[derive(Debug, Clone, Copy)]
struct NoiseLevels {
    n: usize,
    eps: f64,
    delta: f64,
}

fn check_channels(channels: &[ChannelData]) -> Result<NoiseLevels> {
    let first = channels
        .first()
        .ok_or_else(|| Error::invalid("at least one channel is required"))?;
    for (l, c) in channels.iter().enumerate() {
        c.validate()?;
        if c.y_tilde.n() != first.y_tilde.n() {
            return Err(Error::invalid(format!("channel {l} has a different grid size")));
        }
        if c.eps != first.eps || c.delta != first.delta {
            return Err(Error::invalid(format!(
                "channel {l} has noise levels differing from channel 0"
            )));
        }
    }
    Ok(NoiseLevels {
        n: first.y_tilde.n(),
        eps: first.eps,
        delta: first.delta,
    })
}

/// `|ln x|`, with the convention that a factor multiplied by `0^{positive}`
/// contributes zero.
fn abs_ln(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.ln().abs()
    }
}

/// Inverse-variance channel weights
/// `ω_l(m) = (ε^{2α₁ₗ}|m|^{α₁ₗ−1} + δ^{2α₂ₗ}|m|^{α₂ₗ−1})^{−1}`, with `|m|`
/// floored at 1. Uniform weights when both noise levels vanish.
pub fn compute_weights(m: i64, channels: &[ChannelData]) -> Vec<f64> {
    let profiles: Vec<f64> = channels.iter().map(|c| c.noise_profile(m)).collect();
    if profiles.iter().all(|&p| p == 0.0) {
        return vec![1.0; channels.len()];
    }
    profiles.into_iter().map(|p| 1.0 / p).collect()
}

/// Right-hand side `k² δ^{2α*₂}|m|^{α*₂−1}|ln δ|` of the kernel-reliability
/// test, `None` when `δ = 0` and the test is bypassed.
pub fn truncation_threshold(m: i64, channels: &[ChannelData], config: &EstimatorConfig) -> Option<f64> {
    let delta = channels.first()?.delta;
    if delta == 0.0 {
        return None;
    }
    let alpha_star = channels.iter().map(|c| c.alpha2).fold(0.0, f64::max);
    let mm = m.unsigned_abs().max(1) as f64;
    Some(
        config.k_trunc.powi(2)
            * delta.powf(2.0 * alpha_star)
            * mm.powf(alpha_star - 1.0)
            * abs_ln(delta),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffEstimate {
    pub value: Complex64,
    /// Whether `m` passed the kernel-reliability test.
    pub survived: bool,
}

/// Weighted estimate of `f̃(m)`:
/// `Σ ω_l conj(g̃^δ_l) Ỹ_l / Σ ω_l |g̃^δ_l|²` when every channel's observed
/// kernel clears the truncation threshold, zero otherwise.
pub fn estimate_fourier_coeff(
    m: i64,
    channels: &[ChannelData],
    config: &EstimatorConfig,
) -> CoeffEstimate {
    let dead = CoeffEstimate {
        value: Complex64::new(0.0, 0.0),
        survived: false,
    };
    let min_power = channels
        .iter()
        .map(|c| c.g_obs.get(m).norm_sqr())
        .fold(f64::INFINITY, f64::min);
    let passes = match truncation_threshold(m, channels, config) {
        Some(t) => min_power > t,
        None => min_power > 0.0,
    };
    if !passes {
        return dead;
    }
    let weights = compute_weights(m, channels);
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (c, w) in channels.iter().zip(&weights) {
        let g = c.g_obs.get(m);
        num += g.conj() * c.y_tilde.get(m) * *w;
        den += w * g.norm_sqr();
    }
    if den <= config.noise_floor_guard {
        return dead;
    }
    CoeffEstimate {
        value: num / den,
        survived: true,
    }
}

/// Survival flags indexed by `m + n/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalSet {
    n: usize,
    flags: Vec<bool>,
}

impl SurvivalSet {
    pub fn contains(&self, m: i64) -> bool {
        let idx = m + self.n as i64 / 2;
        idx >= 0 && (idx as usize) < self.n && self.flags[idx as usize]
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }
}

/// `f̃` estimated at every grid frequency together with the surviving set.
pub fn fourier_estimate(
    channels: &[ChannelData],
    config: &EstimatorConfig,
) -> Result<(FourierSeries, SurvivalSet)> {
    let levels = check_channels(channels)?;
    config.validate()?;
    let mut series = FourierSeries::zeros(levels.n)?;
    let mut flags = Vec::with_capacity(levels.n);
    for m in series.frequencies() {
        let est = estimate_fourier_coeff(m, channels, config);
        series.set(m, est.value);
        flags.push(est.survived);
    }
    Ok((
        series,
        SurvivalSet {
            n: levels.n,
            flags,
        },
    ))
}

/// `S_j(l) = Σ_{m ∈ W_j ∩ Ω̂₁} |g̃^δ_l(m)|²` per channel.
pub fn compute_sj(band: &Band, survival: &SurvivalSet, channels: &[ChannelData]) -> Vec<f64> {
    let mut sums = vec![0.0; channels.len()];
    for m in band.frequencies().filter(|&m| survival.contains(m)) {
        for (s, c) in sums.iter_mut().zip(channels) {
            *s += c.g_obs.get(m).norm_sqr();
        }
    }
    sums
}

fn argmin_by(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (l, v) in values.enumerate() {
        if v < best_val {
            best = l;
            best_val = v;
        }
    }
    best
}

/// Zero-based `(l*₁, l*₂)`: the channels minimizing
/// `ε^{2α₁ₗ} 2^{j(α₁ₗ+1)} / S_j(l)` and its `δ` analogue. Ties go to the
/// smallest index.
pub fn select_channels(j: u32, channels: &[ChannelData], sj: &[f64]) -> (usize, usize) {
    let crit = |noise: f64, alpha: f64, s: f64| {
        noise.powf(2.0 * alpha) * (j as f64 * (alpha + 1.0)).exp2() / s
    };
    let l1 = argmin_by(
        channels
            .iter()
            .zip(sj)
            .map(|(c, &s)| crit(c.eps, c.alpha1, s)),
    );
    let l2 = argmin_by(
        channels
            .iter()
            .zip(sj)
            .map(|(c, &s)| crit(c.delta, c.alpha2, s)),
    );
    (l1, l2)
}

/// Level-`j` hard threshold
/// `ρ₁ S^{−½} ε^{α₁} |ln ε|^{½} 2^{jα₁/2} ∨ ρ₂ S^{−½} δ^{α₂} |ln δ| 2^{jα₂/2}`,
/// each term evaluated at its own selected channel.
pub fn threshold_lambda(
    j: u32,
    channels: &[ChannelData],
    sj: &[f64],
    selected: (usize, usize),
    config: &EstimatorConfig,
) -> f64 {
    let (l1, l2) = selected;
    let c1 = &channels[l1];
    let c2 = &channels[l2];
    let jf = j as f64;
    let first = if c1.eps == 0.0 || config.rho1 == 0.0 {
        0.0
    } else {
        config.rho1 / sj[l1].sqrt()
            * c1.eps.powf(c1.alpha1)
            * abs_ln(c1.eps).sqrt()
            * (jf * c1.alpha1 / 2.0).exp2()
    };
    let second = if c2.delta == 0.0 || config.rho2 == 0.0 {
        0.0
    } else {
        config.rho2 / sj[l2].sqrt()
            * c2.delta.powf(c2.alpha2)
            * abs_ln(c2.delta)
            * (jf * c2.alpha2 / 2.0).exp2()
    };
    first.max(second)
}

/// Coarsest level from `2^{m0} = |ln ε| ∧ |ln δ|`, floored at 2. A zero
/// noise level places no constraint.
pub fn coarse_level(eps: f64, delta: f64) -> u32 {
    let bound = |x: f64| if x == 0.0 { f64::INFINITY } else { x.ln().abs() };
    let v = bound(eps).min(bound(delta));
    if !v.is_finite() {
        return 2;
    }
    (v.log2().floor().max(2.0)) as u32
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelTrace {
    pub j: u32,
    /// `S_j` per channel over the surviving frequencies of `W_j`.
    pub s_j: Vec<f64>,
    /// Zero-based selected channels.
    pub l1: usize,
    pub l2: usize,
    pub lambda: f64,
    pub kept: usize,
    pub killed: usize,
    /// No frequency of `W_j` survived; the whole level is zeroed.
    pub dead: bool,
}

/// Chosen resolution range and the per-level quantities behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPlan {
    pub m0: u32,
    /// Exclusive top level `J`; levels `m0 ..= J−1` carry wavelets.
    pub top: u32,
    /// Largest level that fits the grid.
    pub j_cap: u32,
    /// Levels from the `ε` and `δ` criteria (`None` when unconstrained).
    pub j1: Option<u32>,
    pub j2: Option<u32>,
    /// `J` was limited by the grid rather than the noise.
    pub capped: bool,
    pub levels: Vec<LevelTrace>,
}

fn level_trace(
    j: u32,
    basis: &MeyerBasis,
    survival: &SurvivalSet,
    channels: &[ChannelData],
    config: &EstimatorConfig,
) -> Result<LevelTrace> {
    let band = basis.support_set(j)?;
    let s_j = compute_sj(&band, survival, channels);
    let dead = !band.frequencies().any(|m| survival.contains(m));
    let (l1, l2, lambda) = if dead {
        (0, 0, f64::INFINITY)
    } else {
        let sel = select_channels(j, channels, &s_j);
        (sel.0, sel.1, threshold_lambda(j, channels, &s_j, sel, config))
    };
    Ok(LevelTrace {
        j,
        s_j,
        l1,
        l2,
        lambda,
        kept: 0,
        killed: 0,
        dead,
    })
}

/// Whether `ε^{2α} 2^{j(α+1)} / S_j ≤ A²M` holds for the selected channel,
/// i.e. `[S_j 2^{−j(α+1)}]^{−1} ≤ Γ`.
fn level_admissible(noise: f64, alpha: f64, s: f64, j: u32, a2m: f64) -> bool {
    if noise == 0.0 {
        return true;
    }
    if s <= 0.0 {
        return false;
    }
    noise.powf(2.0 * alpha) * (j as f64 * (alpha + 1.0)).exp2() / s <= a2m
}

/// Picks `(m0, J)` and records `S_j`, `l*` and `λ_j` for every used level.
pub fn select_levels(
    channels: &[ChannelData],
    survival: &SurvivalSet,
    config: &EstimatorConfig,
) -> Result<LevelPlan> {
    let noise = check_channels(channels)?;
    config.validate()?;
    let j_cap = max_level_for(noise.n);
    let m0 = config
        .m0_override
        .unwrap_or_else(|| coarse_level(noise.eps, noise.delta));
    let basis = MeyerBasis::new(noise.n, m0)?;
    let a2m = config.a * config.a * channels.len() as f64;

    let (top, j1, j2, capped) = if let Some(top) = config.j_override {
        if top > j_cap {
            return Err(Error::LevelOverflow {
                level: top,
                n: noise.n,
                max_level: j_cap,
            });
        }
        (top, None, None, false)
    } else if noise.eps == 0.0 && noise.delta == 0.0 {
        (j_cap, None, None, true)
    } else {
        let mut j1 = None;
        let mut j2 = None;
        let mut open1 = true;
        let mut open2 = true;
        for j in m0..=j_cap {
            let band = basis.support_set(j)?;
            let s = compute_sj(&band, survival, channels);
            let ok = s.iter().all(|&v| v > 0.0);
            let (l1, l2) = if ok { select_channels(j, channels, &s) } else { (0, 0) };
            if open1 {
                let c = &channels[l1];
                if ok && level_admissible(c.eps, c.alpha1, s[l1], j, a2m) {
                    j1 = Some(j);
                } else {
                    open1 = false;
                }
            }
            if open2 {
                let c = &channels[l2];
                if ok && level_admissible(c.delta, c.alpha2, s[l2], j, a2m) {
                    j2 = Some(j);
                } else {
                    open2 = false;
                }
            }
            if !open1 && !open2 {
                break;
            }
        }
        let capped = open1 && open2;
        let top = match (j1, j2) {
            (Some(a), Some(b)) => a.min(b),
            _ => m0.saturating_sub(1),
        };
        (top, j1, j2, capped)
    };

    if top <= m0 {
        return Err(Error::Infeasible(format!(
            "finest level J = {top} does not exceed m0 = {m0} (eps = {}, delta = {}, n = {})",
            noise.eps, noise.delta, noise.n
        )));
    }
    let levels = (m0..top)
        .map(|j| level_trace(j, &basis, survival, channels, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelPlan {
        m0,
        top,
        j_cap,
        j1,
        j2,
        capped,
        levels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateTrace {
    /// Kernel-reliability survival flags, indexed by `m + n/2`.
    pub survival: SurvivalSet,
    pub plan: LevelPlan,
    /// Both noise levels vanish and weights were replaced by ones.
    pub uniform_weights: bool,
    /// `δ = 0`: the kernel test was bypassed.
    pub kernel_test_bypassed: bool,
    /// Scaling coefficients are never thresholded.
    pub scaling_kept: usize,
}

impl EstimateTrace {
    pub fn m0(&self) -> u32 {
        self.plan.m0
    }

    pub fn top(&self) -> u32 {
        self.plan.top
    }

    pub fn kept(&self) -> usize {
        self.plan.levels.iter().map(|l| l.kept).sum::<usize>() + self.scaling_kept
    }

    pub fn killed(&self) -> usize {
        self.plan.levels.iter().map(|l| l.killed).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Estimate {
    pub signal: PeriodicSignal,
    /// Pre-threshold coefficients `β̃_{j,k}`.
    pub beta_tilde: WaveletCoeffs,
    /// Thresholded coefficients `β̂_{j,k}`.
    pub beta_hat: WaveletCoeffs,
    pub trace: EstimateTrace,
}

/// Runs the full adaptive pipeline.
pub fn estimate(channels: &[ChannelData], config: &EstimatorConfig) -> Result<Estimate> {
    let (series, survival) = fourier_estimate(channels, config)?;
    let plan = select_levels(channels, &survival, config)?;
    let basis = MeyerBasis::new(series.n(), plan.m0)?;
    let beta_tilde = basis.analyze(&series, plan.top)?;

    let mut beta_hat = beta_tilde.clone();
    let mut plan = plan;
    for lvl in &mut plan.levels {
        let block = beta_hat
            .level_mut(lvl.j)
            .expect("plan levels lie inside the coefficient rectangle");
        for c in block.iter_mut() {
            if !lvl.dead && c.norm() > lvl.lambda {
                lvl.kept += 1;
            } else {
                *c = Complex64::new(0.0, 0.0);
                lvl.killed += 1;
            }
        }
    }
    let signal = basis.synthesize(&beta_hat)?;
    let trace = EstimateTrace {
        survival,
        scaling_kept: basis.slots(basis.scaling_level()),
        uniform_weights: channels[0].eps == 0.0 && channels[0].delta == 0.0,
        kernel_test_bypassed: channels[0].delta == 0.0,
        plan,
    };
    Ok(Estimate {
        signal,
        beta_tilde,
        beta_hat,
        trace,
    })
}

/// Oracle baseline: the same pipeline with the true kernels substituted for
/// the observed ones and `δ = 0`.
pub fn estimate_known_kernel(
    channels: &[ChannelData],
    kernels: &[FourierSeries],
    config: &EstimatorConfig,
) -> Result<Estimate> {
    if kernels.len() != channels.len() {
        return Err(Error::invalid(format!(
            "{} kernels for {} channels",
            kernels.len(),
            channels.len()
        )));
    }
    let oracle: Vec<ChannelData> = channels
        .iter()
        .zip(kernels)
        .map(|(c, g)| ChannelData {
            g_obs: g.clone(),
            delta: 0.0,
            ..c.clone()
        })
        .collect();
    estimate(&oracle, config)
}
