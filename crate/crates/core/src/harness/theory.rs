//! Theoretical risk exponents for Besov balls.
//!
//! For each noise source `i` the dominant channel `l*ᵢ` minimizes
//! `2ν_l + α_{il}`. With `sᵢ = (1/p − 1/2)(2ν + α)` at that channel, the risk
//! behaves like `(noise^{2α})^e` with
//!
//! * `e = 2s/(2s + 2ν + α)` when `s > sᵢ` (dense regime),
//! * `e = 2s*/(2s* + 2ν + α − 1)`, `s* = s + 1/2 − 1/p`, when `s ≤ sᵢ`
//!   (sparse regime; an extra `|ln noise|` factor appears at `s = sᵢ`).
//!
//! Logarithmic factors are reported as flags and never enter the exponents.

use serde::Serialize;

use crate::error::{Error, Result};

/// Exponent of one noise source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseExponent {
    /// Zero-based dominant channel.
    pub channel: usize,
    pub nu: f64,
    pub alpha: f64,
    /// Regime boundary `sᵢ`.
    pub boundary: f64,
    /// Risk exponent on the `noise^{2α}` scale.
    pub exponent: f64,
    pub dense: bool,
    /// `s = sᵢ`: the bound carries an extra log factor.
    pub log_factor: bool,
}

impl NoiseExponent {
    /// Slope of log-risk against log-noise: `2α e`.
    pub fn log_slope(&self) -> f64 {
        2.0 * self.alpha * self.exponent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Dense,
    Sparse,
    /// Dense in `ε`, sparse in `δ`.
    DenseSparse,
    /// Sparse in `ε`, dense in `δ`.
    SparseDense,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Dense => "dense",
            Regime::Sparse => "sparse",
            Regime::DenseSparse => "dense-sparse",
            Regime::SparseDense => "sparse-dense",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents {
    pub eps: NoiseExponent,
    pub delta: NoiseExponent,
    pub regime: Regime,
}

impl Exponents {
    /// Expected log-risk/log-ε slope when `δ = ε^γ`: the slower of the two
    /// terms dominates. `gamma = None` means `δ = 0`.
    pub fn slope_target(&self, gamma: Option<f64>) -> f64 {
        match gamma {
            None => self.eps.log_slope(),
            Some(g) => self.eps.log_slope().min(g * self.delta.log_slope()),
        }
    }
}

pub fn dense_exponent(s: f64, nu: f64, alpha: f64) -> f64 {
    2.0 * s / (2.0 * s + 2.0 * nu + alpha)
}

pub fn sparse_exponent(s: f64, p: f64, nu: f64, alpha: f64) -> f64 {
    let s_star = s + 0.5 - 1.0 / p;
    2.0 * s_star / (2.0 * s_star + 2.0 * nu + alpha - 1.0)
}

pub fn regime_boundary(p: f64, nu: f64, alpha: f64) -> f64 {
    (1.0 / p - 0.5) * (2.0 * nu + alpha)
}

fn dominant(nu: &[f64], alpha: &[f64]) -> usize {
    let mut best = 0;
    for l in 1..nu.len() {
        if 2.0 * nu[l] + alpha[l] < 2.0 * nu[best] + alpha[best] {
            best = l;
        }
    }
    best
}

fn noise_exponent(s: f64, p: f64, nu: &[f64], alpha: &[f64]) -> NoiseExponent {
    let l = dominant(nu, alpha);
    let boundary = regime_boundary(p, nu[l], alpha[l]);
    let dense = s > boundary;
    let exponent = if dense {
        dense_exponent(s, nu[l], alpha[l])
    } else {
        sparse_exponent(s, p, nu[l], alpha[l])
    };
    NoiseExponent {
        channel: l,
        nu: nu[l],
        alpha: alpha[l],
        boundary,
        exponent,
        dense,
        log_factor: s == boundary,
    }
}

pub fn theoretical_exponent(
    s: f64,
    p: f64,
    nu: &[f64],
    alpha1: &[f64],
    alpha2: &[f64],
) -> Result<Exponents> {
    if nu.is_empty() || nu.len() != alpha1.len() || nu.len() != alpha2.len() {
        return Err(Error::invalid("nu, alpha1 and alpha2 need one entry per channel"));
    }
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("p must be at least 1, got {p}")));
    }
    let floor = (1.0 / p).max(0.5);
    if !(s >= floor && s.is_finite()) {
        return Err(Error::invalid(format!("s = {s} below max(1/p, 1/2) = {floor}")));
    }
    if nu.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("every nu must be positive"));
    }
    if alpha1.iter().chain(alpha2).any(|&a| !(a > 0.0 && a <= 1.0)) {
        return Err(Error::invalid("every alpha must lie in (0, 1]"));
    }
    let eps = noise_exponent(s, p, nu, alpha1);
    let delta = noise_exponent(s, p, nu, alpha2);
    let regime = match (eps.dense, delta.dense) {
        (true, true) => Regime::Dense,
        (false, false) => Regime::Sparse,
        (true, false) => Regime::DenseSparse,
        (false, true) => Regime::SparseDense,
    };
    Ok(Exponents { eps, delta, regime })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_balls_are_always_dense() {
        let e = theoretical_exponent(0.6, 2.0, &[1.3], &[0.4], &[0.9]).unwrap();
        assert_eq!(e.regime, Regime::Dense);
        assert_eq!(e.eps.boundary, 0.0);
        assert_eq!(e.eps.exponent, dense_exponent(0.6, 1.3, 0.4));
    }

    #[test]
    fn white_noise_known_kernel_value() {
        let e = theoretical_exponent(2.0, 2.0, &[1.0], &[1.0], &[1.0]).unwrap();
        assert!((e.eps.exponent - 4.0 / 7.0).abs() < 1e-15);
        assert!((e.slope_target(None) - 8.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_case_flags_log_factor() {
        let e = theoretical_exponent(1.5, 1.0, &[1.0], &[1.0], &[1.0]).unwrap();
        assert_eq!(e.eps.boundary, 1.5);
        assert!(!e.eps.dense);
        assert!(e.eps.log_factor);
        assert_eq!(e.regime, Regime::Sparse);
        // s* = 1 ⇒ 2/(2 + 2 + 1 − 1)
        assert!((e.eps.exponent - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mixed_regimes() {
        // channel 0 dominates both sources; α₂ smaller moves s₂ below s
        let e = theoretical_exponent(1.2, 1.0, &[0.5, 2.0], &[1.0, 1.0], &[0.1, 1.0]).unwrap();
        assert_eq!(e.eps.channel, 0);
        assert!((e.eps.boundary - 1.0).abs() < 1e-15);
        assert!((e.delta.boundary - 0.55).abs() < 1e-15);
        assert_eq!(e.regime, Regime::Dense);
        let e = theoretical_exponent(1.0, 1.0, &[0.5], &[1.0], &[0.1]).unwrap();
        assert_eq!(e.regime, Regime::SparseDense);
    }

    #[test]
    fn dominant_channel_tie_goes_to_first() {
        let e = theoretical_exponent(2.0, 2.0, &[1.0, 0.75], &[0.5, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(e.eps.channel, 0);
        assert_eq!(e.delta.channel, 1);
    }

    #[test]
    fn slower_term_sets_the_target() {
        let e = theoretical_exponent(2.0, 2.0, &[1.0], &[1.0], &[0.5]).unwrap();
        let t = e.slope_target(Some(1.0));
        assert_eq!(t, e.delta.log_slope());
        assert!(t < e.eps.log_slope());
        assert_eq!(e.slope_target(Some(10.0)), e.eps.log_slope());
    }

    #[test]
    fn rejects_hypothesis_violations() {
        assert!(theoretical_exponent(0.4, 2.0, &[1.0], &[1.0], &[1.0]).is_err());
        assert!(theoretical_exponent(0.9, 1.0, &[1.0], &[1.0], &[1.0]).is_err());
        assert!(theoretical_exponent(2.0, 0.5, &[1.0], &[1.0], &[1.0]).is_err());
        assert!(theoretical_exponent(2.0, 2.0, &[1.0], &[1.5], &[1.0]).is_err());
        assert!(theoretical_exponent(2.0, 2.0, &[1.0, 1.0], &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn infinite_p_is_accepted() {
        let e = theoretical_exponent(1.0, f64::INFINITY, &[1.0], &[1.0], &[1.0]).unwrap();
        assert_eq!(e.eps.boundary, -1.5);
        assert!(e.eps.dense);
    }
}
