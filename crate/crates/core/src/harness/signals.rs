//! Test signals: random-sign Besov constructions with known smoothness, and
//! two named shapes for qualitative runs.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fourier::PeriodicSignal;
use crate::meyer::{MeyerBasis, WaveletCoeffs};

/// A synthesized Besov-ball signal together with its coefficients.
#[derive(Debug, Clone)]
pub struct BesovSignal {
    pub signal: PeriodicSignal,
    pub coeffs: WaveletCoeffs,
    /// Besov norm of `coeffs`, recomputed after scaling.
    pub norm: f64,
}

/// Besov ball parameters: smoothness `s`, shape `p`, `q` and radius `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub radius: f64,
}

impl BesovParams {
    pub fn validate(&self) -> Result<()> {
        check_besov(self.s, self.p, self.q, self.radius)
    }
}

/// Relative margin kept below the ball radius.
pub const RADIUS_MARGIN: f64 = 1e-6;

/// Besov sequence norm
/// `(Σ_j 2^{j s* q} (Σ_k |β_{j,k}|^p)^{q/p})^{1/q}` with `s* = s + 1/2 − 1/p`.
/// The scaling block is weighted as level `m0 − 1`. `p` or `q` may be
/// infinite.
pub fn besov_norm(coeffs: &WaveletCoeffs, s: f64, p: f64, q: f64) -> f64 {
    let s_star = s + 0.5 - 1.0 / p;
    let level_terms = coeffs.levels().map(|j| {
        let block = coeffs.level(j).expect("level inside the rectangle");
        let lp = if p.is_infinite() {
            block.iter().map(|c| c.norm()).fold(0.0, f64::max)
        } else {
            block.iter().map(|c| c.norm().powf(p)).sum::<f64>().powf(1.0 / p)
        };
        (j as f64 * s_star).exp2() * lp
    });
    if q.is_infinite() {
        level_terms.fold(0.0, f64::max)
    } else {
        level_terms.map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

fn check_besov(s: f64, p: f64, q: f64, radius: f64) -> Result<()> {
    if !(p >= 1.0 && q >= 1.0) {
        return Err(Error::invalid(format!("need p, q >= 1, got p = {p}, q = {q}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    let floor = (1.0 / p).max(0.5);
    if !(s >= floor && s.is_finite()) {
        return Err(Error::invalid(format!("smoothness s = {s} below max(1/p, 1/2) = {floor}")));
    }
    Ok(())
}

/// Coefficients `β_{j,k} = σ_j r_{j,k}` with random signs and
/// `σ_j = c 2^{−j(s+1/2−1/p)} 2^{−j/p}`, scaled so the Besov norm is
/// `A(1 − 10⁻⁶)`, then synthesized on `n` points over levels
/// `m0 − 1 ..= top − 1`.
pub fn build_besov_signal(
    params: &BesovParams,
    n: usize,
    m0: u32,
    top: u32,
    seed: u64,
) -> Result<BesovSignal> {
    params.validate()?;
    let BesovParams { s, p, q, radius } = *params;
    let basis = MeyerBasis::new(n, m0)?;
    let mut coeffs = WaveletCoeffs::zeros(m0, top)?;
    // validates `top` against the grid before any work
    basis.synthesize_series(&coeffs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s_star = s + 0.5 - 1.0 / p;
    for j in coeffs.levels() {
        let sigma = (-(j as f64) * s_star).exp2() * (-(j as f64) / p).exp2();
        for c in coeffs.level_mut(j).expect("level inside the rectangle") {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            *c = Complex64::new(sigma * sign, 0.0);
        }
    }
    let raw = besov_norm(&coeffs, s, p, q);
    let scale = radius * (1.0 - RADIUS_MARGIN) / raw;
    for j in coeffs.levels() {
        for c in coeffs.level_mut(j).expect("level inside the rectangle") {
            *c *= scale;
        }
    }
    let norm = besov_norm(&coeffs, s, p, q);
    let signal = basis.synthesize(&coeffs)?;
    Ok(BesovSignal {
        signal,
        coeffs,
        norm,
    })
}

fn wrapped_gaussian(t: f64, center: f64, width: f64) -> f64 {
    (-2..=2)
        .map(|shift| {
            let d = (t - center + shift as f64) / width;
            (-0.5 * d * d).exp()
        })
        .sum()
}

/// Three smooth periodic bumps.
pub fn smoothblob(n: usize) -> Result<PeriodicSignal> {
    PeriodicSignal::from_fn(n, |t| {
        wrapped_gaussian(t, 0.25, 0.05) + 0.6 * wrapped_gaussian(t, 0.55, 0.08)
            - 0.4 * wrapped_gaussian(t, 0.8, 0.03)
            + 0.1 * (TAU * t).cos()
    })
}

/// Bumps on top of a piecewise-constant profile with three jumps.
pub fn piecewise(n: usize) -> Result<PeriodicSignal> {
    PeriodicSignal::from_fn(n, |t| {
        let step = if t < 0.2 {
            0.0
        } else if t < 0.45 {
            0.8
        } else if t < 0.7 {
            -0.3
        } else {
            0.2
        };
        step + 0.5 * wrapped_gaussian(t, 0.6, 0.04)
    })
}
