//! Long-memory parameter estimation and the split-sample plug-in workflow.
//!
//! Hurst exponents are estimated by log-periodogram (GPH) regression over
//! the lowest `⌊n^{0.65}⌋` Fourier frequencies. For fGn the spectral density
//! behaves like `λ^{1−2H}` near zero, so `H = (1 − slope)/2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{self, ChannelData, Estimate, EstimatorConfig};
use crate::fourier::{forward, PeriodicSignal};
use crate::stats::ols;

pub const BANDWIDTH_EXPONENT: f64 = 0.65;
pub const MIN_LENGTH: usize = 256;
/// Upper clamp on `Ĥ` so that `α̂ = 2 − 2Ĥ` stays strictly positive.
pub const MAX_HURST: f64 = 0.995;
/// Lower band edge, as a fraction of `π`, for the plug-in noise estimates.
pub const PLUGIN_BAND_EDGE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HurstEstimate {
    /// Unclamped point estimate.
    pub h_hat: f64,
    pub stderr: f64,
    /// Number of periodogram ordinates in the regression.
    pub bandwidth: usize,
    pub slope: f64,
}

impl HurstEstimate {
    /// `Ĥ` clamped to the model range `[1/2, MAX_HURST]`.
    pub fn h_clamped(&self) -> f64 {
        self.h_hat.clamp(0.5, MAX_HURST)
    }

    /// `α̂ = 2 − 2Ĥ` after clamping, so `α̂ ∈ (0, 1]`.
    pub fn alpha_hat(&self) -> f64 {
        2.0 - 2.0 * self.h_clamped()
    }
}

fn periodogram(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = series.iter().map(|&x| Complex64::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter()
        .map(|z| z.norm_sqr() / (2.0 * PI * n as f64))
        .collect()
}

fn check_series(series: &[f64]) -> Result<()> {
    if series.len() < MIN_LENGTH {
        return Err(Error::invalid(format!(
            "need at least {MIN_LENGTH} observations, got {}",
            series.len()
        )));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("series contains non-finite values"));
    }
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::EstimationFailure("series is constant".into()));
    }
    Ok(())
}

/// Regression of `log I(λ_m)/gain(λ_m)` on `log λ_m`, `m = 1..=⌊n^{0.65}⌋`.
fn gph(series: &[f64], gain: impl Fn(f64) -> f64) -> Result<HurstEstimate> {
    let n = series.len();
    let bandwidth = ((n as f64).powf(BANDWIDTH_EXPONENT).floor() as usize).min(n / 2 - 1);
    let pgram = periodogram(series);
    let mut xs = Vec::with_capacity(bandwidth);
    let mut ys = Vec::with_capacity(bandwidth);
    for (m, &p) in pgram.iter().enumerate().skip(1).take(bandwidth) {
        let lambda = 2.0 * PI * m as f64 / n as f64;
        let v = p / gain(lambda);
        if !(v > 0.0) {
            return Err(Error::EstimationFailure(format!(
                "periodogram vanishes at frequency {m}"
            )));
        }
        xs.push(lambda.ln());
        ys.push(v.ln());
    }
    let fit = ols(&xs, &ys)
        .ok_or_else(|| Error::EstimationFailure("degenerate regression".into()))?;
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    // Var(log-periodogram error) = π²/6
    let stderr = (PI * PI / 6.0 / sxx).sqrt() / 2.0;
    Ok(HurstEstimate {
        h_hat: (1.0 - fit.slope) / 2.0,
        stderr,
        bandwidth,
        slope: fit.slope,
    })
}

/// GPH Hurst estimate of a (possibly long-memory) stationary series.
pub fn estimate_hurst(series: &[f64]) -> Result<HurstEstimate> {
    check_series(series)?;
    gph(series, |_| 1.0)
}

/// Hurst estimate from the first differences of an observed record. The
/// periodogram of the differences is divided by the differencing gain
/// `4 sin²(λ/2)` so the estimate still targets the noise exponent.
pub fn estimate_hurst_differenced(series: &[f64]) -> Result<HurstEstimate> {
    check_series(series)?;
    let diff: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    check_series(&diff)?;
    gph(&diff, |lambda| 4.0 * (lambda / 2.0).sin().powi(2))
}

/// Unnormalized fGn spectral density
/// `(1 − cos λ) Σ_k |λ + 2πk|^{−2H−1}`, with the far tail of the sum
/// replaced by its integral.
pub fn fgn_spectral_shape(hurst: f64, lambda: f64) -> f64 {
    const TERMS: i64 = SHAPE_TERMS;
    let d = 2.0 * hurst + 1.0;
    let mut sum = 0.0;
    for k in -TERMS..=TERMS {
        sum += (lambda + 2.0 * PI * k as f64).abs().powf(-d);
    }
    // Σ_{k > K} (2πk ± λ)^{−d} ≈ ∫_{K+½}^∞ (2πx ± λ)^{−d} dx
    let tail = |shift: f64| (2.0 * PI * (TERMS as f64 + 0.5) + shift).powf(1.0 - d) / (2.0 * PI * (d - 1.0));
    sum += tail(lambda) + tail(-lambda);
    (1.0 - lambda.cos()) * sum
}

/// Per-ordinate logarithms behind `fgn_spectral_shape`, so that evaluating
/// the shape at a new `H` costs exponentials only.
struct ShapeTable {
    ln_cos: Vec<f64>,
    ln_dist: Vec<[f64; 2 * SHAPE_TERMS as usize + 1]>,
    ln_tail: Vec<[f64; 2]>,
}

const SHAPE_TERMS: i64 = 8;

impl ShapeTable {
    fn new(lambdas: &[f64]) -> Self {
        let tail_base = 2.0 * PI * (SHAPE_TERMS as f64 + 0.5);
        Self {
            ln_cos: lambdas.iter().map(|l| (1.0 - l.cos()).ln()).collect(),
            ln_dist: lambdas
                .iter()
                .map(|&l| {
                    let mut row = [0.0; 2 * SHAPE_TERMS as usize + 1];
                    for (i, k) in (-SHAPE_TERMS..=SHAPE_TERMS).enumerate() {
                        row[i] = (l + 2.0 * PI * k as f64).abs().ln();
                    }
                    row
                })
                .collect(),
            ln_tail: lambdas
                .iter()
                .map(|&l| [(tail_base + l).ln(), (tail_base - l).ln()])
                .collect(),
        }
    }

    fn ln_shape(&self, hurst: f64, i: usize) -> f64 {
        let d = 2.0 * hurst + 1.0;
        let mut sum: f64 = self.ln_dist[i].iter().map(|v| (-d * v).exp()).sum();
        sum += self.ln_tail[i].iter().map(|v| ((1.0 - d) * v).exp()).sum::<f64>() / (2.0 * PI * (d - 1.0));
        self.ln_cos[i] + sum.ln()
    }

    /// Whittle contrast of the periodogram against the fGn shape, with the
    /// scale profiled out.
    fn contrast(&self, hurst: f64, pgram: &[f64]) -> f64 {
        let k = pgram.len() as f64;
        let mut ratio = 0.0;
        let mut logs = 0.0;
        for (i, &p) in pgram.iter().enumerate() {
            let lf = self.ln_shape(hurst, i);
            ratio += p * (-lf).exp();
            logs += lf;
        }
        (ratio / k).ln() + logs / k
    }
}

/// Whittle estimate of `H` from the periodogram ordinates with
/// `λ ≥ lower·π`. Away from zero frequency a smooth deterministic
/// component contributes little, so the upper band is a usable noise proxy
/// for records that also carry a signal. `h_hat` is searched in
/// `[0.01, MAX_HURST]`; `slope` reports the implied low-frequency slope
/// `1 − 2Ĥ`.
pub fn estimate_hurst_upper_band(series: &[f64], lower: f64) -> Result<HurstEstimate> {
    check_series(series)?;
    if !(0.0..1.0).contains(&lower) {
        return Err(Error::invalid(format!("band edge {lower} outside [0, 1)")));
    }
    let n = series.len();
    let first = ((lower * n as f64 / 2.0).ceil() as usize).max(1);
    let last = n / 2 - 1;
    if last < first + 8 {
        return Err(Error::invalid("band holds fewer than 8 ordinates"));
    }
    let pgram = periodogram(series);
    let lambdas: Vec<f64> = (first..=last).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    let ords: Vec<f64> = pgram[first..=last].to_vec();
    if ords.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::EstimationFailure("periodogram vanishes in the band".into()));
    }
    let table = ShapeTable::new(&lambdas);
    let q = |h: f64| table.contrast(h, &ords);
    // coarse grid, then golden section around the best node
    let (lo, hi) = (0.01, MAX_HURST);
    let steps = 49;
    let node = |i: usize| lo + (hi - lo) * i as f64 / steps as f64;
    let best = (0..=steps)
        .map(|i| (i, q(node(i))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is nonempty")
        .0;
    let (mut a, mut b) = (node(best.saturating_sub(1)), node((best + 1).min(steps)));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut qc, mut qd) = (q(c), q(d));
    for _ in 0..40 {
        if qc < qd {
            b = d;
            d = c;
            qd = qc;
            c = b - g * (b - a);
            qc = q(c);
        } else {
            a = c;
            c = d;
            qc = qd;
            d = a + g * (b - a);
            qd = q(d);
        }
    }
    let h_hat = 0.5 * (a + b);
    // Fisher information of the profiled contrast: Σ (∂_H ln f − mean)²
    let eps = 1e-5;
    let deriv: Vec<f64> = (0..lambdas.len())
        .map(|i| (table.ln_shape(h_hat + eps, i) - table.ln_shape(h_hat - eps, i)) / (2.0 * eps))
        .collect();
    let mean = deriv.iter().sum::<f64>() / deriv.len() as f64;
    let info: f64 = deriv.iter().map(|v| (v - mean).powi(2)).sum();
    Ok(HurstEstimate {
        h_hat,
        stderr: if info > 0.0 { info.sqrt().recip() } else { f64::INFINITY },
        bandwidth: lambdas.len(),
        slope: 1.0 - 2.0 * h_hat,
    })
}

/// Time-domain samples of one channel record.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub y: Vec<f64>,
    pub g_obs: Vec<f64>,
}

/// Two independent records per channel: the first feeds the long-memory
/// estimates, the second the deconvolution.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSample {
    pub first: Vec<RawRecord>,
    pub second: Vec<RawRecord>,
}

impl SplitSample {
    /// Splits `2n`-sample streams per channel into halves.
    pub fn from_streams(streams: Vec<RawRecord>) -> Result<Self> {
        let mut first = Vec::with_capacity(streams.len());
        let mut second = Vec::with_capacity(streams.len());
        for (l, s) in streams.into_iter().enumerate() {
            if s.y.len() != s.g_obs.len() || s.y.len() % 2 != 0 {
                return Err(Error::invalid(format!(
                    "channel {l}: streams must have equal even length"
                )));
            }
            let half = s.y.len() / 2;
            first.push(RawRecord {
                y: s.y[..half].to_vec(),
                g_obs: s.g_obs[..half].to_vec(),
            });
            second.push(RawRecord {
                y: s.y[half..].to_vec(),
                g_obs: s.g_obs[half..].to_vec(),
            });
        }
        Ok(Self { first, second })
    }
}

/// Ground truth for scoring a plug-in run.
#[derive(Debug, Clone)]
pub struct PluginTruth {
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub signal: PeriodicSignal,
}

#[derive(Debug, Clone)]
pub struct PluginResult {
    pub hurst1: Vec<HurstEstimate>,
    pub hurst2: Vec<HurstEstimate>,
    pub alpha1_hat: Vec<f64>,
    pub alpha2_hat: Vec<f64>,
    pub estimate: Estimate,
    pub plugin_risk: Option<f64>,
    pub true_alpha_risk: Option<f64>,
}

/// Runs the estimator on records with the given long-memory parameters.
pub fn estimate_with_alphas(
    records: &[RawRecord],
    alpha1: &[f64],
    alpha2: &[f64],
    eps: f64,
    delta: f64,
    config: &EstimatorConfig,
) -> Result<Estimate> {
    if alpha1.len() != records.len() || alpha2.len() != records.len() {
        return Err(Error::invalid("one alpha pair per channel is required"));
    }
    let channels = records
        .iter()
        .zip(alpha1.iter().zip(alpha2))
        .map(|(r, (&a1, &a2))| {
            ChannelData::new(
                forward(&PeriodicSignal::new(r.y.clone())?),
                forward(&PeriodicSignal::new(r.g_obs.clone())?),
                a1,
                a2,
                eps,
                delta,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    estimator::estimate(&channels, config)
}

/// Estimates every `α₁ₗ` and `α₂ₗ` on the first records (upper-band
/// Whittle fits, see [`estimate_hurst_upper_band`]), then deconvolves the
/// second records with those values.
pub fn plugin_workflow(
    sample: &SplitSample,
    eps: f64,
    delta: f64,
    config: &EstimatorConfig,
    truth: Option<&PluginTruth>,
) -> Result<PluginResult> {
    if sample.first.len() != sample.second.len() {
        return Err(Error::invalid(format!(
            "{} channels in the first half but {} in the second",
            sample.first.len(),
            sample.second.len()
        )));
    }
    if sample.first.is_empty() {
        return Err(Error::invalid("no channels"));
    }
    let mut hurst1 = Vec::new();
    let mut hurst2 = Vec::new();
    for rec in &sample.first {
        hurst1.push(estimate_hurst_upper_band(&rec.y, PLUGIN_BAND_EDGE)?);
        // a noiseless kernel record has nothing to estimate
        hurst2.push(if delta == 0.0 {
            HurstEstimate {
                h_hat: 0.5,
                stderr: 0.0,
                bandwidth: 0,
                slope: 0.0,
            }
        } else {
            estimate_hurst_upper_band(&rec.g_obs, PLUGIN_BAND_EDGE)?
        });
    }
    let alpha1_hat: Vec<f64> = hurst1.iter().map(HurstEstimate::alpha_hat).collect();
    let alpha2_hat: Vec<f64> = hurst2.iter().map(HurstEstimate::alpha_hat).collect();
    let est = estimate_with_alphas(&sample.second, &alpha1_hat, &alpha2_hat, eps, delta, config)?;

    let (plugin_risk, true_alpha_risk) = match truth {
        Some(t) => {
            let oracle =
                estimate_with_alphas(&sample.second, &t.alpha1, &t.alpha2, eps, delta, config)?;
            (
                Some(est.signal.distance_sq(&t.signal)?),
                Some(oracle.signal.distance_sq(&t.signal)?),
            )
        }
        None => (None, None),
    };
    Ok(PluginResult {
        hurst1,
        hurst2,
        alpha1_hat,
        alpha2_hat,
        estimate: est,
        plugin_risk,
        true_alpha_risk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgn::{sample_fgn, FgnParams};

    #[test]
    fn rejects_short_and_constant() {
        assert!(matches!(
            estimate_hurst(&[1.0; 100]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            estimate_hurst(&[3.5; 512]),
            Err(Error::EstimationFailure(_))
        ));
    }

    #[test]
    fn recovers_hurst() {
        for (h, seed) in [(0.5, 1), (0.8, 2)] {
            let x = sample_fgn(&FgnParams::new(h, 1 << 14, seed).unwrap()).unwrap();
            let est = estimate_hurst(&x).unwrap();
            assert!((est.h_hat - h).abs() < 0.1, "H={h} got {}", est.h_hat);
            assert!(est.bandwidth >= 8);
            assert!(est.stderr > 0.0 && est.stderr < 0.1);
        }
    }

    #[test]
    fn differenced_estimate_targets_the_same_exponent() {
        let x = sample_fgn(&FgnParams::new(0.75, 1 << 14, 3).unwrap()).unwrap();
        let a = estimate_hurst(&x).unwrap().h_hat;
        let b = estimate_hurst_differenced(&x).unwrap().h_hat;
        assert!((a - b).abs() < 0.05, "{a} vs {b}");
    }

    #[test]
    fn affine_invariance() {
        let x = sample_fgn(&FgnParams::new(0.7, 4096, 4).unwrap()).unwrap();
        let base = estimate_hurst(&x).unwrap().h_hat;
        let y: Vec<f64> = x.iter().map(|v| 3.7 * v - 12.0).collect();
        assert!((estimate_hurst(&y).unwrap().h_hat - base).abs() < 1e-12);
    }

    #[test]
    fn alpha_is_clamped_consistently() {
        for h in [0.3, 0.5, 0.72, 0.999, 1.4] {
            let e = HurstEstimate {
                h_hat: h,
                stderr: 0.0,
                bandwidth: 8,
                slope: 0.0,
            };
            let a = e.alpha_hat();
            assert!(a > 0.0 && a <= 1.0);
            assert_eq!(a, 2.0 - 2.0 * e.h_clamped());
        }
    }

    #[test]
    fn half_mismatch_is_rejected() {
        let rec = RawRecord {
            y: vec![0.0; 256],
            g_obs: vec![0.0; 256],
        };
        let s = SplitSample {
            first: vec![rec.clone(), rec.clone()],
            second: vec![rec],
        };
        assert!(matches!(
            plugin_workflow(&s, 0.1, 0.1, &EstimatorConfig::default(), None),
            Err(Error::InvalidInput(_))
        ));
        let odd = RawRecord {
            y: vec![0.0; 5],
            g_obs: vec![0.0; 5],
        };
        assert!(SplitSample::from_streams(vec![odd]).is_err());
    }

    #[test]
    fn white_noise_shape_is_flat() {
        // (1 − cos λ) Σ (λ + 2πk)^{−2} = (1 − cos λ) / (4 sin²(λ/2)) = ½
        for l in [0.01, 0.7, 2.0, 3.1] {
            assert!((fgn_spectral_shape(0.5, l) - 0.5).abs() < 1e-4);
        }
        assert!(fgn_spectral_shape(0.8, 0.05) > fgn_spectral_shape(0.8, 3.0));
    }

    #[test]
    fn shape_table_matches_direct_shape() {
        let lambdas = [0.3, 1.1, 2.5, 3.0];
        let table = ShapeTable::new(&lambdas);
        for h in [0.1, 0.5, 0.9] {
            for (i, &l) in lambdas.iter().enumerate() {
                let direct = fgn_spectral_shape(h, l).ln();
                assert!((table.ln_shape(h, i) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn upper_band_fit_recovers_hurst() {
        for h in [0.55, 0.8] {
            let x = sample_fgn(&FgnParams::new(h, 4096, 17).unwrap()).unwrap();
            let e = estimate_hurst_upper_band(&x, PLUGIN_BAND_EDGE).unwrap();
            assert!((e.h_hat - h).abs() < 0.1, "{h}: {}", e.h_hat);
            assert!(e.stderr > 0.0 && e.stderr < 0.1);
            assert_eq!(e.slope, 1.0 - 2.0 * e.h_hat);
        }
    }

    #[test]
    fn upper_band_ignores_a_smooth_trend() {
        let x = sample_fgn(&FgnParams::new(0.7, 4096, 4).unwrap()).unwrap();
        let trended: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| v + 50.0 * (std::f64::consts::TAU * i as f64 / 4096.0).sin())
            .collect();
        let a = estimate_hurst_upper_band(&x, PLUGIN_BAND_EDGE).unwrap().h_hat;
        let b = estimate_hurst_upper_band(&trended, PLUGIN_BAND_EDGE).unwrap().h_hat;
        assert!((a - b).abs() < 1e-6);
        // the low-frequency regression is pulled by the same trend
        let gph_shift = estimate_hurst(&trended).unwrap().h_hat - estimate_hurst(&x).unwrap().h_hat;
        assert!(gph_shift > 0.02, "{gph_shift}");
    }

    #[test]
    fn upper_band_rejects_bad_edges() {
        let x = sample_fgn(&FgnParams::new(0.7, 512, 4).unwrap()).unwrap();
        assert!(estimate_hurst_upper_band(&x, 1.0).is_err());
        assert!(estimate_hurst_upper_band(&x, -0.1).is_err());
        assert!(estimate_hurst_upper_band(&x, 0.99).is_err());
    }
}
