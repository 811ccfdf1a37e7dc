//! Exact fractional Gaussian noise by circulant embedding (Davies–Harte).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{fft_forward, fft_inverse};

/// Relative slack allowed on negative circulant eigenvalues before synthesis
/// is refused. Anything within the slack is rounding noise and set to zero.
const EIGEN_TOL: f64 = 1e-10;

/// `γ(h) = ½(|h+1|^{2H} − 2|h|^{2H} + |h−1|^{2H})`.
pub fn autocovariance(hurst: f64, lag: usize) -> f64 {
    let h = lag as f64;
    let e = 2.0 * hurst;
    0.5 * ((h + 1.0).powf(e) - 2.0 * h.powf(e) + (h - 1.0).abs().powf(e))
}

/// Factor that turns a unit-spacing fGn path on `n` points into samples
/// whose Fourier coefficients have the scaling of the continuous-time
/// process: `n^{1−H}`.
pub fn continuum_scale(n: usize, hurst: f64) -> f64 {
    (n as f64).powf(1.0 - hurst)
}

pub fn hurst_from_alpha(alpha: f64) -> f64 {
    1.0 - alpha / 2.0
}

pub fn alpha_from_hurst(hurst: f64) -> f64 {
    2.0 - 2.0 * hurst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgnParams {
    pub hurst: f64,
    pub n: usize,
    pub seed: u64,
}

impl FgnParams {
    pub fn new(hurst: f64, n: usize, seed: u64) -> Result<Self> {
        let p = Self { hurst, n, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn from_alpha(alpha: f64, n: usize, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Self::new(hurst_from_alpha(alpha), n, seed)
    }

    pub fn alpha(&self) -> f64 {
        alpha_from_hurst(self.hurst)
    }

    fn validate(&self) -> Result<()> {
        check_hurst(self.hurst)?;
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(Error::invalid(format!(
                "path length must be a power of two, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

fn check_hurst(hurst: f64) -> Result<()> {
    if !(0.5..1.0).contains(&hurst) {
        return Err(Error::invalid(format!(
            "Hurst parameter must lie in [0.5, 1), got {hurst}"
        )));
    }
    Ok(())
}

/// Precomputed circulant square roots for one `(H, n)` pair. Holds no RNG
/// state; callers bring their own generator.
#[derive(Debug, Clone)]
pub struct FgnGenerator {
    hurst: f64,
    n: usize,
    roots: Vec<f64>,
}

impl FgnGenerator {
    pub fn new(hurst: f64, n: usize) -> Result<Self> {
        check_hurst(hurst)?;
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::invalid(format!("path length {n} is not a power of two")));
        }
        let size = 2 * n;
        let mut row: Vec<Complex64> = (0..size)
            .map(|i| {
                let lag = if i <= n { i } else { size - i };
                Complex64::new(autocovariance(hurst, lag), 0.0)
            })
            .collect();
        fft_forward(size).process(&mut row);
        let largest = row.iter().map(|z| z.re).fold(0.0_f64, f64::max);
        let smallest = row.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        if smallest < -EIGEN_TOL * largest {
            return Err(Error::SynthesisFailure {
                min_eigenvalue: smallest,
            });
        }
        let roots = row
            .iter()
            .map(|z| (z.re.max(0.0) / size as f64).sqrt())
            .collect();
        Ok(Self { hurst, n, roots })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// One stationary path with unit variance and fGn autocovariance.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let size = 2 * self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        let z0: f64 = rng.sample(StandardNormal);
        let zn: f64 = rng.sample(StandardNormal);
        buf[0] = Complex64::new(self.roots[0] * z0, 0.0);
        buf[self.n] = Complex64::new(self.roots[self.n] * zn, 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for k in 1..self.n {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let w = Complex64::new(a * s, b * s);
            buf[k] = w * self.roots[k];
            buf[size - k] = w.conj() * self.roots[size - k];
        }
        fft_inverse(size).process(&mut buf);
        buf[..self.n].iter().map(|z| z.re).collect()
    }
}

/// Seeded one-shot sampling.
pub fn sample_fgn(params: &FgnParams) -> Result<Vec<f64>> {
    params.validate()?;
    let gen = FgnGenerator::new(params.hurst, params.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    Ok(gen.sample(&mut rng))
}

/// Monte Carlo covariance of calibrated Fourier coefficients of fGn paths.
#[derive(Debug, Clone, Serialize)]
pub struct FourierCovReport {
    pub hurst: f64,
    pub n: usize,
    pub reps: usize,
    pub frequencies: Vec<i64>,
    /// Empirical `E|Z̃(m)|²` per frequency.
    pub variances: Vec<f64>,
    /// `max |Ĉov(m, m')|² / (2|mm'|^{1−2H})` over all frequency pairs.
    pub max_ratio: f64,
    /// Least-squares slope of `log Var(Z̃(m))` against `log m`.
    pub variance_slope: f64,
    pub expected_slope: f64,
    /// Set when `reps` is too small for the numbers to mean much.
    pub wide_error_bars: bool,
}

/// Estimates `Cov(Z̃(m), Z̃(m'))` for `m, m' ∈ {1, …, max_freq}` where
/// `Z̃ = n^{1−H} · forward(path)`, and compares it to `2|mm'|^{1−2H}`.
pub fn noise_fourier_diagnostic(
    params: &FgnParams,
    reps: usize,
    max_freq: usize,
) -> Result<FourierCovReport> {
    params.validate()?;
    if reps == 0 {
        return Err(Error::invalid("reps must be positive"));
    }
    let n = params.n;
    let max_freq = max_freq.clamp(1, n / 2 - 1);
    let gen = FgnGenerator::new(params.hurst, n)?;
    let scale = continuum_scale(n, params.hurst) / n as f64;

    let coeffs: Vec<Vec<Complex64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(r as u64));
            let path = gen.sample(&mut rng);
            let mut buf: Vec<Complex64> =
                path.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            fft_forward(n).process(&mut buf);
            buf[1..=max_freq].iter().map(|z| z * scale).collect()
        })
        .collect();

    let mut cov = vec![Complex64::new(0.0, 0.0); max_freq * max_freq];
    for c in &coeffs {
        for a in 0..max_freq {
            for b in 0..max_freq {
                cov[a * max_freq + b] += c[a] * c[b].conj();
            }
        }
    }
    let inv = 1.0 / reps as f64;
    let exponent = 1.0 - 2.0 * params.hurst;
    let mut max_ratio: f64 = 0.0;
    let mut variances = Vec::with_capacity(max_freq);
    for a in 0..max_freq {
        for b in 0..max_freq {
            let c = cov[a * max_freq + b] * inv;
            let bound = 2.0 * (((a + 1) * (b + 1)) as f64).powf(exponent);
            max_ratio = max_ratio.max(c.norm_sqr() / bound);
            if a == b {
                variances.push(c.re);
            }
        }
    }
    let frequencies: Vec<i64> = (1..=max_freq as i64).collect();
    let xs: Vec<f64> = frequencies.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = variances.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let variance_slope = crate::stats::ols(&xs, &ys).map_or(f64::NAN, |f| f.slope);
    Ok(FourierCovReport {
        hurst: params.hurst,
        n,
        reps,
        frequencies,
        variances,
        max_ratio,
        variance_slope,
        expected_slope: exponent,
        wide_error_bars: reps < 1000,
    })
}

/// Sample autocovariance at one lag against the exact value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagCheck {
    pub lag: usize,
    /// Mean over paths of the within-path lagged product average.
    pub empirical: f64,
    pub exact: f64,
    /// Standard error of `empirical` across paths.
    pub stderr: f64,
}

impl LagCheck {
    /// Deviation in standard errors.
    pub fn z(&self) -> f64 {
        (self.empirical - self.exact) / self.stderr
    }
}

/// Draws `reps` independent paths (seeds `seed + r`) and compares the
/// empirical autocovariance at lags `0..=max_lag` with `γ(h)`.
pub fn autocovariance_check(
    params: &FgnParams,
    reps: usize,
    max_lag: usize,
) -> Result<Vec<LagCheck>> {
    params.validate()?;
    if reps < 2 {
        return Err(Error::invalid("at least two paths are required"));
    }
    if max_lag >= params.n {
        return Err(Error::invalid(format!(
            "lag {max_lag} does not fit paths of length {}",
            params.n
        )));
    }
    let gen = FgnGenerator::new(params.hurst, params.n)?;
    let per_path: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let x = gen.sample(&mut ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(r as u64)));
            (0..=max_lag)
                .map(|h| {
                    let m = x.len() - h;
                    (0..m).map(|t| x[t] * x[t + h]).sum::<f64>() / m as f64
                })
                .collect()
        })
        .collect();
    Ok((0..=max_lag)
        .map(|h| {
            let vals: Vec<f64> = per_path.iter().map(|v| v[h]).collect();
            let (empirical, stderr) = crate::stats::mean_se(&vals);
            LagCheck {
                lag: h,
                empirical,
                exact: autocovariance(params.hurst, h),
                stderr,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_paths(hurst: f64, n: usize, reps: usize, seed: u64) -> Vec<Vec<f64>> {
        let gen = FgnGenerator::new(hurst, n).unwrap();
        (0..reps)
            .map(|r| gen.sample(&mut ChaCha8Rng::seed_from_u64(seed + r as u64)))
            .collect()
    }

    #[test]
    fn closed_form_lag_one() {
        assert!((autocovariance(0.8, 1) - 0.5 * (2f64.powf(1.6) - 2.0)).abs() < 1e-15);
        assert!((autocovariance(0.8, 1) - 0.515_716_566_510_398).abs() < 1e-12);
        assert_eq!(autocovariance(0.5, 3), 0.0);
        assert_eq!(autocovariance(0.7, 0), 1.0);
    }

    #[test]
    fn alpha_hurst_relation() {
        let p = FgnParams::from_alpha(0.5, 64, 0).unwrap();
        assert_eq!(p.hurst, 0.75);
        assert_eq!(p.alpha(), 0.5);
        assert!(FgnParams::new(0.4, 64, 0).is_err());
        assert!(FgnParams::new(1.0, 64, 0).is_err());
        assert!(FgnParams::new(0.7, 100, 0).is_err());
    }

    #[test]
    fn white_noise_case_is_uncorrelated() {
        let n = 4096;
        let x = sample_fgn(&FgnParams::new(0.5, n, 9).unwrap()).unwrap();
        let mean = x.iter().sum::<f64>() / n as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let lag1 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>()
            / (n as f64 * var);
        assert!(lag1.abs() < 3.0 / (n as f64).sqrt(), "lag1={lag1}");
    }

    #[test]
    fn lag_one_matches_closed_form_at_h08() {
        let reps = 10_000;
        let paths = sample_paths(0.8, 64, reps, 100);
        let prods: Vec<f64> = paths
            .iter()
            .map(|p| p.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / 63.0)
            .collect();
        let mean = prods.iter().sum::<f64>() / reps as f64;
        let sd = (prods.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64)
            .sqrt();
        let se = sd / (reps as f64).sqrt();
        assert!((mean - 0.5157).abs() < 3.0 * se, "mean={mean} se={se}");
    }

    #[test]
    fn deterministic_given_seed() {
        let p = FgnParams::new(0.7, 256, 42).unwrap();
        assert_eq!(sample_fgn(&p).unwrap(), sample_fgn(&p).unwrap());
        let q = FgnParams { seed: 43, ..p };
        assert_ne!(sample_fgn(&p).unwrap(), sample_fgn(&q).unwrap());
    }

    #[test]
    fn mean_variance_inflates_with_memory() {
        let n = 1 << 12;
        let var_of_mean = |h: f64| {
            let means: Vec<f64> = sample_paths(h, n, 1000, 7)
                .iter()
                .map(|p| p.iter().sum::<f64>() / n as f64)
                .collect();
            means.iter().map(|m| m * m).sum::<f64>() / means.len() as f64
        };
        assert!(var_of_mean(0.9) > var_of_mean(0.5));
    }

    #[test]
    fn scaling_a_path_scales_its_coefficients() {
        use crate::fourier::{forward, PeriodicSignal};
        let x = sample_fgn(&FgnParams::new(0.75, 128, 1).unwrap()).unwrap();
        let c = 0.1f64.powf(0.5);
        let a = forward(&PeriodicSignal::new(x.clone()).unwrap());
        let b = forward(&PeriodicSignal::new(x.iter().map(|v| v * c).collect()).unwrap());
        for m in a.frequencies() {
            assert!((a.get(m) * c - b.get(m)).norm() < 1e-15);
        }
    }

    #[test]
    fn fourier_diagnostic_white_noise() {
        let r = noise_fourier_diagnostic(&FgnParams::new(0.5, 256, 3).unwrap(), 2000, 16)
            .unwrap();
        // Var = 1, so the diagonal ratio is 1/2 up to sampling error
        assert!(r.max_ratio <= 1.0 + 0.2, "ratio={}", r.max_ratio);
        assert!(!r.wide_error_bars);
    }

    #[test]
    fn fourier_diagnostic_lrd_slope() {
        let r = noise_fourier_diagnostic(&FgnParams::new(0.75, 1024, 5).unwrap(), 2000, 32)
            .unwrap();
        assert!((r.variance_slope + 0.5).abs() <= 0.15, "slope={}", r.variance_slope);
        assert!(r.max_ratio <= 1.2);
    }

    #[test]
    fn fourier_diagnostic_few_reps_flags() {
        let r = noise_fourier_diagnostic(&FgnParams::new(0.6, 64, 3).unwrap(), 10, 4).unwrap();
        assert!(r.wide_error_bars);
        assert_eq!(r.variances.len(), 4);
    }

    #[test]
    fn autocovariance_check_white_noise() {
        let rows = autocovariance_check(&FgnParams::new(0.5, 32, 5).unwrap(), 400, 3).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].exact, 1.0);
        assert!(rows.iter().all(|r| r.z().abs() < 5.0));
        assert!(autocovariance_check(&FgnParams::new(0.5, 32, 5).unwrap(), 1, 3).is_err());
        assert!(autocovariance_check(&FgnParams::new(0.5, 32, 5).unwrap(), 10, 32).is_err());
    }
}
