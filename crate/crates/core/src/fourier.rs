//! Sampled 1-periodic functions on `[0, 1)` and their Fourier coefficients.
//!
//! Coefficients use the basis `e_m(t) = exp(2πimt)` and the forward
//! normalization `1/n`, so the discrete coefficient at `m` approximates
//! `∫₀¹ f(t) exp(−2πimt) dt`. Frequencies live on the symmetric grid
//! `m ∈ {−n/2, …, n/2 − 1}`; anything outside reads as zero.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_forward(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

pub(crate) fn fft_inverse(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Relative tolerance on Hermitian asymmetry before `inverse` refuses to
/// return a real signal.
pub const HERMITIAN_TOL: f64 = 1e-9;

fn check_grid(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::invalid(format!(
            "grid size must be a power of two >= 2, got {n}"
        )));
    }
    Ok(())
}

/// Real samples `f(i/n)`, `i = 0..n`, of a 1-periodic function.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSignal {
    samples: Vec<f64>,
}

impl PeriodicSignal {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        check_grid(samples.len())?;
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Self { samples })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    /// Samples `f(i/n)` of a closure.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..n).map(|i| f(i as f64 / n as f64)).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Discrete L²(U) norm squared: the mean of squared samples.
    pub fn norm_sq(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.len() as f64
    }

    /// Discrete `‖self − other‖²` on the grid.
    pub fn distance_sq(&self, other: &PeriodicSignal) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::invalid("grid size mismatch"));
        }
        let s: f64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(s / self.len() as f64)
    }
}

/// Complex Fourier coefficients on the symmetric frequency grid of size `n`.
///
/// Stored internally in FFT order; index with signed frequencies through
/// [`FourierSeries::get`] / [`FourierSeries::set`].
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    coeffs: Vec<Complex64>,
}

impl FourierSeries {
    pub fn zeros(n: usize) -> Result<Self> {
        check_grid(n)?;
        Ok(Self {
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    /// Wraps coefficients given in FFT order (`m = 0, 1, …, n/2−1, −n/2, …, −1`).
    pub fn from_fft_order(coeffs: Vec<Complex64>) -> Result<Self> {
        check_grid(coeffs.len())?;
        Ok(Self { coeffs })
    }

    /// Builds a series by evaluating `f(m)` for every grid frequency.
    pub fn from_fn(n: usize, f: impl Fn(i64) -> Complex64) -> Result<Self> {
        let mut s = Self::zeros(n)?;
        for m in s.frequencies() {
            s.set(m, f(m));
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn fft_order(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn min_freq(&self) -> i64 {
        -(self.n() as i64 / 2)
    }

    pub fn max_freq(&self) -> i64 {
        self.n() as i64 / 2 - 1
    }

    /// Grid frequencies in increasing order.
    pub fn frequencies(&self) -> std::ops::RangeInclusive<i64> {
        self.min_freq()..=self.max_freq()
    }

    fn slot(&self, m: i64) -> Option<usize> {
        if m < self.min_freq() || m > self.max_freq() {
            return None;
        }
        Some(m.rem_euclid(self.n() as i64) as usize)
    }

    pub fn get(&self, m: i64) -> Complex64 {
        self.slot(m)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// Sets the coefficient at `m`. Panics if `m` is off the grid.
    pub fn set(&mut self, m: i64, value: Complex64) {
        let i = self
            .slot(m)
            .unwrap_or_else(|| panic!("frequency {m} outside grid of size {}", self.n()));
        self.coeffs[i] = value;
    }

    /// Σ_m |c(m)|², the squared L²(U) norm by Plancherel.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest `|c(−m) − conj(c(m))|` over the grid, with the unpaired
    /// Nyquist and zero frequencies required to be real.
    pub fn max_asymmetry(&self) -> f64 {
        let half = self.n() as i64 / 2;
        let mut worst = self.get(0).im.abs().max(self.get(-half).im.abs());
        for m in 1..half {
            worst = worst.max((self.get(-m) - self.get(m).conj()).norm());
        }
        worst
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|z| z * c).collect(),
        }
    }

    /// Pointwise product of coefficients (periodic convolution in time).
    pub fn product(&self, other: &FourierSeries) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::invalid("grid size mismatch"));
        }
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn add(&self, other: &FourierSeries) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::invalid("grid size mismatch"));
        }
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

/// `c(m) = (1/n) Σ_i x_i exp(−2πimi/n)`.
pub fn forward(signal: &PeriodicSignal) -> FourierSeries {
    let n = signal.len();
    let mut buf: Vec<Complex64> = signal
        .samples()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    FourierSeries { coeffs: buf }
}

/// Complex-valued synthesis `Σ_m c(m) exp(2πimi/n)` at every grid point.
pub fn inverse_complex(series: &FourierSeries) -> Vec<Complex64> {
    let mut buf = series.coeffs.clone();
    fft_inverse(series.n()).process(&mut buf);
    buf
}

/// Real synthesis. Fails if the series is not Hermitian up to
/// [`HERMITIAN_TOL`] relative to its largest coefficient.
pub fn inverse(series: &FourierSeries) -> Result<PeriodicSignal> {
    let scale = series
        .coeffs
        .iter()
        .map(|c| c.norm())
        .fold(0.0_f64, f64::max);
    let asym = series.max_asymmetry();
    if asym > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SymmetryViolation {
            max_asymmetry: asym,
        });
    }
    let samples = inverse_complex(series).into_iter().map(|z| z.re).collect();
    PeriodicSignal::new(samples)
}

/// `(f ⊛ g)(t) = ∫₀¹ f(s) g(t − s) ds` on the grid, via the convolution theorem.
pub fn circular_convolve(f: &PeriodicSignal, g: &PeriodicSignal) -> Result<PeriodicSignal> {
    if f.len() != g.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            f.len(),
            g.len()
        )));
    }
    inverse(&forward(f).product(&forward(g))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_signal(n: usize, seed: u64) -> PeriodicSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PeriodicSignal::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PeriodicSignal::new(vec![1.0; 6]).is_err());
        assert!(PeriodicSignal::new(vec![1.0; 1]).is_err());
        assert!(PeriodicSignal::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn constant_has_only_dc() {
        let s = forward(&PeriodicSignal::new(vec![1.0; 8]).unwrap());
        assert!((s.get(0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for m in s.frequencies().filter(|&m| m != 0) {
            assert!(s.get(m).norm() < 1e-15);
        }
    }

    #[test]
    fn cosine_splits_into_two_modes() {
        let sig = PeriodicSignal::from_fn(8, |t| (2.0 * PI * t).cos()).unwrap();
        let s = forward(&sig);
        for m in s.frequencies() {
            let want = if m.abs() == 1 { 0.5 } else { 0.0 };
            assert!((s.get(m) - Complex64::new(want, 0.0)).norm() < 1e-15, "m={m}");
        }
    }

    #[test]
    fn round_trip() {
        for (n, seed) in [(64, 1), (4096, 2)] {
            let sig = random_signal(n, seed);
            let back = inverse(&forward(&sig)).unwrap();
            assert!(rel_err(back.samples(), sig.samples()) <= 1e-12);
        }
    }

    #[test]
    fn dc_only_inverts_to_constant() {
        let mut s = FourierSeries::zeros(8).unwrap();
        s.set(0, Complex64::new(1.0, 0.0));
        let sig = inverse(&s).unwrap();
        assert!(sig.samples().iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn unpaired_mode_is_rejected() {
        let mut s = FourierSeries::zeros(8).unwrap();
        s.set(2, Complex64::new(1.0, 0.0));
        match inverse(&s) {
            Err(Error::SymmetryViolation { max_asymmetry }) => {
                assert!((max_asymmetry - 1.0).abs() < 1e-15)
            }
            other => panic!("expected symmetry violation, got {other:?}"),
        }
    }

    #[test]
    fn out_of_grid_reads_zero() {
        let s = forward(&random_signal(16, 3));
        assert_eq!(s.get(8), Complex64::new(0.0, 0.0));
        assert_eq!(s.get(-9), Complex64::new(0.0, 0.0));
        assert_ne!(s.get(-8), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn identity_kernel() {
        let n = 32;
        let mut delta = vec![0.0; n];
        delta[0] = n as f64;
        let g = PeriodicSignal::new(delta).unwrap();
        let f = random_signal(n, 4);
        let out = circular_convolve(&f, &g).unwrap();
        assert!(rel_err(out.samples(), f.samples()) < 1e-13);
    }

    #[test]
    fn single_mode_kernel_halves_cosine() {
        let n = 16;
        let f = PeriodicSignal::from_fn(n, |t| (2.0 * PI * t).cos()).unwrap();
        let g = PeriodicSignal::from_fn(n, |t| (2.0 * PI * t).cos()).unwrap();
        let out = circular_convolve(&f, &g).unwrap();
        let want = PeriodicSignal::from_fn(n, |t| 0.5 * (2.0 * PI * t).cos()).unwrap();
        assert!(rel_err(out.samples(), want.samples()) < 1e-13);
    }

    #[test]
    fn convolution_matches_riemann_sum() {
        let n = 256;
        let f = random_signal(n, 5);
        let g = random_signal(n, 6);
        let out = circular_convolve(&f, &g).unwrap();
        // (f ⊛ g)(t_i) = (1/n) Σ_s f(t_s) g(t_{i−s})
        let brute: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|s| f.samples()[s] * g.samples()[(i + n - s) % n])
                    .sum::<f64>()
                    / n as f64
            })
            .collect();
        assert!(rel_err(out.samples(), &brute) <= 1e-10);
    }

    #[test]
    fn length_mismatch() {
        assert!(circular_convolve(&random_signal(8, 1), &random_signal(16, 1)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn signal(n: usize) -> impl Strategy<Value = PeriodicSignal> {
            proptest::collection::vec(-10.0..10.0f64, n)
                .prop_map(|v| PeriodicSignal::new(v).unwrap())
        }

        proptest! {
            #[test]
            fn plancherel(sig in signal(128)) {
                let s = forward(&sig);
                let lhs = s.energy();
                let rhs = sig.norm_sq();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
                prop_assert!(s.max_asymmetry() <= 1e-12 * lhs.sqrt().max(1.0));
            }

            #[test]
            fn convolution_theorem_and_commutativity(f in signal(64), g in signal(64), h in signal(64)) {
                let fg = circular_convolve(&f, &g).unwrap();
                let gf = circular_convolve(&g, &f).unwrap();
                let scale = fg.samples().iter().map(|x| x.abs()).fold(1e-12, f64::max);
                for (a, b) in fg.samples().iter().zip(gf.samples()) {
                    prop_assert!((a - b).abs() <= 1e-12 * scale);
                }
                let lhs = forward(&fg);
                let rhs = forward(&f).product(&forward(&g)).unwrap();
                let cs = lhs.fft_order().iter().map(|c| c.norm()).fold(1e-12, f64::max);
                for m in lhs.frequencies() {
                    prop_assert!((lhs.get(m) - rhs.get(m)).norm() <= 1e-12 * cs);
                }
                // bilinearity in the second argument
                let sum = PeriodicSignal::new(
                    g.samples().iter().zip(h.samples()).map(|(a, b)| 2.0 * a - b).collect()
                ).unwrap();
                let left = circular_convolve(&f, &sum).unwrap();
                let fh = circular_convolve(&f, &h).unwrap();
                let s2 = left.samples().iter().map(|x| x.abs()).fold(scale, f64::max);
                for i in 0..64 {
                    let want = 2.0 * fg.samples()[i] - fh.samples()[i];
                    prop_assert!((left.samples()[i] - want).abs() <= 1e-11 * s2);
                }
            }
        }
    }
}
