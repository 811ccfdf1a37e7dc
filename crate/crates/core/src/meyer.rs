//! Periodized Meyer wavelets, realized entirely in the Fourier domain.
//!
//! The basis is `{φ_{m0,k}}_{k<2^m0} ∪ {ψ_{j,k}}_{j≥m0, k<2^j}`. The scaling
//! block is addressed as level `m0 − 1`, but it holds the `2^m0` scaling
//! functions at resolution `m0` so that levels `m0−1 ..= J−1` span exactly
//! `2^J` coefficients.
//!
//! With `e_m(t) = exp(2πimt)`, the Fourier coefficient of `ψ_{j,k}` is
//! `2^{−j/2} ψ̂(2πm/2^j) exp(−2πimk/2^j)`, nonzero only for
//! `2^j/3 < |m| < 2^{j+2}/3`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{self, FourierSeries, PeriodicSignal};

/// Degree-3 Meyer auxiliary polynomial `x⁴(35 − 84x + 70x² − 20x³)` on `[0, 1]`.
pub fn auxiliary(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x)
    }
}

/// `|φ̂|` at `x = |ω|/2π`.
fn scaling_amplitude(x: f64) -> f64 {
    if x <= 1.0 / 3.0 {
        1.0
    } else if x < 2.0 / 3.0 {
        (FRAC_PI_2 * auxiliary(3.0 * x - 1.0)).cos()
    } else {
        0.0
    }
}

/// `|ψ̂|` at `x = |ω|/2π`.
fn wavelet_amplitude(x: f64) -> f64 {
    if x <= 1.0 / 3.0 || x >= 4.0 / 3.0 {
        0.0
    } else if x <= 2.0 / 3.0 {
        (FRAC_PI_2 * auxiliary(3.0 * x - 1.0)).sin()
    } else {
        (FRAC_PI_2 * auxiliary(1.5 * x - 1.0)).cos()
    }
}

/// Continuous Meyer scaling function transform `φ̂(ω)`.
pub fn phi_hat(omega: f64) -> f64 {
    scaling_amplitude(omega.abs() / std::f64::consts::TAU)
}

/// Continuous Meyer mother wavelet transform `ψ̂(ω) = e^{iω/2} b(ω)`.
pub fn mother_psi_hat(omega: f64) -> Complex64 {
    let b = wavelet_amplitude(omega.abs() / std::f64::consts::TAU);
    Complex64::from_polar(b, omega / 2.0)
}

/// Symmetric integer frequency band `lo ≤ |m| ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Band {
    pub lo: i64,
    pub hi: i64,
}

impl Band {
    pub fn contains(&self, m: i64) -> bool {
        (self.lo..=self.hi).contains(&m.abs())
    }

    /// Number of integer frequencies in the band, counting both signs.
    pub fn len(&self) -> usize {
        let width = (self.hi - self.lo + 1) as usize;
        if self.lo == 0 {
            2 * width - 1
        } else {
            2 * width
        }
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    /// Frequencies in increasing order.
    pub fn frequencies(&self) -> impl Iterator<Item = i64> + '_ {
        (-self.hi..=self.hi).filter(move |m| m.abs() >= self.lo)
    }
}

/// Largest level `j` whose band fits strictly inside the grid: `2^{j+2}/3 < n/2`.
pub fn max_level_for(n: usize) -> u32 {
    let mut j = 0u32;
    while (1u128 << (j + 4)) < 3 * n as u128 {
        j += 1;
    }
    j
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeyerBasis {
    n: usize,
    m0: u32,
}

impl MeyerBasis {
    pub fn new(n: usize, m0: u32) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::invalid(format!("grid size {n} is not a power of two")));
        }
        if m0 < 2 {
            return Err(Error::invalid(format!("m0 must be at least 2, got {m0}")));
        }
        let max_level = max_level_for(n);
        // the scaling band reaches 2^{m0+1}/3, the same edge as level m0 − 1
        if m0 > max_level + 1 {
            return Err(Error::LevelOverflow {
                level: m0,
                n,
                max_level,
            });
        }
        Ok(Self { n, m0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m0(&self) -> u32 {
        self.m0
    }

    pub fn scaling_level(&self) -> u32 {
        self.m0 - 1
    }

    pub fn max_level(&self) -> u32 {
        max_level_for(self.n)
    }

    /// Number of translations stored at level `j` (`2^m0` for the scaling block).
    pub fn slots(&self, j: u32) -> usize {
        1usize << self.resolution(j)
    }

    fn resolution(&self, j: u32) -> u32 {
        if j == self.scaling_level() {
            self.m0
        } else {
            j
        }
    }

    fn check_level(&self, j: u32) -> Result<()> {
        if j < self.scaling_level() {
            return Err(Error::invalid(format!(
                "level {j} is below the scaling level {}",
                self.scaling_level()
            )));
        }
        if j > self.max_level() {
            return Err(Error::LevelOverflow {
                level: j,
                n: self.n,
                max_level: self.max_level(),
            });
        }
        Ok(())
    }

    /// The band `W_j` of frequencies where level-`j` functions can be nonzero.
    pub fn support_set(&self, j: u32) -> Result<Band> {
        self.check_level(j)?;
        if j == self.scaling_level() {
            Ok(Band {
                lo: 0,
                hi: (1i64 << (self.m0 + 1)) / 3,
            })
        } else {
            Ok(Band {
                lo: ((1i64 << j) + 2) / 3,
                hi: (1i64 << (j + 2)) / 3,
            })
        }
    }

    /// `2^{−r/2}` times the continuous transform at `2πm/2^r`, without the
    /// translation phase.
    fn band_factor(&self, j: u32, m: i64) -> Complex64 {
        let r = self.resolution(j);
        let norm = (-(r as f64) / 2.0).exp2();
        let x = m.abs() as f64 / (1u64 << r) as f64;
        if j == self.scaling_level() {
            Complex64::new(norm * scaling_amplitude(x), 0.0)
        } else {
            let b = wavelet_amplitude(x);
            if b == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let phase = std::f64::consts::PI * m as f64 / (1u64 << r) as f64;
            Complex64::from_polar(norm * b, phase)
        }
    }

    /// Fourier coefficient `⟨ψ_{j,k}, e_m⟩` (scaling function when `j = m0 − 1`).
    pub fn psi_hat(&self, j: u32, k: usize, m: i64) -> Result<Complex64> {
        self.check_level(j)?;
        if k >= self.slots(j) {
            return Err(Error::invalid(format!(
                "position {k} out of range at level {j}"
            )));
        }
        let half = self.n as i64 / 2;
        if m < -half || m >= half {
            return Err(Error::invalid(format!("frequency {m} outside grid")));
        }
        let r = self.resolution(j);
        let turn = -std::f64::consts::TAU * (m * k as i64).rem_euclid(1i64 << r) as f64
            / (1u64 << r) as f64;
        Ok(self.band_factor(j, m) * Complex64::from_polar(1.0, turn))
    }

    /// Fourier series of a single basis function.
    pub fn basis_series(&self, j: u32, k: usize) -> Result<FourierSeries> {
        let band = self.support_set(j)?;
        let mut s = FourierSeries::zeros(self.n)?;
        for m in band.frequencies() {
            s.set(m, self.psi_hat(j, k, m)?);
        }
        Ok(s)
    }

    fn check_top(&self, top: u32) -> Result<()> {
        if top < self.m0 {
            return Err(Error::invalid(format!(
                "top level {top} below m0 = {}",
                self.m0
            )));
        }
        if top > self.max_level() + 1 {
            return Err(Error::LevelOverflow {
                level: top - 1,
                n: self.n,
                max_level: self.max_level(),
            });
        }
        Ok(())
    }

    fn levels(&self, top: u32) -> impl Iterator<Item = u32> {
        self.scaling_level()..top
    }

    /// Wavelet coefficients `⟨f, ψ_{j,k}⟩ = Σ_m f̃(m) conj(ψ_{j,k,m})` for
    /// levels `m0 − 1 ..= top − 1`.
    pub fn analyze(&self, series: &FourierSeries, top: u32) -> Result<WaveletCoeffs> {
        if series.n() != self.n {
            return Err(Error::invalid("series grid does not match the basis"));
        }
        self.check_top(top)?;
        let mut blocks = Vec::new();
        for j in self.levels(top) {
            let slots = self.slots(j);
            let mut folded = vec![Complex64::new(0.0, 0.0); slots];
            for m in self.support_set(j)?.frequencies() {
                let idx = m.rem_euclid(slots as i64) as usize;
                folded[idx] += series.get(m) * self.band_factor(j, m).conj();
            }
            // Σ_ρ B[ρ] e^{+2πiρk/N}
            fourier::fft_inverse(slots).process(&mut folded);
            blocks.push(folded);
        }
        Ok(WaveletCoeffs {
            m0: self.m0,
            top,
            blocks,
        })
    }

    /// `Σ_{j,k} β_{j,k} ψ_{j,k}` as a Fourier series.
    pub fn synthesize_series(&self, coeffs: &WaveletCoeffs) -> Result<FourierSeries> {
        if coeffs.m0 != self.m0 {
            return Err(Error::invalid("coefficient m0 does not match the basis"));
        }
        self.check_top(coeffs.top)?;
        coeffs.validate()?;
        let mut out = FourierSeries::zeros(self.n)?;
        for (j, block) in self.levels(coeffs.top).zip(&coeffs.blocks) {
            let slots = block.len();
            let mut spectrum = block.clone();
            fourier::fft_forward(slots).process(&mut spectrum);
            for m in self.support_set(j)?.frequencies() {
                let idx = m.rem_euclid(slots as i64) as usize;
                let v = out.get(m) + self.band_factor(j, m) * spectrum[idx];
                out.set(m, v);
            }
        }
        Ok(out)
    }

    /// Real reconstruction on the grid; fails if the coefficients do not
    /// describe a real function.
    pub fn synthesize(&self, coeffs: &WaveletCoeffs) -> Result<PeriodicSignal> {
        fourier::inverse(&self.synthesize_series(coeffs)?)
    }
}

/// Coefficients on the rectangle `j ∈ {m0−1, …, J−1}`, `k < slots(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoeffs {
    m0: u32,
    top: u32,
    blocks: Vec<Vec<Complex64>>,
}

impl WaveletCoeffs {
    pub fn zeros(m0: u32, top: u32) -> Result<Self> {
        if m0 < 2 || top < m0 {
            return Err(Error::invalid(format!("bad level range m0={m0}, J={top}")));
        }
        let mut blocks = vec![vec![Complex64::new(0.0, 0.0); 1 << m0]];
        for j in m0..top {
            blocks.push(vec![Complex64::new(0.0, 0.0); 1 << j]);
        }
        Ok(Self { m0, top, blocks })
    }

    fn validate(&self) -> Result<()> {
        let expected = (self.top - self.m0 + 1) as usize;
        if self.blocks.len() != expected {
            return Err(Error::invalid("malformed coefficient rectangle"));
        }
        for (i, block) in self.blocks.iter().enumerate() {
            let r = if i == 0 { self.m0 } else { self.m0 + i as u32 - 1 };
            if block.len() != 1 << r {
                return Err(Error::invalid(format!(
                    "block {i} has {} entries, expected {}",
                    block.len(),
                    1usize << r
                )));
            }
        }
        Ok(())
    }

    pub fn m0(&self) -> u32 {
        self.m0
    }

    /// Exclusive top level `J`.
    pub fn top(&self) -> u32 {
        self.top
    }

    pub fn levels(&self) -> std::ops::Range<u32> {
        self.m0 - 1..self.top
    }

    fn block_index(&self, j: u32) -> Option<usize> {
        if j + 1 < self.m0 || j >= self.top {
            None
        } else {
            Some((j + 1 - self.m0) as usize)
        }
    }

    pub fn level(&self, j: u32) -> Option<&[Complex64]> {
        self.block_index(j).map(|i| self.blocks[i].as_slice())
    }

    pub fn level_mut(&mut self, j: u32) -> Option<&mut [Complex64]> {
        self.block_index(j).map(move |i| self.blocks[i].as_mut_slice())
    }

    pub fn get(&self, j: u32, k: usize) -> Option<Complex64> {
        self.level(j).and_then(|b| b.get(k).copied())
    }

    pub fn set(&mut self, j: u32, k: usize, value: Complex64) -> Result<()> {
        let slot = self
            .level_mut(j)
            .and_then(|b| b.get_mut(k))
            .ok_or_else(|| Error::invalid(format!("({j}, {k}) outside the rectangle")))?;
        *slot = value;
        Ok(())
    }

    /// Total number of stored coefficients (`2^J`).
    pub fn len(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, usize, Complex64)> + '_ {
        self.levels()
            .zip(&self.blocks)
            .flat_map(|(j, b)| b.iter().enumerate().map(move |(k, &v)| (j, k, v)))
    }

    pub fn energy(&self) -> f64 {
        self.blocks.iter().flatten().map(|c| c.norm_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::forward;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn auxiliary_polynomial_identity() {
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((auxiliary(x) + auxiliary(1.0 - x) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn max_level() {
        assert_eq!(max_level_for(128), 5); // 2^7/3 = 42.7 < 64, 2^8/3 > 64
        assert_eq!(max_level_for(4096), 10);
        assert_eq!(max_level_for(8192), 11);
    }

    #[test]
    fn support_of_level_three() {
        let b = MeyerBasis::new(128, 2).unwrap();
        let band = b.support_set(3).unwrap();
        assert_eq!(band, Band { lo: 3, hi: 10 });
        assert_eq!(band.len(), 16);
        for m in -64..64 {
            let nonzero = b.psi_hat(3, 1, m).unwrap().norm() > 0.0;
            assert!(!nonzero || band.contains(m), "m={m}");
        }
    }

    #[test]
    fn scaling_band() {
        let b = MeyerBasis::new(128, 3).unwrap();
        assert_eq!(b.support_set(2).unwrap(), Band { lo: 0, hi: 5 });
        assert_eq!(b.slots(2), 8);
    }

    #[test]
    fn level_overflow_reports_limit() {
        let b = MeyerBasis::new(128, 2).unwrap();
        match b.support_set(6) {
            Err(Error::LevelOverflow { max_level, .. }) => assert_eq!(max_level, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn psi_hat_bounded_and_unit_norm() {
        let b = MeyerBasis::new(1024, 3).unwrap();
        for j in 2..=b.max_level() {
            for k in [0, 1, b.slots(j) - 1] {
                let mut sum = 0.0;
                for m in -512..512 {
                    let v = b.psi_hat(j, k, m).unwrap();
                    let bound = (-(j as f64) / 2.0).exp2();
                    assert!(v.norm() <= bound + 1e-15);
                    sum += v.norm_sqr();
                }
                assert!((sum - 1.0).abs() < 1e-10, "j={j} k={k} sum={sum}");
            }
        }
    }

    #[test]
    fn psi_hat_rejects_bad_indices() {
        let b = MeyerBasis::new(64, 2).unwrap();
        assert!(b.psi_hat(0, 0, 1).is_err());
        assert!(b.psi_hat(3, 8, 1).is_err());
        assert!(b.psi_hat(3, 0, 32).is_err());
    }

    #[test]
    fn analyzing_a_basis_function_gives_a_unit_vector() {
        let b = MeyerBasis::new(256, 3).unwrap();
        let s = b.basis_series(5, 7).unwrap();
        let c = b.analyze(&s, 6).unwrap();
        for (j, k, v) in c.iter() {
            let want = if (j, k) == (5, 7) { 1.0 } else { 0.0 };
            assert!((v - Complex64::new(want, 0.0)).norm() < 1e-10, "({j},{k}) {v}");
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let b = MeyerBasis::new(64, 2).unwrap();
        let c = b.analyze(&FourierSeries::zeros(64).unwrap(), 4).unwrap();
        assert_eq!(c.energy(), 0.0);
        let s = b.synthesize(&WaveletCoeffs::zeros(2, 4).unwrap()).unwrap();
        assert!(s.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn cardinality_is_two_to_the_top() {
        let c = WaveletCoeffs::zeros(3, 7).unwrap();
        assert_eq!(c.len(), 128);
        assert_eq!(c.levels(), 2..7);
    }

    #[test]
    fn malformed_rectangle_is_rejected() {
        let b = MeyerBasis::new(64, 2).unwrap();
        let mut c = WaveletCoeffs::zeros(2, 4).unwrap();
        c.blocks[1].pop();
        assert!(b.synthesize(&c).is_err());
    }

    #[test]
    fn synthesized_unit_matches_band_sum() {
        let n = 256;
        let b = MeyerBasis::new(n, 3).unwrap();
        let mut c = WaveletCoeffs::zeros(3, 5).unwrap();
        c.set(3, 0, Complex64::new(1.0, 0.0)).unwrap();
        let sig = b.synthesize(&c).unwrap();
        // direct evaluation: ψ(t) = Σ_{m∈W} ψ_{3,0,m} e^{2πimt}
        let band = b.support_set(3).unwrap();
        for i in 0..n {
            let t = i as f64 / n as f64;
            let direct: Complex64 = band
                .frequencies()
                .map(|m| {
                    b.psi_hat(3, 0, m).unwrap()
                        * Complex64::from_polar(1.0, std::f64::consts::TAU * m as f64 * t)
                })
                .sum();
            assert!(direct.im.abs() < 1e-12);
            assert!((direct.re - sig.samples()[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn coefficient_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = MeyerBasis::new(512, 2).unwrap();
        let mut c = WaveletCoeffs::zeros(2, 7).unwrap();
        for j in c.levels() {
            for k in 0..b.slots(j) {
                c.set(j, k, Complex64::new(rng.random_range(-1.0..1.0), 0.0))
                    .unwrap();
            }
        }
        let back = b.analyze(&forward(&b.synthesize(&c).unwrap()), 7).unwrap();
        for ((_, _, a), (_, _, z)) in c.iter().zip(back.iter()) {
            assert!((a - z).norm() < 1e-10);
        }
    }

    #[test]
    fn projection_error_is_the_tail() {
        let n = 4096;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sig =
            PeriodicSignal::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let b = MeyerBasis::new(n, 3).unwrap();
        let series = forward(&sig);
        let top = 8;
        let coeffs = b.analyze(&series, top).unwrap();
        let proj = b.synthesize(&coeffs).unwrap();
        // residual is orthogonal to the projection
        let residual = PeriodicSignal::new(
            sig.samples().iter().zip(proj.samples()).map(|(a, b)| a - b).collect(),
        )
        .unwrap();
        let cross: f64 = forward(&residual)
            .fft_order()
            .iter()
            .zip(forward(&proj).fft_order())
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        assert!(cross.abs() <= 1e-12 * sig.norm_sq());
        let err = proj.distance_sq(&sig).unwrap();
        assert!((err - residual.norm_sq()).abs() <= 1e-12 * sig.norm_sq());
        // energy partition
        let total = coeffs.energy() + err;
        assert!((total - sig.norm_sq()).abs() <= 1e-10 * sig.norm_sq());
    }

    #[test]
    fn bands_two_apart_are_disjoint() {
        let b = MeyerBasis::new(8192, 2).unwrap();
        for j in 2..=b.max_level() - 2 {
            let a = b.support_set(j).unwrap();
            let c = b.support_set(j + 2).unwrap();
            assert!(a.hi < c.lo);
        }
    }
}
