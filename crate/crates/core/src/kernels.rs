//! Regular-smooth convolution kernels with polynomially decaying spectra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{self, FourierSeries, PeriodicSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    /// `c (1 + |m|)^{−ν}`
    #[default]
    PowerLaw,
    /// `c (1 + m²)^{−ν/2}`
    SmoothedPowerLaw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    nu: f64,
    amplitude: f64,
    family: KernelFamily,
    phase_twist: f64,
    n: usize,
    window: (f64, f64),
}

/// Power-law kernel `c (1 + |m|)^{−ν}` on a grid of size `n`.
pub fn make_kernel(nu: f64, amplitude: f64, n: usize) -> Result<KernelSpec> {
    KernelSpec::new(nu, amplitude, KernelFamily::PowerLaw, 0.0, n)
}

impl KernelSpec {
    pub fn new(
        nu: f64,
        amplitude: f64,
        family: KernelFamily,
        phase_twist: f64,
        n: usize,
    ) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::invalid(format!("nu must be positive, got {nu}")));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::invalid(format!(
                "amplitude must be positive, got {amplitude}"
            )));
        }
        if !phase_twist.is_finite() {
            return Err(Error::invalid("phase twist must be finite"));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::invalid(format!("grid size {n} is not a power of two")));
        }
        let mut spec = Self {
            nu,
            amplitude,
            family,
            phase_twist,
            n,
            window: (0.0, 0.0),
        };
        spec.window = spec.measure_window();
        Ok(spec)
    }

    /// Same kernel with a phase `exp(iθ·sign(m))` applied to every coefficient.
    pub fn with_phase_twist(&self, theta: f64) -> Result<Self> {
        Self::new(self.nu, self.amplitude, self.family, theta, self.n)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(c₁, c₂)` with `c₁ ≤ |g̃(m)|²|m|^{2ν} ≤ c₂` for `1 ≤ |m| ≤ n/2`.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    fn modulus(&self, m: i64) -> f64 {
        let a = m.abs() as f64;
        match self.family {
            KernelFamily::PowerLaw => self.amplitude * (1.0 + a).powf(-self.nu),
            KernelFamily::SmoothedPowerLaw => {
                self.amplitude * (1.0 + a * a).powf(-self.nu / 2.0)
            }
        }
    }

    /// `g̃(m)`. The Nyquist coefficient stays real so the kernel is real.
    pub fn coeff(&self, m: i64) -> Complex64 {
        let r = self.modulus(m);
        if self.phase_twist == 0.0 || m == 0 || m == -(self.n as i64 / 2) {
            return Complex64::new(r, 0.0);
        }
        Complex64::from_polar(r, self.phase_twist * m.signum() as f64)
    }

    pub fn series(&self) -> FourierSeries {
        FourierSeries::from_fn(self.n, |m| self.coeff(m))
            .expect("grid size validated at construction")
    }

    fn measure_window(&self) -> (f64, f64) {
        let half = self.n as i64 / 2;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for m in 1..=half {
            let r = self.modulus(m).powi(2) * (m as f64).powf(2.0 * self.nu);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    }
}

/// Materializes `g(t)` on the grid.
pub fn kernel_signal(spec: &KernelSpec) -> PeriodicSignal {
    fourier::inverse(&spec.series()).expect("kernel spectra are Hermitian by construction")
}

/// A multichannel collection of kernels.
#[derive(Debug, Clone)]
pub struct KernelSet {
    specs: Vec<KernelSpec>,
}

impl KernelSet {
    pub fn new(specs: Vec<KernelSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::invalid("kernel set is empty"));
        }
        if specs.iter().any(|s| s.n != specs[0].n) {
            return Err(Error::invalid("kernels live on different grids"));
        }
        Ok(Self { specs })
    }

    pub fn specs(&self) -> &[KernelSpec] {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// `(min ν, max ν)` over channels.
    pub fn nu_range(&self) -> (f64, f64) {
        self.specs.iter().fold((f64::INFINITY, 0.0), |(lo, hi), s| {
            (lo.min(s.nu), hi.max(s.nu))
        })
    }

    /// Channel indices ordered by increasing `ν`, ties by index.
    pub fn order_by_nu(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.specs.len()).collect();
        idx.sort_by(|&a, &b| self.specs[a].nu.total_cmp(&self.specs[b].nu).then(a.cmp(&b)));
        idx
    }
}
