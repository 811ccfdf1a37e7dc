//! Observation synthesis for a scenario.
//!
//! Scenario noise levels are per-sample: a grid value `σ` means the samples
//! carry `σ^α Z` with `Z` a unit-variance fGn path. The estimator works with
//! the continuous-model level `ε = σ/√n` (the usual regression/white-noise
//! equivalence), and `ε^α n^{1−H} = σ^α` because `1 − H = α/2`.
//!
//! Every `(record, channel, role)` triple draws from its own ChaCha stream,
//! so channels and roles are independent and adding a channel never
//! perturbs the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::scenario::{Scenario, SignalSpec};
use super::signals::{build_besov_signal, piecewise, smoothblob, BesovParams};
use crate::error::Result;
use crate::estimator::ChannelData;
use crate::fgn::{continuum_scale, hurst_from_alpha, FgnGenerator};
use crate::fourier::{circular_convolve, forward, FourierSeries, PeriodicSignal};
use crate::kernels::{kernel_signal, KernelSpec};
use crate::lrd::RawRecord;
use crate::meyer::max_level_for;

/// Coarsest level of the synthetic Besov signals.
pub const SIGNAL_M0: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Signal = 0,
    Kernel = 1,
}

#[derive(Debug, Clone)]
struct ChannelModel {
    kernel: KernelSpec,
    kernel_series: FourierSeries,
    kernel_signal: PeriodicSignal,
    blurred: PeriodicSignal,
    alpha1: f64,
    alpha2: f64,
    noise1: FgnGenerator,
    noise2: FgnGenerator,
}

/// The noiseless part of a scenario, precomputed once and shared by all
/// replications.
#[derive(Debug, Clone)]
pub struct SimulationModel {
    n: usize,
    signal: PeriodicSignal,
    channels: Vec<ChannelModel>,
}

impl SimulationModel {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let n = scenario.n;
        let signal = truth_signal(scenario)?;
        let f_series = forward(&signal);
        let channels = scenario
            .channels
            .iter()
            .map(|c| {
                let kernel = KernelSpec::new(c.nu, c.amplitude, c.family, c.phase_twist, n)?;
                let kernel_series = kernel.series();
                let blurred = crate::fourier::inverse(&f_series.product(&kernel_series)?)?;
                Ok(ChannelModel {
                    kernel_signal: kernel_signal(&kernel),
                    kernel,
                    kernel_series,
                    blurred,
                    alpha1: c.alpha1,
                    alpha2: c.alpha2,
                    noise1: FgnGenerator::new(hurst_from_alpha(c.alpha1), n)?,
                    noise2: FgnGenerator::new(hurst_from_alpha(c.alpha2), n)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            signal,
            channels,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signal(&self) -> &PeriodicSignal {
        &self.signal
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn kernels(&self) -> Vec<KernelSpec> {
        self.channels.iter().map(|c| c.kernel.clone()).collect()
    }

    /// True kernel spectra, for the known-kernel oracle.
    pub fn kernel_series(&self) -> Vec<FourierSeries> {
        self.channels.iter().map(|c| c.kernel_series.clone()).collect()
    }

    pub fn alphas(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.channels.iter().map(|c| c.alpha1).collect(),
            self.channels.iter().map(|c| c.alpha2).collect(),
        )
    }

    /// Continuous-model noise level for a per-sample level.
    pub fn model_level(&self, level: f64) -> f64 {
        model_level(level, self.n)
    }

    fn noisy(
        &self,
        clean: &PeriodicSignal,
        level: f64,
        alpha: f64,
        gen: &FgnGenerator,
        seed: u64,
        stream: u64,
    ) -> Vec<f64> {
        if level == 0.0 {
            return clean.samples().to_vec();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let path = gen.sample(&mut rng);
        let scale = self.model_level(level).powf(alpha) * continuum_scale(self.n, gen.hurst());
        clean
            .samples()
            .iter()
            .zip(path)
            .map(|(x, z)| x + scale * z)
            .collect()
    }

    /// Time-domain records for one replication at per-sample noise levels
    /// `(eps, delta)`. `record` selects an
    /// independent copy of the experiment (the plug-in workflow uses two).
    pub fn records(&self, eps: f64, delta: f64, seed: u64, record: u64) -> Vec<RawRecord> {
        let m = self.channels.len() as u64;
        self.channels
            .iter()
            .enumerate()
            .map(|(l, c)| {
                let stream = |role: Role| (record * m + l as u64) * 2 + role as u64;
                RawRecord {
                    y: self.noisy(&c.blurred, eps, c.alpha1, &c.noise1, seed, stream(Role::Signal)),
                    g_obs: self.noisy(
                        &c.kernel_signal,
                        delta,
                        c.alpha2,
                        &c.noise2,
                        seed,
                        stream(Role::Kernel),
                    ),
                }
            })
            .collect()
    }

    /// Fourier-domain observations with the true long-memory parameters,
    /// labelled with the model noise levels.
    pub fn observations(&self, eps: f64, delta: f64, seed: u64) -> Result<Vec<ChannelData>> {
        let records = self.records(eps, delta, seed, 0);
        self.channel_data(&records, eps, delta)
    }

    /// Wraps records taken at per-sample levels `(eps, delta)`.
    pub fn channel_data(
        &self,
        records: &[RawRecord],
        eps: f64,
        delta: f64,
    ) -> Result<Vec<ChannelData>> {
        records
            .iter()
            .zip(&self.channels)
            .map(|(r, c)| {
                ChannelData::new(
                    forward(&PeriodicSignal::new(r.y.clone())?),
                    forward(&PeriodicSignal::new(r.g_obs.clone())?),
                    c.alpha1,
                    c.alpha2,
                    self.model_level(eps),
                    self.model_level(delta),
                )
            })
            .collect()
    }
}

/// `σ/√n`.
pub fn model_level(level: f64, n: usize) -> f64 {
    level / (n as f64).sqrt()
}

/// The scenario's true signal. Besov signals are band-limited to the finest
/// level the estimator can use on this grid.
pub fn truth_signal(scenario: &Scenario) -> Result<PeriodicSignal> {
    let n = scenario.n;
    match scenario.signal {
        SignalSpec::Besov {
            s,
            p,
            q,
            radius,
            seed,
        } => Ok(build_besov_signal(
            &BesovParams { s, p, q, radius },
            n,
            SIGNAL_M0,
            max_level_for(n),
            seed,
        )?
        .signal),
        SignalSpec::Smoothblob => smoothblob(n),
        SignalSpec::Piecewise => piecewise(n),
    }
}

/// One replication's observations for `scenario` at `(ε, δ)`.
pub fn simulate_observations(
    scenario: &Scenario,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<Vec<ChannelData>> {
    SimulationModel::new(scenario)?.observations(eps, delta, seed)
}

/// Signal convolved with a kernel, in the time domain.
pub fn blur(f: &PeriodicSignal, g: &PeriodicSignal) -> Result<PeriodicSignal> {
    circular_convolve(f, g)
}
