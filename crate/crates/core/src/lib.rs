//! Adaptive Meyer-wavelet estimation for simultaneous blind deconvolution
//! under fractional Gaussian noise.
//!
//! Observations per channel `l` are a noisy convolution
//! `Y_l = f ⊛ g_l + ε^{α₁ₗ} Z₁` and a noisy kernel `g^δ_l = g_l + δ^{α₂ₗ} Z₂`,
//! where the `Z` are independent fractional Gaussian noises. The crate
//! provides the estimator, exact fGn synthesis, Hurst estimation for
//! plug-in use, and a Monte Carlo harness for checking convergence rates.

pub mod error;
pub mod estimator;
pub mod fgn;
pub mod fourier;
pub mod harness;
pub mod kernels;
pub mod lrd;
pub mod meyer;
pub mod stats;

pub use error::{Error, Result};
pub use estimator::{
    estimate, estimate_known_kernel, ChannelData, Estimate, EstimateTrace, EstimatorConfig,
};
pub use fgn::{autocovariance_check, sample_fgn, FgnGenerator, FgnParams, LagCheck};
pub use fourier::{circular_convolve, forward, inverse, FourierSeries, PeriodicSignal};
pub use kernels::{kernel_signal, make_kernel, KernelFamily, KernelSet, KernelSpec};
pub use lrd::{estimate_hurst, HurstEstimate};
pub use meyer::{Band, MeyerBasis, WaveletCoeffs};
