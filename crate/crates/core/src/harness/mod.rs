//! Simulation laboratory: scenarios, synthetic observations, Monte Carlo
//! risk estimation, rate regression and theoretical exponents.

pub mod experiment;
pub mod report;
pub mod scenario;
pub mod signals;
pub mod simulate;
pub mod theory;

pub use experiment::{fit_rate, run_experiment, sensitivity_sweep, RateFit, RiskPoint, RiskReport};
pub use scenario::{ChannelSpec, DeltaMode, DeltaSetting, NoiseGrid, Scenario, SignalSpec};
pub use signals::{build_besov_signal, BesovParams, BesovSignal};
pub use simulate::{simulate_observations, SimulationModel};
pub use theory::{theoretical_exponent, Exponents, NoiseExponent, Regime};
