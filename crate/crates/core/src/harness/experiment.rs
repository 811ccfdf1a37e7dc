//! Monte Carlo risk experiments and rate regression.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::scenario::{DeltaMode, DeltaSetting, Scenario, SignalSpec};
use super::simulate::SimulationModel;
use super::theory::{theoretical_exponent, Exponents};
use crate::error::{Error, Result};
use crate::estimator::{estimate, estimate_known_kernel, EstimatorConfig};
use crate::stats::{mean_se, ols, LinearFit};

/// Minimum number of grid points for a rate fit.
pub const MIN_FIT_POINTS: usize = 4;

/// Mean risk at one `(ε, δ)` grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskPoint {
    pub eps: f64,
    pub delta: f64,
    pub risk_mean: f64,
    pub risk_se: f64,
    /// Successful replications.
    pub reps: usize,
    pub failures: usize,
    pub oracle_risk_mean: Option<f64>,
    pub oracle_risk_se: Option<f64>,
    pub oracle_failures: usize,
    /// First error message seen at this point, if any.
    pub error: Option<String>,
}

/// Log-log regression of risk on `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_se: f64,
    pub points: usize,
    /// Theoretical log-risk/log-ε slope, when the signal has known smoothness.
    pub theory_slope: Option<f64>,
    /// `slope / theory_slope`.
    pub slope_vs_theory: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskReport {
    pub n: usize,
    pub channels: usize,
    pub reps: usize,
    pub seed: u64,
    pub points: Vec<RiskPoint>,
    pub fit: Option<RateFit>,
    pub oracle_fit: Option<RateFit>,
    pub exponents: Option<Exponents>,
    /// Total failed replications over the grid.
    pub failures: usize,
    /// Wall-clock time; kept out of serialized output so reruns compare equal.
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

impl RiskReport {
    pub fn regime_label(&self) -> Option<&'static str> {
        self.exponents.map(|e| e.regime.label())
    }
}

/// OLS of `ln risk` on `ln ε`.
pub fn fit_rate(eps: &[f64], risks: &[f64]) -> Result<LinearFit> {
    if eps.len() != risks.len() {
        return Err(Error::invalid("eps and risk lengths differ"));
    }
    if eps.len() < MIN_FIT_POINTS {
        return Err(Error::invalid(format!(
            "a rate fit needs at least {MIN_FIT_POINTS} points, got {}",
            eps.len()
        )));
    }
    if let Some(bad) = risks.iter().chain(eps).find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!("nonpositive value {bad} in rate fit")));
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = risks.iter().map(|r| r.ln()).collect();
    ols(&xs, &ys).ok_or_else(|| Error::invalid("degenerate eps grid"))
}

/// Effective `γ` in `δ ≈ ε^γ`, or `None` when `δ = 0` throughout.
pub fn coupling_exponent(scenario: &Scenario, grid: &[(f64, f64)]) -> Option<f64> {
    match &scenario.noise.delta {
        DeltaSetting::Mode(DeltaMode::Zero) => None,
        DeltaSetting::Mode(DeltaMode::Coupled) => Some(scenario.noise.gamma),
        DeltaSetting::Values(_) => {
            if grid.iter().all(|g| g.1 == 0.0) {
                return None;
            }
            let xs: Vec<f64> = grid.iter().map(|g| g.0.ln()).collect();
            let ys: Vec<f64> = grid.iter().map(|g| g.1.ln()).collect();
            ols(&xs, &ys).map(|f| f.slope)
        }
    }
}

pub fn scenario_exponents(scenario: &Scenario) -> Result<Option<Exponents>> {
    match scenario.signal {
        SignalSpec::Besov { s, p, .. } => {
            let nu: Vec<f64> = scenario.channels.iter().map(|c| c.nu).collect();
            let a1: Vec<f64> = scenario.channels.iter().map(|c| c.alpha1).collect();
            let a2: Vec<f64> = scenario.channels.iter().map(|c| c.alpha2).collect();
            theoretical_exponent(s, p, &nu, &a1, &a2).map(Some)
        }
        _ => Ok(None),
    }
}

fn rate_fit(points: &[(f64, f64)], theory_slope: Option<f64>) -> Option<RateFit> {
    let eps: Vec<f64> = points.iter().map(|p| p.0).collect();
    let risks: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = fit_rate(&eps, &risks).ok()?;
    Some(RateFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        slope_se: fit.slope_se,
        points: points.len(),
        theory_slope,
        slope_vs_theory: theory_slope.map(|t| fit.slope / t),
    })
}

struct RepOutcome {
    blind: Result<f64>,
    oracle: Option<Result<f64>>,
}

fn run_rep(
    model: &SimulationModel,
    config: &EstimatorConfig,
    oracle: bool,
    eps: f64,
    delta: f64,
    seed: u64,
) -> RepOutcome {
    let channels = match model.observations(eps, delta, seed) {
        Ok(c) => c,
        Err(e) => {
            return RepOutcome {
                blind: Err(e.clone()),
                oracle: oracle.then_some(Err(e)),
            }
        }
    };
    let score = |est: Result<crate::estimator::Estimate>| -> Result<f64> {
        est.and_then(|e| e.signal.distance_sq(model.signal()))
    };
    let blind = score(estimate(&channels, config));
    let oracle = oracle.then(|| score(estimate_known_kernel(&channels, &model.kernel_series(), config)));
    RepOutcome { blind, oracle }
}

fn summarize(outcomes: &[Result<f64>]) -> (Vec<f64>, usize, Option<String>) {
    let mut ok = Vec::with_capacity(outcomes.len());
    let mut first_error = None;
    for o in outcomes {
        match o {
            Ok(v) => ok.push(*v),
            Err(e) => {
                first_error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    let failures = outcomes.len() - ok.len();
    (ok, failures, first_error)
}

/// Runs `reps` replications at every grid point. Replication `r` uses seed
/// `seed + r` at every point, so blind and oracle runs (and neighbouring grid
/// points) see matched noise. Results are combined in index order, which
/// keeps the output independent of thread scheduling.
pub fn run_experiment(scenario: &Scenario) -> Result<RiskReport> {
    let start = Instant::now();
    let model = SimulationModel::new(scenario)?;
    let config = scenario.estimator.config();
    let grid = scenario.grid()?;
    let mut points = Vec::with_capacity(grid.len());
    for &(eps, delta) in &grid {
        let outcomes: Vec<RepOutcome> = (0..scenario.reps)
            .into_par_iter()
            .map(|r| {
                run_rep(
                    &model,
                    &config,
                    scenario.oracle,
                    eps,
                    delta,
                    scenario.seed.wrapping_add(r as u64),
                )
            })
            .collect();
        let blind: Vec<Result<f64>> = outcomes.iter().map(|o| o.blind.clone()).collect();
        let (ok, failures, error) = summarize(&blind);
        let (risk_mean, risk_se) = mean_se(&ok);
        let (oracle_risk_mean, oracle_risk_se, oracle_failures, oracle_error) = if scenario.oracle {
            let results: Vec<Result<f64>> = outcomes
                .iter()
                .map(|o| o.oracle.clone().expect("oracle requested"))
                .collect();
            let (ok, failures, error) = summarize(&results);
            let (m, se) = mean_se(&ok);
            let keep = !ok.is_empty();
            (keep.then_some(m), keep.then_some(se), failures, error)
        } else {
            (None, None, 0, None)
        };
        points.push(RiskPoint {
            eps,
            delta,
            risk_mean,
            risk_se,
            reps: ok.len(),
            failures,
            oracle_risk_mean,
            oracle_risk_se,
            oracle_failures,
            error: error.or(oracle_error),
        });
    }

    let exponents = scenario_exponents(scenario)?;
    let theory_slope = exponents.map(|e| e.slope_target(coupling_exponent(scenario, &grid)));
    let usable = |p: &RiskPoint, v: Option<f64>| {
        v.filter(|r| p.reps > 0 && *r > 0.0 && r.is_finite()).map(|r| (p.eps, r))
    };
    let blind_pts: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| usable(p, Some(p.risk_mean)))
        .collect();
    let oracle_pts: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| usable(p, p.oracle_risk_mean))
        .collect();
    // the oracle never sees kernel noise, so its target is the δ = 0 slope
    let oracle_theory = exponents.map(|e| e.slope_target(None));
    let failures = points.iter().map(|p| p.failures + p.oracle_failures).sum();
    Ok(RiskReport {
        n: scenario.n,
        channels: scenario.channels.len(),
        reps: scenario.reps,
        seed: scenario.seed,
        fit: rate_fit(&blind_pts, theory_slope),
        oracle_fit: if scenario.oracle {
            rate_fit(&oracle_pts, oracle_theory)
        } else {
            None
        },
        points,
        exponents,
        failures,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// One row of the constant-sensitivity sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub constant: String,
    pub value: f64,
    pub slope: Option<f64>,
    /// Mean risk at the smallest noise level.
    pub finest_risk: f64,
    pub failures: usize,
}

/// Reruns the experiment with each tuning constant (`k_trunc`, `rho1`,
/// `rho2`, `a`) scaled by every factor in turn.
pub fn sensitivity_sweep(scenario: &Scenario, factors: &[f64]) -> Result<Vec<SensitivityRow>> {
    let mut rows = Vec::new();
    let names = ["k_trunc", "rho1", "rho2", "a"];
    for name in names {
        for &factor in factors {
            let mut sc = scenario.clone();
            let slot = match name {
                "k_trunc" => &mut sc.estimator.k_trunc,
                "rho1" => &mut sc.estimator.rho1,
                "rho2" => &mut sc.estimator.rho2,
                _ => &mut sc.estimator.a,
            };
            *slot *= factor;
            let value = *slot;
            sc.validate()?;
            let report = run_experiment(&sc)?;
            rows.push(SensitivityRow {
                constant: name.to_string(),
                value,
                slope: report.fit.map(|f| f.slope),
                finest_risk: report.points.last().map_or(f64::NAN, |p| p.risk_mean),
                failures: report.failures,
            });
        }
    }
    Ok(rows)
}
