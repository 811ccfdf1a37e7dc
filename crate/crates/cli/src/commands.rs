use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use blindwave::fourier::PeriodicSignal;
use blindwave::harness::report::{fmt17, to_csv, to_json, to_svg};
use blindwave::harness::scenario::EstimatorSettings;
use blindwave::harness::{
    run_experiment, sensitivity_sweep, theoretical_exponent, DeltaMode, DeltaSetting, Scenario,
    SimulationModel,
};
use blindwave::{autocovariance_check, estimate, estimate_hurst, FgnParams};
use blindwave::lrd::estimate_hurst_differenced;
use serde_json::{json, Number, Value};

use crate::data::{read_series, Observations, StoredChannel};
use crate::{Command, Overrides, Tuning};

/// Bad command-line input that the library never saw.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            overrides,
            eps,
            delta,
            out,
        } => simulate(&overrides, eps, delta, &out),
        Command::Estimate {
            input,
            overrides,
            eps,
            delta,
            tuning,
            out,
            trace,
        } => run_estimate(input.as_deref(), &overrides, eps, delta, &tuning, out.as_deref(), trace),
        Command::Rates {
            overrides,
            out,
            svg,
            sweep,
        } => rates(&overrides, out.as_deref(), svg, sweep.as_deref()),
        Command::Exponent {
            s,
            p,
            nu,
            alpha1,
            alpha2,
        } => {
            let e = theoretical_exponent(s, p, &nu, &alpha1, &alpha2)?;
            let mut v = serde_json::to_value(e)?;
            v["regime"] = json!(e.regime.label());
            v["eps"]["log_slope"] = json!(e.eps.log_slope());
            v["delta"]["log_slope"] = json!(e.delta.log_slope());
            println!("{}", serde_json::to_string_pretty(&with_17_digits(v))?);
            Ok(())
        }
        Command::FgnCheck {
            hurst,
            n,
            reps,
            seed,
            max_lag,
        } => fgn_check(hurst, n, reps, seed, max_lag),
        Command::Hurst { input, differenced } => {
            let series = read_series(&input)?;
            let h = if differenced {
                estimate_hurst_differenced(&series)?
            } else {
                estimate_hurst(&series)?
            };
            let v = json!({
                "h_hat": h.h_hat,
                "stderr": h.stderr,
                "bandwidth": h.bandwidth,
                "alpha_hat": h.alpha_hat(),
            });
            println!("{}", serde_json::to_string_pretty(&with_17_digits(v))?);
            Ok(())
        }
    }
}

/// Rewrites every non-integer JSON number with 17 significant digits.
fn with_17_digits(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => match n.as_f64() {
            Some(x) if x.is_finite() => {
                Value::Number(Number::from_str(&fmt17(x)).expect("formatted float is valid JSON"))
            }
            _ => Value::Null,
        },
        Value::Array(a) => Value::Array(a.into_iter().map(with_17_digits).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, with_17_digits(v))).collect()),
        other => other,
    }
}

fn load_scenario(overrides: &Overrides) -> Result<Scenario> {
    let mut sc = match &overrides.scenario {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            Scenario::from_toml_str(&text)?
        }
        None => Scenario::default_scenario(),
    };
    if let Some(seed) = overrides.seed {
        sc.seed = seed;
    }
    if let Some(reps) = overrides.reps {
        sc.reps = reps;
    }
    sc.validate()?;
    Ok(sc)
}

/// Kernel noise level matching `eps` under the scenario's coupling.
fn coupled_delta(sc: &Scenario, eps: f64, delta: Option<f64>) -> Result<f64> {
    if let Some(d) = delta {
        return Ok(d);
    }
    match &sc.noise.delta {
        DeltaSetting::Mode(DeltaMode::Zero) => Ok(0.0),
        DeltaSetting::Mode(DeltaMode::Coupled) => Ok(eps.powf(sc.noise.gamma)),
        DeltaSetting::Values(_) => Err(ConfigError(
            "the scenario lists explicit delta values; pass --delta".into(),
        )
        .into()),
    }
}

fn check_level(name: &str, v: f64) -> Result<()> {
    if !(0.0..1.0).contains(&v) {
        return Err(ConfigError(format!("{name} must lie in [0, 1), got {v}")).into());
    }
    Ok(())
}

fn simulate_observations(sc: &Scenario, eps: f64, delta: f64) -> Result<Observations> {
    check_level("eps", eps)?;
    check_level("delta", delta)?;
    let model = SimulationModel::new(sc)?;
    let (a1, a2) = model.alphas();
    let records = model.records(eps, delta, sc.seed, 0);
    Ok(Observations {
        n: sc.n,
        eps,
        delta,
        model_eps: model.model_level(eps),
        model_delta: model.model_level(delta),
        channels: records
            .into_iter()
            .zip(a1.into_iter().zip(a2))
            .map(|(r, (alpha1, alpha2))| StoredChannel {
                alpha1,
                alpha2,
                y: r.y,
                g_obs: r.g_obs,
            })
            .collect(),
        truth: Some(model.signal().samples().to_vec()),
    })
}

fn simulate(overrides: &Overrides, eps: f64, delta: Option<f64>, out: &Path) -> Result<()> {
    let sc = load_scenario(overrides)?;
    let delta = coupled_delta(&sc, eps, delta)?;
    let obs = simulate_observations(&sc, eps, delta)?;
    obs.write(out)?;
    eprintln!(
        "wrote {} channels of {} samples to {}",
        obs.channels.len(),
        obs.n,
        out.display()
    );
    Ok(())
}

fn apply_tuning(mut settings: EstimatorSettings, t: &Tuning) -> EstimatorSettings {
    if let Some(v) = t.rho1 {
        settings.rho1 = v;
    }
    if let Some(v) = t.rho2 {
        settings.rho2 = v;
    }
    if let Some(v) = t.k_trunc {
        settings.k_trunc = v;
    }
    if let Some(v) = t.a {
        settings.a = v;
    }
    if t.m0.is_some() {
        settings.m0 = t.m0;
    }
    if t.j.is_some() {
        settings.j = t.j;
    }
    settings
}

fn run_estimate(
    input: Option<&Path>,
    overrides: &Overrides,
    eps: Option<f64>,
    delta: Option<f64>,
    tuning: &Tuning,
    out: Option<&Path>,
    trace: bool,
) -> Result<()> {
    let (obs, base) = match input {
        Some(path) => {
            let base = match &overrides.scenario {
                Some(_) => load_scenario(overrides)?.estimator,
                None => EstimatorSettings::default(),
            };
            (Observations::read(path)?, base)
        }
        None => {
            let sc = load_scenario(overrides)?;
            let eps = eps.expect("clap requires eps without input");
            let delta = coupled_delta(&sc, eps, delta)?;
            let settings = sc.estimator.clone();
            (simulate_observations(&sc, eps, delta)?, settings)
        }
    };
    let settings = apply_tuning(base, tuning);
    let config = settings.config();
    config.validate()?;
    let channels = obs.channel_data()?;
    let est = estimate(&channels, &config)?;
    let truth = obs.truth_signal()?;
    let risk = match &truth {
        Some(t) => Some(est.signal.distance_sq(t)?),
        None => None,
    };

    let plan = &est.trace.plan;
    let mut summary = json!({
        "n": obs.n,
        "channels": channels.len(),
        "eps": obs.eps,
        "delta": obs.delta,
        "model_eps": obs.model_eps,
        "model_delta": obs.model_delta,
        "m0": plan.m0,
        "top": plan.top,
        "j1": plan.j1,
        "j2": plan.j2,
        "capped": plan.capped,
        "kept": est.trace.kept(),
        "killed": est.trace.killed(),
        "surviving_frequencies": est.trace.survival.count(),
        "risk": risk,
    });
    if trace {
        summary["levels"] = serde_json::to_value(&plan.levels)?;
    }
    println!("{}", serde_json::to_string_pretty(&with_17_digits(summary))?);

    if let Some(path) = out {
        write_reconstruction(path, &est.signal, truth.as_ref())?;
    }
    Ok(())
}

fn write_reconstruction(path: &Path, f_hat: &PeriodicSignal, truth: Option<&PeriodicSignal>) -> Result<()> {
    let n = f_hat.len();
    let mut text = String::from(if truth.is_some() { "t,f_hat,f\n" } else { "t,f_hat\n" });
    for i in 0..n {
        let t = i as f64 / n as f64;
        text.push_str(&fmt17(t));
        text.push(',');
        text.push_str(&fmt17(f_hat.samples()[i]));
        if let Some(f) = truth {
            text.push(',');
            text.push_str(&fmt17(f.samples()[i]));
        }
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn rates(overrides: &Overrides, out: Option<&Path>, svg: bool, sweep: Option<&[f64]>) -> Result<()> {
    let sc = load_scenario(overrides)?;
    let report = run_experiment(&sc)?;
    let csv = to_csv(&report);
    match out {
        None => print!("{csv}"),
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write(dir.join("rates.csv"), &csv)?;
            write(dir.join("rates.json"), &to_json(&report))?;
            if svg {
                write(dir.join("rates.svg"), &to_svg(&report))?;
            }
            if let Some(factors) = sweep {
                if factors.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
                    return Err(ConfigError("sweep factors must be positive".into()).into());
                }
                let rows = sensitivity_sweep(&sc, factors)?;
                let mut text = String::from("constant,value,slope,finest_risk,failures\n");
                for r in rows {
                    text.push_str(&format!(
                        "{},{},{},{},{}\n",
                        r.constant,
                        fmt17(r.value),
                        r.slope.map(fmt17).unwrap_or_default(),
                        fmt17(r.finest_risk),
                        r.failures
                    ));
                }
                write(dir.join("sweep.csv"), &text)?;
            }
        }
    }
    if let Some(fit) = report.fit {
        eprint!("slope {:.4} (R² {:.4})", fit.slope, fit.r_squared);
        if let Some(t) = fit.theory_slope {
            eprint!(", theory {t:.4}");
        }
        eprintln!();
    }
    if report.failures > 0 {
        eprintln!("{} replications failed", report.failures);
    }
    eprintln!("elapsed {:.1} s", report.elapsed_seconds);
    Ok(())
}

fn write(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn fgn_check(hurst: f64, n: usize, reps: usize, seed: u64, max_lag: usize) -> Result<()> {
    let rows = autocovariance_check(&FgnParams::new(hurst, n, seed)?, reps, max_lag)?;
    println!("lag,empirical,exact,stderr,z");
    let mut worst: f64 = 0.0;
    for r in &rows {
        worst = worst.max(r.z().abs());
        println!(
            "{},{},{},{},{}",
            r.lag,
            fmt17(r.empirical),
            fmt17(r.exact),
            fmt17(r.stderr),
            fmt17(r.z())
        );
    }
    eprintln!("max |z| = {worst:.3} over {} lags", rows.len());
    Ok(())
}
