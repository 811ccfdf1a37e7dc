//! Report emission: CSV table, JSON summary and an SVG log-log plot.
//!
//! Floats are written with 17 significant digits so that equal reports are
//! byte-identical and every value round-trips exactly.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Map, Number, Value};

use super::experiment::{RateFit, RiskReport};
use super::theory::NoiseExponent;

pub const CSV_HEADER: &str = "eps,delta,risk_mean,risk_se,reps,oracle_risk_mean,oracle_risk_se";

/// `x` with 17 significant digits in scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt17(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

/// JSON number carrying exactly the 17-digit text, or `null` when not finite.
fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_str(&fmt17(x)).expect("formatted float is valid JSON"))
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn to_csv(report: &RiskReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in &report.points {
        let (mean, se) = if p.reps > 0 {
            (fmt17(p.risk_mean), fmt17(p.risk_se))
        } else {
            (String::new(), String::new())
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt17(p.eps),
            fmt17(p.delta),
            mean,
            se,
            p.reps,
            opt17(p.oracle_risk_mean),
            opt17(p.oracle_risk_se)
        )
        .expect("writing to a String cannot fail");
    }
    out
}

fn fit_json(fit: &Option<RateFit>) -> Value {
    match fit {
        None => Value::Null,
        Some(f) => json!({
            "slope": num(f.slope),
            "intercept": num(f.intercept),
            "r_squared": num(f.r_squared),
            "slope_se": num(f.slope_se),
            "points": f.points,
            "theory_slope": opt_num(f.theory_slope),
            "slope_vs_theory": opt_num(f.slope_vs_theory),
        }),
    }
}

fn noise_json(e: &NoiseExponent) -> Value {
    json!({
        "channel": e.channel,
        "nu": num(e.nu),
        "alpha": num(e.alpha),
        "boundary": num(e.boundary),
        "exponent": num(e.exponent),
        "log_slope": num(e.log_slope()),
        "dense": e.dense,
        "log_factor": e.log_factor,
    })
}

/// Summary without timing information, so reruns compare byte-for-byte.
pub fn to_json(report: &RiskReport) -> String {
    let points: Vec<Value> = report
        .points
        .iter()
        .map(|p| {
            json!({
                "eps": num(p.eps),
                "delta": num(p.delta),
                "risk_mean": if p.reps > 0 { num(p.risk_mean) } else { Value::Null },
                "risk_se": if p.reps > 0 { num(p.risk_se) } else { Value::Null },
                "reps": p.reps,
                "failures": p.failures,
                "oracle_risk_mean": opt_num(p.oracle_risk_mean),
                "oracle_risk_se": opt_num(p.oracle_risk_se),
                "oracle_failures": p.oracle_failures,
                "error": p.error,
            })
        })
        .collect();
    let mut root = Map::new();
    root.insert("n".into(), json!(report.n));
    root.insert("channels".into(), json!(report.channels));
    root.insert("reps".into(), json!(report.reps));
    root.insert("seed".into(), json!(report.seed));
    root.insert("failures".into(), json!(report.failures));
    root.insert("fit".into(), fit_json(&report.fit));
    root.insert("oracle_fit".into(), fit_json(&report.oracle_fit));
    root.insert(
        "regime".into(),
        report.regime_label().map_or(Value::Null, |l| json!(l)),
    );
    root.insert(
        "exponents".into(),
        match &report.exponents {
            None => Value::Null,
            Some(e) => json!({
                "eps": noise_json(&e.eps),
                "delta": noise_json(&e.delta),
            }),
        },
    );
    root.insert("points".into(), Value::Array(points));
    let mut text = serde_json::to_string_pretty(&Value::Object(root))
        .expect("JSON values always serialize");
    text.push('\n');
    text
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;

/// Log-log plot of blind and oracle risk against `ε`, with a reference line
/// of the theoretical slope through the blind fit's centroid.
pub fn to_svg(report: &RiskReport) -> String {
    let blind: Vec<(f64, f64)> = report
        .points
        .iter()
        .filter(|p| p.reps > 0 && p.risk_mean > 0.0)
        .map(|p| (p.eps.log2(), p.risk_mean.log2()))
        .collect();
    let oracle: Vec<(f64, f64)> = report
        .points
        .iter()
        .filter_map(|p| p.oracle_risk_mean.filter(|r| *r > 0.0).map(|r| (p.eps.log2(), r.log2())))
        .collect();
    let all: Vec<&(f64, f64)> = blind.iter().chain(&oracle).collect();
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    if all.is_empty() {
        writeln!(svg, r#"<text x="{}" y="{}">no data</text>"#, WIDTH / 2.0, HEIGHT / 2.0).unwrap();
        svg.push_str("</svg>\n");
        return svg;
    }
    let (mut x0, mut x1, mut y0, mut y1) = all.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), (x, y)| (a.min(*x), b.max(*x), c.min(*y), d.max(*y)),
    );
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    writeln!(
        svg,
        r#"<g stroke="black" fill="none"><line x1="{m}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{m}" y1="{b}" x2="{m}" y2="{m}"/></g>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">log2 eps</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="15" y="{}" font-size="13" transform="rotate(-90 15 {})" text-anchor="middle">log2 risk</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    )
    .unwrap();
    for (x, label) in [(x0, x0), (x1, x1)] {
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" font-size="11" text-anchor="middle">{label:.1}</text>"#,
            px(x),
            HEIGHT - MARGIN + 16.0
        )
        .unwrap();
    }
    for y in [y0, y1] {
        writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" font-size="11" text-anchor="end">{y:.1}</text>"#,
            MARGIN - 6.0,
            py(y) + 4.0
        )
        .unwrap();
    }

    let polyline = |pts: &[(f64, f64)], color: &str, svg: &mut String| {
        let path: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
            .collect();
        writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        )
        .unwrap();
        for (x, y) in pts {
            writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(*x), py(*y))
                .unwrap();
        }
    };
    polyline(&blind, "#1f5fa8", &mut svg);
    polyline(&oracle, "#c0392b", &mut svg);

    if let (Some(t), false) = (report.fit.and_then(|f| f.theory_slope), blind.is_empty()) {
        let cx = blind.iter().map(|p| p.0).sum::<f64>() / blind.len() as f64;
        let cy = blind.iter().map(|p| p.1).sum::<f64>() / blind.len() as f64;
        let (a, b) = (x0, x1);
        writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="5,4"/>"#,
            px(a),
            py(cy + t * (a - cx)),
            px(b),
            py(cy + t * (b - cx))
        )
        .unwrap();
    }
    let legend = [("#1f5fa8", "blind"), ("#c0392b", "oracle"), ("gray", "theory slope")];
    for (i, (color, name)) in legend.iter().enumerate() {
        let y = MARGIN + 16.0 * i as f64;
        writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}" font-size="12">{name}</text>"#,
            WIDTH - MARGIN - 100.0,
            y - 9.0,
            WIDTH - MARGIN - 85.0,
            y
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::experiment::RiskPoint;

    fn report() -> RiskReport {
        let points = (0..4)
            .map(|k| {
                let eps = (-(k as f64) - 3.0).exp2();
                RiskPoint {
                    eps,
                    delta: 0.0,
                    risk_mean: eps.powf(1.1),
                    risk_se: 0.1 * eps.powf(1.1),
                    reps: 10,
                    failures: 0,
                    oracle_risk_mean: if k == 2 { None } else { Some(eps) },
                    oracle_risk_se: if k == 2 { None } else { Some(0.01) },
                    oracle_failures: 0,
                    error: None,
                }
            })
            .collect();
        RiskReport {
            n: 64,
            channels: 1,
            reps: 10,
            seed: 0,
            points,
            fit: None,
            oracle_fit: None,
            exponents: None,
            failures: 0,
            elapsed_seconds: 1.5,
        }
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e-7] {
            let s = fmt17(x);
            assert_eq!(s.split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv(&report());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines.iter().all(|l| l.split(',').count() == 7));
        assert!(lines[3].ends_with(",10,,"));
        assert!(lines[1].starts_with("1.2500000000000000e-1,0.0000000000000000e0,"));
    }

    #[test]
    fn json_keeps_digits_and_omits_timing() {
        let text = to_json(&report());
        assert!(text.contains("1.2500000000000000e-1"));
        assert!(!text.contains("elapsed"));
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 4);
        assert!(v["points"][2]["oracle_risk_mean"].is_null());
        assert_eq!(to_json(&report()), text);
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let svg = to_svg(&report());
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 4 + 3);
    }
}
