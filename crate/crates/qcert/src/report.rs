//! Report emission: the stable JSON schema, human-readable text, and the
//! CSV trace export.
//!
//! JSON reports always carry the keys `mode`, `verdict`, `tolerances`,
//! `grid`, `margins`, `witnesses`, `metadata`. Margin entries are
//! `{x, max_kernel_eig, grad_norm}`, witness entries
//! `{x, y, t, lhs, rhs, gap}`, metadata
//! `{fd_used, generator, version, experimental, notes}`.

use serde_json::{json, Value};

use crate::certify::{CertReport, GridMeta, PointMargin, ReportMeta, Verdict, Witness};
use crate::field::{ScalarField, ValidationReport};
use crate::oracle::ConcavityComparison;
use crate::property_n::PropertyNComparison;
use crate::trace::{convexity_probe, level_consistency, Trace};

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn vec_json(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

fn margins_json(margins: &[PointMargin<f64>]) -> Value {
    Value::Array(
        margins
            .iter()
            .map(|m| {
                json!({
                    "x": vec_json(&m.x),
                    "max_kernel_eig": num(m.max_kernel_eig),
                    "grad_norm": num(m.grad_norm),
                })
            })
            .collect(),
    )
}

fn witnesses_json(witnesses: &[Witness<f64>]) -> Value {
    Value::Array(
        witnesses
            .iter()
            .map(|w| {
                json!({
                    "x": vec_json(&w.x),
                    "y": vec_json(&w.y),
                    "t": num(w.t),
                    "lhs": num(w.lhs),
                    "rhs": num(w.rhs),
                    "gap": num(w.gap),
                })
            })
            .collect(),
    )
}

fn grid_json(grid: &GridMeta) -> Value {
    json!({
        "points_per_axis": grid.points_per_axis,
        "random_points": grid.random_points,
        "rng_seed": grid.rng_seed,
        "total_points": grid.total_points,
        "trials": grid.trials,
    })
}

fn metadata_json(meta: &ReportMeta) -> Value {
    json!({
        "fd_used": meta.fd_used,
        "generator": meta.generator,
        "version": meta.version,
        "experimental": meta.experimental,
        "notes": meta.notes,
    })
}

pub fn report_json(report: &CertReport<f64>) -> Value {
    json!({
        "mode": report.mode.as_str(),
        "verdict": report.verdict.as_str(),
        "tolerances": {
            "tol": num(report.tolerances.tol),
            "violation_threshold": num(report.tolerances.violation_threshold),
            "fd_step": num(report.tolerances.fd_step),
        },
        "grid": grid_json(&report.grid),
        "margins": margins_json(&report.margins),
        "witnesses": witnesses_json(&report.witnesses),
        "metadata": metadata_json(&report.metadata),
    })
}

pub fn report_text(report: &CertReport<f64>) -> String {
    let mut s = String::new();
    s.push_str(&format!("mode:    {}\n", report.mode.as_str()));
    s.push_str(&format!("verdict: {}\n", report.verdict.as_str()));
    if report.metadata.experimental {
        s.push_str("status:  EXPERIMENTAL - this mode gathers evidence and asserts nothing\n");
    }
    match report.grid.trials {
        Some(t) => s.push_str(&format!("trials:  {} (seed {})\n", t, report.grid.rng_seed)),
        None => s.push_str(&format!(
            "grid:    {} per axis + {} random (seed {}), {} points\n",
            report.grid.points_per_axis,
            report.grid.random_points,
            report.grid.rng_seed,
            report.grid.total_points
        )),
    }
    s.push_str(&format!(
        "tol:     {:e} (violation threshold {:e}, fd step {:e})\n",
        report.tolerances.tol, report.tolerances.violation_threshold, report.tolerances.fd_step
    ));
    if let Some(max) = report.max_margin() {
        let min = report
            .margins
            .iter()
            .map(|m| m.max_kernel_eig)
            .fold(f64::INFINITY, f64::min);
        s.push_str(&format!("margins: {} points, max {:e}, min {:e}\n", report.margins.len(), max, min));
    }
    if report.witnesses.is_empty() {
        s.push_str("witnesses: none\n");
    } else {
        for w in &report.witnesses {
            s.push_str(&format!(
                "witness: x={:?} y={:?} t={} lhs={:e} rhs={:e} gap={:e}\n",
                w.x, w.y, w.t, w.lhs, w.rhs, w.gap
            ));
        }
    }
    for note in &report.metadata.notes {
        s.push_str(&format!("note:    {note}\n"));
    }
    s.push_str(&format!(
        "metadata: fd_used={} generator={} version={}\n",
        report.metadata.fd_used, report.metadata.generator, report.metadata.version
    ));
    s
}

pub fn validation_json(v: &ValidationReport<f64>, meta: &ReportMeta) -> Value {
    json!({
        "mode": "validate",
        "verdict": if v.passed() { Verdict::Certified.as_str() } else { Verdict::Refuted.as_str() },
        "max_residual": num(v.max_residual),
        "worst_point": vec_json(&v.worst_point),
        "nonpositive_lambda": Value::Array(
            v.nonpositive_lambda
                .iter()
                .map(|(x, l)| json!({"x": vec_json(x), "lambda": num(*l)}))
                .collect()
        ),
        "points_checked": v.points_checked,
        "tol": num(v.tol),
        "metadata": metadata_json(meta),
    })
}

pub fn validation_text(v: &ValidationReport<f64>) -> String {
    let mut s = String::new();
    s.push_str("mode:    validate\n");
    s.push_str(&format!(
        "verdict: {}\n",
        if v.passed() { "certified" } else { "refuted" }
    ));
    s.push_str(&format!(
        "residual: max {:e} at {:?} over {} points (tol {:e})\n",
        v.max_residual, v.worst_point, v.points_checked, v.tol
    ));
    if v.nonpositive_lambda.is_empty() {
        s.push_str("lambda:  positive at every checked point\n");
    } else {
        for (x, l) in &v.nonpositive_lambda {
            s.push_str(&format!("lambda:  non-positive value {l:e} at {x:?}\n"));
        }
    }
    s
}

pub fn property_n_json(cmp: &PropertyNComparison<f64>, meta: &ReportMeta) -> Value {
    json!({
        "mode": "property_n",
        "verdict": Verdict::Undetermined.as_str(),
        "agreements": cmp.agreements,
        "disagreements": cmp.disagreements,
        "boundary": cmp.boundary,
        "symmetric_input": cmp.symmetric_input,
        "points": Value::Array(cmp.points.iter().map(|p| json!({
            "x": vec_json(&p.x),
            "min_minor": num(p.min_minor),
            "property_n_pass": p.property_n_pass,
            "kernel_margin": num(p.kernel_margin),
            "theorem_pass": p.theorem_pass,
            "agree": p.agree(),
        })).collect()),
        "metadata": metadata_json(meta),
    })
}

pub fn property_n_text(cmp: &PropertyNComparison<f64>) -> String {
    let mut s = String::new();
    s.push_str("mode:    property_n\n");
    s.push_str("verdict: undetermined\n");
    s.push_str("status:  EXPERIMENTAL - bordered minors on an unsymmetrized Jacobian\n");
    s.push_str(&format!(
        "points:  {} ({} agree, {} disagree, {} boundary)\n",
        cmp.points.len(),
        cmp.agreements,
        cmp.disagreements,
        cmp.boundary
    ));
    s.push_str(&format!("symmetric input: {}\n", cmp.symmetric_input));
    for p in cmp.points.iter().take(20) {
        s.push_str(&format!(
            "  x={:?} min_minor={:e} kernel_margin={:e} agree={:?}\n",
            p.x,
            p.min_minor,
            p.kernel_margin,
            p.agree()
        ));
    }
    if cmp.points.len() > 20 {
        s.push_str(&format!("  ... {} more points in the JSON report\n", cmp.points.len() - 20));
    }
    s
}

pub fn concavity_json(cmp: &ConcavityComparison<f64>, meta: &ReportMeta) -> Value {
    json!({
        "mode": "concavity",
        "verdict": Verdict::Undetermined.as_str(),
        "max_sym_eig": num(cmp.max_sym_eig),
        "nsd_on_grid": cmp.nsd_on_grid,
        "consistent": cmp.consistent,
        "margins": margins_json(&cmp.margins),
        "oracle": report_json(&cmp.oracle),
        "metadata": metadata_json(meta),
    })
}

pub fn concavity_text(cmp: &ConcavityComparison<f64>) -> String {
    let mut s = String::new();
    s.push_str("mode:    concavity\n");
    s.push_str("verdict: undetermined\n");
    s.push_str("status:  EXPERIMENTAL - sym(Dg) spectrum vs the concavity oracle\n");
    s.push_str(&format!(
        "sym(Dg): max eigenvalue {:e} over {} grid points (negative semi-definite: {})\n",
        cmp.max_sym_eig,
        cmp.margins.len(),
        cmp.nsd_on_grid
    ));
    s.push_str(&format!("oracle:  {}\n", cmp.oracle.verdict.as_str()));
    s.push_str(&format!("consistent: {}\n", cmp.consistent));
    s
}

/// `%.12g`-style formatting: 12 significant digits, fixed or scientific
/// depending on the exponent, trailing zeros trimmed.
pub fn g12(x: f64) -> String {
    fmt_g(x, 12)
}

fn fmt_g(x: f64, prec: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", prec - 1, x);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("numeric exponent");
    if exp < -4 || exp >= prec as i32 {
        let mant = trim_zeros(mant);
        format!("{}e{}{:02}", mant, if exp < 0 { "-" } else { "+" }, exp.abs())
    } else {
        let frac = (prec as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.frac$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV export: header `x1,x2,f`, one `%.12g` row per sample.
pub fn trace_csv(trace: &Trace<f64>, f: &ScalarField<f64>) -> String {
    let mut s = String::from("x1,x2,f\n");
    for &(x1, x2) in &trace.samples {
        s.push_str(&format!("{},{},{}\n", g12(x1), g12(x2), g12(f.eval(&[x1, x2]))));
    }
    s
}

pub fn trace_json(trace: &Trace<f64>, f: &ScalarField<f64>, meta: &ReportMeta) -> Value {
    let samples: Vec<Value> = trace
        .samples
        .iter()
        .map(|&(x1, x2)| Value::Array(vec![num(x1), num(x2), num(f.eval(&[x1, x2]))]))
        .collect();
    let probe = if trace.samples.len() >= 3 { Some(convexity_probe(trace)) } else { None };
    json!({
        "mode": "trace",
        "level": num(trace.level),
        "anchor_x1": num(trace.anchor_x1),
        "step": num(trace.step),
        "method": trace.method,
        "samples": samples,
        "max_level_deviation": num(level_consistency(trace, f)),
        "min_second_difference": probe.map(num),
        "metadata": metadata_json(meta),
    })
}

pub fn trace_text(trace: &Trace<f64>, f: &ScalarField<f64>) -> String {
    let mut s = String::new();
    s.push_str("mode:    trace\n");
    s.push_str(&format!(
        "trace:   {} samples, level {} at x1 = {}, step {:e}, {}\n",
        trace.samples.len(),
        trace.level,
        trace.anchor_x1,
        trace.step,
        trace.method
    ));
    s.push_str(&format!("level consistency: max |f - f(anchor)| = {:e}\n", level_consistency(trace, f)));
    if trace.samples.len() >= 3 {
        s.push_str(&format!("convexity probe:   min second difference = {:e}\n", convexity_probe(trace)));
    }
    s
}
