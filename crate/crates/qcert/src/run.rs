//! Mode dispatch: resolve a configuration into a field, a gradient
//! decomposition and a domain, run the requested test, and render the
//! report.
//!
//! Exit codes are a function of the verdict only: 0 certified or
//! no-violation, 1 refuted, 2 undetermined, 3 precondition failed,
//! 4 usage or configuration error.

use std::sync::Arc;

use thiserror::Error;

use crate::certify::{
    certify_theorem1, certify_theorem2, lemma1_check, CertReport, GridMeta, Mode, ReportMeta,
    Tolerances, Verdict,
};
use crate::config::{parse_domain, parse_point, parse_range, OracleVariant, OutputFormat, RunConfig};
use crate::corpus::{builtin_corpus, find_entry};
use crate::expr;
use crate::field::{
    grid_points, validate_pair, BoxDomain, FieldError, GradientDecomposition, GridSpec,
    ScalarField, ValidationReport,
};
use crate::oracle::{
    concavity_conjecture_mode, concavity_oracle, quasiconcavity_oracle,
    strict_quasiconcavity_oracle, ConcavityComparison,
};
use crate::property_n::{conjecture_mode, PropertyNComparison, PropertyNError};
use crate::report;
use crate::trace::{trace_level, Trace, TraceError};

/// Residual tolerance for decomposition validation; matches the accuracy
/// of a central-difference gradient at the default step.
pub const VALIDATION_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
#[error("{0}")]
pub struct UsageError(pub String);

impl From<crate::config::ConfigError> for UsageError {
    fn from(e: crate::config::ConfigError) -> Self {
        UsageError(e.to_string())
    }
}

pub struct RunOutput {
    /// `None` for artifacts that are not verdicts (a successful trace).
    pub verdict: Option<Verdict>,
    pub rendered: String,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        self.verdict.map(|v| v.exit_code()).unwrap_or(0)
    }
}

enum Artifact {
    Report(CertReport<f64>),
    Validation(ValidationReport<f64>, ReportMeta),
    PropertyN(PropertyNComparison<f64>, ReportMeta),
    Concavity(ConcavityComparison<f64>, ReportMeta),
    Trace(Trace<f64>, ScalarField<f64>, ReportMeta),
}

struct Prepared {
    f: ScalarField<f64>,
    pair: GradientDecomposition<f64>,
    domain: BoxDomain<f64>,
    /// Whether g/λ came from somewhere that needs validation (a builtin
    /// pair or user expressions) rather than the trivial `g = ∇f, λ ≡ 1`.
    pair_is_explicit: bool,
    fd_used: bool,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared, UsageError> {
    let corpus = builtin_corpus();
    let entry = find_entry(&corpus, &cfg.function).map(|i| &corpus[i]);

    let domain = match (&cfg.domain, entry.as_ref()) {
        (Some(text), _) => {
            let (lo, hi) = parse_domain(text)?;
            BoxDomain::new(lo, hi).map_err(|e| UsageError(e.to_string()))?
        }
        (None, Some(e)) => e.domain.clone(),
        (None, None) => {
            return Err(UsageError(
                "--domain is required when the function is not a builtin".into(),
            ))
        }
    };

    let f = match entry.as_ref() {
        Some(e) => {
            if e.dim != domain.dim() {
                return Err(UsageError(format!(
                    "builtin `{}` has dimension {}, domain has {}",
                    e.name,
                    e.dim,
                    domain.dim()
                )));
            }
            e.field.clone()
        }
        None => {
            let tree = expr::parse(&cfg.function)
                .map_err(|e| UsageError(format!("--function: {e}")))?;
            if tree.min_dim() > domain.dim() {
                return Err(UsageError(format!(
                    "expression uses x{} but the domain has dimension {}",
                    tree.min_dim(),
                    domain.dim()
                )));
            }
            expr::field_from_expr(tree, domain.dim())
        }
    };

    let (pair, pair_is_explicit) = match &cfg.g {
        Some(gtext) => {
            let components: Vec<&str> = gtext.split(';').map(str::trim).collect();
            if components.len() != domain.dim() {
                return Err(UsageError(format!(
                    "--g has {} component(s), domain has dimension {}",
                    components.len(),
                    domain.dim()
                )));
            }
            let mut trees = Vec::new();
            for c in &components {
                let tree =
                    expr::parse(c).map_err(|e| UsageError(format!("--g component `{c}`: {e}")))?;
                if tree.min_dim() > domain.dim() {
                    return Err(UsageError(format!("--g component `{c}` exceeds the dimension")));
                }
                trees.push(tree);
            }
            let lambda_tree = match &cfg.lambda {
                Some(ltext) => {
                    let tree = expr::parse(ltext)
                        .map_err(|e| UsageError(format!("--lambda: {e}")))?;
                    if tree.min_dim() > domain.dim() {
                        return Err(UsageError("--lambda exceeds the dimension".into()));
                    }
                    tree
                }
                None => expr::parse("1").expect("constant"),
            };
            let trees = Arc::new(trees);
            let g = move |x: &[f64]| -> Vec<f64> {
                trees.iter().map(|t| expr::eval(t, x).unwrap_or(f64::NAN)).collect()
            };
            let lambda =
                move |x: &[f64]| -> f64 { expr::eval(&lambda_tree, x).unwrap_or(f64::NAN) };
            (GradientDecomposition::new(g, lambda), true)
        }
        None => match entry.as_ref() {
            Some(e) => (e.pair.clone(), true),
            None => (GradientDecomposition::from_field_gradient(&f, cfg.fd_step), false),
        },
    };

    let fd_used = !f.has_analytic_gradient() || pair.uses_fd();

    // expressions must be evaluable across the sample lattice before any
    // mode runs; NaN here means a domain mismatch, not a verdict
    let probe = grid_points(&domain, &GridSpec::lattice(5), 4.0 * cfg.fd_step);
    for p in &probe {
        if !f.eval(p).is_finite() {
            return Err(UsageError(format!(
                "function is not evaluable on the domain (non-finite value near {p:?})"
            )));
        }
        if pair_is_explicit {
            let g = pair.g_at(p);
            let l = pair.lambda_at(p);
            if g.iter().any(|v| !v.is_finite()) || !l.is_finite() {
                return Err(UsageError(format!(
                    "g or lambda is not evaluable on the domain (non-finite value near {p:?})"
                )));
            }
        }
    }

    Ok(Prepared { f, pair, domain, pair_is_explicit, fd_used })
}

fn grid_spec(cfg: &RunConfig) -> GridSpec {
    GridSpec::seeded(cfg.grid, cfg.seed, cfg.random_points)
}

fn precondition_report(mode: Mode, cfg: &RunConfig, note: String) -> CertReport<f64> {
    CertReport {
        mode,
        verdict: Verdict::PreconditionFailed,
        margins: Vec::new(),
        witnesses: Vec::new(),
        tolerances: Tolerances::new(cfg.tol, cfg.fd_step),
        grid: GridMeta::from_spec(&grid_spec(cfg), 0),
        metadata: ReportMeta::new(false).note(note),
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, UsageError> {
    let prepared = prepare(cfg)?;
    let Prepared { f, pair, domain, pair_is_explicit, fd_used } = prepared;
    let spec = grid_spec(cfg);
    let meta = || ReportMeta::new(fd_used);

    // an explicitly supplied decomposition must hold before any other mode
    // may rely on it
    if pair_is_explicit && cfg.mode != Mode::Validate {
        let v = validate_pair(&f, &pair, &domain, &spec, VALIDATION_TOL, cfg.fd_step);
        if !v.passed() {
            let m = meta().note(format!(
                "decomposition failed validation; `{}` was not run",
                cfg.mode.as_str()
            ));
            return render(cfg, Artifact::Validation(v, m));
        }
    }

    let artifact = match cfg.mode {
        Mode::Validate => {
            let v = validate_pair(&f, &pair, &domain, &spec, VALIDATION_TOL, cfg.fd_step);
            Artifact::Validation(v, meta())
        }
        Mode::Theorem1 => {
            Artifact::Report(certify_theorem1(&pair, &domain, &spec, cfg.tol, cfg.fd_step))
        }
        Mode::Theorem2 => {
            Artifact::Report(certify_theorem2(&pair, &domain, &spec, cfg.tol, cfg.fd_step))
        }
        Mode::Lemma1 => {
            let point_text = cfg
                .point
                .as_ref()
                .ok_or_else(|| UsageError("lemma1 needs --point".into()))?;
            let x_star = parse_point(point_text)?;
            if x_star.len() != domain.dim() {
                return Err(UsageError("--point dimension does not match the domain".into()));
            }
            if !domain.contains_closed(&x_star) {
                return Err(UsageError("--point lies outside the domain box".into()));
            }
            match lemma1_check(&f, &x_star, &domain, &spec, cfg.tol, cfg.fd_step) {
                Ok(r) => Artifact::Report(r),
                Err(FieldError::VanishingGradient { norm, tol }) => {
                    Artifact::Report(precondition_report(
                        Mode::Lemma1,
                        cfg,
                        format!("gradient norm {norm:e} at x* is at or below {tol:e}"),
                    ))
                }
                Err(e) => return Err(UsageError(e.to_string())),
            }
        }
        Mode::PropertyN => match conjecture_mode(&pair, &domain, &spec, cfg.tol, cfg.fd_step) {
            Ok(cmp) => Artifact::PropertyN(cmp, meta().experimental()),
            Err(PropertyNError::PreconditionFailed { point, value, tol }) => {
                Artifact::Report(precondition_report(
                    Mode::PropertyN,
                    cfg,
                    format!("|g1| = {value:e} at or below {tol:e} at {point:?}"),
                ))
            }
            Err(e) => return Err(UsageError(e.to_string())),
        },
        Mode::Oracle => {
            let r = match cfg.oracle {
                OracleVariant::Quasi => {
                    quasiconcavity_oracle(&f, &domain, cfg.trials, cfg.seed, cfg.tol)
                }
                OracleVariant::Strict => {
                    strict_quasiconcavity_oracle(&f, &domain, cfg.trials, cfg.seed, cfg.tol)
                }
                OracleVariant::Concave => {
                    concavity_oracle(&f, &domain, cfg.trials, cfg.seed, cfg.tol)
                }
            };
            Artifact::Report(r)
        }
        Mode::Concavity => {
            let cmp = concavity_conjecture_mode(
                &f, &pair, &domain, &spec, cfg.trials, cfg.seed, cfg.tol, cfg.fd_step,
            );
            Artifact::Concavity(cmp, meta().experimental())
        }
        Mode::Trace => {
            if domain.dim() != 2 {
                return Err(UsageError("trace mode needs a two-dimensional domain".into()));
            }
            let level = cfg.level.ok_or_else(|| UsageError("trace needs --level".into()))?;
            let (lo, hi) = match &cfg.x1_range {
                Some(r) => parse_range(r)?,
                None => (domain.lower()[0], domain.upper()[0]),
            };
            if !(lo <= cfg.anchor && cfg.anchor <= hi) {
                return Err(UsageError(format!(
                    "--anchor {} is outside the x1 range {lo}:{hi}",
                    cfg.anchor
                )));
            }
            match trace_level(&pair, cfg.anchor, level, lo, hi, cfg.step, &domain) {
                Ok(t) => Artifact::Trace(t, f.clone(), meta()),
                Err(e @ TraceError::StartOutsideDomain { .. }) => {
                    return Err(UsageError(e.to_string()))
                }
                Err(e @ TraceError::DegenerateSlope { .. }) => Artifact::Report(
                    precondition_report(Mode::Trace, cfg, e.to_string()),
                ),
            }
        }
    };
    render(cfg, artifact)
}

fn render(cfg: &RunConfig, artifact: Artifact) -> Result<RunOutput, UsageError> {
    if cfg.format == OutputFormat::Csv && !matches!(artifact, Artifact::Trace(..)) {
        return Err(UsageError("csv output is only available for trace mode".into()));
    }
    let (verdict, rendered) = match &artifact {
        Artifact::Report(r) => {
            let text = match cfg.format {
                OutputFormat::Json => pretty(report::report_json(r)),
                _ => report::report_text(r),
            };
            (Some(r.verdict), text)
        }
        Artifact::Validation(v, meta) => {
            let verdict = if v.passed() { Verdict::Certified } else { Verdict::Refuted };
            let text = match cfg.format {
                OutputFormat::Json => pretty(report::validation_json(v, meta)),
                _ => report::validation_text(v),
            };
            (Some(verdict), text)
        }
        Artifact::PropertyN(cmp, meta) => {
            let text = match cfg.format {
                OutputFormat::Json => pretty(report::property_n_json(cmp, meta)),
                _ => report::property_n_text(cmp),
            };
            (Some(Verdict::Undetermined), text)
        }
        Artifact::Concavity(cmp, meta) => {
            let text = match cfg.format {
                OutputFormat::Json => pretty(report::concavity_json(cmp, meta)),
                _ => report::concavity_text(cmp),
            };
            (Some(Verdict::Undetermined), text)
        }
        Artifact::Trace(t, f, meta) => {
            let text = match cfg.format {
                OutputFormat::Json => pretty(report::trace_json(t, f, meta)),
                OutputFormat::Csv => report::trace_csv(t, f),
                OutputFormat::Text => report::trace_text(t, f),
            };
            (None, text)
        }
    };
    Ok(RunOutput { verdict, rendered })
}

fn pretty(v: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("report serialization");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigOverlay;

    fn cfg_from(text: &str) -> RunConfig {
        ConfigOverlay::from_text(text).unwrap().resolve().unwrap()
    }

    #[test]
    fn theorem1_on_the_builtin_piecewise_entry_certifies() {
        let out = run(&cfg_from("mode = theorem1\nfunction = debreu\nseed = 7\n")).unwrap();
        assert_eq!(out.verdict, Some(Verdict::Certified));
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn oracle_on_the_quartic_expression_refutes() {
        let out = run(&cfg_from(
            "mode = oracle\nfunction = x1^4\ndomain = x1:-1:1,x2:-1:1\ntrials = 2000\nseed = 7\n",
        ))
        .unwrap();
        assert_eq!(out.verdict, Some(Verdict::Refuted));
        assert_eq!(out.exit_code(), 1);
    }

    #[test]
    fn theorem1_on_the_quartic_hits_the_precondition() {
        let out =
            run(&cfg_from("mode = theorem1\nfunction = quartic_x1\nseed = 7\n")).unwrap();
        assert_eq!(out.verdict, Some(Verdict::PreconditionFailed));
        assert_eq!(out.exit_code(), 3);
    }

    #[test]
    fn theorem2_on_katzner_is_undetermined() {
        let out = run(&cfg_from("mode = theorem2\nfunction = katzner\n")).unwrap();
        assert_eq!(out.verdict, Some(Verdict::Undetermined));
        assert_eq!(out.exit_code(), 2);
    }

    #[test]
    fn unknown_function_is_a_usage_error() {
        let err = run(&cfg_from("mode = theorem1\nfunction = not_a_builtin ?\n")).unwrap_err();
        assert!(err.0.contains("--function"), "{}", err.0);
    }

    #[test]
    fn missing_domain_for_an_expression_is_a_usage_error() {
        let err = run(&cfg_from("mode = oracle\nfunction = x1^2\n")).unwrap_err();
        assert!(err.0.contains("--domain"), "{}", err.0);
    }

    #[test]
    fn unevaluable_expression_is_a_usage_error() {
        let err = run(&cfg_from(
            "mode = oracle\nfunction = log(x1)\ndomain = x1:-1:1,x2:-1:1\n",
        ))
        .unwrap_err();
        assert!(err.0.contains("not evaluable"), "{}", err.0);
    }

    #[test]
    fn a_wrong_user_decomposition_is_rejected_by_validation_first() {
        let out = run(&cfg_from(
            "mode = theorem1\nfunction = x2\ndomain = x1:-1:1,x2:-1:1\ng = 0; 2\nlambda = 1\n",
        ))
        .unwrap();
        assert_eq!(out.verdict, Some(Verdict::Refuted));
        assert!(out.rendered.contains("validate"));
    }

    #[test]
    fn a_correct_user_decomposition_reaches_the_requested_mode() {
        // g = (0, 2), lambda = 1/2 is a valid decomposition of f = x2
        let out = run(&cfg_from(
            "mode = theorem1\nfunction = x2\ndomain = x1:-1:1,x2:-1:1\ng = 0; 2\nlambda = 0.5\n",
        ))
        .unwrap();
        assert_eq!(out.verdict, Some(Verdict::Certified));
    }

    #[test]
    fn trace_produces_csv_rows() {
        let out = run(&cfg_from(
            "mode = trace\nfunction = debreu\nlevel = 0.5\nx1_range = 0:0.4\nstep = 0.001\nformat = csv\n",
        ))
        .unwrap();
        assert_eq!(out.verdict, None);
        assert_eq!(out.exit_code(), 0);
        let mut lines = out.rendered.lines();
        assert_eq!(lines.next(), Some("x1,x2,f"));
        assert!(out.rendered.lines().count() > 400);
    }

    #[test]
    fn csv_outside_trace_mode_is_rejected() {
        let err =
            run(&cfg_from("mode = theorem1\nfunction = debreu\nformat = csv\n")).unwrap_err();
        assert!(err.0.contains("csv"), "{}", err.0);
    }

    #[test]
    fn lemma1_needs_a_point() {
        let err = run(&cfg_from("mode = lemma1\nfunction = katzner\n")).unwrap_err();
        assert!(err.0.contains("--point"), "{}", err.0);
    }

    #[test]
    fn property_n_mode_fails_its_precondition_across_the_seam() {
        // g1 = 0 on the half of the default box where x2 <= 0
        let out = run(&cfg_from("mode = property_n\nfunction = debreu\n")).unwrap();
        assert_eq!(out.verdict, Some(Verdict::PreconditionFailed));
    }

    #[test]
    fn property_n_mode_runs_on_a_positive_subbox() {
        let out = run(&cfg_from(
            "mode = property_n\nfunction = debreu\ndomain = x1:-0.4:-0.1,x2:0.2:0.5\ngrid = 7\n",
        ))
        .unwrap();
        assert_eq!(out.verdict, Some(Verdict::Undetermined));
        assert!(out.rendered.contains("EXPERIMENTAL"));
    }
}
