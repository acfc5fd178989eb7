//! Two-dimensional level-curve tracing.
//!
//! Integrates `dx₂/dx₁ = -g₁/g₂` with classical fixed-step RK4 from an
//! anchor point, in both directions across the requested `x₁` range. The
//! solution graph is a level set of any field whose gradient is parallel
//! to `g`, which is what [`level_consistency`] checks.

use thiserror::Error;

use crate::field::{BoxDomain, GradientDecomposition, ScalarField};
use crate::real::Real;

pub const DEFAULT_TRACE_STEP: f64 = 1e-3;
const SLOPE_FLOOR: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("|g2| = {value:e} at or below {SLOPE_FLOOR:e} at ({x1}, {x2}); the level curve is vertical there")]
    DegenerateSlope { x1: f64, x2: f64, value: f64 },
    #[error("start point ({x1}, {x2}) lies outside the domain box")]
    StartOutsideDomain { x1: f64, x2: f64 },
}

/// Polyline approximation of a level curve, samples ascending in `x₁` with
/// uniform spacing `step`, every sample inside the domain box.
#[derive(Clone, Debug)]
pub struct Trace<R> {
    pub samples: Vec<(R, R)>,
    pub anchor_x1: R,
    pub level: R,
    pub step: R,
    pub method: &'static str,
}

fn slope<R: Real>(pair: &GradientDecomposition<R>, x1: R, x2: R) -> Result<R, TraceError> {
    let g = pair.g_at(&[x1, x2]);
    if g[1].abs() <= R::of(SLOPE_FLOOR) {
        return Err(TraceError::DegenerateSlope {
            x1: x1.as_f64(),
            x2: x2.as_f64(),
            value: g[1].abs().as_f64(),
        });
    }
    Ok(-g[0] / g[1])
}

enum StepOutcome<R> {
    Next(R),
    LeftDomain,
}

fn rk4_step<R: Real>(
    pair: &GradientDecomposition<R>,
    domain: &BoxDomain<R>,
    x1: R,
    x2: R,
    h: R,
) -> Result<StepOutcome<R>, TraceError> {
    let half = h * R::of(0.5);
    let probe = |x1p: R, x2p: R| -> Result<Option<R>, TraceError> {
        if !domain.contains_closed(&[x1p, x2p]) {
            return Ok(None);
        }
        slope(pair, x1p, x2p).map(Some)
    };
    let k1 = match probe(x1, x2)? {
        Some(k) => k,
        None => return Ok(StepOutcome::LeftDomain),
    };
    let k2 = match probe(x1 + half, x2 + half * k1)? {
        Some(k) => k,
        None => return Ok(StepOutcome::LeftDomain),
    };
    let k3 = match probe(x1 + half, x2 + half * k2)? {
        Some(k) => k,
        None => return Ok(StepOutcome::LeftDomain),
    };
    let k4 = match probe(x1 + h, x2 + h * k3)? {
        Some(k) => k,
        None => return Ok(StepOutcome::LeftDomain),
    };
    let two = R::of(2.0);
    let six = R::of(6.0);
    Ok(StepOutcome::Next(x2 + h * (k1 + two * k2 + two * k3 + k4) / six))
}

/// Trace the level curve through `(anchor_x1, level)` across
/// `[x1_lo, x1_hi]`. Integration runs both directions from the anchor and
/// stops silently where the curve exits the box; a vertical tangent
/// (`|g₂|` at the floor) is an error instead.
pub fn trace_level<R: Real>(
    pair: &GradientDecomposition<R>,
    anchor_x1: R,
    level: R,
    x1_lo: R,
    x1_hi: R,
    step: R,
    domain: &BoxDomain<R>,
) -> Result<Trace<R>, TraceError> {
    assert!(step > R::zero(), "trace step must be positive");
    assert!(x1_lo <= anchor_x1 && anchor_x1 <= x1_hi, "anchor outside the x1 range");
    if !domain.contains_closed(&[anchor_x1, level]) {
        return Err(TraceError::StartOutsideDomain {
            x1: anchor_x1.as_f64(),
            x2: level.as_f64(),
        });
    }

    let max_steps = ((x1_hi - x1_lo) / step).as_f64().ceil() as usize + 2;
    let half_step = step * R::of(0.5);

    // forward sweep, anchor included
    let mut forward: Vec<(R, R)> = vec![(anchor_x1, level)];
    let (mut x1, mut x2) = (anchor_x1, level);
    for _ in 0..max_steps {
        if x1 + step > x1_hi + half_step {
            break;
        }
        match rk4_step(pair, domain, x1, x2, step)? {
            StepOutcome::Next(next) => {
                x1 = x1 + step;
                x2 = next;
                if !domain.contains_closed(&[x1, x2]) {
                    break;
                }
                forward.push((x1, x2));
            }
            StepOutcome::LeftDomain => break,
        }
    }

    // backward sweep
    let mut backward: Vec<(R, R)> = Vec::new();
    let (mut x1, mut x2) = (anchor_x1, level);
    for _ in 0..max_steps {
        if x1 - step < x1_lo - half_step {
            break;
        }
        match rk4_step(pair, domain, x1, x2, -step)? {
            StepOutcome::Next(next) => {
                x1 = x1 - step;
                x2 = next;
                if !domain.contains_closed(&[x1, x2]) {
                    break;
                }
                backward.push((x1, x2));
            }
            StepOutcome::LeftDomain => break,
        }
    }

    backward.reverse();
    backward.extend(forward);
    Ok(Trace { samples: backward, anchor_x1, level, step, method: "RK4" })
}

/// Maximum deviation of `f` along the trace from its value at the anchor.
pub fn level_consistency<R: Real>(trace: &Trace<R>, f: &ScalarField<R>) -> R {
    assert!(!trace.samples.is_empty(), "level_consistency needs a nonempty trace");
    let reference = f.eval(&[trace.anchor_x1, trace.level]);
    trace
        .samples
        .iter()
        .fold(R::zero(), |acc, &(x1, x2)| acc.max((f.eval(&[x1, x2]) - reference).abs()))
}

/// Minimum second central difference of `x₂` along the trace (raw, not
/// divided by `step²`). A strictly positive value is numerical evidence
/// that the level function is strictly convex.
pub fn convexity_probe<R: Real>(trace: &Trace<R>) -> R {
    assert!(trace.samples.len() >= 3, "convexity probe needs at least 3 samples");
    let mut min = R::infinity();
    for w in trace.samples.windows(3) {
        let second = w[2].1 - R::of(2.0) * w[1].1 + w[0].1;
        min = min.min(second);
    }
    min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn debreu_pair() -> GradientDecomposition<f64> {
        GradientDecomposition::new(
            |x: &[f64]| {
                if x[1] <= 0.0 {
                    vec![0.0, 1.0]
                } else {
                    let s = (1.0 + x[1].powi(4)).sqrt();
                    vec![x[1].powi(2) / s, 1.0 / s]
                }
            },
            |x: &[f64]| {
                if x[1] <= 0.0 {
                    1.0
                } else {
                    (1.0 + x[1].powi(4)).sqrt() / (1.0 - x[0] * x[1]).powi(2)
                }
            },
        )
    }

    fn debreu_f() -> ScalarField<f64> {
        ScalarField::new(2, |x: &[f64]| {
            if x[1] <= 0.0 {
                x[1]
            } else {
                x[1] / (1.0 - x[0] * x[1])
            }
        })
    }

    fn katzner_pair() -> GradientDecomposition<f64> {
        GradientDecomposition::new(
            |x: &[f64]| {
                vec![
                    3.0 * x[0].powi(2) * x[1] + x[1].powi(3),
                    x[0].powi(3) + 3.0 * x[0] * x[1].powi(2),
                ]
            },
            |_: &[f64]| 1.0,
        )
    }

    fn wide_box() -> BoxDomain<f64> {
        BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn debreu_trace_matches_the_closed_form() {
        // for the upper branch the level through (0, c) is x2 = c/(1 + c*x1)
        let c = 0.5;
        let trace =
            trace_level(&debreu_pair(), 0.0, c, 0.0, 0.4, 1e-3, &wide_box()).unwrap();
        for &(x1, x2) in &trace.samples {
            assert_close(x2, c / (1.0 + c * x1), 1e-6);
        }
        let at = trace.samples.iter().find(|&&(x1, _)| (x1 - 0.1).abs() < 1e-12).unwrap();
        assert_close(at.1, 0.5 / 1.05, 1e-6);
    }

    #[test]
    fn debreu_trace_is_flat_below_the_seam() {
        let trace =
            trace_level(&debreu_pair(), 0.0, -0.3, -0.4, 0.4, 1e-3, &wide_box()).unwrap();
        for &(_, x2) in &trace.samples {
            assert_close(x2, -0.3, 1e-12);
        }
    }

    #[test]
    fn katzner_trace_stays_on_its_level() {
        let domain = BoxDomain::new(vec![0.5, 0.5], vec![1.5, 1.5]).unwrap();
        let trace =
            trace_level(&katzner_pair(), 1.0, 1.0, 0.8, 1.2, 1e-3, &domain).unwrap();
        let f = ScalarField::new(2, |x: &[f64]| x[0].powi(3) * x[1] + x[0] * x[1].powi(3));
        let dev = level_consistency(&trace, &f);
        assert!(dev <= 1e-6, "max deviation {dev:e}");
    }

    #[test]
    fn perturbed_trace_is_detected() {
        let domain = BoxDomain::new(vec![0.5, 0.5], vec![1.5, 1.5]).unwrap();
        let mut trace =
            trace_level(&katzner_pair(), 1.0, 1.0, 0.8, 1.2, 1e-3, &domain).unwrap();
        for s in &mut trace.samples {
            s.1 += 0.01;
        }
        trace.level += 0.01;
        let f = ScalarField::new(2, |x: &[f64]| x[0].powi(3) * x[1] + x[0] * x[1].powi(3));
        assert!(level_consistency(&trace, &f) > 1e-3);
    }

    #[test]
    fn constant_field_has_zero_deviation() {
        let pair = GradientDecomposition::new(|_: &[f64]| vec![0.0, 1.0], |_: &[f64]| 1.0);
        let trace = trace_level(&pair, 0.0, 0.2, -0.5, 0.5, 1e-2, &wide_box()).unwrap();
        let f = ScalarField::new(2, |_: &[f64]| 1.25);
        assert_eq!(level_consistency(&trace, &f), 0.0);
    }

    #[test]
    fn katzner_level_function_is_strictly_convex() {
        let domain = BoxDomain::new(vec![0.5, 0.5], vec![1.5, 1.5]).unwrap();
        let trace =
            trace_level(&katzner_pair(), 1.0, 1.0, 0.8, 1.2, 1e-3, &domain).unwrap();
        assert!(convexity_probe(&trace) > 0.0);
    }

    #[test]
    fn linear_levels_have_vanishing_second_differences() {
        let pair = GradientDecomposition::new(|_: &[f64]| vec![1.0, 1.0], |_: &[f64]| 1.0);
        let trace = trace_level(&pair, 0.0, 0.1, -0.5, 0.5, 1e-2, &wide_box()).unwrap();
        assert!(convexity_probe(&trace).abs() <= 1e-10);
    }

    #[test]
    fn circle_arc_below_the_apex_is_convex() {
        // level sets of -x1^2 - x2^2 are circles; on the lower branch the
        // level function x2(x1) = -sqrt(r^2 - x1^2) opens upward
        let pair = GradientDecomposition::new(
            |x: &[f64]| vec![-2.0 * x[0], -2.0 * x[1]],
            |_: &[f64]| 1.0,
        );
        let trace = trace_level(&pair, 0.05, -0.6, 0.05, 0.5, 1e-3, &wide_box()).unwrap();
        assert!(trace.samples.len() > 100);
        assert!(convexity_probe(&trace) > 0.0);
    }

    #[test]
    fn vertical_tangent_is_an_error() {
        // g2 = -2*x2 crosses the slope floor where the circle turns vertical
        let pair = GradientDecomposition::new(
            |x: &[f64]| vec![-2.0 * x[0], -2.0 * x[1]],
            |_: &[f64]| 1.0,
        );
        let err = trace_level(&pair, 0.0, 0.0, -0.5, 0.5, 1e-2, &wide_box()).unwrap_err();
        assert!(matches!(err, TraceError::DegenerateSlope { .. }));
    }

    #[test]
    fn trace_truncates_at_the_box_silently() {
        // steep level curve exits through the bottom edge
        let pair = GradientDecomposition::new(|_: &[f64]| vec![4.0, 1.0], |_: &[f64]| 1.0);
        let trace = trace_level(&pair, 0.0, 0.0, -1.0, 1.0, 1e-2, &wide_box()).unwrap();
        let last = trace.samples.last().unwrap();
        assert!(last.0 < 1.0 - 1e-9, "trace should stop before the range end");
        for &(x1, x2) in &trace.samples {
            assert!(wide_box().contains_closed(&[x1, x2]));
        }
    }

    #[test]
    fn retracing_backwards_returns_to_the_start() {
        let domain = BoxDomain::new(vec![0.5, 0.5], vec![1.5, 1.5]).unwrap();
        let trace =
            trace_level(&katzner_pair(), 0.9, 1.1522, 0.9, 1.2, 1e-3, &domain).unwrap();
        let end = *trace.samples.last().unwrap();
        let back = trace_level(&katzner_pair(), end.0, end.1, 0.9, end.0, 1e-3, &domain).unwrap();
        let start = back.samples.first().unwrap();
        assert_close(start.1, 1.1522, 1e-6);
    }

    #[test]
    fn start_outside_the_box_is_rejected() {
        let err =
            trace_level(&katzner_pair(), 0.0, 5.0, 0.0, 0.4, 1e-3, &wide_box()).unwrap_err();
        assert!(matches!(err, TraceError::StartOutsideDomain { .. }));
    }

    #[test]
    fn halving_the_step_cuts_the_level_error_by_eight_or_more() {
        let domain = BoxDomain::new(vec![0.5, 0.5], vec![1.5, 1.5]).unwrap();
        let f = ScalarField::new(2, |x: &[f64]| x[0].powi(3) * x[1] + x[0] * x[1].powi(3));
        let dev = |step: f64| {
            let t = trace_level(&katzner_pair(), 1.0, 1.0, 0.6, 1.4, step, &domain).unwrap();
            level_consistency(&t, &f)
        };
        let coarse = dev(0.05);
        let fine = dev(0.025);
        assert!(
            coarse / fine >= 8.0,
            "RK4 order check: {coarse:e} / {fine:e} = {}",
            coarse / fine
        );
    }
}
