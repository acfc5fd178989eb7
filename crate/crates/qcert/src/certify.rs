//! Grid certification of quasi-concavity.
//!
//! The central test: at a point `x`, restrict the symmetric part of `Dg(x)`
//! to the kernel of `g(x)` and look at the largest eigenvalue. Non-positive
//! at every sampled point supports quasi-concavity; strictly negative
//! everywhere supports strict quasi-concavity. Verdicts are always relative
//! to the sampled grid — no interval certification is attempted — and an
//! `undetermined` band between `tol` and `10·tol` keeps the answer honest
//! where a grid test cannot distinguish a true zero margin from a small
//! positive one.

use crate::field::{
    grid_points, BoxDomain, FieldError, GradientDecomposition, GridSpec, ScalarField,
};
use crate::linalg;
use crate::real::Real;
use crate::rng::{SplitMix64, GENERATOR_NAME};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const VIOLATION_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Validate,
    Theorem1,
    Theorem2,
    Lemma1,
    PropertyN,
    Oracle,
    Concavity,
    Trace,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Validate => "validate",
            Mode::Theorem1 => "theorem1",
            Mode::Theorem2 => "theorem2",
            Mode::Lemma1 => "lemma1",
            Mode::PropertyN => "property_n",
            Mode::Oracle => "oracle",
            Mode::Concavity => "concavity",
            Mode::Trace => "trace",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Some(match s {
            "validate" => Mode::Validate,
            "theorem1" => Mode::Theorem1,
            "theorem2" => Mode::Theorem2,
            "lemma1" => Mode::Lemma1,
            "property_n" => Mode::PropertyN,
            "oracle" => Mode::Oracle,
            "concavity" => Mode::Concavity,
            "trace" => Mode::Trace,
            _ => return None,
        })
    }
}

/// The honest outcome set for grid-sampled tests of universally quantified
/// conditions. `NoViolation` is the sampling oracles' non-refuting outcome:
/// sampling can refute, it can never certify.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Refuted,
    Undetermined,
    PreconditionFailed,
    NoViolation,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::Refuted => "refuted",
            Verdict::Undetermined => "undetermined",
            Verdict::PreconditionFailed => "precondition_failed",
            Verdict::NoViolation => "no_violation",
        }
    }

    /// Process exit code: 0 pass, 1 refuted, 2 undetermined, 3 precondition.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Certified | Verdict::NoViolation => 0,
            Verdict::Refuted => 1,
            Verdict::Undetermined => 2,
            Verdict::PreconditionFailed => 3,
        }
    }
}

/// Per-point result: the largest eigenvalue of the kernel-restricted
/// symmetric form, plus the gradient norm that gates the test.
#[derive(Clone, Debug)]
pub struct PointMargin<R> {
    pub x: Vec<R>,
    pub max_kernel_eig: R,
    pub grad_norm: R,
}

/// Structured violation record. The fields follow the sampling-oracle shape
/// `(x, y, t, lhs, rhs, gap)`; grid modes reuse it with `y` holding the
/// violating direction and `t = 0`.
#[derive(Clone, Debug)]
pub struct Witness<R> {
    pub x: Vec<R>,
    pub y: Vec<R>,
    pub t: R,
    pub lhs: R,
    pub rhs: R,
    pub gap: R,
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerances<R> {
    pub tol: R,
    pub violation_threshold: R,
    pub fd_step: R,
}

impl<R: Real> Tolerances<R> {
    pub fn new(tol: R, fd_step: R) -> Self {
        Self { tol, violation_threshold: tol * R::of(VIOLATION_FACTOR), fd_step }
    }
}

#[derive(Clone, Debug, Default)]
pub struct GridMeta {
    pub points_per_axis: usize,
    pub random_points: usize,
    pub rng_seed: u64,
    pub total_points: usize,
    pub trials: Option<usize>,
}

impl GridMeta {
    pub fn from_spec(spec: &GridSpec, total: usize) -> Self {
        Self {
            points_per_axis: spec.points_per_axis,
            random_points: spec.random_points,
            rng_seed: spec.rng_seed,
            total_points: total,
            trials: None,
        }
    }

    pub fn trials_only(trials: usize, seed: u64) -> Self {
        Self { rng_seed: seed, trials: Some(trials), ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct ReportMeta {
    pub fd_used: bool,
    pub generator: &'static str,
    pub version: &'static str,
    pub experimental: bool,
    pub notes: Vec<String>,
}

impl ReportMeta {
    pub fn new(fd_used: bool) -> Self {
        Self {
            fd_used,
            generator: GENERATOR_NAME,
            version: env!("CARGO_PKG_VERSION"),
            experimental: false,
            notes: Vec::new(),
        }
    }

    pub fn experimental(mut self) -> Self {
        self.experimental = true;
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }
}

#[derive(Clone, Debug)]
pub struct CertReport<R> {
    pub mode: Mode,
    pub verdict: Verdict,
    pub margins: Vec<PointMargin<R>>,
    pub witnesses: Vec<Witness<R>>,
    pub tolerances: Tolerances<R>,
    pub grid: GridMeta,
    pub metadata: ReportMeta,
}

impl<R: Real> CertReport<R> {
    pub fn max_margin(&self) -> Option<R> {
        self.margins.iter().map(|m| m.max_kernel_eig).fold(None, |acc, v| {
            Some(match acc {
                None => v,
                Some(a) => a.max(v),
            })
        })
    }

    /// Margin record closest (Euclidean) to a query point.
    pub fn margin_near(&self, x: &[R]) -> Option<&PointMargin<R>> {
        self.margins.iter().min_by(|a, b| {
            let da = dist2(&a.x, x);
            let db = dist2(&b.x, x);
            da.partial_cmp(&db).expect("finite grid points")
        })
    }
}

fn dist2<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).fold(R::zero(), |acc, (&p, &q)| acc + (p - q) * (p - q))
}

/// Largest eigenvalue of `sym(Dg(x))` restricted to the kernel of `g(x)`,
/// together with the unit direction attaining it.
///
/// Errors with `VanishingGradient` when `‖g(x)‖ ≤ tol`: the non-strict test
/// requires a nonvanishing derivative at every point.
pub(crate) fn kernel_margin<R: Real>(
    pair: &GradientDecomposition<R>,
    x: &[R],
    tol: R,
    fd_step: R,
) -> Result<(PointMargin<R>, Vec<R>), FieldError> {
    let g = pair.g_at(x);
    let gn = linalg::norm(&g);
    if !(gn > tol) {
        return Err(FieldError::VanishingGradient { norm: gn.as_f64(), tol: tol.as_f64() });
    }
    let basis = linalg::kernel_basis(&g, tol).expect("norm checked above");
    if basis.is_empty() {
        // one-dimensional domain: the kernel is trivial, the condition vacuous
        return Ok((
            PointMargin { x: x.to_vec(), max_kernel_eig: R::zero(), grad_norm: gn },
            vec![R::zero(); x.len()],
        ));
    }
    let sym = pair.jacobian_at(x, fd_step).symmetric_part();
    let k = linalg::project_symmetric(&sym, &basis);
    let (vals, vecs) =
        linalg::eig_symmetric_full(&k, R::of(1e-6)).expect("projection is symmetric");
    let top = vals.len() - 1;
    let mut dir = vec![R::zero(); x.len()];
    for (a, w) in basis.iter().enumerate() {
        let c = vecs.get(a, top);
        for (d, &wi) in dir.iter_mut().zip(w) {
            *d = *d + c * wi;
        }
    }
    Ok((
        PointMargin { x: x.to_vec(), max_kernel_eig: vals[top], grad_norm: gn },
        dir,
    ))
}

/// Pointwise non-strict test. Passes at `x` iff the returned
/// `max_kernel_eig` is at most `tol`.
pub fn theorem1_point<R: Real>(
    pair: &GradientDecomposition<R>,
    x: &[R],
    tol: R,
    fd_step: R,
) -> Result<PointMargin<R>, FieldError> {
    kernel_margin(pair, x, tol, fd_step).map(|(m, _)| m)
}

fn fd_inset<R: Real>(pair: &GradientDecomposition<R>, fd_step: R) -> R {
    if pair.uses_fd() {
        fd_step * R::of(4.0)
    } else {
        R::zero()
    }
}

/// Grid version of the non-strict test.
///
/// `certified` when every margin is at most `tol`; `refuted` when some
/// margin exceeds `10·tol` (the first such grid point and its worst kernel
/// direction become the witness); `undetermined` for margins caught in the
/// band; `precondition_failed` when `‖g‖ ≤ tol` anywhere on the grid.
pub fn certify_theorem1<R: Real>(
    pair: &GradientDecomposition<R>,
    domain: &BoxDomain<R>,
    grid: &GridSpec,
    tol: R,
    fd_step: R,
) -> CertReport<R> {
    let points = grid_points(domain, grid, fd_inset(pair, fd_step));
    let tolerances = Tolerances::new(tol, fd_step);
    let mut margins = Vec::with_capacity(points.len());
    let mut witnesses = Vec::new();
    let mut vanished = false;
    let mut max_margin = R::neg_infinity();
    for p in &points {
        match kernel_margin(pair, p, tol, fd_step) {
            Ok((m, dir)) => {
                if m.max_kernel_eig > tolerances.violation_threshold && witnesses.is_empty() {
                    witnesses.push(Witness {
                        x: p.clone(),
                        y: dir,
                        t: R::zero(),
                        lhs: m.max_kernel_eig,
                        rhs: tolerances.violation_threshold,
                        gap: m.max_kernel_eig - tolerances.violation_threshold,
                    });
                }
                max_margin = max_margin.max(m.max_kernel_eig);
                margins.push(m);
            }
            Err(_) => {
                vanished = true;
                margins.push(PointMargin {
                    x: p.clone(),
                    max_kernel_eig: R::zero(),
                    grad_norm: pair.g_norm_at(p),
                });
            }
        }
    }
    let verdict = if vanished {
        Verdict::PreconditionFailed
    } else if !witnesses.is_empty() {
        Verdict::Refuted
    } else if max_margin <= tol {
        Verdict::Certified
    } else {
        Verdict::Undetermined
    };
    let mut metadata = ReportMeta::new(pair.uses_fd());
    if vanished {
        metadata = metadata.note("gradient vanished on the grid; the non-strict test does not apply");
    }
    CertReport {
        mode: Mode::Theorem1,
        verdict,
        margins,
        witnesses,
        tolerances,
        grid: GridMeta::from_spec(grid, points.len()),
        metadata,
    }
}

/// Grid version of the strict test.
///
/// `certified` when every margin is at most `-tol`; anything else is
/// `undetermined` — never `refuted`, the condition is sufficient only.
/// A vanishing `g(x)` is allowed here: the kernel becomes the whole space
/// and the test at that point is full negative definiteness of `sym(Dg)`.
pub fn certify_theorem2<R: Real>(
    pair: &GradientDecomposition<R>,
    domain: &BoxDomain<R>,
    grid: &GridSpec,
    tol: R,
    fd_step: R,
) -> CertReport<R> {
    let points = grid_points(domain, grid, fd_inset(pair, fd_step));
    let tolerances = Tolerances::new(tol, fd_step);
    let mut margins = Vec::with_capacity(points.len());
    let mut all_strict = true;
    for p in &points {
        let margin = match kernel_margin(pair, p, tol, fd_step) {
            Ok((m, _)) => m,
            Err(_) => {
                let sym = pair.jacobian_at(p, fd_step).symmetric_part();
                let vals = linalg::eig_symmetric(&sym, R::of(1e-6))
                    .expect("symmetrized Jacobian");
                PointMargin {
                    x: p.clone(),
                    max_kernel_eig: *vals.last().expect("non-empty spectrum"),
                    grad_norm: pair.g_norm_at(p),
                }
            }
        };
        if !(margin.max_kernel_eig <= -tol) {
            all_strict = false;
        }
        margins.push(margin);
    }
    let verdict = if all_strict { Verdict::Certified } else { Verdict::Undetermined };
    CertReport {
        mode: Mode::Theorem2,
        verdict,
        margins,
        witnesses: Vec::new(),
        tolerances,
        grid: GridMeta::from_spec(grid, points.len()),
        metadata: ReportMeta::new(pair.uses_fd()),
    }
}

const SLICE_STREAM_SALT: u64 = 0x736c_6963; // hyperplane-slice random draws

/// Hyperplane-maximum spot check: with `x' = ∇f(x*)`, sample the slice
/// `{x in the box : ⟨x − x*, x'⟩ = 0}` and verify `f(x*) ≥ f(x) − tol`.
///
/// For a quasi-concave field a refutation here indicates either a bug or
/// genuine non-quasi-concavity, which makes this a useful diagnostic.
pub fn lemma1_check<R: Real>(
    f: &ScalarField<R>,
    x_star: &[R],
    domain: &BoxDomain<R>,
    grid: &GridSpec,
    tol: R,
    fd_step: R,
) -> Result<CertReport<R>, FieldError> {
    let xp = f.gradient(domain, x_star, fd_step)?;
    let gn = linalg::norm(&xp);
    if !(gn > tol) {
        return Err(FieldError::VanishingGradient { norm: gn.as_f64(), tol: tol.as_f64() });
    }
    let basis = linalg::kernel_basis(&xp, tol).expect("norm checked above");
    let f_star = f.eval(x_star);
    let rho = domain.diagonal() * R::of(0.5);
    let m = basis.len();
    let ppa = grid.points_per_axis;
    let denom = R::of((ppa - 1) as f64);

    let point_from = |coeffs: &[R]| -> Vec<R> {
        let mut p = x_star.to_vec();
        for (c, b) in coeffs.iter().zip(&basis) {
            for (pi, &bi) in p.iter_mut().zip(b) {
                *pi = *pi + *c * bi;
            }
        }
        p
    };

    let mut coeff_sets: Vec<Vec<R>> = Vec::new();
    let total = ppa.pow(m as u32);
    for flat in 0..total {
        let mut rem = flat;
        let mut c = vec![R::zero(); m];
        for a in (0..m).rev() {
            let k = rem % ppa;
            rem /= ppa;
            c[a] = -rho + (rho + rho) * R::of(k as f64) / denom;
        }
        coeff_sets.push(c);
    }
    let mut rng = SplitMix64::stream(grid.rng_seed ^ SLICE_STREAM_SALT, 0);
    for _ in 0..grid.random_points {
        let c: Vec<R> = (0..m)
            .map(|_| R::of(rng.uniform(-rho.as_f64(), rho.as_f64())))
            .collect();
        coeff_sets.push(c);
    }

    let mut kept = 0usize;
    let mut max_excess = R::neg_infinity();
    let mut witnesses = Vec::new();
    for c in &coeff_sets {
        let p = point_from(c);
        if !domain.contains_closed(&p) {
            continue;
        }
        kept += 1;
        let fx = f.eval(&p);
        max_excess = max_excess.max(fx - f_star);
        if fx > f_star + tol && witnesses.is_empty() {
            witnesses.push(Witness {
                x: x_star.to_vec(),
                y: p,
                t: R::one(),
                lhs: fx,
                rhs: f_star,
                gap: fx - f_star,
            });
        }
    }
    let verdict = if witnesses.is_empty() { Verdict::Certified } else { Verdict::Refuted };
    let metadata = ReportMeta::new(!f.has_analytic_gradient()).note(format!(
        "slice samples kept: {kept} of {}; max f excess over f(x*): {:e}",
        coeff_sets.len(),
        max_excess.as_f64()
    ));
    Ok(CertReport {
        mode: Mode::Lemma1,
        verdict,
        margins: Vec::new(),
        witnesses,
        tolerances: Tolerances::new(tol, fd_step),
        grid: GridMeta::from_spec(grid, kept),
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{BoxDomain, GridSpec, ScalarField};
    use crate::linalg::Matrix;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
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
        .with_jacobian(|x: &[f64]| {
            let off = 3.0 * (x[0].powi(2) + x[1].powi(2));
            Matrix::from_rows(&[vec![6.0 * x[0] * x[1], off], vec![off, 6.0 * x[0] * x[1]]])
        })
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
        .with_jacobian(|x: &[f64]| {
            if x[1] <= 0.0 {
                Matrix::zeros(2, 2)
            } else {
                let s3 = (1.0 + x[1].powi(4)).powf(1.5);
                Matrix::from_rows(&[
                    vec![0.0, 2.0 * x[1] / s3],
                    vec![0.0, -2.0 * x[1].powi(3) / s3],
                ])
            }
        })
    }

    fn quartic_pair() -> GradientDecomposition<f64> {
        GradientDecomposition::new(
            |x: &[f64]| vec![4.0 * x[0].powi(3), 0.0],
            |_: &[f64]| 1.0,
        )
        .with_jacobian(|x: &[f64]| {
            Matrix::from_rows(&[vec![12.0 * x[0].powi(2), 0.0], vec![0.0, 0.0]])
        })
    }

    #[test]
    fn katzner_margin_at_the_flat_point_is_zero() {
        let m = theorem1_point(&katzner_pair(), &[1.0, 1.0], 1e-8, 1e-5).unwrap();
        assert_close(m.max_kernel_eig, 0.0, 1e-12);
        assert_close(m.grad_norm, 32.0_f64.sqrt(), 1e-12);
    }

    #[test]
    fn debreu_margin_matches_the_symbolic_value() {
        // kernel direction (1,-1)/sqrt(2); form value -sqrt(2)/2 per unit vector
        let m = theorem1_point(&debreu_pair(), &[0.0, 1.0], 1e-8, 1e-5).unwrap();
        assert_close(m.max_kernel_eig, -std::f64::consts::FRAC_1_SQRT_2, 1e-12);
    }

    #[test]
    fn debreu_margin_via_finite_differences() {
        let no_jac = GradientDecomposition::new(
            |x: &[f64]| debreu_pair().g_at(x),
            |x: &[f64]| debreu_pair().lambda_at(x),
        );
        let m = theorem1_point(&no_jac, &[0.0, 1.0], 1e-8, 1e-5).unwrap();
        assert_close(m.max_kernel_eig, -std::f64::consts::FRAC_1_SQRT_2, 1e-6);
    }

    #[test]
    fn quartic_gradient_vanishes() {
        let err = theorem1_point(&quartic_pair(), &[0.0, 0.3], 1e-8, 1e-5).unwrap_err();
        assert!(matches!(err, FieldError::VanishingGradient { .. }));
    }

    #[test]
    fn debreu_box_is_certified() {
        let domain = BoxDomain::new(vec![-0.5, -0.5], vec![0.5, 0.5]).unwrap();
        let report =
            certify_theorem1(&debreu_pair(), &domain, &GridSpec::lattice(21), 1e-8, 1e-5);
        assert_eq!(report.verdict, Verdict::Certified);
        assert!(report.max_margin().unwrap() <= 0.0);
    }

    #[test]
    fn convex_paraboloid_is_refuted_with_witness() {
        let pair = GradientDecomposition::new(
            |x: &[f64]| vec![2.0 * x[0], 2.0 * x[1]],
            |_: &[f64]| 1.0,
        )
        .with_jacobian(|_: &[f64]| {
            Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 2.0]])
        });
        let domain = BoxDomain::new(vec![1.0, 1.0], vec![2.0, 2.0]).unwrap();
        let report = certify_theorem1(&pair, &domain, &GridSpec::lattice(21), 1e-8, 1e-5);
        assert_eq!(report.verdict, Verdict::Refuted);
        let w = &report.witnesses[0];
        // Dg = 2I so the form value is 2 along any kernel direction
        assert_close(w.lhs, 2.0, 1e-9);
        assert!(w.gap > 0.0);
    }

    #[test]
    fn quartic_box_fails_the_precondition() {
        let domain = BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let report =
            certify_theorem1(&quartic_pair(), &domain, &GridSpec::lattice(21), 1e-8, 1e-5);
        assert_eq!(report.verdict, Verdict::PreconditionFailed);
        assert!(report.margins.iter().any(|m| m.grad_norm <= 1e-8));
    }

    #[test]
    fn strict_test_is_undetermined_on_katzner() {
        let domain = BoxDomain::new(vec![0.5, 0.5], vec![1.5, 1.5]).unwrap();
        let report =
            certify_theorem2(&katzner_pair(), &domain, &GridSpec::lattice(21), 1e-8, 1e-5);
        assert_eq!(report.verdict, Verdict::Undetermined);
        let near = report.margin_near(&[1.0, 1.0]).unwrap();
        assert_close(near.max_kernel_eig, 0.0, 1e-9);
    }

    #[test]
    fn strict_test_certifies_a_negative_definite_field() {
        let pair = GradientDecomposition::new(
            |x: &[f64]| vec![-2.0 * x[0], -2.0 * x[1]],
            |_: &[f64]| 1.0,
        )
        .with_jacobian(|_: &[f64]| {
            Matrix::from_rows(&[vec![-2.0, 0.0], vec![0.0, -2.0]])
        });
        let domain = BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let report = certify_theorem2(&pair, &domain, &GridSpec::lattice(21), 1e-8, 1e-5);
        // the gradient vanishes at the origin; the kernel there is the whole
        // space and sym(Dg) = -2I is still negative definite
        assert_eq!(report.verdict, Verdict::Certified);
        for m in &report.margins {
            assert_close(m.max_kernel_eig, -2.0, 1e-9);
        }
    }

    #[test]
    fn strict_test_is_undetermined_on_the_flat_branch() {
        let domain = BoxDomain::new(vec![-0.5, -0.5], vec![0.5, 0.5]).unwrap();
        let report =
            certify_theorem2(&debreu_pair(), &domain, &GridSpec::lattice(21), 1e-8, 1e-5);
        assert_eq!(report.verdict, Verdict::Undetermined);
    }

    #[test]
    fn lemma1_certifies_a_shifted_paraboloid() {
        let f = ScalarField::new(2, |x: &[f64]| -(x[0] - 1.0).powi(2) - x[1].powi(2))
            .with_gradient(|x: &[f64]| vec![-2.0 * (x[0] - 1.0), -2.0 * x[1]]);
        let domain = BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let report =
            lemma1_check(&f, &[0.0, 0.0], &domain, &GridSpec::lattice(21), 1e-9, 1e-5).unwrap();
        assert_eq!(report.verdict, Verdict::Certified);
    }

    #[test]
    fn lemma1_certifies_a_slice_constant_field() {
        let f = ScalarField::new(2, |x: &[f64]| x[0].powi(4))
            .with_gradient(|x: &[f64]| vec![4.0 * x[0].powi(3), 0.0]);
        let domain = BoxDomain::new(vec![0.05, -1.0], vec![2.0, 1.0]).unwrap();
        let report =
            lemma1_check(&f, &[1.0, 0.0], &domain, &GridSpec::lattice(21), 1e-9, 1e-5).unwrap();
        assert_eq!(report.verdict, Verdict::Certified);
    }

    #[test]
    fn lemma1_refutes_a_convex_field() {
        let f = ScalarField::new(2, |x: &[f64]| x[0].powi(2) + x[1].powi(2))
            .with_gradient(|x: &[f64]| vec![2.0 * x[0], 2.0 * x[1]]);
        let domain = BoxDomain::new(vec![0.5, -0.5], vec![1.5, 0.5]).unwrap();
        let report =
            lemma1_check(&f, &[1.0, 0.0], &domain, &GridSpec::lattice(21), 1e-9, 1e-5).unwrap();
        assert_eq!(report.verdict, Verdict::Refuted);
        let w = &report.witnesses[0];
        assert!(w.lhs > w.rhs);
        // slice is x1 = 1; e.g. f(1, 0.4) = 1.16 > 1
        assert_close(w.y[0], 1.0, 1e-9);
    }

    #[test]
    fn lemma1_rejects_a_vanishing_gradient() {
        let f = ScalarField::new(2, |x: &[f64]| x[0].powi(4))
            .with_gradient(|x: &[f64]| vec![4.0 * x[0].powi(3), 0.0]);
        let domain = BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let err =
            lemma1_check(&f, &[0.0, 0.0], &domain, &GridSpec::lattice(5), 1e-9, 1e-5).unwrap_err();
        assert!(matches!(err, FieldError::VanishingGradient { .. }));
    }

    #[test]
    fn margins_scale_linearly_with_the_pair() {
        // (g, λ) -> (c·g, λ/c) keeps decisions and scales margins by c
        let base = katzner_pair();
        let m0 = theorem1_point(&base, &[1.2, 0.7], 1e-8, 1e-5).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let scaled = GradientDecomposition::new(
                move |x: &[f64]| katzner_pair().g_at(x).iter().map(|v| c * v).collect(),
                move |x: &[f64]| katzner_pair().lambda_at(x) / c,
            )
            .with_jacobian(move |x: &[f64]| katzner_pair().jacobian_at(x, 1e-5).scaled(c));
            let m = theorem1_point(&scaled, &[1.2, 0.7], 1e-8, 1e-5).unwrap();
            let rel = (m.max_kernel_eig - c * m0.max_kernel_eig).abs()
                / (c * m0.max_kernel_eig).abs().max(1e-300);
            assert!(rel <= 1e-12, "c={c}: {} vs {}", m.max_kernel_eig, c * m0.max_kernel_eig);
        }
    }
}
