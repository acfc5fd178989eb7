//! Representations of the function under test, its gradient decomposition
//! `∇f(x) = λ(x)·g(x)`, the open box domain it lives on, and the
//! finite-difference machinery used when analytic derivatives are absent.

use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::real::Real;
use crate::rng::SplitMix64;

pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("finite-difference stencil leaves the domain at {point:?}")]
    DomainViolation { point: Vec<f64> },
    #[error("gradient norm {norm:e} is at or below tolerance {tol:e}")]
    VanishingGradient { norm: f64, tol: f64 },
    #[error("invalid domain: {0}")]
    BadDomain(String),
}

type EvalFn<R> = Arc<dyn Fn(&[R]) -> R + Send + Sync>;
type GradFn<R> = Arc<dyn Fn(&[R]) -> Vec<R> + Send + Sync>;
type JacFn<R> = Arc<dyn Fn(&[R]) -> Matrix<R> + Send + Sync>;

/// Evaluatable scalar field with an optional analytic gradient.
///
/// Evaluation closures must be safe to call concurrently at distinct points;
/// the struct is cheaply cloneable and shareable across threads.
#[derive(Clone)]
pub struct ScalarField<R: Real> {
    dim: usize,
    eval: EvalFn<R>,
    grad: Option<GradFn<R>>,
}

impl<R: Real> ScalarField<R> {
    pub fn new(dim: usize, eval: impl Fn(&[R]) -> R + Send + Sync + 'static) -> Self {
        assert!(dim >= 1, "field dimension must be positive");
        Self { dim, eval: Arc::new(eval), grad: None }
    }

    pub fn with_gradient(mut self, grad: impl Fn(&[R]) -> Vec<R> + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[R]) -> R {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn analytic_gradient(&self, x: &[R]) -> Option<Vec<R>> {
        self.grad.as_ref().map(|g| g(x))
    }

    /// Analytic gradient when present, otherwise a checked central
    /// finite difference.
    pub fn gradient(
        &self,
        domain: &BoxDomain<R>,
        x: &[R],
        step: R,
    ) -> Result<Vec<R>, FieldError> {
        match &self.grad {
            Some(g) => Ok(g(x)),
            None => fd_gradient(self, domain, x, step),
        }
    }

    pub(crate) fn eval_fn(&self) -> EvalFn<R> {
        Arc::clone(&self.eval)
    }
}

/// The decomposition `∇f(x) = λ(x)·g(x)`: a C¹ vector field `g` together
/// with a strictly positive scale field `λ`, plus an optional analytic
/// Jacobian of `g`.
#[derive(Clone)]
pub struct GradientDecomposition<R: Real> {
    g: GradFn<R>,
    lambda: EvalFn<R>,
    dg: Option<JacFn<R>>,
    fd_gradient_backed: bool,
}

impl<R: Real> GradientDecomposition<R> {
    pub fn new(
        g: impl Fn(&[R]) -> Vec<R> + Send + Sync + 'static,
        lambda: impl Fn(&[R]) -> R + Send + Sync + 'static,
    ) -> Self {
        Self { g: Arc::new(g), lambda: Arc::new(lambda), dg: None, fd_gradient_backed: false }
    }

    pub fn with_jacobian(mut self, dg: impl Fn(&[R]) -> Matrix<R> + Send + Sync + 'static) -> Self {
        self.dg = Some(Arc::new(dg));
        self
    }

    /// The fallback decomposition `g = ∇f`, `λ ≡ 1`.
    ///
    /// Uses the analytic gradient when the field has one; otherwise `g`
    /// becomes an (unchecked) central difference of `f`, and callers are
    /// expected to keep sample points a few steps inside the box.
    pub fn from_field_gradient(f: &ScalarField<R>, step: R) -> Self {
        if let Some(g) = &f.grad {
            let g = Arc::clone(g);
            Self {
                g: Arc::new(move |x: &[R]| g(x)),
                lambda: Arc::new(|_: &[R]| R::one()),
                dg: None,
                fd_gradient_backed: false,
            }
        } else {
            let eval = f.eval_fn();
            Self {
                g: Arc::new(move |x: &[R]| central_gradient(|y| eval(y), x, step)),
                lambda: Arc::new(|_: &[R]| R::one()),
                dg: None,
                fd_gradient_backed: true,
            }
        }
    }

    pub fn g_at(&self, x: &[R]) -> Vec<R> {
        (self.g)(x)
    }

    pub fn lambda_at(&self, x: &[R]) -> R {
        (self.lambda)(x)
    }

    pub fn g_norm_at(&self, x: &[R]) -> R {
        linalg::norm(&self.g_at(x))
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.dg.is_some()
    }

    /// True when any derivative behind this pair is finite-difference based.
    pub fn uses_fd(&self) -> bool {
        self.fd_gradient_backed || self.dg.is_none()
    }

    /// Analytic Jacobian when present, otherwise unchecked central
    /// differences of `g` with the given step.
    pub fn jacobian_at(&self, x: &[R], step: R) -> Matrix<R> {
        match &self.dg {
            Some(dg) => dg(x),
            None => central_jacobian(|y| (self.g)(y), x, step),
        }
    }
}

/// Open axis-aligned box. Sampling stays strictly inside by `margin`
/// (default `1e-6 ×` the box diagonal), so no sample ever touches the
/// boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain<R> {
    lower: Vec<R>,
    upper: Vec<R>,
    margin: R,
}

impl<R: Real> BoxDomain<R> {
    pub fn new(lower: Vec<R>, upper: Vec<R>) -> Result<Self, FieldError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(FieldError::BadDomain("bounds must be non-empty and of equal length".into()));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l < u) || !l.is_finite() || !u.is_finite() {
                return Err(FieldError::BadDomain(format!(
                    "need lower < upper on every axis, got [{l}, {u}]"
                )));
            }
        }
        let diag = lower
            .iter()
            .zip(&upper)
            .fold(R::zero(), |acc, (&l, &u)| acc + (u - l) * (u - l))
            .sqrt();
        let margin = R::of(1e-6) * diag;
        Ok(Self { lower, upper, margin })
    }

    /// Symmetric box `[-h, h]^n`.
    pub fn centered(dim: usize, h: R) -> Self {
        Self::new(vec![-h; dim], vec![h; dim]).expect("valid centered box")
    }

    pub fn with_margin(mut self, margin: R) -> Self {
        assert!(margin > R::zero(), "margin must be positive");
        self.margin = margin;
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[R] {
        &self.lower
    }

    pub fn upper(&self) -> &[R] {
        &self.upper
    }

    pub fn margin(&self) -> R {
        self.margin
    }

    pub fn diagonal(&self) -> R {
        self.lower
            .iter()
            .zip(&self.upper)
            .fold(R::zero(), |acc, (&l, &u)| acc + (u - l) * (u - l))
            .sqrt()
    }

    pub fn contains_closed(&self, x: &[R]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&xi, (&l, &u))| xi >= l && xi <= u)
    }

    /// Per-axis bounds pulled in by `max(margin, extra)` on each side.
    pub fn inset_bounds(&self, extra: R) -> (Vec<R>, Vec<R>) {
        let inset = self.margin.max(extra);
        let lo: Vec<R> = self.lower.iter().map(|&l| l + inset).collect();
        let hi: Vec<R> = self.upper.iter().map(|&u| u - inset).collect();
        for (l, u) in lo.iter().zip(&hi) {
            assert!(l < u, "inset {inset} leaves an empty box");
        }
        (lo, hi)
    }
}

/// Tensor lattice plus optional seeded uniform points; deterministic
/// given the seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub points_per_axis: usize,
    pub rng_seed: u64,
    pub random_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points_per_axis: 21, rng_seed: 0, random_points: 0 }
    }
}

impl GridSpec {
    pub fn lattice(points_per_axis: usize) -> Self {
        Self { points_per_axis, ..Self::default() }
    }

    pub fn seeded(points_per_axis: usize, rng_seed: u64, random_points: usize) -> Self {
        Self { points_per_axis, rng_seed, random_points }
    }
}

const GRID_STREAM_SALT: u64 = 0x6772_6964; // distinguishes grid draws from oracle draws

/// All sample points for a grid run: the lattice first (last axis fastest),
/// random points after, every point at least `max(margin, extra)` inside.
pub fn grid_points<R: Real>(domain: &BoxDomain<R>, spec: &GridSpec, extra_inset: R) -> Vec<Vec<R>> {
    assert!(spec.points_per_axis >= 2, "grid needs at least 2 points per axis");
    let (lo, hi) = domain.inset_bounds(extra_inset);
    let n = domain.dim();
    let ppa = spec.points_per_axis;
    let total = ppa.pow(n as u32);
    let denom = R::of((ppa - 1) as f64);
    let mut points = Vec::with_capacity(total + spec.random_points);
    for flat in 0..total {
        let mut rem = flat;
        let mut p = vec![R::zero(); n];
        for a in (0..n).rev() {
            let k = rem % ppa;
            rem /= ppa;
            p[a] = lo[a] + (hi[a] - lo[a]) * R::of(k as f64) / denom;
        }
        points.push(p);
    }
    let mut rng = SplitMix64::stream(spec.rng_seed ^ GRID_STREAM_SALT, 0);
    for _ in 0..spec.random_points {
        let p: Vec<R> = (0..n)
            .map(|a| R::of(rng.uniform(lo[a].as_f64(), hi[a].as_f64())))
            .collect();
        points.push(p);
    }
    points
}

/// Central-difference gradient, `O(step²)` for C³ fields. Every stencil
/// point must stay inside the closed box.
pub fn fd_gradient<R: Real>(
    f: &ScalarField<R>,
    domain: &BoxDomain<R>,
    x: &[R],
    step: R,
) -> Result<Vec<R>, FieldError> {
    assert!(step > R::zero(), "finite-difference step must be positive");
    check_stencil(domain, x, step)?;
    Ok(central_gradient(|y| f.eval(y), x, step))
}

/// Central-difference Jacobian of a vector field, column by column.
pub fn fd_jacobian<R: Real>(
    g: impl Fn(&[R]) -> Vec<R>,
    domain: &BoxDomain<R>,
    x: &[R],
    step: R,
) -> Result<Matrix<R>, FieldError> {
    assert!(step > R::zero(), "finite-difference step must be positive");
    check_stencil(domain, x, step)?;
    Ok(central_jacobian(g, x, step))
}

fn check_stencil<R: Real>(domain: &BoxDomain<R>, x: &[R], step: R) -> Result<(), FieldError> {
    for i in 0..x.len() {
        for sign in [-R::one(), R::one()] {
            let mut p = x.to_vec();
            p[i] = p[i] + sign * step;
            if !domain.contains_closed(&p) {
                return Err(FieldError::DomainViolation {
                    point: p.iter().map(|v| v.as_f64()).collect(),
                });
            }
        }
    }
    Ok(())
}

fn central_gradient<R: Real>(f: impl Fn(&[R]) -> R, x: &[R], step: R) -> Vec<R> {
    let two = R::of(2.0);
    (0..x.len())
        .map(|i| {
            let mut plus = x.to_vec();
            plus[i] = plus[i] + step;
            let mut minus = x.to_vec();
            minus[i] = minus[i] - step;
            (f(&plus) - f(&minus)) / (two * step)
        })
        .collect()
}

fn central_jacobian<R: Real>(g: impl Fn(&[R]) -> Vec<R>, x: &[R], step: R) -> Matrix<R> {
    let two = R::of(2.0);
    let n = x.len();
    let probe = g(x);
    let m = probe.len();
    let mut jac = Matrix::zeros(m, n);
    for j in 0..n {
        let mut plus = x.to_vec();
        plus[j] = plus[j] + step;
        let mut minus = x.to_vec();
        minus[j] = minus[j] - step;
        let gp = g(&plus);
        let gm = g(&minus);
        for i in 0..m {
            jac.set(i, j, (gp[i] - gm[i]) / (two * step));
        }
    }
    jac
}

/// Unit vector parallel to `∇f(x)`.
pub fn normalize_gradient<R: Real>(
    f: &ScalarField<R>,
    domain: &BoxDomain<R>,
    x: &[R],
    tol: R,
    step: R,
) -> Result<Vec<R>, FieldError> {
    let g = f.gradient(domain, x, step)?;
    let n = linalg::norm(&g);
    if !(n > tol) {
        return Err(FieldError::VanishingGradient { norm: n.as_f64(), tol: tol.as_f64() });
    }
    Ok(g.into_iter().map(|v| v / n).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// One-sided directional derivative with Richardson refinement: the
/// quotients at `step` and `step/2` are extrapolated, so the truncation
/// error is `O(step²)` on the smooth side. Used to probe derivative jumps
/// across seams where a field is C⁰ but not C¹.
pub fn one_sided_derivative<R: Real>(
    phi: impl Fn(&[R]) -> R,
    domain: &BoxDomain<R>,
    x: &[R],
    direction: &[R],
    side: Side,
    step: R,
) -> Result<R, FieldError> {
    assert!(step > R::zero());
    assert_eq!(x.len(), direction.len());
    let sign = match side {
        Side::Plus => R::one(),
        Side::Minus => -R::one(),
    };
    let offset = |h: R| -> Vec<R> {
        x.iter().zip(direction).map(|(&xi, &di)| xi + sign * h * di).collect()
    };
    let far = offset(step);
    if !domain.contains_closed(x) || !domain.contains_closed(&far) {
        return Err(FieldError::DomainViolation {
            point: far.iter().map(|v| v.as_f64()).collect(),
        });
    }
    let base = phi(x);
    let half = step * R::of(0.5);
    let q_full = (phi(&far) - base) / (sign * step);
    let q_half = (phi(&offset(half)) - base) / (sign * half);
    Ok(R::of(2.0) * q_half - q_full)
}

/// Outcome of checking `∇f(x) = λ(x)·g(x)` over a grid.
#[derive(Clone, Debug)]
pub struct ValidationReport<R> {
    pub max_residual: R,
    pub worst_point: Vec<R>,
    pub nonpositive_lambda: Vec<(Vec<R>, R)>,
    pub points_checked: usize,
    pub tol: R,
    pub fd_used: bool,
}

impl<R: Real> ValidationReport<R> {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tol && self.nonpositive_lambda.is_empty()
    }
}

/// Compares `∇f` (analytic, or central differences otherwise) with
/// `λ(x)·g(x)` at every grid point. Failures are reported, not thrown.
pub fn validate_pair<R: Real>(
    f: &ScalarField<R>,
    pair: &GradientDecomposition<R>,
    domain: &BoxDomain<R>,
    grid: &GridSpec,
    tol: R,
    fd_step: R,
) -> ValidationReport<R> {
    let fd_used = !f.has_analytic_gradient() || pair.uses_fd();
    let extra = if fd_used { fd_step * R::of(4.0) } else { R::zero() };
    let points = grid_points(domain, grid, extra);
    let mut max_residual = R::zero();
    let mut worst_point = points[0].clone();
    let mut nonpositive_lambda = Vec::new();
    for p in &points {
        let df = f
            .gradient(domain, p, fd_step)
            .expect("grid inset keeps stencils inside the box");
        let lam = pair.lambda_at(p);
        if !(lam > R::zero()) {
            nonpositive_lambda.push((p.clone(), lam));
        }
        let g = pair.g_at(p);
        for i in 0..df.len() {
            let r = (df[i] - lam * g[i]).abs();
            if r > max_residual {
                max_residual = r;
                worst_point = p.clone();
            }
        }
    }
    ValidationReport {
        max_residual,
        worst_point,
        nonpositive_lambda,
        points_checked: points.len(),
        tol,
        fd_used,
    }
}
