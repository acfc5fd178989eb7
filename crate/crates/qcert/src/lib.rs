//! Numerical certification of quasi-concavity on open boxes in R^n.
//!
//! A continuously differentiable field `f` whose gradient factors as
//! `∇f(x) = λ(x)·g(x)` — with `g` continuously differentiable and `λ`
//! positive — is quasi-concave exactly when the quadratic form of `Dg(x)`
//! is non-positive on the kernel of `g(x)`, and strictly quasi-concave when
//! that form is negative definite there. This crate turns those conditions
//! into grid tests with honest verdicts (`certified`, `refuted`,
//! `undetermined`, `precondition_failed`), cross-checked by a definitional
//! sampling oracle, a bordered-determinant criterion, and a 2-D level-curve
//! tracer.
//!
//! The numeric core is generic over the scalar type (`f32` or `f64`, via
//! [`Real`]); the corpus and CLI work at `f64` through the aliases below.

pub mod certify;
pub mod config;
pub mod corpus;
pub mod expr;
pub mod field;
pub mod linalg;
pub mod oracle;
pub mod property_n;
pub mod real;
pub mod report;
pub mod rng;
pub mod run;
pub mod trace;

pub use real::Real;

pub type Matrix64 = linalg::Matrix<f64>;
pub type ScalarField64 = field::ScalarField<f64>;
pub type BoxDomain64 = field::BoxDomain<f64>;
pub type GradientDecomposition64 = field::GradientDecomposition<f64>;
pub type CertReport64 = certify::CertReport<f64>;
pub type Trace64 = trace::Trace<f64>;
