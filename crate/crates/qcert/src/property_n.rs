//! Bordered-determinant test for negative semi-definiteness of a quadratic
//! form restricted to the hyperplane orthogonal to a border vector, plus an
//! experimental grid mode that applies it to the possibly non-symmetric
//! pair `(Dg(x), g(x))` and compares with the eigenvalue test.
//!
//! For a symmetric `A` and a border `b` with some `|bᵢ| > 0`, the form is
//! negative semi-definite on `{w : ⟨w, b⟩ = 0}` exactly when every bordered
//! minor, over every index subset of size `j = 2..n`, satisfies
//! `(-1)^j · det ≥ 0`. Subsets suffice because the bordered determinant is
//! invariant under simultaneous row-and-column permutation (tested below).

use thiserror::Error;

use crate::certify::{self, PointMargin};
use crate::field::{grid_points, BoxDomain, GradientDecomposition, GridSpec};
use crate::linalg::{self, Matrix};
use crate::real::Real;

/// Subset enumeration grows as 2^n; reject anything beyond desk scale.
pub const MAX_DIMENSION: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum PropertyNError {
    #[error("indices must be distinct, in range, and at least two: {0:?}")]
    BadIndices(Vec<usize>),
    #[error("border vector has no component above tolerance {tol:e}")]
    DegenerateBorder { tol: f64 },
    #[error("dimension {n} exceeds the subset-enumeration cap {MAX_DIMENSION}")]
    DimensionTooLarge { n: usize },
    #[error("matrix asymmetry {asym:e} exceeds tolerance {tol:e}")]
    NotSymmetric { asym: f64, tol: f64 },
    #[error("|g1| = {value:e} at or below tolerance {tol:e} at grid point {point:?}")]
    PreconditionFailed { point: Vec<f64>, value: f64, tol: f64 },
}

/// Square matrix with a border vector.
#[derive(Clone, Debug)]
pub struct BorderedForm<R> {
    a: Matrix<R>,
    b: Vec<R>,
    symmetric: bool,
}

impl<R: Real> BorderedForm<R> {
    /// Symmetric variant; rejects matrices with asymmetry above
    /// `1e-8·(1 + ‖A‖_max)`.
    pub fn symmetric(a: Matrix<R>, b: Vec<R>) -> Result<Self, PropertyNError> {
        assert!(a.is_square() && a.rows() == b.len(), "bordered form shape mismatch");
        let asym = a.asymmetry();
        let bound = R::of(1e-8) * (R::one() + a.max_abs());
        if asym > bound {
            return Err(PropertyNError::NotSymmetric {
                asym: asym.as_f64(),
                tol: bound.as_f64(),
            });
        }
        Ok(Self { a, b, symmetric: true })
    }

    /// General variant, used by the experimental mode where the matrix is a
    /// raw (possibly non-symmetric) Jacobian.
    pub fn general(a: Matrix<R>, b: Vec<R>) -> Self {
        assert!(a.is_square() && a.rows() == b.len(), "bordered form shape mismatch");
        Self { a, b, symmetric: false }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// Signed bordered minor for the given index subset (0-based):
/// `(-1)^j` times the determinant of the `(j+1)×(j+1)` matrix made of the
/// selected rows/columns of `A`, bordered by the matching entries of `b`
/// and a zero corner.
pub fn bordered_minor<R: Real>(
    form: &BorderedForm<R>,
    indices: &[usize],
) -> Result<R, PropertyNError> {
    let n = form.dim();
    let j = indices.len();
    let distinct = indices
        .iter()
        .all(|&i| i < n && indices.iter().filter(|&&k| k == i).count() == 1);
    if j < 2 || !distinct {
        return Err(PropertyNError::BadIndices(indices.to_vec()));
    }
    let m = Matrix::from_fn(j + 1, j + 1, |r, c| {
        if r < j && c < j {
            form.a.get(indices[r], indices[c])
        } else if r < j {
            form.b[indices[r]]
        } else if c < j {
            form.b[indices[c]]
        } else {
            R::zero()
        }
    });
    let sign = if j % 2 == 0 { R::one() } else { -R::one() };
    Ok(sign * linalg::determinant(&m))
}

/// Aggregate outcome of the bordered-minor sweep.
#[derive(Clone, Debug)]
pub struct PropertyNOutcome<R> {
    pub refuted: bool,
    pub min_minor: R,
    /// Minors with `|value| ≤ tol`, reported separately rather than as
    /// pass/fail, mirroring the certifier's undetermined band.
    pub boundary_count: usize,
    pub minors_evaluated: usize,
    pub witness_subset: Option<Vec<usize>>,
}

impl<R: Real> PropertyNOutcome<R> {
    pub fn certified(&self) -> bool {
        !self.refuted
    }
}

/// Sweeps every index subset of size `2..=n` in lexicographic order and
/// checks `minor ≥ -tol`. The first violating subset becomes the witness.
pub fn property_n_check<R: Real>(
    form: &BorderedForm<R>,
    tol: R,
) -> Result<PropertyNOutcome<R>, PropertyNError> {
    let n = form.dim();
    if n > MAX_DIMENSION {
        return Err(PropertyNError::DimensionTooLarge { n });
    }
    let max_b = form.b.iter().fold(R::zero(), |acc, v| acc.max(v.abs()));
    if !(max_b > tol) {
        return Err(PropertyNError::DegenerateBorder { tol: tol.as_f64() });
    }
    let mut min_minor = R::infinity();
    let mut boundary_count = 0usize;
    let mut minors_evaluated = 0usize;
    let mut witness_subset = None;
    for j in 2..=n {
        for subset in subsets_lex(n, j) {
            let minor = bordered_minor(form, &subset).expect("generated subsets are valid");
            minors_evaluated += 1;
            min_minor = min_minor.min(minor);
            if minor.abs() <= tol {
                boundary_count += 1;
            }
            if minor < -tol && witness_subset.is_none() {
                witness_subset = Some(subset.clone());
            }
        }
    }
    Ok(PropertyNOutcome {
        refuted: witness_subset.is_some(),
        min_minor,
        boundary_count,
        minors_evaluated,
        witness_subset,
    })
}

/// All size-`j` subsets of `0..n` in lexicographic order.
fn subsets_lex(n: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..j).collect();
    loop {
        out.push(current.clone());
        // advance the rightmost index that can still move
        let mut i = j;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < n - (j - i) {
                current[i] += 1;
                for k in (i + 1)..j {
                    current[k] = current[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Per-point agreement between the unsymmetrized bordered-minor sweep on
/// `(Dg(x), g(x))` and the kernel-eigenvalue test on the same data.
#[derive(Clone, Debug)]
pub struct PointAgreement<R> {
    pub x: Vec<R>,
    pub min_minor: R,
    pub property_n_pass: bool,
    pub property_n_boundary: bool,
    pub kernel_margin: R,
    pub theorem_pass: bool,
    pub theorem_boundary: bool,
}

impl<R: Real> PointAgreement<R> {
    /// `None` when either side sits inside its boundary band.
    pub fn agree(&self) -> Option<bool> {
        if self.property_n_boundary || self.theorem_boundary {
            None
        } else {
            Some(self.property_n_pass == self.theorem_pass)
        }
    }
}

/// Evidence table for the open question whether the bordered-minor
/// criterion still characterizes the kernel condition when `Dg` is not
/// symmetric. Gathers data only; asserts nothing.
#[derive(Clone, Debug)]
pub struct PropertyNComparison<R> {
    pub points: Vec<PointAgreement<R>>,
    pub agreements: usize,
    pub disagreements: usize,
    pub boundary: usize,
    pub symmetric_input: bool,
}

/// Runs the comparison over a grid. Requires `|g₁(x)| > tol` at every grid
/// point; the minors are taken on the raw, unsymmetrized Jacobian.
pub fn conjecture_mode<R: Real>(
    pair: &GradientDecomposition<R>,
    domain: &BoxDomain<R>,
    grid: &GridSpec,
    tol: R,
    fd_step: R,
) -> Result<PropertyNComparison<R>, PropertyNError> {
    let extra = if pair.uses_fd() { fd_step * R::of(4.0) } else { R::zero() };
    let points = grid_points(domain, grid, extra);
    let mut out = PropertyNComparison {
        points: Vec::with_capacity(points.len()),
        agreements: 0,
        disagreements: 0,
        boundary: 0,
        symmetric_input: true,
    };
    for p in &points {
        let g = pair.g_at(p);
        if !(g[0].abs() > tol) {
            return Err(PropertyNError::PreconditionFailed {
                point: p.iter().map(|v| v.as_f64()).collect(),
                value: g[0].abs().as_f64(),
                tol: tol.as_f64(),
            });
        }
        let jac = pair.jacobian_at(p, fd_step);
        if jac.asymmetry() > R::of(1e-8) * (R::one() + jac.max_abs()) {
            out.symmetric_input = false;
        }
        let outcome = property_n_check(&BorderedForm::general(jac, g.clone()), tol)?;
        let PointMargin { max_kernel_eig, .. } =
            certify::theorem1_point(pair, p, tol, fd_step)
                .expect("|g1| > tol implies a nonvanishing gradient");
        let agreement = PointAgreement {
            x: p.clone(),
            min_minor: outcome.min_minor,
            property_n_pass: outcome.certified(),
            property_n_boundary: outcome.min_minor.abs() <= tol,
            kernel_margin: max_kernel_eig,
            theorem_pass: max_kernel_eig <= tol,
            theorem_boundary: max_kernel_eig.abs() <= tol,
        };
        match agreement.agree() {
            Some(true) => out.agreements += 1,
            Some(false) => out.disagreements += 1,
            None => out.boundary += 1,
        }
        out.points.push(agreement);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn diag(entries: &[f64]) -> Matrix<f64> {
        Matrix::from_fn(entries.len(), entries.len(), |i, j| if i == j { entries[i] } else { 0.0 })
    }

    #[test]
    fn minor_with_repeated_rows_vanishes() {
        // Katzner Hessian bordered by its gradient
        let form = BorderedForm::symmetric(
            Matrix::from_rows(&[vec![6.0, 6.0], vec![6.0, 6.0]]),
            vec![4.0, 4.0],
        )
        .unwrap();
        assert_close(bordered_minor(&form, &[0, 1]).unwrap(), 0.0, 1e-12);
    }

    #[test]
    fn minor_of_negative_definite_form_is_positive() {
        let form = BorderedForm::symmetric(diag(&[-2.0, -2.0]), vec![1.0, 0.0]).unwrap();
        assert_close(bordered_minor(&form, &[0, 1]).unwrap(), 2.0, 1e-12);
    }

    #[test]
    fn minor_flags_a_positive_form_on_the_kernel() {
        let form = BorderedForm::symmetric(Matrix::identity(2), vec![1.0, 0.0]).unwrap();
        assert_close(bordered_minor(&form, &[0, 1]).unwrap(), -1.0, 1e-12);
    }

    #[test]
    fn minor_rejects_bad_indices() {
        let form = BorderedForm::symmetric(Matrix::identity(3), vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(bordered_minor(&form, &[0]), Err(PropertyNError::BadIndices(_))));
        assert!(matches!(bordered_minor(&form, &[0, 0]), Err(PropertyNError::BadIndices(_))));
        assert!(matches!(bordered_minor(&form, &[0, 3]), Err(PropertyNError::BadIndices(_))));
    }

    #[test]
    fn minor_is_invariant_under_index_permutation() {
        let mut rng = SplitMix64::new(31);
        for case in 0..500 {
            let n = 2 + (case % 4);
            let mut a = Matrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = rng.uniform(-1.0, 1.0);
                    a.set(i, j, v);
                    a.set(j, i, v);
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let form = BorderedForm::general(a, b);
            let j = 2 + (rng.next_u64() as usize) % (n - 1);
            let mut indices: Vec<usize> = (0..n).collect();
            // Fisher-Yates, then take the first j as the subset
            for i in (1..n).rev() {
                let k = (rng.next_u64() as usize) % (i + 1);
                indices.swap(i, k);
            }
            let subset = &indices[..j];
            let reference = bordered_minor(&form, subset).unwrap();
            let mut permuted = subset.to_vec();
            for i in (1..j).rev() {
                let k = (rng.next_u64() as usize) % (i + 1);
                permuted.swap(i, k);
            }
            let value = bordered_minor(&form, &permuted).unwrap();
            assert!(
                (value - reference).abs() <= 1e-10 * reference.abs().max(1.0),
                "case {case}: {value} vs {reference}"
            );
        }
    }

    #[test]
    fn check_certifies_negative_definite() {
        let form = BorderedForm::symmetric(diag(&[-2.0, -2.0]), vec![1.0, 0.0]).unwrap();
        let out = property_n_check(&form, 1e-9).unwrap();
        assert!(out.certified());
        assert_close(out.min_minor, 2.0, 1e-12);
    }

    #[test]
    fn check_refutes_the_identity() {
        let form = BorderedForm::symmetric(Matrix::identity(2), vec![1.0, 0.0]).unwrap();
        let out = property_n_check(&form, 1e-9).unwrap();
        assert!(out.refuted);
        assert_eq!(out.witness_subset.as_deref(), Some(&[0, 1][..]));
    }

    #[test]
    fn check_reports_the_katzner_zero_margin_as_boundary() {
        let form = BorderedForm::symmetric(
            Matrix::from_rows(&[vec![6.0, 6.0], vec![6.0, 6.0]]),
            vec![4.0, 4.0],
        )
        .unwrap();
        let out = property_n_check(&form, 1e-9).unwrap();
        assert!(out.certified());
        assert_eq!(out.boundary_count, 1);
        assert_close(out.min_minor, 0.0, 1e-12);
    }

    #[test]
    fn check_rejects_a_degenerate_border() {
        let form = BorderedForm::symmetric(Matrix::identity(2), vec![0.0, 1e-12]).unwrap();
        assert!(matches!(
            property_n_check(&form, 1e-9),
            Err(PropertyNError::DegenerateBorder { .. })
        ));
    }

    #[test]
    fn check_rejects_oversized_dimensions() {
        let n = MAX_DIMENSION + 1;
        let form = BorderedForm::general(Matrix::identity(n), vec![1.0; n]);
        assert!(matches!(
            property_n_check(&form, 1e-9),
            Err(PropertyNError::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn verdict_is_invariant_under_border_scaling() {
        let mut rng = SplitMix64::new(57);
        for _ in 0..200 {
            let n = 2 + (rng.next_u64() as usize) % 3;
            let mut a = Matrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = rng.uniform(-1.0, 1.0);
                    a.set(i, j, v);
                    a.set(j, i, v);
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.uniform(0.2, 1.0)).collect();
            let base = property_n_check(&BorderedForm::general(a.clone(), b.clone()), 1e-9).unwrap();
            if base.min_minor.abs() <= 1e-6 {
                continue; // boundary cases scale into or out of the band
            }
            for c in [0.5, 3.0] {
                let scaled_b: Vec<f64> = b.iter().map(|v| c * v).collect();
                let out =
                    property_n_check(&BorderedForm::general(a.clone(), scaled_b), 1e-9).unwrap();
                assert_eq!(out.refuted, base.refuted);
            }
        }
    }

    #[test]
    fn subsets_are_lexicographic_and_complete() {
        let s = subsets_lex(4, 2);
        assert_eq!(
            s,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(subsets_lex(5, 3).len(), 10);
    }

    #[test]
    fn symmetric_constructor_rejects_asymmetry() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(matches!(
            BorderedForm::symmetric(m, vec![1.0, 0.0]),
            Err(PropertyNError::NotSymmetric { .. })
        ));
    }
}
