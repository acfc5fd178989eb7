//! Minimal dense linear algebra for the certification tests: orthonormal
//! kernel bases, symmetric eigenvalues via cyclic Jacobi rotations, and
//! row-pivoted determinants.
//!
//! Dimensions here are small (a handful up to ~16), so everything favors
//! robustness and determinism over performance. All operations are pure.

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("vector norm {norm:e} is at or below tolerance {tol:e}")]
    ZeroVector { norm: f64, tol: f64 },
    #[error("matrix asymmetry {asym:e} exceeds tolerance {tol:e}")]
    NotSymmetric { asym: f64, tol: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Real> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![R::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, R::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<R>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        assert!(cols > 0, "matrix needs at least one column");
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        let m = Self { rows: rows.len(), cols, data };
        debug_assert!(m.data.iter().all(|v| v.is_finite()), "non-finite matrix entry");
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> R {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transposed(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `(M + Mᵀ)/2`; carries all information of the quadratic form.
    pub fn symmetric_part(&self) -> Self {
        assert!(self.is_square(), "symmetric part of a non-square matrix");
        let half = R::of(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self.get(i, j) + self.get(j, i)) * half)
    }

    pub fn max_abs(&self) -> R {
        self.data.iter().fold(R::zero(), |acc, v| acc.max(v.abs()))
    }

    /// `‖M − Mᵀ‖_max`.
    pub fn asymmetry(&self) -> R {
        assert!(self.is_square());
        let mut worst = R::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn frobenius(&self) -> R {
        self.data.iter().fold(R::zero(), |acc, &v| acc + v * v).sqrt()
    }

    pub fn mul_vec(&self, v: &[R]) -> Vec<R> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).fold(R::zero(), |acc, j| acc + self.get(i, j) * v[j]))
            .collect()
    }

    pub fn scaled(&self, c: R) -> Self {
        let mut m = self.clone();
        for v in &mut m.data {
            *v = *v * c;
        }
        m
    }
}

pub fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(R::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<R: Real>(v: &[R]) -> R {
    dot(v, v).sqrt()
}

/// Orthonormal basis of the hyperplane `{w : ⟨w, v⟩ = 0}`.
///
/// Built from the single Householder reflector mapping `v` to `∓‖v‖e₁`:
/// the returned vectors are columns `2..n` of the reflector, so the
/// construction is deterministic and repeated calls agree bit for bit.
/// Together with `v/‖v‖` they form an orthonormal basis of the whole space.
pub fn kernel_basis<R: Real>(v: &[R], tol: R) -> Result<Vec<Vec<R>>, LinalgError> {
    let n = v.len();
    assert!(n >= 1, "kernel_basis needs dimension >= 1");
    let nrm = norm(v);
    if !(nrm > tol) {
        return Err(LinalgError::ZeroVector { norm: nrm.as_f64(), tol: tol.as_f64() });
    }
    // u = v + sign(v₁)‖v‖e₁ avoids cancellation in the leading entry.
    let sign = if v[0] >= R::zero() { R::one() } else { -R::one() };
    let mut u = v.to_vec();
    u[0] = u[0] + sign * nrm;
    let uu = dot(&u, &u);
    let two = R::of(2.0);
    let mut basis = Vec::with_capacity(n - 1);
    for j in 1..n {
        let factor = two * u[j] / uu;
        let mut col: Vec<R> = u.iter().map(|&ui| -factor * ui).collect();
        col[j] = col[j] + R::one();
        basis.push(col);
    }
    Ok(basis)
}

/// Eigenvalues of a symmetric matrix, ascending.
///
/// `sym_tol` is relative: the input must satisfy
/// `‖S − Sᵀ‖_max ≤ sym_tol·(1 + ‖S‖_max)`. The matrix is hard-symmetrized
/// before iterating, so sub-tolerance asymmetry cannot leak into the result.
pub fn eig_symmetric<R: Real>(s: &Matrix<R>, sym_tol: R) -> Result<Vec<R>, LinalgError> {
    eig_symmetric_full(s, sym_tol).map(|(vals, _)| vals)
}

/// Like [`eig_symmetric`] but also returns the orthonormal eigenvector
/// matrix (column `i` pairs with eigenvalue `i`).
pub fn eig_symmetric_full<R: Real>(
    s: &Matrix<R>,
    sym_tol: R,
) -> Result<(Vec<R>, Matrix<R>), LinalgError> {
    assert!(s.is_square(), "eigenvalues of a non-square matrix");
    let n = s.rows();
    let asym = s.asymmetry();
    let bound = sym_tol * (R::one() + s.max_abs());
    if asym > bound {
        return Err(LinalgError::NotSymmetric { asym: asym.as_f64(), tol: bound.as_f64() });
    }
    let mut a = s.symmetric_part();
    let mut v = Matrix::identity(n);
    let target = R::of(1e-12) * a.frobenius();

    // Cyclic Jacobi sweeps; convergence when the off-diagonal Frobenius norm
    // drops below target. 64 sweeps is far beyond what n <= 16 ever needs.
    for _ in 0..64 {
        let mut off = R::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a.get(p, q) * a.get(p, q);
            }
        }
        off = (off + off).sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == R::zero() {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (R::of(2.0) * apq);
                let t = {
                    let mag = R::one() / (theta.abs() + (theta * theta + R::one()).sqrt());
                    if theta < R::zero() {
                        -mag
                    } else {
                        mag
                    }
                };
                let c = R::one() / (t * t + R::one()).sqrt();
                let sn = t * c;

                let app = a.get(p, p);
                let aqq = a.get(q, q);
                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, R::zero());
                a.set(q, p, R::zero());
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - sn * akq);
                        a.set(p, k, c * akp - sn * akq);
                        a.set(k, q, sn * akp + c * akq);
                        a.set(q, k, sn * akp + c * akq);
                    }
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - sn * vkq);
                    v.set(k, q, sn * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).expect("finite eigenvalues"));
    let vals: Vec<R> = order.iter().map(|&i| a.get(i, i)).collect();
    let vecs = Matrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok((vals, vecs))
}

/// Determinant via row-pivoted Gaussian elimination.
///
/// Singular matrices come back as 0 within round-off.
pub fn determinant<R: Real>(m: &Matrix<R>) -> R {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows();
    let mut a = m.clone();
    let mut det = R::one();
    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if a.get(r, col).abs() > a.get(pivot, col).abs() {
                pivot = r;
            }
        }
        if a.get(pivot, col) == R::zero() {
            return R::zero();
        }
        if pivot != col {
            for j in 0..n {
                let tmp = a.get(col, j);
                a.set(col, j, a.get(pivot, j));
                a.set(pivot, j, tmp);
            }
            det = -det;
        }
        let p = a.get(col, col);
        det = det * p;
        for r in (col + 1)..n {
            let factor = a.get(r, col) / p;
            if factor == R::zero() {
                continue;
            }
            for j in col..n {
                a.set(r, j, a.get(r, j) - factor * a.get(col, j));
            }
        }
    }
    det
}

/// `wᵀ M w` in one pass. For non-symmetric `M` this equals
/// `wᵀ·sym(M)·w` by the usual identity.
pub fn quadratic_form<R: Real>(m: &Matrix<R>, w: &[R]) -> Result<R, LinalgError> {
    if !m.is_square() || m.rows() != w.len() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} matrix against vector of length {}",
            m.rows(),
            m.cols(),
            w.len()
        )));
    }
    let mut acc = R::zero();
    for i in 0..m.rows() {
        let mut row = R::zero();
        for j in 0..m.cols() {
            row = row + m.get(i, j) * w[j];
        }
        acc = acc + w[i] * row;
    }
    Ok(acc)
}

/// Restriction `BᵀSB` of a symmetric matrix to the span of `basis`.
///
/// The result is forced symmetric entry by entry so downstream
/// eigen-analysis never sees round-off asymmetry.
pub fn project_symmetric<R: Real>(s: &Matrix<R>, basis: &[Vec<R>]) -> Matrix<R> {
    let m = basis.len();
    assert!(m > 0, "projection onto an empty basis");
    let images: Vec<Vec<R>> = basis.iter().map(|b| s.mul_vec(b)).collect();
    let mut k = Matrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let vab = dot(&basis[a], &images[b]);
            let vba = dot(&basis[b], &images[a]);
            let v = (vab + vba) * R::of(0.5);
            k.set(a, b, v);
            k.set(b, a, v);
        }
    }
    k
}
