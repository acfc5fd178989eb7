//! Built-in corpus of scalar fields with known convexity structure.
//!
//! Each entry carries the field, a gradient decomposition with analytic
//! Jacobian where one exists, a default domain box, and labels describing
//! what the sampling oracles are expected to find. The labels are enforced
//! against the oracles in the test suite, so a corpus edit that breaks them
//! fails loudly.
//!
//! The piecewise entry (`debreu`) is evaluated exactly by branch on
//! `x₂ ≤ 0`; its scale field is continuous but has a derivative jump across
//! the seam, which is precisely what makes it interesting. It is a builtin
//! rather than expression text because the expression language has no
//! conditional.

use crate::field::{BoxDomain, GradientDecomposition, ScalarField};
use crate::linalg::Matrix;
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Labels {
    pub quasiconcave: bool,
    pub strictly_quasiconcave: bool,
    pub concave: bool,
    /// Whether `∇f` stays away from zero on the default box.
    pub gradient_nonvanishing: bool,
}

pub struct CorpusEntry {
    pub name: &'static str,
    pub dim: usize,
    pub field: ScalarField<f64>,
    pub pair: GradientDecomposition<f64>,
    /// Expression-language equivalent, when the field is expressible.
    pub expression: Option<&'static str>,
    pub domain: BoxDomain<f64>,
    pub labels: Labels,
    pub note: &'static str,
}

fn boxed(lo: [f64; 2], hi: [f64; 2]) -> BoxDomain<f64> {
    BoxDomain::new(lo.to_vec(), hi.to_vec()).expect("corpus boxes are valid")
}

fn debreu_entry() -> CorpusEntry {
    let f = ScalarField::new(2, |x: &[f64]| {
        if x[1] <= 0.0 {
            x[1]
        } else {
            x[1] / (1.0 - x[0] * x[1])
        }
    })
    .with_gradient(|x: &[f64]| {
        if x[1] <= 0.0 {
            vec![0.0, 1.0]
        } else {
            let d = (1.0 - x[0] * x[1]).powi(2);
            vec![x[1].powi(2) / d, 1.0 / d]
        }
    });
    let pair = GradientDecomposition::new(
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
    });
    CorpusEntry {
        name: "debreu",
        dim: 2,
        field: f,
        pair,
        expression: None,
        domain: boxed([-0.5, -0.5], [0.5, 0.5]),
        labels: Labels {
            quasiconcave: true,
            strictly_quasiconcave: false,
            concave: false,
            gradient_nonvanishing: true,
        },
        note: "piecewise C1 field whose decomposition scale is not differentiable across x2 = 0; \
               quasi-concave near the origin but flat in x1 below the seam",
    }
}

fn katzner_entry() -> CorpusEntry {
    let f = ScalarField::new(2, |x: &[f64]| x[0].powi(3) * x[1] + x[0] * x[1].powi(3))
        .with_gradient(|x: &[f64]| {
            vec![
                3.0 * x[0].powi(2) * x[1] + x[1].powi(3),
                x[0].powi(3) + 3.0 * x[0] * x[1].powi(2),
            ]
        });
    let pair = GradientDecomposition::from_field_gradient(&f, 1e-5).with_jacobian(|x: &[f64]| {
        let off = 3.0 * (x[0].powi(2) + x[1].powi(2));
        Matrix::from_rows(&[vec![6.0 * x[0] * x[1], off], vec![off, 6.0 * x[0] * x[1]]])
    });
    CorpusEntry {
        name: "katzner",
        dim: 2,
        field: f,
        pair,
        expression: Some("x1^3*x2 + x1*x2^3"),
        domain: boxed([0.5, 0.5], [1.5, 1.5]),
        labels: Labels {
            quasiconcave: true,
            strictly_quasiconcave: true,
            concave: false,
            gradient_nonvanishing: true,
        },
        note: "strictly quasi-concave on the positive quadrant, yet the kernel form \
               degenerates to zero at (1,1): the strict sufficient condition stays silent",
    }
}

fn quartic_entry() -> CorpusEntry {
    let f = ScalarField::new(2, |x: &[f64]| x[0].powi(4))
        .with_gradient(|x: &[f64]| vec![4.0 * x[0].powi(3), 0.0]);
    let pair = GradientDecomposition::from_field_gradient(&f, 1e-5).with_jacobian(|x: &[f64]| {
        Matrix::from_rows(&[vec![12.0 * x[0].powi(2), 0.0], vec![0.0, 0.0]])
    });
    CorpusEntry {
        name: "quartic_x1",
        dim: 2,
        field: f,
        pair,
        expression: Some("x1^4"),
        domain: boxed([-1.0, -1.0], [1.0, 1.0]),
        labels: Labels {
            quasiconcave: false,
            strictly_quasiconcave: false,
            concave: false,
            gradient_nonvanishing: false,
        },
        note: "the gradient vanishes along x1 = 0, where the kernel test is vacuous while \
               the function fails quasi-concavity outright",
    }
}

fn linear_entry() -> CorpusEntry {
    let f = ScalarField::new(2, |x: &[f64]| x[1]).with_gradient(|_: &[f64]| vec![0.0, 1.0]);
    let pair = GradientDecomposition::from_field_gradient(&f, 1e-5)
        .with_jacobian(|_: &[f64]| Matrix::zeros(2, 2));
    CorpusEntry {
        name: "linear",
        dim: 2,
        field: f,
        pair,
        expression: Some("x2"),
        domain: boxed([-1.0, -1.0], [1.0, 1.0]),
        labels: Labels {
            quasiconcave: true,
            strictly_quasiconcave: false,
            concave: true,
            gradient_nonvanishing: true,
        },
        note: "weakly quasi-concave and weakly concave; constant along x1",
    }
}

fn neg_sq_entry() -> CorpusEntry {
    let f = ScalarField::new(2, |x: &[f64]| -x[0] * x[0] - x[1] * x[1])
        .with_gradient(|x: &[f64]| vec![-2.0 * x[0], -2.0 * x[1]]);
    let pair = GradientDecomposition::from_field_gradient(&f, 1e-5)
        .with_jacobian(|_: &[f64]| Matrix::from_rows(&[vec![-2.0, 0.0], vec![0.0, -2.0]]));
    CorpusEntry {
        name: "neg_sq",
        dim: 2,
        field: f,
        pair,
        expression: Some("-x1^2 - x2^2"),
        domain: boxed([-1.0, -1.0], [1.0, 1.0]),
        labels: Labels {
            quasiconcave: true,
            strictly_quasiconcave: true,
            concave: true,
            gradient_nonvanishing: false,
        },
        note: "strictly concave; the gradient vanishes at the origin, so the strict test \
               exercises its full-space branch there",
    }
}

fn convex_sq_entry() -> CorpusEntry {
    let f = ScalarField::new(2, |x: &[f64]| x[0] * x[0] + x[1] * x[1])
        .with_gradient(|x: &[f64]| vec![2.0 * x[0], 2.0 * x[1]]);
    let pair = GradientDecomposition::from_field_gradient(&f, 1e-5)
        .with_jacobian(|_: &[f64]| Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 2.0]]));
    CorpusEntry {
        name: "convex_sq",
        dim: 2,
        field: f,
        pair,
        expression: Some("x1^2 + x2^2"),
        domain: boxed([1.0, 1.0], [2.0, 2.0]),
        labels: Labels {
            quasiconcave: false,
            strictly_quasiconcave: false,
            concave: false,
            gradient_nonvanishing: true,
        },
        note: "strictly convex paraboloid on an off-center box: refuted by the kernel test \
               at every grid point and by the oracle",
    }
}

fn cobb_douglas_entry() -> CorpusEntry {
    const A: f64 = 0.3;
    const B: f64 = 0.7;
    let f = ScalarField::new(2, |x: &[f64]| x[0].powf(A) * x[1].powf(B))
        .with_gradient(|x: &[f64]| {
            vec![
                A * x[0].powf(A - 1.0) * x[1].powf(B),
                B * x[0].powf(A) * x[1].powf(B - 1.0),
            ]
        });
    let pair = GradientDecomposition::from_field_gradient(&f, 1e-5).with_jacobian(|x: &[f64]| {
        let cross = A * B * x[0].powf(A - 1.0) * x[1].powf(B - 1.0);
        Matrix::from_rows(&[
            vec![A * (A - 1.0) * x[0].powf(A - 2.0) * x[1].powf(B), cross],
            vec![cross, B * (B - 1.0) * x[0].powf(A) * x[1].powf(B - 2.0)],
        ])
    });
    CorpusEntry {
        name: "cobb_douglas",
        dim: 2,
        field: f,
        pair,
        expression: Some("x1^0.3 * x2^0.7"),
        domain: boxed([0.5, 0.5], [2.0, 2.0]),
        labels: Labels {
            quasiconcave: true,
            strictly_quasiconcave: true,
            concave: true,
            gradient_nonvanishing: true,
        },
        note: "constant-returns Cobb-Douglas: concave (weakly, linear along rays) and \
               strictly quasi-concave on the positive box",
    }
}

/// Seeded 2x2 SPD matrix `Q = L·Lᵀ + I/2` plus the linear coefficient used
/// by both random quadratic entries.
fn seeded_quadratic(seed: u64) -> ([f64; 3], f64) {
    let mut rng = SplitMix64::new(seed);
    let l = [
        rng.uniform(-1.0, 1.0),
        rng.uniform(-1.0, 1.0),
        rng.uniform(-1.0, 1.0),
        rng.uniform(-1.0, 1.0),
    ];
    let q11 = l[0] * l[0] + l[1] * l[1] + 0.5;
    let q12 = l[0] * l[2] + l[1] * l[3];
    let q22 = l[2] * l[2] + l[3] * l[3] + 0.5;
    ([q11, q12, q22], 6.0)
}

fn quadratic_entry(name: &'static str, seed: u64, concave: bool, note: &'static str) -> CorpusEntry {
    let ([q11, q12, q22], a) = seeded_quadratic(seed);
    let sign = if concave { -1.0 } else { 1.0 };
    let f = ScalarField::new(2, move |x: &[f64]| {
        sign * (q11 * x[0] * x[0] + 2.0 * q12 * x[0] * x[1] + q22 * x[1] * x[1])
            + a * (x[0] + x[1])
    })
    .with_gradient(move |x: &[f64]| {
        vec![
            2.0 * sign * (q11 * x[0] + q12 * x[1]) + a,
            2.0 * sign * (q12 * x[0] + q22 * x[1]) + a,
        ]
    });
    let pair = GradientDecomposition::from_field_gradient(&f, 1e-5).with_jacobian(move |_: &[f64]| {
        Matrix::from_rows(&[
            vec![2.0 * sign * q11, 2.0 * sign * q12],
            vec![2.0 * sign * q12, 2.0 * sign * q22],
        ])
    });
    CorpusEntry {
        name,
        dim: 2,
        field: f,
        pair,
        expression: None,
        domain: boxed([-1.0, -1.0], [1.0, 1.0]),
        labels: Labels {
            quasiconcave: concave,
            strictly_quasiconcave: concave,
            concave,
            gradient_nonvanishing: true,
        },
        note,
    }
}

/// The full corpus, in a fixed order.
pub fn builtin_corpus() -> Vec<CorpusEntry> {
    vec![
        debreu_entry(),
        katzner_entry(),
        quartic_entry(),
        linear_entry(),
        neg_sq_entry(),
        convex_sq_entry(),
        cobb_douglas_entry(),
        quadratic_entry(
            "poly_concave_seeded",
            1001,
            true,
            "seeded strictly concave quadratic with the stationary point pushed outside the box",
        ),
        quadratic_entry(
            "poly_convex_seeded",
            1002,
            false,
            "seeded strictly convex quadratic with the stationary point pushed outside the box",
        ),
    ]
}

pub fn find_entry(corpus: &[CorpusEntry], name: &str) -> Option<usize> {
    corpus.iter().position(|e| e.name == name)
}
