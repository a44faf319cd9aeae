//! Cartan-Münzner polynomials: homogeneous `φ` of degree `g` on `R^{n+1}` with
//! `|∇φ|² = g² r^{2g−2}` and `Δφ = c r^{g−2}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::metric::ScalarField;
use crate::{sampling, Error, Result, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

/// The generic polynomial JSON schema `{"g": .., "terms": [{"exponents": [..], "coeff": ..}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSpec {
    pub g: u32,
    pub terms: Vec<Monomial>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CmPolynomial {
    /// `⟨x, p⟩` with `|p| = 1`.
    Linear {
        p: Vector,
    },
    /// `|x̄₁|² − |x̄₂|²`, `x̄₁` the first `p+1` coordinates, `x̄₂` the last `q+1`.
    CliffordQuadric {
        p: usize,
        q: usize,
    },
    Generic {
        dim: usize,
        g: u32,
        terms: Vec<Monomial>,
    },
}

impl CmPolynomial {
    pub fn linear(p: Vector) -> Result<Self> {
        let norm = p.norm();
        if p.len() < 2 || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("linear polynomial needs a unit vector, |p| = {norm}")));
        }
        Ok(Self::Linear { p })
    }

    /// `x ↦ x_{axis}` on `R^dim`.
    pub fn coordinate(dim: usize, axis: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::InvalidArgument(format!("axis {axis} out of range for dimension {dim}")));
        }
        let mut p = Vector::zeros(dim);
        p[axis] = 1.0;
        Self::linear(p)
    }

    /// The quadric on `S^n` with `p + q = n − 1`.
    pub fn clifford(p: usize, q: usize) -> Self {
        Self::CliffordQuadric { p, q }
    }

    pub fn generic(spec: PolynomialSpec) -> Result<Self> {
        let PolynomialSpec { g, terms } = spec;
        if g == 0 {
            return Err(Error::InvalidArgument("degree must be positive".into()));
        }
        let dim = terms.first().map(|t| t.exponents.len()).ok_or_else(|| Error::InvalidArgument("no terms".into()))?;
        if dim < 2 {
            return Err(Error::InvalidArgument("need at least two variables".into()));
        }
        for t in &terms {
            if t.exponents.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: t.exponents.len() });
            }
            let deg: u32 = t.exponents.iter().sum();
            if deg != g {
                return Err(Error::InvalidArgument(format!("term {:?} has degree {deg}, expected {g}", t.exponents)));
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidArgument("non-finite coefficient".into()));
            }
        }
        Ok(Self::Generic { dim, g, terms })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::generic(serde_json::from_str(text)?)
    }

    /// Monomial table of any variant.
    pub fn to_spec(&self) -> PolynomialSpec {
        let dim = self.dim();
        match self {
            Self::Linear { p } => PolynomialSpec {
                g: 1,
                terms: (0..dim)
                    .filter(|&i| p[i] != 0.0)
                    .map(|i| Monomial { exponents: unit_exponent(dim, i, 1), coeff: p[i] })
                    .collect(),
            },
            Self::CliffordQuadric { p, .. } => PolynomialSpec {
                g: 2,
                terms: (0..dim)
                    .map(|i| Monomial { exponents: unit_exponent(dim, i, 2), coeff: if i <= *p { 1.0 } else { -1.0 } })
                    .collect(),
            },
            Self::Generic { g, terms, .. } => PolynomialSpec { g: *g, terms: terms.clone() },
        }
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        match self {
            Self::Linear { p } => p.len(),
            Self::CliffordQuadric { p, q } => p + q + 2,
            Self::Generic { dim, .. } => *dim,
        }
    }

    pub fn g(&self) -> u32 {
        match self {
            Self::Linear { .. } => 1,
            Self::CliffordQuadric { .. } => 2,
            Self::Generic { g, .. } => *g,
        }
    }

    /// Focal multiplicities `(m₁, m₂)` where known.
    pub fn multiplicities(&self) -> Option<(usize, usize)> {
        match self {
            Self::Linear { p } => Some((p.len() - 2, p.len() - 2)),
            Self::CliffordQuadric { p, q } => Some((*p, *q)),
            Self::Generic { .. } => None,
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        match self {
            Self::Linear { p } => p.dot(x),
            Self::CliffordQuadric { p, .. } => {
                let split = p + 1;
                x.rows(0, split).norm_squared() - x.rows(split, x.len() - split).norm_squared()
            }
            Self::Generic { terms, .. } => terms.iter().map(|t| t.coeff * monomial(x, &t.exponents, None)).sum(),
        }
    }

    pub fn grad_e(&self, x: &Vector) -> Vector {
        match self {
            Self::Linear { p } => p.clone(),
            Self::CliffordQuadric { p, .. } => {
                Vector::from_fn(x.len(), |i, _| if i <= *p { 2.0 * x[i] } else { -2.0 * x[i] })
            }
            Self::Generic { dim, terms, .. } => Vector::from_fn(*dim, |i, _| {
                terms
                    .iter()
                    .filter(|t| t.exponents[i] > 0)
                    .map(|t| t.coeff * t.exponents[i] as f64 * monomial(x, &t.exponents, Some((i, 1))))
                    .sum()
            }),
        }
    }

    pub fn laplacian_e(&self, x: &Vector) -> f64 {
        match self {
            Self::Linear { .. } => 0.0,
            Self::CliffordQuadric { p, q } => 2.0 * (*p as f64 - *q as f64),
            Self::Generic { dim, terms, .. } => (0..*dim)
                .map(|i| {
                    terms
                        .iter()
                        .filter(|t| t.exponents[i] > 1)
                        .map(|t| {
                            let e = t.exponents[i] as f64;
                            t.coeff * e * (e - 1.0) * monomial(x, &t.exponents, Some((i, 2)))
                        })
                        .sum::<f64>()
                })
                .sum(),
        }
    }

    /// `f̄ = φ(x)/|x|^g`, the restriction to the sphere extended with degree 0.
    pub fn normalized(&self, x: &Vector) -> f64 {
        self.value(x) / x.norm().powi(self.g() as i32)
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: dim });
        }
        Ok(())
    }
}

impl ScalarField for CmPolynomial {
    fn eval(&self, x: &Vector) -> f64 {
        self.value(x)
    }

    fn degree(&self) -> i32 {
        self.g() as i32
    }
}

fn unit_exponent(dim: usize, i: usize, e: u32) -> Vec<u32> {
    let mut v = vec![0; dim];
    v[i] = e;
    v
}

/// `Π x_j^{e_j}`, optionally with the exponent of one variable lowered.
fn monomial(x: &Vector, exponents: &[u32], lower: Option<(usize, u32)>) -> f64 {
    exponents
        .iter()
        .enumerate()
        .map(|(j, &e)| {
            let e = match lower {
                Some((i, k)) if i == j => e - k,
                _ => e,
            };
            x[j].powi(e as i32)
        })
        .product()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmReport {
    pub g: u32,
    pub samples: usize,
    pub seed: u64,
    /// `max | |∇φ|² − g² r^{2g−2} |`.
    pub gradient_residual: f64,
    /// `max | Δφ − ĉ r^{g−2} |`.
    pub laplacian_residual: f64,
    pub fitted_c: f64,
    /// `g²(m₂ − m₁)/2` from the declared multiplicities.
    pub predicted_c: Option<f64>,
    /// Set when `ĉ` matches the prediction only after a sign flip.
    pub orientation_reversed: Option<bool>,
    pub euler_residual: f64,
}

/// Checks the Cartan-Münzner equations at `samples` random points with
/// `|x| ∈ [0.5, 2]`, fitting `c` by least squares.
pub fn cm_check(phi: &CmPolynomial, samples: usize, seed: u64) -> Result<CmReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let mut rng = sampling::seeded(seed);
    let dim = phi.dim();
    let points: Vec<Vector> = (0..samples)
        .map(|_| {
            let r = rng.random_range(0.5..=2.0);
            sampling::sphere_point(&mut rng, dim).into_inner() * r
        })
        .collect();

    let g = phi.g() as i32;
    let rows = crate::par_map(&points, |x| {
        let r = x.norm();
        let grad = phi.grad_e(x);
        let res1 = (grad.norm_squared() - (g * g) as f64 * r.powi(2 * g - 2)).abs();
        let euler = (grad.dot(x) - g as f64 * phi.value(x)).abs();
        (r.powi(g - 2), phi.laplacian_e(x), res1, euler)
    });
    let num: f64 = rows.iter().map(|(w, l, ..)| w * l).sum();
    let den: f64 = rows.iter().map(|(w, ..)| w * w).sum();
    let fitted_c = num / den;
    let laplacian_residual = rows.iter().map(|(w, l, ..)| (l - fitted_c * w).abs()).fold(0.0, f64::max);
    let gradient_residual = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let euler_residual = rows.iter().map(|r| r.3).fold(0.0, f64::max);

    let predicted_c = phi.multiplicities().map(|(m1, m2)| (g * g) as f64 * (m2 as f64 - m1 as f64) / 2.0);
    let orientation_reversed = predicted_c.map(|c| c != 0.0 && (fitted_c + c).abs() < (fitted_c - c).abs());
    Ok(CmReport {
        g: phi.g(),
        samples,
        seed,
        gradient_residual,
        laplacian_residual,
        fitted_c,
        predicted_c,
        orientation_reversed,
        euler_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::{self, Stencil};
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_derivatives() {
        let phi = CmPolynomial::coordinate(4, 2).unwrap();
        let x = Vector::from_column_slice(&[0.3, -1.0, 2.0, 0.5]);
        assert_eq!(phi.value(&x), 2.0);
        assert_eq!(phi.grad_e(&x), Vector::from_column_slice(&[0.0, 0.0, 1.0, 0.0]));
        assert_eq!(phi.laplacian_e(&x), 0.0);
        assert!(CmPolynomial::linear(Vector::from_column_slice(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn clifford_derivatives() {
        let phi = CmPolynomial::clifford(1, 2);
        let x = Vector::from_column_slice(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(phi.value(&x), 1.0 + 4.0 - 9.0 - 16.0 - 25.0);
        assert_eq!(phi.grad_e(&x), Vector::from_column_slice(&[2.0, 4.0, -6.0, -8.0, -10.0]));
        assert_eq!(phi.laplacian_e(&x), -2.0);
    }

    #[test]
    fn generic_mixed_monomial() {
        let phi = CmPolynomial::from_json(r#"{"g": 2, "terms": [{"exponents": [1, 1, 0], "coeff": 1.0}]}"#).unwrap();
        let x = Vector::from_column_slice(&[1.0, 1.0, 0.0]);
        assert_eq!(phi.grad_e(&x), Vector::from_column_slice(&[1.0, 1.0, 0.0]));
        assert_eq!(phi.laplacian_e(&x), 0.0);
    }

    #[test]
    fn generic_rejects_bad_tables() {
        assert!(CmPolynomial::from_json(r#"{"g": 2, "terms": [{"exponents": [1, 0], "coeff": 1.0}]}"#).is_err());
        assert!(CmPolynomial::from_json(
            r#"{"g": 1, "terms": [{"exponents": [1, 0], "coeff": 1.0}, {"exponents": [1], "coeff": 1.0}]}"#
        )
        .is_err());
        assert!(CmPolynomial::from_json(r#"{"g": 1, "terms": []}"#).is_err());
    }

    #[test]
    fn exact_derivatives_match_finite_differences() {
        let cubic = CmPolynomial::from_json(
            r#"{"g": 3, "terms": [{"exponents": [3, 0, 0], "coeff": 1.0}, {"exponents": [1, 2, 0], "coeff": -3.0}, {"exponents": [0, 1, 2], "coeff": 0.5}]}"#,
        )
        .unwrap();
        let x = Vector::from_column_slice(&[0.7, -0.4, 1.1]);
        for phi in [cubic, CmPolynomial::clifford(0, 1)] {
            let f = |z: &Vector| phi.value(z);
            let g = fd::gradient(&f, &x, 1e-5, Stencil::Central2);
            assert_abs_diff_eq!((g - phi.grad_e(&x)).amax(), 0.0, epsilon = 1e-6);
            let l = fd::laplacian(&f, &x, 1e-3, Stencil::Central4);
            assert_abs_diff_eq!(l, phi.laplacian_e(&x), epsilon = 1e-6);
        }
    }

    #[test]
    fn cm_check_builtins() {
        for n in 2..=8 {
            let lin = cm_check(&CmPolynomial::coordinate(n + 1, 0).unwrap(), 200, 3).unwrap();
            assert!(lin.gradient_residual < 1e-10 && lin.laplacian_residual < 1e-10);
            assert_eq!(lin.fitted_c, 0.0);
            for p in 0..n {
                let q = n - 1 - p;
                let rep = cm_check(&CmPolynomial::clifford(p, q), 200, 3).unwrap();
                assert!(rep.gradient_residual < 1e-10, "{rep:?}");
                assert!(rep.laplacian_residual < 1e-10, "{rep:?}");
                assert_abs_diff_eq!(rep.fitted_c, 2.0 * (p as f64 - q as f64), epsilon = 1e-12);
                assert_abs_diff_eq!(rep.fitted_c.abs(), rep.predicted_c.unwrap().abs(), epsilon = 1e-12);
                assert_eq!(rep.orientation_reversed, Some(p != q));
            }
        }
    }

    #[test]
    fn generic_copy_gives_identical_report() {
        let phi = CmPolynomial::clifford(2, 1);
        let copy = CmPolynomial::generic(phi.to_spec()).unwrap();
        let a = cm_check(&phi, 100, 9).unwrap();
        let b = cm_check(&copy, 100, 9).unwrap();
        assert_abs_diff_eq!(a.fitted_c, b.fitted_c, epsilon = 1e-12);
        assert_abs_diff_eq!(a.gradient_residual, b.gradient_residual, epsilon = 1e-12);
        assert!(b.laplacian_residual < 1e-10);
    }

    #[test]
    fn non_cm_input_is_detected() {
        let phi = CmPolynomial::from_json(r#"{"g": 2, "terms": [{"exponents": [2, 0, 0], "coeff": 1.0}]}"#).unwrap();
        let rep = cm_check(&phi, 100, 1).unwrap();
        assert!(rep.gradient_residual > 1e-2);
    }
}
