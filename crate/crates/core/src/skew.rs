//! Skew-symmetric generators `Q ∈ o(n+1)`, their block standard form, and the
//! rotation group they generate.
//!
//! The exponential is computed through the standard form
//! `Q = P · blockdiag(Q_1, …, Q_j, 0) · Pᵀ` with `Q_i = [[0, a_i], [-a_i, 0]]`,
//! so `exp(tQ)` is assembled from exact planar rotations and stays orthogonal
//! to rounding for every `t`.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::{Error, Matrix, Result, Vector};

/// Largest antisymmetry defect that is silently projected away.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;
/// Threshold on the smallest eigenvalue of `I + Q²`.
pub const ADMISSIBILITY_THRESHOLD: f64 = 1e-12;
pub const SPHERE_TOL: f64 = 1e-12;
pub const TANGENT_TOL: f64 = 1e-10;

/// A point of the unit sphere `S^n ⊂ R^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(Vector);

impl SpherePoint {
    pub fn new(coords: Vector) -> Result<Self> {
        let norm = coords.norm();
        if (norm - 1.0).abs() > SPHERE_TOL {
            return Err(Error::NotOnSphere { norm });
        }
        Ok(Self(coords))
    }

    /// Radial projection of a nonzero vector.
    pub fn normalize(coords: Vector) -> Result<Self> {
        let norm = coords.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotOnSphere { norm });
        }
        Ok(Self(coords / norm))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(Vector::from_column_slice(coords))
    }

    /// Wraps a vector that is known to be unit length up to rounding.
    pub(crate) fn new_unchecked(coords: Vector) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &Vector {
        &self.0
    }

    pub fn into_inner(self) -> Vector {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl AsRef<Vector> for SpherePoint {
    fn as_ref(&self) -> &Vector {
        &self.0
    }
}

/// A vector tangent to `S^n` at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: SpherePoint,
    vec: Vector,
}

impl TangentVector {
    pub fn new(base: SpherePoint, vec: Vector) -> Result<Self> {
        if vec.len() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), got: vec.len() });
        }
        let dot = base.coords().dot(&vec);
        if dot.abs() > TANGENT_TOL * vec.norm().max(1.0) {
            return Err(Error::NotTangent { dot });
        }
        Ok(Self { base, vec })
    }

    /// Orthogonal projection `(I - x xᵀ) v` onto the tangent space at `base`.
    pub fn project(base: SpherePoint, vec: &Vector) -> Self {
        let x = base.coords();
        let vec = vec - x * x.dot(vec);
        Self { base, vec }
    }

    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn vec(&self) -> &Vector {
        &self.vec
    }

    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }
}

/// An element of `SO(n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation(Matrix);

impl Rotation {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.0 * x
    }

    pub fn apply_point(&self, x: &SpherePoint) -> SpherePoint {
        SpherePoint(self.apply(x.coords()))
    }

    /// `max |RᵀR - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let dim = self.0.nrows();
        (self.0.transpose() * &self.0 - Matrix::identity(dim, dim)).amax()
    }
}

/// Orthogonal normal form of a skew matrix: `Q = P · blockdiag(Q_1..Q_j, 0) · Pᵀ`.
///
/// Rates are nonnegative and sorted in decreasing order; column pairs
/// `(2i, 2i+1)` of `P` span the `i`-th invariant plane and the trailing
/// `zero_block` columns span the kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardForm {
    pub conjugator: Matrix,
    pub rates: Vec<f64>,
    pub zero_block: usize,
}

impl StandardForm {
    pub fn dim(&self) -> usize {
        self.conjugator.nrows()
    }

    /// The block-diagonal matrix `PᵀQP`.
    pub fn block_matrix(&self) -> Matrix {
        let dim = self.dim();
        let mut b = Matrix::zeros(dim, dim);
        for (i, &a) in self.rates.iter().enumerate() {
            b[(2 * i, 2 * i + 1)] = a;
            b[(2 * i + 1, 2 * i)] = -a;
        }
        b
    }

    pub fn reconstruct(&self) -> Matrix {
        &self.conjugator * self.block_matrix() * self.conjugator.transpose()
    }

    /// `exp(t·blockdiag) · y` in the adapted frame.
    fn rotate_blocks(&self, t: f64, y: &mut Vector) {
        for (i, &a) in self.rates.iter().enumerate() {
            let (s, c) = (a * t).sin_cos();
            let (y0, y1) = (y[2 * i], y[2 * i + 1]);
            y[2 * i] = c * y0 + s * y1;
            y[2 * i + 1] = -s * y0 + c * y1;
        }
    }
}

/// Result of the admissibility test `I + Q² ≻ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub min_eigenvalue: f64,
}

/// A skew-symmetric `(n+1)×(n+1)` matrix `Q`; the Killing field is `V(x) = Qx`.
#[derive(Debug, Clone)]
pub struct SkewGenerator {
    entries: Matrix,
    form: StandardForm,
    admissibility: Admissibility,
}

impl SkewGenerator {
    /// Builds a generator, projecting onto `(Q - Qᵀ)/2` when the antisymmetry
    /// defect is at most [`ANTISYMMETRY_TOL`].
    pub fn new(entries: Matrix) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        let defect = (&entries + entries.transpose()).amax();
        if defect > ANTISYMMETRY_TOL {
            return Err(Error::NotAntisymmetric { defect });
        }
        let entries = (&entries - entries.transpose()) * 0.5;
        let form = compute_standard_form(&entries);
        let admissibility = compute_admissibility(&entries);
        Ok(Self { entries, form, admissibility })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::NotSquare { rows: dim, cols: bad.len() });
        }
        Self::new(Matrix::from_fn(dim, dim, |i, j| rows[i][j]))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(Matrix::zeros(dim, dim)).expect("zero matrix is skew")
    }

    /// Sets `Q[i][j] = rate`, `Q[j][i] = -rate` for every listed plane.
    pub fn from_planes(dim: usize, planes: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = Matrix::zeros(dim, dim);
        for &(i, j, rate) in planes {
            if i >= dim || j >= dim || i == j {
                return Err(Error::InvalidArgument(format!("bad plane ({i}, {j}) in dimension {dim}")));
            }
            m[(i, j)] += rate;
            m[(j, i)] -= rate;
        }
        Self::new(m)
    }

    /// The 3×3 generator `[[0, a, b], [-a, 0, c], [-b, -c, 0]]`.
    pub fn from_abc(a: f64, b: f64, c: f64) -> Self {
        Self::new(Matrix::from_row_slice(3, 3, &[0.0, a, b, -a, 0.0, c, -b, -c, 0.0])).expect("abc layout is skew")
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Sphere dimension `n`.
    pub fn n(&self) -> usize {
        self.dim() - 1
    }

    pub fn standard_form(&self) -> &StandardForm {
        &self.form
    }

    pub fn admissibility(&self) -> Admissibility {
        self.admissibility
    }

    pub fn is_admissible(&self) -> bool {
        self.admissibility.admissible
    }

    pub fn require_admissible(&self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(Error::Inadmissible { min_eigenvalue: self.admissibility.min_eigenvalue })
        }
    }

    /// Largest rotation rate, i.e. `max_{|x|=1} |Qx|`.
    pub fn max_rate(&self) -> f64 {
        self.form.rates.first().copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.amax() == 0.0
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.entries * x
    }

    pub fn exp(&self, t: f64) -> Rotation {
        let p = &self.form.conjugator;
        let dim = self.dim();
        let mut block = Matrix::identity(dim, dim);
        for (i, &a) in self.form.rates.iter().enumerate() {
            let (s, c) = (a * t).sin_cos();
            block[(2 * i, 2 * i)] = c;
            block[(2 * i, 2 * i + 1)] = s;
            block[(2 * i + 1, 2 * i)] = -s;
            block[(2 * i + 1, 2 * i + 1)] = c;
        }
        Rotation(p * block * p.transpose())
    }

    /// `exp(tQ) x` without forming the rotation matrix.
    pub fn exp_apply(&self, t: f64, x: &Vector) -> Vector {
        let p = &self.form.conjugator;
        let mut y = p.tr_mul(x);
        self.form.rotate_blocks(t, &mut y);
        p * y
    }

    /// `V(x) = Qx`; requires an admissible generator.
    pub fn killing_field(&self, x: &SpherePoint) -> Result<TangentVector> {
        self.require_admissible()?;
        self.check_dim(x.dim())?;
        Ok(TangentVector { base: x.clone(), vec: self.apply(x.coords()) })
    }

    /// The flow of `V`: `exp(tQ) x`.
    pub fn flow(&self, t: f64, x: &SpherePoint) -> Result<SpherePoint> {
        self.require_admissible()?;
        self.check_dim(x.dim())?;
        Ok(SpherePoint(self.exp_apply(t, x.coords())))
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got });
        }
        Ok(())
    }
}

/// Admissibility of an arbitrary square matrix (validated as skew first).
pub fn validate_admissible(entries: &Matrix) -> Result<Admissibility> {
    Ok(SkewGenerator::new(entries.clone())?.admissibility())
}

fn compute_admissibility(q: &Matrix) -> Admissibility {
    let dim = q.nrows();
    let m = Matrix::identity(dim, dim) + q * q;
    let m = (&m + m.transpose()) * 0.5;
    let min_eigenvalue = SymmetricEigen::new(m).eigenvalues.min();
    Admissibility { admissible: min_eigenvalue > ADMISSIBILITY_THRESHOLD, min_eigenvalue }
}

fn orthogonalize(v: &mut Vector, basis: &[Vector]) {
    // Two passes of classical Gram-Schmidt.
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, 1.0);
        }
    }
}

fn canonical_sign(mut v: Vector) -> Vector {
    let imax = v.iamax();
    if v[imax] < 0.0 {
        v.neg_mut();
    }
    v
}

fn compute_standard_form(q: &Matrix) -> StandardForm {
    let dim = q.nrows();
    let scale = q.amax().max(1.0);
    let eig = SymmetricEigen::new(q.transpose() * q);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let rate_of = |k: usize| eig.eigenvalues[k].max(0.0).sqrt();

    // Group eigenvectors of QᵀQ = -Q² into clusters of equal rate.
    let cluster_tol = 1e-8 * scale;
    let zero_tol = 1e-13 * scale;
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match clusters.last_mut() {
            Some(c) if (rate_of(c[0]) - rate_of(k)).abs() <= cluster_tol => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }

    let mut chosen: Vec<Vector> = Vec::with_capacity(dim);
    let mut pairs: Vec<(Vector, Vector, f64)> = Vec::new();
    let mut kernel: Vec<Vector> = Vec::new();

    for cluster in &clusters {
        let target = chosen.len() + cluster.len();
        while chosen.len() < target {
            let candidates: Vec<Vector> = cluster
                .iter()
                .map(|&k| {
                    let mut v: Vector = eig.eigenvectors.column(k).into_owned();
                    orthogonalize(&mut v, &chosen);
                    v
                })
                .collect();
            // Among the longest survivors prefer the one aligned with the lowest axis,
            // so that block-diagonal input keeps its coordinate order.
            let top = candidates.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let best = candidates
                .into_iter()
                .filter(|v| v.norm() >= top - 1e-9)
                .min_by_key(|v| v.iamax())
                .expect("nonempty cluster");
            let norm = best.norm();
            if norm < 1e-6 {
                break;
            }
            let v = canonical_sign(best / norm);
            let mut w = -(q * &v);
            orthogonalize(&mut w, &chosen);
            w.axpy(-w.dot(&v), &v, 1.0);
            let a = w.norm();
            if a > zero_tol && chosen.len() + 2 <= dim {
                let u = w / a;
                chosen.push(v.clone());
                chosen.push(u.clone());
                pairs.push((v, u, a));
            } else {
                chosen.push(v.clone());
                kernel.push(v);
            }
        }
    }

    // Complete with standard basis vectors if rounding left a gap.
    for e in 0..dim {
        if chosen.len() == dim {
            break;
        }
        let mut v = Vector::zeros(dim);
        v[e] = 1.0;
        orthogonalize(&mut v, &chosen);
        let norm = v.norm();
        if norm > 1e-6 {
            let v = v / norm;
            chosen.push(v.clone());
            kernel.push(v);
        }
    }

    let mut conjugator = Matrix::zeros(dim, dim);
    let mut rates = Vec::with_capacity(pairs.len());
    for (i, (v, u, _)) in pairs.iter().enumerate() {
        conjugator.set_column(2 * i, v);
        conjugator.set_column(2 * i + 1, u);
        rates.push(v.dot(&(q * u)));
    }
    let offset = 2 * pairs.len();
    for (i, v) in kernel.iter().enumerate() {
        conjugator.set_column(offset + i, v);
    }
    StandardForm { conjugator, rates, zero_block: kernel.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn zero_generator_is_admissible_with_unit_eigenvalue() {
        let q = SkewGenerator::zeros(4);
        let adm = q.admissibility();
        assert!(adm.admissible);
        assert_abs_diff_eq!(adm.min_eigenvalue, 1.0, epsilon = 1e-15);
        assert_eq!(q.standard_form().rates.len(), 0);
        assert_eq!(q.standard_form().zero_block, 4);
    }

    #[test]
    fn half_rate_generator_min_eigenvalue() {
        // Rates of Q(0, 1/2, 0) are 1/2 and 0, so I + Q² has eigenvalues 3/4, 3/4, 1.
        let q = SkewGenerator::from_abc(0.0, 0.5, 0.0);
        let adm = q.admissibility();
        assert!(adm.admissible);
        assert_abs_diff_eq!(adm.min_eigenvalue, 0.75, epsilon = 1e-14);
    }

    #[test]
    fn unit_rate_is_rejected() {
        let q = SkewGenerator::from_planes(2, &[(0, 1, 1.0)]).unwrap();
        assert!(!q.is_admissible());
        assert!(matches!(q.require_admissible(), Err(Error::Inadmissible { .. })));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(SkewGenerator::new(Matrix::zeros(2, 3)), Err(Error::NotSquare { .. })));
        let m = Matrix::from_row_slice(2, 2, &[0.0, 0.5, -0.4, 0.0]);
        assert!(matches!(SkewGenerator::new(m), Err(Error::NotAntisymmetric { .. })));
    }

    #[test]
    fn tiny_defect_is_projected() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, 0.5 + 4e-13, -0.5, 0.0]);
        let q = SkewGenerator::new(m).unwrap();
        assert_eq!(q.entries()[(0, 1)], -q.entries()[(1, 0)]);
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let q = SkewGenerator::from_abc(0.2, -0.3, 0.4);
        let r = q.exp(0.0);
        assert_abs_diff_eq!((r.matrix() - Matrix::identity(3, 3)).amax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn planar_block_exp_is_rotation() {
        let a = 0.37;
        let t = 2.1;
        let q = SkewGenerator::from_planes(2, &[(0, 1, a)]).unwrap();
        let r = q.exp(t);
        let (s, c) = (a * t).sin_cos();
        let expected = Matrix::from_row_slice(2, 2, &[c, s, -s, c]);
        assert_abs_diff_eq!((r.matrix() - expected).amax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn planar_generator_moves_p_to_focal_point() {
        let q = SkewGenerator::from_planes(3, &[(0, 2, 0.5)]).unwrap();
        let p = Vector::from_column_slice(&[1.0, 0.0, 0.0]);
        let y = q.exp_apply(PI / 2.0, &p);
        let expected = Vector::from_column_slice(&[FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2]);
        assert_abs_diff_eq!((y - expected).amax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn block_diagonal_input_is_a_fixed_point() {
        let q = SkewGenerator::from_planes(5, &[(0, 1, 0.5), (2, 3, 0.3)]).unwrap();
        let form = q.standard_form();
        assert_eq!(form.rates.len(), 2);
        assert_abs_diff_eq!(form.rates[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(form.rates[1], 0.3, epsilon = 1e-14);
        assert_eq!(form.zero_block, 1);
        // P is a signed permutation; here it is the identity.
        assert_abs_diff_eq!((&form.conjugator - Matrix::identity(5, 5)).amax(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn repeated_rates_are_resolved() {
        let q = SkewGenerator::from_planes(4, &[(0, 1, 0.4), (2, 3, 0.4)]).unwrap();
        let form = q.standard_form();
        assert_eq!(form.rates.len(), 2);
        assert_abs_diff_eq!((form.reconstruct() - q.entries()).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn killing_field_of_half_rate_generator() {
        let q = SkewGenerator::from_abc(0.0, 0.5, 0.0);
        let x = SpherePoint::from_slice(&[1.0, 0.0, 0.0]).unwrap();
        let v = q.killing_field(&x).unwrap();
        assert_abs_diff_eq!((v.vec() - Vector::from_column_slice(&[0.0, 0.0, -0.5])).amax(), 0.0);
        assert!(SkewGenerator::zeros(3).killing_field(&x).unwrap().norm() == 0.0);
    }

    #[test]
    fn killing_field_rejects_inadmissible() {
        let q = SkewGenerator::from_abc(1.2, 0.0, 0.0);
        let x = SpherePoint::from_slice(&[1.0, 0.0, 0.0]).unwrap();
        assert!(q.killing_field(&x).is_err());
        assert!(q.flow(1.0, &x).is_err());
    }

    #[test]
    fn half_rate_flow_for_time_pi_is_quarter_turn() {
        let q = SkewGenerator::from_planes(2, &[(0, 1, 0.5)]).unwrap();
        let e1 = SpherePoint::from_slice(&[1.0, 0.0]).unwrap();
        let y = q.flow(PI, &e1).unwrap();
        // exp(πQ)e1 = (cos(π/2), -sin(π/2)).
        assert_abs_diff_eq!(y.coords()[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y.coords()[1], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn tangent_vector_validation() {
        let x = SpherePoint::from_slice(&[0.0, 1.0, 0.0]).unwrap();
        assert!(TangentVector::new(x.clone(), Vector::from_column_slice(&[1.0, 0.0, 2.0])).is_ok());
        assert!(TangentVector::new(x.clone(), Vector::from_column_slice(&[1.0, 1e-3, 0.0])).is_err());
        assert!(SpherePoint::from_slice(&[1.0, 1e-5]).is_err());
    }
}
