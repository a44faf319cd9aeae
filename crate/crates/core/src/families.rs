//! Level sets of `f̄`, their Finsler unit normals, the normal tube map
//! `τ_s(x) = exp(sQ)((cos s)x + (sin s)(n − Qx))`, and the resulting
//! isoparametric families and focal submanifolds.

use nalgebra::SVD;
use serde::Serialize;

use crate::iso::IsoFunction;
use crate::sampling::{self, SeededRng};
use crate::{CmPolynomial, Error, Matrix, Result, SkewGenerator, SpherePoint, TangentVector, Vector};

pub const LEVEL_TOL: f64 = 1e-12;
pub const NEWTON_CAP: usize = 50;
pub const FOCAL_SV_THRESHOLD: f64 = 1e-4;
pub const JACOBIAN_STEP: f64 = 1e-5;
const MIN_ACCEPTANCE: f64 = 0.01;

/// `∇^h f̄` at a unit `x`: the tangential part of `∇φ(x) − g φ(x) x`.
pub fn level_gradient(phi: &CmPolynomial, x: &Vector) -> Vector {
    let grad = phi.grad_e(x);
    let radial = grad.dot(x);
    grad - x * radial
}

/// Newton projection of a sphere point onto `{f̄ = t₀}`.
pub fn project_to_level(phi: &CmPolynomial, x: &SpherePoint, t0: f64) -> Option<SpherePoint> {
    let mut y = x.coords().clone();
    for _ in 0..NEWTON_CAP {
        let defect = phi.value(&y) - t0;
        if defect.abs() < LEVEL_TOL {
            return Some(SpherePoint::new_unchecked(y));
        }
        let grad = level_gradient(phi, &y);
        let g2 = grad.norm_squared();
        if g2 < 1e-20 {
            return None;
        }
        y.axpy(-defect / g2, &grad, 1.0);
        y /= y.norm();
    }
    None
}

/// `count` points of `{f̄ = t₀}` from Newton-projected random draws.
pub(crate) fn sample_level_with(
    phi: &CmPolynomial,
    t0: f64,
    count: usize,
    rng: &mut SeededRng,
) -> Result<Vec<SpherePoint>> {
    if !(t0.abs() < 1.0) {
        return Err(Error::OutOfRange { value: t0 });
    }
    let max_draws = ((count as f64 / MIN_ACCEPTANCE).ceil() as usize).max(100);
    let mut points = Vec::with_capacity(count);
    let mut draws = 0;
    while points.len() < count && draws < max_draws {
        let batch = (2 * (count - points.len()) + 8).min(max_draws - draws);
        let seeds: Vec<SpherePoint> = (0..batch).map(|_| sampling::sphere_point(rng, phi.dim())).collect();
        draws += batch;
        let projected = crate::par_map(&seeds, |x| project_to_level(phi, x, t0));
        points.extend(projected.into_iter().flatten().take(count - points.len()));
    }
    if points.len() < count {
        return Err(Error::SamplingFailed { accepted: points.len(), draws });
    }
    Ok(points)
}

/// Finsler unit normal `n = ∇^h f̄/|∇^h f̄| + Qx`, pointing toward increasing `f̄`.
pub fn unit_normal(phi: &CmPolynomial, q: &SkewGenerator, x: &SpherePoint) -> Result<TangentVector> {
    let grad = level_gradient(phi, x.coords());
    let norm = grad.norm();
    if norm < crate::metric::DEGENERATE_GRADIENT {
        return Err(Error::DegenerateGradient { norm });
    }
    Ok(TangentVector::project(x.clone(), &(grad / norm + q.apply(x.coords()))))
}

#[derive(Debug, Clone)]
pub struct LevelSample {
    pub points: Vec<SpherePoint>,
    pub normals: Vec<TangentVector>,
    pub t0: f64,
    pub seed: u64,
}

impl LevelSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn sample_level(f: &IsoFunction, t0: f64, count: usize, seed: u64) -> Result<LevelSample> {
    let mut rng = sampling::seeded(seed);
    let points = sample_level_with(f.phi(), t0, count, &mut rng)?;
    let normals = points.iter().map(|x| unit_normal(f.phi(), f.generator(), x)).collect::<Result<Vec<_>>>()?;
    Ok(LevelSample { points, normals, t0, seed })
}

/// `τ_s(x) = exp(sQ)((cos s)x + (sin s)(n − Qx))`.
pub fn tube_map(q: &SkewGenerator, x: &SpherePoint, n: &TangentVector, s: f64) -> SpherePoint {
    let nbar = n.vec() - q.apply(x.coords());
    let (sn, cs) = s.sin_cos();
    SpherePoint::new_unchecked(q.exp_apply(s, &(x.coords() * cs + nbar * sn)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameter {
    Regular(f64),
    FocalPlus,
    FocalMinus,
}

#[derive(Debug, Clone)]
pub struct FamilySnapshot {
    pub parameter: Parameter,
    pub points: Vec<SpherePoint>,
}

fn snapshot_at(f: &IsoFunction, level: &LevelSample, s: f64, parameter: Parameter) -> Result<FamilySnapshot> {
    if level.t0 != 0.0 {
        return Err(Error::InvalidArgument(format!("snapshots start from the zero level, got t0 = {}", level.t0)));
    }
    let jobs: Vec<(&SpherePoint, &TangentVector)> = level.points.iter().zip(&level.normals).collect();
    let points = crate::par_map(&jobs, |(x, n)| tube_map(f.generator(), x, n, s));
    Ok(FamilySnapshot { parameter, points })
}

/// The member `f⁻¹(t)` of the family, as `τ_{ζ(t)}` of the zero level.
pub fn family_snapshot(f: &IsoFunction, level: &LevelSample, t: f64) -> Result<FamilySnapshot> {
    if !(t.abs() < 1.0) {
        return Err(Error::OutOfRange { value: t });
    }
    snapshot_at(f, level, f.zeta(t)?, Parameter::Regular(t))
}

/// `(M₊, M₋) = (τ_{π/(2g)}, τ_{−π/(2g)})` of the zero level.
pub fn focal_submanifolds(f: &IsoFunction, level: &LevelSample) -> Result<(FamilySnapshot, FamilySnapshot)> {
    let s = f.focal_offset();
    Ok((snapshot_at(f, level, s, Parameter::FocalPlus)?, snapshot_at(f, level, -s, Parameter::FocalMinus)?))
}

/// Orthonormal basis of `T_x M` for `M = {f̄ = f̄(x)}`.
pub fn tangent_basis(phi: &CmPolynomial, x: &SpherePoint) -> Result<Vec<Vector>> {
    let grad = level_gradient(phi, x.coords());
    let norm = grad.norm();
    if norm < crate::metric::DEGENERATE_GRADIENT {
        return Err(Error::DegenerateGradient { norm });
    }
    let dim = x.dim();
    let mut frame = vec![x.coords().clone(), grad / norm];
    for i in 0..dim {
        if frame.len() == dim {
            break;
        }
        let mut e = Vector::zeros(dim);
        e[i] = 1.0;
        for _ in 0..2 {
            for b in &frame {
                let c = b.dot(&e);
                e.axpy(-c, b, 1.0);
            }
        }
        let en = e.norm();
        if en > 1e-6 {
            frame.push(e / en);
        }
    }
    Ok(frame.split_off(2))
}

/// Singular values (descending) of `dτ_s` restricted to the given tangent
/// directions, from central differences of step [`JACOBIAN_STEP`]. The normal
/// field is re-evaluated at each displaced point.
pub fn focal_rank_test(f: &IsoFunction, x: &SpherePoint, basis: &[Vector], s: f64) -> Result<Vec<f64>> {
    let h = JACOBIAN_STEP;
    let image = |y: Vector| -> Result<Vector> {
        let p = SpherePoint::normalize(y)?;
        let n = unit_normal(f.phi(), f.generator(), &p)?;
        Ok(tube_map(f.generator(), &p, &n, s).into_inner())
    };
    let mut jac = Matrix::zeros(x.dim(), basis.len());
    for (k, e) in basis.iter().enumerate() {
        let fwd = image(x.coords() + e * h)?;
        let bwd = image(x.coords() - e * h)?;
        jac.set_column(k, &((fwd - bwd) / (2.0 * h)));
    }
    let mut sv: Vec<f64> = SVD::new(jac, false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FocalDistance {
    pub s: f64,
    pub multiplicity: usize,
    /// Principal curvature `cot s`.
    pub curvature: f64,
}

/// Focal parameters of the normal tube at `x` in `(0, π)`: local minima of
/// the smallest singular value of `dτ_s`, refined by golden section.
pub fn focal_distances(f: &IsoFunction, x: &SpherePoint, grid: usize) -> Result<Vec<FocalDistance>> {
    let basis = tangent_basis(f.phi(), x)?;
    let grid = grid.max(8);
    let step = std::f64::consts::PI / grid as f64;
    let min_sv = |s: f64| focal_rank_test(f, x, &basis, s).map(|sv| sv.last().copied().unwrap_or(0.0));
    let values = (1..grid).map(|k| min_sv(step * k as f64)).collect::<Result<Vec<_>>>()?;

    let mut out = Vec::new();
    for k in 1..values.len().saturating_sub(1) {
        if !(values[k] <= values[k - 1] && values[k] <= values[k + 1]) {
            continue;
        }
        let (mut a, mut b) = (step * k as f64, step * (k + 2) as f64);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if min_sv(c)? < min_sv(d)? {
                b = d;
            } else {
                a = c;
            }
        }
        let s = 0.5 * (a + b);
        let sv = focal_rank_test(f, x, &basis, s)?;
        let multiplicity = sv.iter().filter(|&&v| v < FOCAL_SV_THRESHOLD).count();
        if multiplicity > 0 {
            out.push(FocalDistance { s, multiplicity, curvature: 1.0 / s.tan() });
        }
    }
    Ok(out)
}
