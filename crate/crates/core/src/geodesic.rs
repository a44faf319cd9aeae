//! Geodesics of `(S^n, F_Q)`.
//!
//! A unit-speed geodesic with `γ(0) = x`, `γ̇(0) = X` is the flow-translate of
//! the round great circle through `x` with velocity `X̄ = X − Qx`:
//! `γ(s) = exp(sQ)((cos s)x + (sin s)X̄)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::fd::{self, Stencil};
use crate::metric::NavigationDatum;
use crate::rational::{self, RationalApprox};
use crate::{Error, Result, SkewGenerator, SpherePoint, Vector};

/// Initial data `(x, X)` of a unit-speed `F_Q` geodesic.
#[derive(Debug, Clone)]
pub struct GeodesicSpec {
    q: SkewGenerator,
    x: SpherePoint,
    xbar: Vector,
}

impl GeodesicSpec {
    /// From the Finsler velocity `X` (requires `F_Q(x, X) = 1`).
    pub fn new(q: SkewGenerator, x: SpherePoint, velocity: Vector) -> Result<Self> {
        q.check_dim(velocity.len())?;
        let xbar = &velocity - q.apply(x.coords());
        Self::from_navigation(q, x, xbar)
    }

    /// From the unit `h`-tangent vector `X̄`; the Finsler velocity is `X̄ + Qx`.
    pub fn from_navigation(q: SkewGenerator, x: SpherePoint, xbar: Vector) -> Result<Self> {
        q.require_admissible()?;
        q.check_dim(x.dim())?;
        q.check_dim(xbar.len())?;
        let dot = x.coords().dot(&xbar);
        if dot.abs() > 1e-10 {
            return Err(Error::NotTangent { dot });
        }
        let norm = xbar.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("|X - Qx| = {norm}, expected a unit-speed initial velocity")));
        }
        Ok(Self { q, x, xbar })
    }

    /// Rescales a nonzero tangent direction to `F_Q`-unit length.
    pub fn from_direction(q: SkewGenerator, x: SpherePoint, dir: &Vector) -> Result<Self> {
        let datum = NavigationDatum::new(q.clone())?;
        let len = datum.metric_at(&x, dir)?;
        if !(len > 0.0) {
            return Err(Error::InvalidArgument("zero initial direction".into()));
        }
        Self::new(q, x, dir / len)
    }

    pub fn generator(&self) -> &SkewGenerator {
        &self.q
    }

    pub fn start(&self) -> &SpherePoint {
        &self.x
    }

    pub fn xbar(&self) -> &Vector {
        &self.xbar
    }

    pub fn initial_velocity(&self) -> Vector {
        &self.xbar + self.q.apply(self.x.coords())
    }

    /// The round great circle `(cos s)x + (sin s)X̄` that `γ` rides on.
    pub fn great_circle(&self, s: f64) -> Vector {
        let (sn, cs) = s.sin_cos();
        self.x.coords() * cs + &self.xbar * sn
    }

    pub fn eval(&self, s: f64) -> SpherePoint {
        SpherePoint::new_unchecked(self.q.exp_apply(s, &self.great_circle(s)))
    }

    /// `γ̇(s) = exp(sQ)(Q c(s) + c'(s))` with `c` the great circle.
    pub fn velocity(&self, s: f64) -> Vector {
        let (sn, cs) = s.sin_cos();
        let c = self.great_circle(s);
        let dc = self.x.coords() * -sn + &self.xbar * cs;
        self.q.exp_apply(s, &(self.q.apply(&c) + dc))
    }

    /// `γ̈(s) = exp(sQ)(Q²c + 2Qc' − c)`.
    pub fn acceleration(&self, s: f64) -> Vector {
        let (sn, cs) = s.sin_cos();
        let c = self.great_circle(s);
        let dc = self.x.coords() * -sn + &self.xbar * cs;
        let qc = self.q.apply(&c);
        let inner = self.q.apply(&qc) + self.q.apply(&dc) * 2.0 - c;
        self.q.exp_apply(s, &inner)
    }

    /// `count` equally spaced samples on `[s0, s1]` (endpoints included).
    pub fn sample(&self, s0: f64, s1: f64, count: usize) -> Vec<(f64, SpherePoint)> {
        let count = count.max(2);
        (0..count)
            .map(|k| {
                let s = s0 + (s1 - s0) * k as f64 / (count - 1) as f64;
                (s, self.eval(s))
            })
            .collect()
    }

    /// Phase-space distance `|γ(s) − γ(0)| + |γ̇(s) − γ̇(0)|`.
    pub fn return_distance(&self, s: f64) -> f64 {
        (self.eval(s).coords() - self.x.coords()).norm() + (self.velocity(s) - self.initial_velocity()).norm()
    }
}

/// The `S²` generator layout `[[0, a, b], [-a, 0, c], [-b, -c, 0]]` with
/// `x = e₁`, `X̄ = e₂`.
pub fn s2_spec(a: f64, b: f64, c: f64) -> Result<GeodesicSpec> {
    let q = SkewGenerator::from_abc(a, b, c);
    let x = SpherePoint::from_slice(&[1.0, 0.0, 0.0])?;
    GeodesicSpec::from_navigation(q, x, Vector::from_column_slice(&[0.0, 1.0, 0.0]))
}

/// The explicit three-component curve for the `S²` family.
///
/// This is the composition of the three single-plane rotations at rates
/// `a`, `b`, `c`; it coincides with [`GeodesicSpec::eval`] when at most one of
/// `a`, `b`, `c` is nonzero and differs from it otherwise.
pub fn s2_geodesic(a: f64, b: f64, c: f64, s: f64) -> Result<SpherePoint> {
    SkewGenerator::from_abc(a, b, c).require_admissible()?;
    let (sa, ca) = ((1.0 - a) * s).sin_cos();
    let (sb, cb) = (b * s).sin_cos();
    let (sc, cc) = (c * s).sin_cos();
    let v = Vector::from_column_slice(&[cb * ca, cc * sa - sb * sc * ca, -sb * cc * ca - sa * sc]);
    Ok(SpherePoint::new_unchecked(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Closed,
    NonClosed,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosednessReport {
    pub verdict: Verdict,
    pub period: Option<f64>,
    /// Approximants of `b/(1−a)` and `c/(1−a)`, in that order.
    pub approximants: Vec<RationalApprox>,
    pub tolerance: f64,
    pub max_denominator: u64,
}

pub const DEFAULT_CLOSEDNESS_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_DENOMINATOR: u64 = 1_000_000;

/// Closedness of the `S²` curve with frequencies `1−a`, `b`, `c`.
///
/// Each ratio `r` is accepted as rational `p/q` when `|q·r − p| ≤ tol` for a
/// continued-fraction convergent with `q ≤ max_den`; the period is then
/// `2π·lcm(q₁, q₂)/(1−a)`. Best defects in `(tol, 10·tol]` give `Undecided`.
pub fn classify_closedness(a: f64, b: f64, c: f64, tol: f64, max_den: u64) -> Result<ClosednessReport> {
    if !(tol > 0.0) || max_den == 0 {
        return Err(Error::InvalidArgument("tolerance and max_denominator must be positive".into()));
    }
    if (1.0 - a).abs() < f64::EPSILON {
        return Err(Error::InvalidArgument("a = 1 gives a degenerate frequency".into()));
    }
    SkewGenerator::from_abc(a, b, c).require_admissible()?;

    let omega = 1.0 - a;
    let approximants: Vec<RationalApprox> =
        [b / omega, c / omega].iter().map(|&r| rational::approximate(r, tol, max_den)).collect();
    let worst = approximants.iter().map(|r| r.defect).fold(0.0, f64::max);
    let (verdict, period) = if worst <= tol {
        let l = approximants.iter().fold(1u64, |acc, r| rational::lcm(acc, r.den));
        (Verdict::Closed, Some(2.0 * PI * l as f64 / omega.abs()))
    } else if worst <= 10.0 * tol {
        (Verdict::Undecided, None)
    } else {
        (Verdict::NonClosed, None)
    };
    Ok(ClosednessReport { verdict, period, approximants, tolerance: tol, max_denominator: max_den })
}

/// Minimum of [`GeodesicSpec::return_distance`] over `[s_lo, s_hi]`: a grid
/// scan with step `step` followed by golden-section refinement around every
/// local minimum of the grid.
pub fn min_return_distance(spec: &GeodesicSpec, s_lo: f64, s_hi: f64, step: f64) -> (f64, f64) {
    let count = ((s_hi - s_lo) / step).ceil().max(2.0) as usize + 1;
    let grid: Vec<(f64, f64)> = (0..count)
        .map(|k| {
            let s = (s_lo + step * k as f64).min(s_hi);
            (s, spec.return_distance(s))
        })
        .collect();
    let mut best = grid.iter().copied().fold((s_lo, f64::INFINITY), |b, g| if g.1 < b.1 { g } else { b });
    for k in 0..grid.len() {
        let left = if k > 0 { grid[k - 1].1 } else { f64::INFINITY };
        let right = if k + 1 < grid.len() { grid[k + 1].1 } else { f64::INFINITY };
        if grid[k].1 <= left && grid[k].1 <= right {
            let lo = grid[k.saturating_sub(1)].0;
            let hi = grid[(k + 1).min(grid.len() - 1)].0;
            let cand = golden_min(|s| spec.return_distance(s), lo, hi);
            if cand.1 < best.1 {
                best = cand;
            }
        }
    }
    best
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

const EL_STEP: f64 = 1e-6;

/// Maximum tangential Euler-Lagrange residual of `L = F_Q²` along a sampled
/// curve `γ(s_k)`, `s_k = s_0 + kΔs`.
///
/// Velocities and `d/ds ∂L/∂y` are central differences of the samples;
/// `∂L/∂x`, `∂L/∂y` are central differences of the ambient extension of `F_Q²`.
/// The normal component (the sphere constraint multiplier) is projected out.
pub fn el_residual(q: &SkewGenerator, curve: &[Vector], ds: f64) -> Result<f64> {
    let datum = NavigationDatum::new(q.clone())?;
    if !(ds > 0.0) || ds > 1e-3 {
        return Err(Error::InvalidArgument(format!("sample spacing {ds:e} must lie in (0, 1e-3]")));
    }
    if curve.len() < 5 {
        return Err(Error::InvalidArgument("need at least five curve samples".into()));
    }
    for p in curve {
        q.check_dim(p.len())?;
        let norm = p.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::NotOnSphere { norm });
        }
    }
    let n = curve.len();
    let lagrangian = |x: &Vector, y: &Vector| datum.metric_ambient(x, y).powi(2);

    let vel: Vec<Vector> =
        (0..n)
            .map(|k| {
                if k == 0 || k == n - 1 {
                    Vector::zeros(q.dim())
                } else {
                    (&curve[k + 1] - &curve[k - 1]) / (2.0 * ds)
                }
            })
            .collect();
    let momentum: Vec<Vector> = (0..n)
        .map(|k| {
            if k == 0 || k == n - 1 {
                return Vector::zeros(q.dim());
            }
            let x = &curve[k];
            fd::gradient(&|y: &Vector| lagrangian(x, y), &vel[k], EL_STEP, Stencil::Central2)
        })
        .collect();

    let ks: Vec<usize> = (2..n - 2).collect();
    let residuals = crate::par_map(&ks, |&k| {
        let x = &curve[k];
        let y = &vel[k];
        let dp = (&momentum[k + 1] - &momentum[k - 1]) / (2.0 * ds);
        let lx = fd::gradient(&|z: &Vector| lagrangian(z, y), x, EL_STEP, Stencil::Central2);
        let r = dp - lx;
        let unit = x / x.norm();
        (&r - &unit * unit.dot(&r)).norm()
    });
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContactKind {
    /// Transversal self-intersection.
    Crossing,
    /// Same point, opposite velocities.
    OppositeTangency,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfContact {
    pub s1: f64,
    pub s2: f64,
    pub point: Vec<f64>,
    pub kind: ContactKind,
}

/// Self-intersections and opposite self-tangencies of `γ` on `[0, s_max)`.
///
/// Candidate parameter pairs come from a uniform grid of `resolution` samples;
/// each is refined by Gauss-Newton, first on the tangency system
/// `(γ(s₁) − γ(s₂), γ̇(s₁) + γ̇(s₂)) = 0` and otherwise on `γ(s₁) = γ(s₂)`.
pub fn self_contacts(spec: &GeodesicSpec, s_max: f64, resolution: usize) -> Vec<SelfContact> {
    let resolution = resolution.max(16);
    let step = s_max / resolution as f64;
    let samples: Vec<Vector> = (0..resolution).map(|k| spec.eval(step * k as f64).into_inner()).collect();
    let min_gap = 0.25_f64.max(4.0 * step);
    let radius = 6.0 * step;

    let mut found: Vec<SelfContact> = Vec::new();
    for i in 0..resolution {
        for j in i + 1..resolution {
            let (s1, s2) = (step * i as f64, step * j as f64);
            let gap = s2 - s1;
            if gap < min_gap || s_max - gap < min_gap {
                continue;
            }
            if (&samples[i] - &samples[j]).norm() > radius {
                continue;
            }
            let Some(contact) = refine_contact(spec, s1, s2) else { continue };
            let wrap = |s: f64| s.rem_euclid(s_max);
            let (a, b) = (wrap(contact.s1), wrap(contact.s2));
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            let gap = b - a;
            if gap < 0.5 * min_gap || s_max - gap < 0.5 * min_gap {
                continue;
            }
            if found.iter().any(|c| (c.s1 - a).abs() < 1e-6 && (c.s2 - b).abs() < 1e-6) {
                continue;
            }
            found.push(SelfContact { s1: a, s2: b, ..contact });
        }
    }
    found.sort_by(|x, y| x.s1.total_cmp(&y.s1));
    found
}

fn refine_contact(spec: &GeodesicSpec, s1: f64, s2: f64) -> Option<SelfContact> {
    let tangency = |a: f64, b: f64| {
        let mut r = spec.eval(a).into_inner() - spec.eval(b).into_inner();
        let rv = spec.velocity(a) + spec.velocity(b);
        let dim = r.len();
        r = r.resize_vertically(2 * dim, 0.0);
        r.rows_mut(dim, dim).copy_from(&rv);
        let mut j = crate::Matrix::zeros(2 * dim, 2);
        j.view_mut((0, 0), (dim, 1)).copy_from(&spec.velocity(a));
        j.view_mut((0, 1), (dim, 1)).copy_from(&-spec.velocity(b));
        j.view_mut((dim, 0), (dim, 1)).copy_from(&spec.acceleration(a));
        j.view_mut((dim, 1), (dim, 1)).copy_from(&spec.acceleration(b));
        (r, j)
    };
    let crossing = |a: f64, b: f64| {
        let r = spec.eval(a).into_inner() - spec.eval(b).into_inner();
        let dim = r.len();
        let mut j = crate::Matrix::zeros(dim, 2);
        j.view_mut((0, 0), (dim, 1)).copy_from(&spec.velocity(a));
        j.view_mut((0, 1), (dim, 1)).copy_from(&-spec.velocity(b));
        (r, j)
    };
    let finish =
        |a: f64, b: f64, kind| SelfContact { s1: a, s2: b, point: spec.eval(a).into_inner().as_slice().to_vec(), kind };

    if let Some((a, b)) = gauss_newton(tangency, s1, s2) {
        return Some(finish(a, b, ContactKind::OppositeTangency));
    }
    let (a, b) = gauss_newton(crossing, s1, s2)?;
    // A crossing needs non-parallel velocities.
    let (va, vb) = (spec.velocity(a), spec.velocity(b));
    let sin = (1.0 - (va.dot(&vb) / (va.norm() * vb.norm())).powi(2)).max(0.0).sqrt();
    (sin > 1e-3).then(|| finish(a, b, ContactKind::Crossing))
}

fn gauss_newton<F>(system: F, mut a: f64, mut b: f64) -> Option<(f64, f64)>
where
    F: Fn(f64, f64) -> (Vector, crate::Matrix),
{
    let (a0, b0) = (a, b);
    for _ in 0..60 {
        let (r, j) = system(a, b);
        if r.norm() < 1e-14 {
            return Some((a, b));
        }
        let jt = j.transpose();
        let normal = &jt * &j;
        let rhs = -(&jt * &r);
        let step = normal.lu().solve(&rhs)?;
        a += step[0];
        b += step[1];
        if (a - a0).abs() > 0.5 || (b - b0).abs() > 0.5 {
            return None;
        }
    }
    let (r, _) = system(a, b);
    (r.norm() < 1e-11).then_some((a, b))
}
