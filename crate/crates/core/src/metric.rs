//! The Randers metric `F_Q` of the navigation datum `(h, V = Qx)` on `S^n`,
//! its dual norm on differentials, and sphere differential operators acting
//! on degree-0 homogeneous extensions.

use crate::fd::{self, FdConfig};
use crate::{Error, Result, SkewGenerator, SpherePoint, TangentVector, Vector};

/// Below this `|du|_h` a point is treated as critical (focal).
pub const DEGENERATE_GRADIENT: f64 = 1e-7;

/// A scalar field on `R^{n+1}` with a declared positive homogeneity degree.
pub trait ScalarField: Sync {
    fn eval(&self, x: &Vector) -> f64;

    fn degree(&self) -> i32 {
        0
    }
}

/// Wraps a closure as a [`ScalarField`].
pub struct FnField<F> {
    f: F,
    degree: i32,
}

impl<F: Fn(&Vector) -> f64 + Sync> FnField<F> {
    pub fn new(degree: i32, f: F) -> Self {
        Self { f, degree }
    }
}

impl<F: Fn(&Vector) -> f64 + Sync> ScalarField for FnField<F> {
    fn eval(&self, x: &Vector) -> f64 {
        (self.f)(x)
    }

    fn degree(&self) -> i32 {
        self.degree
    }
}

/// Largest relative deviation from `u(tx) = t^k u(x)` over the given rays and
/// scale factors.
pub fn homogeneity_defect<S: ScalarField + ?Sized>(u: &S, rays: &[Vector], scales: &[f64]) -> f64 {
    let k = u.degree();
    let mut worst: f64 = 0.0;
    for x in rays {
        let base = u.eval(x);
        for &t in scales {
            let lhs = u.eval(&(x * t));
            let rhs = t.powi(k) * base;
            worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        }
    }
    worst
}

/// `x ↦ u(x / |x|)`, the degree-0 extension of the restriction of `u` to the sphere.
pub fn degree_zero<S: ScalarField + ?Sized>(u: &S) -> impl Fn(&Vector) -> f64 + '_ {
    move |x: &Vector| u.eval(&(x / x.norm()))
}

/// The navigation datum `(h, V = Qx)` with an admissible `Q`.
#[derive(Debug, Clone)]
pub struct NavigationDatum {
    q: SkewGenerator,
}

impl NavigationDatum {
    pub fn new(q: SkewGenerator) -> Result<Self> {
        q.require_admissible()?;
        Ok(Self { q })
    }

    pub fn generator(&self) -> &SkewGenerator {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    /// `F_Q(x, y) = (√(λ|y|² + V₀²) − V₀)/λ`, `λ = 1 − |Qx|²`, `V₀ = ⟨Qx, y⟩`,
    /// evaluated for arbitrary ambient `(x, y)`.
    pub fn metric_ambient(&self, x: &Vector, y: &Vector) -> f64 {
        let v = self.q.apply(x);
        let lambda = 1.0 - v.norm_squared();
        let v0 = v.dot(y);
        let disc = (lambda * y.norm_squared() + v0 * v0).sqrt();
        // Rationalized form avoids cancellation when V₀ > 0.
        if v0 > 0.0 {
            y.norm_squared() / (disc + v0)
        } else {
            (disc - v0) / lambda
        }
    }

    pub fn metric_eval(&self, y: &TangentVector) -> Result<f64> {
        self.q.check_dim(y.vec().len())?;
        Ok(self.metric_ambient(y.base().coords(), y.vec()))
    }

    /// `F_Q(x, y)` with tangency checked.
    pub fn metric_at(&self, x: &SpherePoint, y: &Vector) -> Result<f64> {
        let t = TangentVector::new(x.clone(), y.clone())?;
        self.metric_eval(&t)
    }

    /// `F_Q(∇u) = |du|_h + ⟨du, V⟩` from the `h`-gradient of `u`.
    pub fn dual_norm(&self, grad_h: &TangentVector) -> Result<f64> {
        self.q.check_dim(grad_h.vec().len())?;
        let v = self.q.apply(grad_h.base().coords());
        Ok(grad_h.norm() + grad_h.vec().dot(&v))
    }

    /// The two left-hand sides of the isoparametric system for `(S^n, F_Q)`.
    ///
    /// `A = |du|_h + ⟨du, V⟩` and
    /// `B = Δ^h u / |du|_h + ⟨d⟨du, V⟩, du⟩_h / |du|_h²` (`div V = 0`).
    pub fn iso_system_lhs<S: ScalarField + ?Sized>(&self, u: &S, x: &SpherePoint, cfg: &FdConfig) -> Result<IsoLhs> {
        self.q.check_dim(x.dim())?;
        cfg.validate()?;
        let ext = degree_zero(u);
        let grad = sphere_gradient_with(&ext, x, cfg);
        let norm = grad.norm();
        if norm < DEGENERATE_GRADIENT {
            return Err(Error::DegenerateGradient { norm });
        }
        let a = norm + grad.vec().dot(&self.q.apply(x.coords()));

        let lap = fd::laplacian(&ext, x.coords(), cfg.second_step, cfg.stencil);
        let w = |z: &Vector| {
            let g = fd::gradient(&ext, z, cfg.first_step, cfg.stencil);
            g.dot(&self.q.apply(z))
        };
        let dir = grad.vec() / norm;
        let dw = fd::directional(&w, x.coords(), &dir, cfg.second_step, cfg.stencil);
        let b = lap / norm + dw / norm;
        Ok(IsoLhs { a, b, grad_norm: norm })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoLhs {
    pub a: f64,
    pub b: f64,
    pub grad_norm: f64,
}

fn sphere_gradient_with<F: Fn(&Vector) -> f64>(ext: &F, x: &SpherePoint, cfg: &FdConfig) -> TangentVector {
    let g = fd::gradient(ext, x.coords(), cfg.first_step, cfg.stencil);
    TangentVector::project(x.clone(), &g)
}

/// `∇^h u` at `x`, computed as the Euclidean gradient of the degree-0 extension.
pub fn sphere_gradient<S: ScalarField + ?Sized>(u: &S, x: &SpherePoint) -> TangentVector {
    sphere_gradient_cfg(u, x, &FdConfig::default())
}

pub fn sphere_gradient_cfg<S: ScalarField + ?Sized>(u: &S, x: &SpherePoint, cfg: &FdConfig) -> TangentVector {
    sphere_gradient_with(&degree_zero(u), x, cfg)
}

/// `Δ^h u` at `x`, the Euclidean Laplacian of the degree-0 extension.
pub fn sphere_laplacian<S: ScalarField + ?Sized>(u: &S, x: &SpherePoint) -> Result<f64> {
    sphere_laplacian_cfg(u, x, &FdConfig::default())
}

pub fn sphere_laplacian_cfg<S: ScalarField + ?Sized>(u: &S, x: &SpherePoint, cfg: &FdConfig) -> Result<f64> {
    cfg.validate()?;
    let ext = degree_zero(u);
    Ok(fd::laplacian(&ext, x.coords(), cfg.second_step, cfg.stencil))
}
