//! The `ψ` map `x ↦ exp(ζ(φ(x)/|x|^g) Q) x` and the isoparametric function
//! `f = f̄ ∘ ψ⁻¹` of `(S^n, F_Q)`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::Serialize;

use crate::fd::FdConfig;
use crate::metric::{NavigationDatum, ScalarField};
use crate::{families, quadrature, roots, sampling, CmPolynomial, Error, Result, SkewGenerator, SpherePoint, Vector};

/// Ratios `|φ(x)|/|x|^g` up to `1 + CLAMP_BAND` are clamped to `±1`.
pub const CLAMP_BAND: f64 = 1e-9;
const BRACKET_PAD: f64 = 1e-6;
const ROUND_TRIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped {
    pub value: f64,
    pub clamped: bool,
}

/// `(1/g) arcsin t`, clamping `|t| ∈ (1, 1 + CLAMP_BAND]` onto `±1`.
pub fn zeta(g: u32, t: f64) -> Result<Clamped> {
    if !(t.abs() <= 1.0 + CLAMP_BAND) {
        return Err(Error::OutOfRange { value: t });
    }
    let clamped = t.abs() > 1.0;
    Ok(Clamped { value: t.clamp(-1.0, 1.0).asin() / g as f64, clamped })
}

pub fn zeta_inv(g: u32, theta: f64) -> f64 {
    (g as f64 * theta).sin()
}

/// `ζ(t) = ∫_{t₀}^t dθ / a(θ)` for a positive profile `a` on `(c, d)`.
///
/// The substitution `θ = c + (d − c) sin² u` absorbs square-root zeros of `a`
/// at the endpoints.
pub struct GeneralZeta {
    profile: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    c: f64,
    d: f64,
    t0: f64,
}

impl fmt::Debug for GeneralZeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralZeta").field("c", &self.c).field("d", &self.d).field("t0", &self.t0).finish()
    }
}

impl GeneralZeta {
    pub fn new<A>(profile: A, c: f64, d: f64, t0: f64) -> Result<Self>
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(c < d) || !(c < t0 && t0 < d) {
            return Err(Error::InvalidArgument(format!("need c < t0 < d, got ({c}, {t0}, {d})")));
        }
        Ok(Self { profile: Box::new(profile), c, d, t0 })
    }

    /// The profile `a(t) = g√(1 − t²)` of a degree-`g` Cartan-Münzner polynomial.
    pub fn cartan_munzner(g: u32) -> Self {
        let g = g as f64;
        Self { profile: Box::new(move |t: f64| g * (1.0 - t * t).sqrt()), c: -1.0, d: 1.0, t0: 0.0 }
    }

    fn angle(&self, t: f64) -> f64 {
        ((t - self.c) / (self.d - self.c)).clamp(0.0, 1.0).sqrt().asin()
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(self.c..=self.d).contains(&t) {
            return Err(Error::OutOfRange { value: t });
        }
        let span = self.d - self.c;
        let integrand = |u: f64| {
            let (s, co) = u.sin_cos();
            let theta = self.c + span * s * s;
            let jac = 2.0 * span * s * co;
            jac / (self.profile)(theta)
        };
        quadrature::integrate(integrand, self.angle(self.t0), self.angle(t), 1e-13, 2000)
    }
}

/// `f = f̄ ∘ ψ⁻¹` for a Cartan-Münzner polynomial `φ` and admissible `Q`.
#[derive(Debug, Clone)]
pub struct IsoFunction {
    phi: CmPolynomial,
    q: SkewGenerator,
}

impl IsoFunction {
    pub fn new(phi: CmPolynomial, q: SkewGenerator) -> Result<Self> {
        q.require_admissible()?;
        phi.check_dim(q.dim())?;
        Ok(Self { phi, q })
    }

    pub fn phi(&self) -> &CmPolynomial {
        &self.phi
    }

    pub fn generator(&self) -> &SkewGenerator {
        &self.q
    }

    pub fn g(&self) -> u32 {
        self.phi.g()
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    /// The focal offset `π/(2g)`.
    pub fn focal_offset(&self) -> f64 {
        FRAC_PI_2 / self.g() as f64
    }

    pub fn zeta(&self, t: f64) -> Result<f64> {
        zeta(self.g(), t).map(|z| z.value)
    }

    /// Rotation angle `ζ(φ(x)/|x|^g)` of `ψ` at `x ≠ 0`.
    pub fn angle(&self, x: &Vector) -> Result<f64> {
        if x.norm() == 0.0 {
            return Err(Error::InvalidArgument("ψ is undefined at the origin".into()));
        }
        self.zeta(self.phi.normalized(x))
    }

    pub fn psi_forward(&self, x: &Vector) -> Result<Vector> {
        self.q.check_dim(x.len())?;
        Ok(self.q.exp_apply(self.angle(x)?, x))
    }

    /// `ψ` restricted to the sphere.
    pub fn psi_point(&self, x: &SpherePoint) -> Result<SpherePoint> {
        Ok(SpherePoint::new_unchecked(self.psi_forward(x.coords())?))
    }

    /// `ψ⁻¹(y)` by solving `t = ζ(f̄(exp(−tQ) y))` on `[−π/(2g) − ε, π/(2g) + ε]`.
    pub fn psi_inverse(&self, y: &SpherePoint) -> Result<SpherePoint> {
        self.q.check_dim(y.dim())?;
        let (lo, hi) = self.bracket();
        let t = roots::brent(|t| self.residual(t, y.coords()), lo, hi, 1e-16, 200)
            .map_err(|e| Error::Inconsistency(format!("ψ⁻¹ bracket failed: {e}")))?;
        self.finish_inverse(t, y)
    }

    /// Oracle for [`psi_inverse`](Self::psi_inverse): dense scan of `points`
    /// angles followed by bisection.
    pub fn psi_inverse_scan(&self, y: &SpherePoint, points: usize) -> Result<SpherePoint> {
        self.q.check_dim(y.dim())?;
        let (lo, hi) = self.bracket();
        let t = roots::scan_bisect(|t| self.residual(t, y.coords()), lo, hi, points)?;
        Ok(SpherePoint::new_unchecked(self.q.exp_apply(-t, y.coords())))
    }

    fn bracket(&self) -> (f64, f64) {
        let h = self.focal_offset() + BRACKET_PAD;
        (-h, h)
    }

    fn residual(&self, t: f64, y: &Vector) -> f64 {
        let x = self.q.exp_apply(-t, y);
        let ratio = self.phi.normalized(&x).clamp(-1.0, 1.0);
        ratio.asin() / self.g() as f64 - t
    }

    fn finish_inverse(&self, t: f64, y: &SpherePoint) -> Result<SpherePoint> {
        let x = SpherePoint::new_unchecked(self.q.exp_apply(-t, y.coords()));
        let back = self.psi_forward(x.coords())?;
        let err = (back - y.coords()).norm();
        if err > ROUND_TRIP_TOL {
            return Err(Error::Inconsistency(format!("ψ(ψ⁻¹(y)) misses y by {err:e}")));
        }
        Ok(x)
    }

    /// `f(y) = f̄(ψ⁻¹(y))`.
    pub fn iso_eval(&self, y: &SpherePoint) -> Result<f64> {
        Ok(self.phi.normalized(self.psi_inverse(y)?.coords()))
    }

    /// The degree-0 field `y ↦ f(y/|y|)` for finite-difference operators.
    pub fn field(&self) -> IsoField<'_> {
        IsoField { f: self }
    }
}

/// [`IsoFunction`] viewed as a degree-0 [`ScalarField`]; points where the
/// inversion fails evaluate to NaN.
pub struct IsoField<'a> {
    f: &'a IsoFunction,
}

impl ScalarField for IsoField<'_> {
    fn eval(&self, x: &Vector) -> f64 {
        SpherePoint::normalize(x.clone()).and_then(|y| self.f.iso_eval(&y)).unwrap_or(f64::NAN)
    }
}

/// `f̄` itself, ignoring `ψ`: the negative control for [`iso_verify`].
struct IdentityField<'a>(&'a CmPolynomial);

impl ScalarField for IdentityField<'_> {
    fn eval(&self, x: &Vector) -> f64 {
        self.0.normalized(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inverse {
    #[default]
    Exact,
    /// Replace `ψ⁻¹` by the identity.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub levels: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub fd: FdConfig,
    pub inverse: Inverse,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            levels: vec![-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75],
            samples: 500,
            seed: 0,
            fd: FdConfig::default(),
            inverse: Inverse::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStats {
    pub t: f64,
    pub points: usize,
    pub a_dev: f64,
    pub b_mean: f64,
    pub b_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub levels: Vec<LevelStats>,
    #[serde(rename = "maxA_dev")]
    pub max_a_dev: f64,
    #[serde(rename = "maxB_spread")]
    pub max_b_spread: f64,
    pub excluded_near_focal: usize,
    pub samples: usize,
    pub seed: u64,
    pub inverse: Inverse,
}

impl VerificationReport {
    pub fn passes(&self, a_tol: f64, b_tol: f64) -> bool {
        self.max_a_dev < a_tol && self.max_b_spread < b_tol
    }
}

/// Evaluates both sides of the isoparametric system at points of prescribed
/// levels of `f` and reports `max |A − g√(1−f²)|` and the per-level spread of `B`.
///
/// Points on level `t` are images `ψ(x̄)` of samples `x̄` of `f̄⁻¹(t)`; points
/// with `|∇f|_h` below the degeneracy threshold are excluded and counted.
pub fn iso_verify(f: &IsoFunction, opts: &VerifyOptions) -> Result<VerificationReport> {
    opts.fd.validate()?;
    if opts.samples == 0 || opts.levels.is_empty() {
        return Err(Error::InvalidArgument("need at least one level and one sample".into()));
    }
    if let Some(&t) = opts.levels.iter().find(|t| !(t.abs() < 1.0)) {
        return Err(Error::OutOfRange { value: t });
    }
    let datum = NavigationDatum::new(f.generator().clone())?;
    let g = f.g() as f64;
    let per_level = opts.samples.div_ceil(opts.levels.len());
    let mut rng = sampling::seeded(opts.seed);

    let mut jobs: Vec<(usize, SpherePoint)> = Vec::with_capacity(per_level * opts.levels.len());
    for (li, &t) in opts.levels.iter().enumerate() {
        let level = families::sample_level_with(f.phi(), t, per_level, &mut rng)?;
        jobs.extend(level.into_iter().map(|x| (li, x)));
    }
    jobs.truncate(opts.samples);

    let exact = f.field();
    let identity = IdentityField(f.phi());
    let evaluated = crate::par_map(&jobs, |(li, xbar)| -> Result<Option<(usize, f64, f64)>> {
        let y = SpherePoint::new_unchecked(f.psi_forward(xbar.coords())?);
        let (value, lhs) = match opts.inverse {
            Inverse::Exact => (f.iso_eval(&y)?, datum.iso_system_lhs(&exact, &y, &opts.fd)),
            Inverse::Identity => (f.phi().normalized(y.coords()), datum.iso_system_lhs(&identity, &y, &opts.fd)),
        };
        match lhs {
            Ok(l) => Ok(Some((*li, (l.a - g * (1.0 - value * value).max(0.0).sqrt()).abs(), l.b))),
            Err(Error::DegenerateGradient { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    });

    let mut excluded = 0;
    let mut buckets: Vec<Vec<(f64, f64)>> = vec![Vec::new(); opts.levels.len()];
    for r in evaluated {
        match r? {
            Some((li, a_dev, b)) => buckets[li].push((a_dev, b)),
            None => excluded += 1,
        }
    }
    let levels: Vec<LevelStats> = opts
        .levels
        .iter()
        .zip(&buckets)
        .map(|(&t, rows)| {
            let a_dev = rows.iter().map(|r| r.0).fold(0.0, f64::max);
            let b_max = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
            let b_min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
            let b_mean = rows.iter().map(|r| r.1).sum::<f64>() / rows.len().max(1) as f64;
            let b_spread = if rows.is_empty() { 0.0 } else { b_max - b_min };
            LevelStats { t, points: rows.len(), a_dev, b_mean, b_spread }
        })
        .collect();
    Ok(VerificationReport {
        max_a_dev: levels.iter().map(|l| l.a_dev).fold(0.0, f64::max),
        max_b_spread: levels.iter().map(|l| l.b_spread).fold(0.0, f64::max),
        levels,
        excluded_near_focal: excluded,
        samples: jobs.len() - excluded,
        seed: opts.seed,
        inverse: opts.inverse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn planar() -> IsoFunction {
        let q = SkewGenerator::from_planes(3, &[(0, 2, 0.5)]).unwrap();
        IsoFunction::new(CmPolynomial::coordinate(3, 0).unwrap(), q).unwrap()
    }

    fn quadric(p: usize, q: usize, a: f64) -> IsoFunction {
        let gen = SkewGenerator::from_planes(p + q + 2, &[(p, p + 1, a)]).unwrap();
        IsoFunction::new(CmPolynomial::clifford(p, q), gen).unwrap()
    }

    #[test]
    fn zeta_values() {
        assert_eq!(zeta(1, 0.0).unwrap().value, 0.0);
        assert_abs_diff_eq!(zeta(2, 1.0).unwrap().value, FRAC_PI_4, epsilon = 1e-16);
        let z = zeta(1, 1.0 + 5e-10).unwrap();
        assert!(z.clamped);
        assert_eq!(z.value, FRAC_PI_2);
        assert!(zeta(1, 1.0 + 1e-8).is_err());
        let mut rng = sampling::seeded(4);
        for _ in 0..1000 {
            let t: f64 = rng.random_range(-1.0..1.0);
            for g in [1, 2, 3] {
                assert_abs_diff_eq!(zeta_inv(g, zeta(g, t).unwrap().value), t, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn general_zeta_matches_closed_forms() {
        let unit = GeneralZeta::new(|_| 1.0, -1.0, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(unit.eval(0.3).unwrap(), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(GeneralZeta::cartan_munzner(1).eval(1.0).unwrap(), FRAC_PI_2, epsilon = 1e-10);
        assert_abs_diff_eq!(GeneralZeta::cartan_munzner(2).eval(1.0).unwrap(), FRAC_PI_4, epsilon = 1e-10);
        for g in [1, 2, 4] {
            let gz = GeneralZeta::cartan_munzner(g);
            for t in [-1.0, -0.9, -0.3, 0.0, 0.45, 0.99] {
                assert_abs_diff_eq!(gz.eval(t).unwrap(), zeta(g, t).unwrap().value, epsilon = 1e-10);
            }
        }
        assert!(GeneralZeta::cartan_munzner(1).eval(1.5).is_err());
        assert!(GeneralZeta::new(|_| 1.0, 1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn general_zeta_reports_divergence() {
        let gz = GeneralZeta::new(|t: f64| 1.0 - t, -1.0, 1.0, 0.0).unwrap();
        assert!(gz.eval(1.0).is_err());
    }

    #[test]
    fn psi_fixes_zero_level_and_rotates_poles() {
        let f = planar();
        let x = Vector::from_column_slice(&[0.0, 0.6, 0.8]);
        assert_eq!(f.psi_forward(&x).unwrap(), x);
        let p = Vector::from_column_slice(&[1.0, 0.0, 0.0]);
        let img = f.psi_forward(&p).unwrap();
        assert_abs_diff_eq!(
            (img - Vector::from_column_slice(&[FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2])).amax(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn psi_matches_dense_matrix_exponential() {
        let q = SkewGenerator::from_planes(5, &[(0, 1, 0.4), (2, 3, -0.25)]).unwrap();
        let f = IsoFunction::new(CmPolynomial::clifford(1, 2), q.clone()).unwrap();
        let mut rng = sampling::seeded(8);
        for _ in 0..50 {
            let x = sampling::gaussian_vector(&mut rng, 5);
            let dense = (q.entries() * f.angle(&x).unwrap()).exp() * &x;
            assert_abs_diff_eq!((f.psi_forward(&x).unwrap() - dense).amax(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn psi_is_norm_preserving_and_homogeneous() {
        let f = quadric(1, 2, 0.3);
        let mut rng = sampling::seeded(2);
        for _ in 0..100 {
            let x = sampling::gaussian_vector(&mut rng, 5);
            let y = f.psi_forward(&x).unwrap();
            assert_abs_diff_eq!(y.norm(), x.norm(), epsilon = 1e-13);
            let scaled = f.psi_forward(&(&x * 3.5)).unwrap();
            assert_abs_diff_eq!((scaled - y * 3.5).amax(), 0.0, epsilon = 1e-12);
        }
        assert!(f.psi_forward(&Vector::zeros(5)).is_err());
    }

    #[test]
    fn quadric_psi_matches_explicit_display() {
        let (p, a) = (1, 0.3);
        let f = quadric(p, 2, a);
        let x = Vector::from_column_slice(&[0.2, -0.5, 0.4, 0.6, -0.1]);
        let r2 = x.norm_squared();
        let theta = a * ((x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3] - x[4] * x[4]) / r2).asin() / 2.0;
        let mut expected = x.clone();
        expected[p] = theta.cos() * x[p] + theta.sin() * x[p + 1];
        expected[p + 1] = -theta.sin() * x[p] + theta.cos() * x[p + 1];
        let got = f.psi_forward(&x).unwrap();
        assert_abs_diff_eq!((got - expected).amax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn inverse_round_trip_and_scan_oracle() {
        for f in [planar(), quadric(1, 1, 0.6)] {
            let mut rng = sampling::seeded(5);
            for _ in 0..100 {
                let x = sampling::sphere_point(&mut rng, f.dim());
                let y = SpherePoint::new_unchecked(f.psi_forward(x.coords()).unwrap());
                let back = f.psi_inverse(&y).unwrap();
                assert!((back.coords() - x.coords()).norm() < 1e-10);
                let scan = f.psi_inverse_scan(&y, 10_000).unwrap();
                assert!((scan.coords() - back.coords()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn riemannian_case_is_identity() {
        let f = IsoFunction::new(CmPolynomial::clifford(1, 1), SkewGenerator::zeros(4)).unwrap();
        let y = SpherePoint::from_slice(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(f.psi_inverse(&y).unwrap(), y);
        let z = SpherePoint::normalize(Vector::from_column_slice(&[1.0, 2.0, 0.3, -0.7])).unwrap();
        assert_abs_diff_eq!(f.iso_eval(&z).unwrap(), f.phi().normalized(z.coords()), epsilon = 1e-14);
    }

    #[test]
    fn iso_eval_on_rotated_levels() {
        let f = planar();
        for s in [-1.2, -0.4, 0.0, 0.7, 1.5] {
            // exp(sQ) maps the level ⟨x, e₁⟩ = sin s to the level sin s of f.
            let xbar = Vector::from_column_slice(&[f64::sin(s), f64::cos(s) * 0.6, f64::cos(s) * 0.8]);
            let y = SpherePoint::new_unchecked(f.generator().exp_apply(s, &xbar));
            assert_abs_diff_eq!(f.iso_eval(&y).unwrap(), s.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn verification_small_run() {
        let opts = VerifyOptions { samples: 21, levels: vec![-0.5, 0.0, 0.5], ..Default::default() };
        let rep = iso_verify(&planar(), &opts).unwrap();
        assert!(rep.passes(2e-4, 5e-4), "{rep:?}");
        assert_eq!(rep.samples + rep.excluded_near_focal, 21);
        let control = iso_verify(&planar(), &VerifyOptions { inverse: Inverse::Identity, ..opts }).unwrap();
        assert!(control.max_a_dev > 1e-2);
    }

    #[test]
    fn verification_rejects_bad_levels() {
        let opts = VerifyOptions { levels: vec![1.0], ..Default::default() };
        assert!(iso_verify(&planar(), &opts).is_err());
    }
}
