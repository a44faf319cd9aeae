//! Seeded random sampling helpers shared by verification routines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Matrix, SkewGenerator, SpherePoint, TangentVector, Vector};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vector {
    Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Uniformly distributed point of `S^{dim-1}`.
pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> SpherePoint {
    loop {
        let v = gaussian_vector(rng, dim);
        if v.norm() > 1e-8 {
            return SpherePoint::normalize(v).expect("nonzero vector");
        }
    }
}

/// Uniformly distributed unit tangent vector at `x`.
pub fn unit_tangent<R: Rng + ?Sized>(rng: &mut R, x: &SpherePoint) -> TangentVector {
    loop {
        let t = TangentVector::project(x.clone(), &gaussian_vector(rng, x.dim()));
        let norm = t.norm();
        if norm > 1e-8 {
            return TangentVector::project(x.clone(), &(t.vec() / norm));
        }
    }
}

/// Random skew generator whose largest rotation rate is drawn from `[0, max_rate)`.
pub fn admissible_generator<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_rate: f64) -> SkewGenerator {
    let g = Matrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let skew = (&g - g.transpose()) * 0.5;
    let q = SkewGenerator::new(skew).expect("skew by construction");
    let top = q.max_rate();
    if top == 0.0 {
        return q;
    }
    let target = rng.random_range(0.05..1.0) * max_rate;
    SkewGenerator::new(q.entries() * (target / top)).expect("skew by construction")
}
