//! Numerical toolkit for Randers spheres `(S^n, F_Q)` obtained by Zermelo
//! navigation from the round sphere and the rotational Killing field
//! `V = Qx`, `Q ∈ o(n+1)`.
//!
//! The crate covers closed-form geodesics and their closedness, the
//! Cartan-Münzner polynomials of degree 1 and 2, the `ψ` map that transports
//! Riemannian isoparametric functions to `F_Q`, and the resulting
//! isoparametric families and focal submanifolds. Every construction comes
//! with an independent numerical check (finite differences, Euler-Lagrange
//! residuals, scan-based root finding).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cm;
pub mod error;
pub mod families;
pub mod fd;
pub mod geodesic;
pub mod io;
pub mod iso;
pub mod metric;
pub mod quadrature;
pub mod rational;
pub mod roots;
pub mod sampling;
pub mod skew;

pub use cm::CmPolynomial;
pub use error::{Error, Result};
pub use geodesic::{ClosednessReport, GeodesicSpec, Verdict};
pub use iso::{GeneralZeta, IsoFunction};
pub use metric::NavigationDatum;
pub use skew::{Rotation, SkewGenerator, SpherePoint, StandardForm, TangentVector};

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}
