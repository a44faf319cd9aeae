//! Central finite differences on ambient scalar functions.

use crate::{Error, Result, Vector};

pub const FIRST_STEP: f64 = 1e-5;
pub const SECOND_STEP: f64 = 1e-4;
const MIN_STEP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    #[default]
    Central2,
    Central4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub first_step: f64,
    pub second_step: f64,
    pub stencil: Stencil,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { first_step: FIRST_STEP, second_step: SECOND_STEP, stencil: Stencil::Central2 }
    }
}

impl FdConfig {
    pub fn fourth_order() -> Self {
        Self { first_step: 1e-3, second_step: 1e-3, stencil: Stencil::Central4 }
    }

    pub fn validate(&self) -> Result<()> {
        for h in [self.first_step, self.second_step] {
            if !(h >= MIN_STEP) || !h.is_finite() {
                return Err(Error::InvalidArgument(format!("finite-difference step {h:e} underflows")));
            }
        }
        Ok(())
    }
}

fn shifted(x: &Vector, dir: &Vector, h: f64) -> Vector {
    let mut y = x.clone();
    y.axpy(h, dir, 1.0);
    y
}

/// Derivative of `f` at `x` along `dir` (not normalized).
pub fn directional<F: Fn(&Vector) -> f64>(f: &F, x: &Vector, dir: &Vector, h: f64, stencil: Stencil) -> f64 {
    match stencil {
        Stencil::Central2 => (f(&shifted(x, dir, h)) - f(&shifted(x, dir, -h))) / (2.0 * h),
        Stencil::Central4 => {
            let p1 = f(&shifted(x, dir, h));
            let m1 = f(&shifted(x, dir, -h));
            let p2 = f(&shifted(x, dir, 2.0 * h));
            let m2 = f(&shifted(x, dir, -2.0 * h));
            (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h)
        }
    }
}

fn unit(dim: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(dim);
    e[i] = 1.0;
    e
}

pub fn gradient<F: Fn(&Vector) -> f64>(f: &F, x: &Vector, h: f64, stencil: Stencil) -> Vector {
    let dim = x.len();
    Vector::from_fn(dim, |i, _| directional(f, x, &unit(dim, i), h, stencil))
}

/// Second derivative along `dir`.
pub fn second_directional<F: Fn(&Vector) -> f64>(f: &F, x: &Vector, dir: &Vector, h: f64, stencil: Stencil) -> f64 {
    let f0 = f(x);
    match stencil {
        Stencil::Central2 => (f(&shifted(x, dir, h)) - 2.0 * f0 + f(&shifted(x, dir, -h))) / (h * h),
        Stencil::Central4 => {
            let p1 = f(&shifted(x, dir, h));
            let m1 = f(&shifted(x, dir, -h));
            let p2 = f(&shifted(x, dir, 2.0 * h));
            let m2 = f(&shifted(x, dir, -2.0 * h));
            (-p2 + 16.0 * p1 - 30.0 * f0 + 16.0 * m1 - m2) / (12.0 * h * h)
        }
    }
}

pub fn laplacian<F: Fn(&Vector) -> f64>(f: &F, x: &Vector, h: f64, stencil: Stencil) -> f64 {
    let dim = x.len();
    (0..dim).map(|i| second_directional(f, x, &unit(dim, i), h, stencil)).sum()
}
