//! Continued-fraction rational approximation of floats.

use serde::Serialize;

/// `num/den` approximating `value`; `defect = |den·value − num|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalApprox {
    pub value: f64,
    pub num: i64,
    pub den: u64,
    pub defect: f64,
}

/// Continued-fraction convergents of `x` with denominators up to `max_den`.
pub fn convergents(x: f64, max_den: u64) -> Vec<(i64, u64)> {
    let mut out = Vec::new();
    if !x.is_finite() {
        return out;
    }
    let (mut h_prev, mut h) = (1i128, x.floor() as i128);
    let (mut k_prev, mut k) = (0i128, 1i128);
    let mut rem = x - x.floor();
    out.push((h as i64, k as u64));
    for _ in 0..64 {
        if rem < 1e-15 {
            break;
        }
        let inv = 1.0 / rem;
        let a = inv.floor();
        if !a.is_finite() || a > 1e15 {
            break;
        }
        rem = inv - a;
        let a = a as i128;
        let h_next = a * h + h_prev;
        let k_next = a * k + k_prev;
        if k_next > max_den as i128 {
            break;
        }
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
        out.push((h as i64, k as u64));
    }
    out
}

/// First convergent with `defect ≤ tol`, or the best one available (the last
/// convergent within `max_den`) when none qualifies.
pub fn approximate(x: f64, tol: f64, max_den: u64) -> RationalApprox {
    let mut best = RationalApprox { value: x, num: 0, den: 1, defect: f64::INFINITY };
    for (num, den) in convergents(x, max_den) {
        let cand = RationalApprox { value: x, num, den, defect: (den as f64 * x - num as f64).abs() };
        if cand.defect <= tol {
            return cand;
        }
        if cand.defect < best.defect {
            best = cand;
        }
    }
    best
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}
