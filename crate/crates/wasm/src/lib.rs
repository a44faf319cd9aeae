//! Browser bindings for the `S²` demo. Point clouds cross the boundary as flat
//! `[x0, y0, z0, x1, ...]` arrays.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use randers_core::families;
use randers_core::geodesic::{self, DEFAULT_CLOSEDNESS_TOL, DEFAULT_MAX_DENOMINATOR};
use randers_core::{CmPolynomial, IsoFunction, SkewGenerator, SpherePoint};
use wasm_bindgen::prelude::*;

fn js(err: impl std::fmt::Display) -> JsError {
    JsError::new(&err.to_string())
}

fn flatten<'a>(points: impl IntoIterator<Item = &'a SpherePoint>) -> Vec<f64> {
    points.into_iter().flat_map(|p| p.coords().iter().copied()).collect()
}

fn plane_example(rate: f64) -> randers_core::Result<IsoFunction> {
    let q = SkewGenerator::from_planes(3, &[(0, 2, rate)])?;
    IsoFunction::new(CmPolynomial::coordinate(3, 0)?, q)
}

/// Unit-speed geodesic from `e₁` with generator `(a, b, c)` on `[0, s_max]`.
#[wasm_bindgen]
pub fn geodesic_s2(a: f64, b: f64, c: f64, s_max: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    if samples < 2 || !(s_max > 0.0) {
        return Err(js("need samples >= 2 and s_max > 0"));
    }
    let spec = geodesic::s2_spec(a, b, c).map_err(js)?;
    let points: Vec<_> = spec.sample(0.0, s_max, samples).into_iter().map(|(_, p)| p).collect();
    Ok(flatten(&points))
}

/// Closedness report as JSON.
#[wasm_bindgen]
pub fn classify(a: f64, b: f64, c: f64) -> Result<String, JsError> {
    let report = geodesic::classify_closedness(a, b, c, DEFAULT_CLOSEDNESS_TOL, DEFAULT_MAX_DENOMINATOR).map_err(js)?;
    serde_json::to_string(&report).map_err(js)
}

/// Members of the family of `⟨x, e₁⟩ ∘ ψ⁻¹` with `Q₁₃ = rate`, one block of
/// `count` points per entry of `ts`, followed by the two focal sets.
#[wasm_bindgen]
pub fn family_s2(rate: f64, ts: Vec<f64>, count: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    let f = plane_example(rate).map_err(js)?;
    let level = families::sample_level(&f, 0.0, count, seed).map_err(js)?;
    let mut out = Vec::with_capacity(3 * count * (ts.len() + 2));
    for t in ts {
        let snap = families::family_snapshot(&f, &level, t).map_err(js)?;
        out.extend(flatten(&snap.points));
    }
    let (plus, minus) = families::focal_submanifolds(&f, &level).map_err(js)?;
    out.extend(flatten(&plus.points));
    out.extend(flatten(&minus.points));
    Ok(out)
}

/// `f(y)` for the same example, for picking on the canvas.
#[wasm_bindgen]
pub fn iso_value(rate: f64, x: f64, y: f64, z: f64) -> Result<f64, JsError> {
    let f = plane_example(rate).map_err(js)?;
    let p = SpherePoint::from_slice(&[x, y, z]).map_err(js)?;
    f.iso_eval(&p).map_err(js)
}
