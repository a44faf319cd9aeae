use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::DVector;
use randers_core::families::{self, LevelSample};
use randers_core::geodesic::{self, el_residual, min_return_distance, s2_spec, GeodesicSpec, Verdict};
use randers_core::io::{self, Row};
use randers_core::iso::{iso_verify, Inverse, VerifyOptions};
use randers_core::{sampling, CmPolynomial, IsoFunction, NavigationDatum, SkewGenerator, SpherePoint};
use serde_json::{json, Value};

use crate::config::{self, ExampleSpec, RunConfig};
use crate::{ClassifyArgs, Common, ExampleArgs, FamilyArgs, FocalArgs, Format, GeodesicArgs, PsiArgs, VerifyArgs};

/// A command's JSON summary and the tolerance checks it failed.
pub struct Outcome {
    pub summary: Value,
    pub failures: Vec<String>,
}

const EL_STEP: f64 = 5e-4;
const EL_WINDOW: usize = 401;
const EL_TOL: f64 = 1e-4;
const CLOSURE_TOL: f64 = 1e-8;

fn s2_preset(fig1: bool, fig2: bool, abc: &Option<Vec<f64>>, cfg: &RunConfig) -> Option<([f64; 3], Option<f64>)> {
    if fig1 {
        Some(([0.0, 0.5, 0.0], Some(4.0 * PI)))
    } else if fig2 {
        Some(([0.0, 1.0 - FRAC_1_SQRT_2, 0.0], Some(29.0 * PI)))
    } else if let Some(v) = abc {
        Some(([v[0], v[1], v[2]], None))
    } else {
        cfg.abc.map(|abc| (abc, None))
    }
}

pub fn geodesic(args: &GeodesicArgs, common: &Common, cfg: &RunConfig) -> Result<Outcome> {
    let tol = config::positive("tol", common.tol.or(cfg.tol).unwrap_or(1e-9))?;
    let resolution = config::at_least("resolution", args.resolution.or(cfg.resolution).unwrap_or(2001), 2)?;
    let preset = s2_preset(args.fig1, args.fig2, &args.abc, cfg);

    let (spec, abc, preset_len) = match preset {
        Some((abc, len)) => (s2_spec(abc[0], abc[1], abc[2])?, Some(abc), len),
        None => {
            let (Some(q), Some(x), Some(v)) = (&cfg.q, &cfg.x, &cfg.velocity) else {
                bail!("geodesic needs --fig1, --fig2, --abc A B C, or a config with \"q\", \"x\" and \"velocity\"");
            };
            let q = q.build()?;
            let x = SpherePoint::from_slice(x)?;
            (GeodesicSpec::from_direction(q, x, &DVector::from_column_slice(v))?, None, None)
        }
    };
    let s_max = config::positive("s_max", args.s_max.or(cfg.s_max).or(preset_len).unwrap_or(4.0 * PI))?;
    let q = spec.generator().clone();
    let datum = NavigationDatum::new(q.clone())?;

    let samples = spec.sample(0.0, s_max, resolution);
    let mut speed_dev: f64 = 0.0;
    for (s, p) in &samples {
        speed_dev = speed_dev.max((datum.metric_at(p, &spec.velocity(*s))? - 1.0).abs());
    }
    let mut el: f64 = 0.0;
    for start in [0.0, 0.5 * s_max] {
        let window: Vec<_> = (0..EL_WINDOW).map(|k| spec.eval(start + k as f64 * EL_STEP).into_inner()).collect();
        el = el.max(el_residual(&q, &window, EL_STEP)?);
    }

    let mut failures = Vec::new();
    if speed_dev >= tol {
        failures.push(format!("unit speed deviation {speed_dev:e} exceeds {tol:e}"));
    }
    if el >= EL_TOL {
        failures.push(format!("Euler-Lagrange residual {el:e} exceeds {EL_TOL:e}"));
    }

    let mut closedness = Value::Null;
    let mut closure = Value::Null;
    if let Some([a, b, c]) = abc {
        let report = geodesic::classify_closedness(
            a,
            b,
            c,
            geodesic::DEFAULT_CLOSEDNESS_TOL,
            geodesic::DEFAULT_MAX_DENOMINATOR,
        )?;
        if let Some(t) = report.period {
            let dx = (spec.eval(t).into_inner() - spec.start().coords()).norm();
            let dv = (spec.velocity(t) - spec.initial_velocity()).norm();
            if dx >= CLOSURE_TOL || dv >= CLOSURE_TOL {
                failures.push(format!("closure residual ({dx:e}, {dv:e}) at T = {t} exceeds {CLOSURE_TOL:e}"));
            }
            closure = json!({ "period": t, "position": dx, "velocity": dv });
        } else if report.verdict == Verdict::NonClosed {
            let (s, d) = min_return_distance(&spec, 0.1_f64.min(s_max), s_max, 0.01);
            closure = json!({ "min_return_distance": d, "at": s });
        }
        closedness = serde_json::to_value(&report)?;
    }

    let csv = match &common.out {
        Some(path) => {
            let rows: Vec<Row> =
                samples.iter().map(|(s, p)| Row { param: *s, coords: p.coords().as_slice().to_vec() }).collect();
            write_with(path, |w| io::write_csv(w, "s", q.dim(), &rows))?;
            Value::String(path.display().to_string())
        }
        None => Value::Null,
    };

    Ok(Outcome {
        summary: json!({
            "command": "geodesic",
            "abc": abc,
            "s_max": s_max,
            "resolution": resolution,
            "unit_speed_max_dev": speed_dev,
            "el_residual_max": el,
            "closedness": closedness,
            "closure": closure,
            "csv": csv,
        }),
        failures,
    })
}

pub fn classify(args: &ClassifyArgs, common: &Common, cfg: &RunConfig) -> Result<Outcome> {
    let Some((abc, _)) = s2_preset(args.fig1, args.fig2, &args.abc, cfg) else {
        bail!("classify needs --fig1, --fig2, --abc A B C, or \"abc\" in the config");
    };
    let tol = config::positive("tol", common.tol.or(cfg.tol).unwrap_or(geodesic::DEFAULT_CLOSEDNESS_TOL))?;
    let max_den = args.max_denominator.or(cfg.max_denominator).unwrap_or(geodesic::DEFAULT_MAX_DENOMINATOR);
    let report = geodesic::classify_closedness(abc[0], abc[1], abc[2], tol, max_den)?;
    let mut failures = Vec::new();
    if let Some(expect) = args.expect {
        if expect.verdict() != report.verdict {
            failures.push(format!("expected {expect:?}, classified {:?}", report.verdict));
        }
    }
    let mut summary = serde_json::to_value(&report)?;
    summary["command"] = json!("classify");
    summary["abc"] = json!(abc);
    Ok(Outcome { summary, failures })
}

fn resolve_iso(ex: &ExampleArgs, cfg: &RunConfig) -> Result<(String, IsoFunction, Option<ExampleSpec>)> {
    if let Some(name) = ex.example.clone().or(cfg.example.clone()) {
        let spec = ExampleSpec {
            n: ex.n.or(cfg.n).unwrap_or(config::default_n(&name)),
            p: ex.p.or(cfg.p).unwrap_or(1),
            a: ex.a.or(cfg.a).unwrap_or(config::default_rate(&name)),
            name: name.clone(),
        };
        return Ok((name, spec.build()?, Some(spec)));
    }
    match config::custom_iso(cfg)? {
        Some(f) => Ok(("custom".into(), f, None)),
        None => bail!("pass --example g1|g2 or a config with \"polynomial\" and \"q\""),
    }
}

pub fn verify(args: &VerifyArgs, common: &Common, cfg: &RunConfig) -> Result<Outcome> {
    let (name, f, _) = resolve_iso(&args.example, cfg)?;
    let a_tol = config::positive("tol", common.tol.or(cfg.tol).unwrap_or(2e-4))?;
    let b_tol = config::positive("b-tol", args.b_tol)?;
    let mut opts = VerifyOptions {
        samples: config::at_least("samples", args.samples.or(cfg.samples).unwrap_or(500), 1)?,
        seed: common.seed.or(cfg.seed).unwrap_or(0),
        ..Default::default()
    };
    if let Some(levels) = args.levels.clone().or(cfg.levels.clone()) {
        opts.levels = levels;
    }
    let report = iso_verify(&f, &opts)?;
    let mut failures = Vec::new();
    if report.max_a_dev >= a_tol {
        failures.push(format!("maxA_dev {:e} exceeds {a_tol:e}", report.max_a_dev));
    }
    if report.max_b_spread >= b_tol {
        failures.push(format!("maxB_spread {:e} exceeds {b_tol:e}", report.max_b_spread));
    }
    let mut summary = serde_json::to_value(&report)?;
    summary["command"] = json!("verify");
    summary["example"] = json!(name);
    if args.control {
        let control = iso_verify(&f, &VerifyOptions { inverse: Inverse::Identity, ..opts })?;
        if control.max_a_dev <= args.control_margin {
            failures.push(format!(
                "negative control not detected: maxA_dev {:e} <= {:e}",
                control.max_a_dev, args.control_margin
            ));
        }
        summary["control"] = serde_json::to_value(&control)?;
    }
    Ok(Outcome { summary, failures })
}

fn snapshot_rows(f: &IsoFunction, level: &LevelSample, ts: &[f64]) -> Result<(Vec<Row>, f64)> {
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &t in ts {
        for y in families::family_snapshot(f, level, t)?.points {
            worst = worst.max((f.iso_eval(&y)? - t).abs());
            rows.push(Row { param: t, coords: y.into_inner().as_slice().to_vec() });
        }
    }
    Ok((rows, worst))
}

fn write_points(dir: &Path, stem: &str, format: Format, rows: &[Row], dim: usize) -> Result<String> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("{stem}.{}", format.extension()));
    match format {
        Format::Ply => write_with(&path, |w| io::write_ply(w, rows))?,
        Format::Csv => write_with(&path, |w| io::write_csv(w, "t", dim, rows))?,
    }
    Ok(path.display().to_string())
}

fn write_with<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(BufWriter<File>) -> randers_core::Result<()>,
{
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write(BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))
}

pub fn family(args: &FamilyArgs, common: &Common, cfg: &RunConfig) -> Result<Outcome> {
    let tol = config::positive("tol", common.tol.or(cfg.tol).unwrap_or(1e-8))?;
    let seed = common.seed.or(cfg.seed).unwrap_or(0);
    let count = config::at_least("count", args.count.or(cfg.count).unwrap_or(200), 1)?;
    let ts = args.ts.clone().or(cfg.ts.clone()).unwrap_or_else(|| vec![-0.9, -0.5, 0.0, 0.5, 0.9]);
    if let Some(t) = ts.iter().find(|t| !(t.abs() < 1.0)) {
        bail!("family parameters must lie in (-1, 1), got {t}");
    }

    let members: Vec<(String, IsoFunction)> = if args.fig34 {
        let phi = CmPolynomial::coordinate(3, 0)?;
        vec![
            ("h".into(), IsoFunction::new(phi.clone(), SkewGenerator::zeros(3))?),
            ("fq".into(), IsoFunction::new(phi, SkewGenerator::from_planes(3, &[(0, 2, 0.5)])?)?),
        ]
    } else {
        let (name, f, _) = resolve_iso(&args.example, cfg)?;
        vec![(name, f)]
    };

    let mut failures = Vec::new();
    let mut reports = Vec::new();
    let mut clouds = Vec::new();
    for (label, f) in &members {
        let level = families::sample_level(f, 0.0, count, seed)?;
        let (rows, worst) = snapshot_rows(f, &level, &ts)?;
        if worst >= tol {
            failures.push(format!("{label}: iso_eval deviates from t by {worst:e}"));
        }
        let file = match &common.out {
            Some(dir) => Value::String(write_points(dir, &format!("family-{label}"), args.format, &rows, f.dim())?),
            None => Value::Null,
        };
        reports.push(json!({ "label": label, "points": rows.len(), "max_iso_eval_dev": worst, "file": file }));
        clouds.push(rows);
    }

    let mut summary = json!({ "command": "family", "ts": ts, "count": count, "seed": seed, "families": reports });
    if args.fig34 {
        let displacement = clouds[0]
            .iter()
            .zip(&clouds[1])
            .map(|(u, v)| u.coords.iter().zip(&v.coords).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if displacement <= 1e-2 {
            failures.push(format!("Q = 0 and Q != 0 families coincide (max displacement {displacement:e})"));
        }
        summary["max_displacement"] = json!(displacement);
    }
    Ok(Outcome { summary, failures })
}

pub fn focal(args: &FocalArgs, common: &Common, cfg: &RunConfig) -> Result<Outcome> {
    let (name, f, example) = resolve_iso(&args.example, cfg)?;
    let tol = config::positive("tol", common.tol.or(cfg.tol).unwrap_or(1e-10))?;
    let seed = common.seed.or(cfg.seed).unwrap_or(0);
    let count = config::at_least("count", args.count.or(cfg.count).unwrap_or(200), 1)?;
    let level = families::sample_level(&f, 0.0, count, seed)?;
    let (plus, minus) = families::focal_submanifolds(&f, &level)?;
    let s = f.focal_offset();

    // Undoing the rotation must land on the Riemannian focal sets f̄ = ±1.
    let mut level_dev: f64 = 0.0;
    for (points, sign, angle) in [(&plus.points, 1.0, s), (&minus.points, -1.0, -s)] {
        for y in points {
            let back = f.generator().exp_apply(-angle, y.coords());
            level_dev = level_dev.max((f.phi().normalized(&back) - sign).abs());
        }
    }
    let mut failures = Vec::new();
    if level_dev >= tol {
        failures.push(format!("focal points miss the levels ±1 by {level_dev:e}"));
    }

    let mut predicted = Value::Null;
    if let Some(ex) = &example {
        match ex.name.as_str() {
            "g1" => {
                let e1 = DVector::from_fn(f.dim(), |i, _| if i == 0 { 1.0 } else { 0.0 });
                let mp = f.generator().exp_apply(s, &e1);
                let mm = f.generator().exp_apply(-s, &(-&e1));
                let dev = plus
                    .points
                    .iter()
                    .map(|y| (y.coords() - &mp).amax())
                    .chain(minus.points.iter().map(|y| (y.coords() - &mm).amax()))
                    .fold(0.0, f64::max);
                let point_tol = common.tol.or(cfg.tol).unwrap_or(1e-12);
                if dev >= point_tol {
                    failures.push(format!("M± deviate from the predicted points by {dev:e}"));
                }
                predicted = json!({
                    "m_plus": mp.as_slice(),
                    "m_minus": mm.as_slice(),
                    "max_dev": dev,
                });
            }
            _ => {
                let p = ex.p;
                let k = (FRAC_PI_4 * ex.a).tan();
                let plus_dev =
                    plus.points.iter().map(|y| (y.coords()[p + 1] + k * y.coords()[p]).abs()).fold(0.0, f64::max);
                let minus_dev =
                    minus.points.iter().map(|y| (y.coords()[p] + k * y.coords()[p + 1]).abs()).fold(0.0, f64::max);
                if plus_dev.max(minus_dev) >= tol {
                    failures.push(format!("linear focal constraints violated by {:e}", plus_dev.max(minus_dev)));
                }
                predicted = json!({ "plus_constraint_dev": plus_dev, "minus_constraint_dev": minus_dev });
            }
        }
    }

    let file = match &common.out {
        Some(dir) => {
            let rows: Vec<Row> = plus
                .points
                .iter()
                .map(|y| Row { param: 1.0, coords: y.coords().as_slice().to_vec() })
                .chain(minus.points.iter().map(|y| Row { param: -1.0, coords: y.coords().as_slice().to_vec() }))
                .collect();
            Value::String(write_points(dir, "focal", args.format, &rows, f.dim())?)
        }
        None => Value::Null,
    };
    Ok(Outcome {
        summary: json!({
            "command": "focal",
            "example": name,
            "count": count,
            "seed": seed,
            "focal_offset": s,
            "level_dev": level_dev,
            "predicted": predicted,
            "file": file,
        }),
        failures,
    })
}

pub fn psi(args: &PsiArgs, common: &Common, cfg: &RunConfig) -> Result<Outcome> {
    let (name, f, _) = resolve_iso(&args.example, cfg)?;
    let tol = config::positive("tol", common.tol.or(cfg.tol).unwrap_or(1e-10))?;
    let seed = common.seed.or(cfg.seed).unwrap_or(0);
    let samples = config::at_least("samples", args.samples.or(cfg.samples).unwrap_or(1000), 1)?;
    let every = config::at_least("scan-every", args.scan_every, 1)?;
    let mut rng = sampling::seeded(seed);

    let mut round: f64 = 0.0;
    let mut scan: f64 = 0.0;
    let mut scanned = 0;
    for i in 0..samples {
        let x = sampling::sphere_point(&mut rng, f.dim());
        let y = f.psi_point(&x)?;
        let back = f.psi_inverse(&y)?;
        round = round.max((back.coords() - x.coords()).norm());
        if i % every == 0 {
            let oracle = f.psi_inverse_scan(&y, args.scan_points)?;
            scan = scan.max((oracle.coords() - back.coords()).norm());
            scanned += 1;
        }
    }
    let mut failures = Vec::new();
    if round >= tol {
        failures.push(format!("round-trip error {round:e} exceeds {tol:e}"));
    }
    if scan >= 1e-9 {
        failures.push(format!("scan oracle disagrees by {scan:e}"));
    }
    Ok(Outcome {
        summary: json!({
            "command": "psi",
            "example": name,
            "samples": samples,
            "seed": seed,
            "max_round_trip": round,
            "scan_points": args.scan_points,
            "scanned": scanned,
            "max_scan_dev": scan,
        }),
        failures,
    })
}
