use std::f64::consts::{FRAC_1_SQRT_2, PI};

use randers_core::families;
use randers_core::geodesic::{self, el_residual, s2_spec, self_contacts, ContactKind, GeodesicSpec};
use randers_core::iso::{iso_verify, VerifyOptions};
use randers_core::metric::sphere_gradient;
use randers_core::{sampling, CmPolynomial, IsoFunction, SkewGenerator, SpherePoint, Vector};

fn quadric(p: usize, q: usize, a: f64) -> IsoFunction {
    let gen = SkewGenerator::from_planes(p + q + 2, &[(p, p + 1, a)]).unwrap();
    IsoFunction::new(CmPolynomial::clifford(p, q), gen).unwrap()
}

#[test]
fn half_rate_self_tangencies_are_opposite() {
    let spec = s2_spec(0.0, 0.5, 0.0).unwrap();
    let contacts = self_contacts(&spec, 4.0 * PI, 2000);
    let tangencies: Vec<_> = contacts.iter().filter(|c| c.kind == ContactKind::OppositeTangency).collect();
    for target in [[0.0, 1.0, 0.0], [0.0, -1.0, 0.0]] {
        let hit = tangencies.iter().find(|c| {
            let d: f64 = c.point.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum();
            d.sqrt() < 1e-9
        });
        let hit = hit.unwrap_or_else(|| panic!("no tangency at {target:?}: {contacts:?}"));
        let (v1, v2) = (spec.velocity(hit.s1), spec.velocity(hit.s2));
        assert!((v1 + v2).norm() < 1e-9);
    }
}

#[test]
fn great_circle_is_not_a_randers_geodesic() {
    let q = SkewGenerator::from_abc(0.0, 0.5, 0.0);
    let riem = s2_spec(0.0, 0.0, 0.0).unwrap();
    let ds = 5e-4;
    let curve: Vec<Vector> = (0..400).map(|k| riem.eval(k as f64 * ds).into_inner()).collect();
    assert!(el_residual(&q, &curve, ds).unwrap() > 1e-2);
}

#[test]
fn closedness_needs_a_rational_rate() {
    let report = geodesic::classify_closedness(0.0, 0.25, 0.0, 1e-9, 1_000_000).unwrap();
    assert_eq!(report.period.unwrap(), 8.0 * PI);
    let spec = s2_spec(0.0, 0.25, 0.0).unwrap();
    assert!(spec.return_distance(8.0 * PI) < 1e-12);
    let report = geodesic::classify_closedness(0.0, 1.0 - FRAC_1_SQRT_2, 0.0, 1e-9, 1_000_000).unwrap();
    assert!(report.approximants[0].defect > 1e-9);
}

#[test]
fn psi_is_injective_on_random_pairs() {
    let f = quadric(1, 1, 0.6);
    let mut rng = sampling::seeded(31);
    let mut checked = 0;
    while checked < 10_000 {
        let x = sampling::sphere_point(&mut rng, 4);
        let y = sampling::sphere_point(&mut rng, 4);
        if x.coords().dot(y.coords()).clamp(-1.0, 1.0).acos() <= 1e-3 {
            continue;
        }
        let d = (f.psi_forward(x.coords()).unwrap() - f.psi_forward(y.coords()).unwrap()).norm();
        assert!(d > 1e-6);
        checked += 1;
    }
}

#[test]
fn gradient_degeneration_transfers() {
    let f = quadric(1, 1, 0.4);
    let field = f.field();
    // Near S^1 x {0}, |∇f̄| is small, and so is |∇f| at the image.
    for eps in [1e-2, 1e-3] {
        let xbar = SpherePoint::normalize(Vector::from_column_slice(&[0.6, 0.8, eps, 0.0])).unwrap();
        let grad_bar = families::level_gradient(f.phi(), xbar.coords()).norm();
        let y = f.psi_point(&xbar).unwrap();
        let grad = sphere_gradient(&field, &y).norm();
        assert!(grad < 10.0 * grad_bar.max(1e-4), "eps={eps}: {grad:e} vs {grad_bar:e}");
    }
    let regular = SpherePoint::from_slice(&[0.5, 0.5, 0.5, 0.5]).unwrap();
    let y = f.psi_point(&regular).unwrap();
    assert!(sphere_gradient(&field, &y).norm() > 1.0);
}

#[test]
fn verification_is_deterministic() {
    let f = quadric(1, 1, 0.3);
    let opts = VerifyOptions { samples: 35, seed: 12, ..Default::default() };
    let a = serde_json::to_string(&iso_verify(&f, &opts).unwrap()).unwrap();
    let b = serde_json::to_string(&iso_verify(&f, &opts).unwrap()).unwrap();
    assert_eq!(a, b);
    assert!(a.contains("\"maxA_dev\"") && a.contains("\"excluded_near_focal\""));
}

#[test]
fn snapshots_are_nested_and_disjoint() {
    let f = quadric(1, 2, 0.3);
    let level = families::sample_level(&f, 0.0, 50, 3).unwrap();
    let ts = [-0.6, -0.2, 0.2, 0.6];
    let snaps: Vec<_> = ts.iter().map(|&t| families::family_snapshot(&f, &level, t).unwrap()).collect();
    for (i, a) in snaps.iter().enumerate() {
        for b in &snaps[i + 1..] {
            let closest = a
                .points
                .iter()
                .flat_map(|u| b.points.iter().map(move |v| (u.coords() - v.coords()).norm()))
                .fold(f64::INFINITY, f64::min);
            assert!(closest > 1e-3);
        }
        for ((x, n), y) in level.points.iter().zip(&level.normals).zip(&a.points) {
            let direct = families::tube_map(f.generator(), x, n, f.zeta(ts[i]).unwrap());
            assert!((direct.into_inner() - y.coords()).norm() < 1e-14);
        }
    }
}

#[test]
fn normal_geodesics_start_orthogonal_to_the_level() {
    let f = quadric(2, 1, 0.25);
    let level = families::sample_level(&f, 0.0, 20, 4).unwrap();
    for (x, n) in level.points.iter().zip(&level.normals) {
        let nbar = n.vec() - f.generator().apply(x.coords());
        assert!((nbar.norm() - 1.0).abs() < 1e-12);
        for t in families::tangent_basis(f.phi(), x).unwrap() {
            assert!(nbar.dot(&t).abs() < 1e-12);
        }
        assert!(GeodesicSpec::new(f.generator().clone(), x.clone(), n.vec().clone()).is_ok());
    }
}
