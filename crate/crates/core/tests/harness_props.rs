mod common;

use std::f64::consts::PI;

use common::*;
use focal_forge::focal::{index_and_nullity, FocalOptions};
use focal_forge::geometry::{NormalVector, SubmanifoldPatch};
use focal_forge::harness::{
    fiber_integrability_probe, morse_report, reference_betti, shoot_critical_points, FiberProbeOptions, FiberVerdict,
    ShootingOptions,
};
use focal_forge::linking::first_focal_param;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn generic_triple(rng: &mut ChaCha8Rng) -> (DVector<f64>, DVector<f64>, f64, f64) {
    let p = random_unit(rng, 3);
    let d = rng.random_range(0.3..PI - 0.3);
    let q = along_great_circle(&p, &random_orthogonal(rng, &p), d);
    loop {
        let top: f64 = rng.random_range(2.2 * PI..3.8 * PI);
        let cap = top * top;
        if great_circle_lengths(d, 2.0 * cap).iter().all(|l| (l * l - cap).abs() > 0.08 * cap) {
            return (p, q, d, cap);
        }
    }
}

#[test]
fn index_matches_own_focal_records() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let opts = ShootingOptions::default();
    let hopf = SubmanifoldPatch::hopf_fiber(dv(&[1.0, 0.0, 0.0, 0.0])).unwrap();
    let cases = [
        (point_source(2, random_unit(&mut rng, 3)), random_unit(&mut rng, 3), (3.3 * PI).powi(2)),
        (hopf, dv(&[0.6, 0.0, 0.8, 0.0]), (3.0 * PI).powi(2)),
        (SubmanifoldPatch::ellipse(2.0, 1.0), dv(&[0.3, 0.1]), 9.0),
    ];
    for (patch, q, cap) in cases {
        let shot = shoot_critical_points(&patch, &q, cap, &opts).unwrap();
        assert!(!shot.critical_points.is_empty());
        for cp in &shot.critical_points {
            let summed: usize = cp.focal.iter().filter(|r| r.time < 1.0 - 1e-8).map(|r| r.multiplicity).sum();
            assert_eq!(cp.index, summed);
            assert!(cp.residual < 1e-9);
            assert!((cp.energy - cp.normal_vector().length().powi(2)).abs() < 1e-10);
            let (index, nullity, _) = index_and_nullity(&patch, &cp.normal_vector(), &opts.focal).unwrap();
            assert_eq!((index, nullity), (cp.index, cp.nullity));
        }
    }
}

#[test]
fn shooting_is_complete_on_the_sphere() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..10 {
        let (p, q, d, cap) = generic_triple(&mut rng);
        let shot = shoot_critical_points(&point_source(2, p), &q, cap, &ShootingOptions::default()).unwrap();
        let want = great_circle_lengths(d, cap);
        let got: Vec<f64> = shot.critical_points.iter().map(|c| c.length()).collect();
        assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-6);
        }
    }
}

#[test]
fn verdicts_stable_under_refinement() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let coarse = ShootingOptions::default();
    let mut fine = coarse;
    fine.density *= 2;
    fine.newton_tol /= 2.0;
    fine.focal.bisection_tol /= 2.0;
    for _ in 0..3 {
        let (p, q, d, cap) = generic_triple(&mut rng);
        let top = great_circle_lengths(d, cap).iter().map(|&l| great_circle_index(l, 2)).max().unwrap();
        let reference = reference_betti(&format!("omega-s2:{top}")).unwrap();
        let patch = point_source(2, p);
        let a = morse_report(&patch, &q, cap, &coarse, Some(reference.clone())).unwrap();
        let b = morse_report(&patch, &q, cap, &fine, Some(reference)).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.polynomial, b.polynomial);
    }
    // a non-perfect verdict is just as stable
    let ellipse = SubmanifoldPatch::ellipse(2.0, 1.0);
    let circle = reference_betti("circle-r2").unwrap();
    let a = morse_report(&ellipse, &dv(&[0.3, 0.1]), 9.0, &coarse, Some(circle.clone())).unwrap();
    let b = morse_report(&ellipse, &dv(&[0.3, 0.1]), 9.0, &fine, Some(circle)).unwrap();
    assert_eq!(a.verdict, b.verdict);
    assert!(!a.verdict.unwrap().is_perfect());
}

fn focal_vectors(patch: &SubmanifoldPatch<f64>, rng: &mut ChaCha8Rng, count: usize) -> Vec<NormalVector<f64>> {
    let opts = FocalOptions::default();
    (0..count)
        .map(|_| {
            let u = DVector::from_iterator(
                patch.param_dim(),
                patch.param_box().iter().map(|&(a, b)| rng.random_range(a..=b)),
            );
            // hypersurfaces focus only on the inward side
            let c = if patch.codim() == 1 { dv(&[1.0]) } else { random_unit(rng, patch.codim()) };
            let dir = NormalVector::new(patch.normalize_param(&u), c * 10.0);
            dir.scaled(first_focal_param(patch, &dir, &opts).unwrap())
        })
        .collect()
}

#[test]
fn perfect_counts_and_integrable_fibers_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let shoot = ShootingOptions::default();
    let probe = FiberProbeOptions::default();

    // round sphere point source: perfect at generic targets, integrable fibers
    let patch = point_source(2, dv(&[0.0, 0.0, 1.0]));
    for _ in 0..10 {
        let q = random_unit(&mut rng, 3);
        let d = q[2].clamp(-1.0, 1.0).acos();
        if d < 0.2 || d > PI - 0.2 {
            continue;
        }
        let cap = (2.5 * PI).powi(2);
        let top = great_circle_lengths(d, cap).iter().map(|&l| great_circle_index(l, 2)).max().unwrap();
        let rep = morse_report(&patch, &q, cap, &shoot, Some(reference_betti(&format!("omega-s2:{top}")).unwrap())).unwrap();
        assert!(rep.verdict.unwrap().is_perfect());
    }
    for v in focal_vectors(&patch, &mut rng, 5) {
        assert_eq!(fiber_integrability_probe(&patch, &v, &probe).unwrap().verdict, FiberVerdict::Integrable);
    }

    // ellipse: too many critical points at targets inside the evolute, and
    // the focal fiber is a point while the kernel is a line
    let ellipse = SubmanifoldPatch::ellipse(2.0, 1.0);
    let circle = reference_betti("circle-r2").unwrap();
    for q in [dv(&[0.3, 0.1]), dv(&[-0.2, 0.05]), dv(&[0.1, -0.1])] {
        let rep = morse_report(&ellipse, &q, 9.0, &shoot, Some(circle.clone())).unwrap();
        assert_eq!(rep.critical_points.len(), 4);
        assert!(!rep.verdict.unwrap().is_perfect());
    }
    for v in focal_vectors(&ellipse, &mut rng, 5) {
        let pr = fiber_integrability_probe(&ellipse, &v, &probe).unwrap();
        assert_eq!(pr.verdict, FiberVerdict::NotIntegrable, "{pr:?}");
    }
}
