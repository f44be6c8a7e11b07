mod common;

use common::*;
use focal_forge::focal::{focal_records, index_and_nullity, morse_index, FocalOptions};
use focal_forge::geometry::{NormalVector, RiemannianSpace, SubmanifoldPatch};
use focal_forge::jacobi::{l_jacobi_trace, SeedKind};
use focal_forge::linking::first_focal_param;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_normal(rng: &mut ChaCha8Rng, patch: &SubmanifoldPatch<f64>, len: f64) -> NormalVector<f64> {
    let u = DVector::from_iterator(
        patch.param_dim(),
        patch.param_box().iter().map(|&(a, b)| rng.random_range(a..=b)),
    );
    // chart geodesics must stay clear of the chart's pole
    let len = if patch.parent().is_embedded() { len } else { len.min(2.0) };
    NormalVector::new(patch.normalize_param(&u), random_unit(rng, patch.codim()) * len)
}

fn suite() -> Vec<SubmanifoldPatch<f64>> {
    vec![
        SubmanifoldPatch::sphere_in_euclidean(3, 1.0),
        SubmanifoldPatch::ellipse(2.0, 1.0),
        SubmanifoldPatch::horizontal_circle(1.0, 0.0),
        SubmanifoldPatch::hopf_fiber(dv(&[1.0, 0.0, 0.0, 0.0])).unwrap(),
        point_source(3, dv(&[0.0, 0.0, 0.0, 1.0])),
        SubmanifoldPatch::point_patch(RiemannianSpace::stereographic_sphere(), dv(&[0.2, 0.1])).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn symplectic_pairing_is_constant(seed in any::<u64>(), len in 0.5f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for patch in suite() {
            let nv = random_normal(&mut rng, &patch, len);
            let b = l_jacobi_trace(&patch, &nv, 1.0).unwrap();
            prop_assert!(b.symplectic_drift() < 1e-8, "{}: {}", patch.label(), b.symplectic_drift());
            // L-Jacobi fields are pairwise Lagrangian
            prop_assert!(b.symplectic_matrix(0).amax() < 1e-10);
        }
    }
}

#[test]
fn point_source_matches_sine_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for radius in [1.0, 0.5, 2.0] {
        let p = random_unit(&mut rng, 4) * radius;
        let patch = SubmanifoldPatch::point_patch(RiemannianSpace::round_sphere(3, radius), p).unwrap();
        let len = rng.random_range(1.0..3.0 * radius);
        let dir = random_unit(&mut rng, 3);
        let nv = NormalVector::new(DVector::zeros(0), dir * len);
        let b = l_jacobi_trace(&patch, &nv, 1.0).unwrap();
        for (a, seed) in b.seeds().iter().enumerate() {
            assert!(matches!(seed.kind, SeedKind::Normal(_)));
            // J(t) = R sin(|v| t / R) n for a constant unit n ⊥ γ
            let n = &seed.derivative;
            for k in (0..b.len()).step_by(37) {
                let t = b.times()[k];
                let want = n * (radius * (len * t / radius).sin() / len);
                let got = b.coordinate_value(k).column(a).into_owned();
                assert!((got - want).norm() < 1e-6, "radius {radius}, t {t}");
            }
        }
    }
}

#[test]
fn round_sphere_in_space_matches_linear_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for r in [0.5, 1.0, 3.0] {
        let patch = SubmanifoldPatch::sphere_in_euclidean(3, r);
        let foot = patch.normalize_param(&random_unit(&mut rng, 3));
        let nv = NormalVector::new(foot.clone(), dv(&[1.0]));
        let b = l_jacobi_trace(&patch, &nv, 2.5 * r).unwrap();
        let e = patch.tangent_frame(&foot);
        let inward = patch.ambient_normal(&nv);
        assert!((patch.point(&foot) + &inward * r).norm() < 1e-12, "unit coefficient points to the centre");
        for k in (0..b.len()).step_by(41) {
            let t = b.times()[k];
            let want = &e * (1.0 - t / r);
            assert!((b.coordinate_value(k) - want).amax() < 1e-6);
        }
    }
    // flat case: tangent fields stay constant, normal-seeded fields grow linearly
    let plane = SubmanifoldPatch::hyperplane(3, 10.0);
    let nv = NormalVector::new(dv(&[0.3, -0.2]), dv(&[1.5]));
    let b = l_jacobi_trace(&plane, &nv, 1.0).unwrap();
    let e = plane.tangent_frame(&nv.param);
    for k in (0..b.len()).step_by(101) {
        assert!((b.coordinate_value(k) - &e).amax() < 1e-9);
    }
}

#[test]
fn ellipse_focal_time_is_curvature_radius() {
    let (a, b) = (2.0, 1.0);
    let patch = SubmanifoldPatch::ellipse(a, b);
    let opts = FocalOptions::default();
    for th in [0.1, 0.7, 1.3, 2.9, 4.0] {
        let s: f64 = th;
        let rho = (a * a * s.sin().powi(2) + b * b * s.cos().powi(2)).powf(1.5) / (a * b);
        let nv = NormalVector::new(dv(&[th]), dv(&[2.0 * rho]));
        let m = first_focal_param(&patch, &nv, &opts).unwrap();
        assert!((m * 2.0 * rho - rho).abs() < 1e-7, "θ = {th}: {} vs {rho}", m * 2.0 * rho);
    }
}

#[test]
fn index_is_additive_at_non_focal_splits() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let opts = FocalOptions::default();
    for patch in suite() {
        let len = rng.random_range(2.0..5.0);
        let nv = random_normal(&mut rng, &patch, len);
        let (_, recs) = focal_records(&patch, &nv, 1.0, &opts).unwrap();
        let full = morse_index(&recs, 1.0);
        let mut tried = 0;
        while tried < 10 {
            let s: f64 = rng.random_range(0.05..0.95);
            if recs.iter().any(|r| (r.time - s).abs() < 1e-3) {
                continue;
            }
            let head = index_and_nullity(&patch, &nv.scaled(s), &opts).unwrap();
            assert_eq!(head.1, 0);
            let tail: usize = recs.iter().filter(|r| r.time >= s && r.time < 1.0).map(|r| r.multiplicity).sum();
            assert_eq!(head.0 + tail, full, "{} at s = {s}", patch.label());
            tried += 1;
        }
    }
}

fn perturbed(rng: &mut ChaCha8Rng, patch: &SubmanifoldPatch<f64>, v: &NormalVector<f64>, eps: f64) -> NormalVector<f64> {
    let param = patch.normalize_param(&(&v.param + gaussian(rng, v.param.len()) * eps));
    NormalVector::new(param, &v.coeffs + gaussian(rng, v.coeffs.len()) * eps)
}

#[test]
fn focal_count_locally_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let opts = FocalOptions::default();
    for patch in suite() {
        let nv = loop {
            let len = rng.random_range(1.0..4.0);
            let nv = random_normal(&mut rng, &patch, len);
            let (_, recs) = focal_records(&patch, &nv, 1.0, &opts).unwrap();
            if recs.iter().all(|r| (r.time - 1.0).abs() > 1e-2) {
                break nv;
            }
        };
        let base = index_and_nullity(&patch, &nv, &opts).unwrap();
        for _ in 0..8 {
            let w = perturbed(&mut rng, &patch, &nv, 1e-4);
            let got = index_and_nullity(&patch, &w, &opts).unwrap();
            assert_eq!((got.0, got.1), (base.0, base.1), "{}", patch.label());
        }
    }
}

#[test]
fn multiplicity_conserved_near_focal_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let opts = FocalOptions::default();
    let cases: Vec<(SubmanifoldPatch<f64>, NormalVector<f64>)> = vec![
        (SubmanifoldPatch::ellipse(2.0, 1.0), NormalVector::new(dv(&[0.6]), dv(&[1.0]))),
        (SubmanifoldPatch::horizontal_circle(1.0, 0.0), NormalVector::new(dv(&[0.2]), dv(&[0.8, 0.6]))),
        (point_source(3, dv(&[1.0, 0.0, 0.0, 0.0])), NormalVector::new(DVector::zeros(0), dv(&[0.0, 0.6, 0.8]))),
        (SubmanifoldPatch::hopf_fiber(dv(&[1.0, 0.0, 0.0, 0.0])).unwrap(), NormalVector::new(dv(&[0.0]), dv(&[1.0, 0.0]))),
    ];
    for (patch, dir) in cases {
        let m = first_focal_param(&patch, &dir.scaled(10.0), &opts).unwrap();
        let focal = dir.scaled(10.0 * m);
        let (_, recs) = focal_records(&patch, &focal, 1.0, &opts).unwrap();
        let mu: usize = recs.iter().filter(|r| (r.time - 1.0).abs() < 1e-8).map(|r| r.multiplicity).sum();
        assert!(mu > 0, "{}", patch.label());
        for _ in 0..6 {
            let w = perturbed(&mut rng, &patch, &focal, 1e-4);
            let (_, recs) = focal_records(&patch, &w, 1.1, &opts).unwrap();
            let near: usize = recs.iter().filter(|r| (r.time - 1.0).abs() < 0.05).map(|r| r.multiplicity).sum();
            assert_eq!(near, mu, "{}: {recs:?}", patch.label());
        }
    }
}
