mod common;

use std::f64::consts::PI;

use common::*;
use focal_forge::focal::{focal_records, morse_index, FocalOptions};
use focal_forge::foliation::FoliationSpec;
use focal_forge::geodesic::normal_geodesic;
use focal_forge::geometry::{NormalVector, RiemannianSpace, SubmanifoldPatch};
use focal_forge::transversal::{horizontal_index, verify_index_splitting, Complement, TransversalSystem};
use focal_forge::Error;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hopf_patch() -> SubmanifoldPatch<f64> {
    SubmanifoldPatch::hopf_fiber(dv(&[1.0, 0.0, 0.0, 0.0])).unwrap()
}

fn random_normal(rng: &mut ChaCha8Rng, patch: &SubmanifoldPatch<f64>, len: f64) -> NormalVector<f64> {
    let u = DVector::from_iterator(
        patch.param_dim(),
        patch.param_box().iter().map(|&(a, b)| rng.random_range(a..=b)),
    );
    NormalVector::new(patch.normalize_param(&u), random_unit(rng, patch.codim()) * len)
}

fn base_index(len: f64) -> usize {
    let base = SubmanifoldPatch::point_patch(RiemannianSpace::round_sphere(2, 0.5), dv(&[0.0, 0.0, 0.5])).unwrap();
    let v = NormalVector::new(DVector::zeros(0), dv(&[len, 0.0]));
    let (_, recs) = focal_records(&base, &v, 1.0, &FocalOptions::default()).unwrap();
    morse_index(&recs, 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn hopf_index_matches_base(len in 0.05f64..2.0 * PI, seed in any::<u64>()) {
        let q = len / (PI / 2.0);
        prop_assume!((q - q.round()).abs() * PI / 2.0 > 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let patch = hopf_patch();
        let g = normal_geodesic(&patch, &random_normal(&mut rng, &patch, 1.0), len, 1e-12).unwrap();
        let h = horizontal_index(&g, &FoliationSpec::hopf(), &patch, Complement::Orthogonal, &FocalOptions::default()).unwrap();
        // base conjugate points at multiples of π/2, each simple
        prop_assert_eq!(h.index, (len / (PI / 2.0)).floor() as usize);
        prop_assert_eq!(h.index, base_index(len));
        prop_assert_eq!(h.projection_index, h.index);
    }

    #[test]
    fn adjoint_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cases = [
            (hopf_patch(), FoliationSpec::hopf()),
            (SubmanifoldPatch::sphere_in_euclidean(3, 1.0), FoliationSpec::concentric_spheres(3)),
            (SubmanifoldPatch::horizontal_circle(1.0, 0.0), FoliationSpec::circles_times_line()),
        ];
        for (patch, fol) in cases {
            let g = normal_geodesic(&patch, &random_normal(&mut rng, &patch, 1.0), 0.8, 1e-12).unwrap();
            let sys = TransversalSystem::build(&g, &fol).unwrap();
            for _ in 0..5 {
                let k = rng.random_range(0..sys.len());
                let c = gaussian(&mut rng, sys.w_tilde(k).ncols());
                let e = sys.h_frame(k);
                let y = e * gaussian(&mut rng, e.ncols());
                let lhs = sys.a_tensor_at(k, &c).unwrap().dot(&y);
                let rhs = (sys.w_tilde(k) * &c).dot(&sys.a_adjoint_at(k, &y));
                prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()), "{}: {lhs} vs {rhs}", fol.label());
            }
        }
    }
}

#[test]
fn hopf_transversal_curvature_is_four() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let patch = hopf_patch();
    for _ in 0..10 {
        let g = normal_geodesic(&patch, &random_normal(&mut rng, &patch, 1.0), 3.0, 1e-12).unwrap();
        let sys = TransversalSystem::build(&g, &FoliationSpec::hopf()).unwrap();
        assert_eq!(sys.horizontal_rank(), 1);
        for k in (0..sys.len()).step_by(50) {
            assert!((sys.r_h_matrix(k)[(0, 0)] - 4.0).abs() < 1e-5);
        }
    }
}

#[test]
fn splitting_holds_on_random_geodesics() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let opts = FocalOptions::default();
    let cases = [
        (hopf_patch(), FoliationSpec::hopf(), 3.0 * PI),
        (SubmanifoldPatch::sphere_in_euclidean(3, 1.0), FoliationSpec::concentric_spheres(3), 4.0),
        (SubmanifoldPatch::sphere_in_euclidean(2, 1.5), FoliationSpec::concentric_circles(), 4.0),
        (SubmanifoldPatch::horizontal_circle(1.0, 0.0), FoliationSpec::circles_times_line(), 4.0),
    ];
    for (patch, fol, max_len) in cases {
        let mut done = 0;
        let mut positive = 0;
        while done < 50 {
            let len = rng.random_range(0.2..max_len);
            let g = normal_geodesic(&patch, &random_normal(&mut rng, &patch, 1.0), len, 1e-12).unwrap();
            match verify_index_splitting(&g, &fol, &patch, &opts) {
                Ok(r) => {
                    assert!(r.holds, "{}: {r:?}", fol.label());
                    positive += usize::from(r.ind_total > 0);
                    done += 1;
                }
                Err(Error::Precondition(_)) => continue,
                Err(e) => panic!("{}: {e}", fol.label()),
            }
        }
        assert!(positive > 5, "{}: only {positive} geodesics with positive index", fol.label());
    }
}

#[test]
fn horizontal_index_independent_of_complement() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let opts = FocalOptions::default();
    let cases = [
        (hopf_patch(), FoliationSpec::hopf()),
        (SubmanifoldPatch::sphere_in_euclidean(3, 1.0), FoliationSpec::concentric_spheres(3)),
        (SubmanifoldPatch::horizontal_circle(1.0, 0.0), FoliationSpec::circles_times_line()),
    ];
    for (patch, fol) in cases {
        for _ in 0..4 {
            let len = rng.random_range(0.3..4.0);
            let g = normal_geodesic(&patch, &random_normal(&mut rng, &patch, 1.0), len, 1e-12).unwrap();
            let Ok(a) = horizontal_index(&g, &fol, &patch, Complement::Orthogonal, &opts) else {
                continue;
            };
            for s in [1, 2] {
                let b = horizontal_index(&g, &fol, &patch, Complement::Shifted(rng.random::<u64>() + s), &opts).unwrap();
                assert_eq!(a.index, b.index, "{}", fol.label());
            }
        }
    }
}

#[test]
fn horizontal_index_is_intrinsic_to_the_quotient() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let opts = FocalOptions::default();
    for _ in 0..20 {
        let r0: f64 = rng.random_range(0.5..2.0);
        let len: f64 = rng.random_range(0.1..3.0 * r0);
        if (len - r0).abs() < 0.05 {
            continue;
        }
        let sign = if rng.random_bool(0.6) { 1.0 } else { -1.0 };
        let circle = SubmanifoldPatch::sphere_in_euclidean(2, r0);
        let sphere = SubmanifoldPatch::sphere_in_euclidean(3, r0);
        let a = NormalVector::new(dv(&[rng.random_range(0.0..2.0 * PI)]), dv(&[sign]));
        let b = NormalVector::new(sphere.normalize_param(&random_unit(&mut rng, 3)), dv(&[sign]));
        let ga = normal_geodesic(&circle, &a, len, 1e-12).unwrap();
        let gb = normal_geodesic(&sphere, &b, len, 1e-12).unwrap();
        // quotient projection: distance to the origin
        for k in (0..ga.len()).step_by(97) {
            assert!((ga.position(k).norm() - gb.position(k).norm()).abs() < 1e-9);
        }
        let ha = horizontal_index(&ga, &FoliationSpec::concentric_circles(), &circle, Complement::Orthogonal, &opts).unwrap();
        let hb = horizontal_index(&gb, &FoliationSpec::concentric_spheres(3), &sphere, Complement::Orthogonal, &opts).unwrap();
        assert_eq!(ha.index, hb.index, "r0 {r0}, length {len}");
    }
}
