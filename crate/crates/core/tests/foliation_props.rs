mod common;

use common::*;
use focal_forge::focal::FocalOptions;
use focal_forge::foliation::{
    crossing_number, horizontality_check, hopf_map, singular_crossings, w_focal_index, FoliationSpec,
};
use focal_forge::geodesic::integrate_geodesic;
use focal_forge::Geodesic;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn foliations() -> Vec<FoliationSpec> {
    vec![
        FoliationSpec::concentric_circles(),
        FoliationSpec::concentric_spheres(3),
        FoliationSpec::circles_times_line(),
        FoliationSpec::hopf(),
    ]
}

/// Random regular horizontal geodesic; returns it with its start and unit direction.
fn random_horizontal(rng: &mut ChaCha8Rng, fol: &FoliationSpec) -> (Geodesic, DVector<f64>, DVector<f64>) {
    let space = fol.parent();
    loop {
        let x = space.project_point(&(gaussian(rng, space.ambient_dim()) * 1.5));
        if fol.leaf_dim(&x) < fol.regular_dim() {
            continue;
        }
        let v = space.project_tangent(&x, &gaussian(rng, space.ambient_dim()));
        let h = &v - fol.vertical_projection(&x, &v);
        let n = space.norm(&x, &h);
        if n < 1e-3 {
            continue;
        }
        let h = h / n;
        let len = rng.random_range(0.5..4.0);
        let g = integrate_geodesic(space, &x, &h, len, 1e-12).unwrap();
        return (g, x, h);
    }
}

/// Closed-form crossing times of a straight line `x + t h` with the axis
/// `{first k coordinates zero}` on `(0, len)`.
fn line_crossings(x: &DVector<f64>, h: &DVector<f64>, k: usize, len: f64) -> Vec<f64> {
    let (a, b) = (x.rows(0, k).into_owned(), h.rows(0, k).into_owned());
    if b.norm() < 1e-12 {
        return vec![];
    }
    let t = -a.dot(&b) / b.norm_squared();
    if t > 0.0 && t < len && (a + b * t).norm() < 1e-9 {
        vec![t]
    } else {
        vec![]
    }
}

#[test]
fn w_focal_times_are_singular_crossings() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let opts = FocalOptions::default();
    for fol in foliations() {
        for _ in 0..50 {
            let (g, x, h) = random_horizontal(&mut rng, &fol);
            let crossings = singular_crossings(&g, &fol).unwrap();
            let vi = w_focal_index(&g, &fol, &opts).unwrap();
            assert_eq!(vi.records.len(), crossings.len(), "{}", fol.label());
            for (r, c) in vi.records.iter().zip(&crossings) {
                assert!((r.time - c.time).abs() < 1e-6);
                assert_eq!(r.multiplicity, c.drop);
            }
            // singular set: the origin, the z-axis, none
            let expected = match (fol.parent().ambient_dim(), fol.regular_dim()) {
                (4, _) => vec![],
                (3, 1) => line_crossings(&x, &h, 2, g.horizon()),
                _ => line_crossings(&x, &h, x.len(), g.horizon()),
            };
            assert_eq!(crossings.len(), expected.len(), "{}: {crossings:?} vs {expected:?}", fol.label());
            for (c, t) in crossings.iter().zip(&expected) {
                assert!((c.time - t).abs() < 1e-6);
                assert_eq!(c.drop, fol.regular_dim());
            }
        }
    }
}

#[test]
fn vertical_index_is_crossing_number() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let opts = FocalOptions::default();
    for fol in foliations() {
        let mut crossing = 0;
        for _ in 0..50 {
            let (g, _, _) = random_horizontal(&mut rng, &fol);
            let c = crossing_number(&g, &fol).unwrap();
            assert_eq!(w_focal_index(&g, &fol, &opts).unwrap().index, c, "{}", fol.label());
            crossing += usize::from(c > 0);
        }
        if fol.parent().ambient_dim() != 4 {
            assert!(crossing > 0, "{}: no geodesic crossed the singular leaf", fol.label());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn horizontality_propagates(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for fol in foliations() {
            let (g, _, _) = random_horizontal(&mut rng, &fol);
            let h = horizontality_check(&g, &fol, 1e-7);
            prop_assert!(h.horizontal, "{}: {}", fol.label(), h.max_deviation);
        }
    }

    #[test]
    fn hopf_horizontal_geodesics_project_at_half_speed(seed in any::<u64>()) {
        // the Hopf map onto S^2(1/2) is a Riemannian submersion: base distance grows like t
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fol = FoliationSpec::hopf();
        let (g, _, _) = random_horizontal(&mut rng, &fol);
        let p0 = hopf_map(g.position(0));
        let t = g.times()[200];
        let q = hopf_map(g.position(200));
        prop_assert!((p0.norm() - 0.5).abs() < 1e-9);
        let angle = (p0.dot(&q) / 0.25).clamp(-1.0, 1.0).acos();
        prop_assert!((angle * 0.5 - t).abs() < 1e-8);
    }
}
