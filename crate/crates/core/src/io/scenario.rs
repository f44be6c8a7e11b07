use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::Result;
use crate::foliation::FoliationSpec;
use crate::geometry::{NormalVector, RiemannianSpace, SubmanifoldPatch};

/// A registered geometric setting: a patch, optionally a foliation having
/// the patch as a regular leaf, and defaults for every operation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Scenario {
    pub id: &'static str,
    pub description: &'static str,
    /// Reference Betti table id for `taut-check`.
    pub reference: Option<&'static str>,
    pub default_cap: f64,
    /// Largest random geodesic length drawn by `split`.
    pub max_length: f64,
    #[serde(skip)]
    build: fn() -> Result<Built>,
}

/// Materialized scenario objects.
pub struct Built {
    pub patch: SubmanifoldPatch<f64>,
    pub foliation: Option<FoliationSpec>,
    pub target: DVector<f64>,
    /// Non-focal vectors for `index` and `cycles`.
    pub vectors: Vec<NormalVector<f64>>,
    /// Focal vectors for `fiber-probe`.
    pub focal_vectors: Vec<NormalVector<f64>>,
}

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn circle() -> Result<Built> {
    Ok(Built {
        patch: SubmanifoldPatch::sphere_in_euclidean(2, 1.0),
        foliation: Some(FoliationSpec::concentric_circles()),
        target: v(&[0.5, 0.0]),
        vectors: vec![NormalVector::new(v(&[0.0]), v(&[1.5]))],
        focal_vectors: vec![NormalVector::new(v(&[0.0]), v(&[1.0]))],
    })
}

fn sphere() -> Result<Built> {
    Ok(Built {
        patch: SubmanifoldPatch::sphere_in_euclidean(3, 1.0),
        foliation: Some(FoliationSpec::concentric_spheres(3)),
        target: v(&[0.2, 0.1, 0.3]),
        vectors: vec![NormalVector::new(v(&[0.0, 0.0, 1.0]), v(&[2.0]))],
        focal_vectors: vec![NormalVector::new(v(&[0.0, 0.0, 1.0]), v(&[1.0]))],
    })
}

fn sphere_point(n: usize) -> Result<Built> {
    let mut p = DVector::zeros(n + 1);
    p[n] = 1.0;
    let parent = RiemannianSpace::round_sphere(n, 1.0);
    let d: f64 = 1.0;
    let mut q = DVector::zeros(n + 1);
    q[0] = d.sin();
    q[n] = d.cos();
    let mut c = DVector::zeros(n);
    c[0] = 2.5 * PI;
    Ok(Built {
        patch: SubmanifoldPatch::point_patch(parent.clone(), p)?,
        foliation: Some(FoliationSpec::points(parent)),
        target: q,
        vectors: vec![NormalVector::new(DVector::zeros(0), c.clone())],
        focal_vectors: vec![NormalVector::new(DVector::zeros(0), c * 0.4)],
    })
}

fn hopf() -> Result<Built> {
    let d: f64 = 0.5;
    Ok(Built {
        patch: SubmanifoldPatch::hopf_fiber(v(&[1.0, 0.0, 0.0, 0.0]))?,
        foliation: Some(FoliationSpec::hopf()),
        // distance 0.5 from the fiber through (1, 0, 0, 0)
        target: v(&[d.cos(), 0.0, d.sin(), 0.0]),
        vectors: vec![NormalVector::new(v(&[0.0]), v(&[2.0, 0.0]))],
        focal_vectors: vec![NormalVector::new(v(&[0.0]), v(&[0.5 * PI, 0.0]))],
    })
}

fn hyperplane() -> Result<Built> {
    Ok(Built {
        patch: SubmanifoldPatch::hyperplane(3, 10.0),
        foliation: None,
        target: v(&[0.3, -0.2, 1.3]),
        vectors: vec![NormalVector::new(v(&[0.0, 0.0]), v(&[1.0]))],
        focal_vectors: vec![],
    })
}

fn circle_in_space() -> Result<Built> {
    Ok(Built {
        patch: SubmanifoldPatch::horizontal_circle(1.0, 0.0),
        foliation: Some(FoliationSpec::circles_times_line()),
        target: v(&[0.3, 0.2, 0.5]),
        vectors: vec![NormalVector::new(v(&[0.0]), v(&[1.5, 0.5]))],
        focal_vectors: vec![NormalVector::new(v(&[0.0]), v(&[1.0, 0.0]))],
    })
}

const REGISTRY: &[Scenario] = &[
    Scenario {
        id: "circle-r2",
        description: "unit circle in the plane, leaf of the concentric circles",
        reference: Some("circle-r2"),
        default_cap: 9.0,
        max_length: 3.0,
        build: circle,
    },
    Scenario {
        id: "sphere-s2-r3",
        description: "unit sphere in R^3, leaf of the concentric spheres",
        reference: Some("sphere-s2-r3"),
        default_cap: 16.0,
        max_length: 3.0,
        build: sphere,
    },
    Scenario {
        id: "sphere-point-s2",
        description: "a point of the round 2-sphere",
        reference: Some("omega-s2:3"),
        default_cap: 16.0 * PI * PI,
        max_length: 3.0 * PI,
        build: || sphere_point(2),
    },
    Scenario {
        id: "sphere-point-s3",
        description: "a point of the round 3-sphere",
        reference: Some("omega-s3:6"),
        default_cap: 16.0 * PI * PI,
        max_length: 3.0 * PI,
        build: || sphere_point(3),
    },
    Scenario {
        id: "hopf-fiber-s3",
        description: "a Hopf circle in the round 3-sphere, leaf of the Hopf foliation",
        reference: Some("hopf-fiber-s3:5"),
        default_cap: 9.0 * PI * PI,
        max_length: 3.0 * PI,
        build: hopf,
    },
    Scenario {
        id: "hyperplane-r3",
        description: "the plane z = 0 in R^3",
        reference: Some("hyperplane-r3"),
        default_cap: 16.0,
        max_length: 3.0,
        build: hyperplane,
    },
    Scenario {
        id: "circle-line-r3",
        description: "horizontal unit circle in R^3, leaf of concentric circles times a line",
        reference: None,
        default_cap: 16.0,
        max_length: 3.0,
        build: circle_in_space,
    },
];

pub fn scenarios() -> &'static [Scenario] {
    REGISTRY
}

pub fn scenario(id: &str) -> Option<&'static Scenario> {
    REGISTRY.iter().find(|s| s.id == id)
}

impl Scenario {
    pub fn build(&self) -> Result<Built> {
        (self.build)()
    }
}

impl Built {
    /// Unit normal number `k` of `n` on a closed loop in the normal bundle:
    /// a circle of coefficients when the codimension allows, otherwise a
    /// loop of foot points.
    pub fn scan_direction(&self, k: usize, n: usize) -> (f64, NormalVector<f64>) {
        let angle = 2.0 * PI * k as f64 / n as f64;
        let base = &self.vectors[0].param;
        let codim = self.patch.codim();
        if codim >= 2 {
            let mut c = DVector::zeros(codim);
            c[0] = angle.cos();
            c[1] = angle.sin();
            return (angle, NormalVector::new(base.clone(), c));
        }
        let mut u = base.clone();
        if u.len() == 1 {
            u[0] += angle;
        } else if u.len() >= 2 {
            u[0] += 0.5 * angle.cos();
            u[1] += 0.5 * angle.sin();
        }
        (angle, NormalVector::new(self.patch.normalize_param(&u), v(&[1.0])))
    }

    /// Random unit normal with foot point uniform in the parameter box.
    pub fn random_unit_normal(&self, rng: &mut ChaCha8Rng) -> NormalVector<f64> {
        let u = DVector::from_iterator(
            self.patch.param_dim(),
            self.patch.param_box().iter().map(|&(a, b)| rng.random_range(a..b)),
        );
        let c: DVector<f64> = DVector::from_fn(self.patch.codim(), |_, _| rng.sample(StandardNormal));
        NormalVector::new(self.patch.normalize_param(&u), &c / c.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn registry_builds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in scenarios() {
            let b = s.build().unwrap();
            assert_eq!(b.target.len(), b.patch.parent().ambient_dim(), "{}", s.id);
            let w = b.random_unit_normal(&mut rng);
            assert!((w.length() - 1.0).abs() < 1e-12);
            let (_, d) = b.scan_direction(3, 8);
            assert!((d.length() - 1.0).abs() < 1e-12);
            if let Some(r) = s.reference {
                crate::harness::reference_betti(r).unwrap();
            }
        }
        assert!(scenario("nope").is_none());
    }
}
