//! Area, volume and their vertex gradients, plus a Monte Carlo volume
//! oracle that shares no code with the facet-sum volume.

mod locate;
mod volume;

use serde::Serialize;

pub use locate::{monte_carlo_volumes, point_region, MonteCarloEstimate, RegionLocator};
pub use volume::{body_volume, reanchor, region_volumes, region_volume, VolumeReading};

use crate::lattice::Vec3;
use crate::mesh::{Mesh, Region};

/// Per-vertex ambient vectors indexed by vertex id; dead slots are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub values: Vec<Vec3>,
}

impl GradientField {
    pub fn zeros(n: usize) -> Self {
        GradientField { values: vec![Vec3::zeros(); n] }
    }

    pub fn dot(&self, other: &GradientField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.dot(b)).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_squared()).sum()
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &GradientField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    pub fn scaled(&self, s: f64) -> GradientField {
        GradientField { values: self.values.iter().map(|v| v * s).collect() }
    }
}

#[derive(Serialize)]
struct GradientDump {
    area: Vec<Option<[f64; 3]>>,
    volume: [Vec<Option<[f64; 3]>>; 2],
}

/// JSON dump of all three gradient fields, keyed by vertex id.
pub fn gradients_json(mesh: &Mesh) -> String {
    let rows = |g: &GradientField| -> Vec<Option<[f64; 3]>> {
        mesh.vertices.iter().zip(&g.values).map(|(v, x)| v.as_ref().map(|_| [x[0], x[1], x[2]])).collect()
    };
    let dump = GradientDump {
        area: rows(&area_gradient(mesh)),
        volume: [rows(&volume_gradient(mesh, 1)), rows(&volume_gradient(mesh, 2))],
    };
    serde_json::to_string_pretty(&dump).expect("gradient dump serializes")
}

pub fn facet_area(mesh: &Mesh, f: usize) -> f64 {
    mesh.facet_vector_area(f).norm()
}

/// Sum of facet areas; each wall is counted once.
pub fn total_area(mesh: &Mesh) -> f64 {
    mesh.live_facets().map(|(i, _)| facet_area(mesh, i)).sum()
}

/// Area of the walls separating regions `a` and `b`.
pub fn pair_area(mesh: &Mesh, a: Region, b: Region) -> f64 {
    let key = (a.min(b), a.max(b));
    mesh.live_facets().filter(|(_, f)| f.pair() == key).map(|(i, _)| facet_area(mesh, i)).sum()
}

pub fn area_gradient(mesh: &Mesh) -> GradientField {
    let mut g = GradientField::zeros(mesh.vertices.len());
    for (fi, _) in mesh.live_facets() {
        let vs = mesh.facet_vertices(fi);
        let p = mesh.facet_ambient(fi);
        let n = (p[1] - p[0]).cross(&(p[2] - p[0]));
        let len = n.norm();
        if len == 0.0 {
            continue;
        }
        let nh = n / len;
        for k in 0..3 {
            let prev = p[(k + 2) % 3];
            let next = p[(k + 1) % 3];
            g.values[vs[k]] += 0.5 * nh.cross(&(prev - next));
        }
    }
    g
}

/// Gradient of the volume of `region` (any of 0, 1, 2).
pub fn volume_gradient(mesh: &Mesh, region: Region) -> GradientField {
    let mut g = GradientField::zeros(mesh.vertices.len());
    for (fi, f) in mesh.live_facets() {
        let s = f.outward_sign(region);
        if s == 0.0 {
            continue;
        }
        let a = mesh.facet_vector_area(fi) * (s / 3.0);
        for v in mesh.facet_vertices(fi) {
            g.values[v] += a;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{build, CandidateKind, CandidateSpec};
    use crate::lattice::Lattice;
    use crate::relax::refine;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn slab(l: Lattice) -> Mesh {
        build(&CandidateSpec::new(CandidateKind::DoubleSlab, l, 1.0 / 3.0, 1.0 / 3.0)).unwrap()
    }

    fn perturbed_sdb(seed: u64) -> Mesh {
        let l = Lattice::cubic(1.0).unwrap();
        let mut m = build(&CandidateSpec::new(CandidateKind::StandardDoubleBubble, l, 0.05, 0.03)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d: Vec<Vec3> = (0..m.vertices.len())
            .map(|_| Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.01)
            .collect();
        m.displace(&d);
        m
    }

    /// Central differences of `f` with respect to every vertex coordinate.
    fn fd_gradient(mesh: &Mesh, h: f64, f: impl Fn(&Mesh) -> f64) -> GradientField {
        let mut g = GradientField::zeros(mesh.vertices.len());
        for (v, _) in mesh.live_vertices() {
            for k in 0..3 {
                let mut d = vec![Vec3::zeros(); mesh.vertices.len()];
                d[v][k] = h;
                let mut plus = mesh.clone();
                plus.displace(&d);
                d[v][k] = -h;
                let mut minus = mesh.clone();
                minus.displace(&d);
                g.values[v][k] = (f(&plus) - f(&minus)) / (2.0 * h);
            }
        }
        g
    }

    fn max_rel_error(a: &GradientField, b: &GradientField) -> f64 {
        let scale = b.max_norm().max(1e-300);
        a.values.iter().zip(&b.values).flat_map(|(x, y)| (0..3).map(move |k| (x[k] - y[k]).abs())).fold(0.0, f64::max)
            / scale
    }

    #[test]
    fn double_slab_area_is_three() {
        let m = slab(Lattice::cubic(1.0).unwrap());
        assert!((total_area(&m) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_keeps_flat_area() {
        let m = slab(Lattice::cubic(1.0).unwrap());
        let r = refine(&m);
        assert!(r.facet_count() == 4 * m.facet_count());
        assert!((total_area(&r) - total_area(&m)).abs() < 1e-12);
    }

    #[test]
    fn flat_wall_is_critical() {
        let m = slab(Lattice::cubic(1.0).unwrap());
        assert!(area_gradient(&m).max_norm() < 1e-12);
    }

    #[test]
    fn area_gradient_matches_finite_differences() {
        let m = perturbed_sdb(7);
        let fd = fd_gradient(&m, 1e-6, total_area);
        let err = max_rel_error(&area_gradient(&m), &fd);
        assert!(err < 1e-5, "relative error {err}");
    }

    #[test]
    fn volume_gradient_matches_finite_differences() {
        let m = perturbed_sdb(11);
        for r in [1u8, 2] {
            let fd = fd_gradient(&m, 1e-6, |x| body_volume(x, r).unwrap().value);
            let err = max_rel_error(&volume_gradient(&m, r), &fd);
            assert!(err < 1e-5, "region {r}: relative error {err}");
        }
    }

    #[test]
    fn volume_gradient_support() {
        let m = perturbed_sdb(3);
        let g = volume_gradient(&m, 1);
        let adj = m.adjacency();
        for (v, _) in m.live_vertices() {
            let touches = adj.vertex_facets[v].iter().any(|&f| m.facet(f).bounds(1));
            if !touches {
                assert_eq!(g.values[v], Vec3::zeros());
            }
        }
    }

    #[test]
    fn slab_volume_gradient_is_area_over_three() {
        let m = slab(Lattice::cubic(1.0).unwrap());
        let g = volume_gradient(&m, 1);
        let adj = m.adjacency();
        for (v, _) in m.live_vertices() {
            let mut expect = Vec3::zeros();
            for &f in &adj.vertex_facets[v] {
                let fc = m.facet(f);
                expect += m.facet_vector_area(f) * (fc.outward_sign(1) / 3.0);
            }
            assert!((g.values[v] - expect).norm() < 1e-15);
            if expect != Vec3::zeros() {
                // normal to the wall, magnitude (incident area)/3
                assert!(expect[0].abs() < 1e-15 && expect[1].abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gradient_scales_linearly_with_lattice() {
        let m1 = perturbed_sdb(5);
        let mut m2 = m1.clone();
        m2.lattice = Lattice::cubic(2.0).unwrap();
        let (g1, g2) = (area_gradient(&m1), area_gradient(&m2));
        for (a, b) in g1.values.iter().zip(&g2.values) {
            assert!((b - 2.0 * a).norm() < 1e-12);
        }
    }

    #[test]
    fn area_invariant_under_translation() {
        let m = perturbed_sdb(9);
        let mut t = m.clone();
        let shift = vec![m.lattice.to_ambient(&Vec3::new(0.37, 0.81, 0.55)); m.vertices.len()];
        t.displace(&shift);
        assert!((total_area(&t) - total_area(&m)).abs() < 1e-12);
        for r in [1u8, 2] {
            let (a, b) = (body_volume(&m, r).unwrap().value, body_volume(&t, r).unwrap().value);
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}
