use crate::lattice::Vec3;
use crate::mesh::Mesh;

/// Move each vertex toward the area-weighted centroid of its incident
/// facets, keeping only the motion tangent to the surface. Vertices on a
/// triple curve move along the curve toward the midpoint of their two
/// curve neighbours; vertices where curves meet stay put. Volumes are not
/// re-projected here.
pub fn vertex_average(mesh: &mut Mesh) {
    let adj = mesh.adjacency();
    let mut delta = vec![Vec3::zeros(); mesh.vertices.len()];
    for (v, vert) in mesh.live_vertices() {
        if vert.on_triple_curve {
            let curve: Vec<usize> = adj.vertex_edges[v].iter().copied().filter(|&e| adj.edge_facets[e].len() == 3).collect();
            if curve.len() != 2 {
                continue;
            }
            let ends: Vec<Vec3> = curve.iter().map(|&e| neighbour_offset(mesh, e, v)).collect();
            let tangent = ends[1] - ends[0];
            let len = tangent.norm();
            if len == 0.0 {
                continue;
            }
            let t = tangent / len;
            let mid = (ends[0] + ends[1]) * 0.5;
            delta[v] = t * mid.dot(&t);
            continue;
        }
        let fs = &adj.vertex_facets[v];
        if fs.is_empty() {
            continue;
        }
        let reference = mesh.facet(fs[0]).front;
        let mut normal = Vec3::zeros();
        let mut weighted = Vec3::zeros();
        let mut total = 0.0;
        for &f in fs {
            let vs = mesh.facet_vertices(f);
            let k = vs.iter().position(|&x| x == v).expect("incident facet");
            let p = mesh.facet_ambient(f);
            let base = p[k];
            let area_vec = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0]));
            let sign = if mesh.facet(f).front == reference { 1.0 } else { -1.0 };
            normal += area_vec * sign;
            let a = area_vec.norm();
            let centroid = (p[0] + p[1] + p[2]) / 3.0 - base;
            weighted += centroid * a;
            total += a;
        }
        if total == 0.0 || normal.norm() == 0.0 {
            continue;
        }
        let n = normal.normalize();
        let c = weighted / total;
        delta[v] = c - n * c.dot(&n);
    }
    mesh.displace(&delta);
}

/// Ambient vector from `v` to the other end of edge `e`.
fn neighbour_offset(mesh: &Mesh, e: usize, v: usize) -> Vec3 {
    let d = mesh.edge_vector(e);
    if mesh.edge(e).tail == v {
        d
    } else {
        -d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{build, CandidateKind, CandidateSpec};
    use crate::lattice::Lattice;
    use crate::mesh::{validate, MeshBuilder};
    use crate::metrics::total_area;
    use crate::relax::{min_angle, project_volumes};

    fn grid_slab(offset: Option<[f64; 2]>) -> Mesh {
        let l = Lattice::cubic(1.0).unwrap();
        let mut mb = MeshBuilder::new(l, [0.3, 0.3]);
        let n = 4;
        for (h, fr, bk) in [(0.1, 1u8, 0u8), (0.4, 2, 1), (0.7, 0, 2)] {
            for i in 0..n {
                for j in 0..n {
                    let p = |i: usize, j: usize| {
                        let mut x = Vec3::new(i as f64 / n as f64, j as f64 / n as f64, h);
                        if let (Some(o), 2, 2, true) = (offset, i, j, h == 0.1) {
                            x[0] += o[0];
                            x[1] += o[1];
                        }
                        x
                    };
                    mb.quad(&p(i, j), &p(i + 1, j), &p(i + 1, j + 1), &p(i, j + 1), fr, bk);
                }
            }
        }
        mb.finish().unwrap()
    }

    #[test]
    fn uniform_grid_is_fixed() {
        let mut m = grid_slab(None);
        let before = m.clone();
        vertex_average(&mut m);
        for (i, v) in before.live_vertices() {
            let d = m.vertex(i).u - v.u;
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn off_center_vertex_moves_in_plane() {
        let mut m = grid_slab(Some([0.06, -0.04]));
        let moved: Vec<usize> = m
            .live_vertices()
            .filter(|(_, v)| (v.u[2] - 0.1).abs() < 1e-9 && (v.u[0] - 0.56).abs() < 1e-9)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(moved.len(), 1);
        let v = moved[0];
        let before = m.vertex(v).u;
        vertex_average(&mut m);
        let after = m.vertex(v).u;
        assert!((after[2] - 0.1).abs() < 1e-12, "wall stays planar");
        let target = Vec3::new(0.5, 0.5, 0.1);
        assert!((after - target).norm() < (before - target).norm());
        assert!(validate(&m).is_valid());
    }

    #[test]
    fn sdb_quality_and_area_preserved() {
        let l = Lattice::cubic(1.0).unwrap();
        let mut m = build(&CandidateSpec::new(CandidateKind::StandardDoubleBubble, l, 0.05, 0.05)).unwrap();
        project_volumes(&mut m, 1e-9).unwrap();
        let (a0, ang0) = (total_area(&m), min_angle(&m));
        vertex_average(&mut m);
        project_volumes(&mut m, 1e-9).unwrap();
        assert!(min_angle(&m) >= ang0 - 5f64.to_radians());
        assert!(((total_area(&m) - a0) / a0).abs() < 1e-3);
        assert!(validate(&m).is_valid());
    }
}
