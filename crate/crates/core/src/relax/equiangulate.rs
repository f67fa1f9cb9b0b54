use crate::lattice::Vec3;
use crate::mesh::{EdgeKey, Mesh};

const MAX_PASSES: usize = 100;
/// Largest angle between the normals of two facets that may be flipped.
const COPLANAR_DEG: f64 = 20.0;

fn angles(a: &Vec3, b: &Vec3, c: &Vec3) -> [f64; 3] {
    let ang = |p: &Vec3, q: &Vec3, r: &Vec3| {
        let (u, v) = (q - p, r - p);
        u.cross(&v).norm().atan2(u.dot(&v))
    };
    [ang(a, b, c), ang(b, c, a), ang(c, a, b)]
}

/// Smallest corner angle over all facets, in radians.
pub fn min_angle(mesh: &Mesh) -> f64 {
    mesh.live_facets()
        .map(|(fi, _)| {
            let [a, b, c] = mesh.facet_ambient(fi);
            angles(&a, &b, &c).into_iter().fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Flip edges interior to a wall while doing so raises the smaller of the
/// two facets' minimum angles. Triple-curve edges are never touched.
/// Returns the number of flips.
pub fn equiangulate(mesh: &mut Mesh) -> usize {
    let mut flips = 0;
    let mut index = mesh.edge_index();
    for _ in 0..MAX_PASSES {
        let adj = mesh.adjacency();
        let mut touched = vec![false; mesh.facets.len()];
        let mut pass = 0;
        let edges: Vec<usize> = mesh.live_edges().map(|(i, _)| i).collect();
        for ei in edges {
            let fs = &adj.edge_facets[ei];
            if fs.len() != 2 || touched[fs[0]] || touched[fs[1]] {
                continue;
            }
            if try_flip(mesh, &mut index, ei, fs[0], fs[1]) {
                touched[fs[0]] = true;
                touched[fs[1]] = true;
                pass += 1;
            }
        }
        flips += pass;
        if pass == 0 {
            break;
        }
    }
    mesh.classify_vertices();
    flips
}

/// Positions of a facet's corners rotated so that the corner list starts
/// with the tail of its use of edge `ei`.
fn rotated(mesh: &Mesh, fi: usize, ei: usize) -> Option<([usize; 3], [Vec3; 3], bool)> {
    let f = mesh.facet(fi);
    let k = f.edges.iter().position(|r| r.edge == ei)?;
    let vs = mesh.facet_vertices(fi);
    let q = mesh.facet_lift(fi);
    let idx = [k, (k + 1) % 3, (k + 2) % 3];
    Some((idx.map(|i| vs[i]), idx.map(|i| q[i]), f.edges[k].reversed))
}

fn try_flip(mesh: &mut Mesh, index: &mut std::collections::HashMap<EdgeKey, usize>, ei: usize, f1: usize, f2: usize) -> bool {
    let (a1, b1) = (*mesh.facet(f1), *mesh.facet(f2));
    if a1.front != b1.front || a1.back != b1.back {
        return false;
    }
    let Some((v1, q1, r1)) = rotated(mesh, f1, ei) else { return false };
    let Some((v2, q2, r2)) = rotated(mesh, f2, ei) else { return false };
    // consistent orientation: the two facets use the edge in opposite senses
    if r1 == r2 {
        return false;
    }
    // facet 1 is (a, b, c); facet 2 is (b, a, d)
    let (a, b, c) = (v1[0], v1[1], v1[2]);
    let d = v2[2];
    let off = q1[1] - q2[0];
    let (pa, pb, pc, pd) = (q1[0], q1[1], q1[2], q2[2] + off);
    let m = mesh.lattice.basis();
    let (xa, xb, xc, xd) = (m * pa, m * pb, m * pc, m * pd);

    let n1 = (xb - xa).cross(&(xc - xa));
    let n2 = (xa - xb).cross(&(xd - xb));
    if n1.norm() == 0.0 || n2.norm() == 0.0 {
        return false;
    }
    let cosang = n1.dot(&n2) / (n1.norm() * n2.norm());
    if cosang < COPLANAR_DEG.to_radians().cos() {
        return false;
    }
    let before = min3(angles(&xa, &xb, &xc)).min(min3(angles(&xb, &xa, &xd)));
    let after = min3(angles(&xa, &xd, &xc)).min(min3(angles(&xd, &xb, &xc)));
    if after <= before + 1e-12 {
        return false;
    }
    // the new triangles must keep the orientation of the old pair
    let m1 = (xd - xa).cross(&(xc - xa));
    let m2 = (xb - xd).cross(&(xc - xd));
    if m1.dot(&n1) <= 0.0 || m2.dot(&n1) <= 0.0 {
        return false;
    }
    // refuse if c and d are already joined by an edge with this wrap
    let w = crate::mesh::wrap_between(&mesh.vertex(c).u, &pc, &mesh.vertex(d).u, &pd);
    if c == d && w.is_zero() {
        return false;
    }
    if index.contains_key(&EdgeKey::new(c, d, w).0) {
        return false;
    }

    let old = *mesh.edge(ei);
    index.remove(&EdgeKey::new(old.tail, old.head, old.wrap).0);
    mesh.remove_facet(f1);
    mesh.remove_facet(f2);
    mesh.remove_edge(ei);
    let (front, back) = (a1.front, a1.back);
    mesh.add_facet_lifted(index, [a, d, c], [pa, pd, pc], front, back);
    mesh.add_facet_lifted(index, [d, b, c], [pd, pb, pc], front, back);
    true
}

fn min3(a: [f64; 3]) -> f64 {
    a[0].min(a[1]).min(a[2])
}
