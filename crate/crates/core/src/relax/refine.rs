use std::collections::HashMap;

use crate::lattice::{canonicalize, Vec3};
use crate::mesh::Mesh;

/// Split every facet into four through its edge midpoints. Corner vertices
/// keep their ids; each midpoint sits at the unwrapped midpoint of its
/// parent edge, and child wraps follow from the lifted positions so the two
/// halves of an edge sum to the parent wrap.
pub fn refine(mesh: &Mesh) -> Mesh {
    let mut out = Mesh::new(mesh.lattice.clone(), mesh.targets());
    out.vertices = mesh.vertices.clone();
    let mut index = HashMap::new();
    let mut mid = vec![usize::MAX; mesh.edges.len()];
    for (ei, e) in mesh.live_edges() {
        let d = mesh.vertex(e.head).u - mesh.vertex(e.tail).u + e.wrap.to_vec3();
        let (u, _) = canonicalize(&(mesh.vertex(e.tail).u + d * 0.5));
        mid[ei] = out.add_vertex(u);
    }
    for (fi, f) in mesh.live_facets() {
        let [v0, v1, v2] = mesh.facet_vertices(fi);
        let [q0, q1, q2] = mesh.facet_lift(fi);
        let m: [usize; 3] = [mid[f.edges[0].edge], mid[f.edges[1].edge], mid[f.edges[2].edge]];
        let h = |a: Vec3, b: Vec3| (a + b) * 0.5;
        let (p01, p12, p20) = (h(q0, q1), h(q1, q2), h(q2, q0));
        let (fr, bk) = (f.front, f.back);
        out.add_facet_lifted(&mut index, [v0, m[0], m[2]], [q0, p01, p20], fr, bk);
        out.add_facet_lifted(&mut index, [m[0], v1, m[1]], [p01, q1, p12], fr, bk);
        out.add_facet_lifted(&mut index, [m[2], m[1], v2], [p20, p12, q2], fr, bk);
        out.add_facet_lifted(&mut index, [m[0], m[1], m[2]], [p01, p12, p20], fr, bk);
    }
    out.classify_vertices();
    crate::metrics::reanchor(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{build, CandidateKind, CandidateSpec};
    use crate::lattice::Lattice;
    use crate::mesh::{topology_signature, validate};

    #[test]
    fn counts_follow_the_split() {
        let l = Lattice::cubic(1.0).unwrap();
        let m = build(&CandidateSpec::new(CandidateKind::StandardDoubleBubble, l, 0.05, 0.03)).unwrap();
        let r = refine(&m);
        assert_eq!(r.facet_count(), 4 * m.facet_count());
        assert_eq!(r.edge_count(), 2 * m.edge_count() + 3 * m.facet_count());
        assert!(validate(&r).is_valid(), "{}", validate(&r).summary(5));
        assert_eq!(topology_signature(&r).unwrap().shape(), topology_signature(&m).unwrap().shape());
    }
}
