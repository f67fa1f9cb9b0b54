use std::fmt;

use serde::Serialize;

use super::{Mesh, REGIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ElementRef {
    Vertex(usize),
    Edge(usize),
    Facet(usize),
    Body(u8),
    Mesh,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub element: ElementRef,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, element: ElementRef, message: impl Into<String>) {
        self.violations.push(Violation { element, message: message.into() });
    }

    pub fn summary(&self, max: usize) -> String {
        let mut s: Vec<String> = self.violations.iter().take(max).map(|v| v.to_string()).collect();
        if self.violations.len() > max {
            s.push(format!("... and {} more", self.violations.len() - max));
        }
        s.join("; ")
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.element, self.message)
    }
}

/// Check every structural invariant; failures are collected, not raised.
pub fn validate(mesh: &Mesh) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let nv = mesh.vertices.len();
    let ne = mesh.edges.len();

    for (i, v) in mesh.live_vertices() {
        if !v.u.iter().all(|c| c.is_finite() && (0.0..1.0).contains(c)) {
            rep.push(ElementRef::Vertex(i), format!("coordinates {:?} not canonical", v.u.as_slice()));
        }
    }

    for (i, e) in mesh.live_edges() {
        let live = |v: usize| v < nv && mesh.vertices[v].is_some();
        if !live(e.tail) || !live(e.head) {
            rep.push(ElementRef::Edge(i), "endpoint is not a live vertex");
            continue;
        }
        if e.tail == e.head && e.wrap.is_zero() {
            rep.push(ElementRef::Edge(i), "degenerate loop edge");
        }
        if e.wrap.max_abs() > 1 {
            rep.push(ElementRef::Edge(i), format!("wrap {} has a component beyond 1", e.wrap));
        }
    }

    let mut edge_facets = vec![Vec::new(); ne];
    let mut structural_ok = true;
    for (fi, f) in mesh.live_facets() {
        if f.edges.iter().any(|r| r.edge >= ne || mesh.edges[r.edge].is_none()) {
            rep.push(ElementRef::Facet(fi), "references a dead edge");
            structural_ok = false;
            continue;
        }
        if f.front == f.back {
            rep.push(ElementRef::Facet(fi), format!("front and back are both region {}", f.front));
        }
        if f.front > 2 || f.back > 2 {
            rep.push(ElementRef::Facet(fi), "region label outside {0,1,2}");
            structural_ok = false;
        }
        let mut chained = true;
        for k in 0..3 {
            if mesh.ref_end(f.edges[k]) != mesh.ref_start(f.edges[(k + 1) % 3]) {
                chained = false;
            }
        }
        if !chained {
            rep.push(ElementRef::Facet(fi), "edges do not form a connected loop");
            structural_ok = false;
            continue;
        }
        let wsum = mesh.ref_wrap(f.edges[0]) + mesh.ref_wrap(f.edges[1]) + mesh.ref_wrap(f.edges[2]);
        if !wsum.is_zero() {
            rep.push(ElementRef::Facet(fi), format!("wrap loop does not close: sum {wsum}"));
            structural_ok = false;
        }
        for r in f.edges {
            edge_facets[r.edge].push(fi);
        }
    }

    for (ei, _) in mesh.live_edges() {
        let fs = &edge_facets[ei];
        match fs.len() {
            2 => {}
            3 => {
                let mut pairs: Vec<(u8, u8)> = fs.iter().map(|&f| mesh.facet(f).pair()).collect();
                pairs.sort();
                if pairs != vec![(0, 1), (0, 2), (1, 2)] {
                    rep.push(ElementRef::Edge(ei), format!("triple edge walls carry region pairs {pairs:?}"));
                }
            }
            n => rep.push(ElementRef::Edge(ei), format!("edge used by {n} facets (expected 2 or 3)")),
        }
        if structural_ok {
            for r in REGIONS {
                let mut sum = 0i32;
                for &fi in fs {
                    let f = mesh.facet(fi);
                    let s = f.outward_sign(r) as i32;
                    if s == 0 {
                        continue;
                    }
                    let er = f.edges.iter().find(|x| x.edge == ei).unwrap();
                    sum += s * er.sign();
                }
                if sum != 0 {
                    rep.push(
                        ElementRef::Edge(ei),
                        format!("boundary of region {r} is not a cycle here (signed count {sum})"),
                    );
                }
            }
        }
    }

    let det = mesh.lattice.det();
    for b in &mesh.bodies {
        if !(b.target > 0.0 && b.target < det) {
            rep.push(ElementRef::Body(b.region), format!("target {} outside (0, {det})", b.target));
        }
    }
    if mesh.bodies[0].region != 1 || mesh.bodies[1].region != 2 {
        rep.push(ElementRef::Mesh, "bodies must be regions 1 and 2");
    }
    if mesh.region_target(0) <= 0.0 {
        rep.push(ElementRef::Body(0), "targets leave no room for the complement");
    }

    if rep.is_valid() {
        match crate::metrics::region_volumes(mesh) {
            Ok([v0, v1, v2]) => {
                if ((v0 + v1 + v2) - det).abs() > 1e-9 * det {
                    rep.push(ElementRef::Mesh, format!("volumes {v0} + {v1} + {v2} do not partition {det}"));
                }
            }
            Err(e) => rep.push(ElementRef::Mesh, e.to_string()),
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{build, CandidateKind, CandidateSpec};
    use crate::lattice::Lattice;

    fn slab() -> Mesh {
        let l = Lattice::cubic(1.0).unwrap();
        build(&CandidateSpec::new(CandidateKind::DoubleSlab, l, 1.0 / 3.0, 1.0 / 3.0)).unwrap()
    }

    #[test]
    fn double_slab_valid_without_triple_edges() {
        let m = slab();
        assert!(validate(&m).is_valid());
        let adj = m.adjacency();
        assert!(m.live_edges().all(|(i, _)| adj.edge_facets[i].len() == 2));
    }

    #[test]
    fn sdb_has_triple_edges() {
        let l = Lattice::cubic(1.0).unwrap();
        let m = build(&CandidateSpec::new(CandidateKind::StandardDoubleBubble, l, 0.05, 0.03)).unwrap();
        assert!(validate(&m).is_valid(), "{}", validate(&m).summary(5));
        let adj = m.adjacency();
        assert!(m.live_edges().any(|(i, _)| adj.edge_facets[i].len() == 3));
    }

    #[test]
    fn deleted_facet_breaks_boundary_cycle() {
        let mut m = slab();
        m.remove_facet(0);
        let rep = validate(&m);
        assert!(!rep.is_valid());
        assert!(rep.violations.iter().any(|v| v.message.contains("expected 2 or 3")));
    }

    #[test]
    fn flipped_facet_is_localized() {
        let mut m = slab();
        let f = m.facets[3].as_mut().unwrap();
        std::mem::swap(&mut f.front, &mut f.back);
        let rep = validate(&m);
        assert!(rep.violations.iter().any(|v| v.message.contains("not a cycle")));
        assert!(rep.violations.iter().all(|v| matches!(v.element, ElementRef::Edge(_))));
    }

    #[test]
    fn same_region_wall_rejected() {
        let mut m = slab();
        let f = m.facets[0].as_mut().unwrap();
        f.front = f.back;
        let rep = validate(&m);
        assert!(rep.violations.iter().any(|v| v.element == ElementRef::Facet(0)));
    }
}
