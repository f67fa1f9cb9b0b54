//! Triangulated two-complex separating the regions R1, R2 and the
//! complement R0 inside a flat torus.
//!
//! Storage is a set of arenas with stable integer ids. Deleted elements
//! leave a tombstone (`None`) behind and ids are never reused. Vertices
//! hold canonical lattice coordinates; every edge carries the integer wrap
//! vector needed to unwrap it, so `head - tail + wrap` is the edge vector
//! in lattice coordinates.

mod builder;
mod evolver;
mod io;
mod topology;
mod validate;

use std::collections::HashMap;

pub use builder::MeshBuilder;
pub use evolver::{count_fe_sections, export_fe, export_fe_string};
pub use io::{from_json_str, load_json, save_json, to_json_string};
pub use topology::{topology_signature, ComponentSignature, PairSignature, TopologySignature};
pub use validate::{validate, ElementRef, ValidationReport, Violation};

use crate::lattice::{canonicalize, Lattice, Vec3, WrapVec};

/// Region label: 0 is the complement, 1 and 2 are the constrained bodies.
pub type Region = u8;

pub const REGIONS: [Region; 3] = [0, 1, 2];

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub u: Vec3,
    pub on_triple_curve: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub wrap: WrapVec,
}

/// A directed use of an edge inside a facet boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRef {
    pub edge: usize,
    pub reversed: bool,
}

impl EdgeRef {
    pub fn sign(self) -> i32 {
        if self.reversed {
            -1
        } else {
            1
        }
    }
}

/// Oriented triangle. The normal `(p1-p0) x (p2-p0)` points from `back`
/// into `front`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub edges: [EdgeRef; 3],
    pub front: Region,
    pub back: Region,
}

impl Facet {
    pub fn bounds(&self, r: Region) -> bool {
        self.front == r || self.back == r
    }

    /// +1 when the facet normal points out of region `r`, -1 when it points
    /// into it, 0 when the facet does not bound `r`.
    pub fn outward_sign(&self, r: Region) -> f64 {
        if self.back == r {
            1.0
        } else if self.front == r {
            -1.0
        } else {
            0.0
        }
    }

    /// Unordered region pair as (low, high).
    pub fn pair(&self) -> (Region, Region) {
        (self.front.min(self.back), self.front.max(self.back))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub region: Region,
    pub target: f64,
    /// Multiple of the torus volume added to the raw facet sum.
    pub volume_constant: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub lattice: Lattice,
    pub vertices: Vec<Option<Vertex>>,
    pub edges: Vec<Option<Edge>>,
    pub facets: Vec<Option<Facet>>,
    pub bodies: [Body; 2],
}

/// Incidence tables derived from a mesh snapshot.
#[derive(Debug, Clone, Default)]
pub struct Adjacency {
    /// Facets using each edge.
    pub edge_facets: Vec<Vec<usize>>,
    /// Edges incident to each vertex.
    pub vertex_edges: Vec<Vec<usize>>,
    /// Facets incident to each vertex.
    pub vertex_facets: Vec<Vec<usize>>,
}

impl Mesh {
    pub fn new(lattice: Lattice, targets: [f64; 2]) -> Self {
        Mesh {
            lattice,
            vertices: Vec::new(),
            edges: Vec::new(),
            facets: Vec::new(),
            bodies: [
                Body { region: 1, target: targets[0], volume_constant: 0 },
                Body { region: 2, target: targets[1], volume_constant: 0 },
            ],
        }
    }

    pub fn vertex(&self, id: usize) -> &Vertex {
        self.vertices[id].as_ref().expect("dead vertex id")
    }

    pub fn edge(&self, id: usize) -> &Edge {
        self.edges[id].as_ref().expect("dead edge id")
    }

    pub fn facet(&self, id: usize) -> &Facet {
        self.facets[id].as_ref().expect("dead facet id")
    }

    pub fn live_vertices(&self) -> impl Iterator<Item = (usize, &Vertex)> {
        self.vertices.iter().enumerate().filter_map(|(i, v)| v.as_ref().map(|v| (i, v)))
    }

    pub fn live_edges(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter_map(|(i, e)| e.as_ref().map(|e| (i, e)))
    }

    pub fn live_facets(&self) -> impl Iterator<Item = (usize, &Facet)> {
        self.facets.iter().enumerate().filter_map(|(i, f)| f.as_ref().map(|f| (i, f)))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.iter().flatten().count()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().flatten().count()
    }

    pub fn facet_count(&self) -> usize {
        self.facets.iter().flatten().count()
    }

    pub fn body(&self, region: Region) -> &Body {
        &self.bodies[(region as usize).saturating_sub(1).min(1)]
    }

    pub fn body_mut(&mut self, region: Region) -> &mut Body {
        &mut self.bodies[(region as usize).saturating_sub(1).min(1)]
    }

    pub fn targets(&self) -> [f64; 2] {
        [self.bodies[0].target, self.bodies[1].target]
    }

    /// Target volume of any region, the complement taking what is left.
    pub fn region_target(&self, r: Region) -> f64 {
        match r {
            0 => self.lattice.det() - self.bodies[0].target - self.bodies[1].target,
            _ => self.body(r).target,
        }
    }

    pub fn add_vertex(&mut self, u: Vec3) -> usize {
        let (u, _) = canonicalize(&u);
        self.vertices.push(Some(Vertex { u, on_triple_curve: false }));
        self.vertices.len() - 1
    }

    pub fn add_edge(&mut self, tail: usize, head: usize, wrap: WrapVec) -> usize {
        self.edges.push(Some(Edge { tail, head, wrap }));
        self.edges.len() - 1
    }

    pub fn add_facet(&mut self, facet: Facet) -> usize {
        self.facets.push(Some(facet));
        self.facets.len() - 1
    }

    pub fn remove_facet(&mut self, id: usize) {
        self.facets[id] = None;
    }

    pub fn remove_edge(&mut self, id: usize) {
        self.edges[id] = None;
    }

    /// Start vertex of a directed edge use.
    pub fn ref_start(&self, r: EdgeRef) -> usize {
        let e = self.edge(r.edge);
        if r.reversed {
            e.head
        } else {
            e.tail
        }
    }

    pub fn ref_end(&self, r: EdgeRef) -> usize {
        let e = self.edge(r.edge);
        if r.reversed {
            e.tail
        } else {
            e.head
        }
    }

    /// Edge vector in lattice coordinates, following the traversal sign.
    pub fn ref_vector_u(&self, r: EdgeRef) -> Vec3 {
        let e = self.edge(r.edge);
        let d = self.vertex(e.head).u - self.vertex(e.tail).u + e.wrap.to_vec3();
        if r.reversed {
            -d
        } else {
            d
        }
    }

    pub fn ref_wrap(&self, r: EdgeRef) -> WrapVec {
        let w = self.edge(r.edge).wrap;
        if r.reversed {
            -w
        } else {
            w
        }
    }

    pub fn edge_vector(&self, id: usize) -> Vec3 {
        let e = self.edge(id);
        self.lattice.displacement(&self.vertex(e.tail).u, &self.vertex(e.head).u, e.wrap)
    }

    pub fn facet_vertices(&self, id: usize) -> [usize; 3] {
        let f = self.facet(id);
        [self.ref_start(f.edges[0]), self.ref_start(f.edges[1]), self.ref_start(f.edges[2])]
    }

    /// Lattice-coordinate positions of the facet corners, unwrapped relative
    /// to the canonical position of its first vertex.
    pub fn facet_lift(&self, id: usize) -> [Vec3; 3] {
        let f = self.facet(id);
        let p0 = self.vertex(self.ref_start(f.edges[0])).u;
        let p1 = p0 + self.ref_vector_u(f.edges[0]);
        let p2 = p1 + self.ref_vector_u(f.edges[1]);
        [p0, p1, p2]
    }

    pub fn facet_ambient(&self, id: usize) -> [Vec3; 3] {
        let [a, b, c] = self.facet_lift(id);
        let m = self.lattice.basis();
        [m * a, m * b, m * c]
    }

    /// Vector area (half the cross product) in ambient coordinates.
    pub fn facet_vector_area(&self, id: usize) -> Vec3 {
        let [a, b, c] = self.facet_ambient(id);
        0.5 * (b - a).cross(&(c - a))
    }

    pub fn adjacency(&self) -> Adjacency {
        let mut adj = Adjacency {
            edge_facets: vec![Vec::new(); self.edges.len()],
            vertex_edges: vec![Vec::new(); self.vertices.len()],
            vertex_facets: vec![Vec::new(); self.vertices.len()],
        };
        for (fi, f) in self.live_facets() {
            for r in f.edges {
                adj.edge_facets[r.edge].push(fi);
            }
            for v in self.facet_vertices(fi) {
                if !adj.vertex_facets[v].contains(&fi) {
                    adj.vertex_facets[v].push(fi);
                }
            }
        }
        for (ei, e) in self.live_edges() {
            adj.vertex_edges[e.tail].push(ei);
            if e.head != e.tail {
                adj.vertex_edges[e.head].push(ei);
            }
        }
        adj
    }

    /// Recompute the cached triple-curve flag of every vertex.
    pub fn classify_vertices(&mut self) {
        let adj = self.adjacency();
        let mut flags = vec![false; self.vertices.len()];
        for (ei, e) in self.live_edges() {
            if adj.edge_facets[ei].len() == 3 {
                flags[e.tail] = true;
                flags[e.head] = true;
            }
        }
        for (i, v) in self.vertices.iter_mut().enumerate() {
            if let Some(v) = v {
                v.on_triple_curve = flags[i];
            }
        }
    }

    /// Move every vertex by an ambient displacement (indexed by vertex id),
    /// re-canonicalize and repair the wraps of incident edges.
    pub fn displace(&mut self, delta: &[Vec3]) {
        let inv = *self.lattice.inverse();
        let mut shifts = vec![WrapVec::ZERO; self.vertices.len()];
        for (i, v) in self.vertices.iter_mut().enumerate() {
            if let Some(v) = v {
                let d = delta.get(i).copied().unwrap_or_else(Vec3::zeros);
                if d == Vec3::zeros() {
                    continue;
                }
                let (u, s) = canonicalize(&(v.u + inv * d));
                v.u = u;
                shifts[i] = s;
            }
        }
        for e in self.edges.iter_mut().flatten() {
            e.wrap = e.wrap + shifts[e.head] - shifts[e.tail];
        }
    }

    /// Move a single vertex to a new (possibly uncanonical) lattice position.
    pub fn set_vertex_u(&mut self, id: usize, u: Vec3, adj: &Adjacency) {
        let (c, s) = canonicalize(&u);
        self.vertices[id].as_mut().expect("dead vertex").u = c;
        if s.is_zero() {
            return;
        }
        for &ei in &adj.vertex_edges[id] {
            let e = self.edges[ei].as_mut().expect("dead edge");
            if e.head == id {
                e.wrap += s;
            }
            if e.tail == id {
                e.wrap = e.wrap - s;
            }
        }
    }

    /// Map of (tail, head, wrap) to edge id, normalized so that each
    /// geometric edge has exactly one key.
    pub fn edge_index(&self) -> HashMap<EdgeKey, usize> {
        self.live_edges().map(|(i, e)| (EdgeKey::new(e.tail, e.head, e.wrap).0, i)).collect()
    }

    /// Find the edge joining `a` to `b` with the given wrap, or create it.
    pub fn find_or_add_edge(
        &mut self,
        index: &mut HashMap<EdgeKey, usize>,
        a: usize,
        b: usize,
        wrap: WrapVec,
    ) -> EdgeRef {
        let (key, flipped) = EdgeKey::new(a, b, wrap);
        if let Some(&id) = index.get(&key) {
            let e = self.edge(id);
            let reversed = !(e.tail == a && e.head == b && e.wrap == wrap);
            return EdgeRef { edge: id, reversed };
        }
        let id = if flipped { self.add_edge(b, a, -wrap) } else { self.add_edge(a, b, wrap) };
        index.insert(key, id);
        EdgeRef { edge: id, reversed: flipped }
    }

    /// Add a facet through three vertices whose unwrapped lattice positions
    /// are `lifts`; edge wraps are derived from the lifts.
    pub fn add_facet_lifted(
        &mut self,
        index: &mut HashMap<EdgeKey, usize>,
        verts: [usize; 3],
        lifts: [Vec3; 3],
        front: Region,
        back: Region,
    ) -> usize {
        let mut refs = [EdgeRef { edge: 0, reversed: false }; 3];
        for i in 0..3 {
            let (a, b) = (verts[i], verts[(i + 1) % 3]);
            let w = wrap_between(&self.vertex(a).u, &lifts[i], &self.vertex(b).u, &lifts[(i + 1) % 3]);
            refs[i] = self.find_or_add_edge(index, a, b, w);
        }
        self.add_facet(Facet { edges: refs, front, back })
    }

    /// Copy with tombstones removed and ids renumbered densely.
    pub fn compacted(&self) -> Mesh {
        let mut vmap = vec![usize::MAX; self.vertices.len()];
        let mut emap = vec![usize::MAX; self.edges.len()];
        let mut out = Mesh {
            lattice: self.lattice.clone(),
            vertices: Vec::new(),
            edges: Vec::new(),
            facets: Vec::new(),
            bodies: self.bodies,
        };
        for (i, v) in self.live_vertices() {
            vmap[i] = out.vertices.len();
            out.vertices.push(Some(v.clone()));
        }
        for (i, e) in self.live_edges() {
            emap[i] = out.edges.len();
            out.edges.push(Some(Edge { tail: vmap[e.tail], head: vmap[e.head], wrap: e.wrap }));
        }
        for (_, f) in self.live_facets() {
            let mut f = *f;
            for r in f.edges.iter_mut() {
                r.edge = emap[r.edge];
            }
            out.facets.push(Some(f));
        }
        out
    }

    /// Relabel regions by `perm[old] = new`. Body targets follow their
    /// regions; the region that becomes the complement gives up its body.
    pub fn permute_regions(&self, perm: [Region; 3]) -> Mesh {
        let mut out = self.clone();
        for f in out.facets.iter_mut().flatten() {
            f.front = perm[f.front as usize];
            f.back = perm[f.back as usize];
        }
        let mut targets = [0.0; 3];
        for old in REGIONS {
            targets[perm[old as usize] as usize] = self.region_target(old);
        }
        out.bodies = [
            Body { region: 1, target: targets[1], volume_constant: 0 },
            Body { region: 2, target: targets[2], volume_constant: 0 },
        ];
        crate::metrics::reanchor(&mut out);
        out
    }
}

/// Integer wrap that joins `a` (canonical `ua`, lifted `la`) to `b`.
pub fn wrap_between(ua: &Vec3, la: &Vec3, ub: &Vec3, lb: &Vec3) -> WrapVec {
    WrapVec::round(&((lb - la) - (ub - ua)))
}

/// Orientation-free identity of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeKey(usize, usize, WrapVec);

impl EdgeKey {
    /// Returns the key and whether (a, b, w) had to be flipped to build it.
    pub fn new(a: usize, b: usize, w: WrapVec) -> (EdgeKey, bool) {
        if a < b || (a == b && w >= -w) {
            (EdgeKey(a, b, w), false)
        } else {
            (EdgeKey(b, a, -w), true)
        }
    }
}
