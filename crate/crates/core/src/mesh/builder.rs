use std::collections::HashMap;

use super::{EdgeKey, Mesh, Region};
use crate::error::{Error, Result};
use crate::lattice::{canonicalize, Lattice, Vec3};

const BUCKETS: f64 = 1.0e6;

/// Assembles a mesh from triangles given in unwrapped ambient coordinates.
///
/// Corners that coincide modulo the lattice (within `1e-9` in lattice
/// coordinates) are merged into one vertex, and edge wraps follow from the
/// unwrapped positions, so surfaces that are generated independently glue
/// together wherever their sample points agree.
pub struct MeshBuilder {
    mesh: Mesh,
    index: HashMap<EdgeKey, usize>,
    buckets: HashMap<[i64; 3], Vec<usize>>,
    tol: f64,
}

impl MeshBuilder {
    pub fn new(lattice: Lattice, targets: [f64; 2]) -> Self {
        MeshBuilder { mesh: Mesh::new(lattice, targets), index: HashMap::new(), buckets: HashMap::new(), tol: 1e-9 }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.mesh.lattice
    }

    /// Vertex id for an ambient point, plus its unwrapped lattice position.
    pub fn vertex(&mut self, x: &Vec3) -> (usize, Vec3) {
        let lift = self.mesh.lattice.to_lattice(x);
        let (u, _) = canonicalize(&lift);
        let key = bucket(&u);
        let n = BUCKETS as i64;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let k = [(key[0] + dx).rem_euclid(n), (key[1] + dy).rem_euclid(n), (key[2] + dz).rem_euclid(n)];
                    if let Some(ids) = self.buckets.get(&k) {
                        for &id in ids {
                            let d = self.mesh.vertex(id).u - u;
                            let close = (0..3).all(|i| {
                                let di = d[i] - d[i].round();
                                di.abs() <= self.tol
                            });
                            if close {
                                return (id, lift);
                            }
                        }
                    }
                }
            }
        }
        let id = self.mesh.add_vertex(u);
        self.buckets.entry(key).or_default().push(id);
        (id, lift)
    }

    /// Add a triangle whose normal `(b-a) x (c-a)` points into `front`.
    /// Degenerate triangles (two corners at the same point) are skipped.
    pub fn triangle(&mut self, a: &Vec3, b: &Vec3, c: &Vec3, front: Region, back: Region) {
        let (ia, la) = self.vertex(a);
        let (ib, lb) = self.vertex(b);
        let (ic, lc) = self.vertex(c);
        let same = |i: usize, j: usize, li: &Vec3, lj: &Vec3| i == j && (li - lj).norm() < 1e-7;
        if same(ia, ib, &la, &lb) || same(ib, ic, &lb, &lc) || same(ia, ic, &la, &lc) {
            return;
        }
        self.mesh.add_facet_lifted(&mut self.index, [ia, ib, ic], [la, lb, lc], front, back);
    }

    /// Quad `a b c d` (in order around its boundary) as two triangles,
    /// split along the shorter diagonal.
    pub fn quad(&mut self, a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3, front: Region, back: Region) {
        if (c - a).norm() <= (d - b).norm() {
            self.triangle(a, b, c, front, back);
            self.triangle(a, c, d, front, back);
        } else {
            self.triangle(a, b, d, front, back);
            self.triangle(b, c, d, front, back);
        }
    }

    pub fn facet_count(&self) -> usize {
        self.mesh.facet_count()
    }

    /// Finalize without validation.
    pub fn into_raw(mut self) -> Mesh {
        self.mesh.classify_vertices();
        crate::metrics::reanchor(&mut self.mesh);
        self.mesh
    }

    /// Finalize: classify vertices, anchor body volumes at their targets and
    /// validate.
    pub fn finish(self) -> Result<Mesh> {
        let mesh = self.into_raw();
        let report = super::validate(&mesh);
        if !report.is_valid() {
            return Err(Error::InvalidMesh(report.summary(5)));
        }
        Ok(mesh)
    }
}

fn bucket(u: &Vec3) -> [i64; 3] {
    let n = BUCKETS as i64;
    [
        ((u[0] * BUCKETS).floor() as i64).rem_euclid(n),
        ((u[1] * BUCKETS).floor() as i64).rem_euclid(n),
        ((u[2] * BUCKETS).floor() as i64).rem_euclid(n),
    ]
}
