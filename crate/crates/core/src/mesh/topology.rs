use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::Serialize;

use super::{validate, Mesh, Region};
use crate::error::{Error, Result};
use crate::lattice::WrapVec;

/// One connected sheet of the interface between two regions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentSignature {
    pub facets: usize,
    pub vertices: usize,
    pub edges: usize,
    pub euler: i64,
    /// Hermite basis of the sublattice generated by the wraps of the
    /// component's cycles; empty when the sheet lifts to R^3.
    pub wrap_class: Vec<[i32; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairSignature {
    pub pair: (Region, Region),
    pub facets: usize,
    pub components: Vec<ComponentSignature>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopologySignature {
    pub pairs: Vec<PairSignature>,
}

impl TopologySignature {
    pub fn pair(&self, a: Region, b: Region) -> &PairSignature {
        let key = (a.min(b), a.max(b));
        self.pairs.iter().find(|p| p.pair == key).expect("pair always present")
    }

    /// Compact summary: per pair, the sorted (euler, wrap rank) list.
    pub fn shape(&self) -> Vec<((Region, Region), Vec<(i64, usize)>)> {
        self.pairs
            .iter()
            .map(|p| {
                let mut v: Vec<(i64, usize)> = p.components.iter().map(|c| (c.euler, c.wrap_class.len())).collect();
                v.sort();
                (p.pair, v)
            })
            .collect()
    }
}

/// Interface data per region pair: facet counts, the Euler characteristic
/// of each connected component and its wrap homology class.
pub fn topology_signature(mesh: &Mesh) -> Result<TopologySignature> {
    let rep = validate(mesh);
    if !rep.is_valid() {
        return Err(Error::InvalidMesh(rep.summary(3)));
    }
    let adj = mesh.adjacency();
    let mut pairs = Vec::new();
    for pair in [(0u8, 1u8), (0, 2), (1, 2)] {
        let members: Vec<usize> = mesh.live_facets().filter(|(_, f)| f.pair() == pair).map(|(i, _)| i).collect();
        let member_set: HashSet<usize> = members.iter().copied().collect();
        let mut seen: HashSet<usize> = HashSet::new();
        let mut comps = Vec::new();
        for &start in &members {
            if seen.contains(&start) {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen.insert(start);
            while let Some(f) = queue.pop_front() {
                comp.push(f);
                for r in mesh.facet(f).edges {
                    for &g in &adj.edge_facets[r.edge] {
                        if member_set.contains(&g) && seen.insert(g) {
                            queue.push_back(g);
                        }
                    }
                }
            }
            comps.push(component_signature(mesh, &comp));
        }
        comps.sort_by(|a, b| (a.euler, a.facets, &a.wrap_class).cmp(&(b.euler, b.facets, &b.wrap_class)));
        pairs.push(PairSignature { pair, facets: members.len(), components: comps });
    }
    Ok(TopologySignature { pairs })
}

fn component_signature(mesh: &Mesh, facets: &[usize]) -> ComponentSignature {
    let mut verts = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for &f in facets {
        for r in mesh.facet(f).edges {
            edges.insert(r.edge);
            let e = mesh.edge(r.edge);
            verts.insert(e.tail);
            verts.insert(e.head);
        }
    }
    let euler = verts.len() as i64 - edges.len() as i64 + facets.len() as i64;

    // Spanning-tree lifts over the component's edge graph; every non-tree
    // edge closes a cycle whose integer wrap is recorded.
    let mut nbrs: std::collections::HashMap<usize, Vec<(usize, usize, WrapVec)>> = Default::default();
    for &ei in &edges {
        let e = mesh.edge(ei);
        nbrs.entry(e.tail).or_default().push((ei, e.head, e.wrap));
        nbrs.entry(e.head).or_default().push((ei, e.tail, -e.wrap));
    }
    let mut lift: std::collections::HashMap<usize, WrapVec> = Default::default();
    let mut tree_edges = HashSet::new();
    let mut cycles = Vec::new();
    for &root in &verts {
        if lift.contains_key(&root) {
            continue;
        }
        lift.insert(root, WrapVec::ZERO);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let lv = lift[&v];
            for &(ei, w, wrap) in nbrs.get(&v).map(|x| x.as_slice()).unwrap_or(&[]) {
                if let Some(&lw) = lift.get(&w) {
                    if !tree_edges.contains(&ei) {
                        let c = lv + wrap - lw;
                        if !c.is_zero() {
                            cycles.push(c.0);
                        }
                    }
                } else {
                    lift.insert(w, lv + wrap);
                    tree_edges.insert(ei);
                    queue.push_back(w);
                }
            }
        }
    }
    ComponentSignature {
        facets: facets.len(),
        vertices: verts.len(),
        edges: edges.len(),
        euler,
        wrap_class: hermite_basis(cycles),
    }
}

/// Row-style Hermite normal form of the integer span of `rows`.
pub fn hermite_basis(mut rows: Vec<[i32; 3]>) -> Vec<[i32; 3]> {
    let mut basis: Vec<[i64; 3]> = rows.drain(..).map(|r| [r[0] as i64, r[1] as i64, r[2] as i64]).collect();
    let mut out = Vec::new();
    for col in 0..3 {
        loop {
            basis.retain(|r| r.iter().any(|&x| x != 0));
            let nz: Vec<usize> = (0..basis.len()).filter(|&i| basis[i][col] != 0).collect();
            if nz.len() <= 1 {
                if let Some(&p) = nz.first() {
                    let mut row = basis.remove(p);
                    if row[col] < 0 {
                        row = [-row[0], -row[1], -row[2]];
                    }
                    out.push(row);
                }
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| basis[i][col].abs()).unwrap();
            let pivot = basis[p];
            for &i in &nz {
                if i != p {
                    let q = basis[i][col].div_euclid(pivot[col]);
                    for k in 0..3 {
                        basis[i][k] -= q * pivot[k];
                    }
                }
            }
        }
    }
    // reduce entries above pivots
    for i in 0..out.len() {
        let col = (0..3).find(|&c| out[i][c] != 0).unwrap();
        for j in 0..i {
            let q = out[j][col].div_euclid(out[i][col]);
            if q != 0 {
                let row = out[i];
                for k in 0..3 {
                    out[j][k] -= q * row[k];
                }
            }
        }
    }
    out.into_iter().map(|r| [r[0] as i32, r[1] as i32, r[2] as i32]).collect()
}
