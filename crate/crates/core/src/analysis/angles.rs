use std::f64::consts::TAU;

use serde::Serialize;

use crate::lattice::Vec3;
use crate::mesh::{Adjacency, Mesh};

/// Angle between triple curves at a tetrahedral point, in degrees.
pub fn tetrahedral_angle() -> f64 {
    (-1.0f64 / 3.0).acos().to_degrees()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleSummary {
    pub count: usize,
    /// Fraction of samples within 2 degrees of the ideal angle.
    pub within_2deg: Option<f64>,
    /// Minimum, 5%, median, 95% and maximum.
    pub quantiles: Option<[f64; 5]>,
}

impl AngleSummary {
    fn of(samples: &[f64], ideal: f64) -> Self {
        if samples.is_empty() {
            return AngleSummary { count: 0, within_2deg: None, quantiles: None };
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let q = |p: f64| s[((s.len() - 1) as f64 * p).round() as usize];
        let close = s.iter().filter(|a| (*a - ideal).abs() <= 2.0).count();
        AngleSummary {
            count: s.len(),
            within_2deg: Some(close as f64 / s.len() as f64),
            quantiles: Some([q(0.0), q(0.05), q(0.5), q(0.95), q(1.0)]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleReport {
    /// Three angles per triple edge between consecutive walls, in degrees.
    pub triple_dihedrals: Vec<f64>,
    /// Pairwise tangent angles of the curves meeting at tetrahedral points.
    pub tetra_angles: Vec<f64>,
    /// Against 120 degrees.
    pub triple: AngleSummary,
    /// Against the tetrahedral angle.
    pub tetra: AngleSummary,
}

/// Ambient corners of facet `f` as (edge tail, edge head, opposite corner)
/// for the edge `e`.
fn corners_about(mesh: &Mesh, f: usize, e: usize) -> (Vec3, Vec3, Vec3) {
    let facet = mesh.facet(f);
    let p = mesh.facet_ambient(f);
    let i = facet.edges.iter().position(|r| r.edge == e).expect("edge lies on facet");
    let (a, b, c) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
    if facet.edges[i].reversed {
        (b, a, c)
    } else {
        (a, b, c)
    }
}

fn dihedrals(mesh: &Mesh, e: usize, facets: &[usize]) -> [f64; 3] {
    let mut dirs = Vec::with_capacity(3);
    let mut axis = Vec3::zeros();
    for &f in facets {
        let (t, h, c) = corners_about(mesh, f, e);
        axis = (h - t).normalize();
        let d = c - t;
        dirs.push((d - axis * axis.dot(&d)).normalize());
    }
    let b1 = dirs[0];
    let b2 = axis.cross(&b1);
    let mut phi: Vec<f64> = dirs.iter().map(|d| d.dot(&b2).atan2(d.dot(&b1)).rem_euclid(TAU)).collect();
    phi.sort_by(f64::total_cmp);
    [phi[1] - phi[0], phi[2] - phi[1], TAU - phi[2] + phi[0]].map(f64::to_degrees)
}

/// Displacement along edge `e` leaving vertex `v`.
fn leaving(mesh: &Mesh, e: usize, v: usize) -> (Vec3, usize) {
    let edge = mesh.edge(e);
    let d = mesh.edge_vector(e);
    if edge.tail == v {
        (d, edge.head)
    } else {
        (-d, edge.tail)
    }
}

fn tangents(mesh: &Mesh, adj: &Adjacency, triple: &[bool], v: usize) -> Vec<Vec3> {
    let curve_edges = |w: usize| adj.vertex_edges[w].iter().copied().filter(|&e| triple[e]).collect::<Vec<_>>();
    curve_edges(v)
        .into_iter()
        .map(|e| {
            let (d1, w) = leaving(mesh, e, v);
            let next = curve_edges(w);
            // one-sided second-order estimate when the curve continues
            if next.len() == 2 {
                let e2 = if next[0] == e { next[1] } else { next[0] };
                let (step, _) = leaving(mesh, e2, w);
                (d1 * 4.0 - (d1 + step)).normalize()
            } else {
                d1.normalize()
            }
        })
        .collect()
}

pub fn plateau_angles(mesh: &Mesh) -> AngleReport {
    let adj = mesh.adjacency();
    let triple: Vec<bool> = adj.edge_facets.iter().map(|f| f.len() == 3).collect();
    let mut dihedral = Vec::new();
    for (e, _) in mesh.live_edges() {
        if triple[e] {
            dihedral.extend(dihedrals(mesh, e, &adj.edge_facets[e]));
        }
    }
    let mut tetra = Vec::new();
    for (v, _) in mesh.live_vertices() {
        if adj.vertex_edges[v].iter().filter(|&&e| triple[e]).count() < 4 {
            continue;
        }
        let t = tangents(mesh, &adj, &triple, v);
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                tetra.push(t[i].dot(&t[j]).clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
    }
    AngleReport {
        triple: AngleSummary::of(&dihedral, 120.0),
        tetra: AngleSummary::of(&tetra, tetrahedral_angle()),
        triple_dihedrals: dihedral,
        tetra_angles: tetra,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{build, CandidateKind, CandidateSpec};
    use crate::lattice::Lattice;

    #[test]
    fn flat_walls_have_no_triple_curves() {
        let l = Lattice::cubic(1.0).unwrap();
        let m = build(&CandidateSpec::new(CandidateKind::DoubleSlab, l, 0.3, 0.2)).unwrap();
        let r = plateau_angles(&m);
        assert!(r.triple_dihedrals.is_empty() && r.tetra_angles.is_empty());
        assert_eq!(r.triple.count, 0);
    }

    #[test]
    fn built_double_bubble_reports_and_sums_to_full_turn() {
        let l = Lattice::cubic(1.0).unwrap();
        let m = build(&CandidateSpec::new(CandidateKind::StandardDoubleBubble, l, 0.05, 0.03)).unwrap();
        let r = plateau_angles(&m);
        assert!(r.triple.count > 0 && r.triple.count.is_multiple_of(3));
        for c in r.triple_dihedrals.chunks(3) {
            assert!((c.iter().sum::<f64>() - 360.0).abs() < 1e-9);
            assert!(c.iter().all(|a| *a > 0.0 && *a < 360.0));
        }
    }

    #[test]
    fn tetrahedral_angle_value() {
        assert!((tetrahedral_angle() - 109.4712206).abs() < 1e-6);
    }
}
