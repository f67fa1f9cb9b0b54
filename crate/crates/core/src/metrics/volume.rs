//! Exact region volumes in the torus.
//!
//! The divergence theorem with a field that is periodic only up to a jump
//! gives, in lattice coordinates,
//!
//! ```text
//! V = ∫_S frac(u3 - c3) n3 dA + |R ∩ {u3 = c3}|
//! ```
//!
//! and the planar section area obeys the same identity one dimension down,
//! ending with a point count that is an integer. Every term except that
//! integer is a local sum over facets, so the facet sum gives the volume
//! modulo the cell volume. The body's target picks the multiple.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Vec3;
use crate::mesh::{Mesh, Region, REGIONS};

/// Generic offsets of the cutting planes, away from the coordinates that
/// constructions like to use.
const CUT: [f64; 3] = [0.137_416_926_5, 0.283_591_507_1, 0.419_867_335_3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeReading {
    /// Facet sum, determined modulo the cell volume.
    pub raw: f64,
    /// Multiple of the cell volume added to `raw`.
    pub constant: i64,
    pub value: f64,
}

/// Signed contribution of one facet, in lattice units, with the normal
/// taken as pointing out of the region being measured.
fn facet_term(q: [Vec3; 3]) -> f64 {
    let n = (q[1] - q[0]).cross(&(q[2] - q[0]));
    let lo = q.iter().map(|p| p[2]).fold(f64::INFINITY, f64::min) - CUT[2];
    let hi = q.iter().map(|p| p[2]).fold(f64::NEG_INFINITY, f64::max) - CUT[2];
    let (m0, m1) = (lo.floor() as i64, hi.floor() as i64);
    let mut total = 0.0;

    // Flux of frac(u3 - c3) e3 through the pieces between integer levels.
    let poly: Vec<Vec3> = q.to_vec();
    if n[2] != 0.0 {
        for m in m0..=m1 {
            let level = CUT[2] + m as f64;
            let piece = clip(&clip(&poly, 2, level, true), 2, level + 1.0, false);
            for k in 1..piece.len().saturating_sub(1) {
                let (a, b, c) = (piece[0], piece[k], piece[k + 1]);
                let n3 = 0.5 * ((b - a).cross(&(c - a)))[2];
                let mean = (a[2] + b[2] + c[2]) / 3.0;
                total += (mean - level) * n3;
            }
        }
    }

    // Boundary of the planar section, oriented with the region on its left
    // seen from +u3: along e3 x n.
    if n[0] != 0.0 || n[1] != 0.0 {
        let t = [-n[1], n[0]];
        for m in (m0 + 1)..=m1 {
            let level = CUT[2] + m as f64;
            if let Some((a, b)) = section(&q, 2, level) {
                let (a, b) = if (b[0] - a[0]) * t[0] + (b[1] - a[1]) * t[1] >= 0.0 { (a, b) } else { (b, a) };
                total += segment_term([a[0], a[1]], [b[0], b[1]]);
            }
        }
    }
    total
}

/// Planar section area term for one oriented boundary segment in the
/// (u1, u2) torus: ∫ frac(u2 - c2) ν2 ds plus the end-point terms of the
/// line section u2 = c2.
fn segment_term(a: [f64; 2], b: [f64; 2]) -> f64 {
    let lo = a[1].min(b[1]) - CUT[1];
    let hi = a[1].max(b[1]) - CUT[1];
    let du1 = b[0] - a[0];
    let mut total = 0.0;
    for m in (lo.floor() as i64)..=(hi.floor() as i64) {
        let level = CUT[1] + m as f64;
        // sub-segment with level <= u2 < level + 1
        let Some((t0, t1)) = clip_param(a, b, level, level + 1.0) else { continue };
        let p = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        let (p0, p1) = (p(t0), p(t1));
        let mid2 = 0.5 * (p0[1] + p1[1]);
        total += (mid2 - level) * -(du1 * (t1 - t0));
    }
    // crossings of u2 = c2 + m, each an end point of the line section
    let dir = b[1] - a[1];
    if dir != 0.0 {
        for m in (lo.floor() as i64 + 1)..=(hi.floor() as i64) {
            let level = CUT[1] + m as f64;
            let above_a = a[1] >= level;
            let above_b = b[1] >= level;
            if above_a != above_b {
                let t = (level - a[1]) / (b[1] - a[1]);
                let u1 = a[0] + t * (b[0] - a[0]);
                let f = (u1 - CUT[0]) - (u1 - CUT[0]).floor();
                total += f * dir.signum();
            }
        }
    }
    total
}

/// Parameter interval of the segment a→b lying in `lo <= u2 < hi`.
fn clip_param(a: [f64; 2], b: [f64; 2], lo: f64, hi: f64) -> Option<(f64, f64)> {
    let d = b[1] - a[1];
    if d == 0.0 {
        return if a[1] >= lo && a[1] < hi { Some((0.0, 1.0)) } else { None };
    }
    let (mut t0, mut t1) = ((lo - a[1]) / d, (hi - a[1]) / d);
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    let (t0, t1) = (t0.max(0.0), t1.min(1.0));
    if t1 > t0 {
        Some((t0, t1))
    } else {
        None
    }
}

/// Keep the part of a convex polygon with `p[axis] >= level` (`above`) or
/// `p[axis] < level`.
fn clip(poly: &[Vec3], axis: usize, level: f64, above: bool) -> Vec<Vec3> {
    let inside = |p: &Vec3| (p[axis] >= level) == above;
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        if inside(&a) {
            out.push(a);
        }
        if inside(&a) != inside(&b) {
            out.push(crossing(&a, &b, axis, level));
        }
    }
    out
}

fn crossing(a: &Vec3, b: &Vec3, axis: usize, level: f64) -> Vec3 {
    let t = (level - a[axis]) / (b[axis] - a[axis]);
    a + (b - a) * t
}

/// Segment where a triangle crosses the plane `p[axis] = level`.
fn section(q: &[Vec3; 3], axis: usize, level: f64) -> Option<(Vec3, Vec3)> {
    let mut pts = Vec::with_capacity(2);
    for i in 0..3 {
        let (a, b) = (q[i], q[(i + 1) % 3]);
        if (a[axis] >= level) != (b[axis] >= level) {
            pts.push(crossing(&a, &b, axis, level));
        }
    }
    (pts.len() == 2).then(|| (pts[0], pts[1]))
}

/// Facet sums for all three regions, in ambient volume units.
fn raw_volumes(mesh: &Mesh) -> [f64; 3] {
    let det = mesh.lattice.det();
    let mut raw = [0.0; 3];
    for (fi, f) in mesh.live_facets() {
        let term = facet_term(mesh.facet_lift(fi)) * det;
        for r in REGIONS {
            raw[r as usize] += f.outward_sign(r) * term;
        }
    }
    raw
}

fn anchored(mesh: &Mesh, region: Region, raw: f64) -> Result<VolumeReading> {
    let det = mesh.lattice.det();
    let constant = ((mesh.region_target(region) - raw) / det).round() as i64;
    let value = raw + constant as f64 * det;
    if !(value > 0.0 && value < det) {
        return Err(Error::Anchoring { region, value, det });
    }
    Ok(VolumeReading { raw, constant, value })
}

/// Volume of any region, anchored to the multiple of the cell volume that
/// lands closest to the region's target.
pub fn region_volume(mesh: &Mesh, region: Region) -> Result<VolumeReading> {
    anchored(mesh, region, raw_volumes(mesh)[region as usize])
}

pub fn body_volume(mesh: &Mesh, region: Region) -> Result<VolumeReading> {
    if region != 1 && region != 2 {
        return Err(Error::Precondition(format!("bodies are regions 1 and 2, got {region}")));
    }
    region_volume(mesh, region)
}

/// Volumes of the complement and both bodies.
pub fn region_volumes(mesh: &Mesh) -> Result<[f64; 3]> {
    let raw = raw_volumes(mesh);
    let mut out = [0.0; 3];
    for r in REGIONS {
        out[r as usize] = anchored(mesh, r, raw[r as usize])?.value;
    }
    Ok(out)
}

/// Store the current anchoring constants in the bodies.
pub fn reanchor(mesh: &mut Mesh) {
    let raw = raw_volumes(mesh);
    let det = mesh.lattice.det();
    for b in mesh.bodies.iter_mut() {
        b.volume_constant = ((b.target - raw[b.region as usize]) / det).round() as i64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::mesh::MeshBuilder;

    /// Horizontal walls at heights `z` (ambient), region labels between them
    /// listed bottom to top, wrapping around.
    fn layered(l: Lattice, z: &[f64], labels: &[u8], n: usize) -> Mesh {
        let det = l.det();
        let a = l.period(0);
        let b = l.period(1);
        let h = l.period(2)[2];
        let mut targets = [0.0; 3];
        for i in 0..z.len() {
            let top = if i + 1 < z.len() { z[i + 1] } else { z[0] + h };
            targets[labels[i] as usize] += (top - z[i]) * det / h;
        }
        let mut mb = MeshBuilder::new(l, [targets[1], targets[2]]);
        for (i, &zi) in z.iter().enumerate() {
            let below = labels[(i + z.len() - 1) % z.len()];
            let above = labels[i];
            for s in 0..n {
                for t in 0..n {
                    let p = |s: usize, t: usize| a * (s as f64 / n as f64) + b * (t as f64 / n as f64) + Vec3::new(0.0, 0.0, zi);
                    mb.quad(&p(s, t), &p(s + 1, t), &p(s + 1, t + 1), &p(s, t + 1), above, below);
                }
            }
        }
        mb.finish().unwrap()
    }

    #[test]
    fn slab_volume_is_thickness() {
        let l = Lattice::cubic(1.0).unwrap();
        let m = layered(l, &[0.2, 0.45, 0.8], &[1, 2, 0], 3);
        let v = region_volumes(&m).unwrap();
        assert!((v[1] - 0.25).abs() < 1e-12, "{v:?}");
        assert!((v[2] - 0.35).abs() < 1e-12, "{v:?}");
        assert!((v[0] - 0.40).abs() < 1e-12, "{v:?}");
    }

    #[test]
    fn slab_volume_on_skew_lattice() {
        let l = Lattice::rhombic_prism(1.3, 0.9).unwrap();
        let det = l.det();
        let m = layered(l, &[0.05, 0.5, 0.7], &[1, 2, 0], 4);
        let a = body_volume(&m, 1).unwrap().value;
        assert!((a - det * 0.45 / 0.9).abs() < 1e-12);
    }

    #[test]
    fn partition_identity() {
        let l = Lattice::rectangular(1.0, 1.5, 0.7).unwrap();
        let m = layered(l, &[0.1, 0.3, 0.6], &[2, 1, 0], 2);
        let v = region_volumes(&m).unwrap();
        assert!((v.iter().sum::<f64>() - m.lattice.det()).abs() < 1e-12 * m.lattice.det());
    }

    #[test]
    fn segment_term_unit_square() {
        // Counter-clockwise square [0.3,0.6]^2 has area 0.09 modulo 1.
        let c = [[0.3, 0.3], [0.6, 0.3], [0.6, 0.6], [0.3, 0.6]];
        let mut s = 0.0;
        for i in 0..4 {
            s += segment_term(c[i], c[(i + 1) % 4]);
        }
        let r = s - s.floor();
        assert!((r - 0.09).abs() < 1e-12, "{s}");
    }

    #[test]
    fn segment_term_wrapping_band() {
        // A band 0.2 <= u2 <= 0.5 spanning the u1 circle: lower boundary
        // runs +u1, upper boundary runs -u1.
        let mut s = 0.0;
        for k in 0..4 {
            let x0 = k as f64 * 0.25;
            s += segment_term([x0, 0.2], [x0 + 0.25, 0.2]);
            s += segment_term([x0 + 0.25, 0.5], [x0, 0.5]);
        }
        let r = s - s.floor();
        assert!((r - 0.3).abs() < 1e-12, "{s}");
    }
}
