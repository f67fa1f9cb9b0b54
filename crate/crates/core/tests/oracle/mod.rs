//! Closed forms rederived from outer radii and cap heights, kept apart from
//! the library's angle-parametrized solvers so the two can check each other.

#![allow(dead_code)]

use std::f64::consts::PI;

struct Junction {
    /// Distance between the outer centres along the axis.
    d: f64,
    /// Axial position of the triple circle, measured from the larger centre.
    zj: f64,
    /// Radius of the triple circle.
    c: f64,
}

/// Outer spheres (or circles) of radii `r1 >= r2` meet at 120 degrees
/// exactly when their centres are `sqrt(r1^2 + r2^2 - r1 r2)` apart.
fn junction(r1: f64, r2: f64) -> Junction {
    let d = (r1 * r1 + r2 * r2 - r1 * r2).sqrt();
    let zj = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    Junction { d, zj, c: (r1 * r1 - zj * zj).sqrt() }
}

/// Interface radius and the height of the interface cap, which bulges into
/// the larger bubble. Zero height when the radii agree.
fn interface(r1: f64, r2: f64, c: f64) -> Option<(f64, f64)> {
    (r1 > r2).then(|| {
        let r0 = r1 * r2 / (r1 - r2);
        (r0, r0 - (r0 * r0 - c * c).sqrt())
    })
}

/// (volume, area) of a spherical cap of height `h` on a sphere of radius `r`.
fn cap3(r: f64, h: f64) -> (f64, f64) {
    (PI * h * h * (3.0 * r - h) / 3.0, 2.0 * PI * r * h)
}

/// (area, arc length) of a circular segment of height `h` in `[0, 2r]`.
fn cap2(r: f64, h: f64) -> (f64, f64) {
    let t = ((r - h) / r).clamp(-1.0, 1.0).acos();
    (r * r * t - (r - h) * (2.0 * r * h - h * h).max(0.0).sqrt(), 2.0 * r * t)
}

/// (measure 1, measure 2, boundary measure) of the cluster with outer
/// radii `1 >= s`, in dimension 2 or 3.
fn cluster(s: f64, dim: u32) -> (f64, f64, f64) {
    let cap = |r, h| if dim == 3 { cap3(r, h) } else { cap2(r, h) };
    let j = junction(1.0, s);
    let (m1, a1) = cap(1.0, 1.0 + j.zj);
    let (m2, a2) = cap(s, j.d + s - j.zj);
    let (mi, ai) = match interface(1.0, s, j.c) {
        Some((r0, h0)) => cap(r0, h0),
        None if dim == 3 => (0.0, PI * j.c * j.c),
        None => (0.0, 2.0 * j.c),
    };
    (m1 - mi, m2 + mi, a1 + a2 + ai)
}

fn scaled_cluster(big: f64, small: f64, dim: u32) -> f64 {
    assert!(big >= small && small > 0.0);
    let target = small / big;
    let (mut lo, mut hi) = (1e-9, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (m1, m2, _) = cluster(mid, dim);
        if m2 / m1 < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (m1, _, a) = cluster(if target == 1.0 { 1.0 } else { 0.5 * (lo + hi) }, dim);
    let k = (big / m1).powf(1.0 / dim as f64);
    a * k.powi(dim as i32 - 1)
}

/// Area of the standard double bubble in space.
pub fn sdb_area(v1: f64, v2: f64) -> f64 {
    scaled_cluster(v1.max(v2), v1.min(v2), 3)
}

/// Perimeter of the standard double bubble in the plane.
pub fn planar_double_bubble(a1: f64, a2: f64) -> f64 {
    scaled_cluster(a1.max(a2), a1.min(a2), 2)
}

/// A band crossing a period `p` with a lens of area `lens` straddling one
/// of its edges. Pressure balance across the straight band edge makes
/// both lens arcs equal, and the 120-degree rule makes each span 120
/// degrees of its circle.
pub fn band_lens_perimeter(lens: f64, p: f64) -> f64 {
    let unit = 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0;
    let r = (lens / unit).sqrt();
    2.0 * p - 3f64.sqrt() * r + 4.0 * PI * r / 3.0
}

/// Two equal regions of area `a` alternating along a period `p`: straight
/// interfaces, each region capped above and below by arcs leaving the
/// chord at 30 degrees.
pub fn equal_chain_perimeter(a: f64, p: f64) -> f64 {
    let r = p / 2.0;
    let seg = r * r * (PI / 3.0 - 3f64.sqrt() / 2.0) / 2.0;
    let half_height = (a - 2.0 * seg) / p;
    2.0 * PI * p / 3.0 + 4.0 * half_height
}

/// Three equal hexagonal prisms of height `h` tiling a 60-degree rhombic
/// cell of unit side.
pub fn honeycomb_area(h: f64) -> f64 {
    // hexagon side 1/3: nine walls of length 1/3 per cell
    3.0 * h
}

/// Three parallel flat walls along the cheapest face of the rhombic prism
/// of unit side and height `h`.
pub fn rhombic_slab_area(h: f64) -> f64 {
    3.0 * h.min(3f64.sqrt() / 2.0)
}
