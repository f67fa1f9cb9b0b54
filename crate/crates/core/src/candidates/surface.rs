//! Triangulated sheets emitted into a [`MeshBuilder`]. Every triangle is
//! oriented so that its normal agrees with a hint vector pointing into the
//! front region.

use crate::lattice::Vec3;
use crate::mesh::{MeshBuilder, Region};

#[derive(Clone, Copy)]
pub(crate) struct Sides {
    pub front: Region,
    pub back: Region,
}

pub(crate) fn sides(front: Region, back: Region) -> Sides {
    Sides { front, back }
}

pub(crate) fn oriented(mb: &mut MeshBuilder, a: &Vec3, b: &Vec3, c: &Vec3, hint: &Vec3, s: Sides) {
    let n = (b - a).cross(&(c - a));
    if n.dot(hint) >= 0.0 {
        mb.triangle(a, b, c, s.front, s.back);
    } else {
        mb.triangle(a, c, b, s.front, s.back);
    }
}

/// Structured sheet over `[0,1]^2` with `nu x nv` quads. Parameters at 1
/// may land on a lattice translate of those at 0; the builder glues them.
pub(crate) fn grid(
    mb: &mut MeshBuilder,
    nu: usize,
    nv: usize,
    at: impl Fn(f64, f64) -> Vec3,
    hint: impl Fn(&Vec3) -> Vec3,
    s: Sides,
) {
    let pts: Vec<Vec<Vec3>> = (0..=nu).map(|i| (0..=nv).map(|j| at(i as f64 / nu as f64, j as f64 / nv as f64)).collect()).collect();
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (&pts[i][j], &pts[i + 1][j], &pts[i + 1][j + 1], &pts[i][j + 1]);
            let h = hint(&((a + b + c + d) / 4.0));
            if (c - a).norm() <= (d - b).norm() {
                oriented(mb, a, b, c, &h, s);
                oriented(mb, a, c, d, &h, s);
            } else {
                oriented(mb, a, b, d, &h, s);
                oriented(mb, b, c, d, &h, s);
            }
        }
    }
}

/// A ring of `count` samples at parameter `t`, rotated by `offset` (a
/// fraction of one sample spacing).
#[derive(Clone, Copy, Debug)]
pub(crate) struct Ring {
    pub t: f64,
    pub count: usize,
    pub offset: f64,
}

/// Sheet swept by closed rings. `at(t, g)` gives the point at ring
/// parameter `t` and turn fraction `g`; `g = 1` must be a lattice
/// translate of `g = 0`. A ring of one sample is a pole. Neighbouring
/// rings are zipped in order of turn fraction, so their counts may differ.
pub(crate) fn rings(
    mb: &mut MeshBuilder,
    list: &[Ring],
    at: impl Fn(f64, f64) -> Vec3,
    hint: impl Fn(&Vec3) -> Vec3,
    s: Sides,
) {
    let sample = |r: &Ring| -> Vec<(f64, Vec3)> {
        (0..=r.count)
            .map(|i| {
                let g = (i as f64 + r.offset) / r.count as f64;
                (g, at(r.t, g))
            })
            .collect()
    };
    for w in list.windows(2) {
        let (a, b) = (sample(&w[0]), sample(&w[1]));
        let (na, nb) = (w[0].count, w[1].count);
        let (mut i, mut j) = (0, 0);
        while i < na || j < nb {
            let take_a = j == nb || (i < na && a[i + 1].0 <= b[j + 1].0);
            let (p, q, r) = if take_a { (&a[i].1, &a[i + 1].1, &b[j].1) } else { (&a[i].1, &b[j + 1].1, &b[j].1) };
            let h = hint(&((p + q + r) / 3.0));
            oriented(mb, p, q, r, &h, s);
            if take_a {
                i += 1;
            } else {
                j += 1;
            }
        }
    }
}

/// Ring list from `t0` to `t1` in `n` steps with counts from `count(t)`.
pub(crate) fn ring_list(t0: f64, t1: f64, n: usize, count: impl Fn(f64) -> usize) -> Vec<Ring> {
    (0..=n)
        .map(|j| {
            let t = t0 + (t1 - t0) * j as f64 / n as f64;
            Ring { t, count: count(t).max(1), offset: 0.0 }
        })
        .collect()
}

/// Extrude a polyline along `axis` (a lattice period) in `nz` steps. The
/// region on the left of each segment, seen with `axis` pointing at the
/// viewer, is `left`.
pub(crate) fn extrude(mb: &mut MeshBuilder, curve: &[Vec3], axis: &Vec3, nz: usize, left: Region, right: Region) {
    let s = sides(left, right);
    for w in curve.windows(2) {
        let (p, q) = (w[0], w[1]);
        let hint = axis.cross(&(q - p));
        for k in 0..nz {
            let (z0, z1) = (k as f64 / nz as f64, (k + 1) as f64 / nz as f64);
            let (a, b, c, d) = (p + axis * z0, q + axis * z0, q + axis * z1, p + axis * z1);
            if (c - a).norm() <= (d - b).norm() {
                oriented(mb, &a, &b, &c, &hint, s);
                oriented(mb, &a, &c, &d, &hint, s);
            } else {
                oriented(mb, &a, &b, &d, &hint, s);
                oriented(mb, &b, &c, &d, &hint, s);
            }
        }
    }
}

/// Points along a circular arc from `p0` to `p1` in the plane spanned by
/// `ex`, `ey` (with origin `o`); the arc bulges to the left of the chord
/// direction for positive half-angle `a`.
pub(crate) fn arc(o: &Vec3, ex: &Vec3, ey: &Vec3, p0: [f64; 2], p1: [f64; 2], a: f64, n: usize) -> Vec<Vec3> {
    let to3 = |x: f64, y: f64| o + ex * x + ey * y;
    let (dx, dy) = (p1[0] - p0[0], p1[1] - p0[1]);
    let c = 0.5 * (dx * dx + dy * dy).sqrt();
    let d = [dx / (2.0 * c), dy / (2.0 * c)];
    let l = [-d[1], d[0]];
    let m = [0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])];
    (0..=n)
        .map(|i| {
            let f = i as f64 / n as f64;
            if i == 0 {
                return to3(p0[0], p0[1]);
            }
            if i == n {
                return to3(p1[0], p1[1]);
            }
            if a.abs() < 1e-9 {
                return to3(p0[0] + f * dx, p0[1] + f * dy);
            }
            let r = c / a.sin();
            let k = c / a.tan();
            let w = -a + 2.0 * a * f;
            let (sw, cw) = (w.sin(), w.cos());
            let x = m[0] - l[0] * k + r * (sw * d[0] + cw * l[0]);
            let y = m[1] - l[1] * k + r * (sw * d[1] + cw * l[1]);
            to3(x, y)
        })
        .collect()
}

/// Orthonormal frame with origin; `e3` is the axis of rotational sheets.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Frame {
    pub o: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
}

impl Frame {
    /// Frame with `e3` along `axis` and `e1` as close to `towards` as possible.
    pub fn new(o: Vec3, axis: &Vec3, towards: &Vec3) -> Self {
        let e3 = axis.normalize();
        let mut e1 = towards - e3 * e3.dot(towards);
        if e1.norm() < 1e-9 {
            let alt = if e3.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            e1 = alt - e3 * e3.dot(&alt);
        }
        let e1 = e1.normalize();
        let e2 = e3.cross(&e1);
        Frame { o, e1, e2, e3 }
    }

    /// Point at axial position `s`, radius `rho` and turn fraction `g`.
    pub fn polar(&self, s: f64, rho: f64, g: f64) -> Vec3 {
        let phi = std::f64::consts::TAU * g;
        self.o + self.e3 * s + (self.e1 * phi.cos() + self.e2 * phi.sin()) * rho
    }

    /// Component of `p - o` normal to the axis.
    pub fn radial(&self, p: &Vec3) -> Vec3 {
        let d = p - self.o;
        d - self.e3 * d.dot(&self.e3)
    }
}

/// Spherical cap over the circle of radius `c` in the plane `s = 0`,
/// bulging to side `sigma` (+1 or -1) with half-angle `a >= 0`; a flat disk
/// when `a` vanishes. The rim carries exactly `rim` samples.
pub(crate) fn cap(
    mb: &mut MeshBuilder,
    f: &Frame,
    c: f64,
    a: f64,
    sigma: f64,
    rim: usize,
    h: f64,
    hint: impl Fn(&Vec3) -> Vec3,
    s: Sides,
) {
    if a < 1e-9 {
        let list = ring_list(0.0, 1.0, segments(c, h, 2), |t| (rim as f64 * t).round() as usize);
        rings(mb, &list, |t, g| f.polar(0.0, t * c, g), hint, s);
        return;
    }
    let r = c / a.sin();
    let k = c / a.tan();
    let list = ring_list(0.0, a, segments(r * a, h, 2), |b| (rim as f64 * r * b.sin() / c).round() as usize);
    rings(mb, &list, |b, g| f.polar(sigma * (r * b.cos() - k), r * b.sin(), g), hint, s);
}

/// Sheet with one hole, parametrized over the square `[-1,1]^2` whose
/// opposite sides are glued by `map`. `hole(beta)` traces the hole in
/// square coordinates and `map(x, t, beta)` places the point `x` lying on
/// ring `t` (0 at the hole, 1 on the square boundary). The hole carries
/// `m_hole` samples at angles `2 pi i / m_hole`; the boundary ring uses a
/// multiple of eight so that glued sides receive matching samples.
#[allow(clippy::too_many_arguments)]
pub(crate) fn punctured_square(
    mb: &mut MeshBuilder,
    hole: impl Fn(f64) -> [f64; 2],
    map: impl Fn([f64; 2], f64, f64) -> Vec3,
    m_hole: usize,
    h_hole: f64,
    h_out: f64,
    hint: impl Fn(&Vec3) -> Vec3,
    s: Sides,
) {
    use std::f64::consts::TAU;
    let square = |b: f64| {
        let (c, sn) = (b.cos(), b.sin());
        let m = c.abs().max(sn.abs());
        [c / m, sn / m]
    };
    let at = |t: f64, g: f64| {
        let b = TAU * g;
        let (hp, op) = (hole(b), square(b));
        map([(1.0 - t) * hp[0] + t * op[0], (1.0 - t) * hp[1] + t * op[1]], t, b)
    };
    let perimeter = |t: f64| (0..64).map(|i| (at(t, (i + 1) as f64 / 64.0) - at(t, i as f64 / 64.0)).norm()).sum::<f64>();
    let reach = (0..16).map(|i| (at(1.0, i as f64 / 16.0) - at(0.0, i as f64 / 16.0)).norm()).sum::<f64>() / 16.0;
    let n = segments(2.0 * reach / (h_hole + h_out), 1.0, 3);
    let list: Vec<Ring> = (0..=n)
        .map(|j| {
            let t = j as f64 / n as f64;
            let count = if j == 0 {
                m_hole
            } else {
                let h = h_hole + (h_out - h_hole) * t;
                let c = ((perimeter(t) / h).round() as usize).max(8);
                if j == n {
                    multiple_of(c, 8)
                } else {
                    c
                }
            };
            Ring { t, count, offset: 0.0 }
        })
        .collect();
    rings(mb, &list, at, hint, s);
}

/// Segment count giving edges near length `h` over `length`.
pub(crate) fn segments(length: f64, h: f64, min: usize) -> usize {
    ((length / h).ceil() as usize).max(min)
}

/// Round up to a multiple of `k`.
pub(crate) fn multiple_of(n: usize, k: usize) -> usize {
    n.div_ceil(k) * k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_hits_endpoints_and_bulge() {
        let o = Vec3::zeros();
        let (ex, ey) = (Vec3::x(), Vec3::y());
        let pts = arc(&o, &ex, &ey, [-1.0, 0.0], [1.0, 0.0], std::f64::consts::FRAC_PI_2, 8);
        assert!((pts[0] - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((pts[8] - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        // Semicircle bulging to the left of +x, i.e. towards +y.
        assert!((pts[4] - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
        for p in &pts {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
        let neg = arc(&o, &ex, &ey, [-1.0, 0.0], [1.0, 0.0], -0.5, 4);
        assert!(neg[2][1] < 0.0);
    }

    #[test]
    fn multiples() {
        assert_eq!(multiple_of(13, 4), 16);
        assert_eq!(multiple_of(16, 4), 16);
        assert_eq!(segments(1.0, 0.3, 2), 4);
    }
}
