//! Circular-arc and spherical-cap closed forms.
//!
//! Arcs and caps are described by the half-width `c` of their chord (or
//! base disk) and a signed half-angle `a`: the angle subtended at the
//! centre between the axis and the rim. Positive angles bulge to the
//! positive side of the chord.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Lattice;

const TWO_PI_3: f64 = 2.0 * FRAC_PI_3;

/// Signed area between a chord of half-width `c` and its arc.
pub fn segment_area(c: f64, a: f64) -> f64 {
    if a.abs() < 1e-6 {
        return c * c * (2.0 * a / 3.0);
    }
    let s = a.sin();
    c * c * (a - s * a.cos()) / (s * s)
}

/// Length of the arc over a chord of half-width `c`.
pub fn arc_length(c: f64, a: f64) -> f64 {
    if a.abs() < 1e-9 {
        return 2.0 * c;
    }
    2.0 * c * a / a.sin()
}

/// Signed height of the arc above its chord.
pub fn bulge(c: f64, a: f64) -> f64 {
    c * (a / 2.0).tan()
}

/// Radius of the circle carrying the arc; infinite for a flat chord.
pub fn arc_radius(c: f64, a: f64) -> f64 {
    if a == 0.0 {
        f64::INFINITY
    } else {
        c / a.sin().abs()
    }
}

/// Signed volume between a base disk of radius `c` and its spherical cap.
pub fn cap_volume(c: f64, a: f64) -> f64 {
    let (s, k) = (a.sin(), a.cos());
    PI * c.powi(3) * s * (2.0 + k) / (3.0 * (1.0 + k).powi(2))
}

/// Area of a spherical cap over a base disk of radius `c`.
pub fn cap_area(c: f64, a: f64) -> f64 {
    2.0 * PI * c * c / (1.0 + a.cos())
}

/// Centroid height of a circular segment above its chord.
pub fn segment_centroid(c: f64, a: f64) -> f64 {
    if a.abs() < 1e-6 {
        return 0.4 * bulge(c, a);
    }
    let r = c / a.sin();
    4.0 * r * a.sin().powi(3) / (3.0 * (2.0 * a - (2.0 * a).sin()))
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Three arcs (or caps) on a common chord meeting at 120 degrees. The
/// larger region lies on the negative side, the smaller on the positive
/// side, and the interface bulges into the larger one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleJunction {
    /// Half-width of the common chord (radius of the triple circle in 3D).
    pub c: f64,
    /// Half-angles of the interface, larger-region and smaller-region arcs.
    pub alpha: [f64; 3],
}

impl TripleJunction {
    fn from_interface(c: f64, a0: f64) -> Self {
        TripleJunction { c, alpha: [a0, a0 + TWO_PI_3, TWO_PI_3 - a0] }
    }

    /// Solve for the junction enclosing `big >= small` with the given
    /// signed region measure.
    fn solve(big: f64, small: f64, measure: impl Fn(f64, f64) -> f64, dim: i32) -> Self {
        let regions = |a0: f64| {
            let j = TripleJunction::from_interface(1.0, a0);
            (measure(1.0, j.alpha[1]) - measure(1.0, j.alpha[0]), measure(1.0, j.alpha[2]) + measure(1.0, j.alpha[0]))
        };
        let ratio = small / big;
        let a0 = if (ratio - 1.0).abs() < 1e-15 {
            0.0
        } else {
            bisect(0.0, FRAC_PI_3 - 1e-12, |a| {
                let (l, s) = regions(a);
                s / l - ratio
            })
        };
        let (large, _) = regions(a0);
        let c = (big / large).powf(1.0 / dim as f64);
        TripleJunction::from_interface(c, a0)
    }

    /// Radii of the interface, larger and smaller arcs.
    pub fn radii(&self) -> [f64; 3] {
        self.alpha.map(|a| arc_radius(self.c, a))
    }

    /// Extent along the chord normal, from the far side of the larger
    /// region to the far side of the smaller one.
    pub fn depth(&self) -> f64 {
        bulge(self.c, self.alpha[1]) + bulge(self.c, self.alpha[2])
    }

    /// Extent along the chord.
    pub fn span(&self) -> f64 {
        let r = self.radii();
        let across = |a: f64, r: f64| if a > std::f64::consts::FRAC_PI_2 { 2.0 * r } else { 2.0 * self.c };
        across(self.alpha[1], r[1]).max(across(self.alpha[2], r[2]))
    }
}

/// Standard double bubble in the plane for areas `big >= small`.
pub fn double_bubble_2d(big: f64, small: f64) -> (TripleJunction, f64) {
    let j = TripleJunction::solve(big, small, segment_area, 2);
    let perimeter = j.alpha.iter().map(|&a| arc_length(j.c, a)).sum();
    (j, perimeter)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SdbClosedForm {
    pub area: f64,
    /// Interface radius; infinite when the volumes are equal.
    pub r0: f64,
    /// Outer radius of the bubble of volume `v1`.
    pub r1: f64,
    /// Outer radius of the bubble of volume `v2`.
    pub r2: f64,
    pub junction: TripleJunction,
}

/// Standard double bubble in space. Accepts the volumes in either order;
/// `r1` always belongs to `v1`.
pub fn sdb_closed_form(v1: f64, v2: f64) -> Result<SdbClosedForm> {
    if !(v1 > 0.0 && v2 > 0.0 && v1.is_finite() && v2.is_finite()) {
        return Err(Error::InvalidParameter(format!("volumes must be positive, got ({v1}, {v2})")));
    }
    let (big, small) = if v1 >= v2 { (v1, v2) } else { (v2, v1) };
    let j = TripleJunction::solve(big, small, cap_volume, 3);
    let area = j.alpha.iter().map(|&a| cap_area(j.c, a)).sum();
    let r = j.radii();
    let (r1, r2) = if v1 >= v2 { (r[1], r[2]) } else { (r[2], r[1]) };
    Ok(SdbClosedForm { area, r0: r[0], r1, r2, junction: j })
}

/// Band of thickness `t` along a period of length `p`, carrying a lens of
/// two 60-degree arcs of radius `r` centred on one of its edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandLens {
    pub t: f64,
    pub r: f64,
    pub perimeter: f64,
}

pub fn band_lens(band: f64, lens: f64, p: f64) -> BandLens {
    let unit = segment_area(FRAC_PI_3.sin(), FRAC_PI_3);
    let r = (lens / (2.0 * unit)).sqrt();
    let seg = unit * r * r;
    let t = (band + seg) / p;
    let perimeter = 2.0 * p - 3f64.sqrt() * r + 2.0 * arc_length(r * FRAC_PI_3.sin(), FRAC_PI_3);
    BandLens { t, r, perimeter }
}

impl BandLens {
    pub fn chord(&self) -> f64 {
        3f64.sqrt() * self.r
    }

    pub fn lens_bulge(&self) -> f64 {
        self.r / 2.0
    }
}

/// Two regions alternating along a period of length `p`, each bounded
/// above and below by arcs and separated by two mirror-image interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricChain {
    /// Half-angle of the arcs bounding the first region.
    pub theta_a: f64,
    /// Chord width of the first region.
    pub wa: f64,
    /// Half-height of the interfaces.
    pub h: f64,
    pub p: f64,
    pub perimeter: f64,
}

impl SymmetricChain {
    pub fn theta_b(&self) -> f64 {
        FRAC_PI_3 - self.theta_a
    }

    /// Half-angle of the interfaces, positive when they bulge into the
    /// second region.
    pub fn psi(&self) -> f64 {
        FRAC_PI_6 - self.theta_a
    }

    pub fn wb(&self) -> f64 {
        self.p - self.wa
    }

    /// Full height of the chain across the period.
    pub fn height(&self) -> f64 {
        let ba = bulge(self.wa / 2.0, self.theta_a);
        let bb = bulge(self.wb() / 2.0, self.theta_b());
        2.0 * (self.h + ba.max(bb).max(0.0))
    }

    fn residual(x: &Vector3<f64>, a: f64, b: f64, p: f64) -> Vector3<f64> {
        let (ta, wa, h) = (x[0], x[1], x[2]);
        let (tb, psi, wb) = (FRAC_PI_3 - ta, FRAC_PI_6 - ta, p - wa);
        let ka = ta.sin() / (wa / 2.0);
        let kb = tb.sin() / (wb / 2.0);
        let si = segment_area(h, psi);
        Vector3::new(
            psi.sin() - h * (ka - kb),
            2.0 * h * wa + 2.0 * segment_area(wa / 2.0, ta) + 2.0 * si - a,
            2.0 * h * wb + 2.0 * segment_area(wb / 2.0, tb) - 2.0 * si - b,
        )
    }
}

/// Solve the symmetric chain by continuation from the equal-area chain.
pub fn symmetric_chain(a: f64, b: f64, p: f64) -> Result<SymmetricChain> {
    let total = a + b;
    let mut x = Vector3::new(FRAC_PI_6, p / 2.0, 0.0);
    let steps = 40;
    for s in 0..=steps {
        let f = s as f64 / steps as f64;
        let (ai, bi) = (total / 2.0 + f * (a - total / 2.0), total / 2.0 + f * (b - total / 2.0));
        if s == 0 {
            let seg = segment_area(p / 4.0, FRAC_PI_6);
            x[2] = (ai - 2.0 * seg) / p;
            continue;
        }
        for _ in 0..60 {
            let r = SymmetricChain::residual(&x, ai, bi, p);
            if r.norm() < 1e-14 * total.max(1.0) {
                break;
            }
            let mut jac = Matrix3::zeros();
            for k in 0..3 {
                let mut y = x;
                let d = 1e-7 * x[k].abs().max(1e-3);
                y[k] += d;
                let col = (SymmetricChain::residual(&y, ai, bi, p) - r) / d;
                jac.set_column(k, &col);
            }
            let Some(step) = jac.lu().solve(&(-r)) else {
                return Err(Error::Infeasible("symmetric chain: singular system".into()));
            };
            let mut lambda = 1.0;
            let mut next = x + step * lambda;
            while lambda > 1e-4 && !(next[1] > 0.0 && next[1] < p && next[2] > 0.0 && next[0].abs() < FRAC_PI_3) {
                lambda *= 0.5;
                next = x + step * lambda;
            }
            x = next;
        }
    }
    let r = SymmetricChain::residual(&x, a, b, p);
    if r.norm() > 1e-10 * total.max(1.0) || !(x[1] > 0.0 && x[1] < p && x[2] > 0.0) {
        return Err(Error::Infeasible(format!("symmetric chain: no solution for areas ({a}, {b}) on period {p}")));
    }
    let (ta, wa, h) = (x[0], x[1], x[2]);
    let wb = p - wa;
    let perimeter = 2.0 * arc_length(wa / 2.0, ta)
        + 2.0 * arc_length(wb / 2.0, FRAC_PI_3 - ta)
        + 2.0 * arc_length(h, FRAC_PI_6 - ta);
    Ok(SymmetricChain { theta_a: ta, wa, h, p, perimeter })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SingleShape {
    Sphere,
    Cylinder,
    Slab,
}

/// Least area among a round sphere, a round tube around one period and a
/// slab parallel to a pair of periods, each enclosing volume `v`.
pub fn single_bubble_reference(lattice: &Lattice, v: f64) -> Result<(f64, SingleShape)> {
    let det = lattice.det();
    if !(v > 0.0 && v < det) {
        return Err(Error::InvalidParameter(format!("volume {v} outside (0, {det})")));
    }
    let min_width = (0..3).map(|k| lattice.width(k)).fold(f64::INFINITY, f64::min);
    let mut best = (f64::INFINITY, SingleShape::Slab);
    let r = (3.0 * v / (4.0 * PI)).cbrt();
    if 2.0 * r < min_width {
        best = ((36.0 * PI).cbrt() * v.powf(2.0 / 3.0), SingleShape::Sphere);
    }
    for k in 0..3 {
        let p = lattice.period(k).norm();
        let rho = (v / (PI * p)).sqrt();
        if 2.0 * rho < transverse_width(lattice, k) {
            let a = 2.0 * (PI * v * p).sqrt();
            if a < best.0 {
                best = (a, SingleShape::Cylinder);
            }
        }
    }
    let slab = 2.0 * (0..3).map(|k| lattice.face_area(k)).fold(f64::INFINITY, f64::min);
    if slab < best.0 {
        best = (slab, SingleShape::Slab);
    }
    Ok(best)
}

/// Smallest width of the planar lattice obtained by projecting the other
/// two periods onto the plane normal to period `k`.
pub fn transverse_width(lattice: &Lattice, k: usize) -> f64 {
    let axis = lattice.period(k).normalize();
    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
    let pi = lattice.period(i) - axis * axis.dot(&lattice.period(i));
    let pj = lattice.period(j) - axis * axis.dot(&lattice.period(j));
    let area = pi.cross(&pj).norm();
    (area / pi.norm()).min(area / pj.norm())
}
