use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI, TAU};

use super::closed::{bulge, sdb_closed_form, segment_area, segment_centroid, transverse_width, TripleJunction};
use super::surface::{cap, multiple_of, punctured_square, ring_list, rings, segments, sides, Frame};
use super::{cell_centre, fit, min_width, rim_count, scaled, shortest_axis, Plan, INNER, PRIMARY};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Vec3};
use crate::mesh::MeshBuilder;

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub(super) struct Sdb {
    frame: Frame,
    j: TripleJunction,
    area: f64,
}

impl Sdb {
    pub fn plan(l: &Lattice, big: f64, small: f64) -> Result<Self> {
        let s = sdb_closed_form(big, small)?;
        let j = s.junction;
        let w = min_width(l);
        fit("standard double bubble depth", j.depth(), 0.9 * w)?;
        fit("standard double bubble span", j.span(), 0.9 * w)?;
        // centre the bubble along its axis
        let shift = 0.5 * (bulge(j.c, j.alpha[1]) - bulge(j.c, j.alpha[2]));
        let mut frame = Frame::new(cell_centre(l), &l.period(2), &l.period(0));
        frame.o += frame.e3 * shift;
        Ok(Sdb { frame, j, area: s.area })
    }
}

impl Plan for Sdb {
    fn analytic(&self) -> Option<(f64, &'static str)> {
        Some((self.area, "three spherical caps meeting at 120 degrees"))
    }

    fn emit(&self, mb: &mut MeshBuilder, refinement: u32) {
        let f = self.frame;
        let (c, a) = (self.j.c, self.j.alpha);
        let n = rim_count(refinement);
        let h = TAU * c / n as f64;
        let centre = |a: f64, sigma: f64| f.o + f.e3 * (-sigma * c / a.tan());
        let (c1, c2) = (centre(a[1], -1.0), centre(a[2], 1.0));
        cap(mb, &f, c, a[1], -1.0, n, h, move |p| p - c1, sides(0, PRIMARY));
        cap(mb, &f, c, a[2], 1.0, n, h, move |p| p - c2, sides(0, INNER));
        cap(mb, &f, c, a[0], -1.0, n, h, move |_| -f.e3, sides(PRIMARY, INNER));
    }
}

/// Two beads of revolution around the shortest period, separated by disk
/// necks. Bead profiles are circular arcs leaving each neck rim at 30
/// degrees to the axis.
pub(super) struct Chain {
    frame: Frame,
    period: f64,
    la: f64,
    neck: f64,
}

fn bead_radius(l: f64, neck: f64, s: f64) -> f64 {
    let u = s - l / 2.0;
    neck - l * FRAC_PI_6.cos() + (l * l - u * u).max(0.0).sqrt()
}

fn bead_volume(l: f64, neck: f64) -> f64 {
    let n = 256;
    let h = l / n as f64;
    let f = |s: f64| bead_radius(l, neck, s).powi(2);
    let mut sum = f(0.0) + f(l);
    for i in 1..n {
        sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    PI * sum * h / 3.0
}

impl Chain {
    pub fn plan(l: &Lattice, big: f64, small: f64) -> Result<Self> {
        let k = shortest_axis(l);
        let p = l.period(k).norm();
        let w = transverse_width(l, k);
        let neck_for = |len: f64, v: f64| {
            if bead_volume(len, 0.0) >= v {
                0.0
            } else {
                bisect(0.0, w, |r| bead_volume(len, r) - v)
            }
        };
        let excess = |la: f64| bead_volume(p - la, neck_for(la, big)) - small;
        let (lo, hi) = (1e-3 * p, p * (1.0 - 1e-3));
        if excess(lo) < 0.0 || excess(hi) > 0.0 {
            return Err(Error::Infeasible("delauney chain: beads cannot share a neck".into()));
        }
        let la = bisect(lo, hi, excess);
        let neck = neck_for(la, big);
        let crest = neck + la.max(p - la) * (1.0 - FRAC_PI_6.cos());
        fit("delauney chain bead radius", crest, 0.45 * w)?;
        if neck < 0.1 * crest {
            return Err(Error::Infeasible(format!(
                "delauney chain: neck radius {neck:.6} must be at least 0.1 of bead radius {crest:.6}"
            )));
        }
        let towards = l.period((k + 1) % 3);
        let mut frame = Frame::new(cell_centre(l), &l.period(k), &towards);
        frame.o -= frame.e3 * (la / 2.0);
        Ok(Chain { frame, period: p, la, neck })
    }
}

impl Plan for Chain {
    fn emit(&self, mb: &mut MeshBuilder, refinement: u32) {
        let f = self.frame;
        let n = rim_count(refinement);
        let (la, lb) = (self.la, self.period - self.la);
        let crest = self.neck + la.max(lb) * (1.0 - FRAC_PI_6.cos());
        let h = TAU * crest / n as f64;
        let radial = move |p: &Vec3| f.radial(p);
        let neck = self.neck;
        let bead = |mb: &mut MeshBuilder, s0: f64, len: f64, region| {
            let list = ring_list(0.0, len, segments(len, h, 4), |_| n);
            rings(mb, &list, |s, g| f.polar(s0 + s, bead_radius(len, neck, s), g), radial, sides(0, region));
        };
        bead(mb, 0.0, la, PRIMARY);
        bead(mb, la, lb, INNER);
        for (s, front, back) in [(0.0, PRIMARY, INNER), (la, INNER, PRIMARY)] {
            let mut g = f;
            g.o += f.e3 * s;
            cap(mb, &g, neck, 0.0, 1.0, n, h, move |_| f.e3, sides(front, back));
        }
    }
}

/// Tube around the shortest period girdled by a lens-shaped ring whose
/// profile arcs meet the tube wall at 120 degrees.
pub(super) struct TubeLens {
    frame: Frame,
    period: f64,
    rho: f64,
    r: f64,
}

impl TubeLens {
    pub fn plan(l: &Lattice, big: f64, small: f64) -> Result<Self> {
        let k = shortest_axis(l);
        let p = l.period(k).norm();
        let w = transverse_width(l, k);
        let unit = segment_area(FRAC_PI_3.sin(), FRAC_PI_3);
        let shape = |rho: f64| {
            let seg = small / (4.0 * PI * rho);
            let r = (seg / unit).sqrt();
            let dc = segment_centroid(r * FRAC_PI_3.sin(), FRAC_PI_3);
            (seg, r, dc)
        };
        let excess = |rho: f64| {
            let (seg, _, dc) = shape(rho);
            PI * rho * rho * p - 2.0 * PI * seg * (rho - dc) - big
        };
        let hi = 0.5 * w;
        if excess(hi) < 0.0 {
            return Err(Error::Infeasible("cylinder lens: tube does not fit".into()));
        }
        // the excess also turns positive as the tube shrinks to nothing, so
        // bracket the largest root by stepping down from the widest tube
        let lo = (1..200).map(|i| hi * (1.0 - i as f64 / 200.0)).find(|&x| excess(x) < 0.0);
        let lo = lo.ok_or_else(|| Error::Infeasible("cylinder lens: no tube radius matches the volumes".into()))?;
        let rho = bisect(lo, lo + hi / 200.0, excess);
        let (_, r, _) = shape(rho);
        fit("cylinder lens outer radius", rho + r / 2.0, 0.45 * w)?;
        fit("cylinder lens inner bulge", r / 2.0, 0.8 * rho)?;
        fit("cylinder lens ring width", 3f64.sqrt() * r, 0.8 * p)?;
        let frame = Frame::new(cell_centre(l), &l.period(k), &l.period((k + 1) % 3));
        Ok(TubeLens { frame, period: p, rho, r })
    }
}

impl Plan for TubeLens {
    fn emit(&self, mb: &mut MeshBuilder, refinement: u32) {
        let f = self.frame;
        let n = rim_count(refinement);
        let (rho, r) = (self.rho, self.r);
        let h = TAU * rho / n as f64;
        let half = r * FRAC_PI_3.sin();
        let radial = move |p: &Vec3| f.radial(p);
        let wall = self.period - 2.0 * half;
        let list = ring_list(0.0, wall, segments(wall, h, 4), |_| n);
        rings(mb, &list, |s, g| f.polar(half + s, rho, g), radial, sides(0, PRIMARY));
        let arcs = ring_list(-FRAC_PI_3, FRAC_PI_3, segments(2.0 * FRAC_PI_3 * r, h, 4), |_| n);
        rings(mb, &arcs, |w, g| f.polar(r * w.sin(), rho - r / 2.0 + r * w.cos(), g), radial, sides(0, INNER));
        rings(mb, &arcs, |w, g| f.polar(r * w.sin(), rho + r / 2.0 - r * w.cos(), g), radial, sides(INNER, PRIMARY));
    }
}

/// Two tubes along orthogonal periods, stacked across the plane they span
/// and fused through a flat disk in that plane.
pub(super) struct Cross {
    frame: Frame,
    len: [f64; 2],
    rho: [f64; 2],
    disk: f64,
}

impl Cross {
    pub fn plan(l: &Lattice, big: f64, small: f64) -> Result<Self> {
        let mut pair = None;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let (a, b) = (l.period(i), l.period(j));
            if a.dot(&b).abs() > 1e-12 * a.norm() * b.norm() {
                continue;
            }
            let cost = a.norm() + b.norm();
            if pair.is_none_or(|(_, _, c)| cost < c - 1e-12) {
                pair = Some((i, j, cost));
            }
        }
        let Some((i, j, _)) = pair else {
            return Err(Error::UnsupportedLattice("cylinder cross needs two orthogonal periods".into()));
        };
        let (a, b) = (l.period(i), l.period(j));
        let len = [a.norm(), b.norm()];
        let rho = [(big / (PI * len[0])).sqrt(), (small / (PI * len[1])).sqrt()];
        fit("cylinder cross first tube radius", rho[0], 0.45 * transverse_width(l, i))?;
        fit("cylinder cross second tube radius", rho[1], 0.45 * transverse_width(l, j))?;
        let stack = l.det() / a.cross(&b).norm();
        fit("cylinder cross stack height", 2.0 * (rho[0] + rho[1]), 0.9 * stack)?;
        let normal = a.cross(&b);
        let frame = Frame { o: cell_centre(l), e1: a.normalize(), e2: normal.cross(&a).normalize(), e3: normal.normalize() };
        Ok(Cross { frame, len, rho, disk: 0.5 * rho[0].min(rho[1]) })
    }
}

impl Plan for Cross {
    fn emit(&self, mb: &mut MeshBuilder, refinement: u32) {
        let f = self.frame;
        let m = multiple_of(rim_count(refinement), 8);
        let d = self.disk;
        let h_hole = TAU * d / m as f64;
        cap(mb, &f, d, 0.0, 1.0, m, h_hole, move |_| f.e3, sides(INNER, PRIMARY));

        // first tube along e1 below the disk, angle measured from its top
        let (ra, la) = (self.rho[0], self.len[0]);
        let h_a = scaled((TAU * ra / 24.0).max(la / 12.0), refinement);
        let hole_a = move |b: f64| [d * b.cos() / (la / 2.0), (d * b.sin() / ra).asin() / PI];
        let map_a = move |x: [f64; 2], t: f64, b: f64| {
            let phi_h = (d * b.sin() / ra).asin();
            let lift = (1.0 - t).powi(2) * ra * (1.0 - phi_h.cos());
            let (xa, phi) = (x[0] * la / 2.0, x[1] * PI);
            f.o + f.e1 * xa + f.e2 * (ra * phi.sin()) + f.e3 * (ra * phi.cos() - ra + lift)
        };
        let axis_a = f.o - f.e3 * ra;
        let hint_a = move |p: &Vec3| {
            let q = p - axis_a;
            q - f.e1 * q.dot(&f.e1)
        };
        punctured_square(mb, hole_a, map_a, m, h_hole, h_a, hint_a, sides(0, PRIMARY));

        // second tube along e2 above the disk, angle measured from its bottom
        let (rb, lb) = (self.rho[1], self.len[1]);
        let h_b = scaled((TAU * rb / 24.0).max(lb / 12.0), refinement);
        let hole_b = move |b: f64| [(d * b.cos() / rb).asin() / PI, d * b.sin() / (lb / 2.0)];
        let map_b = move |x: [f64; 2], t: f64, b: f64| {
            let psi_h = (d * b.cos() / rb).asin();
            let lift = (1.0 - t).powi(2) * rb * (1.0 - psi_h.cos());
            let (psi, y) = (x[0] * PI, x[1] * lb / 2.0);
            f.o + f.e2 * y + f.e1 * (rb * psi.sin()) + f.e3 * (rb - rb * psi.cos() - lift)
        };
        let axis_b = f.o + f.e3 * rb;
        let hint_b = move |p: &Vec3| {
            let q = p - axis_b;
            q - f.e2 * q.dot(&f.e2)
        };
        punctured_square(mb, hole_b, map_b, m, h_hole, h_b, hint_b, sides(0, INNER));
    }
}
