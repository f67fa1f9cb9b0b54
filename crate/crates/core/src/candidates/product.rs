use std::f64::consts::{FRAC_PI_3, TAU};

use super::closed::{band_lens, bulge, double_bubble_2d, symmetric_chain, transverse_width, BandLens, SymmetricChain, TripleJunction};
use super::surface::{arc, extrude, segments};
use super::{cell_centre, fit, scaled, Plan, INNER, PRIMARY};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Vec3};
use crate::mesh::MeshBuilder;

/// A planar torus crossed with a circle: the cross-section lives in the
/// plane spanned by `ex`, `ey` and is swept along the period `axis`.
#[derive(Clone, Copy, Debug)]
struct Extrusion {
    o: Vec3,
    ex: Vec3,
    ey: Vec3,
    axis: Vec3,
    /// Length of the in-plane period along `ex`.
    p: f64,
    /// Width of the cross-section torus across `ex`.
    w: f64,
}

impl Extrusion {
    fn len(&self) -> f64 {
        self.axis.norm()
    }

    fn arc(&self, p0: [f64; 2], p1: [f64; 2], a: f64, h: f64) -> Vec<Vec3> {
        let c = 0.5 * ((p1[0] - p0[0]).powi(2) + (p1[1] - p0[1]).powi(2)).sqrt();
        let n = segments(super::closed::arc_length(c, a), h, 3);
        arc(&self.o, &self.ex, &self.ey, p0, p1, a, n)
    }

    fn nz(refinement: u32) -> usize {
        4 << refinement.min(16)
    }
}

/// Every (axis, band direction) pair whose axis is orthogonal to the other
/// two periods, highest axis first.
fn extrusions(l: &Lattice) -> Result<Vec<Extrusion>> {
    let mut out = Vec::new();
    for k in [2, 1, 0] {
        if !l.is_product_axis(k) {
            continue;
        }
        let axis = l.period(k);
        let w2 = l.det() / axis.norm();
        for i in [(k + 1) % 3, (k + 2) % 3] {
            let band = l.period(i);
            let ex = band.normalize();
            let ey = axis.normalize().cross(&ex);
            out.push(Extrusion { o: cell_centre(l), ex, ey, axis, p: band.norm(), w: w2 / band.norm() });
        }
    }
    if out.is_empty() {
        return Err(Error::UnsupportedLattice("no period is orthogonal to the other two".into()));
    }
    Ok(out)
}

/// Pick the feasible layout of least area; the first error is reported
/// when none is feasible.
fn cheapest<T>(l: &Lattice, mut make: impl FnMut(&Extrusion) -> Result<(T, f64)>) -> Result<T> {
    let mut best: Option<(T, f64)> = None;
    let mut first_err = None;
    for e in extrusions(l)? {
        match make(&e) {
            Ok((t, a)) => {
                if best.as_ref().is_none_or(|(_, b)| a < b - 1e-12) {
                    best = Some((t, a));
                }
            }
            Err(err) => {
                first_err.get_or_insert(err);
            }
        }
    }
    best.map(|(t, _)| t).ok_or_else(|| first_err.expect("at least one layout tried"))
}

pub(super) struct DoubleCylinder {
    ext: Extrusion,
    j: TripleJunction,
    perimeter: f64,
}

impl DoubleCylinder {
    pub fn plan(l: &Lattice, big: f64, small: f64) -> Result<Self> {
        cheapest(l, |e| {
            let len = e.len();
            let (j, perimeter) = double_bubble_2d(big / len, small / len);
            let k = (0..3).find(|&k| (l.period(k) - e.axis).norm() == 0.0).expect("axis is a period");
            let w = transverse_width(l, k);
            fit("double cylinder cross-section depth", j.depth(), 0.9 * w)?;
            fit("double cylinder cross-section span", j.span(), 0.9 * w)?;
            Ok((DoubleCylinder { ext: *e, j, perimeter }, perimeter * len))
        })
    }
}

impl Plan for DoubleCylinder {
    fn analytic(&self) -> Option<(f64, &'static str)> {
        Some((self.perimeter * self.ext.len(), "planar double bubble perimeter times the extrusion period"))
    }

    fn emit(&self, mb: &mut MeshBuilder, refinement: u32) {
        let e = &self.ext;
        let (c, a) = (self.j.c, self.j.alpha);
        let shift = 0.5 * (bulge(c, a[1]) - bulge(c, a[2]));
        let h = scaled(TAU * c / 24.0, refinement);
        let (lo, hi) = ([shift, -c], [shift, c]);
        let nz = Extrusion::nz(refinement);
        extrude(mb, &e.arc(lo, hi, a[1], h), &e.axis, nz, 0, PRIMARY);
        extrude(mb, &e.arc(hi, lo, a[2], h), &e.axis, nz, 0, INNER);
        extrude(mb, &e.arc(lo, hi, a[0], h), &e.axis, nz, PRIMARY, INNER);
    }
}

/// Band with a lens blister on one edge, swept along the axis.
pub(super) struct BandLens3 {
    ext: Extrusion,
    b: BandLens,
}

impl BandLens3 {
    pub fn plan(l: &Lattice, big: f64, small: f64) -> Result<Self> {
        cheapest(l, |e| {
            let len = e.len();
            let b = band_lens(big / len, small / len, e.p);
            fit("slab cylinder lens chord", b.chord(), 0.9 * e.p)?;
            fit("slab cylinder lens depth", b.lens_bulge(), 0.9 * b.t)?;
            fit("slab cylinder total height", b.t + b.lens_bulge(), 0.9 * e.w)?;
            Ok((BandLens3 { ext: *e, b }, b.perimeter * len))
        })
    }
}

impl Plan for BandLens3 {
    fn analytic(&self) -> Option<(f64, &'static str)> {
        Some((self.b.perimeter * self.ext.len(), "planar band-with-lens perimeter times the extrusion period"))
    }

    fn emit(&self, mb: &mut MeshBuilder, refinement: u32) {
        let e = &self.ext;
        let (t, r, p) = (self.b.t, self.b.r, e.p);
        let half = 0.5 * self.b.chord();
        let h = scaled(TAU * r / 24.0, refinement);
        let h_flat = scaled(p / 8.0, refinement).max(h);
        let nz = Extrusion::nz(refinement);
        let (y0, y1) = (-0.5 * t, 0.5 * t);
        extrude(mb, &e.arc([-p / 2.0, y0], [p / 2.0, y0], 0.0, h_flat), &e.axis, nz, PRIMARY, 0);
        extrude(mb, &e.arc([half, y1], [p - half, y1], 0.0, h_flat), &e.axis, nz, 0, PRIMARY);
        extrude(mb, &e.arc([-half, y1], [half, y1], FRAC_PI_3, h), &e.axis, nz, 0, INNER);
        extrude(mb, &e.arc([-half, y1], [half, y1], -FRAC_PI_3, h), &e.axis, nz, INNER, PRIMARY);
    }
}

/// Two regions alternating along a band direction, swept along the axis.
pub(super) struct String3 {
    ext: Extrusion,
    c: SymmetricChain,
}

impl String3 {
    pub fn plan(l: &Lattice, big: f64, small: f64) -> Result<Self> {
        cheapest(l, |e| {
            let len = e.len();
            let c = symmetric_chain(big / len, small / len, e.p)?;
            fit("cylinder string height", c.height(), 0.9 * e.w)?;
            Ok((String3 { ext: *e, c }, c.perimeter * len))
        })
    }
}

impl Plan for String3 {
    fn analytic(&self) -> Option<(f64, &'static str)> {
        Some((self.c.perimeter * self.ext.len(), "planar symmetric chain perimeter times the extrusion period"))
    }

    fn emit(&self, mb: &mut MeshBuilder, refinement: u32) {
        let e = &self.ext;
        let c = &self.c;
        let (wa, h, p) = (c.wa, c.h, c.p);
        let step = scaled(p / 24.0, refinement);
        let nz = Extrusion::nz(refinement);
        let x = wa / 2.0;
        let ax = &e.axis;
        extrude(mb, &e.arc([-x, h], [x, h], c.theta_a, step), ax, nz, 0, PRIMARY);
        extrude(mb, &e.arc([x, -h], [-x, -h], c.theta_a, step), ax, nz, 0, PRIMARY);
        extrude(mb, &e.arc([x, h], [p - x, h], c.theta_b(), step), ax, nz, 0, INNER);
        extrude(mb, &e.arc([p - x, -h], [x, -h], c.theta_b(), step), ax, nz, 0, INNER);
        extrude(mb, &e.arc([x, h], [x, -h], c.psi(), step), ax, nz, INNER, PRIMARY);
        extrude(mb, &e.arc([-x, -h], [-x, h], c.psi(), step), ax, nz, INNER, PRIMARY);
    }
}
