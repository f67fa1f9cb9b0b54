use std::f64::consts::{FRAC_PI_3, PI, TAU};

use super::closed::cap_volume;
use super::surface::{cap, extrude, grid, punctured_square, ring_list, rings, segments, sides, Frame, Sides};
use super::{fit, rim_count, scaled, Plan, INNER, PRIMARY};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeKind, Vec3};
use crate::mesh::{MeshBuilder, Region};

/// Walls parallel to the pair of periods spanning the smallest face; ties
/// prefer the face normal to the last period.
struct Layers {
    lattice: Lattice,
    i: usize,
    j: usize,
    k: usize,
}

impl Layers {
    fn new(l: &Lattice) -> Self {
        let mut k = 2;
        for c in [1, 0] {
            if l.face_area(c) < l.face_area(k) - 1e-12 {
                k = c;
            }
        }
        Layers { lattice: l.clone(), i: (k + 1) % 3, j: (k + 2) % 3, k }
    }

    fn point(&self, s: f64, t: f64, z: f64) -> Vec3 {
        let mut u = Vec3::zeros();
        u[self.i] = s;
        u[self.j] = t;
        u[self.k] = z;
        self.lattice.to_ambient(&u)
    }

    /// Unit normal of the walls pointing towards increasing `z`.
    fn normal(&self) -> Vec3 {
        self.lattice.inverse().row(self.k).transpose().normalize()
    }

    fn area(&self) -> f64 {
        self.lattice.face_area(self.k)
    }

    /// Distance between successive walls per unit of `z`.
    fn width(&self) -> f64 {
        self.lattice.width(self.k)
    }

    /// Smallest in-plane width of a wall.
    fn span(&self) -> f64 {
        let a = self.area();
        (a / self.lattice.period(self.i).norm()).min(a / self.lattice.period(self.j).norm())
    }

    fn frame(&self, z: f64) -> Frame {
        let n = self.normal();
        Frame::new(self.point(0.5, 0.5, z), &n, &self.lattice.period(self.i))
    }

    fn wall(&self, mb: &mut MeshBuilder, z: f64, n: usize, s: Sides) {
        let nrm = self.normal();
        grid(mb, n, n, |a, b| self.point(a, b, z), move |_| nrm, s);
    }

    /// Wall at height `z` with a round hole of radius `rho` at its centre.
    fn holed_wall(&self, mb: &mut MeshBuilder, z: f64, rho: f64, m: usize, h_out: f64, s: Sides) {
        let f = self.frame(z);
        let (ai, aj) = (self.lattice.period(self.i) * 0.5, self.lattice.period(self.j) * 0.5);
        let m2 = nalgebra::Matrix2::new(ai.dot(&f.e1), aj.dot(&f.e1), ai.dot(&f.e2), aj.dot(&f.e2));
        let inv = m2.try_inverse().expect("wall periods span the plane");
        let hole = move |b: f64| {
            let x = inv * nalgebra::Vector2::new(rho * b.cos(), rho * b.sin());
            [x[0], x[1]]
        };
        let map = move |x: [f64; 2], _t: f64, _b: f64| f.o + ai * x[0] + aj * x[1];
        let nrm = f.e3;
        punctured_square(mb, hole, map, m, TAU * rho / m as f64, h_out, move |_| nrm, s);
    }

    fn grid_count(&self, refinement: u32) -> usize {
        4 << refinement.min(16)
    }
}

pub(super) struct Slabs {
    layers: Layers,
    z: [f64; 3],
}

impl Slabs {
    pub fn plan(l: &Lattice, big: f64, small: f64) -> Result<Self> {
        let det = l.det();
        let f = (big + small) / det;
        let z0 = 0.5 * (1.0 - f);
        Ok(Slabs { layers: Layers::new(l), z: [z0, z0 + big / det, z0 + f] })
    }
}

impl Plan for Slabs {
    fn analytic(&self) -> Option<(f64, &'static str)> {
        Some((3.0 * self.layers.area(), "three flat walls parallel to the smallest face"))
    }

    fn emit(&self, mb: &mut MeshBuilder, refinement: u32) {
        let n = self.layers.grid_count(refinement);
        self.layers.wall(mb, self.z[0], n, sides(PRIMARY, 0));
        self.layers.wall(mb, self.z[1], n, sides(INNER, PRIMARY));
        self.layers.wall(mb, self.z[2], n, sides(0, INNER));
    }
}

/// Slab carrying a lens blister in its upper wall; the caps meet the wall
/// at 120 degrees.
pub(super) struct Blister {
    layers: Layers,
    z: [f64; 2],
    rim: f64,
}

impl Blister {
    pub fn plan(l: &Lattice, big: f64, small: f64) -> Result<Self> {
        let layers = Layers::new(l);
        let a = FRAC_PI_3;
        // rim radius from the lens volume: two congruent caps
        let rim = (small / (2.0 * cap_volume(1.0, a))).cbrt();
        let cap_v = cap_volume(rim, a);
        let thick = (big + cap_v) / layers.area();
        let height = rim * (a / 2.0).tan();
        fit("slab lens rim radius", rim, 0.45 * layers.span())?;
        fit("slab lens blister depth", height, 0.9 * thick)?;
        fit("slab lens blister height", height, 0.9 * (layers.width() - thick))?;
        let dz = thick / layers.width();
        let z0 = 0.5 * (1.0 - dz) - 0.25 * (1.0 - dz);
        Ok(Blister { layers, z: [z0, z0 + dz], rim })
    }
}

impl Plan for Blister {
    fn emit(&self, mb: &mut MeshBuilder, refinement: u32) {
        let ly = &self.layers;
        let m = rim_count(refinement);
        let h = TAU * self.rim / m as f64;
        let h_out = scaled(ly.span() / 6.0, refinement).max(h);
        ly.wall(mb, self.z[0], ly.grid_count(refinement), sides(PRIMARY, 0));
        ly.holed_wall(mb, self.z[1], self.rim, m, h_out, sides(0, PRIMARY));
        let f = ly.frame(self.z[1]);
        let k = self.rim / FRAC_PI_3.tan();
        let (top, bottom) = (f.o - f.e3 * k, f.o + f.e3 * k);
        cap(mb, &f, self.rim, FRAC_PI_3, 1.0, m, h, move |p| p - top, sides(0, INNER));
        cap(mb, &f, self.rim, FRAC_PI_3, -1.0, m, h, move |p| bottom - p, sides(INNER, PRIMARY));
    }
}

/// Slab with a round column bubble spanning from one wall to the other.
pub(super) struct Drum {
    layers: Layers,
    z: [f64; 2],
    rho: f64,
}

impl Drum {
    pub fn plan(l: &Lattice, big: f64, small: f64) -> Result<Self> {
        let layers = Layers::new(l);
        let thick = (big + small) / layers.area();
        let rho = (small / (PI * thick)).sqrt();
        fit("center bubble radius", rho, 0.45 * layers.span())?;
        let dz = thick / layers.width();
        let z0 = 0.5 * (1.0 - dz);
        Ok(Drum { layers, z: [z0, z0 + dz], rho })
    }
}

impl Plan for Drum {
    fn emit(&self, mb: &mut MeshBuilder, refinement: u32) {
        let ly = &self.layers;
        let m = rim_count(refinement);
        let h = TAU * self.rho / m as f64;
        let h_out = scaled(ly.span() / 6.0, refinement).max(h);
        let (f0, f1) = (ly.frame(self.z[0]), ly.frame(self.z[1]));
        let up = f0.e3;
        ly.holed_wall(mb, self.z[0], self.rho, m, h_out, sides(PRIMARY, 0));
        ly.holed_wall(mb, self.z[1], self.rho, m, h_out, sides(0, PRIMARY));
        cap(mb, &f0, self.rho, 0.0, 1.0, m, h, move |_| up, sides(INNER, 0));
        cap(mb, &f1, self.rho, 0.0, 1.0, m, h, move |_| up, sides(0, INNER));
        let rise = f1.o - f0.o;
        let dir = rise.normalize();
        let rho = self.rho;
        let list = ring_list(0.0, 1.0, segments(rise.norm(), h, 2), |_| m);
        let o = f0.o;
        rings(
            mb,
            &list,
            |t, g| f0.polar(0.0, rho, g) + rise * t,
            move |p| {
                let q = p - o;
                q - dir * q.dot(&dir)
            },
            sides(PRIMARY, INNER),
        );
    }
}

/// Three hexagonal columns, one per region, tiling the rhombic prism.
pub(super) struct Honeycomb {
    lattice: Lattice,
    thirds: bool,
}

impl Honeycomb {
    pub fn plan(l: &Lattice, big: f64, small: f64) -> Result<Self> {
        if !matches!(l.kind(), LatticeKind::RhombicPrism { .. }) {
            return Err(Error::Infeasible(format!("hexagonal honeycomb needs a rhombic-prism lattice, got {}", l.kind().code())));
        }
        let det = l.det();
        let third = det / 3.0;
        let vols = [big, small, det - big - small];
        let off = vols.iter().map(|v| (v - third).abs()).fold(0.0, f64::max);
        fit("hexagonal honeycomb departure from equal thirds", off, 0.05 * det)?;
        Ok(Honeycomb { lattice: l.clone(), thirds: off <= 1e-12 * det })
    }

    fn side(&self) -> f64 {
        self.lattice.period(0).norm()
    }
}

impl Plan for Honeycomb {
    fn analytic(&self) -> Option<(f64, &'static str)> {
        let h = self.lattice.period(2).norm();
        self.thirds.then(|| (3.0 * self.side() * h, "flat hexagonal prism walls"))
    }

    fn emit(&self, mb: &mut MeshBuilder, refinement: u32) {
        let l = &self.lattice;
        let s = self.side();
        let (a0, a1, a2) = (l.period(0), l.period(1), l.period(2));
        let origin = l.to_ambient(&Vec3::new(0.05, 0.05, 0.0));
        let step = (a0 + a1) / 3.0;
        let labels: [Region; 3] = [0, PRIMARY, INNER];
        let coset = |p: &Vec3| -> usize {
            let u = l.to_lattice(&(p - origin));
            (0..3)
                .find(|&m| {
                    let d = u[0] - m as f64 / 3.0;
                    let e = u[1] - m as f64 / 3.0;
                    (d - d.round()).abs() < 1e-6 && (e - e.round()).abs() < 1e-6
                })
                .expect("hexagon centre on the refined lattice")
        };
        let (ell, d) = (s / 3.0, s / 3f64.sqrt());
        let along = 2usize << refinement.min(16);
        let nz = 4usize << refinement.min(16);
        let dir = |deg: f64| {
            let r = deg.to_radians();
            Vec3::new(r.cos(), r.sin(), 0.0)
        };
        for m in 0..3 {
            let c = origin + step * m as f64;
            for q in 0..3 {
                let theta = 30.0 + 60.0 * q as f64;
                let nb = c + dir(theta) * d;
                let (v1, v2) = (c + dir(theta - 30.0) * ell, c + dir(theta + 30.0) * ell);
                let curve: Vec<Vec3> = (0..=along).map(|i| v1 + (v2 - v1) * (i as f64 / along as f64)).collect();
                extrude(mb, &curve, &a2, nz, labels[m], labels[coset(&nb)]);
            }
        }
    }
}
