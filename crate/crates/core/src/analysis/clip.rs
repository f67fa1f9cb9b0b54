use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{others, Lattice, Vec3};
use crate::mesh::{Mesh, Region};
use crate::metrics::region_volumes;

/// Two parallel planes containing the period `axis`, rotated by `alpha` in
/// the transverse plane. The slab between them has width `gap`; `t` slides
/// it across one full transverse period of width `2 gap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanePair {
    pub alpha: f64,
    pub t: f64,
    pub axis: usize,
    /// Ambient point on the cylinder axis.
    pub centre: [f64; 3],
    pub gap: f64,
}

impl PlanePair {
    /// The slab covering the rest of the transverse period.
    pub fn complementary(&self) -> PlanePair {
        PlanePair { t: (self.t + 0.5).rem_euclid(1.0), ..*self }
    }

    fn directions(&self, l: &Lattice) -> (Vec3, Vec3) {
        let (i, j) = others(self.axis);
        let (ei, ej) = (l.period(i).normalize(), l.period(j).normalize());
        let (s, c) = self.alpha.sin_cos();
        (ej * c - ei * s, ei * c + ej * s)
    }

    /// Signed-distance intervals of the slab that can meet a contained body.
    fn intervals(&self) -> [(f64, f64); 3] {
        let lo = (2.0 * self.t - 1.0) * self.gap;
        [-1.0, 0.0, 1.0].map(|m| (lo + 2.0 * self.gap * m, lo + 2.0 * self.gap * m + self.gap))
    }
}

/// Region boundaries unwrapped around a transverse centre, with every
/// triangle oriented outward from its region.
struct Clipper {
    lattice: Lattice,
    centre: Vec3,
    tris: [Vec<[Vec3; 3]>; 3],
}

impl Clipper {
    fn new(mesh: &Mesh, axis: usize, centre: Vec3) -> Self {
        let l = &mesh.lattice;
        let (i, j) = others(axis);
        let mut tris: [Vec<[Vec3; 3]>; 3] = Default::default();
        for (f, facet) in mesh.live_facets() {
            let mut p = mesh.facet_ambient(f);
            let u = l.to_lattice(&((p[0] + p[1] + p[2]) / 3.0 - centre));
            let shift = l.period(i) * u[i].round() + l.period(j) * u[j].round();
            for q in &mut p {
                *q -= shift;
            }
            // the normal points into the front region
            tris[facet.back as usize].push(p);
            tris[facet.front as usize].push([p[0], p[2], p[1]]);
        }
        Clipper { lattice: l.clone(), centre, tris }
    }

    /// Flux of a field tangent to the planes, so the cut faces add nothing.
    fn volume(&self, pair: &PlanePair, region: Region, eps: f64) -> f64 {
        let (n, m) = pair.directions(&self.lattice);
        let c = self.centre;
        let flux = |a: Vec3, b: Vec3, d: Vec3| {
            let g = (a + b + d) / 3.0;
            m.dot(&(g - c)) * m.dot(&(0.5 * (b - a).cross(&(d - a))))
        };
        let mut total = 0.0;
        for (lo, hi) in pair.intervals() {
            for tri in &self.tris[region as usize] {
                let poly = clip(&clip(tri, &n, &c, lo, 1.0, eps), &n, &c, hi, -1.0, eps);
                for k in 1..poly.len().saturating_sub(1) {
                    total += flux(poly[0], poly[k], poly[k + 1]);
                }
            }
        }
        total
    }
}

/// Keep the part of `poly` with `dir * (s - bound) >= 0`, where `s` is the
/// signed distance along `n`; values within `eps` of the bound count as on it.
fn clip(poly: &[Vec3], n: &Vec3, c: &Vec3, bound: f64, dir: f64, eps: f64) -> Vec<Vec3> {
    let side = |p: &Vec3| {
        let s = dir * (n.dot(&(p - c)) - bound);
        if s.abs() <= eps {
            0.0
        } else {
            s
        }
    };
    let mut out = Vec::with_capacity(poly.len() + 2);
    for k in 0..poly.len() {
        let (p, q) = (poly[k], poly[(k + 1) % poly.len()]);
        let (sp, sq) = (side(&p), side(&q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            out.push(p + (q - p) * (sp / (sp - sq)));
        }
    }
    out
}

/// On-plane tolerance used by [`clipped_volume`] and [`bisecting_planes`].
pub fn default_eps(l: &Lattice) -> f64 {
    1e-12 * l.shortest_period()
}

fn require_rectangular(l: &Lattice) -> Result<()> {
    if l.is_rectangular() {
        Ok(())
    } else {
        Err(Error::UnsupportedLattice(format!("plane pairs need a rectangular lattice, got {}", l.kind().code())))
    }
}

/// Volume of `region` inside the slab of `pair`.
pub fn clipped_volume(mesh: &Mesh, pair: &PlanePair, region: Region) -> Result<f64> {
    clipped_volume_with(mesh, pair, region, default_eps(&mesh.lattice))
}

/// As [`clipped_volume`] with an explicit on-plane tolerance.
pub fn clipped_volume_with(mesh: &Mesh, pair: &PlanePair, region: Region, eps: f64) -> Result<f64> {
    require_rectangular(&mesh.lattice)?;
    Ok(Clipper::new(mesh, pair.axis, pair.centre.into()).volume(pair, region, eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cylinder {
    pub axis: usize,
    pub centre: [f64; 3],
    /// Largest transverse distance of a surface vertex from the centre.
    pub radius: f64,
    /// Half the shorter transverse period; the radius must stay below it.
    pub limit: f64,
}

/// Narrowest cylinder around a period that holds every surface vertex, if
/// any fits.
pub fn containing_cylinder(mesh: &Mesh) -> Option<Cylinder> {
    let l = &mesh.lattice;
    let us: Vec<Vec3> = mesh.live_vertices().map(|(_, v)| v.u).collect();
    if us.is_empty() {
        return None;
    }
    let mut best: Option<Cylinder> = None;
    for axis in [2, 1, 0] {
        let (i, j) = others(axis);
        let circ_mean = |k: usize| {
            let (s, c) = us.iter().fold((0.0, 0.0), |(s, c), u| (s + (TAU * u[k]).sin(), c + (TAU * u[k]).cos()));
            s.atan2(c) / TAU
        };
        let mut mid = [circ_mean(i), circ_mean(j)];
        // recentre on the bounding box of the unwrapped coordinates
        for _ in 0..2 {
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for u in &us {
                for (a, k) in [i, j].into_iter().enumerate() {
                    let d = u[k] - mid[a] - (u[k] - mid[a]).round();
                    lo[a] = lo[a].min(d);
                    hi[a] = hi[a].max(d);
                }
            }
            mid = [mid[0] + 0.5 * (lo[0] + hi[0]), mid[1] + 0.5 * (lo[1] + hi[1])];
        }
        let radius = us
            .iter()
            .map(|u| {
                let di = u[i] - mid[0] - (u[i] - mid[0]).round();
                let dj = u[j] - mid[1] - (u[j] - mid[1]).round();
                (l.period(i) * di + l.period(j) * dj).norm()
            })
            .fold(0.0, f64::max);
        // an edge whose wrap disagrees with the unwrapped offsets winds
        // around a transverse period
        let offset = |u: &Vec3, k: usize, a: usize| u[k] - mid[a] - (u[k] - mid[a]).round();
        let winds = mesh.live_edges().any(|(_, e)| {
            let (t, h) = (&mesh.vertex(e.tail).u, &mesh.vertex(e.head).u);
            let w = e.wrap.to_vec3();
            [i, j].into_iter().enumerate().any(|(a, k)| ((h[k] + w[k] - t[k]) - (offset(h, k, a) - offset(t, k, a))).abs() > 1e-9)
        });
        if winds {
            continue;
        }
        let limit = 0.5 * l.period(i).norm().min(l.period(j).norm());
        let mut cu = Vec3::zeros();
        cu[i] = mid[0];
        cu[j] = mid[1];
        let cyl = Cylinder { axis, centre: l.to_ambient(&cu).into(), radius, limit };
        if radius < limit && best.is_none_or(|b| radius / limit < b.radius / b.limit) {
            best = Some(cyl);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bisection {
    pub planes: PlanePair,
    /// Absolute halving errors of regions 1 and 2.
    pub errors: [f64; 2],
    /// Volumes of regions 1 and 2.
    pub volumes: [f64; 2],
}

const ALPHA_SAMPLES: usize = 129;
const OFFSET_SAMPLES: usize = 64;
/// Required halving accuracy relative to each volume.
pub const HALVING_TOL: f64 = 1e-3;

/// Smallest root in [lo, hi] of `f`, located from `samples` evenly spaced
/// values and refined by bisection.
fn first_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64, samples: usize) -> Option<f64> {
    let xs: Vec<f64> = (0..=samples).map(|k| lo + (hi - lo) * k as f64 / samples as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let k = (0..samples).find(|&k| fs[k] == 0.0 || (fs[k] < 0.0) != (fs[k + 1] < 0.0))?;
    if fs[k] == 0.0 {
        return Some(xs[k]);
    }
    let (mut a, mut b, neg_a) = (xs[k], xs[k + 1], fs[k] < 0.0);
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if (f(mid) < 0.0) == neg_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}

/// A plane pair halving both enclosed volumes.
pub fn bisecting_planes(mesh: &Mesh) -> Result<Bisection> {
    require_rectangular(&mesh.lattice)?;
    let cyl = containing_cylinder(mesh)
        .ok_or_else(|| Error::Precondition("the double bubble does not lie in a cylinder around any period".into()))?;
    let clipper = Clipper::new(mesh, cyl.axis, cyl.centre.into());
    let eps = default_eps(&mesh.lattice);
    let v = region_volumes(mesh)?;
    let volumes = [v[1], v[2]];
    let pair = |alpha: f64, t: f64| PlanePair { alpha, t, axis: cyl.axis, centre: cyl.centre, gap: cyl.limit };
    let g1 = |alpha: f64, t: f64| clipper.volume(&pair(alpha, t), 1, eps) - 0.5 * volumes[0];
    // the slab half a period on holds the rest, so roots come in pairs half
    // a period apart; follow the one nearest the root at alpha = 0 so that
    // the offset stays on one branch
    let anchor = first_root(|t| g1(0.0, t), 0.0, 0.5, OFFSET_SAMPLES).unwrap_or(0.0);
    let offset = |alpha: f64| {
        let t = first_root(|t| g1(alpha, t), anchor - 0.25, anchor + 0.25, OFFSET_SAMPLES).unwrap_or(anchor).rem_euclid(1.0);
        // rem_euclid of a tiny negative root rounds up to 1
        if t < 1.0 {
            t
        } else {
            0.0
        }
    };
    let h = |alpha: f64| clipper.volume(&pair(alpha, offset(alpha)), 2, eps) - 0.5 * volumes[1];

    let step = PI / (ALPHA_SAMPLES - 1) as f64;
    let hs: Vec<f64> = (0..ALPHA_SAMPLES).map(|k| h(k as f64 * step)).collect();
    // rounding noise on an exact halving counts as a root
    let zero = 1e-12 * volumes[1];
    let k = (0..ALPHA_SAMPLES - 1).find(|&k| hs[k].abs() <= zero || (hs[k] < 0.0) != (hs[k + 1] < 0.0)).ok_or_else(|| {
        Error::Resolution(format!("no sign change of the second halving error over {ALPHA_SAMPLES} angles; sample more densely"))
    })?;
    let (mut a, mut b) = (k as f64 * step, (k + 1) as f64 * step);
    let (mut ha, mut best) = (hs[k], if hs[k].abs() <= hs[k + 1].abs() { a } else { b });
    for _ in 0..60 {
        if h(best).abs() <= 0.01 * HALVING_TOL * volumes[1] {
            break;
        }
        let mid = 0.5 * (a + b);
        let hm = h(mid);
        if (hm < 0.0) == (ha < 0.0) {
            a = mid;
            ha = hm;
        } else {
            b = mid;
        }
        best = mid;
    }
    let planes = pair(best, offset(best));
    let errors = [
        (clipper.volume(&planes, 1, eps) - 0.5 * volumes[0]).abs(),
        (clipper.volume(&planes, 2, eps) - 0.5 * volumes[1]).abs(),
    ];
    if errors[0] > HALVING_TOL * volumes[0] || errors[1] > HALVING_TOL * volumes[1] {
        return Err(Error::Resolution(format!(
            "halving errors {:.3e}, {:.3e} exceed {HALVING_TOL} of the volumes; the selected offsets jump near alpha = {best:.4}",
            errors[0], errors[1]
        )));
    }
    Ok(Bisection { planes, errors, volumes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{build, CandidateKind, CandidateSpec};
    use rand::{Rng, SeedableRng};

    fn sdb(v1: f64, v2: f64) -> Mesh {
        let l = Lattice::cubic(1.0).unwrap();
        build(&CandidateSpec::new(CandidateKind::StandardDoubleBubble, l, v1, v2)).unwrap()
    }

    #[test]
    fn far_planes_hold_all_or_nothing() {
        let m = sdb(0.02, 0.01);
        let cyl = containing_cylinder(&m).unwrap();
        let v = region_volumes(&m).unwrap();
        let p = PlanePair { alpha: 0.3, t: 0.75, axis: cyl.axis, centre: cyl.centre, gap: cyl.limit };
        let inside = clipped_volume(&m, &p, 1).unwrap();
        let outside = clipped_volume(&m, &p.complementary(), 1).unwrap();
        assert!((inside + outside - v[1]).abs() < 1e-9);
        // a slab starting beyond the bubble holds none of it
        let shifted = PlanePair { t: 0.5 + cyl.radius / (2.0 * cyl.limit) + 0.01, ..p };
        let a = clipped_volume(&m, &shifted, 1).unwrap();
        assert!(a.abs() < 1e-12 || (a - v[1]).abs() < 1e-12, "{a}");
    }

    #[test]
    fn additivity_on_random_pairs() {
        let m = sdb(0.03, 0.02);
        let cyl = containing_cylinder(&m).unwrap();
        let v = region_volumes(&m).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let p = PlanePair { alpha: rng.gen_range(0.0..PI), t: rng.gen_range(0.0..1.0), axis: cyl.axis, centre: cyl.centre, gap: cyl.limit };
            for r in [1, 2] {
                let s = clipped_volume(&m, &p, r).unwrap() + clipped_volume(&m, &p.complementary(), r).unwrap();
                assert!((s - v[r as usize]).abs() < 1e-9, "{s} vs {}", v[r as usize]);
            }
        }
    }

    #[test]
    fn symmetric_plane_halves_equal_bubble() {
        let m = sdb(0.03, 0.03);
        let b = bisecting_planes(&m).unwrap();
        for i in 0..2 {
            assert!(b.errors[i] <= HALVING_TOL * b.volumes[i]);
        }
    }

    #[test]
    fn slabs_are_not_contained() {
        let l = Lattice::cubic(1.0).unwrap();
        let m = build(&CandidateSpec::new(CandidateKind::DoubleSlab, l, 0.3, 0.3)).unwrap();
        assert!(matches!(bisecting_planes(&m), Err(Error::Precondition(_))));
    }

    #[test]
    fn skew_lattice_rejected() {
        let l = Lattice::rhombic_prism(1.0, 1.0).unwrap();
        let m = build(&CandidateSpec::new(CandidateKind::StandardDoubleBubble, l, 0.02, 0.01)).unwrap();
        let p = PlanePair { alpha: 0.0, t: 0.0, axis: 2, centre: [0.0; 3], gap: 0.5 };
        assert!(matches!(clipped_volume(&m, &p, 1), Err(Error::UnsupportedLattice(_))));
    }
}
