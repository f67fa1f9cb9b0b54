use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{canonicalize, Vec3};
use crate::mesh::{Mesh, Region};

const GOLDEN: f64 = 1.618_033_988_749_895;
const RETRIES: usize = 8;
const SHARD: usize = 4096;

/// Facets bucketed on a uniform grid over the unit cell in lattice
/// coordinates, for repeated point classification.
pub struct RegionLocator<'a> {
    mesh: &'a Mesh,
    n: i64,
    /// Per cell: (facet id, lattice shift of the stored lift).
    cells: Vec<Vec<(usize, [i64; 3])>>,
    lifts: Vec<[Vec3; 3]>,
    max_length: f64,
}

impl<'a> RegionLocator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let nf = mesh.facets.len();
        let n = ((mesh.facet_count() as f64 / 2.0).cbrt().ceil() as i64).clamp(1, 48);
        let mut cells = vec![Vec::new(); (n * n * n) as usize];
        let mut lifts = vec![[Vec3::zeros(); 3]; nf];
        for (fi, _) in mesh.live_facets() {
            let q = mesh.facet_lift(fi);
            lifts[fi] = q;
            let mut lo = [0i64; 3];
            let mut hi = [0i64; 3];
            for k in 0..3 {
                let a = q.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
                let b = q.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
                lo[k] = (a * n as f64 - 1e-9).floor() as i64;
                hi[k] = (b * n as f64 + 1e-9).floor() as i64;
            }
            for i in lo[0]..=hi[0] {
                for j in lo[1]..=hi[1] {
                    for k in lo[2]..=hi[2] {
                        let c = [i, j, k];
                        let idx = cell_index(n, c);
                        let shift = [i.div_euclid(n), j.div_euclid(n), k.div_euclid(n)];
                        cells[idx].push((fi, shift));
                    }
                }
            }
        }
        let l = &mesh.lattice;
        let diam = (0..3).map(|k| l.period(k).norm()).sum::<f64>();
        RegionLocator { mesh, n, cells, lifts, max_length: 40.0 * diam }
    }

    /// Region containing `x` (ambient), from the first wall hit by a ray.
    pub fn locate(&self, x: &Vec3) -> Result<Region> {
        let base = Vec3::new(1.0, GOLDEN, GOLDEN * GOLDEN).normalize();
        let mut last = String::new();
        let nudge = 1e-9 * self.mesh.lattice.shortest_period();
        for attempt in 0..=RETRIES {
            let (dir, start) = if attempt == 0 {
                (base, *x)
            } else {
                let a = attempt as f64;
                let wobble = Vec3::new((a * 1.7).sin(), (a * 2.3).cos(), (a * 0.9).sin());
                ((base + wobble * 0.2).normalize(), x + wobble * (nudge * a))
            };
            match self.cast(&start, &dir) {
                Ok(r) => return Ok(r),
                Err(msg) => last = msg,
            }
        }
        Err(Error::Classification(format!("ambiguous after {RETRIES} perturbed retries: {last}")))
    }

    fn cast(&self, x: &Vec3, dir: &Vec3) -> std::result::Result<Region, String> {
        let l = &self.mesh.lattice;
        let (o, _) = canonicalize(&l.to_lattice(x));
        let d = l.inverse() * dir;
        let n = self.n as f64;
        // walk cells in lattice coordinates scaled by n
        let p0 = o * n;
        let dn = d * n;
        let mut cell = [p0[0].floor() as i64, p0[1].floor() as i64, p0[2].floor() as i64];
        let step: [i64; 3] = [0, 1, 2].map(|k| if dn[k] > 0.0 { 1 } else { -1 });
        let mut t_max = [0.0f64; 3];
        let mut t_delta = [0.0f64; 3];
        for k in 0..3 {
            if dn[k] == 0.0 {
                t_max[k] = f64::INFINITY;
                t_delta[k] = f64::INFINITY;
            } else {
                let next = if step[k] > 0 { cell[k] as f64 + 1.0 } else { cell[k] as f64 };
                t_max[k] = (next - p0[k]) / dn[k];
                t_delta[k] = 1.0 / dn[k].abs();
            }
        }
        let mut t_enter = 0.0;
        while t_enter < self.max_length {
            let t_exit = t_max[0].min(t_max[1]).min(t_max[2]);
            let idx = cell_index(self.n, cell);
            let torus_shift = [0, 1, 2].map(|k| cell[k].div_euclid(self.n));
            let mut best: Option<(f64, Region)> = None;
            for &(fi, shift) in &self.cells[idx] {
                let off = Vec3::new(
                    (torus_shift[0] - shift[0]) as f64,
                    (torus_shift[1] - shift[1]) as f64,
                    (torus_shift[2] - shift[2]) as f64,
                );
                let q = self.lifts[fi].map(|p| p + off);
                if let Some((t, forward)) = intersect(&o, &d, &q)? {
                    if t <= t_exit + 1e-12 && best.is_none_or(|(bt, _)| t < bt) {
                        let f = self.mesh.facet(fi);
                        // moving along the normal means leaving `back`
                        best = Some((t, if forward { f.back } else { f.front }));
                    }
                }
            }
            if let Some((_, r)) = best {
                return Ok(r);
            }
            let k = if t_max[0] <= t_max[1] && t_max[0] <= t_max[2] {
                0
            } else if t_max[1] <= t_max[2] {
                1
            } else {
                2
            };
            cell[k] += step[k];
            t_enter = t_max[k];
            t_max[k] += t_delta[k];
        }
        Err("ray left the search radius without hitting a wall".into())
    }
}

fn cell_index(n: i64, c: [i64; 3]) -> usize {
    let i = c[0].rem_euclid(n);
    let j = c[1].rem_euclid(n);
    let k = c[2].rem_euclid(n);
    ((i * n + j) * n + k) as usize
}

/// Ray/triangle intersection in lattice coordinates. Returns the ray
/// parameter and whether the ray runs along the facet normal. Grazing
/// hits are reported as errors so the caller retries.
fn intersect(o: &Vec3, d: &Vec3, q: &[Vec3; 3]) -> std::result::Result<Option<(f64, bool)>, String> {
    let e1 = q[1] - q[0];
    let e2 = q[2] - q[0];
    let p = d.cross(&e2);
    let det = e1.dot(&p);
    let scale = e1.norm() * e2.norm() * d.norm();
    if det.abs() <= 1e-12 * scale {
        // parallel: only a problem if the ray lies in the plane
        let nrm = e1.cross(&e2);
        if nrm.norm() > 0.0 && ((o - q[0]).dot(&nrm)).abs() <= 1e-12 * nrm.norm() {
            return Err("ray runs inside a facet plane".into());
        }
        return Ok(None);
    }
    let inv = 1.0 / det;
    let s = o - q[0];
    let b1 = s.dot(&p) * inv;
    let qv = s.cross(&e1);
    let b2 = d.dot(&qv) * inv;
    let t = e2.dot(&qv) * inv;
    let eps = 1e-10;
    if b1 < -eps || b2 < -eps || b1 + b2 > 1.0 + eps || t < -eps {
        return Ok(None);
    }
    if b1 < eps || b2 < eps || b1 + b2 > 1.0 - eps {
        return Err("ray grazes a facet edge".into());
    }
    if t < 1e-12 {
        return Err("point lies on a wall".into());
    }
    Ok(Some((t, det < 0.0)))
}

/// Region containing an ambient point.
pub fn point_region(mesh: &Mesh, x: &Vec3) -> Result<Region> {
    RegionLocator::new(mesh).locate(x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    /// Estimated volume of regions 0, 1, 2.
    pub volumes: [f64; 3],
    /// One standard error of each estimate.
    pub std_errors: [f64; 3],
    pub samples: usize,
    pub failures: usize,
}

/// Uniform sampling of the cell; each sample is classified by ray casting.
/// Shards draw from independent streams of one seeded generator and are
/// reduced in a fixed order, so results do not depend on thread count.
pub fn monte_carlo_volumes(mesh: &Mesh, n: usize, seed: u64) -> Result<MonteCarloEstimate> {
    if n == 0 {
        return Err(Error::Precondition("monte carlo needs at least one sample".into()));
    }
    let locator = RegionLocator::new(mesh);
    let shards = n.div_ceil(SHARD);
    let counts: Vec<([usize; 3], usize)> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let m = SHARD.min(n - s * SHARD);
            let mut c = [0usize; 3];
            let mut fail = 0;
            for _ in 0..m {
                let u = Vec3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
                match locator.locate(&mesh.lattice.to_ambient(&u)) {
                    Ok(r) => c[r as usize] += 1,
                    Err(_) => fail += 1,
                }
            }
            (c, fail)
        })
        .collect();
    let mut c = [0usize; 3];
    let mut failures = 0;
    for (ci, f) in counts {
        for k in 0..3 {
            c[k] += ci[k];
        }
        failures += f;
    }
    if failures as f64 > 1e-3 * n as f64 {
        return Err(Error::OracleUnreliable { failures, samples: n });
    }
    let ok = (n - failures) as f64;
    let det = mesh.lattice.det();
    let volumes = c.map(|k| det * k as f64 / ok);
    let std_errors = c.map(|k| {
        let p = k as f64 / ok;
        det * (p * (1.0 - p) / ok).sqrt()
    });
    Ok(MonteCarloEstimate { volumes, std_errors, samples: n, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{build, CandidateKind, CandidateSpec};
    use crate::lattice::Lattice;

    fn slab() -> Mesh {
        let l = Lattice::cubic(1.0).unwrap();
        build(&CandidateSpec::new(CandidateKind::DoubleSlab, l, 1.0 / 3.0, 1.0 / 3.0)).unwrap()
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(matches!(monte_carlo_volumes(&slab(), 0, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn deterministic_for_seed() {
        let m = slab();
        let a = monte_carlo_volumes(&m, 5000, 42).unwrap();
        let b = monte_carlo_volumes(&m, 5000, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn slab_fractions_within_three_sigma() {
        let m = slab();
        let est = monte_carlo_volumes(&m, 100_000, 7).unwrap();
        for k in 0..3 {
            let err = (est.volumes[k] - 1.0 / 3.0).abs();
            assert!(err < 3.0 * est.std_errors[k], "region {k}: {est:?}");
        }
    }

    #[test]
    fn sdb_corner_is_complement() {
        let l = Lattice::cubic(1.0).unwrap();
        let m = build(&CandidateSpec::new(CandidateKind::StandardDoubleBubble, l, 0.05, 0.05)).unwrap();
        assert_eq!(point_region(&m, &Vec3::zeros()).unwrap(), 0);
    }
}
