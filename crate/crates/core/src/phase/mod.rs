//! Volume-triple sweeps: relax every candidate per cell of the simplex
//! grid, keep the least area, and write the result as CSV or SVG.
//!
//! The area functional does not distinguish the complement from the two
//! enclosed regions, so every candidate is tried with each of the three
//! volumes in the complement role and the work is done once per sorted
//! triple. Mirrored cells copy the result.

mod csv_io;
mod svg;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

pub use csv_io::{export_csv, format_sig, read_csv, to_csv_string, CsvRow, CsvTable};
pub use svg::{render_ternary, ternary_svg};

use crate::candidates::{build, CandidateKind, CandidateSpec};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::mesh::Mesh;
use crate::relax::{project_volumes, relax, RelaxConfig, Stage, StageOp};

/// Areas within this much of the row minimum share the win.
pub const CO_WINNER_TOL: f64 = 2e-4;

/// Largest relative change of either target for which a neighbour's mesh
/// is reused; bigger jumps distort the seed more than a rebuild costs.
pub const WARM_MAX_CHANGE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Grid increment as a fraction of the cell volume.
    pub step: f64,
    /// Finer increment used around phase boundaries; `None` skips the pass.
    pub boundary_refine_step: Option<f64>,
    pub candidates: Vec<CandidateKind>,
    pub relax: RelaxConfig,
    pub warm_start: bool,
    /// Mesh resolution handed to the candidate constructors.
    pub refinement: u32,
}

impl GridSpec {
    /// Grid at `step` with every candidate, the sweep schedule and no
    /// boundary pass.
    pub fn new(step: f64) -> Self {
        GridSpec {
            step,
            boundary_refine_step: None,
            candidates: CandidateKind::ALL.to_vec(),
            relax: sweep_schedule(),
            warm_start: false,
            refinement: 0,
        }
    }

    /// Resolution 0.01 with a 0.005 pass along boundaries.
    pub fn fine() -> Self {
        GridSpec { boundary_refine_step: Some(0.005), ..GridSpec::new(0.01) }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.step > 0.0 && self.step <= 1.0 / 3.0) {
            return bad(format!("step {} must lie in (0, 1/3]", self.step));
        }
        if units(self.step).is_none() {
            return bad(format!("step {} must divide 1", self.step));
        }
        if let Some(f) = self.boundary_refine_step {
            if !(f > 0.0 && f <= self.step) {
                return bad(format!("boundary refine step {f} must lie in (0, step]"));
            }
            let ratio = self.step / f;
            if (ratio - ratio.round()).abs() > 1e-9 {
                return bad(format!("boundary refine step {f} must divide the step {}", self.step));
            }
        }
        if self.candidates.is_empty() {
            return bad("no candidates selected".into());
        }
        self.relax.check()
    }

    /// Index units per unit volume fraction, and index units per grid step.
    fn resolution(&self) -> (u32, u32) {
        let fine = self.boundary_refine_step.unwrap_or(self.step);
        let n = units(fine).expect("checked");
        (n, (self.step / fine).round() as u32)
    }
}

/// Two short stages: one refinement, then plain descent.
pub fn sweep_schedule() -> RelaxConfig {
    RelaxConfig {
        schedule: vec![Stage::new(60, &[StageOp::Refine]), Stage::new(150, &[StageOp::None])],
        ..RelaxConfig::default()
    }
}

fn units(step: f64) -> Option<u32> {
    let n = 1.0 / step;
    ((n - n.round()).abs() < 1e-9 * n).then(|| n.round() as u32)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Entry {
    Area(f64),
    NotApplicable,
    Failed(String),
}

impl Entry {
    pub fn area(&self) -> Option<f64> {
        match self {
            Entry::Area(a) => Some(*a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRow {
    /// Volumes of region 1, region 2 and the complement.
    pub v: [f64; 3],
    /// Grid coordinates of (v1, v2) in units of the finest step.
    pub index: [u32; 2],
    /// Added by the boundary pass rather than the regular grid.
    pub refined: bool,
    /// One entry per table candidate, in table order.
    pub entries: Vec<Entry>,
    pub winners: Vec<CandidateKind>,
}

impl PhaseRow {
    pub fn min_area(&self) -> Option<f64> {
        self.entries.iter().filter_map(Entry::area).min_by(f64::total_cmp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseTable {
    pub det: f64,
    pub step: f64,
    /// Index units per volume fraction; `units / ratio` steps span the simplex.
    pub units: u32,
    /// Index units per regular grid step.
    pub ratio: u32,
    pub candidates: Vec<CandidateKind>,
    /// Every cell, both orderings, sorted by (v1, v2).
    pub rows: Vec<PhaseRow>,
}

impl PhaseTable {
    pub fn regular_rows(&self) -> impl Iterator<Item = &PhaseRow> {
        self.rows.iter().filter(|r| !r.refined)
    }

    pub fn row_at(&self, index: [u32; 2]) -> Option<&PhaseRow> {
        self.rows.binary_search_by(|r| r.index.cmp(&index)).ok().map(|i| &self.rows[i])
    }

    /// Panics unless winners are symmetric under swapping the two regions
    /// and every winner is a row minimum.
    pub fn assert_invariants(&self) {
        for r in &self.rows {
            let m = self.row_at([r.index[1], r.index[0]]).expect("mirrored cell present");
            assert_eq!(r.winners, m.winners, "winner symmetry at {:?}", r.v);
            if let Some(min) = r.min_area() {
                for w in &r.winners {
                    let i = self.candidates.iter().position(|c| c == w).expect("winner is a table candidate");
                    assert!(r.entries[i].area().expect("winner has an area") <= min + CO_WINNER_TOL);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinnerLookup {
    pub winners: Vec<CandidateKind>,
    /// Volumes of the cell actually read.
    pub at: [f64; 2],
    /// False when the query was off the grid and the nearest cell was used.
    pub exact: bool,
}

/// Stored winner of the cell nearest to `(v1, v2)`.
pub fn winner(table: &PhaseTable, v1: f64, v2: f64) -> Option<WinnerLookup> {
    // canonical order first so the lookup is symmetric even on distance ties
    let (a, b) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
    let d = |r: &PhaseRow| (r.v[0] - a).powi(2) + (r.v[1] - b).powi(2);
    let row = table.rows.iter().filter(|r| r.v[0] <= r.v[1]).min_by(|x, y| d(x).total_cmp(&d(y)))?;
    let exact = d(row).sqrt() <= 1e-9 * table.det;
    let at = if v1 <= v2 { [row.v[0], row.v[1]] } else { [row.v[1], row.v[0]] };
    Some(WinnerLookup { winners: row.winners.clone(), at, exact })
}

type Triple = [u32; 3];

fn sorted(mut t: Triple) -> Triple {
    t.sort_unstable();
    t
}

/// Relax every candidate on every cell of the simplex grid.
pub fn sweep(spec: &GridSpec, lattice: &Lattice) -> Result<PhaseTable> {
    spec.check()?;
    let (n, ratio) = spec.resolution();
    let mut cells: BTreeSet<[u32; 2]> = BTreeSet::new();
    for i in (ratio..n).step_by(ratio as usize) {
        for j in (ratio..n).step_by(ratio as usize) {
            if i + j + ratio <= n {
                cells.insert([i, j]);
            }
        }
    }
    let mut solver = Solver { spec, lattice, n, done: HashMap::new() };
    solver.solve(&cells);

    if spec.boundary_refine_step.is_some() && ratio > 1 {
        let extra = solver.boundary_cells(&cells, ratio);
        solver.solve(&extra);
        cells.extend(extra);
    }

    let rows = cells
        .iter()
        .map(|&[i, j]| {
            let entries = solver.done[&sorted([i, j, n - i - j])].clone();
            let frac = |k: u32| k as f64 / n as f64 * lattice.det();
            PhaseRow {
                v: [frac(i), frac(j), frac(n - i - j)],
                index: [i, j],
                refined: i % ratio != 0 || j % ratio != 0,
                winners: winners_of(&spec.candidates, &entries),
                entries,
            }
        })
        .collect();
    Ok(PhaseTable { det: lattice.det(), step: spec.step, units: n, ratio, candidates: spec.candidates.clone(), rows })
}

fn winners_of(kinds: &[CandidateKind], entries: &[Entry]) -> Vec<CandidateKind> {
    let Some(min) = entries.iter().filter_map(Entry::area).min_by(f64::total_cmp) else {
        return Vec::new();
    };
    kinds.iter().zip(entries).filter(|(_, e)| e.area().is_some_and(|a| a <= min + CO_WINNER_TOL)).map(|(k, _)| *k).collect()
}

struct Solver<'a> {
    spec: &'a GridSpec,
    lattice: &'a Lattice,
    n: u32,
    done: HashMap<Triple, Vec<Entry>>,
}

impl Solver<'_> {
    fn solve(&mut self, cells: &BTreeSet<[u32; 2]>) {
        let todo: BTreeSet<Triple> =
            cells.iter().map(|&[i, j]| sorted([i, j, self.n - i - j])).filter(|t| !self.done.contains_key(t)).collect();
        let results: Vec<(Triple, Vec<Entry>)> = if self.spec.warm_start {
            // rows of equal smallest volume run in sequence, each cell seeded
            // by its predecessor in the row
            let mut rows: BTreeMap<u32, Vec<Triple>> = BTreeMap::new();
            for t in todo {
                rows.entry(t[0]).or_default().push(t);
            }
            let rows: Vec<Vec<Triple>> = rows.into_values().collect();
            rows.par_iter().flat_map_iter(|row| self.solve_row(row)).collect()
        } else {
            let todo: Vec<Triple> = todo.into_iter().collect();
            todo.par_iter().map(|&t| (t, self.solve_triple(t, None).0)).collect()
        };
        self.done.extend(results);
    }

    fn solve_row(&self, row: &[Triple]) -> Vec<(Triple, Vec<Entry>)> {
        let mut prev: Option<(Triple, Seeds)> = None;
        let mut out = Vec::with_capacity(row.len());
        for &t in row {
            let seeds = prev.as_ref().filter(|(p, _)| adjacent(p, &t)).map(|(_, s)| s);
            let (entries, next) = self.solve_triple(t, seeds);
            prev = Some((t, next));
            out.push((t, entries));
        }
        out
    }

    /// Entries for one sorted triple, plus the relaxed meshes that can seed
    /// the next cell.
    fn solve_triple(&self, t: Triple, seeds: Option<&Seeds>) -> (Vec<Entry>, Seeds) {
        let vol = |k: u32| k as f64 / self.n as f64 * self.lattice.det();
        let mut roles: Vec<(usize, [f64; 2])> = Vec::new();
        for c in 0..3 {
            // the complement takes volume c; equal volumes give repeated roles
            if (0..c).any(|d| t[d] == t[c]) {
                continue;
            }
            let rest: Vec<u32> = (0..3).filter(|&d| d != c).map(|d| t[d]).collect();
            roles.push((c, [vol(rest[0]), vol(rest[1])]));
        }
        let mut next = Seeds::new();
        let entries = self
            .spec
            .candidates
            .iter()
            .map(|&kind| {
                let mut best: Option<f64> = None;
                let mut failure = None;
                for &(c, [v1, v2]) in &roles {
                    let seed = seeds.and_then(|s| s.get(&(kind, c)));
                    match self.relax_one(kind, v1, v2, seed) {
                        Ok(mesh) => {
                            let a = crate::metrics::total_area(&mesh);
                            if best.is_none_or(|b| a < b) {
                                best = Some(a);
                            }
                            next.insert((kind, c), mesh);
                        }
                        Err(Error::Infeasible(_) | Error::UnsupportedLattice(_)) => {}
                        Err(e) => failure = Some(e.to_string()),
                    }
                }
                match (best, failure) {
                    (Some(a), _) => Entry::Area(a),
                    (None, Some(e)) => Entry::Failed(e),
                    (None, None) => Entry::NotApplicable,
                }
            })
            .collect();
        (entries, next)
    }

    fn relax_one(&self, kind: CandidateKind, v1: f64, v2: f64, seed: Option<&Mesh>) -> Result<Mesh> {
        let spec = CandidateSpec::new(kind, self.lattice.clone(), v1, v2).with_refinement(self.spec.refinement);
        if let Some(seed) = seed {
            // the plan must still be feasible here
            crate::candidates::analytic_area(&spec)?;
            let [s1, s2] = seed.targets();
            let near = |a: f64, b: f64| (a - b).abs() <= WARM_MAX_CHANGE * a.min(b);
            if near(s1.max(s2), v1.max(v2)) && near(s1.min(s2), v1.min(v2)) {
                if let Ok(m) = self.warm(seed, v1, v2) {
                    return Ok(m);
                }
            }
        }
        let m = build(&spec)?;
        Ok(relax(&m, &self.spec.relax)?.0)
    }

    fn warm(&self, seed: &Mesh, v1: f64, v2: f64) -> Result<Mesh> {
        // keep the primary role on the larger volume, as a fresh build would
        let [s1, s2] = seed.targets();
        let mut m = if (s1 >= s2) == (v1 >= v2) { seed.clone() } else { seed.permute_regions([0, 2, 1]) };
        m.body_mut(1).target = v1;
        m.body_mut(2).target = v2;
        let tol = self.spec.relax.volume_tol_for(&m);
        project_volumes(&mut m, tol)?;
        let mut cfg = self.spec.relax.clone();
        // the seed is already refined; tidy it instead so that quality does
        // not decay along a chain of reuses
        for s in &mut cfg.schedule {
            if s.then.contains(&StageOp::Refine) {
                s.then = vec![StageOp::Equiangulate, StageOp::Average];
            }
        }
        Ok(relax(&m, &cfg)?.0)
    }

    /// Fine cells within half a step of any regular cell whose winners differ
    /// from a neighbour's.
    fn boundary_cells(&self, cells: &BTreeSet<[u32; 2]>, ratio: u32) -> BTreeSet<[u32; 2]> {
        let n = self.n as i64;
        let r = ratio as i64;
        let win = |i: i64, j: i64| -> Option<Vec<CandidateKind>> {
            let k = n - i - j;
            (i > 0 && j > 0 && k > 0).then(|| winners_of(&self.spec.candidates, &self.done[&sorted([i as u32, j as u32, k as u32])]))
        };
        let mut out = BTreeSet::new();
        for &[i, j] in cells {
            let (i, j) = (i as i64, j as i64);
            let me = win(i, j);
            let boundary = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)].iter().any(|&(di, dj)| {
                let (a, b) = (i + di * r, j + dj * r);
                cells.contains(&[a.max(0) as u32, b.max(0) as u32]) && a > 0 && b > 0 && win(a, b) != me
            });
            if !boundary {
                continue;
            }
            let half = r / 2;
            for di in -half..=half {
                for dj in -half..=half {
                    let (a, b) = (i + di, j + dj);
                    if a > 0 && b > 0 && n - a - b > 0 && (a % r != 0 || b % r != 0) {
                        out.insert([a as u32, b as u32]);
                    }
                }
            }
        }
        out
    }
}

type Seeds = HashMap<(CandidateKind, usize), Mesh>;

fn adjacent(a: &Triple, b: &Triple) -> bool {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).sum::<u32>() <= 2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(index: [u32; 2], v: [f64; 3], areas: &[Option<f64>], kinds: &[CandidateKind]) -> PhaseRow {
        let entries: Vec<Entry> = areas.iter().map(|a| a.map_or(Entry::NotApplicable, Entry::Area)).collect();
        PhaseRow { v, index, refined: false, winners: winners_of(kinds, &entries), entries }
    }

    pub(crate) fn toy_table() -> PhaseTable {
        use CandidateKind::*;
        let kinds = vec![StandardDoubleBubble, DoubleSlab];
        let rows = vec![
            row([1, 1], [0.25, 0.25, 0.5], &[Some(2.0), Some(3.0)], &kinds),
            row([1, 2], [0.25, 0.5, 0.25], &[None, Some(3.0)], &kinds),
            row([2, 1], [0.5, 0.25, 0.25], &[None, Some(3.0)], &kinds),
        ];
        PhaseTable { det: 1.0, step: 0.25, units: 4, ratio: 1, candidates: kinds, rows }
    }

    #[test]
    fn grid_spec_checks() {
        assert!(GridSpec::new(0.05).check().is_ok());
        assert!(GridSpec::fine().check().is_ok());
        assert!(GridSpec::new(0.4).check().is_err());
        assert!(GridSpec::new(0.03).check().is_err());
        let mut g = GridSpec::new(0.05);
        g.boundary_refine_step = Some(0.1);
        assert!(g.check().is_err());
        g.boundary_refine_step = Some(0.02);
        assert!(g.check().is_err());
    }

    #[test]
    fn co_winners_within_tolerance() {
        use CandidateKind::*;
        let kinds = [DoubleSlab, HexagonalHoneycomb, StandardDoubleBubble];
        let e = [Entry::Area(3.0), Entry::Area(3.0 + 1e-4), Entry::Area(3.1)];
        assert_eq!(winners_of(&kinds, &e), vec![DoubleSlab, HexagonalHoneycomb]);
        assert!(winners_of(&kinds, &[Entry::NotApplicable, Entry::NotApplicable, Entry::NotApplicable]).is_empty());
    }

    #[test]
    fn winner_lookup_is_symmetric_and_flags_off_grid() {
        let t = toy_table();
        let w = winner(&t, 0.25, 0.25).unwrap();
        assert!(w.exact);
        assert_eq!(w.winners, vec![CandidateKind::StandardDoubleBubble]);
        let a = winner(&t, 0.27, 0.49).unwrap();
        let b = winner(&t, 0.49, 0.27).unwrap();
        assert!(!a.exact);
        assert_eq!(a.winners, b.winners);
        assert_eq!(a.at, [0.25, 0.5]);
        assert_eq!(b.at, [0.5, 0.25]);
    }

    #[test]
    fn toy_sweep_has_a_winner_everywhere() {
        let l = Lattice::cubic(1.0).unwrap();
        let t = sweep(&GridSpec::new(0.25), &l).unwrap();
        assert_eq!(t.rows.len(), 3);
        for r in &t.rows {
            assert!(!r.winners.is_empty(), "{:?}", r.v);
        }
        t.assert_invariants();
    }

    #[test]
    fn boundary_pass_adds_refined_cells() {
        let l = Lattice::cubic(1.0).unwrap();
        let mut g = GridSpec::new(0.125);
        g.boundary_refine_step = Some(0.0625);
        g.candidates = vec![CandidateKind::DoubleCylinder, CandidateKind::DoubleSlab];
        let t = sweep(&g, &l).unwrap();
        assert!(t.rows.iter().any(|r| r.refined));
        assert_eq!(t.regular_rows().count(), 21);
        t.assert_invariants();
    }
}
