//! Structural diagnostics: wall angles along triple curves, volume-halving
//! plane pairs and a midpoint-concavity scan of phase tables.

mod angles;
mod clip;

use std::collections::HashMap;

use serde::Serialize;

pub use angles::{plateau_angles, tetrahedral_angle, AngleReport, AngleSummary};
pub use clip::{
    bisecting_planes, clipped_volume, clipped_volume_with, containing_cylinder, default_eps, Bisection, Cylinder, PlanePair, HALVING_TOL,
};

use crate::phase::PhaseTable;

/// Allowance for relaxation noise in the concavity scan.
pub const CONCAVITY_EPS: f64 = 2e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityViolation {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub mid: [f64; 2],
    /// Mean of the end areas minus the midpoint area.
    pub deficit: f64,
}

/// Grid-aligned triples whose midpoint area falls below the mean of the
/// ends by more than `eps`. Only regular cells take part.
pub fn concavity_check(table: &PhaseTable, eps: f64) -> Vec<ConcavityViolation> {
    let r = table.ratio;
    let cells: Vec<([i64; 2], [f64; 2], f64)> = table
        .regular_rows()
        .filter_map(|row| row.min_area().map(|a| ([(row.index[0] / r) as i64, (row.index[1] / r) as i64], [row.v[0], row.v[1]], a)))
        .collect();
    let lookup: HashMap<[i64; 2], usize> = cells.iter().enumerate().map(|(k, c)| (c.0, k)).collect();
    let mut out = Vec::new();
    for (x, (ix, vx, ax)) in cells.iter().enumerate() {
        for (iy, vy, ay) in &cells[x + 1..] {
            if (ix[0] + iy[0]) % 2 != 0 || (ix[1] + iy[1]) % 2 != 0 {
                continue;
            }
            let Some(&m) = lookup.get(&[(ix[0] + iy[0]) / 2, (ix[1] + iy[1]) / 2]) else { continue };
            let deficit = 0.5 * (ax + ay) - cells[m].2;
            if deficit > eps {
                out.push(ConcavityViolation { a: *vx, b: *vy, mid: cells[m].1, deficit });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::CandidateKind;
    use crate::phase::{Entry, PhaseRow};

    fn table(area: impl Fn(u32, u32) -> f64) -> PhaseTable {
        let mut rows = Vec::new();
        for i in 1..8 {
            for j in 1..8 {
                if i + j < 8 {
                    let e = vec![Entry::Area(area(i, j))];
                    let v = [i as f64 / 8.0, j as f64 / 8.0, (8 - i - j) as f64 / 8.0];
                    rows.push(PhaseRow { v, index: [i, j], refined: false, entries: e, winners: vec![CandidateKind::DoubleSlab] });
                }
            }
        }
        PhaseTable { det: 1.0, step: 0.125, units: 8, ratio: 1, candidates: vec![CandidateKind::DoubleSlab], rows }
    }

    #[test]
    fn constant_table_is_concave() {
        assert!(concavity_check(&table(|_, _| 3.0), CONCAVITY_EPS).is_empty());
    }

    #[test]
    fn spike_is_reported() {
        let t = table(|i, j| if (i, j) == (2, 3) { 2.0 } else { 3.0 });
        let v = concavity_check(&t, CONCAVITY_EPS);
        assert!(!v.is_empty());
        assert!(v.iter().all(|c| c.mid == [0.25, 0.375] && (c.deficit - 1.0).abs() < 1e-12));
    }
}
