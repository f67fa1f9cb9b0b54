//! The catalog of double-bubble candidates in a flat three-torus.
//!
//! Every constructor lays out its surfaces with two roles: a primary body
//! (region 1) and an inner or attached body (region 2) that takes the
//! smaller volume. When the spec lists the smaller volume first, the
//! labels are swapped after construction.

mod closed;
mod flat;
mod product;
mod round;
mod surface;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use closed::{
    arc_length, band_lens, cap_area, cap_volume, double_bubble_2d, sdb_closed_form, segment_area, single_bubble_reference,
    symmetric_chain, transverse_width, BandLens, SdbClosedForm, SingleShape, SymmetricChain, TripleJunction,
};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Vec3};
use crate::mesh::{topology_signature, validate, Mesh, MeshBuilder, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CandidateKind {
    StandardDoubleBubble,
    DelauneyChain,
    CylinderLens,
    CylinderCross,
    DoubleCylinder,
    SlabLens,
    CenterBubble,
    CylinderString,
    SlabCylinder,
    DoubleSlab,
    HexagonalHoneycomb,
}

impl CandidateKind {
    pub const ALL: [CandidateKind; 11] = [
        CandidateKind::StandardDoubleBubble,
        CandidateKind::DelauneyChain,
        CandidateKind::CylinderLens,
        CandidateKind::CylinderCross,
        CandidateKind::DoubleCylinder,
        CandidateKind::SlabLens,
        CandidateKind::CenterBubble,
        CandidateKind::CylinderString,
        CandidateKind::SlabCylinder,
        CandidateKind::DoubleSlab,
        CandidateKind::HexagonalHoneycomb,
    ];

    /// Legend code.
    pub fn code(self) -> &'static str {
        match self {
            CandidateKind::StandardDoubleBubble => "SDB",
            CandidateKind::DelauneyChain => "DC",
            CandidateKind::CylinderLens => "CL",
            CandidateKind::CylinderCross => "CC",
            CandidateKind::DoubleCylinder => "2C",
            CandidateKind::SlabLens => "SL",
            CandidateKind::CenterBubble => "CB",
            CandidateKind::CylinderString => "CS",
            CandidateKind::SlabCylinder => "SC",
            CandidateKind::DoubleSlab => "2S",
            CandidateKind::HexagonalHoneycomb => "HH",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CandidateKind::StandardDoubleBubble => "Standard Double Bubble",
            CandidateKind::DelauneyChain => "Delauney Chain",
            CandidateKind::CylinderLens => "Cylinder Lens",
            CandidateKind::CylinderCross => "Cylinder Cross",
            CandidateKind::DoubleCylinder => "Double Cylinder",
            CandidateKind::SlabLens => "Slab Lens",
            CandidateKind::CenterBubble => "Center Bubble",
            CandidateKind::CylinderString => "Cylinder String",
            CandidateKind::SlabCylinder => "Slab Cylinder",
            CandidateKind::DoubleSlab => "Double Slab",
            CandidateKind::HexagonalHoneycomb => "Hexagonal Honeycomb",
        }
    }

    /// Interface components per region pair in the role frame, as sorted
    /// (Euler characteristic, wrap rank) lists for pairs (0,1), (0,2), (1,2).
    pub fn registered_shape(self) -> [Vec<(i64, usize)>; 3] {
        use CandidateKind::*;
        let disk = (1, 0);
        let tube = (0, 0);
        let strip = (0, 1);
        let torus = (0, 2);
        match self {
            StandardDoubleBubble => [vec![disk], vec![disk], vec![disk]],
            DelauneyChain => [vec![tube], vec![tube], vec![disk, disk]],
            CylinderLens => [vec![tube], vec![tube], vec![tube]],
            CylinderCross => [vec![(-1, 1)], vec![(-1, 1)], vec![disk]],
            DoubleCylinder => [vec![strip], vec![strip], vec![strip]],
            SlabLens => [vec![(-1, 2), torus], vec![disk], vec![disk]],
            CenterBubble => [vec![(-1, 2), (-1, 2)], vec![disk, disk], vec![tube]],
            CylinderString => [vec![strip, strip], vec![strip, strip], vec![strip, strip]],
            SlabCylinder => [vec![strip, torus], vec![strip], vec![strip]],
            DoubleSlab => [vec![torus], vec![torus], vec![torus]],
            HexagonalHoneycomb => [vec![strip; 3], vec![strip; 3], vec![strip; 3]],
        }
    }
}

impl fmt::Display for CandidateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for CandidateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        CandidateKind::ALL
            .into_iter()
            .find(|k| k.code().to_ascii_lowercase() == lower)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown candidate code '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSpec {
    pub kind: CandidateKind,
    pub lattice: Lattice,
    pub v1: f64,
    pub v2: f64,
    /// Number of times the base discretization is doubled.
    pub refinement: u32,
}

impl CandidateSpec {
    pub fn new(kind: CandidateKind, lattice: Lattice, v1: f64, v2: f64) -> Self {
        CandidateSpec { kind, lattice, v1, v2, refinement: 0 }
    }

    pub fn with_refinement(mut self, refinement: u32) -> Self {
        self.refinement = refinement;
        self
    }

    pub fn check(&self) -> Result<()> {
        let det = self.lattice.det();
        if !(self.v1 > 0.0 && self.v2 > 0.0 && self.v1.is_finite() && self.v2.is_finite()) {
            return Err(Error::InvalidParameter(format!("volumes must be positive, got ({}, {})", self.v1, self.v2)));
        }
        if self.v1 + self.v2 >= det {
            return Err(Error::InvalidParameter(format!(
                "volumes ({}, {}) leave no room in a cell of volume {det}",
                self.v1, self.v2
            )));
        }
        Ok(())
    }

    /// (primary, inner) volumes and whether region labels must be swapped.
    fn roles(&self) -> (f64, f64, bool) {
        if self.v1 >= self.v2 {
            (self.v1, self.v2, false)
        } else {
            (self.v2, self.v1, true)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticArea {
    pub value: Option<f64>,
    pub provenance: String,
}

impl AnalyticArea {
    pub fn is_available(&self) -> bool {
        self.value.is_some()
    }
}

/// A feasible layout: emits its sheets and knows its closed-form area.
trait Plan {
    fn analytic(&self) -> Option<(f64, &'static str)> {
        None
    }

    /// Emit sheets with region 1 in the primary role and region 2 in the
    /// inner role.
    fn emit(&self, mb: &mut MeshBuilder, refinement: u32);
}

fn plan(spec: &CandidateSpec) -> Result<Box<dyn Plan>> {
    spec.check()?;
    let (big, small, _) = spec.roles();
    let l = &spec.lattice;
    use CandidateKind::*;
    Ok(match spec.kind {
        StandardDoubleBubble => Box::new(round::Sdb::plan(l, big, small)?),
        DelauneyChain => Box::new(round::Chain::plan(l, big, small)?),
        CylinderLens => Box::new(round::TubeLens::plan(l, big, small)?),
        CylinderCross => Box::new(round::Cross::plan(l, big, small)?),
        DoubleCylinder => Box::new(product::DoubleCylinder::plan(l, big, small)?),
        SlabCylinder => Box::new(product::BandLens3::plan(l, big, small)?),
        CylinderString => Box::new(product::String3::plan(l, big, small)?),
        DoubleSlab => Box::new(flat::Slabs::plan(l, big, small)?),
        SlabLens => Box::new(flat::Blister::plan(l, big, small)?),
        CenterBubble => Box::new(flat::Drum::plan(l, big, small)?),
        HexagonalHoneycomb => Box::new(flat::Honeycomb::plan(l, big, small)?),
    })
}

/// Construct the candidate mesh, projected onto its volume targets.
pub fn build(spec: &CandidateSpec) -> Result<Mesh> {
    let p = plan(spec)?;
    let (big, small, swapped) = spec.roles();
    let det = spec.lattice.det();
    let mut mb = MeshBuilder::new(spec.lattice.clone(), [big, small]);
    p.emit(&mut mb, spec.refinement);
    let mut mesh = mb.into_raw();
    let report = validate(&mesh);
    if !report.is_valid() {
        return Err(Error::InvalidMesh(format!("{} construction: {}", spec.kind.code(), report.summary(5))));
    }
    crate::relax::project_volumes(&mut mesh, 1e-10 * det)?;
    check_shape(spec.kind, &mesh)?;
    if swapped {
        mesh = mesh.permute_regions([0, 2, 1]);
    }
    Ok(mesh)
}

fn check_shape(kind: CandidateKind, mesh: &Mesh) -> Result<()> {
    let sig = topology_signature(mesh)?;
    let found: Vec<Vec<(i64, usize)>> = sig.shape().into_iter().map(|(_, v)| v).collect();
    let want = kind.registered_shape();
    if found.as_slice() != want.as_slice() {
        return Err(Error::InvalidMesh(format!("{} construction has interface shape {found:?}, expected {want:?}", kind.code())));
    }
    Ok(())
}

/// Closed-form area of the smooth candidate, when one is implemented.
pub fn analytic_area(spec: &CandidateSpec) -> Result<AnalyticArea> {
    let p = plan(spec)?;
    Ok(match p.analytic() {
        Some((v, why)) => AnalyticArea { value: Some(v), provenance: why.to_string() },
        None => AnalyticArea { value: None, provenance: "unavailable: no closed form implemented".to_string() },
    })
}

pub(crate) fn fit(what: &str, value: f64, limit: f64) -> Result<()> {
    if value < limit {
        Ok(())
    } else {
        Err(Error::Infeasible(format!("{what} {value:.6} must be below {limit:.6}")))
    }
}

/// Centre of the fundamental cell.
pub(crate) fn cell_centre(l: &Lattice) -> Vec3 {
    l.to_ambient(&Vec3::new(0.5, 0.5, 0.5))
}

/// Period index with the shortest length; ties go to the highest index.
pub(crate) fn shortest_axis(l: &Lattice) -> usize {
    let mut best = 2;
    for k in [1, 0] {
        if l.period(k).norm() < l.period(best).norm() - 1e-12 {
            best = k;
        }
    }
    best
}

/// Smallest lattice width over the three face directions.
pub(crate) fn min_width(l: &Lattice) -> f64 {
    (0..3).map(|k| l.width(k)).fold(f64::INFINITY, f64::min)
}

pub(crate) const PRIMARY: Region = 1;
pub(crate) const INNER: Region = 2;

/// Base edge length scaled by the refinement level.
pub(crate) fn scaled(h: f64, refinement: u32) -> f64 {
    h / f64::from(1u32 << refinement.min(16))
}

pub(crate) fn rim_count(refinement: u32) -> usize {
    24 << refinement.min(16)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{region_volumes, total_area};

    fn cubic() -> Lattice {
        Lattice::cubic(1.0).unwrap()
    }

    #[test]
    fn codes_round_trip() {
        for k in CandidateKind::ALL {
            assert_eq!(k.code().parse::<CandidateKind>().unwrap(), k);
            assert_eq!(k.code().to_lowercase().parse::<CandidateKind>().unwrap(), k);
        }
        assert!("xx".parse::<CandidateKind>().is_err());
    }

    #[test]
    fn double_slab_is_three_flat_walls() {
        let m = build(&CandidateSpec::new(CandidateKind::DoubleSlab, cubic(), 1.0 / 3.0, 1.0 / 3.0)).unwrap();
        assert!((total_area(&m) - 3.0).abs() < 1e-12);
        let a = analytic_area(&CandidateSpec::new(CandidateKind::DoubleSlab, cubic(), 0.2, 0.1)).unwrap();
        assert_eq!(a.value, Some(3.0));
    }

    #[test]
    fn every_kind_builds_valid_at_representative_volumes() {
        let cases = [
            (CandidateKind::StandardDoubleBubble, 0.05, 0.03),
            (CandidateKind::DelauneyChain, 0.15, 0.1),
            (CandidateKind::CylinderLens, 0.2, 0.05),
            (CandidateKind::CylinderCross, 0.1, 0.08),
            (CandidateKind::DoubleCylinder, 0.1, 0.1),
            (CandidateKind::SlabLens, 0.4, 0.02),
            (CandidateKind::CenterBubble, 0.3, 0.05),
            (CandidateKind::CylinderString, 0.3, 0.2),
            (CandidateKind::SlabCylinder, 0.3, 0.05),
            (CandidateKind::DoubleSlab, 0.3, 0.2),
        ];
        for (kind, v1, v2) in cases {
            for (a, b) in [(v1, v2), (v2, v1)] {
                let m = build(&CandidateSpec::new(kind, cubic(), a, b)).unwrap_or_else(|e| panic!("{kind}: {e}"));
                assert!(validate(&m).is_valid());
                let v = region_volumes(&m).unwrap();
                assert!((v[1] - a).abs() < 1e-6 && (v[2] - b).abs() < 1e-6, "{kind}: {v:?}");
            }
        }
    }

    #[test]
    fn honeycomb_needs_rhombic_lattice() {
        let e = build(&CandidateSpec::new(CandidateKind::HexagonalHoneycomb, cubic(), 1.0 / 3.0, 1.0 / 3.0));
        assert!(matches!(e, Err(Error::Infeasible(_))));
    }

    #[test]
    fn honeycomb_ties_double_slab() {
        let l = Lattice::rhombic_prism(1.0, 0.5).unwrap();
        let t = l.det() / 3.0;
        let hh = analytic_area(&CandidateSpec::new(CandidateKind::HexagonalHoneycomb, l.clone(), t, t)).unwrap();
        let ds = analytic_area(&CandidateSpec::new(CandidateKind::DoubleSlab, l.clone(), t, t)).unwrap();
        assert!((hh.value.unwrap() - ds.value.unwrap()).abs() < 1e-9);
        let m = build(&CandidateSpec::new(CandidateKind::HexagonalHoneycomb, l, t, t)).unwrap();
        assert!((total_area(&m) - hh.value.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn oversized_double_cylinder_is_infeasible() {
        let e = build(&CandidateSpec::new(CandidateKind::DoubleCylinder, cubic(), 0.45, 0.45));
        assert!(matches!(e, Err(Error::Infeasible(_))), "{e:?}");
    }

    #[test]
    fn unavailable_closed_forms() {
        for kind in [CandidateKind::DelauneyChain, CandidateKind::CylinderLens, CandidateKind::SlabLens] {
            let spec = CandidateSpec::new(kind, cubic(), 0.2, 0.05);
            assert!(!analytic_area(&spec).unwrap().is_available());
        }
    }

    #[test]
    fn build_is_deterministic() {
        let spec = CandidateSpec::new(CandidateKind::SlabLens, cubic(), 0.3, 0.03);
        assert_eq!(build(&spec).unwrap(), build(&spec).unwrap());
    }
}
