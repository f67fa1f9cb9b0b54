//! Area minimization at fixed volumes.
//!
//! Descent moves along the area gradient projected off the two volume
//! gradients, with an Armijo line search whose trial points are pulled back
//! onto the constraint set before their area is measured. Mesh quality is
//! maintained between descent stages by refinement, edge flips and
//! tangential vertex averaging.

mod average;
mod equiangulate;
mod refine;

use serde::{Deserialize, Serialize};

pub use average::vertex_average;
pub use equiangulate::{equiangulate, min_angle};
pub use refine::refine;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::metrics::{area_gradient, region_volumes, total_area, volume_gradient, GradientField};

const PROJECTION_ITERATIONS: usize = 20;
const MAX_HALVINGS: usize = 40;
const WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageOp {
    Refine,
    Equiangulate,
    Average,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub descent_steps: usize,
    /// Operations applied in order once the descent steps are done.
    pub then: Vec<StageOp>,
}

impl Stage {
    pub fn new(descent_steps: usize, then: &[StageOp]) -> Self {
        Stage { descent_steps, then: then.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxConfig {
    pub schedule: Vec<Stage>,
    /// Relative area change over the trailing window that counts as
    /// converged.
    pub area_tol: f64,
    /// Absolute volume error; `None` means `1e-9 * det`.
    pub volume_tol: Option<f64>,
    /// Per-step vertex displacement cap; `None` means 0.05 of the shortest
    /// period.
    pub max_step: Option<f64>,
    pub armijo_c: f64,
    pub backtrack: f64,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        RelaxConfig {
            schedule: vec![
                Stage::new(300, &[StageOp::Refine]),
                Stage::new(300, &[StageOp::Refine]),
                Stage::new(300, &[StageOp::Equiangulate, StageOp::Average]),
                Stage::new(1000, &[StageOp::None]),
            ],
            area_tol: 1e-7,
            volume_tol: None,
            max_step: None,
            armijo_c: 1e-4,
            backtrack: 0.5,
        }
    }
}

impl RelaxConfig {
    pub fn check(&self) -> Result<()> {
        if self.schedule.is_empty() {
            return Err(Error::InvalidConfig("schedule has no stages".into()));
        }
        if let Some(i) = self.schedule.iter().position(|s| s.descent_steps == 0) {
            return Err(Error::InvalidConfig(format!("stage {i} has descent_steps = 0")));
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.area_tol) || !self.volume_tol.is_none_or(positive) || !self.max_step.is_none_or(positive) {
            return Err(Error::InvalidConfig("tolerances and step cap must be positive".into()));
        }
        if !(positive(self.armijo_c) && self.armijo_c < 1.0 && positive(self.backtrack) && self.backtrack < 1.0) {
            return Err(Error::InvalidConfig("armijo_c and backtrack must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn volume_tol_for(&self, mesh: &Mesh) -> f64 {
        self.volume_tol.unwrap_or(1e-9 * mesh.lattice.det())
    }

    pub fn max_step_for(&self, mesh: &Mesh) -> f64 {
        self.max_step.unwrap_or(0.05 * mesh.lattice.shortest_period())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepStats {
    pub area: f64,
    pub volume_errors: [f64; 2],
    /// Largest vertex displacement of the accepted step.
    pub max_step: f64,
    pub stalled: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageReport {
    pub descent_steps: usize,
    pub then: Vec<StageOp>,
    pub areas: Vec<f64>,
    pub v1_errors: Vec<f64>,
    pub v2_errors: Vec<f64>,
    pub max_steps: Vec<f64>,
    pub steps_taken: usize,
    pub window_converged: bool,
    pub stalled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxReport {
    pub stages: Vec<StageReport>,
    pub converged: bool,
    /// Index of the last stage that ran.
    pub stage_reached: usize,
    pub final_area: f64,
    pub final_volume_errors: [f64; 2],
}

fn volume_errors(mesh: &Mesh) -> Result<[f64; 2]> {
    let v = region_volumes(mesh)?;
    Ok([v[1] - mesh.bodies[0].target, v[2] - mesh.bodies[1].target])
}

/// Solve the 2x2 Gram system of the volume gradients.
fn gram_solve(n: &[GradientField; 2], rhs: [f64; 2]) -> Result<[f64; 2]> {
    let a = n[0].norm_squared();
    let b = n[0].dot(&n[1]);
    let d = n[1].norm_squared();
    let tr = a + d;
    let det = a * d - b * b;
    let disc = ((a - d) * (a - d) / 4.0 + b * b).sqrt();
    let (hi, lo) = (tr / 2.0 + disc, tr / 2.0 - disc);
    if !(lo > 0.0) || hi / lo > 1e12 || det <= 0.0 {
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        return Err(Error::DegenerateConstraint(cond));
    }
    Ok([(d * rhs[0] - b * rhs[1]) / det, (a * rhs[1] - b * rhs[0]) / det])
}

/// Newton iteration along the span of the volume gradients until both
/// body volumes are within tolerance of their targets.
pub fn project_volumes(mesh: &mut Mesh, volume_tol: f64) -> Result<usize> {
    let mut err = volume_errors(mesh)?;
    let mut it = 0;
    while err[0].abs() > volume_tol || err[1].abs() > volume_tol {
        if it == PROJECTION_ITERATIONS {
            return Err(Error::ProjectionFailure { iterations: it, error: err[0].abs().max(err[1].abs()) });
        }
        let n = [volume_gradient(mesh, 1), volume_gradient(mesh, 2)];
        let lam = gram_solve(&n, [-err[0], -err[1]])?;
        let mut d = n[0].scaled(lam[0]);
        d.axpy(lam[1], &n[1]);
        mesh.displace(&d.values);
        err = volume_errors(mesh)?;
        it += 1;
    }
    Ok(it)
}

/// Descent direction: minus the area gradient with its components along
/// the volume gradients removed.
pub fn descent_direction(mesh: &Mesh) -> Result<GradientField> {
    let g = area_gradient(mesh);
    let n = [volume_gradient(mesh, 1), volume_gradient(mesh, 2)];
    let lam = gram_solve(&n, [n[0].dot(&g), n[1].dot(&g)])?;
    let mut m = g.scaled(-1.0);
    m.axpy(lam[0], &n[0]);
    m.axpy(lam[1], &n[1]);
    Ok(m)
}

/// Line-search state carried between steps.
#[derive(Debug, Clone, Copy)]
#[derive(Default)]
pub struct Stepper {
    alpha: Option<f64>,
}


/// One projected-gradient step with backtracking. The mesh is left
/// unchanged when the line search stalls.
pub fn descent_step(mesh: &mut Mesh, config: &RelaxConfig) -> Result<StepStats> {
    descent_step_with(mesh, config, &mut Stepper::default())
}

pub fn descent_step_with(mesh: &mut Mesh, config: &RelaxConfig, stepper: &mut Stepper) -> Result<StepStats> {
    let vtol = config.volume_tol_for(mesh);
    let err0 = volume_errors(mesh)?;
    if err0[0].abs() > vtol || err0[1].abs() > vtol {
        return Err(Error::Precondition(format!("volume errors {err0:?} exceed tolerance {vtol:e}")));
    }
    let area0 = total_area(mesh);
    let m = descent_direction(mesh)?;
    let slope = m.norm_squared();
    let mmax = m.max_norm();
    let stalled = StepStats { area: area0, volume_errors: err0, max_step: 0.0, stalled: true };
    if mmax == 0.0 || slope <= 1e-30 * area0 * area0 {
        return Ok(StepStats { stalled: false, ..stalled });
    }
    let cap = config.max_step_for(mesh) / mmax;
    let mut alpha = stepper.alpha.map_or(cap, |a| (2.0 * a).min(cap));
    for _ in 0..MAX_HALVINGS {
        let mut trial = mesh.clone();
        trial.displace(&m.scaled(alpha).values);
        if project_volumes(&mut trial, vtol).is_ok() {
            let area = total_area(&trial);
            if area <= area0 - config.armijo_c * alpha * slope {
                let err = volume_errors(&trial)?;
                let moved = max_displacement(mesh, &trial);
                *mesh = trial;
                stepper.alpha = Some(alpha);
                return Ok(StepStats { area, volume_errors: err, max_step: moved, stalled: false });
            }
        }
        alpha *= config.backtrack;
    }
    stepper.alpha = None;
    Ok(stalled)
}

fn max_displacement(a: &Mesh, b: &Mesh) -> f64 {
    a.live_vertices()
        .map(|(i, v)| {
            let d = b.vertex(i).u - v.u;
            let d = d - d.map(f64::round);
            a.lattice.to_ambient(&d).norm()
        })
        .fold(0.0, f64::max)
}

fn window_converged(areas: &[f64], tol: f64) -> bool {
    if areas.len() <= WINDOW {
        return false;
    }
    let last = areas[areas.len() - 1];
    let before = areas[areas.len() - 1 - WINDOW];
    (before - last).abs() <= tol * last.abs()
}

fn run_descent(mesh: &mut Mesh, config: &RelaxConfig, steps: usize, rep: &mut StageReport) -> Result<()> {
    let mut stepper = Stepper::default();
    let mut stalls = 0;
    for _ in 0..steps {
        let s = descent_step_with(mesh, config, &mut stepper)?;
        rep.areas.push(s.area);
        rep.v1_errors.push(s.volume_errors[0]);
        rep.v2_errors.push(s.volume_errors[1]);
        rep.max_steps.push(s.max_step);
        rep.steps_taken += 1;
        if s.stalled {
            stalls += 1;
            rep.stalled = true;
            if stalls >= 2 {
                break;
            }
        } else {
            stalls = 0;
        }
        if window_converged(&rep.areas, config.area_tol) {
            rep.window_converged = true;
            break;
        }
    }
    Ok(())
}

fn apply_op(mesh: &mut Mesh, op: StageOp, vtol: f64) -> Result<()> {
    match op {
        StageOp::Refine => *mesh = refine(mesh),
        StageOp::Equiangulate => {
            equiangulate(mesh);
        }
        StageOp::Average => vertex_average(mesh),
        StageOp::None => return Ok(()),
    }
    project_volumes(mesh, vtol)?;
    Ok(())
}

/// Run the whole schedule. Volumes are projected onto their targets first.
pub fn relax(mesh: &Mesh, config: &RelaxConfig) -> Result<(Mesh, RelaxReport)> {
    config.check()?;
    let mut m = mesh.clone();
    let vtol = config.volume_tol_for(&m);
    project_volumes(&mut m, vtol)?;
    let mut stages = Vec::new();
    let last = config.schedule.len() - 1;
    for (i, stage) in config.schedule.iter().enumerate() {
        let mut rep = StageReport { descent_steps: stage.descent_steps, then: stage.then.clone(), ..Default::default() };
        run_descent(&mut m, config, stage.descent_steps, &mut rep)?;
        if i < last {
            for &op in &stage.then {
                apply_op(&mut m, op, vtol)?;
            }
        }
        stages.push(rep);
    }
    // trailing operations of the final stage run after its descent
    for &op in &config.schedule[last].then {
        apply_op(&mut m, op, vtol)?;
    }
    let err = volume_errors(&m)?;
    let final_stage = stages.last().expect("at least one stage");
    let converged = final_stage.window_converged && err[0].abs() <= vtol && err[1].abs() <= vtol;
    let report = RelaxReport {
        stage_reached: stages.len() - 1,
        converged,
        final_area: total_area(&m),
        final_volume_errors: err,
        stages,
    };
    Ok((m, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{build, CandidateKind, CandidateSpec};
    use crate::lattice::Lattice;
    use crate::mesh::validate;

    fn slab() -> Mesh {
        build(&CandidateSpec::new(CandidateKind::DoubleSlab, Lattice::cubic(1.0).unwrap(), 1.0 / 3.0, 1.0 / 3.0))
            .unwrap()
    }

    fn sdb() -> Mesh {
        build(&CandidateSpec::new(CandidateKind::StandardDoubleBubble, Lattice::cubic(1.0).unwrap(), 0.05, 0.05))
            .unwrap()
    }

    #[test]
    fn projection_is_identity_on_constraint() {
        let mut m = slab();
        let before = m.clone();
        let it = project_volumes(&mut m, 1e-9).unwrap();
        assert_eq!(it, 0);
        assert_eq!(m, before);
    }

    #[test]
    fn slab_projection_takes_one_newton_step() {
        let mut m = slab();
        m.bodies[0].target = 0.30;
        let it = project_volumes(&mut m, 1e-9).unwrap();
        assert_eq!(it, 1);
        let v = region_volumes(&m).unwrap();
        assert!((v[1] - 0.30).abs() < 1e-12);
    }

    #[test]
    fn identical_gradients_are_degenerate() {
        let m = slab();
        let g = volume_gradient(&m, 1);
        assert!(matches!(gram_solve(&[g.clone(), g], [1.0, 1.0]), Err(Error::DegenerateConstraint(_))));
    }

    #[test]
    fn flat_slab_does_not_move() {
        let mut m = slab();
        let before = m.clone();
        let s = descent_step(&mut m, &RelaxConfig::default()).unwrap();
        assert!(s.max_step == 0.0);
        assert!((s.area - 3.0).abs() < 1e-12);
        assert_eq!(m, before);
    }

    #[test]
    fn off_constraint_step_is_rejected() {
        let mut m = slab();
        m.bodies[0].target = 0.2;
        assert!(matches!(descent_step(&mut m, &RelaxConfig::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn sdb_area_decreases_monotonically() {
        let mut m = sdb();
        let config = RelaxConfig::default();
        let tol = config.volume_tol_for(&m);
        project_volumes(&mut m, tol).unwrap();
        let mut stepper = Stepper::default();
        let mut prev = total_area(&m);
        let mut strict = 0;
        for _ in 0..100 {
            let s = descent_step_with(&mut m, &config, &mut stepper).unwrap();
            assert!(s.area <= prev + 10.0 * f64::EPSILON * prev);
            if s.area < prev {
                strict += 1;
            }
            prev = s.area;
        }
        assert_eq!(strict, 100);
        assert!(validate(&m).is_valid());
    }

    #[test]
    fn zero_descent_steps_rejected() {
        let mut c = RelaxConfig::default();
        c.schedule[1].descent_steps = 0;
        assert!(matches!(relax(&slab(), &c), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn slab_relaxes_immediately() {
        let (m, rep) = relax(&slab(), &RelaxConfig::default()).unwrap();
        assert!(rep.converged);
        assert!((rep.final_area - 3.0).abs() < 1e-12);
        assert!(validate(&m).is_valid());
    }

    #[test]
    fn refine_then_descent_beats_descent_alone() {
        let config = RelaxConfig::default();
        let mut a = sdb();
        project_volumes(&mut a, 1e-9).unwrap();
        let mut b = refine(&a);
        project_volumes(&mut b, 1e-9).unwrap();
        let (mut sa, mut sb) = (Stepper::default(), Stepper::default());
        for _ in 0..100 {
            descent_step_with(&mut a, &config, &mut sa).unwrap();
            descent_step_with(&mut b, &config, &mut sb).unwrap();
        }
        assert!(total_area(&b) < total_area(&a));
    }
}
