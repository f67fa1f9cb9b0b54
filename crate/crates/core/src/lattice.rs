//! Flat three-torus geometry.
//!
//! Points are stored in lattice coordinates `u` with the ambient position
//! `x = B u`, where the columns of `B` are the three period vectors. All
//! wrap bookkeeping is integer arithmetic on lattice coordinates.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Shape tag of a supported lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LatticeKind {
    Cubic { side: f64 },
    Rectangular { a: f64, b: f64, c: f64 },
    /// Right prism over a rhombus with side `side` and angle pi/3.
    RhombicPrism { side: f64, height: f64 },
}

impl LatticeKind {
    pub fn code(&self) -> &'static str {
        match self {
            LatticeKind::Cubic { .. } => "cubic",
            LatticeKind::Rectangular { .. } => "rectangular",
            LatticeKind::RhombicPrism { .. } => "rhombic-prism",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            LatticeKind::Cubic { side } => vec![side],
            LatticeKind::Rectangular { a, b, c } => vec![a, b, c],
            LatticeKind::RhombicPrism { side, height } => vec![side, height],
        }
    }

    pub fn from_code(code: &str, params: &[f64]) -> Result<Self> {
        let want = match code {
            "cubic" => 1,
            "rectangular" => 3,
            "rhombic-prism" => 2,
            other => return Err(Error::InvalidParameter(format!("unknown lattice kind `{other}`"))),
        };
        if params.len() != want {
            return Err(Error::InvalidParameter(format!(
                "lattice kind `{code}` takes {want} parameters, got {}",
                params.len()
            )));
        }
        Ok(match code {
            "cubic" => LatticeKind::Cubic { side: params[0] },
            "rectangular" => LatticeKind::Rectangular { a: params[0], b: params[1], c: params[2] },
            _ => LatticeKind::RhombicPrism { side: params[0], height: params[1] },
        })
    }
}

/// A flat torus `R^3 / B Z^3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    kind: LatticeKind,
    basis: Matrix3<f64>,
    inverse: Matrix3<f64>,
    det: f64,
}

impl Lattice {
    pub fn new(kind: LatticeKind) -> Result<Self> {
        let params = kind.params();
        if params.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{} lattice parameters must be positive and finite, got {:?}",
                kind.code(),
                params
            )));
        }
        let basis = match kind {
            LatticeKind::Cubic { side } => Matrix3::identity() * side,
            LatticeKind::Rectangular { a, b, c } => Matrix3::from_diagonal(&Vec3::new(a, b, c)),
            LatticeKind::RhombicPrism { side, height } => Matrix3::from_columns(&[
                Vec3::new(side, 0.0, 0.0),
                Vec3::new(0.5 * side, 0.5 * 3f64.sqrt() * side, 0.0),
                Vec3::new(0.0, 0.0, height),
            ]),
        };
        let det = basis.determinant();
        let inverse = basis
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter("singular lattice basis".into()))?;
        Ok(Lattice { kind, basis, inverse, det })
    }

    pub fn cubic(side: f64) -> Result<Self> {
        Self::new(LatticeKind::Cubic { side })
    }

    pub fn rectangular(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(LatticeKind::Rectangular { a, b, c })
    }

    pub fn rhombic_prism(side: f64, height: f64) -> Result<Self> {
        Self::new(LatticeKind::RhombicPrism { side, height })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    /// Columns are the period vectors.
    pub fn basis(&self) -> &Matrix3<f64> {
        &self.basis
    }

    pub fn inverse(&self) -> &Matrix3<f64> {
        &self.inverse
    }

    /// Volume of the torus.
    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn period(&self, k: usize) -> Vec3 {
        self.basis.column(k).into_owned()
    }

    pub fn shortest_period(&self) -> f64 {
        (0..3).map(|k| self.period(k).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Distance between the two faces of the cell that are spanned by the
    /// periods other than `k`.
    pub fn width(&self, k: usize) -> f64 {
        let (i, j) = others(k);
        self.det / self.period(i).cross(&self.period(j)).norm()
    }

    /// Area of the flat 2-torus spanned by the two periods other than `k`.
    pub fn face_area(&self, k: usize) -> f64 {
        let (i, j) = others(k);
        self.period(i).cross(&self.period(j)).norm()
    }

    /// True when period `k` is orthogonal to the other two, so the torus is
    /// a product of a 2-torus with a circle of length `|a_k|`.
    pub fn is_product_axis(&self, k: usize) -> bool {
        let (i, j) = others(k);
        let ak = self.period(k);
        let tol = 1e-12 * ak.norm();
        ak.dot(&self.period(i)).abs() <= tol * self.period(i).norm()
            && ak.dot(&self.period(j)).abs() <= tol * self.period(j).norm()
    }

    pub fn is_rectangular(&self) -> bool {
        (0..3).all(|k| self.is_product_axis(k))
    }

    pub fn to_ambient(&self, u: &Vec3) -> Vec3 {
        self.basis * u
    }

    pub fn to_lattice(&self, x: &Vec3) -> Vec3 {
        self.inverse * x
    }

    /// Unwrapped edge vector `B (head - tail + wrap)`.
    pub fn displacement(&self, tail: &Vec3, head: &Vec3, wrap: WrapVec) -> Vec3 {
        self.basis * (head - tail + wrap.to_vec3())
    }

    /// Shortest distance between `p` and `q` over the 27 nearest images.
    pub fn min_image_distance(&self, p: &Vec3, q: &Vec3) -> f64 {
        let d = q - p;
        let mut best = f64::INFINITY;
        for i in -1..=1 {
            for j in -1..=1 {
                for k in -1..=1 {
                    let w = Vec3::new(i as f64, j as f64, k as f64);
                    best = best.min((self.basis * (d + w)).norm());
                }
            }
        }
        best
    }
}

pub(crate) fn others(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    }
}

/// Reduce lattice coordinates into the half-open cell `[0,1)^3`.
///
/// Returns `(u', shift)` with `u = u' + shift` componentwise.
pub fn canonicalize(u: &Vec3) -> (Vec3, WrapVec) {
    let mut out = *u;
    let mut shift = [0i32; 3];
    for k in 0..3 {
        let f = u[k].floor();
        let mut r = u[k] - f;
        let mut s = f as i32;
        if r >= 1.0 {
            r -= 1.0;
            s += 1;
        }
        if r < 0.0 {
            r = 0.0;
        }
        out[k] = r;
        shift[k] = s;
    }
    (out, WrapVec(shift))
}

/// Integer count of period crossings along a directed edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WrapVec(pub [i32; 3]);

impl WrapVec {
    pub const ZERO: WrapVec = WrapVec([0, 0, 0]);

    pub fn to_vec3(self) -> Vec3 {
        Vec3::new(self.0[0] as f64, self.0[1] as f64, self.0[2] as f64)
    }

    /// Nearest integer vector to `v`.
    pub fn round(v: &Vec3) -> WrapVec {
        WrapVec([v[0].round() as i32, v[1].round() as i32, v[2].round() as i32])
    }

    pub fn is_zero(self) -> bool {
        self.0 == [0, 0, 0]
    }

    pub fn max_abs(self) -> i32 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl Add for WrapVec {
    type Output = WrapVec;
    fn add(self, o: WrapVec) -> WrapVec {
        WrapVec([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for WrapVec {
    fn add_assign(&mut self, o: WrapVec) {
        *self = *self + o;
    }
}

impl Sub for WrapVec {
    type Output = WrapVec;
    fn sub(self, o: WrapVec) -> WrapVec {
        self + (-o)
    }
}

impl Neg for WrapVec {
    type Output = WrapVec;
    fn neg(self) -> WrapVec {
        WrapVec([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl fmt::Display for WrapVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cubic_identity() {
        let l = Lattice::cubic(1.0).unwrap();
        assert_eq!(*l.basis(), Matrix3::identity());
        assert_eq!(l.det(), 1.0);
    }

    #[test]
    fn rhombic_columns_and_det() {
        let l = Lattice::rhombic_prism(1.0, 0.8).unwrap();
        assert_relative_eq!(l.period(1), Vec3::new(0.5, 3f64.sqrt() / 2.0, 0.0));
        assert_relative_eq!(l.period(2), Vec3::new(0.0, 0.0, 0.8));
        assert_relative_eq!(l.det(), 3f64.sqrt() / 2.0 * 0.8, epsilon = 1e-15);
        assert!(l.is_product_axis(2));
        assert!(!l.is_product_axis(0));
    }

    #[test]
    fn nonpositive_parameter_rejected() {
        assert!(matches!(Lattice::rectangular(1.0, 1.0, -2.0), Err(Error::InvalidParameter(_))));
        assert!(Lattice::cubic(0.0).is_err());
    }

    #[test]
    fn canonicalize_examples() {
        let (u, s) = canonicalize(&Vec3::new(0.5, 0.5, 0.5));
        assert_eq!(u, Vec3::new(0.5, 0.5, 0.5));
        assert_eq!(s, WrapVec::ZERO);
        let (u, s) = canonicalize(&Vec3::new(1.25, -0.25, 0.0));
        assert_relative_eq!(u, Vec3::new(0.25, 0.75, 0.0));
        assert_eq!(s, WrapVec([1, -1, 0]));
        let (u, s) = canonicalize(&Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(u, Vec3::zeros());
        assert_eq!(s, WrapVec([1, 0, 0]));
        // tiny negatives must not land on 1.0
        let (u, s) = canonicalize(&Vec3::new(-1e-18, 0.0, 0.0));
        assert!(u[0] < 1.0 && u[0] >= 0.0);
        assert_eq!(s.0[0], if u[0] == 0.0 { 0 } else { -1 });
    }

    #[test]
    fn displacement_examples() {
        let c = Lattice::cubic(1.0).unwrap();
        let d = c.displacement(&Vec3::new(0.9, 0.0, 0.0), &Vec3::new(0.1, 0.0, 0.0), WrapVec([1, 0, 0]));
        assert_relative_eq!(d, Vec3::new(0.2, 0.0, 0.0), epsilon = 1e-15);
        let p = Vec3::new(0.3, 0.1, 0.7);
        assert_eq!(c.displacement(&p, &p, WrapVec::ZERO), Vec3::zeros());
        let r = Lattice::rhombic_prism(1.0, 1.0).unwrap();
        let d = r.displacement(&Vec3::zeros(), &Vec3::zeros(), WrapVec([0, 1, 0]));
        assert_relative_eq!(d, Vec3::new(0.5, 3f64.sqrt() / 2.0, 0.0));
    }

    #[test]
    fn min_image_examples() {
        let c = Lattice::cubic(1.0).unwrap();
        assert_relative_eq!(c.min_image_distance(&Vec3::zeros(), &Vec3::new(0.9, 0.0, 0.0)), 0.1, epsilon = 1e-15);
        let p = Vec3::new(0.2, 0.4, 0.6);
        assert_eq!(c.min_image_distance(&p, &p), 0.0);
        // brute force over the 27 images of (0.5,0.5,0.5) in cubic(2):
        // every image sits at distance 2*sqrt(3)/2 from the origin.
        let c2 = Lattice::cubic(2.0).unwrap();
        let q = Vec3::new(0.5, 0.5, 0.5);
        let mut brute = f64::INFINITY;
        for i in -1..=1 {
            for j in -1..=1 {
                for k in -1..=1 {
                    let x = 2.0 * (q + Vec3::new(i as f64, j as f64, k as f64));
                    brute = brute.min(x.norm());
                }
            }
        }
        assert_relative_eq!(brute, 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(c2.min_image_distance(&Vec3::zeros(), &q), brute, epsilon = 1e-15);
    }

    #[test]
    fn widths() {
        let r = Lattice::rhombic_prism(1.0, 0.5).unwrap();
        assert_relative_eq!(r.face_area(0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(r.face_area(2), 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(r.width(2), 0.5, epsilon = 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn coord() -> impl Strategy<Value = f64> {
            -3.0f64..3.0
        }

        fn unit() -> impl Strategy<Value = f64> {
            0.0f64..1.0
        }

        proptest! {
            #[test]
            fn displacement_antisymmetric(a in prop::array::uniform3(coord()), b in prop::array::uniform3(coord()),
                                          w in prop::array::uniform3(-1i32..=1)) {
                let l = Lattice::rhombic_prism(1.3, 0.7).unwrap();
                let (a, b, w) = (Vec3::from(a), Vec3::from(b), WrapVec(w));
                let d1 = l.displacement(&a, &b, w);
                let d2 = l.displacement(&b, &a, -w);
                prop_assert!((d1 + d2).norm() < 1e-12);
            }

            #[test]
            fn canonicalize_idempotent(u in prop::array::uniform3(coord())) {
                let u = Vec3::from(u);
                let (c, s) = canonicalize(&u);
                prop_assert!(c.iter().all(|x| (0.0..1.0).contains(x)));
                prop_assert!((c + s.to_vec3() - u).norm() < 1e-12);
                let (c2, s2) = canonicalize(&c);
                prop_assert_eq!(c2, c);
                prop_assert!(s2.is_zero());
            }

            #[test]
            fn min_image_triangle(p in prop::array::uniform3(unit()), q in prop::array::uniform3(unit()),
                                  r in prop::array::uniform3(unit())) {
                let l = Lattice::rectangular(1.0, 1.4, 0.8).unwrap();
                let (p, q, r) = (Vec3::from(p), Vec3::from(q), Vec3::from(r));
                let pq = l.min_image_distance(&p, &q);
                prop_assert!((pq - l.min_image_distance(&q, &p)).abs() < 1e-12);
                prop_assert!(pq <= l.min_image_distance(&p, &r) + l.min_image_distance(&r, &q) + 1e-12);
            }
        }
    }
}
