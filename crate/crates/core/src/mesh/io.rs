//! Versioned JSON mesh format.
//!
//! ```text
//! {"format":1,
//!  "lattice":{"kind":"cubic","params":[1.0],"basis":[[1,0,0],[0,1,0],[0,0,1]]},
//!  "vertices":[[u1,u2,u3], ...],
//!  "edges":[[tail,head,w1,w2,w3], ...],
//!  "facets":[[e1,e2,e3,front,back], ...],
//!  "bodies":[{"region":1,"target":v1,"k":0}, ...]}
//! ```
//!
//! Facet edge entries are `±(id + 1)`, negative when the edge is traversed
//! head to tail. Tombstoned slots are written as `null` so ids survive a
//! round trip. `basis` lists the period vectors.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Body, Edge, EdgeRef, Facet, Mesh, Vertex};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeKind, Vec3, WrapVec};

const FORMAT: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshFile {
    format: u32,
    lattice: LatticeFile,
    vertices: Vec<Option<[f64; 3]>>,
    edges: Vec<Option<EdgeRow>>,
    facets: Vec<Option<FacetRow>>,
    bodies: Vec<BodyFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeFile {
    kind: String,
    params: Vec<f64>,
    basis: [[f64; 3]; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyFile {
    region: u8,
    target: f64,
    k: i64,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "(usize, usize, i32, i32, i32)", into = "(usize, usize, i32, i32, i32)")]
struct EdgeRow(usize, usize, [i32; 3]);

impl TryFrom<(usize, usize, i32, i32, i32)> for EdgeRow {
    type Error = String;
    fn try_from(t: (usize, usize, i32, i32, i32)) -> std::result::Result<Self, String> {
        let w = [t.2, t.3, t.4];
        if w.iter().any(|c| c.abs() > 1) {
            return Err(format!("edges: wrap component outside [-1, 1] in {w:?}"));
        }
        Ok(EdgeRow(t.0, t.1, w))
    }
}

impl From<EdgeRow> for (usize, usize, i32, i32, i32) {
    fn from(r: EdgeRow) -> Self {
        (r.0, r.1, r.2[0], r.2[1], r.2[2])
    }
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64, i64, u8, u8)", into = "(i64, i64, i64, u8, u8)")]
struct FacetRow([i64; 3], u8, u8);

impl TryFrom<(i64, i64, i64, u8, u8)> for FacetRow {
    type Error = String;
    fn try_from(t: (i64, i64, i64, u8, u8)) -> std::result::Result<Self, String> {
        let e = [t.0, t.1, t.2];
        if e.contains(&0) {
            return Err("facets: signed edge ids are 1-based, 0 is not allowed".into());
        }
        if t.3 > 2 || t.4 > 2 {
            return Err(format!("facets: region labels must be 0, 1 or 2, got {} / {}", t.3, t.4));
        }
        Ok(FacetRow(e, t.3, t.4))
    }
}

impl From<FacetRow> for (i64, i64, i64, u8, u8) {
    fn from(r: FacetRow) -> Self {
        (r.0[0], r.0[1], r.0[2], r.1, r.2)
    }
}

pub fn to_json_string(mesh: &Mesh) -> String {
    let b = mesh.lattice.basis();
    let kind = mesh.lattice.kind();
    let file = MeshFile {
        format: FORMAT,
        lattice: LatticeFile {
            kind: kind.code().to_string(),
            params: kind.params(),
            basis: [0, 1, 2].map(|k| [b[(0, k)], b[(1, k)], b[(2, k)]]),
        },
        vertices: mesh.vertices.iter().map(|v| v.as_ref().map(|v| [v.u[0], v.u[1], v.u[2]])).collect(),
        edges: mesh.edges.iter().map(|e| e.as_ref().map(|e| EdgeRow(e.tail, e.head, e.wrap.0))).collect(),
        facets: mesh
            .facets
            .iter()
            .map(|f| {
                f.as_ref().map(|f| {
                    let ids = f.edges.map(|r| (r.edge as i64 + 1) * r.sign() as i64);
                    FacetRow(ids, f.front, f.back)
                })
            })
            .collect(),
        bodies: mesh
            .bodies
            .iter()
            .map(|b| BodyFile { region: b.region, target: b.target, k: b.volume_constant })
            .collect(),
    };
    serde_json::to_string(&file).expect("mesh serializes")
}

pub fn from_json_str(text: &str) -> Result<Mesh> {
    let file: MeshFile = serde_json::from_str(text).map_err(|e| {
        let offset = byte_offset(text, e.line(), e.column());
        let msg = e.to_string();
        let field = field_hint(&msg);
        Error::Parse { offset, field, message: msg }
    })?;
    let at = |field: &str, message: String| Error::Parse {
        offset: text.find(&format!("\"{field}\"")).unwrap_or(0),
        field: field.to_string(),
        message,
    };
    if file.format != FORMAT {
        return Err(at("format", format!("unsupported format version {}", file.format)));
    }
    let kind = LatticeKind::from_code(&file.lattice.kind, &file.lattice.params).map_err(|e| at("lattice", e.to_string()))?;
    let lattice = Lattice::new(kind).map_err(|e| at("lattice", e.to_string()))?;
    let b = lattice.basis();
    for k in 0..3 {
        for i in 0..3 {
            if (file.lattice.basis[k][i] - b[(i, k)]).abs() > 1e-12 * lattice.shortest_period() {
                return Err(at("basis", "basis does not match kind and params".into()));
            }
        }
    }
    let nv = file.vertices.len();
    let vertices: Vec<Option<Vertex>> = file
        .vertices
        .iter()
        .map(|v| v.map(|u| Vertex { u: Vec3::from(u), on_triple_curve: false }))
        .collect();
    let mut edges = Vec::with_capacity(file.edges.len());
    for (i, e) in file.edges.iter().enumerate() {
        edges.push(match e {
            None => None,
            Some(EdgeRow(t, h, w)) => {
                let live = |v: usize| v < nv && vertices[v].is_some();
                if !live(*t) || !live(*h) {
                    return Err(at("edges", format!("edge {i} references a missing vertex")));
                }
                Some(Edge { tail: *t, head: *h, wrap: WrapVec(*w) })
            }
        });
    }
    let mut facets = Vec::with_capacity(file.facets.len());
    for (i, f) in file.facets.iter().enumerate() {
        facets.push(match f {
            None => None,
            Some(FacetRow(ids, front, back)) => {
                let mut refs = [EdgeRef { edge: 0, reversed: false }; 3];
                for k in 0..3 {
                    let id = (ids[k].unsigned_abs() - 1) as usize;
                    if id >= edges.len() || edges[id].is_none() {
                        return Err(at("facets", format!("facet {i} references a missing edge")));
                    }
                    refs[k] = EdgeRef { edge: id, reversed: ids[k] < 0 };
                }
                Some(Facet { edges: refs, front: *front, back: *back })
            }
        });
    }
    if file.bodies.len() != 2 {
        return Err(at("bodies", format!("expected exactly two bodies, found {}", file.bodies.len())));
    }
    let mut bodies = [Body { region: 1, target: 0.0, volume_constant: 0 }; 2];
    for (i, bf) in file.bodies.iter().enumerate() {
        if bf.region as usize != i + 1 {
            return Err(at("bodies", format!("body {i} must be region {}", i + 1)));
        }
        bodies[i] = Body { region: bf.region, target: bf.target, volume_constant: bf.k };
    }
    let mut mesh = Mesh { lattice, vertices, edges, facets, bodies };
    mesh.classify_vertices();
    Ok(mesh)
}

pub fn save_json(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json_string(mesh))?;
    Ok(())
}

pub fn load_json(path: impl AsRef<Path>) -> Result<Mesh> {
    from_json_str(&fs::read_to_string(path)?)
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut offset = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line {
            return offset + column.saturating_sub(1).min(l.len());
        }
        offset += l.len();
    }
    text.len()
}

fn field_hint(msg: &str) -> String {
    if let Some(start) = msg.find('`') {
        if let Some(len) = msg[start + 1..].find('`') {
            return msg[start + 1..start + 1 + len].to_string();
        }
    }
    for f in ["edges", "facets", "vertices", "bodies", "lattice"] {
        if msg.contains(f) {
            return f.to_string();
        }
    }
    "document".to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{build, CandidateKind, CandidateSpec};

    fn sample() -> Mesh {
        let l = Lattice::cubic(1.0).unwrap();
        build(&CandidateSpec::new(CandidateKind::StandardDoubleBubble, l, 0.04, 0.02)).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let mut m = sample();
        m.remove_facet(1);
        let back = from_json_str(&to_json_string(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn wrap_component_two_rejected() {
        let text = to_json_string(&sample());
        let start = text.find("\"edges\":[[").unwrap() + "\"edges\":[[".len();
        let end = start + text[start..].find(']').unwrap();
        let mut row: Vec<i64> = text[start..end].split(',').map(|s| s.parse().unwrap()).collect();
        row[2] = 2;
        let patched = format!(
            "{}{}{}",
            &text[..start],
            row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            &text[end..]
        );
        match from_json_str(&patched) {
            Err(Error::Parse { offset, message, .. }) => {
                assert!(message.contains("wrap component"), "{message}");
                assert!(offset >= start && offset <= end + 2, "offset {offset} not near {start}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_lattice_rejected() {
        let err = from_json_str(r#"{"format":1,"vertices":[],"edges":[],"facets":[],"bodies":[]}"#).unwrap_err();
        match err {
            Error::Parse { field, .. } => assert_eq!(field, "lattice"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_offset() {
        let err = from_json_str("{\"format\":1,\n \"lattice\": [}").unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert!(offset > 12),
            other => panic!("{other:?}"),
        }
    }
}
