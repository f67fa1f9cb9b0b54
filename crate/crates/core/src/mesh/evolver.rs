use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::Mesh;
use crate::error::Result;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn wrap_symbol(w: i32) -> char {
    match w {
        1 => '+',
        -1 => '-',
        _ => '*',
    }
}

/// Render a torus-model Surface Evolver datafile. Ids are renumbered
/// densely from 1.
pub fn export_fe_string(mesh: &Mesh) -> String {
    let m = mesh.compacted();
    let b = m.lattice.basis();
    let mut s = String::new();
    writeln!(s, "// lattice {} {:?}", m.lattice.kind().code(), m.lattice.kind().params()).unwrap();
    writeln!(s, "TORUS\n").unwrap();
    writeln!(s, "PERIODS").unwrap();
    for k in 0..3 {
        writeln!(s, "{} {} {}", num(b[(0, k)]), num(b[(1, k)]), num(b[(2, k)])).unwrap();
    }
    writeln!(s, "\nvertices").unwrap();
    for (i, v) in m.live_vertices() {
        let x = m.lattice.to_ambient(&v.u);
        writeln!(s, "{} {} {} {}", i + 1, num(x[0]), num(x[1]), num(x[2])).unwrap();
    }
    writeln!(s, "\nedges").unwrap();
    for (i, e) in m.live_edges() {
        let w = e.wrap.0;
        writeln!(
            s,
            "{} {} {} {} {} {}",
            i + 1,
            e.tail + 1,
            e.head + 1,
            wrap_symbol(w[0]),
            wrap_symbol(w[1]),
            wrap_symbol(w[2])
        )
        .unwrap();
    }
    writeln!(s, "\nfaces").unwrap();
    for (i, f) in m.live_facets() {
        let ids: Vec<String> = f.edges.iter().map(|r| ((r.edge as i64 + 1) * r.sign() as i64).to_string()).collect();
        writeln!(s, "{} {} /* front {} back {} */", i + 1, ids.join(" "), f.front, f.back).unwrap();
    }
    writeln!(s, "\nbodies").unwrap();
    for body in &m.bodies {
        let mut ids = Vec::new();
        for (i, f) in m.live_facets() {
            if f.back == body.region {
                ids.push((i as i64 + 1).to_string());
            } else if f.front == body.region {
                ids.push((-(i as i64 + 1)).to_string());
            }
        }
        writeln!(s, "{} {} VOLUME {}", body.region, ids.join(" "), num(body.target)).unwrap();
    }
    s
}

pub fn export_fe(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, export_fe_string(mesh))?;
    Ok(())
}

/// Element counts of a datafile written by [`export_fe_string`]:
/// (vertices, edges, faces, bodies).
pub fn count_fe_sections(text: &str) -> (usize, usize, usize, usize) {
    let mut counts = [0usize; 4];
    let mut section = None;
    for line in text.lines() {
        let t = line.trim();
        match t {
            "vertices" => section = Some(0),
            "edges" => section = Some(1),
            "faces" => section = Some(2),
            "bodies" => section = Some(3),
            "" => {}
            _ => {
                if let Some(k) = section {
                    if t.split_whitespace().next().is_some_and(|w| w.parse::<usize>().is_ok()) {
                        counts[k] += 1;
                    }
                }
            }
        }
    }
    (counts[0], counts[1], counts[2], counts[3])
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
    fn cubic_periods_are_identity_rows() {
        let text = export_fe_string(&slab());
        let lines: Vec<&str> = text.lines().collect();
        let p = lines.iter().position(|l| *l == "PERIODS").unwrap();
        assert_eq!(lines[p + 1], format!("{} {} {}", num(1.0), num(0.0), num(0.0)));
        assert_eq!(lines[p + 2], format!("{} {} {}", num(0.0), num(1.0), num(0.0)));
        assert_eq!(lines[p + 3], format!("{} {} {}", num(0.0), num(0.0), num(1.0)));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn counts_survive_export() {
        let m = slab();
        let (v, e, f, b) = count_fe_sections(&export_fe_string(&m));
        assert_eq!((v, e, f, b), (m.vertex_count(), m.edge_count(), m.facet_count(), 2));
    }

    #[test]
    fn horizontal_walls_only_wrap_in_plane() {
        // The slab walls are horizontal, so no edge wraps the vertical period.
        let text = export_fe_string(&slab());
        let edges = text.split("\nedges\n").nth(1).unwrap().split("\n\n").next().unwrap();
        for line in edges.lines() {
            let sym: Vec<&str> = line.split_whitespace().skip(3).collect();
            assert_eq!(sym[2], "*", "{line}");
        }
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
    }
}
