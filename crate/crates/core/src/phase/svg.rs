use std::fmt::Write as _;
use std::path::Path;

use super::{PhaseRow, PhaseTable};
use crate::candidates::CandidateKind;
use crate::error::Result;

const SIDE: f64 = 560.0;
const MARGIN: f64 = 40.0;
const LEGEND_X: f64 = 2.0 * MARGIN + SIDE;

fn colour(k: CandidateKind) -> &'static str {
    use CandidateKind::*;
    match k {
        StandardDoubleBubble => "#e6194b",
        DelauneyChain => "#3cb44b",
        CylinderLens => "#ffe119",
        CylinderCross => "#4363d8",
        DoubleCylinder => "#f58231",
        SlabLens => "#911eb4",
        CenterBubble => "#46f0f0",
        CylinderString => "#f032e6",
        SlabCylinder => "#bcf60c",
        DoubleSlab => "#008080",
        HexagonalHoneycomb => "#9a6324",
    }
}

/// Screen position of volume fractions: region 1 bottom left, region 2
/// bottom right, complement on top.
fn place(f: [f64; 3]) -> (f64, f64) {
    let h = SIDE * 3f64.sqrt() / 2.0;
    let (a, b, c) = ((MARGIN, MARGIN + h), (MARGIN + SIDE, MARGIN + h), (MARGIN + SIDE / 2.0, MARGIN));
    (f[0] * a.0 + f[1] * b.0 + f[2] * c.0, f[0] * a.1 + f[1] * b.1 + f[2] * c.1)
}

fn hexagon(t: &PhaseTable, r: &PhaseRow) -> String {
    let f = r.v.map(|v| v / t.det);
    let units = if r.refined { 1.0 } else { t.ratio as f64 };
    let d = units / t.units as f64 / 3.0;
    const OFFSETS: [[f64; 3]; 6] = [[2., -1., -1.], [1., 1., -2.], [-1., 2., -1.], [-2., 1., 1.], [-1., -1., 2.], [1., -2., 1.]];
    let mut s = String::new();
    for (i, o) in OFFSETS.iter().enumerate() {
        let (x, y) = place([f[0] + d * o[0], f[1] + d * o[1], f[2] + d * o[2]]);
        let _ = write!(s, "{}{x:.3},{y:.3}", if i == 0 { "" } else { " " });
    }
    s
}

/// Ternary phase portrait as an SVG document.
pub fn ternary_svg(t: &PhaseTable) -> String {
    let height = 2.0 * MARGIN + SIDE * 3f64.sqrt() / 2.0 + 20.0;
    let width = LEGEND_X + 220.0;
    let mut s = String::new();
    let _ = writeln!(s, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(s, r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"##);
    let _ = writeln!(s, r##"<defs><pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6"><path d="M0,6 L6,0" stroke="#000000" stroke-width="0.8"/></pattern></defs>"##);
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    // regular cells first so refined cells draw on top
    let mut rows: Vec<&PhaseRow> = t.rows.iter().collect();
    rows.sort_by_key(|r| r.refined);
    for r in rows {
        let fill = r.winners.first().map_or("#bbbbbb", |k| colour(*k));
        let pts = hexagon(t, r);
        let _ = writeln!(s, r##"<polygon points="{pts}" fill="{fill}" stroke="{fill}" stroke-width="0.5"/>"##);
        if r.winners.len() > 1 {
            let _ = writeln!(s, r##"<polygon points="{pts}" fill="url(#hatch)"/>"##);
        }
    }
    let corners = [place([1.0, 0.0, 0.0]), place([0.0, 1.0, 0.0]), place([0.0, 0.0, 1.0])];
    let outline: Vec<String> = corners.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
    let _ = writeln!(s, r##"<polygon points="{}" fill="none" stroke="#000000" stroke-width="1"/>"##, outline.join(" "));
    let labels = [("v1", -30.0, 18.0), ("v2", 8.0, 18.0), ("v3", -8.0, -10.0)];
    for ((x, y), (text, dx, dy)) in corners.iter().zip(labels) {
        let _ = writeln!(s, r##"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="14">{text}</text>"##, x + dx, y + dy);
    }
    for (i, k) in CandidateKind::ALL.iter().enumerate() {
        let y = MARGIN + 22.0 * i as f64;
        let _ = writeln!(s, r##"<rect x="{LEGEND_X:.0}" y="{y:.0}" width="16" height="16" fill="{}"/>"##, colour(*k));
        let _ = writeln!(
            s,
            r##"<text x="{:.0}" y="{:.0}" font-family="sans-serif" font-size="12">{} {}</text>"##,
            LEGEND_X + 24.0,
            y + 13.0,
            k.code(),
            k.name()
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_ternary(t: &PhaseTable, path: &Path) -> Result<()> {
    std::fs::write(path, ternary_svg(t))?;
    Ok(())
}
