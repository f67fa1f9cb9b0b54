use std::path::Path;

use super::{Entry, PhaseTable};
use crate::candidates::CandidateKind;
use crate::error::{Error, Result};

/// `x` with `digits` significant digits, trailing zeros dropped.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&e) {
        return format!("{:.*e}", digits.saturating_sub(1), x);
    }
    let decimals = (digits as i32 - 1 - e).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn header(t: &PhaseTable) -> Vec<String> {
    let mut h: Vec<String> = ["v1", "v2", "v3"].map(String::from).into();
    h.extend(t.candidates.iter().map(|c| c.code().to_string()));
    h.push("winner".into());
    h
}

pub fn to_csv_string(t: &PhaseTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(t)).expect("in-memory write");
    for r in &t.rows {
        let mut rec: Vec<String> = r.v.iter().map(|v| format_sig(*v, 12)).collect();
        rec.extend(r.entries.iter().map(|e| match e {
            Entry::Area(a) => format_sig(*a, 12),
            Entry::NotApplicable => "NA".into(),
            Entry::Failed(_) => "ERR".into(),
        }));
        rec.push(r.winners.iter().map(|k| k.code()).collect::<Vec<_>>().join("+"));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn export_csv(t: &PhaseTable, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv_string(t))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub v: [f64; 3],
    /// Failed cells read back with an empty message.
    pub entries: Vec<Entry>,
    pub winners: Vec<CandidateKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub candidates: Vec<CandidateKind>,
    pub rows: Vec<CsvRow>,
}

pub fn read_csv(text: &str) -> Result<CsvTable> {
    let bad = |offset: u64, field: &str, m: String| Error::Parse { offset: offset as usize, field: field.into(), message: m };
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let head = r.headers().map_err(|e| bad(0, "header", e.to_string()))?.clone();
    let n = head.len();
    if n < 4 || &head[0] != "v1" || &head[1] != "v2" || &head[2] != "v3" || &head[n - 1] != "winner" {
        return Err(bad(0, "header", "expected v1,v2,v3,<codes>,winner".into()));
    }
    let candidates = (3..n - 1).map(|i| head[i].parse::<CandidateKind>()).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.position().map_or(0, |p| p.byte()), "record", e.to_string()))?;
        let at = rec.position().map_or(0, |p| p.byte());
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(at, &head[i], format!("{:?}: {e}", &rec[i])));
        let v = [num(0)?, num(1)?, num(2)?];
        let entries = (3..n - 1)
            .map(|i| match &rec[i] {
                "NA" => Ok(Entry::NotApplicable),
                "ERR" => Ok(Entry::Failed(String::new())),
                _ => num(i).map(Entry::Area),
            })
            .collect::<Result<Vec<_>>>()?;
        let w = &rec[n - 1];
        let winners = if w.is_empty() { Vec::new() } else { w.split('+').map(str::parse).collect::<Result<Vec<_>>>()? };
        rows.push(CsvRow { v, entries, winners });
    }
    Ok(CsvTable { candidates, rows })
}

#[cfg(test)]
mod tests {
    use super::super::tests::toy_table;
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_sig(3.0, 12), "3");
        assert_eq!(format_sig(2.123456789012345, 12), "2.12345678901");
        assert_eq!(format_sig(0.05, 12), "0.05");
    }

    #[test]
    fn toy_table_rows_and_round_trip() {
        let t = toy_table();
        let s = to_csv_string(&t);
        assert_eq!(s.lines().count(), 4);
        assert_eq!(s.lines().next().unwrap(), "v1,v2,v3,SDB,2S,winner");
        assert!(s.lines().nth(2).unwrap().contains(",NA,"));
        let back = read_csv(&s).unwrap();
        assert_eq!(back.candidates, t.candidates);
        for (a, b) in back.rows.iter().zip(&t.rows) {
            assert_eq!(a.winners, b.winners);
            assert_eq!(a.entries, b.entries);
        }
    }

    #[test]
    fn malformed_header_rejected() {
        assert!(read_csv("a,b\n1,2\n").is_err());
    }
}
