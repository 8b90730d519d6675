//! Plain-text sparse problem dump.
//!
//! ```text
//! milp <ncols> <nrows>
//! col <j> <lower> <upper> <cost> <c|b>
//! row <i> <L|E|G> <rhs>
//! nz <i> <j> <coeff>
//! ```
//!
//! Numbers use Rust's shortest round-trip formatting, so a dump reads back
//! bit-identical.

use std::fmt::Write as _;

use thiserror::Error;

use super::{MilpProblem, Row, Sense};

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {msg}")]
pub struct DumpError {
    pub line: usize,
    pub msg: String,
}

pub fn write_dump(p: &MilpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "milp {} {}", p.num_cols(), p.num_rows());
    for j in 0..p.num_cols() {
        let kind = if p.binary[j] { 'b' } else { 'c' };
        let _ = writeln!(out, "col {j} {:?} {:?} {:?} {kind}", p.lower[j], p.upper[j], p.objective[j]);
    }
    for (i, row) in p.rows.iter().enumerate() {
        let sense = match row.sense {
            Sense::Le => 'L',
            Sense::Eq => 'E',
            Sense::Ge => 'G',
        };
        let _ = writeln!(out, "row {i} {sense} {:?}", row.rhs);
    }
    for (i, row) in p.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            let _ = writeln!(out, "nz {i} {j} {a:?}");
        }
    }
    out
}

pub fn read_dump(text: &str) -> Result<MilpProblem, DumpError> {
    let mut p = MilpProblem::new();
    let mut header_seen = false;
    let (mut ncols, mut nrows) = (0usize, 0usize);
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let err = |msg: &str| DumpError { line: line_no, msg: msg.to_string() };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let num = |k: usize| -> Result<f64, DumpError> {
            toks.get(k).ok_or_else(|| err("missing field"))?.parse::<f64>().map_err(|_| err("bad number"))
        };
        let idx = |k: usize| -> Result<usize, DumpError> {
            toks.get(k).ok_or_else(|| err("missing field"))?.parse::<usize>().map_err(|_| err("bad index"))
        };
        match toks[0] {
            "milp" => {
                ncols = idx(1)?;
                nrows = idx(2)?;
                p.objective = vec![0.0; ncols];
                p.lower = vec![0.0; ncols];
                p.upper = vec![0.0; ncols];
                p.binary = vec![false; ncols];
                p.rows = (0..nrows).map(|_| Row { coeffs: Vec::new(), sense: Sense::Le, rhs: 0.0 }).collect();
                header_seen = true;
            }
            _ if !header_seen => return Err(err("expected 'milp' header")),
            "col" => {
                let j = idx(1)?;
                if j >= ncols {
                    return Err(err("column out of range"));
                }
                p.lower[j] = num(2)?;
                p.upper[j] = num(3)?;
                p.objective[j] = num(4)?;
                p.binary[j] = match toks.get(5) {
                    Some(&"b") => true,
                    Some(&"c") => false,
                    _ => return Err(err("column kind must be 'c' or 'b'")),
                };
            }
            "row" => {
                let i = idx(1)?;
                if i >= nrows {
                    return Err(err("row out of range"));
                }
                p.rows[i].sense = match toks.get(2) {
                    Some(&"L") => Sense::Le,
                    Some(&"E") => Sense::Eq,
                    Some(&"G") => Sense::Ge,
                    _ => return Err(err("row sense must be L, E or G")),
                };
                p.rows[i].rhs = num(3)?;
            }
            "nz" => {
                let (i, j) = (idx(1)?, idx(2)?);
                if i >= nrows || j >= ncols {
                    return Err(err("nonzero out of range"));
                }
                p.rows[i].coeffs.push((j, num(3)?));
            }
            other => return Err(err(&format!("unknown record '{other}'"))),
        }
    }
    if !header_seen {
        return Err(DumpError { line: 0, msg: "empty dump".into() });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_value() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            Just(f64::INFINITY),
            Just(f64::NEG_INFINITY),
            Just(1.0 / 6.0),
            Just(-0.0),
        ]
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            cols in prop::collection::vec((arb_value(), arb_value(), any::<f64>().prop_filter("finite", |v| v.is_finite()), any::<bool>()), 1..8),
            rows in prop::collection::vec((prop::collection::vec((0usize..8, any::<f64>().prop_filter("finite", |v| v.is_finite())), 0..5), 0u8..3, any::<f64>().prop_filter("finite", |v| v.is_finite())), 0..6),
        ) {
            let mut p = MilpProblem::new();
            for (lo, hi, c, b) in &cols {
                let j = p.add_column(*lo, *hi, *c);
                p.binary[j] = *b;
            }
            let n = cols.len();
            for (coeffs, sense, rhs) in rows {
                let sense = [Sense::Le, Sense::Eq, Sense::Ge][sense as usize];
                p.add_row(coeffs.into_iter().map(|(j, a)| (j % n, a)).collect(), sense, rhs);
            }
            let back = read_dump(&write_dump(&p)).unwrap();
            prop_assert_eq!(write_dump(&back), write_dump(&p));
            for j in 0..n {
                prop_assert_eq!(back.lower[j].to_bits(), p.lower[j].to_bits());
                prop_assert_eq!(back.upper[j].to_bits(), p.upper[j].to_bits());
                prop_assert_eq!(back.objective[j].to_bits(), p.objective[j].to_bits());
            }
            prop_assert_eq!(back.rows.len(), p.rows.len());
            for (a, b) in back.rows.iter().zip(&p.rows) {
                prop_assert_eq!(a.sense, b.sense);
                prop_assert_eq!(a.rhs.to_bits(), b.rhs.to_bits());
                prop_assert_eq!(a.coeffs.len(), b.coeffs.len());
                for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
                    prop_assert_eq!(x.0, y.0);
                    prop_assert_eq!(x.1.to_bits(), y.1.to_bits());
                }
            }
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_dump("").is_err());
        assert!(read_dump("col 0 0 1 0 c\n").is_err());
        assert!(read_dump("milp 1 0\ncol 3 0 1 0 c\n").is_err());
        assert!(read_dump("milp 1 1\nrow 0 X 1\n").is_err());
    }
}
