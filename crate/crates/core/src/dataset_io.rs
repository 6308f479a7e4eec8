//! Dataset CSV format.
//!
//! ```text
//! label,t_start,dt,n
//! LOS,<t_start>,<dt>,<n>,<tap_0>,...,<tap_{n-1}>
//! ```
//!
//! Reals are written with enough significant digits to round-trip exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::cir::{Cir, Dataset, Label, LabeledCir, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DATASET_HEADER: &str = "label,t_start,dt,n";

pub fn write_dataset<T: Scalar, W: Write>(ds: &Dataset<T>, mut out: W) -> Result<()> {
    writeln!(out, "{DATASET_HEADER}")?;
    let g = ds.grid();
    let prefix = format!(
        "{},{},{}",
        g.t_start.to_full_precision(),
        g.dt.to_full_precision(),
        g.n
    );
    let mut line = String::new();
    for rec in ds.records() {
        line.clear();
        line.push_str(rec.label.as_str());
        line.push(',');
        line.push_str(&prefix);
        for &tap in rec.cir.taps() {
            line.push(',');
            line.push_str(&tap.to_full_precision());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn parse_num<T: Scalar>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.trim()
        .parse::<T>()
        .map_err(|_| Error::format(line, format!("cannot parse {what} {tok:?}")))
}

pub fn read_dataset<T: Scalar, R: BufRead>(input: R) -> Result<Dataset<T>> {
    let mut lines = input.lines();
    match lines.next() {
        Some(h) => {
            let h = h?;
            if h.trim_end() != DATASET_HEADER {
                return Err(Error::format(
                    1,
                    format!("expected header {DATASET_HEADER:?}"),
                ));
            }
        }
        None => return Err(Error::format(1, "empty file")),
    }

    let mut grid: Option<TimeGrid<T>> = None;
    let mut records = Vec::new();
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label: Label = fields
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|e: Error| Error::format(lineno, e.to_string()))?;
        let mut next = |what: &str| {
            fields
                .next()
                .ok_or_else(|| Error::format(lineno, format!("missing {what}")))
        };
        let t_start: T = parse_num(next("t_start")?, lineno, "t_start")?;
        let dt: T = parse_num(next("dt")?, lineno, "dt")?;
        let n_tok = next("n")?;
        let n: usize = n_tok
            .trim()
            .parse()
            .map_err(|_| Error::format(lineno, format!("cannot parse n {n_tok:?}")))?;
        let row_grid =
            TimeGrid::new(t_start, dt, n).map_err(|e| Error::format(lineno, e.to_string()))?;
        match grid {
            None => grid = Some(row_grid),
            Some(g) if g != row_grid => {
                return Err(Error::format(lineno, "grid differs from earlier rows"));
            }
            Some(_) => {}
        }
        let taps = fields
            .map(|tok| parse_num::<T>(tok, lineno, "tap"))
            .collect::<Result<Vec<_>>>()?;
        if taps.len() != n {
            return Err(Error::format(
                lineno,
                format!("{} taps for a {n}-sample grid", taps.len()),
            ));
        }
        let cir = Cir::new(row_grid, taps).map_err(|e| Error::format(lineno, e.to_string()))?;
        records.push(LabeledCir { cir, label });
    }
    let grid = grid.ok_or_else(|| Error::format(1, "no records"))?;
    Dataset::new(grid, records)
}

/// SHA-256 of the dataset's CSV serialization, as lowercase hex.
pub fn dataset_sha256<T: Scalar>(ds: &Dataset<T>) -> String {
    use sha2::{Digest, Sha256};
    let mut buf = Vec::new();
    write_dataset(ds, &mut buf).expect("writing to memory");
    hex::encode(Sha256::digest(&buf))
}

pub fn save_dataset<T: Scalar>(ds: &Dataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let f = File::create(path)?;
    write_dataset(ds, BufWriter::new(f))
}

pub fn load_dataset<T: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    let f = File::open(path)?;
    read_dataset(BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset<f64>> {
        read_dataset(text.as_bytes())
    }

    #[test]
    fn reads_minimal_file() {
        let ds = parse("label,t_start,dt,n\nLOS,0,0.5,2,1,2\nNLOS,0,0.5,2,0,3\n").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.records()[1].label, Label::Nlos);
        assert_eq!(ds.records()[1].cir.taps(), &[0.0, 3.0]);
    }

    #[test]
    fn short_row_names_line() {
        let mut text = String::from("label,t_start,dt,n\nLOS,0,0.02,500");
        for _ in 0..499 {
            text.push_str(",0.5");
        }
        text.push('\n');
        match parse(&text) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_label_is_format_error() {
        match parse("label,t_start,dt,n\nLOS,0,1,1,1\nMAYBE,0,1,1,1\n") {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn grid_mismatch_is_format_error() {
        match parse("label,t_start,dt,n\nLOS,0,1,1,1\nLOS,0,2,1,1\n") {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn bad_header_and_garbage() {
        assert!(matches!(parse("x,y\n"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(parse(""), Err(Error::Format { line: 1, .. })));
        assert!(matches!(
            parse("label,t_start,dt,n\nLOS,0,1,2,1,abc\n"),
            Err(Error::Format { line: 2, .. })
        ));
    }

    #[test]
    fn writes_header_and_rows() {
        let ds = parse("label,t_start,dt,n\nLOS,0,0.5,2,1,2\n").unwrap();
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(DATASET_HEADER));
        let row = lines.next().unwrap();
        assert!(row.starts_with("LOS,"));
        assert_eq!(row.split(',').count(), 6);
        assert_eq!(parse(&text).unwrap(), ds);
    }
}
