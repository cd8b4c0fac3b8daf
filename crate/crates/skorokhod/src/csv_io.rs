//! Path files: header `time,value,right_value`, one row per grid time.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use skorokhod_core::{Error as CoreError, RegulatedPath};

pub const HEADER: [&str; 3] = ["time", "value", "right_value"];

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{file}: line {line}: {message}")]
    Line { file: String, line: u64, message: String },
    #[error("{file}: {source}")]
    Io { file: String, source: std::io::Error },
}

/// 17 significant digits, enough to round-trip every double.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn read_path(path: &Path) -> Result<RegulatedPath, CsvError> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|source| CsvError::Io { file: name.clone(), source })?;
    read_path_from(file, &name)
}

pub fn read_path_from(reader: impl Read, name: &str) -> Result<RegulatedPath, CsvError> {
    let err = |line: u64, message: String| CsvError::Line { file: name.to_string(), line, message };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| err(1, e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(err(1, format!("expected header `{}`", HEADER.join(","))));
    }
    let (mut times, mut values, mut rights) = (Vec::new(), Vec::new(), Vec::new());
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(err(line, format!("expected 3 fields, found {}", record.len())));
        }
        let field =
            |i: usize| record[i].parse::<f64>().map_err(|_| err(line, format!("`{}` is not a number", &record[i])));
        times.push(field(0)?);
        values.push(field(1)?);
        rights.push(field(2)?);
        lines.push(line);
    }
    if times.is_empty() {
        return Err(err(2, "no data rows".into()));
    }
    RegulatedPath::new(times, values, rights).map_err(|e| match e {
        CoreError::InvalidPath(issue) => {
            let line = issue.index().map_or(2, |i| lines[i.min(lines.len() - 1)]);
            err(line, issue.to_string())
        }
        other => err(2, other.to_string()),
    })
}

pub fn write_path(path: &Path, p: &RegulatedPath) -> std::io::Result<()> {
    let rows = (0..p.len()).map(|i| vec![p.times()[i], p.values()[i], p.right_values()[i]]);
    write_table(path, &HEADER, rows)
}

/// Numeric table with a header line.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> std::io::Result<()> {
    write_records(path, header, rows.into_iter().map(|row| row.into_iter().map(format_f64).collect()))
}

/// Table of already formatted fields.
pub fn write_records(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_bit_exactly() {
        let p = RegulatedPath::new(vec![0.0, 0.1, 1.0 / 3.0], vec![0.0, -1e-300, 2.0_f64.sqrt()], vec![0.0, 7.5, -0.1])
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p.csv");
        write_path(&file, &p).unwrap();
        assert_eq!(read_path(&file).unwrap(), p);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_header = "t,v,r\n0,0,0\n";
        assert!(matches!(read_path_from(bad_header.as_bytes(), "x"), Err(CsvError::Line { line: 1, .. })));
        let not_number = "time,value,right_value\n0,0,0\n1,abc,0\n";
        assert!(matches!(read_path_from(not_number.as_bytes(), "x"), Err(CsvError::Line { line: 3, .. })));
        let not_increasing = "time,value,right_value\n0,0,0\n1,0,0\n1,0,0\n";
        match read_path_from(not_increasing.as_bytes(), "x") {
            Err(CsvError::Line { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let short = "time,value,right_value\n0,0\n";
        assert!(matches!(read_path_from(short.as_bytes(), "x"), Err(CsvError::Line { line: 2, .. })));
    }

    #[test]
    fn formats_with_seventeen_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(f64::INFINITY), "inf");
        assert_eq!(format_f64(-2.0), "-2.0000000000000000e0");
    }
}
