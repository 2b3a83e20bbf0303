use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::dataset::{AmputedDataset, CompleteDataset, MissingnessMask};
use crate::error::{Error, Result};

pub const NA_TOKEN: &str = "NA";

fn csv_error(e: ::csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Csv {
        line,
        column: String::new(),
        reason: e.to_string(),
    }
}

/// Header plus cells, `None` for NA when `allow_na`.
fn read_table<R: Read>(reader: R, allow_na: bool) -> Result<(Vec<String>, DMatrix<Option<f64>>)> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let names: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if names.is_empty() {
        return Err(Error::Csv {
            line: 1,
            column: String::new(),
            reason: "missing header".into(),
        });
    }
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut row = Vec::with_capacity(names.len());
        for (field, name) in record.iter().zip(&names) {
            let field = field.trim();
            if field == NA_TOKEN {
                if !allow_na {
                    return Err(Error::Csv {
                        line,
                        column: name.clone(),
                        reason: "NA in a dataset loaded as complete".into(),
                    });
                }
                row.push(None);
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(Some(v)),
                _ => {
                    return Err(Error::Csv {
                        line,
                        column: name.clone(),
                        reason: format!("cannot parse {field:?} as a number"),
                    })
                }
            }
        }
        rows.push(row);
    }
    let d = names.len();
    let values = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    Ok((names, values))
}

pub fn read_complete<R: Read>(reader: R) -> Result<CompleteDataset> {
    let (names, values) = read_table(reader, false)?;
    CompleteDataset::new(names, values.map(|v| v.expect("NA rejected")))
}

pub fn read_amputed<R: Read>(reader: R) -> Result<AmputedDataset> {
    let (names, values) = read_table(reader, true)?;
    AmputedDataset::new(names, values)
}

/// Load a complete numeric dataset with a header row.
pub fn load_csv(path: &Path) -> Result<CompleteDataset> {
    read_complete(BufReader::new(File::open(path)?))
}

/// Load a dataset whose missing cells are the literal token `NA`.
pub fn load_amputed(path: &Path) -> Result<AmputedDataset> {
    read_amputed(BufReader::new(File::open(path)?))
}

pub fn load_mask(path: &Path) -> Result<MissingnessMask> {
    let (_, values) = read_table(BufReader::new(File::open(path)?), false)?;
    let mut bad = None;
    let mask = values.map(|v| match v {
        Some(0.0) => false,
        Some(1.0) => true,
        other => {
            bad = bad.or(other);
            false
        }
    });
    if let Some(v) = bad {
        return Err(Error::invalid("mask", format!("entry {v} is not 0 or 1")));
    }
    Ok(MissingnessMask::new(mask))
}

/// Shortest text that parses back to the same `f64`.
pub fn csv_number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn write_rows<W: Write>(
    writer: W,
    names: &[String],
    nrows: usize,
    cell: impl Fn(usize, usize) -> String,
) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(writer);
    w.write_record(names).map_err(csv_error)?;
    for i in 0..nrows {
        w.write_record((0..names.len()).map(|j| cell(i, j)))
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_complete<W: Write>(writer: W, y: &CompleteDataset) -> Result<()> {
    write_rows(writer, y.names(), y.nrows(), |i, j| csv_number(y.get(i, j)))
}

pub fn write_amputed<W: Write>(writer: W, x: &AmputedDataset) -> Result<()> {
    write_rows(writer, x.names(), x.nrows(), |i, j| {
        x.get(i, j).map_or_else(|| NA_TOKEN.to_string(), csv_number)
    })
}

pub fn write_mask<W: Write>(writer: W, names: &[String], m: &MissingnessMask) -> Result<()> {
    if names.len() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for a {}-column mask",
            names.len(),
            m.ncols()
        )));
    }
    write_rows(writer, names, m.nrows(), |i, j| if m.get(i, j) { "1" } else { "0" }.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn save_complete(path: &Path, y: &CompleteDataset) -> Result<()> {
    write_complete(create(path)?, y)
}

pub fn save_amputed(path: &Path, x: &AmputedDataset) -> Result<()> {
    write_amputed(create(path)?, x)
}

pub fn save_mask(path: &Path, names: &[String], m: &MissingnessMask) -> Result<()> {
    write_mask(create(path)?, names, m)
}

/// Real matrix with a header, e.g. a probability matrix.
pub fn save_matrix(path: &Path, names: &[String], values: &DMatrix<f64>) -> Result<()> {
    write_rows(create(path)?, names, values.nrows(), |i, j| csv_number(values[(i, j)]))
}

/// Row-to-scenario map, rows 0-based.
pub fn save_assignment(path: &Path, assignment: &[usize]) -> Result<()> {
    let names = ["row".to_string(), "scenario".to_string()];
    write_rows(create(path)?, &names, assignment.len(), |i, j| {
        if j == 0 { i } else { assignment[i] }.to_string()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let y = CompleteDataset::from_rows(&[
            vec![0.1, 1.0 / 3.0, 1e-20],
            vec![2.0, -5.5, 123456.789],
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_complete(&mut buf, &y).unwrap();
        assert_eq!(read_complete(buf.as_slice()).unwrap(), y);
    }

    #[test]
    fn na_token_round_trip() {
        let text = "a,b\n1,NA\nNA,2.5\n";
        let x = read_amputed(text.as_bytes()).unwrap();
        assert!(x.is_na(0, 1) && x.is_na(1, 0));
        let mut buf = Vec::new();
        write_amputed(&mut buf, &x).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,NA\nNA,2.5\n");
    }

    #[test]
    fn errors_locate_the_cell() {
        let err = read_complete("a,b\n1,2\n3,x\n".as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("column b"), "{msg}");

        let err = read_complete("a,b\n1,NA\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");

        assert!(read_complete("a,b\n1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn mask_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = MissingnessMask::from_fn(3, 2, |i, j| (i + j) % 2 == 0);
        save_mask(&path, &["a".into(), "b".into()], &m).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n1,0\n0,1\n1,0\n");
        assert_eq!(load_mask(&path).unwrap(), m);
    }
}
