//! Labelled numeric data, column-major, with CSV loading.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kendall::has_ties;

/// An `n x d` matrix of finite reals with column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(labels: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Dataset> {
        if labels.len() != columns.len() {
            return Err(Error::LengthMismatch { expected: labels.len(), actual: columns.len() });
        }
        if labels.iter().collect::<BTreeSet<_>>().len() != labels.len() {
            return Err(Error::Domain("column labels must be distinct".into()));
        }
        if let Some(first) = columns.first() {
            for col in &columns[1..] {
                if col.len() != first.len() {
                    return Err(Error::LengthMismatch { expected: first.len(), actual: col.len() });
                }
            }
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("data must be finite".into()));
        }
        Ok(Dataset { labels, columns })
    }

    pub fn n(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.labels.iter().position(|l| l == label).map(|i| self.columns[i].as_slice())
    }

    /// The named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Dataset> {
        let columns = names
            .iter()
            .map(|name| {
                self.column(name)
                    .map(<[f64]>::to_vec)
                    .ok_or_else(|| Error::Domain(format!("column {name:?} not found")))
            })
            .collect::<Result<_>>()?;
        Dataset::new(names.to_vec(), columns)
    }

    /// Labels of columns containing repeated values.
    pub fn tied_columns(&self) -> Vec<String> {
        self.labels
            .iter()
            .zip(&self.columns)
            .filter(|(_, col)| has_ties(col))
            .map(|(label, _)| label.clone())
            .collect()
    }

    /// Row-major copy.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.columns.iter().map(|c| c[i]).collect()).collect()
    }
}

/// Reads a CSV file with a header row. With `select`, only the named
/// columns are parsed, in that order; otherwise every column is.
pub fn load_csv(path: &Path, select: Option<&[String]>) -> Result<Dataset> {
    let fail = |message: String| Error::Data { path: path.to_path_buf(), message };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| fail(e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| fail(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(fail("file is empty or has no header row".into()));
    }
    let names: Vec<String> = match select {
        Some(names) => names.to_vec(),
        None => header.clone(),
    };
    let positions = names
        .iter()
        .map(|name| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| fail(format!("column {name:?} not found; available: {}", header.join(", "))))
        })
        .collect::<Result<Vec<usize>>>()?;
    let mut columns = vec![Vec::new(); names.len()];
    for (row, record) in reader.records().enumerate() {
        // Header is line 1.
        let line = row + 2;
        let record = record.map_err(|e| fail(format!("line {line}: {e}")))?;
        for (col, (&pos, name)) in positions.iter().zip(&names).enumerate() {
            let cell = record.get(pos).unwrap_or("");
            if cell.is_empty() {
                return Err(fail(format!("line {line}, column {name:?}: missing value")));
            }
            let value: f64 = cell
                .parse()
                .map_err(|_| fail(format!("line {line}, column {name:?}: {cell:?} is not a number")))?;
            if !value.is_finite() {
                return Err(fail(format!("line {line}, column {name:?}: {cell:?} is not finite")));
            }
            columns[col].push(value);
        }
    }
    if columns.first().is_none_or(Vec::is_empty) {
        return Err(fail("file has no data rows".into()));
    }
    Dataset::new(names, columns).map_err(|e| fail(e.to_string()))
}

/// Writes columns as CSV with a header row.
pub fn write_csv<W: std::io::Write>(writer: W, labels: &[String], columns: &[Vec<f64>]) -> Result<()> {
    let io = |e: csv::Error| Error::Domain(format!("writing CSV: {e}"));
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(labels).map_err(io)?;
    let n = columns.first().map_or(0, Vec::len);
    for i in 0..n {
        out.write_record(columns.iter().map(|c| format!("{}", c[i]))).map_err(io)?;
    }
    out.flush().map_err(|e| Error::Domain(format!("writing CSV: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn loads_selected_columns() {
        let f = file("a,b,c\n1,2,3\n4,5,6\n7,8,9\n");
        let ds = load_csv(f.path(), Some(&names(&["c", "a"]))).unwrap();
        assert_eq!(ds.labels(), &names(&["c", "a"]));
        assert_eq!(ds.columns(), &[vec![3.0, 6.0, 9.0], vec![1.0, 4.0, 7.0]]);
        let all = load_csv(f.path(), None).unwrap();
        assert_eq!((all.n(), all.d()), (3, 3));
        assert!(all.tied_columns().is_empty());
    }

    #[test]
    fn reports_errors_with_location() {
        let f = file("a,b\n1,2\n3,x\n");
        let err = load_csv(f.path(), None).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("\"b\"") && err.contains("\"x\""), "{err}");

        let f = file("a,b\n1,2\n3,\n");
        let err = load_csv(f.path(), None).unwrap_err().to_string();
        assert!(err.contains("missing value"), "{err}");

        let f = file("a,b\n1,2\n");
        let err = load_csv(f.path(), Some(&names(&["z"]))).unwrap_err().to_string();
        assert!(err.contains("\"z\" not found"), "{err}");

        let f = file("");
        let err = load_csv(f.path(), None).unwrap_err();
        assert!(matches!(&err, Error::Data { path, .. } if path == f.path()), "{err}");
        assert!(err.to_string().contains(&f.path().display().to_string()));

        let f = file("a,b\n");
        assert!(load_csv(f.path(), None).is_err());
    }

    #[test]
    fn flags_ties() {
        let f = file("a,b\n1,2\n1,3\n2,4\n");
        assert_eq!(load_csv(f.path(), None).unwrap().tied_columns(), names(&["a"]));
    }

    #[test]
    fn csv_round_trip() {
        let labels = names(&["U1", "U2"]);
        let cols = vec![vec![0.25, 0.5], vec![0.125, 1.0 / 3.0]];
        let mut buf = Vec::new();
        write_csv(&mut buf, &labels, &cols).unwrap();
        let f = file(std::str::from_utf8(&buf).unwrap());
        assert_eq!(load_csv(f.path(), None).unwrap().columns(), &cols);
    }
}
