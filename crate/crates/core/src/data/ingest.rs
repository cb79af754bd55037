use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schema::{check_header, column_key, normalize_header, DatasetKind};
use crate::error::{Error, Result};

/// Text cells straight from the CSV, one header for all source files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTable {
    pub kind: DatasetKind,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub sources: Vec<PathBuf>,
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        let key = column_key(name);
        self.columns.iter().position(|c| column_key(c) == key)
    }
}

/// Parse one CSV stream. `origin` is only used in diagnostics.
pub fn parse_csv<R: Read>(reader: R, origin: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| csv_error(origin, e))?
        .iter()
        .map(str::to_owned)
        .collect::<Vec<_>>();
    if header.is_empty() || header.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::Schema {
            path: origin.to_path_buf(),
            message: "missing header row".into(),
        });
    }
    let header = normalize_header(header.iter().map(String::as_str));
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(origin, e))?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: record.position().map_or(0, |p| p.line()),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        rows.push(record.iter().map(str::to_owned).collect());
    }
    Ok((header, rows))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

fn abbreviate(names: &[String]) -> String {
    const SHOWN: usize = 6;
    let mut s = names.iter().take(SHOWN).cloned().collect::<Vec<_>>().join(", ");
    if names.len() > SHOWN {
        s.push_str(&format!(" (+{} more)", names.len() - SHOWN));
    }
    s
}

fn read_file(path: &Path, kind: DatasetKind) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let (header, rows) = parse_csv(std::io::BufReader::new(file), path)?;
    let check = check_header(kind, &header);
    if !check.is_ok() {
        let mut parts = Vec::new();
        if !check.missing.is_empty() {
            parts.push(format!("missing columns: {}", abbreviate(&check.missing)));
        }
        if !check.extra.is_empty() {
            parts.push(format!("unknown columns: {}", abbreviate(&check.extra)));
        }
        return Err(Error::Schema {
            path: path.to_path_buf(),
            message: format!("header does not match the {kind} layout; {}", parts.join("; ")),
        });
    }
    Ok((header, rows))
}

/// Read and concatenate CSV files of one dataset kind.
///
/// Files are parsed in parallel and concatenated in argument order. The
/// output header is the first file's; later files are aligned by name.
/// An optional identifier column absent from a later file is left empty.
pub fn ingest<P: AsRef<Path> + Sync>(paths: &[P], kind: DatasetKind) -> Result<RawTable> {
    if paths.is_empty() {
        return Err(Error::Usage("no input files given".into()));
    }
    let parsed = paths
        .par_iter()
        .map(|p| read_file(p.as_ref(), kind))
        .collect::<Result<Vec<_>>>()?;

    let mut parsed = parsed.into_iter();
    let (columns, mut rows) = parsed.next().expect("at least one file");
    let keys: Vec<String> = columns.iter().map(|c| column_key(c)).collect();
    let optional: Vec<String> = kind.optional_columns().iter().map(|c| column_key(c)).collect();

    for ((header, file_rows), path) in parsed.zip(paths.iter().skip(1)) {
        let file_keys: Vec<String> = header.iter().map(|c| column_key(c)).collect();
        let mut map = Vec::with_capacity(keys.len());
        for (name, key) in columns.iter().zip(&keys) {
            match file_keys.iter().position(|k| k == key) {
                Some(j) => map.push(Some(j)),
                None if optional.contains(key) => map.push(None),
                None => {
                    return Err(Error::Schema {
                        path: path.as_ref().to_path_buf(),
                        message: format!("column {name:?} present in the first file is missing"),
                    })
                }
            }
        }
        for extra in header.iter().zip(&file_keys).filter(|(_, k)| !keys.contains(k)) {
            if !optional.contains(extra.1) {
                return Err(Error::Schema {
                    path: path.as_ref().to_path_buf(),
                    message: format!("column {:?} absent from the first file", extra.0),
                });
            }
        }
        rows.extend(file_rows.into_iter().map(|r| {
            map.iter()
                .map(|m| m.map_or_else(String::new, |j| r[j].clone()))
                .collect()
        }));
    }

    Ok(RawTable {
        kind,
        columns,
        rows,
        sources: paths.iter().map(|p| p.as_ref().to_path_buf()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    fn body(rows: usize) -> String {
        let mut s = String::from("a,b,Label\n");
        for i in 0..rows {
            s.push_str(&format!("{i},{},{}\n", i * 2, if i % 2 == 0 { "BENIGN" } else { "DDoS" }));
        }
        s
    }

    #[test]
    fn concatenates_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", &body(100));
        let b = write(dir.path(), "b.csv", &body(50));
        let t = ingest(&[a, b], DatasetKind::Generic).unwrap();
        assert_eq!(t.n_rows(), 150);
        assert_eq!(t.columns, vec!["a", "b", "Label"]);
    }

    #[test]
    fn missing_label_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "a,b\n1,2\n");
        assert!(matches!(ingest(&[a], DatasetKind::Generic), Err(Error::Schema { .. })));
    }

    #[test]
    fn ragged_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "a,Label\n1,X\n2\n3,Y\n");
        match ingest(&[a], DatasetKind::Generic) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn quoted_fields() {
        let (h, rows) = parse_csv("x,Label\n\"1,5\",\"a \"\"b\"\"\"\n".as_bytes(), Path::new("mem")).unwrap();
        assert_eq!(h, vec!["x", "Label"]);
        assert_eq!(rows[0], vec!["1,5", "a \"b\""]);
    }

    #[test]
    fn later_files_aligned_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "a,b,Label\n1,2,X\n");
        let b = write(dir.path(), "b.csv", "Label,b,a\nY,4,3\n");
        let t = ingest(&[a, b], DatasetKind::Generic).unwrap();
        assert_eq!(t.rows[1], vec!["3", "4", "Y"]);
        let c = write(dir.path(), "c.csv", "a,Label\n1,X\n");
        let a2 = dir.path().join("a.csv");
        assert!(matches!(ingest(&[a2, c], DatasetKind::Generic), Err(Error::Schema { .. })));
    }

    #[test]
    fn ddos_header_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let header = super::super::schema::CIC_DDOS2019_COLUMNS.join(",");
        let row = vec!["1"; 88].join(",");
        let a = write(dir.path(), "d.csv", &format!("{header}\n{row}\n"));
        let t = ingest(&[a], DatasetKind::CicDdos2019).unwrap();
        assert_eq!(t.columns.len(), 88);
    }
}
