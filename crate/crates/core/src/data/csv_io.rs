use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{Error, FeatureMatrix, Result};

/// Which column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
    #[default]
    #[serde(skip)]
    Last,
}

impl LabelColumn {
    pub fn is_last(&self) -> bool {
        matches!(self, LabelColumn::Last)
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    pub label_column: LabelColumn,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: true,
            label_column: LabelColumn::Last,
        }
    }
}

/// Reads numeric features plus one categorical label column. Labels are
/// densified in order of first appearance.
pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<Dataset> {
    let shown = path.display().to_string();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: shown.clone(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.has_header)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err(0, format!("{other:?}")),
        })?;

    let headers: Option<Vec<String>> = if opts.has_header {
        let h = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
        Some(h.iter().map(|s| s.trim().to_string()).collect())
    } else {
        None
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut width: Option<usize> = headers.as_ref().map(Vec::len);
    let mut label_idx: Option<usize> = None;
    for (k, record) in reader.records().enumerate() {
        let line = k + 1 + usize::from(opts.has_header);
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_err(
                line,
                format!("ragged row: expected {w} fields, found {}", record.len()),
            ));
        }
        let li = match label_idx {
            Some(li) => li,
            None => {
                let li = resolve_label_column(&opts.label_column, headers.as_deref(), w)
                    .map_err(|m| parse_err(line, m))?;
                label_idx = Some(li);
                li
            }
        };
        let mut features = Vec::with_capacity(w - 1);
        for (c, field) in record.iter().enumerate() {
            if c == li {
                continue;
            }
            let v: f64 = field.trim().parse().map_err(|_| {
                parse_err(line, format!("non-numeric feature '{field}' in column {c}"))
            })?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite feature in column {c}")));
            }
            features.push(v);
        }
        rows.push(features);
        raw_labels.push(record[li].trim().to_string());
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no data rows".into()));
    }
    if rows[0].is_empty() {
        return Err(parse_err(0, "no feature columns besides the label".into()));
    }

    let mut class_names: Vec<String> = Vec::new();
    let truth = raw_labels
        .into_iter()
        .map(|l| match class_names.iter().position(|c| *c == l) {
            Some(id) => id,
            None => {
                class_names.push(l);
                class_names.len() - 1
            }
        })
        .collect();
    Ok(Dataset {
        features: FeatureMatrix::from_rows(&rows)?,
        truth,
        class_names,
    })
}

fn resolve_label_column(
    column: &LabelColumn,
    headers: Option<&[String]>,
    width: usize,
) -> std::result::Result<usize, String> {
    if width < 2 {
        return Err("need at least one feature column and a label column".into());
    }
    match column {
        LabelColumn::Last => Ok(width - 1),
        LabelColumn::Index(i) if *i < width => Ok(*i),
        LabelColumn::Index(i) => Err(format!("label column {i} out of range for {width} columns")),
        LabelColumn::Name(name) => headers
            .ok_or_else(|| {
                format!("label column '{name}' given by name but the file has no header")
            })?
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("no column named '{name}'")),
    }
}

/// Writes features and class names (label last) with a `f0..f{d-1},label`
/// header. Floats use shortest round-trip formatting.
pub fn save_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidInput(format!("{other:?}")),
    })?;
    let io_err = |e: csv::Error| Error::InvalidInput(e.to_string());
    let mut header: Vec<String> = (0..data.features.d()).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    writer.write_record(&header).map_err(io_err)?;
    for i in 0..data.n() {
        let mut record: Vec<String> = data.features.row(i).iter().map(|v| v.to_string()).collect();
        record.push(data.class_names[data.truth[i]].clone());
        writer.write_record(&record).map_err(io_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn three_rows() {
        let f = write_tmp("a,b,class\n1.0,2.0,x\n3,4,y\n5,6,x\n");
        let d = load_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!((d.features.n(), d.features.d()), (3, 2));
        assert_eq!(d.truth, vec![0, 1, 0]);
        assert_eq!(d.class_names, vec!["x", "y"]);
    }

    #[test]
    fn header_only_has_no_rows() {
        let f = write_tmp("a,b,class\n");
        let err = load_csv(f.path(), &CsvOptions::default()).unwrap_err();
        assert!(err.to_string().contains("no data rows"), "{err}");
    }

    #[test]
    fn ragged_and_non_numeric_report_line() {
        let f = write_tmp("a,b,class\n1,2,x\n3,y\n");
        let err = load_csv(f.path(), &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let f = write_tmp("a,b,class\n1,2,x\n3,oops,y\n");
        let err = load_csv(f.path(), &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn label_by_name_and_index_with_semicolons() {
        let f = write_tmp("species;w;h\nsetosa;1;2\nvirginica;3;4\n");
        let by_name = CsvOptions {
            delimiter: b';',
            label_column: LabelColumn::Name("species".into()),
            ..CsvOptions::default()
        };
        let d = load_csv(f.path(), &by_name).unwrap();
        assert_eq!(d.features.row(1).to_vec(), vec![3.0, 4.0]);
        let by_index = CsvOptions {
            label_column: LabelColumn::Index(0),
            ..by_name
        };
        assert_eq!(load_csv(f.path(), &by_index).unwrap(), d);
        let missing = CsvOptions {
            delimiter: b';',
            label_column: LabelColumn::Name("nope".into()),
            ..CsvOptions::default()
        };
        assert!(load_csv(f.path(), &missing).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_csv(Path::new("/nonexistent/data.csv"), &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }), "{err}");
    }

    #[test]
    fn save_load_round_trip() {
        let f = write_tmp("x,y,label\n0.1,-2.5e-7,b\n3.3333333333333335,4,a\n");
        let d = load_csv(f.path(), &CsvOptions::default()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        save_csv(&d, out.path()).unwrap();
        assert_eq!(load_csv(out.path(), &CsvOptions::default()).unwrap(), d);
    }
}
