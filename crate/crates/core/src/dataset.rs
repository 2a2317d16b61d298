//! Feature and label tables on disk.
//!
//! Feature CSVs have a `session_id` column followed by the 190 registry
//! columns; an empty field is a missing value. Label CSVs have the columns
//! `session_id,diagnosis,mmse,mtl_atrophy_z`, again with empty fields for
//! unknown values.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use ndarray::Array2;
use thiserror::Error;

use crate::features::{session_columns, SessionFeatureVector};
use crate::stroke::{Diagnosis, SubjectRecord};

pub const ID_COLUMN: &str = "session_id";
pub const LABEL_COLUMNS: [&str; 4] = ["session_id", "diagnosis", "mmse", "mtl_atrophy_z"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("csv: {0}")]
    Csv(String),
    #[error("header does not match the expected columns: {0}")]
    BadHeader(String),
    #[error("line {line}, column {column}: cannot parse {value:?}")]
    BadValue { line: u64, column: String, value: String },
    #[error("duplicate session id {0:?}")]
    DuplicateId(String),
    #[error("feature and label ids differ: {missing_labels} feature rows lack labels, {missing_features} label rows lack features (first: {example:?})")]
    IdMismatch {
        missing_labels: usize,
        missing_features: usize,
        example: String,
    },
    #[error("io: {0}")]
    Io(String),
}

impl From<csv::Error> for DataError {
    fn from(e: csv::Error) -> Self {
        DataError::Csv(e.to_string())
    }
}

/// Feature rows keyed by session id; missing values are `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub ids: Vec<String>,
    pub values: Array2<f64>,
}

impl FeatureTable {
    pub fn from_vectors(vectors: &[SessionFeatureVector]) -> Self {
        let columns = session_columns().len();
        let mut values = Array2::from_elem((vectors.len(), columns), f64::NAN);
        for (i, v) in vectors.iter().enumerate() {
            for (j, x) in v.values().iter().enumerate() {
                if let Some(x) = x {
                    values[[i, j]] = *x;
                }
            }
        }
        FeatureTable {
            ids: vectors.iter().map(|v| v.session_id.clone()).collect(),
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn select(&self, rows: &[usize]) -> FeatureTable {
        FeatureTable {
            ids: rows.iter().map(|&i| self.ids[i].clone()).collect(),
            values: self.values.select(ndarray::Axis(0), rows),
        }
    }
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        // shortest representation that parses back to the same bits
        format!("{v:?}")
    }
}

pub fn write_features_csv<W: Write>(out: W, table: &FeatureTable) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![ID_COLUMN.to_string()];
    header.extend(session_columns().iter().cloned());
    w.write_record(&header)?;
    for (id, row) in table.ids.iter().zip(table.values.rows()) {
        let mut record = vec![id.clone()];
        record.extend(row.iter().map(|&v| format_value(v)));
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| DataError::Io(e.to_string()))
}

fn parse_number(field: &str, line: u64, column: &str) -> Result<f64, DataError> {
    let bad = || DataError::BadValue {
        line,
        column: column.to_string(),
        value: field.to_string(),
    };
    let v: f64 = field.trim().parse().map_err(|_| bad())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

pub fn read_features_csv<R: Read>(input: R) -> Result<FeatureTable, DataError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers()?.clone();
    let columns = session_columns();
    if header.len() != columns.len() + 1
        || &header[0] != ID_COLUMN
        || header.iter().skip(1).zip(&columns).any(|(a, b)| a != b.as_str())
    {
        return Err(DataError::BadHeader(format!(
            "expected {ID_COLUMN} followed by the {} registry columns",
            columns.len()
        )));
    }
    let mut ids = Vec::new();
    let mut seen = BTreeSet::new();
    let mut flat = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(DataError::DuplicateId(id));
        }
        for (field, column) in record.iter().skip(1).zip(&columns) {
            flat.push(if field.is_empty() { f64::NAN } else { parse_number(field, line, column)? });
        }
        ids.push(id);
    }
    let values = Array2::from_shape_vec((ids.len(), columns.len()), flat).expect("row width checked by csv");
    Ok(FeatureTable { ids, values })
}

pub fn write_labels_csv<W: Write>(out: W, rows: &[(String, SubjectRecord)]) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LABEL_COLUMNS)?;
    for (id, s) in rows {
        w.write_record([
            id.clone(),
            s.diagnosis.map(|d| d.as_str().to_string()).unwrap_or_default(),
            s.mmse.map(|m| m.to_string()).unwrap_or_default(),
            s.mtl_atrophy_z.map(format_value).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| DataError::Io(e.to_string()))
}

pub fn read_labels_csv<R: Read>(input: R) -> Result<Vec<(String, SubjectRecord)>, DataError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(LABEL_COLUMNS) {
        return Err(DataError::BadHeader(LABEL_COLUMNS.join(",")));
    }
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(DataError::DuplicateId(id));
        }
        let bad = |column: &str, value: &str| DataError::BadValue {
            line,
            column: column.to_string(),
            value: value.to_string(),
        };
        let diagnosis = match &record[1] {
            "" => None,
            d => Some(Diagnosis::parse(d).ok_or_else(|| bad("diagnosis", d))?),
        };
        let mmse = match &record[2] {
            "" => None,
            m => Some(m.trim().parse::<i64>().map_err(|_| bad("mmse", m))?),
        };
        let mtl_atrophy_z = match &record[3] {
            "" => None,
            z => Some(parse_number(z, line, "mtl_atrophy_z")?),
        };
        let subject = SubjectRecord {
            diagnosis,
            mmse,
            mtl_atrophy_z,
        };
        subject.check().map_err(|e| bad("mmse", &e.to_string()))?;
        rows.push((id, subject));
    }
    Ok(rows)
}

/// Labels aligned to the feature rows. Both files must hold the same ids.
pub fn align_labels(features: &FeatureTable, labels: &[(String, SubjectRecord)]) -> Result<Vec<SubjectRecord>, DataError> {
    let by_id: HashMap<&str, &SubjectRecord> = labels.iter().map(|(id, s)| (id.as_str(), s)).collect();
    let feature_ids: BTreeSet<&str> = features.ids.iter().map(String::as_str).collect();
    let missing_labels: Vec<&str> = features.ids.iter().map(String::as_str).filter(|id| !by_id.contains_key(id)).collect();
    let missing_features: Vec<&str> = labels.iter().map(|(id, _)| id.as_str()).filter(|id| !feature_ids.contains(id)).collect();
    if !missing_labels.is_empty() || !missing_features.is_empty() {
        return Err(DataError::IdMismatch {
            missing_labels: missing_labels.len(),
            missing_features: missing_features.len(),
            example: missing_labels.first().or(missing_features.first()).unwrap_or(&"").to_string(),
        });
    }
    Ok(features.ids.iter().map(|id| *by_id[id.as_str()]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> FeatureTable {
        let n = session_columns().len();
        let mut values = Array2::from_shape_fn((2, n), |(i, j)| (i * n + j) as f64 / 7.0);
        values[[0, 3]] = f64::NAN;
        values[[1, 0]] = -0.1;
        FeatureTable {
            ids: vec!["a".into(), "b,with comma".into()],
            values,
        }
    }

    fn same(a: &FeatureTable, b: &FeatureTable) -> bool {
        a.ids == b.ids && a.values.iter().zip(b.values.iter()).all(|(x, y)| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()))
    }

    #[test]
    fn features_round_trip_exactly() {
        let t = table();
        let mut buf = Vec::new();
        write_features_csv(&mut buf, &t).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("session_id,SENTENCE.speed_median,"));
        assert!(text.contains("\"b,with comma\""));
        assert_eq!(text.lines().next().unwrap().split(',').count(), 191);
        assert!(same(&read_features_csv(buf.as_slice()).unwrap(), &t));
    }

    #[test]
    fn feature_errors() {
        assert!(matches!(read_features_csv("id,x\n1,2\n".as_bytes()), Err(DataError::BadHeader(_))));
        let t = table();
        let mut buf = Vec::new();
        write_features_csv(&mut buf, &t).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("0.14285714285714285", "abc", 1);
        assert!(matches!(read_features_csv(text.as_bytes()), Err(DataError::BadValue { .. })));
        let mut dup = t.clone();
        dup.ids[1] = "a".into();
        let mut buf = Vec::new();
        write_features_csv(&mut buf, &dup).unwrap();
        assert_eq!(read_features_csv(buf.as_slice()), Err(DataError::DuplicateId("a".into())));
    }

    #[test]
    fn labels_round_trip() {
        let rows = vec![
            (
                "a".to_string(),
                SubjectRecord {
                    diagnosis: Some(Diagnosis::Mci),
                    mmse: Some(26),
                    mtl_atrophy_z: Some(1.25),
                },
            ),
            (
                "b".to_string(),
                SubjectRecord {
                    diagnosis: None,
                    mmse: None,
                    mtl_atrophy_z: None,
                },
            ),
        ];
        let mut buf = Vec::new();
        write_labels_csv(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "session_id,diagnosis,mmse,mtl_atrophy_z\na,MCI,26,1.25\nb,,,\n");
        assert_eq!(read_labels_csv(buf.as_slice()).unwrap(), rows);
        assert!(read_labels_csv("session_id,diagnosis,mmse,mtl_atrophy_z\na,XX,1,0\n".as_bytes()).is_err());
        assert!(read_labels_csv("session_id,diagnosis,mmse,mtl_atrophy_z\na,CN,31,0\n".as_bytes()).is_err());
    }

    #[test]
    fn alignment() {
        let t = table();
        let s = SubjectRecord {
            diagnosis: Some(Diagnosis::Cn),
            mmse: Some(29),
            mtl_atrophy_z: None,
        };
        let labels = vec![("b,with comma".to_string(), s), ("a".to_string(), s)];
        assert_eq!(align_labels(&t, &labels).unwrap().len(), 2);
        let err = align_labels(&t, &labels[..1]).unwrap_err();
        assert!(matches!(err, DataError::IdMismatch { missing_labels: 1, missing_features: 0, .. }));
    }
}
