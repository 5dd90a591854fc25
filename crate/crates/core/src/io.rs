//! Document formats.
//!
//! Arrays, scenes and codes are JSON documents in which every complex value
//! is a `[re, im]` pair. Snapshots are CSV files with one row per receive
//! antenna and interleaved `re_n,im_n` columns for each PRI `n`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{CodeMatrix, Snapshot, C64};

/// Serde adapter writing a complex number as `[re, im]`.
pub mod complex_pair {
    use super::*;

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// On-disk layout of a [`CodeMatrix`]: `entries[m][n] = [re, im]`.
#[derive(Serialize, Deserialize)]
struct CodeDocument {
    tx_count: usize,
    pri_count: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for CodeMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let e = self.entries();
        CodeDocument {
            tx_count: e.nrows(),
            pri_count: e.ncols(),
            entries: (0..e.nrows())
                .map(|m| (0..e.ncols()).map(|n| [e[(m, n)].re, e[(m, n)].im]).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CodeMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = CodeDocument::deserialize(d)?;
        if doc.entries.len() != doc.tx_count
            || doc.entries.iter().any(|row| row.len() != doc.pri_count)
        {
            return Err(D::Error::custom("code entries do not match tx_count x pri_count"));
        }
        let m = DMatrix::from_fn(doc.tx_count, doc.pri_count, |i, j| {
            let [re, im] = doc.entries[i][j];
            C64::new(re, im)
        });
        CodeMatrix::new(m).map_err(D::Error::custom)
    }
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn snapshot_to_csv(x: &Snapshot) -> String {
    let (rows, cols) = x.data.shape();
    let mut out = String::new();
    let header: Vec<String> = (0..cols)
        .flat_map(|n| [format!("re_{n}"), format!("im_{n}")])
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in 0..rows {
        let line: Vec<String> = (0..cols)
            .flat_map(|n| {
                let z = x.data[(r, n)];
                [format!("{:e}", z.re), format!("{:e}", z.im)]
            })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn snapshot_from_csv(text: &str) -> Result<Snapshot> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Csv("empty file".into()))?;
    let width = header.split(',').count();
    if width == 0 || width % 2 != 0 {
        return Err(Error::Csv(format!("expected an even column count, got {width}")));
    }
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (i, line) in lines.enumerate() {
        let vals = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Csv(format!("row {}: {e}", i + 1)))?;
        if vals.len() != width {
            return Err(Error::Csv(format!(
                "row {} has {} columns, header has {width}",
                i + 1,
                vals.len()
            )));
        }
        rows.push(vals.chunks(2).map(|p| C64::new(p[0], p[1])).collect());
    }
    if rows.is_empty() {
        return Err(Error::Csv("no data rows".into()));
    }
    let cols = width / 2;
    Ok(Snapshot::new(DMatrix::from_fn(rows.len(), cols, |r, n| rows[r][n])))
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    snapshot_from_csv(&fs::read_to_string(path)?)
}

pub fn write_snapshot(path: impl AsRef<Path>, x: &Snapshot) -> Result<()> {
    fs::write(path, snapshot_to_csv(x))?;
    Ok(())
}

/// Plain CSV dump of a real matrix, no header.
pub fn real_matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if c > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:e}", m[(r, c)]);
        }
        out.push('\n');
    }
    out
}
