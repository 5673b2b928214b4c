//! LIBSVM text format reading/writing and column scaling.
//!
//! Each line is `label idx:val idx:val ...` with one-based, strictly increasing
//! feature indices. Text after `#` is ignored, as are blank lines. Files whose
//! name ends in `.gz` are decompressed transparently.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{Dataset, SparseMatrix};

/// Largest `N * n` for which dense standardization is allowed.
pub const STANDARDIZE_MAX_ENTRIES: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LibsvmRow {
    pub label: f64,
    /// One-based feature indices with their values.
    pub features: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct RawLibsvmFile {
    pub rows: Vec<LibsvmRow>,
    /// Largest feature index seen.
    pub max_index: usize,
}

pub fn parse_libsvm<R: Read>(reader: R) -> Result<RawLibsvmFile> {
    let mut out = RawLibsvmFile::default();
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().unwrap();
        let label = parse_num::<f64>(label_tok, lineno, "label")?;
        if !label.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("non-finite label `{label_tok}`"),
            });
        }
        let mut features = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("expected `index:value`, found `{tok}`"),
            })?;
            let idx = parse_num::<usize>(idx, lineno, "feature index")?;
            let val = parse_num::<f64>(val, lineno, "feature value")?;
            if idx == 0 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "feature indices are one-based".into(),
                });
            }
            if idx <= last {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("feature index {idx} does not increase (previous {last})"),
                });
            }
            if !val.is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("non-finite value for feature {idx}"),
                });
            }
            last = idx;
            features.push((idx, val));
        }
        out.max_index = out.max_index.max(last);
        out.rows.push(LibsvmRow { label, features });
    }
    Ok(out)
}

fn parse_num<T: FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse::<T>().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid {what} `{tok}`"),
    })
}

/// Reads a LIBSVM file, gunzipping when the name ends with `.gz`.
pub fn read_libsvm_file(path: &Path) -> Result<RawLibsvmFile> {
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        parse_libsvm(GzDecoder::new(file))
    } else {
        parse_libsvm(file)
    }
}

/// Reads and converts to a [`Dataset`]; `n_features` overrides the observed
/// maximum index when given.
pub fn load_dataset(path: &Path, n_features: Option<usize>) -> Result<Dataset> {
    read_libsvm_file(path)?.into_dataset(n_features)
}

impl RawLibsvmFile {
    /// Maps labels to `{-1, +1}`: `{-1, +1}` is kept, `{0, 1}` maps 0 to -1,
    /// any other pair maps the smaller label to -1 (with a warning). A file
    /// with a single label value keeps its sign.
    pub fn into_dataset(self, n_features: Option<usize>) -> Result<Dataset> {
        let ncols = match n_features {
            Some(n) if n < self.max_index => {
                return Err(Error::InvalidDataset(format!(
                    "requested {n} features but the file uses index {}",
                    self.max_index
                )))
            }
            Some(n) => n,
            None => self.max_index,
        };
        let labels = map_labels(self.rows.iter().map(|r| r.label))?;
        let rows: Vec<Vec<(usize, f64)>> = self
            .rows
            .into_iter()
            .map(|r| r.features.into_iter().map(|(i, v)| (i - 1, v)).collect())
            .collect();
        Dataset::new(SparseMatrix::from_rows(ncols, &rows)?, labels)
    }
}

fn map_labels(labels: impl Iterator<Item = f64> + Clone) -> Result<Vec<f64>> {
    let mut distinct: Vec<f64> = Vec::new();
    for l in labels.clone() {
        if !distinct.contains(&l) {
            distinct.push(l);
            if distinct.len() > 2 {
                return Err(Error::InvalidDataset(format!(
                    "more than two label values ({:?})",
                    distinct
                )));
            }
        }
    }
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let negative = match distinct.as_slice() {
        [] => return Ok(Vec::new()),
        [a] => return Ok(labels.map(|_| if *a > 0.0 { 1.0 } else { -1.0 }).collect()),
        [a, b] if *a == -1.0 && *b == 1.0 => -1.0,
        [a, b] if *a == 0.0 && *b == 1.0 => 0.0,
        [a, b] => {
            log::warn!("labels {a} and {b} mapped to -1 and +1");
            *a
        }
        _ => unreachable!(),
    };
    Ok(labels.map(|l| if l == negative { -1.0 } else { 1.0 }).collect())
}

/// Writes a dataset in LIBSVM format with `+1`/`-1` labels.
pub fn write_libsvm<W: Write>(data: &Dataset, mut w: W) -> Result<()> {
    for (r, &y) in data.labels().iter().enumerate() {
        write!(w, "{}", if y > 0.0 { "+1" } else { "-1" })?;
        let (cols, vals) = data.features().row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            write!(w, " {}:{}", c + 1, v)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScalingMode {
    #[default]
    None,
    /// Divide each column by its largest absolute value.
    MaxAbs,
    /// Mean zero, unit variance per column (densifies).
    Standardize,
}

impl FromStr for ScalingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ScalingMode::None),
            "maxabs" => Ok(ScalingMode::MaxAbs),
            "standardize" => Ok(ScalingMode::Standardize),
            other => Err(Error::InvalidConfig(format!("unknown scaling mode `{other}`"))),
        }
    }
}

pub fn scale_features(data: Dataset, mode: ScalingMode) -> Result<Dataset> {
    match mode {
        ScalingMode::None => Ok(data),
        ScalingMode::MaxAbs => Ok(scale_maxabs(data)),
        ScalingMode::Standardize => standardize(data),
    }
}

fn scale_maxabs(data: Dataset) -> Dataset {
    let ncols = data.num_features();
    let (mut features, labels) = data.into_parts();
    let cols = features.indices().to_vec();
    let mut maxabs = vec![0.0f64; ncols];
    for (&c, v) in cols.iter().zip(features.values_mut().iter()) {
        maxabs[c] = maxabs[c].max(v.abs());
    }
    for (v, c) in features.values_mut().iter_mut().zip(cols) {
        if maxabs[c] > 0.0 {
            *v /= maxabs[c];
        }
    }
    Dataset::new(features, labels).expect("scaling preserves validity")
}

fn standardize(data: Dataset) -> Result<Dataset> {
    let (nrows, ncols) = (data.num_points(), data.num_features());
    if nrows.saturating_mul(ncols) > STANDARDIZE_MAX_ENTRIES {
        return Err(Error::InvalidConfig(format!(
            "standardize would densify {nrows}x{ncols} entries (limit {STANDARDIZE_MAX_ENTRIES})"
        )));
    }
    let mut dense = vec![0.0; nrows * ncols];
    for (r, (cols, vals)) in data.features().rows().enumerate() {
        for (&c, &v) in cols.iter().zip(vals) {
            dense[r * ncols + c] = v;
        }
    }
    let nf = nrows as f64;
    for c in 0..ncols {
        let mean = (0..nrows).map(|r| dense[r * ncols + c]).sum::<f64>() / nf;
        let var = (0..nrows)
            .map(|r| (dense[r * ncols + c] - mean).powi(2))
            .sum::<f64>()
            / nf;
        let sd = var.sqrt();
        for r in 0..nrows {
            let v = &mut dense[r * ncols + c];
            *v -= mean;
            if sd > 0.0 {
                *v /= sd;
            }
        }
    }
    let rows: Vec<Vec<(usize, f64)>> = dense
        .chunks(ncols)
        .map(|row| row.iter().cloned().enumerate().collect())
        .collect();
    let (_, labels) = data.into_parts();
    Dataset::new(SparseMatrix::from_rows(ncols, &rows)?, labels)
}
