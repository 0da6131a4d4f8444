//! Image datasets on the 0–255 intensity scale, loaded from IDX, delimited
//! text, or raw byte files.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// The IDX container used by MNIST: big-endian header, u8 payload.
    Idx,
    /// One sample per line, comma- or whitespace-separated. With
    /// `labeled`, the first field of each line is an integer class label.
    CsvMatrix { labeled: bool },
    /// Headerless bytes, one u8 per pixel; needs the sample width.
    RawU8 { dim: usize },
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    /// N×d intensities, nominally within [0, 255].
    pub samples: Array2<f64>,
    pub labels: Option<Vec<usize>>,
    /// Image shape (h, w) with h·w = d; (1, d) when unknown.
    pub shape: (usize, usize),
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }

    /// Class labels in ascending order.
    pub fn classes(&self) -> Vec<usize> {
        let mut classes: Vec<usize> = match &self.labels {
            Some(labels) => {
                let mut c = labels.clone();
                c.sort_unstable();
                c.dedup();
                c
            }
            None => Vec::new(),
        };
        classes.shrink_to_fit();
        classes
    }

    /// Row indices belonging to `class`.
    pub fn class_rows(&self, class: usize) -> Vec<usize> {
        match &self.labels {
            Some(labels) => {
                labels.iter().enumerate().filter(|(_, &l)| l == class).map(|(i, _)| i).collect()
            }
            None => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(labels) = &self.labels {
            if labels.len() != self.n_samples() {
                return Err(BenchError::Config(format!(
                    "{} labels for {} samples",
                    labels.len(),
                    self.n_samples()
                )));
            }
        }
        if self.shape.0 * self.shape.1 != self.dim() {
            return Err(BenchError::Config(format!(
                "shape {:?} does not cover dimension {}",
                self.shape,
                self.dim()
            )));
        }
        if let Some(bad) = self.samples.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 255.0)
        {
            return Err(BenchError::Config(format!(
                "intensity {bad} outside the 0-255 scale"
            )));
        }
        Ok(())
    }
}

/// Loads samples from `path`; `labels_path` supplies an IDX label file or a
/// one-label-per-line text file for the unlabeled formats.
pub fn load_dataset(
    path: &Path,
    format: DatasetFormat,
    labels_path: Option<&Path>,
    shape: Option<(usize, usize)>,
) -> Result<Dataset> {
    let (samples, labels_inline, idx_shape) = match format {
        DatasetFormat::Idx => {
            let (samples, shape) = load_idx_images(path)?;
            (samples, None, Some(shape))
        }
        DatasetFormat::CsvMatrix { labeled } => {
            let (samples, labels) = load_delimited(path, labeled)?;
            (samples, labels, None)
        }
        DatasetFormat::RawU8 { dim } => (load_raw_u8(path, dim)?, None, None),
    };
    let labels = match (labels_inline, labels_path) {
        (Some(inline), None) => Some(inline),
        (None, Some(lp)) => Some(load_labels(lp)?),
        (None, None) => None,
        (Some(_), Some(lp)) => {
            return Err(BenchError::Load {
                path: lp.to_path_buf(),
                message: "labels supplied both inline and as a separate file".into(),
            })
        }
    };
    let dim = samples.ncols();
    let shape = shape.or(idx_shape).unwrap_or((1, dim));
    let dataset = Dataset {
        name: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        samples,
        labels,
        shape,
    };
    dataset.validate()?;
    Ok(dataset)
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| BenchError::Load {
            path: path.to_path_buf(),
            message: format!("file truncated at byte {offset} while reading header"),
        })
}

/// IDX image file: magic 0x00000803, dimensions (count, rows, cols), u8
/// pixels. A two-dimensional 0x00000802 matrix (count, width) is accepted
/// as well.
pub fn load_idx_images(path: &Path) -> Result<(Array2<f64>, (usize, usize))> {
    let bytes = read_all(path)?;
    let magic = be_u32(&bytes, 0, path)?;
    let (dtype, ndim) = ((magic >> 8) & 0xff, magic & 0xff);
    if magic >> 16 != 0 || dtype != 0x08 || !(2..=3).contains(&ndim) {
        return Err(BenchError::Load {
            path: path.to_path_buf(),
            message: format!("unexpected magic 0x{magic:08x} at byte 0 (want u8 idx2/idx3)"),
        });
    }
    let n = be_u32(&bytes, 4, path)? as usize;
    let (h, w) = if ndim == 3 {
        (be_u32(&bytes, 8, path)? as usize, be_u32(&bytes, 12, path)? as usize)
    } else {
        (1, be_u32(&bytes, 8, path)? as usize)
    };
    let header = 4 + 4 * ndim as usize;
    let expected = n * h * w;
    let payload = &bytes[header.min(bytes.len())..];
    if payload.len() != expected {
        return Err(BenchError::Load {
            path: path.to_path_buf(),
            message: format!(
                "payload is {} bytes at offset {header}, header promises {expected}",
                payload.len()
            ),
        });
    }
    let samples =
        Array2::from_shape_fn((n, h * w), |(i, j)| f64::from(payload[i * h * w + j]));
    Ok((samples, (h, w)))
}

/// IDX label file: magic 0x00000801, u8 labels.
pub fn load_idx_labels(path: &Path) -> Result<Vec<usize>> {
    let bytes = read_all(path)?;
    let magic = be_u32(&bytes, 0, path)?;
    if magic != 0x0000_0801 {
        return Err(BenchError::Load {
            path: path.to_path_buf(),
            message: format!("unexpected magic 0x{magic:08x} at byte 0 (want 0x00000801)"),
        });
    }
    let n = be_u32(&bytes, 4, path)? as usize;
    let payload = &bytes[8.min(bytes.len())..];
    if payload.len() != n {
        return Err(BenchError::Load {
            path: path.to_path_buf(),
            message: format!("payload is {} bytes at offset 8, header promises {n}", payload.len()),
        });
    }
    Ok(payload.iter().map(|&b| b as usize).collect())
}

fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let bytes = read_all(path)?;
    if bytes.len() >= 4 && bytes[0] == 0 && bytes[1] == 0 {
        return load_idx_labels(path);
    }
    let text = String::from_utf8_lossy(&bytes);
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(lineno, line)| {
            line.trim().parse::<usize>().map_err(|e| BenchError::Load {
                path: path.to_path_buf(),
                message: format!("line {}: {e}", lineno + 1),
            })
        })
        .collect()
}

/// Delimited text: one sample per line, comma- or whitespace-separated,
/// optional integer label in the first field.
fn load_delimited(path: &Path, labeled: bool) -> Result<(Array2<f64>, Option<Vec<usize>>)> {
    let bytes = read_all(path)?;
    let text = String::from_utf8_lossy(&bytes);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = if line.contains(',') {
            line.split(',').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        let mut iter = fields.iter();
        if labeled {
            let raw = iter.next().ok_or_else(|| BenchError::Load {
                path: path.to_path_buf(),
                message: format!("line {}: empty row", lineno + 1),
            })?;
            // Labels arrive as "3" or "3.0" depending on the exporter.
            let value = raw.parse::<f64>().map_err(|e| BenchError::Load {
                path: path.to_path_buf(),
                message: format!("line {}: bad label {raw:?}: {e}", lineno + 1),
            })?;
            if value < 0.0 || value.fract() != 0.0 {
                return Err(BenchError::Load {
                    path: path.to_path_buf(),
                    message: format!("line {}: label {value} is not a class index", lineno + 1),
                });
            }
            labels.push(value as usize);
        }
        let row: Vec<f64> = iter
            .map(|f| {
                f.parse::<f64>().map_err(|e| BenchError::Load {
                    path: path.to_path_buf(),
                    message: format!("line {}: bad value {f:?}: {e}", lineno + 1),
                })
            })
            .collect::<Result<_>>()?;
        if let Some(w) = width {
            if row.len() != w {
                return Err(BenchError::Load {
                    path: path.to_path_buf(),
                    message: format!("line {}: {} values, first row had {w}", lineno + 1, row.len()),
                });
            }
        } else {
            width = Some(row.len());
        }
        rows.push(row);
    }
    let width = width.ok_or_else(|| BenchError::Load {
        path: path.to_path_buf(),
        message: "no samples in file".into(),
    })?;
    let mut samples = Array2::zeros((rows.len(), width));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            samples[[i, j]] = v;
        }
    }
    Ok((samples, if labeled { Some(labels) } else { None }))
}

fn load_raw_u8(path: &Path, dim: usize) -> Result<Array2<f64>> {
    if dim == 0 {
        return Err(BenchError::Config("raw-u8 needs a positive sample width".into()));
    }
    let bytes = read_all(path)?;
    if bytes.is_empty() || bytes.len() % dim != 0 {
        return Err(BenchError::Load {
            path: path.to_path_buf(),
            message: format!("{} bytes is not a multiple of width {dim}", bytes.len()),
        });
    }
    let n = bytes.len() / dim;
    Ok(Array2::from_shape_fn((n, dim), |(i, j)| f64::from(bytes[i * dim + j])))
}

/// Convenience used by the CLI: parse a `--format` string.
pub fn parse_format(s: &str, labeled: bool, dim: Option<usize>) -> Result<DatasetFormat> {
    match s {
        "idx" => Ok(DatasetFormat::Idx),
        "csv-matrix" => Ok(DatasetFormat::CsvMatrix { labeled }),
        "raw-u8" => {
            let dim = dim.ok_or_else(|| {
                BenchError::Config("raw-u8 format requires --dim".into())
            })?;
            Ok(DatasetFormat::RawU8 { dim })
        }
        other => Err(BenchError::Config(format!("unknown format '{other}'"))),
    }
}

/// Keeps only the rows listed in `rows`, preserving order.
pub fn take_rows(dataset: &Dataset, rows: &[usize]) -> Dataset {
    let mut samples = Array2::zeros((rows.len(), dataset.dim()));
    for (out, &src) in rows.iter().enumerate() {
        samples.row_mut(out).assign(&dataset.samples.row(src));
    }
    let labels = dataset
        .labels
        .as_ref()
        .map(|labels| rows.iter().map(|&i| labels[i]).collect());
    Dataset { name: dataset.name.clone(), samples, labels, shape: dataset.shape }
}
