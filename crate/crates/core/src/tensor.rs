//! Dense matrices, label vectors and their binary file formats.
//!
//! Two formats, both little-endian with fixed-size headers:
//!
//! LSNN tensor file (28-byte header + payload):
//! - bytes 0..4   magic `LSNN`
//! - byte  4      version (1)
//! - byte  5      dtype (0 = float32 LE)
//! - bytes 6..8   reserved (zero)
//! - bytes 8..16  rows, u64 LE
//! - bytes 16..24 cols, u64 LE
//! - bytes 24..28 reserved (zero)
//! - payload      rows*cols float32 LE, row-major
//!
//! LSNL label file:
//! - bytes 0..4   magic `LSNL`
//! - byte  4      version (1)
//! - bytes 5..8   reserved (zero)
//! - bytes 8..16  count, u64 LE
//! - bytes 16..20 num_classes, u32 LE
//! - payload      count u32 LE labels
//!
//! Values are stored as 32-bit floats; all arithmetic elsewhere in the
//! toolkit accumulates in 64-bit. Loading rejects NaN/Inf so downstream
//! math stays total.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const TENSOR_MAGIC: [u8; 4] = *b"LSNN";
pub const LABEL_MAGIC: [u8; 4] = *b"LSNL";
pub const FORMAT_VERSION: u8 = 1;
pub const DTYPE_F32: u8 = 0;
pub const TENSOR_HEADER_LEN: usize = 28;

/// Dense row-major matrix of f32 values (samples x dims).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl TensorMatrix {
    /// Builds a matrix, checking shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Validation("rows*cols overflows".into()))?;
        if data.len() != expected {
            return Err(Error::Validation(format!(
                "data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite element at flat index {pos}"
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from per-row f64 values, narrowing to f32 storage.
    pub fn from_rows_f64(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Validation("ragged rows".into()));
        }
        let data = rows.iter().flatten().map(|&v| v as f32).collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}

/// Integer class labels paired with the number of classes.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVector {
    labels: Vec<u32>,
    num_classes: u32,
}

impl LabelVector {
    pub fn new(labels: Vec<u32>, num_classes: u32) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::Validation(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        Ok(Self {
            labels,
            num_classes,
        })
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn num_classes(&self) -> u32 {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.labels[i]
    }
}

/// Embeddings, network outputs and labels for one dataset split.
/// Used both as the kNN database and as a query set.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpus {
    pub embeddings: TensorMatrix,
    pub logits: TensorMatrix,
    pub labels: LabelVector,
}

impl LabeledCorpus {
    pub fn new(embeddings: TensorMatrix, logits: TensorMatrix, labels: LabelVector) -> Result<Self> {
        if embeddings.rows() != logits.rows() || embeddings.rows() != labels.len() {
            return Err(Error::Validation(format!(
                "row mismatch: embeddings {}, logits {}, labels {}",
                embeddings.rows(),
                logits.rows(),
                labels.len()
            )));
        }
        if logits.cols() != labels.num_classes() as usize {
            return Err(Error::Validation(format!(
                "logits width {} does not match {} classes",
                logits.cols(),
                labels.num_classes()
            )));
        }
        Ok(Self {
            embeddings,
            logits,
            labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }
}

pub fn write_tensor<W: Write>(matrix: &TensorMatrix, sink: &mut W) -> Result<()> {
    let mut header = [0u8; TENSOR_HEADER_LEN];
    header[0..4].copy_from_slice(&TENSOR_MAGIC);
    header[4] = FORMAT_VERSION;
    header[5] = DTYPE_F32;
    header[8..16].copy_from_slice(&(matrix.rows() as u64).to_le_bytes());
    header[16..24].copy_from_slice(&(matrix.cols() as u64).to_le_bytes());
    sink.write_all(&header)?;
    for v in matrix.data() {
        sink.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_tensor<R: Read>(source: &mut R) -> Result<TensorMatrix> {
    let mut header = [0u8; TENSOR_HEADER_LEN];
    source.read_exact(&mut header)?;
    if header[0..4] != TENSOR_MAGIC {
        return Err(Error::Format("bad magic, expected LSNN".into()));
    }
    if header[4] != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {}", header[4])));
    }
    if header[5] != DTYPE_F32 {
        return Err(Error::Format(format!("unsupported dtype {}", header[5])));
    }
    let rows = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("rows*cols overflows".into()))?;
    let mut payload = vec![0u8; count * 4];
    source.read_exact(&mut payload)?;
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    TensorMatrix::new(rows, cols, data)
}

pub fn write_labels<W: Write>(labels: &LabelVector, sink: &mut W) -> Result<()> {
    let mut header = [0u8; 20];
    header[0..4].copy_from_slice(&LABEL_MAGIC);
    header[4] = FORMAT_VERSION;
    header[8..16].copy_from_slice(&(labels.len() as u64).to_le_bytes());
    header[16..20].copy_from_slice(&labels.num_classes().to_le_bytes());
    sink.write_all(&header)?;
    for l in labels.labels() {
        sink.write_all(&l.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_labels<R: Read>(source: &mut R) -> Result<LabelVector> {
    let mut header = [0u8; 20];
    source.read_exact(&mut header)?;
    if header[0..4] != LABEL_MAGIC {
        return Err(Error::Format("bad magic, expected LSNL".into()));
    }
    if header[4] != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {}", header[4])));
    }
    let count = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let num_classes = u32::from_le_bytes(header[16..20].try_into().unwrap());
    let mut payload = vec![0u8; count * 4];
    source.read_exact(&mut payload)?;
    let labels: Vec<u32> = payload
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    LabelVector::new(labels, num_classes)
}

pub fn save_tensor<P: AsRef<Path>>(matrix: &TensorMatrix, path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_tensor(matrix, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_tensor<P: AsRef<Path>>(path: P) -> Result<TensorMatrix> {
    read_tensor(&mut BufReader::new(File::open(path)?))
}

pub fn save_labels<P: AsRef<Path>>(labels: &LabelVector, path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_labels(labels, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_labels<P: AsRef<Path>>(path: P) -> Result<LabelVector> {
    read_labels(&mut BufReader::new(File::open(path)?))
}
