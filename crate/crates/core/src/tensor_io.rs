//! File formats exchanged with external pipelines.
//!
//! LTM1 binary tensor layout (all integers little-endian):
//!
//! ```text
//! offset 0   4 bytes  magic "LTM1"
//! offset 4   1 byte   dtype code (1 = f32, 2 = f64)
//! offset 5   1 byte   ndim (1..=3)
//! offset 6   ndim × u64 dimension sizes
//! then       row-major payload, little-endian IEEE-754
//! ```
//!
//! Scores are CSV with header `id,score` and ids `0..n-1` in order.
//! Hyperplanes are JSON objects `{dim, normal, bias, meta}`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::LayerStructure;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAGIC: &[u8; 4] = b"LTM1";
const HEADER_FIXED: usize = 6;
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DType {
    F32,
    F64,
}

impl DType {
    pub fn code(self) -> u8 {
        match self {
            DType::F32 => 1,
            DType::F64 => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(DType::F32),
            2 => Ok(DType::F64),
            other => Err(Error::UnknownDtype(other)),
        }
    }

    pub fn size(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    F32(Vec<f32>),
    F64(Vec<f64>),
}

impl TensorData {
    pub fn len(&self) -> usize {
        match self {
            TensorData::F32(v) => v.len(),
            TensorData::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> DType {
        match self {
            TensorData::F32(_) => DType::F32,
            TensorData::F64(_) => DType::F64,
        }
    }

    fn first_non_finite(&self) -> Option<usize> {
        match self {
            TensorData::F32(v) => v.iter().position(|x| !x.is_finite()),
            TensorData::F64(v) => v.iter().position(|x| !x.is_finite()),
        }
    }
}

/// An LTM1 tensor: 1 to 3 dimensions, f32 or f64 payload.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: TensorData,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: TensorData) -> Result<Self> {
        if shape.is_empty() || shape.len() > 3 {
            return Err(Error::InvalidShape(format!(
                "expected 1 to 3 dimensions, got {}",
                shape.len()
            )));
        }
        let count = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidShape("element count overflows".into()))?;
        if count != data.len() {
            return Err(Error::InvalidShape(format!(
                "shape {shape:?} implies {count} elements, data has {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn dtype(&self) -> DType {
        self.data.dtype()
    }

    /// A 2-D f64 tensor holding the matrix.
    pub fn from_matrix(m: &Matrix) -> Self {
        Self {
            shape: vec![m.rows(), m.cols()],
            data: TensorData::F64(m.as_slice().to_vec()),
        }
    }

    /// Matrix with the given shape and dtype; f32 output rounds to nearest.
    pub fn from_matrix_as(m: &Matrix, shape: Vec<usize>, dtype: DType) -> Result<Self> {
        let data = match dtype {
            DType::F64 => TensorData::F64(m.as_slice().to_vec()),
            DType::F32 => TensorData::F32(m.as_slice().iter().map(|&x| x as f32).collect()),
        };
        Self::new(shape, data)
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        match &self.data {
            TensorData::F32(v) => v.iter().map(|&x| f64::from(x)).collect(),
            TensorData::F64(v) => v.clone(),
        }
    }

    /// Interprets the tensor as samples-by-features.
    ///
    /// `[d]` is a single sample, `[n, d]` is `n` flat samples, and `[n, L, D]`
    /// is `n` extended-space samples flattened to `L·D` columns with the layer
    /// structure returned alongside.
    pub fn to_matrix(&self) -> (Matrix, Option<LayerStructure>) {
        let values = self.to_f64_vec();
        match *self.shape.as_slice() {
            [d] => (Matrix::from_vec(1, d, values).expect("shape checked"), None),
            [n, d] => (Matrix::from_vec(n, d, values).expect("shape checked"), None),
            [n, l, d] => (
                Matrix::from_vec(n, l * d, values).expect("shape checked"),
                Some(LayerStructure { layers: l, layer_dim: d }),
            ),
            _ => unreachable!("Tensor::new enforces 1..=3 dims"),
        }
    }
}

pub fn encode_tensor(t: &Tensor) -> Result<Vec<u8>> {
    if let Some(index) = t.data.first_non_finite() {
        return Err(Error::NonFinite { index });
    }
    let mut out = Vec::with_capacity(HEADER_FIXED + 8 * t.shape.len() + t.data.len() * t.dtype().size());
    out.extend_from_slice(MAGIC);
    out.push(t.dtype().code());
    out.push(t.shape.len() as u8);
    for &d in &t.shape {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    match &t.data {
        TensorData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        TensorData::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
    }
    Ok(out)
}

pub fn decode_tensor(bytes: &[u8], allow_non_finite: bool) -> Result<Tensor> {
    let truncated = |expected: usize| Error::Truncated { expected: expected as u64, found: bytes.len() as u64 };
    if bytes.len() < 4 {
        return Err(truncated(HEADER_FIXED));
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
    if &magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if bytes.len() < HEADER_FIXED {
        return Err(truncated(HEADER_FIXED));
    }
    let dtype = DType::from_code(bytes[4])?;
    let ndim = bytes[5] as usize;
    if ndim == 0 || ndim > 3 {
        return Err(Error::InvalidShape(format!("ndim {ndim} not in 1..=3")));
    }
    let header_len = HEADER_FIXED + 8 * ndim;
    if bytes.len() < header_len {
        return Err(truncated(header_len));
    }
    let mut shape = Vec::with_capacity(ndim);
    for chunk in bytes[HEADER_FIXED..header_len].chunks_exact(8) {
        let d = u64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        let d = usize::try_from(d).map_err(|_| Error::InvalidShape(format!("dimension {d} too large")))?;
        shape.push(d);
    }
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::InvalidShape("element count overflows".into()))?;
    let expected = count
        .checked_mul(dtype.size())
        .and_then(|p| p.checked_add(header_len))
        .ok_or_else(|| Error::InvalidShape("payload size overflows".into()))?;
    if bytes.len() < expected {
        return Err(truncated(expected));
    }
    if bytes.len() > expected {
        return Err(Error::InvalidShape(format!(
            "{} trailing bytes after payload",
            bytes.len() - expected
        )));
    }
    let payload = &bytes[header_len..];
    let data = match dtype {
        DType::F32 => TensorData::F32(
            payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect(),
        ),
        DType::F64 => TensorData::F64(
            payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect(),
        ),
    };
    if !allow_non_finite {
        if let Some(index) = data.first_non_finite() {
            return Err(Error::NonFinite { index });
        }
    }
    Tensor::new(shape, data)
}

pub fn save_tensor(t: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_tensor(t)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    load_tensor_with(path, false)
}

pub fn load_tensor_with(path: impl AsRef<Path>, allow_non_finite: bool) -> Result<Tensor> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_tensor(&bytes, allow_non_finite)
}

/// Saves a matrix as a 2-D f64 LTM1 file.
pub fn save_matrix(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    save_tensor(&Tensor::from_matrix(m), path)
}

/// Loads any LTM1 file as samples-by-features (see [`Tensor::to_matrix`]).
pub fn load_matrix(path: impl AsRef<Path>) -> Result<(Matrix, Option<LayerStructure>)> {
    Ok(load_tensor(path)?.to_matrix())
}

pub fn parse_scores(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "id,score" => {}
        _ => {
            return Err(Error::Parse { line: 1, message: "expected header `id,score`".into() });
        }
    }
    let mut scores = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let (id, value) = row
            .split_once(',')
            .ok_or_else(|| Error::Parse { line, message: format!("expected `id,score`, got {row:?}") })?;
        let id: usize = id
            .trim()
            .parse()
            .map_err(|e| Error::Parse { line, message: format!("bad id {id:?}: {e}") })?;
        if id != scores.len() {
            return Err(Error::Parse {
                line,
                message: format!("non-contiguous id {id}, expected {}", scores.len()),
            });
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| Error::Parse { line, message: format!("bad score {value:?}: {e}") })?;
        if !value.is_finite() {
            return Err(Error::Parse { line, message: format!("non-finite score {value}") });
        }
        scores.push(value);
    }
    Ok(scores)
}

pub fn format_scores(scores: &[f64]) -> Result<String> {
    let mut out = String::from("id,score\n");
    for (i, s) in scores.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        // `{}` on f64 prints the shortest representation that round-trips.
        out.push_str(&format!("{i},{s}\n"));
    }
    Ok(out)
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scores(&text)
}

pub fn save_scores(scores: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_scores(scores)?).map_err(|e| Error::io(path, e))
}

/// Serialized hyperplane: unit normal, bias, and free-form string metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneRecord {
    pub dim: usize,
    pub normal: Vec<f64>,
    pub bias: f64,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl HyperplaneRecord {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidHyperplane("dim must be positive".into()));
        }
        if self.normal.len() != self.dim {
            return Err(Error::InvalidHyperplane(format!(
                "dim {} but normal has {} elements",
                self.dim,
                self.normal.len()
            )));
        }
        if let Some(i) = self.normal.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        if !self.bias.is_finite() {
            return Err(Error::InvalidHyperplane("non-finite bias".into()));
        }
        let norm = crate::matrix::norm(&self.normal);
        if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::InvalidHyperplane(format!("normal has norm {norm}, expected 1")));
        }
        Ok(())
    }
}

pub fn save_hyperplane(h: &HyperplaneRecord, path: impl AsRef<Path>) -> Result<()> {
    h.validate()?;
    let path = path.as_ref();
    // serde_json writes f64 with the shortest round-trip representation.
    let mut text = serde_json::to_string_pretty(h).expect("record serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_hyperplane(path: impl AsRef<Path>) -> Result<HyperplaneRecord> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let h: HyperplaneRecord = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    h.validate()?;
    Ok(h)
}
