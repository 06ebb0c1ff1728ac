//! Model checkpoints: a text header followed by raw weights.
//!
//! ```text
//! PAGRAPH-CKPT 1\n
//! {"kind":"sgc","k_layers":2,"classes":[0,1,2],"layers":[{"rows":2,"cols":3,"bias":true}]}\n
//! <f64 little-endian payload>
//! ```
//!
//! The payload holds, layer by layer, the `rows x cols` weight matrix in
//! row-major order followed by the `cols` bias entries when `bias` is true.
//! Loading checks that the shapes chain from the input width to the class
//! count and that the payload length matches the header exactly.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Layer, ModelKind, ModelParams};
use crate::{Error, Result};

const MAGIC: &str = "PAGRAPH-CKPT 1\n";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    kind: ModelKind,
    k_layers: usize,
    classes: Vec<usize>,
    layers: Vec<LayerShape>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerShape {
    rows: usize,
    cols: usize,
    bias: bool,
}

pub fn to_bytes(params: &ModelParams) -> Result<Vec<u8>> {
    params.validate()?;
    let header = Header {
        kind: params.kind,
        k_layers: params.k_layers,
        classes: params.classes.clone(),
        layers: params
            .layers
            .iter()
            .map(|l| LayerShape {
                rows: l.weight.nrows(),
                cols: l.weight.ncols(),
                bias: l.bias.is_some(),
            })
            .collect(),
    };
    let mut out = MAGIC.as_bytes().to_vec();
    out.extend(serde_json::to_vec(&header).map_err(|e| Error::InvalidInput(e.to_string()))?);
    out.push(b'\n');
    for layer in &params.layers {
        for v in layer.weight.iter().chain(layer.bias.iter().flatten()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<ModelParams> {
    let bad = |message: String| Error::Parse {
        path: "<checkpoint>".into(),
        line: 0,
        message,
    };
    let rest = bytes
        .strip_prefix(MAGIC.as_bytes())
        .ok_or_else(|| bad("missing checkpoint magic".into()))?;
    let newline = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("unterminated header".into()))?;
    let header: Header =
        serde_json::from_slice(&rest[..newline]).map_err(|e| bad(format!("header: {e}")))?;
    let payload = &rest[newline + 1..];

    let expected: usize = header
        .layers
        .iter()
        .map(|s| s.rows * s.cols + if s.bias { s.cols } else { 0 })
        .sum();
    if payload.len() != expected * 8 {
        return Err(bad(format!(
            "payload has {} bytes, header describes {}",
            payload.len(),
            expected * 8
        )));
    }
    let mut values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let mut layers = Vec::with_capacity(header.layers.len());
    for shape in &header.layers {
        let weight: Vec<f64> = values.by_ref().take(shape.rows * shape.cols).collect();
        let weight = Array2::from_shape_vec((shape.rows, shape.cols), weight)
            .map_err(|e| bad(e.to_string()))?;
        let bias = shape
            .bias
            .then(|| Array1::from_iter(values.by_ref().take(shape.cols)));
        layers.push(Layer { weight, bias });
    }
    let params = ModelParams {
        kind: header.kind,
        k_layers: header.k_layers,
        layers,
        classes: header.classes,
    };
    params.validate()?;
    Ok(params)
}

pub fn save(params: &ModelParams, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(params)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<ModelParams> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.display().to_string(),
            line,
            message,
        },
        other => other,
    })
}
