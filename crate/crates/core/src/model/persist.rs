//! Trained parameters in the FTC container, header kind "params".

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{InputNorm, MultiColumnNet, NetConfig};
use crate::dataset::{decode_container, encode_container, read_payload};
use crate::error::{Error, Result};
use crate::nn::{LayerParams, Tensor};

pub const PARAMS_KIND: &str = "params";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ParamsHeader {
    kind: String,
    config: NetConfig,
    layer_dims: Vec<Vec<usize>>,
    loss_trace: Vec<f64>,
}

/// Payload: per layer weights, biases, weight velocity and bias velocity,
/// then per column the input mean and scale; all binary32.
pub fn encode_params(net: &MultiColumnNet, loss_trace: &[f64]) -> Result<Vec<u8>> {
    let header = ParamsHeader {
        kind: PARAMS_KIND.into(),
        config: net.config().clone(),
        layer_dims: net
            .layers()
            .iter()
            .map(|l| l.weights.dims().to_vec())
            .collect(),
        loss_trace: loss_trace.to_vec(),
    };
    let json = serde_json::to_vec(&header)?;
    let payload = net.layers().iter().flat_map(|l| {
        [&l.weights, &l.biases, &l.weight_velocity, &l.bias_velocity]
            .into_iter()
            .flat_map(|t| t.data().iter().map(|&v| v as f32))
    });
    let norms = net
        .input_norms()
        .iter()
        .flat_map(|n| n.mean.iter().chain(&n.scale).map(|&v| v as f32));
    let payload = payload.chain(norms);
    Ok(encode_container(&json, payload))
}

/// Parameters come back rounded to binary32.
pub fn decode_params(bytes: &[u8]) -> Result<(MultiColumnNet, Vec<f64>)> {
    let (header, payload, offset) = decode_container(bytes)?;
    let header: ParamsHeader = serde_json::from_slice(header).map_err(|e| Error::Format {
        offset: 12,
        reason: format!("invalid params header: {e}"),
    })?;
    if header.kind != PARAMS_KIND {
        return Err(Error::Format {
            offset: 12,
            reason: format!("expected kind '{PARAMS_KIND}', found '{}'", header.kind),
        });
    }
    if header.layer_dims != header.config.layer_dims() {
        return Err(Error::Format {
            offset: 12,
            reason: "layer dims disagree with the net config".into(),
        });
    }
    let count: usize = header
        .layer_dims
        .iter()
        .map(|d| 2 * (d.iter().product::<usize>() + d[0]))
        .sum::<usize>()
        + header
            .config
            .columns
            .iter()
            .map(|c| 2 * c.source.len())
            .sum::<usize>();
    let values = read_payload(payload, offset, count)?;
    let mut rest = &values[..];
    let mut take = |dims: &[usize]| -> Result<Tensor> {
        let n: usize = dims.iter().product();
        let (head, tail) = rest.split_at(n);
        rest = tail;
        Tensor::from_vec(dims, head.iter().map(|&v| v as f64).collect())
    };
    let mut layers = Vec::with_capacity(header.layer_dims.len());
    for d in &header.layer_dims {
        let b = [d[0]];
        layers.push(LayerParams {
            weights: take(d)?,
            biases: take(&b)?,
            weight_velocity: take(d)?,
            bias_velocity: take(&b)?,
        });
    }
    let mut norm = |len: usize| -> Result<InputNorm> {
        let mean = take(&[len])?.into_data();
        let scale = take(&[len])?.into_data();
        Ok(InputNorm { mean, scale })
    };
    let norms = [
        norm(header.config.columns[0].source.len())?,
        norm(header.config.columns[1].source.len())?,
    ];
    let net = MultiColumnNet::from_parts(header.config, layers, norms)?;
    Ok((net, header.loss_trace))
}

pub fn write_params(
    path: impl AsRef<Path>,
    net: &MultiColumnNet,
    loss_trace: &[f64],
) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_params(net, loss_trace)?;
    fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path))
}

pub fn read_params(path: impl AsRef<Path>) -> Result<(MultiColumnNet, Vec<f64>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
    decode_params(&bytes).map_err(|e| e.in_file(path))
}
