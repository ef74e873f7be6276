//! Binary network checkpoints.
//!
//! Layout (version 1, all integers little-endian):
//!
//! ```text
//! magic   b"EPNC"
//! u32     version (1)
//! u32     input_dim
//! u32     class_count
//! u32     layer_count
//! per layer (shape section):
//!     u32 out_dim, u8 activation (0 relu, 1 identity), u8 maskable
//! per layer (data section, same order):
//!     f64 weights (row-major, out_dim x in_dim), f64 biases (out_dim)
//! ```
//!
//! Each layer's `in_dim` is the previous layer's `out_dim` (the first is
//! `input_dim`). `f64` bytes round-trip exactly.

use std::io::Read;
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use eprune_core::nn::{Activation, DenseLayer, Network};

use crate::error::CliError;

const MAGIC: &[u8; 4] = b"EPNC";
const VERSION: u32 = 1;

pub fn save_network(path: &Path, net: &Network) -> Result<(), CliError> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.write_u32::<LittleEndian>(VERSION).unwrap();
    out.write_u32::<LittleEndian>(net.input_dim() as u32).unwrap();
    out.write_u32::<LittleEndian>(net.class_count() as u32).unwrap();
    out.write_u32::<LittleEndian>(net.layers().len() as u32).unwrap();
    for layer in net.layers() {
        out.write_u32::<LittleEndian>(layer.out_dim() as u32).unwrap();
        out.push(match layer.activation() {
            Activation::Relu => 0,
            Activation::Identity => 1,
        });
        out.push(layer.maskable() as u8);
    }
    for layer in net.layers() {
        for &w in layer.weights() {
            out.write_f64::<LittleEndian>(w).unwrap();
        }
        for &b in layer.biases() {
            out.write_f64::<LittleEndian>(b).unwrap();
        }
    }
    std::fs::write(path, out).map_err(|e| CliError::io(&format!("checkpoint {}", path.display()), e))
}

pub fn load_network(path: &Path) -> Result<Network, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::io(&format!("checkpoint {}", path.display()), e))?;
    let mut reader = std::io::Cursor::new(bytes);
    let corrupt = |what: &str| CliError::Other(format!("checkpoint {}: {what}", path.display()));

    let mut magic = [0u8; 4];
    reader
        .read_exact(&mut magic)
        .map_err(|_| corrupt("truncated"))?;
    if &magic != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = reader
        .read_u32::<LittleEndian>()
        .map_err(|_| corrupt("truncated"))?;
    if version != VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    let input_dim = reader
        .read_u32::<LittleEndian>()
        .map_err(|_| corrupt("truncated"))? as usize;
    let _class_count = reader
        .read_u32::<LittleEndian>()
        .map_err(|_| corrupt("truncated"))? as usize;
    let layer_count = reader
        .read_u32::<LittleEndian>()
        .map_err(|_| corrupt("truncated"))? as usize;

    let mut shapes = Vec::with_capacity(layer_count);
    let mut in_dim = input_dim;
    for _ in 0..layer_count {
        let out_dim = reader
            .read_u32::<LittleEndian>()
            .map_err(|_| corrupt("truncated"))? as usize;
        let activation = match reader.read_u8().map_err(|_| corrupt("truncated"))? {
            0 => Activation::Relu,
            1 => Activation::Identity,
            other => return Err(corrupt(&format!("unknown activation tag {other}"))),
        };
        let maskable = reader.read_u8().map_err(|_| corrupt("truncated"))? != 0;
        shapes.push((in_dim, out_dim, activation, maskable));
        in_dim = out_dim;
    }

    let mut layers = Vec::with_capacity(layer_count);
    for (in_dim, out_dim, activation, maskable) in shapes {
        let mut weights = vec![0.0; in_dim * out_dim];
        for w in weights.iter_mut() {
            *w = reader
                .read_f64::<LittleEndian>()
                .map_err(|_| corrupt("truncated"))?;
        }
        let mut biases = vec![0.0; out_dim];
        for b in biases.iter_mut() {
            *b = reader
                .read_f64::<LittleEndian>()
                .map_err(|_| corrupt("truncated"))?;
        }
        layers.push(
            DenseLayer::from_parts(in_dim, out_dim, weights, biases, activation, maskable)
                .map_err(|e| corrupt(&e.to_string()))?,
        );
    }
    Network::from_layers(input_dim, layers).map_err(|e| corrupt(&e.to_string()))
}
