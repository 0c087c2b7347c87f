//! Model persistence.
//!
//! Networks use a versioned container: a text header describing shapes and
//! activations, a `data` sentinel line, then the raw weight and bias arrays
//! as little-endian 64-bit floats in declared (row-major) order. Linear
//! fits are stored as TOML.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::baselines::LinearAftFit;
use crate::error::{Error, Result};
use crate::net::{Activation, Layer, NetworkParams};

const MAGIC: &str = "rankaft-net";
const VERSION: u32 = 1;

fn activation_tag(a: Activation) -> &'static str {
    match a {
        Activation::Relu => "relu",
        Activation::Linear => "linear",
    }
}

fn parse_activation(tag: &str) -> Result<Activation> {
    match tag {
        "relu" => Ok(Activation::Relu),
        "linear" => Ok(Activation::Linear),
        other => Err(Error::ModelFormat(format!("unknown activation '{other}'"))),
    }
}

/// Writes the network container.
pub fn save_network(path: &Path, params: &NetworkParams) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    let mut header = String::new();
    header.push_str(&format!("{MAGIC} v{VERSION}\n"));
    header.push_str(&format!("input_dim {}\n", params.input_dim()));
    header.push_str(&format!("layers {}\n", params.layer_count()));
    for (k, layer) in params.layers().iter().enumerate() {
        header.push_str(&format!(
            "layer {k} {} {} {}\n",
            activation_tag(layer.activation),
            layer.weights.nrows(),
            layer.weights.ncols()
        ));
    }
    header.push_str("data\n");
    file.write_all(header.as_bytes())?;
    let mut buf = Vec::new();
    for layer in params.layers() {
        for w in layer.weights.iter() {
            buf.extend_from_slice(&w.to_le_bytes());
        }
        for b in layer.bias.iter() {
            buf.extend_from_slice(&b.to_le_bytes());
        }
    }
    file.write_all(&buf)?;
    Ok(())
}

/// Reads a network container written by [`save_network`].
pub fn load_network(path: &Path) -> Result<NetworkParams> {
    let file = std::fs::File::open(path)?;
    let mut reader = BufReader::new(file);

    let mut line = String::new();
    let mut next_line = |reader: &mut BufReader<std::fs::File>| -> Result<String> {
        line.clear();
        let n = reader.read_line(&mut line)?;
        if n == 0 {
            return Err(Error::ModelFormat("unexpected end of header".into()));
        }
        Ok(line.trim_end().to_string())
    };

    let magic = next_line(&mut reader)?;
    if magic != format!("{MAGIC} v{VERSION}") {
        return Err(Error::ModelFormat(format!(
            "bad magic/version line '{magic}' (expected '{MAGIC} v{VERSION}')"
        )));
    }
    let parse_kv = |line: &str, key: &str| -> Result<usize> {
        let rest = line
            .strip_prefix(key)
            .ok_or_else(|| Error::ModelFormat(format!("expected '{key} …', got '{line}'")))?;
        rest.trim()
            .parse()
            .map_err(|_| Error::ModelFormat(format!("bad value in '{line}'")))
    };
    let input_dim = parse_kv(&next_line(&mut reader)?, "input_dim")?;
    let layer_count = parse_kv(&next_line(&mut reader)?, "layers")?;
    if layer_count == 0 || layer_count > 1024 {
        return Err(Error::ModelFormat(format!("implausible layer count {layer_count}")));
    }

    let mut shapes = Vec::with_capacity(layer_count);
    for k in 0..layer_count {
        let l = next_line(&mut reader)?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 5 || parts[0] != "layer" {
            return Err(Error::ModelFormat(format!("bad layer line '{l}'")));
        }
        let idx: usize = parts[1]
            .parse()
            .map_err(|_| Error::ModelFormat(format!("bad layer index in '{l}'")))?;
        if idx != k {
            return Err(Error::ModelFormat(format!("layer {k} labeled {idx}")));
        }
        let activation = parse_activation(parts[2])?;
        let rows: usize = parts[3]
            .parse()
            .map_err(|_| Error::ModelFormat(format!("bad row count in '{l}'")))?;
        let cols: usize = parts[4]
            .parse()
            .map_err(|_| Error::ModelFormat(format!("bad column count in '{l}'")))?;
        shapes.push((activation, rows, cols));
    }
    if next_line(&mut reader)? != "data" {
        return Err(Error::ModelFormat("missing 'data' sentinel".into()));
    }

    let expected: usize = shapes.iter().map(|&(_, r, c)| r * c + r).sum();
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != expected * 8 {
        return Err(Error::ModelFormat(format!(
            "payload holds {} bytes, header promises {}",
            bytes.len(),
            expected * 8
        )));
    }
    let mut values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));

    let mut layers = Vec::with_capacity(layer_count);
    for &(activation, rows, cols) in &shapes {
        let w: Vec<f64> = values.by_ref().take(rows * cols).collect();
        let b: Vec<f64> = values.by_ref().take(rows).collect();
        layers.push(Layer {
            weights: Array2::from_shape_vec((rows, cols), w)
                .map_err(|e| Error::ModelFormat(e.to_string()))?,
            bias: Array1::from_vec(b),
            activation,
        });
    }
    NetworkParams::new(input_dim, layers)
}

/// Stores a linear fit as TOML.
pub fn save_linear_fit(path: &Path, fit: &LinearAftFit) -> Result<()> {
    let text = toml::to_string_pretty(fit).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_linear_fit(path: &Path) -> Result<LinearAftFit> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{init_params, LayerSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn network_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let params = init_params(&LayerSpec::simulation_stack(), 3, &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.model");
        save_network(&path, &params).unwrap();
        let loaded = load_network(&path).unwrap();
        assert_eq!(params, loaded);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let params = init_params(&[LayerSpec::linear(1)], 2, &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.model");
        save_network(&path, &params).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(load_network(&path), Err(Error::ModelFormat(_))));
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.model");
        std::fs::write(&path, "something else\n").unwrap();
        assert!(matches!(load_network(&path), Err(Error::ModelFormat(_))));
    }

    #[test]
    fn linear_fit_round_trip() {
        let fit = LinearAftFit {
            beta: vec![0.5, 1.0, -2.0],
            sigma: Some(1.3),
            converged: true,
            iterations: 7,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fit.toml");
        save_linear_fit(&path, &fit).unwrap();
        let loaded = load_linear_fit(&path).unwrap();
        assert_eq!(fit.beta, loaded.beta);
        assert_eq!(fit.sigma, loaded.sigma);
        assert_eq!(fit.converged, loaded.converged);
    }
}
