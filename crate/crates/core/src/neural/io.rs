//! Model container: a JSON architecture header followed by little-endian
//! f32 parameter blobs in declaration order. Save -> load -> forward is
//! bit-identical.

use std::fs;
use std::path::Path;

use super::arch::ArchitectureSpec;
use super::network::Network;
use super::train::EpochStat;
use super::NeuralError;

const MAGIC: &[u8; 4] = b"R3DF";
const VERSION: u32 = 1;

fn io_err(path: &Path, source: std::io::Error) -> NeuralError {
    NeuralError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn bad(path: &Path, reason: impl Into<String>) -> NeuralError {
    NeuralError::BadModelFile {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

pub fn save_network(net: &Network<f32>, path: &Path) -> Result<(), NeuralError> {
    let header = serde_json::to_vec(net.spec()).expect("spec serializes");
    let params = net.flat_params();
    let mut bytes = Vec::with_capacity(16 + header.len() + params.len() * 4);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(header.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&header);
    for p in params {
        bytes.extend_from_slice(&p.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

pub fn load_network(path: &Path) -> Result<Network<f32>, NeuralError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(bad(path, "not a model file (bad magic)"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(bad(path, format!("unsupported version {version}")));
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    if bytes.len() < 16 + hlen {
        return Err(bad(path, "truncated header"));
    }
    let spec: ArchitectureSpec = serde_json::from_slice(&bytes[16..16 + hlen])
        .map_err(|e| bad(path, format!("malformed header: {e}")))?;
    let blob = &bytes[16 + hlen..];
    if blob.len() % 4 != 0 {
        return Err(bad(path, "parameter blob length not a multiple of 4"));
    }
    let params: Vec<f32> = blob
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let mut net: Network<f32> = Network::new(spec, 0)?;
    net.set_flat_params(&params)
        .map_err(|e| bad(path, e.to_string()))?;
    Ok(net)
}

/// Training log CSV: `epoch,loss,lr`.
pub fn write_log_csv(log: &[EpochStat], path: &Path) -> Result<(), NeuralError> {
    let mut text = String::from("epoch,loss,lr\n");
    for s in log {
        text.push_str(&format!("{},{:.16e},{:.16e}\n", s.epoch, s.loss, s.lr));
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn read_log_csv(path: &Path) -> Result<Vec<EpochStat>, NeuralError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(bad(path, format!("line {}: expected 3 fields", i + 1)));
        }
        let parse = |s: &str| -> Result<f64, NeuralError> {
            s.parse().map_err(|_| bad(path, format!("line {}: bad number {s:?}", i + 1)))
        };
        out.push(EpochStat {
            epoch: parts[0]
                .parse()
                .map_err(|_| bad(path, format!("line {}: bad epoch", i + 1)))?,
            loss: parse(parts[1])?,
            lr: parse(parts[2])?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::arch::preset;
    use rand::Rng;

    #[test]
    fn save_load_forward_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.bin");
        let net: Network<f32> =
            Network::new(preset("multicrop3d_toy", (16, 16, 16)).unwrap(), 21).unwrap();
        save_network(&net, &path).unwrap();
        let loaded = load_network(&path).unwrap();
        assert_eq!(loaded.flat_params(), net.flat_params());

        let mut rng = crate::seed::rng(4, "x", &[]);
        let x: Vec<f32> = (0..net.input_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (a, _) = net.forward_eval(&x).unwrap();
        let (b, _) = loaded.forward_eval(&x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn log_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.csv");
        let log = vec![
            EpochStat { epoch: 1, loss: 0.6931471805599453, lr: 0.005 },
            EpochStat { epoch: 2, loss: 0.24, lr: 0.001 },
        ];
        write_log_csv(&log, &path).unwrap();
        let back = read_log_csv(&path).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.bin");
        std::fs::write(&path, b"nope").unwrap();
        assert!(load_network(&path).is_err());
    }
}
