//! Binary checkpoint container: 8-byte magic, `u32` version, five `u64`
//! layer widths, `u64` parameter count, then little-endian `f64` values.

use std::fs;
use std::path::Path;

use crate::scalar::Real;

use super::nn::{NetworkParams, NetworkShape};
use super::DrlError;

pub const MAGIC: &[u8; 8] = b"NAVARENA";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 6 * 8;

pub fn encode_params<T: Real>(params: &NetworkParams<T>) -> Vec<u8> {
    let s = params.shape();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * s.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in [s.input, s.fc1, s.fc2, s.hidden, s.actions, s.param_count()] {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for v in params.as_slice() {
        out.extend_from_slice(&v.to_f64_lossless().to_le_bytes());
    }
    out
}

pub fn decode_params<T: Real>(bytes: &[u8]) -> Result<NetworkParams<T>, DrlError> {
    let bad = |m: String| DrlError::Checkpoint(m);
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[..8] != MAGIC {
        return Err(bad("not a checkpoint (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(bad(format!("unsupported checkpoint version {version}")));
    }
    let field = |k: usize| {
        let o = 12 + 8 * k;
        usize::try_from(u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes")))
            .map_err(|_| bad("dimension overflows usize".into()))
    };
    let shape = NetworkShape { input: field(0)?, fc1: field(1)?, fc2: field(2)?, hidden: field(3)?, actions: field(4)? };
    shape.validate()?;
    let count = field(5)?;
    if count != shape.param_count() {
        return Err(bad(format!("parameter count {count} inconsistent with shape {shape:?}")));
    }
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 8 * count {
        return Err(bad(format!("payload has {} bytes, expected {}", payload.len(), 8 * count)));
    }
    let data = payload.chunks_exact(8).map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8 bytes")))).collect();
    NetworkParams::from_flat(shape, data)
}

pub fn save_params<T: Real>(params: &NetworkParams<T>, path: impl AsRef<Path>) -> Result<(), DrlError> {
    let path = path.as_ref();
    fs::write(path, encode_params(params)).map_err(|e| DrlError::Io(path.display().to_string(), e))
}

pub fn load_params<T: Real>(path: impl AsRef<Path>) -> Result<NetworkParams<T>, DrlError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| DrlError::Io(path.display().to_string(), e))?;
    decode_params(&bytes)
}

/// Loads and checks the layer widths against `expected`.
pub fn load_params_checked<T: Real>(path: impl AsRef<Path>, expected: NetworkShape) -> Result<NetworkParams<T>, DrlError> {
    let p = load_params(path)?;
    if p.shape() != expected {
        return Err(DrlError::Checkpoint(format!("checkpoint shape {:?} differs from expected {expected:?}", p.shape())));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drl::nn::{forward, HiddenState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SHAPE: NetworkShape = NetworkShape { input: 10, fc1: 6, fc2: 5, hidden: 4, actions: 3 };

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = NetworkParams::<f64>::init(SHAPE, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.ckpt");
        save_params(&p, &path).unwrap();
        let q: NetworkParams<f64> = load_params(&path).unwrap();
        assert_eq!(p, q);
        for _ in 0..10 {
            let x: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
            let h = HiddenState::zeros(4);
            assert_eq!(forward(&p, &x, &h).unwrap(), forward(&q, &x, &h).unwrap());
        }
    }

    #[test]
    fn f32_widens_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = NetworkParams::<f32>::init(SHAPE, &mut rng);
        let q: NetworkParams<f32> = decode_params(&encode_params(&p)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn corrupt_files_rejected() {
        let p = NetworkParams::<f64>::zeros(SHAPE);
        let bytes = encode_params(&p);
        assert!(decode_params::<f64>(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_params::<f64>(&bytes[..20]).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(matches!(decode_params::<f64>(&wrong), Err(DrlError::Checkpoint(_))));
        let mut shape = bytes;
        shape[12] = 11;
        assert!(decode_params::<f64>(&shape).is_err());
    }
}
