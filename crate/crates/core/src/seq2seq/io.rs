//! Model file format, all integers and floats little-endian:
//!
//! ```text
//! "G2PM"            4 bytes
//! version           u32  (= 1)
//! payload length    u64
//! payload:
//!   num_layers u32, hidden_size u32, embed_size u32, max_decode_len u32, seed u64
//!   input symbol count u32, then per symbol: byte length u32 + UTF-8
//!   output symbol count u32, same encoding
//!   parameter count u64, then that many f64 in canonical tensor order
//! CRC32 of payload  u32
//! ```

use std::path::Path;

use super::params::ModelParams;
use super::vocab::Vocab;
use super::{G2pModel, ModelConfig, ModelError};
use crate::cisampa::PhonemeInventory;

pub const MAGIC: &[u8; 4] = b"G2PM";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8;

pub fn to_bytes(model: &G2pModel) -> Vec<u8> {
    let mut payload = Vec::new();
    let c = &model.config;
    for v in [c.num_layers, c.hidden_size, c.embed_size, c.max_decode_len] {
        payload.extend_from_slice(&(v as u32).to_le_bytes());
    }
    payload.extend_from_slice(&c.seed.to_le_bytes());
    for symbols in [model.vocab.input_symbols(), model.vocab.output_symbols()] {
        payload.extend_from_slice(&(symbols.len() as u32).to_le_bytes());
        for s in symbols {
            payload.extend_from_slice(&(s.len() as u32).to_le_bytes());
            payload.extend_from_slice(s.as_bytes());
        }
    }
    let flat = model.params.to_flat();
    payload.extend_from_slice(&(flat.len() as u64).to_le_bytes());
    for v in flat {
        payload.extend_from_slice(&v.to_le_bytes());
    }

    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let end = self.pos.checked_add(n).ok_or(ModelError::TruncatedFile)?;
        let s = self.buf.get(self.pos..end).ok_or(ModelError::TruncatedFile)?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, ModelError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn symbols(&mut self) -> Result<Vec<String>, ModelError> {
        let n = self.u32()? as usize;
        let mut out = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            let len = self.u32()? as usize;
            let s = std::str::from_utf8(self.take(len)?)
                .map_err(|_| ModelError::Corrupt("symbol is not UTF-8".into()))?;
            out.push(s.to_string());
        }
        Ok(out)
    }
}

pub fn from_bytes(bytes: &[u8], inv: &PhonemeInventory) -> Result<G2pModel, ModelError> {
    if bytes.len() < 4 {
        return Err(ModelError::TruncatedFile);
    }
    if &bytes[..4] != MAGIC {
        return Err(ModelError::BadMagic);
    }
    let mut header = Reader { buf: bytes, pos: 4 };
    let version = header.u32()?;
    if version != VERSION {
        return Err(ModelError::UnsupportedVersion(version));
    }
    let payload_len = usize::try_from(header.u64()?).map_err(|_| ModelError::TruncatedFile)?;
    let payload = header.take(payload_len)?;
    let crc = header.u32()?;
    if header.pos != bytes.len() {
        return Err(ModelError::Corrupt("trailing bytes after checksum".into()));
    }
    if crc32fast::hash(payload) != crc {
        return Err(ModelError::ChecksumMismatch);
    }

    let mut r = Reader { buf: payload, pos: 0 };
    let config = ModelConfig {
        num_layers: r.u32()? as usize,
        hidden_size: r.u32()? as usize,
        embed_size: r.u32()? as usize,
        max_decode_len: r.u32()? as usize,
        seed: r.u64()?,
    };
    config.validate()?;
    let inputs = r.symbols()?;
    let outputs = r.symbols()?;
    let vocab = Vocab::from_stored(inputs, outputs, inv)?;
    let mut params = ModelParams::zeros(&config, vocab.input_size(), vocab.output_size());
    let count = r.u64()? as usize;
    if count != params.num_params() {
        return Err(ModelError::Corrupt(format!(
            "expected {} parameters, found {count}",
            params.num_params()
        )));
    }
    let raw = r.take(count.checked_mul(8).ok_or(ModelError::TruncatedFile)?)?;
    let flat: Vec<f64> = raw
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    if r.pos != payload.len() {
        return Err(ModelError::Corrupt("unexpected bytes in payload".into()));
    }
    params.fill_from_flat(&flat);
    if !params.is_finite() {
        return Err(ModelError::Corrupt("non-finite parameter".into()));
    }
    Ok(G2pModel {
        config,
        vocab,
        params,
    })
}

pub fn save_model(model: &G2pModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    std::fs::write(path, to_bytes(model))
        .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))
}

pub fn load_model(path: impl AsRef<Path>, inv: &PhonemeInventory) -> Result<G2pModel, ModelError> {
    let path = path.as_ref();
    let bytes =
        std::fs::read(path).map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
    from_bytes(&bytes, inv)
}
