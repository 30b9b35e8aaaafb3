//! On-disk model format. Little-endian throughout:
//!
//! ```text
//! magic    8 bytes  "MLPMODEL"
//! version  u32      currently 1
//! n_dims   u32
//! dims     n_dims x u64
//! params   f64 x num_params, flat layer order (weights row-major, biases)
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::{layer_offsets, param_count, Mlp, HIDDEN_DIMS};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"MLPMODEL";
const VERSION: u32 = 1;
const MAX_DIM: u64 = 1 << 30;

pub fn save(model: &Mlp, mut w: impl Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(model.dims.len() as u32).to_le_bytes())?;
    for &d in &model.dims {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for &p in &model.params {
        w.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

pub fn load(mut r: impl Read) -> Result<Mlp> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let bad = |msg: &str| Error::ModelFormat(msg.to_string());

    if buf.len() < 16 {
        return Err(bad("file too short for header"));
    }
    if &buf[0..8] != MAGIC {
        return Err(bad("bad magic, not a model file"));
    }
    let version = u32::from_le_bytes(buf[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {version}")));
    }
    let n_dims = u32::from_le_bytes(buf[12..16].try_into().unwrap()) as usize;
    if n_dims != HIDDEN_DIMS.len() + 2 {
        return Err(Error::ModelFormat(format!(
            "expected {} layer dims, found {n_dims}",
            HIDDEN_DIMS.len() + 2
        )));
    }
    let dims_end = 16 + 8 * n_dims;
    if buf.len() < dims_end {
        return Err(bad("file truncated inside dimension table"));
    }
    let mut dims = Vec::with_capacity(n_dims);
    for i in 0..n_dims {
        let d = u64::from_le_bytes(buf[16 + 8 * i..24 + 8 * i].try_into().unwrap());
        if d == 0 || d > MAX_DIM {
            return Err(Error::ModelFormat(format!("layer dimension {d} out of range")));
        }
        dims.push(d as usize);
    }
    if dims[1..dims.len() - 1] != HIDDEN_DIMS {
        return Err(bad("hidden layer shape does not match this topology"));
    }
    if *dims.last().unwrap() < 2 {
        return Err(bad("class head must have at least 2 outputs"));
    }

    let n_params = param_count(&dims);
    let expected = dims_end + 8 * n_params;
    if buf.len() != expected {
        return Err(Error::ModelFormat(format!(
            "expected {expected} bytes for this shape, file has {}",
            buf.len()
        )));
    }
    let mut params = Vec::with_capacity(n_params);
    for i in 0..n_params {
        let off = dims_end + 8 * i;
        let v = f64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
        if !v.is_finite() {
            return Err(bad("non-finite parameter value"));
        }
        params.push(v);
    }
    debug_assert_eq!(layer_offsets(&dims).len(), dims.len() - 1);
    Ok(Mlp { dims, params })
}

pub fn save_file(model: &Mlp, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    save(model, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn load_file(path: impl AsRef<Path>) -> Result<Mlp> {
    load(std::io::BufReader::new(std::fs::File::open(path)?))
}
