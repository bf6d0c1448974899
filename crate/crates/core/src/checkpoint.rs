//! Versioned binary checkpoint format for policy parameters.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic          8 bytes  "CASCPOL\0"
//! version        u32
//! tensor count   u32
//! per tensor     u32 rows, u32 cols   (cols = 1 for vectors)
//! per tensor     rows*cols f64, row-major
//! checksum       u64 FNV-1a over all preceding bytes
//! ```
//!
//! Tensor order: actor weight/bias per layer, then log_std, then critic
//! weight/bias per layer. Files are written to a temporary sibling and
//! renamed into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::nn::Mlp;
use crate::policy::{PolicyParameters, ACTION_DIM, HIDDEN_WIDTH, OBS_DIM};

pub const MAGIC: [u8; 8] = *b"CASCPOL\0";
pub const FORMAT_VERSION: u32 = 1;

/// FNV-1a 64-bit hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Parsed checkpoint header.
#[derive(Debug, Clone)]
pub struct CheckpointHeader {
    pub version: u32,
    pub tensor_dims: Vec<(u32, u32)>,
    pub checksum: u64,
    pub checksum_ok: bool,
}

fn tensors_of(policy: &PolicyParameters) -> Vec<(usize, usize, Vec<f64>)> {
    let mut out = Vec::new();
    let push_net = |net: &Mlp, out: &mut Vec<(usize, usize, Vec<f64>)>| {
        for l in 0..net.n_layers() {
            let w = &net.weights[l];
            out.push((w.nrows(), w.ncols(), w.iter().cloned().collect()));
            let b = &net.biases[l];
            out.push((b.len(), 1, b.to_vec()));
        }
    };
    push_net(&policy.actor, &mut out);
    out.push((policy.log_std.len(), 1, policy.log_std.to_vec()));
    push_net(&policy.critic, &mut out);
    out
}

fn encode(policy: &PolicyParameters) -> Vec<u8> {
    let tensors = tensors_of(policy);
    let mut buf = Vec::new();
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for (r, c, _) in &tensors {
        buf.extend_from_slice(&(*r as u32).to_le_bytes());
        buf.extend_from_slice(&(*c as u32).to_le_bytes());
    }
    for (_, _, data) in &tensors {
        for v in data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let checksum = fnv1a64(&buf);
    buf.extend_from_slice(&checksum.to_le_bytes());
    buf
}

/// Write a checkpoint atomically (temp file + rename).
pub fn save_policy(path: &Path, policy: &PolicyParameters) -> Result<()> {
    let bytes = encode(policy);
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Checkpoint("truncated checkpoint".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parse the header and verify the checksum without constructing a policy.
pub fn read_header(path: &Path) -> Result<CheckpointHeader> {
    let buf = fs::read(path)?;
    parse_header(&buf)
}

fn parse_header(buf: &[u8]) -> Result<CheckpointHeader> {
    if buf.len() < MAGIC.len() + 8 + 8 {
        return Err(Error::Checkpoint("file too short".into()));
    }
    if buf[..MAGIC.len()] != MAGIC {
        return Err(Error::Checkpoint("bad magic string".into()));
    }
    let mut r = Reader {
        buf,
        pos: MAGIC.len(),
    };
    let version = r.u32()?;
    let count = r.u32()? as usize;
    if count > 1024 {
        return Err(Error::Checkpoint(format!("implausible tensor count {count}")));
    }
    let mut tensor_dims = Vec::with_capacity(count);
    for _ in 0..count {
        tensor_dims.push((r.u32()?, r.u32()?));
    }
    let stored = u64::from_le_bytes(
        buf[buf.len() - 8..]
            .try_into()
            .map_err(|_| Error::Checkpoint("truncated checksum".into()))?,
    );
    let checksum_ok = fnv1a64(&buf[..buf.len() - 8]) == stored;
    Ok(CheckpointHeader {
        version,
        tensor_dims,
        checksum: stored,
        checksum_ok,
    })
}

/// Load and validate a checkpoint. Refuses files with the wrong magic,
/// version, dimensions, or checksum.
pub fn load_policy(path: &Path) -> Result<PolicyParameters> {
    let buf = fs::read(path)?;
    let header = parse_header(&buf)?;
    if !header.checksum_ok {
        return Err(Error::Checkpoint("checksum mismatch, refusing to load".into()));
    }
    if header.version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {}",
            header.version
        )));
    }
    let expected_dims = expected_tensor_dims();
    if header.tensor_dims.len() != expected_dims.len() {
        return Err(Error::Checkpoint(format!(
            "expected {} tensors, got {}",
            expected_dims.len(),
            header.tensor_dims.len()
        )));
    }
    for (i, (got, want)) in header.tensor_dims.iter().zip(expected_dims.iter()).enumerate() {
        if got != want {
            return Err(Error::Checkpoint(format!(
                "tensor {i} has shape {got:?}, expected {want:?}"
            )));
        }
    }

    let mut r = Reader {
        buf: &buf,
        pos: MAGIC.len() + 8 + header.tensor_dims.len() * 8,
    };
    let mut read_tensor = |rows: usize, cols: usize| -> Result<Vec<f64>> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let v = r.f64()?;
            if !v.is_finite() {
                return Err(Error::Checkpoint("non-finite parameter".into()));
            }
            data.push(v);
        }
        Ok(data)
    };

    let actor_dims = [OBS_DIM, HIDDEN_WIDTH, HIDDEN_WIDTH, ACTION_DIM];
    let critic_dims = [OBS_DIM, HIDDEN_WIDTH, HIDDEN_WIDTH, 1];
    let load_net = |dims: &[usize], read: &mut dyn FnMut(usize, usize) -> Result<Vec<f64>>| -> Result<Mlp> {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..dims.len() - 1 {
            let w = read(dims[l + 1], dims[l])?;
            weights.push(Array2::from_shape_vec((dims[l + 1], dims[l]), w).unwrap());
            let b = read(dims[l + 1], 1)?;
            biases.push(Array1::from_vec(b));
        }
        Ok(Mlp {
            dims: dims.to_vec(),
            weights,
            biases,
        })
    };

    let actor = load_net(&actor_dims, &mut read_tensor)?;
    let log_std_raw = read_tensor(ACTION_DIM, 1)?;
    let critic = load_net(&critic_dims, &mut read_tensor)?;
    let policy = PolicyParameters {
        actor,
        log_std: Array1::from_vec(log_std_raw),
        critic,
    };
    Ok(policy)
}

fn expected_tensor_dims() -> Vec<(u32, u32)> {
    let net = |dims: &[usize]| -> Vec<(u32, u32)> {
        let mut v = Vec::new();
        for l in 0..dims.len() - 1 {
            v.push((dims[l + 1] as u32, dims[l] as u32));
            v.push((dims[l + 1] as u32, 1));
        }
        v
    };
    let mut dims = net(&[OBS_DIM, HIDDEN_WIDTH, HIDDEN_WIDTH, ACTION_DIM]);
    dims.push((ACTION_DIM as u32, 1));
    dims.extend(net(&[OBS_DIM, HIDDEN_WIDTH, HIDDEN_WIDTH, 1]));
    dims
}
