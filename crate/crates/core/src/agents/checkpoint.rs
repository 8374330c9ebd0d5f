//! Binary parameter files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes  "CHEFHAT\0"
//! version  u32      1
//! kind     u8       0 = DQL, 1 = PPO, 2 = trait predictor
//! nets     u8       number of networks that follow
//! per net:
//!   n      u32      number of layer sizes
//!   sizes  n x u32
//! params   f32 x total, net by net, each layer's weights (row-major,
//!          inputs x outputs) then bias
//! ```

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use ndarray::NdFloat;

use super::AgentError;
use crate::nn::Mlp;

pub const MAGIC: &[u8; 8] = b"CHEFHAT\0";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum CheckpointKind {
    Dql = 0,
    Ppo = 1,
    TraitPredictor = 2,
}

impl TryFrom<u8> for CheckpointKind {
    type Error = AgentError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(Self::Dql),
            1 => Ok(Self::Ppo),
            2 => Ok(Self::TraitPredictor),
            other => Err(AgentError::BadCheckpoint(format!("unknown kind tag {other}"))),
        }
    }
}

pub fn write_nets<W: Write>(
    mut w: W,
    kind: CheckpointKind,
    nets: &[&Mlp<f32>],
) -> Result<(), AgentError> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[kind as u8, nets.len() as u8])?;
    for net in nets {
        let sizes = net.sizes();
        w.write_all(&(sizes.len() as u32).to_le_bytes())?;
        for s in sizes {
            w.write_all(&(s as u32).to_le_bytes())?;
        }
    }
    for net in nets {
        let mut buf = Vec::with_capacity(net.param_count() * 4);
        for p in net.flatten() {
            buf.extend_from_slice(&p.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_nets<R: Read>(mut r: R) -> Result<(CheckpointKind, Vec<Mlp<f32>>), AgentError> {
    let bad = |m: &str| AgentError::BadCheckpoint(m.to_string());
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = read_u32(&mut r).map_err(|_| bad("truncated header"))?;
    if version != VERSION {
        return Err(AgentError::BadCheckpoint(format!("unsupported version {version}")));
    }
    let mut tags = [0u8; 2];
    r.read_exact(&mut tags).map_err(|_| bad("truncated header"))?;
    let kind = CheckpointKind::try_from(tags[0])?;
    let mut shapes = Vec::with_capacity(tags[1] as usize);
    for _ in 0..tags[1] {
        let n = read_u32(&mut r).map_err(|_| bad("truncated shapes"))? as usize;
        if !(2..=64).contains(&n) {
            return Err(bad("implausible layer count"));
        }
        let sizes = (0..n)
            .map(|_| read_u32(&mut r).map(|s| s as usize))
            .collect::<io::Result<Vec<_>>>()
            .map_err(|_| bad("truncated shapes"))?;
        shapes.push(sizes);
    }
    let mut nets = Vec::with_capacity(shapes.len());
    for sizes in shapes {
        let mut net = Mlp::<f32>::zeros(&sizes)?;
        let mut raw = vec![0u8; net.param_count() * 4];
        r.read_exact(&mut raw).map_err(|_| bad("truncated parameters"))?;
        let params: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        net.set_flat(&params)?;
        nets.push(net);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(bad("trailing bytes"));
    }
    Ok((kind, nets))
}

pub fn save_nets(path: &Path, kind: CheckpointKind, nets: &[&Mlp<f32>]) -> Result<(), AgentError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut buf = Vec::new();
    write_nets(&mut buf, kind, nets)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_nets(path: &Path) -> Result<(CheckpointKind, Vec<Mlp<f32>>), AgentError> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => AgentError::MissingCheckpoint(path.display().to_string()),
        _ => AgentError::Io(e),
    })?;
    read_nets(bytes.as_slice())
}

/// Hidden layer widths of a network (sizes without input and output).
pub fn hidden_sizes<F: NdFloat>(net: &Mlp<F>) -> Vec<usize> {
    let sizes = net.sizes();
    sizes[1..sizes.len() - 1].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_preserves_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = Mlp::<f32>::new(&[28, 7, 200], &mut rng).unwrap();
        let b = Mlp::<f32>::new(&[28, 5, 1], &mut rng).unwrap();
        let mut buf = Vec::new();
        write_nets(&mut buf, CheckpointKind::Ppo, &[&a, &b]).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        let (kind, nets) = read_nets(buf.as_slice()).unwrap();
        assert_eq!(kind, CheckpointKind::Ppo);
        assert_eq!(nets, vec![a, b]);
    }

    #[test]
    fn params_are_little_endian_f32() {
        let mut net = Mlp::<f32>::zeros(&[1, 1]).unwrap();
        net.set_flat(&[1.5, -2.0]).unwrap();
        let mut buf = Vec::new();
        write_nets(&mut buf, CheckpointKind::Dql, &[&net]).unwrap();
        let tail = &buf[buf.len() - 8..];
        assert_eq!(&tail[..4], &1.5f32.to_le_bytes());
        assert_eq!(&tail[4..], &(-2.0f32).to_le_bytes());
        // header 8 + 4 + 2, shapes 4 + 2 * 4, params 8
        assert_eq!(buf.len(), 14 + 12 + 8);
    }

    #[test]
    fn corrupt_files_rejected() {
        let net = Mlp::<f32>::zeros(&[2, 2]).unwrap();
        let mut buf = Vec::new();
        write_nets(&mut buf, CheckpointKind::Dql, &[&net]).unwrap();
        assert!(read_nets(&buf[..buf.len() - 1]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_nets(extra.as_slice()).is_err());
        let mut wrong = buf.clone();
        wrong[0] = b'X';
        assert!(read_nets(wrong.as_slice()).is_err());
        let mut version = buf;
        version[8] = 9;
        assert!(read_nets(version.as_slice()).is_err());
    }

    #[test]
    fn missing_file_is_reported() {
        let err = load_nets(Path::new("/nonexistent/agent.ckpt")).unwrap_err();
        assert!(matches!(err, AgentError::MissingCheckpoint(_)));
    }
}
