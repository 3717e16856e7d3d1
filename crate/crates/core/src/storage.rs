//! Binary container for TT chains and fitted local bases.
//!
//! Layout (little endian):
//!
//! ```text
//! magic      8 bytes  "TTCHAIN\0"
//! version    u32      1
//! kind       u8       0 = chain, 1 = local basis
//! n          u32      number of physical dimensions
//! phys       n x u64
//! cores      u32      stored core count c (n for a chain, n - 1 for a basis)
//! bonds      (c + 1) x u64, boundary bonds included
//! [basis only] policy tag u8 (0 uniform, 1 per-step), count u32, count x f64
//! data       every core in order, row-major (left, phys, right), f64
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::detectors::OrthogonalBasis;
use crate::error::{Error, Result};
use crate::svd::TruncationPolicy;
use crate::tensor::FactorShape;
use crate::tt::{Core, TTChain};

pub const MAGIC: &[u8; 8] = b"TTCHAIN\0";
pub const VERSION: u32 = 1;

const KIND_CHAIN: u8 = 0;
const KIND_BASIS: u8 = 1;

// Largest count accepted from a header before allocating.
const MAX_ELEMENTS: u64 = 1 << 32;

pub fn write_chain<W: Write>(mut w: W, chain: &TTChain) -> Result<()> {
    write_header(&mut w, KIND_CHAIN, &chain.phys_dims(), chain.cores())?;
    write_data(&mut w, chain.cores())
}

pub fn read_chain<R: Read>(mut r: R) -> Result<TTChain> {
    let (phys, bonds) = read_header(&mut r, KIND_CHAIN)?;
    if bonds.len() != phys.len() + 1 {
        return Err(Error::Format("chain must store one core per physical dimension".into()));
    }
    TTChain::new(read_cores(&mut r, &phys, &bonds)?)
}

pub fn write_basis<W: Write>(mut w: W, basis: &OrthogonalBasis) -> Result<()> {
    write_header(&mut w, KIND_BASIS, basis.shape().factors(), basis.cores())?;
    let (tag, taus) = match basis.policy() {
        TruncationPolicy::Uniform(t) => (0u8, vec![*t]),
        TruncationPolicy::PerStep(ts) => (1u8, ts.clone()),
    };
    put(&mut w, &[tag])?;
    put(&mut w, &(taus.len() as u32).to_le_bytes())?;
    for t in taus {
        put(&mut w, &t.to_le_bytes())?;
    }
    write_data(&mut w, basis.cores())
}

pub fn read_basis<R: Read>(mut r: R) -> Result<OrthogonalBasis> {
    let (phys, bonds) = read_header(&mut r, KIND_BASIS)?;
    if bonds.len() != phys.len() {
        return Err(Error::Format("basis must store one core fewer than the shape length".into()));
    }
    let tag = read_u8(&mut r)?;
    let count = read_u32(&mut r)? as usize;
    if count as u64 > MAX_ELEMENTS {
        return Err(Error::Format("policy list too long".into()));
    }
    let taus = (0..count).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let policy = match (tag, taus.as_slice()) {
        (0, [t]) => TruncationPolicy::uniform(*t)?,
        (1, _) => TruncationPolicy::per_step(taus)?,
        _ => return Err(Error::Format(format!("bad policy tag {tag} with {count} values"))),
    };
    let cores = read_cores(&mut r, &phys[..phys.len() - 1], &bonds)?;
    let shape = FactorShape::new(phys).map_err(|e| Error::Format(e.to_string()))?;
    OrthogonalBasis::new(cores, shape, policy)
}

pub fn save_chain(path: impl AsRef<Path>, chain: &TTChain) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    write_chain(&mut w, chain)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_chain(path: impl AsRef<Path>) -> Result<TTChain> {
    let path = path.as_ref();
    read_chain(BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?))
}

pub fn save_basis(path: impl AsRef<Path>, basis: &OrthogonalBasis) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    write_basis(&mut w, basis)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_basis(path: impl AsRef<Path>) -> Result<OrthogonalBasis> {
    let path = path.as_ref();
    read_basis(BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?))
}

fn put<W: Write>(w: &mut W, bytes: &[u8]) -> Result<()> {
    w.write_all(bytes)
        .map_err(|e| Error::Format(format!("write failed: {e}")))
}

fn write_header<W: Write>(w: &mut W, kind: u8, phys: &[usize], cores: &[Core]) -> Result<()> {
    put(w, MAGIC)?;
    put(w, &VERSION.to_le_bytes())?;
    put(w, &[kind])?;
    put(w, &(phys.len() as u32).to_le_bytes())?;
    for &p in phys {
        put(w, &(p as u64).to_le_bytes())?;
    }
    put(w, &(cores.len() as u32).to_le_bytes())?;
    let first = cores.first().map_or(1, Core::left);
    put(w, &(first as u64).to_le_bytes())?;
    for c in cores {
        put(w, &(c.right() as u64).to_le_bytes())?;
    }
    Ok(())
}

fn write_data<W: Write>(w: &mut W, cores: &[Core]) -> Result<()> {
    for c in cores {
        for x in c.data() {
            put(w, &x.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_header<R: Read>(r: &mut R, expected_kind: u8) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut magic = [0u8; 8];
    fill(r, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a TT chain container (bad magic)".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported container version {version}")));
    }
    let kind = read_u8(r)?;
    if kind != expected_kind {
        return Err(Error::Format(format!(
            "container holds kind {kind}, expected {expected_kind}"
        )));
    }
    let n = read_u32(r)? as usize;
    let phys = (0..n).map(|_| read_dim(r)).collect::<Result<Vec<_>>>()?;
    let cores = read_u32(r)? as usize;
    if cores > n {
        return Err(Error::Format(format!("{cores} cores for {n} physical dimensions")));
    }
    let bonds = (0..=cores).map(|_| read_dim(r)).collect::<Result<Vec<_>>>()?;
    Ok((phys, bonds))
}

fn read_cores<R: Read>(r: &mut R, phys: &[usize], bonds: &[usize]) -> Result<Vec<Core>> {
    let mut cores = Vec::with_capacity(phys.len());
    for (i, &p) in phys.iter().enumerate() {
        let (left, right) = (bonds[i], bonds[i + 1]);
        let len = (left as u64) * (p as u64) * (right as u64);
        if len > MAX_ELEMENTS {
            return Err(Error::Format(format!("core {i} is implausibly large")));
        }
        let data = (0..len).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
        cores.push(Core::new(left, p, right, data)?);
    }
    Ok(cores)
}

fn fill<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::Format(format!("truncated container: {e}")))
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    fill(r, &mut b)?;
    Ok(b[0])
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    fill(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_dim<R: Read>(r: &mut R) -> Result<usize> {
    let mut b = [0u8; 8];
    fill(r, &mut b)?;
    let v = u64::from_le_bytes(b);
    if v == 0 || v > MAX_ELEMENTS {
        return Err(Error::Format(format!("invalid dimension {v}")));
    }
    Ok(v as usize)
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    fill(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}
