//! Flat binary checkpoint container.
//!
//! All integers are little-endian `u64` unless noted; complex entries are
//! written as `(re: f64, im: f64)` little-endian pairs.
//!
//! ```text
//! magic      4 bytes   b"QMPS"
//! version    u32       1
//! kind       u8        0 = uniform unit cell, 1 = finite chain
//! n          u64       unit cell length L / chain length N
//! d          u64       physical dimension
//! center     u64       orthogonality center bond (finite), 0 (uniform)
//! site dims  n × (left u64, right u64)
//! bond dims  m × (rows u64, cols u64)   m = n (uniform) or 1 (finite)
//! sites      n tensors (d, left, right), row-major
//! bonds      m matrices, row-major
//! ```

use std::io::{self, Read, Write};

use super::{FiniteMps, UniformMps};
use crate::linalg::{ComplexTensor, C64};

const MAGIC: &[u8; 4] = b"QMPS";
const VERSION: u32 = 1;

/// Any state that can be checkpointed.
#[derive(Clone, Debug, PartialEq)]
pub enum Checkpoint {
    Uniform(UniformMps),
    Finite(FiniteMps),
}

fn put_u64<W: Write>(w: &mut W, x: usize) -> io::Result<()> {
    w.write_all(&(x as u64).to_le_bytes())
}

fn get_u64<R: Read>(r: &mut R) -> io::Result<usize> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    usize::try_from(u64::from_le_bytes(buf)).map_err(|_| invalid("dimension does not fit in usize"))
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn put_entries<W: Write>(w: &mut W, t: &ComplexTensor) -> io::Result<()> {
    let mut buf = Vec::with_capacity(16 * t.len());
    for z in t.data() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)
}

fn get_entries<R: Read>(r: &mut R, shape: Vec<usize>) -> io::Result<ComplexTensor> {
    let count: usize = shape.iter().product();
    let mut buf = vec![0u8; 16 * count];
    r.read_exact(&mut buf)?;
    let data = buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect();
    ComplexTensor::new(shape, data).map_err(|e| invalid(e.to_string()))
}

pub fn write_checkpoint<W: Write>(w: &mut W, state: &Checkpoint) -> io::Result<()> {
    let (kind, sites, bonds, center, d): (u8, &[ComplexTensor], Vec<&ComplexTensor>, usize, usize) = match state {
        Checkpoint::Uniform(s) => (0, s.sites(), s.bonds().iter().collect(), 0, s.site(0).shape()[0]),
        Checkpoint::Finite(s) => (1, s.sites(), vec![s.center_matrix()], s.center(), s.site(0).shape()[0]),
    };
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[kind])?;
    put_u64(w, sites.len())?;
    put_u64(w, d)?;
    put_u64(w, center)?;
    for s in sites {
        put_u64(w, s.shape()[1])?;
        put_u64(w, s.shape()[2])?;
    }
    for b in &bonds {
        put_u64(w, b.nrows())?;
        put_u64(w, b.ncols())?;
    }
    for s in sites {
        put_entries(w, s)?;
    }
    for b in &bonds {
        put_entries(w, b)?;
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(r: &mut R) -> io::Result<Checkpoint> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(invalid("not an MPS checkpoint"));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v)?;
    let version = u32::from_le_bytes(v);
    if version != VERSION {
        return Err(invalid(format!("unsupported checkpoint version {version}")));
    }
    let mut kind = [0u8; 1];
    r.read_exact(&mut kind)?;
    let n = get_u64(r)?;
    let d = get_u64(r)?;
    let center = get_u64(r)?;
    if n == 0 || d == 0 {
        return Err(invalid("empty state"));
    }
    let site_dims: Vec<(usize, usize)> = (0..n).map(|_| Ok((get_u64(r)?, get_u64(r)?))).collect::<io::Result<_>>()?;
    let n_bonds = match kind[0] {
        0 => n,
        1 => 1,
        k => return Err(invalid(format!("unknown state kind {k}"))),
    };
    let bond_dims: Vec<(usize, usize)> =
        (0..n_bonds).map(|_| Ok((get_u64(r)?, get_u64(r)?))).collect::<io::Result<_>>()?;
    let sites = site_dims
        .iter()
        .map(|&(l, rr)| get_entries(r, vec![d, l, rr]))
        .collect::<io::Result<Vec<_>>>()?;
    let mut bonds = bond_dims
        .iter()
        .map(|&(a, b)| get_entries(r, vec![a, b]))
        .collect::<io::Result<Vec<_>>>()?;
    let state = if kind[0] == 0 {
        UniformMps::from_parts(sites, bonds).map(Checkpoint::Uniform)
    } else {
        FiniteMps::from_parts(sites, center, bonds.remove(0)).map(Checkpoint::Finite)
    };
    state.map_err(|e| invalid(e.to_string()))
}
