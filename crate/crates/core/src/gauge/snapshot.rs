//! Binary lattice snapshots with a JSON manifest alongside.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "G2LAT\0\0\0"
//! version    u32
//! group      u32      0 = U(1), 1 = SU(2)
//! ndim       u32
//! dims       u32 × ndim
//! spacings   f64 × ndim
//! ntwists    u32
//! twists     (u32, u32) × ntwists
//! links      f64 × (sites · ndim · k)
//! ```
//!
//! Links are written site-major (last coordinate fastest) with the
//! direction innermost. A U(1) link is `(re, im)` of its phase (`k = 2`);
//! an SU(2) link is its four entries in row-major order as `(re, im)`
//! pairs (`k = 8`).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::algebra::{c, Group, M2};
use super::lattice::LatticeField;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"G2LAT\0\0\0";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub group: Group,
    pub dims: Vec<usize>,
    pub spacings: Vec<f64>,
    pub twists: Vec<(usize, usize)>,
    pub sites: usize,
    pub bytes: usize,
}

impl Manifest {
    pub fn of(field: &LatticeField, bytes: usize) -> Self {
        Manifest {
            format: "g2lab-lattice".into(),
            version: VERSION,
            group: field.group(),
            dims: field.dims().to_vec(),
            spacings: field.spacings().to_vec(),
            twists: field.twists().to_vec(),
            sites: field.sites(),
            bytes,
        }
    }
}

/// Path of the manifest written next to a snapshot.
pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode(field: &LatticeField) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + field.links().len() * field.group().stored_reals() * 8);
    out.extend_from_slice(MAGIC);
    let u32s = |out: &mut Vec<u8>, v: u32| out.extend_from_slice(&v.to_le_bytes());
    u32s(&mut out, VERSION);
    u32s(&mut out, field.group().code());
    u32s(&mut out, field.ndim() as u32);
    for &n in field.dims() {
        u32s(&mut out, n as u32);
    }
    for &a in field.spacings() {
        out.extend_from_slice(&a.to_le_bytes());
    }
    u32s(&mut out, field.twists().len() as u32);
    for &(a, b) in field.twists() {
        u32s(&mut out, a as u32);
        u32s(&mut out, b as u32);
    }
    for u in field.links() {
        let entries: &[(usize, usize)] = match field.group() {
            Group::U1 => &[(0, 0)],
            Group::Su2 => &[(0, 0), (0, 1), (1, 0), (1, 1)],
        };
        for &(i, j) in entries {
            out.extend_from_slice(&u[(i, j)].re.to_le_bytes());
            out.extend_from_slice(&u[(i, j)].im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Invalid("lattice snapshot is truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<LatticeField> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Invalid("not a lattice snapshot (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Invalid(format!("unsupported snapshot version {version}")));
    }
    let group = Group::from_code(r.u32()?)?;
    let ndim = r.u32()? as usize;
    if ndim == 0 || ndim > 7 {
        return Err(Error::Invalid(format!("snapshot dimension {ndim} is not in 1..=7")));
    }
    let dims: Vec<usize> = (0..ndim).map(|_| r.u32().map(|n| n as usize)).collect::<Result<_>>()?;
    let spacings: Vec<f64> = (0..ndim).map(|_| r.f64()).collect::<Result<_>>()?;
    let ntwists = r.u32()? as usize;
    if ntwists > 21 {
        return Err(Error::Invalid(format!("snapshot lists {ntwists} twisted planes")));
    }
    let twists: Vec<(usize, usize)> =
        (0..ntwists).map(|_| Ok((r.u32()? as usize, r.u32()? as usize))).collect::<Result<_>>()?;
    let sites = dims.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
    let count = sites
        .and_then(|s| s.checked_mul(ndim))
        .ok_or_else(|| Error::Invalid("snapshot dimensions overflow".into()))?;
    let expected = count * group.stored_reals() * 8;
    if bytes.len() - r.pos != expected {
        return Err(Error::Invalid(format!(
            "snapshot payload has {} bytes, expected {expected}",
            bytes.len() - r.pos
        )));
    }
    let mut links = Vec::with_capacity(count);
    for _ in 0..count {
        let mut pair = || -> Result<_> { Ok(c(r.f64()?, r.f64()?)) };
        let u = match group {
            Group::U1 => {
                let z = pair()?;
                M2::new(z, c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
            }
            Group::Su2 => {
                let (a, b, cc, d) = (pair()?, pair()?, pair()?, pair()?);
                M2::new(a, b, cc, d)
            }
        };
        if !u.iter().all(|z| z.is_finite()) {
            return Err(Error::Invalid("snapshot contains non-finite link entries".into()));
        }
        links.push(u);
    }
    LatticeField::from_parts(dims, group, links, spacings, twists)
}

/// Writes the snapshot and its manifest; returns the manifest.
pub fn write_snapshot(path: &Path, field: &LatticeField) -> Result<Manifest> {
    let bytes = encode(field);
    fs::write(path, &bytes)?;
    let manifest = Manifest::of(field, bytes.len());
    fs::write(manifest_path(path), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

/// Reads a snapshot. The manifest is optional; when present it must agree
/// with the binary header.
pub fn read_snapshot(path: &Path) -> Result<LatticeField> {
    let bytes = fs::read(path)?;
    let field = decode(&bytes)?;
    let mpath = manifest_path(path);
    if mpath.exists() {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&mpath)?)?;
        if manifest != Manifest::of(&field, bytes.len()) {
            return Err(Error::Invalid(format!("manifest {} disagrees with the snapshot header", mpath.display())));
        }
    }
    Ok(field)
}
