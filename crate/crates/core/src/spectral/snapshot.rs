//! Binary field snapshots.
//!
//! Layout (little-endian): magic `b"EGWP"`, version `u32`, resolution `N: u32`,
//! kind `u8`, time `f64`, then the collocation samples as `f64` in row-major
//! order (`x1` index outer). Velocity snapshots store all `u1` samples
//! followed by all `u2` samples.

use std::io::{Read, Write};
use std::sync::Arc;

use super::field::{PhysicalScalar, SpectralScalar, SpectralVector};
use super::grid::FourierGrid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EGWP";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum SnapshotKind {
    Scalar = 0,
    Vorticity = 1,
    PassiveScalar = 2,
    Pressure = 3,
    Velocity = 4,
}

impl SnapshotKind {
    fn from_u8(b: u8) -> Result<Self> {
        Ok(match b {
            0 => Self::Scalar,
            1 => Self::Vorticity,
            2 => Self::PassiveScalar,
            3 => Self::Pressure,
            4 => Self::Velocity,
            _ => return Err(Error::Format(format!("unknown snapshot kind {b}"))),
        })
    }

    fn components(self) -> usize {
        if self == Self::Velocity {
            2
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub kind: SnapshotKind,
    pub time: f64,
    pub fields: Vec<PhysicalScalar>,
}

impl Snapshot {
    pub fn scalar(kind: SnapshotKind, time: f64, f: &SpectralScalar) -> Result<Self> {
        if kind == SnapshotKind::Velocity {
            return Err(Error::Format("velocity snapshots need two components".into()));
        }
        Ok(Self { kind, time, fields: vec![f.to_physical()?] })
    }

    pub fn velocity(time: f64, u: &SpectralVector) -> Result<Self> {
        Ok(Self { kind: SnapshotKind::Velocity, time, fields: u.to_physical()?.to_vec() })
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.fields[0].grid().n() as u32;
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&[self.kind as u8])?;
        w.write_all(&self.time.to_le_bytes())?;
        for f in &self.fields {
            for s in f.samples() {
                w.write_all(&s.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        let mut b1 = [0u8; 1];
        r.read_exact(&mut b1)?;
        let kind = SnapshotKind::from_u8(b1[0])?;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let time = f64::from_le_bytes(b8);
        let grid: Arc<FourierGrid> = FourierGrid::new(n)?;
        let mut fields = Vec::new();
        for _ in 0..kind.components() {
            let mut samples = Vec::with_capacity(grid.len());
            for _ in 0..grid.len() {
                r.read_exact(&mut b8)?;
                samples.push(f64::from_le_bytes(b8));
            }
            fields.push(PhysicalScalar::new(&grid, samples)?);
        }
        Ok(Self { kind, time, fields })
    }
}
