//! Field snapshots (flat binary plus JSON sidecar) and spectrum CSV export.
//!
//! Binary layout, little endian:
//! `b"DKGF"`, `u32` version, `u32 x3` dims, `u32` components, `f64` box length,
//! `u8` representation (0 physical, 1 fourier), `u8` dtype (1 = complex128),
//! two padding bytes, then `(re, im)` pairs component-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FrequencyLattice, Repr, ScalarField, SpinorField};
use crate::error::{Error, Result};
use crate::vec3;

const MAGIC: &[u8; 4] = b"DKGF";
const VERSION: u32 = 1;
const DTYPE_C128: u8 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub t: f64,
    pub dims: [usize; 3],
    pub components: usize,
    pub box_length: f64,
    pub representation: Repr,
    pub dtype: String,
}

/// Borrowed view of a field for serialization.
pub enum FieldRef<'a> {
    Scalar(&'a ScalarField),
    Spinor(&'a SpinorField),
}

impl FieldRef<'_> {
    fn parts(&self) -> (FrequencyLattice, Repr, usize, &[Complex64]) {
        match self {
            FieldRef::Scalar(f) => (*f.lattice(), f.repr(), 1, f.data()),
            FieldRef::Spinor(f) => (*f.lattice(), f.repr(), 4, f.data()),
        }
    }
}

/// Write `<stem>.bin` and `<stem>.json`; returns both paths.
pub fn write_snapshot(stem: &Path, name: &str, t: f64, field: FieldRef<'_>) -> Result<(PathBuf, PathBuf)> {
    let (lat, repr, comps, data) = field.parts();
    let bin = stem.with_extension("bin");
    let json = stem.with_extension("json");
    let mut w = BufWriter::new(File::create(&bin)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for _ in 0..3 {
        w.write_all(&(lat.n() as u32).to_le_bytes())?;
    }
    w.write_all(&(comps as u32).to_le_bytes())?;
    w.write_all(&lat.length().to_le_bytes())?;
    let r = match repr {
        Repr::Physical => 0u8,
        Repr::Fourier => 1u8,
    };
    w.write_all(&[r, DTYPE_C128, 0, 0])?;
    for z in data {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    let header = SnapshotHeader {
        format: "dkg-field".into(),
        version: VERSION,
        name: name.into(),
        t,
        dims: [lat.n(); 3],
        components: comps,
        box_length: lat.length(),
        representation: repr,
        dtype: "complex128".into(),
    };
    let mut j = BufWriter::new(File::create(&json)?);
    serde_json::to_writer_pretty(&mut j, &header)?;
    j.write_all(b"\n")?;
    j.flush()?;
    Ok((bin, json))
}

/// Raw contents of a binary snapshot.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub lattice: FrequencyLattice,
    pub representation: Repr,
    pub components: usize,
    pub data: Vec<Complex64>,
}

impl Snapshot {
    pub fn into_scalar(self) -> Result<ScalarField> {
        if self.components != 1 {
            return Err(Error::Format(format!("expected 1 component, found {}", self.components)));
        }
        ScalarField::from_data(self.lattice, self.representation, self.data)
    }

    pub fn into_spinor(self) -> Result<SpinorField> {
        if self.components != 4 {
            return Err(Error::Format(format!("expected 4 components, found {}", self.components)));
        }
        SpinorField::from_data(self.lattice, self.representation, self.data)
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dims = [read_u32(&mut r)?, read_u32(&mut r)?, read_u32(&mut r)?];
    if dims[0] != dims[1] || dims[1] != dims[2] {
        return Err(Error::Format("non-cubic grid".into()));
    }
    let comps = read_u32(&mut r)? as usize;
    let length = read_f64(&mut r)?;
    let mut flags = [0u8; 4];
    r.read_exact(&mut flags)?;
    let representation = match flags[0] {
        0 => Repr::Physical,
        1 => Repr::Fourier,
        x => return Err(Error::Format(format!("bad representation flag {x}"))),
    };
    if flags[1] != DTYPE_C128 {
        return Err(Error::Format(format!("unsupported dtype {}", flags[1])));
    }
    let lattice = FrequencyLattice::new(dims[0] as usize, length)?;
    let count = comps * lattice.num_points();
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        data.push(Complex64::new(re, im));
    }
    Ok(Snapshot {
        lattice,
        representation,
        components: comps,
        data,
    })
}

/// Radially binned spectrum `sum |f_hat|^2` over shells of width `2 pi / L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub shell: usize,
    pub k: f64,
    pub energy: f64,
    pub modes: usize,
}

pub fn radial_spectrum(field: FieldRef<'_>) -> Vec<SpectrumRow> {
    let owned_s;
    let owned_p;
    let (lat, comps, data): (FrequencyLattice, usize, &[Complex64]) = match field {
        FieldRef::Scalar(f) => {
            owned_s = f.to_fourier();
            (*owned_s.lattice(), 1, owned_s.data())
        }
        FieldRef::Spinor(f) => {
            owned_p = f.to_fourier();
            (*owned_p.lattice(), 4, owned_p.data())
        }
    };
    let np = lat.num_points();
    let dk = lat.dk();
    let nshell = (lat.max_abs_xi() / dk).round() as usize + 1;
    let mut rows: Vec<SpectrumRow> = (0..nshell)
        .map(|s| SpectrumRow {
            shell: s,
            k: s as f64 * dk,
            energy: 0.0,
            modes: 0,
        })
        .collect();
    for idx in 0..np {
        let s = (vec3::norm(lat.xi(idx)) / dk).round() as usize;
        let e: f64 = (0..comps).map(|c| data[c * np + idx].norm_sqr()).sum();
        rows[s].energy += e;
        rows[s].modes += 1;
    }
    rows
}

pub fn write_spectrum_csv(path: &Path, rows: &[SpectrumRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let lat = FrequencyLattice::new(4, 2.0).unwrap();
        let f = SpinorField::plane_wave(
            lat,
            [1, 0, -1],
            [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let (bin, json) = write_snapshot(&dir.path().join("psi"), "psi", 0.5, FieldRef::Spinor(&f)).unwrap();
        let back = read_snapshot(&bin).unwrap().into_spinor().unwrap();
        assert_eq!(back, f);
        let h: SnapshotHeader = serde_json::from_reader(File::open(json).unwrap()).unwrap();
        assert_eq!(h.components, 4);
        assert_eq!(h.representation, Repr::Physical);
    }

    #[test]
    fn spectrum_conserves_energy() {
        let lat = FrequencyLattice::new(8, 6.0).unwrap();
        let f = ScalarField::from_physical_fn(lat, |x| Complex64::new((x[0]).sin() + 0.3, x[2].cos()));
        let rows = radial_spectrum(FieldRef::Scalar(&f));
        let total: f64 = rows.iter().map(|r| r.energy).sum();
        assert!((total - f.norm_l2().powi(2)).abs() < 1e-9 * total);
        assert_eq!(rows.iter().map(|r| r.modes).sum::<usize>(), lat.num_points());
    }
}
