use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use super::OutputFormat;
use crate::model::FluidState;

pub const RAW_MAGIC: &[u8; 8] = b"SOHBSNAP";
pub const RAW_VERSION: u32 = 1;
const HEADER_LEN: usize = 32;
const MAX_RAW_DIM: usize = (HEADER_LEN - 16) / 4;

/// Monitored quantities, recomputed from the state each time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub mass: f64,
    pub max_orthogonality_defect: f64,
    pub min_det: f64,
    pub min_rho: f64,
}

impl Diagnostics {
    pub fn of(state: &FluidState) -> Self {
        Self {
            mass: state.total_mass(),
            max_orthogonality_defect: state.max_orthogonality_defect(),
            min_det: state.min_determinant(),
            min_rho: state.min_rho(),
        }
    }
}

/// `diagnostics.csv`: one row per snapshot with its time, which the raw
/// format does not carry.
pub struct DiagnosticsWriter<W: Write> {
    out: W,
}

impl<W: Write> DiagnosticsWriter<W> {
    pub fn new(mut out: W) -> io::Result<Self> {
        writeln!(out, "t,snapshot,mass,max_orthogonality_defect,min_det,min_rho")?;
        Ok(Self { out })
    }

    pub fn row(&mut self, t: f64, snapshot: usize, state: &FluidState) -> io::Result<Diagnostics> {
        let d = Diagnostics::of(state);
        writeln!(
            self.out,
            "{t:?},{snapshot},{:?},{:e},{:?},{:?}",
            d.mass, d.max_orthogonality_defect, d.min_det, d.min_rho
        )?;
        self.out.flush()?;
        Ok(d)
    }
}

pub fn write_snapshot(state: &FluidState, format: OutputFormat, path: &Path) -> io::Result<()> {
    let out = BufWriter::new(File::create(path)?);
    match format {
        OutputFormat::Csv => write_csv_snapshot(state, out),
        OutputFormat::RawF64 => write_raw_snapshot(state, out),
    }
}

/// Header `x0,…,rho,m00,m01,…`, then one row per cell in storage order.
pub fn write_csv_snapshot<W: Write>(state: &FluidState, mut out: W) -> io::Result<()> {
    let n = state.dim();
    let mut header: Vec<String> = (0..n).map(|a| format!("x{a}")).collect();
    header.push("rho".into());
    for i in 0..n {
        for j in 0..n {
            header.push(format!("m{i}{j}"));
        }
    }
    writeln!(out, "{}", header.join(","))?;
    for (idx, (rho, m)) in state.rho.iter().zip(&state.m).enumerate() {
        let mut row: Vec<String> = state.grid.coords(idx).iter().map(|x| format!("{x:?}")).collect();
        row.push(format!("{rho:?}"));
        row.extend(m.as_slice().iter().map(|x| format!("{x:?}")));
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

/// 32-byte header (magic, version, n, cells per axis, zero padding), then ρ
/// and the row-major matrices, all little-endian.
pub fn write_raw_snapshot<W: Write>(state: &FluidState, mut out: W) -> io::Result<()> {
    let n = state.dim();
    if n > MAX_RAW_DIM {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("raw_f64 snapshots hold at most {MAX_RAW_DIM} axes, state has {n}"),
        ));
    }
    let mut header = [0u8; HEADER_LEN];
    header[..8].copy_from_slice(RAW_MAGIC);
    header[8..12].copy_from_slice(&RAW_VERSION.to_le_bytes());
    header[12..16].copy_from_slice(&(n as u32).to_le_bytes());
    for (a, &c) in state.grid.cells().iter().enumerate() {
        let c = u32::try_from(c).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "axis too long"))?;
        header[16 + 4 * a..20 + 4 * a].copy_from_slice(&c.to_le_bytes());
    }
    out.write_all(&header)?;
    for r in &state.rho {
        out.write_all(&r.to_le_bytes())?;
    }
    for m in &state.m {
        for x in m.as_slice() {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    out.flush()
}

/// Contents of a raw_f64 snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSnapshot {
    pub n: usize,
    pub cells: Vec<usize>,
    pub rho: Vec<f64>,
    /// n² entries per cell, row-major.
    pub m: Vec<f64>,
}

pub fn read_raw_snapshot<R: Read>(mut input: R) -> io::Result<RawSnapshot> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header)?;
    if &header[..8] != RAW_MAGIC {
        return Err(bad("not a SOHBSNAP file".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().expect("4 bytes")) as usize;
    let version = word(8) as u32;
    if version != RAW_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let n = word(12);
    if !(2..=MAX_RAW_DIM).contains(&n) {
        return Err(bad(format!("bad dimension {n}")));
    }
    let cells: Vec<usize> = (0..n).map(|a| word(16 + 4 * a)).collect();
    let count: usize = cells.iter().product();
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    let expected = 8 * count * (1 + n * n);
    if body.len() != expected {
        return Err(bad(format!("expected {expected} data bytes, found {}", body.len())));
    }
    let mut floats = body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")));
    let rho = floats.by_ref().take(count).collect();
    let m = floats.collect();
    Ok(RawSnapshot { n, cells, rho, m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Rotation;
    use crate::grid::GridSpec;

    fn sample() -> FluidState {
        let g = GridSpec::new(&[5, 4], &[0.2, 0.25]).unwrap();
        FluidState::from_angle(g, |x| 1.0 + x[0] / 3.0, |x| 0.1 + x[1] * 7.0)
    }

    #[test]
    fn raw_round_trip_is_bit_exact() {
        let s = sample();
        let mut buf = Vec::new();
        write_raw_snapshot(&s, &mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 8 * 20 * 5);
        assert_eq!(&buf[..8], b"SOHBSNAP");
        let back = read_raw_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back.cells, vec![5, 4]);
        assert_eq!(back.rho.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), s.rho.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        let flat: Vec<u64> = s.m.iter().flat_map(|m| m.as_slice().iter().map(|x| x.to_bits())).collect();
        assert_eq!(back.m.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), flat);

        buf[0] = b'X';
        assert!(read_raw_snapshot(buf.as_slice()).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = GridSpec::cube(2, 4, 1.0).unwrap();
        let s = FluidState::uniform(g, 1.0, &Rotation::identity(2));
        let mut buf = Vec::new();
        write_csv_snapshot(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[0], "x0,x1,rho,m00,m01,m10,m11");
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 7));
        assert_eq!(lines[1], "0.125,0.125,1.0,1.0,0.0,0.0,1.0");
    }

    #[test]
    fn diagnostics_row() {
        let s = sample();
        let mut buf = Vec::new();
        let mut w = DiagnosticsWriter::new(&mut buf).unwrap();
        let d = w.row(0.5, 3, &s).unwrap();
        assert!(d.max_orthogonality_defect < 1e-15);
        assert!((d.min_det - 1.0).abs() < 1e-15);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("0.5,3,"));
    }
}
