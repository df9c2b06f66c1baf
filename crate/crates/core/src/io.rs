//! Result files: CSV tables, JSON records, binary matrix dumps and text
//! mesh dumps.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::TriangleMesh;
use crate::kernel::KernelMatrix;

/// Twelve significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

/// Column names plus rows of already formatted cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()?)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|x| x.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_err)?;
        Ok(Self { header, rows })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// Header line of a binary matrix dump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub rows: usize,
    pub cols: usize,
    pub row_mesh: String,
    pub col_mesh: String,
    pub self_block: bool,
    pub dtype: String,
    pub order: String,
}

/// One JSON header line, then `rows · cols` little-endian `f64` in row-major
/// order.
pub fn write_matrix(w: &mut impl Write, m: &KernelMatrix) -> Result<()> {
    let header = MatrixHeader {
        rows: m.nrows(),
        cols: m.ncols(),
        row_mesh: m.row_mesh.clone(),
        col_mesh: m.col_mesh.clone(),
        self_block: m.is_self_block,
        dtype: "f64le".into(),
        order: "row-major".into(),
    };
    serde_json::to_writer(&mut *w, &header)?;
    w.write_all(b"\n")?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m.entries[(i, j)].to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix(r: impl Read) -> Result<KernelMatrix> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let h: MatrixHeader = serde_json::from_str(line.trim_end())?;
    if h.dtype != "f64le" || h.order != "row-major" {
        return invalid(format!("unsupported matrix encoding {} / {}", h.dtype, h.order));
    }
    let mut buf = vec![0u8; h.rows * h.cols * 8];
    r.read_exact(&mut buf)?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return invalid("trailing bytes after matrix data");
    }
    let vals: Vec<f64> = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(KernelMatrix {
        entries: DMatrix::from_row_slice(h.rows, h.cols, &vals),
        row_mesh: h.row_mesh,
        col_mesh: h.col_mesh,
        is_self_block: h.self_block,
        overlap: false,
    })
}

pub fn write_matrix_file(path: &Path, m: &KernelMatrix) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    write_matrix(&mut f, m)?;
    f.flush()?;
    Ok(())
}

pub fn read_matrix_file(path: &Path) -> Result<KernelMatrix> {
    read_matrix(fs::File::open(path)?)
}

pub fn write_mesh(path: &Path, mesh: &TriangleMesh) -> Result<()> {
    fs::write(path, mesh.to_text())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh_rectangle;
    use crate::kernel::{assemble_cross, assemble_self};

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_float(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_float(-2.5e-6), "-2.50000000000e-6");
        assert_eq!(fmt_float(0.0), "0.00000000000e0");
    }

    #[test]
    fn csv_round_trip() {
        let mut t = Table::new(&["d", "value"]);
        t.push(vec![fmt_float(1.0), fmt_float(2.0)]);
        t.push(vec!["x,y".into(), "q\"".into()]);
        let dir = std::env::temp_dir().join(format!("qmi-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("t.csv");
        t.write_csv(&p).unwrap();
        assert_eq!(Table::read_csv(&p).unwrap(), t);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn matrix_dump_round_trip() {
        let a = mesh_rectangle(1.0, 1.0, 2).unwrap();
        let b = a.translate([2.0, 0.0]);
        for m in [assemble_self(&a, 4).unwrap(), assemble_cross(&a, &b, 4).unwrap()] {
            let mut buf = Vec::new();
            write_matrix(&mut buf, &m).unwrap();
            let back = read_matrix(&buf[..]).unwrap();
            assert_eq!(back.entries, m.entries);
            assert_eq!(back.row_mesh, m.row_mesh);
            assert_eq!(back.is_self_block, m.is_self_block);
            buf.push(0);
            assert!(read_matrix(&buf[..]).is_err());
        }
    }
}
