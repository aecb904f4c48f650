//! Matrix Market (coordinate format) reader/writer plus the JSON metadata
//! sidecar that carries what the .mtx file cannot: basis partitioning,
//! construction parameters, and ordering conventions.
//!
//! Values are printed with Rust's shortest round-trip float formatting, so
//! writing, reading, and re-writing a file reproduces it byte for byte.

use crate::error::{Error, Result};
use crate::frame::{DenseMatrix, FrameMeta, SparseColumn, StructuredFrame};
use crate::unitary::UnitaryMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Sidecar record written next to every constructed frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameSidecar {
    pub tool: String,
    pub version: String,
    pub rows: usize,
    pub cols: usize,
    #[serde(flatten)]
    pub meta: FrameMeta,
    pub conventions: Conventions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Conventions {
    pub element_order: String,
    pub basis_order: String,
    pub embedding: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            element_order: "base-p coefficient encoding; element 0 first".into(),
            basis_order: "lexicographic by polynomial tuple, first factor slowest".into(),
            embedding: "block i of each skeleton column carries row i of U; \
                        U's column index varies fastest"
                .into(),
        }
    }
}

/// Path of the JSON sidecar for a given .mtx path.
pub fn sidecar_path(mtx: &Path) -> PathBuf {
    mtx.with_extension("json")
}

fn fmt_complex(z: Complex64, complex_field: bool) -> String {
    if complex_field {
        format!("{} {}", z.re, z.im)
    } else {
        format!("{}", z.re)
    }
}

/// Write a structured frame as coordinate Matrix Market (column-major entry
/// order, 1-based indices) and its sidecar. Real-valued frames use the
/// `real` field, complex ones `complex` with entries as "re im".
pub fn write_frame(mtx_path: &Path, frame: &StructuredFrame) -> Result<()> {
    let complex_field = frame
        .columns()
        .iter()
        .any(|col| col.iter().any(|&(_, v)| v.im != 0.0));
    let nnz = frame.ncols() * frame.nnz_per_col();
    let mut w = BufWriter::new(fs::File::create(mtx_path)?);
    writeln!(
        w,
        "%%MatrixMarket matrix coordinate {} general",
        if complex_field { "complex" } else { "real" }
    )?;
    writeln!(w, "{} {} {}", frame.dim(), frame.ncols(), nnz)?;
    for (j, col) in frame.columns().iter().enumerate() {
        for &(i, v) in col {
            writeln!(w, "{} {} {}", i + 1, j + 1, fmt_complex(v, complex_field))?;
        }
    }
    w.flush()?;

    let sidecar = FrameSidecar {
        tool: "untf".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        rows: frame.dim(),
        cols: frame.ncols(),
        meta: frame.meta().clone(),
        conventions: Conventions::default(),
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::Parse(format!("sidecar serialization failed: {e}")))?;
    fs::write(sidecar_path(mtx_path), json + "\n")?;
    Ok(())
}

/// Write any dense matrix in coordinate Matrix Market form (no sidecar).
pub fn write_dense(mtx_path: &Path, mat: &DenseMatrix) -> Result<()> {
    let complex_field = mat.iter().any(|z| z.im != 0.0);
    let entries: Vec<(usize, usize, Complex64)> = (0..mat.ncols())
        .flat_map(|j| (0..mat.nrows()).map(move |i| (i, j, mat[(i, j)])))
        .filter(|&(_, _, z)| z.re != 0.0 || z.im != 0.0)
        .collect();
    let mut w = BufWriter::new(fs::File::create(mtx_path)?);
    writeln!(
        w,
        "%%MatrixMarket matrix coordinate {} general",
        if complex_field { "complex" } else { "real" }
    )?;
    writeln!(w, "{} {} {}", mat.nrows(), mat.ncols(), entries.len())?;
    for (i, j, z) in entries {
        writeln!(w, "{} {} {}", i + 1, j + 1, fmt_complex(z, complex_field))?;
    }
    w.flush()?;
    Ok(())
}

/// A matrix loaded from disk: structured when a valid sidecar is present.
#[derive(Debug, Clone)]
pub enum LoadedMatrix {
    Structured(StructuredFrame),
    Dense(DenseMatrix),
}

impl LoadedMatrix {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            LoadedMatrix::Structured(f) => (f.dim(), f.ncols()),
            LoadedMatrix::Dense(m) => (m.nrows(), m.ncols()),
        }
    }
}

/// Read a coordinate Matrix Market file; picks up the sidecar when present.
pub fn read_frame(mtx_path: &Path) -> Result<LoadedMatrix> {
    let (rows, cols, entries) = read_coordinate(mtx_path)?;
    let sidecar = sidecar_path(mtx_path);
    if sidecar.exists() {
        let text = fs::read_to_string(&sidecar)?;
        let sc: FrameSidecar = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("bad sidecar {}: {e}", sidecar.display())))?;
        if sc.rows != rows || sc.cols != cols {
            return Err(Error::ShapeMismatch(format!(
                "sidecar says {}x{}, file is {rows}x{cols}",
                sc.rows, sc.cols
            )));
        }
        let mut columns: Vec<SparseColumn> = vec![Vec::new(); cols];
        for (i, j, v) in entries {
            columns[j].push((i as u32, v));
        }
        for col in &mut columns {
            col.sort_by_key(|&(row, _)| row);
        }
        let frame = StructuredFrame::from_parts(rows, sc.meta.k, columns, sc.meta)?;
        return Ok(LoadedMatrix::Structured(frame));
    }

    let mut mat = DMatrix::from_element(rows, cols, Complex64::new(0.0, 0.0));
    for (i, j, v) in entries {
        mat[(i, j)] = v;
    }
    Ok(LoadedMatrix::Dense(mat))
}

/// Read a k x k unitary from a coordinate Matrix Market file, validating
/// unitarity within `tol`.
pub fn read_unitary(mtx_path: &Path, tol: f64) -> Result<UnitaryMatrix> {
    let (rows, cols, entries) = read_coordinate(mtx_path)?;
    if rows != cols {
        return Err(Error::ShapeMismatch(format!("unitary file must be square, got {rows}x{cols}")));
    }
    let mut mat = DMatrix::from_element(rows, cols, Complex64::new(0.0, 0.0));
    for (i, j, v) in entries {
        mat[(i, j)] = v;
    }
    UnitaryMatrix::from_matrix(mat, tol)
}

fn read_coordinate(path: &Path) -> Result<(usize, usize, Vec<(usize, usize, Complex64)>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%MatrixMarket" || fields[1] != "matrix" {
        return Err(Error::Parse(format!("{}: not a Matrix Market header", path.display())));
    }
    if fields[2] != "coordinate" {
        return Err(Error::Parse(format!("{}: only coordinate format is supported", path.display())));
    }
    let complex_field = match fields[3] {
        "complex" => true,
        "real" | "integer" => false,
        other => return Err(Error::Parse(format!("{}: unsupported field '{other}'", path.display()))),
    };
    if fields[4] != "general" {
        return Err(Error::Parse(format!(
            "{}: only 'general' symmetry is supported, got '{}'",
            path.display(),
            fields[4]
        )));
    }

    let mut body = lines.filter(|l| !l.trim_start().starts_with('%') && !l.trim().is_empty());
    let dims = body
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: missing size line", path.display())))?;
    let mut it = dims.split_whitespace();
    let parse_usize = |tok: Option<&str>, what: &str| -> Result<usize> {
        tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad {what}")))
    };
    let rows = parse_usize(it.next(), "row count")?;
    let cols = parse_usize(it.next(), "column count")?;
    let nnz = parse_usize(it.next(), "nonzero count")?;

    let mut entries = Vec::with_capacity(nnz);
    for line in body {
        let mut it = line.split_whitespace();
        let i = parse_usize(it.next(), "row index")?;
        let j = parse_usize(it.next(), "column index")?;
        let re: f64 = it
            .next()
            .ok_or_else(|| Error::Parse("missing value".into()))?
            .parse()
            .map_err(|_| Error::Parse(format!("bad value on line '{line}'")))?;
        let im: f64 = if complex_field {
            it.next()
                .ok_or_else(|| Error::Parse("missing imaginary part".into()))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad imaginary part on line '{line}'")))?
        } else {
            0.0
        };
        if i < 1 || i > rows || j < 1 || j > cols {
            return Err(Error::Parse(format!("index ({i}, {j}) out of bounds {rows}x{cols}")));
        }
        entries.push((i - 1, j - 1, Complex64::new(re, im)));
    }
    if entries.len() != nnz {
        return Err(Error::Parse(format!(
            "{}: size line promises {nnz} entries, found {}",
            path.display(),
            entries.len()
        )));
    }
    Ok((rows, cols, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{build_frame, gaussian_frame};
    use crate::unitary::dft;
    use tempfile::tempdir;

    #[test]
    fn frame_round_trip_is_byte_identical() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("frame.mtx");
        let frame = build_frame(5, 5, 1, &dft(5)).unwrap();
        write_frame(&path, &frame).unwrap();
        let first = fs::read(&path).unwrap();

        let loaded = match read_frame(&path).unwrap() {
            LoadedMatrix::Structured(f) => f,
            LoadedMatrix::Dense(_) => panic!("sidecar should make this structured"),
        };
        assert_eq!(loaded, frame);

        let path2 = dir.path().join("frame2.mtx");
        write_frame(&path2, &loaded).unwrap();
        let second = fs::read(&path2).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn real_frames_use_the_real_field() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("hadamard.mtx");
        let frame = build_frame(4, 4, 1, &crate::unitary::hadamard(4).unwrap()).unwrap();
        write_frame(&path, &frame).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
        match read_frame(&path).unwrap() {
            LoadedMatrix::Structured(f) => assert_eq!(f, frame),
            LoadedMatrix::Dense(_) => panic!("expected structured"),
        }
    }

    #[test]
    fn dense_matrices_load_without_sidecar() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("gauss.mtx");
        let g = gaussian_frame(6, 10, 3);
        write_dense(&path, &g).unwrap();
        match read_frame(&path).unwrap() {
            LoadedMatrix::Dense(m) => assert_eq!(m, g),
            LoadedMatrix::Structured(_) => panic!("no sidecar was written"),
        }
    }

    #[test]
    fn unitary_file_is_validated() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("u.mtx");
        let u = dft(3);
        let dense: DenseMatrix = u.matrix().clone();
        write_dense(&path, &dense).unwrap();
        let loaded = read_unitary(&path, 1e-10).unwrap();
        assert_eq!(loaded.matrix(), u.matrix());

        let bad = DMatrix::from_element(2, 2, Complex64::new(0.5, 0.0));
        write_dense(&path, &bad).unwrap();
        assert!(read_unitary(&path, 1e-10).is_err());
    }

    #[test]
    fn malformed_files_are_reported() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.mtx");
        fs::write(&path, "nonsense\n").unwrap();
        assert!(matches!(read_frame(&path), Err(Error::Parse(_))));
        fs::write(&path, "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n").unwrap();
        assert!(matches!(read_frame(&path), Err(Error::Parse(_))));
    }
}
