//! Plain-text matrix files and PGM rendering of basis vectors.
//!
//! Two text formats are supported: comma-separated (`.csv`) and
//! whitespace-separated. Both hold one matrix row per line with no header.
//! Blank lines are skipped.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::types::{DataMatrix, FactorModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Whitespace,
}

impl MatrixFormat {
    /// `.csv` files are comma-separated; anything else is whitespace text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::Whitespace,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixFile {
    pub path: PathBuf,
    pub format: MatrixFormat,
}

impl MatrixFile {
    pub fn new(path: impl Into<PathBuf>, format: MatrixFormat) -> Self {
        MatrixFile {
            path: path.into(),
            format,
        }
    }

    /// Format inferred from the file extension.
    pub fn infer(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let format = MatrixFormat::from_path(&path);
        MatrixFile { path, format }
    }
}

/// Reads a non-negative data matrix.
pub fn read_matrix(file: &MatrixFile) -> Result<DataMatrix> {
    let values = read_with(file, true)?;
    DataMatrix::new(values)
}

/// Reads a matrix whose entries may have any sign.
pub fn read_dense_matrix(file: &MatrixFile) -> Result<Array2<f64>> {
    read_with(file, false)
}

fn read_with(file: &MatrixFile, nonnegative: bool) -> Result<Array2<f64>> {
    let text = fs::read_to_string(&file.path).map_err(|e| Error::io(&file.path, e))?;
    parse_matrix(&text, file.format, nonnegative).map_err(|(line, column, message)| Error::Parse {
        path: file.path.clone(),
        line,
        column,
        message,
    })
}

type ParseFailure = (usize, usize, String);

/// Parses `text`; failures carry 1-based line and column (field) numbers.
pub(crate) fn parse_matrix(
    text: &str,
    format: MatrixFormat,
    nonnegative: bool,
) -> std::result::Result<Array2<f64>, ParseFailure> {
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = match format {
            MatrixFormat::Csv => line.split(',').map(str::trim).collect(),
            MatrixFormat::Whitespace => line.split_whitespace().collect(),
        };
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err((
                    line_no,
                    fields.len().min(w) + 1,
                    format!("expected {w} fields, found {}", fields.len()),
                ))
            }
            Some(_) => {}
        }
        for (col, field) in fields.iter().enumerate() {
            let value: f64 = field
                .parse()
                .map_err(|_| (line_no, col + 1, format!("not a number: {field:?}")))?;
            if !value.is_finite() {
                return Err((line_no, col + 1, format!("non-finite value {field:?}")));
            }
            if nonnegative && value < 0.0 {
                return Err((line_no, col + 1, format!("negative value {value}")));
            }
            values.push(value);
        }
        rows += 1;
    }
    let width = width.ok_or((1, 1, "file contains no data".to_string()))?;
    Array2::from_shape_vec((rows, width), values).map_err(|e| (1, 1, e.to_string()))
}

/// Writes `matrix` with 17 significant digits per entry.
pub fn write_matrix(matrix: ArrayView2<'_, f64>, file: &MatrixFile) -> Result<()> {
    let text = format_matrix(matrix, file.format)?;
    fs::write(&file.path, text).map_err(|e| Error::io(&file.path, e))
}

pub(crate) fn format_matrix(matrix: ArrayView2<'_, f64>, format: MatrixFormat) -> Result<String> {
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return Err(Error::InvalidDimension(format!(
            "refusing to write an empty {}x{} matrix",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let sep = match format {
        MatrixFormat::Csv => ",",
        MatrixFormat::Whitespace => " ",
    };
    let mut out = String::new();
    for row in matrix.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push_str(sep);
            }
            write!(out, "{v:.16e}").expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Each basis vector is scaled by its own maximum.
    PerImage,
    /// All basis vectors share the maximum over the whole basis.
    Global,
}

/// Layout for tiling basis vectors as image patches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageGridSpec {
    pub patch_height: usize,
    pub patch_width: usize,
    pub grid_cols: usize,
    pub normalization: Normalization,
}

/// Separator and padding intensity.
const SEPARATOR_GRAY: u8 = 128;

/// Renders each column of `W` as a `patch_height x patch_width` patch
/// (row-major) and returns the binary PGM bytes.
///
/// Patches are tiled left to right, top to bottom, separated by one-pixel
/// mid-gray lines. A weight of 0 is white and the normalizing maximum is
/// black.
pub fn render_basis_grid(basis: ArrayView2<'_, f64>, spec: &ImageGridSpec) -> Result<Vec<u8>> {
    let (n, m) = basis.dim();
    let (ph, pw) = (spec.patch_height, spec.patch_width);
    if ph == 0 || pw == 0 || ph * pw != n {
        return Err(Error::InvalidDimension(format!(
            "patch {ph}x{pw} does not match basis vectors of length {n}"
        )));
    }
    if spec.grid_cols == 0 || m == 0 {
        return Err(Error::InvalidDimension(format!(
            "cannot tile {m} basis vectors into {} columns",
            spec.grid_cols
        )));
    }
    let cols = spec.grid_cols.min(m);
    let rows = m.div_ceil(cols);
    let width = cols * pw + cols - 1;
    let height = rows * ph + rows - 1;

    let global_max = basis.iter().fold(0.0_f64, |a, &b| a.max(b));
    let mut pixels = vec![SEPARATOR_GRAY; width * height];
    for (k, column) in basis.columns().into_iter().enumerate() {
        let scale = match spec.normalization {
            Normalization::PerImage => column.iter().fold(0.0_f64, |a, &b| a.max(b)),
            Normalization::Global => global_max,
        };
        let (gr, gc) = (k / cols, k % cols);
        let (top, left) = (gr * (ph + 1), gc * (pw + 1));
        for r in 0..ph {
            for c in 0..pw {
                let value = column[r * pw + c];
                pixels[(top + r) * width + left + c] = intensity(value, scale);
            }
        }
    }

    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(&pixels);
    Ok(out)
}

fn intensity(value: f64, scale: f64) -> u8 {
    if scale <= 0.0 {
        return 255;
    }
    let t = (value / scale).clamp(0.0, 1.0);
    (255.0 - (255.0 * t).round()) as u8
}

/// Writes the basis grid of `model` to `path` as a binary PGM.
pub fn export_basis_grid(model: &FactorModel, spec: &ImageGridSpec, path: &Path) -> Result<()> {
    let bytes = render_basis_grid(model.basis(), spec)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
