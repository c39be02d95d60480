//! World input-output tables: loading, balance checks, coefficient form and
//! the Leontief inverse.
//!
//! Rows and columns of the intermediate block are indexed by `(nation, sector)`
//! pairs in nation-major order, so index `n * K + k` is sector `k` of nation `n`.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub const INTERMEDIATE_FILE: &str = "intermediate.csv";
pub const FINAL_FILE: &str = "final.csv";
pub const VALUE_ADDED_FILE: &str = "value_added.csv";
pub const GROSS_OUTPUT_FILE: &str = "gross_output.csv";

/// Default relative tolerance for [`validate_balance`].
pub const DEFAULT_BALANCE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum IoTableError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("non-numeric cell {value:?} in {file}, row {row}, column {column}")]
    NonNumeric {
        file: String,
        row: String,
        column: String,
        value: String,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("label mismatch: {0}")]
    Label(String),
    #[error("negative entry {value} in {block} at row {row}, column {column}")]
    Negative {
        block: &'static str,
        row: String,
        column: String,
        value: f64,
    },
    #[error("non-finite entry in {block} at row {row}, column {column}")]
    NonFinite {
        block: &'static str,
        row: String,
        column: String,
    },
    #[error("economy is not productive: {0}")]
    NotProductive(String),
}

/// A world input-output table with `N` nations and `K` sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct WiotTable {
    nations: Vec<String>,
    sectors: Vec<String>,
    intermediate: DMatrix<f64>,
    final_demand: DMatrix<f64>,
    value_added: DVector<f64>,
    gross_output: DVector<f64>,
}

impl WiotTable {
    /// Builds a table after checking dimensions and that every entry is finite
    /// and nonnegative. Accounting balance is not enforced here.
    pub fn new(
        nations: Vec<String>,
        sectors: Vec<String>,
        intermediate: DMatrix<f64>,
        final_demand: DMatrix<f64>,
        value_added: DVector<f64>,
        gross_output: DVector<f64>,
    ) -> Result<Self, IoTableError> {
        if nations.is_empty() || sectors.is_empty() {
            return Err(IoTableError::Dimension(
                "a table needs at least one nation and one sector".into(),
            ));
        }
        let n = nations.len() * sectors.len();
        if intermediate.shape() != (n, n) {
            return Err(IoTableError::Dimension(format!(
                "intermediate block is {}x{}, expected {n}x{n}",
                intermediate.nrows(),
                intermediate.ncols()
            )));
        }
        if final_demand.shape() != (n, nations.len()) {
            return Err(IoTableError::Dimension(format!(
                "final demand block is {}x{}, expected {n}x{}",
                final_demand.nrows(),
                final_demand.ncols(),
                nations.len()
            )));
        }
        if value_added.len() != n {
            return Err(IoTableError::Dimension(format!(
                "value added has {} entries, expected {n}",
                value_added.len()
            )));
        }
        if gross_output.len() != n {
            return Err(IoTableError::Dimension(format!(
                "gross output has {} entries, expected {n}",
                gross_output.len()
            )));
        }
        let table = WiotTable {
            nations,
            sectors,
            intermediate,
            final_demand,
            value_added,
            gross_output,
        };
        table.check_entries()?;
        Ok(table)
    }

    fn check_entries(&self) -> Result<(), IoTableError> {
        let labels = self.product_labels();
        let check = |block: &'static str, m: &DMatrix<f64>, cols: &dyn Fn(usize) -> String| {
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    let value = m[(i, j)];
                    if !value.is_finite() {
                        return Err(IoTableError::NonFinite {
                            block,
                            row: labels[i].clone(),
                            column: cols(j),
                        });
                    }
                    if value < 0.0 {
                        return Err(IoTableError::Negative {
                            block,
                            row: labels[i].clone(),
                            column: cols(j),
                            value,
                        });
                    }
                }
            }
            Ok(())
        };
        check("intermediate", &self.intermediate, &|j| labels[j].clone())?;
        check("final demand", &self.final_demand, &|j| {
            self.nations[j].clone()
        })?;
        for (block, v) in [
            ("value added", &self.value_added),
            ("gross output", &self.gross_output),
        ] {
            for (j, &value) in v.iter().enumerate() {
                if !value.is_finite() {
                    return Err(IoTableError::NonFinite {
                        block,
                        row: block.to_string(),
                        column: labels[j].clone(),
                    });
                }
                if value < 0.0 {
                    return Err(IoTableError::Negative {
                        block,
                        row: block.to_string(),
                        column: labels[j].clone(),
                        value,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn nations(&self) -> &[String] {
        &self.nations
    }

    pub fn sectors(&self) -> &[String] {
        &self.sectors
    }

    pub fn num_nations(&self) -> usize {
        self.nations.len()
    }

    pub fn num_sectors(&self) -> usize {
        self.sectors.len()
    }

    /// Number of `(nation, sector)` products, `N * K`.
    pub fn size(&self) -> usize {
        self.nations.len() * self.sectors.len()
    }

    pub fn index(&self, nation: usize, sector: usize) -> usize {
        nation * self.sectors.len() + sector
    }

    pub fn intermediate(&self) -> &DMatrix<f64> {
        &self.intermediate
    }

    pub fn final_demand(&self) -> &DMatrix<f64> {
        &self.final_demand
    }

    pub fn value_added(&self) -> &DVector<f64> {
        &self.value_added
    }

    pub fn gross_output(&self) -> &DVector<f64> {
        &self.gross_output
    }

    /// `NATION.SECTOR` labels in index order.
    pub fn product_labels(&self) -> Vec<String> {
        self.nations
            .iter()
            .flat_map(|n| self.sectors.iter().map(move |s| format!("{n}.{s}")))
            .collect()
    }

    /// Multiplies every flow by `factor`.
    pub fn scaled(&self, factor: f64) -> WiotTable {
        WiotTable {
            nations: self.nations.clone(),
            sectors: self.sectors.clone(),
            intermediate: &self.intermediate * factor,
            final_demand: &self.final_demand * factor,
            value_added: &self.value_added * factor,
            gross_output: &self.gross_output * factor,
        }
    }

    /// Value-added coefficients `V[j] / X[j]`, zero where gross output is zero.
    pub fn value_added_coefficients(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.size(),
            self.value_added
                .iter()
                .zip(self.gross_output.iter())
                .map(|(&v, &x)| if x > 0.0 { v / x } else { 0.0 }),
        )
    }

    /// Row sums of the final-demand block.
    pub fn total_final_demand(&self) -> DVector<f64> {
        DVector::from_iterator(self.size(), self.final_demand.row_iter().map(|r| r.sum()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub max_row_residual: f64,
    pub worst_row: usize,
    pub max_column_residual: f64,
    pub worst_column: usize,
    /// Absolute threshold the residuals were compared with.
    pub threshold: f64,
    pub passed: bool,
}

impl fmt::Display for BalanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: row residual {:.3e} (row {}), column residual {:.3e} (column {}), threshold {:.3e}",
            if self.passed { "balanced" } else { "unbalanced" },
            self.max_row_residual,
            self.worst_row,
            self.max_column_residual,
            self.worst_column,
            self.threshold
        )
    }
}

/// Checks row balance (`T` row + `F` row = `X`) and column balance
/// (`T` column + `V` = `X`) against `tol * max(1, max |X|)`.
pub fn validate_balance(w: &WiotTable, tol: f64) -> BalanceReport {
    let n = w.size();
    let x = w.gross_output();
    let mut max_row = 0.0;
    let mut worst_row = 0;
    let mut max_col = 0.0;
    let mut worst_col = 0;
    for i in 0..n {
        let supplied = w.intermediate().row(i).sum() + w.final_demand().row(i).sum();
        let r = (supplied - x[i]).abs();
        if r > max_row {
            max_row = r;
            worst_row = i;
        }
        let cost = w.intermediate().column(i).sum() + w.value_added()[i];
        let c = (cost - x[i]).abs();
        if c > max_col {
            max_col = c;
            worst_col = i;
        }
    }
    let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let threshold = tol * scale;
    BalanceReport {
        max_row_residual: max_row,
        worst_row,
        max_column_residual: max_col,
        worst_column: worst_col,
        threshold,
        passed: max_row <= threshold && max_col <= threshold,
    }
}

/// Input coefficients `A[i,j] = T[i,j] / X[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix(DMatrix<f64>);

impl CoefficientMatrix {
    pub fn new(a: DMatrix<f64>) -> Result<Self, IoTableError> {
        if !a.is_square() {
            return Err(IoTableError::Dimension(format!(
                "coefficient matrix must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        for ((i, j), &v) in a
            .iter()
            .enumerate()
            .map(|(k, v)| ((k % a.nrows(), k / a.nrows()), v))
        {
            if !v.is_finite() || v < 0.0 {
                return Err(IoTableError::Negative {
                    block: "coefficients",
                    row: i.to_string(),
                    column: j.to_string(),
                    value: v,
                });
            }
        }
        Ok(CoefficientMatrix(a))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

/// Total-requirements matrix `B = (I - A)^-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeontiefInverse(DMatrix<f64>);

impl LeontiefInverse {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

/// Zero-output columns get an all-zero coefficient column.
pub fn coefficients(w: &WiotTable) -> CoefficientMatrix {
    let n = w.size();
    let mut a = w.intermediate().clone();
    for j in 0..n {
        let x = w.gross_output()[j];
        if x > 0.0 {
            a.column_mut(j).unscale_mut(x);
        } else {
            a.column_mut(j).fill(0.0);
        }
    }
    CoefficientMatrix(a)
}

/// Solves `(I - A) B = I` by LU decomposition.
///
/// For a nonnegative `A` the inverse is entrywise nonnegative exactly when the
/// spectral radius is below one, so a singular system or a negative entry is
/// reported as a non-productive economy.
pub fn leontief(a: &CoefficientMatrix) -> Result<LeontiefInverse, IoTableError> {
    let n = a.0.nrows();
    let system = DMatrix::<f64>::identity(n, n) - &a.0;
    let lu = system.lu();
    let b = lu
        .try_inverse()
        .ok_or_else(|| IoTableError::NotProductive("I - A is singular".into()))?;
    let scale = b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if let Some((k, v)) = b
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v < -1e-12 * scale)
    {
        return Err(IoTableError::NotProductive(format!(
            "Leontief inverse entry ({}, {}) is {v}",
            k % n,
            k / n
        )));
    }
    // Clip rounding noise so the result is nonnegative.
    Ok(LeontiefInverse(b.map(|v| v.max(0.0))))
}

/// Reads a table from a directory holding the four layout files.
pub fn load_wiot_dir(dir: &Path) -> Result<WiotTable, IoTableError> {
    load_wiot(
        &dir.join(INTERMEDIATE_FILE),
        &dir.join(FINAL_FILE),
        &dir.join(VALUE_ADDED_FILE),
        &dir.join(GROSS_OUTPUT_FILE),
    )
}

struct RawCsv {
    file: String,
    header: Vec<String>,
    rows: Vec<(String, Vec<String>)>,
}

fn read_raw(path: &Path) -> Result<RawCsv, IoTableError> {
    let file = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let handle = std::fs::File::open(path).map_err(|source| IoTableError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(handle);
    let csv_err = |source| IoTableError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .skip(1)
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let mut cells = record.iter();
        let label = cells.next().unwrap_or_default().to_string();
        rows.push((label, cells.map(str::to_string).collect()));
    }
    Ok(RawCsv { file, header, rows })
}

impl RawCsv {
    fn parse_cell(&self, row: usize, col: usize) -> Result<f64, IoTableError> {
        let (label, cells) = &self.rows[row];
        let raw = &cells[col];
        raw.parse::<f64>().map_err(|_| IoTableError::NonNumeric {
            file: self.file.clone(),
            row: label.clone(),
            column: self.header[col].clone(),
            value: raw.clone(),
        })
    }

    fn matrix(&self) -> Result<DMatrix<f64>, IoTableError> {
        let ncols = self.header.len();
        for (label, cells) in &self.rows {
            if cells.len() != ncols {
                return Err(IoTableError::Dimension(format!(
                    "{}: row {label} has {} cells, header has {ncols}",
                    self.file,
                    cells.len()
                )));
            }
        }
        let mut m = DMatrix::zeros(self.rows.len(), ncols);
        for i in 0..self.rows.len() {
            for j in 0..ncols {
                m[(i, j)] = self.parse_cell(i, j)?;
            }
        }
        Ok(m)
    }

    fn single_row(&self) -> Result<DVector<f64>, IoTableError> {
        if self.rows.len() != 1 {
            return Err(IoTableError::Dimension(format!(
                "{} must hold exactly one data row, found {}",
                self.file,
                self.rows.len()
            )));
        }
        let m = self.matrix()?;
        Ok(DVector::from_iterator(m.ncols(), m.row(0).iter().copied()))
    }
}

/// Splits `NATION.SECTOR` labels into nation and sector lists, requiring the
/// full nation-major grid.
fn split_product_labels(labels: &[String]) -> Result<(Vec<String>, Vec<String>), IoTableError> {
    let mut nations: Vec<String> = Vec::new();
    let mut sectors: Vec<String> = Vec::new();
    let mut pairs = Vec::with_capacity(labels.len());
    for label in labels {
        let (n, s) = label.split_once('.').ok_or_else(|| {
            IoTableError::Label(format!("label {label:?} is not of the form NATION.SECTOR"))
        })?;
        if !nations.iter().any(|x| x == n) {
            nations.push(n.to_string());
        }
        if !sectors.iter().any(|x| x == s) {
            sectors.push(s.to_string());
        }
        pairs.push((n.to_string(), s.to_string()));
    }
    let expected: Vec<(String, String)> = nations
        .iter()
        .flat_map(|n| sectors.iter().map(move |s| (n.clone(), s.clone())))
        .collect();
    if expected != pairs {
        return Err(IoTableError::Label(
            "product labels must enumerate every NATION.SECTOR pair in nation-major order".into(),
        ));
    }
    Ok((nations, sectors))
}

/// Loads the four CSV files of the table layout.
pub fn load_wiot(
    intermediate: &Path,
    final_demand: &Path,
    value_added: &Path,
    gross_output: &Path,
) -> Result<WiotTable, IoTableError> {
    let t_raw = read_raw(intermediate)?;
    let (nations, sectors) = split_product_labels(&t_raw.header)?;
    let row_labels: Vec<String> = t_raw.rows.iter().map(|(l, _)| l.clone()).collect();
    if row_labels != t_raw.header {
        return Err(IoTableError::Label(format!(
            "{}: row labels differ from column labels",
            t_raw.file
        )));
    }
    let t = t_raw.matrix()?;

    let f_raw = read_raw(final_demand)?;
    let f_rows: Vec<String> = f_raw.rows.iter().map(|(l, _)| l.clone()).collect();
    if f_rows.len() != t_raw.header.len() {
        return Err(IoTableError::Dimension(format!(
            "{} has {} rows, expected {}",
            f_raw.file,
            f_rows.len(),
            t_raw.header.len()
        )));
    }
    if f_rows != t_raw.header {
        return Err(IoTableError::Label(format!(
            "{}: row labels differ from {}",
            f_raw.file, t_raw.file
        )));
    }
    if f_raw.header.len() != nations.len() {
        return Err(IoTableError::Dimension(format!(
            "{} has {} destination columns, expected {}",
            f_raw.file,
            f_raw.header.len(),
            nations.len()
        )));
    }
    if f_raw.header != nations {
        return Err(IoTableError::Label(format!(
            "{}: destination columns {:?} differ from nations {:?}",
            f_raw.file, f_raw.header, nations
        )));
    }
    let f = f_raw.matrix()?;

    let mut vectors = Vec::with_capacity(2);
    for path in [value_added, gross_output] {
        let raw = read_raw(path)?;
        let v = raw.single_row()?;
        if v.len() != t_raw.header.len() {
            return Err(IoTableError::Dimension(format!(
                "{} has {} entries, expected {}",
                raw.file,
                v.len(),
                t_raw.header.len()
            )));
        }
        if raw.header != t_raw.header {
            return Err(IoTableError::Label(format!(
                "{}: column labels differ from {}",
                raw.file, t_raw.file
            )));
        }
        vectors.push(v);
    }
    let x = vectors.pop().expect("two vectors read");
    let v = vectors.pop().expect("two vectors read");
    WiotTable::new(nations, sectors, t, f, v, x)
}

fn write_err(source: csv::Error) -> std::io::Error {
    std::io::Error::other(source)
}

/// Writes one of the four layout files. `which` is one of the `*_FILE` names.
pub fn write_wiot_file<W: Write>(w: &WiotTable, which: &str, out: W) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let labels = w.product_labels();
    let fmt = |v: f64| format!("{v}");
    match which {
        INTERMEDIATE_FILE => {
            writer
                .write_record(std::iter::once("").chain(labels.iter().map(String::as_str)))
                .map_err(write_err)?;
            for (i, label) in labels.iter().enumerate() {
                let mut rec = vec![label.clone()];
                rec.extend(w.intermediate().row(i).iter().map(|&v| fmt(v)));
                writer.write_record(&rec).map_err(write_err)?;
            }
        }
        FINAL_FILE => {
            writer
                .write_record(std::iter::once("").chain(w.nations().iter().map(String::as_str)))
                .map_err(write_err)?;
            for (i, label) in labels.iter().enumerate() {
                let mut rec = vec![label.clone()];
                rec.extend(w.final_demand().row(i).iter().map(|&v| fmt(v)));
                writer.write_record(&rec).map_err(write_err)?;
            }
        }
        VALUE_ADDED_FILE | GROSS_OUTPUT_FILE => {
            let (name, v) = if which == VALUE_ADDED_FILE {
                ("V", w.value_added())
            } else {
                ("X", w.gross_output())
            };
            writer
                .write_record(std::iter::once("").chain(labels.iter().map(String::as_str)))
                .map_err(write_err)?;
            let mut rec = vec![name.to_string()];
            rec.extend(v.iter().map(|&x| fmt(x)));
            writer.write_record(&rec).map_err(write_err)?;
        }
        other => {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!("unknown table file {other}"),
            ))
        }
    }
    writer.flush()
}
