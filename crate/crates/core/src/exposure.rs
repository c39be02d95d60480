//! Foreign input reliance (FIR) and foreign market reliance (FMR).
//!
//! Both measures trace value added to its nation of origin through the full
//! chain of inputs-into-inputs, `Ω = diag(v) · B`, where `v` holds value-added
//! coefficients and `B` is the Leontief inverse. Column `j` of `Ω` splits one
//! unit of product `j`'s gross output into the value added of every product
//! upstream of it, so each column sums to one for a balanced table.
//!
//! * `FIR[r, c]` is the percentage of nation `r`'s in-scope gross output that
//!   originates as value added in nation `c`.
//! * `FMR[r, c]` is the percentage of nation `r`'s total value added that ends
//!   up embodied in nation `c`'s in-scope gross output.
//!
//! Diagonal entries are computed but suppressed in emitted matrices.

use std::io::Write;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::iotable::{coefficients, leontief, IoTableError, WiotTable};

#[derive(Debug, Error)]
pub enum ExposureError {
    #[error(transparent)]
    Table(#[from] IoTableError),
    #[error("sector scope is empty")]
    EmptyScope,
    #[error("sector {0:?} is not part of the table")]
    UnknownSector(String),
    #[error("in-scope gross output of nation {0} is zero")]
    ZeroScopeOutput(String),
    #[error("total value added of nation {0} is zero")]
    ZeroValueAdded(String),
    #[error("exposure matrices are not comparable: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExposureKind {
    /// Foreign input reliance.
    Fir,
    /// Foreign market reliance.
    Fmr,
}

impl std::fmt::Display for ExposureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExposureKind::Fir => "FIR",
            ExposureKind::Fmr => "FMR",
        })
    }
}

/// The user-side (FIR) or seller-side (FMR) sectors a measure is restricted to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorFilter {
    sectors: Vec<String>,
}

impl SectorFilter {
    pub fn new(w: &WiotTable, sectors: &[String]) -> Result<Self, ExposureError> {
        if sectors.is_empty() {
            return Err(ExposureError::EmptyScope);
        }
        for s in sectors {
            if !w.sectors().contains(s) {
                return Err(ExposureError::UnknownSector(s.clone()));
            }
        }
        // Keep table order so results do not depend on how the caller listed them.
        let ordered = w
            .sectors()
            .iter()
            .filter(|s| sectors.contains(s))
            .cloned()
            .collect();
        Ok(SectorFilter { sectors: ordered })
    }

    pub fn all(w: &WiotTable) -> Self {
        SectorFilter {
            sectors: w.sectors().to_vec(),
        }
    }

    pub fn sectors(&self) -> &[String] {
        &self.sectors
    }

    fn indices(&self, w: &WiotTable) -> Vec<usize> {
        w.sectors()
            .iter()
            .enumerate()
            .filter(|(_, s)| self.sectors.contains(s))
            .map(|(k, _)| k)
            .collect()
    }
}

/// An `N x N` matrix of percentage shares with base nations on rows and
/// partner nations on columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureMatrix {
    kind: ExposureKind,
    nations: Vec<String>,
    scope: Vec<String>,
    shares: DMatrix<f64>,
}

impl ExposureMatrix {
    pub fn kind(&self) -> ExposureKind {
        self.kind
    }

    pub fn nations(&self) -> &[String] {
        &self.nations
    }

    pub fn scope(&self) -> &[String] {
        &self.scope
    }

    /// Off-diagonal share in percent; `None` on the suppressed diagonal.
    pub fn get(&self, base: usize, partner: usize) -> Option<f64> {
        (base != partner).then(|| self.shares[(base, partner)])
    }

    /// The suppressed diagonal entry.
    pub fn domestic_share(&self, nation: usize) -> f64 {
        self.shares[(nation, nation)]
    }

    /// Sum over partners, diagonal excluded.
    pub fn foreign_total(&self, base: usize) -> f64 {
        (0..self.nations.len())
            .filter_map(|c| self.get(base, c))
            .sum()
    }

    pub fn write_csv<W: Write>(&self, digits: usize, out: W) -> std::io::Result<()> {
        write_nation_matrix(&self.nations, |r, c| self.get(r, c), digits, out)
    }
}

/// Percentage-point changes between two exposure matrices of the same kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureChange {
    kind: ExposureKind,
    nations: Vec<String>,
    points: DMatrix<f64>,
}

impl ExposureChange {
    pub fn kind(&self) -> ExposureKind {
        self.kind
    }

    pub fn nations(&self) -> &[String] {
        &self.nations
    }

    pub fn get(&self, base: usize, partner: usize) -> Option<f64> {
        (base != partner).then(|| self.points[(base, partner)])
    }

    pub fn write_csv<W: Write>(&self, digits: usize, out: W) -> std::io::Result<()> {
        write_nation_matrix(&self.nations, |r, c| self.get(r, c), digits, out)
    }
}

fn write_nation_matrix<W: Write>(
    nations: &[String],
    cell: impl Fn(usize, usize) -> Option<f64>,
    digits: usize,
    out: W,
) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let header: Vec<&str> = std::iter::once("base")
        .chain(nations.iter().map(String::as_str))
        .collect();
    writer
        .write_record(&header)
        .map_err(std::io::Error::other)?;
    for (r, name) in nations.iter().enumerate() {
        let mut rec = vec![name.clone()];
        rec.extend((0..nations.len()).map(|c| match cell(r, c) {
            Some(v) => format!("{v:.digits$}"),
            None => String::new(),
        }));
        writer.write_record(&rec).map_err(std::io::Error::other)?;
    }
    writer.flush()
}

/// Value-added origin matrix `Ω = diag(v) · B`.
pub fn va_origin(w: &WiotTable) -> Result<DMatrix<f64>, ExposureError> {
    let b = leontief(&coefficients(w))?.into_inner();
    let v = w.value_added_coefficients();
    let mut omega = b;
    for (i, mut row) in omega.row_iter_mut().enumerate() {
        row *= v[i];
    }
    Ok(omega)
}

/// Foreign input reliance over the user-side sectors in `scope`.
pub fn fir(w: &WiotTable, scope: &SectorFilter) -> Result<ExposureMatrix, ExposureError> {
    let omega = va_origin(w)?;
    let n = w.num_nations();
    let k = w.num_sectors();
    let in_scope = scope.indices(w);
    let x = w.gross_output();
    let mut shares = DMatrix::zeros(n, n);
    for r in 0..n {
        let users: Vec<usize> = in_scope.iter().map(|&t| w.index(r, t)).collect();
        let output: f64 = users.iter().map(|&u| x[u]).sum();
        if output <= 0.0 {
            return Err(ExposureError::ZeroScopeOutput(w.nations()[r].clone()));
        }
        for c in 0..n {
            let mut embodied = 0.0;
            for s in 0..k {
                let origin = w.index(c, s);
                for &u in &users {
                    embodied += omega[(origin, u)] * x[u];
                }
            }
            shares[(r, c)] = 100.0 * embodied / output;
        }
    }
    Ok(ExposureMatrix {
        kind: ExposureKind::Fir,
        nations: w.nations().to_vec(),
        scope: scope.sectors().to_vec(),
        shares,
    })
}

/// Foreign market reliance over the user-side sectors in `scope` of the
/// absorbing nation.
pub fn fmr(w: &WiotTable, scope: &SectorFilter) -> Result<ExposureMatrix, ExposureError> {
    let omega = va_origin(w)?;
    let n = w.num_nations();
    let k = w.num_sectors();
    let in_scope = scope.indices(w);
    let x = w.gross_output();
    let v = w.value_added();
    let mut shares = DMatrix::zeros(n, n);
    for r in 0..n {
        let sellers: Vec<usize> = (0..k).map(|s| w.index(r, s)).collect();
        let value_added: f64 = sellers.iter().map(|&s| v[s]).sum();
        if value_added <= 0.0 {
            return Err(ExposureError::ZeroValueAdded(w.nations()[r].clone()));
        }
        for c in 0..n {
            let mut absorbed = 0.0;
            for &s in &sellers {
                for &t in &in_scope {
                    let user = w.index(c, t);
                    absorbed += omega[(s, user)] * x[user];
                }
            }
            shares[(r, c)] = 100.0 * absorbed / value_added;
        }
    }
    Ok(ExposureMatrix {
        kind: ExposureKind::Fmr,
        nations: w.nations().to_vec(),
        scope: scope.sectors().to_vec(),
        shares,
    })
}

/// `later - earlier`, in percentage points.
pub fn delta_exposure(
    earlier: &ExposureMatrix,
    later: &ExposureMatrix,
) -> Result<ExposureChange, ExposureError> {
    if earlier.kind != later.kind {
        return Err(ExposureError::Mismatch(format!(
            "{} vs {}",
            earlier.kind, later.kind
        )));
    }
    if earlier.nations != later.nations {
        return Err(ExposureError::Mismatch(format!(
            "nations {:?} vs {:?}",
            earlier.nations, later.nations
        )));
    }
    if earlier.scope != later.scope {
        return Err(ExposureError::Mismatch(format!(
            "sector scope {:?} vs {:?}",
            earlier.scope, later.scope
        )));
    }
    Ok(ExposureChange {
        kind: earlier.kind,
        nations: earlier.nations.clone(),
        points: &later.shares - &earlier.shares,
    })
}
