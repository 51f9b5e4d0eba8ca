//! Rank-2 grid sweeps of the earthquake map, emitted as plain rows.

use std::io::Write;

use serde::Serialize;

use crate::earthquake::quake;
use crate::error::{Error, Result};
use crate::pattern::ExchangePattern;
use crate::points::{PositivePoint, TropicalPoint};

/// Square grid `[lo, hi]^2` with spacing `step`; both ends included when
/// `hi - lo` is a multiple of `step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Domain(format!("bad grid range [{lo}, {hi}]")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain(format!("grid step must be positive, got {step}")));
        }
        Ok(Self { lo, hi, step })
    }

    /// Sample values along one axis. Computed as `lo + i * step` so the
    /// output does not depend on accumulated rounding.
    pub fn axis(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

/// One grid sample. Column order is the CSV header order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridRow {
    pub x1: f64,
    pub x2: f64,
    pub cone: usize,
    #[serde(rename = "logX1")]
    pub log_x1: f64,
    #[serde(rename = "logX2")]
    pub log_x2: f64,
    pub u1: f64,
    pub u2: f64,
}

pub const CSV_HEADER: [&str; 7] = ["x1", "x2", "cone", "logX1", "logX2", "u1", "u2"];

/// For each grid point `x` (base-chart tropical coordinates): the cone
/// label, `log X^(v0)(E(g0, x))`, and the u-coordinates
/// `log X^(v0)(E(g0, x)) - log X^(v0)(g0)`. Rows run over `x1` first, then `x2`.
pub fn plot_grid(p: &ExchangePattern, g0: &PositivePoint, grid: &GridSpec) -> Result<Vec<GridRow>> {
    if p.rank() != 2 {
        return Err(Error::UnsupportedPlot(p.rank()));
    }
    let base = g0.logs_in(p, p.base)?;
    let axis = grid.axis();
    let mut rows = Vec::with_capacity(axis.len() * axis.len());
    for &x1 in &axis {
        for &x2 in &axis {
            let l = TropicalPoint::new(p.base, vec![x1, x2])?;
            let r = quake(p, g0, &l)?;
            let logs = r.g.logs_in(p, p.base)?;
            rows.push(GridRow {
                x1,
                x2,
                cone: r.cone_vertex.0,
                log_x1: logs[0],
                log_x2: logs[1],
                u1: logs[0] - base[0],
                u2: logs[1] - base[1],
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[GridRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER)
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    for row in rows {
        w.serialize(row).map_err(|e| Error::Internal(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Internal(e.to_string()))
}
