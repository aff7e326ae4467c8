//! Error norms between computed and reference shapes, and convergence-order
//! bookkeeping for refinement ladders.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{area_nonneg, ScalarField};
use crate::geom::{point_segment_distance, Polyline};

/// One row of a convergence table.
#[derive(Debug, Clone, Copy)]
pub struct ErrorRow {
    pub steps: usize,
    pub inv_dx: usize,
    pub l1: f64,
    pub linf: Option<f64>,
    /// log2(previous l1 / this l1); absent on the first row
    pub order: Option<f64>,
}

/// Area of the symmetric difference between { a >= 0 } and { b >= 0 },
/// measured with the same per-cell linear reconstruction as
/// `fields::area_nonneg` (intersection via the nodewise minimum).
pub fn l1_error(a: &ScalarField, b: &ScalarField) -> f64 {
    assert_eq!(a.grid, b.grid, "fields must share a grid");
    let min_field = ScalarField {
        grid: a.grid,
        values: a
            .values
            .iter()
            .zip(&b.values)
            .map(|(&x, &y)| x.min(y))
            .collect(),
    };
    area_nonneg(a) + area_nonneg(b) - 2.0 * area_nonneg(&min_field)
}

fn segments(p: &Polyline) -> impl Iterator<Item = (crate::geom::Vec2, crate::geom::Vec2)> + '_ {
    let n = p.points.len();
    let last = if p.closed && n > 2 { n } else { n.saturating_sub(1) };
    (0..last).map(move |i| (p.points[i], p.points[(i + 1) % n]))
}

fn one_sided(a: &Polyline, b: &Polyline) -> f64 {
    let mut worst = 0.0_f64;
    for &p in &a.points {
        let mut best = f64::INFINITY;
        for (u, v) in segments(b) {
            best = best.min(point_segment_distance(p, u, v));
            if best == 0.0 {
                break;
            }
        }
        worst = worst.max(best);
    }
    worst
}

/// Symmetric Hausdorff distance between polylines (vertex-to-segment).
pub fn linf_error(a: &Polyline, b: &Polyline) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Config("empty polyline in Hausdorff distance".into()));
    }
    Ok(one_sided(a, b).max(one_sided(b, a)))
}

/// Assemble rows with orders, plus the least-squares slope of log(l1)
/// against log(dt) (dt proportional to 1/steps at fixed final time).
pub fn convergence_table(
    runs: &[(usize, usize, f64, Option<f64>)],
) -> (Vec<ErrorRow>, Option<f64>) {
    let mut rows = Vec::with_capacity(runs.len());
    let mut prev: Option<f64> = None;
    for &(steps, inv_dx, l1, linf) in runs {
        let order = prev.map(|p| (p / l1).log2());
        rows.push(ErrorRow { steps, inv_dx, l1, linf, order });
        prev = Some(l1);
    }
    let slope = if runs.len() >= 2 {
        // least squares of ln(l1) on ln(1/steps); positive slope means the
        // error shrinks as dt does
        let pts: Vec<(f64, f64)> = runs
            .iter()
            .map(|&(steps, _, l1, _)| ((1.0 / steps as f64).ln(), l1.ln()))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
    } else {
        None
    };
    (rows, slope)
}

/// Write a table as CSV with the fixed header and the fit summary comment.
pub fn write_error_csv(path: &Path, rows: &[ErrorRow], slope: Option<f64>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "steps,inv_dx,l1,linf,order")?;
    for r in rows {
        let linf = r.linf.map(|v| format!("{v:.6e}")).unwrap_or_default();
        let order = r.order.map(|v| format!("{v:.4}")).unwrap_or_default();
        writeln!(f, "{},{},{:.6e},{},{}", r.steps, r.inv_dx, r.l1, linf, order)?;
    }
    if let Some(s) = slope {
        writeln!(f, "# slope={s:.5}")?;
    }
    Ok(())
}
