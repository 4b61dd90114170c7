use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{
    bootstrap_ratio_from_norms, fit_rate_guarded, optimality_limit, sobolev_ladder, ConvergenceRecord, GapReport,
    OptimalityEstimate, RateFit, Sweep, UniformBoundTable,
};
use crate::error::Result;
use crate::grid::Grid;
use crate::nonlinearity::{NonlinearityKind, NonlinearitySpec};

const LADDER_LENGTH: usize = 4;

/// One `(c, s)` row of the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c: f64,
    pub s: f64,
    pub norm_diff: f64,
    pub h_minus1_residual: f64,
    pub lambda: f64,
    pub v_norm_h1: f64,
    pub action_c: f64,
    /// `|u_c|_{H^s}`.
    pub sup_norm: f64,
}

pub fn sweep_rows(records: &[ConvergenceRecord]) -> Vec<SweepRow> {
    records
        .iter()
        .flat_map(|r| {
            r.orders.iter().enumerate().map(move |(j, &s)| SweepRow {
                c: r.c,
                s,
                norm_diff: r.diff_norms[j],
                h_minus1_residual: r.h_minus1_residual,
                lambda: r.lambda,
                v_norm_h1: r.v_norm_h1,
                action_c: r.action_c,
                sup_norm: r.state_norms[j],
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(out: W, records: &[ConvergenceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in sweep_rows(records) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Everything a sweep establishes, in one serializable record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub n: usize,
    pub nonlinearity: NonlinearityKind,
    pub p: u32,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub tolerance: f64,
    pub c_values: Vec<f64>,
    pub orders: Vec<f64>,
    pub reference_norms: Vec<f64>,
    pub reference_action: f64,
    /// Guarded fits, one per order that has enough usable points.
    pub fits: Vec<RateFit>,
    /// `c^2 |(-Δ + 1 - P_c(D)) u_c|_{H^{-1}}` per `c`.
    pub h_minus1_scaled: Vec<f64>,
    /// Orders of the bootstrap ratio and its value per `c`.
    pub bootstrap_orders: Option<(f64, f64)>,
    pub bootstrap: Vec<f64>,
    pub optimality: OptimalityEstimate,
    pub gap: Option<f64>,
    pub identity_residual: Option<f64>,
    pub ladder: Vec<f64>,
    pub uniform_bounds: UniformBoundTable,
}

impl SweepSummary {
    pub fn build(
        sweep: &Sweep,
        nl: &NonlinearitySpec,
        grid: &Grid,
        tolerance: f64,
        gap: Option<(&GapReport, f64)>,
    ) -> Result<Self> {
        let records = &sweep.records;
        let fits = sweep
            .orders
            .iter()
            .filter_map(|&s| fit_rate_guarded(records, s, tolerance).ok())
            .collect();
        let from = sweep.orders.iter().copied().filter(|&s| s >= 0.5).reduce(f64::min);
        let to = sweep.orders.iter().copied().reduce(f64::max);
        let bootstrap_orders = match (from, to) {
            (Some(a), Some(b)) if b > a => Some((a, b)),
            _ => None,
        };
        let bootstrap = match bootstrap_orders {
            Some((a, b)) => records
                .iter()
                .map(|r| {
                    let na = r.diff_norm(a).expect("order present");
                    let nb = r.diff_norm(b).expect("order present");
                    bootstrap_ratio_from_norms(na, nb, r.c)
                })
                .collect(),
            None => Vec::new(),
        };
        let c_values: Vec<f64> = records.iter().map(|r| r.c).collect();
        Ok(Self {
            n: grid.dim(),
            nonlinearity: nl.kind(),
            p: nl.exponent(),
            length: grid.length(),
            points: grid.points(),
            tolerance,
            orders: sweep.orders.clone(),
            reference_norms: sweep.reference_norms.clone(),
            reference_action: sweep.reference.action,
            fits,
            h_minus1_scaled: records.iter().map(|r| r.c * r.c * r.h_minus1_residual).collect(),
            bootstrap_orders,
            bootstrap,
            optimality: optimality_limit(&sweep.reference.field, &c_values)?,
            gap: gap.map(|(g, _)| g.d),
            identity_residual: gap.map(|(_, r)| r),
            ladder: sobolev_ladder(grid.dim(), nl.exponent(), nl.kind(), LADDER_LENGTH)?,
            uniform_bounds: UniformBoundTable::from_records(records)?,
            c_values,
        })
    }

    pub fn fit(&self, s: f64) -> Option<&RateFit> {
        self.fits.iter().find(|f| f.s == s)
    }
}
