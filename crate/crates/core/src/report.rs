//! CSV tables for pair PEP curves, BER curves and the exact/ZcMod study.
//!
//! Every table has a header row and uses `.` as decimal separator. Floats
//! are written in their shortest round-trip form, so identical results give
//! identical files.

use std::io::Write;

use serde::Serialize;

use crate::analysis::{dsz_from_db, exact_pep_bdec, norm_distance, pep_analytic, weight_profile, DecoderKind};
use crate::constellation::Constellation;
use crate::sim::{ber_ratio, SimResult};
use crate::{Error, Result};

/// One row of a pair PEP table. Simulation columns are empty when no
/// simulation was run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PepRow {
    pub dsz_db: f64,
    pub pep_sdec_analytic: f64,
    pub pep_bdec_zcmod: f64,
    pub pep_bdec_exact: f64,
    pub pep_sdec_sim: Option<f64>,
    pub pep_bdec_sim: Option<f64>,
    pub sdec_ci_low: Option<f64>,
    pub sdec_ci_high: Option<f64>,
    pub bdec_ci_low: Option<f64>,
    pub bdec_ci_high: Option<f64>,
}

/// Analytic, ZcMod and exact PEPs of a 4-PAM pair over `grid_db`
/// (`d/σ_z` in dB), joined with simulated curves on the same grid.
pub fn pep_rows(
    c: &Constellation,
    x: &[usize],
    xhat: &[usize],
    grid_db: &[f64],
    sims: Option<(&SimResult, &SimResult)>,
) -> Result<Vec<PepRow>> {
    let p = weight_profile(c, x, xhat)?;
    let a_s = norm_distance(DecoderKind::Sdec, &p)?;
    let a_b = norm_distance(DecoderKind::Bdec, &p)?;
    if let Some((s, b)) = sims {
        let same = |r: &SimResult| {
            r.points.len() == grid_db.len() && r.points.iter().zip(grid_db).all(|(pt, g)| (pt.dsz_db - g).abs() < 1e-9)
        };
        if !same(s) || !same(b) {
            return Err(Error::GridMismatch);
        }
    }
    grid_db
        .iter()
        .enumerate()
        .map(|(i, &db)| {
            let dsz = dsz_from_db(db);
            let sp = sims.map(|(s, b)| (&s.points[i], &b.points[i]));
            Ok(PepRow {
                dsz_db: db,
                pep_sdec_analytic: pep_analytic(a_s, dsz),
                pep_bdec_zcmod: pep_analytic(a_b, dsz),
                pep_bdec_exact: exact_pep_bdec(c, x, xhat, dsz)?.value,
                pep_sdec_sim: sp.map(|p| p.0.estimate),
                pep_bdec_sim: sp.map(|p| p.1.estimate),
                sdec_ci_low: sp.map(|p| p.0.ci_low),
                sdec_ci_high: sp.map(|p| p.0.ci_high),
                bdec_ci_low: sp.map(|p| p.1.ci_low),
                bdec_ci_high: sp.map(|p| p.1.ci_high),
            })
        })
        .collect()
}

/// One row of a BER table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRow {
    pub snr_db: f64,
    pub dsz_db: f64,
    pub ber_sdec: f64,
    pub ber_bdec: f64,
    pub sdec_ci_low: f64,
    pub sdec_ci_high: f64,
    pub bdec_ci_low: f64,
    pub bdec_ci_high: f64,
    pub ratio: f64,
    pub ratio_ci_low: f64,
    pub ratio_ci_high: f64,
    pub frames: u64,
    pub bits: u64,
    pub sdec_errors: u64,
    pub bdec_errors: u64,
    pub sdec_censored: bool,
    pub bdec_censored: bool,
}

pub fn ber_rows(sdec: &SimResult, bdec: &SimResult) -> Result<Vec<BerRow>> {
    let ratio = ber_ratio(bdec, sdec)?;
    Ok(sdec
        .points
        .iter()
        .zip(&bdec.points)
        .zip(&ratio)
        .map(|((s, b), r)| BerRow {
            snr_db: s.snr_db,
            dsz_db: s.dsz_db,
            ber_sdec: s.estimate,
            ber_bdec: b.estimate,
            sdec_ci_low: s.ci_low,
            sdec_ci_high: s.ci_high,
            bdec_ci_low: b.ci_low,
            bdec_ci_high: b.ci_high,
            ratio: r.ratio,
            ratio_ci_low: r.ci_low,
            ratio_ci_high: r.ci_high,
            frames: s.trials,
            bits: s.units,
            sdec_errors: s.errors,
            bdec_errors: b.errors,
            sdec_censored: s.censored,
            bdec_censored: b.censored,
        })
        .collect())
}

/// Writes serializable rows as CSV with a header.
pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Output(e.to_string()))
}

/// CSV text of `rows`.
pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    String::from_utf8(buf).map_err(|e| Error::Output(e.to_string()))
}
