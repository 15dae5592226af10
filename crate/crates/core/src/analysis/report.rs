//! CSV tables emitted by the analysis functionals, 17 significant digits.

use std::io::Write;

use super::dissipation::DissipationRow;
use super::stability::StabilityReport;
use crate::error::Result;

pub const STABILITY_HEADER: [&str; 4] = ["lhs", "weight", "rhs", "satisfied"];
pub const DISSIPATION_HEADER: [&str; 3] = ["nu", "sup_gap", "dissipation"];
pub const RADII_HEADER: [&str; 6] = ["phi_id", "k", "T", "C", "radius", "log_radius"];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_stability_csv<W: Write>(w: W, reports: &[StabilityReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(STABILITY_HEADER)?;
    for r in reports {
        out.write_record([num(r.lhs), num(r.weight), num(r.rhs), r.satisfied.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_dissipation_csv<W: Write>(w: W, rows: &[DissipationRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(DISSIPATION_HEADER)?;
    for r in rows {
        out.write_record([num(r.nu), num(r.sup_gap), num(r.dissipation)])?;
    }
    out.flush()?;
    Ok(())
}

/// One residual-radius certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusRow {
    pub phi_id: String,
    pub k: u32,
    pub t: f64,
    pub c: f64,
    pub radius: f64,
    pub log_radius: f64,
}

pub fn write_radii_csv<W: Write>(w: W, rows: &[RadiusRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RADII_HEADER)?;
    for r in rows {
        out.write_record([r.phi_id.clone(), r.k.to_string(), num(r.t), num(r.c), num(r.radius), num(r.log_radius)])?;
    }
    out.flush()?;
    Ok(())
}
