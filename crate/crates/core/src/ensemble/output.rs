use std::io::Write;

use crate::error::{Error, Result};

use super::{EnsembleResult, ZSummary};

pub const SWEEP_HEADER: &str = "z,F_mean_emp,F_sem,F_mean_mf,k1_star";
pub const HIST_HEADER: &str = "F,count,p_emp,p_mf,log10_p_emp,log10_p_mf";

fn version_line() -> String {
    format!("# contagion {} format 1", env!("CARGO_PKG_VERSION"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::domain(format!("csv output: {e}"))
}

fn log10_or_empty(p: f64) -> String {
    if p > 0.0 {
        format!("{}", p.log10())
    } else {
        String::new()
    }
}

/// One row per mean degree.
pub fn write_sweep_csv<W: Write>(result: &EnsembleResult, mut out: W) -> Result<()> {
    writeln!(out, "{}", version_line()).map_err(|e| Error::io("<sweep>", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER.split(',')).map_err(csv_err)?;
    for s in &result.per_z {
        w.write_record([
            s.z.to_string(),
            s.mean.to_string(),
            s.sem.to_string(),
            s.mf_mean.to_string(),
            result.critical.k1_star.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<sweep>", e))
}

/// `F = 0..=f_max` plus a final `>f_max` overflow row.
pub fn write_hist_csv<W: Write>(summary: &ZSummary, mut out: W) -> Result<()> {
    writeln!(out, "{}", version_line()).map_err(|e| Error::io("<hist>", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HIST_HEADER.split(',')).map_err(csv_err)?;
    let h = &summary.histogram;
    let mf = summary.mf_distribution.as_ref();
    for f in 0..=h.f_max() {
        let p_emp = h.prob(f);
        let p_mf = mf.map_or(f64::NAN, |d| d.prob(f));
        w.write_record([
            f.to_string(),
            h.counts[f].to_string(),
            p_emp.to_string(),
            p_mf.to_string(),
            log10_or_empty(p_emp),
            log10_or_empty(p_mf),
        ])
        .map_err(csv_err)?;
    }
    let p_over = h.overflow_prob();
    let p_mf_over = mf.map_or(f64::NAN, |d| (1.0 - d.total()).max(0.0));
    w.write_record([
        format!(">{}", h.f_max()),
        h.overflow.to_string(),
        p_over.to_string(),
        p_mf_over.to_string(),
        log10_or_empty(p_over),
        log10_or_empty(p_mf_over),
    ])
    .map_err(csv_err)?;
    w.flush().map_err(|e| Error::io("<hist>", e))
}
