//! CSV rendering of study and suite results.
//!
//! Floats are written with 17 significant digits so values round-trip.

use std::fmt::Write;

use crate::illposed::ScalingStudy;
use crate::verify::RatioReport;

/// Lossless float formatting used in every CSV.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SCALING_HEADER: &str = "N,s,eps0,t_N,norm_phi,norm_u2,cells,max_chi_ratio";
pub const RATIO_HEADER: &str = "estimate_id,seed,sample,b,s1,s2,delta,eps,xi,ratio";
pub const HISTORY_HEADER: &str = "t,l2_norm";

/// One row per `N`; `max_chi_ratio` is left empty when not sampled.
pub fn scaling_csv(study: &ScalingStudy) -> String {
    let mut out = String::from(SCALING_HEADER);
    out.push('\n');
    for r in &study.rows {
        let chi = r.max_chi_ratio.map(fmt_f64).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.n),
            fmt_f64(r.s),
            fmt_f64(r.eps0),
            fmt_f64(r.t_n),
            fmt_f64(r.norm_phi),
            fmt_f64(r.norm_u2),
            r.quadrature_cells,
            chi
        )
        .unwrap();
    }
    out
}

/// One row per sample across all reports, in the given order.
pub fn ratio_csv<'a>(reports: impl IntoIterator<Item = &'a RatioReport>) -> String {
    let mut out = String::from(RATIO_HEADER);
    out.push('\n');
    for rep in reports {
        let p = &rep.params;
        for s in &rep.ratios {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                rep.estimate_id.name(),
                s.seed,
                s.sample,
                fmt_f64(p.b),
                fmt_f64(p.s1),
                fmt_f64(p.s2),
                fmt_f64(p.delta),
                fmt_f64(p.eps),
                fmt_f64(p.xi),
                fmt_f64(s.ratio)
            )
            .unwrap();
        }
    }
    out
}

/// `(t, ||u(t)||_{L2})` rows.
pub fn history_csv(times: &[f64], norms: &[f64]) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for (t, n) in times.iter().zip(norms) {
        writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*n)).unwrap();
    }
    out
}
