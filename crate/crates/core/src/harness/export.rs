//! CSV export of traces, Simon–Stolz curves and Prüfer variables.

use std::io::Write;

use crate::error::Result;
use crate::solver::SolutionTrace;
use crate::spectral::{PruferTrace, SimonStolzCurve};

/// Columns `x,re_u,im_u,re_du,im_du`.
pub fn write_trace_csv<W: Write>(w: W, trace: &SolutionTrace) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "re_u", "im_u", "re_du", "im_du"])?;
    for ((x, u), du) in trace.xs().iter().zip(trace.u()).zip(trace.du()) {
        out.serialize((x, u.re, u.im, du.re, du.im))?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `x,norm_T,integrand,cumulative`.
pub fn write_curve_csv<W: Write>(w: W, curve: &SimonStolzCurve) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "norm_T", "integrand", "cumulative"])?;
    for i in 0..curve.xs.len() {
        out.serialize((curve.xs[i], curve.norm_t[i], curve.integrand[i], curve.cumulative[i]))?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `x,R,theta`.
pub fn write_prufer_csv<W: Write>(w: W, p: &PruferTrace) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "R", "theta"])?;
    for i in 0..p.xs.len() {
        out.serialize((p.xs[i], p.r[i], p.theta[i]))?;
    }
    out.flush()?;
    Ok(())
}
