use std::io::Write;

use crate::error::Result;

pub const TRACE_HEADER: &str = "iter,I,G,A1,B,C,residual_l2,step";

/// One accepted iterate; row 0 is the projected initial field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub i: f64,
    pub g: f64,
    pub a1: f64,
    pub b: f64,
    pub c: f64,
    pub residual_l2: f64,
    pub step: f64,
}

/// Shortest representation that parses back to the same bits; exponent
/// form for very small or very large magnitudes.
pub fn format_real(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Writes the header and one row per entry with [`format_real`], so output
/// is reproducible.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], mut out: W) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in rows {
        let reals = [r.i, r.g, r.a1, r.b, r.c, r.residual_l2, r.step].map(format_real);
        writeln!(out, "{},{}", r.iter, reals.join(","))?;
    }
    Ok(())
}
