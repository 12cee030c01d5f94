use crate::diagnostics::{RunTrace, TraceRecord};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

pub const TRACE_HEADER: &str = "k,loss,consensus_error,projection_error,grad_avg_norm,phi1,phi2,phi3,phi4,v_min";

fn number(out: &mut String, x: f64) {
    // 17 significant digits round-trip every f64
    let _ = write!(out, "{x:.16e}");
}

fn optional(out: &mut String, x: Option<f64>) {
    if let Some(x) = x {
        number(out, x);
    }
}

/// Renders a trace with [`TRACE_HEADER`], one LF-terminated row per record.
pub fn trace_to_csv(trace: &RunTrace) -> String {
    let mut out = String::with_capacity(64 + trace.len() * 220);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let _ = write!(out, "{},", r.k);
        for x in [r.loss, r.consensus_error, r.projection_error, r.grad_avg_norm] {
            number(&mut out, x);
            out.push(',');
        }
        for x in [r.phi1, r.phi2, r.phi3, r.phi4] {
            optional(&mut out, x);
            out.push(',');
        }
        number(&mut out, r.v_min);
        out.push('\n');
    }
    out
}

pub fn emit_csv(trace: &RunTrace, path: &Path) -> Result<()> {
    std::fs::write(path, trace_to_csv(trace)).map_err(|e| Error::io(path, e))
}

/// Parses a trace file; the label is taken from the file stem.
pub fn read_trace_csv(path: &Path) -> Result<RunTrace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_trace_csv(&text, label, path)
}

pub fn parse_trace_csv(text: &str, label: impl Into<String>, origin: &Path) -> Result<RunTrace> {
    let err = |line: usize, msg: String| Error::Parse { path: origin.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == TRACE_HEADER => {}
        _ => return Err(err(1, format!("expected header `{TRACE_HEADER}`"))),
    }
    let mut trace = RunTrace::new(label);
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(err(idx + 1, format!("expected 10 fields, found {}", fields.len())));
        }
        let req = |i: usize| -> Result<f64> {
            fields[i].trim().parse::<f64>().map_err(|e| err(idx + 1, format!("field {}: {e}", i + 1)))
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            if fields[i].trim().is_empty() {
                Ok(None)
            } else {
                req(i).map(Some)
            }
        };
        let k = fields[0].trim().parse::<usize>().map_err(|e| err(idx + 1, format!("iteration: {e}")))?;
        if trace.last().is_some_and(|r| r.k >= k) {
            return Err(err(idx + 1, "iterations must increase".into()));
        }
        trace.records.push(TraceRecord {
            k,
            loss: req(1)?,
            consensus_error: req(2)?,
            projection_error: req(3)?,
            grad_avg_norm: req(4)?,
            phi1: opt(5)?,
            phi2: opt(6)?,
            phi3: opt(7)?,
            phi4: opt(8)?,
            v_min: req(9)?,
        });
    }
    Ok(trace)
}
