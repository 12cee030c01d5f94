use super::config::Axes;
use crate::diagnostics::RunTrace;
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Losses are clipped here before taking logarithms.
pub const PLOT_FLOOR: f64 = 1e-17;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 56.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Tick positions for a linear axis on `[lo, hi]`: steps of 1, 2 or 5 × 10^m.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1.0);
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 8.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(t);
        t += step;
    }
    out
}

fn tick_label(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e7 {
        format!("{}", x as i64)
    } else {
        format!("{x:e}")
    }
}

/// Self-contained SVG of loss against iteration, one polyline per trace,
/// legend in input order. Decade ticks on every log axis.
pub fn render_svg(traces: &[RunTrace], axes: Axes) -> Result<String> {
    if traces.is_empty() || traces.iter().any(RunTrace::is_empty) {
        return Err(Error::InvalidArgument("cannot plot an empty trace".into()));
    }
    let x_of = |k: usize| -> Option<f64> {
        match axes {
            Axes::LogLog if k == 0 => None,
            Axes::LogLog => Some((k as f64).log10()),
            Axes::SemilogY => Some(k as f64),
        }
    };
    let y_of = |loss: f64| if loss.is_nan() { PLOT_FLOOR.log10() } else { loss.max(PLOT_FLOOR).log10() };
    let series: Vec<Vec<(f64, f64)>> = traces
        .iter()
        .map(|t| t.records.iter().filter_map(|r| x_of(r.k).map(|x| (x, y_of(r.loss)))).collect())
        .collect();
    let all = series.iter().flatten();
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if !x_lo.is_finite() {
        return Err(Error::InvalidArgument("no plottable points (log axes skip k = 0)".into()));
    }
    if axes == Axes::LogLog {
        x_lo = x_lo.floor();
        x_hi = x_hi.ceil();
    }
    y_lo = y_lo.floor().min(y_hi.ceil() - 1.0);
    y_hi = y_hi.ceil();
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * pw;
    let sy = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
    );

    let mut y = y_lo;
    let step = ((y_hi - y_lo) / 16.0).ceil().max(1.0);
    while y <= y_hi + 1e-9 {
        let py = sy(y);
        let _ =
            writeln!(s, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/>"##, LEFT + pw);
        let _ = writeln!(
            s,
            r#"<text class="ytick" x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"#,
            LEFT - 6.0,
            py + 4.0,
            y as i64
        );
        y += step;
    }

    let xticks: Vec<(f64, String)> = match axes {
        Axes::LogLog => {
            let mut v = Vec::new();
            let mut d = x_lo;
            while d <= x_hi + 1e-9 {
                v.push((d, format!("1e{}", d as i64)));
                d += 1.0;
            }
            v
        }
        Axes::SemilogY => linear_ticks(x_lo, x_hi).into_iter().map(|t| (t, tick_label(t))).collect(),
    };
    for (x, label) in xticks {
        let px = sx(x);
        let _ = writeln!(s, r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#dddddd"/>"##, TOP + ph);
        let _ = writeln!(
            s,
            r#"<text class="xtick" x="{px:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            TOP + ph + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">iteration k</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">optimality gap</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, pts) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut p = String::with_capacity(pts.len() * 16);
        for (j, &(x, y)) in pts.iter().enumerate() {
            if j > 0 {
                p.push(' ');
            }
            let _ = write!(p, "{:.2},{:.2}", sx(x), sy(y));
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{p}"/>"#);
    }

    for (i, t) in traces.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = LEFT + pw - 170.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 24.0
        );
        let _ =
            writeln!(s, r#"<text class="legend" x="{:.2}" y="{:.2}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&t.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg_plot(traces: &[RunTrace], path: &Path, axes: Axes) -> Result<()> {
    let svg = render_svg(traces, axes)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
