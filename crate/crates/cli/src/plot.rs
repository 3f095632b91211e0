//! Self-contained, byte-stable SVG plots: a data polyline with markers,
//! axes with ticks, and an optional fitted power-law overlay with its slope
//! label.

use gpwave::experiments::PowerFit;

pub enum PlotKind {
    LogLog,
    Linear,
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const ML: f64 = 70.0; // margins
const MR: f64 = 20.0;
const MT: f64 = 20.0;
const MB: f64 = 50.0;

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

/// Render one series (optionally with a fit overlay) to an SVG string.
/// Returns an error message for empty or non-plottable input.
pub fn render(
    xs: &[f64],
    ys: &[f64],
    kind: PlotKind,
    x_label: &str,
    y_label: &str,
    fit: Option<&PowerFit>,
) -> Result<String, String> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err("empty or mismatched series".into());
    }
    let log_ok = xs.iter().chain(ys).all(|v| *v > 0.0);
    let (tx, ty): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) = match kind {
        PlotKind::LogLog => {
            if !log_ok {
                return Err("log-log plot needs positive data".into());
            }
            (Box::new(|v: f64| v.ln()), Box::new(|v: f64| v.ln()))
        }
        PlotKind::Linear => (Box::new(|v| v), Box::new(|v| v)),
    };
    let txs: Vec<f64> = xs.iter().map(|v| tx(*v)).collect();
    let tys: Vec<f64> = ys.iter().map(|v| ty(*v)).collect();
    let (x0, x1) = bounds(&txs);
    let (y0, y1) = bounds(&tys);
    let sx = |v: f64| ML + (v - x0) / (x1 - x0).max(1e-300) * (W - ML - MR);
    let sy = |v: f64| H - MB - (v - y0) / (y1 - y0).max(1e-300) * (H - MT - MB);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // axes
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(ML),
        fmt(H - MB),
        fmt(W - MR),
        fmt(H - MB)
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(ML),
        fmt(MT),
        fmt(ML),
        fmt(H - MB)
    ));
    // ticks: five per axis in the transformed scale, annotated in data units
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let px = sx(fx);
        let label = match kind {
            PlotKind::LogLog => fmt_tick(fx.exp()),
            PlotKind::Linear => fmt_tick(fx),
        };
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
            fmt(px),
            fmt(H - MB),
            fmt(H - MB + 5.0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            fmt(px),
            fmt(H - MB + 18.0),
            label
        ));
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let py = sy(fy);
        let label = match kind {
            PlotKind::LogLog => fmt_tick(fy.exp()),
            PlotKind::Linear => fmt_tick(fy),
        };
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n",
            fmt(ML - 5.0),
            fmt(py),
            fmt(ML)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            fmt(ML - 8.0),
            fmt(py + 4.0),
            label
        ));
    }
    // axis labels
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        fmt((ML + W - MR) / 2.0),
        fmt(H - 10.0),
        x_label
    ));
    out.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        fmt((MT + H - MB) / 2.0),
        fmt((MT + H - MB) / 2.0),
        y_label
    ));
    // data polyline and markers
    let pts: Vec<String> = txs
        .iter()
        .zip(&tys)
        .map(|(x, y)| format!("{},{}", fmt(sx(*x)), fmt(sy(*y))))
        .collect();
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
        pts.join(" ")
    ));
    for (x, y) in txs.iter().zip(&tys) {
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"steelblue\"/>\n",
            fmt(sx(*x)),
            fmt(sy(*y))
        ));
    }
    // fitted overlay (log-log only: a straight line with the slope label)
    if let (Some(f), PlotKind::LogLog) = (fit, &kind) {
        let fy0 = f.intercept + f.exponent * x0;
        let fy1 = f.intercept + f.exponent * x1;
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"crimson\" stroke-dasharray=\"6 3\"/>\n",
            fmt(sx(x0)),
            fmt(sy(fy0)),
            fmt(sx(x1)),
            fmt(sy(fy1))
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"crimson\">slope {:.2}</text>\n",
            fmt(ML + 12.0),
            fmt(MT + 16.0),
            f.exponent
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in v {
        lo = lo.min(*x);
        hi = hi.max(*x);
    }
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    (lo, hi)
}
