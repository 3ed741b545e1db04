//! Minimal SVG charts. Every renderer takes CSV text, so a figure is a pure
//! function of the data file it shows.

use std::fmt::Write as _;

use crate::error::CliError;
use crate::output::Table;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    logx: bool,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone, logx: bool, equal: bool) -> Self {
        let tx = |x: f64| if logx { x.ln() } else { x };
        let (mut x0, mut x1) = bounds(xs.map(tx));
        let (mut y0, mut y1) = bounds(ys);
        if equal {
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            let aspect = (W - 2.0 * MARGIN) / (H - 2.0 * MARGIN);
            let half_h = (0.5 * (y1 - y0)).max(0.5 * (x1 - x0) / aspect);
            (x0, x1) = (cx - half_h * aspect, cx + half_h * aspect);
            (y0, y1) = (cy - half_h, cy + half_h);
        }
        Frame { x0, x1, y0, y1, logx }
    }

    fn px(&self, x: f64) -> f64 {
        let x = if self.logx { x.ln() } else { x };
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

fn open(title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
    s
}

fn axes(s: &mut String, f: &Frame) {
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let xv = if f.logx { xv.exp() } else { xv };
        let yv = f.y0 + t * (f.y1 - f.y0);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            f.px(xv),
            H - MARGIN + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            f.py(yv) + 4.0,
            tick(yv)
        );
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn legend(s: &mut String, names: &[String]) {
    for (i, name) in names.iter().enumerate() {
        let y = MARGIN + 14.0 + 16.0 * i as f64;
        let x = W - MARGIN - 150.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x + 18.0,
            PALETTE[i % PALETTE.len()],
            x + 24.0,
            y + 4.0,
            escape(name)
        );
    }
}

/// Scatter of columns `x` and `y` of `points_csv`, colored by the integer
/// column `label` of `labels_csv`.
pub fn labeled_scatter(points_csv: &str, labels_csv: &str, label: &str, title: &str) -> Result<String, CliError> {
    let pts = Table::parse(points_csv)?;
    let xs = pts.column("x1")?;
    let ys = pts.column("x2")?;
    let labels = Table::parse(labels_csv)?.column(label)?;
    if labels.len() != xs.len() {
        return Err(CliError::Config(format!(
            "{} labels for {} points",
            labels.len(),
            xs.len()
        )));
    }
    let f = Frame::fit(xs.iter().copied(), ys.iter().copied(), false, true);
    let mut s = open(title, "x1", "x2");
    axes(&mut s, &f);
    for ((x, y), l) in xs.iter().zip(&ys).zip(&labels) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{}"/>"#,
            f.px(*x),
            f.py(*y),
            PALETTE[(*l as usize) % PALETTE.len()]
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Line chart of several `y` columns against `x`. With `group` set, rows are
/// split into one curve per distinct value of that column.
pub fn line_chart(
    csv: &str,
    x: &str,
    ys: &[&str],
    group: Option<&str>,
    title: &str,
    ylabel: &str,
    logx: bool,
) -> Result<String, CliError> {
    let t = Table::parse(csv)?;
    let xv = t.column(x)?;
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for y in ys {
        let yv = t.column(y)?;
        match group {
            None => series.push((y.to_string(), xv.iter().copied().zip(yv).collect())),
            Some(g) => {
                let gv = t.column(g)?;
                let mut keys: Vec<f64> = Vec::new();
                for v in &gv {
                    if !keys.contains(v) {
                        keys.push(*v);
                    }
                }
                for key in keys {
                    let pts = (0..xv.len()).filter(|&i| gv[i] == key).map(|i| (xv[i], yv[i])).collect();
                    series.push((format!("{y} ({g}={key})"), pts));
                }
            }
        }
    }
    let f = Frame::fit(
        series.iter().flat_map(|s| s.1.iter().map(|p| p.0)).collect::<Vec<_>>().into_iter(),
        series.iter().flat_map(|s| s.1.iter().map(|p| p.1)).collect::<Vec<_>>().into_iter(),
        logx,
        false,
    );
    let mut s = open(title, x, ylabel);
    axes(&mut s, &f);
    for (i, (_, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|(a, b)| format!("{:.2},{:.2}", f.px(*a), f.py(*b))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for (a, b) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, f.px(*a), f.py(*b));
        }
    }
    legend(&mut s, &series.iter().map(|s| s.0.clone()).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    Ok(s)
}

/// Closed curves from a CSV with columns `T,x1,x2`, one curve per value of `T`.
pub fn polylines(csv: &str, title: &str) -> Result<String, CliError> {
    let t = Table::parse(csv)?;
    let (ts, xs, ys) = (t.column("T")?, t.column("x1")?, t.column("x2")?);
    let f = Frame::fit(xs.iter().copied(), ys.iter().copied(), false, true);
    let mut s = open(title, "x1", "x2");
    axes(&mut s, &f);
    let mut names = Vec::new();
    let mut start = 0;
    while start < ts.len() {
        let end = (start..ts.len()).find(|&i| ts[i] != ts[start]).unwrap_or(ts.len());
        let color = PALETTE[names.len() % PALETTE.len()];
        let path: Vec<String> = (start..end).map(|i| format!("{:.2},{:.2}", f.px(xs[i]), f.py(ys[i]))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        names.push(format!("T = {}", ts[start]));
        start = end;
    }
    legend(&mut s, &names);
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_are_deterministic_and_well_formed() {
        let pts = "x1,x2\n0,0\n1,1\n0.5,0.2\n";
        let labels = "a\n0\n1\n1\n";
        let a = labeled_scatter(pts, labels, "a", "t").unwrap();
        assert_eq!(a, labeled_scatter(pts, labels, "a", "t").unwrap());
        assert_eq!(a.matches("<circle").count(), 3);
        assert!(a.trim_end().ends_with("</svg>"));

        let lines = "n,g,y\n1,0,1\n2,0,2\n1,1,3\n2,1,1\n";
        let c = line_chart(lines, "n", &["y"], Some("g"), "t", "y", true).unwrap();
        assert_eq!(c.matches("<polyline").count(), 2);

        let ball = "T,t,x1,x2\n0.1,0.1,1,0\n0.1,0.1,0,1\n0.2,0.2,2,0\n0.2,0.2,0,2\n";
        assert_eq!(polylines(ball, "b").unwrap().matches("<polyline").count(), 2);
    }

    #[test]
    fn mismatched_inputs_are_errors() {
        assert!(labeled_scatter("x1,x2\n0,0\n", "a\n0\n1\n", "a", "t").is_err());
        assert!(line_chart("n,y\n1,2\n", "n", &["z"], None, "t", "y", false).is_err());
    }
}
