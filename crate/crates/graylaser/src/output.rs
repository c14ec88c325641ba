//! Output emission: CSV files (the interface of record), simple SVG
//! polyline plots (presentation aid), and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Round-trip-exact float formatting for CSV cells: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a CSV file with a mandatory header row, `\n` line endings, and
/// 17-significant-digit numeric cells.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// One labeled curve for [`write_svg_plot`].
pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
}

const SVG_COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// Minimal polyline plot: axes, tick labels at the corners, one polyline per
/// series with a small legend. CSV remains the interface of record.
pub fn write_svg_plot(
    path: &Path,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series<'_>],
) -> Result<()> {
    let (w, h) = (720.0, 480.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in s.points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if !xmin.is_finite() || xmax <= xmin {
        xmax = xmin + 1.0;
    }
    if !ymin.is_finite() || ymax <= ymin {
        ymax = ymin + 1.0;
    }
    let px = |x: f64| ml + (x - xmin) / (xmax - xmin) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        w / 2.0,
        title
    );
    // Axes.
    let _ = write!(
        svg,
        "<line x1=\"{ml}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{0}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        w / 2.0,
        h - 12.0,
        xlabel
    );
    let _ = write!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        h / 2.0,
        h / 2.0,
        ylabel
    );
    for (v, anchor, x, y) in [
        (xmin, "start", ml, h - mb + 18.0),
        (xmax, "end", w - mr, h - mb + 18.0),
    ] {
        let _ = write!(
            svg,
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"{anchor}\">{v:.4}</text>\n"
        );
    }
    for (v, y) in [(ymin, h - mb), (ymax, mt + 4.0)] {
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{y}\" text-anchor=\"end\">{v:.4}</text>\n",
            ml - 6.0
        );
    }
    for (i, s) in series.iter().enumerate() {
        let color = SVG_COLORS[i % SVG_COLORS.len()];
        let mut pts = String::new();
        for &(x, y) in s.points {
            let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = write!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            pts.trim_end()
        );
        let ly = mt + 16.0 * i as f64 + 8.0;
        let _ = write!(
            svg,
            "<line x1=\"{0}\" y1=\"{ly}\" x2=\"{1}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
             <text x=\"{2}\" y=\"{3}\" font-size=\"12\">{4}</text>\n",
            w - mr - 150.0,
            w - mr - 125.0,
            w - mr - 118.0,
            ly + 4.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(|e| io_err(path, e))
}

/// Accumulates `key: value` manifest lines, including invariant-check
/// results, and writes `manifest.txt` exactly once.
#[derive(Debug, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
    checks: Vec<(String, bool)>,
    scalars: Vec<(String, f64)>,
}

impl Manifest {
    pub fn new() -> Self {
        Manifest::default()
    }

    pub fn entry(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Record a named invariant check.
    pub fn check(&mut self, name: &str, pass: bool) {
        self.checks.push((name.to_string(), pass));
    }

    /// Record a scalar diagnostic (these also feed sweep summaries).
    pub fn scalar(&mut self, name: &str, value: f64) {
        self.scalars.push((name.to_string(), value));
    }

    pub fn checks(&self) -> &[(String, bool)] {
        &self.checks
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|(_, p)| *p)
    }

    pub fn scalars(&self) -> &[(String, f64)] {
        &self.scalars
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.txt");
        let mut text = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(text, "{k}: {v}");
        }
        for (k, v) in &self.scalars {
            let _ = writeln!(text, "diag.{k}: {}", fmt_f64(*v));
        }
        for (k, p) in &self.checks {
            let _ = writeln!(text, "check.{k}: {}", if *p { "pass" } else { "fail" });
        }
        let mut f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| io_err(&path, e))
    }
}
