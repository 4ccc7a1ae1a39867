//! Result records, manifests, CSV series and SVG plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub claim_id: String,
    pub lhs: f64,
    pub rhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub abs_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rel_err: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_samples: Option<u64>,
    pub seed: u64,
    pub n_cut: Option<usize>,
    #[serde(default)]
    pub details: BTreeMap<String, serde_json::Value>,
}

impl ClaimResult {
    pub fn new(claim_id: &str, lhs: f64, seed: u64) -> Self {
        ClaimResult {
            claim_id: claim_id.to_string(),
            lhs,
            rhs: None,
            abs_err: None,
            rel_err: None,
            tolerance: None,
            pass: true,
            stderr: None,
            n_samples: None,
            seed,
            n_cut: None,
            details: BTreeMap::new(),
        }
    }

    pub fn detail(mut self, key: &str, value: impl Serialize) -> Self {
        self.details.insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
        self
    }
}

/// Tabular series with the first column as abscissa.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub log_y: bool,
    /// Vertical marker drawn at this abscissa.
    pub x_marker: Option<(String, f64)>,
}

impl Series {
    pub fn new(title: &str, columns: &[&str]) -> Self {
        Series {
            title: title.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            log_y: false,
            x_marker: None,
        }
    }
}

pub fn write_csv(series: &Series, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    w.write_record(&series.columns).map_err(io)?;
    for row in &series.rows {
        w.write_record(row.iter().map(|v| format!("{v:?}"))).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Static line/scatter rendering of the CSV, one polyline per y column.
pub fn render_svg(series: &Series) -> String {
    let ty = |v: f64| if series.log_y { v.abs().log10() } else { v };
    let mut pts: Vec<Vec<(f64, f64)>> = vec![Vec::new(); series.columns.len().saturating_sub(1)];
    for row in &series.rows {
        for (j, col) in pts.iter_mut().enumerate() {
            let (x, y) = (row[0], ty(row[j + 1]));
            if x.is_finite() && y.is_finite() {
                col.push((x, y));
            }
        }
    }
    let all: Vec<&(f64, f64)> = pts.iter().flatten().collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&series.title)
    );
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN / 2.0, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(svg, r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#);
    if all.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">no data</text>"#,
            WIDTH / 2.0,
            HEIGHT / 2.0
        );
        svg.push_str("</svg>\n");
        return svg;
    }
    let range = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let marker_x = series.x_marker.as_ref().map(|m| m.1).filter(|v| v.is_finite());
    let (xl, xh) = range(&mut all.iter().map(|p| p.0).chain(marker_x));
    let (yl, yh) = range(&mut all.iter().map(|p| p.1));
    let sx = |x: f64| x0 + (x - xl) / (xh - xl) * (x1 - x0);
    let sy = |y: f64| y0 - (y - yl) / (yh - yl) * (y0 - y1);
    let ylabel = |v: f64| if series.log_y { format!("1e{v:.1}") } else { format!("{v:.4}") };
    let _ = writeln!(
        svg,
        r#"<text x="{x0}" y="{}" font-family="sans-serif" font-size="11">{xl:.4}</text>
<text x="{x1}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{xh:.4}</text>
<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>
<text x="4" y="{y0}" font-family="sans-serif" font-size="11">{}</text>
<text x="4" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
        y0 + 16.0,
        y0 + 16.0,
        (x0 + x1) / 2.0,
        HEIGHT - 8.0,
        escape(&series.columns[0]),
        ylabel(yl),
        y1 + 4.0,
        ylabel(yh)
    );
    for (j, col) in pts.iter().enumerate() {
        let color = COLORS[j % COLORS.len()];
        let path: Vec<String> = col.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(svg, r#"<polyline points="{}" stroke="{color}" fill="none"/>"#, path.join(" "));
        for &(x, y) in col {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            x1,
            y1 + 14.0 * (j as f64 + 1.0),
            escape(&series.columns[j + 1])
        );
    }
    if let (Some((label, _)), Some(mx)) = (&series.x_marker, marker_x) {
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{y1}" x2="{0:.2}" y2="{y0}" stroke="gray" stroke-dasharray="4 3"/>
<text x="{0:.2}" y="{1}" text-anchor="middle" font-family="sans-serif" font-size="11">{2}</text>"#,
            sx(mx),
            y1 - 6.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Output files of one run, all named after the claim.
pub struct RunOutput {
    pub dir: PathBuf,
    pub name: String,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    tool_version: &'a str,
    library_version: &'a str,
    subcommand: &'a str,
    config: &'a BTreeMap<String, String>,
    outputs: &'a [String],
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl RunOutput {
    pub fn new(dir: &Path, name: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(RunOutput { dir: dir.to_path_buf(), name: name.to_string(), files: Vec::new() })
    }

    fn write(&mut self, suffix: &str, text: &str) -> Result<(), CliError> {
        let file = format!("{}{suffix}", self.name);
        let path = self.dir.join(&file);
        std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        self.files.push(file);
        Ok(())
    }

    pub fn result(&mut self, r: &ClaimResult) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(r).map_err(|e| CliError::Io(e.to_string()))?;
        self.write(".json", &(text + "\n"))
    }

    pub fn series(&mut self, s: &Series) -> Result<(), CliError> {
        let file = format!("{}.csv", self.name);
        write_csv(s, &self.dir.join(&file))?;
        self.files.push(file);
        self.write(".svg", &render_svg(s))
    }

    pub fn manifest(mut self, subcommand: &str, config: &BTreeMap<String, String>) -> Result<(), CliError> {
        let m = Manifest {
            tool: "segal",
            tool_version: env!("CARGO_PKG_VERSION"),
            library_version: segal_core::VERSION,
            subcommand,
            config,
            outputs: &self.files.clone(),
        };
        let text = serde_json::to_string_pretty(&m).map_err(|e| CliError::Io(e.to_string()))?;
        self.write(".manifest.json", &(text + "\n"))
    }
}
