//! Output plumbing shared by the CLI: run metadata, CSV and JSON assembly,
//! a small line-chart SVG renderer for sweep results, and atomic file
//! writes (temp file + rename, so readers never observe partial output).

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::mean_mechanisms::SweepRow;

/// Provenance embedded in every output: crate version, subcommand, seed,
/// and the full flag set of the run.
#[derive(Debug, Clone)]
pub struct Meta {
    command: String,
    seed: Option<u64>,
    flags: Vec<(String, String)>,
}

impl Meta {
    pub fn new(command: &str) -> Self {
        Meta { command: command.to_string(), seed: None, flags: Vec::new() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn flag(mut self, name: &str, value: impl ToString) -> Self {
        self.flags.push((name.to_string(), value.to_string()));
        self
    }

    /// `# key: value` comment lines placed above a CSV header row.
    pub fn csv_comments(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# version: {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# command: {}\n", self.command));
        if let Some(seed) = self.seed {
            out.push_str(&format!("# seed: {seed}\n"));
        }
        for (name, value) in &self.flags {
            out.push_str(&format!("# {name}: {value}\n"));
        }
        out
    }

    /// The same provenance as a JSON object, for embedding under `"meta"`.
    pub fn json(&self) -> Value {
        let flags: serde_json::Map<String, Value> = self
            .flags
            .iter()
            .map(|(name, value)| (name.clone(), Value::String(value.clone())))
            .collect();
        let mut obj = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "flags": flags,
        });
        if let Some(seed) = self.seed {
            obj["seed"] = json!(seed);
        }
        obj
    }
}

/// Writes `contents` to `path` via a sibling temp file and rename, so the
/// destination is either absent, old, or complete — never truncated.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source| Error::Io { path: path.display().to_string(), source };
    let tmp = path.with_extension({
        let mut ext = path
            .extension()
            .map(|e| e.to_string_lossy().into_owned())
            .unwrap_or_default();
        ext.push_str(".partial");
        ext
    });
    fs::write(&tmp, contents).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

/// Assembles a CSV document: metadata comments, one exact header row, then
/// pre-rendered data rows.
pub fn csv_document(meta: &Meta, header: &str, rows: &[String]) -> String {
    let mut out = meta.csv_comments();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out
}

pub fn sweep_csv(meta: &Meta, rows: &[SweepRow]) -> String {
    let rendered: Vec<String> = rows
        .iter()
        .map(|r| format!("{},{},{},{}", r.n, r.sd_mu, r.sd_mss, r.ratio))
        .collect();
    csv_document(meta, "n,sd_mu,sd_mss,ratio", &rendered)
}

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 230.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 34.0;

struct Panel {
    top: f64,
    title: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
    log_y: bool,
}

impl Panel {
    fn x_px(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        MARGIN_L + (x - lo) / (hi - lo) * (PANEL_W - MARGIN_L - MARGIN_R)
    }

    fn y_px(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        let t = if self.log_y {
            (y.ln() - lo.ln()) / (hi.ln() - lo.ln())
        } else {
            (y - lo) / (hi - lo)
        };
        self.top + MARGIN_T + (1.0 - t) * (PANEL_H - MARGIN_T - MARGIN_B)
    }

    fn polyline(&self, pts: impl Iterator<Item = (f64, f64)>, color: &str) -> String {
        let coords: Vec<String> = pts
            .map(|(x, y)| format!("{:.2},{:.2}", self.x_px(x), self.y_px(y)))
            .collect();
        format!(
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#,
            coords.join(" ")
        )
    }

    fn frame(&self, x_ticks: &[f64], y_ticks: &[(f64, String)]) -> String {
        let mut s = String::new();
        let (x0, x1) = (self.x_px(self.x_range.0), self.x_px(self.x_range.1));
        let (y0, y1) = (self.y_px(self.y_range.0), self.y_px(self.y_range.1));
        s.push_str(&format!(
            r#"<text x="{:.2}" y="{:.2}" font-size="13" font-family="sans-serif" font-weight="bold">{}</text>"#,
            MARGIN_L,
            self.top + 18.0,
            self.title
        ));
        s.push('\n');
        s.push_str(&format!(
            r##"<path d="M{x0:.2} {y1:.2} L{x0:.2} {y0:.2} L{x1:.2} {y0:.2}" fill="none" stroke="#333" stroke-width="1"/>"##
        ));
        s.push('\n');
        for &x in x_ticks {
            let px = self.x_px(x);
            s.push_str(&format!(
                r##"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="#333" stroke-width="1"/>"##,
                y0 + 4.0
            ));
            s.push_str(&format!(
                r#"<text x="{px:.2}" y="{:.2}" font-size="11" font-family="sans-serif" text-anchor="middle">{x}</text>"#,
                y0 + 16.0
            ));
            s.push('\n');
        }
        for (y, label) in y_ticks {
            let py = self.y_px(*y);
            s.push_str(&format!(
                r##"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="#333" stroke-width="1"/>"##,
                x0 - 4.0
            ));
            s.push_str(&format!(
                r#"<text x="{:.2}" y="{:.2}" font-size="11" font-family="sans-serif" text-anchor="end">{label}</text>"#,
                x0 - 7.0,
                py + 3.5
            ));
            s.push('\n');
        }
        s
    }
}

fn decade_ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    let mut ticks = Vec::new();
    let mut e = lo.log10().floor() as i32;
    while 10f64.powi(e) <= hi * 1.0001 {
        let v = 10f64.powi(e);
        if v >= lo * 0.9999 {
            ticks.push((v, format!("1e{e}")));
        }
        e += 1;
    }
    ticks
}

/// Renders the sweep as a three-panel line chart: both SDs over the full
/// grid (log y), the small-n detail, and the SD ratio with a unit
/// reference line.
pub fn sweep_svg(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Invalid("cannot plot an empty sweep".to_string()));
    }
    let n_lo = rows.first().unwrap().n as f64;
    let n_hi = rows.last().unwrap().n as f64;
    let sd_min = rows
        .iter()
        .flat_map(|r| [r.sd_mu, r.sd_mss])
        .fold(f64::INFINITY, f64::min);
    let sd_max = rows
        .iter()
        .flat_map(|r| [r.sd_mu, r.sd_mss])
        .fold(0.0f64, f64::max);

    let mu_color = "#1f77b4";
    let mss_color = "#d62728";
    let mut body = String::new();

    let p1 = Panel {
        top: 0.0,
        title: "Release SD vs dataset size".to_string(),
        x_range: (n_lo, n_hi),
        y_range: (sd_min * 0.8, sd_max * 1.2),
        log_y: true,
    };
    body.push_str(&p1.frame(
        &x_ticks(n_lo, n_hi),
        &decade_ticks(sd_min * 0.8, sd_max * 1.2),
    ));
    body.push_str(&p1.polyline(rows.iter().map(|r| (r.n as f64, r.sd_mu)), mu_color));
    body.push('\n');
    body.push_str(&p1.polyline(rows.iter().map(|r| (r.n as f64, r.sd_mss)), mss_color));
    body.push('\n');
    body.push_str(&format!(
        r#"<text x="{:.2}" y="{:.2}" font-size="11" font-family="sans-serif" fill="{mu_color}">unbiased (M_U)</text>"#,
        PANEL_W - 150.0,
        42.0
    ));
    body.push_str(&format!(
        r#"<text x="{:.2}" y="{:.2}" font-size="11" font-family="sans-serif" fill="{mss_color}">smooth sensitivity (M_SS)</text>"#,
        PANEL_W - 150.0,
        56.0
    ));
    body.push('\n');

    let small: Vec<&SweepRow> = rows.iter().filter(|r| r.n as f64 <= n_lo + 29.0).collect();
    let small_hi = small
        .iter()
        .flat_map(|r| [r.sd_mu, r.sd_mss])
        .fold(0.0f64, f64::max);
    let p2 = Panel {
        top: PANEL_H,
        title: "Small-n detail".to_string(),
        x_range: (n_lo, small.last().map(|r| r.n as f64).unwrap_or(n_hi)),
        y_range: (0.0, small_hi * 1.1),
        log_y: false,
    };
    body.push_str(&p2.frame(
        &x_ticks(p2.x_range.0, p2.x_range.1),
        &linear_ticks(small_hi * 1.1),
    ));
    body.push_str(&p2.polyline(small.iter().map(|r| (r.n as f64, r.sd_mu)), mu_color));
    body.push('\n');
    body.push_str(&p2.polyline(small.iter().map(|r| (r.n as f64, r.sd_mss)), mss_color));
    body.push('\n');

    let ratio_hi = rows.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
    let p3 = Panel {
        top: 2.0 * PANEL_H,
        title: "SD ratio (smooth sensitivity / unbiased)".to_string(),
        x_range: (n_lo, n_hi),
        y_range: (0.0, ratio_hi * 1.1),
        log_y: false,
    };
    body.push_str(&p3.frame(&x_ticks(n_lo, n_hi), &linear_ticks(ratio_hi * 1.1)));
    let unit_y = p3.y_px(1.0);
    body.push_str(&format!(
        r##"<line x1="{:.2}" y1="{unit_y:.2}" x2="{:.2}" y2="{unit_y:.2}" stroke="#999" stroke-width="1" stroke-dasharray="4,3"/>"##,
        p3.x_px(n_lo),
        p3.x_px(n_hi)
    ));
    body.push('\n');
    body.push_str(&p3.polyline(rows.iter().map(|r| (r.n as f64, r.ratio)), "#2ca02c"));
    body.push('\n');

    Ok(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PANEL_W}\" height=\"{}\" viewBox=\"0 0 {PANEL_W} {}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n",
        3.0 * PANEL_H,
        3.0 * PANEL_H
    ))
}

fn x_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let step = if span <= 40.0 {
        5.0
    } else if span <= 120.0 {
        20.0
    } else {
        50.0
    };
    let mut ticks = vec![lo];
    let mut t = (lo / step).ceil() * step;
    if t == lo {
        t += step;
    }
    while t <= hi {
        ticks.push(t);
        t += step;
    }
    ticks
}

fn linear_ticks(hi: f64) -> Vec<(f64, String)> {
    let raw = hi / 4.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(mag);
    let mut ticks = Vec::new();
    let mut t = 0.0;
    while t <= hi * 1.0001 {
        ticks.push((t, format!("{t}")));
        t += step;
    }
    ticks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<SweepRow> {
        (1..=100u64)
            .map(|n| {
                let sd_mu = 17.0 / n as f64;
                let sd_mss = 6.0 * ((-(n as f64 - 1.0) / 24.0).exp()).max(1.0 / n as f64);
                SweepRow { n, sd_mu, sd_mss, ratio: sd_mss / sd_mu }
            })
            .collect()
    }

    #[test]
    fn csv_has_comments_then_exact_header() {
        let meta = Meta::new("mean-sweep").with_seed(42).flag("m", 0.5);
        let doc = sweep_csv(&meta, &sample_rows());
        let mut lines = doc.lines();
        let mut line = lines.next().unwrap();
        assert!(line.starts_with("# version: "));
        while line.starts_with('#') {
            line = lines.next().unwrap();
        }
        assert_eq!(line, "n,sd_mu,sd_mss,ratio");
        assert_eq!(lines.clone().count(), 100);
        assert!(doc.contains("# seed: 42"));
        assert!(doc.contains("# m: 0.5"));
        let first_row = lines.next().unwrap();
        assert!(first_row.starts_with("1,17,"));
    }

    #[test]
    fn meta_json_carries_provenance() {
        let meta = Meta::new("optimize").with_seed(7).flag("k", 10).flag("L", 1.0);
        let v = meta.json();
        assert_eq!(v["command"], "optimize");
        assert_eq!(v["seed"], 7);
        assert_eq!(v["flags"]["k"], "10");
        assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn atomic_write_leaves_no_partials() {
        let dir = std::env::temp_dir().join("unbias-report-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.csv");
        write_atomic(&path, "n\n1\n").unwrap();
        write_atomic(&path, "n\n2\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "n\n2\n");
        assert!(
            std::fs::read_dir(&dir)
                .unwrap()
                .all(|e| !e.unwrap().file_name().to_string_lossy().contains("partial")),
            "temp file should be renamed away"
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn svg_renders_three_panels() {
        let svg = sweep_svg(&sample_rows()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 5, "2 + 2 + 1 series");
        assert!(svg.contains("M_SS"));
        // Deterministic: same rows, same bytes.
        assert_eq!(svg, sweep_svg(&sample_rows()).unwrap());
        assert!(sweep_svg(&[]).is_err());
    }
}
