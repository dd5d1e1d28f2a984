use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Config, HarnessError};
use crate::road::{build_road, RoadParams, RoadSpec};
use crate::search::{FailureArchive, RunReport, TestRecord};
use crate::simulator::FAIL_THRESHOLD;

pub const SUMMARY_HEADER: &str = "Run,T,P,I,F,AvgFrechet,MaxFrechet";

/// Summary counts plus Fréchet statistics over failing centerlines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    #[serde(rename = "T")]
    pub total: usize,
    #[serde(rename = "P")]
    pub passed: usize,
    #[serde(rename = "I")]
    pub invalid: usize,
    #[serde(rename = "F")]
    pub failed: usize,
    /// `None` (written "n/a") below two failures.
    #[serde(with = "not_applicable")]
    pub avg_frechet: Option<f64>,
    #[serde(with = "not_applicable")]
    pub max_frechet: Option<f64>,
}

mod not_applicable {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Cell {
        Value(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_str("n/a"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Cell::deserialize(d)? {
            Cell::Value(x) => Ok(Some(x)),
            Cell::Text(t) if t == "n/a" => Ok(None),
            Cell::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"n/a\", got `{t}`"
            ))),
        }
    }
}

impl Aggregates {
    pub fn compute(run: &RunReport, road: &RoadParams) -> Result<Self, HarnessError> {
        let c = run.counts();
        let mut archive = FailureArchive::new();
        for rec in run.failures() {
            let spec = build_road(&rec.genotype, road)
                .map_err(|e| HarnessError::Archive(format!("test {}: {e}", rec.id)))?;
            archive.push(rec.id, spec.centerline);
        }
        Ok(Self {
            total: c.total,
            passed: c.passed,
            invalid: c.invalid,
            failed: c.failed,
            avg_frechet: archive.avg(),
            max_frechet: archive.max(),
        })
    }

    pub fn csv_row(&self, run: usize) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), format_meters);
        format!(
            "{run},{},{},{},{},{},{}",
            self.total,
            self.passed,
            self.invalid,
            self.failed,
            cell(self.avg_frechet),
            cell(self.max_frechet)
        )
    }
}

/// Two decimals with trailing zeros dropped: 109.0 -> "109", 84.50 -> "84.5".
pub fn format_meters(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Comma-separated table, one row per run, numbered from 1.
pub fn summary_table(runs: &[Aggregates]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for (i, a) in runs.iter().enumerate() {
        out.push_str(&a.csv_row(i + 1));
        out.push('\n');
    }
    out
}

/// A finished run with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Archive {
    pub version: String,
    pub seed: u64,
    pub config: Config,
    pub aggregates: Aggregates,
    pub run: RunReport,
}

impl Archive {
    pub fn new(config: Config, run: RunReport) -> Result<Self, HarnessError> {
        let aggregates = Aggregates::compute(&run, &config.road)?;
        Ok(Self {
            version: crate::VERSION.to_string(),
            seed: config.search.seed,
            config,
            aggregates,
            run,
        })
    }

    pub fn record(&self, id: u64) -> Option<&TestRecord> {
        self.run.records.iter().find(|r| r.id == id)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| HarnessError::Archive(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("archive serializes")
    }
}

fn oob_color(oob: f64) -> String {
    let hue = 120.0 * (1.0 - (oob / 100.0).clamp(0.0, 1.0));
    format!("hsl({hue:.0},85%,40%)")
}

fn points_attr(pts: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut s = String::new();
    for (x, y) in pts {
        let _ = write!(s, "{x:.2},{y:.2} ");
    }
    s.pop();
    s
}

/// Top-down drawing at one pixel per meter: lane boundaries, centerline and
/// the driven trajectory colored from green (on the lane) to red (off it).
/// Stretches above the failure threshold get a wide red underlay.
pub fn render_svg(road: &RoadSpec, trace: &[[f64; 3]], title: &str) -> String {
    let size = road.params.map_size;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(
        s,
        r##"<rect width="{size}" height="{size}" fill="#f5f5f0"/>"##
    );
    let _ = writeln!(s, r#"<g transform="matrix(1 0 0 -1 0 {size})">"#);

    let xy = |p: &crate::geometry::Point2D| (p.x, p.y);
    let surface = road
        .left_boundary
        .points()
        .iter()
        .map(xy)
        .chain(road.right_boundary.points().iter().rev().map(xy));
    let _ = writeln!(
        s,
        r##"<polygon points="{}" fill="#9a9a9a"/>"##,
        points_attr(surface)
    );
    for b in [&road.left_boundary, &road.right_boundary] {
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#202020" stroke-width="0.4"/>"##,
            points_attr(b.points().iter().map(xy))
        );
    }
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#ffd21f" stroke-width="0.3" stroke-dasharray="2 2"/>"##,
        points_attr(road.centerline.points().iter().map(xy))
    );

    for w in trace.windows(2) {
        if w[1][2] > FAIL_THRESHOLD {
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#ff0000" stroke-opacity="0.35" stroke-width="4" stroke-linecap="round"/>"##,
                w[0][0], w[0][1], w[1][0], w[1][1]
            );
        }
    }
    for w in trace.windows(2) {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="0.6"/>"#,
            w[0][0],
            w[0][1],
            w[1][0],
            w[1][1],
            oob_color(w[1][2])
        );
    }
    if let Some(first) = trace.first() {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="1.2" fill="#1060ff"/>"##,
            first[0], first[1]
        );
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        r#"<text x="4" y="12" font-family="sans-serif" font-size="9">{}</text>"#,
        escape(title)
    );
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn write(path: &Path, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(|source| {
        if !written.is_empty() {
            log::warn!(
                "output is partial: {} file(s) written before the error",
                written.len()
            );
        }
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    })?;
    written.push(path.to_path_buf());
    Ok(())
}

fn create_dir(path: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn render_into(
    archive: &Archive,
    dir: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<(), HarnessError> {
    let failures: Vec<&TestRecord> = archive.run.failures().collect();
    if failures.is_empty() {
        return Ok(());
    }
    create_dir(dir)?;
    for rec in failures {
        let road = build_road(&rec.genotype, &archive.config.road)
            .map_err(|e| HarnessError::Archive(format!("test {}: {e}", rec.id)))?;
        let title = format!("test {}: max OOB {}%", rec.id, format_meters(rec.fitness));
        write(
            &dir.join(format!("test_{}.svg", rec.id)),
            &render_svg(&road, &rec.trace, &title),
            written,
        )?;
    }
    Ok(())
}

/// Draws every failing test of an archive into `dir`.
pub fn render_failures(
    archive: &Archive,
    dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>, HarnessError> {
    let mut written = Vec::new();
    render_into(archive, dir.as_ref(), &mut written)?;
    Ok(written)
}

/// Writes `archive.json`, `summary.csv` and `failures/test_<id>.svg` under
/// `out_dir`, returning the paths written.
pub fn write_report(
    archive: &Archive,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>, HarnessError> {
    let out = out_dir.as_ref();
    create_dir(out)?;
    let mut written = Vec::new();
    write(&out.join("archive.json"), &archive.to_json(), &mut written)?;
    write(
        &out.join("summary.csv"),
        &summary_table(&[archive.aggregates]),
        &mut written,
    )?;
    render_into(archive, &out.join("failures"), &mut written)?;
    Ok(written)
}

/// Writes a combined table for several runs.
pub fn write_summary(runs: &[Aggregates], path: impl AsRef<Path>) -> Result<(), HarnessError> {
    write(path.as_ref(), &summary_table(runs), &mut Vec::new())
}
