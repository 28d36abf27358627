//! Design-space sweep records, summary statistics and report emission.
//!
//! One [`SweepRecord`] per (configuration, style) pair; an invalid
//! configuration only poisons its own row, recorded in the `error` column.
//! Summary statistics use the population (divide-by-N) standard deviation.
//! CSV column order is part of the contract:
//! `name,style,cells_proxy,logical_area,core_area,wirelength,wl_to_area,density[,error]`.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;

use crate::config::TileConfig;
use crate::phys::{self, Style, UnitAreaParams};

#[derive(Debug)]
pub enum ReportError {
    EmptyInput,
    Csv(String),
    BadField {
        line: usize,
        field: &'static str,
        value: String,
    },
}

impl fmt::Display for ReportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportError::EmptyInput => write!(f, "no usable records"),
            ReportError::Csv(msg) => write!(f, "malformed CSV: {msg}"),
            ReportError::BadField { line, field, value } => {
                write!(f, "malformed CSV: line {line}, field {field}: {value:?}")
            }
        }
    }
}

impl std::error::Error for ReportError {}

/// Metrics of one evaluated design point, or the error that prevented it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub name: String,
    pub style: String,
    /// Standard-cell-count stand-in: total block area over the latch-bit area.
    pub cells_proxy: f64,
    pub logical_area: f64,
    pub core_area: f64,
    pub wirelength: f64,
    pub wl_to_area: f64,
    pub density: f64,
    pub error: Option<String>,
}

impl SweepRecord {
    fn failed(name: &str, style: Style, error: String) -> Self {
        SweepRecord {
            name: name.to_string(),
            style: style.to_string(),
            cells_proxy: 0.0,
            logical_area: 0.0,
            core_area: 0.0,
            wirelength: 0.0,
            wl_to_area: 0.0,
            density: 0.0,
            error: Some(error),
        }
    }
}

/// Evaluates one configuration under one style.
pub fn evaluate_record(
    config: &TileConfig,
    params: &UnitAreaParams,
    style: Style,
) -> Result<SweepRecord, phys::PhysError> {
    let (_, metrics) = phys::evaluate(config, params, style)?;
    Ok(SweepRecord {
        name: config.name.clone(),
        style: style.to_string(),
        cells_proxy: metrics.logical_area / params.area_per_latch_bit,
        logical_area: metrics.logical_area,
        core_area: metrics.core_area,
        wirelength: metrics.total_wirelength,
        wl_to_area: metrics.wl_to_area_ratio,
        density: metrics.core_density,
        error: None,
    })
}

/// Evaluates every (configuration, style) pair independently. A failing
/// configuration yields a record carrying its error message; the other rows
/// are unaffected.
pub fn sweep(
    configs: &[TileConfig],
    styles: &[Style],
    params: &UnitAreaParams,
) -> Vec<SweepRecord> {
    let mut records = Vec::with_capacity(configs.len() * styles.len());
    for config in configs {
        for &style in styles {
            let report = config.validate();
            let record = if report.ok {
                match evaluate_record(config, params, style) {
                    Ok(r) => r,
                    Err(e) => SweepRecord::failed(&config.name, style, e.to_string()),
                }
            } else {
                SweepRecord::failed(&config.name, style, report.to_string())
            };
            records.push(record);
        }
    }
    records
}

/// Mean and population standard deviation of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricStats {
    pub mean: f64,
    pub pop_std: f64,
}

/// Population statistics: the divide-by-N convention.
pub fn mean_pop_std(values: &[f64]) -> Option<MetricStats> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some(MetricStats {
        mean,
        pop_std: var.sqrt(),
    })
}

/// Per-metric summary over the successful rows of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub count: usize,
    pub metrics: BTreeMap<String, MetricStats>,
}

pub fn summary_stats(records: &[SweepRecord]) -> Result<SummaryStats, ReportError> {
    let good: Vec<&SweepRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    if good.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    type Getter = fn(&SweepRecord) -> f64;
    let columns: [(&str, Getter); 6] = [
        ("cells_proxy", |r| r.cells_proxy),
        ("logical_area", |r| r.logical_area),
        ("core_area", |r| r.core_area),
        ("wirelength", |r| r.wirelength),
        ("wl_to_area", |r| r.wl_to_area),
        ("density", |r| r.density),
    ];
    let mut metrics = BTreeMap::new();
    for (name, get) in columns {
        let values: Vec<f64> = good.iter().map(|r| get(r)).collect();
        metrics.insert(name.to_string(), mean_pop_std(&values).unwrap());
    }
    Ok(SummaryStats {
        count: good.len(),
        metrics,
    })
}

pub const CSV_COLUMNS: [&str; 9] = [
    "name",
    "style",
    "cells_proxy",
    "logical_area",
    "core_area",
    "wirelength",
    "wl_to_area",
    "density",
    "error",
];

/// Serializes sweep rows in the fixed column order.
pub fn to_csv(records: &[SweepRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("csv header");
    for r in records {
        w.write_record([
            r.name.as_str(),
            r.style.as_str(),
            &r.cells_proxy.to_string(),
            &r.logical_area.to_string(),
            &r.core_area.to_string(),
            &r.wirelength.to_string(),
            &r.wl_to_area.to_string(),
            &r.density.to_string(),
            r.error.as_deref().unwrap_or(""),
        ])
        .expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
}

fn parse_field(s: &str, line: usize, field: &'static str) -> Result<f64, ReportError> {
    s.parse().map_err(|_| ReportError::BadField {
        line,
        field,
        value: s.to_string(),
    })
}

/// Parses CSV produced by [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<SweepRecord>, ReportError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    {
        let headers = reader
            .headers()
            .map_err(|e| ReportError::Csv(e.to_string()))?;
        let got: Vec<&str> = headers.iter().collect();
        if got != CSV_COLUMNS {
            return Err(ReportError::Csv(format!(
                "unexpected header {got:?}, expected {CSV_COLUMNS:?}"
            )));
        }
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| ReportError::Csv(e.to_string()))?;
        let line = i + 2;
        if row.len() != CSV_COLUMNS.len() {
            return Err(ReportError::Csv(format!(
                "line {line}: {} fields",
                row.len()
            )));
        }
        let error = row[8].trim();
        records.push(SweepRecord {
            name: row[0].to_string(),
            style: row[1].to_string(),
            cells_proxy: parse_field(&row[2], line, "cells_proxy")?,
            logical_area: parse_field(&row[3], line, "logical_area")?,
            core_area: parse_field(&row[4], line, "core_area")?,
            wirelength: parse_field(&row[5], line, "wirelength")?,
            wl_to_area: parse_field(&row[6], line, "wl_to_area")?,
            density: parse_field(&row[7], line, "density")?,
            error: if error.is_empty() {
                None
            } else {
                Some(error.to_string())
            },
        });
    }
    Ok(records)
}

/// JSON mirror of the CSV rows plus the summary statistics.
pub fn to_json(records: &[SweepRecord]) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        records: &'a [SweepRecord],
        stats: Option<SummaryStats>,
    }
    let doc = Doc {
        records,
        stats: summary_stats(records).ok(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("report json");
    text.push('\n');
    text
}

/// Ratio report between two evaluated design points.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub a: SweepRecord,
    pub b: SweepRecord,
    /// Normalized-wirelength penalty of `b` relative to `a`.
    pub wl_ratio_b_over_a: f64,
    /// Density advantage of `a` relative to `b`.
    pub density_ratio_a_over_b: f64,
}

pub fn compare(a: &SweepRecord, b: &SweepRecord) -> CompareReport {
    CompareReport {
        a: a.clone(),
        b: b.clone(),
        wl_ratio_b_over_a: b.wl_to_area / a.wl_to_area,
        density_ratio_a_over_b: a.density / b.density,
    }
}

// ---------------------------------------------------------------------------
// Trend chart
// ---------------------------------------------------------------------------

const CHART_W: f64 = 900.0;
const CHART_H: f64 = 520.0;
const ML: f64 = 80.0; // margins
const MR: f64 = 80.0;
const MT: f64 = 40.0;
const MB: f64 = 70.0;

fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if !(hi - lo).is_finite() || hi <= lo {
        return vec![lo];
    }
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

/// Dual-axis trend chart over a sweep: x is the standard-cell-count proxy,
/// the left axis carries normalized wirelength, the right axis density.
/// Rows with errors are skipped; an empty sweep is an error and nothing is
/// emitted.
pub fn trend_svg(records: &[SweepRecord]) -> Result<String, ReportError> {
    let mut rows: Vec<&SweepRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    if rows.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    rows.sort_by(|a, b| a.cells_proxy.total_cmp(&b.cells_proxy));

    let x_lo = rows
        .iter()
        .map(|r| r.cells_proxy)
        .fold(f64::INFINITY, f64::min);
    let x_hi = rows
        .iter()
        .map(|r| r.cells_proxy)
        .fold(f64::NEG_INFINITY, f64::max);
    let wl_hi = rows
        .iter()
        .map(|r| r.wl_to_area)
        .fold(f64::NEG_INFINITY, f64::max)
        * 1.1;
    let dens_hi = rows
        .iter()
        .map(|r| r.density)
        .fold(f64::NEG_INFINITY, f64::max)
        .min(1.0)
        * 1.15;
    let span = (x_hi - x_lo).max(1.0);
    let fx = |x: f64| ML + (x - x_lo) / span * (CHART_W - ML - MR);
    let fy_wl = |v: f64| CHART_H - MB - v / wl_hi * (CHART_H - MT - MB);
    let fy_d = |v: f64| CHART_H - MB - v / dens_hi * (CHART_H - MT - MB);

    let mut svg = String::new();
    write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CHART_W}" height="{CHART_H}" viewBox="0 0 {CHART_W} {CHART_H}">"#
    )
    .unwrap();
    write!(
        svg,
        r#"<rect width="{CHART_W}" height="{CHART_H}" fill="white"/>"#
    )
    .unwrap();
    // axes
    write!(
        svg,
        r##"<line x1="{ML}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#333"/>"##,
        CHART_H - MB,
        CHART_W - MR,
        CHART_H - MB
    )
    .unwrap();
    write!(
        svg,
        r##"<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{:.1}" stroke="#333"/>"##,
        CHART_H - MB
    )
    .unwrap();
    write!(
        svg,
        r##"<line x1="{:.1}" y1="{MT}" x2="{:.1}" y2="{:.1}" stroke="#333"/>"##,
        CHART_W - MR,
        CHART_W - MR,
        CHART_H - MB
    )
    .unwrap();
    for t in nice_ticks(x_lo, x_hi, 5) {
        write!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="11" text-anchor="middle">{:.0}k</text>"##,
            fx(t),
            CHART_H - MB + 18.0,
            t / 1000.0
        )
        .unwrap();
    }
    for t in nice_ticks(0.0, wl_hi, 5) {
        write!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="11" text-anchor="end" fill="#b03a2e">{:.0}</text>"##,
            ML - 6.0,
            fy_wl(t) + 4.0,
            t
        )
        .unwrap();
    }
    for t in nice_ticks(0.0, dens_hi, 5) {
        write!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="11" text-anchor="start" fill="#1f618d">{:.0}%</text>"##,
            CHART_W - MR + 6.0,
            fy_d(t) + 4.0,
            t * 100.0
        )
        .unwrap();
    }
    // series: wl-to-area (left axis) and density (right axis)
    for (color, fy, get) in [
        (
            "#b03a2e",
            &fy_wl as &dyn Fn(f64) -> f64,
            (|r: &SweepRecord| r.wl_to_area) as fn(&SweepRecord) -> f64,
        ),
        (
            "#1f618d",
            &fy_d as &dyn Fn(f64) -> f64,
            (|r: &SweepRecord| r.density) as fn(&SweepRecord) -> f64,
        ),
    ] {
        let mut path = String::new();
        for (i, r) in rows.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            write!(path, "{cmd}{:.1} {:.1} ", fx(r.cells_proxy), fy(get(r))).unwrap();
        }
        write!(
            svg,
            r#"<path d="{}" stroke="{color}" stroke-width="2" fill="none"/>"#,
            path.trim()
        )
        .unwrap();
        for r in &rows {
            write!(
                svg,
                r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{color}"/>"#,
                fx(r.cells_proxy),
                fy(get(r))
            )
            .unwrap();
            write!(
                svg,
                r##"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="10" fill="#444" text-anchor="middle">{}</text>"##,
                fx(r.cells_proxy),
                fy(get(r)) - 8.0,
                r.name
            )
            .unwrap();
        }
    }
    // axis titles and legend
    write!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="12" text-anchor="middle">standard-cell-count proxy</text>"##,
        (ML + CHART_W - MR) / 2.0,
        CHART_H - 20.0
    )
    .unwrap();
    write!(
        svg,
        r##"<text x="20" y="{MT}" font-family="monospace" font-size="12" fill="#b03a2e">wl-to-area</text>"##
    )
    .unwrap();
    write!(
        svg,
        r##"<text x="{:.1}" y="{MT}" font-family="monospace" font-size="12" fill="#1f618d" text-anchor="end">density</text>"##,
        CHART_W - 20.0
    )
    .unwrap();
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;

    fn default_records() -> Vec<SweepRecord> {
        let configs: Vec<TileConfig> = ["A", "B", "C"].iter().map(|n| preset(n).unwrap()).collect();
        sweep(&configs, &[Style::Direct], &UnitAreaParams::default())
    }

    #[test]
    fn reference_density_and_ratio_statistics() {
        // Summary figures recomputed from the bundled reference per-config
        // values; cross-checked against an independent implementation.
        let densities = [46.09, 48.30, 43.79, 61.77, 53.89];
        let stats = mean_pop_std(&densities).unwrap();
        assert!((stats.mean - 50.768).abs() < 1e-3, "{}", stats.mean);
        assert!((stats.pop_std - 6.4414).abs() < 1e-3, "{}", stats.pop_std);

        let ratios = [81.82, 138.01, 76.84, 118.13, 145.62];
        let stats = mean_pop_std(&ratios).unwrap();
        assert!((stats.mean - 112.084).abs() < 1e-3, "{}", stats.mean);
        assert!((stats.pop_std - 28.2539).abs() < 1e-3, "{}", stats.pop_std);
    }

    #[test]
    fn single_record_has_zero_std() {
        let records = sweep(
            &[preset("A").unwrap()],
            &[Style::Direct],
            &UnitAreaParams::default(),
        );
        let stats = summary_stats(&records).unwrap();
        assert_eq!(stats.count, 1);
        for m in stats.metrics.values() {
            assert_eq!(m.pop_std, 0.0);
        }
    }

    #[test]
    fn sweep_isolates_invalid_rows() {
        let mut broken = preset("B").unwrap();
        broken.vwr.words_per_slice = 3;
        let configs = vec![preset("A").unwrap(), broken, preset("C").unwrap()];
        let records = sweep(&configs, &[Style::Direct], &UnitAreaParams::default());
        assert_eq!(records.len(), 3);
        assert!(records[0].error.is_none());
        assert!(records[1].error.is_some());
        assert!(records[2].error.is_none());
        // valid rows are identical to a solo evaluation
        let solo = sweep(
            &[preset("A").unwrap()],
            &[Style::Direct],
            &UnitAreaParams::default(),
        );
        assert_eq!(records[0], solo[0]);
    }

    #[test]
    fn csv_schema_and_roundtrip() {
        let records = default_records();
        let text = to_csv(&records);
        let header = text.lines().next().unwrap();
        assert_eq!(
            header,
            "name,style,cells_proxy,logical_area,core_area,wirelength,wl_to_area,density,error"
        );
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(parsed, records);

        assert!(parse_csv("bogus,header\n1,2\n").is_err());
        assert!(parse_csv(&text.replace("density", "density2")).is_err());
    }

    #[test]
    fn json_mirrors_csv_fields() {
        let records = default_records();
        let json = to_json(&records);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let rows = value["records"].as_array().unwrap();
        assert_eq!(rows.len(), records.len());
        assert_eq!(rows[0]["name"], "A");
        assert!(rows[0]["wl_to_area"].is_f64());
        assert!(value["stats"]["metrics"]["density"]["pop_std"].is_f64());
    }

    #[test]
    fn compare_of_identical_records_is_unity() {
        let records = default_records();
        let report = compare(&records[0], &records[0]);
        assert_eq!(report.wl_ratio_b_over_a, 1.0);
        assert_eq!(report.density_ratio_a_over_b, 1.0);
    }

    #[test]
    fn trend_svg_is_deterministic_and_has_all_points() {
        let configs: Vec<TileConfig> = crate::config::PRESET_NAMES
            .iter()
            .map(|n| preset(n).unwrap())
            .collect();
        let records = sweep(&configs, &[Style::Direct], &UnitAreaParams::default());
        let one = trend_svg(&records).unwrap();
        let two = trend_svg(&records).unwrap();
        assert_eq!(one, two);
        // two series with one marker per design point
        assert_eq!(one.matches("<circle").count(), 12);
        assert!(one.contains(">VWR2A</text>"));
    }

    #[test]
    fn trend_svg_of_empty_input_is_an_error() {
        assert!(matches!(trend_svg(&[]), Err(ReportError::EmptyInput)));
        let failed = vec![SweepRecord::failed("X", Style::Direct, "nope".into())];
        assert!(matches!(trend_svg(&failed), Err(ReportError::EmptyInput)));
    }
}
