//! CSV tables and SVG plots of experiment curves.

use std::fs;
use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::sim::CurveResult;

pub const CSV_HEADER: [&str; 6] = ["snr_db", "scheme", "metric", "value", "ci_half_width", "trials"];

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub snr_db: f64,
    pub scheme: String,
    pub metric: String,
    pub value: f64,
    pub ci_half_width: f64,
    pub trials: u64,
}

/// Flattens curves into rows sorted by scheme label, SNR and metric.
pub fn csv_rows(curves: &[CurveResult]) -> Vec<CsvRow> {
    let mut rows: Vec<CsvRow> = curves
        .iter()
        .flat_map(|c| {
            (0..c.snr_db.len()).map(move |i| CsvRow {
                snr_db: c.snr_db[i],
                scheme: c.label.clone(),
                metric: c.metric.name(),
                value: c.values[i],
                ci_half_width: c.ci_half_widths[i],
                trials: c.trials,
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then(a.snr_db.total_cmp(&b.snr_db))
            .then(a.metric.cmp(&b.metric))
    });
    rows
}

/// CSV text. Floats use the shortest representation that parses back to
/// the same value, so equal results give byte-identical files.
pub fn csv_string(curves: &[CurveResult]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("in-memory write");
    for row in csv_rows(curves) {
        writer
            .write_record([
                row.snr_db.to_string(),
                row.scheme,
                row.metric,
                row.value.to_string(),
                row.ci_half_width.to_string(),
                row.trials.to_string(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let bad = |m: String| Error::contract(format!("malformed results table: {m}"));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    reader
        .records()
        .map(|record| {
            let r = record.map_err(|e| bad(e.to_string()))?;
            let num = |i: usize| r[i].parse::<f64>().map_err(|e| bad(format!("{}: {e}", &r[i])));
            Ok(CsvRow {
                snr_db: num(0)?,
                scheme: r[1].to_string(),
                metric: r[2].to_string(),
                value: num(3)?,
                ci_half_width: num(4)?,
                trials: r[5].parse().map_err(|e| bad(format!("{}: {e}", &r[5])))?,
            })
        })
        .collect()
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

pub fn emit_csv(curves: &[CurveResult], path: &Path) -> Result<()> {
    create_parent(path)?;
    fs::write(path, csv_string(curves)).map_err(|e| Error::io(path, e))
}

fn metric_axis_label(metric: &str) -> &'static str {
    if metric == "sum-rate" {
        "Ergodic sum rate (bit/s/Hz)"
    } else {
        "Outage probability"
    }
}

/// SVG chart with one panel per metric and one series per scheme.
pub fn emit_plot(curves: &[CurveResult], path: &Path) -> Result<()> {
    create_parent(path)?;
    let plot_err = |e: String| Error::Plot {
        path: path.to_path_buf(),
        message: e,
    };
    let mut metrics: Vec<String> = curves.iter().map(|c| c.metric.name()).collect();
    metrics.sort();
    metrics.dedup();
    if metrics.is_empty() {
        return Err(plot_err("no curves to plot".into()));
    }

    let root = SVGBackend::new(path, (800, 480 * metrics.len() as u32)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(e.to_string()))?;
    let panels = root.split_evenly((metrics.len(), 1));
    for (panel, metric) in panels.iter().zip(&metrics) {
        let selected: Vec<&CurveResult> =
            curves.iter().filter(|c| c.metric.name() == *metric).collect();
        let xs = selected.iter().flat_map(|c| c.snr_db.iter().copied());
        let (x_lo, x_hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        });
        let y_hi = selected
            .iter()
            .flat_map(|c| c.values.iter().copied())
            .fold(0.0f64, f64::max);
        let x_range = if x_hi > x_lo { x_lo..x_hi } else { x_lo - 1.0..x_hi + 1.0 };
        let y_range = 0.0..if y_hi > 0.0 { y_hi * 1.05 } else { 1.0 };

        let mut chart = ChartBuilder::on(panel)
            .margin(20)
            .x_label_area_size(45)
            .y_label_area_size(60)
            .build_cartesian_2d(x_range, y_range)
            .map_err(|e| plot_err(e.to_string()))?;
        chart
            .configure_mesh()
            .x_desc("SNR (dB)")
            .y_desc(metric_axis_label(metric))
            .draw()
            .map_err(|e| plot_err(e.to_string()))?;
        for (i, curve) in selected.iter().enumerate() {
            let color = Palette99::pick(i).to_rgba();
            let points: Vec<(f64, f64)> =
                curve.snr_db.iter().copied().zip(curve.values.iter().copied()).collect();
            chart
                .draw_series(LineSeries::new(points.clone(), color.stroke_width(2)))
                .map_err(|e| plot_err(e.to_string()))?
                .label(curve.label.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
            chart
                .draw_series(points.into_iter().map(|p| Circle::new(p, 3, color.filled())))
                .map_err(|e| plot_err(e.to_string()))?;
        }
        chart
            .configure_series_labels()
            .border_style(BLACK)
            .background_style(WHITE.mix(0.8))
            .draw()
            .map_err(|e| plot_err(e.to_string()))?;
    }
    root.present().map_err(|e| plot_err(e.to_string()))
}
