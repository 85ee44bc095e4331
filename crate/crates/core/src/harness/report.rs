//! Report tables (CSV) and figures (SVG).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use super::batch::write_config_header;
use super::stats::{mean_ci95, rmse, MeanCi};
use crate::error::{Error, Result};

/// One predicted score, optionally with its measured counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub listener: String,
    pub condition: String,
    pub snr_db: f64,
    pub predicted: f64,
    pub observed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub predicted: MeanCi,
    pub observed: Option<MeanCi>,
}

/// Mean predicted (and observed) score per SNR of one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub condition: String,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseBar {
    pub condition: String,
    /// Across listeners of each listener's RMSE.
    pub rmse: MeanCi,
}

pub fn curves(rows: &[ReportRow]) -> Result<Vec<Curve>> {
    let mut groups: BTreeMap<&str, BTreeMap<i64, (f64, Vec<f64>, Vec<f64>)>> = BTreeMap::new();
    for r in rows {
        let g = groups
            .entry(&r.condition)
            .or_default()
            .entry((r.snr_db * 1000.0).round() as i64)
            .or_insert_with(|| (r.snr_db, Vec::new(), Vec::new()));
        g.1.push(r.predicted);
        if let Some(o) = r.observed {
            g.2.push(o);
        }
    }
    groups
        .into_iter()
        .map(|(condition, pts)| {
            let points = pts
                .into_values()
                .map(|(snr_db, p, o)| {
                    Ok(CurvePoint {
                        snr_db,
                        predicted: mean_ci95(&p)?,
                        observed: if o.is_empty() { None } else { Some(mean_ci95(&o)?) },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Curve {
                condition: condition.to_string(),
                points,
            })
        })
        .collect()
}

/// Per-condition RMSE bars over the rows that carry observed scores.
pub fn rmse_bars(rows: &[ReportRow]) -> Result<Vec<RmseBar>> {
    let mut groups: BTreeMap<&str, BTreeMap<&str, (Vec<f64>, Vec<f64>)>> = BTreeMap::new();
    for r in rows {
        if let Some(o) = r.observed {
            let g = groups.entry(&r.condition).or_default().entry(&r.listener).or_default();
            g.0.push(r.predicted);
            g.1.push(o);
        }
    }
    groups
        .into_iter()
        .map(|(condition, listeners)| {
            let per: Vec<f64> = listeners
                .values()
                .map(|(p, o)| rmse(p, o))
                .collect::<Result<_>>()?;
            Ok(RmseBar {
                condition: condition.to_string(),
                rmse: mean_ci95(&per)?,
            })
        })
        .collect()
}

fn plot_err<E: std::error::Error + Send + Sync>(e: DrawingAreaErrorKind<E>) -> Error {
    Error::Plot(e.to_string())
}

fn plot_curves(path: &Path, curves: &[Curve]) -> Result<()> {
    let snrs = curves.iter().flat_map(|c| c.points.iter().map(|p| p.snr_db));
    let (lo, hi) = snrs.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), s| (l.min(s), h.max(s)));
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Word correct vs SNR", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d((lo - 3.0)..(hi + 3.0), 0f64..100f64)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("SNR (dB)")
        .y_desc("Word correct (%)")
        .draw()
        .map_err(plot_err)?;
    for (k, c) in curves.iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        let pts: Vec<(f64, f64)> = c.points.iter().map(|p| (p.snr_db, p.predicted.mean)).collect();
        chart
            .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(format!("{} (predicted)", c.condition))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        chart
            .draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))
            .map_err(plot_err)?;
        let bars = c.points.iter().filter(|p| p.predicted.n >= 2).map(|p| {
            let (m, h) = (p.predicted.mean, p.predicted.half_width);
            ErrorBar::new_vertical(p.snr_db, m - h, m, m + h, color.stroke_width(1), 8)
        });
        chart.draw_series(bars).map_err(plot_err)?;
        let observed: Vec<(f64, f64)> = c
            .points
            .iter()
            .filter_map(|p| p.observed.map(|o| (p.snr_db, o.mean)))
            .collect();
        if !observed.is_empty() {
            chart
                .draw_series(observed.iter().map(|&p| TriangleMarker::new(p, 5, color.stroke_width(1))))
                .map_err(plot_err)?
                .label(format!("{} (observed)", c.condition))
                .legend(move |(x, y)| TriangleMarker::new((x + 10, y), 5, color.stroke_width(1)));
        }
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

fn plot_rmse(path: &Path, bars: &[RmseBar]) -> Result<()> {
    let top = bars
        .iter()
        .map(|b| b.rmse.mean + b.rmse.half_width)
        .fold(1.0f64, f64::max)
        * 1.2;
    let names: Vec<String> = bars.iter().map(|b| b.condition.clone()).collect();
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("RMSE by condition (mean, 95% CI)", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(-0.5f64..(bars.len() as f64 - 0.5), 0f64..top)
        .map_err(plot_err)?;
    let label = |x: &f64| {
        let k = x.round();
        if (x - k).abs() < 1e-6 && k >= 0.0 {
            names.get(k as usize).cloned().unwrap_or_default()
        } else {
            String::new()
        }
    };
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_labels(bars.len().max(1) * 2 + 1)
        .x_label_formatter(&label)
        .y_desc("RMSE (%)")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(bars.iter().enumerate().map(|(k, b)| {
            let x = k as f64;
            Rectangle::new([(x - 0.3, 0.0), (x + 0.3, b.rmse.mean)], Palette99::pick(k).filled())
        }))
        .map_err(plot_err)?;
    chart
        .draw_series(bars.iter().enumerate().filter(|(_, b)| b.rmse.n >= 2).map(|(k, b)| {
            let (m, h) = (b.rmse.mean, b.rmse.half_width);
            ErrorBar::new_vertical(k as f64, m - h, m, m + h, BLACK.stroke_width(1), 12)
        }))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Files written by [`write_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub table: PathBuf,
    pub curves_csv: PathBuf,
    pub curves_svg: PathBuf,
    /// Present only when some rows carry observed scores.
    pub rmse_csv: Option<PathBuf>,
    pub rmse_svg: Option<PathBuf>,
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the tables and plots for `rows` into `dir`.
pub fn write_report(dir: &Path, rows: &[ReportRow], config_toml: Option<&str>) -> Result<ReportFiles> {
    if rows.is_empty() {
        return Err(Error::Data("nothing to report".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let table = dir.join("predictions.csv");
    let mut f = create(&table)?;
    if let Some(c) = config_toml {
        write_config_header(&mut f, c)?;
    }
    let mut w = csv::Writer::from_writer(f);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(&table, e))?;

    let cs = curves(rows)?;
    let curves_csv = dir.join("curves.csv");
    let mut w = csv::Writer::from_writer(create(&curves_csv)?);
    w.write_record([
        "condition",
        "snr_db",
        "n",
        "predicted_mean",
        "predicted_ci95",
        "observed_mean",
        "observed_ci95",
    ])?;
    for c in &cs {
        for p in &c.points {
            w.write_record([
                c.condition.clone(),
                p.snr_db.to_string(),
                p.predicted.n.to_string(),
                p.predicted.mean.to_string(),
                p.predicted.half_width.to_string(),
                fmt_opt(p.observed.map(|o| o.mean)),
                fmt_opt(p.observed.map(|o| o.half_width)),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&curves_csv, e))?;
    let curves_svg = dir.join("si_vs_snr.svg");
    plot_curves(&curves_svg, &cs)?;

    let bars = rmse_bars(rows)?;
    let (rmse_csv, rmse_svg) = if bars.is_empty() {
        (None, None)
    } else {
        let p = dir.join("rmse.csv");
        let mut w = csv::Writer::from_writer(create(&p)?);
        w.write_record(["condition", "n_listeners", "rmse_mean", "rmse_ci95"])?;
        for b in &bars {
            w.write_record([
                b.condition.clone(),
                b.rmse.n.to_string(),
                b.rmse.mean.to_string(),
                b.rmse.half_width.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&p, e))?;
        let svg = dir.join("rmse_bars.svg");
        plot_rmse(&svg, &bars)?;
        (Some(p), Some(svg))
    };
    Ok(ReportFiles {
        table,
        curves_csv,
        curves_svg,
        rmse_csv,
        rmse_svg,
    })
}
