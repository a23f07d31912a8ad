use crate::{Failure, Outcome};
use anyhow::{anyhow, Context};
use ide_flows::stepfn::{parse_q, to_f64};
use plotters::prelude::*;
use std::path::Path;

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(255, 127, 14),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

/// Column index of `name`, preferring its exact `rational:` sibling.
fn column(header: &csv::StringRecord, name: &str) -> Option<usize> {
    let exact = format!("rational:{name}");
    header
        .iter()
        .position(|h| h == exact)
        .or_else(|| header.iter().position(|h| h == name))
}

fn cell(rec: &csv::StringRecord, i: usize, row: usize) -> Result<f64, Failure> {
    let raw = rec.get(i).ok_or_else(|| anyhow!("row {row}: missing column {i}"))?;
    let v = parse_q(raw).with_context(|| format!("row {row}: bad number {raw:?}"))?;
    Ok(to_f64(&v))
}

/// Reads `time` and the requested series; each row is one polyline vertex.
fn read_series(path: &Path, series: &[String]) -> Result<(Vec<f64>, Vec<Vec<f64>>), Failure> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header = rdr.headers().with_context(|| format!("reading header of {}", path.display()))?.clone();
    let time = column(&header, "time").ok_or_else(|| anyhow!("{} has no time column", path.display()))?;
    let cols: Vec<usize> = series
        .iter()
        .map(|s| column(&header, s).ok_or_else(|| Failure::Input(anyhow!("unknown series {s:?} in {}", path.display()))))
        .collect::<Result<_, _>>()?;
    let mut xs = Vec::new();
    let mut ys = vec![Vec::new(); cols.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("row {}", row + 1))?;
        xs.push(cell(&rec, time, row + 1)?);
        for (k, &c) in cols.iter().enumerate() {
            ys[k].push(cell(&rec, c, row + 1)?);
        }
    }
    Ok((xs, ys))
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }
}

pub fn plot(file: &Path, series: &[String], output: &Path) -> Outcome {
    let (xs, ys) = read_series(file, series)?;
    let (x0, x1) = bounds(xs.iter().copied());
    let (y0, y1) = bounds(ys.iter().flatten().copied().chain([0.0]));
    let root = SVGBackend::new(output, (800, 480)).into_drawing_area();
    let draw = |e: &dyn std::fmt::Display| Failure::Input(anyhow!("drawing {}: {e}", output.display()));
    root.fill(&WHITE).map_err(|e| draw(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(30)
        .y_label_area_size(40)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| draw(&e))?;
    chart
        .configure_mesh()
        .disable_x_mesh()
        .disable_y_mesh()
        .draw()
        .map_err(|e| draw(&e))?;
    for (k, y) in ys.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(xs.iter().copied().zip(y.iter().copied()), color.stroke_width(2)))
            .map_err(|e| draw(&e))?;
    }
    root.present().map_err(|e| draw(&e))?;
    log::info!("wrote {}", output.display());
    Ok(())
}
