//! SVG figures from sweep CSVs: outage on a log axis, sum rate on a linear one.
//! Analytic values are drawn as lines, Monte Carlo values as markers.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use plotters::prelude::*;

use crate::sweep::{OutageRow, SumRateRow};

/// Outage values below this are not shown on the log axis.
pub const OUTAGE_FLOOR: f64 = 1e-6;

const SIZE: (u32, u32) = (900, 600);

type Series = Vec<(f64, f64)>;

struct Curve {
    label: String,
    analytic: Series,
    mc: Series,
}

fn x_range(curves: &[Curve]) -> (f64, f64) {
    let xs = curves.iter().flat_map(|c| c.analytic.iter().chain(&c.mc)).map(|p| p.0);
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if lo < hi {
        (lo, hi)
    } else {
        (lo - 1.0, lo + 1.0)
    }
}

fn draw(path: &Path, caption: &str, y_desc: &str, curves: &[Curve], log_y: bool) -> anyhow::Result<()> {
    let (x0, x1) = x_range(curves);
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE)?;
    let mut builder = ChartBuilder::on(&root);
    builder.caption(caption, ("sans-serif", 22)).margin(12).x_label_area_size(40).y_label_area_size(60);

    macro_rules! body {
        ($chart:expr) => {{
            let mut chart = $chart;
            chart.configure_mesh().x_desc("SNR (dB)").y_desc(y_desc).draw()?;
            for (i, c) in curves.iter().enumerate() {
                let color = Palette99::pick(i).to_rgba();
                chart
                    .draw_series(LineSeries::new(c.analytic.iter().copied(), color.stroke_width(2)))?
                    .label(c.label.as_str())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
                chart.draw_series(c.mc.iter().map(|&p| Circle::new(p, 3, color.stroke_width(1))))?;
            }
            chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
        }};
    }

    if log_y {
        let y_lo = curves
            .iter()
            .flat_map(|c| c.analytic.iter().chain(&c.mc))
            .map(|p| p.1)
            .fold(1.0, f64::min)
            .max(OUTAGE_FLOOR);
        body!(builder.build_cartesian_2d(x0..x1, (y_lo * 0.5..1.5).log_scale())?);
    } else {
        let y_hi = curves.iter().flat_map(|c| c.analytic.iter().chain(&c.mc)).map(|p| p.1).fold(0.0, f64::max);
        body!(builder.build_cartesian_2d(x0..x1, 0.0..(y_hi * 1.1).max(1e-3))?);
    }
    root.present().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn plot_outage(rows: &[OutageRow], path: &Path) -> anyhow::Result<()> {
    if rows.is_empty() {
        bail!("no outage rows to plot");
    }
    let mut by_key: BTreeMap<(String, String), (Series, Series)> = BTreeMap::new();
    for r in rows {
        let entry = by_key.entry((r.scheme.name().to_string(), r.signal.name().to_string())).or_default();
        if r.p_analytic >= OUTAGE_FLOOR {
            entry.0.push((r.snr_db, r.p_analytic));
        }
        if let Some(p) = r.p_mc.filter(|&p| p >= OUTAGE_FLOOR) {
            entry.1.push((r.snr_db, p));
        }
    }
    let curves: Vec<Curve> = by_key
        .into_iter()
        .map(|((scheme, signal), (analytic, mc))| Curve { label: format!("{scheme} {signal}"), analytic, mc })
        .collect();
    draw(path, "Outage probability", "outage", &curves, true)
}

pub fn plot_sum_rate(rows: &[SumRateRow], path: &Path) -> anyhow::Result<()> {
    if rows.is_empty() {
        bail!("no sum-rate rows to plot");
    }
    let mut by_scheme: BTreeMap<String, (Series, Series)> = BTreeMap::new();
    for r in rows {
        let entry = by_scheme.entry(r.scheme.name().to_string()).or_default();
        entry.0.push((r.snr_db, r.sr_analytic));
        if let Some(v) = r.sr_mc {
            entry.1.push((r.snr_db, v));
        }
    }
    let curves: Vec<Curve> =
        by_scheme.into_iter().map(|(label, (analytic, mc))| Curve { label, analytic, mc }).collect();
    draw(path, "Outage sum rate", "sum rate (BPCU)", &curves, false)
}

/// Which sweep a CSV holds, judged by its header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvKind {
    Outage,
    SumRate,
}

pub fn detect_kind(path: &Path) -> anyhow::Result<CsvKind> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = r.headers()?;
    if headers.iter().any(|h| h == "p_analytic") {
        Ok(CsvKind::Outage)
    } else if headers.iter().any(|h| h == "sr_analytic") {
        Ok(CsvKind::SumRate)
    } else {
        bail!("{} is neither an outage nor a sum-rate sweep", path.display())
    }
}
