//! Scatter SVGs of pair endpoints in a 2-D input projection, colored by
//! output class or exception kind: one view before tracing (archive only) and
//! one after (archive plus trace populations).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::record::RunRecord;
use crate::sut::{ExecutionOutcome, SutSpec};

#[derive(Debug, Clone, Copy)]
pub struct PlotOptions {
    /// Input argument indices mapped to the x and y axes.
    pub projection: (usize, usize),
    /// Explicit axis limits; data extent with a 5% margin otherwise.
    pub xlim: Option<(f64, f64)>,
    pub ylim: Option<(f64, f64)>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            projection: (0, 1),
            xlim: None,
            ylim: None,
        }
    }
}

struct PlotPoint {
    x: f64,
    y: f64,
    class: String,
}

const PALETTE: &[&str] = &[
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn endpoint(args: &[i64], output: &str, projection: (usize, usize)) -> PlotPoint {
    PlotPoint {
        x: args[projection.0] as f64,
        y: args[projection.1] as f64,
        class: ExecutionOutcome::from_full_string(output)
            .class_string()
            .to_string(),
    }
}

fn archive_points(records: &[RunRecord], projection: (usize, usize)) -> Vec<PlotPoint> {
    let mut points = Vec::new();
    for record in records {
        for row in &record.archive_rows {
            points.push(endpoint(&row.inputs_a, &row.output_a, projection));
            points.push(endpoint(&row.inputs_b, &row.output_b, projection));
        }
    }
    points
}

fn trace_points(records: &[RunRecord], projection: (usize, usize)) -> Vec<PlotPoint> {
    let mut points = Vec::new();
    for record in records {
        for trace in &record.trace_populations {
            for member in &trace.members {
                points.push(endpoint(&member.inputs_a, &member.output_a, projection));
                points.push(endpoint(&member.inputs_b, &member.output_b, projection));
            }
        }
    }
    points
}

fn axis_range(values: impl Iterator<Item = f64>, limit: Option<(f64, f64)>) -> (f64, f64) {
    if let Some(lim) = limit {
        return lim;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn render_svg(points: &[PlotPoint], title: &str, options: &PlotOptions) -> String {
    const W: f64 = 720.0;
    const H: f64 = 520.0;
    const ML: f64 = 70.0;
    const MR: f64 = 160.0;
    const MT: f64 = 40.0;
    const MB: f64 = 50.0;

    let (x0, x1) = axis_range(points.iter().map(|p| p.x), options.xlim);
    let (y0, y1) = axis_range(points.iter().map(|p| p.y), options.ylim);
    let sx = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let classes: BTreeSet<&str> = points.iter().map(|p| p.class.as_str()).collect();
    let color_of = |class: &str| {
        let idx = classes.iter().position(|c| *c == class).unwrap_or(0);
        PALETTE[idx % PALETTE.len()]
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">{title}</text>\n",
        ML
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR
    ));
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    ));
    for (value, px) in [(x0, ML), (x1, W - MR)] {
        svg.push_str(&format!(
            "<text x=\"{px}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{value:.0}</text>\n",
            H - MB + 18.0
        ));
    }
    for (value, py) in [(y0, H - MB), (y1, MT)] {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{py}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{value:.0}</text>\n",
            ML - 8.0
        ));
    }
    for p in points {
        // points outside explicit axis limits are clipped, not smeared over
        // the margins
        if p.x < x0 || p.x > x1 || p.y < y0 || p.y > y1 {
            continue;
        }
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"{}\" fill-opacity=\"0.7\"/>\n",
            sx(p.x),
            sy(p.y),
            color_of(&p.class)
        ));
    }
    // legend, stable order by class name
    for (i, class) in classes.iter().enumerate() {
        let y = MT + 16.0 * i as f64;
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
            W - MR + 12.0,
            y,
            color_of(class)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{class}</text>\n",
            W - MR + 28.0,
            y + 9.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Emits `<sut>_before.svg` (archive candidates) and, when any record carries
/// trace populations, `<sut>_after.svg` (archive plus traces). Returns the
/// written paths and any notices.
pub fn plot(
    records: &[RunRecord],
    sut: &SutSpec,
    options: &PlotOptions,
    out_dir: &Path,
) -> Result<(Vec<PathBuf>, Vec<String>)> {
    if sut.arity < 2 {
        return Err(Error::ArityUnsupported(sut.name.clone(), sut.arity));
    }
    let (px, py) = options.projection;
    if px >= sut.arity || py >= sut.arity || px == py {
        return Err(Error::InvalidConfig(format!(
            "projection ({px}, {py}) invalid for arity {}",
            sut.arity
        )));
    }
    let records: Vec<RunRecord> = records
        .iter()
        .filter(|r| r.config.sut == sut.name)
        .cloned()
        .collect();
    if records.is_empty() {
        return Err(Error::EmptyInput("no records for the requested SUT"));
    }

    std::fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();
    let mut notes = Vec::new();

    let before = archive_points(&records, options.projection);
    let before_path = out_dir.join(format!("{}_before.svg", sut.name));
    std::fs::write(
        &before_path,
        render_svg(&before, &format!("{} archive", sut.name), options),
    )?;
    paths.push(before_path);

    let traces = trace_points(&records, options.projection);
    if traces.is_empty() {
        notes.push("no trace populations in the records; after-view omitted".into());
    } else {
        let mut after = before;
        after.extend(traces);
        let after_path = out_dir.join(format!("{}_after.svg", sut.name));
        std::fs::write(
            &after_path,
            render_svg(&after, &format!("{} archive + traces", sut.name), options),
        )?;
        paths.push(after_path);
    }
    Ok((paths, notes))
}
