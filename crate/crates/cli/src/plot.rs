//! SVG figures and their raw CSV samples.
//!
//! Curves are sampled at `x = k / 2^s`, so every sample is a dyadic point
//! and the fractal functions are evaluated exactly there. Samples where a
//! function is undefined are left blank in the CSV and break the polyline.

use std::fmt::Write as _;
use std::str::FromStr;

use quasi_sierpinski::closed_form::{AnalysisResult, DisplacementProfile};
use quasi_sierpinski::fractal::{
    cantor_pseudo_inverse, j_function, takagi_class_dyadic, DyadicPoint, RatioKind, RatioSequence, Terms,
};
use quasi_sierpinski::structure::Topology;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::json::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Deformed,
    Displacements,
    Takagi,
    Cantor,
    J,
}

impl PlotKind {
    pub const ALL: [PlotKind; 5] = [
        PlotKind::Deformed,
        PlotKind::Displacements,
        PlotKind::Takagi,
        PlotKind::Cantor,
        PlotKind::J,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Deformed => "deformed",
            PlotKind::Displacements => "displacements",
            PlotKind::Takagi => "takagi",
            PlotKind::Cantor => "cantor",
            PlotKind::J => "j",
        }
    }
}

impl FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown plot kind \"{s}\" (expected deformed, displacements, takagi, cantor or j)"))
    }
}

/// One output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub file_name: String,
    pub contents: String,
}

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    /// Equal scales on both axes.
    isometric: bool,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>, isometric: bool) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            if x.is_finite() && y.is_finite() {
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 <= 0.0 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 <= 0.0 {
            let pad = if y0 == 0.0 { 1.0 } else { y0.abs() * 0.1 };
            y0 -= pad;
            y1 += pad;
        }
        Self {
            x0,
            x1,
            y0,
            y1,
            isometric,
        }
    }

    fn scales(&self) -> (f64, f64) {
        let sx = (WIDTH - 2.0 * MARGIN) / (self.x1 - self.x0);
        let sy = (HEIGHT - 2.0 * MARGIN) / (self.y1 - self.y0);
        if self.isometric {
            let s = sx.min(sy);
            (s, s)
        } else {
            (sx, sy)
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let (sx, sy) = self.scales();
        (MARGIN + (x - self.x0) * sx, HEIGHT - MARGIN - (y - self.y0) * sy)
    }
}

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (ax0, ay0) = frame.map(frame.x0, frame.y0);
    let (ax1, ay1) = frame.map(frame.x1, frame.y1);
    let _ = writeln!(
        s,
        r##"<rect x="{ax0:.2}" y="{ay1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
        ax1 - ax0,
        ay0 - ay1
    );
    for (x, y, anchor, text) in [
        (ax0, ay0 + 16.0, "start", fmt_short(frame.x0)),
        (ax1, ay0 + 16.0, "end", fmt_short(frame.x1)),
        (ax0 - 6.0, ay0, "end", fmt_short(frame.y0)),
        (ax0 - 6.0, ay1 + 10.0, "end", fmt_short(frame.y1)),
    ] {
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{text}</text>"#);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (ax0 + ax1) / 2.0,
        ay0 + 34.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (ay0 + ay1) / 2.0,
        (ay0 + ay1) / 2.0,
        escape(y_label)
    );
}

fn fmt_short(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

/// Polyline segments, split wherever a sample is missing.
fn polyline(s: &mut String, frame: &Frame, xs: &[f64], ys: &[Option<f64>], colour: &str, width: f64) {
    let mut run = String::new();
    let flush = |s: &mut String, run: &mut String| {
        if !run.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="{width}" points="{}"/>"#,
                run.trim_end()
            );
            run.clear();
        }
    };
    for (x, y) in xs.iter().zip(ys) {
        match y {
            Some(y) if y.is_finite() => {
                let (px, py) = frame.map(*x, *y);
                let _ = write!(run, "{px:.2},{py:.2} ");
            }
            _ => flush(s, &mut run),
        }
    }
    flush(s, &mut run);
}

fn legend(s: &mut String, entries: &[(String, &str)]) {
    for (k, (label, colour)) in entries.iter().enumerate() {
        let y = MARGIN + 14.0 * k as f64;
        let x = WIDTH - MARGIN - 150.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{colour}" stroke-width="2"/>"#,
            x + 20.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x + 26.0, y + 4.0, escape(label));
    }
}

/// A set of curves over `[0, 1]` as SVG and CSV.
fn curves(base: &str, title: &str, y_label: &str, xs: &[f64], series: &[(String, Vec<Option<f64>>)]) -> Vec<Figure> {
    let frame = Frame::fit(
        series
            .iter()
            .flat_map(|(_, ys)| xs.iter().zip(ys).filter_map(|(x, y)| y.map(|y| (*x, y)))),
        false,
    );
    let mut svg = svg_open(title);
    axes(&mut svg, &frame, "x", y_label);
    let mut entries = Vec::new();
    for (k, (label, ys)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        polyline(&mut svg, &frame, xs, ys, colour, 1.5);
        entries.push((label.clone(), colour));
    }
    legend(&mut svg, &entries);
    svg.push_str("</svg>\n");

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head = vec!["x".to_owned()];
    head.extend(series.iter().map(|(l, _)| l.clone()));
    w.write_record(&head).expect("in-memory csv");
    for (k, x) in xs.iter().enumerate() {
        let mut row = vec![fmt_f64(*x)];
        row.extend(series.iter().map(|(_, ys)| ys[k].map(fmt_f64).unwrap_or_default()));
        w.write_record(&row).expect("in-memory csv");
    }
    let csv = String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8");
    vec![
        Figure {
            file_name: format!("{base}.svg"),
            contents: svg,
        },
        Figure {
            file_name: format!("{base}.csv"),
            contents: csv,
        },
    ]
}

fn grid(samples_log2: u32) -> Vec<DyadicPoint> {
    (0..=(1u64 << samples_log2))
        .map(|k| DyadicPoint::new(k, samples_log2).expect("samples_log2 <= 20"))
        .collect()
}

fn curve_ratios(run: &RunConfig) -> Result<(RatioSequence, String), CliError> {
    match run.plot.ratio {
        Some(r) => Ok((
            RatioSequence::geometric(RatioKind::Horizontal, r)?,
            format!("geometric r = {r}"),
        )),
        None => Ok((run.extended_horizontal_ratios()?, "configured ratios".to_owned())),
    }
}

/// `G(x)` for the configured (or `--ratio`) sequence.
pub fn takagi_curve(run: &RunConfig) -> Result<Vec<Figure>, CliError> {
    let (ratios, label) = curve_ratios(run)?;
    let s = run.plot.samples_log2;
    let points = grid(s);
    let ys = points
        .iter()
        .map(|&x| takagi_class_dyadic(x, &ratios, Terms::UpTo(s as usize)).ok())
        .collect();
    let xs: Vec<f64> = points.iter().map(|x| x.value()).collect();
    Ok(curves(
        "takagi",
        &format!("Takagi-class curve G ({label})"),
        "G(x)",
        &xs,
        &[("G".to_owned(), ys)],
    ))
}

/// `J(x)` for the configured (or `--ratio`) sequence.
pub fn j_curve(run: &RunConfig) -> Result<Vec<Figure>, CliError> {
    let (ratios, label) = curve_ratios(run)?;
    let points = grid(run.plot.samples_log2);
    let ys = points.iter().map(|&x| j_function(x, &ratios).ok()).collect();
    let xs: Vec<f64> = points.iter().map(|x| x.value()).collect();
    Ok(curves(
        "j",
        &format!("Digit function J ({label})"),
        "J(x)",
        &xs,
        &[("J".to_owned(), ys)],
    ))
}

/// Cantor pseudo-inverse over bases `(2r, 2)`, `r` defaulting to 3/2.
pub fn cantor_curve(run: &RunConfig) -> Result<Vec<Figure>, CliError> {
    let r = run.plot.ratio.unwrap_or(1.5);
    // surfaces a bad ratio as an error rather than an empty curve
    cantor_pseudo_inverse(DyadicPoint::ZERO, r)?;
    let points = grid(run.plot.samples_log2);
    let ys = points.iter().map(|&x| cantor_pseudo_inverse(x, r).ok()).collect();
    let xs: Vec<f64> = points.iter().map(|x| x.value()).collect();
    Ok(curves(
        "cantor",
        &format!("Cantor pseudo-inverse, bases {} and 2", 2.0 * r),
        "C(x)",
        &xs,
        &[("cantor".to_owned(), ys)],
    ))
}

/// `f_δ`, `f_ε(n, ·)` and `f_μ(n, ·)` for every level.
pub fn displacement_curves(run: &RunConfig) -> Result<Vec<Figure>, CliError> {
    let c = &run.structure;
    let profile = DisplacementProfile::new(c, run.extended_horizontal_ratios()?)?.with_depth(run.plot.depth);
    let points = grid(run.plot.samples_log2);
    let xs: Vec<f64> = points.iter().map(|x| x.value()).collect();
    let exact_or_real = |exact: Option<f64>, real: &dyn Fn() -> Option<f64>| exact.or_else(real);

    let mut vertical = vec![(
        "f_delta".to_owned(),
        points
            .iter()
            .map(|&x| exact_or_real(profile.f_delta(x).ok(), &|| profile.f_delta_real(x.value()).ok()))
            .collect::<Vec<_>>(),
    )];
    let mut horizontal = Vec::new();
    for level in 1..=c.levels {
        vertical.push((
            format!("f_epsilon_{level}"),
            points.iter().map(|&x| profile.f_epsilon(level, x).ok()).collect(),
        ));
        horizontal.push((
            format!("f_mu_{level}"),
            points
                .iter()
                .map(|&x| {
                    exact_or_real(profile.f_mu(level, x).ok(), &|| {
                        profile.f_mu_real(level, x.value()).ok()
                    })
                })
                .collect(),
        ));
    }
    let mut out = curves(
        "displacements_vertical",
        "Vertical displacement functions (per unit height)",
        "f_delta, f_epsilon",
        &xs,
        &vertical,
    );
    out.extend(curves(
        "displacements_horizontal",
        "Horizontal displacement functions (per unit height)",
        "f_mu",
        &xs,
        &horizontal,
    ));
    Ok(out)
}

/// Undeformed truss in grey, deformed in red, displacements scaled by
/// `magnify`.
pub fn deformed_shape(topology: &Topology, result: &AnalysisResult, magnify: f64) -> Vec<Figure> {
    let y = result.height;
    let moved: Vec<(f64, f64)> = topology
        .nodes
        .iter()
        .enumerate()
        .map(|(k, n)| (n.x + magnify * result.mu[k] * y, n.y + magnify * result.epsilon[k] * y))
        .collect();
    let frame = Frame::fit(
        topology.nodes.iter().map(|n| (n.x, n.y)).chain(moved.iter().copied()),
        true,
    );
    let mut svg = svg_open(&format!("Deformed shape, magnification {magnify}"));
    let (_, base_y) = frame.map(0.0, 0.0);
    let (left, _) = frame.map(frame.x0, 0.0);
    let (right, _) = frame.map(frame.x1, 0.0);
    let _ = writeln!(
        svg,
        r##"<line x1="{left:.2}" y1="{base_y:.2}" x2="{right:.2}" y2="{base_y:.2}" stroke="#bbb" stroke-dasharray="6 4"/>"##
    );
    for (positions, colour, width) in [
        (
            topology.nodes.iter().map(|n| (n.x, n.y)).collect::<Vec<_>>(),
            "#999999",
            1.2,
        ),
        (moved.clone(), "#d62728", 1.2),
    ] {
        for m in topology.members() {
            let (x1, y1) = frame.map(positions[m.start].0, positions[m.start].1);
            let (x2, y2) = frame.map(positions[m.end].0, positions[m.end].1);
            let _ = writeln!(
                svg,
                r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{colour}" stroke-width="{width}"/>"#
            );
        }
    }
    for s in &topology.supports {
        let (px, py) = frame.map(moved[s.node].0, moved[s.node].1);
        let _ = writeln!(svg, r##"<circle cx="{px:.2}" cy="{py:.2}" r="2.5" fill="#d62728"/>"##);
    }
    legend(
        &mut svg,
        &[("undeformed".to_owned(), "#999999"), ("deformed".to_owned(), "#d62728")],
    );
    svg.push_str("</svg>\n");

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "index",
        "level",
        "ordinal",
        "x_mm",
        "y_mm",
        "x_deformed_mm",
        "y_deformed_mm",
    ])
    .expect("in-memory csv");
    for (k, n) in topology.nodes.iter().enumerate() {
        w.write_record([
            k.to_string(),
            n.id.level.to_string(),
            n.id.ordinal.to_string(),
            fmt_f64(n.x),
            fmt_f64(n.y),
            fmt_f64(moved[k].0),
            fmt_f64(moved[k].1),
        ])
        .expect("in-memory csv");
    }
    let csv = String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8");
    vec![
        Figure {
            file_name: "deformed.svg".to_owned(),
            contents: svg,
        },
        Figure {
            file_name: "deformed.csv".to_owned(),
            contents: csv,
        },
    ]
}
