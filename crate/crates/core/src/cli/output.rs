//! CSV tables and SVG plots. Every plot is rendered from CSV text alone.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::field::{DensitySet, StressTrace};
use crate::model::ValidatedProblem;
use crate::verify::{ConvergenceReport, SweepRow};

/// Full double precision, scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.17e}")
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

pub fn densities_csv(problem: &ValidatedProblem, densities: &DensitySet) -> String {
    let mut s = String::from("contour_id,block,m,re,im\n");
    for (block, series) in densities.iter() {
        let name = problem.contour_name(block.contour());
        for (m, c) in series.iter() {
            let _ = writeln!(s, "{name},{},{m},{},{}", block.label(), num(c.re), num(c.im));
        }
    }
    for (j, &w) in densities.hole_moments().iter().enumerate() {
        if problem.holes[j].is_bonded() {
            let _ = writeln!(s, "{},moment,0,{},{}", problem.holes[j].name, num(w), num(0.0));
        }
    }
    s
}

pub struct ReportRow {
    pub quantity: String,
    pub contour: String,
    pub value: f64,
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut s = String::from("quantity,contour,value\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.quantity, r.contour, num(r.value));
    }
    s
}

pub fn trace_csv(trace: &StressTrace) -> String {
    let mut s = String::from("theta,sigma_n,tau_n\n");
    for i in 0..trace.theta.len() {
        let _ = writeln!(s, "{},{},{}", num(trace.theta[i]), num(trace.sigma_n[i]), num(trace.tau_n[i]));
    }
    s
}

pub fn sweep_csv(rows: &[SweepRow], shown_value: impl Fn(f64) -> f64) -> String {
    let mut s = String::from("value,contour,max_sigma_n,max_tau_n\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", num(shown_value(r.value)), r.contour, num(r.max_sigma), num(r.max_tau));
    }
    s
}

pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from("N,tail,trace_delta\n");
    for i in 0..report.degrees.len() {
        let _ = writeln!(s, "{},{},{}", report.degrees[i], num(report.tails[i]), num(report.trace_deltas[i]));
    }
    s
}

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
    dashed: bool,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn plot(title: &str, x_label: &str, series: &[Series]) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 400.0, 60.0, 130.0, 30.0, 45.0);
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 0.0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{title}</text>"#, (w - mr + ml) / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - ml - mr,
        h - mt - mb
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{fx:.3}</text>"#, px(fx), h - mb + 15.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{fy:.3}</text>"#, ml - 5.0, py(fy) + 4.0);
    }
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(s, r##"<line x1="{ml}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#999" stroke-width="0.5"/>"##, py(0.0), w - mr);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#, (w - mr + ml) / 2.0, h - 8.0);
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let dash = if ser.dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#, pts.join(" "));
        let ly = mt + 15.0 * i as f64 + 10.0;
        let _ = writeln!(s, r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/>"#, w - mr + 10.0, w - mr + 30.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, w - mr + 35.0, ly + 4.0, ser.name);
    }
    s.push_str("</svg>\n");
    s
}

fn rows(csv: &str) -> impl Iterator<Item = Vec<&str>> {
    csv.lines().skip(1).filter(|l| !l.is_empty()).map(|l| l.split(',').collect())
}

fn parse(field: &str) -> f64 {
    field.parse().unwrap_or(f64::NAN)
}

/// Two-line plot of a trace table.
pub fn trace_svg(csv: &str, title: &str) -> String {
    let mut sigma = Vec::new();
    let mut tau = Vec::new();
    for r in rows(csv) {
        let t = parse(r[0]);
        sigma.push((t, parse(r[1])));
        tau.push((t, parse(r[2])));
    }
    plot(
        title,
        "θ",
        &[
            Series {
                name: "σn".into(),
                points: sigma,
                dashed: false,
            },
            Series {
                name: "τn".into(),
                points: tau,
                dashed: true,
            },
        ],
    )
}

/// Max σ_n (solid) and max τ_n (dashed) against the swept value, per contour.
pub fn sweep_svg(csv: &str, title: &str) -> String {
    let mut names: Vec<String> = Vec::new();
    let mut grouped: Vec<(Vec<(f64, f64)>, Vec<(f64, f64)>)> = Vec::new();
    for r in rows(csv) {
        let i = match names.iter().position(|n| n == r[1]) {
            Some(i) => i,
            None => {
                names.push(r[1].to_string());
                grouped.push((Vec::new(), Vec::new()));
                names.len() - 1
            }
        };
        let v = parse(r[0]);
        grouped[i].0.push((v, parse(r[2])));
        grouped[i].1.push((v, parse(r[3])));
    }
    let mut series = Vec::new();
    for (name, (s, t)) in names.iter().zip(grouped) {
        series.push(Series {
            name: format!("{name} σn"),
            points: s,
            dashed: false,
        });
        series.push(Series {
            name: format!("{name} τn"),
            points: t,
            dashed: true,
        });
    }
    plot(title, "value", &series)
}
