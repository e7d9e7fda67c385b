//! Static SVG renderings of slices, seed studies, and iteration histories.
//! The files are self-contained vector graphics written directly, with no
//! external renderer involved.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::emit::HistoryRow;
use crate::experiments::seed_study::SeedStudy;
use crate::experiments::slice::SliceResult;
use crate::textio;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Linear data-to-pixel mapping over the plot area.
struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Frame {
        // Degenerate ranges get a symmetric pad so constant data still maps.
        let (y_min, y_max) = if y_min == y_max {
            (y_min - 1.0, y_max + 1.0)
        } else {
            (y_min, y_max)
        };
        let (x_min, x_max) = if x_min == x_max {
            (x_min - 1.0, x_max + 1.0)
        } else {
            (x_min, x_max)
        };
        Frame {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT
            + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT
            - MARGIN_BOTTOM
            - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs();
    if (1e-3..1e5).contains(&magnitude) {
        let s = format!("{v:.4}");
        let trimmed = s.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        format!("{v:.2e}")
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Svg {
        let mut body = String::new();
        let _ = writeln!(body, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(
            body,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            body,
            r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        Svg { body }
    }

    fn axes(&mut self, frame: &Frame, x_label: &str, y_label: &str) {
        let x0 = MARGIN_LEFT;
        let x1 = WIDTH - MARGIN_RIGHT;
        let y0 = HEIGHT - MARGIN_BOTTOM;
        let y1 = MARGIN_TOP;
        let _ = writeln!(
            self.body,
            r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black" stroke-width="1"/>"#
        );
        let _ = writeln!(
            self.body,
            r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black" stroke-width="1"/>"#
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = frame.x_min + t * (frame.x_max - frame.x_min);
            let xp = frame.x(xv);
            let _ = writeln!(
                self.body,
                r#"<line x1="{xp}" y1="{y0}" x2="{xp}" y2="{}" stroke="black" stroke-width="1"/>"#,
                y0 + 4.0
            );
            let _ = writeln!(
                self.body,
                r#"<text x="{xp}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                y0 + 18.0,
                escape(&tick_label(xv))
            );
            let yv = frame.y_min + t * (frame.y_max - frame.y_min);
            let yp = frame.y(yv);
            let _ = writeln!(
                self.body,
                r#"<line x1="{}" y1="{yp}" x2="{x0}" y2="{yp}" stroke="black" stroke-width="1"/>"#,
                x0 - 4.0
            );
            let _ = writeln!(
                self.body,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                x0 - 7.0,
                yp + 4.0,
                escape(&tick_label(yv))
            );
        }
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 12.0,
            escape(x_label)
        );
        let _ = writeln!(
            self.body,
            r#"<text x="16" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(y_label)
        );
    }

    fn polyline(&mut self, points: &[(f64, f64)], color: &str, width: f64) {
        let mut coords = String::with_capacity(points.len() * 14);
        for (x, y) in points {
            let _ = write!(coords, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
            coords.trim_end()
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, color: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{color}"/>"#
        );
    }

    fn cross(&mut self, x: f64, y: f64, r: f64, color: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"/>"#,
            x - r,
            y - r,
            x + r,
            y + r
        );
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"/>"#,
            x - r,
            y + r,
            x + r,
            y - r
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}" stroke="{stroke}" stroke-width="1"/>"#
        );
    }

    fn hline(&mut self, x0: f64, x1: f64, y: f64, color: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="{color}" stroke-width="{width}"/>"#
        );
    }

    fn vline(&mut self, x: f64, y0: f64, y1: f64, color: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="{color}" stroke-width="{width}"/>"#
        );
    }

    fn finish(mut self, path: &Path) -> Result<()> {
        self.body.push_str("</svg>\n");
        textio::write_file(path, &self.body)
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Value-per-angle line plot of a slice.
pub fn plot_slice(result: &SliceResult, path: &Path) -> Result<()> {
    if result.thetas.is_empty() {
        return Err(Error::EmptyPlot("slice has no points".into()));
    }
    let (y_lo, y_hi) = min_max(&result.values);
    let pad = 0.05 * (y_hi - y_lo);
    let frame = Frame::new(
        result.thetas[0],
        *result.thetas.last().unwrap(),
        y_lo - pad,
        y_hi + pad,
    );
    let mut svg = Svg::new(&format!("rollout value slice, policy {}", result.policy));
    svg.axes(&frame, "pole angle (rad)", "rollout value");
    let points: Vec<(f64, f64)> = result
        .thetas
        .iter()
        .zip(&result.values)
        .map(|(&t, &v)| (frame.x(t), frame.y(v)))
        .collect();
    svg.polyline(&points, "#1f77b4", 1.0);
    svg.finish(path)
}

/// Per-seed returns plus a box summary (nearest-rank quartiles, whiskers to
/// the extremes).
pub fn plot_seed_study(study: &SeedStudy, path: &Path) -> Result<()> {
    if study.reports.is_empty() {
        return Err(Error::EmptyPlot("seed study has no reports".into()));
    }
    let returns: Vec<f64> = study.reports.iter().map(|r| r.avg_return).collect();
    let (y_lo, y_hi) = min_max(&returns);
    let pad = 0.08 * (y_hi - y_lo).max(1.0);
    let n = returns.len();
    let frame = Frame::new(-0.5, n as f64 + 1.5, y_lo - pad, y_hi + pad);
    let mut svg = Svg::new(&format!("retraining spread over {n} seeds"));
    svg.axes(&frame, "seed index (box: summary)", "average return");
    for (i, &ret) in returns.iter().enumerate() {
        svg.circle(frame.x(i as f64), frame.y(ret), 2.5, "#1f77b4");
    }
    // Box summary to the right of the dots.
    let s = &study.summary;
    let cx = frame.x(n as f64 + 0.5);
    let half = (frame.x(n as f64 + 0.9) - cx).abs();
    svg.vline(cx, frame.y(s.min), frame.y(s.q1), "black", 1.0);
    svg.vline(cx, frame.y(s.q3), frame.y(s.max), "black", 1.0);
    svg.hline(
        cx - half / 2.0,
        cx + half / 2.0,
        frame.y(s.min),
        "black",
        1.0,
    );
    svg.hline(
        cx - half / 2.0,
        cx + half / 2.0,
        frame.y(s.max),
        "black",
        1.0,
    );
    svg.rect(
        cx - half,
        frame.y(s.q3),
        2.0 * half,
        (frame.y(s.q1) - frame.y(s.q3)).abs(),
        "#c6dbef",
        "black",
    );
    svg.hline(cx - half, cx + half, frame.y(s.median), "#d62728", 2.0);
    svg.finish(path)
}

/// Iteration-wise average return (line) with success-rate crosses and filled
/// markers on fully successful iterations.
pub fn plot_history(rows: &[HistoryRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyPlot("history has no iterations".into()));
    }
    let returns: Vec<f64> = rows.iter().map(|r| r.avg_return).collect();
    let (y_lo, y_hi) = min_max(&returns);
    let y_lo = y_lo.min(0.0);
    let pad = 0.05 * (y_hi - y_lo).max(1.0);
    let frame = Frame::new(
        rows[0].iteration as f64,
        rows.last().unwrap().iteration as f64,
        y_lo,
        y_hi + pad,
    );
    let mut svg = Svg::new("iteration-wise policy performance");
    svg.axes(
        &frame,
        "iteration",
        "average return (crosses: success rate x scale)",
    );
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (frame.x(r.iteration as f64), frame.y(r.avg_return)))
        .collect();
    svg.polyline(&points, "#1f77b4", 1.5);
    // Success rate rescaled onto the return axis.
    for r in rows {
        let y = frame.y(frame.y_min + r.success_rate * (frame.y_max - frame.y_min));
        svg.cross(frame.x(r.iteration as f64), y, 4.0, "#7f7f7f");
        if r.successful {
            svg.circle(
                frame.x(r.iteration as f64),
                frame.y(r.avg_return),
                4.0,
                "#2ca02c",
            );
        }
    }
    svg.finish(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::eval::EvalReport;
    use crate::experiments::seed_study::SpreadSummary;
    use crate::experiments::slice::DiscontinuityMetrics;

    /// Minimal well-formedness check: every opened tag closes, attributes are
    /// quoted, and the document is a single `svg` element.
    fn assert_well_formed_xml(text: &str) {
        let mut stack: Vec<String> = Vec::new();
        let mut rest = text;
        while let Some(open) = rest.find('<') {
            let tail = &rest[open + 1..];
            let close = tail.find('>').expect("unclosed tag bracket");
            let tag = &tail[..close];
            rest = &tail[close + 1..];
            if tag.starts_with('?') || tag.starts_with('!') {
                continue;
            }
            if let Some(name) = tag.strip_prefix('/') {
                let top = stack.pop().expect("closing tag without opener");
                assert_eq!(top, name.trim(), "mismatched closing tag");
            } else if !tag.ends_with('/') {
                let name = tag.split_whitespace().next().unwrap().to_string();
                stack.push(name);
            }
            // Quotes must pair up inside the tag.
            assert_eq!(
                tag.matches('"').count() % 2,
                0,
                "unbalanced quotes in {tag}"
            );
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }

    fn constant_slice(n: usize, value: f64) -> SliceResult {
        SliceResult {
            thetas: (0..n)
                .map(|i| -0.1 + 0.2 * i as f64 / (n - 1) as f64)
                .collect(),
            values: vec![value; n],
            policy: "push-left".into(),
            metrics: DiscontinuityMetrics {
                max_adjacent_jump: 0.0,
                refinement_ratio: None,
            },
        }
    }

    #[test]
    fn slice_plot_is_well_formed_svg() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("slice.svg");
        plot_slice(&constant_slice(20, 2.5), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("<svg"));
        assert_well_formed_xml(&text);
    }

    #[test]
    fn constant_slice_renders_a_horizontal_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("flat.svg");
        plot_slice(&constant_slice(10, 1.0), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let points_attr = text
            .lines()
            .find(|l| l.contains("<polyline"))
            .and_then(|l| l.split("points=\"").nth(1))
            .and_then(|l| l.split('"').next())
            .unwrap();
        let ys: Vec<&str> = points_attr
            .split_whitespace()
            .map(|p| p.split(',').nth(1).unwrap())
            .collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]), "ys vary: {ys:?}");
    }

    #[test]
    fn empty_results_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let empty = SliceResult {
            thetas: vec![],
            values: vec![],
            policy: "none".into(),
            metrics: DiscontinuityMetrics {
                max_adjacent_jump: 0.0,
                refinement_ratio: None,
            },
        };
        assert!(matches!(
            plot_slice(&empty, &dir.path().join("x.svg")),
            Err(Error::EmptyPlot(_))
        ));
        assert!(plot_history(&[], &dir.path().join("y.svg")).is_err());
    }

    #[test]
    fn seed_study_and_history_plots_are_well_formed() {
        let dir = tempfile::tempdir().unwrap();
        let reports: Vec<EvalReport> = (0..6)
            .map(|i| EvalReport {
                avg_return: 100.0 * i as f64,
                success_rate: i as f64 / 5.0,
                successful: i == 5,
                n_episodes: 10,
                max_steps: 100,
            })
            .collect();
        let returns: Vec<f64> = reports.iter().map(|r| r.avg_return).collect();
        let study = SeedStudy {
            seeds: (0..6).collect(),
            summary: SpreadSummary::from_values(&returns),
            reports,
        };
        let study_path = dir.path().join("study.svg");
        plot_seed_study(&study, &study_path).unwrap();
        assert_well_formed_xml(&std::fs::read_to_string(&study_path).unwrap());

        let rows: Vec<HistoryRow> = (0..8)
            .map(|i| HistoryRow {
                iteration: i,
                avg_return: (i * i) as f64,
                success_rate: 0.1 * i as f64,
                successful: i == 7,
            })
            .collect();
        let history_path = dir.path().join("history.svg");
        plot_history(&rows, &history_path).unwrap();
        assert_well_formed_xml(&std::fs::read_to_string(&history_path).unwrap());
    }
}
