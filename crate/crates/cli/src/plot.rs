//! Log-log SVG plots with a fitted-slope annotation per series.

use std::fmt::Write as _;
use std::path::Path;

use liftlab_core::ineq_lab::Series;
use liftlab_core::numeric::log_log_slope;

use crate::error::CliError;
use crate::output::write_atomic;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn drawable(s: &Series) -> bool {
    s.points.len() >= 2 && s.points.iter().all(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
}

/// The series that can be drawn on log-log axes: two or more points, all positive.
pub fn plottable(series: &[Series]) -> Vec<Series> {
    series.iter().filter(|s| drawable(s)).cloned().collect()
}

/// Least-squares slope of a series in log-log coordinates; the secant for two points.
pub fn series_slope(s: &Series) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = s.points.iter().copied().unzip();
    log_log_slope(&xs, &ys)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the series as one SVG document.
pub fn render_svg(title: &str, series: &[Series]) -> Result<String, CliError> {
    if series.is_empty() || !series.iter().all(drawable) {
        return Err(CliError::EmptySeries);
    }
    let logs = || series.iter().flat_map(|s| s.points.iter().map(|&(x, y)| (x.log10(), y.log10())));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in logs() {
        (x0, x1, y0, y1) = (x0.min(x), x1.max(x), y0.min(y), y1.max(y));
    }
    // pad degenerate ranges so a flat series still gets a frame
    if x1 - x0 < 1e-9 {
        (x0, x1) = (x0 - 0.5, x1 + 0.5);
    }
    if y1 - y0 < 1e-9 {
        (y0, y1) = (y0 - 0.5, y1 + 0.5);
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for (v, at) in [(x0, sx(x0)), (x1, sx(x1))] {
        let _ = writeln!(svg, r#"<text x="{at:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">1e{v:.2}</text>"#, HEIGHT - MARGIN + 16.0);
    }
    for (v, at) in [(y0, sy(y0)), (y1, sy(y1))] {
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{at:.2}" text-anchor="end" font-family="sans-serif" font-size="11">1e{v:.2}</text>"#, MARGIN - 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">log x</text>"#, WIDTH / 2.0, HEIGHT - 18.0);
    let _ = writeln!(svg, r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})">log y</text>"#, HEIGHT / 2.0, HEIGHT / 2.0);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x.log10()), sy(y.log10()))).collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" fill="{color}">{} (slope {:.4})</text>"#,
            MARGIN + 8.0,
            MARGIN + 16.0 * (k + 1) as f64,
            escape(&s.name),
            series_slope(s)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes a log-log plot of `series` to `path`.
pub fn emit_plot(title: &str, series: &[Series], path: &Path) -> Result<(), CliError> {
    write_atomic(path, render_svg(title, series)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(points: Vec<(f64, f64)>) -> Series {
        Series { name: "s".into(), points }
    }

    #[test]
    fn two_points_give_the_secant() {
        let s = series(vec![(1.0, 2.0), (4.0, 32.0)]);
        assert!((series_slope(&s) - 2.0).abs() < 1e-12);
        let svg = render_svg("t", &[s]).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("slope 2.0000") && svg.contains("<polyline"));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(render_svg("t", &[]).unwrap_err(), CliError::EmptySeries);
        assert_eq!(render_svg("t", &[series(vec![(1.0, 1.0)])]).unwrap_err(), CliError::EmptySeries);
        assert!(plottable(&[series(vec![(1.0, -1.0), (2.0, 1.0)])]).is_empty());
    }

    #[test]
    fn plot_is_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.svg");
        emit_plot("t", &[series(vec![(1.0, 1.0), (2.0, 3.0), (4.0, 5.0)])], &path).unwrap();
        assert!(std::fs::read_to_string(path).unwrap().ends_with("</svg>\n"));
    }
}
