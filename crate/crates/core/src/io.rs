//! CSV persistence and SVG line charts.
//!
//! Floats are written with `{:.16e}` (17 significant digits), which round-trips
//! every finite `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::diagnostics::NormReport;
use crate::error::{Error, Result};
use crate::evolution::ProfileState;
use crate::scattering::PhaseAccumulator;
use crate::spectral::SpectralGrid;

pub const TIMESERIES_HEADER: &str = "t,hN,w,z,sup_u,mass,energy";
pub const SNAPSHOT_HEADER: &str = "xi,re_fhat,im_fhat,H";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn timeseries_csv(reports: &[NormReport]) -> String {
    let mut out = String::with_capacity(64 + reports.len() * 170);
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for r in reports {
        let row = [r.t, r.sobolev_hn, r.w_norm, r.z_norm, r.sup_u, r.mass, r.energy];
        let cells: Vec<String> = row.iter().map(|&v| num(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_timeseries(reports: &[NormReport], path: &Path) -> Result<()> {
    write_text(path, &timeseries_csv(reports))
}

/// Parse a file produced by [`write_timeseries`].
pub fn read_timeseries(path: &Path) -> Result<Vec<NormReport>> {
    let rows = read_numeric_csv(path, TIMESERIES_HEADER, 7)?;
    Ok(rows
        .into_iter()
        .map(|r| NormReport {
            t: r[0],
            sobolev_hn: r[1],
            w_norm: r[2],
            z_norm: r[3],
            sup_u: r[4],
            mass: r[5],
            energy: r[6],
        })
        .collect())
}

/// One row per grid node; `H` is zero when no accumulator is given.
pub fn write_snapshot(
    state: &ProfileState,
    acc: Option<&PhaseAccumulator>,
    grid: &SpectralGrid,
    path: &Path,
) -> Result<()> {
    if state.f_hat.len() != grid.size() {
        return Err(Error::invalid("snapshot state does not match the grid"));
    }
    if let Some(a) = acc {
        if a.h.len() != grid.size() {
            return Err(Error::invalid("phase accumulator does not match the grid"));
        }
    }
    let mut out = String::with_capacity(grid.size() * 100);
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    for (i, (&xi, v)) in grid.xi_nodes().iter().zip(&state.f_hat).enumerate() {
        let h = acc.map_or(0.0, |a| a.h[i]);
        let _ = writeln!(out, "{},{},{},{}", num(xi), num(v.re), num(v.im), num(h));
    }
    write_text(path, &out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub xi: Vec<f64>,
    pub f_hat: Vec<Complex64>,
    pub h: Vec<f64>,
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let rows = read_numeric_csv(path, SNAPSHOT_HEADER, 4)?;
    let mut snap = Snapshot {
        xi: Vec::with_capacity(rows.len()),
        f_hat: Vec::with_capacity(rows.len()),
        h: Vec::with_capacity(rows.len()),
    };
    for r in rows {
        snap.xi.push(r[0]);
        snap.f_hat.push(Complex64::new(r[1], r[2]));
        snap.h.push(r[3]);
    }
    Ok(snap)
}

fn read_numeric_csv(path: &Path, header: &str, width: usize) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("{}: expected header `{header}`", path.display()),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = parse_row(line).ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: format!("{}: unparsable number", path.display()),
        })?;
        if row.len() != width {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("{}: expected {width} columns, found {}", path.display(), row.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

fn parse_row(line: &str) -> Option<Vec<f64>> {
    line.split(',').map(|c| c.trim().parse::<f64>().ok()).collect()
}

/// `xi,re,im[,...]` rows sorted by `xi`; a non-numeric first line is a header.
pub fn read_spectrum_table(path: &Path) -> Result<Vec<(f64, Complex64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut table = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = match parse_row(line) {
            Some(r) => r,
            None if idx == 0 => continue,
            None => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("{}: unparsable number", path.display()),
                })
            }
        };
        if row.len() < 3 || row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("{}: need finite xi,re,im columns", path.display()),
            });
        }
        table.push((row[0], Complex64::new(row[1], row[2])));
    }
    if table.len() < 2 {
        return Err(Error::invalid(format!("{}: table needs at least two rows", path.display())));
    }
    table.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_log: bool,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Render a line chart. In log-log mode non-positive points are dropped.
pub fn render_svg(series: &[PlotSeries], opts: &PlotOptions) -> Result<String> {
    let map = |v: f64| if opts.log_log { v.log10() } else { v };
    let mapped: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite() && (!opts.log_log || (p.0 > 0.0 && p.1 > 0.0)))
                .map(|&(x, y)| (map(x), map(y)))
                .collect()
        })
        .collect();
    let all = mapped.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return Err(Error::invalid("plot has no drawable points"));
    }
    if x1 == x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 == y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<g id="plot-area" data-log-log="{}" data-x-min="{}" data-x-max="{}" data-y-min="{}" data-y-max="{}" data-left="{MARGIN_LEFT}" data-top="{MARGIN_TOP}" data-width="{pw}" data-height="{ph}">"#,
        opts.log_log,
        num(x0),
        num(x1),
        num(y0),
        num(y1)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let label = |v: f64| if opts.log_log { format!("{:.3e}", 10f64.powf(v)) } else { format!("{v:.3e}") };
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            px(fx),
            MARGIN_TOP + ph + 18.0,
            label(fx)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            py(fy) + 4.0,
            label(fy)
        );
    }
    for (k, (s, pts)) in series.iter().zip(&mapped).enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.4},{:.4}", px(x), py(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline data-label="{}" fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            escape(&s.label),
            coords.join(" ")
        );
        let ly = MARGIN_TOP + 16.0 * (k as f64 + 1.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{ly:.3}" fill="{colour}">{}</text>"#,
            MARGIN_LEFT + pw + 10.0,
            escape(&s.label)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<text x="{:.3}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        escape(&opts.title)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(&opts.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.3}" text-anchor="middle" transform="rotate(-90 16 {:.3})">{}</text>"#,
        MARGIN_TOP + ph / 2.0,
        MARGIN_TOP + ph / 2.0,
        escape(&opts.y_label)
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(series: &[PlotSeries], opts: &PlotOptions, path: &Path) -> Result<()> {
    write_text(path, &render_svg(series, opts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::linear_fit;

    fn attr(svg: &str, name: &str) -> f64 {
        let key = format!("{name}=\"");
        let start = svg.find(&key).unwrap() + key.len();
        let end = start + svg[start..].find('"').unwrap();
        svg[start..end].parse().unwrap()
    }

    #[test]
    fn empty_series_is_header_only() {
        assert_eq!(timeseries_csv(&[]), format!("{TIMESERIES_HEADER}\n"));
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn snapshot_round_trip_is_bitwise() {
        let grid = SpectralGrid::new(8.0, 32).unwrap();
        let f: Vec<Complex64> = (0..32)
            .map(|i| Complex64::new((i as f64 * 0.37).sin() / 3.0, (i as f64).sqrt() * 1e-7))
            .collect();
        let state = ProfileState::new(0.0, f, &grid).unwrap();
        let mut acc = PhaseAccumulator::new(&state, &grid).unwrap();
        for (i, h) in acc.h.iter_mut().enumerate() {
            *h = std::f64::consts::PI * i as f64 / 7.0;
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.csv");
        write_snapshot(&state, Some(&acc), &grid, &path).unwrap();
        let back = read_snapshot(&path).unwrap();
        assert_eq!(back.xi, grid.xi_nodes());
        assert_eq!(back.f_hat, state.f_hat);
        assert_eq!(back.h, acc.h);
    }

    #[test]
    fn timeseries_round_trip() {
        let r = NormReport {
            t: 0.5,
            sobolev_hn: 1.0 / 7.0,
            w_norm: 2.0f64.sqrt(),
            z_norm: 1e-300,
            sup_u: 3.0,
            mass: 0.25,
            energy: -1e-9,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ts.csv");
        write_timeseries(&[r, r], &path).unwrap();
        assert_eq!(read_timeseries(&path).unwrap(), vec![r, r]);
    }

    #[test]
    fn io_errors_carry_path() {
        let err = read_snapshot(Path::new("/nonexistent/dir/snap.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/snap.csv"));
        assert_eq!(err.kind(), "io");
    }

    #[test]
    fn spectrum_table_with_header_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        fs::write(&path, "xi,re,im\n1.0,2.0,0.0\n-1.0,0.5,0.5\n").unwrap();
        let t = read_spectrum_table(&path).unwrap();
        assert_eq!(t[0].0, -1.0);
        assert_eq!(t[1].1, Complex64::new(2.0, 0.0));
        fs::write(&path, "xi,re,im\n1.0,x,0.0\n2.0,0,0\n").unwrap();
        assert!(matches!(read_spectrum_table(&path), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn power_law_is_straight_in_log_log() {
        let pts: Vec<(f64, f64)> = (0..60).map(|k| {
            let t = 10f64.powf(1.0 + 2.0 * k as f64 / 59.0);
            (t, 3.0 * t.powf(-0.5))
        }).collect();
        let svg = render_svg(
            &[PlotSeries { label: "decay".into(), points: pts }],
            &PlotOptions { title: "t".into(), x_label: "t".into(), y_label: "sup".into(), log_log: true },
        )
        .unwrap();
        let (x0, x1, y0, y1) = (attr(&svg, "data-x-min"), attr(&svg, "data-x-max"), attr(&svg, "data-y-min"), attr(&svg, "data-y-max"));
        let (left, top, w, h) = (attr(&svg, "data-left"), attr(&svg, "data-top"), attr(&svg, "data-width"), attr(&svg, "data-height"));
        let start = svg.find("points=\"").unwrap() + 8;
        let end = start + svg[start..].find('"').unwrap();
        let (mut lx, mut ly) = (Vec::new(), Vec::new());
        for p in svg[start..end].split(' ') {
            let (a, b) = p.split_once(',').unwrap();
            let (a, b): (f64, f64) = (a.parse().unwrap(), b.parse().unwrap());
            lx.push(x0 + (a - left) / w * (x1 - x0));
            ly.push(y1 - (b - top) / h * (y1 - y0));
        }
        let (slope, r2) = linear_fit(&lx, &ly).unwrap();
        assert!((slope + 0.5).abs() < 0.005, "slope {slope}");
        assert!(r2 > 0.9999);
    }

    #[test]
    fn plot_rejects_empty_log_data() {
        let s = PlotSeries { label: "neg".into(), points: vec![(1.0, -1.0)] };
        let opts = PlotOptions { title: String::new(), x_label: String::new(), y_label: String::new(), log_log: true };
        assert!(render_svg(&[s], &opts).is_err());
    }
}
