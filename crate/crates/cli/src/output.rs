//! CSV series, SVG plots and JSON documents. Floats are written with 17
//! significant digits so that files are byte-stable for identical inputs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use obproj_core::SampledSignal;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV column. Complex signals with a nonzero imaginary part are split
/// into `name_re` and `name_im`.
pub struct Column<'a> {
    pub name: &'a str,
    pub signal: &'a SampledSignal,
}

pub fn series_csv(x_name: &str, x: &[f64], columns: &[Column<'_>]) -> String {
    let split: Vec<bool> = columns
        .iter()
        .map(|c| c.signal.values().iter().any(|z| z.im != 0.0))
        .collect();
    let mut out = String::from(x_name);
    for (c, &s) in columns.iter().zip(&split) {
        if s {
            write!(out, ",{0}_re,{0}_im", c.name).unwrap();
        } else {
            write!(out, ",{}", c.name).unwrap();
        }
    }
    out.push('\n');
    for (p, &xp) in x.iter().enumerate() {
        out.push_str(&num(xp));
        for (c, &s) in columns.iter().zip(&split) {
            let z = c.signal.values()[p];
            out.push(',');
            out.push_str(&num(z.re));
            if s {
                out.push(',');
                out.push_str(&num(z.im));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(obproj_core::Error::from)?;
    text.push('\n');
    write_text(path, &text)
}

pub struct Curve<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub color: &'a str,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Line plot of the curves on shared axes. With `log_y` the ordinate is
/// `log10 y`; non-positive values are skipped.
pub fn line_plot_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    curves: &[Curve<'_>],
    log_y: bool,
) -> String {
    let ty = |v: f64| {
        if log_y {
            if v > 0.0 {
                v.log10()
            } else {
                f64::NAN
            }
        } else {
            v
        }
    };
    let (x0, x1) = bounds(curves.iter().flat_map(|c| c.x.iter()));
    let ys: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.y.iter().map(|&v| ty(v)))
        .collect();
    let (y0, y1) = bounds(ys.iter());
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (px, py) = (sx(xv), sy(yv));
        writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/>"#,
            TOP + ph,
            TOP + ph + 5.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            tick(xv)
        )
        .unwrap();
        writeln!(
            s,
            r#"<line x1="{}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/>"#,
            LEFT - 5.0
        )
        .unwrap();
        let label = if log_y {
            format!("1e{yv:.1}")
        } else {
            tick(yv)
        };
        writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#,
            LEFT - 8.0,
            py + 4.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        TOP + ph / 2.0,
        escape(y_label)
    )
    .unwrap();
    for (n, c) in curves.iter().enumerate() {
        let mut path = String::new();
        let mut pen_down = false;
        for (&x, &y) in c.x.iter().zip(c.y) {
            let y = ty(y);
            if !(x.is_finite() && y.is_finite()) {
                pen_down = false;
                continue;
            }
            let cmd = if pen_down { 'L' } else { 'M' };
            write!(path, "{cmd}{:.2},{:.2} ", sx(x), sy(y)).unwrap();
            pen_down = true;
        }
        writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.2"/>"#,
            path.trim_end(),
            c.color
        )
        .unwrap();
        let ly = TOP + 16.0 + 16.0 * n as f64;
        let lx = LEFT + pw - 150.0;
        writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/>"#,
            lx + 20.0,
            c.color
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(c.label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
