//! SVG trace plots and shape overlays rendered from a run directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::run::ExperimentError;

const TRACE_W: f64 = 640.0;
const TRACE_H: f64 = 220.0;
const MARGIN: f64 = 48.0;
const MAX_TRACE_POINTS: usize = 2000;

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_table(path: &Path) -> Result<Table, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| ExperimentError::Input(format!("{}: empty file", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| ExperimentError::Input(format!("{}: bad number on row {}", path.display(), i + 2)))?;
        if row.len() != header.len() {
            return Err(ExperimentError::Input(format!(
                "{}: row {} has {} fields, header {}",
                path.display(),
                i + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

struct Window {
    k: usize,
    theta: f64,
}

fn read_movement(path: &Path) -> Result<Vec<Window>, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().skip(1).filter(|l| !l.trim().is_empty()).enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || ExperimentError::Input(format!("{}: malformed row {}", path.display(), i + 2));
        if f.len() != 8 {
            return Err(bad());
        }
        out.push(Window {
            k: f[0].parse().map_err(|_| bad())?,
            theta: f[3].parse().map_err(|_| bad())?,
        });
    }
    if out.is_empty() {
        return Err(ExperimentError::Input(format!("{}: no windows", path.display())));
    }
    Ok(out)
}

fn read_polyline(path: &Path) -> Result<Vec<[f64; 2]>, ExperimentError> {
    let t = read_table(path)?;
    Ok(t.rows.iter().map(|r| [r[0], r[1]]).collect())
}

fn trace_svg(title: &str, values: &[f64]) -> String {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let n = values.len();
    let stride = n.div_ceil(MAX_TRACE_POINTS).max(1);
    let pw = TRACE_W - 2.0 * MARGIN;
    let ph = TRACE_H - 2.0 * MARGIN;
    let mut pts = String::new();
    for i in (0..n).step_by(stride) {
        let x = MARGIN + pw * i as f64 / (n.max(2) - 1) as f64;
        let y = MARGIN + ph * (1.0 - (values[i] - lo) / span);
        let _ = write!(pts, "{x:.2},{y:.2} ");
    }
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{TRACE_W}" height="{TRACE_H}" viewBox="0 0 {TRACE_W} {TRACE_H}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="0.8"/>"#,
        pts.trim_end()
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" font-size="13">{title}</text>"#,
        MARGIN - 12.0
    );
    let _ = writeln!(s, r#"<text x="4" y="{}" font-size="10">{hi:.4}</text>"#, MARGIN + 4.0);
    let _ = writeln!(s, r#"<text x="4" y="{}" font-size="10">{lo:.4}</text>"#, MARGIN + ph);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{n}</text>"#,
        MARGIN + pw,
        TRACE_H - MARGIN + 14.0
    );
    s.push_str("</svg>\n");
    s
}

fn path_d(pts: &[[f64; 2]]) -> String {
    let mut d = String::new();
    for (i, [x, y]) in pts.iter().enumerate() {
        let _ = write!(d, "{}{x:.5},{y:.5} ", if i == 0 { "M" } else { "L" });
    }
    d.push('Z');
    d
}

/// Unit disc with equal aspect; the y axis points up.
fn overlay_svg(k: usize, truth: &[[f64; 2]], mean: &[[f64; 2]], sensors: &[f64]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="480" height="480" viewBox="-1.2 -1.2 2.4 2.4">"#
    );
    let _ = writeln!(s, r#"<rect x="-1.2" y="-1.2" width="2.4" height="2.4" fill="white"/>"#);
    let _ = writeln!(s, r#"<g transform="scale(1,-1)">"#);
    let _ = writeln!(
        s,
        r#"<circle cx="0" cy="0" r="1" fill="none" stroke="black" stroke-width="0.008"/>"#
    );
    let _ = writeln!(
        s,
        r#"<path d="{}" fill="none" stroke="black" stroke-width="0.008" stroke-dasharray="0.03,0.02"/>"#,
        path_d(truth)
    );
    if !mean.is_empty() {
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="blue" stroke-width="0.01"/>"#,
            path_d(mean)
        );
    }
    for (i, th) in sensors.iter().enumerate() {
        let (y, x) = th.sin_cos();
        let color = if i + 1 == sensors.len() { "red" } else { "gray" };
        let _ = writeln!(s, r#"<circle cx="{x:.5}" cy="{y:.5}" r="0.035" fill="{color}"/>"#);
    }
    s.push_str("</g>\n");
    let _ = writeln!(s, r#"<text x="-1.15" y="-1.08" font-size="0.08">window {k}</text>"#);
    s.push_str("</svg>\n");
    s
}

/// Renders trace plots per parameter and window plus one overlay per window
/// into `<run_dir>/plots`. All inputs are read and checked before any file
/// is written.
pub fn emit_plots(run_dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    let windows = read_movement(&run_dir.join("movement.csv"))?;
    let truth = read_polyline(&run_dir.join("truth.csv"))?;
    if truth.is_empty() {
        return Err(ExperimentError::Input(format!(
            "{}: empty truth polyline",
            run_dir.display()
        )));
    }
    let mut files: Vec<(String, String)> = Vec::new();
    let mut sensors = Vec::new();
    for w in &windows {
        sensors.push(w.theta);
        let chain_path = run_dir.join(format!("chain_w{}.csv", w.k));
        let chain = read_table(&chain_path)?;
        if chain.rows.is_empty() {
            return Err(ExperimentError::Input(format!(
                "{}: chain has no samples",
                chain_path.display()
            )));
        }
        for (c, name) in chain.header.iter().enumerate().filter(|(_, h)| h.starts_with("xi_")) {
            let values: Vec<f64> = chain.rows.iter().map(|r| r[c]).collect();
            files.push((
                format!("trace_w{}_{name}.svg", w.k),
                trace_svg(&format!("{name}, window {}", w.k), &values),
            ));
        }
        let mean = read_polyline(&run_dir.join(format!("reconstruction_w{}.csv", w.k)))?;
        files.push((
            format!("overlay_w{}.svg", w.k),
            overlay_svg(w.k, &truth, &mean, &sensors),
        ));
    }
    let out = run_dir.join("plots");
    fs::create_dir_all(&out).map_err(|e| ExperimentError::io(&out, e))?;
    let mut paths = Vec::with_capacity(files.len());
    for (name, body) in files {
        let p = out.join(name);
        fs::write(&p, body).map_err(|e| ExperimentError::io(&p, e))?;
        paths.push(p);
    }
    Ok(paths)
}
