//! Files written by a run: spectra, diagnostics, a restart snapshot and SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{SimState, Termination, Trajectory};

use super::config::RunConfig;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const INTERFACE_SVG: &str = "interface.svg";
pub const AMPLITUDE_SVG: &str = "amplitudes.svg";

/// Restartable snapshot: the configuration together with the state reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub config: RunConfig,
    pub state: SimState,
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let snap: Snapshot = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {}, column {}: {e}", e.line(), e.column()),
    })?;
    snap.config.validate()?;
    if snap.state.f.n() != snap.config.grid.nx {
        return Err(Error::Shape(format!(
            "snapshot state has {} nodes, config grid.nx is {}",
            snap.state.f.n(),
            snap.config.grid.nx
        )));
    }
    Ok(snap)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub termination: Termination,
    pub steps: usize,
    pub t_final: f64,
    pub sup_f: f64,
    pub mean_f: f64,
    pub worst_max_principle_violation: f64,
    pub max_newton_iterations: usize,
    pub max_velocity_mean: f64,
}

impl RunSummary {
    pub fn of(traj: &Trajectory) -> Self {
        let last = &traj.final_state;
        Self {
            termination: traj.termination.clone(),
            steps: last.step,
            t_final: last.t,
            sup_f: last.f.sup_norm(),
            mean_f: last.f.mean(),
            worst_max_principle_violation: traj.worst_max_principle_violation(),
            max_newton_iterations: traj.records.iter().map(|r| r.newton_iterations).max().unwrap_or(0),
            max_velocity_mean: traj.records.iter().map(|r| r.velocity_mean).fold(0.0, f64::max),
        }
    }
}

/// Long format `t,k,re,im` for `k = 0..=n/2`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,k,re,im\n");
    for r in &traj.records {
        let n = r.f.n() as i64;
        for k in 0..=n / 2 {
            let a = r.f.mode(k);
            let _ = writeln!(s, "{:.16e},{k},{:.16e},{:.16e}", r.t, a.re, a.im);
        }
    }
    s
}

pub fn diagnostics_csv(traj: &Trajectory) -> String {
    let mut s = String::from(
        "step,t,dt,mean_f,sup_f,sup_velocity,velocity_mean,newton_iterations,gmres_iterations,\
         phi_residual,evaluations,max_mud_iterations,max_principle_violation,min_ellipticity\n",
    );
    for r in &traj.records {
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{:.16e},{},{},{:.16e},{:.16e}",
            r.step,
            r.t,
            r.dt,
            r.mean_f,
            r.sup_f,
            r.sup_velocity,
            r.velocity_mean,
            r.newton_iterations,
            r.gmres_iterations,
            r.phi_residual,
            r.evaluations,
            r.max_mud_iterations,
            r.max_principle_violation,
            r.min_ellipticity,
        );
    }
    s
}

const W: f64 = 640.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

fn svg_frame(title: &str, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{title}</text>"#, W / 2.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, W / 2.0, H - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{y_label}</text>"#,
        H / 2.0,
        H / 2.0
    );
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}" text-anchor="middle">{:.3}</text>"#, H - PAD + 14.0, x_range.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{:.3}</text>"#, W - PAD, H - PAD + 14.0, x_range.1);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.3e}</text>"#, PAD - 4.0, H - PAD, y_range.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.3e}</text>"#, PAD - 4.0, PAD + 4.0, y_range.1);
    s
}

fn to_px(x: f64, y: f64, xr: (f64, f64), yr: (f64, f64)) -> (f64, f64) {
    let px = PAD + (x - xr.0) / (xr.1 - xr.0) * (W - 2.0 * PAD);
    let py = H - PAD - (y - yr.0) / (yr.1 - yr.0) * (H - 2.0 * PAD);
    (px, py)
}

fn polyline(points: &[(f64, f64)], xr: (f64, f64), yr: (f64, f64), color: &str) -> String {
    let pts: Vec<String> = points
        .iter()
        .filter(|(_, y)| y.is_finite())
        .map(|&(x, y)| {
            let (px, py) = to_px(x, y, xr, yr);
            format!("{px:.2},{py:.2}")
        })
        .collect();
    format!(r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" ")) + "\n"
}

fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    if !(hi > lo) {
        let m = if lo.is_finite() { lo } else { 0.0 };
        let d = if m == 0.0 { 1.0 } else { m.abs() * 0.1 };
        return (m - d, m + d);
    }
    let d = 0.05 * (hi - lo);
    (lo - d, hi + d)
}

/// Interface profiles at up to `count` evenly spaced records.
pub fn interface_svg(traj: &Trajectory, count: usize) -> String {
    let n = traj.records.len();
    let count = count.clamp(1, COLORS.len()).min(n.max(1));
    let picks: Vec<usize> = if n <= 1 {
        (0..n).collect()
    } else {
        let mut p: Vec<usize> = (0..count).map(|i| i * (n - 1) / (count - 1).max(1)).collect();
        p.dedup();
        p
    };
    const SAMPLES: usize = 200;
    let curves: Vec<(f64, Vec<(f64, f64)>)> = picks
        .iter()
        .map(|&i| {
            let r = &traj.records[i];
            let pts = (0..=SAMPLES)
                .map(|j| {
                    let x = std::f64::consts::TAU * j as f64 / SAMPLES as f64;
                    (x, r.f.eval_at(x))
                })
                .collect();
            (r.t, pts)
        })
        .collect();
    let (lo, hi) = curves
        .iter()
        .flat_map(|(_, c)| c.iter().map(|p| p.1))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let xr = (0.0, std::f64::consts::TAU);
    let yr = padded_range(lo, hi);
    let mut s = svg_frame("interface y = f(x, t)", "x", "f", xr, yr);
    for (i, (t, c)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        s += &polyline(c, xr, yr, color);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">t = {t:.3}</text>"#,
            W - PAD - 70.0,
            PAD + 14.0 + 13.0 * i as f64
        );
    }
    s += "</svg>\n";
    s
}

/// `log10 |a_k(t)|` for the modes `k = 1..=kmax`; values at roundoff level are dropped.
pub fn amplitude_svg(traj: &Trajectory, kmax: i64) -> String {
    let times = traj.times();
    let t_range = padded_range(
        times.first().copied().unwrap_or(0.0),
        times.last().copied().unwrap_or(1.0),
    );
    let series: Vec<(i64, Vec<(f64, f64)>)> = (1..=kmax.min(COLORS.len() as i64))
        .map(|k| {
            let pts = times
                .iter()
                .zip(traj.mode_amplitudes(k))
                .map(|(&t, a)| (t, if a > 1e-300 { a.log10() } else { f64::NAN }))
                .collect();
            (k, pts)
        })
        .collect();
    let (lo, hi) = series
        .iter()
        .flat_map(|(_, c)| c.iter().map(|p| p.1))
        .filter(|y| y.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let yr = padded_range(lo.max(hi - 16.0), hi);
    let mut s = svg_frame("mode amplitudes", "t", "log10 |a_k|", t_range, yr);
    for (i, (k, c)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let clipped: Vec<(f64, f64)> = c.iter().map(|&(t, y)| (t, if y >= yr.0 { y } else { f64::NAN })).collect();
        s += &polyline(&clipped, t_range, yr, color);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">k = {k}</text>"#,
            W - PAD - 50.0,
            PAD + 14.0 + 13.0 * i as f64
        );
    }
    s += "</svg>\n";
    s
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// Writes every output of a run into `dir` and returns the paths written.
pub fn write_outputs(traj: &Trajectory, config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let snapshot = Snapshot {
        config: config.clone(),
        state: traj.final_state.clone(),
    };
    let mut out = vec![
        write_file(dir, TRAJECTORY_FILE, &trajectory_csv(traj))?,
        write_file(dir, DIAGNOSTICS_FILE, &diagnostics_csv(traj))?,
        write_file(dir, SNAPSHOT_FILE, &to_json(&snapshot))?,
        write_file(dir, SUMMARY_FILE, &to_json(&RunSummary::of(traj)))?,
    ];
    if config.output.svg {
        out.push(write_file(dir, INTERFACE_SVG, &interface_svg(traj, config.output.svg_snapshots))?);
        let kmax = (config.grid.nx as i64 / 2 - 1).min(4);
        out.push(write_file(dir, AMPLITUDE_SVG, &amplitude_svg(traj, kmax))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::StepRecord;
    use crate::geometry::PeriodicProfile;

    fn fake_trajectory() -> Trajectory {
        let f0 = PeriodicProfile::from_fn(8, |x| 1e-3 * (2.0 * x).cos()).unwrap();
        let state = SimState::initial(f0, 0.1).unwrap();
        let mut cfg = RunConfig::default();
        cfg.grid.nx = 8;
        cfg.grid.ny_w = 7;
        cfg.grid.ny_m = 7;
        cfg.run.t_end = 0.2;
        cfg.run.dt = 0.1;
        let mut stepper = cfg.stepper().unwrap();
        crate::evolution::simulate_from(&mut stepper, state).unwrap()
    }

    #[test]
    fn csv_shapes() {
        let traj = fake_trajectory();
        let csv = trajectory_csv(&traj);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,k,re,im");
        assert_eq!(lines.len(), 1 + traj.records.len() * 5);
        let fields: Vec<f64> = lines[3].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(fields[1], 2.0);
        assert!((fields[2] - 5e-4).abs() < 1e-15);
        let diag = diagnostics_csv(&traj);
        let header_cols = diag.lines().next().unwrap().split(',').count();
        assert!(diag.lines().skip(1).all(|l| l.split(',').count() == header_cols));
        let _: Option<&StepRecord> = traj.records.first();
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let traj = fake_trajectory();
        for s in [interface_svg(&traj, 4), amplitude_svg(&traj, 3)] {
            assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
            assert!(s.contains("<polyline"));
            assert!(!s.contains("NaN"));
        }
    }

    #[test]
    fn snapshot_roundtrip() {
        let traj = fake_trajectory();
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            grid: crate::io::config::GridConfig { nx: 8, ny_w: 7, ny_m: 7 },
            ..RunConfig::default()
        };
        let written = write_outputs(&traj, &cfg, dir.path()).unwrap();
        assert_eq!(written.len(), 6);
        let snap = load_snapshot(dir.path().join(SNAPSHOT_FILE)).unwrap();
        assert_eq!(snap.state, traj.final_state);
        assert_eq!(snap.config, cfg);
    }
}
