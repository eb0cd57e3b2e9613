//! Text persistence for fields, trajectories, and experiment outputs.
//!
//! Every number is rendered with seventeen significant digits in the style
//! of C's `%.17g`, which round-trips any finite double exactly, so repeating
//! a run over identical inputs reproduces the files byte for byte. Field
//! files are two space-separated columns under a `# x u` header; everything
//! tabular is a comma-separated file with one header line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, Perturbation, StabilityReport, StabilityRun, SweepTable};
use crate::grid::{Field, Grid, Side};
use crate::modulation::ModulationState;
use crate::solver::{BoundarySignal, SolverConfig, Trajectory};

/// Renders `v` like C's `%.17g`: seventeen significant digits, fixed-point
/// notation for decimal exponents in `[-4, 17)`, exponential otherwise,
/// trailing zeros stripped.
pub fn g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sign = if v < 0.0 { "-" } else { "" };
    let formatted = format!("{:.16e}", v.abs());
    let (mantissa, exp) = formatted.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent digits");
    let digits: String = mantissa.chars().filter(|ch| *ch != '.').collect();
    let trimmed = digits.trim_end_matches('0');
    let trimmed = if trimmed.is_empty() { "0" } else { trimmed };

    if !(-4..17).contains(&exp) {
        let mut out = String::new();
        out.push_str(sign);
        out.push_str(&trimmed[..1]);
        if trimmed.len() > 1 {
            out.push('.');
            out.push_str(&trimmed[1..]);
        }
        let esign = if exp < 0 { '-' } else { '+' };
        let _ = write!(out, "e{esign}{:02}", exp.abs());
        out
    } else if exp >= 0 {
        let int_len = exp as usize + 1;
        let mut out = String::from(sign);
        if trimmed.len() <= int_len {
            out.push_str(trimmed);
            out.extend(std::iter::repeat('0').take(int_len - trimmed.len()));
        } else {
            out.push_str(&trimmed[..int_len]);
            out.push('.');
            out.push_str(&trimmed[int_len..]);
        }
        out
    } else {
        let mut out = String::from(sign);
        out.push_str("0.");
        out.extend(std::iter::repeat('0').take((-exp) as usize - 1));
        out.push_str(trimmed);
        out
    }
}

fn format_err(path: &Path, what: impl Into<String>) -> Error {
    Error::Format {
        file: path.display().to_string(),
        what: what.into(),
    }
}

fn parse_f64(path: &Path, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format_err(path, format!("unparsable number {s:?}")))
}

/// Writes a field as two space-separated columns under a `# x u` header.
pub fn write_field(path: &Path, f: &Field) -> Result<()> {
    let mut out = String::with_capacity(f.len() * 40 + 8);
    out.push_str("# x u\n");
    for k in 0..f.len() {
        let _ = writeln!(out, "{} {}", g17(f.grid.x(k)), g17(f.values[k]));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a field file, reconstructing the grid from the coordinate column.
///
/// The side is inferred from the range: a domain starting at zero is a right
/// half-line, one ending at zero a left half-line, anything else must be
/// symmetric about zero.
pub fn read_field(path: &Path) -> Result<Field> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "# x u" => {}
        _ => return Err(format_err(path, "missing \"# x u\" header")),
    }
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split_whitespace();
        let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(format_err(path, format!("line {}: expected two columns", ln + 2)));
        };
        xs.push(parse_f64(path, a)?);
        vs.push(parse_f64(path, b)?);
    }
    if xs.len() < 2 {
        return Err(format_err(path, "fewer than two samples"));
    }
    let (x_min, x_max) = (xs[0], *xs.last().unwrap());
    let h = (x_max - x_min) / (xs.len() - 1) as f64;
    let near = |a: f64, b: f64| (a - b).abs() <= 1e-9 * h.max(1.0);
    let (side, extent) = if near(x_min, 0.0) {
        (Side::RightHalfLine, x_max)
    } else if near(x_max, 0.0) {
        (Side::LeftHalfLine, -x_min)
    } else if near(x_min, -x_max) {
        (Side::FullLine, x_max)
    } else {
        return Err(format_err(path, "coordinates fit no supported domain"));
    };
    let grid = Grid::make(side, extent, xs.len())?;
    for (k, &x) in xs.iter().enumerate() {
        if (x - grid.x(k)).abs() > 1e-9 * h.max(1.0) {
            return Err(format_err(path, format!("coordinate {k} is off the uniform lattice")));
        }
    }
    Ok(Field::new(grid, vs))
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::RightHalfLine => "right",
        Side::LeftHalfLine => "left",
        Side::FullLine => "full",
    }
}

fn parse_side(path: &Path, s: &str) -> Result<Side> {
    match s {
        "right" => Ok(Side::RightHalfLine),
        "left" => Ok(Side::LeftHalfLine),
        "full" => Ok(Side::FullLine),
        _ => Err(format_err(path, format!("unknown side {s:?}"))),
    }
}

fn signal_name(b: &BoundarySignal) -> &'static str {
    if b.is_homogeneous() {
        "homogeneous"
    } else {
        "signal"
    }
}

/// Writes the solver manifest: every solver parameter plus the grid and the
/// step metadata, one `key = value` line each.
pub fn write_manifest(path: &Path, traj: &Trajectory) -> Result<()> {
    let cfg = &traj.config;
    let g = cfg.grid;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("side", side_name(g.side).to_string());
    kv("extent", g17(g.x_max.max(-g.x_min)));
    kv("n", format!("{}", g.n_points));
    kv("h", g17(g.h));
    kv("dt", g17(cfg.dt));
    kv("t_end", g17(cfg.t_end));
    kv("boundary_value", signal_name(&cfg.boundary_value).to_string());
    kv(
        "boundary_slope",
        match &cfg.boundary_slope {
            None => "none".to_string(),
            Some(s) => signal_name(s).to_string(),
        },
    );
    kv("scheme_theta", g17(cfg.scheme_theta));
    kv("nonlinear_tol", g17(cfg.nonlinear_tol));
    kv("nonlinear_max_iter", format!("{}", cfg.nonlinear_max_iter));
    kv("stride", format!("{}", cfg.snapshot_stride));
    kv("steps", format!("{}", traj.steps));
    kv("backward", format!("{}", traj.backward));
    kv("contaminated", format!("{}", traj.contaminated));
    fs::write(path, out)?;
    Ok(())
}

/// Parses a flat `key = value` file; blank lines and `#` comments are
/// skipped, later keys override earlier ones.
pub fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format_err(path, format!("line {}: expected key = value", ln + 1)));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn require<'m>(map: &'m BTreeMap<String, String>, path: &Path, key: &str) -> Result<&'m str> {
    map.get(key)
        .map(String::as_str)
        .ok_or_else(|| format_err(path, format!("missing key {key:?}")))
}

/// Writes the per-step boundary traces.
pub fn write_traces(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = String::with_capacity(traj.trace_times.len() * 80 + 16);
    out.push_str("t,u0,ux0,uxx0\n");
    for k in 0..traj.trace_times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            g17(traj.trace_times[k]),
            g17(traj.trace_u0[k]),
            g17(traj.trace_ux0[k]),
            g17(traj.trace_uxx0[k]),
        );
    }
    fs::write(path, out)?;
    Ok(())
}

fn snap_name(index: usize) -> String {
    format!("snap_{index:06}.csv")
}

/// Persists a trajectory into `dir`: manifest, traces, and one field file
/// per stored snapshot.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_manifest(&dir.join("manifest.txt"), traj)?;
    write_traces(&dir.join("traces.csv"), traj)?;
    for (k, snap) in traj.snapshots.iter().enumerate() {
        write_field(&dir.join(snap_name(k)), snap)?;
    }
    Ok(())
}

/// Reads a trajectory previously written by [`write_trajectory`].
///
/// Only homogeneous runs round-trip: a boundary signal is a closure and is
/// not serializable. The third-order trace is not part of the trace file and
/// comes back as NaN; nothing downstream reads it for homogeneous runs.
pub fn read_trajectory(dir: &Path) -> Result<Trajectory> {
    let manifest_path = dir.join("manifest.txt");
    let m = read_key_values(&manifest_path)?;
    let p = &manifest_path;

    if require(&m, p, "boundary_value")? != "homogeneous" {
        return Err(format_err(p, "only homogeneous runs can be read back"));
    }
    let side = parse_side(p, require(&m, p, "side")?)?;
    let extent = parse_f64(p, require(&m, p, "extent")?)?;
    let n: usize = require(&m, p, "n")?
        .parse()
        .map_err(|_| format_err(p, "bad n"))?;
    let grid = Grid::make(side, extent, n)?;
    let mut cfg = SolverConfig::homogeneous(
        grid,
        parse_f64(p, require(&m, p, "dt")?)?,
        parse_f64(p, require(&m, p, "t_end")?)?,
    );
    cfg.boundary_slope = match require(&m, p, "boundary_slope")? {
        "none" => None,
        "homogeneous" => Some(BoundarySignal::Homogeneous),
        other => return Err(format_err(p, format!("unreadable boundary_slope {other:?}"))),
    };
    cfg.scheme_theta = parse_f64(p, require(&m, p, "scheme_theta")?)?;
    cfg.nonlinear_tol = parse_f64(p, require(&m, p, "nonlinear_tol")?)?;
    cfg.nonlinear_max_iter = require(&m, p, "nonlinear_max_iter")?
        .parse()
        .map_err(|_| format_err(p, "bad nonlinear_max_iter"))?;
    cfg.snapshot_stride = require(&m, p, "stride")?
        .parse()
        .map_err(|_| format_err(p, "bad stride"))?;
    let steps: usize = require(&m, p, "steps")?
        .parse()
        .map_err(|_| format_err(p, "bad steps"))?;
    let backward = require(&m, p, "backward")? == "true";
    let contaminated = require(&m, p, "contaminated")? == "true";

    let traces_path = dir.join("traces.csv");
    let text = fs::read_to_string(&traces_path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "t,u0,ux0,uxx0" => {}
        _ => return Err(format_err(&traces_path, "missing traces header")),
    }
    let mut trace_times = Vec::new();
    let mut trace_u0 = Vec::new();
    let mut trace_ux0 = Vec::new();
    let mut trace_uxx0 = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(format_err(&traces_path, "expected four columns"));
        }
        trace_times.push(parse_f64(&traces_path, cols[0])?);
        trace_u0.push(parse_f64(&traces_path, cols[1])?);
        trace_ux0.push(parse_f64(&traces_path, cols[2])?);
        trace_uxx0.push(parse_f64(&traces_path, cols[3])?);
    }
    if trace_times.len() != steps + 1 {
        return Err(format_err(&traces_path, "trace length disagrees with the manifest"));
    }

    let sign = if backward { -1.0 } else { 1.0 };
    let mut times = vec![0.0];
    let mut snapshots = vec![read_field(&dir.join(snap_name(0)))?];
    for step in 1..=steps {
        if step % cfg.snapshot_stride == 0 || step == steps {
            let idx = snapshots.len();
            snapshots.push(read_field(&dir.join(snap_name(idx)))?);
            times.push(sign * step as f64 * cfg.dt);
        }
    }
    for snap in &snapshots {
        if snap.grid != grid {
            return Err(format_err(&manifest_path, "snapshot grid disagrees with the manifest"));
        }
    }

    Ok(Trajectory {
        config: cfg,
        times,
        snapshots,
        trace_times,
        trace_u0,
        trace_ux0,
        trace_uxx0,
        trace_uxxx0: vec![f64::NAN; steps + 1],
        steps,
        backward,
        contaminated,
    })
}

/// Writes the per-snapshot conservation diagnostics.
pub fn write_diagnostics(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut out = String::with_capacity(records.len() * 120 + 64);
    out.push_str("t,mass,energy,flux_mass_cum,flux_energy_cum,mass_residual,energy_residual\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            g17(r.t),
            g17(r.mass),
            g17(r.energy),
            g17(r.flux_mass_cum),
            g17(r.flux_energy_cum),
            g17(r.mass_residual),
            g17(r.energy_residual),
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes the tracked modulation series.
pub fn write_modulation(path: &Path, states: &[ModulationState]) -> Result<()> {
    let mut out = String::with_capacity(states.len() * 100 + 48);
    out.push_str("t,rho,rho_dot,z_l2,z_h1,orth_residual\n");
    for s in states {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            g17(s.t),
            g17(s.rho),
            g17(s.rho_dot_estimate),
            g17(s.z_l2),
            g17(s.z_h1),
            g17(s.orth_residual),
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes the spectrum table and one field file per eigenvector.
pub fn write_spectrum(dir: &Path, pairs: &[(f64, Field)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut out = String::from("index,eigenvalue\n");
    for (k, (lambda, _)) in pairs.iter().enumerate() {
        let _ = writeln!(out, "{k},{}", g17(*lambda));
    }
    fs::write(dir.join("spectrum.csv"), out)?;
    for (k, (_, v)) in pairs.iter().enumerate() {
        write_field(&dir.join(format!("eigenvector_{k:02}.csv")), v)?;
    }
    Ok(())
}

fn report_lines(report: &StabilityReport) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("pass", format!("{}", report.pass));
    kv("sup_distance", g17(report.sup_distance));
    kv("envelope", g17(report.envelope));
    kv("measured_c0", g17(report.measured_c0));
    kv("rho_drift", g17(report.rho_drift));
    kv("measured_rate_constant", g17(report.measured_rate_constant));
    kv("mass_residual_ceiling", g17(report.identity_ceilings.0));
    kv("energy_residual_ceiling", g17(report.identity_ceilings.1));
    kv("growth_ratio", g17(report.growth_ratio));
    kv("mass_loss_fraction", g17(report.mass_loss_fraction));
    kv("in_tube_throughout", format!("{}", report.in_tube_throughout));
    kv(
        "failure",
        match &report.failure {
            None => "none".to_string(),
            Some((t, what)) => format!("t = {}: {what}", g17(*t)),
        },
    );
    out
}

/// Writes the human-readable run summary.
pub fn write_report(path: &Path, report: &StabilityReport) -> Result<()> {
    fs::write(path, report_lines(report))?;
    Ok(())
}

/// Writes the experiment manifest: the physical cell and every numerical
/// parameter, one `key = value` line each, using the same keys the CLI and
/// config files use.
pub fn write_experiment_manifest(path: &Path, cfg: &ExperimentConfig) -> Result<()> {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("side", side_name(cfg.side).to_string());
    kv("c", g17(cfg.c));
    kv("L", g17(cfg.l));
    kv("alpha", g17(cfg.alpha));
    kv("perturbation", cfg.perturbation.name().to_string());
    kv("extent", g17(cfg.extent));
    kv("n", format!("{}", cfg.n_points));
    kv("dt", g17(cfg.dt));
    kv("t_end", g17(cfg.t_end));
    kv("stride", format!("{}", cfg.stride));
    kv("seed", format!("{}", cfg.seed));
    kv("acceptance_multiple", g17(cfg.acceptance_multiple));
    fs::write(path, out)?;
    Ok(())
}

/// Applies config-file keys onto an [`ExperimentConfig`]; unknown keys are
/// an error so typos cannot silently disappear.
pub fn apply_key_values(
    cfg: &mut ExperimentConfig,
    map: &BTreeMap<String, String>,
    path: &Path,
) -> Result<()> {
    for (k, v) in map {
        match k.as_str() {
            "side" => cfg.side = parse_side(path, v)?,
            "c" => cfg.c = parse_f64(path, v)?,
            "L" => cfg.l = parse_f64(path, v)?,
            "alpha" => cfg.alpha = parse_f64(path, v)?,
            "perturbation" => cfg.perturbation = Perturbation::parse(v)?,
            "extent" => cfg.extent = parse_f64(path, v)?,
            "n" => {
                cfg.n_points = v.parse().map_err(|_| format_err(path, "bad n"))?;
            }
            "dt" => cfg.dt = parse_f64(path, v)?,
            "t_end" => cfg.t_end = parse_f64(path, v)?,
            "stride" => {
                cfg.stride = v.parse().map_err(|_| format_err(path, "bad stride"))?;
            }
            "out" => cfg.out_dir = v.clone(),
            "seed" => {
                cfg.seed = v.parse().map_err(|_| format_err(path, "bad seed"))?;
            }
            "acceptance_multiple" => cfg.acceptance_multiple = parse_f64(path, v)?,
            other => {
                return Err(format_err(path, format!("unknown config key {other:?}")));
            }
        }
    }
    Ok(())
}

/// Writes the full artifact set of a completed run into `dir`: experiment
/// manifest, solver manifest, traces, snapshots, diagnostics, modulation,
/// and the report. Every file is present for every run.
pub fn write_run_artifacts(dir: &Path, run: &StabilityRun) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_experiment_manifest(&dir.join("experiment.txt"), &run.config)?;
    write_trajectory(dir, &run.trajectory)?;
    write_diagnostics(&dir.join("diagnostics.csv"), &run.diagnostics)?;
    write_modulation(&dir.join("modulation.csv"), &run.modulation)?;
    write_report(&dir.join("report.txt"), &run.report)?;
    Ok(())
}

/// Writes the sweep table; commas inside failure reasons become semicolons
/// to keep the file single-delimiter.
pub fn write_sweep(path: &Path, table: &SweepTable) -> Result<()> {
    let mut out = String::from(
        "c,L,alpha,pass,sup_distance,envelope,measured_c0,rho_drift,\
         measured_rate_constant,mass_residual_ceiling,energy_residual_ceiling,\
         growth_ratio,mass_loss_fraction,reason\n",
    );
    for row in &table.rows {
        let (pass, rep) = match &row.report {
            Some(r) => (format!("{}", r.pass), r.clone()),
            None => (
                "false".to_string(),
                StabilityReport {
                    sup_distance: f64::NAN,
                    envelope: f64::NAN,
                    measured_c0: f64::NAN,
                    rho_drift: f64::NAN,
                    measured_rate_constant: f64::NAN,
                    identity_ceilings: (f64::NAN, f64::NAN),
                    growth_ratio: f64::NAN,
                    mass_loss_fraction: f64::NAN,
                    in_tube_throughout: false,
                    failure: None,
                    pass: false,
                },
            ),
        };
        let _ = writeln!(
            out,
            "{},{},{},{pass},{},{},{},{},{},{},{},{},{},{}",
            g17(row.c),
            g17(row.l),
            g17(row.alpha),
            g17(rep.sup_distance),
            g17(rep.envelope),
            g17(rep.measured_c0),
            g17(rep.rho_drift),
            g17(rep.measured_rate_constant),
            g17(rep.identity_ceilings.0),
            g17(rep.identity_ceilings.1),
            g17(rep.growth_ratio),
            g17(rep.mass_loss_fraction),
            row.reason.replace(',', ";"),
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Convenience: `dir` joined with a file name, for call sites working with
/// string paths from configs.
pub fn in_dir(dir: &str, name: &str) -> PathBuf {
    Path::new(dir).join(name)
}
