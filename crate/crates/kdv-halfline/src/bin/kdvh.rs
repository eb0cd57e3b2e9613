//! Command-line front end: each subcommand runs one capability, writes its
//! artifact files, prints one line per check, and exits 0 only when every
//! check passed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use kdv_halfline::calculus::quadrature;
use kdv_halfline::diagnostics::identity_residuals;
use kdv_halfline::experiment::{
    run_backward_left, run_stability, verify_lemma52, ExperimentConfig, StabilityRun, SweepRow,
    SweepTable,
};
use kdv_halfline::grid::{Field, Grid, Side};
use kdv_halfline::io::{
    self, apply_key_values, g17, read_key_values, read_trajectory, write_field, write_modulation,
    write_run_artifacts, write_spectrum, write_sweep,
};
use kdv_halfline::modulation;
use kdv_halfline::soliton::Soliton;
use kdv_halfline::spectral::{build_operator, coercivity_check, lowest_eigenpairs};
use kdv_halfline::Result;

#[derive(Parser)]
#[command(
    name = "kdvh",
    about = "Half-line KdV laboratory: solitons, boundary identities, modulation, spectra, stability experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit soliton profile and derivative samples, check the profile ODE.
    Soliton(SolitonArgs),
    /// Evolve one configured run and store the trajectory.
    Simulate(ConfigArgs),
    /// Mass/energy identity diagnostics over a stored trajectory.
    Identities(IdentitiesArgs),
    /// Track the soliton translation over a stored trajectory.
    Modulate(ModulateArgs),
    /// Spectrum of the linearized operator and the coercivity constant.
    Spectral(SpectralArgs),
    /// Full finite-horizon stability experiment with report.
    Stability(ConfigArgs),
    /// Grid of stability experiments over (c, L, alpha).
    Sweep(SweepArgs),
}

/// Flags mirroring the experiment configuration; a config file provides
/// defaults, flags override it.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// Flat `key = value` config file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Domain: right, left, or full.
    #[arg(long)]
    side: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// none, scaled_bump, or scaled_gradient.
    #[arg(long)]
    perturbation: Option<String>,
    #[arg(long)]
    extent: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "acceptance-multiple")]
    acceptance_multiple: Option<f64>,
}

impl ConfigArgs {
    /// Defaults, then the config file, then the flags; grid and horizon
    /// defaults are re-derived from the final physical cell before explicit
    /// numeric overrides are applied.
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut map: BTreeMap<String, String> = match &self.config {
            Some(path) => read_key_values(path)?,
            None => BTreeMap::new(),
        };
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        };
        put("side", self.side.clone());
        put("c", self.c.map(g17));
        put("L", self.l.map(g17));
        put("alpha", self.alpha.map(g17));
        put("perturbation", self.perturbation.clone());
        put("extent", self.extent.map(g17));
        put("n", self.n.map(|v| v.to_string()));
        put("dt", self.dt.map(g17));
        put("t_end", self.t_end.map(g17));
        put("stride", self.stride.map(|v| v.to_string()));
        put("out", self.out.clone());
        put("seed", self.seed.map(|v| v.to_string()));
        put("acceptance_multiple", self.acceptance_multiple.map(g17));

        let fallback = Path::new("<flags>");
        let c = map.get("c").map_or(Ok(1.0), |v| parse_flag(v, "c"))?;
        let l = map.get("L").map_or(Ok(15.0), |v| parse_flag(v, "L"))?;
        let alpha = map.get("alpha").map_or(Ok(0.0), |v| parse_flag(v, "alpha"))?;
        let mut cfg = ExperimentConfig::stability(c, l, alpha);
        if let Some(t) = map.get("t_end") {
            // the default extent depends on the horizon, so a shorter run
            // re-derives its domain before explicit overrides land
            let t: f64 = parse_flag(t, "t_end")?;
            let h = cfg.extent / (cfg.n_points - 1) as f64;
            cfg.extent = kdv_halfline::experiment::default_extent(c, l, t);
            cfg.n_points = (cfg.extent / h).round() as usize + 1;
            let steps = (t / cfg.dt).round().max(1.0) as usize;
            cfg.stride = (steps / 100).max(1);
        }
        apply_key_values(&mut cfg, &map, fallback)?;
        Ok(cfg)
    }
}

fn parse_flag(v: &str, what: &'static str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| kdv_halfline::Error::Format {
        file: "<flags>".to_string(),
        what: format!("bad value for {what}: {v:?}"),
    })
}

#[derive(Args)]
struct SolitonArgs {
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Full-line half-width; defaults to 40 / sqrt(c).
    #[arg(long)]
    extent: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value = "out")]
    out: String,
}

#[derive(Args)]
struct IdentitiesArgs {
    /// Directory holding a stored trajectory.
    #[arg(long)]
    dir: PathBuf,
    #[arg(long = "mass-tol", default_value_t = 1e-5)]
    mass_tol: f64,
    #[arg(long = "energy-tol", default_value_t = 1e-4)]
    energy_tol: f64,
}

#[derive(Args)]
struct ModulateArgs {
    /// Directory holding a stored trajectory.
    #[arg(long)]
    dir: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long = "L", default_value_t = 15.0)]
    l: f64,
    #[arg(long = "orth-tol", default_value_t = 1e-8)]
    orth_tol: f64,
}

#[derive(Args)]
struct SpectralArgs {
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    extent: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Number of eigenpairs (at most six).
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 12)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: String,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    base: ConfigArgs,
    /// Comma-separated speeds.
    #[arg(long = "c-list", value_delimiter = ',', default_value = "1")]
    c_list: Vec<f64>,
    /// Comma-separated wall offsets.
    #[arg(long = "l-list", value_delimiter = ',', default_value = "15")]
    l_list: Vec<f64>,
    /// Comma-separated perturbation sizes.
    #[arg(long = "alpha-list", value_delimiter = ',', default_value = "0.02")]
    alpha_list: Vec<f64>,
}

struct Checks {
    all_ok: bool,
}

impl Checks {
    fn new() -> Checks {
        Checks { all_ok: true }
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        let verdict = if ok { "ok" } else { "FAIL" };
        println!("check {name}: {verdict} ({detail})");
        self.all_ok &= ok;
    }
}

fn cmd_soliton(args: &SolitonArgs) -> Result<bool> {
    let extent = args.extent.unwrap_or(40.0 / args.c.sqrt());
    let n = args.n.unwrap_or(((extent / 0.01).round() as usize) * 2 + 1);
    let grid = Grid::make(Side::FullLine, extent, n)?;
    let s = Soliton::new(args.c)?;

    let out = Path::new(&args.out);
    std::fs::create_dir_all(out)?;
    write_field(&out.join("profile.csv"), &s.sample(grid))?;
    for order in 1..=3u32 {
        write_field(
            &out.join(format!("profile_d{order}.csv")),
            &s.sample_derivative(grid, order)?,
        )?;
    }

    let mut checks = Checks::new();
    let residual = s.ode_residual(grid);
    checks.check("profile_ode_residual", residual <= 1e-10, format!("{}", g17(residual)));

    let measured_mass = quadrature(&Field::new(
        grid,
        s.sample(grid).values.iter().map(|v| 0.5 * v * v).collect(),
    ));
    let mass_err = (measured_mass - s.mass()).abs() / s.mass();
    checks.check("mass_closed_form", mass_err <= 1e-4, format!("rel {}", g17(mass_err)));
    println!(
        "soliton c = {}: amplitude {}, mass {}, energy {}",
        g17(args.c),
        g17(s.profile(0.0)),
        g17(s.mass()),
        g17(s.energy())
    );
    Ok(checks.all_ok)
}

fn cmd_simulate(args: &ConfigArgs) -> Result<bool> {
    let cfg = args.resolve()?;
    let run = dispatch_run(&cfg)?;
    let dir = PathBuf::from(&cfg.out_dir);
    write_run_artifacts(&dir, &run)?;

    let mut checks = Checks::new();
    checks.check(
        "finished",
        run.trajectory.final_state().is_finite(),
        format!("{} steps", run.trajectory.steps),
    );
    if run.trajectory.contaminated {
        println!("note: far field reached the truncation boundary; treat late times with care");
    }
    println!("artifacts in {}", dir.display());
    Ok(checks.all_ok)
}

fn cmd_identities(args: &IdentitiesArgs) -> Result<bool> {
    let traj = read_trajectory(&args.dir)?;
    let records = identity_residuals(&traj)?;
    io::write_diagnostics(&args.dir.join("diagnostics.csv"), &records)?;

    let mass_ceiling = records.iter().map(|r| r.mass_residual.abs()).fold(0.0, f64::max);
    let energy_ceiling = records.iter().map(|r| r.energy_residual.abs()).fold(0.0, f64::max);
    let mut monotone = true;
    for pair in records.windows(2) {
        if pair[1].mass - pair[0].mass > 2.0 * mass_ceiling + 1e-14 * records[0].mass.abs()
            || pair[1].energy - pair[0].energy
                > 2.0 * energy_ceiling + 1e-14 * records[0].energy.abs()
        {
            monotone = false;
        }
    }

    let mut checks = Checks::new();
    checks.check(
        "mass_identity",
        mass_ceiling <= args.mass_tol,
        format!("ceiling {}", g17(mass_ceiling)),
    );
    checks.check(
        "energy_identity",
        energy_ceiling <= args.energy_tol,
        format!("ceiling {}", g17(energy_ceiling)),
    );
    checks.check("monotone_decay", monotone, "within 2x residual ceilings".to_string());
    Ok(checks.all_ok)
}

fn cmd_modulate(args: &ModulateArgs) -> Result<bool> {
    let traj = read_trajectory(&args.dir)?;
    let states = modulation::track(&traj, args.c, args.l)?;
    write_modulation(&args.dir.join("modulation.csv"), &states)?;

    let worst_orth = states.iter().map(|s| s.orth_residual.abs()).fold(0.0, f64::max);
    let drift = states
        .iter()
        .filter(|s| s.rho_dot_estimate.is_finite())
        .map(|s| (s.rho_dot_estimate - args.c).abs())
        .fold(0.0, f64::max);

    let mut checks = Checks::new();
    checks.check(
        "orthogonality",
        worst_orth <= args.orth_tol,
        format!("worst {}", g17(worst_orth)),
    );
    checks.check("tracked", !states.is_empty(), format!("{} snapshots", states.len()));
    println!("sup |rho' - c| = {}", g17(drift));
    Ok(checks.all_ok)
}

fn cmd_spectral(args: &SpectralArgs) -> Result<bool> {
    let extent = args.extent.unwrap_or(40.0 / args.c.sqrt());
    let n = args.n.unwrap_or(((extent / 0.02).round() as usize) * 2 + 1);
    let grid = Grid::make(Side::FullLine, extent, n)?;
    let a = build_operator(args.c, 0.0, grid)?;
    let pairs = lowest_eigenpairs(&a, args.k)?;
    let report = coercivity_check(args.c, grid, args.trials, args.seed)?;

    let out = Path::new(&args.out);
    write_spectrum(out, &pairs)?;
    write_field(&out.join("coercivity_minimizer.csv"), &report.worst_case)?;

    let mut checks = Checks::new();
    let expected = [-1.25 * args.c, 0.0, 0.75 * args.c];
    for (k, (lambda, _)) in pairs.iter().enumerate() {
        if let Some(want) = expected.get(k) {
            let ok = (lambda - want).abs() <= 0.01 * want.abs().max(args.c);
            checks.check(
                &format!("eigenvalue_{k}"),
                ok,
                format!("{} vs {}", g17(*lambda), g17(*want)),
            );
        } else {
            println!("eigenvalue_{k} = {}", g17(*lambda));
        }
    }
    checks.check("coercive", report.kappa > 0.0, format!("kappa {}", g17(report.kappa)));
    checks.check(
        "negative_without_projections",
        report.unconstrained_minimum < 0.0,
        format!("{}", g17(report.unconstrained_minimum)),
    );
    println!(
        "trial kappa {} over {} trials",
        g17(report.trial_kappa),
        args.trials
    );
    Ok(checks.all_ok)
}

fn dispatch_run(cfg: &ExperimentConfig) -> Result<StabilityRun> {
    match cfg.side {
        Side::LeftHalfLine => run_backward_left(cfg),
        _ => run_stability(cfg),
    }
}

fn cmd_stability(args: &ConfigArgs) -> Result<bool> {
    let cfg = args.resolve()?;
    let run = dispatch_run(&cfg)?;
    let dir = PathBuf::from(&cfg.out_dir);
    write_run_artifacts(&dir, &run)?;

    let mut checks = Checks::new();
    let rep = &run.report;
    checks.check(
        "envelope",
        rep.measured_c0.is_finite() && rep.measured_c0 <= cfg.acceptance_multiple,
        format!("measured_c0 {}", g17(rep.measured_c0)),
    );
    checks.check(
        "no_growth_trend",
        rep.growth_ratio.is_finite() && rep.growth_ratio <= 2.0,
        format!("final/first-quarter {}", g17(rep.growth_ratio)),
    );
    if cfg.alpha > 0.0 {
        checks.check(
            "drift",
            rep.rho_drift <= cfg.acceptance_multiple * cfg.alpha,
            format!("sup |rho' - c| {}", g17(rep.rho_drift)),
        );
    }
    checks.check("in_tube", rep.in_tube_throughout, format!("failure: {:?}", rep.failure));
    checks.check("report_pass", rep.pass, format!("mass loss {}", g17(rep.mass_loss_fraction)));

    match verify_lemma52(&run) {
        Ok(drift) => {
            checks.check(
                "restricted_soliton_drift",
                drift.pass,
                format!(
                    "mass dev {} <= {}",
                    g17(drift.mass_deviation_max),
                    g17(drift.mass_bound)
                ),
            );
        }
        Err(e) => checks.check("restricted_soliton_drift", false, e.to_string()),
    }
    println!("artifacts in {}", dir.display());
    Ok(checks.all_ok)
}

fn cell_dir(base: &str, c: f64, l: f64, alpha: f64) -> PathBuf {
    Path::new(base).join(format!("cell_c{}_L{}_a{}", g17(c), g17(l), g17(alpha)))
}

fn cmd_sweep(args: &SweepArgs) -> Result<bool> {
    let base = args.base.resolve()?;
    let mut cells = Vec::new();
    for &c in &args.c_list {
        for &l in &args.l_list {
            for &alpha in &args.alpha_list {
                cells.push((c, l, alpha));
            }
        }
    }
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(c, l, alpha)| {
            let cfg = base.with_cell(c, l, alpha);
            match run_stability(&cfg).and_then(|run| {
                write_run_artifacts(&cell_dir(&base.out_dir, c, l, alpha), &run)?;
                Ok(run)
            }) {
                Ok(run) => SweepRow {
                    c,
                    l,
                    alpha,
                    report: Some(run.report),
                    reason: String::new(),
                },
                Err(e) => SweepRow {
                    c,
                    l,
                    alpha,
                    report: None,
                    reason: e.to_string(),
                },
            }
        })
        .collect();
    let table = SweepTable { rows };
    std::fs::create_dir_all(&base.out_dir)?;
    write_sweep(&io::in_dir(&base.out_dir, "sweep.csv"), &table)?;

    let mut checks = Checks::new();
    let completed = table.rows.iter().filter(|r| r.report.is_some()).count();
    checks.check(
        "all_cells_completed",
        completed == table.rows.len(),
        format!("{completed}/{}", table.rows.len()),
    );
    for (c, alpha, frontier) in table.frontier() {
        match frontier {
            Some(l) => println!(
                "frontier c = {}, alpha = {}: first passing L = {}",
                g17(c),
                g17(alpha),
                g17(l)
            ),
            None => println!(
                "frontier c = {}, alpha = {}: no passing L in sweep",
                g17(c),
                g17(alpha)
            ),
        }
    }
    Ok(checks.all_ok)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Soliton(a) => cmd_soliton(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Identities(a) => cmd_identities(a),
        Command::Modulate(a) => cmd_modulate(a),
        Command::Spectral(a) => cmd_spectral(a),
        Command::Stability(a) => cmd_stability(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
