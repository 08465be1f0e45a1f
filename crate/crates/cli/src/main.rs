use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lmg::analytic;
use lmg::dynamics::{trajectory_all_right, tunneling_period, uniform_grid};
use lmg::entanglement::{report_at_quarter_period, EntanglementReport};
use lmg::figures::{figure_tables, summarize};
use lmg::fixtures::worked_example;
use lmg::validation::{run_checks, CheckConfig};
use lmg::{EnergyUnit, LogScalar, ModelParams};

#[derive(Parser)]
#[command(name = "lmg", version, about = "Bosons in a tilted double well: diagonalization, dynamics, tunneling estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve |0, N⟩ and write the occupation trajectory plus a quarter-period entanglement report
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Write the data tables of one figure and a manifest
    Figure(FigureArgs),
    /// Resonance design table in physical units
    Design(DesignArgs),
    /// Cross-check closed forms against diagonalization
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Natural,
    #[value(name = "nK")]
    NanoKelvin,
}

impl From<UnitArg> for EnergyUnit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::Natural => EnergyUnit::Natural,
            UnitArg::NanoKelvin => EnergyUnit::NanoKelvin,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Parameter file (JSON); flags below are then ignored
    #[arg(long, conflicts_with_all = ["n_atoms", "hopping", "interaction", "tilt", "zeta", "zeta_over_n", "tilt_over_j", "resonance_p"])]
    params: Option<PathBuf>,
    #[arg(short = 'N', long = "n-atoms")]
    n_atoms: Option<usize>,
    /// Hopping J
    #[arg(short = 'J', long = "hopping", conflicts_with_all = ["zeta", "zeta_over_n"])]
    hopping: Option<f64>,
    /// Interaction U (default 1)
    #[arg(short = 'U', long = "interaction")]
    interaction: Option<f64>,
    /// Tilt ΔV
    #[arg(long, conflicts_with_all = ["tilt_over_j", "resonance_p"])]
    tilt: Option<f64>,
    /// J = ζ|U|
    #[arg(long, conflicts_with = "zeta_over_n")]
    zeta: Option<f64>,
    /// J = (ζ/N)·N·|U|
    #[arg(long = "zeta-over-N")]
    zeta_over_n: Option<f64>,
    /// ΔV = x·J
    #[arg(long = "tilt-over-J", conflicts_with = "resonance_p")]
    tilt_over_j: Option<f64>,
    /// ΔV = 2pU
    #[arg(long = "resonance-p")]
    resonance_p: Option<usize>,
    #[arg(long, value_enum, default_value = "natural")]
    unit: UnitArg,
    /// End time in the reporting unit (default: two tunneling periods)
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long = "t-steps", default_value_t = 400)]
    t_steps: usize,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
    figure: u8,
    #[arg(long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long = "n-atoms", default_value_t = worked_example::N_ATOMS)]
    n_atoms: usize,
    /// Number of atoms that tunnel, p' = N − p
    #[arg(long = "noon-size")]
    noon_size: usize,
    #[arg(long, default_value_t = worked_example::ZETA)]
    zeta: f64,
    /// Interaction U in the chosen unit
    #[arg(long, default_value_t = worked_example::INTERACTION_NK)]
    interaction: f64,
    #[arg(long, value_enum, default_value = "nK")]
    unit: UnitArg,
    /// Print JSON instead of a table
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Halve every tolerance
    #[arg(long)]
    strict: bool,
    #[arg(long = "max-atoms", default_value_t = 10)]
    max_atoms: usize,
}

/// Errors from inconsistent flags map to exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn resolve_params(a: &SimulateArgs) -> anyhow::Result<ModelParams> {
    if let Some(path) = &a.params {
        let params = ModelParams::load(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(params);
    }
    let n = a.n_atoms.ok_or_else(|| usage("either --params or -N/--n-atoms is required"))?;
    let u = a.interaction.unwrap_or(1.0);
    let j = match (a.hopping, a.zeta, a.zeta_over_n) {
        (Some(j), _, _) => j,
        (None, Some(z), _) => z * u.abs(),
        (None, None, Some(r)) => r * n as f64 * u.abs(),
        (None, None, None) if u == 0.0 => 1.0,
        (None, None, None) => return Err(usage("give -J, --zeta or --zeta-over-N")),
    };
    if (a.zeta.is_some() || a.zeta_over_n.is_some()) && u == 0.0 {
        return Err(usage("--zeta and --zeta-over-N need a nonzero interaction"));
    }
    let tilt = match (a.tilt, a.tilt_over_j, a.resonance_p) {
        (Some(t), _, _) => t,
        (None, Some(x), _) => x * j,
        (None, None, Some(p)) => *analytic::resonance_tilt(p, u),
        (None, None, None) => 0.0,
    };
    Ok(ModelParams::new(n, j, u, tilt)?.with_unit(a.unit.into()))
}

fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let params = resolve_params(&a)?;
    let scale = params.unit.time_scale();
    let period = tunneling_period(&params).ok().and_then(|p| p.period.to_f64().ok());
    let t_max = match (a.t_max, period) {
        (Some(t), _) => t,
        (None, Some(p)) => 2.0 * p,
        (None, None) => 10.0 * params.time_unit() * scale,
    };
    if !(t_max > 0.0) || a.t_steps == 0 {
        return Err(usage("--t-max must be positive and --t-steps at least 1"));
    }
    let grid = uniform_grid(t_max / scale, a.t_steps);
    let series = trajectory_all_right(&params, &grid)?.rescaled_time(scale);
    fs::create_dir_all(&a.out)?;
    series.to_table().save(&a.out.join("trajectory.csv"))?;
    write_json(&a.out.join("params.json"), &serde_json::to_value(params)?)?;
    let report: Option<EntanglementReport> = report_at_quarter_period(&params).ok();
    match &report {
        Some(r) => write_json(&a.out.join("entanglement.json"), &serde_json::to_value(r)?)?,
        None => eprintln!("no quarter-period entanglement report: tunneling period unavailable"),
    }
    println!(
        "wrote {} time points (N = {}, J = {}, U = {}, tilt = {}) to {}",
        series.len(),
        params.n_atoms,
        params.hopping,
        params.interaction,
        params.tilt,
        a.out.display()
    );
    Ok(())
}

fn unix_timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn figure(a: FigureArgs) -> anyhow::Result<()> {
    let tables = figure_tables(a.figure)?;
    fs::create_dir_all(&a.out_dir)?;
    for t in &tables {
        t.table.save(&a.out_dir.join(&t.name))?;
    }
    let summary = summarize(a.figure, &tables);
    let manifest = json!({
        "figure": a.figure,
        "generated_unix": unix_timestamp(),
        "generator": format!("lmg {}", env!("CARGO_PKG_VERSION")),
        "files": summary.files,
    });
    write_json(&a.out_dir.join(format!("fig{}_manifest.json", a.figure)), &manifest)?;
    for t in &tables {
        println!("{}", a.out_dir.join(&t.name).display());
    }
    Ok(())
}

fn fmt_log(x: LogScalar) -> String {
    match x.to_f64() {
        Ok(v) if (1e-4..1e7).contains(&v.abs()) => format!("{v:.6}"),
        _ => format!("{x:.3}"),
    }
}

fn design(a: DesignArgs) -> anyhow::Result<()> {
    let n = a.n_atoms;
    if a.noon_size == 0 || a.noon_size > n {
        return Err(usage(format!("--noon-size must be in 1..={n}")));
    }
    let p = n - a.noon_size;
    let unit: EnergyUnit = a.unit.into();
    let u = a.interaction;
    let tilt = *analytic::resonance_tilt(p, u);
    let gap = analytic::splitting_resonance(n, p, a.zeta, u)?;
    let period = analytic::resonance_period(n, p, a.zeta, u, unit)?;
    let quarter = period.value / 4.0;
    let window = analytic::suppression_window(n, p, a.zeta, u)?;
    let (e_label, t_label) = match unit {
        EnergyUnit::NanoKelvin => ("nK", "ms"),
        EnergyUnit::Natural => ("E", "hbar/E"),
    };
    if a.json {
        // f64 fields are null when out of range; the log10 fields always carry the magnitude
        let num = |x: LogScalar| x.to_f64().ok();
        let out = json!({
            "n_atoms": n, "p": p, "noon_size": a.noon_size, "zeta": a.zeta, "interaction": u,
            "hopping": a.zeta * u.abs(), "unit": unit, "tilt": tilt,
            "splitting": num(gap.value), "log10_splitting": gap.log10_abs(),
            "period": num(period.value), "log10_period": period.log10_abs(),
            "quarter_period": num(quarter), "log10_quarter_period": quarter.log10_abs(),
            "window": num(window.value), "log10_window": window.log10_abs(),
            "provenance": period.provenance,
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(());
    }
    println!("N = {n}, p = {p} ({} atoms tunnel), zeta = {}, U = {u} {e_label}", a.noon_size, a.zeta);
    println!("{:<26}{}", format!("tilt [{e_label}]"), fmt_log(LogScalar::from_f64(tilt)));
    println!("{:<26}{}", format!("splitting [{e_label}]"), fmt_log(gap.value));
    println!("{:<26}{}", format!("period [{t_label}]"), fmt_log(period.value));
    println!("{:<26}{}", format!("superposition at [{t_label}]"), fmt_log(quarter));
    println!("{:<26}{}", format!("tilt window [{e_label}]"), fmt_log(window.value));
    Ok(())
}

fn check(a: CheckArgs) -> anyhow::Result<bool> {
    let config = CheckConfig {
        max_atoms: a.max_atoms,
        tolerance_scale: if a.strict { CheckConfig::strict().tolerance_scale } else { 1.0 },
    };
    let outcomes = run_checks(config)?;
    println!("{:<6}{:<52}{:>14}{:>14}", "", "check", "error", "tolerance");
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("{status:<6}{:<52}{:>14.3e}{:>14.3e}", o.name, o.error, o.tolerance);
    }
    Ok(outcomes.iter().all(|o| o.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Figure(a) => figure(a).map(|_| true),
        Command::Design(a) => design(a).map(|_| true),
        Command::Check(a) => check(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
