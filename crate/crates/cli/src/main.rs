//! Batch interface to the knowledge-economy solver: parse a JSON config, run
//! solves, comparisons, sweeps or audits, and emit deterministic CSV/JSON
//! artifacts for external plotting.

mod artifacts;
mod config;

use artifacts::{
    breakpoints_json, firm_kind_json, fmt_opt, fmt_sig, json_num, json_opt, residuals_json,
    segments_json, wages_csv, write_file,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{Mode, RunConfig, SweepParam};
use kecon::{
    accounting, audit_no_arbitrage, autonomy_tradeoff, compare_pre_post, compute_h0, gini_of,
    solve_autonomous, solve_non_autonomous, solve_pre_ai, AnalysisError, Equilibrium, SolveError,
};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kecon",
    version,
    about = "Knowledge-economy equilibrium solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one equilibrium and write wages.csv + summary.json
    Solve(RunArgs),
    /// Compare the pre-AI and autonomous equilibria at the same parameters
    Compare(RunArgs),
    /// Sweep a parameter and write one row per point to sweep.csv
    Sweep(RunArgs),
    /// Tabulate the autonomy tradeoff across all three regimes
    Tradeoff(RunArgs),
    /// Compute the independent-producer threshold h0 for the distribution
    H0(RunArgs),
    /// Re-run the no-arbitrage audit for the configured solve
    Audit(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides out_dir from the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict artifacts to one format
    #[arg(long, value_enum, default_value_t = Format::All)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    All,
    Json,
    Csv,
}

impl Format {
    fn json(self) -> bool {
        self != Format::Csv
    }
    fn csv(self) -> bool {
        self != Format::Json
    }
}

/// CLI failure with its process exit code: 2 config, 3 solver, 4 I/O.
enum CliError {
    Config(String),
    Solver(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Solver(m) | CliError::Io(m) => m,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Solver(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Compare(args) => run_compare(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Tradeoff(args) => run_tradeoff(args),
        Command::H0(args) => run_h0(args),
        Command::Audit(args) => run_audit(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_config(args: &RunArgs) -> Result<(RunConfig, PathBuf), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", args.config.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("parsing config: {e}")))?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((cfg, out))
}

fn solve_mode(cfg: &RunConfig, mode: Mode) -> Result<Equilibrium, CliError> {
    let params = cfg.build_params().map_err(CliError::Config)?;
    let eq = match mode {
        Mode::Pre => solve_pre_ai(&params)?,
        Mode::Autonomous => solve_autonomous(&params)?,
        Mode::NonAutonomous => solve_non_autonomous(&params)?,
        _ => return Err(CliError::Config("mode must be a solver mode".into())),
    };
    Ok(eq)
}

fn summary_json(cfg: &RunConfig, eq: &Equilibrium) -> Result<Value, CliError> {
    let accounts = accounting(eq).map_err(|e| CliError::Solver(e.to_string()))?;
    let gini = gini_of(eq, cfg.grid_points);
    let mut summary = json!({
        "regime": eq.regime.to_string(),
        "config_tag": eq.config_tag,
        "breakpoints": breakpoints_json(eq),
        "segments": segments_json(eq),
        "r": json_num(eq.r),
        "compute": {
            "mu_i": json_num(eq.compute.mu_i),
            "mu_w": json_num(eq.compute.mu_w),
            "mu_s": json_num(eq.compute.mu_s),
        },
        "output": json_num(accounts.output),
        "labor_income": json_num(accounts.labor_income),
        "capital_income": json_num(accounts.capital_income),
        "gini": json_num(gini),
        "residuals": residuals_json(eq),
        "audit_max_profit": json_num(eq.residuals.get("audit_max_profit").copied().unwrap_or(0.0)),
    });
    if eq.regime == kecon::Regime::NonAutonomous {
        let adopted = eq.partition.measure(kecon::Occupation::AiAssistedWorker) > 0.0;
        summary["ai_adopted"] = json!(adopted);
    }
    Ok(summary)
}

fn run_solve(args: &RunArgs) -> Result<(), CliError> {
    let (cfg, out) = load_config(args)?;
    if !cfg.mode.is_solver_mode() {
        return Err(CliError::Config(
            "solve requires mode pre|autonomous|non_autonomous".into(),
        ));
    }
    let eq = solve_mode(&cfg, cfg.mode)?;
    if args.format.csv() {
        write(&out, "wages.csv", &wages_csv(&eq, cfg.grid_points))?;
    }
    if args.format.json() {
        let summary = summary_json(&cfg, &eq)?;
        write(&out, "summary.json", &pretty(&summary))?;
    }
    Ok(())
}

fn run_compare(args: &RunArgs) -> Result<(), CliError> {
    let (cfg, out) = load_config(args)?;
    if cfg.mode != Mode::Compare {
        return Err(CliError::Config("compare requires mode = compare".into()));
    }
    let params = cfg.build_params().map_err(CliError::Config)?;
    let pre = solve_pre_ai(&params)?;
    let post = solve_autonomous(&params)?;
    let report = compare_pre_post(&pre, &post, cfg.grid_points)?;
    if args.format.csv() {
        let mut csv = String::from("z,w_pre,w_post,delta\n");
        for (z, delta) in &report.wage_delta {
            let w_pre = pre.wage_at(*z);
            csv.push_str(&format!(
                "{},{},{},{}\n",
                fmt_sig(*z),
                fmt_sig(w_pre),
                fmt_sig(w_pre + delta),
                fmt_sig(*delta)
            ));
        }
        write(&out, "comparison.csv", &csv)?;
    }
    if args.format.json() {
        let doc = json!({
            "z_ai": json_num(params.z_ai()),
            "z_b": json_opt(report.z_b),
            "z_t": json_opt(report.z_t),
            "B_empty": report.z_b.is_none(),
            "T_empty": report.z_t.is_none(),
            "displacement": {
                "workers_shrank": report.displacement.workers_shrank,
                "solvers_grew": report.displacement.solvers_grew,
                "sup_workers_pre": json_num(report.displacement.sup_workers_pre),
                "sup_workers_post": json_num(report.displacement.sup_workers_post),
                "inf_solvers_pre": json_num(report.displacement.inf_solvers_pre),
                "inf_solvers_post": json_num(report.displacement.inf_solvers_post),
            },
            "output_delta": json_num(report.output_delta),
            "labor_income_delta": json_num(report.labor_income_delta),
            "gini_pre": json_num(report.gini_pre),
            "gini_post": json_num(report.gini_post),
            "single_crossing_shape": report.single_crossing_shape,
            "pre_config": report.pre.config_tag,
            "post_config": report.post.config_tag,
        });
        write(&out, "comparison.json", &pretty(&doc))?;
    }
    Ok(())
}

fn run_sweep(args: &RunArgs) -> Result<(), CliError> {
    let (cfg, out) = load_config(args)?;
    if !cfg.mode.is_solver_mode() {
        return Err(CliError::Config(
            "sweep requires mode pre|autonomous|non_autonomous".into(),
        ));
    }
    let sweep = cfg.validate_sweep().map_err(CliError::Config)?.clone();
    let mut csv =
        String::from("param_value,regime_config,r,output,labor_income,gini,w0,w1,z_b,z_t,status\n");
    for i in 0..sweep.steps {
        let t = if sweep.steps == 1 {
            0.0
        } else {
            i as f64 / (sweep.steps - 1) as f64
        };
        let value = sweep.from + (sweep.to - sweep.from) * t;
        let (h, z_ai) = match sweep.param {
            SweepParam::ZAi => (cfg.h, value),
            SweepParam::H => (value, cfg.z_ai),
        };
        let row = sweep_point(&cfg, h, z_ai);
        match row {
            Ok(point) => {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},ok\n",
                    fmt_sig(value),
                    point.tag,
                    fmt_sig(point.r),
                    fmt_sig(point.output),
                    fmt_sig(point.labor_income),
                    fmt_sig(point.gini),
                    fmt_sig(point.w0),
                    fmt_sig(point.w1),
                    fmt_opt(point.z_b),
                    fmt_opt(point.z_t),
                ));
            }
            Err(status) => {
                csv.push_str(&format!("{},,,,,,,,,,{status}\n", fmt_sig(value)));
            }
        }
    }
    if args.format.csv() {
        write(&out, "sweep.csv", &csv)?;
    }
    Ok(())
}

struct SweepPoint {
    tag: String,
    r: f64,
    output: f64,
    labor_income: f64,
    gini: f64,
    w0: f64,
    w1: f64,
    z_b: Option<f64>,
    z_t: Option<f64>,
}

/// One sweep evaluation; failures come back as a short status token so the
/// sweep carries on.
fn sweep_point(cfg: &RunConfig, h: f64, z_ai: f64) -> Result<SweepPoint, String> {
    let params = cfg
        .build_params_with(h, z_ai)
        .map_err(|_| "invalid_params".to_string())?;
    let eq = match cfg.mode {
        Mode::Pre => solve_pre_ai(&params),
        Mode::Autonomous => solve_autonomous(&params),
        Mode::NonAutonomous => solve_non_autonomous(&params),
        _ => unreachable!("validated above"),
    }
    .map_err(|e| status_of(&e))?;
    let accounts = accounting(&eq).map_err(|_| "identity_violated".to_string())?;
    let (z_b, z_t) = if cfg.mode == Mode::Pre {
        (None, None)
    } else {
        match solve_pre_ai(&params) {
            Ok(pre) => match compare_pre_post(&pre, &eq, cfg.grid_points) {
                Ok(report) => (report.z_b, report.z_t),
                Err(_) => (None, None),
            },
            Err(_) => (None, None),
        }
    };
    Ok(SweepPoint {
        tag: eq.config_tag.clone(),
        r: eq.r,
        output: accounts.output,
        labor_income: accounts.labor_income,
        gini: gini_of(&eq, cfg.grid_points),
        w0: eq.wage_at(0.0),
        w1: eq.wage_at(1.0),
        z_b,
        z_t,
    })
}

fn status_of(e: &SolveError) -> String {
    match e {
        SolveError::NoConvergence(_) => "no_convergence".into(),
        SolveError::AuditFailed { .. } => "audit_failed".into(),
        SolveError::AbundanceViolated => "abundance_violated".into(),
        SolveError::NoConfigCertified(_) => "no_config_certified".into(),
        SolveError::Model(_) => "model_error".into(),
        SolveError::Numerics(_) => "numerics_error".into(),
    }
}

fn run_tradeoff(args: &RunArgs) -> Result<(), CliError> {
    let (cfg, out) = load_config(args)?;
    if cfg.mode != Mode::Tradeoff {
        return Err(CliError::Config("tradeoff requires mode = tradeoff".into()));
    }
    let params = cfg.build_params().map_err(CliError::Config)?;
    let report = autonomy_tradeoff(&params)?;
    if args.format.json() {
        let doc = json!({
            "z_ai": json_num(params.z_ai()),
            "output": {
                "pre": json_num(report.output_pre),
                "autonomous": json_num(report.output_auto),
                "non_autonomous": json_num(report.output_nonauto),
            },
            "w0": {
                "pre": json_num(report.w0_pre),
                "autonomous": json_num(report.w0_auto),
                "non_autonomous": json_num(report.w0_nonauto),
            },
            "w1": {
                "pre": json_num(report.w1_pre),
                "autonomous": json_num(report.w1_auto),
                "non_autonomous": json_num(report.w1_nonauto),
            },
            "gini": {
                "pre": json_num(report.gini_pre),
                "autonomous": json_num(report.gini_auto),
                "non_autonomous": json_num(report.gini_nonauto),
            },
        });
        write(&out, "tradeoff.json", &pretty(&doc))?;
    }
    if args.format.csv() {
        let mut csv = String::from("regime,output,w0,w1,gini\n");
        for (name, o, w0, w1, g) in [
            (
                "pre",
                report.output_pre,
                report.w0_pre,
                report.w1_pre,
                report.gini_pre,
            ),
            (
                "autonomous",
                report.output_auto,
                report.w0_auto,
                report.w1_auto,
                report.gini_auto,
            ),
            (
                "non_autonomous",
                report.output_nonauto,
                report.w0_nonauto,
                report.w1_nonauto,
                report.gini_nonauto,
            ),
        ] {
            csv.push_str(&format!(
                "{name},{},{},{},{}\n",
                fmt_sig(o),
                fmt_sig(w0),
                fmt_sig(w1),
                fmt_sig(g)
            ));
        }
        write(&out, "tradeoff.csv", &csv)?;
    }
    Ok(())
}

fn run_h0(args: &RunArgs) -> Result<(), CliError> {
    let (cfg, out) = load_config(args)?;
    let params = cfg
        .build_params_with(cfg.h, 0.0)
        .map_err(CliError::Config)?;
    let h0 = compute_h0(params.dist(), params.settings())?;
    if args.format.json() {
        write(&out, "h0.json", &pretty(&json!({ "h0": json_num(h0) })))?;
    }
    if args.format.csv() {
        write(&out, "h0.csv", &format!("h0\n{}\n", fmt_sig(h0)))?;
    }
    Ok(())
}

fn run_audit(args: &RunArgs) -> Result<(), CliError> {
    let (cfg, out) = load_config(args)?;
    if !cfg.mode.is_solver_mode() {
        return Err(CliError::Config(
            "audit requires mode pre|autonomous|non_autonomous".into(),
        ));
    }
    let eq = solve_mode(&cfg, cfg.mode)?;
    let report = audit_no_arbitrage(&eq, cfg.audit_grid);
    if args.format.json() {
        let doc = json!({
            "max_profit": json_num(report.max_profit),
            "argmax": firm_kind_json(report.argmax),
            "grid": cfg.audit_grid,
            "certified": report.certified(),
        });
        write(&out, "audit.json", &pretty(&doc))?;
    }
    if args.format.csv() {
        write(
            &out,
            "audit.csv",
            &format!(
                "max_profit,certified\n{},{}\n",
                fmt_sig(report.max_profit),
                report.certified()
            ),
        )?;
    }
    if !report.certified() {
        return Err(CliError::Solver(format!(
            "audit found a deviation profit of {:.3e}",
            report.max_profit
        )));
    }
    Ok(())
}

fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization");
    text.push('\n');
    text
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    write_file(&dir.join(name), contents).map_err(CliError::Io)
}
