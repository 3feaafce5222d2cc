use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use paracity::bounds::{gap_bounds, shortest_path_oracle};
use paracity::city::build_city;
use paracity::config::{fielbaum_mu, read_config};
use paracity::lines::{decompose_circulation, lpa_on, LpaOutcome};
use paracity::model::build_umcfp;
use paracity::solve::{solve_alpp, solve_alpp_sym, solve_pair};
use paracity::{ModelSolution, SolveOptions};
use paracity::solver::{Branching, SolveStatus};
use paracity::sweep::{run_sweep, summarize, Grid};
use paracity::CityParams;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "paracity", version, about = "Line planning experiments on the Parametric City")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one model on one instance and print a JSON report.
    Solve(SolveArgs),
    /// Solve both models over a grid of demand shares.
    Sweep(SweepArgs),
    /// Print the closed-form bounds for an instance.
    Bounds(BoundsArgs),
    /// Solve both models and report the symmetry gap.
    Gap(CommonArgs),
    /// Run the symmetric approximation and print its line plan.
    Lpa(LpaArgs),
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Relative optimality gap at which branch-and-bound stops.
    #[arg(long, default_value_t = 1e-4)]
    gap_tol: f64,
    /// Time limit per solve, in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<usize>,
    /// Branch on the most fractional variable instead of pseudocosts.
    #[arg(long)]
    most_fractional: bool,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            gap_tol: self.gap_tol,
            node_limit: self.node_limit,
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            branching: if self.most_fractional {
                Branching::MostFractional
            } else {
                Branching::Pseudocost
            },
            ..SolveOptions::default()
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelChoice {
    Alpp,
    Alpps,
    Umcfp,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum, default_value = "alpp")]
    model: ModelChoice,
    /// Include a line plan decomposition of the frequencies.
    #[arg(long)]
    lines: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    /// Base instance; its shares are replaced by the grid. Defaults to
    /// n=8, T=30, g=1/3, Y=24000, a=0.8, K=100, mu=1.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.025)]
    step: f64,
    /// First grid value for both shares.
    #[arg(long, default_value_t = 0.025)]
    start: f64,
    #[arg(long, default_value_t = 0.95)]
    stop: f64,
    /// Grid points need beta strictly above this.
    #[arg(long, default_value_t = 0.0)]
    min_beta: f64,
    /// Override the operator weight.
    #[arg(long)]
    mu: Option<f64>,
    /// Use the operator weight derived from hourly vehicle and passenger costs.
    #[arg(long)]
    fielbaum: bool,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also compare the closed form against the shortest-path oracle on this
    /// many random instances.
    #[arg(long, default_value_t = 0)]
    random: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct LpaArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also solve the full model and report the ratio.
    #[arg(long)]
    compare: bool,
}

fn paper_base() -> CityParams {
    CityParams {
        n: 8,
        t: 30.0,
        g: 1.0 / 3.0,
        y: 24000.0,
        a: 0.8,
        alpha: 0.25,
        beta: 0.5,
        gamma: 0.25,
        k: 100.0,
        lambda: None,
        mu: 1.0,
    }
}

fn load(path: &Path) -> Result<CityParams> {
    let params = read_config(path).with_context(|| format!("reading {}", path.display()))?;
    params.validate().with_context(|| format!("validating {}", path.display()))?;
    Ok(params)
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(out: Option<&Path>, value: &Value) -> Result<()> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn status_name(status: &SolveStatus) -> String {
    match status {
        SolveStatus::Optimal => "optimal".into(),
        SolveStatus::Infeasible => "infeasible".into(),
        SolveStatus::Unbounded => "unbounded".into(),
        SolveStatus::GapLimit => "gap_limit".into(),
        SolveStatus::Error(m) => format!("error: {m}"),
    }
}

fn exit_for(status: &SolveStatus) -> ExitCode {
    match status {
        SolveStatus::Infeasible => ExitCode::from(2),
        SolveStatus::Error(_) | SolveStatus::Unbounded => ExitCode::from(1),
        SolveStatus::Optimal | SolveStatus::GapLimit => ExitCode::SUCCESS,
    }
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn frequencies_json(city: &paracity::CityInstance, ms: &ModelSolution) -> Value {
    match &ms.plan {
        Some(plan) => Value::Object(
            city.arcs
                .iter()
                .map(|a| (format!("{}->{}", a.tail, a.head), json!(plan.frequencies[a.id])))
                .collect(),
        ),
        None => Value::Null,
    }
}

fn model_report(city: &paracity::CityInstance, ms: &ModelSolution, lines: bool) -> Result<Value> {
    let s = &ms.solution;
    let mut report = json!({
        "status": status_name(&s.status),
        "objective": finite(s.objective),
        "bound": finite(s.bound),
        "gap": finite(s.gap),
        "nodes": s.stats.nodes,
        "lp_iterations": s.stats.lp_iterations,
        "ms": s.stats.wall.as_secs_f64() * 1e3,
        "frequencies": frequencies_json(city, ms),
    });
    if lines {
        if let Some(plan) = &ms.plan {
            report["lines"] = serde_json::to_value(decompose_circulation(plan, city)?)?;
        }
    }
    Ok(report)
}

fn cmd_solve(args: &SolveArgs) -> Result<ExitCode> {
    let params = load(&args.common.config)?;
    let city = build_city(&params)?;
    let options = args.common.solver.options();
    let out = args.common.out.as_deref();
    let (name, ms) = match args.model {
        ModelChoice::Umcfp => {
            let clock = Instant::now();
            let value = build_umcfp(&city).optimum();
            write_json(
                out,
                &json!({
                    "model": "umcfp",
                    "status": "optimal",
                    "objective": value,
                    "ms": clock.elapsed().as_secs_f64() * 1e3,
                }),
            )?;
            return Ok(ExitCode::SUCCESS);
        }
        ModelChoice::Alpp => ("alpp", solve_alpp(&city, &options, None)?),
        ModelChoice::Alpps => ("alpps", solve_alpp_sym(&city, &options)?),
    };
    let mut report = model_report(&city, &ms, args.lines)?;
    report["model"] = json!(name);
    write_json(out, &report)?;
    Ok(exit_for(ms.status()))
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode> {
    let mut base = match &args.config {
        Some(p) => read_config(p).with_context(|| format!("reading {}", p.display()))?,
        None => paper_base(),
    };
    if args.fielbaum {
        base.mu = fielbaum_mu(10.65, 1.48)?;
    }
    if let Some(mu) = args.mu {
        base.mu = mu;
    }
    if !(args.step > 0.0) {
        bail!("--step must be positive");
    }
    let grid = Grid {
        start: args.start,
        stop: args.stop,
        step: args.step,
        min_beta: args.min_beta,
    };
    let clock = Instant::now();
    let rows = run_sweep(&base, &grid, &args.solver.options(), args.jobs);
    let summary = summarize(&rows);
    let mut w = output(args.out.as_deref())?;
    match args.format {
        Format::Csv => {
            {
                let mut csv = csv::Writer::from_writer(&mut w);
                for row in &rows {
                    csv.serialize(row)?;
                }
                if rows.is_empty() {
                    csv.write_record([
                        "alpha", "beta", "gamma", "opt_alpp", "opt_alpps", "gamma_abs", "gamma_rel",
                        "classification", "bound_cn_ag", "ms_alpp", "ms_alpps",
                    ])?;
                }
                csv.flush()?;
            }
            writeln!(w, "# rows={}", summary.rows)?;
            writeln!(w, "# asymmetric={} ({:.4}%)", summary.asymmetric, 100.0 * summary.asymmetric_share)?;
            writeln!(w, "# infeasible={} errors={}", summary.infeasible, summary.errors)?;
            writeln!(w, "# max_gamma_rel={:.6}%", 100.0 * summary.max_gamma_rel)?;
            if (args.step - 0.025).abs() < 1e-12 && args.start == 0.025 && args.stop == 0.95 && summary.rows != 741 {
                writeln!(w, "# note: expected 741 rows for this grid, got {}", summary.rows)?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &json!({ "rows": rows, "summary": summary }))?;
            writeln!(w)?;
        }
    }
    log::info!("sweep of {} points took {:?}", rows.len(), clock.elapsed());
    Ok(if summary.errors > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn random_params(rng: &mut StdRng) -> CityParams {
    loop {
        let alpha = rng.gen_range(0.02..0.96);
        let gamma = rng.gen_range(0.02..0.96);
        let beta = 1.0 - alpha - gamma;
        if beta <= 0.01 {
            continue;
        }
        return CityParams {
            n: rng.gen_range(4..=12),
            t: rng.gen_range(1.0..100.0),
            g: rng.gen_range(0.05..2.0),
            y: rng.gen_range(100.0..50000.0),
            a: rng.gen_range(0.05..0.95),
            alpha,
            beta,
            gamma,
            k: rng.gen_range(1.0..500.0),
            lambda: None,
            mu: rng.gen_range(0.0..=1.0),
        };
    }
}

fn cmd_bounds(args: &BoundsArgs) -> Result<ExitCode> {
    let params = match &args.config {
        Some(p) => load(p)?,
        None => paper_base(),
    };
    let b = gap_bounds(&params)?;
    if !(b.lambda_lo <= b.lambda_val && b.lambda_val <= b.lambda_hi) {
        bail!(
            "lambda sandwich violated: {} <= {} <= {}",
            b.lambda_lo,
            b.lambda_val,
            b.lambda_hi
        );
    }
    let mut stdout = io::stdout().lock();
    let as_json = serde_json::to_value(b)?;
    match args.format {
        Some(Format::Json) => writeln!(stdout, "{}", serde_json::to_string_pretty(&as_json)?)?,
        Some(Format::Csv) => {
            writeln!(stdout, "key,value")?;
            for (k, v) in b.entries() {
                writeln!(stdout, "{k},{v}")?;
            }
        }
        None => {
            for (k, v) in b.entries() {
                writeln!(stdout, "{k} = {v}")?;
            }
            writeln!(stdout, "{}", serde_json::to_string(&as_json)?)?;
        }
    }
    if args.random > 0 {
        let mut rng = StdRng::seed_from_u64(args.seed);
        let mut worst: f64 = 0.0;
        for _ in 0..args.random {
            let p = random_params(&mut rng);
            let closed = gap_bounds(&p)?.umcfp_opt;
            let oracle = shortest_path_oracle(&build_umcfp(&build_city(&p)?));
            worst = worst.max((closed - oracle).abs() / oracle.abs().max(1e-300));
        }
        writeln!(stdout, "oracle_max_rel_diff = {worst:e} over {} draws", args.random)?;
        if worst > 1e-9 {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gap(args: &CommonArgs) -> Result<ExitCode> {
    let params = load(&args.config)?;
    let city = build_city(&params)?;
    let pair = solve_pair(&city, &args.solver.options())?;
    let bounds = gap_bounds(&params)?;
    let r = pair.report;
    write_json(
        args.out.as_deref(),
        &json!({
            "opt_alpp": finite(r.opt_alpp),
            "opt_alpps": finite(r.opt_alpps),
            "gamma_abs": r.gamma_abs,
            "gamma_rel": r.gamma_rel,
            "classification": r.classification.as_str(),
            "bound_cn_ag": bounds.c_n_ag,
            "abs_gap_bound": bounds.abs_gap_bound,
            "alpp": model_report(&city, &pair.alpp, false)?,
            "alpps": model_report(&city, &pair.sym, false)?,
        }),
    )?;
    Ok(exit_for(pair.alpp.status()))
}

fn cmd_lpa(args: &LpaArgs) -> Result<ExitCode> {
    let params = load(&args.common.config)?;
    let city = build_city(&params)?;
    let options = args.common.solver.options();
    let out = args.common.out.as_deref();
    let result = match lpa_on(&city, &options)? {
        LpaOutcome::Infeasible => {
            write_json(out, &json!({ "status": "infeasible" }))?;
            return Ok(ExitCode::from(2));
        }
        LpaOutcome::Solved(r) => r,
    };
    let kappa = gap_bounds(&params)?.kappa;
    let mut report = json!({
        "status": "optimal",
        "cost": result.cost,
        "frequencies": result.frequencies,
        "kappa": kappa,
        "lines": result.plan,
    });
    if args.compare {
        let full = solve_alpp(&city, &options, None)?;
        if let Some(opt) = full.objective() {
            report["opt_alpp"] = json!(opt);
            report["ratio"] = json!(result.cost / opt);
        }
    }
    write_json(out, &report)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Gap(a) => cmd_gap(a),
        Command::Lpa(a) => cmd_lpa(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
