use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use semo_core::bounds::{
    bound_exp_tail_shape, bound_lemma_phase_terms, certified_bound, BoundInputs,
};
use semo_core::experiments::{
    aggregate_rows, format_sig6, run_rows, run_scenario, write_aggregate_csv, write_results_csv,
    CellResult, LawChoice, ScenarioSpec, X0Rule, DEFAULT_BASE_SEED, DEFAULT_BETA, RUNS_PER_CELL,
};
use semo_core::moea::{run, run_with_invariant_checks, DEFAULT_MAX_EVALUATIONS};
use semo_core::rng::derive_stream_id;
use semo_core::{verify, AlgorithmKind, BenchmarkConfig, MutationLaw, Point, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "semo",
    version,
    about = "SEMO/GSEMO on an unbounded integer benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute one seeded run and print its record.
    Run(RunArgs),
    /// Operator comparison at a = 200 (unit step, seven geometric laws, power law).
    Scenario1(Scenario1Args),
    /// Scaling over a in {20, 40, .., 200} for unit step, geometric q = 4/a and power law.
    Scenario2(Scenario2Args),
    /// Evaluate the closed-form runtime bounds.
    Bounds(BoundsArgs),
    /// Run the self-checks; exits 1 if any fails.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algo {
    Semo,
    Gsemo,
}

impl From<Algo> for AlgorithmKind {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Semo => AlgorithmKind::Semo,
            Algo::Gsemo => AlgorithmKind::Gsemo,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Mutation {
    Unit,
    Geom,
    Powerlaw,
}

#[derive(Args, Debug)]
struct LawArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long, value_enum)]
    mutation: Mutation,
    /// Geometric parameter q in (0, 1).
    #[arg(long, conflicts_with = "inv_q")]
    q: Option<f64>,
    /// Geometric parameter given as 1/q.
    #[arg(long)]
    inv_q: Option<u64>,
    /// Power-law exponent in (1, 2).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    a: u64,
    #[arg(long)]
    n: usize,
}

impl LawArgs {
    fn law(&self) -> Result<MutationLaw, Failure> {
        let has_q = self.q.is_some() || self.inv_q.is_some();
        match self.mutation {
            Mutation::Unit => {
                if has_q || self.beta.is_some() {
                    return Err(usage(
                        "--q, --inv-q and --beta do not apply to --mutation unit",
                    ));
                }
                Ok(MutationLaw::UnitStep)
            }
            Mutation::Geom => {
                if self.beta.is_some() {
                    return Err(usage("--beta only applies to --mutation powerlaw"));
                }
                let q = match (self.q, self.inv_q) {
                    (Some(q), None) => q,
                    (None, Some(0)) => return Err(usage("--inv-q must be positive")),
                    (None, Some(k)) => 1.0 / k as f64,
                    _ => return Err(usage("--mutation geom needs --q or --inv-q")),
                };
                MutationLaw::bilateral_geometric(q).map_err(|e| usage(e.to_string()))
            }
            Mutation::Powerlaw => {
                if has_q {
                    return Err(usage("--q and --inv-q only apply to --mutation geom"));
                }
                MutationLaw::power_law(self.beta.unwrap_or(DEFAULT_BETA))
                    .map_err(|e| usage(e.to_string()))
            }
        }
    }

    fn benchmark(&self) -> Result<BenchmarkConfig, Failure> {
        BenchmarkConfig::new(self.a, self.n).map_err(|e| usage(e.to_string()))
    }
}

#[derive(Args, Debug)]
struct X0Args {
    /// Initial point as a comma list, e.g. 0,20000.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Initial point (0, k*a, 0, ..), written as e.g. 100a.
    #[arg(long, conflicts_with = "x0")]
    x0_rule: Option<String>,
}

fn parse_x0_rule(rule: &str) -> Result<u64, Failure> {
    rule.strip_suffix('a')
        .and_then(|k| k.parse::<u64>().ok())
        .ok_or_else(|| {
            usage(format!(
                "--x0-rule expects the form <k>a such as 100a, got {rule:?}"
            ))
        })
}

impl X0Args {
    fn resolve(&self, a: u64, n: usize) -> Result<Option<Point>, Failure> {
        let rule = match (&self.x0, &self.x0_rule) {
            (Some(text), _) => X0Rule::Explicit(
                text.parse()
                    .map_err(|e: semo_core::Error| usage(e.to_string()))?,
            ),
            (None, Some(r)) => X0Rule::SecondCoordinate {
                factor: parse_x0_rule(r)?,
            },
            (None, None) => return Ok(None),
        };
        rule.resolve(a, n)
            .map(Some)
            .map_err(|e| usage(e.to_string()))
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    law: LawArgs,
    #[command(flatten)]
    x0: X0Args,
    #[arg(long, default_value_t = DEFAULT_BASE_SEED)]
    seed: u64,
    /// Random stream within the seed; defaults to the stream of run 0 of cell 0.
    #[arg(long)]
    stream: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_EVALUATIONS)]
    max_evals: u64,
    /// Check the structural invariants after every iteration.
    #[arg(long)]
    check_invariants: bool,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = RUNS_PER_CELL)]
    runs: usize,
    #[arg(long, default_value_t = DEFAULT_BASE_SEED)]
    seed: u64,
    /// Power-law exponent.
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    /// Second coordinate of x0 as a multiple of a.
    #[arg(long, default_value = "100a")]
    x0_rule: String,
    /// Per-run CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cell aggregate CSV.
    #[arg(long)]
    agg_out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_EVALUATIONS)]
    max_evals: u64,
}

#[derive(Args, Debug)]
struct Scenario1Args {
    #[command(flatten)]
    common: ScenarioArgs,
    #[arg(long, default_value_t = 200)]
    a: u64,
}

#[derive(Args, Debug)]
struct Scenario2Args {
    #[command(flatten)]
    common: ScenarioArgs,
    /// Override the a grid, e.g. 20,40,60.
    #[arg(long, value_delimiter = ',')]
    a_values: Option<Vec<u64>>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    law: LawArgs,
    /// L1 norm of the initial point.
    #[arg(long, conflicts_with_all = ["x0", "x0_rule"])]
    x0_norm: Option<u64>,
    #[command(flatten)]
    x0: X0Args,
    /// Constant of the exponential-tail shape.
    #[arg(long, default_value_t = 1.0)]
    shape_c: f64,
    /// Upper limit C >= q for the geometric phase-1 bound.
    #[arg(long, default_value_t = 0.5)]
    moment_c: f64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Smaller sample sizes.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = DEFAULT_BASE_SEED)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Verification,
    Runtime(anyhow::Error),
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<semo_core::Error> for Failure {
    fn from(e: semo_core::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let law = args.law.law()?;
    let benchmark = args.law.benchmark()?;
    let x0 = args
        .x0
        .resolve(benchmark.a(), benchmark.n())?
        .ok_or_else(|| usage("run needs --x0 or --x0-rule"))?;
    if args.max_evals == 0 {
        return Err(usage("--max-evals must be positive"));
    }
    let stream = args
        .stream
        .unwrap_or_else(|| derive_stream_id(args.seed, 0, 0));
    let config = RunConfig::new(args.law.algo.into(), law, benchmark, x0, args.seed, stream)
        .map_err(|e| usage(e.to_string()))?
        .with_max_evaluations(args.max_evals);
    let record = if args.check_invariants {
        run_with_invariant_checks(&config, 1)?
    } else {
        run(&config)?
    };
    println!("{record}");
    Ok(())
}

fn finish_scenario(name: &str, spec: ScenarioSpec, common: &ScenarioArgs) -> Result<(), Failure> {
    if common.parallel == 0 {
        return Err(usage("--parallel must be at least 1"));
    }
    if common.max_evals == 0 {
        return Err(usage("--max-evals must be positive"));
    }
    spec.cells().map_err(|e| usage(e.to_string()))?;
    let results = run_scenario(&spec, common.parallel)?;
    print_summary(&results);
    for r in results.iter().filter(|r| r.is_degraded()) {
        eprintln!(
            "warning: {} {} a={} has {} run(s) stopped at the evaluation cap",
            name,
            r.cell.law.name(),
            r.cell.benchmark.a(),
            r.stats.incomplete_runs
        );
    }
    if let Some(path) = &common.out {
        write_results_csv(path, &run_rows(&results))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &common.agg_out {
        write_aggregate_csv(path, &aggregate_rows(&results))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn print_summary(results: &[CellResult]) {
    println!(
        "{:<9} {:>8} {:>5} {:>12} {:>7} {:>12} {:>7} {:>12} {:>7} {:>12}",
        "mutation", "param", "a", "mean_p1", "sd%", "mean_p2", "sd%", "mean_total", "sd%", "bound"
    );
    for r in results {
        let s = &r.stats;
        println!(
            "{:<9} {:>8} {:>5} {:>12.0} {:>7.1} {:>12.0} {:>7.1} {:>12.0} {:>7.1} {:>12}",
            r.cell.law.name(),
            r.cell.law.param().map(format_sig6).unwrap_or_default(),
            r.cell.benchmark.a(),
            s.mean_phase1,
            s.sd_pct_phase1,
            s.mean_phase2,
            s.sd_pct_phase2,
            s.mean_total,
            s.sd_pct_total,
            r.bound_total.map(format_sig6).unwrap_or_default()
        );
    }
}

fn scenario_base(mut spec: ScenarioSpec, common: &ScenarioArgs) -> Result<ScenarioSpec, Failure> {
    let factor = parse_x0_rule(&common.x0_rule)?;
    spec.x0_rule = X0Rule::SecondCoordinate { factor };
    spec.runs_per_cell = common.runs;
    spec.base_seed = common.seed;
    spec.max_evaluations = common.max_evals;
    for law in &mut spec.laws {
        if let LawChoice::PowerLaw { beta } = law {
            *beta = common.beta;
        }
    }
    Ok(spec)
}

fn cmd_scenario1(args: Scenario1Args) -> Result<(), Failure> {
    let mut spec = scenario_base(ScenarioSpec::scenario_one(args.common.n), &args.common)?;
    spec.a_values = vec![args.a];
    finish_scenario("scenario1", spec, &args.common)
}

fn cmd_scenario2(args: Scenario2Args) -> Result<(), Failure> {
    let mut spec = scenario_base(ScenarioSpec::scenario_two(args.common.n), &args.common)?;
    if let Some(a_values) = args.a_values {
        spec.a_values = a_values;
    }
    finish_scenario("scenario2", spec, &args.common)
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), Failure> {
    let law = args.law.law()?;
    let benchmark = args.law.benchmark()?;
    let x0_norm = match (args.x0_norm, args.x0.resolve(benchmark.a(), benchmark.n())?) {
        (Some(v), _) => v,
        (None, Some(p)) => p.l1_norm()?,
        (None, None) => return Err(usage("bounds needs --x0-norm, --x0 or --x0-rule")),
    };
    let inp = BoundInputs {
        algorithm: args.law.algo.into(),
        n: benchmark.n(),
        a: benchmark.a(),
        x0_norm,
        law,
    };
    match law {
        MutationLaw::BilateralGeometric(g) => {
            if g.q() <= args.moment_c {
                let phases = bound_lemma_phase_terms(&inp, Some(args.moment_c))
                    .map_err(|e| usage(e.to_string()))?;
                println!("phase1={}", phases.phase1);
            } else {
                println!("phase1=undefined (q > moment C = {})", args.moment_c);
            }
            let shape =
                bound_exp_tail_shape(&inp, args.shape_c).map_err(|e| usage(e.to_string()))?;
            println!("shape_total={shape} (C={})", args.shape_c);
        }
        _ => {
            let phases = bound_lemma_phase_terms(&inp, None)?;
            println!("phase1={}", phases.phase1);
            if let Some(p2) = phases.phase2 {
                println!("phase2={p2}");
            }
            println!("bound_total={}", phases.total().unwrap_or(f64::NAN));
            if certified_bound(&inp)?.is_none() {
                println!(
                    "note: a = 0 needs no iterations; the expression is not used as a ceiling"
                );
            }
        }
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let report = verify::run_all(args.quick, args.seed);
    for check in &report.checks {
        println!(
            "{} {}: {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Scenario1(a) => cmd_scenario1(a),
        Command::Scenario2(a) => cmd_scenario2(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
