use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use hfstsp::bench::{aggregate, run_suite, write_csv, write_summary_csv, BenchConfig, BenchError};
use hfstsp::formats::{format_solution, parse_solution};
use hfstsp::instancegen::{format_instance, generate, parse_instance, GenSpec};
use hfstsp::{
    approx_eq, build_cost_model, operation_time, validate_respects, CostModel, Cycle, GeneratorKind, Instance,
    SolverKind, TourMethod,
};

/// Exact truck-and-drone routing over a fixed tour.
#[derive(Parser)]
#[command(name = "hfstsp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Generate {
        #[arg(long, default_value = "uniform")]
        kind: GeneratorKind,
        /// Number of customers.
        #[arg(short, long)]
        n: usize,
        /// Drone speed relative to the truck.
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a truck tour for an instance.
    Tour {
        instance: PathBuf,
        #[arg(long, default_value = "nn2opt")]
        method: TourMethod,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Split a tour into truck and drone operations.
    Solve {
        instance: PathBuf,
        cycle: PathBuf,
        #[arg(long, default_value = "lazy-lists")]
        solver: SolverKind,
        /// Print run statistics to stderr.
        #[arg(long)]
        stats: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a solution against its instance and tour.
    Verify {
        instance: PathBuf,
        cycle: PathBuf,
        solution: PathBuf,
    },
    /// Run a benchmark suite and write CSV to stdout.
    Bench(BenchArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// TOML suite description; replaces the suite flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "uniform")]
    kinds: Vec<GeneratorKind>,
    #[arg(long, value_delimiter = ',', default_value = "10,20,50")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    alphas: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "nn2opt")]
    tours: Vec<TourMethod>,
    #[arg(long, value_delimiter = ',', default_value = "split,lazy-matrix,lazy-lists")]
    solvers: Vec<SolverKind>,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Worker threads; overrides the config file when given.
    #[arg(long)]
    threads: Option<usize>,
    /// Emit the aggregate table instead of per-run rows.
    #[arg(long)]
    summary: bool,
}

enum Failure {
    /// Verification or solver-equivalence failure (exit 1).
    Check(String),
    /// Unreadable, malformed or inconsistent input (exit 2).
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type CliResult = Result<(), Failure>;

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    parse_instance(&read(path)?).with_context(|| format!("parsing instance {}", path.display()))
}

fn load_cycle(path: &Path, inst: &Instance) -> anyhow::Result<Cycle> {
    let h: Cycle = read(path)?
        .parse()
        .with_context(|| format!("parsing cycle {}", path.display()))?;
    if h.n() != inst.n() {
        return Err(anyhow!(
            "cycle {} has {} customers but the instance has {}",
            path.display(),
            h.n(),
            inst.n()
        ));
    }
    Ok(h)
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn verify(inst: &Instance, h: &Cycle, solution: &Path) -> CliResult {
    let file = parse_solution(&read(solution)?).with_context(|| format!("parsing solution {}", solution.display()))?;
    let cm: CostModel = build_cost_model(inst);
    let s = &file.solution;
    let mut problems = Vec::new();
    let report = validate_respects(s, h);
    if !report.is_ok() {
        problems.push(report.to_string());
    }
    let mut total = 0.0;
    for (idx, (op, &recorded)) in s.operations().iter().zip(&file.op_costs).enumerate() {
        match operation_time(op, &cm) {
            Ok(c) => {
                total += c;
                if !approx_eq(c, recorded) {
                    problems.push(format!("operation {}: recorded cost {recorded}, actual {c}", idx + 1));
                }
            }
            Err(e) => problems.push(format!("operation {}: {e}", idx + 1)),
        }
    }
    if problems.is_empty() && !approx_eq(total, s.total_time()) {
        problems.push(format!("recorded total {}, actual {total}", s.total_time()));
    }
    if problems.is_empty() {
        println!("ok: {} operations, total {total}", s.operations().len());
        Ok(())
    } else {
        Err(Failure::Check(problems.join("\n")))
    }
}

fn bench(args: BenchArgs) -> CliResult {
    let mut config = match &args.config {
        Some(path) => BenchConfig::from_toml(&read(path)?).with_context(|| format!("parsing {}", path.display()))?,
        None => BenchConfig {
            kinds: args.kinds,
            sizes: args.sizes,
            alphas: args.alphas,
            instances: args.instances,
            master_seed: args.seed,
            tours: args.tours,
            solvers: args.solvers,
            repeats: args.repeats,
            threads: 1,
        },
    };
    if let Some(t) = args.threads {
        config.threads = t;
    }
    let rows = match run_suite(&config) {
        Ok(rows) => rows,
        Err(e @ BenchError::Disagreement { .. }) => return Err(Failure::Check(e.to_string())),
        Err(e) => return Err(Failure::Input(e.into())),
    };
    let out = io::stdout().lock();
    if args.summary {
        let summary = aggregate(&rows).map_err(anyhow::Error::from)?;
        write_summary_csv(&summary, out).map_err(anyhow::Error::from)?;
    } else {
        write_csv(&rows, out).map_err(anyhow::Error::from)?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Generate {
            kind,
            n,
            alpha,
            seed,
            output,
        } => {
            let inst = generate(&GenSpec { kind, n, alpha, seed }).map_err(anyhow::Error::from)?;
            emit(output.as_deref(), &format_instance(&inst))?;
        }
        Command::Tour {
            instance,
            method,
            output,
        } => {
            let inst = load_instance(&instance)?;
            let h = method.build(&inst, &build_cost_model(&inst));
            emit(output.as_deref(), &format!("{h}\n"))?;
        }
        Command::Solve {
            instance,
            cycle,
            solver,
            stats,
            output,
        } => {
            let inst = load_instance(&instance)?;
            let h = load_cycle(&cycle, &inst)?;
            let cm = build_cost_model(&inst);
            let (s, run_stats) = solver.solve(&h, &cm).map_err(anyhow::Error::from)?;
            emit(output.as_deref(), &format_solution(&s, &cm).map_err(anyhow::Error::from)?)?;
            if stats {
                eprintln!(
                    "solver: {}\ntriples_considered: {}\narcs_written: {}\nwall_time_ns: {}",
                    run_stats.solver_name, run_stats.triples_considered, run_stats.arcs_written, run_stats.wall_time_ns
                );
            }
        }
        Command::Verify {
            instance,
            cycle,
            solution,
        } => {
            let inst = load_instance(&instance)?;
            let h = load_cycle(&cycle, &inst)?;
            verify(&inst, &h, &solution)?;
        }
        Command::Bench(args) => bench(args)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("verification failed:\n{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
