use std::fmt::Write as FmtWrite;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commsat_core::analysis::solve_dc;
use commsat_core::experiments::{
    balls_battery, write_balls_csv, write_cells_csv, BallsRule, ExperimentPlan,
};
use commsat_core::generator::{sample_instance, GeneratorConfig};
use commsat_core::model::{read_dimacs, write_dimacs};
use commsat_core::solver::{solve_2sat, solve_dpll, DEFAULT_DPLL_BUDGET};
use commsat_core::{Assignment, Layout, Mixture, SolveResult, SolverError};

#[derive(Parser)]
#[command(
    name = "commsat",
    version,
    about = "Generate, decide, and survey community-structured random CNF"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one random instance and emit it as DIMACS CNF
    Gen {
        /// Variable count; must be divisible by the community count
        #[arg(long)]
        n: u32,
        /// Community count
        #[arg(long = "B")]
        communities: u32,
        /// Clause-type mixture, e.g. "3:0.2;1,1,1:0.8"
        #[arg(long)]
        mixture: String,
        /// Clause count
        #[arg(long)]
        m: usize,
        /// RNG seed; the same flags and seed give identical bytes
        #[arg(long)]
        seed: u64,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide a DIMACS instance: SAT exits 10, UNSAT 20, UNKNOWN 0
    Solve {
        /// Input path (stdin when omitted)
        input: Option<PathBuf>,
        /// Search-node budget for instances wider than 2-CNF
        #[arg(long, default_value_t = DEFAULT_DPLL_BUDGET)]
        budget: u64,
    },
    /// Run a plan file of Monte-Carlo scans and emit the result CSV
    Scan {
        /// Plan file (see the plan grammar in the README)
        #[arg(long)]
        plan: PathBuf,
        /// Worker threads (default: available parallelism)
        #[arg(long)]
        threads: Option<usize>,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Throw balls into bins repeatedly and tabulate occupancy statistics
    Balls {
        #[arg(long)]
        bins: u64,
        #[arg(long)]
        balls: u64,
        #[arg(long)]
        trials: u32,
        /// Bins holding exactly s balls are counted per trial
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        s: u32,
        #[arg(long)]
        seed: u64,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the critical occupancy constant d_c
    Dc {
        /// Load ratio c > 0
        #[arg(long)]
        c: f64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Gen { n, communities, mixture, m, seed, out } => {
            cmd_gen(n, communities, &mixture, m, seed, out.as_deref())
        }
        Command::Solve { input, budget } => cmd_solve(input.as_deref(), budget),
        Command::Scan { plan, threads, out } => cmd_scan(&plan, threads, out.as_deref()),
        Command::Balls { bins, balls, trials, s, seed, out } => {
            cmd_balls(bins, balls, trials, s, seed, out.as_deref())
        }
        Command::Dc { c } => cmd_dc(c),
    }
}

fn open_output(path: Option<&std::path::Path>) -> Result<Box<dyn Write>, String> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| format!("cannot create {}: {e}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_gen(
    n: u32,
    communities: u32,
    mixture: &str,
    m: usize,
    seed: u64,
    out: Option<&std::path::Path>,
) -> Result<ExitCode, String> {
    let layout = Layout::split(n, communities).map_err(|e| e.to_string())?;
    let mixture: Mixture = mixture.parse().map_err(|e: commsat_core::ModelError| e.to_string())?;
    let config = GeneratorConfig::new(layout, m, mixture, seed).map_err(|e| e.to_string())?;
    let instance = sample_instance(&config);
    let mut writer = open_output(out)?;
    write_dimacs(&mut writer, &instance).map_err(|e| e.to_string())?;
    writer.flush().map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn witness_line(assignment: &Assignment) -> String {
    let mut line = String::with_capacity(4 * assignment.var_count() + 4);
    line.push('v');
    for (index, &value) in assignment.values().iter().enumerate() {
        let var = index as i64 + 1;
        let lit = if value { var } else { -var };
        write!(line, " {lit}").expect("writing to a string");
    }
    line.push_str(" 0");
    line
}

fn cmd_solve(input: Option<&std::path::Path>, budget: u64) -> Result<ExitCode, String> {
    let instance = match input {
        Some(p) => read_dimacs(BufReader::new(
            File::open(p).map_err(|e| format!("cannot open {}: {e}", p.display()))?,
        )),
        None => read_dimacs(BufReader::new(io::stdin().lock())),
    }
    .map_err(|e| e.to_string())?;

    let outcome = if instance.max_clause_len() <= 2 {
        Some(solve_2sat(&instance).map_err(|e| e.to_string())?)
    } else {
        match solve_dpll(&instance, budget) {
            Ok(result) => Some(result),
            Err(SolverError::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e.to_string()),
        }
    };

    let mut stdout = BufWriter::new(io::stdout().lock());
    let code = match outcome {
        Some(SolveResult::Sat(assignment)) => {
            writeln!(stdout, "SAT").map_err(|e| e.to_string())?;
            writeln!(stdout, "{}", witness_line(&assignment)).map_err(|e| e.to_string())?;
            ExitCode::from(10)
        }
        Some(SolveResult::Unsat(_)) => {
            writeln!(stdout, "UNSAT").map_err(|e| e.to_string())?;
            ExitCode::from(20)
        }
        None => {
            writeln!(stdout, "UNKNOWN").map_err(|e| e.to_string())?;
            ExitCode::SUCCESS
        }
    };
    stdout.flush().map_err(|e| e.to_string())?;
    Ok(code)
}

fn cmd_scan(
    plan_path: &std::path::Path,
    threads: Option<usize>,
    out: Option<&std::path::Path>,
) -> Result<ExitCode, String> {
    let text = std::fs::read_to_string(plan_path)
        .map_err(|e| format!("cannot read {}: {e}", plan_path.display()))?;
    let plan = ExperimentPlan::parse(&text).map_err(|e| e.to_string())?;
    let threads = threads.unwrap_or_else(|| {
        std::thread::available_parallelism().map(usize::from).unwrap_or(1)
    });
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;
    let cells = pool.install(|| plan.run()).map_err(|e| e.to_string())?;
    let mut writer = open_output(out)?;
    write_cells_csv(&cells, &mut writer).map_err(|e| e.to_string())?;
    writer.flush().map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_balls(
    bins: u64,
    balls: u64,
    trials: u32,
    s: u32,
    seed: u64,
    out: Option<&std::path::Path>,
) -> Result<ExitCode, String> {
    let battery =
        balls_battery(bins, BallsRule::Explicit(balls), s, trials, seed).map_err(|e| e.to_string())?;
    let mut writer = open_output(out)?;
    write_balls_csv(&battery, &mut writer).map_err(|e| e.to_string())?;
    writer.flush().map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_dc(c: f64) -> Result<ExitCode, String> {
    if !(c.is_finite() && c > 0.0) {
        return Err(format!("c must be a positive finite load ratio, got {c}"));
    }
    let d = solve_dc(c).map_err(|e| e.to_string())?;
    let residual = 1.0 + d * (c.ln() - d.ln() + 1.0) - c;
    println!("d_c = {d:.12}");
    println!("residual = {residual:.3e}");
    Ok(ExitCode::SUCCESS)
}
