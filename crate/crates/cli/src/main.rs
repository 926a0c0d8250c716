mod report;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use syncround::games::{self, SynchronousGame, Weight};
use syncround::rounding::round_strategy;
use syncround::strategies::{load_strategy, save_strategy, save_tracial_strategy, seesaw_optimize};
use syncround::Error;

use report::{Failure, RunReport};

/// Round almost-synchronous strategies and verify spectral certificates.
#[derive(Debug, Parser)]
#[command(name = "syncround", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print question/answer counts, alpha and ν diagnostics of a game file.
    Inspect {
        #[arg(long)]
        game: PathBuf,
    },
    /// Round a commuting strategy and write the tracial strategy.
    Round {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a seeded sweep of random certificate instances.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Largest matrix dimension drawn.
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=64))]
        dims: u64,
        #[arg(long)]
        seed: u64,
    },
    /// See-saw optimization; writes the final strategy.
    Optimize {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=64))]
        dims: u64,
        #[arg(long)]
        iters: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Connes,
    Measure,
    Commutator,
    Duality,
    Rounding,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Connes => "connes",
            Suite::Measure => "measure",
            Suite::Commutator => "commutator",
            Suite::Duality => "duality",
            Suite::Rounding => "rounding",
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_game_file(path: &Path) -> Result<SynchronousGame, Failure> {
    games::load_game(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn inspect(game: &Path) -> Result<RunReport, Failure> {
    let g = load_game_file(game)?;
    let n = g.n_questions();
    let mut diagonal = 0.0;
    let mut total = 0.0;
    let mut support = 0;
    let mut exact = true;
    for x in 0..n {
        for y in 0..n {
            let w = g.nu(x, y);
            total += w;
            if x == y {
                diagonal += w;
            }
            if w > 0.0 {
                support += 1;
            }
            exact &= matches!(g.weight(x, y), Weight::Exact(_));
        }
    }
    let marginals: Vec<Value> = (0..n)
        .map(|x| json!({"question": g.questions()[x], "mu": g.mu(x), "diagonal": g.nu(x, x)}))
        .collect();
    let alpha = games::alpha_of(&g);
    eprintln!(
        "{} questions, {} answers, alpha = {alpha}, diagonal mass = {diagonal}",
        n,
        g.n_answers()
    );
    let mut r = RunReport::new(json!({"command": "inspect", "game": game}), None);
    r.instances.push(json!({
        "questions": n,
        "answers": g.n_answers(),
        "alpha": alpha,
        "nu": {
            "total_mass": total,
            "diagonal_mass": diagonal,
            "support_size": support,
            "exact_weights": exact,
            "marginals": marginals,
        }
    }));
    Ok(r)
}

fn round(game: &Path, strategy: &Path, out: &Path) -> Result<RunReport, Failure> {
    let g = load_game_file(game)?;
    let s = load_strategy(&read(strategy)?, &g).map_err(|e| Failure::Input(format!("{}: {e}", strategy.display())))?;
    let rounding = round_strategy(&g, &s).map_err(|e| match e {
        Error::Unsupported(m) => Failure::Input(format!("unsupported: {m}")),
        other => Failure::Input(other.to_string()),
    })?;
    write(out, &save_tracial_strategy(&rounding.tracial, &g).map_err(|e| Failure::Input(e.to_string()))?)?;
    let c = &rounding.certificate;
    eprintln!(
        "delta = {:.3e}, value {:.6} -> {:.6}, d1 total {:.3e} (bound {:.3e}), {} corner(s)",
        c.delta,
        c.value_in,
        c.value_out,
        c.d1_total,
        c.bound_total,
        c.corners.len()
    );
    let mut r = RunReport::new(
        json!({"command": "round", "game": game, "strategy": strategy, "out": out}),
        None,
    );
    r.certificates.insert("rounding".into(), serde_json::to_value(c).expect("certificate serializes"));
    r.record(c.holds());
    Ok(r)
}

fn optimize(game: &Path, dims: usize, iters: usize, seed: u64, out: &Path) -> Result<RunReport, Failure> {
    let g = load_game_file(game)?;
    let run = seesaw_optimize(&g, dims, dims, iters, seed).map_err(|e| Failure::Input(e.to_string()))?;
    write(out, &save_strategy(&run.strategy, &g).map_err(|e| Failure::Input(e.to_string()))?)?;
    let monotone = run.values.windows(2).all(|w| w[1] >= w[0] - 1e-10);
    let last = *run.values.last().expect("initial value is recorded");
    eprintln!("value {:.6} after {iters} iteration(s), monotone = {monotone}", last);
    let mut r = RunReport::new(
        json!({"command": "optimize", "game": game, "dims": dims, "iters": iters, "seed": seed, "out": out}),
        Some(seed),
    );
    r.instances.push(json!({"values": run.values, "final_value": last, "monotone": monotone}));
    r.record(monotone);
    Ok(r)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SYNCROUND_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("SYNCROUND_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Input(e.to_string()))
}

fn run(cli: Cli) -> Result<RunReport, Failure> {
    configure_threads()?;
    let start = Instant::now();
    let mut report = match cli.command {
        Command::Inspect { game } => inspect(&game)?,
        Command::Round { game, strategy, out } => round(&game, &strategy, &out)?,
        Command::Verify { suite, n, dims, seed } => suites::verify(suite, n as usize, dims as usize, seed),
        Command::Optimize {
            game,
            dims,
            iters,
            seed,
            out,
        } => optimize(&game, dims as usize, iters as usize, seed, &out)?,
    };
    report.timings.total_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            let s = &report.summary;
            eprintln!(
                "{}: {} checked, {} failed",
                if s.pass { "PASS" } else { "FAIL" },
                s.checked,
                s.failed
            );
            if s.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
