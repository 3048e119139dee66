use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dapi::pipeline::{self, CaseId, RunConfig, RunOutcome, EXIT_NOT_CONVERGED, EXIT_OK};

const OUTPUT_HELP: &str = "\
Output files (comma separated, '.' decimal, LF line ends, one header row):
  trace.csv            i, delta, critic_norm, actor_norm, residual, wV_1.., wu1_1..
                       (row 0 holds the initial weights)
  rollout_initial.csv  t, x1..xn, u1..um, J   (initial policy, no exploration)
  rollout_final.csv    t, x1..xn, u1..um, J   (learned policy)
  summary.csv          name, seed, converged, iterations, critic_norm, actor_norm,
                       J_initial, J_final, reduction_pct, max_abs_u
                       [, K_learned_i_j.., K_oracle_i_j.. for linear plants]
  theta.toml           critic = [..], actor = [[..]]
  oracle.csv           kind, i, j, value   (kind is P or K)
  manifest.toml, records.csv   persisted sample bundle (collect)

Exit status: 0 ok, 1 I/O failure, 2 not converged, 3 data or rank failure,
4 configuration error.";

#[derive(Parser)]
#[command(name = "dapi", version, about = "Data-based approximate policy iteration", after_help = OUTPUT_HELP)]
struct Cli {
    /// Log iteration progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a bundled benchmark: case1, rtac-unconstrained or rtac-constrained.
    Case {
        case: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, required_unless_present = "print_config")]
        out: Option<PathBuf>,
        /// Print the benchmark as a configuration file instead of running it.
        #[arg(long)]
        print_config: bool,
    },
    /// Collect, iterate and evaluate as described by a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the noise seed of the configuration.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Excite the plant and persist the sample bundle.
    Collect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Iterate on a persisted sample bundle, then evaluate.
    Iterate {
        #[arg(long)]
        config: PathBuf,
        /// Directory written by `collect`.
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Roll out the policy stored in a weight file.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// A theta.toml written by `run` or `iterate`.
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Riccati solution by Kleinman iteration for a linear configuration.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &Path, seed: Option<u64>) -> dapi::Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = seed {
        cfg.noise.seed = s;
    }
    Ok(cfg)
}

fn report(outcome: &RunOutcome, out: &Path) -> i32 {
    let s = &outcome.summary;
    println!(
        "{}: {} after {} iterations, |theta_V| = {:.6}, |theta_u| = {:.6}",
        s.name,
        if s.converged {
            "converged"
        } else {
            "not converged"
        },
        s.iterations,
        s.critic_norm,
        s.actor_norm
    );
    println!(
        "cost {:.6} -> {:.6} ({:.2}% reduction), max |u| = {:.6}",
        s.j_initial,
        s.j_final,
        s.reduction_pct(),
        s.max_abs_input
    );
    if let Some((learned, oracle)) = &s.gains {
        println!("learned gain {learned:.6}, Riccati gain {oracle:.6}");
    }
    println!("artifacts in {}", out.display());
    if s.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

fn dispatch(cmd: Command) -> dapi::Result<i32> {
    match cmd {
        Command::Case {
            case,
            seed,
            out,
            print_config,
        } => {
            let cfg = RunConfig::preset(case.parse::<CaseId>()?, seed);
            if print_config {
                print!("{}", cfg.to_toml());
                return Ok(EXIT_OK);
            }
            let out = out.expect("clap enforces --out");
            Ok(report(&pipeline::run(&cfg, &out)?, &out))
        }
        Command::Run { config, seed, out } => {
            Ok(report(&pipeline::run(&load(&config, seed)?, &out)?, &out))
        }
        Command::Collect { config, seed, out } => {
            let set = pipeline::run_collect(&load(&config, seed)?, &out)?;
            println!(
                "{} samples, {} unknowns, written to {}",
                set.len(),
                set.unknowns(),
                out.display()
            );
            Ok(EXIT_OK)
        }
        Command::Iterate {
            config,
            samples,
            out,
        } => Ok(report(
            &pipeline::run_iterate(&load(&config, None)?, &samples, &out)?,
            &out,
        )),
        Command::Evaluate { config, theta, out } => {
            let r = pipeline::run_evaluate(&load(&config, None)?, &theta, &out)?;
            println!(
                "J = {:.6}, max |u| = {:.6}",
                r.final_cost(),
                r.max_abs_input()
            );
            Ok(EXIT_OK)
        }
        Command::Oracle { config, out } => {
            let sol = pipeline::run_oracle(&load(&config, None)?, &out)?;
            println!("P = {:.9}K = {:.9}", sol.p, sol.k);
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose {
        log::LevelFilter::Info
    } else {
        log::LevelFilter::Warn
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    let code = match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            pipeline::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
