//! `tauber`: validate games, compute weighted values, run family sweeps and
//! equivalence reports, audit density constructions.
//!
//! Exit status: 0 ok, 1 validation failure or failing verdict, 2 parse error,
//! 3 numeric failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use tauber::density::{
    parse_density, proof_constants, quantile_partition, regularize_support, tv_correct, Density,
};
use tauber::games::{builtin, random_game, StochasticGame, BUILTIN_NAMES};
use tauber::tauberian::{
    equivalence_report, sweep, write_csv, ExperimentConfig, FamilyReport, Summary, TauberianError,
};
use tauber::valuation::value_backward;

#[derive(Parser)]
#[command(
    name = "tauber",
    version,
    about = "Weighted values of zero-sum stochastic games"
)]
struct Cli {
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "TAUBER_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Check a game document; violations go to stderr.
    Validate {
        #[command(flatten)]
        game: GameArgs,
    },
    /// Print the per-state value bracket of one game under one density.
    Value {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        density: String,
        #[arg(long, default_value_t = 1e-9)]
        tail_eps: f64,
    },
    /// Evaluate value families; deviations are relative to each family's
    /// finest grid point.
    Sweep(ExperimentArgs),
    /// Evaluate value families against the common Abel/Cesàro limit.
    Equivalence(ExperimentArgs),
    /// Run the density constructions on one density and report their checks.
    Audit {
        #[arg(long)]
        density: String,
        #[arg(long)]
        epsilon: f64,
        /// Bound `M` on the variation-times-quantile product.
        #[arg(long = "variation-bound", short = 'M')]
        variation_bound: f64,
        #[arg(long, default_value_t = 0.1)]
        r0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a builtin game as a JSON document.
    Demo {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct GameArgs {
    /// Builtin name, `random:STATES,MAX_ACTIONS,MIN_ACTIONS`, or a document path.
    #[arg(long)]
    game: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output stem; `.csv` and `.json` are written next to each other.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tail_eps: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct Failure {
    code: u8,
    message: String,
}

fn parse_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn numeric(operation: &str, error: impl std::fmt::Display) -> Failure {
    Failure {
        code: 3,
        message: format!("{operation} failed: {error}"),
    }
}

fn io_error(path: &Path, error: impl std::fmt::Display) -> Failure {
    Failure {
        code: 3,
        message: format!("{}: {error}", path.display()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| parse_error(format!("--jobs {jobs}: {e}")))?;
    }
    match cli.verb {
        Verb::Validate { game } => validate(&game),
        Verb::Value {
            game,
            density,
            tail_eps,
        } => value(&game, &density, tail_eps),
        Verb::Sweep(args) => experiment(&args, false),
        Verb::Equivalence(args) => experiment(&args, true),
        Verb::Audit {
            density,
            epsilon,
            variation_bound,
            r0,
            out,
        } => audit(&density, epsilon, variation_bound, r0, out.as_deref()),
        Verb::Demo { name, out } => {
            let game = builtin(&name).map_err(|e| parse_error(format!("`{name}`: {e}")))?;
            emit(out.as_deref(), &(game.to_document() + "\n"))?;
            Ok(0)
        }
    }
}

fn density_arg(text: &str) -> Result<Density, Failure> {
    parse_density(text).map_err(|e| parse_error(e.to_string()))
}

fn resolve_game(text: &str, seed: u64) -> Result<StochasticGame, Failure> {
    if BUILTIN_NAMES.contains(&text) {
        return builtin(text).map_err(|e| parse_error(e.to_string()));
    }
    if let Some(shape) = text.strip_prefix("random:") {
        let dims = shape
            .split(',')
            .map(|d| d.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .ok()
            .filter(|d| d.len() == 3 && d.iter().all(|x| *x > 0));
        let Some(d) = dims else {
            return Err(parse_error(format!(
                "cannot parse game token `{text}`: expected random:STATES,MAX_ACTIONS,MIN_ACTIONS"
            )));
        };
        return Ok(random_game(seed, d[0], d[1], d[2]));
    }
    let path = Path::new(text);
    if !path.exists() {
        return Err(parse_error(format!(
            "cannot parse game token `{text}`: neither a builtin ({}) nor an existing file",
            BUILTIN_NAMES.join(", ")
        )));
    }
    let document = fs::read_to_string(path).map_err(|e| parse_error(format!("{text}: {e}")))?;
    StochasticGame::from_document(&document).map_err(|e| parse_error(format!("{text}: {e}")))
}

fn game_arg(args: &GameArgs) -> Result<StochasticGame, Failure> {
    let text = args
        .game
        .as_deref()
        .ok_or_else(|| parse_error("missing --game"))?;
    resolve_game(text, args.seed)
}

fn validate(args: &GameArgs) -> Result<u8, Failure> {
    let game = game_arg(args)?;
    let violations = game.validate();
    for v in &violations {
        eprintln!("{v}");
    }
    if violations.is_empty() {
        println!("ok: {} states", game.state_count());
        Ok(0)
    } else {
        Ok(1)
    }
}

fn value(args: &GameArgs, density: &str, tail_eps: f64) -> Result<u8, Failure> {
    let rho = density_arg(density)?;
    let game = game_arg(args)?;
    let violations = game.validate();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("{v}");
        }
        return Ok(1);
    }
    let bracket =
        value_backward(&game, &rho, tail_eps).map_err(|e| numeric("value_backward", e))?;
    for s in 0..bracket.len() {
        println!("s{s} ∈ [{}, {}]", bracket.lo[s], bracket.hi[s]);
    }
    Ok(0)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, or to stdout when no path is given.
fn emit(path: Option<&Path>, contents: &str) -> Result<(), Failure> {
    let Some(path) = path else {
        print!("{contents}");
        return Ok(());
    };
    write_atomic(path, contents.as_bytes())
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| io_error(path, e))?;
    let mut file = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
    file.write_all(contents).map_err(|e| io_error(path, e))?;
    file.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

fn experiment(args: &ExperimentArgs, equivalence: bool) -> Result<u8, Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| parse_error(format!("{}: {e}", args.config.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| parse_error(format!("{}: {e}", args.config.display())))?;
    let specs = config.specs().map_err(|e| parse_error(e.to_string()))?;
    let game = resolve_game(&config.game, args.seed)?;
    let violations = game.validate();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("{v}");
        }
        return Ok(1);
    }
    let stem = args
        .out
        .clone()
        .or_else(|| config.out.as_ref().map(PathBuf::from))
        .ok_or_else(|| parse_error("missing --out (and no \"out\" in the config)"))?;
    let tail_eps = args.tail_eps.unwrap_or(config.tail_eps);

    let fail = |e: TauberianError| match e {
        TauberianError::MissingReferenceFamily | TauberianError::InvalidSpec(_) => {
            parse_error(e.to_string())
        }
        _ => numeric(
            if equivalence {
                "equivalence_report"
            } else {
                "family_values"
            },
            e,
        ),
    };
    let (families, summary, pass): (Vec<FamilyReport>, Summary, bool) = if equivalence {
        let report = equivalence_report(&game, &specs, config.tol, tail_eps).map_err(fail)?;
        let summary = Summary::from(&report);
        let pass = report.all_pass();
        (report.families, summary, pass)
    } else {
        let families = sweep(&game, &specs, tail_eps).map_err(fail)?;
        let summary = Summary::from_sweep(&families);
        (families, summary, true)
    };

    let mut csv = Vec::new();
    write_csv(&families, &mut csv).map_err(|e| numeric("write_csv", e))?;
    write_atomic(&stem.with_extension("csv"), &csv)?;
    let json = serde_json::to_string_pretty(&summary).expect("summaries always serialize") + "\n";
    write_atomic(&stem.with_extension("json"), json.as_bytes())?;
    for f in &summary.families {
        println!(
            "{:<16} finest {:<12} deviation {:.3e}{}",
            f.family,
            f.finest_grid_point,
            f.finest_deviation,
            f.verdict
                .as_deref()
                .map(|v| format!(" {v}"))
                .unwrap_or_default()
        );
    }
    Ok(if pass { 0 } else { 1 })
}

fn step_mass(steps: &tauber::density::StepDensity) -> f64 {
    steps
        .levels()
        .iter()
        .zip(steps.breakpoints().windows(2))
        .map(|(l, w)| l * (w[1] - w[0]))
        .sum()
}

fn audit(
    density: &str,
    epsilon: f64,
    variation_bound: f64,
    r0: f64,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let input = density_arg(density)?;
    let constants =
        proof_constants(epsilon, variation_bound, r0).map_err(|e| numeric("proof_constants", e))?;
    let mu = regularize_support(&input, epsilon).map_err(|e| numeric("regularize_support", e))?;
    let partition =
        quantile_partition(&mu, &constants).map_err(|e| numeric("quantile_partition", e))?;
    let worst_mass_error = (1..=partition.len())
        .map(|m| {
            let expect = ((m - 1) as f64 * constants.ln_p).exp() * (1.0 - constants.p);
            (partition.interval_mass(m) - expect).abs()
        })
        .fold(0.0, f64::max);
    let corrected = tv_correct(&mu, &partition, variation_bound, constants.k, epsilon)
        .map_err(|e| numeric("tv_correct", e))?;
    let report = json!({
        "density": density,
        "proof_constants": {
            "epsilon": constants.epsilon,
            "M": constants.variation_bound,
            "r0": constants.r0,
            "k": constants.k,
            "p": constants.p,
            "delta": constants.delta,
            "kappa": constants.kappa,
            "geometric_identity_error": (constants.geometric_mass() - (1.0 - epsilon)).abs(),
        },
        "regularize_support": {
            "support_end": mu.support_end(),
            "mass": mu.as_steps().map(step_mass),
            "l1_to_input": mu.l1_distance(&input),
        },
        "quantile_partition": {
            "intervals": partition.len(),
            "last_tau": partition.tau.last(),
            "max_interval_mass_error": worst_mass_error,
        },
        "tv_correct": {
            "threshold": variation_bound / (constants.k as f64 * epsilon),
            "incorrect_count": corrected.incorrect_count(),
            "incorrect": corrected.incorrect,
            "l1_to_input": corrected.density.l1_distance(&input),
        },
    });
    let text = serde_json::to_string_pretty(&report).expect("reports always serialize") + "\n";
    emit(out, &text)?;
    Ok(0)
}
