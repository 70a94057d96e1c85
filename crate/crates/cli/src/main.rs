use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};

use seqmodel::baselines::propositions::{proposition1, proposition2};
use seqmodel::baselines::ResponseKind;
use seqmodel::sequence_form::SequenceMatrix;
use seqmodel::sim::{run_experiment_with_progress, GameId, MatchConfig};
use seqmodel::{Error, ExactSeqGame, Player, Result};

/// Bayesian opponent modeling experiments on Kuhn poker and Rock-Paper-Scissors.
#[derive(Debug, Parser)]
#[command(name = "seqmodel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run modeling algorithms against prior-drawn opponents and write the
    /// per-match and aggregate CSVs plus a replayable manifest.
    Experiment(ExperimentArgs),
    /// Reproduce the two Rock-Paper-Scissors counterexamples for
    /// sample-based responses.
    Props,
    /// Write E, F, A and the observability table of a game as CSV.
    DumpGame(DumpArgs),
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long, default_value = "kuhn")]
    game: GameId,
    /// Comma-separated subset of fmap,bbr,map,thompson,bestnash,bestresponse.
    #[arg(long, value_delimiter = ',', default_value = "fmap,bbr,map,thompson,bestnash,bestresponse")]
    algos: Vec<ResponseKind>,
    #[arg(long, default_value_t = 100)]
    opponents: usize,
    #[arg(long, default_value_t = 3000)]
    iterations: usize,
    /// Prior samples per opponent for BBR, MAP and Thompson.
    #[arg(long, default_value_t = 10)]
    samples: usize,
    /// Symmetric Dirichlet parameter of the prior.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads; 0 uses every logical core, 1 runs serially.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Replay the configuration recorded in a manifest; the game, algorithm,
    /// size, prior and seed flags are ignored.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DumpArgs {
    #[arg(long, default_value = "kuhn")]
    game: GameId,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: String,
    config: MatchConfig,
    opponent_seeds: Vec<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SEQMODEL_LOG", "info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Experiment(args) => experiment(args),
        Command::Props => props(),
        Command::DumpGame(args) => dump_game(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::from(e).context(format!("cannot create {}", path.display())))
}

fn experiment(args: ExperimentArgs) -> Result<ExitCode> {
    let config = match &args.manifest {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::from(e).context(format!("cannot read {}", path.display())))?;
            let manifest: Manifest = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("malformed manifest {}: {e}", path.display())))?;
            manifest.config
        }
        None => MatchConfig {
            game: args.game,
            iterations: args.iterations,
            opponents: args.opponents,
            samples: args.samples,
            alpha: args.alpha,
            seed: args.seed,
            algorithms: args.algos,
        },
    };
    config.validate()?;
    fs::create_dir_all(&args.out).map_err(|e| Error::from(e).context(format!("cannot create {}", args.out.display())))?;

    info!(
        "{} opponents x {} iterations on {} ({})",
        config.opponents,
        config.iterations,
        config.game,
        config.algorithms.iter().map(|a| a.name()).collect::<Vec<_>>().join(", ")
    );
    let finished = AtomicUsize::new(0);
    let total = config.opponents;
    let table = run_experiment_with_progress(&config, args.jobs, &|_| {
        let n = finished.fetch_add(1, Ordering::Relaxed) + 1;
        if n % 10 == 0 || n == total {
            info!("{n}/{total} opponents done");
        }
    })?;

    let mut w = create(&args.out.join("records.csv"))?;
    table.write_records_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&args.out.join("aggregate.csv"))?;
    table.write_aggregate_csv(&mut w)?;
    w.flush()?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        opponent_seeds: (0..config.opponents).map(|o| config.opponent_seed(o)).collect(),
        config: config.clone(),
    };
    let mut w = create(&args.out.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut w, &manifest).map_err(|e| Error::Io(e.into()))?;
    writeln!(w)?;
    w.flush()?;

    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "algo,final_mean_payoff")?;
    for &a in &config.algorithms {
        writeln!(out, "{a},{:.4}", table.final_mean_payoff(a).unwrap_or(f64::NAN))?;
    }
    info!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn props() -> Result<ExitCode> {
    let horizon1 = 10_000;
    let p1 = proposition1(horizon1)?;
    let ok1 = p1.min_distance >= 0.2;
    println!(
        "{} proposition 1: min BBR distance over t <= {horizon1} is {:.6} (at t = {}), max rock weight {:.6}",
        verdict(ok1),
        p1.min_distance,
        p1.argmin,
        p1.max_rock
    );

    let horizon2 = 3_000;
    let p2 = proposition2(horizon2)?;
    let ok2 = p2.final_weight > 0.99 && p2.settled_at.is_some() && p2.monotone_after_settling && p2.ratio_rel_error <= 1e-9;
    let settled = p2.settled_at.map_or("never".to_string(), |t| t.to_string());
    println!(
        "{} proposition 2: weight of s1 = {:.6} at t = {horizon2}, >= 0.99 from t = {settled}, \
         ratio rel. error {:.2e}, BBR distance {:.6}, MAP distance {:.6}",
        verdict(ok2),
        p2.final_weight,
        p2.ratio_rel_error,
        p2.bbr_distance,
        p2.map_distance
    );
    Ok(if ok1 && ok2 { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn dump_game(args: DumpArgs) -> Result<ExitCode> {
    let (tree, obs) = match args.game {
        GameId::Kuhn => seqmodel::game::kuhn(),
        GameId::Rps => seqmodel::game::rps(),
    };
    let game = ExactSeqGame::derive(&tree)?;
    fs::create_dir_all(&args.out).map_err(|e| Error::from(e).context(format!("cannot create {}", args.out.display())))?;
    for (name, which) in [("E", SequenceMatrix::E), ("F", SequenceMatrix::F), ("A", SequenceMatrix::A)] {
        let path = args.out.join(format!("{}_{name}.csv", args.game));
        let mut w = create(&path)?;
        game.write_csv(which, &mut w)?;
        w.flush()?;
        info!("wrote {}", path.display());
    }

    let path = args.out.join(format!("{}_observability.csv", args.game));
    let mut w = create(&path)?;
    writeln!(w, "leaf,observed_by_player1,observed_by_player2")?;
    for leaf in tree.leaves() {
        let seen = |p: Player| -> Result<String> { Ok(obs.observe_label(&tree, p, &leaf.label)?.join(";")) };
        writeln!(w, "{},{},{}", leaf.label, seen(Player::One)?, seen(Player::Two)?)?;
    }
    w.flush()?;
    info!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}
