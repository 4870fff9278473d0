//! Command-line driver: Monte Carlo BER sweeps, density-evolution
//! trajectories and thresholds, and interleaver table dumps.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scmudd::de::DeConfig;
use scmudd::harness::{
    self, write_ber_outputs, write_threshold_outputs, write_trajectory_outputs, CsiMode, SimConfig,
};
use scmudd::interleaver::ScInterleaver;
use scmudd::Error;

#[derive(Parser)]
#[command(name = "scmudd", version, about = "LDPC-coded MIMO MUDD simulator with spatially coupled interleaving")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER sweep over SNR points.
    Simulate(SimulateArgs),
    /// Record a density-evolution trajectory (per-iteration sigma^2, ME,
    /// decoder entropy per section).
    DeTrajectory(DeArgs),
    /// Bisect for the decoding threshold in SNR.
    DeThreshold(DeThresholdArgs),
    /// Export an interleaver's permutation tables as CSV.
    InterleaverDump(InterleaverArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, short = 'k')]
    num_tx: Option<usize>,
    #[arg(long, short = 'n')]
    num_rx: Option<usize>,
    /// Code length / section size M.
    #[arg(long, short = 'm')]
    code_length: Option<usize>,
    /// Chain length L.
    #[arg(long, short = 'l')]
    chain_length: Option<usize>,
    /// Coupling width W.
    #[arg(long, short = 'w')]
    coupling_width: Option<usize>,
    #[arg(long)]
    dv: Option<usize>,
    #[arg(long)]
    dc: Option<usize>,
    /// Outer iteration cap I.
    #[arg(long, short = 'i')]
    outer_iters: Option<usize>,
    /// Inner sum-product iterations J.
    #[arg(long, short = 'j')]
    inner_iters: Option<usize>,
    /// SNR points in dB (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    snr_db: Vec<f64>,
    /// Scheduling: parallel | sliding-window.
    #[arg(long)]
    scheduling: Option<String>,
    /// Channel knowledge: "perfect" or "estimated:<training_bits>".
    #[arg(long)]
    csi: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for ber.csv / summary.json.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct DeArgs {
    /// Load alpha = K/N.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// SNR 1/N0 in dB.
    #[arg(long, default_value_t = 2.5)]
    snr_db: f64,
    #[arg(long, short = 'l', default_value_t = 64)]
    chain_length: usize,
    #[arg(long, short = 'w', default_value_t = 2)]
    coupling_width: usize,
    #[arg(long, default_value_t = 3)]
    dv: usize,
    #[arg(long, default_value_t = 6)]
    dc: usize,
    #[arg(long, short = 'j', default_value_t = 100)]
    inner_iters: usize,
    #[arg(long, short = 'i', default_value_t = 2000)]
    outer_iters: usize,
    #[arg(long, default_value = "parallel")]
    scheduling: String,
    #[arg(long, default_value_t = scmudd::de::DEFAULT_QUAD_ORDER)]
    quad_order: usize,
    #[arg(long, default_value_t = 1e-12)]
    fp_tol: f64,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DeThresholdArgs {
    #[command(flatten)]
    de: DeArgs,
    /// Lower bracket edge in dB (must stall).
    #[arg(long, default_value_t = 2.0)]
    bracket_lo: f64,
    /// Upper bracket edge in dB (must converge).
    #[arg(long, default_value_t = 3.4)]
    bracket_hi: f64,
    /// Bisection stops below this bracket width.
    #[arg(long, default_value_t = 0.01)]
    tol_db: f64,
}

#[derive(Args)]
struct InterleaverArgs {
    #[arg(long, short = 'm')]
    code_length: usize,
    #[arg(long, short = 'l')]
    chain_length: usize,
    #[arg(long, short = 'w')]
    coupling_width: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.downcast_ref::<Error>() {
                Some(Error::Config(_)) | Some(Error::Dimension(_)) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::DeTrajectory(args) => de_trajectory(args),
        Command::DeThreshold(args) => de_threshold(args),
        Command::InterleaverDump(args) => interleaver_dump(args),
    }
}

fn parse_csi(text: &str) -> anyhow::Result<CsiMode> {
    if text == "perfect" {
        return Ok(CsiMode::Perfect);
    }
    if let Some(bits) = text.strip_prefix("estimated:") {
        return Ok(CsiMode::Estimated {
            training_bits: bits.parse()?,
        });
    }
    Err(Error::config(format!("csi must be \"perfect\" or \"estimated:<bits>\", got {text:?}")).into())
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let (mut cfg, echo) = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            (SimConfig::from_toml(&text)?, Some(text))
        }
        None => (SimConfig::default(), None),
    };
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = args.$field { cfg.$field = v; })*
        };
    }
    set!(num_tx, num_rx, code_length, chain_length, coupling_width, dv, dc, outer_iters, inner_iters, trials, seed);
    if !args.snr_db.is_empty() {
        cfg.snr_db = args.snr_db.clone();
    }
    if let Some(s) = args.scheduling {
        cfg.scheduling = s;
    }
    if let Some(c) = &args.csi {
        cfg.csi = parse_csi(c)?;
    }
    if let Some(o) = &args.output {
        cfg.output = Some(o.display().to_string());
    }
    cfg.validate()?;

    let records = harness::run_ber_sweep(&cfg)?;
    for r in &records {
        eprintln!(
            "{} @ {:.3} dB: BER {:.3e} (+-{:.1e}) from {} bits, {} frame errors / {} trials [{:.1}s]",
            r.scheme, r.snr_db, r.ber, r.wilson_half_width, r.bits_counted, r.frame_errors, r.trials,
            r.wall_secs
        );
    }
    if let Some(dir) = cfg.output.clone() {
        let paths = write_ber_outputs(dir.as_ref(), &cfg, echo.as_deref(), &records)?;
        for p in paths {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn de_config(args: &DeArgs) -> DeConfig {
    DeConfig {
        alpha: args.alpha,
        n0: 10f64.powf(-args.snr_db / 10.0),
        chain_length: args.chain_length,
        coupling_width: args.coupling_width,
        dv: args.dv,
        dc: args.dc,
        inner_iters: args.inner_iters,
        outer_iters: args.outer_iters,
        scheduling: args.scheduling.clone(),
        quad_order: args.quad_order,
        fp_tol: args.fp_tol,
    }
}

fn de_trajectory(args: DeArgs) -> anyhow::Result<()> {
    let cfg = de_config(&args);
    cfg.validate()?;
    let traj = harness::de_trajectory(&cfg)?;
    let last = traj.final_state();
    eprintln!(
        "{} @ {:.3} dB: {} after {} outer iterations, min ME {:.6}",
        cfg.scheduling,
        cfg.snr_db(),
        if traj.converged { "converged" } else { "stalled" },
        traj.outer_iterations,
        last.min_me()
    );
    match &args.output {
        Some(dir) => {
            for p in write_trajectory_outputs(dir, &cfg, &traj)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => print!("{}", traj.to_csv()),
    }
    Ok(())
}

fn de_threshold(args: DeThresholdArgs) -> anyhow::Result<()> {
    let cfg = de_config(&args.de);
    cfg.validate()?;
    let report = harness::de_threshold(&cfg, (args.bracket_lo, args.bracket_hi), args.tol_db)?;
    print!("{}", report.to_text());
    if let Some(dir) = &args.de.output {
        for p in write_threshold_outputs(dir, &report)? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn interleaver_dump(args: InterleaverArgs) -> anyhow::Result<()> {
    let itl = ScInterleaver::build(
        args.code_length,
        args.chain_length,
        args.coupling_width,
        args.seed,
    )?;
    let csv = itl.to_csv();
    match &args.output {
        Some(path) => {
            fs::write(path, csv)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
