use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

/// Gesture and color-marker perception engine with a lab control plane.
#[derive(Debug, Parser)]
#[command(
    name = "sixsense",
    disable_version_flag = true,
    subcommand_required = false,
    arg_required_else_help = true
)]
struct Cli {
    /// Print name and version as JSON and exit.
    #[arg(long)]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic gesture dataset of 50x50 PGM masks.
    Synth(SynthArgs),
    /// Train the gesture classifier on a dataset directory.
    Train(TrainArgs),
    /// Run the gesture path over a frame directory.
    Classify(ClassifyArgs),
    /// Run the color-marker pointer path over a frame directory.
    Markers(MarkersArgs),
    /// Run motion detection over a frame directory.
    Motion(MotionArgs),
    /// Start the control plane server.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    classes: usize,
    #[arg(long, default_value_t = 50)]
    per_class: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; must not exist or be empty unless --force.
    #[arg(long)]
    out: PathBuf,
    /// Replace an existing output directory.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Dataset directory written by `synth`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 5000)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-5)]
    lr: f64,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    /// Layer sizes, input first.
    #[arg(long, default_value = "2500,2500,1200,10", value_parser = parse_sizes)]
    arch: Sizes,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weights JSON output.
    #[arg(long)]
    out: PathBuf,
    /// Loss history CSV; defaults to the weights path with a `.loss.csv` suffix.
    #[arg(long)]
    loss_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum YCbCrArg {
    Verbatim,
    Standard,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    weights: PathBuf,
    #[arg(long)]
    frames: PathBuf,
    /// Debounce queue length.
    #[arg(long, default_value_t = 5)]
    queue: usize,
    /// Confidence a classification must exceed to enter the queue.
    #[arg(long, default_value_t = 0.95)]
    conf: f64,
    /// Smallest skin blob treated as a hand.
    #[arg(long, default_value_t = 100)]
    min_area: usize,
    #[arg(long, value_enum, default_value_t = YCbCrArg::Verbatim)]
    ycbcr: YCbCrArg,
    /// Event log (JSONL).
    #[arg(long)]
    out: PathBuf,
    /// Per-frame trace (JSONL).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MarkersArgs {
    #[arg(long)]
    frames: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    gamma: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    delta: i64,
    /// Screen size as WIDTHxHEIGHT.
    #[arg(long, default_value = "1920x1080", value_parser = parse_size)]
    screen: (u32, u32),
    /// Video size as WIDTHxHEIGHT; defaults to the frame size.
    #[arg(long, value_parser = parse_size)]
    video: Option<(u32, u32)>,
    /// Smallest marker blob.
    #[arg(long, default_value_t = 25)]
    min_area: usize,
    /// Frames a left-click marker must persist to start a drag.
    #[arg(long, default_value_t = 3)]
    drag_hold: usize,
    #[arg(long, default_value_t = 1.0)]
    scroll_scale: f64,
    /// Pointer log (JSONL).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MotionArgs {
    #[arg(long)]
    frames: PathBuf,
    /// Frames averaged into the background model.
    #[arg(long, default_value_t = 30)]
    background: usize,
    /// Per-pixel intensity delta.
    #[arg(long, default_value_t = 25.0)]
    tau: f64,
    /// Changed-pixel fraction that raises an alert.
    #[arg(long, default_value_t = 0.005)]
    rho: f64,
    /// Alert log (JSONL).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Line-protocol TCP address.
    #[arg(long, default_value = "127.0.0.1:7878")]
    listen: SocketAddr,
    /// Web-socket bridge address (path /ws).
    #[arg(long)]
    ws_listen: Option<SocketAddr>,
    /// Serve dashboard assets from this directory on the web-socket listener.
    #[arg(long, value_name = "DIR")]
    with_dashboard: Option<PathBuf>,
    /// Grammar JSON: an array of {"phrase","device","action"}.
    #[arg(long)]
    grammar: Option<PathBuf>,
    /// Append-only device command log, replayed on start.
    #[arg(long)]
    command_log: Option<PathBuf>,
    /// Door unlock duration after a permit, in milliseconds.
    #[arg(long, default_value_t = 10_000)]
    ttl_ms: u64,
    /// Pending entry requests expire after this many milliseconds.
    #[arg(long, default_value_t = 60_000)]
    timeout_ms: u64,
    #[arg(long, default_value_t = 30)]
    background: usize,
    #[arg(long, default_value_t = 25.0)]
    tau: f64,
    #[arg(long, default_value_t = 0.005)]
    rho: f64,
}

#[derive(Debug, Clone)]
struct Sizes(Vec<usize>);

fn parse_sizes(s: &str) -> Result<Sizes, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Sizes)
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let w: u32 = w.parse().map_err(|e| format!("width: {e}"))?;
    let h: u32 = h.parse().map_err(|e| format!("height: {e}"))?;
    if w == 0 || h == 0 {
        return Err("sizes must be positive".into());
    }
    Ok((w, h))
}

/// How a run failed, mapped to the exit code.
#[derive(Debug)]
enum Failure {
    /// Bad flags or flag combinations, found before any work starts.
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.version {
        println!(
            "{}",
            serde_json::json!({"name": "sixsense", "version": env!("CARGO_PKG_VERSION")})
        );
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required");
        return ExitCode::from(1);
    };
    match commands::run(command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
