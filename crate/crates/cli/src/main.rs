//! Command-line entry point: reproducible degree, approximation, Bott and
//! stabilization experiments with JSON/CSV outputs.

use clap::{Parser, Subcommand};

use bottdeg_cli::config::FlatConfig;
use bottdeg_cli::runner;

#[derive(Parser)]
#[command(
    name = "bottdeg",
    version,
    about = "Clifford-Bott elements, finite approximation and Brouwer degree certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Default)]
struct CommonArgs {
    /// Named map instance: cubic2, square2, cyclic, sobolev, linear, ...
    #[arg(long)]
    map: Option<String>,
    /// Ball radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Target point, comma separated.
    #[arg(long)]
    target: Option<String>,
    /// Degree engine: root, winding, homotopy or all.
    #[arg(long)]
    method: Option<String>,
    /// Homotopy family: involution, straight-line, shift or auto.
    #[arg(long)]
    homotopy: Option<String>,
    /// Tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    /// Grid density (nodes per axis / seeds per axis).
    #[arg(long)]
    grid: Option<usize>,
    /// RNG seed (recorded in every output).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $BOTTDEG_OUT_DIR or the current dir).
    #[arg(long)]
    out: Option<String>,
    /// Cyclic order / block count.
    #[arg(long)]
    l: Option<usize>,
    /// Sobolev order.
    #[arg(long)]
    order: Option<usize>,
    /// Stage frequencies, comma separated or a..b.
    #[arg(long)]
    n: Option<String>,
    /// Diagonal entries of a linear instance, comma separated.
    #[arg(long)]
    diag: Option<String>,
    /// Bandwidth of the net-builder experiment.
    #[arg(long)]
    kmax: Option<usize>,
    /// Net radius δ₀.
    #[arg(long)]
    delta0: Option<f64>,
    /// Ball radius of the net experiment.
    #[arg(long, name = "net-radius")]
    net_radius: Option<f64>,
    /// Sample count for profiles.
    #[arg(long)]
    samples: Option<usize>,
    /// Control variant (e.g. frozen).
    #[arg(long)]
    control: Option<String>,
    /// Range of cyclic truncations, a..b or comma list.
    #[arg(long, name = "l-range")]
    l_range: Option<String>,
    /// Identity-model stage dimensions, comma list.
    #[arg(long)]
    stages: Option<String>,
    /// Flat key = value config file; flags override file entries.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Brouwer degree certificates for a named map.
    Degree(CommonArgs),
    /// Net construction and finite-approximability profiles.
    Approximate(CommonArgs),
    /// Bott-identity residuals and commutativity defects.
    Bott(CommonArgs),
    /// Per-stage degrees across an approximation family.
    Stabilize(CommonArgs),
}

fn merge(args: &CommonArgs) -> Result<FlatConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => FlatConfig::load(std::path::Path::new(path))?,
        None => FlatConfig::default(),
    };
    macro_rules! fold {
        ($key:literal, $field:expr) => {
            if let Some(v) = &$field {
                cfg.set($key, v.to_string());
            }
        };
    }
    fold!("map", args.map);
    fold!("radius", args.radius);
    fold!("target", args.target);
    fold!("method", args.method);
    fold!("homotopy", args.homotopy);
    fold!("tol", args.tol);
    fold!("grid", args.grid);
    fold!("seed", args.seed);
    fold!("out", args.out);
    fold!("l", args.l);
    fold!("order", args.order);
    fold!("n", args.n);
    fold!("diag", args.diag);
    fold!("kmax", args.kmax);
    fold!("delta0", args.delta0);
    fold!("net-radius", args.net_radius);
    fold!("samples", args.samples);
    fold!("control", args.control);
    fold!("l-range", args.l_range);
    fold!("stages", args.stages);
    Ok(cfg)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // keep exit code 2 reserved for boundary hits
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            std::process::exit(if is_help { 0 } else { 64 });
        }
    };
    let (cfg, run): (_, fn(&FlatConfig) -> Result<runner::CommandOutcome, String>) =
        match &cli.command {
            Command::Degree(a) => (merge(a), runner::cmd_degree),
            Command::Approximate(a) => (merge(a), runner::cmd_approximate),
            Command::Bott(a) => (merge(a), runner::cmd_bott),
            Command::Stabilize(a) => (merge(a), runner::cmd_stabilize),
        };
    let cfg = match cfg {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(64);
        }
    };
    match run(&cfg) {
        Ok(outcome) => std::process::exit(outcome.exit),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(64);
        }
    }
}
