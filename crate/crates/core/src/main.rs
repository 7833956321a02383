use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use limitlab::cli::{load_config, run, Command};

/// Deterministic renders and property reports for polynomial natural
/// extensions, solenoids and Henon solid-torus models.
#[derive(Parser, Debug)]
#[command(name = "limitlab", version)]
struct Args {
    /// render-julia, render-basin, fibers, solenoid-demo, conjugacy-check,
    /// torus-diagnostics, accessible-boundary, homology or covering-check.
    command: Option<String>,
    /// Config file of key=value lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coefficients a0,a1,...,ad.
    #[arg(long, allow_hyphen_values = true)]
    poly: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    /// N, NxM or x_min,x_max,y_min,y_max,NxM.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// Component-graph JSON for homology and covering-check.
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    json: Option<String>,
    /// Print the effective config and exit.
    #[arg(long)]
    print_config: bool,
}

fn init_threads() {
    let Ok(raw) = std::env::var("LIMITLAB_THREADS") else { return };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("ignoring LIMITLAB_THREADS={raw}"),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    init_threads();
    let mut overrides: Vec<(&str, String)> = Vec::new();
    if let Some(cmd) = &args.command {
        if cmd.parse::<Command>().is_err() {
            eprintln!("error: unknown command '{cmd}'");
            return ExitCode::from(2);
        }
        overrides.push(("command", cmd.clone()));
    }
    let flags = [
        ("poly", &args.poly),
        ("z", &args.z),
        ("a", &args.a),
        ("alpha", &args.alpha),
        ("rho", &args.rho),
        ("depth", &args.depth),
        ("levels", &args.levels),
        ("samples", &args.samples),
        ("grid", &args.grid),
        ("seed", &args.seed),
        ("tol", &args.tol),
        ("delta", &args.delta),
        ("graph", &args.graph),
        ("out", &args.out),
        ("json", &args.json),
    ];
    overrides.extend(flags.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k, v))));
    let cfg = match load_config(args.config.as_deref(), &overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if args.print_config {
        print!("{}", cfg.to_text());
        return ExitCode::SUCCESS;
    }
    match run(&cfg) {
        Ok(report) => {
            if cfg.json.is_none() {
                print!("{}", report.to_json());
            }
            for name in &report.failures {
                eprintln!("FAIL {name}");
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
