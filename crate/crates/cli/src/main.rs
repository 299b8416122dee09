use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gasnet_cli::{exit, run, Command, Overrides, RunConfig};
use gasnet_core::models::ModelKind;

#[derive(Parser)]
#[command(name = "gasnet", version, about = "Gas transport on pipe networks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Worker threads for convergence studies (default: all cores).
    #[arg(long, global = true, env = "GASNET_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate in time and record the boundary fluxes.
    Simulate(Common),
    /// Solve for the steady state of the boundary data at t = 0.
    Steady(Common),
    /// Pairwise convergence study under mesh halving.
    Converge(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Linear,
    Semilinear,
    Quasilinear,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    /// Network file (overrides `[network] file`).
    #[arg(long)]
    network: Option<PathBuf>,
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    /// Mesh size (the coarsest one for `converge`).
    #[arg(long)]
    h: Option<f64>,
    #[arg(long = "final-time")]
    final_time: Option<f64>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long, value_enum)]
    hybrid: Option<Switch>,
    #[arg(long)]
    levels: Option<usize>,
}

impl Common {
    fn into_config(self, command: Command) -> RunConfig {
        RunConfig {
            command,
            network: self.network,
            scenario: self.scenario,
            out: self.out,
            overrides: Overrides {
                degree: self.k,
                dt: self.dt,
                h: self.h,
                final_time: self.final_time,
                kind: self.model.map(|m| match m {
                    Model::Linear => ModelKind::Linear,
                    Model::Semilinear => ModelKind::Semilinear,
                    Model::Quasilinear => ModelKind::Quasilinear,
                }),
                hybrid: self.hybrid.map(|s| matches!(s, Switch::On)),
                levels: self.levels,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { exit::OK as u8 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("gasnet: cannot configure {n} threads: {e}");
            return ExitCode::from(exit::USAGE as u8);
        }
    }
    let cfg = match cli.command {
        Cmd::Simulate(c) => c.into_config(Command::Simulate),
        Cmd::Steady(c) => c.into_config(Command::Steady),
        Cmd::Converge(c) => c.into_config(Command::Converge),
    };
    match run(&cfg) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gasnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
