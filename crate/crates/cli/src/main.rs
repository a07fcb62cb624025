use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pylon_cli::commands::{cmd_bench, cmd_ksp, cmd_multiscale, cmd_route, BenchArgs, KspArgs, MultiscaleArgs, Output, RunOptions};
use pylon_cli::scenario_file::LayerGrids;
use pylon_cli::service::{serve, AppState};
use pylon_cli::{CliError, CliResult, LoadedScenario, ScenarioFile};
use pylon_core::KernelChoice;

#[derive(Parser)]
#[command(name = "pylon", version, about = "Pylon spotting over resistance rasters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cheapest route.
    Route(Common),
    /// Several diverse routes.
    Ksp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        metric: Option<String>,
        /// Diversity threshold.
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        penalty: Option<f64>,
    },
    /// Coarse-to-fine route.
    Multiscale {
        #[command(flatten)]
        common: Common,
        /// Comma-separated, e.g. 3,2,1.
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<usize>>,
        #[arg(long)]
        edge_budget: Option<usize>,
    },
    /// Comparison with line routing, as CSV.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Generated split rasters added to the comparison.
        #[arg(long, default_value_t = 0)]
        synthetic: usize,
    },
    /// HTTP service.
    Serve {
        /// Scenario to preload.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long)]
        quiet: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Kernel::Auto)]
    kernel: Kernel,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    quiet: bool,
    /// Add wall time to the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kernel {
    Auto,
    Naive,
    Step,
    Convex,
}

impl From<Kernel> for KernelChoice {
    fn from(k: Kernel) -> Self {
        match k {
            Kernel::Auto => KernelChoice::Auto,
            Kernel::Naive => KernelChoice::Naive,
            Kernel::Step => KernelChoice::Step,
            Kernel::Convex => KernelChoice::Convex,
        }
    }
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions { kernel: self.kernel.into(), seed: self.seed, timing: self.timing }
    }
}

fn write(common: &Common, out: Output) -> CliResult<()> {
    match &common.out {
        Some(p) => std::fs::write(p, &out.text).map_err(|source| CliError::Write { path: p.clone(), source })?,
        None => print!("{}", out.text),
    }
    if !common.quiet {
        eprintln!("{}", out.summary);
    }
    Ok(())
}

fn preload(path: &Path) -> CliResult<(LoadedScenario, LayerGrids)> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let file = ScenarioFile::parse(&text)?;
    let grids = LayerGrids::load_from_dir(&file, path.parent().unwrap_or(Path::new(".")))?;
    Ok((LoadedScenario::new(file, &grids)?, grids))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Route(c) => write(&c, cmd_route(&c.scenario, &c.options())?),
        Command::Ksp { common, k, metric, theta, method, penalty } => {
            let args = KspArgs { k, metric, theta, method, penalty };
            write(&common, cmd_ksp(&common.scenario, &args, &common.options())?)
        }
        Command::Multiscale { common, scales, edge_budget } => {
            let args = MultiscaleArgs { scales, edge_budget };
            write(&common, cmd_multiscale(&common.scenario, &args, &common.options())?)
        }
        Command::Bench { common, synthetic } => {
            write(&common, cmd_bench(&common.scenario, &BenchArgs { synthetic }, &common.options())?)
        }
        Command::Serve { scenario, port, bind, quiet } => {
            let state = AppState::new();
            if let Some(p) = scenario {
                let (loaded, grids) = preload(&p)?;
                let id = state.insert(loaded, grids);
                if !quiet {
                    eprintln!("preloaded {} as {id}", p.display());
                }
            }
            let addr = SocketAddr::new(bind, port);
            if !quiet {
                eprintln!("listening on http://{addr}");
            }
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
            rt.block_on(serve(addr, state)).map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
