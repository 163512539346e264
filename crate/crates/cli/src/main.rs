use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dsc_core::config::{parse_config, Backend, RunConfig};
use dsc_core::metrology::write_wigner_csv;
use dsc_core::run::{all_succeeded, circuit_table, dump_base_point, run_sweep, wigner_field, write_circuit_csv, write_csv};
use dsc_core::Error;

#[derive(Parser)]
#[command(name = "dsc", version, about = "Ground states of a qubit-resonator system coupled to a waveguide")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the base point of the config (any [sweep] section is ignored).
    Point {
        #[command(flatten)]
        common: Common,
        /// Also write the total Hamiltonian and ground vector (binary) to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Evaluate every point of the [sweep] section.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Wigner function of the conditional resonator state at the base point.
    Wigner {
        #[command(flatten)]
        common: Common,
    },
    /// Loss rate and cutoff over a range of coupling elements.
    Circuit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 or unset: one per core).
    #[arg(long, env = "DSC_JOBS")]
    jobs: Option<usize>,
    /// Overrides the config's backend.
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Cvs,
    Diag,
    Both,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Cvs => Backend::Cvs,
            BackendArg::Diag => Backend::Diag,
            BackendArg::Both => Backend::Both,
        }
    }
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Config(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn load(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Run(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn with_backend(mut cfg: RunConfig, backend: Option<BackendArg>) -> RunConfig {
    if let Some(b) = backend {
        cfg.backend = b.into();
    }
    cfg
}

/// Returns whether every row succeeded.
fn sweep_to(cfg: &RunConfig, common: &Common) -> Result<bool, Failure> {
    let rows = run_sweep(cfg, common.jobs)?;
    let mut out = sink(common.out.as_deref())?;
    write_csv(&mut out, cfg, &rows)?;
    out.flush()?;
    for r in rows.iter().filter(|r| r.failed()) {
        eprintln!(
            "dsc: row g_ghz={} backend={} failed: {}",
            r.g_ghz,
            r.backend,
            r.error.as_deref().unwrap_or("")
        );
    }
    Ok(all_succeeded(&rows))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Point { common, dump } => {
            let mut cfg = with_backend(load(&common.config)?, common.backend);
            cfg.sweep = None;
            if let Some(path) = dump {
                let mut f = BufWriter::new(File::create(&path)?);
                dump_base_point(&mut f, &cfg)?;
                f.flush()?;
            }
            sweep_to(&cfg, &common)
        }
        Command::Sweep { common } => {
            let cfg = with_backend(load(&common.config)?, common.backend);
            if cfg.sweep.is_none() {
                return Err(Failure::Config(format!("{}: no [sweep] section", common.config.display())));
            }
            sweep_to(&cfg, &common)
        }
        Command::Wigner { common } => {
            let cfg = load(&common.config)?;
            // the config's backend usually means "both"; default to the variational state
            let backend = common.backend.map_or(Backend::Cvs, Backend::from);
            if backend == Backend::Both {
                return Err(Failure::Config("wigner needs --backend cvs or diag".into()));
            }
            let (grid, values) = wigner_field(&cfg, backend)?;
            let mut out = sink(common.out.as_deref())?;
            write_wigner_csv(&mut out, &grid, &values)?;
            out.flush()?;
            Ok(true)
        }
        Command::Circuit { config, out } => {
            let cfg = load(&config)?;
            let rows = circuit_table(&cfg)?;
            let mut w = sink(out.as_deref())?;
            write_circuit_csv(&mut w, cfg.environment.rw_coupling, &rows)?;
            w.flush()?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(Failure::Config(msg)) | Err(Failure::Run(msg)) => {
            eprintln!("dsc: {msg}");
            ExitCode::from(1)
        }
    }
}
