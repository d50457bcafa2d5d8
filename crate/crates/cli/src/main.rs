use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kitaev_cli::{parse_with, presets, run, verify, CliError, Overrides, TaskKind};
use kitaev_core::SelfEnergy;

/// Kitaev wire spectra, Majorana profiles and two-lead conductance.
///
/// Exit codes: 0 success, 1 I/O error, 2 config error, 3 numerical failure.
#[derive(Parser)]
#[command(name = "kitaev", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory (overrides `task.out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Damping treatment: `none` (real, Gamma/2) or `exact`.
    #[arg(long, global = true)]
    self_energy: Option<SelfEnergy>,
    /// Relative tolerance of the current quadrature.
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// BdG spectrum with mode classification.
    Spectrum(ConfigArg),
    /// Electron/hole and Majorana profiles of selected pairs.
    Profiles(ConfigArg),
    /// In-gap energy against defect strength.
    DefectSweep(ConfigArg),
    /// dI/dV sweep, peak table and optional steady currents.
    Conductance(ConfigArg),
    /// Run a shipped scenario preset.
    Preset {
        /// Preset name; omit with --list.
        name: Option<String>,
        /// List the available presets.
        #[arg(long)]
        list: bool,
        /// Print the preset config instead of running it.
        #[arg(long)]
        print: bool,
    },
    /// Run the oracle suite.
    Verify {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

#[derive(Args)]
struct ConfigArg {
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(k) = cli.common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().ok();
    }
    let task = match &cli.command {
        Command::Spectrum(_) => Some(TaskKind::Spectrum),
        Command::Profiles(_) => Some(TaskKind::Profiles),
        Command::DefectSweep(_) => Some(TaskKind::DefectSweep),
        Command::Conductance(_) => Some(TaskKind::Conductance),
        _ => None,
    };
    let mut ov = Overrides {
        task,
        out_dir: cli.common.out,
        self_energy: cli.common.self_energy,
        quad_rel_tol: cli.common.quad_tol,
    };
    let (text, origin) = match cli.command {
        Command::Verify { seed } => {
            let checks = verify::run_all(seed);
            let mut failed = Vec::new();
            for c in &checks {
                println!("{} {:<28} {:>7.2}s  {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.seconds, c.detail);
                if !c.pass {
                    failed.push(c.name);
                }
            }
            return if failed.is_empty() { Ok(()) } else { Err(CliError::Verify(failed.join(", "))) };
        }
        Command::Preset { list: true, .. } | Command::Preset { name: None, .. } => {
            for n in presets::names() {
                println!("{n}");
            }
            return Ok(());
        }
        Command::Preset { name: Some(name), print, .. } => {
            let text = presets::text(&name).ok_or_else(|| CliError::UnknownPreset(name.clone()))?;
            if print {
                print!("{text}");
                return Ok(());
            }
            ov.out_dir.get_or_insert_with(|| PathBuf::from("out").join(&name));
            (text.to_string(), format!("preset {name}"))
        }
        Command::Spectrum(c) | Command::Profiles(c) | Command::DefectSweep(c) | Command::Conductance(c) => {
            let text = fs::read_to_string(&c.config).map_err(|e| CliError::io(&c.config, e))?;
            (text, c.config.display().to_string())
        }
    };
    let cfg = parse_with(&text, &ov).inspect_err(|_| eprintln!("{origin}:"))?;
    let report = run(&cfg)?;
    for f in &report.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kitaev: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
