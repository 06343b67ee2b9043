//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure,
//! 3 audit failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spdc_sim::dynamics::SweepAxis;
use spdc_sim_cli::commands::{
    cmd_entropy, cmd_oracle_audit, cmd_plateau, cmd_self_verify, cmd_simulate, cmd_sweep,
    parse_pairs, parse_subsystems, RangeSpec, SimulateOptions,
};
use spdc_sim_cli::config::RunConfig;
use spdc_sim_cli::error::CliError;

#[derive(Parser)]
#[command(
    name = "spdc-sim",
    version,
    about = "Coupled qubit-cavity simulator with a tunable second-order nonlinear mode"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Run configuration file (key = value); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<RunConfig, CliError> {
        match &self.config {
            None => Ok(RunConfig::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::io(path.display().to_string(), e))?;
                RunConfig::parse(&text)
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write the inversion timeline.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Also write an SVG line chart.
        #[arg(long)]
        svg: bool,
        /// Append per-basis-label probability columns.
        #[arg(long)]
        probabilities: bool,
    },
    /// Sweep k0, delta or Omega over a range, one trajectory per value.
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        /// Which parameter to sweep: k0 | delta | Omega.
        #[arg(long)]
        axis: String,
        /// Inclusive grid min:max:count.
        #[arg(long)]
        range: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-qubit heatmaps.
        #[arg(long)]
        svg: bool,
    },
    /// Von Neumann entropies and pairwise mutual information along one run.
    Entropy {
        #[command(flatten)]
        config: ConfigArg,
        /// Comma-separated subsystems, e.g. q1,f1,fb,q2,f2.
        #[arg(long, default_value = "q1,q2")]
        subsystems: String,
        /// Comma-separated pairs, e.g. q1:q2,f1:f2.
        #[arg(long, default_value = "")]
        pairs: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write an SVG line chart.
        #[arg(long)]
        svg: bool,
    },
    /// Analytic preservation-window times for a harmonic coupling.
    Plateau {
        /// Modulation frequency Omega, 1/ns.
        #[arg(long)]
        omega: f64,
        /// Fraction of k0 defining window entry/exit.
        #[arg(long, default_value_t = 0.1)]
        fraction: f64,
        /// Number of cycles to list.
        #[arg(long, default_value_t = 1)]
        cycles: u32,
        /// Optional output directory for a CSV copy.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the integrator against the analytic oracles.
    OracleAudit {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Verify the checksums of a previously written output directory.
    SelfVerify {
        #[arg(long)]
        out: PathBuf,
    },
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            config,
            out,
            svg,
            probabilities,
        } => {
            let cfg = config.load()?;
            let bundle = cmd_simulate(&cfg, &out, &SimulateOptions { svg, probabilities })?;
            println!(
                "wrote {} file(s) to {}",
                bundle.manifest.files.len(),
                bundle.dir.display()
            );
            Ok(())
        }
        Command::Sweep {
            config,
            axis,
            range,
            out,
            svg,
        } => {
            let cfg = config.load()?;
            let axis = SweepAxis::parse(&axis).ok_or_else(|| {
                CliError::validation(format!(
                    "unknown sweep axis {axis:?} (expected k0, delta or Omega)"
                ))
            })?;
            let range = RangeSpec::parse(&range)?;
            let bundle = cmd_sweep(&cfg, axis, &range, &out, svg)?;
            println!(
                "wrote {} file(s) to {}",
                bundle.manifest.files.len(),
                bundle.dir.display()
            );
            Ok(())
        }
        Command::Entropy {
            config,
            subsystems,
            pairs,
            out,
            svg,
        } => {
            let cfg = config.load()?;
            let subsystems = parse_subsystems(&subsystems)?;
            let pairs = parse_pairs(&pairs)?;
            let bundle = cmd_entropy(&cfg, &subsystems, &pairs, &out, svg)?;
            println!(
                "wrote {} file(s) to {}",
                bundle.manifest.files.len(),
                bundle.dir.display()
            );
            Ok(())
        }
        Command::Plateau {
            omega,
            fraction,
            cycles,
            out,
        } => {
            let (table, _) = cmd_plateau(omega, fraction, cycles)?;
            print!("{table}");
            if let Some(dir) = out {
                spdc_sim_cli::output::write_bundle(
                    &dir,
                    &format!("Omega = {omega}\nfraction = {fraction}\ncycles = {cycles}\n"),
                    vec![("plateau.csv".to_string(), table.into_bytes())],
                )?;
            }
            Ok(())
        }
        Command::OracleAudit { config } => {
            let cfg = config.load()?;
            let report = cmd_oracle_audit(&cfg)?;
            print!("{}", report.render());
            if report.passed {
                Ok(())
            } else {
                Err(CliError::Audit("one or more comparisons failed".into()))
            }
        }
        Command::SelfVerify { out } => {
            let report = cmd_self_verify(&out)?;
            for line in report {
                println!("{line}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
