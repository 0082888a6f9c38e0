use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Debug, Clone, Parser)]
#[command(name = "insole-grf", version, about = "Ground reaction force estimation from a four-sensor insole")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the simulation and identification seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for identification.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Leave timestamps out of manifests and plots.
    #[arg(long, global = true)]
    pub deterministic: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Write a synthetic treadmill dataset with truth sidecars.
    Simulate,
    /// Identify linear and HW models for each foot and force component.
    Ident {
        /// Directory of trial metadata files; roles are taken from the files.
        #[arg(long, conflicts_with_all = ["ident", "valid"])]
        data: Option<PathBuf>,
        /// Identification trial metadata files.
        #[arg(long, num_args = 1..)]
        ident: Vec<PathBuf>,
        /// Validation trial metadata files.
        #[arg(long, num_args = 1..)]
        valid: Vec<PathBuf>,
    },
    /// Score saved models on trials and plot measured against estimated force.
    Validate {
        #[arg(long = "model", required = true, num_args = 1..)]
        models: Vec<PathBuf>,
        #[arg(long = "trial", required = true, num_args = 1..)]
        trials: Vec<PathBuf>,
    },
    /// Segment one trial into gait cycles and classify stance phases.
    Gait {
        #[arg(long)]
        trial: PathBuf,
    },
    /// Collect the fit reports of several runs into one table.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Ident { .. } => "ident",
            Command::Validate { .. } => "validate",
            Command::Gait { .. } => "gait",
            Command::Report { .. } => "report",
        }
    }
}
