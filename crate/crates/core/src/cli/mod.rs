//! Command-line front end: `validate`, `rates`, `sweep` and `optimize`.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage or input error.

pub mod commands;
pub mod config;
pub mod layout;
pub mod output;
pub mod presets;
pub mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Result;
use commands::Method;
use config::ScenarioConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "edma", about = "Pinching-antenna EDMA workbench", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Overrides the scenario trial count.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the closed forms against numerical oracles.
    Validate,
    /// Per-user rates of one explicit layout.
    Rates {
        #[arg(long)]
        layout: PathBuf,
    },
    /// Monte Carlo sweep from a preset or from the `[sweep]` table of --config.
    Sweep {
        #[arg(long)]
        preset: Option<String>,
        /// List the bundled presets and exit.
        #[arg(long)]
        list: bool,
    },
    /// Antenna placement for one explicit layout.
    Optimize {
        #[arg(long)]
        layout: PathBuf,
        /// golden | sca | midpoint | fixed | exhaustive
        #[arg(long)]
        method: Option<String>,
    },
}

impl Cli {
    fn scenario(&self, preset: Option<&str>) -> Result<ScenarioConfig> {
        let mut c = match (preset, &self.config) {
            (Some(name), None) => presets::preset(name)?,
            (Some(_), Some(_)) => {
                return Err(crate::Error::Invalid("give either --preset or --config, not both".into()))
            }
            (None, Some(path)) => ScenarioConfig::load(path)?,
            (None, None) => ScenarioConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(t) = self.trials {
            c.trials = t;
        }
        Ok(c)
    }
}

enum Outcome {
    Text(String),
    Failed(String),
}

fn execute(cli: &Cli) -> Result<Outcome> {
    Ok(match &cli.command {
        Command::Validate => {
            let (table, ok) = validate::cmd_validate(&validate::ClosedForms::default());
            if ok {
                Outcome::Text(table)
            } else {
                Outcome::Failed(table)
            }
        }
        Command::Rates { layout } => {
            let c = cli.scenario(None)?;
            Outcome::Text(commands::cmd_rates(&c, &layout::read_layout(layout)?)?)
        }
        Command::Sweep { list: true, .. } => Outcome::Text(
            presets::preset_names()
                .into_iter()
                .map(|n| Ok(format!("{n}: {}\n", presets::preset_caption(n)?)))
                .collect::<Result<String>>()?,
        ),
        Command::Sweep { preset, .. } => {
            let c = cli.scenario(preset.as_deref())?;
            let title = preset.as_deref().map(|p| format!("preset {p}"));
            Outcome::Text(commands::cmd_sweep(&c, title.as_deref())?)
        }
        Command::Optimize { layout, method } => {
            let c = cli.scenario(None)?;
            let method = method.as_deref().map(Method::parse).transpose()?;
            Outcome::Text(commands::cmd_optimize(&c, &layout::read_layout(layout)?, method)?)
        }
    })
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let (text, code) = match execute(&cli) {
        Ok(Outcome::Text(t)) => (t, EXIT_OK),
        Ok(Outcome::Failed(t)) => (t, EXIT_VALIDATION),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text),
        None => stdout.write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_USAGE;
    }
    if code == EXIT_VALIDATION {
        let _ = writeln!(stderr, "validation failed");
    }
    code
}
