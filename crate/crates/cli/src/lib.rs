//! Command-line front end: presets, config files and subcommands.

pub mod args;
pub mod commands;
pub mod config;

use anyhow::Result;

use args::{Cli, Command};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Detect(a) => commands::detect_cmd(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Spectrum(a) => commands::spectrum(a),
    }
}
