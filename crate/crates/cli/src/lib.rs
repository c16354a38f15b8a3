//! Command-line driver for `lorentz-decay`: fitting, closed-form transforms,
//! windows, time maps, quadrature comparisons and figure regimes, with CSV
//! and JSON files as the interface.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure, 4 excluded regime.

pub mod args;
pub mod commands;
pub mod error;
pub mod figures;

use args::{Cli, Command};
pub use error::CliError;

/// Runs one command and returns the line printed on success.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    Ok(match &cli.command {
        Command::Sample(a) => format!("wrote {} samples", commands::cmd_sample(a)?),
        Command::Fit(a) => {
            let s = commands::cmd_fit(a)?;
            format!("fit {} modes, rmse {:e}", s.modes, s.rmse)
        }
        Command::Transform(a) => {
            let s = commands::cmd_transform(a)?;
            format!("gamma = {:.6}, {} rows, monotone = {}", s.gamma, s.rows, s.monotone)
        }
        Command::Window(a) => {
            let r = commands::cmd_window(a)?;
            let mut line = format!(
                "gamma = {:.6}, dominant modes {:?}, window {:?}",
                r.lorentz_gamma,
                r.dominant_indices,
                r.lab_window.intervals()
            );
            for w in &r.warnings {
                line.push_str(&format!("\nwarning: {w}"));
            }
            line
        }
        Command::Phi(a) => {
            let r = commands::cmd_phi(a)?;
            format!(
                "gamma = {:.6}, max |phi gamma / t - 1| = {:.4e}, mean = {:.4e}, slope = {:.6e} (1/gamma = {:.6e}), flagged rows = {}",
                r.lorentz_gamma,
                r.max_deviation,
                r.mean_deviation,
                r.slope,
                1.0 / r.lorentz_gamma,
                r.flagged_rows
            )
        }
        Command::OracleCompare(a) => {
            let s = commands::cmd_oracle_compare(a)?;
            match s.max_rel_diff {
                Some(d) => format!(
                    "gamma = {:.6}, max rel_diff = {d:.4e} over {} valid rows of {}",
                    s.gamma, s.valid_rows, s.rows
                ),
                None => format!("gamma = {:.6}, no valid-regime rows among {}", s.gamma, s.rows),
            }
        }
        Command::Figures(a) => {
            let s = figures::run_figures(a)?;
            let mut line = format!("wrote {} curves to {}", s.curves.len(), a.out.display());
            for w in &s.warnings {
                line.push_str(&format!("\nwarning: {w}"));
            }
            line
        }
    })
}
