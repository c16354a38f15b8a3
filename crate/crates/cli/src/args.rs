//! Command-line surface. Every physical quantity is a dimensionless product
//! with the characteristic time: `p tau`, `M tau`, `t / tau`, `gamma_j tau`.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lorentz_decay::grid::{make_grid, Spacing};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ldecay", version, about = "Lab-frame decay laws from rest-frame exponential-mode models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a stretched-exponential survival curve as CSV.
    Sample(SampleArgs),
    /// Fit an exponential-mode model to a survival curve.
    Fit(FitArgs),
    /// Evaluate the closed-form lab survival probability on a grid.
    Transform(TransformArgs),
    /// Report the window of exponential times.
    Window(WindowArgs),
    /// Evaluate the time map phi_p on a grid with a linearity diagnostic.
    Phi(PhiArgs),
    /// Compare the closed form against quadrature of the mass integral.
    OracleCompare(OracleArgs),
    /// Regenerate every figure regime from the bundled fitted models.
    Figures(FiguresArgs),
}

/// Grid `min:max:n[:geom|:lin]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        Ok(make_grid(self.min, self.max, self.points, self.spacing)?)
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("grid {s:?} is not min:max:n[:geom]"));
        }
        let min: f64 = parts[0].parse().map_err(|e| format!("grid min: {e}"))?;
        let max: f64 = parts[1].parse().map_err(|e| format!("grid max: {e}"))?;
        let points: usize = parts[2].parse().map_err(|e| format!("grid points: {e}"))?;
        let spacing = match parts.get(3) {
            None | Some(&"lin") => Spacing::Linear,
            Some(&"geom") => Spacing::Geometric,
            Some(other) => return Err(format!("unknown spacing {other:?}")),
        };
        if points < 2 || !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(format!("grid {s:?} needs min < max and at least 2 points"));
        }
        if spacing == Spacing::Geometric && !(min > 0.0) {
            return Err("geometric grid needs a positive minimum".into());
        }
        Ok(GridSpec {
            min,
            max,
            points,
            spacing,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ValueKind {
    /// Values are sqrt(P0).
    Modulus,
    /// Values are P0.
    Probability,
}

/// Model source shared by the evaluation commands.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Mode-set JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// M tau; overrides the mass stored in the model file.
    #[arg(long = "M")]
    pub mass: Option<f64>,
    /// Largest accepted gamma_N / M.
    #[arg(long, default_value_t = 1e-2)]
    pub ratio_max: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Stretching exponent in (0, 1).
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub grid: GridSpec,
    #[arg(long, value_enum, default_value_t = ValueKind::Modulus)]
    pub kind: ValueKind,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// CSV with a `t` column and a value column.
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the value column.
    #[arg(long, default_value = "value")]
    pub column: String,
    #[arg(long, value_enum, default_value_t = ValueKind::Modulus)]
    pub kind: ValueKind,
    #[arg(long, default_value_t = 8)]
    pub modes: usize,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// RMSE above which the fit fails.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// M tau to store with the model.
    #[arg(long = "M")]
    pub mass: Option<f64>,
    /// Mode-set JSON output.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional fit report JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// p tau.
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub grid: GridSpec,
    /// Clamp P_p to [0, 1].
    #[arg(long)]
    pub clamp: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub zeta_threshold: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub dominance_factor: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PhiArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub grid: GridSpec,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional linearity report JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub grid: GridSpec,
    /// Quadrature relative tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 20_000_000)]
    pub max_panels: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub zeta_threshold: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub dominance_factor: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FiguresArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 120)]
    pub points: usize,
}
