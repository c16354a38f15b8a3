//! Parameter sets of the published figure regimes and the bundled models
//! fitted to stretched exponentials.

use std::fs;

use lorentz_decay::grid::{geometric_grid, linear_grid};
use lorentz_decay::prony::{ExpModeSet, ModelDocument, RestModel, DEFAULT_RATIO_MAX};
use serde::Serialize;

use crate::args::FiguresArgs;
use crate::commands::{is_non_increasing, phi_report, transform_rows, write_csv, write_json, write_phi_csv};
use crate::error::CliError;

/// Eight-mode fit of the modulus `exp(-t^0.6 / 2)` on `0.5 <= t <= 200`.
pub const THETA_3_5_MODEL: &str = include_str!("../fixtures/stretched_theta_3_5.json");
/// Eight-mode fit of the modulus `exp(-t^0.5 / 2)` on `0.5 <= t <= 200`.
pub const THETA_1_2_MODEL: &str = include_str!("../fixtures/stretched_theta_1_2.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stretch {
    ThreeFifths,
    OneHalf,
}

impl Stretch {
    pub fn theta(self) -> f64 {
        match self {
            Stretch::ThreeFifths => 0.6,
            Stretch::OneHalf => 0.5,
        }
    }

    pub fn modes(self) -> ExpModeSet<f64> {
        let text = match self {
            Stretch::ThreeFifths => THETA_3_5_MODEL,
            Stretch::OneHalf => THETA_1_2_MODEL,
        };
        ModelDocument::from_json(text)
            .and_then(|doc| doc.mode_set())
            .expect("bundled model is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trace {
    /// `P_p(t)` for `3 <= t <= 20`.
    Survival,
    /// `phi_p(t)` for `10 <= t <= t_max`.
    TimeMap { t_max: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Curve {
    pub label: char,
    pub p: f64,
    pub mass: f64,
    /// Lorentz factor printed with the curve.
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure {
    pub number: u8,
    pub stretch: Stretch,
    pub trace: Trace,
    pub curves: Vec<Curve>,
}

fn curve(label: char, p: f64, mass: f64, gamma: f64) -> Curve {
    Curve { label, p, mass, gamma }
}

pub fn figures() -> Vec<Figure> {
    let root2 = 2f64.sqrt();
    vec![
        Figure {
            number: 1,
            stretch: Stretch::ThreeFifths,
            trace: Trace::Survival,
            curves: vec![
                curve('a', 2000.0, 700.0, 3.0271),
                curve('b', 1500.0, 600.0, 2.6926),
                curve('c', 1100.0, 600.0, 2.0883),
                curve('d', 900.0, 700.0, 1.6288),
                curve('e', 600.0, 600.0, root2),
            ],
        },
        Figure {
            number: 2,
            stretch: Stretch::OneHalf,
            trace: Trace::Survival,
            curves: vec![
                curve('a', 2000.0, 600.0, 3.4801),
                curve('b', 1800.0, 600.0, 10f64.sqrt()),
                curve('c', 1700.0, 800.0, 2.3485),
                curve('d', 1000.0, 800.0, 1.601),
                curve('e', 700.0, 700.0, root2),
            ],
        },
        Figure {
            number: 3,
            stretch: Stretch::ThreeFifths,
            trace: Trace::TimeMap { t_max: 700 },
            curves: vec![
                curve('a', 700.0, 700.0, root2),
                curve('b', 1200.0, 1000.0, 1.5620),
                curve('c', 700.0, 400.0, 2.0156),
                curve('d', 1000.0, 500.0, 5f64.sqrt()),
            ],
        },
        Figure {
            number: 4,
            stretch: Stretch::OneHalf,
            trace: Trace::TimeMap { t_max: 1300 },
            curves: vec![
                curve('a', 600.0, 600.0, root2),
                curve('b', 600.0, 400.0, 1.8028),
                curve('c', 800.0, 500.0, 1.8868),
                curve('d', 800.0, 400.0, 2.2361),
            ],
        },
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSummary {
    pub figure: u8,
    pub curve: char,
    pub p: f64,
    pub mass: f64,
    pub gamma: f64,
    pub caption_gamma: f64,
    pub width_ratio: f64,
    pub file: String,
    /// Survival traces: `P_p` never increases.
    pub monotone: Option<bool>,
    /// Time-map traces: largest `|phi gamma / t - 1|`.
    pub max_deviation: Option<f64>,
    pub slope_deviation: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FigureOrdering {
    pub figure: u8,
    /// At every grid time, a larger Lorentz factor gives a slower decay.
    pub ordered: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiguresSummary {
    pub curves: Vec<CurveSummary>,
    pub ordering: Vec<FigureOrdering>,
    pub warnings: Vec<String>,
}

/// Values of one trace per curve on a shared grid; checks that sorting the
/// curves by Lorentz factor sorts the values (ascending if `rising`).
fn ordered_by_gamma(traces: &[(f64, Vec<f64>)], rising: bool) -> bool {
    let mut sorted: Vec<&(f64, Vec<f64>)> = traces.iter().collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let points = sorted.first().map(|s| s.1.len()).unwrap_or(0);
    (0..points).all(|i| {
        sorted.windows(2).all(|pair| {
            let (lo, hi) = (pair[0].1[i], pair[1].1[i]);
            if rising {
                hi >= lo
            } else {
                hi <= lo
            }
        })
    })
}

pub fn run_figures(args: &FiguresArgs) -> Result<FiguresSummary, CliError> {
    fs::create_dir_all(&args.out)?;
    let mut curves = Vec::new();
    let mut ordering = Vec::new();
    let mut warnings = Vec::new();
    for fig in figures() {
        let modes = fig.stretch.modes();
        let times = match fig.trace {
            Trace::Survival => linear_grid(3.0, 20.0, args.points)?,
            Trace::TimeMap { t_max } => geometric_grid(10.0, f64::from(t_max), args.points)?,
        };
        let mut traces = Vec::new();
        for c in &fig.curves {
            let ratio = modes.gamma_max() / c.mass;
            if ratio > DEFAULT_RATIO_MAX {
                warnings.push(format!(
                    "figure {} curve {}: gamma_N / M = {ratio:.3e} exceeds {DEFAULT_RATIO_MAX:e}",
                    fig.number, c.label
                ));
            }
            let model = RestModel::with_ratio_max(modes.clone(), c.mass, ratio.max(DEFAULT_RATIO_MAX))?;
            let file = format!("fig{}_{}.csv", fig.number, c.label);
            let path = args.out.join(&file);
            let mut summary = CurveSummary {
                figure: fig.number,
                curve: c.label,
                p: c.p,
                mass: c.mass,
                gamma: 1f64.hypot(c.p / c.mass),
                caption_gamma: c.gamma,
                width_ratio: ratio,
                file,
                monotone: None,
                max_deviation: None,
                slope_deviation: None,
            };
            match fig.trace {
                Trace::Survival => {
                    let rows = transform_rows(&model, c.p, &times, false)?;
                    write_csv(&path, &rows)?;
                    summary.monotone = Some(is_non_increasing(rows.iter().map(|r| r.p_lab)));
                    traces.push((summary.gamma, rows.iter().map(|r| r.p_lab).collect()));
                }
                Trace::TimeMap { .. } => {
                    let report = phi_report(&model, c.p, &times)?;
                    write_phi_csv(&path, &report)?;
                    summary.max_deviation = Some(report.max_deviation);
                    summary.slope_deviation = Some(report.slope_deviation);
                    traces.push((
                        summary.gamma,
                        report.rows.iter().map(|r| r.phi.unwrap_or(f64::NAN)).collect(),
                    ));
                }
            }
            curves.push(summary);
        }
        let rising = matches!(fig.trace, Trace::Survival);
        ordering.push(FigureOrdering {
            figure: fig.number,
            ordered: ordered_by_gamma(&traces, rising),
        });
    }
    let summary = FiguresSummary {
        curves,
        ordering,
        warnings,
    };
    write_json(&args.out.join("summary.json"), &summary)?;
    Ok(summary)
}
