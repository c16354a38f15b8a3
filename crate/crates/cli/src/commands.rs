use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use lorentz_decay::labframe::{survival_probability_lab, LabContext, LabOptions, ValidityWarning};
use lorentz_decay::oracle::{amplitude_lab_oracle_grid, MddSpec, QuadratureConfig};
use lorentz_decay::prony::{
    fit_prony, read_curve_csv_column, stretched_exponential, survival_probability_rest, write_curve_csv,
    CurveKind, FitConfig, ModelDocument, RestModel, SurvivalCurve,
};
use lorentz_decay::timemap::{phi_diagnostic, LinearityReport};
use lorentz_decay::windows::{exponential_window, solve_zeta_bounds, WindowReport};
use lorentz_decay::DecayError;
use serde::Serialize;

use crate::args::{
    FitArgs, ModelArgs, OracleArgs, PhiArgs, SampleArgs, TransformArgs, ValueKind, WindowArgs,
};
use crate::error::CliError;

pub(crate) fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_path(path)?;
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub(crate) fn write_json<V: Serialize>(path: &Path, value: &V) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn curve_kind(kind: ValueKind) -> CurveKind {
    match kind {
        ValueKind::Modulus => CurveKind::Modulus,
        ValueKind::Probability => CurveKind::Probability,
    }
}

/// Loads the model file and attaches the mass from `--M` or from the file.
pub fn load_model(args: &ModelArgs) -> Result<RestModel<f64>, CliError> {
    let text = fs::read_to_string(&args.model)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.model.display())))?;
    let mut doc = ModelDocument::from_json(&text)?;
    if let Some(mass) = args.mass {
        doc.mass = Some(mass);
    }
    if doc.mass.is_none() {
        return Err(CliError::Input("model has no mass; pass --M".into()));
    }
    doc.rest_model(args.ratio_max).map_err(|e| match e {
        DecayError::InvalidModel(msg) => CliError::Input(format!("{msg} (raise --ratio-max to accept it)")),
        other => other.into(),
    })
}

pub fn cmd_sample(args: &SampleArgs) -> Result<usize, CliError> {
    let times = args.grid.values()?;
    let curve = SurvivalCurve::sample(&times, |t| {
        let p0 = stretched_exponential(t, 1.0, args.theta)?;
        Ok(match args.kind {
            ValueKind::Modulus => p0.sqrt(),
            ValueKind::Probability => p0,
        })
    })?;
    write_curve_csv(&curve, File::create(&args.out)?)?;
    Ok(curve.len())
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub rmse: f64,
    pub modes: usize,
    pub best_restart: usize,
    pub restart_rmse: Vec<f64>,
    pub seed: u64,
    pub converged: bool,
}

/// Fits and writes the model; on a failed fit the best model is still written.
pub fn cmd_fit(args: &FitArgs) -> Result<FitSummary, CliError> {
    let file = File::open(&args.input).map_err(|e| CliError::Input(format!("{}: {e}", args.input.display())))?;
    let curve = read_curve_csv_column(BufReader::new(file), &args.column)?.into_modulus(curve_kind(args.kind));
    let cfg = FitConfig {
        modes: args.modes,
        restarts: args.restarts,
        seed: args.seed,
        tolerance: args.tol,
        ..FitConfig::default()
    };
    let (modes, summary, failure) = match fit_prony(&curve, &cfg) {
        Ok(report) => {
            let summary = FitSummary {
                rmse: report.rmse,
                modes: report.modes.len(),
                best_restart: report.best_restart,
                restart_rmse: report.restart_rmse,
                seed: args.seed,
                converged: true,
            };
            (report.modes, summary, None)
        }
        Err(DecayError::FitFailed { best, rmse }) => {
            let summary = FitSummary {
                rmse,
                modes: best.len(),
                best_restart: 0,
                restart_rmse: Vec::new(),
                seed: args.seed,
                converged: false,
            };
            let msg = format!("best rmse {rmse:e} exceeds tolerance {:e}", args.tol);
            (*best, summary, Some(CliError::Numerical(msg)))
        }
        Err(e) => return Err(e.into()),
    };
    fs::write(&args.out, ModelDocument::new(&modes, args.mass).to_json()? + "\n")?;
    if let Some(path) = &args.report {
        write_json(path, &summary)?;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformRow {
    pub t: f64,
    pub p_lab: f64,
    pub p_rest: f64,
    pub gamma: f64,
    pub warnings: String,
}

fn warning_text(warnings: &[ValidityWarning]) -> String {
    warnings
        .iter()
        .map(|w| match w {
            ValidityWarning::VeryShortTime { margin } => format!("very_short_time({margin:.3e})"),
            ValidityWarning::SmallPt { pt } => format!("small_pt({pt:.3e})"),
            ValidityWarning::Clamped { raw } => format!("clamped({raw:.6e})"),
        })
        .collect::<Vec<_>>()
        .join(";")
}

pub fn transform_rows(
    model: &RestModel<f64>,
    p: f64,
    times: &[f64],
    clamp: bool,
) -> Result<Vec<TransformRow>, CliError> {
    let ctx = LabContext::for_model(model, p)?;
    let opts = LabOptions {
        clamp,
        ..LabOptions::default()
    };
    times
        .iter()
        .map(|&t| {
            let lab = survival_probability_lab(model, &ctx, t, &opts)?;
            Ok(TransformRow {
                t,
                p_lab: lab.value,
                p_rest: survival_probability_rest(model.modes(), t)?,
                gamma: ctx.gamma(),
                warnings: warning_text(&lab.warnings),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformSummary {
    pub gamma: f64,
    pub rows: usize,
    /// `P_p` never increases along the grid.
    pub monotone: bool,
}

pub fn is_non_increasing(values: impl IntoIterator<Item = f64>) -> bool {
    let values: Vec<f64> = values.into_iter().collect();
    values.windows(2).all(|w| w[1] <= w[0])
}

pub fn cmd_transform(args: &TransformArgs) -> Result<TransformSummary, CliError> {
    let model = load_model(&args.model)?;
    let rows = transform_rows(&model, args.p, &args.grid.values()?, args.clamp)?;
    write_csv(&args.out, &rows)?;
    Ok(TransformSummary {
        gamma: rows.first().map(|r| r.gamma).unwrap_or(1.0),
        rows: rows.len(),
        monotone: is_non_increasing(rows.iter().map(|r| r.p_lab)),
    })
}

pub fn window_report(
    model: &RestModel<f64>,
    p: f64,
    zeta_threshold: f64,
    dominance_factor: f64,
) -> Result<WindowReport<f64>, CliError> {
    let ctx = LabContext::for_model(model, p)?;
    let bounds = solve_zeta_bounds(zeta_threshold)?;
    Ok(exponential_window(model, &ctx, &bounds, dominance_factor)?)
}

pub fn cmd_window(args: &WindowArgs) -> Result<WindowReport<f64>, CliError> {
    let model = load_model(&args.model)?;
    let report = window_report(&model, args.p, args.zeta_threshold, args.dominance_factor)?;
    write_json(&args.out, &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct PhiCsvRow {
    t: f64,
    phi: Option<f64>,
    t_over_gamma: f64,
    deviation: Option<f64>,
    p_lab: Option<f64>,
    flag: String,
}

pub fn phi_report(model: &RestModel<f64>, p: f64, times: &[f64]) -> Result<LinearityReport, CliError> {
    let ctx = LabContext::for_model(model, p)?;
    Ok(phi_diagnostic(model, &ctx, times, &LabOptions::default())?)
}

pub(crate) fn write_phi_csv(path: &Path, report: &LinearityReport) -> Result<(), CliError> {
    let rows: Vec<PhiCsvRow> = report
        .rows
        .iter()
        .map(|r| PhiCsvRow {
            t: r.t,
            phi: r.phi,
            t_over_gamma: r.t_over_gamma,
            deviation: r.deviation,
            p_lab: r.p_lab,
            flag: r.flag.clone().unwrap_or_default(),
        })
        .collect();
    write_csv(path, &rows)
}

pub fn cmd_phi(args: &PhiArgs) -> Result<LinearityReport, CliError> {
    let model = load_model(&args.model)?;
    let report = phi_report(&model, args.p, &args.grid.values()?)?;
    write_phi_csv(&args.out, &report)?;
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub t: f64,
    pub closed_form: f64,
    pub oracle: Option<f64>,
    pub rel_diff: Option<f64>,
    /// Closed form in its validity regime, inside the window and with `pt >= 1e3`.
    pub valid: bool,
    pub flag: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    pub gamma: f64,
    pub rows: usize,
    pub valid_rows: usize,
    pub max_rel_diff: Option<f64>,
}

/// Smallest `pt` at which a row counts toward the summary.
pub const MIN_PT: f64 = 1e3;

pub fn oracle_rows(
    model: &RestModel<f64>,
    p: f64,
    times: &[f64],
    cfg: &QuadratureConfig,
    window: Option<&WindowReport<f64>>,
) -> Result<Vec<OracleRow>, CliError> {
    let ctx = LabContext::for_model(model, p)?;
    let mdd = MddSpec::lorentzian_sum(model);
    let exact = amplitude_lab_oracle_grid(&mdd, p, times, cfg);
    times
        .iter()
        .zip(exact)
        .map(|(&t, exact)| {
            let lab = survival_probability_lab(model, &ctx, t, &LabOptions::default())?;
            let in_regime = match window {
                Some(w) => w.lab_window.contains(t) && p * t >= MIN_PT,
                None => true,
            };
            let valid = lab.is_valid_regime() && in_regime;
            Ok(match exact {
                Ok(v) => {
                    let oracle = v.probability();
                    OracleRow {
                        t,
                        closed_form: lab.value,
                        oracle: Some(oracle),
                        rel_diff: Some(((lab.value - oracle) / oracle).abs()),
                        valid,
                        flag: String::new(),
                    }
                }
                Err(DecayError::Precision { estimate, error }) => OracleRow {
                    t,
                    closed_form: lab.value,
                    oracle: Some(estimate.norm_sqr()),
                    rel_diff: None,
                    valid: false,
                    flag: format!("precision(error={error:.3e})"),
                },
                Err(e) => return Err(e.into()),
            })
        })
        .collect()
}

pub fn summarize_oracle(rows: &[OracleRow], gamma: f64) -> OracleSummary {
    let valid: Vec<f64> = rows.iter().filter(|r| r.valid).filter_map(|r| r.rel_diff).collect();
    OracleSummary {
        gamma,
        rows: rows.len(),
        valid_rows: valid.len(),
        max_rel_diff: valid.iter().copied().reduce(f64::max),
    }
}

pub fn cmd_oracle_compare(args: &OracleArgs) -> Result<OracleSummary, CliError> {
    let model = load_model(&args.model)?;
    let cfg = QuadratureConfig {
        rel_tol: args.tol,
        max_panels: args.max_panels,
        ..QuadratureConfig::default()
    };
    let ctx = LabContext::for_model(&model, args.p)?;
    let window = if ctx.gamma() > 1.0 {
        Some(window_report(&model, args.p, args.zeta_threshold, args.dominance_factor)?)
    } else {
        None
    };
    let rows = oracle_rows(&model, args.p, &args.grid.values()?, &cfg, window.as_ref())?;
    write_csv(&args.out, &rows)?;
    Ok(summarize_oracle(&rows, ctx.gamma()))
}
