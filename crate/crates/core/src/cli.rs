//! Batch front-end: `degenrad <command> --config <path> --out <dir>`.
//!
//! Exit codes: `0` success, `2` configuration or validation failure, `3`
//! numerical failure.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::numerics::{log_grid, uniform_grid, QuadratureConfig};
use crate::profile::{BallDomain, RadialDatum};
use crate::rearrangement::{LorentzNorm, Rearrangement};
use crate::regularity::{
    alpha_hat, alpha_of_beta, beta_hat, hp2_sobolev_energy, hp2_sobolev_energy_exact, lq_norm, sharpness_scan, Quantity,
    RegularityVerdict,
};
use crate::solver::{RadialSolution, SolverParams};
use crate::verify::{
    eps_convergence_study, flux_hypothesis, flux_p_invariance, p_limit_study, pde_residual_profile,
    weak_residual, PLimitConfig, TestFunction,
};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "degenrad", version, about = "Radial solutions of the widely degenerate p-Laplacian on a ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Tabulate f*, f** and Lorentz quasi-norms.
    Rearrange(Io),
    /// Tabulate m, g, u, Hessian eigenvalues and |z| on a radial grid.
    Solve(Io),
    /// Residuals of the equation and the eps -> 0, p -> 1 studies.
    Verify(Io),
    /// Integrability verdicts against the critical exponents.
    Regularity(Io),
}

#[derive(Debug, Clone, PartialEq, Eq, clap::Args)]
pub struct Io {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if needed.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }

    fn from_error(context: &str, e: Error) -> Self {
        let message = format!("{context}: {e}");
        match e {
            Error::InvalidDatum(_)
            | Error::InvalidParams(_)
            | Error::InvalidDimension(_)
            | Error::InvalidRadius(_)
            | Error::InvalidIndex(_)
            | Error::UnsupportedP(_)
            | Error::InvalidInterval { .. }
            | Error::OutOfDomain { .. } => Self::config(message),
            _ => Self::numerical(message),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub dim: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub p: f64,
    pub eps: f64,
    pub eps_list: Vec<f64>,
    pub p_list: Vec<f64>,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            eps: 0.0,
            eps_list: vec![0.4, 0.2, 0.1, 0.05, 0.025],
            p_list: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RearrangeConfig {
    /// Lorentz indices; defaults to `[N]`.
    pub lorentz_r: Vec<f64>,
    pub points: usize,
}

impl Default for RearrangeConfig {
    fn default() -> Self {
        Self {
            lorentz_r: Vec::new(),
            points: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Run {
    pub p: f64,
    #[serde(default)]
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub points: usize,
    /// Defaults to the single run `(params.p, params.eps)`.
    pub runs: Vec<Run>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            points: 65,
            runs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub points: usize,
    /// Test-function supports as fractions of `R`.
    pub bumps: Vec<(f64, f64)>,
    pub collar: f64,
    pub flux_p: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            points: 512,
            bumps: vec![(0.2, 0.8), (0.1, 0.9), (0.3, 0.6)],
            collar: 0.02,
            flux_p: vec![1.5, 2.0, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularityConfig {
    pub grad_q: Vec<f64>,
    pub hessian_q: Vec<f64>,
    /// Defaults to `p >= 2`.
    pub energy: Option<bool>,
    pub linf: bool,
    pub sharpness_betas: Vec<f64>,
    /// Radial grid for the `sup g` column of the `grad_linf` row.
    pub points: usize,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        Self {
            grad_q: Vec::new(),
            hessian_q: Vec::new(),
            energy: None,
            linf: true,
            sharpness_betas: Vec::new(),
            points: 257,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    #[serde(default)]
    pub datum: Option<Value>,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub rearrange: RearrangeConfig,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub regularity: RegularityConfig,
}

/// A configuration that passed every check.
pub struct Prepared {
    pub config: RunConfig,
    pub domain: BallDomain,
    pub datum: RadialDatum,
}

pub fn load_config(path: &Path) -> CliResult<Prepared> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("config: cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> CliResult<Prepared> {
    let config: RunConfig =
        serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
    let domain = BallDomain::new(config.domain.dim, config.domain.radius)
        .map_err(|e| CliError::from_error("domain", e))?;
    let raw = match &config.datum {
        None | Some(Value::Null) => return Err(CliError::config("datum: missing")),
        Some(Value::Object(map)) if map.is_empty() => {
            return Err(CliError::config("datum: missing"))
        }
        Some(v) => v.clone(),
    };
    let datum: RadialDatum =
        serde_json::from_value(raw).map_err(|e| CliError::config(format!("datum: {e}")))?;
    let report = datum.validate(&domain);
    if !report.is_valid() {
        return Err(CliError::config(format!("datum: {report}")));
    }
    config
        .quadrature
        .validate()
        .map_err(|e| CliError::from_error("quadrature", e))?;
    SolverParams {
        p: config.params.p,
        eps: config.params.eps,
        quad: config.quadrature,
    }
    .validate()
    .map_err(|e| CliError::from_error("params", e))?;
    Ok(Prepared {
        config,
        domain,
        datum,
    })
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let io = |e: csv::Error| CliError::numerical(format!("output: {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::numerical(format!("output: {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::numerical(format!("output: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::numerical(format!("output: {}: {e}", path.display())))
}

/// JSON number for a float, written as an integer when it is one.
fn json_num(x: f64) -> Value {
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 1e15 {
        json!(x as i64)
    } else if x.is_finite() {
        json!(x)
    } else {
        Value::String(fmt_f64(x))
    }
}

fn num(context: &str) -> impl Fn(Error) -> CliError + '_ {
    move |e| CliError::from_error(context, e)
}

fn solver_params(prep: &Prepared, p: f64, eps: f64) -> CliResult<SolverParams> {
    let params = SolverParams {
        p,
        eps,
        quad: prep.config.quadrature,
    };
    params.validate().map_err(num("params"))?;
    Ok(params)
}

pub fn cmd_rearrange(prep: &Prepared, out: &Path) -> CliResult<()> {
    let cfg = &prep.config.rearrange;
    let re = Rearrangement::with_quadrature(&prep.datum, &prep.domain, prep.config.quadrature)
        .map_err(num("rearrange"))?;
    let measure = re.measure();
    let grid = log_grid(1e-4 * measure, measure, cfg.points.max(2));

    let fstar: Vec<Vec<String>> = grid
        .iter()
        .map(|&s| vec![fmt_f64(s), fmt_f64(re.fstar(s))])
        .collect();
    let fss = grid
        .iter()
        .map(|&t| Ok(vec![fmt_f64(t), fmt_f64(re.fstarstar(t)?)]))
        .collect::<Result<Vec<_>, Error>>()
        .map_err(num("rearrange"))?;

    let indices = if cfg.lorentz_r.is_empty() {
        vec![prep.domain.dim_f64()]
    } else {
        cfg.lorentz_r.clone()
    };
    let mut norms = Vec::with_capacity(indices.len());
    for r in indices {
        let value = match re.lorentz_quasinorm(r).map_err(num("lorentz"))? {
            LorentzNorm::Finite(v) => json!(v),
            LorentzNorm::Divergent => json!("divergent"),
        };
        norms.push(json!({ "r": json_num(r), "value": value }));
    }

    write_csv(&out.join("fstar.csv"), &["s", "fstar"], &fstar)?;
    write_csv(&out.join("fstarstar.csv"), &["t", "fstarstar"], &fss)?;
    write_json(&out.join("lorentz.json"), &json!({ "norms": norms }))
}

pub fn cmd_solve(prep: &Prepared, out: &Path) -> CliResult<()> {
    let cfg = &prep.config.solve;
    let runs = if cfg.runs.is_empty() {
        vec![Run {
            p: prep.config.params.p,
            eps: prep.config.params.eps,
        }]
    } else {
        cfg.runs.clone()
    };
    let re = Rearrangement::with_quadrature(&prep.datum, &prep.domain, prep.config.quadrature)
        .map_err(num("solve"))?;
    let grid = uniform_grid(0.0, prep.domain.radius(), cfg.points.max(2));
    let nan = fmt_f64(f64::NAN);
    let mut rows = Vec::new();
    for run in runs {
        let sol = RadialSolution::from_rearrangement(re.clone(), solver_params(prep, run.p, run.eps)?)
            .map_err(num("solve"))?;
        let u = sol.values_on_grid(&grid).map_err(num("solve"))?;
        for (&r, &ur) in grid.iter().zip(&u) {
            let mut row = vec![fmt_f64(r)];
            if r == 0.0 {
                row.extend([nan.clone(), nan.clone(), fmt_f64(ur), nan.clone(), nan.clone(), nan.clone()]);
            } else {
                let m = sol.flux_profile(r).map_err(num("solve"))?;
                let g = sol.grad_magnitude(r).map_err(num("solve"))?;
                let (lr, lt) = if sol.params().is_exact() {
                    match sol.hessian(r) {
                        Ok(h) => (fmt_f64(h.radial), fmt_f64(h.tangential)),
                        Err(Error::DegenerateDerivative { .. }) => (nan.clone(), nan.clone()),
                        Err(e) => return Err(CliError::from_error("solve", e)),
                    }
                } else {
                    (nan.clone(), nan.clone())
                };
                row.extend([fmt_f64(m), fmt_f64(g), fmt_f64(ur), lr, lt, fmt_f64(m)]);
            }
            row.extend([fmt_f64(run.p), fmt_f64(run.eps)]);
            rows.push(row);
        }
    }
    write_csv(
        &out.join("profiles.csv"),
        &["r", "m", "g", "u", "lambda_rad", "lambda_tan", "z", "p", "eps"],
        &rows,
    )
}

pub fn cmd_verify(prep: &Prepared, out: &Path) -> CliResult<()> {
    let cfg = &prep.config.verify;
    let params = &prep.config.params;
    let big_r = prep.domain.radius();
    let sol = RadialSolution::new(&prep.datum, &prep.domain, solver_params(prep, params.p, 0.0)?)
        .map_err(num("verify"))?;

    let n = cfg.points.max(1);
    let grid: Vec<f64> = uniform_grid(0.0, big_r, n + 2)[1..=n].to_vec();
    let samples = pde_residual_profile(&sol, &grid).map_err(num("pde residual"))?;
    let pde_max = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    let residual_rows: Vec<Vec<String>> = samples
        .iter()
        .map(|s| {
            vec![
                fmt_f64(s.r),
                fmt_f64(s.divergence),
                fmt_f64(s.datum),
                fmt_f64(s.residual),
            ]
        })
        .collect();

    let mut weak_max: f64 = 0.0;
    for &(a, b) in &cfg.bumps {
        let phi = TestFunction::bump(a * big_r, b * big_r).map_err(num("verify.bumps"))?;
        weak_max = weak_max.max(weak_residual(&sol, &phi).map_err(num("weak residual"))?.abs());
    }
    let flux_dev = if cfg.flux_p.is_empty() {
        0.0
    } else {
        flux_p_invariance(&prep.datum, &prep.domain, &cfg.flux_p, &grid).map_err(num("flux invariance"))?
    };

    let eps = eps_convergence_study(&prep.datum, &prep.domain, params.p, &params.eps_list)
        .map_err(num("eps study"))?;
    let nan = fmt_f64(f64::NAN);
    let mut conv_rows: Vec<Vec<String>> = eps
        .values
        .iter()
        .zip(&eps.errors)
        .zip(&eps.bound_ratios)
        .map(|((v, e), b)| vec!["eps".into(), fmt_f64(*v), fmt_f64(*e), fmt_f64(*b), nan.clone()])
        .collect();

    let limit_cfg = PLimitConfig {
        collar: cfg.collar,
        ..PLimitConfig::default()
    };
    let mut limit_grid = vec![0.0];
    limit_grid.extend_from_slice(&grid);
    limit_grid.push(big_r);
    let mut warnings = Vec::new();
    let mut p_rate = Value::Null;
    match p_limit_study(&prep.datum, &prep.domain, &params.p_list, &limit_grid, &limit_cfg) {
        Ok(rep) => {
            for (i, (v, e)) in rep.report.values.iter().zip(&rep.report.errors).enumerate() {
                let diff = if i == 0 {
                    nan.clone()
                } else {
                    fmt_f64(rep.consecutive_differences[i - 1])
                };
                conv_rows.push(vec!["p".into(), fmt_f64(*v), fmt_f64(*e), nan.clone(), diff]);
            }
            p_rate = rep.report.fitted_rate.map_or(Value::Null, |r| json!(r));
        }
        Err(Error::LimitDiverges { intervals }) => {
            warnings.push(json!({
                "kind": "limit_diverges",
                "message": "m(r) > 1 on a set of positive measure: u_p diverges as p -> 1",
                "intervals": intervals.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
            }));
        }
        Err(e) => return Err(CliError::from_error("p study", e)),
    }
    let hyp = flux_hypothesis(&sol, &grid, limit_cfg.level_tol).map_err(num("hypothesis"))?;

    let summary = json!({
        "pde_residual_max": pde_max,
        "weak_residual_max": weak_max,
        "flux_p_deviation": flux_dev,
        "eps_fitted_rate": eps.fitted_rate.map_or(Value::Null, |r| json!(r)),
        "eps_max_bound_ratio": eps.bound_ratios.iter().copied().fold(0.0, f64::max),
        "p_fitted_rate": p_rate,
        "z_sup": hyp.z_sup,
        "lorentz_norm": hyp.lorentz_norm.map_or(json!("divergent"), |v| json!(v)),
        "lorentz_hypothesis_holds": hyp.holds,
        "hypothesis_consistent": hyp.consistent,
        "warnings": warnings,
    });

    write_csv(
        &out.join("residuals.csv"),
        &["r", "divergence", "datum", "residual"],
        &residual_rows,
    )?;
    write_csv(
        &out.join("convergence.csv"),
        &["study", "parameter", "error", "bound_ratio", "consecutive_difference"],
        &conv_rows,
    )?;
    write_json(&out.join("summary.json"), &summary)
}

const VERDICT_HEADER: [&str; 11] = [
    "quantity",
    "exponent",
    "beta",
    "verdict",
    "value",
    "predicted_threshold",
    "agree",
    "bound",
    "beta_hat",
    "alpha",
    "alpha_hat",
];

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn verdict_row(name: &str, v: &RegularityVerdict, beta: Option<(f64, f64, f64, f64)>) -> Vec<String> {
    let (b, bh, a, ah) = match beta {
        Some((b, bh, a, ah)) => (Some(b), Some(bh), Some(a), Some(ah)),
        None => (None, None, None, None),
    };
    vec![
        name.to_string(),
        opt(v.quantity.exponent()),
        opt(b),
        v.probe.label().to_string(),
        opt(v.value),
        fmt_f64(v.predicted_threshold),
        v.agree.to_string(),
        String::new(),
        opt(bh),
        opt(a),
        opt(ah),
    ]
}

/// Verdict row for a single query; a borderline probe without a closed-form
/// exponent is recorded as such instead of aborting the run.
fn query_row(
    name: &str,
    q: Option<f64>,
    result: Result<RegularityVerdict, Error>,
) -> CliResult<Vec<String>> {
    match result {
        Ok(v) => Ok(verdict_row(name, &v, None)),
        Err(Error::InconclusiveProbe { .. }) => {
            let mut row = vec![String::new(); VERDICT_HEADER.len()];
            row[0] = name.to_string();
            row[1] = opt(q);
            row[3] = "inconclusive(borderline)".into();
            Ok(row)
        }
        Err(e) => Err(CliError::from_error(name, e)),
    }
}

pub fn cmd_regularity(prep: &Prepared, out: &Path) -> CliResult<()> {
    let cfg = &prep.config.regularity;
    let p = prep.config.params.p;
    let sol = RadialSolution::new(&prep.datum, &prep.domain, solver_params(prep, p, 0.0)?)
        .map_err(num("regularity"))?;
    let mut rows = Vec::new();

    for &q in &cfg.grad_q {
        rows.push(query_row("grad_lq", Some(q), lq_norm(&sol, Quantity::GradLq(q)))?);
    }
    for &q in &cfg.hessian_q {
        rows.push(query_row("hessian_lq", Some(q), lq_norm(&sol, Quantity::HessLq(q)))?);
    }
    if cfg.energy.unwrap_or(p >= 2.0) {
        let n = prep.domain.dim();
        let beta = prep.datum.singular_order();
        for (name, result) in [
            ("energy", hp2_sobolev_energy(&sol)),
            ("energy_exact", hp2_sobolev_energy_exact(&sol)),
        ] {
            let mut row = query_row(name, None, result)?;
            row[2] = opt(beta);
            row[8] = fmt_f64(beta_hat(n, p));
            row[9] = opt(beta.map(|b| alpha_of_beta(b, p)));
            row[10] = fmt_f64(alpha_hat(n, p));
            rows.push(row);
        }
    }
    if cfg.linf {
        let n = prep.domain.dim_f64();
        let grid = uniform_grid(0.0, prep.domain.radius(), cfg.points.max(2));
        let mut sup: f64 = 0.0;
        for &r in grid.iter().filter(|r| **r > 0.0) {
            sup = sup.max(sol.grad_magnitude(r).map_err(num("grad_linf"))?);
        }
        let in_weak_ln = prep.datum.lorentz_index(prep.domain.dim()) >= n;
        let (verdict, bound, agree) = match sol.linf_gradient_bound() {
            Ok(b) => ("Finite", fmt_f64(b), in_weak_ln && sup <= b * (1.0 + 1e-12)),
            Err(Error::DivergentNorm { .. }) => ("Divergent", String::new(), !in_weak_ln),
            Err(e) => return Err(CliError::from_error("grad_linf", e)),
        };
        rows.push(vec![
            "grad_linf".into(),
            fmt_f64(f64::INFINITY),
            String::new(),
            verdict.into(),
            fmt_f64(sup),
            fmt_f64(n),
            agree.to_string(),
            bound,
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    if !cfg.sharpness_betas.is_empty() {
        let table =
            sharpness_scan(prep.domain.dim(), p, &cfg.sharpness_betas).map_err(num("sharpness"))?;
        for row in &table {
            let tag = Some((row.beta, row.beta_hat, row.alpha, row.alpha_hat));
            if let Some(v) = &row.energy {
                rows.push(verdict_row("sharpness_energy", v, tag));
            }
            if let Some(v) = &row.energy_exact {
                rows.push(verdict_row("sharpness_energy_exact", v, tag));
            }
            rows.push(verdict_row("sharpness_hessian_lq", &row.hessian_below, tag));
            rows.push(verdict_row("sharpness_hessian_lq", &row.hessian_above, tag));
        }
    }
    write_csv(&out.join("verdicts.csv"), &VERDICT_HEADER, &rows)
}

pub fn execute(command: Command) -> CliResult<()> {
    let (io, run): (Io, fn(&Prepared, &Path) -> CliResult<()>) = match command {
        Command::Rearrange(io) => (io, cmd_rearrange),
        Command::Solve(io) => (io, cmd_solve),
        Command::Verify(io) => (io, cmd_verify),
        Command::Regularity(io) => (io, cmd_regularity),
    };
    let prep = load_config(&io.config)?;
    let out = io.out;
    fs::create_dir_all(&out)
        .map_err(|e| CliError::numerical(format!("output: cannot create {}: {e}", out.display())))?;
    run(&prep, &out)
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"domain": {"dim": 2, "radius": 1.0}, "datum": {"kind": "constant", "value": 2.0}}"#;

    #[test]
    fn parses_a_minimal_config() {
        let prep = parse_config(BASE).unwrap();
        assert_eq!(prep.datum, RadialDatum::constant(2.0));
        assert_eq!(prep.config.params.p, 2.0);
    }

    #[test]
    fn missing_or_empty_datum_is_a_config_error() {
        for text in [
            r#"{"domain": {"dim": 2, "radius": 1.0}}"#,
            r#"{"domain": {"dim": 2, "radius": 1.0}, "datum": {}}"#,
        ] {
            let err = parse_config(text).err().unwrap();
            assert_eq!(err.code, EXIT_CONFIG);
            assert_eq!(err.message, "datum: missing");
        }
    }

    #[test]
    fn invalid_datum_names_the_check() {
        let text = r#"{"domain": {"dim": 2, "radius": 1.0}, "datum": {"kind": "power_law", "amplitude": 1.0, "exponent": 2.5}}"#;
        let err = parse_config(text).err().unwrap();
        assert_eq!(err.code, EXIT_CONFIG);
        assert!(err.message.starts_with("datum:") && err.message.contains("integrable"), "{}", err.message);
    }

    #[test]
    fn unknown_keys_and_bad_params_are_rejected() {
        let typo = r#"{"domain": {"dim": 2, "radius": 1.0}, "datum": {"kind": "constant", "value": 2.0}, "parms": {}}"#;
        assert_eq!(parse_config(typo).err().unwrap().code, EXIT_CONFIG);
        let bad_p = r#"{"domain": {"dim": 2, "radius": 1.0}, "datum": {"kind": "constant", "value": 2.0}, "params": {"p": 0.5}}"#;
        assert_eq!(parse_config(bad_p).err().unwrap().code, EXIT_CONFIG);
    }

    #[test]
    fn integral_lorentz_indices_print_as_integers() {
        assert_eq!(json_num(2.0).to_string(), "2");
        assert_eq!(json_num(2.5).to_string(), "2.5");
    }
}
