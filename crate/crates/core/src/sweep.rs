//! Batch runs: steady-state reports, stability maps, entanglement and
//! variance sweeps, written as CSV with a `#` metadata header plus a JSON
//! summary next to it.
//!
//! Output is byte-deterministic: rows are gathered in grid order whatever the
//! worker count, and floats use Rust's shortest round-trip exponent format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearization::{stability_map, CellStatus};
use crate::operating_point::{OperatingPoint, SidebandReport};
use crate::params::{validate_regime, ParamFile, RegimeThresholds, SystemParams};
use crate::steady_state::{
    residual, solve_branch, threshold_power, threshold_power_bisection, BranchLabel,
};

pub const DEFAULT_P_TILDE_GRID: Grid = Grid {
    min: 6e-4,
    max: 0.1,
    count: 60,
    scale: Scale::Log,
};
pub const DEFAULT_KAPPA_GRID: Grid = Grid {
    min: 1e5,
    max: 1e9,
    count: 40,
    scale: Scale::Log,
};
pub const DEFAULT_GAMMA_GRID: Grid = Grid {
    min: 1e2,
    max: 1e7,
    count: 40,
    scale: Scale::Log,
};
pub const DEFAULT_OMEGA_COUNT: usize = 400;
/// Default sideband range in units of `(Omega_M, g_C)` of the reference point.
pub const DEFAULT_OMEGA_SPAN: (f64, f64) = (1e-2, 1e3);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Lin,
    #[default]
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: Scale,
}

impl Grid {
    pub fn new(min: f64, max: f64, count: usize, scale: Scale) -> Result<Self> {
        let g = Grid {
            min,
            max,
            count,
            scale,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Config("grid count must be at least 1".into()));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(Error::Config(format!(
                "grid range [{:e}, {:e}] must be finite and ordered",
                self.min, self.max
            )));
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            return Err(Error::Config(format!(
                "log grid needs a positive minimum, got {:e}",
                self.min
            )));
        }
        Ok(())
    }

    /// Grid points, endpoints included exactly. A single-point grid is `[min]`.
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k == 0 {
                    return self.min;
                }
                if k == self.count - 1 {
                    return self.max;
                }
                let t = k as f64 / n;
                match self.scale {
                    Scale::Lin => (1.0 - t) * self.min + t * self.max,
                    Scale::Log => {
                        10f64.powf(self.min.log10() + t * (self.max.log10() - self.min.log10()))
                    }
                }
            })
            .collect()
    }

    fn describe(&self) -> String {
        let s = match self.scale {
            Scale::Lin => "lin",
            Scale::Log => "log",
        };
        format!("{} [{:e}, {:e}] x {}", s, self.min, self.max, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    SteadyState,
    StabilityMap,
    EntanglementSweep,
    VarianceSweep,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::SteadyState => "steady-state",
            SweepKind::StabilityMap => "stability-map",
            SweepKind::EntanglementSweep => "entangle-sweep",
            SweepKind::VarianceSweep => "variance-sweep",
        }
    }
}

/// How the dimensionless power was specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PTildeAxis {
    /// No power keys: the default grid for sweeps, the reference value otherwise.
    Unspecified,
    Single(f64),
    Range(Grid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// `params.p_tilde` is the reference power.
    pub params: SystemParams,
    pub p_tilde: PTildeAxis,
    /// `None` selects the default range around the reference operating point.
    pub omega: Option<Grid>,
    pub kappa: Grid,
    pub gamma: Grid,
    pub branch: Option<BranchLabel>,
    /// Switches the optomechanical coupling off (debugging aid).
    pub force_decoupled: bool,
}

#[derive(Debug, Deserialize)]
struct SweepFile {
    #[serde(flatten)]
    params: ParamFile,
    p_tilde_min: Option<f64>,
    p_tilde_max: Option<f64>,
    p_tilde_count: Option<usize>,
    p_tilde_scale: Option<Scale>,
    omega_min_rad_s: Option<f64>,
    omega_max_rad_s: Option<f64>,
    omega_count: Option<usize>,
    omega_scale: Option<Scale>,
    kappa_min_rad_s: Option<f64>,
    kappa_max_rad_s: Option<f64>,
    kappa_count: Option<usize>,
    kappa_scale: Option<Scale>,
    #[serde(rename = "Gamma_min_rad_s")]
    gamma_min_rad_s: Option<f64>,
    #[serde(rename = "Gamma_max_rad_s")]
    gamma_max_rad_s: Option<f64>,
    #[serde(rename = "Gamma_count")]
    gamma_count: Option<usize>,
    #[serde(rename = "Gamma_scale")]
    gamma_scale: Option<Scale>,
    branch: Option<BranchLabel>,
    #[serde(default)]
    force_decoupled: bool,
    #[serde(flatten)]
    unknown: BTreeMap<String, serde_json::Value>,
}

fn optional_grid(
    name: &str,
    min: Option<f64>,
    max: Option<f64>,
    count: Option<usize>,
    scale: Option<Scale>,
    default: Option<Grid>,
) -> Result<Option<Grid>> {
    let grid = match (min, max) {
        (Some(lo), Some(hi)) => Grid {
            min: lo,
            max: hi,
            count: count
                .or(default.map(|d| d.count))
                .unwrap_or(DEFAULT_OMEGA_COUNT),
            scale: scale.unwrap_or_default(),
        },
        (None, None) => match default {
            Some(d) => Grid {
                count: count.unwrap_or(d.count),
                scale: scale.unwrap_or(d.scale),
                ..d
            },
            None if count.is_none() && scale.is_none() => return Ok(None),
            None => {
                return Err(Error::Config(format!(
                    "{name}: count/scale given without a range"
                )))
            }
        },
        _ => {
            return Err(Error::Config(format!(
                "{name}: both _min and _max are required"
            )))
        }
    };
    grid.validate().map_err(|e| in_context(name, e))?;
    Ok(Some(grid))
}

fn in_context(prefix: impl std::fmt::Display, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{prefix}: {m}")),
        other => Error::Config(format!("{prefix}: {other}")),
    }
}

impl SweepConfig {
    pub fn paper() -> Self {
        SweepConfig {
            params: SystemParams::paper(),
            p_tilde: PTildeAxis::Unspecified,
            omega: None,
            kappa: DEFAULT_KAPPA_GRID,
            gamma: DEFAULT_GAMMA_GRID,
            branch: None,
            force_decoupled: false,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let explicit_p = value.get("p_tilde").is_some();
        let file: SweepFile =
            serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(key) = file.unknown.keys().next() {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        let params = SystemParams::from(&file.params);
        params.validate()?;
        let range = optional_grid(
            "p_tilde",
            file.p_tilde_min,
            file.p_tilde_max,
            file.p_tilde_count,
            file.p_tilde_scale,
            None,
        )?;
        let p_tilde = match (range, explicit_p) {
            (Some(g), _) => PTildeAxis::Range(g),
            (None, true) => PTildeAxis::Single(params.p_tilde),
            (None, false) => PTildeAxis::Unspecified,
        };
        let omega = optional_grid(
            "omega",
            file.omega_min_rad_s,
            file.omega_max_rad_s,
            file.omega_count,
            file.omega_scale,
            None,
        )?;
        let kappa = optional_grid(
            "kappa",
            file.kappa_min_rad_s,
            file.kappa_max_rad_s,
            file.kappa_count,
            file.kappa_scale,
            Some(DEFAULT_KAPPA_GRID),
        )?
        .unwrap_or(DEFAULT_KAPPA_GRID);
        let gamma = optional_grid(
            "Gamma",
            file.gamma_min_rad_s,
            file.gamma_max_rad_s,
            file.gamma_count,
            file.gamma_scale,
            Some(DEFAULT_GAMMA_GRID),
        )?
        .unwrap_or(DEFAULT_GAMMA_GRID);
        Ok(SweepConfig {
            params,
            p_tilde,
            omega,
            kappa,
            gamma,
            branch: file.branch,
            force_decoupled: file.force_decoupled,
        })
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text).map_err(|e| in_context(path.display(), e))
    }

    pub fn branch_or_blue(&self) -> BranchLabel {
        self.branch.unwrap_or(BranchLabel::Blue)
    }

    /// Powers swept by the entanglement and variance sweeps and reported by
    /// the steady-state report.
    pub fn p_tilde_points(&self) -> Vec<f64> {
        match self.p_tilde {
            PTildeAxis::Unspecified => DEFAULT_P_TILDE_GRID.points(),
            PTildeAxis::Single(p) => vec![p],
            PTildeAxis::Range(g) => g.points(),
        }
    }

    /// The configured sideband grid, or log-spaced over
    /// `[1e-2 Omega_M, 1e3 g_C]` at the reference power.
    pub fn omega_grid(&self) -> Result<Grid> {
        if let Some(g) = self.omega {
            return Ok(g);
        }
        let op = OperatingPoint::new(&self.params, self.branch_or_blue()).map_err(|e| {
            Error::Config(format!(
                "default omega grid needs a steady state at the reference p_tilde {:e}: {e}",
                self.params.p_tilde
            ))
        })?;
        Grid::new(
            DEFAULT_OMEGA_SPAN.0 * op.model.omega_m,
            DEFAULT_OMEGA_SPAN.1 * op.model.g_c,
            DEFAULT_OMEGA_COUNT,
            Scale::Log,
        )
    }

    fn header(&self, kind: SweepKind, branch: Option<BranchLabel>) -> Vec<(String, String)> {
        let p = &self.params;
        let mut h = vec![
            ("kind".to_string(), kind.as_str().to_string()),
            ("L_m".into(), fmt(p.cavity_length)),
            ("lambda_L_m".into(), fmt(p.wavelength)),
            ("kappa_rad_s".into(), fmt(p.kappa)),
            ("Gamma_rad_s".into(), fmt(p.gamma)),
            ("g_m_s2".into(), fmt(p.gravity)),
            ("p_tilde".into(), fmt(p.p_tilde)),
            ("m_ref_kg".into(), fmt(p.mass)),
            ("c_m_s".into(), fmt(p.constants.c)),
            ("hbar_J_s".into(), fmt(p.constants.hbar)),
            (
                "branch".into(),
                branch.map_or("both".into(), |b| b.as_str().into()),
            ),
            ("force_decoupled".into(), self.force_decoupled.to_string()),
        ];
        match self.p_tilde {
            PTildeAxis::Range(g) => h.push(("p_tilde_grid".into(), g.describe())),
            PTildeAxis::Unspecified if kind != SweepKind::StabilityMap => {
                h.push(("p_tilde_grid".into(), DEFAULT_P_TILDE_GRID.describe()))
            }
            _ => {}
        }
        h
    }
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// Row status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NoSteadyState,
    Unstable,
    NumericalError,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NoSteadyState => "no_steady_state",
            Status::Unstable => "unstable",
            Status::NumericalError => "numerical_error",
        }
    }
}

/// One row of a steady-state report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyStateRow {
    pub p_tilde: f64,
    pub branch: BranchLabel,
    pub status: Status,
    pub q_m: Option<f64>,
    pub n_c: Option<f64>,
    pub delta_rad_s: Option<f64>,
    pub omega_c_rad_s: Option<f64>,
    pub omega_m_rad_s: Option<f64>,
    pub g_c_rad_s: Option<f64>,
    /// Worst normalized residual of the three steady-state equations.
    pub residual: Option<f64>,
    pub kappa_ratio: Option<f64>,
    pub detuning_ratio: Option<f64>,
    pub regime_ok: Option<bool>,
    pub stable: Option<bool>,
    pub max_real_part: Option<f64>,
}

impl SteadyStateRow {
    pub const COLUMNS: &'static [&'static str] = &[
        "p_tilde",
        "branch",
        "status",
        "q_m",
        "n_c",
        "delta_rad_s",
        "omega_c_rad_s",
        "omega_m_rad_s",
        "g_c_rad_s",
        "residual",
        "kappa_ratio",
        "detuning_ratio",
        "regime_ok",
        "stable",
        "max_real_part",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            fmt(self.p_tilde),
            self.branch.as_str().into(),
            self.status.as_str().into(),
            opt(self.q_m),
            opt(self.n_c),
            opt(self.delta_rad_s),
            opt(self.omega_c_rad_s),
            opt(self.omega_m_rad_s),
            opt(self.g_c_rad_s),
            opt(self.residual),
            opt(self.kappa_ratio),
            opt(self.detuning_ratio),
            self.regime_ok.map(|b| b.to_string()).unwrap_or_default(),
            self.stable.map(|b| b.to_string()).unwrap_or_default(),
            opt(self.max_real_part),
        ]
    }

    fn compute(params: &SystemParams, label: BranchLabel) -> Self {
        let mut row = SteadyStateRow {
            p_tilde: params.p_tilde,
            branch: label,
            status: Status::NumericalError,
            q_m: None,
            n_c: None,
            delta_rad_s: None,
            omega_c_rad_s: None,
            omega_m_rad_s: None,
            g_c_rad_s: None,
            residual: None,
            kappa_ratio: None,
            detuning_ratio: None,
            regime_ok: None,
            stable: None,
            max_real_part: None,
        };
        let branch = match solve_branch(params, label) {
            Ok(b) => b,
            Err(Error::NoRealSteadyState { .. }) => {
                row.status = Status::NoSteadyState;
                return row;
            }
            Err(_) => return row,
        };
        row.q_m = Some(branch.q);
        row.n_c = Some(branch.n_c);
        row.delta_rad_s = Some(branch.delta);
        row.omega_c_rad_s = Some(branch.omega_c);
        row.residual = residual(&branch, params).ok().map(|r| r.max_abs());
        if let Ok(r) = validate_regime(params, &branch, RegimeThresholds::default()) {
            row.kappa_ratio = Some(r.kappa_ratio);
            row.detuning_ratio = Some(r.detuning_ratio);
            row.regime_ok = Some(r.passes());
        }
        if let Ok(op) = OperatingPoint::new(params, label) {
            row.omega_m_rad_s = Some(op.model.omega_m);
            row.g_c_rad_s = Some(op.model.g_c);
            row.stable = Some(op.verdict.stable);
            row.max_real_part = Some(op.verdict.max_real_part);
            row.status = if op.verdict.stable {
                Status::Ok
            } else {
                Status::Unstable
            };
        }
        row
    }
}

/// One row of a stability map or a sideband sweep. Physics fields are empty
/// when the status does not allow them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p_tilde: f64,
    pub omega_rad_s: Option<f64>,
    pub kappa_rad_s: f64,
    pub gamma_rad_s: f64,
    pub branch: BranchLabel,
    pub status: Status,
    pub delta_rad_s: Option<f64>,
    pub omega_m_rad_s: Option<f64>,
    pub g_c_rad_s: Option<f64>,
    pub stable: Option<bool>,
    pub max_real_part: Option<f64>,
    pub e2_ebits: Option<f64>,
    pub e2_discrepancy: Option<f64>,
    pub var_q_b: Option<f64>,
    pub var_p_b: Option<f64>,
    pub var_q_a: Option<f64>,
    pub var_p_a: Option<f64>,
    pub min_eig_sigma_b: Option<f64>,
    pub max_eig_sigma_b: Option<f64>,
    pub purity_deviation: Option<f64>,
}

impl SweepRow {
    pub const COLUMNS: &'static [&'static str] = &[
        "p_tilde",
        "omega_rad_s",
        "kappa_rad_s",
        "Gamma_rad_s",
        "branch",
        "status",
        "delta_rad_s",
        "omega_m_rad_s",
        "g_c_rad_s",
        "stable",
        "max_real_part",
        "e2_ebits",
        "e2_discrepancy",
        "var_q_b",
        "var_p_b",
        "var_q_a",
        "var_p_a",
        "min_eig_sigma_b",
        "max_eig_sigma_b",
        "purity_deviation",
    ];

    fn empty(params: &SystemParams, branch: BranchLabel) -> Self {
        SweepRow {
            p_tilde: params.p_tilde,
            omega_rad_s: None,
            kappa_rad_s: params.kappa,
            gamma_rad_s: params.gamma,
            branch,
            status: Status::NumericalError,
            delta_rad_s: None,
            omega_m_rad_s: None,
            g_c_rad_s: None,
            stable: None,
            max_real_part: None,
            e2_ebits: None,
            e2_discrepancy: None,
            var_q_b: None,
            var_p_b: None,
            var_q_a: None,
            var_p_a: None,
            min_eig_sigma_b: None,
            max_eig_sigma_b: None,
            purity_deviation: None,
        }
    }

    fn with_point(mut self, op: &OperatingPoint) -> Self {
        self.delta_rad_s = Some(op.model.delta);
        self.omega_m_rad_s = Some(op.model.omega_m);
        self.g_c_rad_s = Some(op.model.g_c);
        self.stable = Some(op.verdict.stable);
        self.max_real_part = Some(op.verdict.max_real_part);
        self.status = if op.verdict.stable {
            Status::Ok
        } else {
            Status::Unstable
        };
        self
    }

    fn with_sideband(mut self, r: &SidebandReport) -> Self {
        self.omega_rad_s = Some(r.omega);
        self.e2_ebits = Some(r.entanglement.value());
        self.e2_discrepancy = Some(r.entanglement.discrepancy);
        self.var_q_b = Some(r.variances.q_b);
        self.var_p_b = Some(r.variances.p_b);
        self.var_q_a = Some(r.variances.q_a);
        self.var_p_a = Some(r.variances.p_a);
        self.min_eig_sigma_b = Some(r.mirror_eigen.0);
        self.max_eig_sigma_b = Some(r.mirror_eigen.1);
        self.purity_deviation = Some(r.purity_deviation);
        self
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt(self.p_tilde),
            opt(self.omega_rad_s),
            fmt(self.kappa_rad_s),
            fmt(self.gamma_rad_s),
            self.branch.as_str().into(),
            self.status.as_str().into(),
            opt(self.delta_rad_s),
            opt(self.omega_m_rad_s),
            opt(self.g_c_rad_s),
            self.stable.map(|b| b.to_string()).unwrap_or_default(),
            opt(self.max_real_part),
            opt(self.e2_ebits),
            opt(self.e2_discrepancy),
            opt(self.var_q_b),
            opt(self.var_p_b),
            opt(self.var_q_a),
            opt(self.var_p_a),
            opt(self.min_eig_sigma_b),
            opt(self.max_eig_sigma_b),
            opt(self.purity_deviation),
        ]
    }
}

fn render(
    header: &[(String, String)],
    columns: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> String {
    let mut out = String::new();
    for (k, v) in header {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out.push_str(&columns.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// `<out>` with its extension replaced by `summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_outputs<S: Serialize>(out: &Path, csv: &str, summary: &S) -> Result<()> {
    write_file(out, csv)?;
    let path = summary_path(out);
    let mut json = serde_json::to_string_pretty(summary).map_err(|source| Error::Json {
        path: path.clone(),
        source,
    })?;
    json.push('\n');
    write_file(&path, &json)
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Config(format!("thread pool: {e}"))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyStateSummary {
    pub kind: SweepKind,
    pub params: ParamFile,
    pub threshold_p_tilde: Option<f64>,
    pub threshold_p_tilde_bisection: Option<f64>,
    pub rows: usize,
    pub solved: usize,
    pub no_steady_state: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateReport {
    pub rows: Vec<SteadyStateRow>,
    pub threshold: Option<f64>,
    pub threshold_bisection: Option<f64>,
}

/// Both branches (or the configured one) at every power, blue before red.
pub fn run_steady_state_report(config: &SweepConfig) -> SteadyStateReport {
    let labels: Vec<BranchLabel> = match config.branch {
        Some(b) => vec![b],
        None => vec![BranchLabel::Blue, BranchLabel::Red],
    };
    let tasks: Vec<(f64, BranchLabel)> = config
        .p_tilde_points()
        .into_iter()
        .flat_map(|p| labels.iter().map(move |&b| (p, b)))
        .collect();
    let rows = tasks
        .par_iter()
        .map(|&(p, b)| SteadyStateRow::compute(&config.params.with_p_tilde(p), b))
        .collect();
    SteadyStateReport {
        rows,
        threshold: threshold_power(&config.params).ok(),
        threshold_bisection: threshold_power_bisection(&config.params, 1e-14).ok(),
    }
}

pub fn write_steady_state_report(
    config: &SweepConfig,
    report: &SteadyStateReport,
    out: &Path,
) -> Result<()> {
    let mut header = config.header(SweepKind::SteadyState, config.branch);
    header.push(("threshold_p_tilde".into(), opt(report.threshold)));
    let csv = render(
        &header,
        SteadyStateRow::COLUMNS,
        report.rows.iter().map(|r| r.fields()),
    );
    let solved = report.rows.iter().filter(|r| r.q_m.is_some()).count();
    let summary = SteadyStateSummary {
        kind: SweepKind::SteadyState,
        params: ParamFile::from(&config.params),
        threshold_p_tilde: report.threshold,
        threshold_p_tilde_bisection: report.threshold_bisection,
        rows: report.rows.len(),
        solved,
        no_steady_state: report
            .rows
            .iter()
            .filter(|r| r.status == Status::NoSteadyState)
            .count(),
    };
    write_outputs(out, &csv, &summary)
}

/// One row per `(kappa, Gamma)` cell at the reference power, `kappa`-major.
pub fn run_stability_map(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if let PTildeAxis::Range(_) = config.p_tilde {
        return Err(Error::Config("stability-map takes a single p_tilde".into()));
    }
    let label = config.branch_or_blue();
    let cells = stability_map(
        &config.params,
        &config.kappa.points(),
        &config.gamma.points(),
        label,
    );
    Ok(cells
        .into_iter()
        .map(|c| {
            let params = config.params.with_kappa(c.kappa).with_gamma(c.gamma);
            let mut row = SweepRow::empty(&params, label);
            if let Some(m) = c.model {
                row.delta_rad_s = Some(m.delta);
                row.omega_m_rad_s = Some(m.omega_m);
                row.g_c_rad_s = Some(m.g_c);
            }
            row.max_real_part = c.max_real_part;
            row.stable = c.max_real_part.map(|_| c.status == CellStatus::Stable);
            row.status = match c.status {
                CellStatus::Stable => Status::Ok,
                CellStatus::Unstable => Status::Unstable,
                CellStatus::NoSteadyState => Status::NoSteadyState,
                CellStatus::NumericalError => Status::NumericalError,
            };
            row
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct StatusCounts {
    pub ok: usize,
    pub no_steady_state: usize,
    pub unstable: usize,
    pub numerical_error: usize,
}

impl StatusCounts {
    fn of(rows: &[SweepRow]) -> Self {
        let n = |s: Status| rows.iter().filter(|r| r.status == s).count();
        StatusCounts {
            ok: n(Status::Ok),
            no_steady_state: n(Status::NoSteadyState),
            unstable: n(Status::Unstable),
            numerical_error: n(Status::NumericalError),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MapSummary {
    pub kind: SweepKind,
    pub branch: BranchLabel,
    pub params: ParamFile,
    pub kappa_grid: Grid,
    pub gamma_grid: Grid,
    pub counts: StatusCounts,
}

pub fn write_stability_map(config: &SweepConfig, rows: &[SweepRow], out: &Path) -> Result<()> {
    let label = config.branch_or_blue();
    let mut header = config.header(SweepKind::StabilityMap, Some(label));
    header.push(("kappa_grid".into(), config.kappa.describe()));
    header.push(("Gamma_grid".into(), config.gamma.describe()));
    let csv = render(&header, SweepRow::COLUMNS, rows.iter().map(|r| r.fields()));
    let summary = MapSummary {
        kind: SweepKind::StabilityMap,
        branch: label,
        params: ParamFile::from(&config.params),
        kappa_grid: config.kappa,
        gamma_grid: config.gamma,
        counts: StatusCounts::of(rows),
    };
    write_outputs(out, &csv, &summary)
}

/// Surface rows over `(p_tilde, omega)`. Powers without a stable steady state
/// contribute a single row carrying their status.
pub fn run_sideband_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let label = config.branch_or_blue();
    let omegas = config.omega_grid()?.points();
    let points: Vec<(SystemParams, Option<OperatingPoint>, SweepRow)> = config
        .p_tilde_points()
        .par_iter()
        .map(|&p| {
            let params = config.params.with_p_tilde(p);
            let row = SweepRow::empty(&params, label);
            let op = OperatingPoint::new(&params, label).and_then(|op| {
                if config.force_decoupled {
                    op.decoupled()
                } else {
                    Ok(op)
                }
            });
            match op {
                Ok(op) => (params, Some(op), row.with_point(&op)),
                Err(Error::NoRealSteadyState { .. }) => (
                    params,
                    None,
                    SweepRow {
                        status: Status::NoSteadyState,
                        ..row
                    },
                ),
                Err(_) => (params, None, row),
            }
        })
        .collect();

    let mut tasks: Vec<(usize, Option<f64>)> = Vec::new();
    for (k, (_, op, _)) in points.iter().enumerate() {
        match op {
            Some(op) if op.is_stable() => tasks.extend(omegas.iter().map(|&w| (k, Some(w)))),
            _ => tasks.push((k, None)),
        }
    }
    Ok(tasks
        .par_iter()
        .map(|&(k, w)| {
            let (_, op, base) = &points[k];
            match (op, w) {
                (Some(op), Some(w)) => match op.sideband(w) {
                    Ok(r) => base.clone().with_sideband(&r),
                    Err(_) => SweepRow {
                        omega_rad_s: Some(w),
                        status: Status::NumericalError,
                        ..base.clone()
                    },
                },
                _ => base.clone(),
            }
        })
        .collect())
}

/// Entropy surface; identical rows to [`run_sideband_sweep`].
pub fn run_entanglement_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    run_sideband_sweep(config)
}

/// Variance surface; identical rows to [`run_sideband_sweep`].
pub fn run_variance_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    run_sideband_sweep(config)
}

fn group_by_power(rows: &[SweepRow]) -> Vec<&[SweepRow]> {
    rows.chunk_by(|a, b| a.p_tilde == b.p_tilde).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakSummary {
    pub p_tilde: f64,
    pub status: Status,
    pub peak_e2_ebits: Option<f64>,
    pub peak_omega_rad_s: Option<f64>,
}

/// Largest grid entropy per power, recomputed from the surface rows.
pub fn entanglement_peaks(rows: &[SweepRow]) -> Vec<PeakSummary> {
    group_by_power(rows)
        .into_iter()
        .map(|g| {
            let best = g
                .iter()
                .filter(|r| r.status == Status::Ok)
                .filter_map(|r| Some((r.e2_ebits?, r.omega_rad_s?)))
                .fold(None, |acc: Option<(f64, f64)>, x| match acc {
                    Some(a) if a.0 >= x.0 => Some(a),
                    _ => Some(x),
                });
            PeakSummary {
                p_tilde: g[0].p_tilde,
                status: if best.is_some() {
                    Status::Ok
                } else {
                    g[0].status
                },
                peak_e2_ebits: best.map(|b| b.0),
                peak_omega_rad_s: best.map(|b| b.1),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqueezingSummary {
    pub p_tilde: f64,
    pub status: Status,
    pub min_var_q_b: Option<f64>,
    pub min_var_q_b_omega_rad_s: Option<f64>,
    /// Smallest eigenvalue of `sigma_b` at the `Var(Q_b)` minimum.
    pub min_eig_sigma_b_at_min: Option<f64>,
    /// `(Var(Q_b) - min eig) / Var(Q_b)` at the `Var(Q_b)` minimum.
    pub relative_gap: Option<f64>,
    pub min_eig_sigma_b: Option<f64>,
    pub min_eig_sigma_b_omega_rad_s: Option<f64>,
}

fn argmin<'a>(g: &[&'a SweepRow], key: impl Fn(&SweepRow) -> Option<f64>) -> Option<&'a SweepRow> {
    g.iter()
        .filter(|r| key(r).is_some())
        .fold(None, |acc: Option<&SweepRow>, r| match acc {
            Some(a) if key(a) <= key(r) => Some(a),
            _ => Some(r),
        })
}

/// Per-power minima of `Var(Q_b)` and of the smallest `sigma_b` eigenvalue,
/// recomputed from the surface rows.
pub fn squeezing_minima(rows: &[SweepRow]) -> Vec<SqueezingSummary> {
    group_by_power(rows)
        .into_iter()
        .map(|g| {
            let ok: Vec<&SweepRow> = g.iter().filter(|r| r.status == Status::Ok).collect();
            let q = argmin(&ok, |r| r.var_q_b);
            let e = argmin(&ok, |r| r.min_eig_sigma_b);
            let at = q.and_then(|r| r.min_eig_sigma_b);
            SqueezingSummary {
                p_tilde: g[0].p_tilde,
                status: if q.is_some() { Status::Ok } else { g[0].status },
                min_var_q_b: q.and_then(|r| r.var_q_b),
                min_var_q_b_omega_rad_s: q.and_then(|r| r.omega_rad_s),
                min_eig_sigma_b_at_min: at,
                relative_gap: q.and_then(|r| Some((r.var_q_b? - at?) / r.var_q_b?)),
                min_eig_sigma_b: e.and_then(|r| r.min_eig_sigma_b),
                min_eig_sigma_b_omega_rad_s: e.and_then(|r| r.omega_rad_s),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SidebandSummary<T> {
    pub kind: SweepKind,
    pub branch: BranchLabel,
    pub params: ParamFile,
    pub omega_grid: Grid,
    pub force_decoupled: bool,
    pub counts: StatusCounts,
    pub per_power: T,
}

fn write_sideband(
    config: &SweepConfig,
    kind: SweepKind,
    rows: &[SweepRow],
    out: &Path,
    per_power: impl Serialize,
) -> Result<()> {
    let label = config.branch_or_blue();
    let grid = config.omega_grid()?;
    let mut header = config.header(kind, Some(label));
    header.push(("omega_grid".into(), grid.describe()));
    let csv = render(&header, SweepRow::COLUMNS, rows.iter().map(|r| r.fields()));
    let summary = SidebandSummary {
        kind,
        branch: label,
        params: ParamFile::from(&config.params),
        omega_grid: grid,
        force_decoupled: config.force_decoupled,
        counts: StatusCounts::of(rows),
        per_power,
    };
    write_outputs(out, &csv, &summary)
}

pub fn write_entanglement_sweep(config: &SweepConfig, rows: &[SweepRow], out: &Path) -> Result<()> {
    write_sideband(
        config,
        SweepKind::EntanglementSweep,
        rows,
        out,
        entanglement_peaks(rows),
    )
}

pub fn write_variance_sweep(config: &SweepConfig, rows: &[SweepRow], out: &Path) -> Result<()> {
    write_sideband(
        config,
        SweepKind::VarianceSweep,
        rows,
        out,
        squeezing_minima(rows),
    )
}

/// Loads `config`, runs `kind` on `threads` workers and writes `out` plus its
/// JSON summary.
pub fn run(
    kind: SweepKind,
    config: &SweepConfig,
    out: &Path,
    threads: Option<usize>,
) -> Result<()> {
    with_threads(threads, || match kind {
        SweepKind::SteadyState => {
            let report = run_steady_state_report(config);
            write_steady_state_report(config, &report, out)
        }
        SweepKind::StabilityMap => write_stability_map(config, &run_stability_map(config)?, out),
        SweepKind::EntanglementSweep => {
            write_entanglement_sweep(config, &run_entanglement_sweep(config)?, out)
        }
        SweepKind::VarianceSweep => write_variance_sweep(config, &run_variance_sweep(config)?, out),
    })?
}
