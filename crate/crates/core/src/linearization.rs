//! Linearized fluctuations around a steady state and their stability.
//!
//! Basis order is `(b, b†, a, a†)` everywhere: mirror phonon annihilation and
//! creation, then the intracavity field.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::steady_state::{solve_branch, BranchLabel, SteadyStateBranch};

pub type DriftMatrix = Matrix4<Complex64>;

/// Mirror frequency from `Omega_M^2 = 2 hbar omega_c^3 N_c / (m (j pi c)^2)`.
///
/// With the force balance substituted this is `sqrt(2 omega_c g / (j pi c))`,
/// independent of the mass.
pub fn mechanical_frequency(branch: &SteadyStateBranch, params: &SystemParams) -> Result<f64> {
    if !(branch.n_c > 0.0) {
        return Err(Error::domain(format!(
            "mechanical frequency needs N_c > 0, got {:e}",
            branch.n_c
        )));
    }
    let d = params.derived()?;
    let wc = branch.omega_c;
    let w2 = 2.0 * params.constants.hbar * wc * wc * wc * branch.n_c
        / (params.mass * d.mode_scale * d.mode_scale);
    Ok(w2.sqrt())
}

/// `g_C = omega_c^2 / (j pi c) * sqrt(hbar / (2 m Omega_M)) * alpha`, with
/// `alpha` real.
pub fn coupling_strength(
    branch: &SteadyStateBranch,
    params: &SystemParams,
    omega_m: f64,
) -> Result<f64> {
    if !(omega_m > 0.0 && omega_m.is_finite()) {
        return Err(Error::domain(format!(
            "coupling strength needs Omega_M > 0, got {omega_m:e}"
        )));
    }
    let d = params.derived()?;
    let zpf = (params.constants.hbar / (2.0 * params.mass * omega_m)).sqrt();
    Ok(branch.omega_c * branch.omega_c / d.mode_scale * zpf * branch.alpha)
}

/// Drift matrix of the linearized Langevin equations in `(b, b†, a, a†)` order.
pub fn drift_matrix(omega_m: f64, g_c: f64, delta: f64, kappa: f64, gamma: f64) -> DriftMatrix {
    let i = Complex64::i();
    let z = Complex64::new(0.0, 0.0);
    let g = i * g_c;
    let mech = Complex64::new(-0.5 * gamma, -omega_m);
    let cav = Complex64::new(-0.5 * kappa, -delta);
    Matrix4::new(
        mech,
        z,
        -g,
        -g,
        z,
        mech.conj(),
        g,
        g,
        -g,
        -g,
        cav,
        z,
        g,
        g,
        z,
        cav.conj(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearizedModel {
    pub omega_m: f64,
    pub g_c: f64,
    pub delta: f64,
    pub kappa: f64,
    pub gamma: f64,
    #[serde(skip)]
    pub drift: DriftMatrix,
}

impl LinearizedModel {
    pub fn new(omega_m: f64, g_c: f64, delta: f64, kappa: f64, gamma: f64) -> Self {
        LinearizedModel {
            omega_m,
            g_c,
            delta,
            kappa,
            gamma,
            drift: drift_matrix(omega_m, g_c, delta, kappa, gamma),
        }
    }

    pub fn from_branch(params: &SystemParams, branch: &SteadyStateBranch) -> Result<Self> {
        let omega_m = mechanical_frequency(branch, params)?;
        let g_c = coupling_strength(branch, params, omega_m)?;
        Ok(Self::new(
            omega_m,
            g_c,
            branch.delta,
            params.kappa,
            params.gamma,
        ))
    }

    /// Same model with the optomechanical coupling switched off.
    pub fn decoupled(&self) -> Self {
        Self::new(self.omega_m, 0.0, self.delta, self.kappa, self.gamma)
    }

    pub fn stability(&self) -> Result<StabilityVerdict> {
        stability(&self.drift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub max_real_part: f64,
    /// Absolute tolerance on the real parts, `1e-9 * ||A||_inf`.
    pub slack: f64,
    #[serde(skip)]
    pub eigenvalues: [Complex64; 4],
}

pub const STABILITY_SLACK: f64 = 1e-9;

/// Max row sum of absolute values.
pub fn norm_inf(a: &DriftMatrix) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigenvalues of `a` sorted by real part, then imaginary part.
pub fn eigenvalues(a: &DriftMatrix) -> Result<[Complex64; 4]> {
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::domain("drift matrix has non-finite entries"));
    }
    let schur =
        nalgebra::Schur::try_new(*a, f64::EPSILON, 10_000).ok_or(Error::EigenNonConvergence)?;
    let ev = schur.eigenvalues().ok_or(Error::EigenNonConvergence)?;
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(out)
}

/// Stable when no eigenvalue has a real part above the slack.
pub fn stability(a: &DriftMatrix) -> Result<StabilityVerdict> {
    let eigenvalues = eigenvalues(a)?;
    let max_real_part = eigenvalues[3].re;
    let slack = STABILITY_SLACK * norm_inf(a);
    Ok(StabilityVerdict {
        stable: max_real_part <= slack,
        max_real_part,
        slack,
        eigenvalues,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Stable,
    Unstable,
    NoSteadyState,
    NumericalError,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Stable => "stable",
            CellStatus::Unstable => "unstable",
            CellStatus::NoSteadyState => "no_steady_state",
            CellStatus::NumericalError => "numerical_error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityCell {
    pub kappa: f64,
    pub gamma: f64,
    pub status: CellStatus,
    /// Present whenever a steady state exists and the eigenproblem converged.
    pub max_real_part: Option<f64>,
    pub model: Option<LinearizedModel>,
}

/// Verdict for one `(kappa, Gamma)` pair; failures become statuses.
pub fn stability_cell(params: &SystemParams, label: BranchLabel) -> StabilityCell {
    let mut cell = StabilityCell {
        kappa: params.kappa,
        gamma: params.gamma,
        status: CellStatus::NumericalError,
        max_real_part: None,
        model: None,
    };
    let branch = match solve_branch(params, label) {
        Ok(b) => b,
        Err(Error::NoRealSteadyState { .. }) => {
            cell.status = CellStatus::NoSteadyState;
            return cell;
        }
        Err(_) => return cell,
    };
    let Ok(model) = LinearizedModel::from_branch(params, &branch) else {
        return cell;
    };
    cell.model = Some(model);
    if let Ok(v) = model.stability() {
        cell.max_real_part = Some(v.max_real_part);
        cell.status = if v.stable {
            CellStatus::Stable
        } else {
            CellStatus::Unstable
        };
    }
    cell
}

/// Stability over a `(kappa, Gamma)` grid, row-major in `kappa`.
///
/// Cells are evaluated in parallel on the current rayon pool; the output
/// order is always `kappa_grid x gamma_grid`.
pub fn stability_map(
    params: &SystemParams,
    kappa_grid: &[f64],
    gamma_grid: &[f64],
    label: BranchLabel,
) -> Vec<StabilityCell> {
    let cells: Vec<(f64, f64)> = kappa_grid
        .iter()
        .flat_map(|&k| gamma_grid.iter().map(move |&g| (k, g)))
        .collect();
    cells
        .into_par_iter()
        .map(|(k, g)| stability_cell(&params.with_kappa(k).with_gamma(g), label))
        .collect()
}
