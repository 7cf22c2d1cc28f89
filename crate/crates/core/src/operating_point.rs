//! A solved branch together with its linearized model, and per-sideband
//! evaluation of the output state.

use crate::error::Result;
use crate::gaussian::{
    covariance, entanglement_entropy, entanglement_from_determinants, max_squeezing, purity_check,
    quadrature_variances, submatrices, uncertainty_min_eigenvalue, EntanglementResult,
    QuadratureVariances, SidebandCovariance,
};
use crate::linearization::{LinearizedModel, StabilityVerdict};
use crate::params::SystemParams;
use crate::precision;
use crate::spectra::{io_coefficients, transfer_matrix};
use crate::steady_state::{solve_branch, BranchLabel, SteadyStateBranch};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub params: SystemParams,
    pub branch: SteadyStateBranch,
    pub model: LinearizedModel,
    pub verdict: StabilityVerdict,
}

impl OperatingPoint {
    pub fn new(params: &SystemParams, label: BranchLabel) -> Result<Self> {
        let branch = solve_branch(params, label)?;
        let model = LinearizedModel::from_branch(params, &branch)?;
        let verdict = model.stability()?;
        Ok(OperatingPoint {
            params: *params,
            branch,
            model,
            verdict,
        })
    }

    /// Same operating point with the optomechanical coupling switched off.
    pub fn decoupled(&self) -> Result<Self> {
        let model = self.model.decoupled();
        Ok(OperatingPoint {
            model,
            verdict: model.stability()?,
            ..*self
        })
    }

    pub fn is_stable(&self) -> bool {
        self.verdict.stable
    }

    pub fn covariance_at(&self, omega: f64) -> Result<SidebandCovariance> {
        let t = transfer_matrix(&self.model.drift, omega)?;
        covariance(&io_coefficients(&t, self.model.kappa, self.model.gamma)?)
    }

    /// Output-state summary at `omega`; the entropy and the purity deviation
    /// come from double-double determinants.
    pub fn sideband(&self, omega: f64) -> Result<SidebandReport> {
        let mut report = SidebandReport::from_covariance(&self.covariance_at(omega)?)?;
        let d = precision::determinants(&self.model, omega)?;
        report.entanglement = entanglement_from_determinants(d.mirror, d.cavity)?;
        report.purity_deviation = d.purity_deviation;
        Ok(report)
    }

    /// Grid point with the largest entropy, as `(omega, E2)`.
    pub fn peak_entanglement(&self, omegas: &[f64]) -> Result<(f64, f64)> {
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        for &w in omegas {
            let e = entanglement_entropy(&self.covariance_at(w)?.sigma)?.value();
            if e > best.1 {
                best = (w, e);
            }
        }
        Ok(best)
    }

    /// Golden-section refinement of the grid peak in `ln omega`, bracketed by
    /// the neighbouring grid points.
    pub fn refine_peak(&self, omegas: &[f64], rel_tol: f64) -> Result<(f64, f64)> {
        let (w0, _) = self.peak_entanglement(omegas)?;
        let k = omegas.iter().position(|&w| w == w0).unwrap_or(0);
        let mut lo = omegas[k.saturating_sub(1)].ln();
        let mut hi = omegas[(k + 1).min(omegas.len() - 1)].ln();
        let e = |x: f64| -> Result<f64> {
            Ok(entanglement_entropy(&self.covariance_at(x.exp())?.sigma)?.value())
        };
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut x1, mut x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
        let (mut f1, mut f2) = (e(x1)?, e(x2)?);
        while hi - lo > rel_tol {
            if f1 > f2 {
                hi = x2;
                (x2, f2) = (x1, f1);
                x1 = hi - r * (hi - lo);
                f1 = e(x1)?;
            } else {
                lo = x1;
                (x1, f1) = (x2, f2);
                x2 = lo + r * (hi - lo);
                f2 = e(x2)?;
            }
        }
        let x = 0.5 * (lo + hi);
        Ok((x.exp(), e(x)?))
    }
}

/// Everything reported about the output state at one sideband.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandReport {
    pub omega: f64,
    pub entanglement: EntanglementResult,
    pub variances: QuadratureVariances,
    /// Extremal eigenvalues of the mirror block.
    pub mirror_eigen: (f64, f64),
    /// `|det(2 sigma) - 1|`.
    pub purity_deviation: f64,
    /// Smallest eigenvalue of `sigma + (i/2) Omega`.
    pub uncertainty_min: f64,
}

impl SidebandReport {
    pub fn from_covariance(c: &SidebandCovariance) -> Result<Self> {
        Ok(SidebandReport {
            omega: c.omega,
            entanglement: entanglement_entropy(&c.sigma)?,
            variances: quadrature_variances(&c.sigma)?,
            mirror_eigen: max_squeezing(&submatrices(&c.sigma).mirror),
            purity_deviation: purity_check(&c.sigma),
            uncertainty_min: uncertainty_min_eigenvalue(&c.sigma),
        })
    }
}
