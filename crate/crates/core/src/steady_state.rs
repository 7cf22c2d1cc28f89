//! Semiclassical steady states of the levitated mirror.
//!
//! Setting the expectation values of the equations of motion to zero gives
//! photon-number balance, `p = 0`, and a force balance between gravity and
//! radiation pressure. Eliminating `N_c` leaves a quadratic in the cavity
//! resonance with two roots: a blue detuned branch (`Delta < 0`, lower mirror
//! position) and a red detuned one (`Delta > 0`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DerivedScalars, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchLabel {
    Blue,
    Red,
}

impl BranchLabel {
    /// Sign of the square root in the closed forms: `-1` in `q` for blue.
    fn root_sign(self) -> f64 {
        match self {
            BranchLabel::Blue => -1.0,
            BranchLabel::Red => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BranchLabel::Blue => "blue",
            BranchLabel::Red => "red",
        }
    }
}

impl std::str::FromStr for BranchLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "blue" => Ok(BranchLabel::Blue),
            "red" => Ok(BranchLabel::Red),
            other => Err(Error::Config(format!(
                "unknown branch {other:?}, expected blue|red"
            ))),
        }
    }
}

impl std::fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyStateBranch {
    pub label: BranchLabel,
    /// Mirror displacement from the resting length (positive shortens the cavity), m.
    pub q: f64,
    /// Intracavity photon number.
    pub n_c: f64,
    /// `omega_c - omega_l`, rad/s.
    pub delta: f64,
    /// Cavity resonance `j pi c / (L - q)`, rad/s.
    pub omega_c: f64,
    /// Real coherent amplitude, `sqrt(n_c)`.
    pub alpha: f64,
    /// Steady-state momentum, identically zero.
    pub p: f64,
}

/// Pieces shared by every closed-form expression.
struct ClosedForm {
    derived: DerivedScalars,
    /// `c g m j pi = m g (j pi c)`.
    weight_scale: f64,
    /// `kappa^2 + 4 omega_l^2`.
    bracket: f64,
    /// `n_in kappa hbar`.
    drive: f64,
    discriminant: f64,
}

impl ClosedForm {
    fn new(params: &SystemParams) -> Result<Self> {
        let derived = params.derived()?;
        let k = params.kappa;
        let w = derived.omega_l;
        let weight_scale = params.weight() * derived.mode_scale;
        // 4 w^2 (1 + (k / 2w)^2): kappa^2 is ~1e-16 of 4 w^2 and only matters
        // through the -kappa^2 term of the discriminant.
        let ratio = k / (2.0 * w);
        let bracket = 4.0 * w * w * ratio.mul_add(ratio, 1.0);
        let drive = derived.n_in * k * params.constants.hbar;
        let discriminant = drive.mul_add(bracket, -weight_scale * k * k);
        Ok(ClosedForm {
            derived,
            weight_scale,
            bracket,
            drive,
            discriminant,
        })
    }

    fn root(&self, params: &SystemParams) -> Result<f64> {
        if self.discriminant < 0.0 {
            return Err(Error::NoRealSteadyState {
                discriminant: self.discriminant,
                p_tilde: params.p_tilde,
            });
        }
        Ok((self.weight_scale * self.discriminant).sqrt())
    }

    fn detuning(&self, params: &SystemParams, label: BranchLabel) -> Result<f64> {
        let root = self.root(params)?;
        let w = self.derived.omega_l;
        let num = 2.0 * self.drive * w + label.root_sign() * root;
        let den = 2.0 * self.weight_scale - 2.0 * self.drive;
        Ok(num / den)
    }

    fn photon_number(&self, params: &SystemParams, label: BranchLabel) -> Result<f64> {
        let root = self.root(params)?;
        let k = params.kappa;
        let w = self.derived.omega_l;
        let num = -4.0 * self.weight_scale * (k * k - 4.0 * w * w)
            + 4.0 * self.drive * self.bracket
            - label.root_sign() * 16.0 * w * root;
        Ok(num / (params.constants.hbar * self.bracket * self.bracket))
    }
}

/// Value under the square root of the closed-form steady states,
/// `-c g j m pi kappa^2 + n_in kappa hbar (kappa^2 + 4 omega_l^2)`.
pub fn discriminant(params: &SystemParams) -> Result<f64> {
    Ok(ClosedForm::new(params)?.discriminant)
}

/// Detuning of one branch straight from its closed form.
pub fn detuning_closed_form(params: &SystemParams, label: BranchLabel) -> Result<f64> {
    ClosedForm::new(params)?.detuning(params, label)
}

pub fn solve_branch(params: &SystemParams, label: BranchLabel) -> Result<SteadyStateBranch> {
    let cf = ClosedForm::new(params)?;
    let delta = cf.detuning(params, label)?;
    let n_c = cf.photon_number(params, label)?;
    let d = &cf.derived;
    // L - 4 j pi c (w -+ sqrt) / (kappa^2 + 4 w^2), rearranged so the two
    // ~L terms never get subtracted.
    let q = d.displacement_for(params.cavity_length, delta);
    Ok(SteadyStateBranch {
        label,
        q,
        n_c,
        delta,
        omega_c: d.omega_l + delta,
        alpha: n_c.sqrt(),
        p: 0.0,
    })
}

/// Both steady states, blue first.
pub fn solve_branches(params: &SystemParams) -> Result<(SteadyStateBranch, SteadyStateBranch)> {
    Ok((
        solve_branch(params, BranchLabel::Blue)?,
        solve_branch(params, BranchLabel::Red)?,
    ))
}

/// Normalized residuals of the three steady-state equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    /// `([kappa^2/4 + Delta^2] N_c - kappa N_in) / (kappa N_in)`.
    pub photon_balance: f64,
    pub momentum: f64,
    /// `(m g - hbar omega_c^2 N_c / (j pi c)) / (m g)`.
    pub force_balance: f64,
}

impl Residual {
    pub fn max_abs(&self) -> f64 {
        self.photon_balance
            .abs()
            .max(self.momentum.abs())
            .max(self.force_balance.abs())
    }
}

/// Residuals evaluated from `(q, N_c, p)` alone; the stored detuning is not used.
pub fn residual(branch: &SteadyStateBranch, params: &SystemParams) -> Result<Residual> {
    let d = params.derived()?;
    let delta = d.detuning_at(params.cavity_length, branch.q);
    let omega_c = d.omega_l + delta;
    let k = params.kappa;
    let drive = k * d.n_in;
    let photon = (0.25 * k * k + delta * delta) * branch.n_c;
    let mg = params.weight();
    let lift = params.constants.hbar * omega_c * omega_c * branch.n_c / d.mode_scale;
    Ok(Residual {
        photon_balance: (photon - drive) / drive,
        momentum: branch.p,
        force_balance: (mg - lift) / mg,
    })
}

/// Dimensionless power at which the discriminant vanishes.
///
/// The discriminant is linear in `n_in`, so the root is
/// `p_min = j pi c kappa omega_l / (c (kappa^2 + 4 omega_l^2))`. Ignores
/// `params.p_tilde`.
pub fn threshold_power(params: &SystemParams) -> Result<f64> {
    let cf = ClosedForm::new(params)?;
    let p_min = cf.derived.mode_scale * params.kappa * cf.derived.omega_l
        / (params.constants.c * cf.bracket);
    if !(p_min > 0.0 && p_min <= 1.0) {
        return Err(Error::ThresholdNotFound(format!(
            "analytic root p_tilde = {p_min:e} lies outside (0, 1]"
        )));
    }
    Ok(p_min)
}

/// Same threshold by bisection on the sign of the discriminant over `(0, 1]`,
/// to `rel_tol` relative width.
pub fn threshold_power_bisection(params: &SystemParams, rel_tol: f64) -> Result<f64> {
    let d_at = |p: f64| discriminant(&params.with_p_tilde(p));
    let mut hi = 1.0;
    if d_at(hi)? <= 0.0 {
        return Err(Error::ThresholdNotFound(
            "discriminant is not positive at p_tilde = 1".into(),
        ));
    }
    let mut lo = hi;
    // walk down by decades to bracket the sign change without touching 0
    loop {
        lo *= 0.1;
        if lo < 1e-300 {
            return Err(Error::ThresholdNotFound(
                "no negative discriminant found in (0, 1]".into(),
            ));
        }
        if d_at(lo)? < 0.0 {
            break;
        }
        hi = lo;
    }
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if d_at(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
