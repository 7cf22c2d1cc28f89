//! Experimental inputs, physical constants and the scalar quantities derived
//! from them.
//!
//! All quantities are SI. The dimensionless power `p_tilde` is the laser power
//! in units of `m g c`, the power needed to hold up a perfectly absorbing mass
//! `m`; at fixed `p_tilde` every frequency in the linearized model is
//! independent of the mass.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::steady_state::SteadyStateBranch;

/// Reduced Planck constant (CODATA 2018), J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Exact speed of light, m/s.
pub const C_EXACT: f64 = 299_792_458.0;
/// Rounded speed of light used for the published figures, m/s.
pub const C_PAPER: f64 = 3.0e8;
pub const G_STANDARD: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub g_default: f64,
}

impl PhysicalConstants {
    /// `c = 3e8 m/s`, matching the reference figures.
    pub const PAPER: PhysicalConstants = PhysicalConstants {
        hbar: HBAR,
        c: C_PAPER,
        g_default: G_STANDARD,
    };

    pub const CODATA: PhysicalConstants = PhysicalConstants {
        hbar: HBAR,
        c: C_EXACT,
        g_default: G_STANDARD,
    };

    pub fn validate(&self) -> Result<()> {
        positive("hbar", self.hbar)?;
        positive("c", self.c)?;
        positive("g_default", self.g_default)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::PAPER
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Resting cavity length `L`, m.
    pub cavity_length: f64,
    /// Laser wavelength, m.
    pub wavelength: f64,
    /// Cavity energy damping rate, rad/s.
    pub kappa: f64,
    /// Mirror damping rate, rad/s.
    pub gamma: f64,
    /// Gravitational acceleration, m/s^2.
    pub gravity: f64,
    /// Laser power in units of `m g c`.
    pub p_tilde: f64,
    /// Reference mirror mass, kg. Drops out of every reported frequency.
    pub mass: f64,
    pub constants: PhysicalConstants,
}

impl SystemParams {
    pub const DEFAULT_MASS: f64 = 1e-3;

    /// Table-top operating point: 5 cm cavity, 1050 nm laser,
    /// `kappa = 1.35e7`, `Gamma = 1e4`, `p_tilde = 0.0017`.
    pub fn paper() -> Self {
        SystemParams {
            cavity_length: 0.05,
            wavelength: 1050e-9,
            kappa: 1.35e7,
            gamma: 1e4,
            gravity: G_STANDARD,
            p_tilde: 0.0017,
            mass: Self::DEFAULT_MASS,
            constants: PhysicalConstants::PAPER,
        }
    }

    pub fn with_p_tilde(mut self, p_tilde: f64) -> Self {
        self.p_tilde = p_tilde;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        positive("cavity length L", self.cavity_length)?;
        positive("wavelength", self.wavelength)?;
        positive("kappa", self.kappa)?;
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::domain(format!(
                "Gamma must be finite and >= 0, got {:e}",
                self.gamma
            )));
        }
        positive("g", self.gravity)?;
        positive("p_tilde", self.p_tilde)?;
        positive("m_ref", self.mass)
    }

    pub fn derived(&self) -> Result<DerivedScalars> {
        self.validate()?;
        let c = self.constants.c;
        let omega_l = laser_frequency(self.wavelength, c)?;
        let j = mode_index(self.cavity_length, omega_l, c)?;
        let n_in = input_photon_rate(
            self.p_tilde,
            self.mass,
            self.gravity,
            omega_l,
            &self.constants,
        )?;
        Ok(DerivedScalars {
            omega_l,
            mode_index: j,
            mode_scale: j as f64 * PI * c,
            n_in,
            n_in_tilde: n_in / (self.mass * self.gravity),
            length_mismatch: self.cavity_length.mul_add(omega_l, -(j as f64 * PI * c)),
        })
    }

    /// Weight `m g` of the reference mass, N.
    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: ParamFile = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let params = SystemParams::from(&file);
        params.validate()?;
        Ok(params)
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::paper()
    }
}

/// Flat JSON parameter record, SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamFile {
    #[serde(rename = "L_m")]
    pub cavity_length: f64,
    #[serde(rename = "lambda_L_m")]
    pub wavelength: f64,
    #[serde(rename = "kappa_rad_s")]
    pub kappa: f64,
    #[serde(rename = "Gamma_rad_s")]
    pub gamma: f64,
    #[serde(rename = "g_m_s2", default = "default_g")]
    pub gravity: f64,
    #[serde(default = "default_p_tilde")]
    pub p_tilde: f64,
    #[serde(rename = "m_ref_kg", default = "default_mass")]
    pub mass: f64,
    #[serde(rename = "c_m_s", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

fn default_g() -> f64 {
    G_STANDARD
}

fn default_p_tilde() -> f64 {
    SystemParams::paper().p_tilde
}

fn default_mass() -> f64 {
    SystemParams::DEFAULT_MASS
}

impl From<&ParamFile> for SystemParams {
    fn from(f: &ParamFile) -> Self {
        let mut constants = PhysicalConstants::CODATA;
        if let Some(c) = f.c {
            constants.c = c;
        }
        SystemParams {
            cavity_length: f.cavity_length,
            wavelength: f.wavelength,
            kappa: f.kappa,
            gamma: f.gamma,
            gravity: f.gravity,
            p_tilde: f.p_tilde,
            mass: f.mass,
            constants,
        }
    }
}

impl From<&SystemParams> for ParamFile {
    fn from(p: &SystemParams) -> Self {
        ParamFile {
            cavity_length: p.cavity_length,
            wavelength: p.wavelength,
            kappa: p.kappa,
            gamma: p.gamma,
            gravity: p.gravity,
            p_tilde: p.p_tilde,
            mass: p.mass,
            c: Some(p.constants.c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScalars {
    /// Laser angular frequency, rad/s.
    pub omega_l: f64,
    /// Longitudinal mode index `j`, held fixed as the mirror moves.
    pub mode_index: u64,
    /// `j pi c`, so that the cavity resonance is `mode_scale / (L - q)`.
    pub mode_scale: f64,
    /// Input photon rate, photons/s.
    pub n_in: f64,
    /// `n_in / (m g)`.
    pub n_in_tilde: f64,
    /// `L * omega_l - j pi c`, evaluated with a single rounding. Detunings are
    /// eight orders of magnitude below `omega_l`, so they are built from this
    /// difference rather than from `omega_c - omega_l`.
    pub length_mismatch: f64,
}

impl DerivedScalars {
    /// Cavity resonance at displacement `q`.
    pub fn cavity_frequency(&self, cavity_length: f64, q: f64) -> f64 {
        self.mode_scale / (cavity_length - q)
    }

    /// `omega_c(q) - omega_l` without subtracting the two optical frequencies.
    pub fn detuning_at(&self, cavity_length: f64, q: f64) -> f64 {
        self.omega_l.mul_add(q, -self.length_mismatch) / (cavity_length - q)
    }

    /// Displacement at which the cavity resonance sits `delta` away from the laser.
    pub fn displacement_for(&self, cavity_length: f64, delta: f64) -> f64 {
        cavity_length.mul_add(delta, self.length_mismatch) / (self.omega_l + delta)
    }
}

/// `2 pi c / lambda`.
pub fn laser_frequency(wavelength: f64, c: f64) -> Result<f64> {
    positive("wavelength", wavelength)?;
    positive("c", c)?;
    Ok(2.0 * PI * c / wavelength)
}

/// Index of the cavity mode closest to the laser: `round(L omega_l / (pi c))`.
pub fn mode_index(cavity_length: f64, omega_l: f64, c: f64) -> Result<u64> {
    positive("cavity length L", cavity_length)?;
    positive("omega_l", omega_l)?;
    positive("c", c)?;
    let j = (cavity_length * omega_l / (PI * c)).round();
    if j < 1.0 {
        return Err(Error::domain(format!(
            "cavity of length {cavity_length:e} m supports no mode at omega_l = {omega_l:e} rad/s"
        )));
    }
    Ok(j as u64)
}

/// Photon rate carried by a beam of dimensionless power `p_tilde`.
pub fn input_photon_rate(
    p_tilde: f64,
    mass: f64,
    gravity: f64,
    omega_l: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    positive("p_tilde", p_tilde)?;
    positive("mass", mass)?;
    positive("g", gravity)?;
    positive("omega_l", omega_l)?;
    Ok(p_tilde * mass * gravity * constants.c / (constants.hbar * omega_l))
}

/// Inverse of [`input_photon_rate`].
pub fn dimensionless_power(
    n_in: f64,
    mass: f64,
    gravity: f64,
    omega_l: f64,
    constants: &PhysicalConstants,
) -> f64 {
    constants.hbar * n_in * omega_l / (mass * gravity * constants.c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    pub kappa_ratio: f64,
    pub detuning_ratio: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            kappa_ratio: 1e-3,
            detuning_ratio: 1e-3,
        }
    }
}

/// Good-cavity and single-mode diagnostics for one steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    /// `kappa / omega_l`.
    pub kappa_ratio: f64,
    /// `|Delta| (L - q) / (pi c)`: detuning over the free spectral range.
    pub detuning_ratio: f64,
    pub kappa_ok: bool,
    pub detuning_ok: bool,
}

impl RegimeReport {
    pub fn passes(&self) -> bool {
        self.kappa_ok && self.detuning_ok
    }
}

pub fn validate_regime(
    params: &SystemParams,
    branch: &SteadyStateBranch,
    thresholds: RegimeThresholds,
) -> Result<RegimeReport> {
    let omega_l = laser_frequency(params.wavelength, params.constants.c)?;
    let kappa_ratio = params.kappa / omega_l;
    let detuning_ratio =
        branch.delta.abs() * (params.cavity_length - branch.q) / (PI * params.constants.c);
    Ok(RegimeReport {
        kappa_ratio,
        detuning_ratio,
        kappa_ok: kappa_ratio < thresholds.kappa_ratio,
        detuning_ok: detuning_ratio < thresholds.detuning_ratio,
    })
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be finite and > 0, got {value:e}"
        )))
    }
}
