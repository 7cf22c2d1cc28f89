//! Frequency-domain solution of the linearized dynamics.
//!
//! Operators are Fourier transformed with the convention `a†(w) = a(-w)†`, so
//! the fluctuation vector at sideband `w` is `T(w) (sqrt(Gamma) b_in,
//! sqrt(Gamma) b_in†, sqrt(kappa) a_in, sqrt(kappa) a_in†)` with
//! `T(w) = (-i w I - A)^-1`. The outputs follow from `o_out = o_in - sqrt(rate) o`.

use nalgebra::Matrix4;
use num_complex::{Complex, Complex64};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linearization::DriftMatrix;

pub const MAX_CONDITION: f64 = 1e12;
/// Largest tolerated mismatch between the direct and the starred coefficient forms.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferData {
    pub omega: f64,
    /// `T(omega)`.
    pub plus: Matrix4<Complex64>,
    /// `T(-omega)`.
    pub minus: Matrix4<Complex64>,
    /// `||M T - I|| / (||M|| ||T||)`, worst of the two frequencies.
    pub residual: f64,
    /// `||M|| ||T||` in the infinity norm, worst of the two frequencies.
    pub condition: f64,
}

fn norm_inf(m: &Matrix4<Complex64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn resolvent(a: &DriftMatrix, omega: f64) -> Result<(Matrix4<Complex64>, f64, f64)> {
    let m = Matrix4::<Complex64>::identity() * Complex64::new(0.0, -omega) - a;
    let t = m.lu().try_inverse().ok_or(Error::IllConditioned {
        omega,
        condition: f64::INFINITY,
    })?;
    let (nm, nt) = (norm_inf(&m), norm_inf(&t));
    let condition = nm * nt;
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { omega, condition });
    }
    let residual = norm_inf(&(m * t - Matrix4::identity())) / condition;
    Ok((t, residual, condition))
}

/// `T(omega)` and `T(-omega)` with their inverse-residual certificates.
pub fn transfer_matrix(a: &DriftMatrix, omega: f64) -> Result<TransferData> {
    let (plus, r1, c1) = resolvent(a, omega)?;
    let (minus, r2, c2) = resolvent(a, -omega)?;
    Ok(TransferData {
        omega,
        plus,
        minus,
        residual: r1.max(r2),
        condition: c1.max(c2),
    })
}

/// Sign index of the quadrature combination `X^± = (o ± o†) / sqrt(2)`:
/// `X^+` is the position quadrature, `X^-` is `i` times the momentum one.
pub const PLUS: usize = 0;
pub const MINUS: usize = 1;
const SIGNS: [f64; 2] = [1.0, -1.0];

/// Coefficients of `b_in(w)` and `a_in(w)` in `sqrt(2) X^±` of one output,
/// indexed by [`PLUS`] / [`MINUS`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coefficients<T = f64> {
    pub b_in: [Complex<T>; 2],
    pub a_in: [Complex<T>; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OutputCoefficients<T = f64> {
    pub mirror: Coefficients<T>,
    pub cavity: Coefficients<T>,
}

/// The eight coefficient functions evaluated at `+omega` and `-omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IoCoefficients {
    pub omega: f64,
    pub pos: OutputCoefficients,
    pub neg: OutputCoefficients,
    /// Worst relative mismatch against the starred forms built from the
    /// `b_in†` / `a_in†` columns of `T`.
    pub consistency_deviation: f64,
}

/// Direct definitions from the `b_in` and `a_in` columns of `T(w)`.
pub(crate) fn coefficients_at<T: Float>(
    t: impl Fn(usize, usize) -> Complex<T>,
    kappa: T,
    gamma: T,
) -> OutputCoefficients<T> {
    let cross = (kappa * gamma).sqrt();
    let one = Complex::new(T::one(), T::zero());
    let signs = [T::one(), -T::one()];
    let mut out = OutputCoefficients {
        mirror: Coefficients {
            b_in: [one; 2],
            a_in: [one; 2],
        },
        cavity: Coefficients {
            b_in: [one; 2],
            a_in: [one; 2],
        },
    };
    for (k, &s) in signs.iter().enumerate() {
        out.cavity.b_in[k] = -(t(2, 0) + t(3, 0).scale(s)).scale(cross);
        out.cavity.a_in[k] = one - (t(2, 2) + t(3, 2).scale(s)).scale(kappa);
        out.mirror.b_in[k] = one - (t(0, 0) + t(1, 0).scale(s)).scale(gamma);
        out.mirror.a_in[k] = -(t(0, 2) + t(1, 2).scale(s)).scale(cross);
    }
    out
}

/// Compares `± X(-w)*` against the `b_in†` / `a_in†` columns of `T(w)`.
fn starred_deviation(
    t: &Matrix4<Complex64>,
    mirrored: &OutputCoefficients,
    kappa: f64,
    gamma: f64,
) -> f64 {
    let cross = (kappa * gamma).sqrt();
    let mut worst = 0.0f64;
    let mut check = |lhs: Complex64, rhs: Complex64| {
        worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
    };
    for (k, &s) in SIGNS.iter().enumerate() {
        let sc = Complex64::new(s, 0.0);
        check(
            -(t[(2, 1)] + t[(3, 1)] * s) * cross,
            mirrored.cavity.b_in[k].conj() * s,
        );
        check(
            -((t[(2, 3)] + t[(3, 3)] * s) * kappa - sc),
            mirrored.cavity.a_in[k].conj() * s,
        );
        check(
            -((t[(0, 1)] + t[(1, 1)] * s) * gamma - sc),
            mirrored.mirror.b_in[k].conj() * s,
        );
        check(
            -(t[(0, 3)] + t[(1, 3)] * s) * cross,
            mirrored.mirror.a_in[k].conj() * s,
        );
    }
    worst
}

/// Output quadrature coefficients at `±omega`, cross-checked against the
/// starred identities.
pub fn io_coefficients(t: &TransferData, kappa: f64, gamma: f64) -> Result<IoCoefficients> {
    let pos = coefficients_at(|r, c| t.plus[(r, c)], kappa, gamma);
    let neg = coefficients_at(|r, c| t.minus[(r, c)], kappa, gamma);
    let deviation = starred_deviation(&t.plus, &neg, kappa, gamma)
        .max(starred_deviation(&t.minus, &pos, kappa, gamma));
    if !(deviation <= CONSISTENCY_TOLERANCE) {
        return Err(Error::Consistency {
            what: "starred input-output coefficients",
            deviation,
        });
    }
    Ok(IoCoefficients {
        omega: t.omega,
        pos,
        neg,
        consistency_deviation: deviation,
    })
}

/// Largest deviation of the output commutators `[o, o†] = 1` and
/// `[b_out, a_out†] = 0` at sideband `T`'s frequency,
/// relative to the summed squared coefficient magnitudes (the individual
/// terms reach ~1e5 near the mechanical resonance while their difference is 1).
///
/// Each output is written over `(b_in(w), b_in(-w)†, a_in(w), a_in(-w)†)`.
pub fn commutator_defect(t: &Matrix4<Complex64>, kappa: f64, gamma: f64) -> f64 {
    type Row = ([Complex64; 2], [Complex64; 2]);
    let one = Complex64::new(1.0, 0.0);
    let cross = (kappa * gamma).sqrt();
    // (annihilator coefficients, creator coefficients) over (b, a)
    let mirror: Row = (
        [one - t[(0, 0)] * gamma, -t[(0, 2)] * cross],
        [-t[(0, 1)] * gamma, -t[(0, 3)] * cross],
    );
    let cavity: Row = (
        [-t[(2, 0)] * cross, one - t[(2, 2)] * kappa],
        [-t[(2, 1)] * cross, -t[(2, 3)] * kappa],
    );
    let weight = |x: &Row| x.0.iter().chain(&x.1).map(|z| z.norm_sqr()).sum::<f64>();
    let bracket_dag = |x: &Row, y: &Row| {
        (0..2)
            .map(|k| x.0[k] * y.0[k].conj() - x.1[k] * y.1[k].conj())
            .sum::<Complex64>()
    };
    let (wm, wc) = (weight(&mirror), weight(&cavity));
    [
        (bracket_dag(&mirror, &mirror) - one).norm() / wm,
        (bracket_dag(&cavity, &cavity) - one).norm() / wc,
        bracket_dag(&mirror, &cavity).norm() / (wm * wc).sqrt(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}
