//! Cosine/sine sideband covariance matrix of the two output fields and the
//! Gaussian-state quantities built on it.
//!
//! Basis order: `(Q^C_b, P^C_b, Q^S_b, P^S_b, Q^C_a, P^C_a, Q^S_a, P^S_a)`,
//! vacuum units (vacuum variance 1/2), spectral densities per unit bandwidth.

use nalgebra::{Matrix4, SMatrix};
use num_complex::Complex;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::spectra::{Coefficients, IoCoefficients, OutputCoefficients, MINUS, PLUS};

pub type Matrix8 = SMatrix<f64, 8, 8>;

/// Tolerated asymmetry of the assembled matrix, relative to its largest entry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Tolerated cosine/sine variance mismatch, relative to the largest entry.
pub const CS_TOLERANCE: f64 = 1e-10;
/// `det(2 sigma)` may undershoot 1 by this much before the state is rejected.
pub const DET_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandCovariance {
    pub omega: f64,
    pub sigma: Matrix8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementResult {
    pub e2_from_a: f64,
    pub e2_from_b: f64,
    pub discrepancy: f64,
}

impl EntanglementResult {
    /// Reported value, taken from the mirror block.
    pub fn value(&self) -> f64 {
        self.e2_from_b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureVariances {
    pub q_b: f64,
    pub p_b: f64,
    pub q_a: f64,
    pub p_a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Submatrices {
    pub mirror: Matrix4<f64>,
    pub cavity: Matrix4<f64>,
    /// Mirror rows, cavity columns.
    pub cross: Matrix4<f64>,
}

fn output<T>(c: &OutputCoefficients<T>, mode: usize) -> &Coefficients<T> {
    if mode == 0 {
        &c.mirror
    } else {
        &c.cavity
    }
}

/// `B_i^al B_j^be* + A_i^al A_j^be*`.
fn overlap<T: Float>(
    c: &OutputCoefficients<T>,
    i: usize,
    al: usize,
    j: usize,
    be: usize,
) -> Complex<T> {
    let (x, y) = (output(c, i), output(c, j));
    x.b_in[al] * y.b_in[be].conj() + x.a_in[al] * y.a_in[be].conj()
}

fn max_abs(m: &Matrix8) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Element formulas of the covariance matrix in terms of the coefficients at
/// `+omega` (`pos`) and `-omega` (`neg`).
pub(crate) fn case_table<T: Float>(
    pos: &OutputCoefficients<T>,
    neg: &OutputCoefficients<T>,
) -> [[T; 8]; 8] {
    let quarter = T::from(0.25).unwrap();
    let mut s = [[T::zero(); 8]; 8];
    for i in 0..2 {
        for j in 0..2 {
            let f = |al: usize, be: usize| (overlap(pos, i, al, j, be), overlap(neg, i, al, j, be));
            let (pp, pp_) = f(PLUS, PLUS);
            let (mm, mm_) = f(MINUS, MINUS);
            let (pm, pm_) = f(PLUS, MINUS);
            let (mp, mp_) = f(MINUS, PLUS);

            // indices within a mode: QC = 0, PC = 1, QS = 2, PS = 3
            let mut e = [[T::zero(); 4]; 4];
            e[0][0] = (pp.re + pp_.re) * quarter;
            e[2][2] = e[0][0];
            e[0][2] = (pp_.im - pp.im) * quarter;
            e[2][0] = -e[0][2];

            e[1][1] = (mm.re + mm_.re) * quarter;
            e[3][3] = e[1][1];
            e[1][3] = (mm_.im - mm.im) * quarter;
            e[3][1] = -e[1][3];

            e[0][1] = -(pm.im + pm_.im) * quarter;
            e[2][3] = e[0][1];
            e[0][3] = (pm_.re - pm.re) * quarter;
            e[2][1] = -e[0][3];

            e[1][0] = (mp.im + mp_.im) * quarter;
            e[3][2] = e[1][0];
            e[1][2] = (mp.re - mp_.re) * quarter;
            e[3][0] = -e[1][2];

            for (p, row) in e.iter().enumerate() {
                for (q, v) in row.iter().enumerate() {
                    s[4 * i + p][4 * j + q] = *v;
                }
            }
        }
    }
    s
}

/// Assembles `sigma` from the input-output coefficients at `±omega`.
pub fn covariance(io: &IoCoefficients) -> Result<SidebandCovariance> {
    let e = case_table(&io.pos, &io.neg);
    let s = Matrix8::from_fn(|r, c| e[r][c]);
    let asym = max_abs(&(s - s.transpose())) / max_abs(&s).max(1.0);
    if !(asym <= SYMMETRY_TOLERANCE) {
        return Err(Error::Consistency {
            what: "covariance symmetry",
            deviation: asym,
        });
    }
    Ok(SidebandCovariance {
        omega: io.omega,
        sigma: (s + s.transpose()) * 0.5,
    })
}

pub fn submatrices(sigma: &Matrix8) -> Submatrices {
    Submatrices {
        mirror: sigma.fixed_view::<4, 4>(0, 0).into_owned(),
        cavity: sigma.fixed_view::<4, 4>(4, 4).into_owned(),
        cross: sigma.fixed_view::<4, 4>(0, 4).into_owned(),
    }
}

/// Inverse of [`submatrices`].
pub fn assemble(blocks: &Submatrices) -> Matrix8 {
    let mut s = Matrix8::zeros();
    s.fixed_view_mut::<4, 4>(0, 0).copy_from(&blocks.mirror);
    s.fixed_view_mut::<4, 4>(4, 4).copy_from(&blocks.cavity);
    s.fixed_view_mut::<4, 4>(0, 4).copy_from(&blocks.cross);
    s.fixed_view_mut::<4, 4>(4, 0)
        .copy_from(&blocks.cross.transpose());
    s
}

fn entropy_of(det: f64) -> Result<f64> {
    if !(det >= 1.0 - DET_TOLERANCE) {
        return Err(Error::UnphysicalState { det });
    }
    Ok(0.5 * det.max(1.0).log2())
}

/// Rényi-2 entropy of entanglement (ebits) from both reduced states.
pub fn entanglement_entropy(sigma: &Matrix8) -> Result<EntanglementResult> {
    let blocks = submatrices(sigma);
    entanglement_from_determinants(
        (blocks.mirror * 2.0).determinant(),
        (blocks.cavity * 2.0).determinant(),
    )
}

/// Same, from `det(2 sigma_b)` and `det(2 sigma_a)`.
pub fn entanglement_from_determinants(
    det_mirror: f64,
    det_cavity: f64,
) -> Result<EntanglementResult> {
    let e2_from_b = entropy_of(det_mirror)?;
    let e2_from_a = entropy_of(det_cavity)?;
    Ok(EntanglementResult {
        e2_from_a,
        e2_from_b,
        discrepancy: (e2_from_a - e2_from_b).abs(),
    })
}

/// Axis variances; cosine and sine entries must agree.
pub fn quadrature_variances(sigma: &Matrix8) -> Result<QuadratureVariances> {
    let d = sigma.diagonal();
    let scale = max_abs(sigma).max(1.0);
    let deviation = [(0, 2), (1, 3), (4, 6), (5, 7)]
        .iter()
        .map(|&(c, s)| (d[c] - d[s]).abs())
        .fold(0.0, f64::max)
        / scale;
    if !(deviation <= CS_TOLERANCE) {
        return Err(Error::Consistency {
            what: "cosine/sine variance equality",
            deviation,
        });
    }
    Ok(QuadratureVariances {
        q_b: d[0],
        p_b: d[1],
        q_a: d[4],
        p_a: d[5],
    })
}

/// `(min, max)` eigenvalue of a 4x4 block.
pub fn max_squeezing(block: &Matrix4<f64>) -> (f64, f64) {
    let ev = block.symmetric_eigenvalues();
    (ev.min(), ev.max())
}

/// `|det(2 sigma) - 1|`.
pub fn purity_check(sigma: &Matrix8) -> f64 {
    ((sigma * 2.0).determinant() - 1.0).abs()
}

/// Pairs `(Q, P)` within each of the four quadrature pairs.
pub fn symplectic_form() -> Matrix8 {
    let mut w = Matrix8::zeros();
    for k in 0..4 {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

/// Smallest eigenvalue of the Hermitian matrix `sigma + (i/2) Omega`.
pub fn uncertainty_min_eigenvalue(sigma: &Matrix8) -> f64 {
    let w = symplectic_form();
    let h =
        SMatrix::<Complex<f64>, 8, 8>::from_fn(|r, c| Complex::new(sigma[(r, c)], 0.5 * w[(r, c)]));
    h.symmetric_eigenvalues().min()
}

/// `D sigma D` with `D` flipping the sine quadratures, which is `sigma(-omega)`.
pub fn reflect(sigma: &Matrix8) -> Matrix8 {
    let d = Matrix8::from_diagonal(&nalgebra::SVector::<f64, 8>::from_column_slice(&[
        1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0,
    ]));
    d * sigma * d
}
