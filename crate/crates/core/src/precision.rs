//! Double-double re-evaluation of the determinants behind the purity
//! certificate and the entropy of entanglement.
//!
//! Near the entanglement peak the covariance entries reach ~1e8 while its
//! smallest eigenvalues are ~1e-9, so `det(2 sigma)` computed from an `f64`
//! matrix carries rounding noise of order 1e-5. Repeating the pipeline with
//! ~32 significant digits removes that noise.

use num_complex::Complex;
use num_traits::{One, Zero};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::gaussian::{case_table, Matrix8, entanglement_from_determinants, EntanglementResult};
use crate::linearization::LinearizedModel;
use crate::spectra::coefficients_at;

type Dd = TwoFloat;
type Mat4 = [[Complex<Dd>; 4]; 4];

fn dd(x: f64) -> Dd {
    Dd::from(x)
}

/// `1 / x` by one Newton step from the `f64` reciprocal. `TwoFloat`'s own
/// quotient forms its residual without a fused multiply-add and is only
/// accurate to about 1e-17.
fn recip(x: Dd) -> Dd {
    let r0 = x.hi().recip();
    let e = Dd::one() - x * r0;
    e * r0 + r0
}

fn recip_c(z: Complex<Dd>) -> Complex<Dd> {
    let n = recip(z.norm_sqr());
    Complex::new(z.re * n, -z.im * n)
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(mut m: Mat4) -> Option<Mat4> {
    let mut inv = [[Complex::<Dd>::zero(); 4]; 4];
    for (k, row) in inv.iter_mut().enumerate() {
        row[k] = Complex::one();
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&a, &b| {
            m[a][col]
                .norm_sqr()
                .partial_cmp(&m[b][col].norm_sqr())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[piv][col].norm_sqr() == Dd::zero() {
            return None;
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = recip_c(m[col][col]);
        for c in 0..4 {
            m[col][c] *= p;
            inv[col][c] *= p;
        }
        for r in (0..4).filter(|&r| r != col) {
            let f = m[r][col];
            for c in 0..4 {
                m[r][c] -= f * m[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    Some(inv)
}

fn determinant<const N: usize>(mut a: [[Dd; N]; N]) -> Dd {
    let mut det = Dd::one();
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&x, &y| {
                a[x][col]
                    .abs()
                    .partial_cmp(&a[y][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[piv][col] == Dd::zero() {
            return Dd::zero();
        }
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..N {
            let f = a[r][col] * recip(a[col][col]);
            for c in col..N {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

fn resolvent(model: &LinearizedModel, omega: f64) -> Result<Mat4> {
    let mut m = [[Complex::<Dd>::zero(); 4]; 4];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, z) in row.iter_mut().enumerate() {
            let a = model.drift[(r, c)];
            *z = Complex::new(-dd(a.re), -dd(a.im));
        }
        row[r].im -= dd(omega);
    }
    invert(m).ok_or(Error::IllConditioned {
        omega,
        condition: f64::INFINITY,
    })
}

fn sigma(model: &LinearizedModel, omega: f64) -> Result<[[Dd; 8]; 8]> {
    let (kappa, gamma) = (dd(model.kappa), dd(model.gamma));
    let plus = resolvent(model, omega)?;
    let minus = resolvent(model, -omega)?;
    let pos = coefficients_at(|r, c| plus[r][c], kappa, gamma);
    let neg = coefficients_at(|r, c| minus[r][c], kappa, gamma);
    Ok(case_table(&pos, &neg))
}

/// Covariance matrix at sideband `omega`, evaluated in double-double
/// arithmetic and rounded to `f64`.
pub fn covariance(model: &LinearizedModel, omega: f64) -> Result<Matrix8> {
    let s = sigma(model, omega)?;
    Ok(Matrix8::from_fn(|r, c| f64::from(s[r][c])))
}

fn scaled_block<const N: usize>(s: &[[Dd; 8]; 8], offset: usize) -> [[Dd; N]; N] {
    let two = dd(2.0);
    let mut b = [[Dd::zero(); N]; N];
    for (r, row) in b.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = s[offset + r][offset + c] * two;
        }
    }
    b
}

/// Determinants of `2 sigma` and of its two reduced blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Determinants {
    pub full: f64,
    pub mirror: f64,
    pub cavity: f64,
    /// `|det(2 sigma) - 1|`, taken before rounding to `f64`.
    pub purity_deviation: f64,
}

/// Determinants at sideband `omega`, evaluated in double-double arithmetic
/// from the drift matrix of `model`.
pub fn determinants(model: &LinearizedModel, omega: f64) -> Result<Determinants> {
    let s = sigma(model, omega)?;
    let full = determinant(scaled_block::<8>(&s, 0));
    Ok(Determinants {
        full: f64::from(full),
        mirror: f64::from(determinant(scaled_block::<4>(&s, 0))),
        cavity: f64::from(determinant(scaled_block::<4>(&s, 4))),
        purity_deviation: f64::from(full - Dd::one()).abs(),
    })
}

/// `|det(2 sigma) - 1|` at sideband `omega`.
pub fn purity_deviation(model: &LinearizedModel, omega: f64) -> Result<f64> {
    Ok(determinants(model, omega)?.purity_deviation)
}

/// `det(2 sigma_b)` and `det(2 sigma_a)` at sideband `omega`.
pub fn reduced_determinants(model: &LinearizedModel, omega: f64) -> Result<(f64, f64)> {
    let d = determinants(model, omega)?;
    Ok((d.mirror, d.cavity))
}

/// Entropy of entanglement from the double-double reduced determinants.
pub fn entanglement(model: &LinearizedModel, omega: f64) -> Result<EntanglementResult> {
    let d = determinants(model, omega)?;
    entanglement_from_determinants(d.mirror, d.cavity)
}
