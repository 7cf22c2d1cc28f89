//! Independent reference for the sideband covariance matrix.
//!
//! Every output quadrature is written as an explicit coefficient vector over
//! the vacuum input modes `(b_in(w), b_in(-w), a_in(w), a_in(-w))` and their
//! adjoints, and second moments are taken directly from the vectors. Nothing
//! here uses the library's coefficient functions or element formulas.

#![allow(dead_code, clippy::needless_range_loop)]

use levmirror::linearization::LinearizedModel;
use levmirror::operating_point::OperatingPoint;
use levmirror::params::SystemParams;
use levmirror::steady_state::BranchLabel;
use nalgebra::SMatrix;
use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use twofloat::TwoFloat;

pub type Matrix8 = SMatrix<f64, 8, 8>;

/// The reference runs in double-double arithmetic so that its own rounding
/// stays far below the tolerances it is used to check.
type R = TwoFloat;
type C = Complex<R>;

fn r(x: f64) -> R {
    R::from(x)
}

fn c(re: f64, im: f64) -> C {
    C::new(r(re), r(im))
}

fn to_c64(z: C) -> Complex64 {
    Complex64::new(f64::from(z.re), f64::from(z.im))
}

/// `u . e + w . e†` over the four input annihilators `e`.
#[derive(Clone, Copy, Debug)]
pub struct Op {
    pub u: [C; 4],
    pub w: [C; 4],
}

impl Op {
    fn zero() -> Self {
        Op {
            u: [C::zero(); 4],
            w: [C::zero(); 4],
        }
    }

    fn add(self, o: Op, s: C) -> Op {
        let mut r = self;
        for k in 0..4 {
            r.u[k] += s * o.u[k];
            r.w[k] += s * o.w[k];
        }
        r
    }

    fn scale(self, s: C) -> Op {
        Op::zero().add(self, s)
    }
}

/// `<x y + y x> / 2` in the vacuum, which only pairs `e_k` with `e_k†`.
fn sym_moment(x: &Op, y: &Op) -> C {
    let mut acc = C::zero();
    for k in 0..4 {
        acc = acc + x.u[k] * y.w[k] + y.u[k] * x.w[k];
    }
    acc * c(0.5, 0.0)
}

/// `[x, y]`.
fn commutator(x: &Op, y: &Op) -> C {
    let mut acc = C::zero();
    for k in 0..4 {
        acc = acc + x.u[k] * y.w[k] - y.u[k] * x.w[k];
    }
    acc
}

/// `(-i f I - A)^-1` by Gauss-Jordan elimination with partial pivoting.
fn resolvent(model: &LinearizedModel, f: f64) -> [[C; 4]; 4] {
    let mut m = [[C::zero(); 4]; 4];
    let mut inv = [[C::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let a = model.drift[(i, j)];
            m[i][j] = c(-a.re, -a.im);
        }
        m[i][i] -= c(0.0, f);
        inv[i][i] = C::one();
    }
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&a, &b| f64::from(m[a][col].norm_sqr()).total_cmp(&f64::from(m[b][col].norm_sqr())))
            .unwrap();
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = C::one() / m[col][col];
        for k in 0..4 {
            m[col][k] *= p;
            inv[col][k] *= p;
        }
        for row in (0..4).filter(|&row| row != col) {
            let f = m[row][col];
            for k in 0..4 {
                m[row][k] -= f * m[col][k];
                inv[row][k] -= f * inv[col][k];
            }
        }
    }
    inv
}

/// Output operators `(b_out, b_out†, a_out, a_out†)` at frequency `f`.
/// `idx` maps (b(f), b(-f), a(f), a(-f)) onto the basis slots.
fn outputs(model: &LinearizedModel, f: f64, idx: [usize; 4]) -> [Op; 4] {
    let t = resolvent(model, f);
    let (sg, sk) = (r(model.gamma).sqrt(), r(model.kappa).sqrt());
    let (sg, sk) = (C::new(sg, R::zero()), C::new(sk, R::zero()));
    // input vector (sqrt(G) b_in(f), sqrt(G) b_in(-f)†, sqrt(k) a_in(f), sqrt(k) a_in(-f)†)
    let internal = |row: usize| {
        let mut o = Op::zero();
        o.u[idx[0]] += t[row][0] * sg;
        o.w[idx[1]] += t[row][1] * sg;
        o.u[idx[2]] += t[row][2] * sk;
        o.w[idx[3]] += t[row][3] * sk;
        o
    };
    let mut b = internal(0).scale(-sg);
    b.u[idx[0]] += C::one();
    let mut bd = internal(1).scale(-sg);
    bd.w[idx[1]] += C::one();
    let mut a = internal(2).scale(-sk);
    a.u[idx[2]] += C::one();
    let mut ad = internal(3).scale(-sk);
    ad.w[idx[3]] += C::one();
    [b, bd, a, ad]
}

/// The eight quadratures `(QC_b, PC_b, QS_b, PS_b, QC_a, PC_a, QS_a, PS_a)`.
pub fn quadratures(model: &LinearizedModel, omega: f64) -> [Op; 8] {
    let h = r(0.5).sqrt();
    let (re, im) = (C::new(h, R::zero()), C::new(R::zero(), h));
    let q = |o: Op, od: Op| o.scale(re).add(od, re);
    let p = |o: Op, od: Op| o.scale(-im).add(od, im);
    let pos = outputs(model, omega, [0, 1, 2, 3]);
    let neg = outputs(model, -omega, [1, 0, 3, 2]);
    let mut out = [Op::zero(); 8];
    for (m, base) in [(0usize, 0usize), (2, 4)] {
        let (qp, pp) = (q(pos[m], pos[m + 1]), p(pos[m], pos[m + 1]));
        let (qn, pn) = (q(neg[m], neg[m + 1]), p(neg[m], neg[m + 1]));
        out[base] = qp.scale(re).add(qn, re);
        out[base + 1] = pp.scale(re).add(pn, re);
        out[base + 2] = qp.scale(-im).add(qn, im);
        out[base + 3] = pp.scale(-im).add(pn, im);
    }
    out
}

/// Reference covariance and the largest imaginary part of any moment.
pub fn oracle_sigma(model: &LinearizedModel, omega: f64) -> (Matrix8, f64) {
    let x = quadratures(model, omega);
    let mut s = Matrix8::zeros();
    let mut worst_im = 0.0f64;
    for i in 0..8 {
        for j in 0..8 {
            let z = to_c64(sym_moment(&x[i], &x[j]));
            s[(i, j)] = z.re;
            worst_im = worst_im.max(z.im.abs());
        }
    }
    (s, worst_im)
}

/// Commutator matrix `[x_i, x_j]` of the oracle quadratures.
pub fn oracle_commutators(model: &LinearizedModel, omega: f64) -> SMatrix<Complex64, 8, 8> {
    let x = quadratures(model, omega);
    SMatrix::<Complex64, 8, 8>::from_fn(|i, j| to_c64(commutator(&x[i], &x[j])))
}

pub fn max_abs(m: &Matrix8) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Blue-branch operating point at `p_tilde` with paper parameters.
pub fn blue(p_tilde: f64) -> OperatingPoint {
    OperatingPoint::new(
        &SystemParams::paper().with_p_tilde(p_tilde),
        BranchLabel::Blue,
    )
    .expect("steady state")
}

/// Deterministic, well-spread sample of the unit square (additive recurrence
/// with the plastic-number increments).
pub fn spread_points(n: usize) -> Vec<(f64, f64)> {
    let g = 1.324_717_957_244_746_f64;
    let (a1, a2) = (1.0 / g, 1.0 / (g * g));
    (1..=n)
        .map(|k| ((0.5 + a1 * k as f64).fract(), (0.5 + a2 * k as f64).fract()))
        .collect()
}

pub fn log_lerp(lo: f64, hi: f64, t: f64) -> f64 {
    (lo.ln() + t * (hi.ln() - lo.ln())).exp()
}
