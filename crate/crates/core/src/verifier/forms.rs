//! The matrices behind the block quadratic-form bounds.
//!
//! `𝔸`, `𝔹` and `𝒞` depend on the point and are built in `f64`. The constant
//! matrices `A₁`–`A₅`, the D² test matrix and the D³ dominating matrix have
//! rational entries for `β = 3/4` and are built exactly.

use num_traits::{One, Zero};

use super::matrix::SymmetricMatrix;
use super::rational::{q, Rational, RationalMatrix};
use crate::bellman::BellmanPoint;
use crate::error::Result;
use crate::kernels::{kernel_raw, DomainParams};

/// Choice of sign in the `±` entries of the D² and D³ matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

fn product(a: f64, w: f64, v: f64, params: &DomainParams) -> Result<f64> {
    BellmanPoint::new(0.0, a, w, v).validate(params)
}

/// The (y, w, v)-block of the Hessian of `b₁` shared by `𝔸` and `𝔹`, without
/// the `(1,1)` and `(1,2)` entries.
fn b1_block(y: f64, w: f64, v: f64, t: f64, c: f64) -> SymmetricMatrix {
    let k = kernel_raw(t, c);
    let (f1, f2) = (k.phi_d1, k.phi_d2);
    let mut m = SymmetricMatrix::zeros(3);
    m.set(0, 2, 2.0 * y * w * w * f1);
    m.set(1, 1, 2.0 * y * y * v * f1 + y * y * t * v * f2);
    m.set(1, 2, 2.0 * y * y * w * f1 + y * y * t * w * f2);
    m.set(2, 2, y * y * w * w * w * f2);
    m
}

/// `𝔸(y, w, v)` in the variables `(e, r, s)`; its form is `ξ''_{b₁} − 80cwe²`.
pub fn build_matrix_a(y: f64, w: f64, v: f64, params: &DomainParams) -> Result<SymmetricMatrix> {
    let t = product(y, w, v, params)?;
    let c = params.c();
    let k = kernel_raw(t, c);
    let mut m = b1_block(y, w, v, t, c);
    m.set(0, 0, 2.0 * w * k.phi - 80.0 * c * w);
    m.set(0, 1, 2.0 * y * k.phi + 2.0 * y * t * k.phi_d1);
    Ok(m)
}

/// `𝔹(y, w, v)` in `(e, r, s)`: the Hessian of `b₁` with `4w` removed from the
/// `(1,1)` entry and the `e·r` coupling dropped.
pub fn build_matrix_b(y: f64, w: f64, v: f64, params: &DomainParams) -> Result<SymmetricMatrix> {
    let t = product(y, w, v, params)?;
    let c = params.c();
    let k = kernel_raw(t, c);
    let mut m = b1_block(y, w, v, t, c);
    m.set(0, 0, 2.0 * w * k.phi - 4.0 * w);
    Ok(m)
}

/// The `e·r` coefficient dropped from `𝔹`: `ξ''_{b₁} = ⟨𝔹u, u⟩ + 4we² + 2κ·er`
/// with `κ = 2y(φ + tφ')`.
pub fn b_cross_coefficient(y: f64, w: f64, v: f64, params: &DomainParams) -> Result<f64> {
    let t = product(y, w, v, params)?;
    let k = kernel_raw(t, params.c());
    Ok(2.0 * y * (k.phi + t * k.phi_d1))
}

/// `𝒞(x, w, v)` in `(d, r, s)`, written through `ψ̂ = 1/φ`: the Hessian of `b₆`
/// with `(1/16)cv⁻³x²` subtracted from the `(3,3)` entry. The `b₆` bound needs it
/// to be positive semidefinite.
pub fn build_matrix_c(x: f64, w: f64, v: f64, params: &DomainParams) -> Result<SymmetricMatrix> {
    let t = product(x, w, v, params)?;
    let c = params.c();
    let c2 = c * c;
    let k = kernel_raw(t, c);
    let (h0, h1, h2) = (k.psi_hat, k.psi_hat_d1, k.psi_hat_d2);
    let mut m = SymmetricMatrix::zeros(3);
    m.set(0, 0, 2.0 * c2 * h0 / v);
    m.set(0, 1, 2.0 * c2 * x * h1);
    m.set(0, 2, 2.0 * x * c2 * (h1 * w / v - h0 / (v * v)));
    m.set(1, 1, c2 * v * x * x * h2);
    m.set(1, 2, c2 * w * x * x * h2);
    let d = x * x * c2 * (2.0 * h0 / (v * v * v) - 2.0 * w * h1 / (v * v) + w * w * h2 / v)
        - c * x * x / (16.0 * v * v * v);
    m.set(2, 2, d);
    Ok(m)
}

/// The same matrix written through `ψ(t) = 1/(tφ(t))` and its derivatives.
pub fn build_matrix_c_psi(x: f64, w: f64, v: f64, params: &DomainParams) -> Result<SymmetricMatrix> {
    let t = product(x, w, v, params)?;
    let c = params.c();
    let c2 = c * c;
    let k = kernel_raw(t, c);
    let psi = k.psi;
    let psi1 = k.psi_hat_d1 / t - k.psi_hat / (t * t);
    let psi2 = k.psi_hat_d2 / t - 2.0 * k.psi_hat_d1 / (t * t) + 2.0 * k.psi_hat / (t * t * t);
    let mut m = SymmetricMatrix::zeros(3);
    m.set(0, 0, 2.0 * c2 * w * psi);
    m.set(0, 1, 2.0 * x * c2 * (psi + t * psi1));
    m.set(0, 2, 2.0 * x * c2 * w * w * psi1);
    m.set(1, 1, x * x * c2 * (2.0 * v * psi1 + w * v * v * psi2));
    m.set(1, 2, x * x * c2 * (2.0 * w * psi1 + w * w * v * psi2));
    m.set(2, 2, x * x * c2 * w * w * w * psi2 - c * x * x / (16.0 * v * v * v));
    Ok(m)
}

fn beta() -> Rational {
    q(3, 4)
}

fn sym(rows: [[Rational; 3]; 3]) -> RationalMatrix {
    RationalMatrix::new(rows.into_iter().map(|r| r.into_iter().collect()).collect())
}

/// `A₁` in `(E, D, R, S)`: `a_ij = a_i a_j − a_i δ_ij` with exponents
/// `a = (1, 1, 1−β, −β)`, so that
/// `ξ''_{b₄} = c^β xy w^{1−β} v^{−β} ⟨A₁(E, D, R, S), (E, D, R, S)⟩`.
pub fn a1() -> RationalMatrix {
    let b = beta();
    let a = [Rational::one(), Rational::one(), Rational::one() - &b, -b];
    let rows = (0..4)
        .map(|i| {
            (0..4)
                .map(|j| {
                    let mut x = &a[i] * &a[j];
                    if i == j {
                        x -= &a[i];
                    }
                    x
                })
                .collect()
        })
        .collect();
    RationalMatrix::new(rows)
}

/// `A₂` in `(D, S)`: `ξ''_{b₃} = c²x²v⁻¹ ⟨A₂(D, S), (D, S)⟩`.
pub fn a2() -> RationalMatrix {
    RationalMatrix::new(vec![vec![q(2, 1), q(-2, 1)], vec![q(-2, 1), q(2, 1)]])
}

/// `A₃(λ)` in `(D, R, S)`: `A₁` after the substitution `E = λD`.
pub fn a3(lambda: &Rational) -> RationalMatrix {
    let b = beta();
    let one = Rational::one();
    let l1 = &one + lambda;
    let bb = &b * (&b - &one);
    sym([
        [q(2, 1) * lambda, (&one - &b) * &l1, -(&b * &l1)],
        [(&one - &b) * &l1, bb.clone(), bb.clone()],
        [-(&b * &l1), bb, &b * (&b + &one)],
    ])
}

/// `A₄` in `(D, R, S)`: `A₂` padded with a zero `R` row and column.
pub fn a4() -> RationalMatrix {
    let z = Rational::zero;
    sym([
        [q(2, 1), z(), q(-2, 1)],
        [z(), z(), z()],
        [q(-2, 1), z(), q(2, 1)],
    ])
}

/// `A₅` in `(E, R, S)`: `ξ''_{b₅} = (c/t)^β y²w ⟨A₅(E, R, S), (E, R, S)⟩`.
pub fn a5() -> RationalMatrix {
    let b = beta();
    let one = Rational::one();
    let bb = &b * (&b - &one);
    sym([
        [q(2, 1), q(2, 1) * (&one - &b), q(-2, 1) * &b],
        [q(2, 1) * (&one - &b), bb.clone(), bb.clone()],
        [q(-2, 1) * &b, bb, &b * (&b + &one)],
    ])
}

/// The matrix whose nonpositivity gives
/// `⟨(A₃ − 50A₄)u, u⟩ ≤ −(1/20)D² − (1/40)|D||R|`:
/// `A₃(λ) − 50A₄ + [[1/20, ±1/40, 0], [±1/40, 0, 0], [0, 0, 0]]`.
pub fn d2_test_matrix(lambda: &Rational, sign: Sign) -> RationalMatrix {
    let base = a3(lambda).sub(&a4().scaled(&q(50, 1)));
    let z = Rational::zero;
    let off = q(sign.value(), 40);
    let shift = sym([
        [q(1, 20), off.clone(), z()],
        [off, z(), z()],
        [z(), z(), z()],
    ]);
    base.sub(&shift.scaled(&q(-1, 1)))
}

/// `16⁻¹ (192, ±2, 0; ±2, 0, 0; 0, 0, 46)`, the bound on `A₅`.
pub fn d3_dominating(sign: Sign) -> RationalMatrix {
    let z = Rational::zero;
    let off = q(2 * sign.value(), 16);
    sym([
        [q(192, 16), off.clone(), z()],
        [off, z(), z()],
        [z(), z(), q(46, 16)],
    ])
}

/// `16⁻¹(192, ±2, 0; …) − A₅`; the D³ bound holds when this is positive
/// semidefinite, i.e. when its negation is nonpositive.
pub fn d3_difference(sign: Sign) -> RationalMatrix {
    d3_dominating(sign).sub(&a5())
}

/// `f64` copy of a rational matrix of order ≤ 4.
pub fn to_symmetric(m: &RationalMatrix) -> SymmetricMatrix {
    let rows = m.to_f64();
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    SymmetricMatrix::from_rows(&refs)
}
