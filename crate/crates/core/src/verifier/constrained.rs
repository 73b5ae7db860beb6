//! Maximum of a Hessian quadratic form over subordinate directions `|e| ≤ |d|`.
//!
//! Writing `e = λd` with `λ ∈ [−1, 1]` turns the 4×4 form in `(d, e, r, s)`
//! into a 3×3 form `Q(λ)` in `(d, r, s)`; directions with `d = 0` force
//! `e = 0` and are covered for every `λ`. The constrained maximum is then
//! `max_λ λ_max(Q(λ))`. The weight variables are taken relative to the point,
//! `r = wR`, `s = vS`, which is a congruence and does not change signs.

use super::matrix::SymmetricMatrix;
use crate::bellman::{
    classify_raw, combination_raw, piece_terms, BellmanPoint, Block, Direction, Piece,
};
use crate::error::{Error, Result};
use crate::kernels::DomainParams;

/// `Q(λ)` from a 4×4 matrix `H` in `(d, e, r, s)`.
pub fn reduce_subordinate(h: &SymmetricMatrix, lambda: f64) -> SymmetricMatrix {
    assert_eq!(h.order(), 4);
    let g = |i, j| h.get(i, j);
    SymmetricMatrix::from_upper(
        3,
        &[
            g(0, 0) + 2.0 * lambda * g(0, 1) + lambda * lambda * g(1, 1),
            g(0, 2) + lambda * g(1, 2),
            g(0, 3) + lambda * g(1, 3),
            g(2, 2),
            g(2, 3),
            g(3, 3),
        ],
    )
}

/// Result of maximising `λ_max(Q(λ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaMax {
    pub value: f64,
    pub lambda: f64,
    /// Unit eigenvector in `(d, r, s)`.
    pub vector: [f64; 3],
}

fn top(h: &SymmetricMatrix, lambda: f64) -> LambdaMax {
    let (value, v) = reduce_subordinate(h, lambda).max_eigenpair();
    LambdaMax {
        value,
        lambda,
        vector: [v[0], v[1], v[2]],
    }
}

/// `max_{λ ∈ [−1, 1]} λ_max(Q(λ))` from `samples` cell-centred values of `λ`
/// plus both endpoints, refined by golden-section search on the bracket
/// around the best sample.
pub fn max_over_lambda(h: &SymmetricMatrix, samples: usize) -> LambdaMax {
    let n = samples.max(1);
    let mut grid: Vec<f64> = Vec::with_capacity(n + 2);
    grid.push(-1.0);
    grid.extend((0..n).map(|k| -1.0 + 2.0 * (k as f64 + 0.5) / n as f64));
    grid.push(1.0);

    let mut best = top(h, grid[0]);
    let mut best_k = 0;
    for (k, &l) in grid.iter().enumerate().skip(1) {
        let cand = top(h, l);
        if cand.value > best.value {
            best = cand;
            best_k = k;
        }
    }

    let mut lo = grid[best_k.saturating_sub(1)];
    let mut hi = grid[(best_k + 1).min(grid.len() - 1)];
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = top(h, a);
    let mut fb = top(h, b);
    for _ in 0..40 {
        if fa.value >= fb.value {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = top(h, a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = top(h, b);
        }
    }
    for cand in [fa, fb] {
        if cand.value > best.value {
            best = cand;
        }
    }
    best
}

/// Hessian of a jet in relative weight coordinates `(d, e, R, S)`.
fn relative_hessian(hessian: &[[f64; 4]; 4], w: f64, v: f64) -> SymmetricMatrix {
    let mut m = SymmetricMatrix::zeros(4);
    for i in 0..4 {
        for j in i..4 {
            m.set(i, j, hessian[i][j]);
        }
    }
    m.congruence_diag(&[1.0, 1.0, w, v])
}

pub(crate) fn max_form_raw(
    terms: &[(f64, Block)],
    p: &BellmanPoint,
    c: f64,
    samples: usize,
) -> (f64, Direction) {
    let jet = combination_raw(terms, p.as_array(), c);
    let h = relative_hessian(&jet.hessian, p.w, p.v);
    let best = max_over_lambda(&h, samples);
    let [d, rr, ss] = best.vector;
    let dir = Direction::new(d, best.lambda * d, rr * p.w, ss * p.v);
    (best.value, dir)
}

/// Largest subordinate form of `Σ kᵢ bᵢ` at `p`, over directions with
/// `d² + (r/w)² + (s/v)² = 1` and `e = λd`, `|λ| ≤ 1`.
///
/// Returns the maximum and a direction in the original coordinates at which
/// `⟨D²f(p)u, u⟩` attains it.
pub fn constrained_max_combination(
    terms: &[(f64, Block)],
    p: &BellmanPoint,
    params: &DomainParams,
    lambda_samples: usize,
) -> Result<(f64, Direction)> {
    p.validate(params)?;
    Ok(max_form_raw(terms, p, params.c(), lambda_samples))
}

/// [`constrained_max_combination`] for the piece of `B` in force at `p`.
pub fn constrained_max_form(
    p: &BellmanPoint,
    params: &DomainParams,
    lambda_samples: usize,
) -> Result<(f64, Direction)> {
    let t = p.validate(params)?;
    let region = classify_raw(p.x, p.y, t, params);
    let piece = region.piece().ok_or_else(|| {
        Error::Precondition("the constrained form is undefined at x = y = 0".to_string())
    })?;
    Ok(max_form_raw(&piece_terms(piece), p, params.c(), lambda_samples))
}

/// [`constrained_max_combination`] for a given piece, wherever `p` lies.
pub fn constrained_max_piece(
    piece: Piece,
    p: &BellmanPoint,
    params: &DomainParams,
    lambda_samples: usize,
) -> Result<(f64, Direction)> {
    p.validate(params)?;
    Ok(max_form_raw(&piece_terms(piece), p, params.c(), lambda_samples))
}
