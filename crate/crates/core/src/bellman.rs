//! The building blocks b₁–b₆, the piecewise Bellman function `B`, the
//! majorant `G`, and the maximal extension `𝔹(x, y, z, w, v) = B(x, y − z, w, v)`.
//!
//! Every function here is returned as a [`Jet`]: value, gradient and Hessian
//! in the coordinate order `(x, y, w, v)`, all from hand-derived closed forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{kernel_raw, DomainParams, BETA, KAPPA, MAJORANT_C_SQUARED};

/// Coefficients of `U = b₁ − b₂ − 320000 b₃ − 294400 b₆`.
pub const U_B3: f64 = 320_000.0;
pub const U_B6: f64 = 294_400.0;
/// `B₁ = U + 6400 b₃`, `B₂ = U + 320 b₄`, `B₃ = U + 32 b₅`.
pub const B1_B3: f64 = 6_400.0;
pub const B2_B4: f64 = 320.0;
pub const B3_B5: f64 = 32.0;

/// A state `(x, y, w, v)`; membership in `ℝ² × 𝒟_c` requires `1 ≤ wv ≤ c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellmanPoint {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub v: f64,
}

impl BellmanPoint {
    pub fn new(x: f64, y: f64, w: f64, v: f64) -> Self {
        Self { x, y, w, v }
    }

    /// The weight product `t = wv`.
    #[inline]
    pub fn t(&self) -> f64 {
        self.w * self.v
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.y, self.w, self.v]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// Checks membership in `ℝ² × 𝒟_c`; returns the (possibly clamped) product.
    pub fn validate(&self, params: &DomainParams) -> Result<f64> {
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err(Error::Domain(format!(
                "coordinates must be finite, got x = {}, y = {}",
                self.x, self.y
            )));
        }
        if !(self.w > 0.0 && self.w.is_finite() && self.v > 0.0 && self.v.is_finite()) {
            return Err(Error::Domain(format!(
                "weights must be positive and finite, got w = {}, v = {}",
                self.w, self.v
            )));
        }
        params.check_product(self.t())
    }
}

/// A perturbation `(d, e, r, s)` of `(x, y, w, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Direction {
    pub d: f64,
    pub e: f64,
    pub r: f64,
    pub s: f64,
}

impl Direction {
    pub fn new(d: f64, e: f64, r: f64, s: f64) -> Self {
        Self { d, e, r, s }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.d, self.e, self.r, self.s]
    }

    /// Differential subordination `|e| ≤ |d|`.
    pub fn is_subordinate(&self) -> bool {
        self.e.abs() <= self.d.abs()
    }
}

/// Angular region of a point, from the ratio `|y| / |x|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    D1,
    D2,
    D3,
    Boundary12,
    Boundary23,
    Origin,
}

impl Region {
    /// The piece of `B` evaluated in this region; on boundaries the
    /// lower-indexed neighbour is used.
    pub fn piece(self) -> Option<Piece> {
        match self {
            Region::D1 | Region::Boundary12 => Some(Piece::B1),
            Region::D2 | Region::Boundary23 => Some(Piece::B2),
            Region::D3 => Some(Piece::B3),
            Region::Origin => None,
        }
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, Region::Boundary12 | Region::Boundary23)
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::D1 => "D1",
            Region::D2 => "D2",
            Region::D3 => "D3",
            Region::Boundary12 => "Boundary12",
            Region::Boundary23 => "Boundary23",
            Region::Origin => "Origin",
        }
    }
}

/// One of the three formulas defining `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Piece {
    B1,
    B2,
    B3,
}

impl Piece {
    pub const ALL: [Piece; 3] = [Piece::B1, Piece::B2, Piece::B3];
}

/// Building blocks b₁–b₆.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    B1,
    B2,
    B3,
    B4,
    B5,
    B6,
}

impl Block {
    pub const ALL: [Block; 6] = [
        Block::B1,
        Block::B2,
        Block::B3,
        Block::B4,
        Block::B5,
        Block::B6,
    ];

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1..=6 => Ok(Self::ALL[i - 1]),
            _ => Err(Error::Index(i)),
        }
    }
}

/// Value, gradient and Hessian in the coordinate order `(x, y, w, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet {
    pub value: f64,
    pub gradient: [f64; 4],
    pub hessian: [[f64; 4]; 4],
}

impl Jet {
    fn set_sym(&mut self, i: usize, j: usize, value: f64) {
        self.hessian[i][j] = value;
        self.hessian[j][i] = value;
    }

    /// `self += k · other`.
    pub fn add_scaled(&mut self, k: f64, other: &Jet) {
        self.value += k * other.value;
        for i in 0..4 {
            self.gradient[i] += k * other.gradient[i];
            for j in 0..4 {
                self.hessian[i][j] += k * other.hessian[i][j];
            }
        }
    }

    /// `⟨H u, u⟩`, the second derivative of `τ ↦ f(p + τu)` at `τ = 0`.
    pub fn quadratic_form(&self, dir: &Direction) -> f64 {
        let u = dir.as_array();
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                acc += self.hessian[i][j] * u[i] * u[j];
            }
        }
        acc
    }
}

const X: usize = 0;
const Y: usize = 1;
const W: usize = 2;
const V: usize = 3;

#[inline]
fn sign0(a: f64) -> f64 {
    if a > 0.0 {
        1.0
    } else if a < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `c^β w^{1−β} v^{−β}`, evaluated in log space.
#[inline]
fn weight_factor(w: f64, v: f64, c: f64) -> f64 {
    (BETA * c.ln() + (1.0 - BETA) * w.ln() - BETA * v.ln()).exp()
}

/// Closed-form jet of one building block, without domain checks.
pub(crate) fn block_jet_raw(block: Block, p: [f64; 4], c: f64) -> Jet {
    let [x, y, w, v] = p;
    let mut j = Jet::default();
    match block {
        Block::B1 => {
            let k = kernel_raw(w * v, c);
            let t = w * v;
            let (f, f1, f2) = (k.phi, k.phi_d1, k.phi_d2);
            let mix = 2.0 * f1 + t * f2;
            j.value = y * y * w * f;
            j.gradient = [0.0, 2.0 * y * w * f, y * y * (f + t * f1), y * y * w * w * f1];
            j.set_sym(Y, Y, 2.0 * w * f);
            j.set_sym(Y, W, 2.0 * y * (f + t * f1));
            j.set_sym(Y, V, 2.0 * y * w * w * f1);
            j.set_sym(W, W, y * y * v * mix);
            j.set_sym(W, V, y * y * w * mix);
            j.set_sym(V, V, y * y * w * w * w * f2);
        }
        Block::B2 => {
            j.value = y * y / (2.0 * v);
            j.gradient = [0.0, y / v, 0.0, -y * y / (2.0 * v * v)];
            j.set_sym(Y, Y, 1.0 / v);
            j.set_sym(Y, V, -y / (v * v));
            j.set_sym(V, V, y * y / (v * v * v));
        }
        Block::B3 => {
            let c2 = c * c;
            j.value = c2 * x * x / v;
            j.gradient = [2.0 * c2 * x / v, 0.0, 0.0, -c2 * x * x / (v * v)];
            j.set_sym(X, X, 2.0 * c2 / v);
            j.set_sym(X, V, -2.0 * c2 * x / (v * v));
            j.set_sym(V, V, 2.0 * c2 * x * x / (v * v * v));
        }
        Block::B4 => {
            // |x||y| is not differentiable on the axes; sign(0) = 0 picks the
            // symmetric one-sided average there.
            let m = weight_factor(w, v, c);
            let (ax, ay, sx, sy) = (x.abs(), y.abs(), sign0(x), sign0(y));
            let f = m * ax * ay;
            j.value = f;
            j.gradient = [m * sx * ay, m * ax * sy, (1.0 - BETA) * f / w, -BETA * f / v];
            j.set_sym(X, Y, m * sx * sy);
            j.set_sym(X, W, (1.0 - BETA) * m * sx * ay / w);
            j.set_sym(X, V, -BETA * m * sx * ay / v);
            j.set_sym(Y, W, (1.0 - BETA) * m * ax * sy / w);
            j.set_sym(Y, V, -BETA * m * ax * sy / v);
            j.set_sym(W, W, -BETA * (1.0 - BETA) * f / (w * w));
            j.set_sym(W, V, -BETA * (1.0 - BETA) * f / (w * v));
            j.set_sym(V, V, BETA * (BETA + 1.0) * f / (v * v));
        }
        Block::B5 => {
            let g = weight_factor(w, v, c);
            let f = g * y * y;
            j.value = f;
            j.gradient = [0.0, 2.0 * y * g, (1.0 - BETA) * f / w, -BETA * f / v];
            j.set_sym(Y, Y, 2.0 * g);
            j.set_sym(Y, W, 2.0 * (1.0 - BETA) * y * g / w);
            j.set_sym(Y, V, -2.0 * BETA * y * g / v);
            j.set_sym(W, W, -BETA * (1.0 - BETA) * f / (w * w));
            j.set_sym(W, V, -BETA * (1.0 - BETA) * f / (w * v));
            j.set_sym(V, V, BETA * (BETA + 1.0) * f / (v * v));
        }
        Block::B6 => {
            // b₆ = c²x² w ψ(wv) = c²x² ψ̂(wv) / v
            let k = kernel_raw(w * v, c);
            let (h0, h1, h2) = (k.psi_hat, k.psi_hat_d1, k.psi_hat_d2);
            let c2 = c * c;
            let dv_part = h1 * w / v - h0 / (v * v);
            j.value = c2 * x * x * h0 / v;
            j.gradient = [2.0 * c2 * x * h0 / v, 0.0, c2 * x * x * h1, c2 * x * x * dv_part];
            j.set_sym(X, X, 2.0 * c2 * h0 / v);
            j.set_sym(X, W, 2.0 * c2 * x * h1);
            j.set_sym(X, V, 2.0 * c2 * x * dv_part);
            j.set_sym(W, W, c2 * x * x * v * h2);
            j.set_sym(W, V, c2 * x * x * w * h2);
            j.set_sym(
                V,
                V,
                c2 * x * x * (w * w * h2 / v - 2.0 * w * h1 / (v * v) + 2.0 * h0 / (v * v * v)),
            );
        }
    }
    j
}

/// Linear combination `Σ kᵢ bᵢ` as a jet.
pub(crate) fn combination_raw(terms: &[(f64, Block)], p: [f64; 4], c: f64) -> Jet {
    let mut acc = Jet::default();
    for &(k, block) in terms {
        acc.add_scaled(k, &block_jet_raw(block, p, c));
    }
    acc
}

const U_TERMS: [(f64, Block); 4] = [
    (1.0, Block::B1),
    (-1.0, Block::B2),
    (-U_B3, Block::B3),
    (-U_B6, Block::B6),
];

pub(crate) fn piece_terms(piece: Piece) -> [(f64, Block); 5] {
    let extra = match piece {
        Piece::B1 => (B1_B3, Block::B3),
        Piece::B2 => (B2_B4, Block::B4),
        Piece::B3 => (B3_B5, Block::B5),
    };
    [U_TERMS[0], U_TERMS[1], U_TERMS[2], U_TERMS[3], extra]
}

pub(crate) fn piece_jet_raw(piece: Piece, p: [f64; 4], c: f64) -> Jet {
    combination_raw(&piece_terms(piece), p, c)
}

/// Thresholds `(20c(c/t)^{1−β}, 10)` on the ratio `|y| / |x|`.
pub fn region_thresholds(t: f64, params: &DomainParams) -> (f64, f64) {
    let c = params.c();
    (20.0 * c * ((1.0 - BETA) * (c / t).ln()).exp(), 10.0)
}

pub(crate) fn classify_raw(x: f64, y: f64, t: f64, params: &DomainParams) -> Region {
    if x == 0.0 && y == 0.0 {
        return Region::Origin;
    }
    let (upper, lower) = region_thresholds(t, params);
    let (ax, ay) = (x.abs(), y.abs());
    let th1 = upper * ax;
    let th3 = lower * ax;
    if ay > th1 {
        Region::D1
    } else if ay == th1 {
        Region::Boundary12
    } else if ay < th3 {
        Region::D3
    } else if ay == th3 {
        Region::Boundary23
    } else {
        Region::D2
    }
}

pub fn classify_region(p: &BellmanPoint, params: &DomainParams) -> Result<Region> {
    let t = p.validate(params)?;
    Ok(classify_raw(p.x, p.y, t, params))
}

pub fn block_jet(block: Block, p: &BellmanPoint, params: &DomainParams) -> Result<Jet> {
    p.validate(params)?;
    Ok(block_jet_raw(block, p.as_array(), params.c()))
}

/// `b_i` for `i ∈ 1..=6`.
pub fn eval_b(i: usize, p: &BellmanPoint, params: &DomainParams) -> Result<f64> {
    let block = Block::from_index(i)?;
    Ok(block_jet(block, p, params)?.value)
}

pub fn u_jet(p: &BellmanPoint, params: &DomainParams) -> Result<Jet> {
    p.validate(params)?;
    Ok(combination_raw(&U_TERMS, p.as_array(), params.c()))
}

pub fn eval_u(p: &BellmanPoint, params: &DomainParams) -> Result<f64> {
    Ok(u_jet(p, params)?.value)
}

/// Jet of one piece `B_i`, regardless of the region `p` lies in.
pub fn piece_jet(piece: Piece, p: &BellmanPoint, params: &DomainParams) -> Result<Jet> {
    p.validate(params)?;
    Ok(piece_jet_raw(piece, p.as_array(), params.c()))
}

/// Value of `B` together with the derivatives of the piece in force at the point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellmanEval {
    pub value: f64,
    pub gradient: [f64; 4],
    pub hessian: [[f64; 4]; 4],
    pub region: Region,
    /// Piece whose derivatives are reported; `None` at the origin.
    pub piece: Option<Piece>,
    /// Set on `Boundary12` / `Boundary23`, where the neighbouring piece has
    /// different derivatives.
    pub on_boundary: bool,
    /// Set at `x = y = 0`, where `B` is not twice differentiable. Value and
    /// gradient are zero there and the Hessian is reported as zero.
    pub degenerate: bool,
}

pub fn eval_bellman(p: &BellmanPoint, params: &DomainParams) -> Result<BellmanEval> {
    let t = p.validate(params)?;
    let region = classify_raw(p.x, p.y, t, params);
    let Some(piece) = region.piece() else {
        return Ok(BellmanEval {
            value: 0.0,
            gradient: [0.0; 4],
            hessian: [[0.0; 4]; 4],
            region,
            piece: None,
            on_boundary: false,
            degenerate: true,
        });
    };
    let jet = piece_jet_raw(piece, p.as_array(), params.c());
    Ok(BellmanEval {
        value: jet.value,
        gradient: jet.gradient,
        hessian: jet.hessian,
        region,
        piece: Some(piece),
        on_boundary: region.is_boundary(),
        degenerate: false,
    })
}

/// Value of `B` only.
pub fn bellman_value(p: &BellmanPoint, params: &DomainParams) -> Result<f64> {
    Ok(eval_bellman(p, params)?.value)
}

/// The majorant `G = κ(y²w − C²c²x²/v)` with `κ = 1/2`, `C² = 1228800`.
pub fn eval_g(p: &BellmanPoint, params: &DomainParams) -> Result<f64> {
    p.validate(params)?;
    let c = params.c();
    Ok(KAPPA * (p.y * p.y * p.w - MAJORANT_C_SQUARED * c * c * p.x * p.x / p.v))
}

/// `B − G`, evaluated as a sum of terms that are each nonnegative on the
/// domain, so that the result is accurate to a few ulps of each term rather
/// than of `G`:
///
/// `B_i − G = y²w[(3/2)(1 − 1/t) − ln t/(2c)] + 294400·b₃·(φ − 1)/φ + e_i`
///
/// with `e₁ = 6400b₃`, `e₂ = 320b₄`, `e₃ = 32b₅`.
pub fn majorization_gap(p: &BellmanPoint, params: &DomainParams) -> Result<f64> {
    let t = p.validate(params)?;
    let region = classify_raw(p.x, p.y, t, params);
    let Some(piece) = region.piece() else {
        return Ok(0.0);
    };
    let c = params.c();
    let log_t = (t - 1.0).ln_1p();
    let rise = (t - 1.0) / t;
    let phi_minus_one = rise - log_t / (2.0 * c);
    let y_part = p.y * p.y * p.w * (1.5 * rise - log_t / (2.0 * c));
    let b3 = c * c * p.x * p.x / p.v;
    let x_part = U_B6 * b3 * phi_minus_one / (1.0 + phi_minus_one);
    let (k, block) = piece_terms(piece)[4];
    let extra = k * block_jet_raw(block, p.as_array(), c).value;
    Ok(y_part + x_part + extra)
}

/// `⟨D²B_i(p) u, u⟩` for the piece in force at `p`.
pub fn directional_second_derivative(
    p: &BellmanPoint,
    dir: &Direction,
    params: &DomainParams,
) -> Result<f64> {
    let eval = eval_bellman(p, params)?;
    if eval.degenerate {
        return Err(Error::Precondition(
            "B has no Hessian at x = y = 0".to_string(),
        ));
    }
    let jet = Jet {
        value: eval.value,
        gradient: eval.gradient,
        hessian: eval.hessian,
    };
    Ok(jet.quadratic_form(dir))
}

/// A state of the maximal extension; requires `y ≤ z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
    pub v: f64,
}

impl MaxPoint {
    pub fn new(x: f64, y: f64, z: f64, w: f64, v: f64) -> Self {
        Self { x, y, z, w, v }
    }

    fn shifted(&self) -> Result<BellmanPoint> {
        if self.y > self.z {
            return Err(Error::Precondition(format!(
                "maximal extension requires y <= z, got y = {}, z = {}",
                self.y, self.z
            )));
        }
        Ok(BellmanPoint::new(self.x, self.y - self.z, self.w, self.v))
    }
}

/// `𝔹(x, y, z, w, v) = B(x, y − z, w, v)`.
pub fn eval_b_maximal(p: &MaxPoint, params: &DomainParams) -> Result<f64> {
    bellman_value(&p.shifted()?, params)
}

/// `∂𝔹/∂z = −B_y(x, y − z, w, v)`.
pub fn eval_b_maximal_dz(p: &MaxPoint, params: &DomainParams) -> Result<f64> {
    let eval = eval_bellman(&p.shifted()?, params)?;
    Ok(-eval.gradient[Y])
}

/// Worst relative disagreement between closed-form derivatives and central
/// finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    pub h: f64,
    pub region: Region,
    pub gradient_rel_err: f64,
    pub hessian_rel_err: f64,
}

impl FdReport {
    pub fn max_rel_err(&self) -> f64 {
        self.gradient_rel_err.max(self.hessian_rel_err)
    }
}

/// Compares the closed-form gradient and Hessian of the piece at `p` with
/// central differences of step `h`, in scaled coordinates
/// `(x, y, w, v) = p + (ρ a, ρ b, w α, v γ)` with `ρ = |(x, y)|`.
///
/// The gradient is differenced from values, the Hessian from the
/// closed-form gradient. Errors are measured against the largest scaled
/// entry of the exact quantity.
pub fn fd_check(p: &BellmanPoint, params: &DomainParams, h: f64) -> Result<FdReport> {
    let t = p.validate(params)?;
    if !(h > 0.0 && h < 1e-2) {
        return Err(Error::Precondition(format!("step h = {h} must be in (0, 1e-2)")));
    }
    let region = classify_raw(p.x, p.y, t, params);
    let piece = match region {
        Region::D1 | Region::D2 | Region::D3 => region.piece().unwrap(),
        _ => {
            return Err(Error::Precondition(format!(
                "finite differences need an interior point, got region {}",
                region.name()
            )))
        }
    };
    let c = params.c();
    let base = p.as_array();
    let rho = p.x.hypot(p.y);
    let scale = [rho, rho, p.w, p.v];
    let shifted = |i: usize, k: f64| {
        let mut q = base;
        q[i] += k * scale[i];
        q
    };
    for i in 0..4 {
        for k in [-10.0 * h, 10.0 * h] {
            let q = shifted(i, k);
            let tq = q[2] * q[3];
            if tq < 1.0 || tq > c || classify_raw(q[0], q[1], tq, params) != region {
                return Err(Error::Precondition(format!(
                    "point is within 10h of a region or domain boundary along coordinate {i}"
                )));
            }
        }
    }

    let exact = piece_jet_raw(piece, base, c);
    let value = |q: [f64; 4]| piece_jet_raw(piece, q, c).value;
    let grad = |q: [f64; 4]| piece_jet_raw(piece, q, c).gradient;

    let mut g_exact = [0.0; 4];
    let mut g_fd = [0.0; 4];
    let mut h_exact = [[0.0; 4]; 4];
    let mut h_fd = [[0.0; 4]; 4];
    for i in 0..4 {
        g_exact[i] = exact.gradient[i] * scale[i];
        g_fd[i] = (value(shifted(i, h)) - value(shifted(i, -h))) / (2.0 * h);
        let gp = grad(shifted(i, h));
        let gm = grad(shifted(i, -h));
        for j in 0..4 {
            h_exact[j][i] = exact.hessian[j][i] * scale[i] * scale[j];
            h_fd[j][i] = (gp[j] - gm[j]) * scale[j] / (2.0 * h);
        }
    }
    let g_norm = g_exact.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    let h_norm = h_exact.iter().flatten().fold(0.0_f64, |m, a| m.max(a.abs()));
    let g_err = (0..4).fold(0.0_f64, |m, i| m.max((g_fd[i] - g_exact[i]).abs()));
    let h_err = (0..16).fold(0.0_f64, |m, k| {
        m.max((h_fd[k / 4][k % 4] - h_exact[k / 4][k % 4]).abs())
    });
    Ok(FdReport {
        h,
        region,
        gradient_rel_err: if g_norm > 0.0 { g_err / g_norm } else { g_err },
        hessian_rel_err: if h_norm > 0.0 { h_err / h_norm } else { h_err },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2() -> DomainParams {
        DomainParams::new(2.0).unwrap()
    }

    fn pt(x: f64, y: f64, w: f64, v: f64) -> BellmanPoint {
        BellmanPoint::new(x, y, w, v)
    }

    #[test]
    fn region_examples() {
        let params = p2();
        assert_eq!(classify_region(&pt(0.0, 1.0, 1.0, 1.0), &params), Ok(Region::D1));
        assert_eq!(classify_region(&pt(1.0, 1.0, 1.0, 1.0), &params), Ok(Region::D3));
        assert_eq!(
            classify_region(&pt(1.0, 10.0, 1.0, 1.0), &params),
            Ok(Region::Boundary23)
        );
        assert_eq!(classify_region(&pt(1.0, 20.0, 1.0, 1.0), &params), Ok(Region::D2));
        assert_eq!(classify_region(&pt(0.0, 0.0, 1.0, 1.0), &params), Ok(Region::Origin));
        // At t = c the upper threshold is exactly 20c.
        assert_eq!(
            classify_region(&pt(1.0, 40.0, 2.0, 1.0), &params),
            Ok(Region::Boundary12)
        );
        assert!(matches!(
            classify_region(&pt(1.0, 1.0, 3.0, 1.0), &params),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            classify_region(&pt(1.0, 1.0, -1.0, -1.0), &params),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn building_block_examples() {
        let params = p2();
        assert_eq!(eval_b(1, &pt(1.0, 0.0, 1.0, 1.0), &params), Ok(0.0));
        assert_eq!(eval_b(6, &pt(1.0, 0.0, 1.0, 1.0), &params), Ok(4.0));
        let b4 = eval_b(4, &pt(1.0, 1.0, 1.0, 1.0), &params).unwrap();
        assert!((b4 - 2f64.powf(0.75)).abs() < 1e-15);
        assert_eq!(eval_b(0, &pt(1.0, 1.0, 1.0, 1.0), &params), Err(Error::Index(0)));
        assert_eq!(eval_b(7, &pt(1.0, 1.0, 1.0, 1.0), &params), Err(Error::Index(7)));
    }

    #[test]
    fn u_and_b_examples() {
        let params = p2();
        assert_eq!(eval_u(&pt(0.0, 0.0, 1.3, 1.2), &params), Ok(0.0));
        assert_eq!(eval_u(&pt(1.0, 0.0, 1.0, 1.0), &params), Ok(-2_457_600.0));
        assert_eq!(eval_u(&pt(0.0, 1.0, 1.0, 1.0), &params), Ok(0.5));

        let e = eval_bellman(&pt(1.0, 0.0, 1.0, 1.0), &params).unwrap();
        assert_eq!(e.value, -2_457_600.0);
        assert_eq!(e.region, Region::D3);
        let e = eval_bellman(&pt(0.0, 1.0, 1.0, 1.0), &params).unwrap();
        assert_eq!(e.value, 0.5);
        assert_eq!(e.region, Region::D1);

        let e = eval_bellman(&pt(0.0, 0.0, 1.0, 1.0), &params).unwrap();
        assert!(e.degenerate);
        assert_eq!(e.value, 0.0);
        assert_eq!(e.gradient, [0.0; 4]);
    }

    #[test]
    fn majorant_examples() {
        let params = p2();
        assert_eq!(eval_g(&pt(0.0, 1.0, 1.0, 1.0), &params), Ok(0.5));
        assert_eq!(eval_g(&pt(1.0, 0.0, 1.0, 1.0), &params), Ok(-2_457_600.0));
        assert_eq!(eval_g(&pt(0.0, 0.0, 1.0, 1.0), &params), Ok(0.0));
    }

    #[test]
    fn majorization_gap_matches_direct_difference() {
        for c in [1.5, 2.0, 10.0, 100.0] {
            let params = DomainParams::new(c).unwrap();
            for &(x, y, w, t) in &[
                (0.0, 1.0, 1.0, 1.0),
                (1.0, 0.0, 0.5, 1.0),
                (0.3, 2.0, 1.3, 1.2),
                (-1.0, 4.0, 0.7, 1.4),
                (2.0, -0.5, 2.0, 1.49),
            ] {
                let q = pt(x, y, w, t / w);
                let direct = bellman_value(&q, &params).unwrap() - eval_g(&q, &params).unwrap();
                let gap = majorization_gap(&q, &params).unwrap();
                let size = 1e6 * c * c * (1.0 + x * x + y * y) * (1.0 + w) * (1.0 + w / t);
                assert!((gap - direct).abs() <= 1e-14 * size, "c={c} {q:?}: {gap} vs {direct}");
                assert!(gap >= 0.0);
            }
        }
        // Tight on both axes at t = 1.
        let params = p2();
        assert_eq!(majorization_gap(&pt(0.0, 1.0, 1.0, 1.0), &params), Ok(0.0));
        assert!(majorization_gap(&pt(1.0, 0.0, 1.0, 1.0), &params).unwrap() == 0.0);
    }

    #[test]
    fn second_derivative_examples() {
        let params = p2();
        let q = pt(0.0, 1.0, 1.0, 1.0);
        let b2 = block_jet(Block::B2, &q, &params).unwrap();
        assert_eq!(b2.quadratic_form(&Direction::new(0.0, 1.0, 0.0, 0.0)), 1.0);
        let q = pt(1.0, 0.0, 1.0, 1.0);
        let b3 = block_jet(Block::B3, &q, &params).unwrap();
        assert_eq!(b3.quadratic_form(&Direction::new(1.0, 0.0, 0.0, 1.0)), 0.0);
        assert_eq!(b3.hessian[0][0], 2.0 * 4.0 / 1.0);
        let zero = Direction::default();
        assert_eq!(
            directional_second_derivative(&pt(0.3, -2.0, 1.1, 1.2), &zero, &params),
            Ok(0.0)
        );
    }

    #[test]
    fn b2_and_b3_forms_match_completed_squares() {
        let params = DomainParams::new(3.0).unwrap();
        let q = pt(0.7, -1.3, 1.4, 1.5);
        let dir = Direction::new(0.4, -0.2, 0.9, -1.1);
        let b2 = block_jet(Block::B2, &q, &params).unwrap().quadratic_form(&dir);
        let expect = (dir.e - q.y * dir.s / q.v).powi(2) / q.v;
        assert!((b2 - expect).abs() < 1e-14);
        let b3 = block_jet(Block::B3, &q, &params).unwrap().quadratic_form(&dir);
        let expect = 2.0 * 9.0 / q.v * (dir.d - q.x * dir.s / q.v).powi(2);
        assert!((b3 - expect).abs() < 1e-12);
    }

    #[test]
    fn maximal_extension() {
        let params = p2();
        let m = MaxPoint::new(1.0, 0.0, 0.0, 1.0, 1.0);
        assert_eq!(eval_b_maximal(&m, &params), Ok(-2_457_600.0));
        let m = MaxPoint::new(0.4, 1.5, 1.5, 1.2, 1.1);
        assert_eq!(
            eval_b_maximal(&m, &params).unwrap(),
            bellman_value(&pt(0.4, 0.0, 1.2, 1.1), &params).unwrap()
        );
        assert_eq!(eval_b_maximal_dz(&m, &params).unwrap(), 0.0);
        let bad = MaxPoint::new(0.0, 2.0, 1.0, 1.0, 1.0);
        assert!(matches!(eval_b_maximal(&bad, &params), Err(Error::Precondition(_))));
    }

    #[test]
    fn fd_examples() {
        let params = p2();
        for q in [
            pt(0.3, 5.0, 1.2, 1.1),
            pt(1.0, 3.0, 0.8, 1.6),
            pt(-1.0, 14.0, 1.0, 1.5),
        ] {
            let r = fd_check(&q, &params, 1e-5).unwrap();
            assert!(r.max_rel_err() < 1e-6, "{q:?} {r:?}");
        }
        // Too close to the D2/D3 boundary.
        assert!(matches!(
            fd_check(&pt(1.0, 10.00001, 1.0, 1.0), &params, 1e-5),
            Err(Error::Precondition(_))
        ));
        // Too close to t = c.
        assert!(matches!(
            fd_check(&pt(1.0, 1.0, 2.0, 0.99999), &params, 1e-5),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn fd_error_shrinks_quadratically() {
        let params = p2();
        let q = pt(1.0, 3.0, 1.1, 1.2);
        let coarse = fd_check(&q, &params, 4e-3).unwrap().gradient_rel_err;
        let fine = fd_check(&q, &params, 2e-3).unwrap().gradient_rel_err;
        let ratio = coarse / fine;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }
}
