//! Grid checks for the size conditions, the matrix inequalities and the
//! constrained concavity of `B`.

use std::time::Instant;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::constrained::max_over_lambda;
use super::constrained::max_form_raw;
use super::grid::{GridRegion, GridSpec, Layout};
use super::forms::{
    b_cross_coefficient, build_matrix_a, build_matrix_b, build_matrix_c, d2_test_matrix,
    d3_difference, to_symmetric, Sign,
};
use super::matrix::{sylvester_nonpositive, SylvesterVerdict, SymmetricMatrix};
use super::rational::{q, Certificate, ExactDefiniteness, Rational, RationalMatrix};
use super::report::{point_scale, scan, Sample, VerificationReport};
use super::*;
use crate::bellman::{
    block_jet_raw, classify_raw, majorization_gap, piece_jet_raw, piece_terms, region_thresholds, BellmanPoint,
    Block, Direction, Piece, Region,
};
use crate::error::Result;
use crate::kernels::DomainParams;

/// Knobs shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Replaces the default tolerance of every check when set.
    pub tolerance: Option<f64>,
    /// Cell-centred λ samples in the subordinate reduction (endpoints are
    /// always added).
    pub lambda_samples: usize,
    /// Use exact rational minors of the (rounded) matrices as the Sylvester
    /// test in the point-dependent matrix checks.
    pub exact_rational: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tolerance: None,
            lambda_samples: DEFAULT_LAMBDA_SAMPLES,
            exact_rational: false,
        }
    }
}

impl VerifyOptions {
    fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GlobalCheck {
    Initial,
    Majorization,
    Ordering,
    Continuity,
    Neumann,
}

impl GlobalCheck {
    pub fn name(self) -> &'static str {
        match self {
            GlobalCheck::Initial => "initial",
            GlobalCheck::Majorization => "majorization",
            GlobalCheck::Ordering => "ordering",
            GlobalCheck::Continuity => "continuity",
            GlobalCheck::Neumann => "neumann",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            GlobalCheck::Initial => TOL_INITIAL,
            GlobalCheck::Majorization => TOL_MAJORIZATION,
            GlobalCheck::Ordering => TOL_ORDERING,
            GlobalCheck::Continuity => TOL_CONTINUITY,
            GlobalCheck::Neumann => TOL_NEUMANN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixPart {
    A,
    B,
    C,
}

impl MatrixPart {
    pub const ALL: [MatrixPart; 3] = [MatrixPart::A, MatrixPart::B, MatrixPart::C];

    pub fn name(self) -> &'static str {
        match self {
            MatrixPart::A => "matrices.a",
            MatrixPart::B => "matrices.b",
            MatrixPart::C => "matrices.c",
        }
    }
}

fn value_of(piece: Piece, p: &BellmanPoint, c: f64) -> f64 {
    piece_jet_raw(piece, p.as_array(), c).value
}

fn bellman_raw(p: &BellmanPoint, t: f64, params: &DomainParams) -> f64 {
    match classify_raw(p.x, p.y, t, params).piece() {
        Some(piece) => value_of(piece, p, params.c()),
        None => 0.0,
    }
}

/// Which boundary a point sits on, up to relative rounding `1e-12`.
fn nearest_boundary(p: &BellmanPoint, t: f64, params: &DomainParams) -> Option<(Piece, Piece)> {
    let (upper, lower) = region_thresholds(t, params);
    let (ax, ay) = (p.x.abs(), p.y.abs());
    if ax == 0.0 {
        return None;
    }
    let ratio = ay / ax;
    if (ratio - upper).abs() <= 1e-12 * upper {
        Some((Piece::B1, Piece::B2))
    } else if (ratio - lower).abs() <= 1e-12 * lower {
        Some((Piece::B2, Piece::B3))
    } else {
        None
    }
}

fn global_sample(
    check: GlobalCheck,
    params: &DomainParams,
    p: &BellmanPoint,
) -> Option<Sample> {
    let t = p.validate(params).ok()?;
    let c = params.c();
    let scale = point_scale(p, params);
    match check {
        GlobalCheck::Initial => {
            if p.y.abs() > p.x.abs() {
                return None;
            }
            let b = bellman_raw(p, t, params);
            Some(Sample::new(b / scale, b))
        }
        GlobalCheck::Majorization => {
            let gap = majorization_gap(p, params).ok()?;
            Some(Sample::new(-gap / scale, gap))
        }
        GlobalCheck::Ordering => {
            let excess = match classify_raw(p.x, p.y, t, params) {
                Region::D1 => value_of(Piece::B1, p, c) - value_of(Piece::B2, p, c),
                Region::D2 => {
                    let b2 = value_of(Piece::B2, p, c);
                    b2 - value_of(Piece::B1, p, c).min(value_of(Piece::B3, p, c))
                }
                Region::D3 => value_of(Piece::B3, p, c) - value_of(Piece::B2, p, c),
                _ => return None,
            };
            Some(Sample::new(excess / scale, excess))
        }
        GlobalCheck::Continuity => {
            let (a, b) = nearest_boundary(p, t, params)?;
            let gap = (value_of(a, p, c) - value_of(b, p, c)).abs();
            Some(Sample::new(gap / scale, gap))
        }
        GlobalCheck::Neumann => {
            if p.x == 0.0 {
                return None;
            }
            let axis = BellmanPoint::new(p.x, 0.0, p.w, p.v);
            let piece = classify_raw(axis.x, 0.0, t, params).piece()?;
            let dy = piece_jet_raw(piece, axis.as_array(), c).gradient[1];
            Some(Sample::new(dy.abs() / point_scale(&axis, params), dy))
        }
    }
}

/// Pointwise size and gluing conditions of `B`.
pub fn verify_global(check: GlobalCheck, grid: &GridSpec) -> Result<VerificationReport> {
    verify_global_with(check, grid, &VerifyOptions::default())
}

pub fn verify_global_with(
    check: GlobalCheck,
    grid: &GridSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    grid.validate()?;
    let tol = opts.tol(check.default_tolerance());
    Ok(scan(check.name(), grid, tol, |params, p| {
        global_sample(check, params, p)
    }))
}

/// Sylvester verdict for nonpositivity, exact or in floating point.
fn secondary_verdict(m: &SymmetricMatrix, exact: bool) -> SylvesterVerdict {
    if !exact {
        return sylvester_nonpositive(m, SYLVESTER_TOL);
    }
    match RationalMatrix::from_f64(&m.rows()).map(|r| r.classify_nonpositive()) {
        Some(ExactDefiniteness::NegativeDefinite) => SylvesterVerdict::Definite,
        Some(ExactDefiniteness::NegativeSemidefinite) => SylvesterVerdict::Inconclusive,
        _ => SylvesterVerdict::Violated,
    }
}

/// Eigenvalue test of `m ⪯ 0` with a Sylvester cross-check.
fn nonpositive_sample(m: &SymmetricMatrix, scale: f64, tol: f64, exact: bool) -> Sample {
    let top = m.max_eigenvalue();
    let violation = top / scale;
    let eigen_ok = violation <= tol;
    let verdict = secondary_verdict(m, exact);
    let disagree = (eigen_ok && verdict == SylvesterVerdict::Violated)
        || (!eigen_ok && verdict == SylvesterVerdict::Definite);
    Sample::new(violation, top).with_disagreement(disagree)
}

/// Matrix bounds on the quadratic forms of `b₁` and `b₆`:
/// (a) `𝔸 ⪯ 0`; (b) `𝔹 ⪯ 0` and `|2y(φ + tφ')| ≤ 4|y|`; (c) `𝒞 ⪰ 0`.
pub fn verify_matrices(part: MatrixPart, grid: &GridSpec) -> Result<VerificationReport> {
    verify_matrices_with(part, grid, &VerifyOptions::default())
}

pub fn verify_matrices_with(
    part: MatrixPart,
    grid: &GridSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    grid.validate()?;
    let tol = opts.tol(TOL_MATRIX);
    let exact = opts.exact_rational;
    Ok(scan(part.name(), grid, tol, |params, p| {
        let scale = point_scale(p, params);
        match part {
            MatrixPart::A => {
                let m = build_matrix_a(p.y, p.w, p.v, params).ok()?;
                Some(nonpositive_sample(&m, scale, tol, exact))
            }
            MatrixPart::B => {
                let m = build_matrix_b(p.y, p.w, p.v, params).ok()?;
                let kappa = b_cross_coefficient(p.y, p.w, p.v, params).ok()?;
                let s = nonpositive_sample(&m, scale, tol, exact);
                let cross = (kappa.abs() - 4.0 * p.y.abs()) / scale;
                Some(if cross > s.violation {
                    Sample::new(cross, kappa).with_disagreement(s.disagreement)
                } else {
                    s
                })
            }
            MatrixPart::C => {
                let m = build_matrix_c(p.x, p.w, p.v, params).ok()?;
                Some(nonpositive_sample(&m.negated(), scale, tol, exact))
            }
        }
    }))
}

/// Constrained form of `Σ kᵢ bᵢ` on the points of `grid` lying in `region`.
fn form_scan(
    name: &str,
    grid: &GridSpec,
    region: Region,
    terms: &[(f64, Block)],
    opts: &VerifyOptions,
    skip_axes: bool,
) -> VerificationReport {
    let tol = opts.tol(TOL_CONCAVITY);
    let samples = opts.lambda_samples;
    scan(name, grid, tol, |params, p| {
        let t = p.validate(params).ok()?;
        if classify_raw(p.x, p.y, t, params) != region {
            return None;
        }
        if skip_axes && (p.x == 0.0 || p.y == 0.0) {
            return None;
        }
        let (m, dir) = max_form_raw(terms, p, params.c(), samples);
        Some(Sample::new(m / point_scale(p, params), m).with_direction(dir))
    })
}

/// Restricts an angular grid to `region`; other layouts are used as given.
fn restrict(grid: &GridSpec, region: GridRegion) -> GridSpec {
    match grid.layout {
        Layout::Angular { .. } => grid.with_region(region),
        Layout::Coordinate { .. } => grid.clone(),
    }
}

fn timed<F: FnOnce() -> VerificationReport>(f: F) -> VerificationReport {
    let start = Instant::now();
    let mut r = f();
    r.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    r
}

/// Report for a set of exact nonpositivity certificates. The recorded
/// violation is the largest floating-point eigenvalue.
fn certificate_report(name: &str, mats: Vec<(String, RationalMatrix)>) -> VerificationReport {
    timed(|| {
        let mut r = VerificationReport::empty(name, 0.0);
        let mut worst = f64::NEG_INFINITY;
        for (label, m) in mats {
            let cert = Certificate::for_nonpositive(label, &m);
            r.pass &= cert.passed();
            worst = worst.max(to_symmetric(&m).max_eigenvalue());
            r.total_points += 1;
            r.certificates.push(cert);
        }
        r.worst_violation = Some(worst);
        r.pass &= worst <= 0.0;
        r
    })
}

const D1_TERMS: [(f64, Block); 3] = [(1.0, Block::B1), (-1.0, Block::B2), (-160.0, Block::B3)];
const D2_TERMS: [(f64, Block); 3] = [(1.0, Block::B1), (320.0, Block::B4), (-320_000.0, Block::B3)];
const D3_TERMS: [(f64, Block); 4] = [
    (1.0, Block::B1),
    (32.0, Block::B5),
    (-4_600.0, Block::B3),
    (-294_400.0, Block::B6),
];

/// D¹: the forms of `b₁ − b₂ − 160b₃` and of `B₁` are nonpositive on
/// subordinate directions.
pub fn verify_domain1(grid: &GridSpec) -> Result<VerificationReport> {
    verify_domain1_with(grid, &VerifyOptions::default())
}

pub fn verify_domain1_with(grid: &GridSpec, opts: &VerifyOptions) -> Result<VerificationReport> {
    grid.validate()?;
    let g = restrict(grid, GridRegion::D1);
    let subs = vec![
        form_scan("domain1.block_form", &g, Region::D1, &D1_TERMS, opts, false),
        form_scan("domain1.piece_form", &g, Region::D1, &piece_terms(Piece::B1), opts, false),
    ];
    Ok(VerificationReport::aggregate("domain1", subs))
}

/// The 41 values `λ = −1/10 + k/200`.
fn lambda_scan_values() -> Vec<Rational> {
    (0..=40).map(|k| q(-20 + k, 200)).collect()
}

fn d2_exact_scan() -> VerificationReport {
    timed(|| {
        let mut r = VerificationReport::empty("domain2.lambda_scan", 0.0);
        let mut worst = f64::NEG_INFINITY;
        for lambda in lambda_scan_values() {
            for sign in Sign::BOTH {
                let m = d2_test_matrix(&lambda, sign);
                r.total_points += 1;
                r.pass &= m.classify_nonpositive() == ExactDefiniteness::NegativeDefinite;
                worst = worst.max(to_symmetric(&m).max_eigenvalue());
            }
        }
        r.worst_violation = Some(worst);
        r.pass &= worst <= 0.0;
        r
    })
}

/// Exact second derivative of `det` of the D² test matrix in `λ`, after
/// confirming that the determinant is quadratic.
pub fn d2_det_second_derivative(sign: Sign) -> Option<Rational> {
    let det = |l: Rational| d2_test_matrix(&l, sign).determinant();
    let h = q(1, 10);
    let (fm, f0, fp) = (det(-h.clone()), det(q(0, 1)), det(h.clone()));
    let a = (&fp - &f0 * q(2, 1) + &fm) / (&h * &h * q(2, 1));
    let b = (&fp - &fm) / (&h * q(2, 1));
    // A degree-2 polynomial is determined by three values; check a fourth.
    let l = q(1, 20);
    let predicted = &a * &l * &l + &b * &l + &f0;
    (predicted == det(l)).then(|| a * q(2, 1))
}

fn d2_convexity() -> VerificationReport {
    timed(|| {
        let mut r = VerificationReport::empty("domain2.det_convexity", TOL_MATRIX);
        let mut worst = f64::NEG_INFINITY;
        for sign in Sign::BOTH {
            let exact = d2_det_second_derivative(sign);
            r.pass &= exact.as_ref().is_some_and(|a| a.is_positive());
            // Numeric second differences on the 41-point λ grid.
            let h = 1.0 / 200.0;
            let det = |l: f64| {
                let m = d2_test_matrix(&q(0, 1), sign);
                let mut f = to_symmetric(&m);
                f.set(0, 0, 2.0 * l - 100.0 + 1.0 / 20.0);
                f.set(0, 1, 0.25 * (1.0 + l) + sign.value() as f64 / 40.0);
                f.set(0, 2, -0.75 * (1.0 + l) + 100.0);
                f.leading_minors()[2]
            };
            let dd: Vec<f64> = (1..40)
                .map(|k| {
                    let l = -0.1 + k as f64 * h;
                    (det(l - h) - 2.0 * det(l) + det(l + h)) / (h * h)
                })
                .collect();
            let top = dd.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            for x in dd {
                r.total_points += 1;
                worst = worst.max(-x / top);
            }
        }
        r.worst_violation = Some(worst);
        r.pass &= worst <= r.tolerance;
        r
    })
}

/// Exact certificates of the D² test matrix at `λ = ±1/10`, both signs.
pub fn d2_certificates() -> VerificationReport {
    let mut mats = Vec::new();
    for lambda in [q(-1, 10), q(1, 10)] {
        for sign in Sign::BOTH {
            mats.push((format!("D2 test matrix, lambda = {lambda}, sign {}", sign.symbol()), d2_test_matrix(&lambda, sign)));
        }
    }
    certificate_report("domain2.certificates", mats)
}

/// Exact certificates of `A₅ − 16⁻¹(192, ±2, 0; …)`, both signs.
pub fn d3_certificates() -> VerificationReport {
    let mats = Sign::BOTH
        .iter()
        .map(|&sign| {
            (
                format!("A5 minus dominating matrix, sign {}", sign.symbol()),
                d3_difference(sign).scaled(&q(-1, 1)),
            )
        })
        .collect();
    certificate_report("domain3.certificates", mats)
}

/// D²: exact certificates, the λ scan, convexity of the determinant, and the
/// forms of `b₁ + 320b₄ − 320000b₃` and `B₂`.
pub fn verify_domain2(grid: &GridSpec) -> Result<VerificationReport> {
    verify_domain2_with(grid, &VerifyOptions::default())
}

pub fn verify_domain2_with(grid: &GridSpec, opts: &VerifyOptions) -> Result<VerificationReport> {
    grid.validate()?;
    let g = restrict(grid, GridRegion::D2);
    let subs = vec![
        d2_certificates(),
        d2_exact_scan(),
        d2_convexity(),
        form_scan("domain2.block_form", &g, Region::D2, &D2_TERMS, opts, true),
        form_scan("domain2.piece_form", &g, Region::D2, &piece_terms(Piece::B2), opts, true),
    ];
    Ok(VerificationReport::aggregate("domain2", subs))
}

/// The bound `ξ''_{(2300/16)(b₃+64b₆)} ≥ (c/t)y²w·16⁻¹(2300E² + 46S²)` on
/// subordinate directions, as a constrained maximum of the difference.
fn d3_partial_bound(grid: &GridSpec, opts: &VerifyOptions) -> VerificationReport {
    let tol = opts.tol(TOL_CONCAVITY);
    let samples = opts.lambda_samples;
    scan("domain3.partial_bound", grid, tol, |params, p| {
        let t = p.validate(params).ok()?;
        if classify_raw(p.x, p.y, t, params) != Region::D3 {
            return None;
        }
        let c = params.c();
        let mut jet = block_jet_raw(Block::B3, p.as_array(), c);
        jet.add_scaled(64.0, &block_jet_raw(Block::B6, p.as_array(), c));
        let k = (c / t) * p.w / 16.0;
        let mut m = SymmetricMatrix::zeros(4);
        for i in 0..4 {
            for j in i..4 {
                m.set(i, j, -2300.0 / 16.0 * jet.hessian[i][j]);
            }
        }
        m.set(1, 1, m.get(1, 1) + k * 2300.0);
        m.set(3, 3, m.get(3, 3) + k * 46.0 * p.y * p.y / (p.v * p.v));
        let rel = m.congruence_diag(&[1.0, 1.0, p.w, p.v]);
        let best = max_over_lambda(&rel, samples);
        let [d, rr, ss] = best.vector;
        let dir = Direction::new(d, best.lambda * d, rr * p.w, ss * p.v);
        Some(Sample::new(best.value / point_scale(p, params), best.value).with_direction(dir))
    })
}

/// D³: exact certificates for `A₅`, the partial bound on `b₃ + 64b₆`, and the
/// forms of `b₁ + 32b₅ − 4600b₃ − 294400b₆` and `B₃`.
pub fn verify_domain3(grid: &GridSpec) -> Result<VerificationReport> {
    verify_domain3_with(grid, &VerifyOptions::default())
}

pub fn verify_domain3_with(grid: &GridSpec, opts: &VerifyOptions) -> Result<VerificationReport> {
    grid.validate()?;
    let g = restrict(grid, GridRegion::D3);
    let subs = vec![
        d3_certificates(),
        timed(|| d3_partial_bound(&g, opts)),
        form_scan("domain3.block_form", &g, Region::D3, &D3_TERMS, opts, false),
        form_scan("domain3.piece_form", &g, Region::D3, &piece_terms(Piece::B3), opts, false),
    ];
    Ok(VerificationReport::aggregate("domain3", subs))
}

/// Constrained concavity of `B` on each region: the subordinate form of the
/// piece in force is nonpositive.
pub fn verify_concavity(grid: &GridSpec) -> Result<VerificationReport> {
    verify_concavity_with(grid, &VerifyOptions::default())
}

pub fn verify_concavity_with(grid: &GridSpec, opts: &VerifyOptions) -> Result<VerificationReport> {
    grid.validate()?;
    let subs = [
        (GridRegion::D1, Region::D1, Piece::B1),
        (GridRegion::D2, Region::D2, Piece::B2),
        (GridRegion::D3, Region::D3, Piece::B3),
    ]
    .into_iter()
    .map(|(gr, region, piece)| {
        let name = format!("concavity.{}", region.name());
        form_scan(&name, &restrict(grid, gr), region, &piece_terms(piece), opts, false)
    })
    .collect();
    Ok(VerificationReport::aggregate("concavity", subs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(region: GridRegion, n: usize) -> GridSpec {
        GridSpec::angular(region, vec![2.0], n).interior(true)
    }

    #[test]
    fn initial_example() {
        let params = DomainParams::new(2.0).unwrap();
        let p = BellmanPoint::new(1.0, 1.0, 1.0, 1.0);
        let s = global_sample(GlobalCheck::Initial, &params, &p).unwrap();
        let c: f64 = 2.0;
        let t = 1.0;
        let bound = 2.0 + 32.0 * (c / t).powf(0.75) - 320_000.0 * (c / t) * c;
        assert!(s.value <= bound && s.value < 0.0);
    }

    #[test]
    fn majorization_tight_on_axis() {
        let params = DomainParams::new(2.0).unwrap();
        let p = BellmanPoint::new(0.0, 1.0, 1.0, 1.0);
        let s = global_sample(GlobalCheck::Majorization, &params, &p).unwrap();
        assert!(s.value.abs() < 1e-15, "B - G = {}", s.value);
    }

    #[test]
    fn boundary_detection() {
        let params = DomainParams::new(3.0).unwrap();
        let p = BellmanPoint::new(0.5, 5.0, 1.0, 1.5);
        assert_eq!(nearest_boundary(&p, 1.5, &params), Some((Piece::B2, Piece::B3)));
        let q = BellmanPoint::new(0.5, 4.0, 1.0, 1.5);
        assert_eq!(nearest_boundary(&q, 1.5, &params), None);
    }

    #[test]
    fn small_global_grids_pass() {
        for check in [GlobalCheck::Initial, GlobalCheck::Majorization, GlobalCheck::Neumann] {
            let region = if check == GlobalCheck::Initial { GridRegion::Initial } else { GridRegion::Full };
            let r = verify_global(check, &grid(region, 2_000)).unwrap();
            assert!(r.pass, "{check:?}: {:?}", r.worst_violation);
            assert!(r.total_points > 0);
        }
        let r = verify_global(GlobalCheck::Ordering, &grid(GridRegion::Full, 2_000)).unwrap();
        assert!(r.pass, "{:?}", r.witness);
        for b in [GridRegion::Boundary12, GridRegion::Boundary23] {
            let r = verify_global(GlobalCheck::Continuity, &grid(b, 500)).unwrap();
            assert!(r.pass && r.skipped_points == 0, "{r:?}");
        }
    }

    #[test]
    fn matrix_checks_small_grid() {
        let g = GridSpec::coordinate(vec![2.0, 10.0], 7);
        for part in MatrixPart::ALL {
            let r = verify_matrices(part, &g).unwrap();
            assert!(r.pass, "{part:?}: {:?} {:?}", r.worst_violation, r.witness);
            assert_eq!(r.disagreements, 0);
        }
    }

    #[test]
    fn certificates_and_convexity() {
        let r = d2_certificates();
        assert!(r.pass && r.certificates.len() == 4);
        let r = d3_certificates();
        assert!(r.pass && r.certificates.len() == 2);
        assert_eq!(r.certificates[0].leading_minors, vec!["-10", "111/64", "-1767/1024"]);
        assert_eq!(r.certificates[1].leading_minors, vec!["-10", "95/64", "-1223/1024"]);
        for sign in Sign::BOTH {
            assert_eq!(d2_det_second_derivative(sign), Some(q(203, 16)));
        }
        assert!(d2_convexity().pass);
        assert!(d2_exact_scan().pass);
    }

    #[test]
    fn domain_checks_small_grids() {
        for (name, r) in [
            ("d1", verify_domain1(&grid(GridRegion::D1, 600)).unwrap()),
            ("d2", verify_domain2(&grid(GridRegion::D2, 600)).unwrap()),
            ("d3", verify_domain3(&grid(GridRegion::D3, 600)).unwrap()),
            ("concavity", verify_concavity(&grid(GridRegion::Full, 600)).unwrap()),
        ] {
            assert!(r.pass, "{name}: {:#?}", r.flatten().iter().map(|s| (&s.check, s.pass, s.worst_violation)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn report_is_deterministic() {
        let g = grid(GridRegion::D2, 400);
        let mut a = verify_concavity(&g).unwrap();
        let mut b = verify_concavity(&g).unwrap();
        a.strip_timing();
        b.strip_timing();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
