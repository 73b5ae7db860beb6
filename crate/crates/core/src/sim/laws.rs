//! Leaf-weight families with characteristic targeting, and multiplier laws.
//!
//! Leaf weights are exact cell averages of a density on `[0, 1)` over the
//! `2ⁿ` dyadic cells. Node weights are then exact integrals at every depth,
//! and by Jensen's inequality refining the tree can only raise each node's
//! `V`, so the characteristic never decreases with depth.

use serde::{Deserialize, Serialize};

use super::tree::{build_weight, WeightField};
use crate::error::{Error, Result};

/// Relative accuracy of characteristic targeting.
pub const TARGET_RTOL: f64 = 0.01;

const BISECTION_STEPS: usize = 200;

/// `ln` of the largest two-point contrast `K` tried when targeting.
const MAX_LN_K: f64 = 18.420680743952367;

/// A family of leaf-weight vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafLaw {
    /// Density `x^α`, `α ∈ (−1, 0]`, targeted through `α`.
    Power,
    /// Density `1` on `[0, θ)` and `K ≥ 1` on `[θ, 1)`; `θ` is drawn per tree
    /// and `K` is targeted.
    TwoPoint,
    /// Fixed leaf weights; no targeting.
    User(Vec<f64>),
}

impl LeafLaw {
    pub fn name(&self) -> &'static str {
        match self {
            LeafLaw::Power => "power",
            LeafLaw::TwoPoint => "two_point",
            LeafLaw::User(_) => "user",
        }
    }
}

/// Concrete leaf-law parameters after targeting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LeafParams {
    Power { alpha: f64 },
    TwoPoint { theta: f64, k: f64 },
    User,
}

/// Cell averages of `x^α` over the `n` cells `[j/n, (j+1)/n)`.
pub fn power_leaves(depth: usize, alpha: f64) -> Vec<f64> {
    let n = 1usize << depth;
    let a1 = alpha + 1.0;
    let nf = n as f64;
    (0..n)
        .map(|j| {
            let lo = j as f64 / nf;
            let hi = (j + 1) as f64 / nf;
            if alpha == 0.0 {
                1.0
            } else {
                nf * (hi.powf(a1) - lo.powf(a1)) / a1
            }
        })
        .collect()
}

/// Cell averages of `1_{[0,θ)} + K·1_{[θ,1)}`.
pub fn two_point_leaves(depth: usize, theta: f64, k: f64) -> Vec<f64> {
    let n = 1usize << depth;
    let nf = n as f64;
    (0..n)
        .map(|j| {
            let lo = j as f64 / nf;
            let hi = (j + 1) as f64 / nf;
            let low_part = ((theta.min(hi) - lo) * nf).clamp(0.0, 1.0);
            low_part + (1.0 - low_part) * k
        })
        .collect()
}

fn check_target(c_target: f64) -> Result<()> {
    if !(c_target.is_finite() && c_target >= 1.0) {
        return Err(Error::Precondition(format!(
            "target characteristic must be finite and >= 1, got {c_target}"
        )));
    }
    Ok(())
}

fn within(char_: f64, target: f64) -> bool {
    (char_ / target - 1.0).abs() <= TARGET_RTOL
}

/// Bisection on a parameter `s ∈ [lo, hi]` along which the characteristic
/// increases.
fn bisect<F>(mut lo: f64, mut hi: f64, target: f64, f: F) -> Option<(f64, WeightField)>
where
    F: Fn(f64) -> WeightField,
{
    let top = f(hi);
    if top.characteristic < target * (1.0 - TARGET_RTOL) {
        return None;
    }
    if within(top.characteristic, target) {
        return Some((hi, top));
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let field = f(mid);
        if within(field.characteristic, target) {
            return Some((mid, field));
        }
        if field.characteristic < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    None
}

/// Power-law leaves with characteristic within 1% of `c_target`.
pub fn target_power(depth: usize, c_target: f64) -> Result<(LeafParams, WeightField)> {
    check_target(c_target)?;
    if c_target <= 1.0 + TARGET_RTOL {
        let field = build_weight(&power_leaves(depth, 0.0))?;
        return Ok((LeafParams::Power { alpha: 0.0 }, field));
    }
    // s = −α; the characteristic grows as α decreases towards −1.
    let make = |s: f64| build_weight(&power_leaves(depth, -s)).expect("power leaves are positive");
    bisect(0.0, 1.0 - 1e-12, c_target, make)
        .map(|(s, field)| (LeafParams::Power { alpha: -s }, field))
        .ok_or_else(|| {
            Error::Precondition(format!(
                "characteristic {c_target} is out of reach of power-law leaves at depth {depth}"
            ))
        })
}

/// Two-point leaves with breakpoint `theta` and characteristic within 1% of
/// `c_target`.
pub fn target_two_point(
    depth: usize,
    theta: f64,
    c_target: f64,
) -> Result<(LeafParams, WeightField)> {
    check_target(c_target)?;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Precondition(format!("theta must be in (0, 1), got {theta}")));
    }
    if c_target <= 1.0 + TARGET_RTOL {
        let field = build_weight(&two_point_leaves(depth, theta, 1.0))?;
        return Ok((LeafParams::TwoPoint { theta, k: 1.0 }, field));
    }
    let make = |s: f64| {
        build_weight(&two_point_leaves(depth, theta, s.exp())).expect("two-point leaves are positive")
    };
    // Node products increase with K. Targets that need K > 1e8 are treated
    // as out of reach.
    bisect(0.0, MAX_LN_K, c_target, make)
        .map(|(s, field)| (LeafParams::TwoPoint { theta, k: s.exp() }, field))
        .ok_or_else(|| {
            Error::Precondition(format!(
                "characteristic {c_target} is out of reach of two-point leaves with theta = {theta}"
            ))
        })
}

/// Rule for the predictable multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", content = "h", rename_all = "snake_case")]
pub enum HLaw {
    /// The same `h ∈ [−1, 1]` everywhere, including `H₀`.
    Constant(f64),
    /// `H₀ = 1` and `(−1)^k` on the edges leaving level `k`.
    Alternating,
    /// `±1` chosen at each node to maximise the one-step conditional
    /// expectation of `Y²W`; `H₀ = 1`.
    Greedy,
    /// Independent uniform values on `[−1, 1]`.
    Random,
}

impl HLaw {
    pub fn name(&self) -> &'static str {
        match self {
            HLaw::Constant(_) => "constant",
            HLaw::Alternating => "alternating",
            HLaw::Greedy => "greedy",
            HLaw::Random => "random",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            HLaw::Constant(h) if !(h.abs() <= 1.0) => Err(Error::Precondition(format!(
                "constant multiplier must lie in [-1, 1], got {h}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Greedy sign at a node with current `y`, increment `δ` (children
/// `x ± δ`) and child weights `w_l`, `w_r`:
///
/// `½[(y + hδ)²w_l + (y − hδ)²w_r] = const + hyδ(w_l − w_r) + h²(...)`,
/// maximised over `|h| ≤ 1` by `h = sign(yδ(w_l − w_r))`, or `+1` on ties.
pub fn greedy_sign(y: f64, delta: f64, w_l: f64, w_r: f64) -> f64 {
    if y * delta * (w_l - w_r) < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_leaf_average_is_exact_integral() {
        for alpha in [-0.9, -0.5, -0.1, 0.0] {
            let leaves = power_leaves(6, alpha);
            let mean: f64 = leaves.iter().sum::<f64>() / leaves.len() as f64;
            assert!((mean - 1.0 / (1.0 + alpha)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_cell_average() {
        let leaves = two_point_leaves(2, 0.3, 5.0);
        // Cells of width 1/4: [0, .25) low, [.25, .5) split 0.2/0.8, rest high.
        let want = [1.0, 0.2 + 0.8 * 5.0, 5.0, 5.0];
        for (a, b) in leaves.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn targeting_hits_one_percent() {
        for c in [1.5, 4.0, 16.0] {
            let (_, f) = target_two_point(8, 0.37, c).unwrap();
            assert!(within(f.characteristic, c), "{} vs {c}", f.characteristic);
            let (_, f) = target_power(10, c).unwrap();
            assert!(within(f.characteristic, c), "{} vs {c}", f.characteristic);
        }
        let (p, f) = target_power(4, 1.0).unwrap();
        assert_eq!((p, f.characteristic), (LeafParams::Power { alpha: 0.0 }, 1.0));
        // The first cell average blows up as α → −1, so even depth 1 reaches 16.
        let (_, f) = target_power(1, 16.0).unwrap();
        assert!(within(f.characteristic, 16.0));
        assert!(target_two_point(4, 0.5, 0.5).is_err());
    }

    #[test]
    fn power_characteristic_grows_as_alpha_decreases() {
        let mut last = 0.0;
        for alpha in [0.0, -0.3, -0.6, -0.9, -0.99] {
            let c = build_weight(&power_leaves(10, alpha)).unwrap().characteristic;
            assert!(c >= last);
            last = c;
        }
        assert!(last > 10.0);
    }

    #[test]
    fn greedy_sign_maximises_one_step() {
        let (y, d, wl, wr) = (0.7, -0.4, 1.3, 2.9);
        let f = |h: f64| 0.5 * ((y + h * d).powi(2) * wl + (y - h * d).powi(2) * wr);
        let h = greedy_sign(y, d, wl, wr);
        assert!(f(h) >= f(-h));
        assert_eq!(greedy_sign(0.0, 1.0, 1.0, 2.0), 1.0);
    }
}
