//! Exact tree expectations: the per-node supermartingale property of `B` and
//! the weighted L² and maximal inequalities.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::tree::{children, DyadicTree};
use crate::bellman::{bellman_value, BellmanPoint, Direction};
use crate::error::{Error, Result};
use crate::kernels::{DomainParams, CLAMP_SLACK, MAJORANT_C_SQUARED};
use crate::verifier::{point_scale, VerificationReport, Witness};

pub const TOL_SUPERMARTINGALE: f64 = 1e-9;

/// Characteristic bound used for `B` in the node check: twice the tree's
/// characteristic, so that chords between children, whose product can rise
/// above both endpoints, usually stay in the domain.
pub fn supermartingale_params(tree: &DyadicTree) -> DomainParams {
    DomainParams::new(2.0 * tree.characteristic()).expect("2 * characteristic > 1")
}

fn node_point(tree: &DyadicTree, i: usize) -> BellmanPoint {
    BellmanPoint::new(tree.x[i], tree.y[i], tree.w[i], tree.v[i])
}

/// Whether `t(s) = (w_l + sΔw)(v_l + sΔv)` stays in `[1, c]` for `s ∈ [0, 1]`.
/// `t` is quadratic in `s`, so the endpoints and the vertex decide.
pub fn chord_in_domain(wl: f64, vl: f64, wr: f64, vr: f64, c: f64) -> bool {
    let dw = wr - wl;
    let dv = vr - vl;
    let t = |s: f64| (wl + s * dw) * (vl + s * dv);
    let mut values = vec![t(0.0), t(1.0)];
    let a = dw * dv;
    if a != 0.0 {
        let s = -(wl * dv + vl * dw) / (2.0 * a);
        if s > 0.0 && s < 1.0 {
            values.push(t(s));
        }
    }
    let slack = CLAMP_SLACK * c;
    values.iter().all(|&x| x >= 1.0 - slack && x <= c + slack)
}

/// `B(parent) − ½[B(left) + B(right)] ≥ −tol·scale` at every internal node
/// whose child chord lies in the domain; other nodes are skipped and counted.
///
/// `scale` is the largest [`point_scale`] of the three points. The witness is
/// the parent with the direction towards the right child.
pub fn check_node_supermartingale(
    tree: &DyadicTree,
    params: &DomainParams,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let c = params.c();
    let mut report = VerificationReport::empty("supermartingale", TOL_SUPERMARTINGALE);
    let mut worst: Option<(f64, usize, f64)> = None;
    for i in tree.internal_nodes() {
        let (l, r) = children(i);
        if !chord_in_domain(tree.w[l], tree.v[l], tree.w[r], tree.v[r], c) {
            report.skipped_points += 1;
            continue;
        }
        let (p, pl, pr) = (node_point(tree, i), node_point(tree, l), node_point(tree, r));
        let gap = bellman_value(&p, params)?
            - 0.5 * (bellman_value(&pl, params)? + bellman_value(&pr, params)?);
        let scale = point_scale(&p, params)
            .max(point_scale(&pl, params))
            .max(point_scale(&pr, params));
        let violation = -gap / scale;
        report.total_points += 1;
        if worst.is_none_or(|(v, _, _)| violation > v) {
            worst = Some((violation, i, gap));
        }
    }
    if let Some((v, i, gap)) = worst {
        let r = children(i).1;
        report.worst_violation = Some(v);
        report.pass = v <= TOL_SUPERMARTINGALE;
        report.witness = Some(Witness {
            c,
            point: node_point(tree, i),
            direction: Some(Direction::new(
                tree.x[r] - tree.x[i],
                tree.y[r] - tree.y[i],
                tree.w[r] - tree.w[i],
                tree.v[r] - tree.v[i],
            )),
            value: gap,
        });
    }
    report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    Ok(report)
}

/// Weighted L² comparison at the leaf level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2Ratios {
    pub characteristic: f64,
    /// `E[Y²W]`.
    pub y_norm_sq: f64,
    /// `E[X²W]`.
    pub x_norm_sq: f64,
    /// `E[Y²W] / (1228800·char²·E[X²W])`; the inequality holds iff `≤ 1`.
    pub ratio: f64,
    /// `‖Y‖_{L²(W)} / ‖X‖_{L²(W)}`.
    pub raw_ratio: f64,
}

/// Maximal-function comparisons at the leaf level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalRatios {
    pub characteristic: f64,
    /// `E[(Y* − Y)²W] / (1228800·char²·E[X²W])`.
    pub one_sided: f64,
    /// `E[(|Y|*)²W] / (16·1228800·char²·E[X²W])`.
    pub two_sided: f64,
}

fn leaf_mean<F: Fn(usize) -> f64>(tree: &DyadicTree, f: F) -> f64 {
    let leaves = tree.leaves();
    let n = leaves.len() as f64;
    leaves.map(f).sum::<f64>() / n
}

fn normalised(lhs: f64, base: f64, denom: f64) -> Result<f64> {
    if base > 0.0 {
        Ok(lhs / (denom * base))
    } else if lhs == 0.0 {
        Ok(0.0)
    } else {
        Err(Error::Internal(format!(
            "E[X^2 W] = 0 while the left-hand side is {lhs}"
        )))
    }
}

fn x_norm_sq(tree: &DyadicTree) -> f64 {
    leaf_mean(tree, |j| tree.x[j] * tree.x[j] * tree.w[j])
}

pub fn check_weighted_l2(tree: &DyadicTree) -> Result<L2Ratios> {
    let characteristic = tree.characteristic();
    let x2 = x_norm_sq(tree);
    let y2 = leaf_mean(tree, |j| tree.y[j] * tree.y[j] * tree.w[j]);
    let ratio = normalised(y2, x2, MAJORANT_C_SQUARED * characteristic * characteristic)?;
    let raw_ratio = normalised(y2, x2, 1.0)?.sqrt();
    Ok(L2Ratios {
        characteristic,
        y_norm_sq: y2,
        x_norm_sq: x2,
        ratio,
        raw_ratio,
    })
}

pub fn check_maximal(tree: &DyadicTree) -> Result<MaximalRatios> {
    let characteristic = tree.characteristic();
    let x2 = x_norm_sq(tree);
    let abs_star = tree.abs_ystar();
    let gap = leaf_mean(tree, |j| (tree.ystar[j] - tree.y[j]).powi(2) * tree.w[j]);
    let two = leaf_mean(tree, |j| abs_star[j] * abs_star[j] * tree.w[j]);
    let denom = MAJORANT_C_SQUARED * characteristic * characteristic;
    Ok(MaximalRatios {
        characteristic,
        one_sided: normalised(gap, x2, denom)?,
        two_sided: normalised(two, x2, 16.0 * denom)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::tree::{build_martingale, build_weight};

    fn tree(leaves: &[f64], x0: f64, inc: &[f64], h: Vec<f64>) -> DyadicTree {
        let x = build_martingale(x0, inc).unwrap();
        DyadicTree::assemble(x, build_weight(leaves).unwrap(), h).unwrap()
    }

    #[test]
    fn identity_transform_ratio() {
        let t = tree(&[1.0, 2.0, 3.0, 4.0], 0.2, &[0.5, 0.3, -0.7], vec![1.0; 7]);
        let r = check_weighted_l2(&t).unwrap();
        assert_eq!(r.y_norm_sq, r.x_norm_sq);
        assert_eq!(r.raw_ratio, 1.0);
        let want = 1.0 / (MAJORANT_C_SQUARED * r.characteristic.powi(2));
        assert!((r.ratio - want).abs() <= 1e-15 * want);
    }

    #[test]
    fn zero_martingale() {
        let t = tree(&[1.0, 5.0], 0.0, &[0.0], vec![1.0; 3]);
        let r = check_weighted_l2(&t).unwrap();
        assert_eq!((r.ratio, r.raw_ratio), (0.0, 0.0));
        let m = check_maximal(&t).unwrap();
        assert_eq!((m.one_sided, m.two_sided), (0.0, 0.0));
        let params = supermartingale_params(&t);
        let rep = check_node_supermartingale(&t, &params).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.worst_violation, Some(0.0));
    }

    #[test]
    fn maximal_enumeration() {
        // X₀ = 1, increments ±1 then ±1/2, H ≡ 1, constant weight.
        // Leaf paths: 1→2→2.5, 1→2→1.5, 1→0→0.5, 1→0→−0.5.
        let t = tree(&[1.0; 4], 1.0, &[1.0, 0.5, 0.5], vec![1.0; 7]);
        assert_eq!(&t.ystar[3..], &[2.5, 2.0, 1.0, 1.0]);
        let m = check_maximal(&t).unwrap();
        // E[(Y*−Y)²] = (0 + 0.25 + 0.25 + 2.25)/4; E[X²] = (6.25 + 2.25 + 0.25 + 0.25)/4.
        let want = (2.75 / 4.0) / (MAJORANT_C_SQUARED * (9.0 / 4.0));
        assert!((m.one_sided - want).abs() <= 1e-15 * want);
        // |Y|* leaves: 2.5, 2, 1, 1.
        let want2 = ((6.25 + 4.0 + 1.0 + 1.0) / 4.0) / (16.0 * MAJORANT_C_SQUARED * (9.0 / 4.0));
        assert!((m.two_sided - want2).abs() <= 1e-15 * want2);
    }

    #[test]
    fn chord_eligibility() {
        assert!(chord_in_domain(1.0, 1.0, 4.0, 0.25, 4.0));
        // Midpoint product (2.5)(0.625) = 1.5625 exceeds c = 1.5.
        assert!(!chord_in_domain(1.0, 1.0, 4.0, 0.25, 1.5));
        assert!(chord_in_domain(1.0, 1.0, 4.0, 0.25, 1.5625));
    }

    #[test]
    fn constant_weight_supermartingale() {
        let t = tree(&[2.0; 8], 0.3, &[1.0, -0.4, 0.8, 0.2, 0.1, -0.6, 0.9], vec![1.0; 15]);
        let params = DomainParams::new(1.0 + 1e-6).unwrap();
        let rep = check_node_supermartingale(&t, &params).unwrap();
        assert_eq!((rep.total_points, rep.skipped_points), (7, 0));
        assert!(rep.pass, "{rep:?}");
    }
}
