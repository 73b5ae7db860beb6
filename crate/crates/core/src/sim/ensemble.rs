//! Seeded tree ensembles, run in parallel with a deterministic merge.
//!
//! Tree `k` of an ensemble draws from `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `k`, so each tree is reproducible on its own and the result does
//! not depend on the number of workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{
    check_maximal, check_node_supermartingale, check_weighted_l2, supermartingale_params,
    L2Ratios, MaximalRatios, TOL_SUPERMARTINGALE,
};
use super::laws::{
    greedy_sign, target_power, target_two_point, HLaw, LeafLaw, LeafParams,
};
use super::tree::{build_martingale, build_weight, children, level, node_count, DyadicTree, MAX_DEPTH};
use crate::error::{Error, Result};
use crate::verifier::{VerificationReport, Witness};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub depth: usize,
    pub seed: u64,
    pub c_target: f64,
    pub leaf_law: LeafLaw,
    pub h_law: HLaw,
    pub trees: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            depth: 8,
            seed: 0,
            c_target: 4.0,
            leaf_law: LeafLaw::TwoPoint,
            h_law: HLaw::Greedy,
            trees: 100,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        validate_depth(self.depth)?;
        if !(self.c_target.is_finite() && self.c_target >= 1.0) {
            return Err(Error::Precondition(format!(
                "target characteristic must be finite and >= 1, got {}",
                self.c_target
            )));
        }
        self.h_law.validate()?;
        if let LeafLaw::User(w) = &self.leaf_law {
            if w.len() != 1 << self.depth {
                return Err(Error::Precondition(format!(
                    "{} user leaf weights given, depth {} needs {}",
                    w.len(),
                    self.depth,
                    1usize << self.depth
                )));
            }
            build_weight(w)?;
        }
        Ok(())
    }
}

fn validate_depth(depth: usize) -> Result<()> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::Precondition(format!(
            "depth must be in 1..={MAX_DEPTH}, got {depth}"
        )));
    }
    Ok(())
}

/// Random trees with per-tree depth, target and laws, for stress testing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomEnsemble {
    pub seed: u64,
    pub trees: usize,
    pub max_depth: usize,
    pub max_characteristic: f64,
}

/// A generated tree and how it was made.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedTree {
    pub tree: DyadicTree,
    pub leaf_params: LeafParams,
    /// Set when the requested family could not reach the target with the drawn
    /// parameters and two-point leaves (breakpoint 1/2 if needed) were used.
    pub fallback: bool,
}

/// Per-node check outcome of one tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeCheckSummary {
    pub eligible: usize,
    pub skipped: usize,
    pub worst_violation: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeOutcome {
    pub index: usize,
    pub depth: usize,
    pub c_target: f64,
    pub leaf: LeafParams,
    pub fallback: bool,
    pub h_law: HLaw,
    pub l2: L2Ratios,
    pub maximal: MaximalRatios,
    pub supermartingale: NodeCheckSummary,
}

impl TreeOutcome {
    pub fn ratios_pass(&self) -> bool {
        self.l2.ratio <= 1.0 && self.maximal.one_sided <= 1.0 && self.maximal.two_sided <= 1.0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub trees: usize,
    pub max_l2_ratio: f64,
    pub max_one_sided_ratio: f64,
    pub max_two_sided_ratio: f64,
    pub max_raw_ratio: f64,
    pub max_characteristic: f64,
    /// Trees with some ratio above 1.
    pub ratio_violations: usize,
    /// Trees with a per-node violation above tolerance.
    pub supermartingale_violations: usize,
    pub eligible_nodes: usize,
    pub skipped_nodes: usize,
    pub fallbacks: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub summary: EnsembleSummary,
    /// Per-node check merged over all trees; the witness comes from the tree
    /// with the worst violation.
    pub supermartingale: VerificationReport,
    pub trees: Vec<TreeOutcome>,
}

/// Builds one tree from `rng`: `X₀ ~ U(−1, 1)`, one `δ ~ U(−1, 1)` per
/// internal node, then the leaf parameters, then `H`.
pub fn generate_tree(
    depth: usize,
    c_target: f64,
    leaf_law: &LeafLaw,
    h_law: HLaw,
    rng: &mut ChaCha8Rng,
) -> Result<GeneratedTree> {
    validate_depth(depth)?;
    h_law.validate()?;
    let internal = node_count(depth - 1);
    let x0: f64 = rng.gen_range(-1.0..=1.0);
    let increments: Vec<f64> = (0..internal).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let theta: f64 = rng.gen_range(0.05..0.95);

    // A breakpoint at 1/2 splits the root evenly, which reaches any target.
    let two_point = |theta: f64| match target_two_point(depth, theta, c_target) {
        Ok((p, f)) => Ok((p, f, false)),
        Err(Error::Precondition(_)) => {
            let (p, f) = target_two_point(depth, 0.5, c_target)?;
            Ok((p, f, true))
        }
        Err(e) => Err(e),
    };
    let (leaf_params, weights, fallback) = match leaf_law {
        LeafLaw::User(w) => (LeafParams::User, build_weight(w)?, false),
        LeafLaw::TwoPoint => two_point(theta)?,
        LeafLaw::Power => match target_power(depth, c_target) {
            Ok((p, f)) => (p, f, false),
            Err(Error::Precondition(_)) => {
                let (p, f, _) = two_point(theta)?;
                (p, f, true)
            }
            Err(e) => return Err(e),
        },
    };
    if weights.w.len() != node_count(depth) {
        return Err(Error::Precondition(format!(
            "leaf weights do not match depth {depth}"
        )));
    }

    let x = build_martingale(x0, &increments)?;
    let n = x.len();
    let mut h = vec![0.0; n];
    let mut y = vec![0.0; n];
    h[0] = match h_law {
        HLaw::Constant(c) => c,
        HLaw::Random => rng.gen_range(-1.0..=1.0),
        HLaw::Alternating | HLaw::Greedy => 1.0,
    };
    y[0] = h[0] * x0;
    for (i, &delta) in increments.iter().enumerate() {
        let (l, r) = children(i);
        let hc = match h_law {
            HLaw::Constant(c) => c,
            HLaw::Alternating => {
                if level(i).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            }
            HLaw::Greedy => greedy_sign(y[i], delta, weights.w[l], weights.w[r]),
            HLaw::Random => rng.gen_range(-1.0..=1.0),
        };
        h[l] = hc;
        h[r] = hc;
        y[l] = y[i] + hc * delta;
        y[r] = y[i] - hc * delta;
    }
    let tree = DyadicTree::assemble(x, weights, h)?;
    Ok(GeneratedTree {
        tree,
        leaf_params,
        fallback,
    })
}

fn stream_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Tree `index` of the ensemble described by `config`.
pub fn config_tree(config: &SimConfig, index: usize) -> Result<GeneratedTree> {
    let mut rng = stream_rng(config.seed, index);
    generate_tree(config.depth, config.c_target, &config.leaf_law, config.h_law, &mut rng)
}

/// Tree `index` of a random ensemble, with its depth and target.
pub fn random_tree(spec: &RandomEnsemble, index: usize) -> Result<(GeneratedTree, usize, f64, HLaw)> {
    let mut rng = stream_rng(spec.seed, index);
    let depth = rng.gen_range(1..=spec.max_depth.max(1));
    let c_target = (rng.gen::<f64>() * spec.max_characteristic.ln()).exp();
    let leaf_law = if rng.gen_bool(0.5) {
        LeafLaw::Power
    } else {
        LeafLaw::TwoPoint
    };
    let h_law = match rng.gen_range(0..6) {
        0..=2 => HLaw::Greedy,
        3 => HLaw::Alternating,
        4 => HLaw::Random,
        _ => HLaw::Constant(rng.gen_range(-1.0..=1.0)),
    };
    let g = generate_tree(depth, c_target, &leaf_law, h_law, &mut rng)?;
    Ok((g, depth, c_target, h_law))
}

/// All checks on one tree.
pub fn evaluate_tree(
    index: usize,
    c_target: f64,
    h_law: HLaw,
    g: &GeneratedTree,
) -> Result<(TreeOutcome, VerificationReport)> {
    let params = supermartingale_params(&g.tree);
    let node = check_node_supermartingale(&g.tree, &params)?;
    let outcome = TreeOutcome {
        index,
        depth: g.tree.depth(),
        c_target,
        leaf: g.leaf_params,
        fallback: g.fallback,
        h_law,
        l2: check_weighted_l2(&g.tree)?,
        maximal: check_maximal(&g.tree)?,
        supermartingale: NodeCheckSummary {
            eligible: node.total_points,
            skipped: node.skipped_points,
            worst_violation: node.worst_violation,
            pass: node.pass,
        },
    };
    Ok((outcome, node))
}

fn merge(results: Vec<(TreeOutcome, VerificationReport)>) -> EnsembleReport {
    let mut summary = EnsembleSummary {
        pass: true,
        ..Default::default()
    };
    let mut node = VerificationReport::empty("supermartingale", TOL_SUPERMARTINGALE);
    let mut worst: Option<(f64, Witness)> = None;
    let mut trees = Vec::with_capacity(results.len());
    for (o, r) in results {
        summary.trees += 1;
        summary.max_l2_ratio = summary.max_l2_ratio.max(o.l2.ratio);
        summary.max_one_sided_ratio = summary.max_one_sided_ratio.max(o.maximal.one_sided);
        summary.max_two_sided_ratio = summary.max_two_sided_ratio.max(o.maximal.two_sided);
        summary.max_raw_ratio = summary.max_raw_ratio.max(o.l2.raw_ratio);
        summary.max_characteristic = summary.max_characteristic.max(o.l2.characteristic);
        summary.ratio_violations += usize::from(!o.ratios_pass());
        summary.supermartingale_violations += usize::from(!r.pass);
        summary.eligible_nodes += r.total_points;
        summary.skipped_nodes += r.skipped_points;
        summary.fallbacks += usize::from(o.fallback);
        node.total_points += r.total_points;
        node.skipped_points += r.skipped_points;
        node.pass &= r.pass;
        if let (Some(v), Some(w)) = (r.worst_violation, r.witness) {
            if worst.as_ref().is_none_or(|(cur, _)| v > *cur) {
                worst = Some((v, w));
            }
        }
        trees.push(o);
    }
    if let Some((v, w)) = worst {
        node.worst_violation = Some(v);
        node.witness = Some(w);
    }
    summary.pass = summary.ratio_violations == 0 && summary.supermartingale_violations == 0;
    EnsembleReport {
        summary,
        supermartingale: node,
        trees,
    }
}

/// Runs `config.trees` trees of one configuration.
pub fn run_ensemble(config: &SimConfig) -> Result<EnsembleReport> {
    config.validate()?;
    let results = (0..config.trees)
        .into_par_iter()
        .map(|k| {
            let g = config_tree(config, k)?;
            evaluate_tree(k, config.c_target, config.h_law, &g)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(results))
}

/// Runs a random ensemble with per-tree depth in `1..=max_depth`, target
/// log-uniform on `[1, max_characteristic]`, power or two-point leaves and a
/// mix of multiplier laws weighted towards the greedy one.
pub fn run_random_ensemble(spec: &RandomEnsemble) -> Result<EnsembleReport> {
    validate_depth(spec.max_depth)?;
    if !(spec.max_characteristic.is_finite() && spec.max_characteristic >= 1.0) {
        return Err(Error::Precondition(format!(
            "max characteristic must be finite and >= 1, got {}",
            spec.max_characteristic
        )));
    }
    let results = (0..spec.trees)
        .into_par_iter()
        .map(|k| {
            let (g, _, c_target, h_law) = random_tree(spec, k)?;
            evaluate_tree(k, c_target, h_law, &g)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(results))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c_target: f64,
    pub trees: usize,
    pub mean_characteristic: f64,
    /// Largest `‖Y‖_{L²(W)} / ‖X‖_{L²(W)}` in the ensemble.
    pub best_raw_ratio: f64,
    pub max_l2_ratio: f64,
}

/// Best observed norm ratio for each target characteristic. Reporting only;
/// no trend is asserted.
pub fn sweep_characteristic(config: &SimConfig, char_grid: &[f64]) -> Result<Vec<SweepRow>> {
    if config.trees == 0 {
        return Ok(Vec::new());
    }
    char_grid
        .iter()
        .map(|&c| {
            let cfg = SimConfig {
                c_target: c,
                ..config.clone()
            };
            let rep = run_ensemble(&cfg)?;
            let n = rep.trees.len() as f64;
            Ok(SweepRow {
                c_target: c,
                trees: rep.trees.len(),
                mean_characteristic: rep.trees.iter().map(|t| t.l2.characteristic).sum::<f64>() / n,
                best_raw_ratio: rep.summary.max_raw_ratio,
                max_l2_ratio: rep.summary.max_l2_ratio,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trees_are_reproducible_and_distinct() {
        let cfg = SimConfig::default();
        let a = config_tree(&cfg, 3).unwrap();
        let b = config_tree(&cfg, 3).unwrap();
        let c = config_tree(&cfg, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.tree.x, c.tree.x);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = SimConfig {
            trees: 12,
            depth: 5,
            ..SimConfig::default()
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_ensemble(&cfg)).unwrap();
        let mut b = four.install(|| run_ensemble(&cfg)).unwrap();
        b.supermartingale.wall_time_ms = a.supermartingale.wall_time_ms;
        assert_eq!(a, b);
    }

    #[test]
    fn greedy_is_at_least_as_large_one_step() {
        let cfg = SimConfig {
            depth: 1,
            ..SimConfig::default()
        };
        for k in 0..20 {
            let g = config_tree(&cfg, k).unwrap();
            let t = &g.tree;
            let e = |h: f64| {
                0.5 * ((t.y[0] + h * (t.x[1] - t.x[0])).powi(2) * t.w[1]
                    + (t.y[0] + h * (t.x[2] - t.x[0])).powi(2) * t.w[2])
            };
            assert!(e(t.h[1]) >= e(-t.h[1]));
        }
    }

    #[test]
    fn empty_sweep_and_empty_ensemble() {
        let cfg = SimConfig {
            trees: 0,
            ..SimConfig::default()
        };
        assert!(sweep_characteristic(&cfg, &[1.0, 2.0]).unwrap().is_empty());
        let rep = run_ensemble(&cfg).unwrap();
        assert!(rep.trees.is_empty() && rep.summary.pass);
    }

    #[test]
    fn depth_cap() {
        let cfg = SimConfig {
            depth: 25,
            ..SimConfig::default()
        };
        assert!(matches!(run_ensemble(&cfg), Err(Error::Precondition(_))));
    }
}
