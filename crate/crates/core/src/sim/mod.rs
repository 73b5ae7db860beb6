//! Finite dyadic martingale models.
//!
//! A tree of depth `n` has `2ⁿ` equally likely leaves. Every expectation is an
//! exact leaf sum, so the inequalities are checked without sampling error.

pub mod checks;
pub mod ensemble;
pub mod laws;
pub mod tree;

pub use checks::{
    check_maximal, check_node_supermartingale, check_weighted_l2, chord_in_domain,
    supermartingale_params, L2Ratios, MaximalRatios, TOL_SUPERMARTINGALE,
};
pub use ensemble::{
    config_tree, generate_tree, random_tree, run_ensemble, run_random_ensemble,
    sweep_characteristic, EnsembleReport, EnsembleSummary, GeneratedTree, NodeCheckSummary,
    RandomEnsemble, SimConfig, SweepRow, TreeOutcome,
};
pub use laws::{power_leaves, target_power, target_two_point, two_point_leaves, HLaw, LeafLaw, LeafParams};
pub use tree::{build_martingale, build_transform, build_weight, DyadicTree, WeightField, MAX_DEPTH};
