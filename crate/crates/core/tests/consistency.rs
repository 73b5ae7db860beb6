//! Agreement between modules at 10³ points: evaluation, the majorization
//! gap, the constrained maximiser and the tree check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bellman_verify::bellman::{
    bellman_value, classify_region, directional_second_derivative, eval_bellman, eval_g,
    majorization_gap, BellmanPoint,
};
use bellman_verify::sim::{
    build_martingale, build_weight, check_node_supermartingale, DyadicTree,
};
use bellman_verify::verifier::{constrained_max_form, point_scale};
use bellman_verify::DomainParams;

fn sample(rng: &mut ChaCha8Rng, c: f64) -> BellmanPoint {
    let t = (rng.gen::<f64>() * c.ln()).exp();
    let w = rng.gen_range(-2.0f64..2.0).exp();
    let r = rng.gen_range(-3.0f64..3.0).exp();
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    BellmanPoint::new(r * a.cos(), r * a.sin(), w, t / w)
}

#[test]
fn evaluation_paths_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..1_000 {
        let c = [1.5, 2.0, 4.0, 10.0, 100.0][k % 5];
        let params = DomainParams::new(c).unwrap();
        let p = sample(&mut rng, c);
        let e = eval_bellman(&p, &params).unwrap();
        assert_eq!(e.value, bellman_value(&p, &params).unwrap());
        assert_eq!(e.region, classify_region(&p, &params).unwrap());
        let g = eval_g(&p, &params).unwrap();
        let gap = majorization_gap(&p, &params).unwrap();
        let size = e.value.abs() + g.abs();
        assert!((gap - (e.value - g)).abs() <= 1e-12 * size.max(1.0), "{p:?}");
    }
}

#[test]
fn constrained_maximiser_matches_directional_derivative() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..1_000 {
        let c = [1.5, 2.0, 4.0, 10.0, 100.0][k % 5];
        let params = DomainParams::new(c).unwrap();
        let p = sample(&mut rng, c);
        let (m, dir) = constrained_max_form(&p, &params, 41).unwrap();
        let form = directional_second_derivative(&p, &dir, &params).unwrap();
        let scale = point_scale(&p, &params);
        assert!((form - m).abs() <= 1e-9 * scale.max(m.abs()), "{form} vs {m} at {p:?}");
        assert!(m <= 1e-9 * scale);
    }
}

/// A depth-1 tree is a single chord; its node check is the midpoint
/// concavity of `B` along a subordinate direction.
#[test]
fn node_check_matches_midpoint_concavity() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1_000 {
        let a = rng.gen_range(-2.0f64..2.0).exp();
        let b = rng.gen_range(-2.0f64..2.0).exp();
        let weights = build_weight(&[a, b]).unwrap();
        let x0 = rng.gen_range(-1.0..1.0);
        let d = rng.gen_range(-1.0..1.0);
        let h = rng.gen_range(-1.0..=1.0);
        let h0 = rng.gen_range(-1.0..=1.0);
        let x = build_martingale(x0, &[d]).unwrap();
        let tree = DyadicTree::assemble(x, weights, vec![h0, h, h]).unwrap();
        let params = DomainParams::new(2.0 * tree.characteristic()).unwrap();
        let rep = check_node_supermartingale(&tree, &params).unwrap();
        let pt = |i: usize| BellmanPoint::new(tree.x[i], tree.y[i], tree.w[i], tree.v[i]);
        let gap = bellman_value(&pt(0), &params).unwrap()
            - 0.5 * (bellman_value(&pt(1), &params).unwrap() + bellman_value(&pt(2), &params).unwrap());
        if rep.total_points == 1 {
            assert_eq!(rep.witness.unwrap().value, gap);
            assert!(rep.pass);
        } else {
            assert_eq!(rep.skipped_points, 1);
        }
    }
}
