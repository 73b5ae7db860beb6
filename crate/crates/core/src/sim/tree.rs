//! Binary-heap-indexed dyadic trees carrying `(X, Y, W, V, Y*)` and the
//! predictable multipliers `H`.
//!
//! Node `0` is the root, node `i` has children `2i + 1` and `2i + 2`, and the
//! leaves of a depth-`n` tree are `2ⁿ − 1 ..= 2ⁿ⁺¹ − 2`. `H[j]` for `j > 0` is
//! the multiplier on the edge into `j`; it is chosen at the parent, so
//! siblings share it. `H[0] = H₀` with `Y₀ = H₀X₀`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deepest tree the simulator will build (2²¹ − 1 nodes).
pub const MAX_DEPTH: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicTree {
    depth: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    pub ystar: Vec<f64>,
    pub h: Vec<f64>,
}

/// `W`, `V` on every node and the largest node product `W·V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightField {
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    pub characteristic: f64,
}

#[inline]
pub fn node_count(depth: usize) -> usize {
    (1usize << (depth + 1)) - 1
}

#[inline]
pub fn children(i: usize) -> (usize, usize) {
    (2 * i + 1, 2 * i + 2)
}

#[inline]
pub fn parent(i: usize) -> Option<usize> {
    (i > 0).then(|| (i - 1) / 2)
}

/// Level of node `i` (root = 0).
#[inline]
pub fn level(i: usize) -> usize {
    (usize::BITS - 1 - (i + 1).leading_zeros()) as usize
}

fn depth_for_len(len: usize, what: &str) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::Tree(format!(
            "{what} must have length 2^n with n >= 1, got {len}"
        )));
    }
    let depth = len.trailing_zeros() as usize;
    if depth > MAX_DEPTH {
        return Err(Error::Tree(format!("depth {depth} exceeds the cap {MAX_DEPTH}")));
    }
    Ok(depth)
}

fn depth_for_nodes(n: usize) -> Result<usize> {
    let len = n + 1;
    if len < 4 || !len.is_power_of_two() {
        return Err(Error::Tree(format!(
            "node arrays must have length 2^(n+1) - 1 with n >= 1, got {n}"
        )));
    }
    let depth = len.trailing_zeros() as usize - 1;
    if depth > MAX_DEPTH {
        return Err(Error::Tree(format!("depth {depth} exceeds the cap {MAX_DEPTH}")));
    }
    Ok(depth)
}

/// `W` by bottom-up averaging of the leaf weights, `V` by averaging their
/// reciprocals, and the characteristic `max W·V`. Leaf products are 1 up to
/// the rounding of `w · (1/w)`.
pub fn build_weight(leaf_weights: &[f64]) -> Result<WeightField> {
    let depth = depth_for_len(leaf_weights.len(), "leaf weights")?;
    if let Some((k, &bad)) = leaf_weights
        .iter()
        .enumerate()
        .find(|(_, &a)| !(a > 0.0 && a.is_finite()))
    {
        return Err(Error::Tree(format!(
            "leaf weight {k} must be positive and finite, got {bad}"
        )));
    }
    let n = node_count(depth);
    let first_leaf = n - leaf_weights.len();
    let mut w = vec![0.0; n];
    let mut v = vec![0.0; n];
    for (k, &a) in leaf_weights.iter().enumerate() {
        w[first_leaf + k] = a;
        v[first_leaf + k] = 1.0 / a;
    }
    for i in (0..first_leaf).rev() {
        let (l, r) = children(i);
        w[i] = 0.5 * (w[l] + w[r]);
        v[i] = 0.5 * (v[l] + v[r]);
    }
    let characteristic = w
        .iter()
        .zip(&v)
        .map(|(a, b)| a * b)
        .fold(1.0_f64, f64::max);
    Ok(WeightField { w, v, characteristic })
}

/// `X` on every node from the root value and one increment per internal
/// node: children of `i` get `X_i ± δ_i`.
pub fn build_martingale(x0: f64, increments: &[f64]) -> Result<Vec<f64>> {
    let depth = depth_for_len(increments.len() + 1, "increments (+1)")?;
    let n = node_count(depth);
    let mut x = vec![0.0; n];
    x[0] = x0;
    for (i, &d) in increments.iter().enumerate() {
        let (l, r) = children(i);
        x[l] = x[i] + d;
        x[r] = x[i] - d;
    }
    Ok(x)
}

/// `Y = H₀X₀ + Σ H·ΔX` and its running maximum `Y*` along root paths.
pub fn build_transform(x: &[f64], h: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = x.len();
    depth_for_nodes(n)?;
    if h.len() != n {
        return Err(Error::Tree(format!("H has {} entries, X has {n}", h.len())));
    }
    if let Some((i, &bad)) = h.iter().enumerate().find(|(_, &a)| !(a.abs() <= 1.0)) {
        return Err(Error::Tree(format!("|H| must be <= 1, got H[{i}] = {bad}")));
    }
    let mut y = vec![0.0; n];
    let mut ystar = vec![0.0; n];
    y[0] = h[0] * x[0];
    ystar[0] = y[0];
    for j in 1..n {
        let p = (j - 1) / 2;
        y[j] = y[p] + h[j] * (x[j] - x[p]);
        ystar[j] = ystar[p].max(y[j]);
    }
    Ok((y, ystar))
}

impl DyadicTree {
    /// Assembles a tree from `X`, the weight field and `H`, computing `Y`
    /// and `Y*`.
    pub fn assemble(x: Vec<f64>, weights: WeightField, h: Vec<f64>) -> Result<Self> {
        let depth = depth_for_nodes(x.len())?;
        if weights.w.len() != x.len() {
            return Err(Error::Tree("weight field and X differ in size".to_string()));
        }
        let (y, ystar) = build_transform(&x, &h)?;
        let tree = Self {
            depth,
            x,
            y,
            w: weights.w,
            v: weights.v,
            ystar,
            h,
        };
        tree.validate()?;
        Ok(tree)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn first_leaf(&self) -> usize {
        node_count(self.depth - 1)
    }

    pub fn leaves(&self) -> std::ops::Range<usize> {
        self.first_leaf()..self.len()
    }

    pub fn internal_nodes(&self) -> std::ops::Range<usize> {
        0..self.first_leaf()
    }

    /// Largest node product `W·V`.
    pub fn characteristic(&self) -> f64 {
        self.w
            .iter()
            .zip(&self.v)
            .map(|(a, b)| a * b)
            .fold(1.0_f64, f64::max)
    }

    /// Running maximum of `|Y|` along root paths.
    pub fn abs_ystar(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        out[0] = self.y[0].abs();
        for j in 1..self.len() {
            out[j] = out[(j - 1) / 2].max(self.y[j].abs());
        }
        out
    }

    /// Checks the structural invariants: martingale averaging of
    /// `X, Y, W, V`, `|H| ≤ 1` with siblings sharing `H`, `Y₀ = H₀X₀`,
    /// `|ΔY| ≤ |ΔX|`, `Y*` as running maximum, leaf `W·V = 1` and
    /// `1 ≤ W·V` everywhere.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for (name, f) in [
            ("Y", &self.y),
            ("W", &self.w),
            ("V", &self.v),
            ("Y*", &self.ystar),
            ("H", &self.h),
        ] {
            if f.len() != n {
                return Err(Error::Tree(format!("{name} has {} entries, expected {n}", f.len())));
            }
        }
        let close = |a: f64, b: f64, scale: f64| (a - b).abs() <= 1e-12 * scale.max(1.0);
        if !close(self.y[0], self.h[0] * self.x[0], self.x[0].abs()) {
            return Err(Error::Tree("Y0 must equal H0 * X0".to_string()));
        }
        for i in self.internal_nodes() {
            let (l, r) = children(i);
            if self.h[l] != self.h[r] {
                return Err(Error::Tree(format!("children of node {i} have different H")));
            }
            for (name, f) in [("X", &self.x), ("Y", &self.y), ("W", &self.w), ("V", &self.v)] {
                let scale = f[l].abs() + f[r].abs();
                if !close(f[i], 0.5 * (f[l] + f[r]), scale) {
                    return Err(Error::Tree(format!("{name} is not a martingale at node {i}")));
                }
            }
        }
        for j in 0..n {
            if !(self.h[j].abs() <= 1.0) {
                return Err(Error::Tree(format!("|H| > 1 at node {j}")));
            }
            if !(self.w[j] > 0.0 && self.v[j] > 0.0) {
                return Err(Error::Tree(format!("nonpositive weight at node {j}")));
            }
            let prod = self.w[j] * self.v[j];
            if prod < 1.0 - 1e-12 {
                return Err(Error::Tree(format!("W*V = {prod} < 1 at node {j}")));
            }
            if let Some(p) = parent(j) {
                let dx = self.x[j] - self.x[p];
                let dy = self.y[j] - self.y[p];
                if dy.abs() > dx.abs() * (1.0 + 1e-12) + 1e-15 {
                    return Err(Error::Tree(format!("|dY| > |dX| on the edge into {j}")));
                }
                if !close(self.ystar[j], self.ystar[p].max(self.y[j]), self.ystar[j].abs()) {
                    return Err(Error::Tree(format!("Y* is not a running maximum at {j}")));
                }
            }
        }
        for j in self.leaves() {
            let prod = self.w[j] * self.v[j];
            if (prod - 1.0).abs() > 1e-12 {
                return Err(Error::Tree(format!("leaf {j} has W*V = {prod}, expected 1")));
            }
        }
        Ok(())
    }

    /// Writes `node,x,y,w,v,ystar,h`, one row per node in heap order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Tree(format!("csv write failed: {e}"));
        for i in 0..self.len() {
            wtr.serialize(NodeRow {
                node: i,
                x: self.x[i],
                y: self.y[i],
                w: self.w[i],
                v: self.v[i],
                ystar: self.ystar[i],
                h: self.h[i],
            })
            .map_err(io)?;
        }
        wtr.flush()
            .map_err(|e| Error::Tree(format!("csv write failed: {e}")))?;
        Ok(())
    }

    /// Reads the format of [`write_csv`](Self::write_csv) and validates it.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
        let mut rows: Vec<NodeRow> = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Tree(format!("csv read failed: {e}")))?;
            if k == 0 && rec.get(0) == Some("node") {
                continue;
            }
            let row: NodeRow = rec
                .deserialize(None)
                .map_err(|e| Error::Tree(format!("bad csv row {k}: {e}")))?;
            rows.push(row);
        }
        let depth = depth_for_nodes(rows.len())?;
        let mut tree = Self {
            depth,
            x: vec![0.0; rows.len()],
            y: vec![0.0; rows.len()],
            w: vec![0.0; rows.len()],
            v: vec![0.0; rows.len()],
            ystar: vec![0.0; rows.len()],
            h: vec![0.0; rows.len()],
        };
        let mut seen = vec![false; rows.len()];
        for r in rows {
            let i = r.node;
            if i >= seen.len() || seen[i] {
                return Err(Error::Tree(format!("node index {i} is out of range or repeated")));
            }
            seen[i] = true;
            tree.x[i] = r.x;
            tree.y[i] = r.y;
            tree.w[i] = r.w;
            tree.v[i] = r.v;
            tree.ystar[i] = r.ystar;
            tree.h[i] = r.h;
        }
        tree.validate()?;
        Ok(tree)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRow {
    node: usize,
    x: f64,
    y: f64,
    w: f64,
    v: f64,
    ystar: f64,
    h: f64,
}
