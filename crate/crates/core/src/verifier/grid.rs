//! Parameter grids over `ℝ² × 𝒟_c`.
//!
//! Points are generated from an angular coordinate (the ratio `|y|/|x|`
//! restricted to a region), a radius `|(x, y)|`, the weight `w` and the
//! product `t = wv`, with `v = t / w`. Every generated point satisfies
//! `1 ≤ wv ≤ c` up to rounding in the division.

use serde::{Deserialize, Serialize};

use crate::bellman::{region_thresholds, BellmanPoint};
use crate::error::{Error, Result};
use crate::kernels::DomainParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisScale {
    Linear,
    Log,
}

/// Which part of the `(x, y)` plane an angular grid covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridRegion {
    /// Full circle of directions.
    Full,
    /// `|y| ≤ |x|`.
    Initial,
    D1,
    D2,
    D3,
    /// `|y| = 20c(c/t)^{1−β}|x|`.
    Boundary12,
    /// `|y| = 10|x|`.
    Boundary23,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layout {
    Angular {
        region: GridRegion,
        angle_points: usize,
        radius_points: usize,
        radius_range: (f64, f64),
    },
    /// `x = y = s` for `s` on a linear axis; for the matrix checks, which
    /// depend on a single coordinate.
    Coordinate { points: usize, range: (f64, f64) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub c_values: Vec<f64>,
    pub layout: Layout,
    pub weight_points: usize,
    pub product_points: usize,
    pub w_range: (f64, f64),
    pub weight_scale: AxisScale,
    /// Cell-centred samples that avoid the ends of every axis.
    pub interior: bool,
    /// Keep per-point records in the report for CSV export.
    pub dump: bool,
}

/// Compact description of a grid, stored in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub layout: String,
    pub c_values: Vec<f64>,
    pub axes: Vec<usize>,
    pub points_per_c: usize,
    pub interior: bool,
}

impl GridSpec {
    /// An angular grid with roughly `target` points per value of `c`.
    pub fn angular(region: GridRegion, c_values: Vec<f64>, target: usize) -> Self {
        let (angle, radius, weight, product) = split_density(region, target);
        Self {
            c_values,
            layout: Layout::Angular {
                region,
                angle_points: angle,
                radius_points: radius,
                radius_range: (0.1, 10.0),
            },
            weight_points: weight,
            product_points: product,
            w_range: (0.2, 5.0),
            weight_scale: AxisScale::Log,
            interior: false,
            dump: false,
        }
    }

    /// A coordinate grid with `n` points on each of the three axes.
    pub fn coordinate(c_values: Vec<f64>, n: usize) -> Self {
        Self {
            c_values,
            layout: Layout::Coordinate {
                points: n,
                range: (-2.0, 2.0),
            },
            weight_points: n,
            product_points: n,
            w_range: (0.2, 5.0),
            weight_scale: AxisScale::Log,
            interior: false,
            dump: false,
        }
    }

    pub fn interior(mut self, yes: bool) -> Self {
        self.interior = yes;
        self
    }

    pub fn with_dump(mut self, yes: bool) -> Self {
        self.dump = yes;
        self
    }

    /// Same axes, different angular region.
    pub fn with_region(&self, region: GridRegion) -> Self {
        let mut g = self.clone();
        if let Layout::Angular { region: r, .. } = &mut g.layout {
            *r = region;
        }
        g
    }

    pub fn region(&self) -> Option<GridRegion> {
        match self.layout {
            Layout::Angular { region, .. } => Some(region),
            Layout::Coordinate { .. } => None,
        }
    }

    fn lead_axes(&self) -> (usize, usize) {
        match self.layout {
            Layout::Angular {
                region,
                angle_points,
                radius_points,
                ..
            } => {
                let angle = match region {
                    GridRegion::Boundary12 | GridRegion::Boundary23 => 4,
                    _ => angle_points,
                };
                (angle, radius_points)
            }
            Layout::Coordinate { points, .. } => (points, 1),
        }
    }

    /// Number of points per value of `c`.
    pub fn len_per_c(&self) -> usize {
        let (a, r) = self.lead_axes();
        a * r * self.weight_points * self.product_points
    }

    pub fn len(&self) -> usize {
        self.len_per_c() * self.c_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        for &c in &self.c_values {
            DomainParams::new(c)?;
        }
        let (lo, hi) = self.w_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Precondition(format!("bad weight range ({lo}, {hi})")));
        }
        if let Layout::Angular { radius_range: (lo, hi), .. } = self.layout {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::Precondition(format!("bad radius range ({lo}, {hi})")));
            }
        }
        Ok(())
    }

    pub fn meta(&self) -> GridMeta {
        let (a, r) = self.lead_axes();
        let layout = match &self.layout {
            Layout::Angular { region, .. } => format!("angular:{region:?}"),
            Layout::Coordinate { .. } => "coordinate".to_string(),
        };
        GridMeta {
            layout,
            c_values: self.c_values.clone(),
            axes: vec![a, r, self.weight_points, self.product_points],
            points_per_c: self.len_per_c(),
            interior: self.interior,
        }
    }

    /// The `index`-th point for parameter `params`, `index < len_per_c()`.
    pub fn point(&self, params: &DomainParams, index: usize) -> BellmanPoint {
        let (na, nr) = self.lead_axes();
        let (nw, nt) = (self.weight_points, self.product_points);
        let mut k = index;
        let it = k % nt;
        k /= nt;
        let iw = k % nw;
        k /= nw;
        let ir = k % nr;
        k /= nr;
        let ia = k % na;

        let c = params.c();
        let t = axis(1.0, c, it, nt, AxisScale::Log, self.interior);
        let w = axis(self.w_range.0, self.w_range.1, iw, nw, self.weight_scale, self.interior);
        let v = t / w;

        match self.layout {
            Layout::Coordinate { range, .. } => {
                let s = axis(range.0, range.1, ia, na, AxisScale::Linear, self.interior);
                BellmanPoint::new(s, s, w, v)
            }
            Layout::Angular {
                region,
                radius_range,
                ..
            } => {
                let r = axis(radius_range.0, radius_range.1, ir, nr, AxisScale::Log, self.interior);
                let (ux, uy) = self.unit_direction(region, ia, na, t, params);
                BellmanPoint::new(r * ux, r * uy, w, v)
            }
        }
    }

    fn unit_direction(
        &self,
        region: GridRegion,
        ia: usize,
        na: usize,
        t: f64,
        params: &DomainParams,
    ) -> (f64, f64) {
        let (upper, lower) = region_thresholds(t, params);
        // Quadrant copies cycle with the angle index.
        let (sx, sy) = match ia % 4 {
            0 => (1.0, 1.0),
            1 => (-1.0, 1.0),
            2 => (-1.0, -1.0),
            _ => (1.0, -1.0),
        };
        let from_slope = |m: f64| {
            let n = 1.0_f64.hypot(m);
            (sx / n, sy * m / n)
        };
        match region {
            GridRegion::Full => {
                let theta = if self.interior {
                    std::f64::consts::TAU * (ia as f64 + 0.5) / na as f64
                } else {
                    std::f64::consts::TAU * ia as f64 / na as f64
                };
                (theta.cos(), theta.sin())
            }
            GridRegion::Initial => {
                // Signed slope in [−1, 1]; both signs of x.
                let m = axis(-1.0, 1.0, ia, na, AxisScale::Linear, self.interior);
                let n = 1.0_f64.hypot(m);
                (sx / n, m / n)
            }
            GridRegion::D3 => from_slope(axis(0.0, lower, ia, na, AxisScale::Linear, self.interior)),
            GridRegion::D2 => from_slope(axis(lower, upper, ia, na, AxisScale::Linear, self.interior)),
            GridRegion::D1 => {
                // Inverse slope |x|/|y| in [0, 1/upper].
                let m = axis(0.0, 1.0 / upper, ia, na, AxisScale::Linear, self.interior);
                let n = 1.0_f64.hypot(m);
                (sx * m / n, sy / n)
            }
            GridRegion::Boundary12 => from_slope(upper),
            GridRegion::Boundary23 => from_slope(lower),
        }
    }

    /// All points for one `c`.
    pub fn points(&self, params: &DomainParams) -> Vec<BellmanPoint> {
        (0..self.len_per_c()).map(|i| self.point(params, i)).collect()
    }
}

/// Sample `i` of `n` on `[lo, hi]`.
fn axis(lo: f64, hi: f64, i: usize, n: usize, scale: AxisScale, interior: bool) -> f64 {
    let f = if interior {
        (i as f64 + 0.5) / n as f64
    } else if n > 1 {
        i as f64 / (n - 1) as f64
    } else {
        0.5
    };
    let value = match scale {
        AxisScale::Linear => lo + (hi - lo) * f,
        AxisScale::Log => (lo.ln() + (hi.ln() - lo.ln()) * f).exp(),
    };
    if !interior && i + 1 == n && n > 1 {
        hi
    } else {
        value
    }
}

/// Splits a target point count over (angle, radius, weight, product) axes.
fn split_density(region: GridRegion, target: usize) -> (usize, usize, usize, usize) {
    let target = target.max(1) as f64;
    match region {
        GridRegion::Boundary12 | GridRegion::Boundary23 => {
            // Angle axis is fixed at the four quadrant copies.
            let rest = (target / 4.0).cbrt();
            let n = rest.round().max(1.0) as usize;
            let product = ((target / 4.0) / (n * n) as f64).round().max(1.0) as usize;
            (4, n, n, product)
        }
        _ => {
            let base = (target / 5.0).powf(0.25);
            let radius = (base * 0.5).round().max(1.0) as usize;
            let weight = base.round().max(1.0) as usize;
            let product = (base * 2.0).round().max(1.0) as usize;
            let angle = (target / (radius * weight * product) as f64).round().max(1.0) as usize;
            (angle, radius, weight, product)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellman::{classify_region, Region};

    #[test]
    fn density_is_close_to_target() {
        for region in [GridRegion::Full, GridRegion::D2, GridRegion::Boundary12] {
            for target in [1_000usize, 10_000, 100_000] {
                let g = GridSpec::angular(region, vec![2.0], target);
                let n = g.len_per_c() as f64;
                assert!(n >= 0.7 * target as f64 && n <= 1.4 * target as f64, "{region:?} {n}");
            }
        }
    }

    #[test]
    fn points_lie_in_domain_and_region() {
        for c in [1.5, 2.0, 10.0, 100.0] {
            let params = DomainParams::new(c).unwrap();
            for (region, expect) in [
                (GridRegion::D1, Region::D1),
                (GridRegion::D2, Region::D2),
                (GridRegion::D3, Region::D3),
            ] {
                let g = GridSpec::angular(region, vec![c], 2_000).interior(true);
                for p in g.points(&params) {
                    assert_eq!(classify_region(&p, &params).unwrap(), expect, "{p:?}");
                }
            }
            let g = GridSpec::angular(GridRegion::Initial, vec![c], 2_000);
            for p in g.points(&params) {
                assert!(p.y.abs() <= p.x.abs() * (1.0 + 1e-15));
                assert!(p.validate(&params).is_ok());
            }
            let g = GridSpec::coordinate(vec![c], 21);
            assert_eq!(g.len_per_c(), 21 * 21 * 21);
            for p in g.points(&params) {
                assert!(p.validate(&params).is_ok());
            }
        }
    }

    #[test]
    fn closed_grid_hits_axis_ends() {
        let params = DomainParams::new(3.0).unwrap();
        let g = GridSpec::coordinate(vec![3.0], 5);
        let pts = g.points(&params);
        let ts: Vec<f64> = pts.iter().map(|p| p.w * p.v).collect();
        assert!(ts.iter().any(|&t| (t - 1.0).abs() < 1e-15));
        assert!(ts.iter().any(|&t| (t - 3.0).abs() < 1e-12));
        assert!(pts.iter().any(|p| p.y == 0.0));
    }
}
