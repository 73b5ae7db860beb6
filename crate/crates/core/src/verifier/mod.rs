//! Grid and exact-arithmetic certification of the properties of `B`.
//!
//! Every pointwise check is normalised by
//! `scale = (1 + x² + y²) · w · max(1, c²/v)` and passes when the worst
//! normalised violation is at most the check's tolerance.

pub mod checks;
pub mod constrained;
pub mod grid;
pub mod forms;
pub mod matrix;
pub mod rational;
pub mod report;

use serde::{Deserialize, Serialize};

pub use checks::{
    verify_concavity, verify_concavity_with, verify_domain1, verify_domain1_with, verify_domain2,
    verify_domain2_with, verify_domain3, verify_domain3_with, verify_global, verify_global_with,
    verify_matrices, verify_matrices_with, GlobalCheck, MatrixPart, VerifyOptions,
};
pub use constrained::{constrained_max_combination, constrained_max_form, constrained_max_piece};
pub use grid::{AxisScale, GridMeta, GridRegion, GridSpec, Layout};
pub use matrix::{sylvester_nonpositive, sylvester_signs, SylvesterVerdict, SymmetricMatrix};
pub use rational::{Certificate, ExactDefiniteness, RationalMatrix};
pub use report::{point_scale, PointRecord, VerificationReport, Witness};

use crate::error::{Error, Result};

pub const TOL_INITIAL: f64 = 1e-10;
pub const TOL_MAJORIZATION: f64 = 1e-10;
pub const TOL_ORDERING: f64 = 1e-9;
pub const TOL_CONTINUITY: f64 = 1e-9;
pub const TOL_NEUMANN: f64 = 1e-9;
pub const TOL_CONCAVITY: f64 = 1e-9;
pub const TOL_MATRIX: f64 = 1e-9;
/// Threshold on the diagonally normalised leading minors.
pub const SYLVESTER_TOL: f64 = 1e-9;
pub const DEFAULT_LAMBDA_SAMPLES: usize = 41;

/// A named check, as selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    Global(GlobalCheck),
    Matrices,
    Domain1,
    Domain2,
    Domain3,
    Concavity,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Global(GlobalCheck::Initial),
        Suite::Global(GlobalCheck::Majorization),
        Suite::Global(GlobalCheck::Ordering),
        Suite::Global(GlobalCheck::Continuity),
        Suite::Global(GlobalCheck::Neumann),
        Suite::Matrices,
        Suite::Domain1,
        Suite::Domain2,
        Suite::Domain3,
        Suite::Concavity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Global(g) => g.name(),
            Suite::Matrices => "matrices",
            Suite::Domain1 => "domain1",
            Suite::Domain2 => "domain2",
            Suite::Domain3 => "domain3",
            Suite::Concavity => "concavity",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::Precondition(format!("unknown check '{name}'")))
    }

    /// Grid the suite uses by default: a region-appropriate angular grid with
    /// roughly `density` points per `c`, or a coordinate grid with
    /// `round(density^{1/3})` points per axis for the matrix checks.
    pub fn default_grid(self, c_values: Vec<f64>, density: usize) -> GridSpec {
        let region = match self {
            Suite::Global(GlobalCheck::Initial) => GridRegion::Initial,
            Suite::Global(GlobalCheck::Continuity) => GridRegion::Boundary12,
            Suite::Domain1 => GridRegion::D1,
            Suite::Domain2 => GridRegion::D2,
            Suite::Domain3 => GridRegion::D3,
            Suite::Matrices => {
                let n = (density as f64).cbrt().round().max(2.0) as usize;
                return GridSpec::coordinate(c_values, n);
            }
            _ => GridRegion::Full,
        };
        let g = GridSpec::angular(region, c_values, density);
        match self {
            Suite::Domain1 | Suite::Domain2 | Suite::Domain3 | Suite::Concavity => g.interior(true),
            _ => g,
        }
    }

    /// Runs the suite. Continuity covers both boundaries when given a
    /// boundary grid; the matrix suite runs all three parts.
    pub fn run(self, grid: &GridSpec, opts: &VerifyOptions) -> Result<VerificationReport> {
        match self {
            Suite::Global(GlobalCheck::Continuity)
                if matches!(grid.region(), Some(GridRegion::Boundary12 | GridRegion::Boundary23)) =>
            {
                let subs = [GridRegion::Boundary12, GridRegion::Boundary23]
                    .into_iter()
                    .map(|b| verify_global_with(GlobalCheck::Continuity, &grid.with_region(b), opts))
                    .collect::<Result<Vec<_>>>()?;
                Ok(VerificationReport::aggregate("continuity", subs))
            }
            Suite::Global(g) => verify_global_with(g, grid, opts),
            Suite::Matrices => {
                let subs = MatrixPart::ALL
                    .into_iter()
                    .map(|p| verify_matrices_with(p, grid, opts))
                    .collect::<Result<Vec<_>>>()?;
                Ok(VerificationReport::aggregate("matrices", subs))
            }
            Suite::Domain1 => verify_domain1_with(grid, opts),
            Suite::Domain2 => verify_domain2_with(grid, opts),
            Suite::Domain3 => verify_domain3_with(grid, opts),
            Suite::Concavity => verify_concavity_with(grid, opts),
        }
    }
}
