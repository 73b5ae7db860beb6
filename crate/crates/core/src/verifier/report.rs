//! Verification reports and the parallel grid scanner that produces them.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{GridMeta, GridSpec};
use super::rational::Certificate;
use crate::bellman::{classify_raw, BellmanPoint, Direction};
use crate::kernels::DomainParams;

/// Where the worst violation was observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub c: f64,
    pub point: BellmanPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    /// Raw (unnormalised) checked quantity.
    pub value: f64,
}

/// One row of a per-point CSV dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub c: f64,
    pub point: BellmanPoint,
    pub region: String,
    pub value: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub pass: bool,
    pub total_points: usize,
    pub skipped_points: usize,
    /// Largest scale-normalised violation; the check passes iff it is at most
    /// `tolerance`. `None` when nothing was evaluated.
    pub worst_violation: Option<f64>,
    pub tolerance: f64,
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridMeta>,
    /// Points where the eigenvalue and Sylvester verdicts disagree.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub disagreements: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<Certificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subchecks: Vec<VerificationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    #[serde(skip)]
    pub dump: Vec<PointRecord>,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

impl VerificationReport {
    pub fn empty(check: impl Into<String>, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            pass: true,
            total_points: 0,
            skipped_points: 0,
            worst_violation: None,
            tolerance,
            witness: None,
            grid: None,
            disagreements: 0,
            certificates: Vec::new(),
            subchecks: Vec::new(),
            wall_time_ms: None,
            dump: Vec::new(),
        }
    }

    /// Parent report whose verdict and worst case come from its children.
    pub fn aggregate(check: impl Into<String>, subchecks: Vec<VerificationReport>) -> Self {
        let tolerance = subchecks.iter().map(|s| s.tolerance).fold(0.0, f64::max);
        let mut r = Self::empty(check, tolerance);
        for s in &subchecks {
            r.total_points += s.total_points;
            r.skipped_points += s.skipped_points;
            r.disagreements += s.disagreements;
            r.pass &= s.pass;
            if let Some(v) = s.worst_violation {
                // Children may use different tolerances; compare margins.
                let margin = v - s.tolerance;
                let better = match r.worst_violation {
                    None => true,
                    Some(cur) => margin > cur - r.tolerance,
                };
                if better {
                    r.worst_violation = Some(v);
                    r.tolerance = s.tolerance;
                    r.witness = s.witness.clone();
                }
            }
        }
        r.wall_time_ms = subchecks
            .iter()
            .map(|s| s.wall_time_ms)
            .sum::<Option<f64>>();
        r.subchecks = subchecks;
        r
    }

    /// Drops timing so that repeated runs serialise identically.
    pub fn strip_timing(&mut self) {
        self.wall_time_ms = None;
        for s in &mut self.subchecks {
            s.strip_timing();
        }
    }

    /// Depth-first list of `(check name, report)` including `self`.
    pub fn flatten(&self) -> Vec<&VerificationReport> {
        let mut out = vec![self];
        for s in &self.subchecks {
            out.extend(s.flatten());
        }
        out
    }
}

/// Outcome of checking one grid point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sample {
    /// Scale-normalised violation; `≤ tolerance` passes.
    pub violation: f64,
    pub value: f64,
    pub direction: Option<Direction>,
    /// Eigenvalue/Sylvester disagreement at this point.
    pub disagreement: bool,
}

impl Sample {
    pub fn new(violation: f64, value: f64) -> Self {
        Self {
            violation,
            value,
            direction: None,
            disagreement: false,
        }
    }

    pub fn with_direction(mut self, dir: Direction) -> Self {
        self.direction = Some(dir);
        self
    }

    pub fn with_disagreement(mut self, yes: bool) -> Self {
        self.disagreement = yes;
        self
    }
}

#[derive(Default)]
struct Acc {
    total: usize,
    skipped: usize,
    disagreements: usize,
    worst: Option<(f64, usize, Witness)>,
    dump: Vec<(usize, PointRecord)>,
}

impl Acc {
    fn merge(mut self, other: Acc) -> Acc {
        self.total += other.total;
        self.skipped += other.skipped;
        self.disagreements += other.disagreements;
        self.worst = match (self.worst, other.worst) {
            (None, b) => b,
            (a, None) => a,
            (Some(a), Some(b)) => {
                // Ties go to the lower index so the merge is order independent.
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
        };
        self.dump.extend(other.dump);
        self
    }
}

/// Normalisation used by all grid checks: `(1 + x² + y²) · w · max(1, c²/v)`.
pub fn point_scale(p: &BellmanPoint, params: &DomainParams) -> f64 {
    let c = params.c();
    (1.0 + p.x * p.x + p.y * p.y) * p.w * (c * c / p.v).max(1.0)
}

/// Evaluates `f` on every grid point for every `c`, in parallel on the
/// current rayon pool. `f` returns `None` to skip a point.
pub(crate) fn scan<F>(check: &str, grid: &GridSpec, tolerance: f64, f: F) -> VerificationReport
where
    F: Fn(&DomainParams, &BellmanPoint) -> Option<Sample> + Sync,
{
    let start = Instant::now();
    let per_c = grid.len_per_c();
    let params: Vec<DomainParams> = grid
        .c_values
        .iter()
        .filter_map(|&c| DomainParams::new(c).ok())
        .collect();
    let n = per_c * params.len();
    let dump = grid.dump;
    let acc = (0..n)
        .into_par_iter()
        .fold(Acc::default, |mut acc, idx| {
            let prm = &params[idx / per_c];
            let p = grid.point(prm, idx % per_c);
            match f(prm, &p) {
                None => acc.skipped += 1,
                Some(s) => {
                    acc.total += 1;
                    acc.disagreements += usize::from(s.disagreement);
                    let witness = Witness {
                        c: prm.c(),
                        point: p,
                        direction: s.direction,
                        value: s.value,
                    };
                    let replace = match &acc.worst {
                        None => true,
                        Some((v, i, _)) => s.violation > *v || (s.violation == *v && idx < *i),
                    };
                    if replace {
                        acc.worst = Some((s.violation, idx, witness));
                    }
                    if dump {
                        let region = classify_raw(p.x, p.y, p.t().clamp(1.0, prm.c()), prm);
                        acc.dump.push((
                            idx,
                            PointRecord {
                                c: prm.c(),
                                point: p,
                                region: region.name().to_string(),
                                value: s.value,
                                violation: s.violation,
                            },
                        ));
                    }
                }
            }
            acc
        })
        .reduce(Acc::default, Acc::merge);

    let mut report = VerificationReport::empty(check, tolerance);
    report.total_points = acc.total;
    report.skipped_points = acc.skipped;
    report.disagreements = acc.disagreements;
    report.grid = Some(grid.meta());
    if let Some((v, _, w)) = acc.worst {
        report.worst_violation = Some(v);
        report.witness = Some(w);
        report.pass = v <= tolerance && !v.is_nan();
    }
    report.pass &= acc.disagreements == 0;
    let mut dump = acc.dump;
    dump.sort_by_key(|(i, _)| *i);
    report.dump = dump.into_iter().map(|(_, r)| r).collect();
    report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    report
}
