//! Small symmetric matrices (order 2 to 4) with eigenvalue and Sylvester-minor
//! definiteness tests.

use nalgebra::{Matrix2, Matrix3, Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// A symmetric matrix of order 1 to 4. Only the upper triangle is ever read
/// from the caller, so symmetry holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatrix {
    order: usize,
    a: [[f64; 4]; 4],
}

impl SymmetricMatrix {
    pub fn zeros(order: usize) -> Self {
        assert!((1..=4).contains(&order), "order must be 1..=4, got {order}");
        Self {
            order,
            a: [[0.0; 4]; 4],
        }
    }

    /// Builds from the upper triangle given row by row, diagonal included:
    /// `[a00, a01, .., a0n, a11, .., ann]`.
    pub fn from_upper(order: usize, upper: &[f64]) -> Self {
        assert_eq!(upper.len(), order * (order + 1) / 2, "upper triangle length");
        let mut m = Self::zeros(order);
        let mut k = 0;
        for i in 0..order {
            for j in i..order {
                m.set(i, j, upper[k]);
                k += 1;
            }
        }
        m
    }

    /// Builds from full rows, reading the upper triangle only.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "row {i} has wrong length");
            for j in i..n {
                m.set(i, j, row[j]);
            }
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.a[i][i] = e;
        }
        m
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.a[i][j] = value;
        self.a[j][i] = value;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.order)
            .map(|i| self.a[i][..self.order].to_vec())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.rows()
            .iter()
            .flatten()
            .fold(0.0_f64, |m, a| m.max(a.abs()))
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut m = *self;
        for i in 0..self.order {
            for j in 0..self.order {
                m.a[i][j] *= k;
            }
        }
        m
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order);
        let mut m = *self;
        for i in 0..self.order {
            for j in 0..self.order {
                m.a[i][j] -= other.a[i][j];
            }
        }
        m
    }

    /// `D M D` with `D = diag(d)`; preserves inertia when all `d_i ≠ 0`.
    pub fn congruence_diag(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.order);
        let mut m = *self;
        for i in 0..self.order {
            for j in 0..self.order {
                m.a[i][j] *= d[i] * d[j];
            }
        }
        m
    }

    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.order);
        let mut acc = 0.0;
        for i in 0..self.order {
            for j in 0..self.order {
                acc += self.a[i][j] * u[i] * u[j];
            }
        }
        acc
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev = match self.order {
            1 => vec![self.a[0][0]],
            2 => SymmetricEigen::new(self.m2()).eigenvalues.as_slice().to_vec(),
            3 => SymmetricEigen::new(self.m3()).eigenvalues.as_slice().to_vec(),
            _ => SymmetricEigen::new(self.m4()).eigenvalues.as_slice().to_vec(),
        };
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().unwrap()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Largest eigenvalue with a unit eigenvector.
    pub fn max_eigenpair(&self) -> (f64, Vec<f64>) {
        fn pick<const N: usize>(
            e: SymmetricEigen<f64, nalgebra::Const<N>>,
        ) -> (f64, Vec<f64>) {
            let k = (0..N)
                .max_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]))
                .unwrap();
            (e.eigenvalues[k], e.eigenvectors.column(k).iter().copied().collect())
        }
        match self.order {
            1 => (self.a[0][0], vec![1.0]),
            2 => pick(SymmetricEigen::new(self.m2())),
            3 => pick(SymmetricEigen::new(self.m3())),
            _ => pick(SymmetricEigen::new(self.m4())),
        }
    }

    /// Leading principal minors `Δ₁, …, Δₙ`.
    pub fn leading_minors(&self) -> Vec<f64> {
        let a = &self.a;
        let mut out = Vec::with_capacity(self.order);
        out.push(a[0][0]);
        if self.order >= 2 {
            out.push(Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1]).determinant());
        }
        if self.order >= 3 {
            out.push(self.m3().determinant());
        }
        if self.order >= 4 {
            out.push(self.m4().determinant());
        }
        out
    }

    fn m2(&self) -> Matrix2<f64> {
        let a = &self.a;
        Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1])
    }

    fn m3(&self) -> Matrix3<f64> {
        let a = &self.a;
        Matrix3::new(
            a[0][0], a[0][1], a[0][2], a[1][0], a[1][1], a[1][2], a[2][0], a[2][1], a[2][2],
        )
    }

    fn m4(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.a[i][j])
    }
}

/// Leading principal minors of `m`.
pub fn sylvester_signs(m: &SymmetricMatrix) -> Vec<f64> {
    m.leading_minors()
}

/// Outcome of a floating-point Sylvester test for nonpositive-definiteness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SylvesterVerdict {
    /// `(−1)^k Δ_k > tol` for all k: negative definite.
    Definite,
    /// Some minor is within `tol` of zero and none has the wrong sign; the
    /// decision is left to the eigenvalues.
    Inconclusive,
    /// Some leading minor has the wrong sign beyond `tol`.
    Violated,
}

/// Sylvester test for nonpositive-definiteness on the diagonally normalised
/// matrix `S = D M D`, `D_ii = |m_ii|^{−1/2}` (1 where `m_ii = 0`), so that
/// the threshold `tol` is scale free.
pub fn sylvester_nonpositive(m: &SymmetricMatrix, tol: f64) -> SylvesterVerdict {
    let d: Vec<f64> = (0..m.order())
        .map(|i| {
            let a = m.get(i, i).abs();
            if a > 0.0 {
                1.0 / a.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let s = m.congruence_diag(&d);
    let mut verdict = SylvesterVerdict::Definite;
    for (k, minor) in s.leading_minors().into_iter().enumerate() {
        let signed = if k % 2 == 0 { -minor } else { minor };
        if signed < -tol {
            return SylvesterVerdict::Violated;
        }
        if signed <= tol {
            verdict = SylvesterVerdict::Inconclusive;
        }
    }
    verdict
}
