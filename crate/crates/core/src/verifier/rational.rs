//! Exact rational matrices and Sylvester certificates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

/// `p / q` as an exact rational.
pub fn q(p: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    rows: Vec<Vec<Rational>>,
}

/// Exact classification for nonpositive-definiteness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExactDefiniteness {
    /// Leading minors strictly alternate, starting negative.
    NegativeDefinite,
    /// Every principal minor of order k has sign `(−1)^k` or vanishes.
    NegativeSemidefinite,
    NotNonpositive,
}

impl ExactDefiniteness {
    pub fn is_nonpositive(self) -> bool {
        !matches!(self, ExactDefiniteness::NotNonpositive)
    }
}

impl RationalMatrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self { rows }
    }

    /// Exact rational copy of a floating-point matrix; `None` if any entry
    /// is not finite.
    pub fn from_f64(rows: &[Vec<f64>]) -> Option<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&x| Rational::from_float(x)).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        Some(Self::new(rows))
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i][j]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.order();
        (0..n).all(|i| (0..n).all(|j| self.rows[i][j] == self.rows[j][i]))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Self { rows }
    }

    pub fn scaled(&self, k: &Rational) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x * k).collect())
            .collect();
        Self { rows }
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    fn sub_determinant(&self, idx: &[usize]) -> Rational {
        // Gaussian elimination over ℚ on the selected principal submatrix.
        let n = idx.len();
        let mut m: Vec<Vec<Rational>> = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.rows[i][j].clone()).collect())
            .collect();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
                return Rational::zero();
            };
            if pivot != col {
                m.swap(pivot, col);
                det = -det;
            }
            let p = m[col][col].clone();
            det *= &p;
            for r in col + 1..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let f = &m[r][col] / &p;
                for k in col..n {
                    let delta = &f * &m[col][k];
                    m[r][k] -= delta;
                }
            }
        }
        det
    }

    pub fn determinant(&self) -> Rational {
        let idx: Vec<usize> = (0..self.order()).collect();
        self.sub_determinant(&idx)
    }

    pub fn leading_minors(&self) -> Vec<Rational> {
        (1..=self.order())
            .map(|k| self.sub_determinant(&(0..k).collect::<Vec<_>>()))
            .collect()
    }

    /// All principal minors, keyed by their index sets.
    pub fn principal_minors(&self) -> Vec<(Vec<usize>, Rational)> {
        let n = self.order();
        (1..(1usize << n))
            .map(|mask| {
                let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                let det = self.sub_determinant(&idx);
                (idx, det)
            })
            .collect()
    }

    pub fn classify_nonpositive(&self) -> ExactDefiniteness {
        let strict = self.leading_minors().iter().enumerate().all(|(k, m)| {
            if k % 2 == 0 {
                m.is_negative()
            } else {
                m.is_positive()
            }
        });
        if strict {
            return ExactDefiniteness::NegativeDefinite;
        }
        let semi = self.principal_minors().iter().all(|(idx, m)| {
            if idx.len() % 2 == 1 {
                !m.is_positive()
            } else {
                !m.is_negative()
            }
        });
        if semi {
            ExactDefiniteness::NegativeSemidefinite
        } else {
            ExactDefiniteness::NotNonpositive
        }
    }
}

/// An exact Sylvester certificate, rendered with decimal-free rationals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub label: String,
    pub entries: Vec<Vec<String>>,
    pub leading_minors: Vec<String>,
    pub verdict: ExactDefiniteness,
}

impl Certificate {
    pub fn for_nonpositive(label: impl Into<String>, m: &RationalMatrix) -> Self {
        Self {
            label: label.into(),
            entries: m
                .rows
                .iter()
                .map(|r| r.iter().map(|x| x.to_string()).collect())
                .collect(),
            leading_minors: m.leading_minors().iter().map(|x| x.to_string()).collect(),
            verdict: m.classify_nonpositive(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_nonpositive()
    }
}
