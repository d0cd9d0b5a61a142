//! Ridge regression on internally standardized features.

// Matrix code reads best with explicit indices.
#![allow(clippy::needless_range_loop)]

use serde::{Deserialize, Serialize};

use super::{RegressError, Result};

/// Relative pivot below which an unregularized system counts as singular.
const PIVOT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeFit {
    pub l2: f64,
    pub means: Vec<f64>,
    /// Column standard deviations; 0 marks a constant column.
    pub scales: Vec<f64>,
    /// Weights on the standardized columns.
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl RidgeFit {
    pub fn fit(rows: &[Vec<f64>], y: &[f64], l2: f64) -> Result<Self> {
        if !(l2 >= 0.0 && l2.is_finite()) {
            return Err(RegressError::InvalidParams(format!("l2 must be finite and non-negative, got {l2}")));
        }
        let n = rows.len() as f64;
        let d = rows.first().map_or(0, Vec::len);
        let mut means = vec![0.0; d];
        for r in rows {
            for (m, v) in means.iter_mut().zip(r) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut scales = vec![0.0; d];
        for r in rows {
            for j in 0..d {
                scales[j] += (r[j] - means[j]).powi(2);
            }
        }
        for s in scales.iter_mut() {
            *s = (*s / n).sqrt();
        }
        let active: Vec<usize> = (0..d).filter(|&j| scales[j] > 0.0).collect();
        let intercept = y.iter().sum::<f64>() / n;

        let p = active.len();
        let z: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| active.iter().map(|&j| (r[j] - means[j]) / scales[j]).collect())
            .collect();
        let mut gram = vec![vec![0.0; p]; p];
        let mut rhs = vec![0.0; p];
        for (zr, &yi) in z.iter().zip(y) {
            let yc = yi - intercept;
            for a in 0..p {
                rhs[a] += zr[a] * yc;
                for b in 0..=a {
                    gram[a][b] += zr[a] * zr[b];
                }
            }
        }
        for a in 0..p {
            gram[a][a] += l2;
            for b in 0..a {
                gram[b][a] = gram[a][b];
            }
        }
        let solved = solve_spd(gram, rhs, l2 == 0.0)?;
        let mut weights = vec![0.0; d];
        for (k, &j) in active.iter().enumerate() {
            weights[j] = solved[k];
        }
        Ok(RidgeFit {
            l2,
            means,
            scales,
            weights,
            intercept,
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut out = self.intercept;
        for j in 0..self.weights.len() {
            if self.scales[j] > 0.0 {
                out += self.weights[j] * (row[j] - self.means[j]) / self.scales[j];
            }
        }
        out
    }

    /// Slopes and intercept on the original feature scale.
    pub fn coefficients(&self) -> (Vec<f64>, f64) {
        let slopes: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.scales)
            .map(|(w, s)| if *s > 0.0 { w / s } else { 0.0 })
            .collect();
        let intercept = self.intercept - slopes.iter().zip(&self.means).map(|(s, m)| s * m).sum::<f64>();
        (slopes, intercept)
    }
}

/// Cholesky solve of a symmetric positive (semi)definite system.
fn solve_spd(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, check_rank: bool) -> Result<Vec<f64>> {
    let p = b.len();
    let max_diag = (0..p).map(|i| a[i][i]).fold(0.0_f64, f64::max);
    for j in 0..p {
        let mut diag = a[j][j];
        for k in 0..j {
            diag -= a[j][k] * a[j][k];
        }
        if diag <= 0.0 || (check_rank && diag <= PIVOT_TOLERANCE * max_diag) {
            return Err(RegressError::SingularSystem);
        }
        let l = diag.sqrt();
        a[j][j] = l;
        for i in j + 1..p {
            let mut v = a[i][j];
            for k in 0..j {
                v -= a[i][k] * a[j][k];
            }
            a[i][j] = v / l;
        }
    }
    for i in 0..p {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i][k] * b[k];
        }
        b[i] = v / a[i][i];
    }
    for i in (0..p).rev() {
        let mut v = b[i];
        for k in i + 1..p {
            v -= a[k][i] * b[k];
        }
        b[i] = v / a[i][i];
    }
    Ok(b)
}
