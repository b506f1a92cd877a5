//! Classical zero-noise extrapolation: least-squares lines and polynomials,
//! and Richardson (full-degree Lagrange) extrapolation.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
}

impl LinearFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Power-basis coefficients, constant term first.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }
}

fn distinct_x(points: &[(f64, f64)]) -> usize {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.len()
}

/// Ordinary least squares line through `(p, r)` points.
pub fn fit_linear(points: &[(f64, f64)]) -> Result<LinearFit> {
    if distinct_x(points) < 2 {
        return Err(Error::invalid(
            "linear fit needs at least two distinct noise levels",
        ));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(LinearFit {
        intercept: my - slope * mx,
        slope,
    })
}

/// Least-squares polynomial of `degree`, solved through column-scaled normal
/// equations with iterative refinement.
pub fn fit_polynomial(points: &[(f64, f64)], degree: usize) -> Result<Polynomial> {
    let cols = degree + 1;
    if cols > distinct_x(points) {
        return Err(Error::invalid(format!(
            "degree {degree} fit needs at least {cols} distinct noise levels"
        )));
    }
    let design: Vec<Vec<f64>> = points
        .iter()
        .map(|&(x, _)| (0..cols).map(|k| x.powi(k as i32)).collect())
        .collect();
    let scale: Vec<f64> = (0..cols)
        .map(|k| {
            let norm = design.iter().map(|row| row[k] * row[k]).sum::<f64>().sqrt();
            if norm > 0.0 {
                norm
            } else {
                1.0
            }
        })
        .collect();
    let a: Vec<Vec<f64>> = design
        .iter()
        .map(|row| row.iter().zip(&scale).map(|(v, s)| v / s).collect())
        .collect();
    let mut normal = vec![vec![0.0; cols]; cols];
    for row in &a {
        for i in 0..cols {
            for j in 0..cols {
                normal[i][j] += row[i] * row[j];
            }
        }
    }
    let rhs_of = |residual: &[f64]| -> Vec<f64> {
        (0..cols)
            .map(|i| a.iter().zip(residual).map(|(row, r)| row[i] * r).sum())
            .collect()
    };

    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let mut scaled = solve(&normal, &rhs_of(&ys))?;
    for _ in 0..3 {
        let residual: Vec<f64> = a
            .iter()
            .zip(&ys)
            .map(|(row, y)| y - row.iter().zip(&scaled).map(|(v, c)| v * c).sum::<f64>())
            .collect();
        let correction = solve(&normal, &rhs_of(&residual))?;
        for (c, d) in scaled.iter_mut().zip(&correction) {
            *c += d;
        }
    }
    Ok(Polynomial {
        coefficients: scaled.iter().zip(&scale).map(|(c, s)| c / s).collect(),
    })
}

/// Gaussian elimination with partial pivoting.
fn solve(matrix: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut m: Vec<Vec<f64>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b);
            r
        })
        .collect();
    let max_entry = matrix
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("non-empty range");
        if m[pivot][col].abs() <= max_entry * 1e-15 {
            return Err(Error::Numeric("singular least-squares system".into()));
        }
        m.swap(col, pivot);
        let (top, rest) = m.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest {
            let f = row[col] / pivot_row[col];
            for (dst, src) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (m[row][n] - tail) / m[row][row];
    }
    Ok(x)
}

/// Value at `x` of the interpolating polynomial through every point.
pub fn lagrange_eval(points: &[(f64, f64)], x: f64) -> Result<f64> {
    if distinct_x(points) != points.len() {
        return Err(Error::invalid("interpolation points share a noise level"));
    }
    Ok(points
        .iter()
        .enumerate()
        .map(|(i, &(xi, yi))| {
            let basis: f64 = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &(xj, _))| (x - xj) / (xi - xj))
                .product();
            yi * basis
        })
        .sum())
}

/// Degree-(k-1) interpolant through all k points, evaluated at zero noise.
pub fn richardson_extrapolate(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::invalid(
            "Richardson extrapolation needs at least two noise levels",
        ));
    }
    lagrange_eval(points, 0.0)
}
