//! Small dense linear algebra: column-major matrices, LU factorization with
//! partial pivoting, and greedy column-pivoted selection.
//!
//! Problem dimensions here are tiny (n ≤ ~10 attributes, arms in the
//! hundreds), so plain `Vec<f64>` kernels are all that is needed.

use crate::error::{Error, Result};

/// Column-major matrix; `col(j)` is a contiguous slice, which is convenient
/// because arms are columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::BadShape(format!(
                    "column {j} has length {}, expected {rows}",
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("matrix entry"));
            }
            data.extend_from_slice(c);
        }
        Ok(Self { rows, cols: columns.len(), data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// `Aᵀx` — one dot product per column.
    pub fn transpose_apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), x)).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

/// LU factorization with partial pivoting of a square matrix, stored packed.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>, // row-major, L below the diagonal (unit diag), U on/above
    perm: Vec<usize>,
}

impl LuFactors {
    /// Factorize the `n×n` matrix whose columns are given; fails when a pivot
    /// falls below `tol` times the largest input magnitude.
    pub fn factor(square: &Matrix) -> Result<Self> {
        let n = square.rows;
        if square.cols != n {
            return Err(Error::BadShape(format!("LU needs a square matrix, got {n}x{}", square.cols)));
        }
        // Copy into row-major working storage.
        let mut lu = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                lu[i * n + j] = square.col(j)[i];
            }
        }
        let scale = lu.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let tol = scale * 1e-12;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= tol {
                return Err(Error::RankDeficient);
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in k + 1..n {
                    lu[i * n + j] -= factor * lu[k * n + j];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    /// Solve `Ax = b` using the stored factors.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    /// Solve `Aᵀx = b` with the same factors: `PA = LU` gives
    /// `Aᵀ = UᵀLᵀP`, so solve the two triangular systems transposed and
    /// unpermute at the end.
    pub fn solve_transposed(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        // Uᵀ w = b (lower triangular with U's diagonal).
        let mut w = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                w[i] -= self.lu[j * n + i] * w[j];
            }
            w[i] /= self.lu[i * n + i];
        }
        // Lᵀ v = w (upper triangular, unit diagonal).
        for i in (0..n).rev() {
            for j in i + 1..n {
                w[i] -= self.lu[j * n + i] * w[j];
            }
        }
        // x = Pᵀ v.
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        x
    }
}

/// Greedy column-pivoted selection of `n` linearly independent columns
/// (modified Gram–Schmidt): at each step take the column with the largest
/// residual norm, orthogonalize the rest against it. Ties go to the lowest
/// index so the choice is reproducible.
///
/// Returns the selected column indices, or an error when fewer than `n`
/// columns survive the tolerance (rank-deficient input).
pub fn greedy_independent_columns(m: &Matrix) -> Result<Vec<usize>> {
    let n = m.rows;
    let mut work: Vec<Vec<f64>> = (0..m.cols).map(|j| m.col(j).to_vec()).collect();
    let scale = work
        .iter()
        .map(|c| norm2(c))
        .fold(0.0f64, f64::max)
        .max(1.0);
    let tol = scale * 1e-10;
    let mut chosen = Vec::with_capacity(n);
    let mut available: Vec<usize> = (0..m.cols).collect();
    for _ in 0..n {
        let mut best_idx = None;
        let mut best_norm = tol;
        for &j in &available {
            let nj = norm2(&work[j]);
            if nj > best_norm {
                best_norm = nj;
                best_idx = Some(j);
            }
        }
        let Some(jstar) = best_idx else {
            return Err(Error::RankDeficient);
        };
        let q: Vec<f64> = work[jstar].iter().map(|v| v / best_norm).collect();
        chosen.push(jstar);
        available.retain(|&j| j != jstar);
        for &j in &available {
            let proj = dot(&work[j], &q);
            for (w, qi) in work[j].iter_mut().zip(&q) {
                *w -= proj * qi;
            }
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Row rank of the matrix, up to the same tolerance the greedy selection uses.
pub fn has_full_row_rank(m: &Matrix) -> bool {
    m.cols >= m.rows && greedy_independent_columns(m).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: usize, cols: &[&[f64]]) -> Matrix {
        Matrix::from_columns(rows, &cols.iter().map(|c| c.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn lu_solves_known_system() {
        let a = mat(2, &[&[2.0, 1.0], &[1.0, 3.0]]);
        let lu = LuFactors::factor(&a).unwrap();
        let x = lu.solve(&[5.0, 10.0]);
        // 2x + y = 5, x + 3y = 10 -> x = 1, y = 3
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lu_rejects_singular() {
        let a = mat(2, &[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(LuFactors::factor(&a), Err(Error::RankDeficient)));
    }

    #[test]
    fn transposed_solve_matches_direct() {
        let a = mat(3, &[&[2.0, 1.0, 0.5], &[-1.0, 3.0, 1.0], &[0.25, -0.5, 4.0]]);
        let lu = LuFactors::factor(&a).unwrap();
        let b = [1.0, -2.0, 3.0];
        let x = lu.solve_transposed(&b);
        // Check Aᵀ x = b, i.e. for each column j: col_j · x = b[j].
        for j in 0..3 {
            assert!((dot(a.col(j), &x) - b[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_selects_independent_columns() {
        // Duplicated column never chosen twice.
        let m = mat(2, &[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let sel = greedy_independent_columns(&m).unwrap();
        assert_eq!(sel.len(), 2);
        assert!(sel.contains(&2));
        assert!(!(sel.contains(&0) && sel.contains(&1)));
    }

    #[test]
    fn greedy_fails_on_rank_deficient() {
        let m = mat(2, &[&[1.0, 1.0], &[2.0, 2.0], &[-1.0, -1.0]]);
        assert!(greedy_independent_columns(&m).is_err());
        assert!(!has_full_row_rank(&m));
    }

    proptest! {
        #[test]
        fn lu_solve_reconstructs(
            seedcols in proptest::collection::vec(
                proptest::collection::vec(-3.0f64..3.0, 4), 4),
            rhs in proptest::collection::vec(-5.0f64..5.0, 4),
        ) {
            // Diagonally dominate to keep the system comfortably regular.
            let mut cols = seedcols;
            for (j, c) in cols.iter_mut().enumerate() {
                c[j] += 8.0;
            }
            let a = Matrix::from_columns(4, &cols).unwrap();
            let lu = LuFactors::factor(&a).unwrap();
            let x = lu.solve(&rhs);
            // Check A x = rhs.
            for i in 0..4 {
                let mut s = 0.0;
                for j in 0..4 {
                    s += a.col(j)[i] * x[j];
                }
                prop_assert!((s - rhs[i]).abs() < 1e-9);
            }
        }
    }
}
