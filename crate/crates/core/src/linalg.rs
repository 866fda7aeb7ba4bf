//! Compressed-row sparse matrices and a banded LDLᵀ factorization.
//!
//! Every matrix assembled by this crate is symmetric with bandwidth equal to
//! the number of nodes along the first grid axis, so a banded factorization
//! without pivoting is a sparse direct solver for all of them.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from `(row, col, value)` triplets; duplicates are summed and
    /// columns within a row are sorted.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) outside {n}x{n}");
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// `D_left · self · D_right` for diagonal scalings.
    pub fn scale(&self, left: &[f64], right: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[k] *= left[i] * right[self.col_idx[k]];
            }
        }
        out
    }

    pub fn scaled_by(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `self + diag(shift)`.
    pub fn add_diagonal(&self, shift: &[f64]) -> Self {
        let mut triplets = self.triplets();
        triplets.extend(shift.iter().enumerate().map(|(i, &s)| (i, i, s)));
        CsrMatrix::from_triplets(self.n, &triplets)
    }

    /// Principal submatrix on the given (sorted) indices.
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_i, &old_i) in keep.iter().enumerate() {
            for (j, v) in self.row(old_i) {
                if map[j] != usize::MAX {
                    triplets.push((new_i, map[j], v));
                }
            }
        }
        CsrMatrix::from_triplets(keep.len(), &triplets)
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry magnitude.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v).sum())
            .collect()
    }

    /// Matrix Market coordinate format, general real, 1-based indices.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::new();
        s.push_str("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.n, self.n, self.nnz());
        for (i, j, v) in self.triplets() {
            let _ = writeln!(s, "{} {} {:.17e}", i + 1, j + 1, v);
        }
        s
    }
}

/// `L D Lᵀ` factorization of a symmetric banded matrix, no pivoting.
#[derive(Debug, Clone)]
pub struct BandedLdl {
    n: usize,
    bw: usize,
    // row-major strict lower band: lower[i * bw + (j + bw - i)] = L[i][j], j in i-bw..i
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl BandedLdl {
    /// Factor a symmetric matrix, reading only its lower triangle.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let bw = a.bandwidth();
        let mut lower = vec![0.0; n * bw];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j < i {
                    lower[i * bw + (j + bw - i)] = v;
                } else if j == i {
                    diag[i] = v;
                }
            }
        }
        let scale = diag
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for i in 0..n {
            let start = i.saturating_sub(bw);
            for j in start..i {
                let kstart = start.max(j.saturating_sub(bw));
                let mut s = lower[i * bw + (j + bw - i)];
                for k in kstart..j {
                    s -= lower[i * bw + (k + bw - i)] * diag[k] * lower[j * bw + (k + bw - j)];
                }
                lower[i * bw + (j + bw - i)] = s / diag[j];
            }
            let mut d = diag[i];
            for k in start..i {
                let l = lower[i * bw + (k + bw - i)];
                d -= l * l * diag[k];
            }
            if !d.is_finite() || d.abs() <= 1e-14 * scale {
                return Err(Error::LinearSolve(format!(
                    "zero or non-finite pivot {d:.3e} at row {i}"
                )));
            }
            diag[i] = d;
        }
        Ok(BandedLdl { n, bw, lower, diag })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// All pivots positive, i.e. the factored matrix is positive definite.
    pub fn is_positive_definite(&self) -> bool {
        self.diag.iter().all(|&d| d > 0.0)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        let bw = self.bw;
        for i in 0..self.n {
            let start = i.saturating_sub(bw);
            let mut s = x[i];
            for k in start..i {
                s -= self.lower[i * bw + (k + bw - i)] * x[k];
            }
            x[i] = s;
        }
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= d;
        }
        for i in (0..self.n).rev() {
            let xi = x[i];
            let start = i.saturating_sub(bw);
            for k in start..i {
                x[k] -= self.lower[i * bw + (k + bw - i)] * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
