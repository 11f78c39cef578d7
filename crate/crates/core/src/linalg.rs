//! Small dense matrices and a Gaussian-elimination solver.

use std::ops::{Index, IndexMut};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            m.row_mut(i).copy_from_slice(r);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn fill(&mut self, value: f64) {
        self.data.fill(value);
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Returned when elimination meets a pivot column with no usable entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular {
    pub column: usize,
}

/// Solves `a · x = b` for every column of `b`, overwriting `b` with `x`.
///
/// Gaussian elimination with partial pivoting; `a` is destroyed. A pivot whose
/// magnitude is below `1e-300` or not finite is reported as singular.
pub fn solve_in_place(a: &mut Matrix, b: &mut Matrix) -> Result<(), Singular> {
    let n = a.rows;
    assert_eq!(a.cols, n, "coefficient matrix must be square");
    assert_eq!(b.rows, n, "right-hand side has the wrong number of rows");

    for col in 0..n {
        let mut pivot_row = col;
        let mut best = a[(col, col)].abs();
        for r in col + 1..n {
            let v = a[(r, col)].abs();
            if v > best {
                best = v;
                pivot_row = r;
            }
        }
        if !(best.is_finite() && best > 1e-300) {
            return Err(Singular { column: col });
        }
        a.swap_rows(col, pivot_row);
        b.swap_rows(col, pivot_row);

        let pivot = a[(col, col)];
        for r in col + 1..n {
            let factor = a[(r, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[(r, col)] = 0.0;
            for j in col + 1..n {
                let v = a[(col, j)];
                a[(r, j)] -= factor * v;
            }
            for j in 0..b.cols {
                let v = b[(col, j)];
                b[(r, j)] -= factor * v;
            }
        }
    }

    for col in (0..n).rev() {
        let pivot = a[(col, col)];
        for j in 0..b.cols {
            let mut acc = b[(col, j)];
            for k in col + 1..n {
                acc -= a[(col, k)] * b[(k, j)];
            }
            b[(col, j)] = acc / pivot;
        }
    }
    Ok(())
}
