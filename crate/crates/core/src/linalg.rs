//! Exact linear algebra over the rationals: dense and sparse elimination,
//! rank, nullspace and particular solutions. No floating point anywhere.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::coefficients::Rational;
use crate::error::CoreError;

/// Dense column-major-agnostic rational matrix (row major storage).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rational>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigRational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend(row);
        }
        Mat {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn at(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Rational {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if !b.is_zero() {
                        *out.at_mut(i, j) += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut s = BigRational::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        s += a * b;
                    }
                }
                s
            })
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        gauss(&mut m).len()
    }

    /// Basis of the right nullspace, columns as vectors, deterministic order
    /// (free columns in increasing index, free variable set to 1).
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let mut m = self.clone();
        let pivots = gauss(&mut m);
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![BigRational::zero(); self.cols];
            v[free] = BigRational::one();
            // back substitution against reduced echelon rows
            for &(r, c) in pivots.iter().rev() {
                let mut s = BigRational::zero();
                for j in (c + 1)..self.cols {
                    if !m.at(r, j).is_zero() && !v[j].is_zero() {
                        s += m.at(r, j) * &v[j];
                    }
                }
                v[c] = -s / m.at(r, c);
            }
            basis.push(v);
        }
        basis
    }

    /// One solution of `self * x = b`, free variables set to zero (canonical
    /// under the fixed basis order), or None when inconsistent.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(self.rows, b.len());
        let mut m = Mat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *m.at_mut(i, j) = self.at(i, j).clone();
            }
            *m.at_mut(i, self.cols) = b[i].clone();
        }
        let pivots = gauss(&mut m);
        if pivots.iter().any(|&(_, c)| c == self.cols) {
            return None; // pivot in augmented column
        }
        let mut x = vec![BigRational::zero(); self.cols];
        for &(r, c) in pivots.iter().rev() {
            let mut s = m.at(r, self.cols).clone();
            for j in (c + 1)..self.cols {
                if !m.at(r, j).is_zero() && !x[j].is_zero() {
                    s -= m.at(r, j) * &x[j];
                }
            }
            x[c] = s / m.at(r, c);
        }
        Some(x)
    }

    /// Inverse of a square matrix, or None if singular.
    pub fn inverse(&self) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = Mat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                *m.at_mut(i, j) = self.at(i, j).clone();
            }
            *m.at_mut(i, n + i) = BigRational::one();
        }
        let pivots = gauss(&mut m);
        if pivots.len() < n || pivots.iter().any(|&(_, c)| c >= n) {
            return None;
        }
        // normalize to reduced row echelon
        for &(r, c) in pivots.iter().rev() {
            let p = m.at(r, c).clone();
            for j in 0..2 * n {
                let v = m.at(r, j).clone() / &p;
                *m.at_mut(r, j) = v;
            }
            for rr in 0..r {
                let f = m.at(rr, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..2 * n {
                    let v = m.at(rr, j).clone() - &f * m.at(r, j);
                    *m.at_mut(rr, j) = v;
                }
            }
        }
        let mut inv = Mat::zeros(n, n);
        for (idx, &(r, c)) in pivots.iter().enumerate() {
            debug_assert_eq!(c, idx);
            for j in 0..n {
                *inv.at_mut(c, j) = m.at(r, n + j).clone();
            }
        }
        Some(inv)
    }
}

/// In-place row echelon; returns pivot (row, col) list in order.
fn gauss(m: &mut Mat) -> Vec<(usize, usize)> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        let Some(p) = (row..m.rows).find(|&r| !m.at(r, col).is_zero()) else {
            continue;
        };
        if p != row {
            for j in 0..m.cols {
                let a = m.at(p, j).clone();
                let b = m.at(row, j).clone();
                *m.at_mut(p, j) = b;
                *m.at_mut(row, j) = a;
            }
        }
        let lead = m.at(row, col).clone();
        for r in (row + 1)..m.rows {
            let f = m.at(r, col).clone();
            if f.is_zero() {
                continue;
            }
            let scale = f / &lead;
            for j in col..m.cols {
                let v = m.at(r, j).clone() - &scale * m.at(row, j);
                *m.at_mut(r, j) = v;
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    pivots
}

/// Sparse rational matrix as row lists, for the larger descent complexes.
#[derive(Debug, Clone, Default)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<Vec<(usize, Rational)>>,
}

impl SparseMat {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMat {
            rows,
            cols,
            entries: vec![Vec::new(); rows],
        }
    }

    pub fn push(&mut self, r: usize, c: usize, v: Rational) {
        if v.is_zero() {
            return;
        }
        let row = &mut self.entries[r];
        if let Some(slot) = row.iter_mut().find(|(cc, _)| *cc == c) {
            slot.1 += v;
            if slot.1.is_zero() {
                row.retain(|(_, x)| !x.is_zero());
            }
        } else {
            row.push((c, v));
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon().len()
    }

    pub fn row_entries(&self, r: usize) -> &[(usize, Rational)] {
        &self.entries[r]
    }

    /// Sparse elimination; returns the echelon rows (sorted by leading column).
    fn echelon(&self) -> Vec<Vec<(usize, Rational)>> {
        // pivot_for_col[c] = index into `reduced` whose leading column is c
        let mut pivot_for_col: Vec<Option<usize>> = vec![None; self.cols];
        let mut reduced: Vec<Vec<(usize, Rational)>> = Vec::new();
        for r in 0..self.rows {
            let mut row = self.entries[r].clone();
            row.sort_by_key(|&(c, _)| c);
            loop {
                row.retain(|(_, v)| !v.is_zero());
                let Some(&(lead, ref lv)) = row.first() else {
                    break;
                };
                match pivot_for_col[lead] {
                    None => {
                        let inv = BigRational::one() / lv.clone();
                        for (_, v) in row.iter_mut() {
                            *v = &*v * &inv;
                        }
                        pivot_for_col[lead] = Some(reduced.len());
                        reduced.push(row);
                        break;
                    }
                    Some(pi) => {
                        let f = lv.clone();
                        row = sub_scaled(&row, &reduced[pi], &f);
                    }
                }
            }
        }
        reduced
    }
}

/// row - f * pivot, both sorted by column; pivot is monic at its lead.
fn sub_scaled(
    row: &[(usize, Rational)],
    pivot: &[(usize, Rational)],
    f: &Rational,
) -> Vec<(usize, Rational)> {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        if j == pivot.len() || (i < row.len() && row[i].0 < pivot[j].0) {
            out.push(row[i].clone());
            i += 1;
        } else if i == row.len() || pivot[j].0 < row[i].0 {
            out.push((pivot[j].0, -f * &pivot[j].1));
            j += 1;
        } else {
            let v = &row[i].1 - f * &pivot[j].1;
            if !v.is_zero() {
                out.push((row[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Solve `A x = b` for sparse A, canonical solution (free vars zero).
pub fn sparse_solve(a: &SparseMat, b: &[Rational]) -> Result<Vec<Rational>, CoreError> {
    assert_eq!(a.rows, b.len());
    // Augment and eliminate; keep it simple by reusing the dense path when
    // small, otherwise an augmented sparse elimination.
    let mut aug = SparseMat::new(a.rows, a.cols + 1);
    for r in 0..a.rows {
        for (c, v) in &a.entries[r] {
            aug.push(r, *c, v.clone());
        }
        if !b[r].is_zero() {
            aug.push(r, a.cols, b[r].clone());
        }
    }
    let rows = aug.echelon();
    if rows
        .iter()
        .any(|row| row.first().map(|&(c, _)| c) == Some(a.cols))
    {
        return Err(CoreError::NoSolution(
            "linear system is inconsistent".into(),
        ));
    }
    let mut x = vec![BigRational::zero(); a.cols];
    let mut by_lead: Vec<(usize, &Vec<(usize, Rational)>)> = rows
        .iter()
        .filter_map(|row| row.first().map(|&(c, _)| (c, row)))
        .collect();
    by_lead.sort_by_key(|&(c, _)| c);
    for &(lead, row) in by_lead.iter().rev() {
        let mut s = BigRational::zero();
        let mut rhs = BigRational::zero();
        for (c, v) in row.iter().skip(1) {
            if *c == a.cols {
                rhs = v.clone();
            } else if !x[*c].is_zero() {
                s += v * &x[*c];
            }
        }
        // row is monic at lead
        x[lead] = rhs - s;
    }
    Ok(x)
}
