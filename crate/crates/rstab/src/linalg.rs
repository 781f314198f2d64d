//! Sparse matrices and iterative solvers.
//!
//! A small CSR implementation plus preconditioned CG and BiCGStab; everything
//! the assembly and spectral modules need, without an external sparse crate.

use crate::error::{Error, Result};

/// Triplet accumulator for finite element assembly.
#[derive(Debug, Clone)]
pub struct Triplets {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.n_rows, self.n_cols, &self.entries)
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Build from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(n_rows: usize, n_cols: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = entries.to_vec();
        sorted.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut cur_row = 0usize;
        for &(i, j, v) in &sorted {
            while cur_row < i {
                cur_row += 1;
                row_ptr[cur_row] = col_idx.len();
            }
            if col_idx.len() > row_ptr[cur_row] && *col_idx.last().unwrap() == j {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
            }
        }
        while cur_row < n_rows {
            cur_row += 1;
            row_ptr[cur_row] = col_idx.len();
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for i in 0..self.n_rows {
            let mut acc = 0.0;
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut entries = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                entries.push((j, i, v));
            }
        }
        CsrMatrix::from_triplets(self.n_cols, self.n_rows, &entries)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.scale(a);
        m
    }

    /// self + diag(d).
    pub fn plus_diagonal(&self, d: &[f64]) -> CsrMatrix {
        let mut entries = Vec::with_capacity(self.nnz() + d.len());
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                entries.push((i, j, v));
            }
        }
        for (i, &v) in d.iter().enumerate() {
            entries.push((i, i, v));
        }
        CsrMatrix::from_triplets(self.n_rows, self.n_cols, &entries)
    }

    /// self + other (same shape).
    pub fn plus(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        let mut entries = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                entries.push((i, j, v));
            }
            for (j, v) in other.row(i) {
                entries.push((i, j, v));
            }
        }
        CsrMatrix::from_triplets(self.n_rows, self.n_cols, &entries)
    }

    /// Restrict to the index set `keep` (rows and columns).
    pub fn restrict(&self, keep: &[usize]) -> CsrMatrix {
        let mut inv = vec![usize::MAX; self.n_cols];
        for (new, &old) in keep.iter().enumerate() {
            inv[old] = new;
        }
        let mut entries = Vec::new();
        for (new_i, &old_i) in keep.iter().enumerate() {
            for (j, v) in self.row(old_i) {
                if inv[j] != usize::MAX {
                    entries.push((new_i, inv[j], v));
                }
            }
        }
        CsrMatrix::from_triplets(keep.len(), keep.len(), &entries)
    }

    /// max_ij |A_ij - A_ji|.
    pub fn max_asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut worst = 0.0f64;
        for i in 0..self.n_rows {
            let mut row_a: Vec<(usize, f64)> = self.row(i).collect();
            let mut row_b: Vec<(usize, f64)> = t.row(i).collect();
            row_a.sort_unstable_by_key(|e| e.0);
            row_b.sort_unstable_by_key(|e| e.0);
            let (mut ka, mut kb) = (0, 0);
            while ka < row_a.len() || kb < row_b.len() {
                match (row_a.get(ka), row_b.get(kb)) {
                    (Some(&(ja, va)), Some(&(jb, vb))) if ja == jb => {
                        worst = worst.max((va - vb).abs());
                        ka += 1;
                        kb += 1;
                    }
                    (Some(&(ja, va)), Some(&(jb, _))) if ja < jb => {
                        worst = worst.max(va.abs());
                        ka += 1;
                    }
                    (Some(_), Some(&(_, vb))) => {
                        worst = worst.max(vb.abs());
                        kb += 1;
                    }
                    (Some(&(_, va)), None) => {
                        worst = worst.max(va.abs());
                        ka += 1;
                    }
                    (None, Some(&(_, vb))) => {
                        worst = worst.max(vb.abs());
                        kb += 1;
                    }
                    (None, None) => break,
                }
            }
        }
        worst
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Write in Matrix Market coordinate format.
    pub fn write_matrix_market(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(f, "{} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                writeln!(f, "{} {} {:.17e}", i + 1, j + 1, v)?;
            }
        }
        Ok(())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Preconditioned conjugate gradients for SPD systems; Jacobi preconditioner.
///
/// Returns Err on breakdown (matrix not SPD) so callers can back off a shift.
pub fn cg(a: &CsrMatrix, b: &[f64], x0: Option<&[f64]>, tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    let n = a.n_rows;
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let diag = a.diagonal();
    let precond = |r: &[f64], z: &mut [f64]| {
        for i in 0..n {
            let d = diag[i];
            z[i] = if d.abs() > 1e-300 { r[i] / d } else { r[i] };
        }
    };
    let mut r = b.to_vec();
    let ax = a.matvec(&x);
    for i in 0..n {
        r[i] -= ax[i];
    }
    let bnorm = norm2(b).max(1e-300);
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        if norm2(&r) <= tol * bnorm {
            return Ok((x, it));
        }
        let ap = a.matvec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::SolverDivergence {
                iterations: it,
                residual: norm2(&r) / bnorm,
            });
        }
        let alpha = rz / pap;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if norm2(&r) <= tol * bnorm * 10.0 {
        return Ok((x, max_iter));
    }
    Err(Error::SolverDivergence {
        iterations: max_iter,
        residual: norm2(&r) / bnorm,
    })
}

/// Preconditioned BiCGStab for nonsymmetric systems; Jacobi preconditioner.
pub fn bicgstab(a: &CsrMatrix, b: &[f64], x0: Option<&[f64]>, tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    let n = a.n_rows;
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let diag = a.diagonal();
    let prec = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, &r)| if diag[i].abs() > 1e-300 { r / diag[i] } else { r })
            .collect()
    };
    let mut r = b.to_vec();
    let ax = a.matvec(&x);
    for i in 0..n {
        r[i] -= ax[i];
    }
    let bnorm = norm2(b).max(1e-300);
    let r0 = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for it in 0..max_iter {
        if norm2(&r) <= tol * bnorm {
            return Ok((x, it));
        }
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < 1e-300 {
            // restart with current residual
            return Err(Error::SolverDivergence {
                iterations: it,
                residual: norm2(&r) / bnorm,
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let ph = prec(&p);
        v = a.matvec(&ph);
        alpha = rho / dot(&r0, &v);
        let mut s = r.clone();
        axpy(&mut s, -alpha, &v);
        if norm2(&s) <= tol * bnorm {
            axpy(&mut x, alpha, &ph);
            return Ok((x, it));
        }
        let sh = prec(&s);
        let t = a.matvec(&sh);
        let tt = dot(&t, &t);
        if tt.abs() < 1e-300 {
            return Err(Error::SolverDivergence {
                iterations: it,
                residual: norm2(&s) / bnorm,
            });
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        if omega.abs() < 1e-300 {
            return Err(Error::SolverDivergence {
                iterations: it,
                residual: norm2(&r) / bnorm,
            });
        }
    }
    if norm2(&r) <= tol * bnorm * 10.0 {
        return Ok((x, max_iter));
    }
    Err(Error::SolverDivergence {
        iterations: max_iter,
        residual: norm2(&r) / bnorm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i > 0 {
                t.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
            }
        }
        t.to_csr()
    }

    #[test]
    fn csr_from_triplets_sums_duplicates() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, 5.0)]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 0), 5.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn transpose_roundtrip() {
        let mut rng = SplitMix64::new(3);
        let mut entries = Vec::new();
        for _ in 0..40 {
            entries.push((rng.next_usize(7), rng.next_usize(7), rng.uniform(-1.0, 1.0)));
        }
        let m = CsrMatrix::from_triplets(7, 7, &entries);
        let tt = m.transpose().transpose();
        for i in 0..7 {
            for j in 0..7 {
                assert!((m.get(i, j) - tt.get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cg_solves_spd() {
        let a = laplacian_1d(50);
        let b = vec![1.0; 50];
        let (x, _) = cg(&a, &b, None, 1e-12, 1000).unwrap();
        let r = a.matvec(&x);
        let err: f64 = r.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "residual {err}");
    }

    #[test]
    fn bicgstab_solves_nonsymmetric() {
        let n = 60;
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 4.0);
            if i > 0 {
                t.push(i, i - 1, -1.5);
            }
            if i + 1 < n {
                t.push(i, i + 1, -0.5);
            }
        }
        let a = t.to_csr();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let (x, _) = bicgstab(&a, &b, None, 1e-12, 2000).unwrap();
        let r = a.matvec(&x);
        let err: f64 = r.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "residual {err}");
    }

    #[test]
    fn asymmetry_measure() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 0.25)]);
        assert!((m.max_asymmetry() - 0.75).abs() < 1e-15);
        let s = laplacian_1d(10);
        assert_eq!(s.max_asymmetry(), 0.0);
    }
}
