//! Row-compressed sparse matrices and a Jacobi-preconditioned conjugate
//! gradient solver.
//!
//! The curl-curl system is positive semidefinite with the gradient cochains
//! in its kernel; no gauge fixing is applied. CG iterates stay in the
//! kernel-orthogonal complement as long as the right-hand side is
//! compatible, which the assembly checks beforehand.

use crate::{par, Error, Result};

/// Symmetric sparse matrix in CSR layout.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from unordered (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut triplets: Vec<(u32, u32, f64)>) -> Self {
        par::sort_unstable_by_key(&mut triplets, |&(r, c, _)| ((r as u64) << 32) | c as u64);
        let mut rows: Vec<u32> = Vec::new();
        let mut cols: Vec<u32> = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        for (r, c, v) in triplets {
            match (rows.last(), cols.last()) {
                (Some(&lr), Some(&lc)) if lr == r && lc == c => {
                    *vals.last_mut().unwrap() += v;
                }
                _ => {
                    rows.push(r);
                    cols.push(c);
                    vals.push(v);
                }
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &r in &rows {
            row_ptr[r as usize + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `y = A x`. Small systems stay sequential: per-iteration pool
    /// overhead beats the arithmetic below a few tens of thousands of rows.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        let row_ptr = &self.row_ptr;
        let cols = &self.cols;
        let vals = &self.vals;
        if self.n < 32_768 {
            for (r, out) in y.iter_mut().enumerate() {
                let mut acc = 0.0;
                for idx in row_ptr[r]..row_ptr[r + 1] {
                    acc += vals[idx] * x[cols[idx] as usize];
                }
                *out = acc;
            }
            return;
        }
        par::for_each_chunk_mut(y, 4096, |start, slice| {
            for (k, out) in slice.iter_mut().enumerate() {
                let r = start + k;
                let mut acc = 0.0;
                for idx in row_ptr[r]..row_ptr[r + 1] {
                    acc += vals[idx] * x[cols[idx] as usize];
                }
                *out = acc;
            }
        });
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for r in 0..self.n {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[idx] as usize == r {
                    d[r] += self.vals[idx];
                }
            }
        }
        d
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest absolute asymmetry `|A - A^T|_max`, by explicit transpose
    /// lookup.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[idx] as usize;
                if c < r {
                    continue;
                }
                let mirror = self.get(c, r);
                worst = worst.max((self.vals[idx] - mirror).abs());
            }
        }
        worst
    }

    fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&(c as u32)) {
            Ok(pos) => self.vals[range.start + pos],
            Err(_) => 0.0,
        }
    }
}

/// Convergence record of one CG run.
#[derive(Clone, Debug)]
pub struct CgReport {
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
    /// Relative residual after each iteration.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients: iterates until
/// `||b - A x|| <= tol ||b||`. Kernel components of singular systems are
/// never excited when the right-hand side is compatible and the initial
/// guess is clean.
pub fn cg_solve(
    matrix: &CsrMatrix,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
    x0: Option<&[f64]>,
) -> Result<(Vec<f64>, CgReport)> {
    let n = matrix.n();
    debug_assert_eq!(rhs.len(), n);
    let norm_b = dot(rhs, rhs).sqrt();
    if norm_b == 0.0 && x0.is_none() {
        return Ok((vec![0.0; n], CgReport { iterations: 0, residual: 0.0, history: vec![] }));
    }
    let scale = if norm_b > 0.0 { norm_b } else { 1.0 };

    let inv_diag: Vec<f64> = matrix
        .diagonal()
        .into_iter()
        .map(|d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let mut r = vec![0.0; n];
    matrix.matvec(&x, &mut r);
    for i in 0..n {
        r[i] = rhs[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rho = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut history = Vec::new();

    let mut res = dot(&r, &r).sqrt() / scale;
    if res <= tol {
        return Ok((x, CgReport { iterations: 0, residual: res, history }));
    }

    for iter in 1..=max_iter {
        matrix.matvec(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 || !pq.is_finite() {
            // direction fell into the kernel: nothing left to reduce
            res = dot(&r, &r).sqrt() / scale;
            history.push(res);
            if res <= tol {
                return Ok((x, CgReport { iterations: iter, residual: res, history }));
            }
            return Err(Error::NoConvergence { iterations: iter, residual: res, history });
        }
        let alpha = rho / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        res = dot(&r, &r).sqrt() / scale;
        history.push(res);
        if res <= tol {
            return Ok((x, CgReport { iterations: iter, residual: res, history }));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rho_next = dot(&r, &z);
        let beta = rho_next / rho;
        rho = rho_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: res, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_converges_immediately() {
        let n = 10;
        let triplets: Vec<(u32, u32, f64)> = (0..n).map(|i| (i as u32, i as u32, 1.0)).collect();
        let a = CsrMatrix::from_triplets(n, triplets);
        let rhs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let (x, report) = cg_solve(&a, &rhs, 1e-12, 10, None).unwrap();
        assert!(report.iterations <= 1);
        for i in 0..n {
            assert!((x[i] - rhs[i]).abs() < 1e-12);
        }
    }

    /// Dense Gaussian elimination with partial pivoting, as the oracle.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, piv);
            b.swap(k, piv);
            for i in (k + 1)..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in (k + 1)..n {
                s -= a[k][j] * x[j];
            }
            x[k] = s / a[k][k];
        }
        x
    }

    #[test]
    fn random_spd_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 50;
        // A = B^T B + n I
        let b: Vec<Vec<f64>> =
            (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (0..n).map(|k| b[k][i] * b[k][j]).sum::<f64>();
            }
            a[i][i] += n as f64;
        }
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                triplets.push((i as u32, j as u32, a[i][j]));
            }
        }
        let sparse = CsrMatrix::from_triplets(n, triplets);
        let (x, _) = cg_solve(&sparse, &rhs, 1e-12, 1000, None).unwrap();
        let oracle = dense_solve(a, rhs);
        for i in 0..n {
            assert!((x[i] - oracle[i]).abs() < 1e-8, "{} vs {}", x[i], oracle[i]);
        }
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let triplets = vec![(0u32, 0u32, 1.0), (0, 0, 2.0), (1, 1, 4.0), (0, 1, 0.5), (1, 0, 0.5)];
        let a = CsrMatrix::from_triplets(2, triplets);
        assert_eq!(a.nnz(), 4);
        let mut y = vec![0.0; 2];
        a.matvec(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![3.5, 4.5]);
        assert_eq!(a.max_asymmetry(), 0.0);
    }

    #[test]
    fn nonconvergence_reports_history() {
        // indefinite-ish trap: force max_iter too small on a hard system
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 40;
        let mut triplets = Vec::new();
        for i in 0..n {
            triplets.push((i as u32, i as u32, 1.0 + rng.gen_range(0.0..1e4)));
            if i + 1 < n {
                triplets.push((i as u32, (i + 1) as u32, -1.0));
                triplets.push(((i + 1) as u32, i as u32, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, triplets);
        let rhs = vec![1.0; n];
        match cg_solve(&a, &rhs, 1e-14, 2, None) {
            Err(Error::NoConvergence { iterations, history, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(history.len(), 2);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }
}
