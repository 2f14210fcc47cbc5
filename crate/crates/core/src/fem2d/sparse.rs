use serde::Serialize;

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        Self { n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    /// Builds the sparsity pattern from sorted, deduplicated column lists.
    pub fn from_pattern(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows {
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self { n, row_ptr, col_idx, values: vec![0.0; nnz] }
    }

    #[inline]
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[range.clone()].binary_search(&col).ok().map(|k| range.start + k)
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let k = self.position(row, col).expect("entry outside sparsity pattern");
        self.values[k] += v;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row, col).map_or(0.0, |k| self.values[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).all(|k| {
                let j = self.col_idx[k];
                (self.values[k] - self.get(j, i)).abs() <= tol * self.values[k].abs().max(1.0)
            })
        })
    }
}

/// Reduced linear system on the interior unknowns after Dirichlet elimination.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// `(node, prescribed value)` for every boundary node.
    pub constrained: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_iter: 50_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients. `guess` seeds the iteration when given.
pub fn solve_system(sys: &SparseSystem, opts: SolverOptions, guess: Option<&[f64]>) -> Result<(Vec<f64>, SolveStats)> {
    let a = &sys.matrix;
    let b = &sys.rhs;
    let n = a.n;
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!("rhs has {} entries for {} unknowns", b.len(), n)));
    }
    let diag = a.diagonal();
    if let Some((row, &d)) = diag.iter().enumerate().find(|(_, &d)| !(d > 0.0)) {
        return Err(Error::NotPositiveDefinite { row, diag: d });
    }
    let bnorm = norm(b);
    let mut x = match guess {
        Some(g) if g.len() == n => g.to_vec(),
        _ => vec![0.0; n],
    };
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], SolveStats { iterations: 0, rel_residual: 0.0 }));
    }
    let mut r = vec![0.0; n];
    a.matvec(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = norm(&r) / bnorm;
    let mut it = 0;
    while res > opts.rel_tol {
        if it >= opts.max_iter {
            return Err(Error::SolverDiverged { residual: res, iterations: it });
        }
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite { row: it, diag: pap });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
        res = norm(&r) / bnorm;
    }
    // recompute the true residual to guard against drift
    a.matvec(&x, &mut r);
    let true_res = r.iter().zip(b).map(|(ri, bi)| (bi - ri).powi(2)).sum::<f64>().sqrt() / bnorm;
    Ok((x, SolveStats { iterations: it, rel_residual: true_res }))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let sys = SparseSystem { matrix: CsrMatrix::identity(5), rhs: vec![1.0, -2.0, 3.0, 0.5, 7.0], constrained: vec![] };
        let (x, stats) = solve_system(&sys, SolverOptions::default(), None).unwrap();
        assert_eq!(x, sys.rhs);
        assert!(stats.iterations <= 1);
    }

    #[test]
    fn tridiagonal_system() {
        let n = 50;
        let rows = (0..n).map(|i: usize| (i.saturating_sub(1)..=(i + 1).min(n - 1)).collect()).collect();
        let mut a = CsrMatrix::from_pattern(rows);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
            }
        }
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        a.matvec(&xs, &mut b);
        let sys = SparseSystem { matrix: a, rhs: b, constrained: vec![] };
        let (x, stats) = solve_system(&sys, SolverOptions { rel_tol: 1e-12, max_iter: 1000 }, None).unwrap();
        assert!(stats.rel_residual <= 1e-12);
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let n = 40;
        let rows = (0..n).map(|i: usize| (i.saturating_sub(1)..=(i + 1).min(n - 1)).collect()).collect();
        let mut a = CsrMatrix::from_pattern(rows);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
                a.add(i - 1, i, -1.0);
            }
        }
        let sys = SparseSystem { matrix: a, rhs: vec![1.0; n], constrained: vec![] };
        let err = solve_system(&sys, SolverOptions { rel_tol: 1e-14, max_iter: 3 }, None).unwrap_err();
        assert!(matches!(err, Error::SolverDiverged { iterations: 3, .. }));
    }
}
