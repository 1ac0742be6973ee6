//! Compressed sparse row storage and preconditioned conjugate gradients.

use crate::error::{Error, Result};

/// Square sparse matrix in CSR form with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n × n` matrix from `(row, col, value)` triplets; repeated
    /// positions are summed in the order given.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) outside {n}×{n}");
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for mut row in rows {
            // Stable sort keeps the summation order of duplicates fixed.
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul(x))
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Incomplete Cholesky factor with the sparsity of the lower triangle.
/// For tridiagonal matrices this is the exact Cholesky factor.
struct IncompleteCholesky {
    l: CsrMatrix,
}

impl IncompleteCholesky {
    fn new(a: &CsrMatrix) -> Option<Self> {
        let n = a.n;
        let mut row_ptr = vec![0];
        let mut col_idx: Vec<usize> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        for i in 0..n {
            let start = col_idx.len();
            for (k, a_ik) in a.row(i).filter(|(k, _)| *k <= i) {
                // Σ_{j<k} L_ij L_kj over the shared pattern.
                let mut s = 0.0;
                let (mut p, kp_end) = (start, col_idx.len());
                let (mut r, r_end) = if k == i { (start, col_idx.len()) } else { (row_ptr[k], row_ptr[k + 1]) };
                while p < kp_end && r < r_end {
                    let (cp, cr) = (col_idx[p], col_idx[r]);
                    if cp >= k || cr >= k {
                        break;
                    }
                    match cp.cmp(&cr) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => r += 1,
                        std::cmp::Ordering::Equal => {
                            s += values[p] * values[r];
                            p += 1;
                            r += 1;
                        }
                    }
                }
                if k == i {
                    let pivot = a_ik - s;
                    if !(pivot > 0.0) || !pivot.is_finite() {
                        return None;
                    }
                    col_idx.push(i);
                    values.push(pivot.sqrt());
                } else {
                    let l_kk = values[row_ptr[k + 1] - 1];
                    col_idx.push(k);
                    values.push((a_ik - s) / l_kk);
                }
            }
            if col_idx.last() != Some(&i) {
                return None;
            }
            row_ptr.push(col_idx.len());
        }
        Some(Self { l: CsrMatrix { n, row_ptr, col_idx, values } })
    }

    /// Solves `L Lᵀ z = r`.
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let l = &self.l;
        for i in 0..l.n {
            let (start, end) = (l.row_ptr[i], l.row_ptr[i + 1]);
            let mut s = r[i];
            for p in start..end - 1 {
                s -= l.values[p] * z[l.col_idx[p]];
            }
            z[i] = s / l.values[end - 1];
        }
        for i in (0..l.n).rev() {
            let (start, end) = (l.row_ptr[i], l.row_ptr[i + 1]);
            z[i] /= l.values[end - 1];
            let zi = z[i];
            for p in start..end - 1 {
                z[l.col_idx[p]] -= l.values[p] * zi;
            }
        }
    }
}

enum Preconditioner {
    Cholesky(IncompleteCholesky),
    Jacobi(Vec<f64>),
}

impl Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Preconditioner::Cholesky(ic) => ic.apply(r, z),
            Preconditioner::Jacobi(d) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(d) {
                    *zi = ri / di;
                }
            }
        }
    }
}

/// Outcome of a converged CG run.
#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖b - A x‖ / ‖b‖`, recomputed from scratch at exit.
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients from `x = 0` until the true relative
/// residual drops to `rtol`. Uses IC(0), falling back to Jacobi when the
/// incomplete factorisation breaks down.
pub fn pcg(a: &CsrMatrix, b: &[f64], rtol: f64, max_iter: usize) -> Result<CgSolution> {
    let n = a.n;
    assert_eq!(b.len(), n);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(CgSolution { x: vec![0.0; n], iterations: 0, relative_residual: 0.0 });
    }
    let diag = a.diagonal();
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Solver { iterations: 0, residual: 1.0 });
    }
    let pre = match IncompleteCholesky::new(a) {
        Some(ic) => Preconditioner::Cholesky(ic),
        None => Preconditioner::Jacobi(diag),
    };
    // Residuals below this are round-off: the normwise backward error is
    // then at the level of machine precision.
    let a_norm = a.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    let floor = |x: &[f64]| 100.0 * f64::EPSILON * (a_norm * norm(x) + b_norm);
    let converged = |x: &[f64]| {
        let res = residual_norm(a, x, b);
        (res <= rtol * b_norm || res <= floor(x)).then_some(res / b_norm)
    };
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut ap = vec![0.0; n];
    pre.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0 && rz > 0.0) {
            // Breakdown: only acceptable if we are already at round-off.
            return match converged(&x) {
                Some(true_rel) => Ok(CgSolution { x, iterations: it, relative_residual: true_rel }),
                None => Err(Error::Solver { iterations: it, residual: rel }),
            };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm(&r) / b_norm;
        if rel <= rtol || norm(&r) <= floor(&x) {
            // Confirm against the true residual; the recurrence drifts.
            if let Some(true_rel) = converged(&x) {
                return Ok(CgSolution { x, iterations: it, relative_residual: true_rel });
            }
            // Restart from the true residual.
            r = b.iter().zip(a.mul(&x)).map(|(bi, axi)| bi - axi).collect();
            pre.apply(&r, &mut z);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        pre.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver { iterations: max_iter, residual: rel })
}

fn residual_norm(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul(x);
    b.iter().zip(&ax).map(|(bi, ai)| (bi - ai) * (bi - ai)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn triplets_are_summed_and_sorted() {
        let a = CsrMatrix::from_triplets(2, &[(0, 1, 1.0), (0, 0, 2.0), (0, 1, 0.5), (1, 1, 3.0)]);
        assert_eq!(a.get(0, 1), 1.5);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.diagonal(), vec![2.0, 3.0]);
        assert!(a.asymmetry() > 0.0);
        assert_eq!(laplace_1d(5).asymmetry(), 0.0);
    }

    #[test]
    fn ic0_is_exact_on_tridiagonal() {
        let a = laplace_1d(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let sol = pcg(&a, &b, 1e-12, 10).unwrap();
        assert!(sol.iterations <= 2);
        assert!(sol.relative_residual <= 1e-12);
    }

    #[test]
    fn solves_2d_laplacian() {
        let m = 20;
        let n = m * m;
        let mut t = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let k = i * m + j;
                t.push((k, k, 4.0));
                if i + 1 < m {
                    t.push((k, k + m, -1.0));
                    t.push((k + m, k, -1.0));
                }
                if j + 1 < m {
                    t.push((k, k + 1, -1.0));
                    t.push((k + 1, k, -1.0));
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, &t);
        let b = vec![1.0; n];
        let sol = pcg(&a, &b, 1e-10, 1000).unwrap();
        assert!(sol.relative_residual <= 1e-10);
        assert!(sol.iterations < 60, "{}", sol.iterations);
        // Same input, same bits.
        assert_eq!(pcg(&a, &b, 1e-10, 1000).unwrap(), sol);
    }

    #[test]
    fn zero_rhs_and_failures() {
        let a = laplace_1d(4);
        assert_eq!(pcg(&a, &[0.0; 4], 1e-8, 10).unwrap().x, vec![0.0; 4]);
        let singular = CsrMatrix::from_triplets(2, &[(0, 0, 1.0)]);
        assert!(matches!(pcg(&singular, &[1.0, 1.0], 1e-8, 10), Err(Error::Solver { .. })));
        assert!(matches!(pcg(&laplace_1d(200), &[1.0; 200], 1e-14, 0), Err(Error::Solver { .. })));
    }

    #[test]
    fn unattainable_tolerance_stops_at_round_off() {
        let a = laplace_1d(200);
        let b: Vec<f64> = (0..200).map(|i| 1.0 + (i as f64).sin()).collect();
        let sol = pcg(&a, &b, 1e-30, 5000).unwrap();
        assert!(sol.relative_residual < 1e-12, "{}", sol.relative_residual);
    }
}
