//! Symmetric tridiagonal matrices and their eigendecomposition (implicit QL).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `r` is the unit eigenvector for `values[r]`.
    pub vectors: DMatrix<f64>,
}

impl TridiagonalOperator {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Self {
        assert_eq!(
            offdiag.len() + 1,
            diag.len().max(1),
            "off-diagonal band must be one shorter than the diagonal"
        );
        Self { diag, offdiag }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Largest entry in absolute value.
    pub fn max_abs(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.offdiag)
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &e) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] = e;
            m[(i + 1, i)] = e;
        }
        m
    }

    /// Principal sub-block on rows/columns `start..end`.
    pub fn block(&self, start: usize, end: usize) -> Self {
        let off = if end > start + 1 {
            self.offdiag[start..end - 1].to_vec()
        } else {
            Vec::new()
        };
        Self {
            diag: self.diag[start..end].to_vec(),
            offdiag: off,
        }
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut out = DVector::zeros(n);
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.offdiag[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.offdiag[i] * v[i + 1];
            }
            out[i] = s;
        }
        out
    }

    /// `self * m` for a dense `m` with matching row count.
    pub fn mul_dense(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, m.ncols(), |i, j| {
            let mut s = self.diag[i] * m[(i, j)];
            if i > 0 {
                s += self.offdiag[i - 1] * m[(i - 1, j)];
            }
            if i + 1 < n {
                s += self.offdiag[i] * m[(i + 1, j)];
            }
            s
        })
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + self.max_abs());
        let mut count = 0;
        let mut pivot = 1.0;
        for i in 0..self.dim() {
            let coupling = if i > 0 { self.offdiag[i - 1].powi(2) / pivot } else { 0.0 };
            pivot = self.diag[i] - x - coupling;
            if pivot == 0.0 {
                pivot = -tiny;
            }
            if pivot < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn eigen(&self) -> Result<TridiagonalEigen> {
        ql_implicit(self, true).map(|(values, vectors)| TridiagonalEigen {
            values,
            vectors: vectors.expect("vectors requested"),
        })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        ql_implicit(self, false).map(|(v, _)| v)
    }
}

fn ql_implicit(t: &TridiagonalOperator, want_vectors: bool) -> Result<(Vec<f64>, Option<DMatrix<f64>>)> {
    let n = t.dim();
    let mut d = t.diag.clone();
    let mut e = t.offdiag.clone();
    e.push(0.0);
    let mut v = want_vectors.then(|| DMatrix::<f64>::identity(n, n));
    if n == 0 {
        return Ok((d, v));
    }
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::Numerical(format!(
                        "tridiagonal QL failed to converge for eigenvalue {l} of {n}"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_mut() {
                        for k in 0..n {
                            let h = v[(k, i + 1)];
                            v[(k, i + 1)] = s * v[(k, i)] + c * h;
                            v[(k, i)] = c * v[(k, i)] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = v.map(|v| DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]));
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_chain() {
        let s3 = 3f64.sqrt();
        let t = TridiagonalOperator::new(vec![0.0; 4], vec![s3, 2.0, s3]);
        let eig = t.eigen().unwrap();
        for (a, b) in eig.values.iter().zip([-3.0, -1.0, 1.0, 3.0]) {
            assert!((a - b).abs() < 1e-13);
        }
        for r in 0..4 {
            let v = eig.vectors.column(r).into_owned();
            let res = (t.apply(&v) - &v * eig.values[r]).amax();
            assert!(res < 1e-13);
        }
        assert_eq!(t.count_below(0.0), 2);
        assert_eq!(t.count_below(-3.5), 0);
        assert_eq!(t.count_below(10.0), 4);
    }

    #[test]
    fn random_matches_dense() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..40 {
            let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let off: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let t = TridiagonalOperator::new(diag, off);
            let ours = t.eigen().unwrap();
            let dense = t.to_dense();
            let mut reference: Vec<f64> = dense.clone().symmetric_eigenvalues().iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            for (a, b) in ours.values.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-11);
            }
            let ortho = ours.vectors.transpose() * &ours.vectors - DMatrix::identity(n, n);
            assert!(ortho.amax() < 1e-12);
            let recon = &ours.vectors * DMatrix::from_diagonal(&DVector::from_vec(ours.values.clone()))
                * ours.vectors.transpose();
            assert!((recon - dense).amax() < 1e-11);
        }
    }

    #[test]
    fn blocks_and_products() {
        let t = TridiagonalOperator::new(vec![1.0, 2.0, 3.0], vec![4.0, 5.0]);
        let b = t.block(1, 3);
        assert_eq!(b.diag, vec![2.0, 3.0]);
        assert_eq!(b.offdiag, vec![5.0]);
        let m = DMatrix::identity(3, 3);
        assert_eq!(t.mul_dense(&m), t.to_dense());
    }
}
