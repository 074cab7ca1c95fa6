use thiserror::Error;

use super::CMatrix;
use crate::scalar::{czero, Real, C};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("matrix is singular to working precision (pivot {pivot} vanished)")]
pub struct SingularMatrix {
    pub pivot: usize,
}

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Clone, Debug)]
pub struct Lu<T: Real> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &CMatrix<T>) -> Result<Self, SingularMatrix> {
        assert!(a.is_square(), "LU requires a square matrix");
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == T::zero() {
                return Err(SingularMatrix { pivot: k });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.re == T::zero() && f.im == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    if u.re != T::zero() || u.im != T::zero() {
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve_vec(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n);
        let mut x: Vec<C<T>> = self.perm.iter().map(|&p| b[p]).collect();
        // Column-oriented sweeps skip zero components, which keeps
        // block-sparse systems cheap.
        for j in 0..n {
            let xj = x[j];
            if xj.re == T::zero() && xj.im == T::zero() {
                continue;
            }
            for i in j + 1..n {
                let l = self.lu[(i, j)];
                if l.re != T::zero() || l.im != T::zero() {
                    x[i] -= l * xj;
                }
            }
        }
        for j in (0..n).rev() {
            let xj = x[j] / self.lu[(j, j)];
            x[j] = xj;
            if xj.re == T::zero() && xj.im == T::zero() {
                continue;
            }
            for i in 0..j {
                let u = self.lu[(i, j)];
                if u.re != T::zero() || u.im != T::zero() {
                    x[i] -= u * xj;
                }
            }
        }
        x
    }

    /// Solves `A·X = B` column by column.
    pub fn solve(&self, b: &CMatrix<T>) -> CMatrix<T> {
        let n = self.lu.rows();
        assert_eq!(b.rows(), n);
        let m = b.cols();
        // Work on the transpose so each right-hand side is contiguous.
        let bt = b.transpose();
        let mut xt = CMatrix::zeros(m, n);
        for j in 0..m {
            let col = self.solve_vec(bt.row(j));
            for (i, v) in col.into_iter().enumerate() {
                xt[(j, i)] = v;
            }
        }
        xt.transpose()
    }

    pub fn determinant(&self) -> C<T> {
        let n = self.lu.rows();
        let mut swaps = 0;
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.perm[j];
                len += 1;
            }
            swaps += len - 1;
        }
        let mut det = (0..n).fold(C::new(T::one(), T::zero()), |acc, i| acc * self.lu[(i, i)]);
        if swaps % 2 == 1 {
            det = czero::<T>() - det;
        }
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn solves_random_system() {
        let n = 7;
        let a = CMatrix::<f64>::from_fn(n, n, |i, j| {
            Complex64::new(((i * 13 + j * 7) % 11) as f64 - 5.0, ((i + 2 * j) % 3) as f64)
        });
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let b = a.mul_vec(&x);
        let lu = Lu::factor(&a).unwrap();
        let got = lu.solve_vec(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-10);
        }
    }

    #[test]
    fn singular_detected() {
        let a = CMatrix::<f64>::zeros(3, 3);
        assert_eq!(Lu::factor(&a).unwrap_err().pivot, 0);
    }

    #[test]
    fn determinant_with_pivoting() {
        let a = CMatrix::<f64>::from_row_major(
            2,
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        let det = Lu::factor(&a).unwrap().determinant();
        assert!((det - Complex64::new(-6.0, 0.0)).norm() < 1e-14);
    }
}
