//! General complex eigendecomposition with paired left and right
//! eigenvectors.
//!
//! The matrix is reduced to upper Hessenberg form by Householder
//! reflections, then to complex Schur form `A = Z·T·Z†` by single-shift QR
//! sweeps (Wilkinson shifts, with exceptional shifts on stagnation). Right and
//! left eigenvectors come from back-substitution on `T`, and are finally
//! scaled so that `⟨left_i|right_j⟩ = δ_ij`.

use thiserror::Error;

use super::{inner, vec_norm, CMatrix, Lu};
use crate::scalar::{c, cone, cr, czero, Real, C};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("QR iteration did not converge for eigenvalue {index}")]
    NoConvergence { index: usize },
    #[error("matrix is defective: left/right overlap {overlap:e} for eigenvalue {index}")]
    Defective { index: usize, overlap: f64 },
}

/// Eigenvalues with biorthonormal right (columns of `right`) and left
/// (columns of `left`) eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T: Real> {
    pub values: Vec<C<T>>,
    /// Unit-norm right eigenvectors, one per column.
    pub right: CMatrix<T>,
    /// Left eigenvectors scaled so `left[:,i]† · right[:,i] = 1`.
    pub left: CMatrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    /// Full decomposition. Fails on defective input instead of returning
    /// an ill-conditioned basis.
    pub fn compute(a: &CMatrix<T>) -> Result<Self, EigenError> {
        assert!(a.is_square(), "eigendecomposition requires a square matrix");
        if !a.is_finite() {
            return Err(EigenError::NonFinite);
        }
        let n = a.rows();
        if n == 0 {
            return Ok(Self {
                values: vec![],
                right: CMatrix::zeros(0, 0),
                left: CMatrix::zeros(0, 0),
            });
        }
        let (t, z) = schur(a, true)?;
        let z = z.expect("Schur vectors requested");
        let values = t.diagonal();
        let anorm = a.max_abs().max(T::min_positive_value());
        let small = T::epsilon() * anorm;

        let mut right = CMatrix::zeros(n, n);
        let mut left = CMatrix::zeros(n, n);
        for k in 0..n {
            let x = triangular_right(&t, k, small);
            let mut v = z.mul_vec(&x);
            normalize(&mut v);
            let y = triangular_left(&t, k, small);
            let mut w = z.mul_vec(&y);
            normalize(&mut w);
            for i in 0..n {
                right[(i, k)] = v[i];
                left[(i, k)] = w[i];
            }
        }
        biorthonormalize(&values, &right, &mut left, anorm)?;
        Ok(Self { values, right, left })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn right_vector(&self, i: usize) -> Vec<C<T>> {
        self.right.column(i)
    }

    pub fn left_vector(&self, i: usize) -> Vec<C<T>> {
        self.left.column(i)
    }
}

/// Eigenvalues only (Schur form without accumulating vectors).
pub fn eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<C<T>>, EigenError> {
    assert!(a.is_square());
    if !a.is_finite() {
        return Err(EigenError::NonFinite);
    }
    if a.rows() == 0 {
        return Ok(vec![]);
    }
    let (t, _) = schur(a, false)?;
    Ok(t.diagonal())
}

fn normalize<T: Real>(v: &mut [C<T>]) {
    let nrm = vec_norm(v);
    if nrm > T::zero() {
        for z in v.iter_mut() {
            *z /= nrm;
        }
    }
}

/// Householder reduction to upper Hessenberg form, returning `(H, Q)` with
/// `A = Q·H·Q†`.
fn hessenberg<T: Real>(a: &CMatrix<T>, want_q: bool) -> (CMatrix<T>, Option<CMatrix<T>>) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = want_q.then(|| CMatrix::identity(n));
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = vec_norm(&x);
        if alpha == T::zero() {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == T::zero() { cone() } else { x0 / x0.norm() };
        let mut v = x;
        v[0] += phase * alpha;
        let vnorm = vec_norm(&v);
        if vnorm == T::zero() {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H ← (I − 2vv†) H
        for j in 0..n {
            let mut s = czero::<T>();
            for (off, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + off, j)];
            }
            let s = s * T::lit(2.0);
            for (off, vi) in v.iter().enumerate() {
                h[(k + 1 + off, j)] -= *vi * s;
            }
        }
        // H ← H (I − 2vv†)
        for i in 0..n {
            let mut s = czero::<T>();
            for (off, vi) in v.iter().enumerate() {
                s += h[(i, k + 1 + off)] * *vi;
            }
            let s = s * T::lit(2.0);
            for (off, vi) in v.iter().enumerate() {
                h[(i, k + 1 + off)] -= s * vi.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = czero();
        }
        if let Some(q) = q.as_mut() {
            for i in 0..n {
                let mut s = czero::<T>();
                for (off, vi) in v.iter().enumerate() {
                    s += q[(i, k + 1 + off)] * *vi;
                }
                let s = s * T::lit(2.0);
                for (off, vi) in v.iter().enumerate() {
                    q[(i, k + 1 + off)] -= s * vi.conj();
                }
            }
        }
    }
    (h, q)
}

/// Unitary rotation `G = [[c, s], [−s̄, c]]` with real `c`, chosen so that
/// `G·[x, y]ᵀ = [r, 0]ᵀ`.
fn givens<T: Real>(x: C<T>, y: C<T>) -> (T, C<T>) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == T::zero() {
        return (T::one(), czero());
    }
    if ax == T::zero() {
        return (T::zero(), cone());
    }
    let r = ax.hypot(ay);
    let phase = x / ax;
    (ax / r, phase * y.conj() / r)
}

/// Complex Schur form `A = Z·T·Z†` with `T` upper triangular.
fn schur<T: Real>(a: &CMatrix<T>, want_z: bool) -> Result<(CMatrix<T>, Option<CMatrix<T>>), EigenError> {
    let n = a.rows();
    let (mut h, mut z) = hessenberg(a, want_z);
    let eps = T::epsilon();
    let mut ihi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let hnorm = h.max_abs();

    while ihi > 0 {
        // Locate the start of the active unreduced block.
        let mut l = 0;
        for k in (1..=ihi).rev() {
            let sub = h[(k, k - 1)].norm();
            let mut scale = h[(k - 1, k - 1)].norm() + h[(k, k)].norm();
            if scale == T::zero() {
                scale = hnorm;
            }
            if sub <= eps * scale || sub < T::min_positive_value() {
                h[(k, k - 1)] = czero();
                l = k;
                break;
            }
        }
        if l == ihi {
            ihi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > MAX_SWEEPS_PER_EIGENVALUE || total > MAX_SWEEPS_PER_EIGENVALUE * n.max(4) {
            return Err(EigenError::NoConvergence { index: ihi });
        }

        let shift = if iter.is_multiple_of(11) {
            // Exceptional shift breaks cycles on symmetric patterns.
            h[(ihi, ihi)] + cr(h[(ihi, ihi - 1)].norm() * T::lit(0.75))
        } else {
            wilkinson_shift(
                h[(ihi - 1, ihi - 1)],
                h[(ihi - 1, ihi)],
                h[(ihi, ihi - 1)],
                h[(ihi, ihi)],
            )
        };

        let (row_lo, col_hi) = if want_z { (0, n) } else { (l, ihi + 1) };
        let mut x = h[(l, l)] - shift;
        let mut y = h[(l + 1, l)];
        for k in l..ihi {
            if k > l {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (cs, sn) = givens(x, y);
            let start = if k > l { k - 1 } else { l };
            for j in start..col_hi {
                let a1 = h[(k, j)];
                let a2 = h[(k + 1, j)];
                h[(k, j)] = a1 * cs + sn * a2;
                h[(k + 1, j)] = a2 * cs - sn.conj() * a1;
            }
            if k > l {
                h[(k + 1, k - 1)] = czero();
            }
            let last = (k + 2).min(ihi);
            for i in row_lo..=last {
                let a1 = h[(i, k)];
                let a2 = h[(i, k + 1)];
                h[(i, k)] = a1 * cs + a2 * sn.conj();
                h[(i, k + 1)] = a2 * cs - a1 * sn;
            }
            if let Some(z) = z.as_mut() {
                for i in 0..n {
                    let a1 = z[(i, k)];
                    let a2 = z[(i, k + 1)];
                    z[(i, k)] = a1 * cs + a2 * sn.conj();
                    z[(i, k + 1)] = a2 * cs - a1 * sn;
                }
            }
        }
    }
    // Clear roundoff below the diagonal.
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = czero();
        }
    }
    Ok((h, z))
}

/// Eigenvalue of the trailing 2×2 block closest to its last diagonal entry.
fn wilkinson_shift<T: Real>(a: C<T>, b: C<T>, cc: C<T>, d: C<T>) -> C<T> {
    let half = T::lit(0.5);
    let tr_half = (a + d) * half;
    let diff_half = (a - d) * half;
    let disc = (diff_half * diff_half + b * cc).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Solves `(T − t_kk)x = 0` with `x_k = 1`, `x_i = 0` for `i > k`.
fn triangular_right<T: Real>(t: &CMatrix<T>, k: usize, small: T) -> Vec<C<T>> {
    let n = t.rows();
    let lambda = t[(k, k)];
    let mut x = vec![czero::<T>(); n];
    x[k] = cone();
    for i in (0..k).rev() {
        let mut s = czero::<T>();
        for j in i + 1..=k {
            s += t[(i, j)] * x[j];
        }
        if s.re == T::zero() && s.im == T::zero() {
            continue;
        }
        x[i] = -s / guarded(t[(i, i)] - lambda, small);
    }
    x
}

/// Solves `y†(T − t_kk) = 0` with `y_k = 1`, `y_i = 0` for `i < k`.
fn triangular_left<T: Real>(t: &CMatrix<T>, k: usize, small: T) -> Vec<C<T>> {
    let n = t.rows();
    let lambda = t[(k, k)];
    let mut y = vec![czero::<T>(); n];
    y[k] = cone();
    for i in k + 1..n {
        let mut s = czero::<T>();
        for j in k..i {
            s += t[(j, i)].conj() * y[j];
        }
        if s.re == T::zero() && s.im == T::zero() {
            continue;
        }
        y[i] = -s / guarded((t[(i, i)] - lambda).conj(), small);
    }
    y
}

fn guarded<T: Real>(d: C<T>, small: T) -> C<T> {
    if d.norm() < small {
        c(small, T::zero())
    } else {
        d
    }
}

/// Rescales `left` so that `⟨left_i|right_j⟩ = δ_ij`. Near-degenerate
/// eigenvalues are handled as clusters by inverting their overlap matrix.
fn biorthonormalize<T: Real>(
    values: &[C<T>],
    right: &CMatrix<T>,
    left: &mut CMatrix<T>,
    anorm: T,
) -> Result<(), EigenError> {
    let n = values.len();
    let cluster_tol = T::lit(1e-9) * anorm.max(T::one());
    let defect_tol = T::lit(1e-12);

    let mut assigned = vec![false; n];
    for seed in 0..n {
        if assigned[seed] {
            continue;
        }
        let mut cluster = vec![seed];
        assigned[seed] = true;
        let mut grew = true;
        while grew {
            grew = false;
            for j in 0..n {
                if !assigned[j] && cluster.iter().any(|&i| (values[i] - values[j]).norm() <= cluster_tol) {
                    assigned[j] = true;
                    cluster.push(j);
                    grew = true;
                }
            }
        }
        cluster.sort_unstable();

        if cluster.len() == 1 {
            let k = cluster[0];
            let o = inner(&left.column(k), &right.column(k));
            if o.norm() < defect_tol {
                return Err(EigenError::Defective {
                    index: k,
                    overlap: o.norm().to_f64().unwrap_or(0.0),
                });
            }
            let s = o.conj().inv();
            for i in 0..n {
                left[(i, k)] *= s;
            }
            continue;
        }

        // G_ij = ⟨l_i|r_j⟩; replace L_c by L_c·G^{-†} so L_c†R_c = I.
        let m = cluster.len();
        let lcols: Vec<Vec<C<T>>> = cluster.iter().map(|&k| left.column(k)).collect();
        let rcols: Vec<Vec<C<T>>> = cluster.iter().map(|&k| right.column(k)).collect();
        let g = CMatrix::from_fn(m, m, |i, j| inner(&lcols[i], &rcols[j]));
        let lu = Lu::factor(&g.adjoint()).map_err(|e| EigenError::Defective {
            index: cluster[e.pivot.min(m - 1)],
            overlap: 0.0,
        })?;
        let ginv_h = lu.solve(&CMatrix::identity(m));
        // Check conditioning: tiny smallest pivot means a defective cluster.
        let det = lu.determinant().norm();
        if det < defect_tol.powi(m as i32) {
            return Err(EigenError::Defective {
                index: cluster[0],
                overlap: det.to_f64().unwrap_or(0.0),
            });
        }
        for i in 0..n {
            for (jj, _) in cluster.iter().enumerate() {
                let mut s = czero::<T>();
                for (kk, lk) in lcols.iter().enumerate() {
                    s += lk[i] * ginv_h[(kk, jj)];
                }
                left[(i, cluster[jj])] = s;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn residuals(a: &CMatrix<f64>, ed: &EigenDecomposition<f64>) -> (f64, f64) {
        let mut rmax: f64 = 0.0;
        let mut lmax: f64 = 0.0;
        for k in 0..ed.len() {
            let v = ed.right_vector(k);
            let av = a.mul_vec(&v);
            for (x, y) in av.iter().zip(&v) {
                rmax = rmax.max((x - ed.values[k] * y).norm());
            }
            let w = ed.left_vector(k);
            let wa = a.vec_mul(&w); // entries of (w† A)
            let wn = vec_norm(&w);
            for (x, y) in wa.iter().zip(&w) {
                lmax = lmax.max((x - ed.values[k] * y.conj()).norm() / wn);
            }
        }
        (rmax, lmax)
    }

    #[test]
    fn diagonal_matrix() {
        let d = [
            Complex64::new(1.0, 2.0),
            Complex64::new(-3.0, 0.0),
            Complex64::new(1.0, 2.0),
            Complex64::new(0.0, -1.0),
        ];
        let a = CMatrix::from_diagonal(&d);
        let ed = EigenDecomposition::compute(&a).unwrap();
        for (k, &lam) in d.iter().enumerate() {
            assert!((ed.values[k] - lam).norm() < 1e-15);
            for i in 0..4 {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!((ed.right[(i, k)].norm() - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn random_nonnormal_matrix() {
        let n = 24;
        let a = CMatrix::<f64>::from_fn(n, n, |i, j| {
            let x = ((i * 37 + j * 11 + 5) % 17) as f64 / 17.0 - 0.5;
            let y = ((i * 5 + j * 23 + 1) % 19) as f64 / 19.0 - 0.5;
            let tri = if j + 3 < i { 0.1 } else { 1.0 };
            Complex64::new(x * tri, y)
        });
        let ed = EigenDecomposition::compute(&a).unwrap();
        let (r, l) = residuals(&a, &ed);
        let scale = a.max_abs() * n as f64;
        assert!(r < 1e-12 * scale, "right residual {r}");
        assert!(l < 1e-12 * scale, "left residual {l}");
        for i in 0..n {
            for j in 0..n {
                let o = inner(&ed.left_vector(i), &ed.right_vector(j));
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((o - Complex64::new(expect, 0.0)).norm() < 1e-9);
            }
        }
        // Trace equals eigenvalue sum.
        let s: Complex64 = ed.values.iter().sum();
        assert!((s - a.trace()).norm() < 1e-10);
    }

    #[test]
    fn jordan_block_is_defective() {
        let mut a = CMatrix::<f64>::zeros(2, 2);
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        a[(1, 1)] = Complex64::new(1.0, 0.0);
        a[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            EigenDecomposition::compute(&a),
            Err(EigenError::Defective { .. })
        ));
    }

    #[test]
    fn eigenvalues_of_rotation_generator() {
        // [[0, 1], [-1, 0]] has eigenvalues ±i.
        let mut a = CMatrix::<f64>::zeros(2, 2);
        a[(0, 1)] = Complex64::new(1.0, 0.0);
        a[(1, 0)] = Complex64::new(-1.0, 0.0);
        let mut ev = eigenvalues(&a).unwrap();
        ev.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn f32_decomposition() {
        let a = CMatrix::<f32>::from_fn(5, 5, |i, j| {
            num_complex::Complex32::new((i + 2 * j) as f32 * 0.1, (i as f32 - j as f32) * 0.05)
        });
        let ed = EigenDecomposition::compute(&a).unwrap();
        for k in 0..5 {
            let v = ed.right_vector(k);
            let av = a.mul_vec(&v);
            for (x, y) in av.iter().zip(&v) {
                assert!((x - ed.values[k] * y).norm() < 1e-4);
            }
        }
    }
}
