//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13 (Higham 2005).

use super::{CMatrix, Lu, SingularMatrix};
use crate::scalar::{cr, Real};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// `exp(A)` for a square complex matrix.
pub fn expm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>, SingularMatrix> {
    assert!(a.is_square(), "expm requires a square matrix");
    let n = a.rows();
    if n == 0 {
        return Ok(a.clone());
    }
    let norm = a.norm1().to_f64().unwrap_or(f64::INFINITY);
    let ident = CMatrix::identity(n);

    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(a, &ident, coeffs);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a.scale_real(T::lit(0.5f64.powi(s)));
    let mut r = pade13(&scaled, &ident)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

fn pade_low<T: Real>(a: &CMatrix<T>, ident: &CMatrix<T>, b: &[f64]) -> Result<CMatrix<T>, SingularMatrix> {
    let a2 = a.matmul(a);
    // Even powers A^0, A^2, A^4, ...
    let mut powers = vec![ident.clone(), a2.clone()];
    while powers.len() * 2 < b.len() {
        let next = powers.last().unwrap().matmul(&a2);
        powers.push(next);
    }
    let mut u = CMatrix::zeros(a.rows(), a.cols());
    let mut v = CMatrix::zeros(a.rows(), a.cols());
    for (k, p) in powers.iter().enumerate() {
        if 2 * k + 1 < b.len() {
            u.axpy(cr(T::lit(b[2 * k + 1])), p);
        }
        v.axpy(cr(T::lit(b[2 * k])), p);
    }
    let u = a.matmul(&u);
    solve_pade(&u, &v)
}

fn pade13<T: Real>(a: &CMatrix<T>, ident: &CMatrix<T>) -> Result<CMatrix<T>, SingularMatrix> {
    let b = |k: usize| cr(T::lit(B13[k]));
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let mut inner_u = a6.scale(b(13));
    inner_u.axpy(b(11), &a4);
    inner_u.axpy(b(9), &a2);
    let mut u = a6.matmul(&inner_u);
    u.axpy(b(7), &a6);
    u.axpy(b(5), &a4);
    u.axpy(b(3), &a2);
    u.axpy(b(1), ident);
    let u = a.matmul(&u);

    let mut inner_v = a6.scale(b(12));
    inner_v.axpy(b(10), &a4);
    inner_v.axpy(b(8), &a2);
    let mut v = a6.matmul(&inner_v);
    v.axpy(b(6), &a6);
    v.axpy(b(4), &a4);
    v.axpy(b(2), &a2);
    v.axpy(b(0), ident);

    solve_pade(&u, &v)
}

/// `(V − U)⁻¹ (V + U)`
fn solve_pade<T: Real>(u: &CMatrix<T>, v: &CMatrix<T>) -> Result<CMatrix<T>, SingularMatrix> {
    let p = v + u;
    let q = v - u;
    Ok(Lu::factor(&q)?.solve(&p))
}
