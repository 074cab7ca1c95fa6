//! Eigenmodes of Liouvillian blocks and the decoherence rate of the qubit
//! coherence.
//!
//! Within block `d = 1` the coherence evolves as
//!
//! ```text
//! ⟨σ_x(t)⟩ = 2 Re Σ_i c_i p_i e^{λ_i t},   c_i = ⟨⟨ṽ_i|ρ₀⟩⟩,  p_i = ⟨⟨σ_x|v_i⟩⟩
//! ```
//!
//! the `d = −1` block contributing the complex conjugate.

use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::{inner, CMatrix, EigenDecomposition, EigenError};
use crate::liouville::{build_block, vectorize, vectorized_pauli, BasisPair, LiouvillianBlock};
use crate::operators::{HilbertSpec, Pauli, SystemParams};
use crate::scalar::{czero, Real, C};

/// Default σ_x-overlap threshold for [`decoherence_rate`].
pub const OVERLAP_EPS: f64 = 1e-10;

/// One eigenmode of a block.
#[derive(Clone, Debug)]
pub struct EigenMode<T: Real> {
    pub lambda: C<T>,
    /// Unit-norm right eigenvector in block coordinates.
    pub right: Vec<C<T>>,
    /// Left eigenvector with `⟨⟨left|right⟩⟩ = 1`.
    pub left: Vec<C<T>>,
}

/// Biorthonormal eigenmodes of the block `d`.
#[derive(Clone, Debug)]
pub struct ModeSet<T: Real> {
    pub d: i64,
    pub spec: HilbertSpec,
    pub basis: Vec<BasisPair>,
    pub modes: Vec<EigenMode<T>>,
}

impl<T: Real> ModeSet<T> {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<C<T>> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    /// Restricts a full Liouville vector to the block basis.
    pub fn restrict(&self, v: &[C<T>]) -> Vec<C<T>> {
        self.basis.iter().map(|p| v[p.index(self.spec)]).collect()
    }

    /// Largest `|⟨⟨left_i|right_j⟩⟩ − δ_ij|`.
    pub fn biorthogonality_error(&self) -> T {
        let mut err = T::zero();
        for (i, mi) in self.modes.iter().enumerate() {
            for (j, mj) in self.modes.iter().enumerate() {
                let mut z = inner(&mi.left, &mj.right);
                if i == j {
                    z -= C::new(T::one(), T::zero());
                }
                err = err.max(z.norm());
            }
        }
        err
    }

    /// Largest right/left eigen-residual relative to `‖block‖_max`.
    pub fn max_residual(&self, block: &CMatrix<T>) -> T {
        let scale = block.max_abs().max(T::min_positive_value());
        let mut worst = T::zero();
        for m in &self.modes {
            let r = block.mul_vec(&m.right);
            let right = r
                .iter()
                .zip(&m.right)
                .map(|(a, v)| (*a - m.lambda * v).norm())
                .fold(T::zero(), T::max);
            // left† L = λ left†  ⇔  L† left = conj(λ) left
            let l = block.vec_mul(&m.left);
            let lam = m.lambda;
            let left = l
                .iter()
                .zip(&m.left)
                .map(|(a, w)| (*a - (w.conj() * lam)).norm())
                .fold(T::zero(), T::max);
            let lnorm = m.left.iter().map(|z| z.norm()).fold(T::zero(), T::max).max(T::one());
            worst = worst.max(right / scale).max(left / (scale * lnorm));
        }
        worst
    }
}

/// Full eigendecomposition of a block. Defective blocks are reported, not
/// regularized.
pub fn eig_general<T: Real>(block: &LiouvillianBlock<T>) -> Result<ModeSet<T>> {
    let dec = EigenDecomposition::compute(&block.matrix).map_err(|e| match e {
        EigenError::Defective { .. } => Error::DefectiveMatrix { d: block.d, source: e },
        other => Error::Eigen(other),
    })?;
    let modes = (0..dec.len())
        .map(|i| EigenMode {
            lambda: dec.values[i],
            right: dec.right_vector(i),
            left: dec.left_vector(i),
        })
        .collect();
    Ok(ModeSet {
        d: block.d,
        spec: block.spec,
        basis: block.basis.clone(),
        modes,
    })
}

/// `c_i = ⟨⟨ṽ_i|ρ₀⟩⟩` for each mode.
pub fn mode_coefficients<T: Real>(rho0: &CMatrix<T>, modes: &ModeSet<T>) -> Vec<C<T>> {
    let v = modes.restrict(&vectorize(rho0));
    modes.modes.iter().map(|m| inner(&m.left, &v)).collect()
}

/// `p_i = ⟨⟨A|v_i⟩⟩` for a full vectorized observable `A`.
pub fn observable_projections<T: Real>(observable: &[C<T>], modes: &ModeSet<T>) -> Vec<C<T>> {
    let a = modes.restrict(observable);
    modes.modes.iter().map(|m| inner(&a, &m.right)).collect()
}

/// `p_i = ⟨⟨σ|v_i⟩⟩` for `σ ∈ {σ_x, σ_y}`.
pub fn sigma_projections<T: Real>(which: Pauli, modes: &ModeSet<T>) -> Result<Vec<C<T>>> {
    Ok(observable_projections(&vectorized_pauli(which, modes.spec)?, modes))
}

/// `Σ_i c_i v_i`, the part of the initial state carried by the block.
pub fn reconstruct_block_vector<T: Real>(c: &[C<T>], modes: &ModeSet<T>) -> Vec<C<T>> {
    let mut out = vec![czero(); modes.basis.len()];
    for (ci, m) in c.iter().zip(&modes.modes) {
        for (o, v) in out.iter_mut().zip(&m.right) {
            *o += *ci * v;
        }
    }
    out
}

/// `⟨σ(t)⟩ = Σ_i 2|c_i p_i| e^{Re λ_i t} cos(Im λ_i t + arg(c_i p_i))` from the
/// `d = 1` modes.
pub fn reconstruct_coherence<T: Real>(c: &[C<T>], p: &[C<T>], modes: &ModeSet<T>, times: &[T]) -> Vec<T> {
    assert_eq!(c.len(), modes.len());
    assert_eq!(p.len(), modes.len());
    let two = T::lit(2.0);
    let weights: Vec<C<T>> = c.iter().zip(p).map(|(a, b)| *a * b).collect();
    times
        .iter()
        .map(|&t| {
            weights
                .iter()
                .zip(&modes.modes)
                .map(|(w, m)| two * w.norm() * (m.lambda.re * t).exp() * (m.lambda.im * t + w.arg()).cos())
                .sum()
        })
        .collect()
}

/// Slowest decay rate of the coherence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoherenceRate<T> {
    /// `min |Re λ_i|` over modes with `|⟨⟨σ_x|v_i⟩⟩| > eps`.
    pub gamma_2r: T,
    /// `min |Re λ_i|` over the whole block.
    pub unfiltered: T,
    /// Index of the mode attaining `gamma_2r`.
    pub mode: usize,
}

impl<T: Real> DecoherenceRate<T> {
    /// True when the filtered and unfiltered variants differ by more than 1%.
    pub fn variants_differ(&self) -> bool {
        let scale = self.gamma_2r.abs().max(self.unfiltered.abs());
        scale > T::zero() && (self.gamma_2r - self.unfiltered).abs() > T::lit(0.01) * scale
    }
}

/// Decoherence rate from the `d = 1` modes. `sigma_x` is the full vectorized
/// observable. Overlaps are taken against unit-norm right vectors.
pub fn decoherence_rate<T: Real>(modes: &ModeSet<T>, sigma_x: &[C<T>], eps_overlap: T) -> Result<DecoherenceRate<T>> {
    let p = observable_projections(sigma_x, modes);
    let mut best: Option<(T, usize)> = None;
    let mut unfiltered: Option<T> = None;
    for (i, (m, pi)) in modes.modes.iter().zip(&p).enumerate() {
        let rate = m.lambda.re.abs();
        unfiltered = Some(unfiltered.map_or(rate, |u| u.min(rate)));
        if pi.norm() > eps_overlap && best.is_none_or(|(b, _)| rate < b) {
            best = Some((rate, i));
        }
    }
    let (gamma_2r, mode) = best.ok_or(Error::EmptyModeSet {
        eps: eps_overlap.to_f64().unwrap_or(f64::NAN),
    })?;
    Ok(DecoherenceRate {
        gamma_2r,
        unfiltered: unfiltered.unwrap_or(gamma_2r),
        mode,
    })
}

/// Assembles block `d = 1`, diagonalizes it and extracts the decoherence
/// rate.
pub fn coherence_rate<T: Real>(
    params: &SystemParams<T>,
    spec: HilbertSpec,
    eps_overlap: T,
) -> Result<DecoherenceRate<T>> {
    let block = build_block(params, spec, 1);
    let modes = eig_general(&block)?;
    decoherence_rate(&modes, &vectorized_pauli(Pauli::X, spec)?, eps_overlap)
}

/// Writes `d,re_lambda,im_lambda,overlap_sigma_x_abs` rows.
pub fn write_mode_csv<T: Real, W: Write>(out: &mut W, modes: &ModeSet<T>, sigma_x: &[C<T>]) -> std::io::Result<()> {
    writeln!(out, "d,re_lambda,im_lambda,overlap_sigma_x_abs")?;
    let p = observable_projections(sigma_x, modes);
    for (m, pi) in modes.modes.iter().zip(&p) {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e}",
            modes.d,
            m.lambda.re.to_f64().unwrap_or(f64::NAN),
            m.lambda.im.to_f64().unwrap_or(f64::NAN),
            pi.norm().to_f64().unwrap_or(f64::NAN)
        )?;
    }
    Ok(())
}
