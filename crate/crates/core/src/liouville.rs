//! Liouville-space representation of the master equation.
//!
//! Density matrices are stacked row-major, `|i⟩⟨j| ↦ e_i ⊗ e_j`, so that
//! `AρB ↦ (A ⊗ Bᵀ)·vec(ρ)`. The generator is
//!
//! ```text
//! L = −i(H⊗1 − 1⊗Hᵀ)
//!     + γn̄     (a†⊗aᵀ − ½ aa†⊗1 − ½ 1⊗(aa†)ᵀ)
//!     + γ(1+n̄) (a⊗ā   − ½ a†a⊗1 − ½ 1⊗(a†a)ᵀ)
//! ```
//!
//! and commutes with the excitation-number supercommutator
//! `𝒩 = N⊗1 − 1⊗Nᵀ`, `N = σ_+σ_− + a†a`. Its eigenvalue `d` on `|q,n⟩⟨q′,m|`
//! is `(q + n) − (q′ + m)`, which labels the blocks returned by
//! [`split_blocks`].

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::operators::{
    annihilation, dispersive_hamiltonian, number, pauli, qubit_projector, HilbertSpec, Pauli, Qubit, SystemParams,
};
use crate::scalar::{c, ci, cr, czero, Real, C};

/// Commutator tolerance accepted by [`split_blocks`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Matrix acting on vectorized operators of a [`HilbertSpec`].
#[derive(Clone, Debug)]
pub struct Superoperator<T: Real> {
    pub spec: HilbertSpec,
    pub matrix: CMatrix<T>,
}

impl<T: Real> Superoperator<T> {
    pub fn new(spec: HilbertSpec, matrix: CMatrix<T>) -> Result<Self> {
        let d2 = spec.dim() * spec.dim();
        if matrix.rows() != d2 || matrix.cols() != d2 {
            return Err(Error::DimensionMismatch {
                expected: d2,
                got: matrix.rows(),
            });
        }
        Ok(Self { spec, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, v: &[C<T>]) -> Vec<C<T>> {
        self.matrix.mul_vec(v)
    }

    pub fn apply_op(&self, rho: &CMatrix<T>) -> Result<CMatrix<T>> {
        devectorize(&self.apply(&vectorize(rho)))
    }

    /// Largest entry of `vec(1)†·L`; zero for trace-preserving generators.
    pub fn trace_defect(&self) -> T {
        let id = vectorize(&CMatrix::<T>::identity(self.spec.dim()));
        self.matrix
            .vec_mul(&id)
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), T::max)
    }

    /// Max-norm of `[self, other]`.
    pub fn commutator_norm(&self, other: &Self) -> T {
        self.matrix.commutator(&other.matrix).max_abs()
    }
}

impl<T: Real> std::ops::Add for &Superoperator<T> {
    type Output = Superoperator<T>;
    fn add(self, rhs: Self) -> Superoperator<T> {
        assert_eq!(self.spec, rhs.spec);
        Superoperator {
            spec: self.spec,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

/// Row-major stacking of a square operator.
pub fn vectorize<T: Real>(rho: &CMatrix<T>) -> Vec<C<T>> {
    assert!(rho.is_square(), "only square operators can be vectorized");
    rho.as_slice().to_vec()
}

/// Inverse of [`vectorize`]. The length must be a perfect square.
pub fn devectorize<T: Real>(v: &[C<T>]) -> Result<CMatrix<T>> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: v.len(),
        });
    }
    Ok(CMatrix::from_row_major(n, n, v.to_vec()))
}

/// `−i(H⊗1 − 1⊗Hᵀ)`
pub fn unitary_part<T: Real>(h: &CMatrix<T>, spec: HilbertSpec) -> Superoperator<T> {
    let id = CMatrix::identity(spec.dim());
    let comm = &h.kron(&id) - &id.kron(&h.transpose());
    Superoperator {
        spec,
        matrix: comm.scale(-ci::<T>()),
    }
}

/// Thermal resonator dissipator
/// `γn̄·D[a†] + γ(1+n̄)·D[a]`, `D[A]ρ = AρA† − ½{A†A, ρ}`.
pub fn dissipative_part<T: Real>(gamma: T, n_bar: T, spec: HilbertSpec) -> Superoperator<T> {
    let half = T::lit(0.5);
    let id = CMatrix::identity(spec.dim());
    let a = annihilation::<T>(spec);
    let ad = a.adjoint();
    let aad = a.matmul(&ad);
    let ada = ad.matmul(&a);

    // a†ρa ↦ a† ⊗ aᵀ
    let mut up = ad.kron(&a.transpose());
    up.axpy(cr(-half), &aad.kron(&id));
    up.axpy(cr(-half), &id.kron(&aad.transpose()));

    // aρa† ↦ a ⊗ (a†)ᵀ = a ⊗ ā
    let mut down = a.kron(&a.conj());
    down.axpy(cr(-half), &ada.kron(&id));
    down.axpy(cr(-half), &id.kron(&ada.transpose()));

    let mut m = up.scale_real(gamma * n_bar);
    m.axpy(cr(gamma * (T::one() + n_bar)), &down);
    Superoperator { spec, matrix: m }
}

/// Full Liouvillian of the dispersive master equation (Lamb shift omitted).
pub fn build_liouvillian<T: Real>(h: &CMatrix<T>, gamma: T, n_bar: T, spec: HilbertSpec) -> Result<Superoperator<T>> {
    if h.rows() != spec.dim() || !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: h.rows(),
        });
    }
    if !(gamma >= T::zero()) || !(n_bar >= T::zero()) {
        return Err(Error::InvalidArgument("gamma and n_bar must be non-negative".into()));
    }
    Ok(&unitary_part(h, spec) + &dissipative_part(gamma, n_bar, spec))
}

/// Convenience: Liouvillian for a parameter set.
pub fn liouvillian<T: Real>(params: &SystemParams<T>, spec: HilbertSpec) -> Result<Superoperator<T>> {
    build_liouvillian(&dispersive_hamiltonian(params, spec), params.gamma, params.n_bar, spec)
}

/// `𝒩 = N⊗1 − 1⊗Nᵀ` with `N = σ_+σ_− + a†a`.
pub fn number_superoperator<T: Real>(spec: HilbertSpec) -> Superoperator<T> {
    let n_op = &qubit_projector::<T>(Qubit::Excited, spec) + &number::<T>(spec);
    let id = CMatrix::identity(spec.dim());
    Superoperator {
        spec,
        matrix: &n_op.kron(&id) - &id.kron(&n_op.transpose()),
    }
}

/// Liouville basis element `|q,n⟩⟨q′,m|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisPair {
    pub ket: (Qubit, usize),
    pub bra: (Qubit, usize),
}

impl BasisPair {
    pub fn from_index(spec: HilbertSpec, idx: usize) -> Self {
        let d = spec.dim();
        Self {
            ket: spec.label(idx / d),
            bra: spec.label(idx % d),
        }
    }

    pub fn index(&self, spec: HilbertSpec) -> usize {
        spec.index(self.ket.0, self.ket.1) * spec.dim() + spec.index(self.bra.0, self.bra.1)
    }

    /// Excitation difference `(q + n) − (q′ + m)`.
    pub fn charge(&self) -> i64 {
        (self.ket.0.occupation() + self.ket.1) as i64 - (self.bra.0.occupation() + self.bra.1) as i64
    }

    /// `|q′,m⟩⟨q,n|`
    pub fn swapped(&self) -> Self {
        Self {
            ket: self.bra,
            bra: self.ket,
        }
    }

    /// `[q, n, q′, m]` with qubit labels as 0/1.
    pub fn as_array(&self) -> [usize; 4] {
        [self.ket.0.occupation(), self.ket.1, self.bra.0.occupation(), self.bra.1]
    }
}

/// One charge sector of the Liouvillian.
#[derive(Clone, Debug)]
pub struct LiouvillianBlock<T: Real> {
    pub d: i64,
    pub spec: HilbertSpec,
    /// Basis pairs in ascending vectorized-index order.
    pub basis: Vec<BasisPair>,
    pub matrix: CMatrix<T>,
}

impl<T: Real> LiouvillianBlock<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Positions of the basis pairs in the full vectorized space.
    pub fn indices(&self) -> Vec<usize> {
        self.basis.iter().map(|p| p.index(self.spec)).collect()
    }

    /// Restriction of a full Liouville vector to this block.
    pub fn restrict(&self, v: &[C<T>]) -> Vec<C<T>> {
        self.basis.iter().map(|p| v[p.index(self.spec)]).collect()
    }

    /// Embeds a block vector into the full vectorized space.
    pub fn embed(&self, v: &[C<T>]) -> Vec<C<T>> {
        let d = self.spec.dim();
        let mut out = vec![czero(); d * d];
        for (p, &x) in self.basis.iter().zip(v) {
            out[p.index(self.spec)] = x;
        }
        out
    }

    pub fn to_dump(&self) -> BlockDump {
        BlockDump {
            d: self.d,
            dim: self.dim(),
            basis: self.basis.iter().map(|p| p.as_array()).collect(),
            entries: self
                .matrix
                .as_slice()
                .iter()
                .map(|z| [z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN)])
                .collect(),
        }
    }
}

/// Serializable block: `{d, dim, basis: [[q,n,q′,m]…], entries: [[re,im]…]}`
/// with entries in row-major order.
#[derive(Clone, Debug, Serialize)]
pub struct BlockDump {
    pub d: i64,
    pub dim: usize,
    pub basis: Vec<[usize; 4]>,
    pub entries: Vec<[f64; 2]>,
}

/// Basis pairs with excitation difference `d`, in ascending index order.
pub fn block_basis(spec: HilbertSpec, d: i64) -> Vec<BasisPair> {
    let n = spec.dim();
    (0..n * n)
        .map(|i| BasisPair::from_index(spec, i))
        .filter(|p| p.charge() == d)
        .collect()
}

/// Splits `l` into the eigenspaces of the diagonal superoperator `n`.
pub fn split_blocks<T: Real>(l: &Superoperator<T>, n: &Superoperator<T>) -> Result<Vec<LiouvillianBlock<T>>> {
    if l.spec != n.spec {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            got: n.dim(),
        });
    }
    let residual = l.commutator_norm(n);
    if residual > T::lit(SYMMETRY_TOLERANCE) {
        return Err(Error::SymmetryViolation {
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut sectors: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, z) in n.matrix.diagonal().into_iter().enumerate() {
        let d = z.re.round().to_i64().expect("integer charge");
        sectors.entry(d).or_default().push(i);
    }
    Ok(sectors
        .into_iter()
        .map(|(d, idx)| LiouvillianBlock {
            d,
            spec: l.spec,
            basis: idx.iter().map(|&i| BasisPair::from_index(l.spec, i)).collect(),
            matrix: l.matrix.select(&idx, &idx),
        })
        .collect())
}

/// Reassembles a full superoperator from its blocks.
pub fn assemble_blocks<T: Real>(blocks: &[LiouvillianBlock<T>], spec: HilbertSpec) -> Superoperator<T> {
    let d2 = spec.dim() * spec.dim();
    let mut m = CMatrix::zeros(d2, d2);
    for b in blocks {
        let idx = b.indices();
        for (i, &gi) in idx.iter().enumerate() {
            for (j, &gj) in idx.iter().enumerate() {
                m[(gi, gj)] = b.matrix[(i, j)];
            }
        }
    }
    Superoperator { spec, matrix: m }
}

/// Assembles the block `L_d` directly from matrix elements, without forming
/// the full Liouvillian.
pub fn build_block<T: Real>(params: &SystemParams<T>, spec: HilbertSpec, d: i64) -> LiouvillianBlock<T> {
    let basis = block_basis(spec, d);
    let h = dispersive_hamiltonian(params, spec);
    let energy = |q: Qubit, n: usize| h[(spec.index(q, n), spec.index(q, n))].re;
    let pos: BTreeMap<BasisPair, usize> = basis.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let half = T::lit(0.5);
    let s = spec.s;
    let g_up = params.gamma * params.n_bar;
    let g_down = params.gamma * (T::one() + params.n_bar);
    // Diagonal of the truncated aa† and a†a.
    let aad = |n: usize| if n + 1 < s { T::from_count(n + 1) } else { T::zero() };
    let ada = |n: usize| T::from_count(n);

    let mut m = CMatrix::zeros(basis.len(), basis.len());
    for (col, p) in basis.iter().enumerate() {
        let ((q, n), (qp, mm)) = (p.ket, p.bra);
        // Unitary part and anticommutator terms act diagonally.
        let diag = c(
            -half * (g_up * (aad(n) + aad(mm)) + g_down * (ada(n) + ada(mm))),
            -(energy(q, n) - energy(qp, mm)),
        );
        m[(col, col)] += diag;
        // a†ρa: |q,n+1⟩⟨q′,m+1|
        if n + 1 < s && mm + 1 < s {
            let target = BasisPair {
                ket: (q, n + 1),
                bra: (qp, mm + 1),
            };
            let amp = T::from_count(n + 1).sqrt() * T::from_count(mm + 1).sqrt();
            m[(pos[&target], col)] += cr(g_up * amp);
        }
        // aρa†: |q,n−1⟩⟨q′,m−1|
        if n >= 1 && mm >= 1 {
            let target = BasisPair {
                ket: (q, n - 1),
                bra: (qp, mm - 1),
            };
            let amp = T::from_count(n).sqrt() * T::from_count(mm).sqrt();
            m[(pos[&target], col)] += cr(g_down * amp);
        }
    }
    LiouvillianBlock {
        d,
        spec,
        basis,
        matrix: m,
    }
}

/// `vec(σ_x ⊗ 1)` or `vec(σ_y ⊗ 1)`; supported only on the `d = ±1` blocks.
pub fn vectorized_pauli<T: Real>(which: Pauli, spec: HilbertSpec) -> Result<Vec<C<T>>> {
    match which {
        Pauli::X | Pauli::Y => Ok(vectorize(&pauli::<T>(which, spec))),
        other => Err(Error::InvalidArgument(format!(
            "vectorized_pauli supports X and Y only, got {other:?}"
        ))),
    }
}

/// `vec(1)`
pub fn vectorized_identity<T: Real>(spec: HilbertSpec) -> Vec<C<T>> {
    vectorize(&CMatrix::<T>::identity(spec.dim()))
}

/// Entrywise distance between `L_d` and `conj(L_{−d})` under the pairing
/// `|q,n⟩⟨q′,m| ↔ |q′,m⟩⟨q,n|`.
pub fn conjugate_pairing_error<T: Real>(pos: &LiouvillianBlock<T>, neg: &LiouvillianBlock<T>) -> Result<T> {
    if pos.d != -neg.d || pos.dim() != neg.dim() {
        return Err(Error::InvalidArgument(format!(
            "blocks {} and {} are not a conjugate pair",
            pos.d, neg.d
        )));
    }
    let lookup: BTreeMap<BasisPair, usize> = neg.basis.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let map: Vec<usize> = pos
        .basis
        .iter()
        .map(|p| {
            lookup
                .get(&p.swapped())
                .copied()
                .ok_or_else(|| Error::InvalidArgument("basis pairing incomplete".into()))
        })
        .collect::<Result<_>>()?;
    let mut err = T::zero();
    for i in 0..pos.dim() {
        for j in 0..pos.dim() {
            err = err.max((pos.matrix[(i, j)] - neg.matrix[(map[i], map[j])].conj()).norm());
        }
    }
    Ok(err)
}
