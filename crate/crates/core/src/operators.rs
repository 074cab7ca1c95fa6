//! Operators on the truncated qubit ⊗ resonator space.
//!
//! Basis states `|q, n⟩` with `q ∈ {g = 0, e = 1}` and `n ∈ 0..S` are laid out
//! qubit-major: index `q·S + n`. Energies are in units of `ħω_A`.

use serde::{Deserialize, Serialize};

use crate::circuit::bose_einstein;
use crate::error::{Error, Result};
use crate::linalg::{expm, CMatrix};
use crate::scalar::{ci, cone, cr, czero, Real, C};

/// Truncated Hilbert space: a two-level qubit and `s` resonator Fock states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpec {
    pub s: usize,
}

impl HilbertSpec {
    pub fn new(s: usize) -> Result<Self> {
        if s < 2 {
            return Err(Error::InvalidArgument(format!(
                "resonator truncation must be >= 2, got {s}"
            )));
        }
        Ok(Self { s })
    }

    /// Total dimension `2S`.
    #[inline]
    pub fn dim(&self) -> usize {
        2 * self.s
    }

    #[inline]
    pub fn index(&self, q: Qubit, n: usize) -> usize {
        debug_assert!(n < self.s);
        q.occupation() * self.s + n
    }

    #[inline]
    pub fn label(&self, index: usize) -> (Qubit, usize) {
        let q = if index >= self.s { Qubit::Excited } else { Qubit::Ground };
        (q, index % self.s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Qubit {
    Ground,
    Excited,
}

impl Qubit {
    /// 0 for `|g⟩`, 1 for `|e⟩`.
    #[inline]
    pub fn occupation(self) -> usize {
        match self {
            Qubit::Ground => 0,
            Qubit::Excited => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

/// Dimensionless model parameters, all normalized by ω_A.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<T> {
    /// `ω_f/ω_A`
    pub omega_f: T,
    /// `g_f/ω_A`
    pub g: T,
    /// Dispersive parameter `g_f/(ω_A − ω_f)` (signed).
    pub lambda: T,
    /// `γ/ω_A`
    pub gamma: T,
    /// Thermal photon number.
    pub n_bar: T,
}

impl<T: Real> SystemParams<T> {
    /// Builds the parameter set, deriving λ from the detuning `1 − ω_f′`.
    pub fn new(omega_f: T, g: T, gamma: T, n_bar: T) -> Result<Self> {
        let delta = T::one() - omega_f;
        if delta == T::zero() {
            return Err(Error::InvalidArgument("zero qubit-resonator detuning".into()));
        }
        let p = Self {
            omega_f,
            g,
            lambda: g / delta,
            gamma,
            n_bar,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda.abs() >= T::one() {
            return Err(Error::DispersiveViolation {
                lambda: self.lambda.abs().to_f64().unwrap_or(f64::NAN),
            });
        }
        if !(self.gamma >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        if !(self.n_bar >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "n_bar must be non-negative, got {}",
                self.n_bar
            )));
        }
        Ok(())
    }

    /// Signed detuning `Δ′ = 1 − ω_f′`.
    pub fn delta(&self) -> T {
        T::one() - self.omega_f
    }

    /// Dispersive shift per photon, `g′λ`.
    pub fn shift(&self) -> T {
        self.g * self.lambda
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_n_bar(mut self, n_bar: T) -> Self {
        self.n_bar = n_bar;
        self
    }

    /// Replaces `g′` and recomputes λ.
    pub fn with_g(mut self, g: T) -> Self {
        self.g = g;
        self.lambda = g / self.delta();
        self
    }
}

fn qubit_op<T: Real>(m: [[C<T>; 2]; 2], spec: HilbertSpec) -> CMatrix<T> {
    let q = CMatrix::from_fn(2, 2, |i, j| m[i][j]);
    q.kron(&CMatrix::identity(spec.s))
}

fn resonator_op<T: Real>(r: &CMatrix<T>) -> CMatrix<T> {
    CMatrix::identity(2).kron(r)
}

/// Resonator-only annihilation operator on `S` levels.
pub fn resonator_annihilation<T: Real>(s: usize) -> CMatrix<T> {
    let mut a = CMatrix::zeros(s, s);
    for n in 1..s {
        a[(n - 1, n)] = cr(T::from_count(n).sqrt());
    }
    a
}

/// `a` acting on the resonator factor: `a|q,n⟩ = √n |q,n−1⟩`.
pub fn annihilation<T: Real>(spec: HilbertSpec) -> CMatrix<T> {
    resonator_op(&resonator_annihilation(spec.s))
}

pub fn creation<T: Real>(spec: HilbertSpec) -> CMatrix<T> {
    annihilation::<T>(spec).adjoint()
}

/// `a†a`, diagonal with entries `n`.
pub fn number<T: Real>(spec: HilbertSpec) -> CMatrix<T> {
    let diag: Vec<C<T>> = (0..spec.dim()).map(|i| cr(T::from_count(spec.label(i).1))).collect();
    CMatrix::from_diagonal(&diag)
}

/// Pauli operator on the qubit factor. `σ_+ = |e⟩⟨g|`, `σ_z = |e⟩⟨e| − |g⟩⟨g|`.
pub fn pauli<T: Real>(which: Pauli, spec: HilbertSpec) -> CMatrix<T> {
    let (o, l, i) = (czero::<T>(), cone::<T>(), ci::<T>());
    // Rows/columns ordered (g, e).
    let m = match which {
        Pauli::X => [[o, l], [l, o]],
        Pauli::Y => [[o, i], [-i, o]],
        Pauli::Z => [[-l, o], [o, l]],
        Pauli::Plus => [[o, o], [l, o]],
        Pauli::Minus => [[o, l], [o, o]],
    };
    qubit_op(m, spec)
}

/// Projector `|q⟩⟨q| ⊗ 1`.
pub fn qubit_projector<T: Real>(q: Qubit, spec: HilbertSpec) -> CMatrix<T> {
    let (o, l) = (czero::<T>(), cone::<T>());
    let m = match q {
        Qubit::Ground => [[l, o], [o, o]],
        Qubit::Excited => [[o, o], [o, l]],
    };
    qubit_op(m, spec)
}

/// Jaynes–Cummings Hamiltonian
/// `½σ_z + ω_f′a†a + g′(σ_−a† + σ_+a)`.
pub fn jc_hamiltonian<T: Real>(params: &SystemParams<T>, spec: HilbertSpec) -> CMatrix<T> {
    let half = T::lit(0.5);
    let a = annihilation::<T>(spec);
    let ad = a.adjoint();
    let sp = pauli::<T>(Pauli::Plus, spec);
    let sm = pauli::<T>(Pauli::Minus, spec);
    let mut h = pauli::<T>(Pauli::Z, spec).scale_real(half);
    h.axpy(cr(params.omega_f), &number(spec));
    let interaction = &sm.matmul(&ad) + &sp.matmul(&a);
    h.axpy(cr(params.g), &interaction);
    h
}

/// Dispersive Hamiltonian
/// `½(1 + 2g′λ)σ_z + (ω_f′ + g′λσ_z)a†a + g′λσ_−σ_+`, diagonal in `|q,n⟩`.
pub fn dispersive_hamiltonian<T: Real>(params: &SystemParams<T>, spec: HilbertSpec) -> CMatrix<T> {
    let half = T::lit(0.5);
    let gl = params.shift();
    let diag: Vec<C<T>> = (0..spec.dim())
        .map(|i| {
            let (q, n) = spec.label(i);
            let sz = match q {
                Qubit::Ground => -T::one(),
                Qubit::Excited => T::one(),
            };
            let ground = if q == Qubit::Ground { gl } else { T::zero() };
            let n = T::from_count(n);
            cr(half * (T::one() + T::lit(2.0) * gl) * sz + (params.omega_f + gl * sz) * n + ground)
        })
        .collect();
    CMatrix::from_diagonal(&diag)
}

/// Closed-form dispersive eigenenergy of `|q, n⟩` in units of `ħω_A`.
///
/// Uses `E_{g,n} = (n − ½)ω_f′ − Δ′/2 − n·g′λ` and
/// `E_{e,n−1} = (n − ½)ω_f′ + Δ′/2 + n·g′λ` with the signed detuning
/// `Δ′ = 1 − ω_f′`.
pub fn eigenenergy<T: Real>(q: Qubit, n: usize, params: &SystemParams<T>) -> T {
    let half = T::lit(0.5);
    let delta = params.delta();
    let gl = params.shift();
    match q {
        Qubit::Ground => {
            let n = T::from_count(n);
            (n - half) * params.omega_f - half * delta - n * gl
        }
        Qubit::Excited => {
            let n1 = T::from_count(n + 1);
            (n1 - half) * params.omega_f + half * delta + n1 * gl
        }
    }
}

/// Unitary `U = exp(λ(σ_+a − σ_−a†))` that removes the first-order
/// qubit–resonator exchange.
pub fn dispersive_transform<T: Real>(params: &SystemParams<T>, spec: HilbertSpec) -> Result<CMatrix<T>> {
    let a = annihilation::<T>(spec);
    let ad = a.adjoint();
    let sp = pauli::<T>(Pauli::Plus, spec);
    let sm = pauli::<T>(Pauli::Minus, spec);
    let generator = &sp.matmul(&a) - &sm.matmul(&ad);
    Ok(expm(&generator.scale_real(params.lambda))?)
}

/// `‖U·H_JC·U† − H^D‖_max / ‖H_JC‖_max` restricted to Fock levels
/// `n < S − 2`, where the hard truncation does not enter.
pub fn dispersive_residual<T: Real>(params: &SystemParams<T>, spec: HilbertSpec) -> Result<T> {
    if spec.s < 3 {
        return Err(Error::InvalidArgument("interior residual needs S >= 3".into()));
    }
    let u = dispersive_transform(params, spec)?;
    let jc = jc_hamiltonian(params, spec);
    let diff = &u.matmul(&jc).matmul(&u.adjoint()) - &dispersive_hamiltonian(params, spec);
    let interior: Vec<usize> = (0..spec.dim()).filter(|&i| spec.label(i).1 < spec.s - 2).collect();
    Ok(diff.select(&interior, &interior).max_abs() / jc.select(&interior, &interior).max_abs())
}

/// Component `A(ω)` of a system operator at Bohr frequency ω.
#[derive(Clone, Debug)]
pub struct JumpOperator<T: Real> {
    pub omega: T,
    pub op: CMatrix<T>,
}

/// Default Bohr-frequency grouping tolerance, in units of ω_A.
pub const BOHR_TOLERANCE: f64 = 1e-9;

/// Decomposes `a` into eigenoperators of the diagonal Hamiltonian `h_sys`:
/// `A(ω) = Σ_{E_j − E_i = ω} |i⟩⟨i|A|j⟩⟨j|`.
///
/// Frequencies equal up to roundoff are merged. Two frequencies that are
/// numerically distinct yet closer than `tol` cannot be assigned
/// unambiguously and yield [`Error::DegenerateGrouping`].
pub fn jump_operators<T: Real>(h_sys: &CMatrix<T>, a: &CMatrix<T>, tol: T) -> Result<Vec<JumpOperator<T>>> {
    if !h_sys.is_square() || !a.is_square() || h_sys.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: h_sys.rows(),
            got: a.rows(),
        });
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("grouping tolerance must be positive".into()));
    }
    let n = h_sys.rows();
    let scale = h_sys.max_abs().max(T::one());
    let mut offdiag = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                offdiag = offdiag.max(h_sys[(i, j)].norm());
            }
        }
    }
    if offdiag > T::lit(1e-12) * scale {
        return Err(Error::InvalidArgument(
            "system Hamiltonian must be diagonal in the working basis".into(),
        ));
    }
    let energies: Vec<T> = h_sys.diagonal().iter().map(|z| z.re).collect();
    let roundoff = T::lit(64.0) * T::epsilon() * scale;

    let mut entries: Vec<(T, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = a[(i, j)];
            if v.re != T::zero() || v.im != T::zero() {
                entries.push((energies[j] - energies[i], i, j));
            }
        }
    }
    entries.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite energies"));

    let mut out: Vec<JumpOperator<T>> = Vec::new();
    let mut last: Option<T> = None;
    for (omega, i, j) in entries {
        let merge = match last {
            Some(prev) => {
                let gap = omega - prev;
                if gap <= roundoff {
                    true
                } else if gap < tol {
                    return Err(Error::DegenerateGrouping {
                        first: prev.to_f64().unwrap_or(f64::NAN),
                        second: omega.to_f64().unwrap_or(f64::NAN),
                        tol: tol.to_f64().unwrap_or(f64::NAN),
                    });
                } else {
                    false
                }
            }
            None => false,
        };
        if !merge {
            out.push(JumpOperator {
                omega,
                op: CMatrix::zeros(n, n),
            });
        }
        out.last_mut().expect("pushed above").op[(i, j)] = a[(i, j)];
        last = Some(omega);
    }
    Ok(out)
}

/// Smallest truncation `S ≥ 2` for which the thermal weight of the top Fock
/// level `S − 1` is at most `p_max`.
pub fn truncation_for_n_bar<T: Real>(n_bar: T, p_max: T) -> Result<usize> {
    if !(p_max > T::zero() && p_max < T::one()) {
        return Err(Error::InvalidArgument(format!("p_max must lie in (0, 1), got {p_max}")));
    }
    if !(n_bar >= T::zero()) || !n_bar.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "n_bar must be finite and >= 0, got {n_bar}"
        )));
    }
    let ratio = n_bar / (T::one() + n_bar);
    let mut weight = ratio / (T::one() + n_bar);
    let mut s = 2usize;
    while weight > p_max {
        weight *= ratio;
        s += 1;
        if s > 1_000_000 {
            return Err(Error::InvalidArgument(format!(
                "n_bar = {n_bar} needs an impractically large truncation"
            )));
        }
    }
    Ok(s)
}

/// Truncation chosen from the bath temperature and resonator frequency (SI).
pub fn truncation_select<T: Real>(temperature: T, omega_f: T, p_max: T) -> Result<usize> {
    truncation_for_n_bar(bose_einstein(omega_f, temperature), p_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn spec(s: usize) -> HilbertSpec {
        HilbertSpec::new(s).unwrap()
    }

    fn reference_params() -> SystemParams<f64> {
        SystemParams::new(1.525, 0.011_16, 3.53e-4, 0.1655).unwrap()
    }

    #[test]
    fn ladder_basics() {
        let sp = spec(2);
        let a = annihilation::<f64>(sp);
        let g1 = sp.index(Qubit::Ground, 1);
        let g0 = sp.index(Qubit::Ground, 0);
        assert_eq!(a[(g0, g1)], Complex64::new(1.0, 0.0));
        assert!(HilbertSpec::new(1).is_err());

        let sp = spec(6);
        let a = annihilation::<f64>(sp);
        let ad = a.adjoint();
        let n = ad.matmul(&a);
        for i in 0..sp.dim() {
            for j in 0..sp.dim() {
                let expect = if i == j { sp.label(i).1 as f64 } else { 0.0 };
                assert!((n[(i, j)] - Complex64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
        let comm = a.commutator(&ad);
        for i in 0..sp.dim() {
            let (_, ni) = sp.label(i);
            if ni < sp.s - 1 {
                for j in 0..sp.dim() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((comm[(i, j)] - Complex64::new(expect, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn pauli_identities() {
        let sp = spec(3);
        let x = pauli::<f64>(Pauli::X, sp);
        let y = pauli::<f64>(Pauli::Y, sp);
        let z = pauli::<f64>(Pauli::Z, sp);
        let p = pauli::<f64>(Pauli::Plus, sp);
        let m = pauli::<f64>(Pauli::Minus, sp);
        let ee = qubit_projector::<f64>(Qubit::Excited, sp);
        assert!((&p.matmul(&m) - &ee).max_abs() < 1e-15);
        let y_alt = (&m - &p).scale(Complex64::new(0.0, 1.0));
        assert!((&y - &y_alt).max_abs() < 1e-15);
        assert!(x.anticommutator(&z).max_abs() < 1e-15);
        // σ_z|e⟩ = +|e⟩
        let e0 = sp.index(Qubit::Excited, 0);
        assert_eq!(z[(e0, e0)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn jc_hamiltonian_properties() {
        let sp = spec(5);
        let p = reference_params();
        let h = jc_hamiltonian(&p, sp);
        assert!(h.hermiticity_error() < 1e-12);
        let free = jc_hamiltonian(&p.with_g(0.0), sp);
        for i in 0..sp.dim() {
            let (q, n) = sp.label(i);
            let s = if q == Qubit::Excited { 0.5 } else { -0.5 };
            assert!((free[(i, i)].re - (s + n as f64 * p.omega_f)).abs() < 1e-15);
        }
        assert!((&free - &CMatrix::from_diagonal(&free.diagonal())).max_abs() == 0.0);
    }

    #[test]
    fn jc_single_excitation_doublet() {
        // Hand diagonalization of the {|e,0⟩, |g,1⟩} block.
        let sp = spec(2);
        let p = SystemParams::new(1.3, 0.05, 0.0, 0.0).unwrap();
        let h = jc_hamiltonian(&p, sp);
        let idx = [sp.index(Qubit::Excited, 0), sp.index(Qubit::Ground, 1)];
        let blk = h.select(&idx, &idx);
        let mut ev: Vec<f64> = crate::linalg::eigenvalues(&blk).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = 0.5 * (0.5 + (p.omega_f - 0.5));
        let half_gap = ((0.5 - (p.omega_f - 0.5)).powi(2) / 4.0 + p.g * p.g).sqrt();
        assert!((ev[0] - (mean - half_gap)).abs() < 1e-13);
        assert!((ev[1] - (mean + half_gap)).abs() < 1e-13);
    }

    #[test]
    fn dispersive_diagonal_matches_closed_form() {
        let sp = spec(9);
        let p = reference_params();
        let h = dispersive_hamiltonian(&p, sp);
        assert!((&h - &CMatrix::from_diagonal(&h.diagonal())).max_abs() == 0.0);
        assert!(h.hermiticity_error() < 1e-12);
        for i in 0..sp.dim() {
            let (q, n) = sp.label(i);
            assert!((h[(i, i)].re - eigenenergy(q, n, &p)).abs() < 1e-12);
        }
        let e0 = h[(sp.index(Qubit::Excited, 0), sp.index(Qubit::Excited, 0))].re;
        let g0 = h[(sp.index(Qubit::Ground, 0), sp.index(Qubit::Ground, 0))].re;
        assert!((e0 - g0 - (1.0 + p.shift())).abs() < 1e-14);
    }

    #[test]
    fn eigenenergy_gaps() {
        let p = reference_params();
        for n in 1..10 {
            let gap = eigenenergy(Qubit::Excited, n - 1, &p) - eigenenergy(Qubit::Ground, n, &p);
            assert!((gap - (p.delta() + 2.0 * n as f64 * p.shift())).abs() < 1e-12);
        }
        let bare = p.with_g(0.0);
        assert!((eigenenergy(Qubit::Ground, 3, &bare) - (3.0 * bare.omega_f - 0.5)).abs() < 1e-14);
        assert!((eigenenergy(Qubit::Excited, 3, &bare) - (3.0 * bare.omega_f + 0.5)).abs() < 1e-14);
    }

    #[test]
    fn dispersive_transform_is_unitary() {
        let sp = spec(8);
        let p = reference_params();
        let u = dispersive_transform(&p, sp).unwrap();
        let uu = u.matmul(&u.adjoint());
        assert!((&uu - &CMatrix::identity(sp.dim())).max_abs() < 1e-10);
        let id = dispersive_transform(&p.with_g(0.0), sp).unwrap();
        assert!((&id - &CMatrix::identity(sp.dim())).max_abs() < 1e-15);
    }

    #[test]
    fn jump_decomposition_decoupled() {
        let sp = spec(5);
        let p = reference_params().with_g(0.0);
        let h = dispersive_hamiltonian(&p, sp);
        let a = annihilation::<f64>(sp);
        let x = &a + &a.adjoint();
        let jumps = jump_operators(&h, &x, BOHR_TOLERANCE).unwrap();
        assert_eq!(jumps.len(), 2);
        assert!((jumps[0].omega + p.omega_f).abs() < 1e-12);
        assert!((&jumps[0].op - &a.adjoint()).max_abs() < 1e-15);
        assert!((jumps[1].omega - p.omega_f).abs() < 1e-12);
        assert!((&jumps[1].op - &a).max_abs() < 1e-15);
    }

    #[test]
    fn ambiguous_grouping_rejected() {
        let sp = spec(3);
        let p = reference_params();
        let h = dispersive_hamiltonian(&p, sp);
        let a = annihilation::<f64>(sp);
        let x = &a + &a.adjoint();
        // Tolerance wider than the 2g'λ splitting of the g and e ladders.
        assert!(matches!(
            jump_operators(&h, &x, 1e-3),
            Err(Error::DegenerateGrouping { .. })
        ));
        assert!(jump_operators(&h, &x, -1.0).is_err());
    }

    #[test]
    fn truncation_rules() {
        assert_eq!(truncation_for_n_bar(0.0, 1e-7).unwrap(), 2);
        assert_eq!(truncation_select(0.0, 1e10, 1e-7).unwrap(), 2);
        assert!(truncation_for_n_bar(1.0, 0.0).is_err());
        // Independent enumeration of the geometric weights.
        for &nb in &[0.01f64, 0.1655, 0.6, 1.0, 3.0] {
            let s = truncation_for_n_bar(nb, 1e-7).unwrap();
            let w = |m: usize| (nb / (1.0 + nb)).powi(m as i32) / (1.0 + nb);
            assert!(w(s - 1) <= 1e-7);
            if s > 2 {
                assert!(w(s - 2) > 1e-7);
            }
        }
        // n̄ = 1: weight of |m⟩ is 2^-(m+1); 2^-24 ≈ 6e-8 is the first below 1e-7.
        assert_eq!(truncation_for_n_bar(1.0, 1e-7).unwrap(), 24);
    }
}
