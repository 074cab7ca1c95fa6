//! Time evolution by the full propagator `e^{𝓛t}`, observables, and the
//! conservation, steady-state and blockade checks built on it.

use std::io::Write;

use crate::circuit::{bose_einstein, spectral_density, BathSpec, DerivedParams};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, expm, vec_norm, CMatrix};
use crate::liouville::{devectorize, vectorize, Superoperator};
use crate::operators::{resonator_annihilation, HilbertSpec, SystemParams};
use crate::scalar::{c, ci, cone, cr, czero, Real, C};

/// Largest weight a coherent state may lose to truncation.
pub const COHERENT_LOSS_TOLERANCE: f64 = 1e-6;

/// Density matrix on the qubit ⊗ resonator space.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState<T: Real> {
    spec: HilbertSpec,
    rho: CMatrix<T>,
}

impl<T: Real> QuantumState<T> {
    /// Wraps `rho` after checking trace, Hermiticity and positivity.
    pub fn new(rho: CMatrix<T>, spec: HilbertSpec) -> Result<Self> {
        if rho.rows() != spec.dim() || !rho.is_square() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: rho.rows(),
            });
        }
        let state = Self { spec, rho };
        let tol = T::lit(1e-10).max(T::epsilon() * T::lit(1e3));
        if (state.trace() - T::one()).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "state trace is {}, expected 1",
                state.trace()
            )));
        }
        if state.rho.hermiticity_error() > tol {
            return Err(Error::InvalidArgument("state is not Hermitian".into()));
        }
        if state.min_eigenvalue()? < -tol {
            return Err(Error::InvalidArgument("state is not positive semidefinite".into()));
        }
        Ok(state)
    }

    /// Product state `ρ_Q ⊗ ρ_res`.
    pub fn product(rho_q: &CMatrix<T>, rho_res: &CMatrix<T>) -> Result<Self> {
        if rho_q.rows() != 2 || !rho_q.is_square() {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: rho_q.rows(),
            });
        }
        let spec = HilbertSpec::new(rho_res.rows())?;
        Self::new(rho_q.kron(rho_res), spec)
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn rho(&self) -> &CMatrix<T> {
        &self.rho
    }

    pub fn into_rho(self) -> CMatrix<T> {
        self.rho
    }

    pub fn trace(&self) -> T {
        self.rho.trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(eigenvalues(&self.rho)?.iter().map(|z| z.re).fold(T::infinity(), T::min))
    }

    pub fn reduced_qubit(&self) -> CMatrix<T> {
        partial_trace_resonator(&self.rho, self.spec)
    }

    pub fn reduced_resonator(&self) -> CMatrix<T> {
        let s = self.spec.s;
        CMatrix::from_fn(s, s, |i, j| self.rho[(i, j)] + self.rho[(s + i, s + j)])
    }

    pub fn expectation(&self, op: &CMatrix<T>) -> C<T> {
        op.matmul(&self.rho).trace()
    }

    pub fn observables(&self) -> Observables<T> {
        observables(&self.rho, self.spec)
    }
}

/// Sums the `S×S` diagonal sub-blocks of the qubit-major layout.
pub fn partial_trace_resonator<T: Real>(rho: &CMatrix<T>, spec: HilbertSpec) -> CMatrix<T> {
    let s = spec.s;
    CMatrix::from_fn(2, 2, |q, p| {
        (0..s).map(|n| rho[(q * s + n, p * s + n)]).fold(czero(), |a, b| a + b)
    })
}

/// `C(ρ_Q) = |ρ_ge| + |ρ_eg|` of the reduced qubit state.
pub fn coherence_measure<T: Real>(rho: &CMatrix<T>, spec: HilbertSpec) -> T {
    let q = partial_trace_resonator(rho, spec);
    q[(0, 1)].norm() + q[(1, 0)].norm()
}

/// Expectation values recorded along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observables<T> {
    pub sx: T,
    pub sy: T,
    pub sz: T,
    pub n_res: T,
    pub coherence: T,
    pub trace: T,
}

pub fn observables<T: Real>(rho: &CMatrix<T>, spec: HilbertSpec) -> Observables<T> {
    let s = spec.s;
    let q = partial_trace_resonator(rho, spec);
    let eg = q[(1, 0)];
    let two = T::lit(2.0);
    let n_res = (0..spec.dim()).map(|i| T::from_count(i % s) * rho[(i, i)].re).sum();
    Observables {
        sx: two * eg.re,
        sy: -two * eg.im,
        sz: q[(1, 1)].re - q[(0, 0)].re,
        n_res,
        coherence: q[(0, 1)].norm() + eg.norm(),
        trace: rho.trace().re,
    }
}

/// Truncated thermal state `∝ Σ_n (n̄/(1+n̄))ⁿ |n⟩⟨n|`, renormalized on `S`
/// levels.
pub fn thermal_state<T: Real>(n_bar: T, s: usize) -> Result<CMatrix<T>> {
    if !(n_bar >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "n_bar must be non-negative, got {n_bar}"
        )));
    }
    if s == 0 {
        return Err(Error::InvalidArgument("resonator truncation must be positive".into()));
    }
    let r = n_bar / (T::one() + n_bar);
    let w: Vec<T> = (0..s).map(|n| r.powi(n as i32)).collect();
    let z: T = w.iter().copied().sum();
    Ok(CMatrix::from_diagonal(
        &w.iter().map(|&x| cr(x / z)).collect::<Vec<_>>(),
    ))
}

/// Coherent state `|α⟩⟨α|` truncated to `S` levels and renormalized.
pub fn coherent_state<T: Real>(alpha: C<T>, s: usize) -> Result<CMatrix<T>> {
    if s == 0 {
        return Err(Error::InvalidArgument("resonator truncation must be positive".into()));
    }
    let mut amp = Vec::with_capacity(s);
    let mut cur = cr((-alpha.norm_sqr() / T::lit(2.0)).exp());
    for n in 0..s {
        if n > 0 {
            cur = cur * alpha / T::from_count(n).sqrt();
        }
        amp.push(cur);
    }
    let kept: T = amp.iter().map(|z| z.norm_sqr()).sum();
    let lost = T::one() - kept;
    if lost > T::lit(COHERENT_LOSS_TOLERANCE) {
        return Err(Error::TruncationLoss {
            lost: lost.to_f64().unwrap_or(f64::NAN),
            s,
        });
    }
    let norm = kept.sqrt();
    let psi: Vec<C<T>> = amp.iter().map(|z| z / norm).collect();
    Ok(CMatrix::from_fn(s, s, |i, j| psi[i] * psi[j].conj()))
}

/// Initial qubit state.
#[derive(Clone, Debug, PartialEq)]
pub enum QubitState<T: Real> {
    /// `(|g⟩ + |e⟩)/√2`
    Plus,
    Ground,
    Excited,
    /// Arbitrary 2×2 density matrix in the `(g, e)` basis.
    Custom(CMatrix<T>),
}

impl<T: Real> QubitState<T> {
    /// Density matrix `(1 + xσ_x + yσ_y + zσ_z)/2`.
    pub fn from_bloch(x: T, y: T, z: T) -> Result<Self> {
        if (x * x + y * y + z * z).sqrt() > T::one() + T::lit(1e-12) {
            return Err(Error::InvalidArgument("Bloch vector longer than 1".into()));
        }
        let h = T::lit(0.5);
        // σ_y = i(σ_− − σ_+) has ⟨g|σ_y|e⟩ = i.
        let m = CMatrix::from_row_major(
            2,
            2,
            vec![
                cr(h * (T::one() - z)),
                c(h * x, h * y),
                c(h * x, -h * y),
                cr(h * (T::one() + z)),
            ],
        );
        Ok(Self::Custom(m))
    }

    pub fn density(&self) -> CMatrix<T> {
        let h = cr(T::lit(0.5));
        match self {
            Self::Plus => CMatrix::from_row_major(2, 2, vec![h, h, h, h]),
            Self::Ground => CMatrix::from_diagonal(&[cone(), czero()]),
            Self::Excited => CMatrix::from_diagonal(&[czero(), cone()]),
            Self::Custom(m) => m.clone(),
        }
    }

    /// `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)`
    pub fn bloch(&self) -> [T; 3] {
        let m = self.density();
        let two = T::lit(2.0);
        [two * m[(1, 0)].re, -two * m[(1, 0)].im, m[(1, 1)].re - m[(0, 0)].re]
    }
}

/// `ρ_Q ⊗ ρ_res`
pub fn initial_state<T: Real>(qubit: &QubitState<T>, resonator: &CMatrix<T>) -> Result<QuantumState<T>> {
    QuantumState::product(&qubit.density(), resonator)
}

/// Recorded time evolution.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub sx: Vec<T>,
    pub sy: Vec<T>,
    pub sz: Vec<T>,
    pub n_res: Vec<T>,
    pub coherence: Vec<T>,
    pub trace: Vec<T>,
    /// Full states, when requested.
    pub states: Option<Vec<CMatrix<T>>>,
}

impl<T: Real> Trajectory<T> {
    fn push(&mut self, t: T, o: Observables<T>) {
        self.times.push(t);
        self.sx.push(o.sx);
        self.sy.push(o.sy);
        self.sz.push(o.sz);
        self.n_res.push(o.n_res);
        self.coherence.push(o.coherence);
        self.trace.push(o.trace);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t |⟨σ_z(t)⟩ − ⟨σ_z(0)⟩|`
    pub fn sigma_z_drift(&self) -> T {
        max_drift(&self.sz)
    }

    /// `max_t |Tr ρ(t) − Tr ρ(0)|`
    pub fn trace_drift(&self) -> T {
        max_drift(&self.trace)
    }

    /// Log-linear fit of the coherence over `[t0, t1]`.
    pub fn fit_coherence(&self, t0: T, t1: T) -> Result<DecayFit<T>> {
        fit_decay_rate(&self.times, &self.coherence, t0, t1)
    }

    /// Writes `t_omegaA,sx,sy,sz,n_res,coherence` rows.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "t_omegaA,sx,sy,sz,n_res,coherence")?;
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        for i in 0..self.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                f(self.times[i]),
                f(self.sx[i]),
                f(self.sy[i]),
                f(self.sz[i]),
                f(self.n_res[i]),
                f(self.coherence[i])
            )?;
        }
        Ok(())
    }
}

fn max_drift<T: Real>(v: &[T]) -> T {
    v.first()
        .map(|&v0| v.iter().map(|&x| (x - v0).abs()).fold(T::zero(), T::max))
        .unwrap_or(T::zero())
}

/// Row-compressed propagator; `e^{𝓛Δt}` inherits the block sparsity of 𝓛.
struct SparseRows<T> {
    rows: Vec<Vec<(usize, C<T>)>>,
}

impl<T: Real> SparseRows<T> {
    fn new(m: &CMatrix<T>) -> Self {
        let rows = (0..m.rows())
            .map(|i| {
                m.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| z.re != T::zero() || z.im != T::zero())
                    .map(|(j, &z)| (j, z))
                    .collect()
            })
            .collect();
        Self { rows }
    }

    fn apply(&self, v: &[C<T>]) -> Vec<C<T>> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(czero(), |acc: C<T>, &(j, z)| acc + z * v[j]))
            .collect()
    }
}

/// Evolves `rho0` (the state at `times[0]`) and records observables at each
/// time. One exponential is formed per distinct step length.
pub fn propagate<T: Real>(l: &Superoperator<T>, rho0: &QuantumState<T>, times: &[T]) -> Result<Trajectory<T>> {
    propagate_with(l, rho0, times, false)
}

/// As [`propagate`], optionally keeping every state.
pub fn propagate_with<T: Real>(
    l: &Superoperator<T>,
    rho0: &QuantumState<T>,
    times: &[T],
    keep_states: bool,
) -> Result<Trajectory<T>> {
    if l.spec != rho0.spec {
        return Err(Error::DimensionMismatch {
            expected: l.spec.dim(),
            got: rho0.spec.dim(),
        });
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    let spec = l.spec;
    let mut traj = Trajectory {
        times: Vec::with_capacity(times.len()),
        sx: Vec::with_capacity(times.len()),
        sy: Vec::with_capacity(times.len()),
        sz: Vec::with_capacity(times.len()),
        n_res: Vec::with_capacity(times.len()),
        coherence: Vec::with_capacity(times.len()),
        trace: Vec::with_capacity(times.len()),
        states: keep_states.then(Vec::new),
    };
    let Some(&t0) = times.first() else {
        return Ok(traj);
    };
    let mut v = vectorize(rho0.rho());
    let record = |traj: &mut Trajectory<T>, t: T, v: &[C<T>]| -> Result<()> {
        let rho = devectorize(v)?;
        traj.push(t, observables(&rho, spec));
        if let Some(states) = traj.states.as_mut() {
            states.push(rho);
        }
        Ok(())
    };
    record(&mut traj, t0, &v)?;

    let mut cache: Vec<(T, SparseRows<T>)> = Vec::new();
    let same = |a: T, b: T| (a - b).abs() <= T::lit(1e-12) * a.abs().max(b.abs());
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        let idx = match cache.iter().position(|(h, _)| same(*h, dt)) {
            Some(i) => i,
            None => {
                let step = expm(&l.matrix.scale_real(dt))?;
                cache.push((dt, SparseRows::new(&step)));
                cache.len() - 1
            }
        };
        v = cache[idx].1.apply(&v);
        record(&mut traj, w[1], &v)?;
    }
    Ok(traj)
}

/// `n` equally spaced times on `[0, t_max]`.
pub fn uniform_times<T: Real>(t_max: T, n: usize) -> Vec<T> {
    match n {
        0 => vec![],
        1 => vec![T::zero()],
        _ => (0..n)
            .map(|i| t_max * T::from_count(i) / T::from_count(n - 1))
            .collect(),
    }
}

/// `max_t |⟨σ_z(t)⟩ − ⟨σ_z(0)⟩|` over the given times.
pub fn sigma_z_conservation<T: Real>(l: &Superoperator<T>, rho0: &QuantumState<T>, times: &[T]) -> Result<T> {
    Ok(propagate(l, rho0, times)?.sigma_z_drift())
}

/// `a|e⟩⟨e| ⊗ ρ_Th + (1 − a)|g⟩⟨g| ⊗ ρ_Th`
pub fn steady_state<T: Real>(a_weight: T, n_bar: T, spec: HilbertSpec) -> Result<CMatrix<T>> {
    if !(a_weight >= T::zero() && a_weight <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "steady-state weight must lie in [0, 1], got {a_weight}"
        )));
    }
    let q = CMatrix::from_diagonal(&[cr(T::one() - a_weight), cr(a_weight)]);
    Ok(q.kron(&thermal_state(n_bar, spec.s)?))
}

/// `‖𝓛·vec(ρ_steady)‖₂`
pub fn steady_state_residual<T: Real>(l: &Superoperator<T>, a_weight: T, n_bar: T) -> Result<T> {
    let rho = steady_state(a_weight, n_bar, l.spec)?;
    Ok(vec_norm(&l.apply(&vectorize(&rho))))
}

/// Resonator-only thermal dissipator applied to `x`.
pub fn resonator_dissipator<T: Real>(x: &CMatrix<T>, gamma: T, n_bar: T) -> CMatrix<T> {
    let a = resonator_annihilation::<T>(x.rows());
    let ad = a.adjoint();
    let lindblad = |op: &CMatrix<T>| {
        let od = op.adjoint();
        let mut out = op.matmul(x).matmul(&od);
        out.axpy(cr(T::lit(-0.5)), &od.matmul(op).anticommutator(x));
        out
    };
    let mut out = lindblad(&ad).scale_real(gamma * n_bar);
    out.axpy(cr(gamma * (T::one() + n_bar)), &lindblad(&a));
    out
}

/// Both sides of the blockade identity
/// `[𝒰, 𝒟](ρ_Q ⊗ ρ_Th) = i g′λ [σ_z, ρ_Q] ⊗ 𝒟_r[a†a ρ_Th]`.
#[derive(Clone, Debug)]
pub struct BlockadeCheck<T: Real> {
    pub lhs: CMatrix<T>,
    pub rhs: CMatrix<T>,
}

impl<T: Real> BlockadeCheck<T> {
    pub fn residual(&self) -> T {
        (&self.lhs - &self.rhs).max_abs()
    }
}

pub fn blockade_commutator<T: Real>(
    l_unitary: &Superoperator<T>,
    l_dissipative: &Superoperator<T>,
    rho_q: &CMatrix<T>,
    params: &SystemParams<T>,
) -> Result<BlockadeCheck<T>> {
    let spec = l_unitary.spec;
    let th = thermal_state(params.n_bar, spec.s)?;
    let x = vectorize(&rho_q.kron(&th));
    let ux = l_unitary.apply(&x);
    let dx = l_dissipative.apply(&x);
    let dux = l_dissipative.apply(&ux);
    let udx = l_unitary.apply(&dx);
    let lhs = devectorize(&udx.iter().zip(&dux).map(|(a, b)| a - b).collect::<Vec<_>>())?;

    let sz = CMatrix::from_diagonal(&[cr(-T::one()), cone()]);
    let left = sz.commutator(rho_q).scale(ci::<T>() * params.shift());
    let number = CMatrix::from_diagonal(&(0..spec.s).map(|n| cr(T::from_count(n))).collect::<Vec<_>>());
    let right = resonator_dissipator(&number.matmul(&th), params.gamma, params.n_bar);
    Ok(BlockadeCheck {
        lhs,
        rhs: left.kron(&right),
    })
}

/// Result of a log-linear least-squares fit `ln y = intercept − rate·t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit<T> {
    pub rate: T,
    pub intercept: T,
    pub r_squared: T,
    pub samples: usize,
}

/// Least-squares fit over samples with `t0 ≤ t ≤ t1` and `y > 1e-12`,
/// without the goodness-of-fit check.
pub fn fit_log_linear<T: Real>(times: &[T], values: &[T], t0: T, t1: T) -> Result<DecayFit<T>> {
    let floor = T::lit(1e-12);
    let pts: Vec<(T, T)> = times
        .iter()
        .zip(values)
        .filter(|(&t, &y)| t >= t0 && t <= t1 && y > floor)
        .map(|(&t, &y)| (t, y.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::FitWindow(pts.len()));
    }
    let n = T::from_count(pts.len());
    let mt = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if sxx == T::zero() {
        return Err(Error::FitWindow(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mt;
    let ss_res: T = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let ss_tot: T = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let scale = pts.iter().map(|p| p.1 * p.1).sum::<T>().max(T::one());
    let r_squared = if ss_tot <= T::epsilon() * scale {
        T::one()
    } else {
        T::one() - ss_res / ss_tot
    };
    Ok(DecayFit {
        rate: -slope,
        intercept,
        r_squared,
        samples: pts.len(),
    })
}

/// Decay rate of `values` over `[t0, t1]`; rejects fits with `R² < 0.99`.
pub fn fit_decay_rate<T: Real>(times: &[T], values: &[T], t0: T, t1: T) -> Result<DecayFit<T>> {
    let fit = fit_log_linear(times, values, t0, t1)?;
    if fit.r_squared < T::lit(0.99) {
        return Err(Error::NonExponential {
            r_squared: fit.r_squared.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(fit)
}

/// Early `[0, 3/γ′]` and late `[6/γ′, end]` windows of a two-phase decay.
pub fn two_phase_windows<T: Real>(gamma_prime: T, t_end: T) -> ((T, T), (T, T)) {
    let tau = T::one() / gamma_prime;
    ((T::zero(), T::lit(3.0) * tau), (T::lit(6.0) * tau, t_end))
}

/// Golden-rule rates of a qubit coupled directly to the resistor with
/// dimensionless strength ζ, in rad/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectRates<T> {
    pub gamma_up: T,
    pub gamma_down: T,
    /// `(Γ↑ + Γ↓)/2`
    pub gamma_2: T,
}

impl<T: Real> DirectRates<T> {
    /// `Γ↑ + Γ↓`
    pub fn dissipation(&self) -> T {
        self.gamma_up + self.gamma_down
    }
}

/// `Γ↓ = 2πζ²J(ω_A)(1 + n̄(ω_A))`, `Γ↑ = 2πζ²J(ω_A)n̄(ω_A)`.
pub fn direct_coupling_rates<T: Real>(
    zeta: T,
    params: &DerivedParams<T>,
    bath: &BathSpec<T>,
) -> Result<DirectRates<T>> {
    let j = spectral_density(params.omega_a, params, bath)?;
    let n = bose_einstein(params.omega_a, bath.t);
    let base = T::lit(2.0) * T::PI() * zeta * zeta * j;
    let up = base * n;
    let down = base * (T::one() + n);
    Ok(DirectRates {
        gamma_up: up,
        gamma_down: down,
        gamma_2: (up + down) / T::lit(2.0),
    })
}

/// Strong-dispersive estimate `Γ₂ ≈ γ′n̄`.
pub fn strong_dispersive_estimate<T: Real>(gamma_prime: T, n_bar: T) -> T {
    gamma_prime * n_bar
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{dissipative_part, liouvillian, unitary_part};
    use crate::operators::{dispersive_hamiltonian, pauli, Pauli};
    use approx::assert_relative_eq;

    fn params() -> SystemParams<f64> {
        SystemParams::new(1.525, 0.011_16, 3.53e-4, 0.1655).unwrap()
    }

    #[test]
    fn thermal_state_weights() {
        let t = thermal_state(0.0, 4).unwrap();
        assert_eq!(t[(0, 0)], cone());
        assert_eq!(t.trace().re, 1.0);
        let t = thermal_state(1.0, 40).unwrap();
        for n in 0..10 {
            assert_relative_eq!(t[(n, n)].re, 0.5f64.powi(n as i32 + 1), max_relative = 1e-11);
        }
        let t = thermal_state(0.3, 40).unwrap();
        let mean: f64 = (0..40).map(|n| n as f64 * t[(n, n)].re).sum();
        assert_relative_eq!(mean, 0.3, max_relative = 1e-12);
        assert!(thermal_state(-0.1, 3).is_err());
    }

    #[test]
    fn coherent_state_properties() {
        let z = coherent_state(c(0.0, 0.0), 5).unwrap();
        assert_eq!(z[(0, 0)], cone());
        let rho = coherent_state(c(1.2, -0.7), 30).unwrap();
        let mean: f64 = (0..30).map(|n| n as f64 * rho[(n, n)].re).sum();
        assert_relative_eq!(mean, 1.2f64.powi(2) + 0.49, max_relative = 1e-8);
        assert!((rho.matmul(&rho).trace().re - 1.0).abs() < 1e-10);
        assert!(matches!(
            coherent_state(c(3.0, 0.0), 8),
            Err(Error::TruncationLoss { .. })
        ));
    }

    #[test]
    fn initial_state_observables() {
        let res = thermal_state(0.0, 3).unwrap();
        let st = initial_state(&QubitState::Plus, &res).unwrap();
        let sx = pauli::<f64>(Pauli::X, st.spec());
        assert!((st.expectation(&sx).re - 1.0).abs() < 1e-15);
        assert!((st.observables().coherence - 1.0).abs() < 1e-15);
        let g = initial_state(&QubitState::Ground, &res).unwrap();
        assert_eq!(coherence_measure(g.rho(), g.spec()), 0.0);
        let custom = QubitState::<f64>::from_bloch(0.3, -0.4, 0.5).unwrap();
        let st = initial_state(&custom, &thermal_state(0.2, 5).unwrap()).unwrap();
        let o = st.observables();
        let spec = st.spec();
        for (which, expect, got) in [(Pauli::X, 0.3f64, o.sx), (Pauli::Y, -0.4, o.sy), (Pauli::Z, 0.5, o.sz)] {
            assert!((got - expect).abs() < 1e-14);
            assert!((st.expectation(&pauli(which, spec)).re - expect).abs() < 1e-14);
        }
        assert_eq!(custom.bloch().map(|x| (x * 1e12).round() / 1e12), [0.3, -0.4, 0.5]);
        assert!(QubitState::<f64>::from_bloch(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rejects_unphysical_states() {
        let spec = HilbertSpec::new(2).unwrap();
        let mut rho = CMatrix::<f64>::zeros(4, 4);
        rho[(0, 0)] = cr(1.5);
        rho[(1, 1)] = cr(-0.5);
        assert!(QuantumState::new(rho, spec).is_err());
        assert!(QuantumState::new(CMatrix::<f64>::identity(4), spec).is_err());
    }

    #[test]
    fn cavity_decay_matches_closed_form() {
        let spec = HilbertSpec::new(4).unwrap();
        let p = params().with_g(0.0).with_n_bar(0.0).with_gamma(0.05);
        let l = liouvillian(&p, spec).unwrap();
        let mut res = CMatrix::<f64>::zeros(4, 4);
        res[(2, 2)] = cone();
        let st = initial_state(&QubitState::Ground, &res).unwrap();
        let times = uniform_times(60.0, 31);
        let tr = propagate(&l, &st, &times).unwrap();
        for (t, n) in tr.times.iter().zip(&tr.n_res) {
            assert!((n - 2.0 * (-0.05 * t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn unitary_evolution_keeps_coherence() {
        let spec = HilbertSpec::new(3).unwrap();
        let p = params().with_gamma(0.0).with_n_bar(0.0);
        let l = liouvillian(&p, spec).unwrap();
        let st = initial_state(&QubitState::Plus, &thermal_state(0.0, 3).unwrap()).unwrap();
        let tr = propagate(&l, &st, &uniform_times(500.0, 101)).unwrap();
        assert!(tr.coherence.iter().all(|c| (c - 1.0).abs() < 1e-10));
    }

    #[test]
    fn propagation_preserves_trace_hermiticity_and_sigma_z() {
        let spec = HilbertSpec::new(5).unwrap();
        let p = params().with_gamma(0.02).with_n_bar(0.4);
        let l = liouvillian(&p, spec).unwrap();
        let q = QubitState::from_bloch(0.6, 0.2, -0.3).unwrap();
        let st = initial_state(&q, &thermal_state(0.4, 5).unwrap()).unwrap();
        let tr = propagate_with(&l, &st, &uniform_times(400.0, 41), true).unwrap();
        assert!(tr.sigma_z_drift() < 1e-10);
        assert!(tr.trace_drift() < 1e-10);
        for rho in tr.states.as_ref().unwrap() {
            assert!(rho.hermiticity_error() < 1e-9);
            let s = QuantumState::new(rho.clone(), spec).unwrap();
            assert!(s.min_eigenvalue().unwrap() > -1e-9);
        }
    }

    #[test]
    fn nonuniform_times_match_uniform() {
        let spec = HilbertSpec::new(3).unwrap();
        let l = liouvillian(&params().with_gamma(0.03), spec).unwrap();
        let st = initial_state(&QubitState::Plus, &thermal_state(0.1655, 3).unwrap()).unwrap();
        let a = propagate(&l, &st, &[0.0, 1.0, 2.0, 4.0, 7.0]).unwrap();
        let b = propagate(&l, &st, &uniform_times(7.0, 8)).unwrap();
        assert!((a.sx[4] - b.sx[7]).abs() < 1e-10);
        assert!((a.sx[3] - b.sx[4]).abs() < 1e-10);
        assert!(propagate(&l, &st, &[0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn steady_family_is_stationary() {
        let spec = HilbertSpec::new(8).unwrap();
        let p = params().with_n_bar(0.6);
        let l = liouvillian(&p, spec).unwrap();
        for a in [0.0, 0.37, 1.0] {
            assert!(steady_state_residual(&l, a, p.n_bar).unwrap() < 1e-9);
        }
        assert!(steady_state_residual(&l, 1.5, p.n_bar).is_err());
    }

    #[test]
    fn blockade_identity() {
        let spec = HilbertSpec::new(6).unwrap();
        let plus = QubitState::<f64>::Plus.density();
        for n_bar in [0.0, 0.5] {
            let p = params().with_n_bar(n_bar);
            let u = unitary_part(&dispersive_hamiltonian(&p, spec), spec);
            let d = dissipative_part(p.gamma, p.n_bar, spec);
            let chk = blockade_commutator(&u, &d, &plus, &p).unwrap();
            assert!(chk.residual() < 1e-9);
            if n_bar == 0.0 {
                assert!(chk.lhs.max_abs() < 1e-12 && chk.rhs.max_abs() < 1e-12);
            } else {
                assert!(chk.rhs.max_abs() > 1e-9);
            }
        }
        let p = params().with_n_bar(0.5);
        let u = unitary_part(&dispersive_hamiltonian(&p, spec), spec);
        let d = dissipative_part(p.gamma, p.n_bar, spec);
        let diag = QubitState::<f64>::Excited.density();
        let chk = blockade_commutator(&u, &d, &diag, &p).unwrap();
        assert_eq!(chk.rhs.max_abs(), 0.0);
        assert!(chk.lhs.max_abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_synthetic_rate() {
        let t = uniform_times(1000.0, 201);
        let y: Vec<f64> = t.iter().map(|t: &f64| 0.8 * (-0.003 * t).exp()).collect();
        let fit = fit_decay_rate(&t, &y, 0.0, 1000.0).unwrap();
        assert!((fit.rate - 0.003).abs() < 1e-6);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let flat = vec![0.5; t.len()];
        assert_eq!(fit_decay_rate(&t, &flat, 0.0, 1000.0).unwrap().r_squared, 1.0);
        let wiggle: Vec<f64> = t.iter().map(|t| 1.0 + 0.9 * (t / 50.0).sin()).collect();
        assert!(matches!(
            fit_decay_rate(&t, &wiggle, 0.0, 1000.0),
            Err(Error::NonExponential { .. })
        ));
        assert!(matches!(
            fit_decay_rate(&t, &y, 2000.0, 3000.0),
            Err(Error::FitWindow(0))
        ));
    }

    #[test]
    fn direct_rates_detailed_balance() {
        let circuit = crate::circuit::CircuitSpec::reference();
        let mut last = 0.0;
        for t in [0.0, 0.05, 0.1, 0.2, 0.4] {
            let bath = crate::circuit::BathSpec::reference(t);
            let d = crate::circuit::derive_params(&circuit, &bath).unwrap();
            let r = direct_coupling_rates(0.01, &d, &bath).unwrap();
            if t == 0.0 {
                assert_eq!(r.gamma_up, 0.0);
            } else {
                let expect = (crate::HBAR * d.omega_a / (crate::K_B * t)).exp();
                assert_relative_eq!(r.gamma_down / r.gamma_up, expect, max_relative = 1e-10);
            }
            assert!(r.gamma_2 >= last);
            last = r.gamma_2;
            assert_relative_eq!(r.dissipation(), 2.0 * r.gamma_2, max_relative = 1e-15);
        }
        assert_eq!(strong_dispersive_estimate(3.53e-4, 0.0), 0.0);
        assert_eq!(
            strong_dispersive_estimate(1e-3, 0.4),
            2.0 * strong_dispersive_estimate(1e-3, 0.2)
        );
    }
}
