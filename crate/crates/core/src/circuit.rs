//! Lumped-element circuit: qubit capacitively coupled to a readout
//! resonator, which is inductively coupled to a resistive drive line.
//!
//! Everything here works in SI units. [`DerivedParams::system`] hands the
//! dimensionless (ω_A-normalized) couplings to the rest of the crate.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::SystemParams;
use crate::scalar::{Real, C, HBAR, K_B};

/// Circuit element values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec<T> {
    /// Qubit capacitance (F).
    pub c_a: T,
    /// Resonator capacitance (F).
    pub c_f: T,
    /// Qubit–resonator coupling capacitance (F).
    pub c_g: T,
    /// Drive-line coupling inductance (H).
    pub l_l: T,
    /// Mutual-inductance coefficient, `M = k·√(L_L·L_f)`.
    pub k_coupling: T,
    /// Qubit angular frequency (rad/s).
    pub omega_a: T,
    /// Resonator angular frequency (rad/s).
    pub omega_f: T,
}

/// Ohmic resistor environment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec<T> {
    /// Resistance (Ω).
    pub r: T,
    /// Drude cutoff angular frequency (rad/s).
    pub omega_c: T,
    /// Temperature (K).
    pub t: T,
}

impl CircuitSpec<f64> {
    /// Element values of the reference device: 800 fF resonator, 5 fF
    /// coupling capacitor, 90 fF qubit, 140 pH line inductance with k = 0.005,
    /// qubit at 4 GHz and resonator at 6.1 GHz.
    pub fn reference() -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        Self {
            c_a: 90e-15,
            c_f: 800e-15,
            c_g: 5e-15,
            l_l: 140e-12,
            k_coupling: 0.005,
            omega_a: two_pi * 4.0e9,
            omega_f: two_pi * 6.1e9,
        }
    }
}

impl BathSpec<f64> {
    /// 50 Ω line with a 1e12 rad/s cutoff at temperature `t`.
    pub fn reference(t: f64) -> Self {
        Self {
            r: 50.0,
            omega_c: 1e12,
            t,
        }
    }
}

impl<T: Real> CircuitSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_a", self.c_a),
            ("c_f", self.c_f),
            ("l_l", self.l_l),
            ("omega_a", self.omega_a),
            ("omega_f", self.omega_f),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidCircuit(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        // C_g = 0 is the decoupled limit and stays allowed.
        if !(self.c_g >= T::zero()) || !self.c_g.is_finite() {
            return Err(Error::InvalidCircuit(format!(
                "c_g must be non-negative, got {}",
                self.c_g
            )));
        }
        if !(self.k_coupling >= T::zero() && self.k_coupling < T::one()) {
            return Err(Error::InvalidCircuit(format!(
                "k_coupling must lie in [0, 1), got {}",
                self.k_coupling
            )));
        }
        if self.omega_a == self.omega_f {
            return Err(Error::InvalidCircuit(
                "omega_a and omega_f coincide; the dispersive regime needs nonzero detuning".into(),
            ));
        }
        Ok(())
    }

    /// `D = C_A·C_f + C_f·C_g + C_g·C_A`
    pub fn capacitance_determinant(&self) -> T {
        self.c_a * self.c_f + self.c_f * self.c_g + self.c_g * self.c_a
    }

    /// `L_f = 1/(C_f·ω_f²)`
    pub fn resonator_inductance(&self) -> T {
        T::one() / (self.c_f * self.omega_f * self.omega_f)
    }

    /// Qubit–resonator coupling `g_f` (rad/s).
    pub fn coupling_strength(&self) -> T {
        let half = T::lit(0.5);
        // Square roots taken factor by factor to stay in range for f32.
        half * self.c_g * self.omega_a.sqrt() * self.omega_f.sqrt()
            / ((self.c_f + self.c_g).sqrt() * (self.c_a + self.c_g).sqrt())
    }

    /// Zero-point flux factor `μ = √(ħ(C_A + C_g)/(2Dω_f))`.
    pub fn flux_factor(&self) -> T {
        T::lit(HBAR).sqrt() * (self.c_a + self.c_g).sqrt()
            / (T::lit(2.0) * self.capacitance_determinant() * self.omega_f).sqrt()
    }
}

impl<T: Real> BathSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > T::zero()) || !self.r.is_finite() {
            return Err(Error::InvalidBath(format!("r must be positive, got {}", self.r)));
        }
        if !(self.omega_c > T::zero()) || !self.omega_c.is_finite() {
            return Err(Error::InvalidBath(format!(
                "omega_c must be positive, got {}",
                self.omega_c
            )));
        }
        if !(self.t >= T::zero()) || !self.t.is_finite() {
            return Err(Error::InvalidBath(format!("t must be non-negative, got {}", self.t)));
        }
        Ok(())
    }
}

/// Couplings derived from a circuit and its bath.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams<T> {
    /// Capacitance determinant `D` (F²).
    pub d_cap: T,
    /// Resonator inductance (H).
    pub l_f: T,
    /// Mutual inductance (H).
    pub m: T,
    /// Qubit–resonator coupling (rad/s).
    pub g_f: T,
    /// Flux factor μ.
    pub mu: T,
    /// Spectral-density prefactor `χ = Rμ²/(ħL_f²)` (rad/s).
    pub chi: T,
    /// Bath coupling `α = M/L_L`.
    pub alpha: T,
    /// Resonator energy decay rate (1/s).
    pub gamma: T,
    /// Thermal photon number at ω_f.
    pub n_bar: T,
    /// Signed detuning `Δ = ω_A − ω_f` (rad/s).
    pub delta: T,
    /// Dispersive parameter `λ = g_f/Δ` (signed).
    pub lambda: T,
    pub omega_a: T,
    pub omega_f: T,
    /// `g_f/ω_A`
    pub gf_prime: T,
    /// `γ/ω_A`
    pub gamma_prime: T,
    /// `ω_f/ω_A`
    pub omega_f_prime: T,
    /// `Δ/ω_A`
    pub delta_prime: T,
}

/// Computes every derived coupling from physical element values.
pub fn derive_params<T: Real>(circuit: &CircuitSpec<T>, bath: &BathSpec<T>) -> Result<DerivedParams<T>> {
    circuit.validate()?;
    bath.validate()?;
    let d_cap = circuit.capacitance_determinant();
    let l_f = circuit.resonator_inductance();
    let m = circuit.k_coupling * (circuit.l_l * l_f).sqrt();
    let g_f = circuit.coupling_strength();
    let mu = circuit.flux_factor();
    let ratio = mu / l_f;
    let chi = bath.r * ratio * ratio / T::lit(HBAR);
    let alpha = m / circuit.l_l;
    let j_f = drude_density(circuit.omega_f, chi, bath.omega_c);
    let gamma = T::lit(2.0) * T::PI() * alpha * alpha * j_f;
    let n_bar = bose_einstein(circuit.omega_f, bath.t);
    let delta = circuit.omega_a - circuit.omega_f;
    let lambda = g_f / delta;
    if lambda.abs() >= T::one() {
        return Err(Error::DispersiveViolation {
            lambda: lambda.abs().to_f64().unwrap_or(f64::NAN),
        });
    }
    let p = DerivedParams {
        d_cap,
        l_f,
        m,
        g_f,
        mu,
        chi,
        alpha,
        gamma,
        n_bar,
        delta,
        lambda,
        omega_a: circuit.omega_a,
        omega_f: circuit.omega_f,
        gf_prime: g_f / circuit.omega_a,
        gamma_prime: gamma / circuit.omega_a,
        omega_f_prime: circuit.omega_f / circuit.omega_a,
        delta_prime: delta / circuit.omega_a,
    };
    for w in p.warnings(bath) {
        log::warn!("{w}");
    }
    Ok(p)
}

impl<T: Real> DerivedParams<T> {
    /// Soft validity checks that do not stop a run.
    pub fn warnings(&self, bath: &BathSpec<T>) -> Vec<String> {
        let mut out = Vec::new();
        if self.lambda.abs() > T::lit(0.1) {
            out.push(format!(
                "dispersive parameter |lambda| = {:.4} exceeds 0.1; the dispersive expansion is unreliable",
                self.lambda.abs()
            ));
        }
        if bath.omega_c < T::lit(10.0) * self.omega_f {
            out.push(format!(
                "cutoff omega_c = {:e} rad/s is below 10*omega_f; the ohmic form is questionable",
                bath.omega_c
            ));
        }
        out
    }

    /// Dimensionless parameters consumed by the operator and Liouvillian
    /// layers.
    pub fn system(&self) -> SystemParams<T> {
        SystemParams {
            omega_f: self.omega_f_prime,
            g: self.gf_prime,
            lambda: self.lambda,
            gamma: self.gamma_prime,
            n_bar: self.n_bar,
        }
    }

    /// Fully expanded closed form of γ in terms of element values, kept as an
    /// independent route to the same number.
    pub fn gamma_expanded(circuit: &CircuitSpec<T>, bath: &BathSpec<T>) -> T {
        let two = T::lit(2.0);
        let pi = T::PI();
        let l_f = circuit.resonator_inductance();
        let ratio = circuit.k_coupling * (circuit.l_l * l_f).sqrt() / circuit.l_l;
        let wf = circuit.omega_f;
        let wc = bath.omega_c;
        two * pi
            * ratio
            * ratio
            * (bath.r * (circuit.c_a + circuit.c_g) / (two * circuit.capacitance_determinant() * wf * l_f * l_f))
            * (wc * wc / (pi * wf * (wc * wc + wf * wf)))
    }
}

fn drude_density<T: Real>(omega: T, chi: T, omega_c: T) -> T {
    let x = omega / omega_c;
    chi / (T::PI() * omega * (T::one() + x * x))
}

/// Bath spectral density `J(ω) = χ·ω_c²/(π·ω·(ω_c² + ω²))` (rad/s).
pub fn spectral_density<T: Real>(omega: T, params: &DerivedParams<T>, bath: &BathSpec<T>) -> Result<T> {
    if !(omega > T::zero()) {
        return Err(Error::Domain {
            what: "spectral density",
            omega: omega.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(drude_density(omega, params.chi, bath.omega_c))
}

/// Bose–Einstein occupation; exactly zero at `T = 0`.
pub fn bose_einstein<T: Real>(omega: T, temperature: T) -> T {
    if temperature <= T::zero() {
        return T::zero();
    }
    let x = T::lit(HBAR) * omega / (T::lit(K_B) * temperature);
    T::one() / x.exp_m1()
}

/// Ohmic resistor impedance with Drude cutoff.
pub fn resistor_impedance<T: Real>(omega: T, bath: &BathSpec<T>) -> C<T> {
    let wc2 = bath.omega_c * bath.omega_c;
    let den = wc2 + omega * omega;
    Complex::new(bath.r * wc2 / den, bath.r * omega * bath.omega_c / den)
}

/// One LC stage of the discretized resistor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathMode<T> {
    pub omega: T,
    pub inductance: T,
    pub capacitance: T,
    /// Coupling `h_k` to the resonator (J).
    pub coupling: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathModes<T> {
    pub delta_omega: T,
    pub modes: Vec<BathMode<T>>,
}

/// Caldeira–Leggett discretization of the resistor on the grid `ω_k = kΔω`,
/// `k = 1..=count`.
pub fn discretize_bath<T: Real>(
    bath: &BathSpec<T>,
    params: &DerivedParams<T>,
    delta_omega: T,
    count: usize,
) -> Result<BathModes<T>> {
    if !(delta_omega > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "delta_omega must be positive, got {delta_omega}"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let two = T::lit(2.0);
    let pi = T::PI();
    let hbar = T::lit(HBAR);
    let wc2 = bath.omega_c * bath.omega_c;
    let modes = (1..=count)
        .map(|k| {
            let omega = T::from_count(k) * delta_omega;
            let re_z = resistor_impedance(omega, bath).re;
            let inductance = two * delta_omega * re_z / (pi * omega * omega);
            let capacitance = pi / (two * delta_omega * re_z);
            let coupling = (hbar * delta_omega * bath.r * wc2 / (pi * omega * (wc2 + omega * omega))).sqrt()
                * params.mu
                / params.l_f;
            BathMode {
                omega,
                inductance,
                capacitance,
                coupling,
            }
        })
        .collect();
    Ok(BathModes { delta_omega, modes })
}

impl<T: Real> BathModes<T> {
    /// `|h_k|²/(ħ²Δω)` for each mode, which tends to `J(ω_k)`.
    pub fn density_estimates(&self) -> Vec<(T, T)> {
        let hbar = T::lit(HBAR);
        self.modes
            .iter()
            .map(|m| {
                let h = m.coupling / hbar;
                (m.omega, h * h / self.delta_omega)
            })
            .collect()
    }
}
