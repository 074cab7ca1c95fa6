use ddq::circuit::{discretize_bath, resistor_impedance, spectral_density};
use ddq::dynamics::{
    coherent_state, fit_decay_rate, fit_log_linear, initial_state, propagate, strong_dispersive_estimate,
    thermal_state, two_phase_windows, uniform_times, DecayFit,
};
use ddq::liouville::{build_block, liouvillian, vectorized_pauli};
use ddq::spectral::{
    coherence_rate, decoherence_rate, eig_general, mode_coefficients, reconstruct_coherence, sigma_projections,
    write_mode_csv,
};
use ddq::{Complex, DerivedParams, HilbertSpec, Pauli, SystemParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ResonatorInit, RunConfig, SweepVariable};
use crate::{fmt_f, CliError};

/// Background decay rate added to Γ₂R when reporting T₂ (s⁻¹).
pub const DEFAULT_GAMMA_B: f64 = 5026.0;

/// Relative agreement between the fitted envelope and Γ₂R counted as a match.
pub const ENVELOPE_TOLERANCE: f64 = 0.05;

#[derive(Serialize)]
struct DerivedReport {
    params: DerivedParams,
    system: SystemParams,
    #[serde(rename = "S")]
    s: usize,
}

/// Derived couplings as a JSON document that also loads as a config.
pub fn derive(cfg: &RunConfig) -> Result<String, CliError> {
    let d = cfg.derive()?;
    let p = cfg.system(&d)?;
    let s = cfg.truncation(p.n_bar)?;
    let mut report = cfg.clone();
    report.overrides.gf_prime = Some(p.g);
    report.overrides.gamma_prime = Some(p.gamma);
    report.derived = Some(
        serde_json::to_value(DerivedReport {
            params: d,
            system: p,
            s,
        })
        .map_err(|e| CliError::Io(e.to_string()))?,
    );
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub t0: f64,
    pub t1: f64,
    pub rate: f64,
    pub r_squared: f64,
    pub samples: usize,
}

impl FitReport {
    fn new(t0: f64, t1: f64, fit: DecayFit<f64>) -> Self {
        Self {
            t0,
            t1,
            rate: fit.rate,
            r_squared: fit.r_squared,
            samples: fit.samples,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolveSummary {
    #[serde(rename = "S")]
    pub s: usize,
    pub t_max_omega_a: f64,
    pub gamma2r: f64,
    pub gamma2r_unfiltered: f64,
    pub variants_differ: bool,
    /// Largest |⟨σ_x⟩| difference between the mode expansion and the
    /// propagator.
    pub spectral_max_deviation: f64,
    pub fit: Option<FitReport>,
    pub fit_error: Option<String>,
    pub envelope_agreement: bool,
    /// Unchecked log-linear fit over `[0, 3/γ′]`, coherent starts only.
    pub early_fit: Option<FitReport>,
}

pub struct EvolveOutput {
    pub trajectory_csv: String,
    pub summary: EvolveSummary,
    pub modes_csv: String,
    pub block_json: String,
}

fn horizon(p: &SystemParams, gamma2r: f64) -> f64 {
    let mut t = 0.0;
    if p.gamma > 0.0 {
        t += 3.0 / p.gamma;
    }
    if gamma2r > 1e-12 {
        t += 3.0 / gamma2r;
    }
    if t == 0.0 {
        1e4
    } else {
        t.min(1e9)
    }
}

/// Propagates the configured initial state and cross-checks it against the
/// `d = 1` eigenmodes.
pub fn evolve(cfg: &RunConfig) -> Result<EvolveOutput, CliError> {
    let d = cfg.derive()?;
    let p = cfg.system(&d)?;
    let spec = HilbertSpec::new(cfg.truncation(p.n_bar)?)?;
    let sim = &cfg.simulation;

    let block = build_block(&p, spec, 1);
    let modes = eig_general(&block)?;
    let sx = vectorized_pauli(Pauli::X, spec)?;
    let rate = decoherence_rate(&modes, &sx, sim.eps_overlap)?;
    if rate.variants_differ() {
        log::warn!(
            "filtered and unfiltered rates differ: {:e} vs {:e}",
            rate.gamma_2r,
            rate.unfiltered
        );
    }

    let resonator = match cfg.initial.resonator {
        ResonatorInit::Thermal => thermal_state(p.n_bar, spec.s)?,
        ResonatorInit::Coherent => {
            let [re, im] = cfg.initial.alpha;
            coherent_state(Complex::new(re, im), spec.s)?
        }
    };
    let rho0 = initial_state(&cfg.initial.qubit.state(), &resonator)?;
    let t_max = sim.t_max.unwrap_or_else(|| horizon(&p, rate.gamma_2r));
    let times = uniform_times(t_max, sim.n_times);
    log::info!(
        "propagating S = {} over {} points up to t = {t_max:e}",
        spec.s,
        times.len()
    );
    let traj = propagate(&liouvillian(&p, spec)?, &rho0, &times)?;

    let c = mode_coefficients(rho0.rho(), &modes);
    let proj = sigma_projections(Pauli::X, &modes)?;
    let spectral = reconstruct_coherence(&c, &proj, &modes, &times);
    let spectral_max_deviation = spectral
        .iter()
        .zip(&traj.sx)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let (early_w, late_w) = if p.gamma > 0.0 {
        two_phase_windows(p.gamma, t_max)
    } else {
        ((0.0, 0.0), (0.0, t_max))
    };
    let late_w = if late_w.0 < t_max { late_w } else { (0.0, t_max) };
    let (fit, fit_error) = match fit_decay_rate(&traj.times, &traj.coherence, late_w.0, late_w.1) {
        Ok(f) => (Some(FitReport::new(late_w.0, late_w.1, f)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let envelope_agreement = fit
        .as_ref()
        .is_some_and(|f| (f.rate - rate.gamma_2r).abs() <= ENVELOPE_TOLERANCE * rate.gamma_2r + 1e-12);
    let early_fit = match cfg.initial.resonator {
        ResonatorInit::Coherent if early_w.1 > 0.0 => {
            fit_log_linear(&traj.times, &traj.coherence, early_w.0, early_w.1)
                .ok()
                .map(|f| FitReport::new(early_w.0, early_w.1, f))
        }
        _ => None,
    };

    let mut trajectory_csv = Vec::new();
    traj.write_csv(&mut trajectory_csv)?;
    let mut modes_csv = Vec::new();
    write_mode_csv(&mut modes_csv, &modes, &sx)?;
    let block_json = serde_json::to_string(&block.to_dump()).map_err(|e| CliError::Io(e.to_string()))?;

    Ok(EvolveOutput {
        trajectory_csv: String::from_utf8(trajectory_csv).expect("ascii output"),
        summary: EvolveSummary {
            s: spec.s,
            t_max_omega_a: t_max,
            gamma2r: rate.gamma_2r,
            gamma2r_unfiltered: rate.unfiltered,
            variants_differ: rate.variants_differ(),
            spectral_max_deviation,
            fit,
            fit_error,
            envelope_agreement,
            early_fit,
        },
        modes_csv: String::from_utf8(modes_csv).expect("ascii output"),
        block_json,
    })
}

pub const RATES_HEADER: &str =
    "sweep_var,gamma_prime,gf_prime,T_K,n_bar,Gamma2R,Gamma2R_unfiltered,gamma_nbar_estimate,T2_s,status";

struct RatePoint {
    var: f64,
    gamma: f64,
    g: f64,
    t: f64,
    n_bar: f64,
    gamma2r: f64,
    unfiltered: f64,
    estimate: f64,
    t2: f64,
    status: String,
}

impl RatePoint {
    fn row(&self) -> String {
        let nums = [
            self.var,
            self.gamma,
            self.g,
            self.t,
            self.n_bar,
            self.gamma2r,
            self.unfiltered,
            self.estimate,
            self.t2,
        ];
        let mut s: Vec<String> = nums.iter().map(|&x| fmt_f(x)).collect();
        s.push(self.status.replace([',', '\n'], ";"));
        s.join(",")
    }
}

fn rate_point(cfg: &RunConfig, var: SweepVariable, v: f64, gamma_b: f64) -> RatePoint {
    let mut out = RatePoint {
        var: v,
        gamma: f64::NAN,
        g: f64::NAN,
        t: cfg.bath.t,
        n_bar: f64::NAN,
        gamma2r: f64::NAN,
        unfiltered: f64::NAN,
        estimate: f64::NAN,
        t2: f64::NAN,
        status: "ok".into(),
    };
    if let Err(e) = fill_rate_point(cfg, var, v, gamma_b, &mut out) {
        log::warn!("sweep point {v:e}: {e}");
        out.status = format!("error: {e}");
    }
    out
}

fn fill_rate_point(
    cfg: &RunConfig,
    var: SweepVariable,
    v: f64,
    gamma_b: f64,
    out: &mut RatePoint,
) -> Result<(), CliError> {
    let mut bath = cfg.bath;
    if var == SweepVariable::T {
        bath.t = v;
    }
    out.t = bath.t;
    let d = cfg.derive_at(&bath)?;
    let mut p = cfg.system(&d)?;
    match var {
        SweepVariable::T => {}
        SweepVariable::GammaPrime => p = p.with_gamma(v),
        SweepVariable::GfPrime => p = p.with_g(v),
    }
    out.gamma = p.gamma;
    out.g = p.g;
    out.n_bar = p.n_bar;
    out.estimate = strong_dispersive_estimate(p.gamma, p.n_bar);
    p.validate()?;
    let spec = HilbertSpec::new(cfg.truncation(p.n_bar)?)?;
    let rate = coherence_rate(&p, spec, cfg.simulation.eps_overlap)?;
    out.gamma2r = rate.gamma_2r;
    out.unfiltered = rate.unfiltered;
    out.t2 = 1.0 / (rate.gamma_2r * d.omega_a + gamma_b);
    if rate.variants_differ() {
        out.status = "ok; variants differ".into();
    }
    Ok(())
}

/// Γ₂R over the configured sweep grid. Points run on a pool of `jobs`
/// threads (rayon's default when `None`); rows keep grid order.
pub fn rates(cfg: &RunConfig, gamma_b: f64, jobs: Option<usize>) -> Result<String, CliError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Validation("sweep: required by the rates command".into()))?;
    if !(gamma_b >= 0.0 && gamma_b.is_finite()) {
        return Err(CliError::Validation(format!(
            "--gamma-b must be non-negative, got {gamma_b}"
        )));
    }
    let values = sweep.values();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let points: Vec<RatePoint> = pool.install(|| {
        values
            .par_iter()
            .map(|&v| rate_point(cfg, sweep.variable, v, gamma_b))
            .collect()
    });
    let failed = points.iter().filter(|p| p.status.starts_with("error")).count();
    if failed > 0 {
        log::warn!("{failed} of {} sweep points failed", points.len());
    }
    let mut csv = String::from(RATES_HEADER);
    csv.push('\n');
    for p in &points {
        csv.push_str(&p.row());
        csv.push('\n');
    }
    Ok(csv)
}

pub const BATHCHECK_HEADER: &str = "delta_omega,modes_in_window,max_rel_dev,re_z_at_wc_over_r";

/// Deviation of the discretized bath from the continuum spectral density on
/// `[ω_f/2, 2ω_f]`, one row per spacing. Defaults to `ω_f/500` and
/// `ω_f/2000`.
pub fn bathcheck(cfg: &RunConfig, delta_omega: Option<&[f64]>) -> Result<String, CliError> {
    let d = cfg.derive()?;
    let wf = cfg.circuit.omega_f;
    let spacings = match delta_omega {
        Some(list) if !list.is_empty() => list.to_vec(),
        _ => vec![wf / 500.0, wf / 2000.0],
    };
    let re_z = resistor_impedance(cfg.bath.omega_c, &cfg.bath).re / cfg.bath.r;
    let mut csv = String::from(BATHCHECK_HEADER);
    csv.push('\n');
    for dw in spacings {
        if !(dw > 0.0 && dw.is_finite()) {
            return Err(CliError::Validation(format!("delta_omega: must be positive, got {dw}")));
        }
        let count = (2.0 * wf / dw).ceil();
        if count > 1e7 {
            return Err(CliError::Validation(format!(
                "delta_omega: {dw:e} needs {count:e} modes to reach 2*omega_f"
            )));
        }
        let modes = discretize_bath(&cfg.bath, &d, dw, count as usize)?;
        let mut in_window = 0usize;
        let mut worst = 0.0f64;
        for (w, est) in modes.density_estimates() {
            if w >= wf / 2.0 && w <= 2.0 * wf {
                let j = spectral_density(w, &d, &cfg.bath)?;
                worst = worst.max((est - j).abs() / j);
                in_window += 1;
            }
        }
        csv.push_str(&format!("{},{in_window},{},{}\n", fmt_f(dw), fmt_f(worst), fmt_f(re_z)));
    }
    Ok(csv)
}

/// Γ₂R for a config at its own bath temperature.
pub fn single_rate(cfg: &RunConfig) -> Result<f64, CliError> {
    let d = cfg.derive()?;
    let p = cfg.system(&d)?;
    let spec = HilbertSpec::new(cfg.truncation(p.n_bar)?)?;
    Ok(coherence_rate(&p, spec, cfg.simulation.eps_overlap)?.gamma_2r)
}
