//! Two-level open-system discriminator.
//!
//! A weight `q` is loaded into `ψ = √(1 − q²) e₀ + q e₁`. With both
//! amplitudes nonzero the state is driven by the dissipative generator
//!
//! `L ρ = i Im γ [ρ, D†D] − Re γ {D†D, ρ} + 2 Re γ D ρ D†`,  `D = |e₀⟩⟨e₁|`,
//!
//! which relaxes every state to `|e₀⟩⟨e₀|`. With `q = 0` the probe evolves
//! under `H = diag(E₀ + 1, E₁)` and its coherence rotates forever. Damping
//! means `q ≠ 0`; oscillation means `q = 0`.

use nalgebra::{Matrix2, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

pub const STATE_TOL: f64 = 1e-10;
pub const TRACE_DRIFT_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;
pub const RECURRENCE_TOL: f64 = 1e-6;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_DECAY_FLOOR: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum LindbladError {
    #[error("state is not Hermitian")]
    NotHermitian,
    #[error("state trace {0} differs from 1")]
    Trace(f64),
    #[error("state has negative eigenvalue {0}")]
    NotPositive(f64),
    #[error("Re gamma = {0} must be positive")]
    Gamma(f64),
    #[error("energies must satisfy E0 < E1, got E0 = {e0}, E1 = {e1}")]
    Energies { e0: i64, e1: i64 },
    #[error("time step {dt} and final time {t_final} must be positive and finite")]
    Time { dt: f64, t_final: f64 },
    #[error("integration lost {what} at t = {t}: {value}")]
    Invariant { what: &'static str, t: f64, value: f64 },
    #[error("empty trajectory")]
    EmptyRecord,
    #[error("q = {0} must lie in [0, 1)")]
    Unsupported(f64),
    #[error("inconclusive: trajectory classified {0:?}")]
    Inconclusive(Classification),
}

/// 2×2 density matrix in the basis `e₀, e₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelState(Matrix2<Complex64>);

impl TwoLevelState {
    pub fn new(m: Matrix2<Complex64>) -> Result<Self, LindbladError> {
        if (m[(0, 1)] - m[(1, 0)].conj()).norm() > STATE_TOL
            || m[(0, 0)].im.abs() > STATE_TOL
            || m[(1, 1)].im.abs() > STATE_TOL
        {
            return Err(LindbladError::NotHermitian);
        }
        let tr = (m[(0, 0)] + m[(1, 1)]).re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(LindbladError::Trace(tr));
        }
        let low = min_eigenvalue(&m);
        if low < -STATE_TOL {
            return Err(LindbladError::NotPositive(low));
        }
        Ok(TwoLevelState(m))
    }

    pub fn from_parts(p1: f64, c: Complex64) -> Result<Self, LindbladError> {
        Self::new(Matrix2::new(
            Complex64::new(1.0 - p1, 0.0),
            c,
            c.conj(),
            Complex64::new(p1, 0.0),
        ))
    }

    /// `|ψ⟩⟨ψ|` for `ψ = α₀ e₀ + α₁ e₁`.
    pub fn pure(alpha0: Complex64, alpha1: Complex64) -> Result<Self, LindbladError> {
        Self::new(Matrix2::new(
            alpha0 * alpha0.conj(),
            alpha0 * alpha1.conj(),
            alpha1 * alpha0.conj(),
            alpha1 * alpha1.conj(),
        ))
    }

    pub fn ground() -> Self {
        TwoLevelState(Matrix2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ))
    }

    pub fn excited() -> Self {
        TwoLevelState(Matrix2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ))
    }

    /// `|+⟩⟨+|`.
    pub fn plus() -> Self {
        let h = Complex64::new(0.5, 0.0);
        TwoLevelState(Matrix2::new(h, h, h, h))
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    pub fn p0(&self) -> f64 {
        self.0[(0, 0)].re
    }

    pub fn p1(&self) -> f64 {
        self.0[(1, 1)].re
    }

    /// `⟨e₀|ρ|e₁⟩`.
    pub fn coherence(&self) -> Complex64 {
        self.0[(0, 1)]
    }
}

fn min_eigenvalue(m: &Matrix2<Complex64>) -> f64 {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DissipativeParams {
    pub gamma: Complex64,
}

impl DissipativeParams {
    pub fn new(gamma: Complex64) -> Result<Self, LindbladError> {
        if !gamma.re.is_finite() || gamma.re <= 0.0 || !gamma.im.is_finite() {
            return Err(LindbladError::Gamma(gamma.re));
        }
        Ok(DissipativeParams { gamma })
    }
}

impl Default for DissipativeParams {
    fn default() -> Self {
        DissipativeParams {
            gamma: Complex64::new(1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HamiltonianParams {
    pub e0: i64,
    pub e1: i64,
}

impl HamiltonianParams {
    pub fn new(e0: i64, e1: i64) -> Result<Self, LindbladError> {
        if e0 >= e1 {
            return Err(LindbladError::Energies { e0, e1 });
        }
        Ok(HamiltonianParams { e0, e1 })
    }

    /// `Δ = (E₀ + 1) − E₁`.
    pub fn delta(&self) -> i64 {
        self.e0 + 1 - self.e1
    }

    pub fn period(&self) -> Option<f64> {
        match self.delta() {
            0 => None,
            d => Some(2.0 * PI / d.unsigned_abs() as f64),
        }
    }
}

impl Default for HamiltonianParams {
    fn default() -> Self {
        HamiltonianParams { e0: 0, e1: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub p0: Vec<f64>,
    pub p1: Vec<f64>,
    pub coherence: Vec<Complex64>,
    /// Set for Hamiltonian runs with `Δ = 0`.
    pub stationary: bool,
}

impl TrajectoryRecord {
    fn with_capacity(n: usize) -> Self {
        TrajectoryRecord {
            times: Vec::with_capacity(n),
            p0: Vec::with_capacity(n),
            p1: Vec::with_capacity(n),
            coherence: Vec::with_capacity(n),
            stationary: false,
        }
    }

    fn push(&mut self, t: f64, rho: &Matrix2<Complex64>) {
        self.times.push(t);
        self.p0.push(rho[(0, 0)].re);
        self.p1.push(rho[(1, 1)].re);
        self.coherence.push(rho[(0, 1)]);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|p₀ + p₁ − 1|` over the record.
    pub fn trace_drift(&self) -> f64 {
        self.p0
            .iter()
            .zip(&self.p1)
            .map(|(a, b)| (a + b - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn abs_c(&self) -> Vec<f64> {
        self.coherence.iter().map(|c| c.norm()).collect()
    }

    pub fn state_at(&self, k: usize) -> Result<TwoLevelState, LindbladError> {
        TwoLevelState::from_parts(self.p1[k], self.coherence[k])
    }
}

/// `L ρ` for the dissipative generator.
pub fn generator_apply(
    rho: &TwoLevelState,
    params: &DissipativeParams,
) -> Result<Matrix2<Complex64>, LindbladError> {
    DissipativeParams::new(params.gamma)?;
    Ok(generator(&rho.0, params.gamma))
}

fn generator(rho: &Matrix2<Complex64>, gamma: Complex64) -> Matrix2<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let d = Matrix2::new(zero, one, zero, zero);
    let n = Matrix2::new(zero, zero, zero, one);
    let commutator = rho * n - n * rho;
    let anticommutator = n * rho + rho * n;
    let sandwich = d * rho * d.adjoint();
    commutator * Complex64::new(0.0, gamma.im) - anticommutator * Complex64::from(gamma.re)
        + sandwich * Complex64::from(2.0 * gamma.re)
}

fn check_time(t_final: f64, dt: f64) -> Result<usize, LindbladError> {
    if !(dt > 0.0 && t_final > 0.0 && dt.is_finite() && t_final.is_finite()) {
        return Err(LindbladError::Time { dt, t_final });
    }
    Ok(((t_final / dt).round() as usize).max(1))
}

/// Classical RK4 on `dρ/dt = L ρ`, sampled at every step.
pub fn evolve_dissipative(
    rho0: &TwoLevelState,
    params: &DissipativeParams,
    t_final: f64,
    dt: f64,
) -> Result<TrajectoryRecord, LindbladError> {
    DissipativeParams::new(params.gamma)?;
    let steps = check_time(t_final, dt)?;
    let g = params.gamma;
    let mut rho = rho0.0;
    let half = Complex64::from(dt / 2.0);
    let full = Complex64::from(dt);
    let two = Complex64::from(2.0);
    let sixth = Complex64::from(dt / 6.0);
    let mut rec = TrajectoryRecord::with_capacity(steps + 1);
    rec.push(0.0, &rho);
    for k in 1..=steps {
        let k1 = generator(&rho, g);
        let k2 = generator(&(rho + k1 * half), g);
        let k3 = generator(&(rho + k2 * half), g);
        let k4 = generator(&(rho + k3 * full), g);
        rho += (k1 + k2 * two + k3 * two + k4) * sixth;
        let t = k as f64 * dt;
        let tr = (rho[(0, 0)] + rho[(1, 1)]).re;
        if (tr - 1.0).abs() > TRACE_DRIFT_TOL {
            return Err(LindbladError::Invariant {
                what: "trace",
                t,
                value: tr,
            });
        }
        let low = min_eigenvalue(&rho);
        if low < -POSITIVITY_TOL {
            return Err(LindbladError::Invariant {
                what: "positivity",
                t,
                value: low,
            });
        }
        rec.push(t, &rho);
    }
    Ok(rec)
}

/// Exact closed-form dissipative solution `(p₁(t), c(t))`.
pub fn dissipative_closed_form(
    rho0: &TwoLevelState,
    params: &DissipativeParams,
    t: f64,
) -> (f64, Complex64) {
    let g = params.gamma;
    let p1 = rho0.p1() * (-2.0 * g.re * t).exp();
    let c = rho0.coherence() * (Complex64::new(-g.re, g.im) * t).exp();
    (p1, c)
}

/// Unitary evolution under `H = diag(E₀ + 1, E₁)`.
///
/// The step is shrunk so that an integer number of steps spans one period.
pub fn evolve_hamiltonian(
    rho0: &TwoLevelState,
    params: &HamiltonianParams,
    t_final: f64,
    dt: f64,
) -> Result<TrajectoryRecord, LindbladError> {
    HamiltonianParams::new(params.e0, params.e1)?;
    check_time(t_final, dt)?;
    let step = match params.period() {
        Some(period) => period / (period / dt).ceil(),
        None => dt,
    };
    let steps = ((t_final / step) + 1e-9).floor() as usize;
    let delta = params.delta() as f64;
    let (p0, p1) = (rho0.p0(), rho0.p1());
    let c0 = rho0.coherence();
    let mut rec = TrajectoryRecord::with_capacity(steps + 1);
    rec.stationary = params.delta() == 0;
    for k in 0..=steps {
        let t = k as f64 * step;
        rec.times.push(t);
        rec.p0.push(p0);
        rec.p1.push(p1);
        rec.coherence.push(c0 * Complex64::from_polar(1.0, -delta * t));
    }
    Ok(rec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Classification {
    Damped,
    Oscillatory,
    Stationary,
}

/// DAMPED when `p₁ + |c|` over the last half stays below `decay_floor` times
/// its initial value. OSCILLATORY when the coherence leaves `c(0)` and later
/// comes back to within [`RECURRENCE_TOL`]. STATIONARY otherwise.
pub fn classify(
    record: &TrajectoryRecord,
    decay_floor: f64,
) -> Result<Classification, LindbladError> {
    if record.is_empty() {
        return Err(LindbladError::EmptyRecord);
    }
    let signal: Vec<f64> = record
        .p1
        .iter()
        .zip(&record.coherence)
        .map(|(p, c)| p + c.norm())
        .collect();
    let initial = signal[0];
    let tail = &signal[signal.len() / 2..];
    let sup = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if initial > 0.0 && sup < decay_floor * initial {
        return Ok(Classification::Damped);
    }
    let c0 = record.coherence[0];
    let mut left = false;
    for c in &record.coherence[1..] {
        let dist = (c - c0).norm();
        if !left {
            left = dist > RECURRENCE_TOL;
        } else if dist <= RECURRENCE_TOL {
            return Ok(Classification::Oscillatory);
        }
    }
    Ok(Classification::Stationary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Discrimination {
    QNonzero,
    QZero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscriminatorRun {
    pub decision: Discrimination,
    pub classification: Classification,
    pub record: TrajectoryRecord,
}

/// The larger of `10 / Re γ` (the dissipative envelope has fallen by `e^-10`) and
/// two Hamiltonian periods.
pub fn default_t_final(gamma: &DissipativeParams, energies: &HamiltonianParams) -> f64 {
    let damping = 10.0 / gamma.gamma.re;
    match energies.period() {
        Some(period) => damping.max(2.0 * period),
        None => damping,
    }
}

/// Loads `q` into `ψ`, runs the dissipative dynamics (`q > 0`) or the Hamiltonian one with the `|+⟩` probe
/// (`q = 0`) and maps DAMPED to `q ≠ 0`, OSCILLATORY to `q = 0`.
pub fn discriminate(
    q: f64,
    gamma: &DissipativeParams,
    energies: &HamiltonianParams,
    t_final: f64,
    dt: f64,
) -> Result<DiscriminatorRun, LindbladError> {
    let record = discriminator_trajectory(q, gamma, energies, t_final, dt)?;
    let classification = classify(&record, DEFAULT_DECAY_FLOOR)?;
    let decision = match classification {
        Classification::Damped => Discrimination::QNonzero,
        Classification::Oscillatory => Discrimination::QZero,
        Classification::Stationary => {
            return Err(LindbladError::Inconclusive(classification));
        }
    };
    Ok(DiscriminatorRun {
        decision,
        classification,
        record,
    })
}

/// The trajectory [`discriminate`] classifies.
pub fn discriminator_trajectory(
    q: f64,
    gamma: &DissipativeParams,
    energies: &HamiltonianParams,
    t_final: f64,
    dt: f64,
) -> Result<TrajectoryRecord, LindbladError> {
    if !(0.0..1.0).contains(&q) {
        return Err(LindbladError::Unsupported(q));
    }
    if q == 0.0 {
        evolve_hamiltonian(&TwoLevelState::plus(), energies, t_final, dt)
    } else {
        let psi = TwoLevelState::pure(
            Complex64::new((1.0 - q * q).sqrt(), 0.0),
            Complex64::new(q, 0.0),
        )?;
        evolve_dissipative(&psi, gamma, t_final, dt)
    }
}
