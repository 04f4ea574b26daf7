//! Strang split-step evolution of the controlled log-NLS.
//!
//! The solver integrates the τ-rescaled equation
//!
//!   i∂_s ψ + (τ/2)Δψ − τ(V + Σ_j u_j W_j)ψ = τλ ψ log|ψ|²  (− i𝒯_{∇φ(s)}ψ)
//!
//! (τ = 1 is the physical equation). One step of size dt composes
//!
//!   kinetic(dt/2) ∘ phase(dt) ∘ kinetic(dt/2),
//!
//! with the kinetic factor the exact Fourier multiplier e^{−iτ|k|²dt/2}
//! and the phase factor the exact pointwise flow of the potential plus
//! logarithmic nonlinearity (which preserves |ψ| node by node). When a
//! transport phase provider is present the phase factor is split
//! symmetrically around the innermost pushforward sub-step:
//! phase(dt/2) ∘ transport(dt) ∘ phase(dt/2). All sub-steps are unitary
//! up to the interpolation error of the transport sub-step.

use std::sync::Arc;

use num_complex::Complex64;

use crate::eikonal::EikonalSolution;
use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::phase::SmoothPhase;
use crate::potential::PotentialFamily;
use crate::schedule::ControlSchedule;
use crate::transport::{pushforward, InterpKind, VectorField};

/// Time-dependent smooth phase s ↦ φ(s,·) driving the transport term.
#[derive(Debug, Clone)]
pub enum PhaseProvider {
    /// Autonomous transport along ∇φ with a fixed phase.
    Static(SmoothPhase),
    /// Eikonal phase φ(s,·); valid on the contraction window only.
    Eikonal(Arc<EikonalSolution>),
}

impl PhaseProvider {
    /// ∇φ(s,·) as a vector field frozen at time s.
    pub fn gradient_at(&self, s: f64) -> VectorField {
        match self {
            PhaseProvider::Static(p) => VectorField::Gradient(p.clone()),
            PhaseProvider::Eikonal(sol) => {
                VectorField::EikonalSlice { solution: Arc::clone(sol), s }
            }
        }
    }

    /// Latest equation time the provider is valid for.
    pub fn horizon(&self) -> f64 {
        match self {
            PhaseProvider::Static(_) => f64::INFINITY,
            PhaseProvider::Eikonal(sol) => sol.s_max(),
        }
    }
}

/// Immutable solver configuration, shareable across runs.
#[derive(Debug, Clone)]
pub struct SolverContext {
    pub potentials: PotentialFamily,
    /// Nonlinearity strength λ.
    pub lambda: f64,
    /// Regularization floor ε ≥ 0 inside log(ε + |ψ|²); ε = 0 uses the
    /// 0·log 0 := 0 convention (nodes with ψ = 0 stay 0).
    pub epsilon: f64,
    /// Semiclassical scale τ > 0; 1 for the physical equation.
    pub tau: f64,
    pub phase_provider: Option<PhaseProvider>,
    /// Default timestep.
    pub dt: f64,
    pub interp: InterpKind,
}

impl SolverContext {
    pub fn new(potentials: PotentialFamily, lambda: f64, dt: f64) -> Self {
        SolverContext {
            potentials,
            lambda,
            epsilon: 0.0,
            tau: 1.0,
            phase_provider: None,
            dt,
            interp: InterpKind::Spectral,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_phase_provider(mut self, p: PhaseProvider) -> Self {
        self.phase_provider = Some(p);
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.tau <= 0.0 || self.dt <= 0.0 || self.epsilon < 0.0 {
            return Err(Error::InvalidParam(format!(
                "need tau > 0, dt > 0, epsilon >= 0 (got tau={}, dt={}, eps={})",
                self.tau, self.dt, self.epsilon
            )));
        }
        Ok(())
    }

    /// Scaled potential τ(V + Σ u_j W_j) on the grid nodes.
    fn total_potential(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.potentials.num_controls() && !u.is_empty() {
            return Err(Error::InvalidParam(format!(
                "control vector has {} entries, family has {} fields",
                u.len(),
                self.potentials.num_controls()
            )));
        }
        let mut v: Vec<f64> = self.potentials.drift_values.clone();
        for (j, &uj) in u.iter().enumerate() {
            if uj == 0.0 {
                continue;
            }
            for (vi, wi) in v.iter_mut().zip(&self.potentials.controls[j].values) {
                *vi += uj * wi;
            }
        }
        for vi in v.iter_mut() {
            *vi *= self.tau;
        }
        Ok(v)
    }
}

/// Exact flow of i∂_tψ = (V_total + λ log(ε + |ψ|²))ψ over dt_eff:
/// ψ ↦ ψ·exp(−i dt_eff (V_total + λ log(ε + |ψ|²))). Preserves |ψ|
/// pointwise; nodes with ψ = 0 stay 0 when ε = 0.
pub fn log_phase_step(
    psi: &mut WaveField,
    dt_eff: f64,
    v_total: &[f64],
    lambda: f64,
    epsilon: f64,
) {
    for (v, &pot) in psi.values_mut().iter_mut().zip(v_total) {
        let m2 = v.norm_sqr();
        if m2 == 0.0 && epsilon == 0.0 {
            continue;
        }
        let angle = -dt_eff * (pot + lambda * (epsilon + m2).ln());
        *v *= Complex64::new(0.0, angle).exp();
    }
}

fn kinetic_half(psi: &mut WaveField, tau: f64, dt: f64, check: bool) -> Result<()> {
    let grid = psi.grid().clone();
    let d = grid.dim();
    let n = grid.n();
    grid.fft_forward(psi.values_mut());
    if check {
        // Nyquist guard on the spectrum already in hand
        let mut top = 0.0;
        let mut total = 0.0;
        let mut mi = [0usize; 3];
        for (idx, v) in psi.values().iter().enumerate() {
            grid.unravel(idx, &mut mi[..d]);
            let p = v.norm_sqr();
            total += p;
            if mi[..d].iter().any(|&i| {
                let m = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
                m.unsigned_abs() as usize >= n / 4
            }) {
                top += p;
            }
        }
        let frac = if total > 0.0 { top / total } else { 0.0 };
        if frac > crate::field::NYQUIST_GUARD {
            return Err(Error::NyquistGuard(frac));
        }
    }
    let mut k = [0.0f64; 3];
    for (idx, v) in psi.values_mut().iter_mut().enumerate() {
        grid.wavenumber(idx, &mut k[..d]);
        let k2: f64 = k[..d].iter().map(|q| q * q).sum();
        *v *= Complex64::new(0.0, -tau * k2 * dt / 4.0).exp();
    }
    grid.fft_inverse(psi.values_mut());
    Ok(())
}

fn step_kernel(
    psi: &mut WaveField,
    s: f64,
    dt: f64,
    v_total: &[f64],
    ctx: &SolverContext,
) -> Result<()> {
    kinetic_half(psi, ctx.tau, dt, true)?;
    let lambda_eff = ctx.tau * ctx.lambda;
    match &ctx.phase_provider {
        None => log_phase_step(psi, dt, v_total, lambda_eff, ctx.epsilon),
        Some(provider) => {
            log_phase_step(psi, dt / 2.0, v_total, lambda_eff, ctx.epsilon);
            // transport along ∇φ frozen at the midpoint: exact generator
            // is −𝒯_{∇φ(s)}, whose flow is the pushforward at time −dt
            let field = provider.gradient_at(s + dt / 2.0);
            *psi = pushforward(&field, -dt, psi, ctx.interp)?;
            log_phase_step(psi, dt / 2.0, v_total, lambda_eff, ctx.epsilon);
        }
    }
    kinetic_half(psi, ctx.tau, dt, false)?;
    Ok(())
}

/// One Strang step of size dt starting at equation time t.
pub fn strang_step_dt(
    psi: &WaveField,
    t: f64,
    dt: f64,
    ctx: &SolverContext,
    u_now: &[f64],
) -> Result<WaveField> {
    ctx.validate()?;
    let v = ctx.total_potential(u_now)?;
    let mut out = psi.clone();
    step_kernel(&mut out, t, dt, &v, ctx)?;
    Ok(out)
}

/// One Strang step of size ctx.dt starting at equation time t.
pub fn strang_step(
    psi: &WaveField,
    t: f64,
    ctx: &SolverContext,
    u_now: &[f64],
) -> Result<WaveField> {
    strang_step_dt(psi, t, ctx.dt, ctx, u_now)
}

/// Observer invoked after every accepted step with (time, state).
pub type Observer<'a> = &'a mut dyn FnMut(f64, &WaveField);

/// Evolve ψ₀ through the whole schedule. Each interval is subdivided
/// into equal steps of size ≤ ctx.dt.
pub fn evolve(psi0: &WaveField, schedule: &ControlSchedule, ctx: &SolverContext) -> Result<WaveField> {
    evolve_observed(psi0, schedule, ctx, &mut |_, _| {})
}

pub fn evolve_observed(
    psi0: &WaveField,
    schedule: &ControlSchedule,
    ctx: &SolverContext,
    observer: Observer,
) -> Result<WaveField> {
    ctx.validate()?;
    if let Some(p) = &ctx.phase_provider {
        if schedule.duration() > p.horizon() + 1e-12 {
            return Err(Error::InvalidParam(format!(
                "schedule duration {} exceeds phase-provider horizon {}",
                schedule.duration(),
                p.horizon()
            )));
        }
    }
    let mut psi = psi0.clone();
    observer(0.0, &psi);
    for (t0, t1, u) in schedule.intervals() {
        let v = ctx.total_potential(u)?;
        let len = t1 - t0;
        let n_steps = (len / ctx.dt - 1e-12).ceil().max(1.0) as usize;
        let dt = len / n_steps as f64;
        for k in 0..n_steps {
            let s = t0 + k as f64 * dt;
            step_kernel(&mut psi, s, dt, &v, ctx)?;
            observer(s + dt, &psi);
        }
    }
    Ok(psi)
}

/// Solve the transport-augmented equation
/// (i∂_s + (τ/2)Δ − τV + i𝒯_{∇φ(s)})a = τλ a log|a|² up to s_end.
///
/// With a static provider this is the autonomous equation; a
/// time-varying (eikonal) provider must cover [0, s_end].
pub fn solve_r(
    psi0: &WaveField,
    s_end: f64,
    tau: f64,
    provider: Option<PhaseProvider>,
    ctx: &SolverContext,
) -> Result<WaveField> {
    let mut rctx = ctx.clone().with_tau(tau);
    rctx.phase_provider = provider;
    if let Some(p) = &rctx.phase_provider {
        if s_end > p.horizon() + 1e-12 {
            return Err(Error::InvalidParam(format!(
                "s_end = {s_end} reaches past the contraction window {}",
                p.horizon()
            )));
        }
    }
    if s_end == 0.0 {
        return Ok(psi0.clone());
    }
    let schedule = ControlSchedule::zero(rctx.potentials.num_controls(), s_end);
    evolve(psi0, &schedule, &rctx)
}

/// Pointwise inequality behind uniqueness and Lipschitz stability of the
/// logarithmic nonlinearity:
/// |Im((conj(z₂)−conj(z₁))(z₂ log|z₂|² − z₁ log|z₁|²))| ≤ 2|z₁−z₂|²,
/// with the 0·log 0 := 0 convention. Returns (lhs, rhs).
pub fn log_nonlinearity_inequality(z1: Complex64, z2: Complex64) -> (f64, f64) {
    let nl = |z: Complex64| {
        let m2 = z.norm_sqr();
        if m2 == 0.0 {
            Complex64::default()
        } else {
            z * m2.ln()
        }
    };
    let lhs = ((z2.conj() - z1.conj()) * (nl(z2) - nl(z1))).im.abs();
    let rhs = 2.0 * (z1 - z2).norm_sqr();
    (lhs, rhs)
}
