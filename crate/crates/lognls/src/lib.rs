//! Simulation and control-synthesis laboratory for the bilinearly
//! controlled logarithmic nonlinear Schrödinger equation (log-NLS)
//!
//!   (i∂_t + ½Δ − V)ψ = λ ψ log|ψ|² + Σ_j u_j(t) W_j(x) ψ
//!
//! on the torus T^d and on a truncated box in R^d (periodic wrap).
//!
//! The crate is organized around the constructive ingredients of
//! small-time bilinear control of this equation:
//!
//! * [`grid`] / [`field`] — pseudospectral discretization, norms,
//!   phase-aligned distances.
//! * [`potential`] — drift and control potential families for both
//!   geometries.
//! * [`solver`] — Strang split-step evolution of the controlled
//!   equation, its τ-rescaled version and the transport-augmented
//!   equation.
//! * [`phase`] — closed-form smooth phases (trig polynomials, linear
//!   forms, Gaussian-envelope monomials) with exact derivatives.
//! * [`eikonal`] — the eikonal equation ∂_sφ + ½|∇φ|² = 0 solved by
//!   characteristics with certified inversion of x ↦ x + s∇φ(x).
//! * [`transport`] — transport generators 𝒯_f, ODE flows with Jacobian
//!   tracking and the norm-preserving pushforward unitary.
//! * [`synthesis`] — control plans (phase imprints, translations,
//!   squared-gradient maps, conjugated derivatives, Trotter products)
//!   compiled to piecewise-constant schedules and scored against ideal
//!   target maps.
//! * [`gaussian`] — exact Gaussian wavepacket dynamics under
//!   linear/quadratic controls, Gaussian-set distance by multistart
//!   simplex fitting, classical coherent-state trajectories.
//! * [`scenarios`] — the experiment registry: each named scenario runs
//!   a quantitative check, emits CSV and fits convergence rates.

pub mod config;
pub mod eikonal;
pub mod error;
pub mod field;
pub mod gaussian;
pub mod grid;
pub mod optimize;
pub mod phase;
pub mod potential;
pub mod rate;
pub mod rng;
pub mod scenarios;
pub mod schedule;
pub mod solver;
pub mod synthesis;
pub mod transport;

pub use error::{Error, Result};
pub use field::WaveField;
pub use grid::{Geometry, Grid};
pub use schedule::ControlSchedule;
