//! Exact Gaussian wavepacket dynamics and Gaussian-set projection.
//!
//! For quadratic drifts and linear/quadratic controls, Gaussian data
//! ψ(t,x) = e^{−a(t)|x|²/2 + b(t)·x + c(t)} stay Gaussian; the
//! coefficients obey the closed ODE system
//!
//!   i ȧ = a² + 2λ Re a − (u₀ + v₂),
//!   i ḃ = a b + 2λ Re b + (u + v₁),
//!   i ċ = (d/2) a − ½ Σ_j b_j² + 2λ Re c + v₀,
//!
//! for V(x) = v₂|x|²/2 + v₁·x + v₀ and controls u₀(t)·|x|²/2 + u(t)·x.
//! Re a stays positive along the flow, so the solution never leaves L².
//!
//! The set 𝒢 of normalized Gaussians (isotropic scalar a) is the
//! obstruction to controllability under this control class; the
//! distance of an arbitrary state to 𝒢 is computed by multistart
//! Nelder-Mead over (log Re a, Im a, Re b, Im b), with Re c pinned by
//! normalization and the global phase removed by taking the overlap
//! modulus.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::grid::{Geometry, Grid};
use crate::optimize::{nelder_mead, SimplexOptions};
use crate::potential::DriftPotential;
use crate::rng::substream;
use crate::schedule::ControlSchedule;

/// Complex coefficient triple of e^{−a|x|²/2 + b·x + c}, Re a > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParams {
    pub a: Complex64,
    pub b: Vec<Complex64>,
    pub c: Complex64,
}

impl GaussianParams {
    pub fn new(a: Complex64, b: Vec<Complex64>, c: Complex64) -> Result<Self> {
        if a.re <= 0.0 {
            return Err(Error::InvalidParam(format!("need Re(a) > 0, got {}", a.re)));
        }
        Ok(GaussianParams { a, b, c })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Normalized standard Gaussian: a = 1, b = 0, c = −(d/4)·log π.
    pub fn standard(dim: usize) -> Self {
        GaussianParams {
            a: Complex64::new(1.0, 0.0),
            b: vec![Complex64::default(); dim],
            c: Complex64::new(-(dim as f64 / 4.0) * std::f64::consts::PI.ln(), 0.0),
        }
    }

    /// Closed-form L² mass: e^{2Re c} (π/Re a)^{d/2} e^{|Re b|²/Re a}.
    pub fn mass(&self) -> f64 {
        let d = self.dim() as f64;
        let rb2: f64 = self.b.iter().map(|v| v.re * v.re).sum();
        (2.0 * self.c.re).exp()
            * (std::f64::consts::PI / self.a.re).powf(d / 2.0)
            * (rb2 / self.a.re).exp()
    }

    pub fn is_normalized(&self) -> bool {
        (self.mass() - 1.0).abs() < 1e-8
    }

    /// Adjust Re c so the mass is exactly 1.
    pub fn normalized(mut self) -> Self {
        let d = self.dim() as f64;
        let rb2: f64 = self.b.iter().map(|v| v.re * v.re).sum();
        let re_c =
            -(d / 4.0) * (std::f64::consts::PI / self.a.re).ln() - rb2 / (2.0 * self.a.re);
        self.c = Complex64::new(re_c, self.c.im);
        self
    }

    /// Center of mass Re b / Re a.
    pub fn center(&self) -> Vec<f64> {
        self.b.iter().map(|v| v.re / self.a.re).collect()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        let bx: Complex64 = self.b.iter().zip(x).map(|(bi, &xi)| bi * xi).sum();
        (-self.a * r2 / 2.0 + bx + self.c).exp()
    }
}

/// Quadratic drift V = v₂|x|²/2 + v₁·x + v₀ entering the coefficient ODEs.
#[derive(Debug, Clone, Default)]
pub struct QuadraticDrift {
    pub v2: f64,
    pub v1: Vec<f64>,
    pub v0: f64,
}

impl QuadraticDrift {
    pub fn none(dim: usize) -> Self {
        QuadraticDrift { v2: 0.0, v1: vec![0.0; dim], v0: 0.0 }
    }
}

fn ode_rhs(
    a: Complex64,
    b: &[Complex64],
    c: Complex64,
    lambda: f64,
    u0: f64,
    u: &[f64],
    drift: &QuadraticDrift,
) -> (Complex64, Vec<Complex64>, Complex64) {
    let i = Complex64::i();
    let d = b.len() as f64;
    let da = -i * (a * a + 2.0 * lambda * a.re - (u0 + drift.v2));
    let db: Vec<Complex64> = b
        .iter()
        .zip(u.iter().zip(&drift.v1))
        .map(|(bj, (&uj, &vj))| -i * (a * bj + 2.0 * lambda * bj.re + (uj + vj)))
        .collect();
    let b2: Complex64 = b.iter().map(|v| v * v).sum();
    let dc = -i * (d / 2.0 * a - 0.5 * b2 + 2.0 * lambda * c.re + drift.v0);
    (da, db, dc)
}

fn rk4_step(
    state: &mut GaussianParams,
    dt: f64,
    lambda: f64,
    u0: f64,
    u: &[f64],
    drift: &QuadraticDrift,
) {
    let d = state.dim();
    let add = |p: &GaussianParams, k: &(Complex64, Vec<Complex64>, Complex64), h: f64| {
        let mut q = p.clone();
        q.a += h * k.0;
        for j in 0..d {
            q.b[j] += h * k.1[j];
        }
        q.c += h * k.2;
        q
    };
    let k1 = ode_rhs(state.a, &state.b, state.c, lambda, u0, u, drift);
    let s2 = add(state, &k1, dt / 2.0);
    let k2 = ode_rhs(s2.a, &s2.b, s2.c, lambda, u0, u, drift);
    let s3 = add(state, &k2, dt / 2.0);
    let k3 = ode_rhs(s3.a, &s3.b, s3.c, lambda, u0, u, drift);
    let s4 = add(state, &k3, dt);
    let k4 = ode_rhs(s4.a, &s4.b, s4.c, lambda, u0, u, drift);
    state.a += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
    for j in 0..d {
        state.b[j] += dt / 6.0 * (k1.1[j] + 2.0 * k2.1[j] + 2.0 * k3.1[j] + k4.1[j]);
    }
    state.c += dt / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2);
}

/// One RK4 step with the 10% |a|-change guard: a step that moves |a| by
/// more than 10% is re-done as two half steps (recursively).
fn guarded_step(
    state: &mut GaussianParams,
    dt: f64,
    lambda: f64,
    u0: f64,
    u: &[f64],
    drift: &QuadraticDrift,
    depth: usize,
) -> Result<()> {
    let before = state.clone();
    rk4_step(state, dt, lambda, u0, u, drift);
    let rel = (state.a - before.a).norm() / before.a.norm().max(1e-300);
    if rel <= 0.1 {
        return Ok(());
    }
    if depth >= 24 {
        return Err(Error::InvalidParam(
            "Gaussian ODE step refinement exceeded depth 24".into(),
        ));
    }
    *state = before;
    guarded_step(state, dt / 2.0, lambda, u0, u, drift, depth + 1)?;
    guarded_step(state, dt / 2.0, lambda, u0, u, drift, depth + 1)
}

/// Integrate the coefficient ODEs to time T under piecewise-constant
/// quadratic (u₀, one channel) and linear (u, d channels) controls.
pub fn integrate_gaussian(
    params0: &GaussianParams,
    u0: Option<&ControlSchedule>,
    u: Option<&ControlSchedule>,
    lambda: f64,
    t_end: f64,
    dt: f64,
    drift: &QuadraticDrift,
) -> Result<GaussianParams> {
    let mut out = params0.clone();
    integrate_gaussian_observed(&mut out, u0, u, lambda, t_end, dt, drift, &mut |_, _| {})?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn integrate_gaussian_observed(
    state: &mut GaussianParams,
    u0: Option<&ControlSchedule>,
    u: Option<&ControlSchedule>,
    lambda: f64,
    t_end: f64,
    dt: f64,
    drift: &QuadraticDrift,
    observer: &mut dyn FnMut(f64, &GaussianParams),
) -> Result<()> {
    if state.a.re <= 0.0 {
        return Err(Error::InvalidParam("need Re(a0) > 0".into()));
    }
    if dt <= 0.0 || t_end < 0.0 {
        return Err(Error::InvalidParam("need dt > 0 and T >= 0".into()));
    }
    let d = state.dim();
    // breakpoints of both schedules partition [0, T]
    let mut cuts: Vec<f64> = vec![0.0, t_end];
    for s in [u0, u].into_iter().flatten() {
        for (t0, t1, _) in s.intervals() {
            for t in [t0, t1] {
                if t > 0.0 && t < t_end {
                    cuts.push(t);
                }
            }
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    observer(0.0, state);
    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let mid = 0.5 * (t0 + t1);
        let u0_now = u0.map_or(0.0, |s| s.value_at(mid).first().copied().unwrap_or(0.0));
        let u_now = u.map_or(vec![0.0; d], |s| s.value_at(mid));
        if u_now.len() != d {
            return Err(Error::InvalidParam(format!(
                "linear control has {} channels, need {d}",
                u_now.len()
            )));
        }
        let steps = ((t1 - t0) / dt).ceil().max(1.0) as usize;
        let h = (t1 - t0) / steps as f64;
        for k in 0..steps {
            guarded_step(state, h, lambda, u0_now, &u_now, drift, 0)?;
            observer(t0 + (k + 1) as f64 * h, state);
        }
    }
    if state.a.re <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "Re(a) = {} went nonpositive; integration is unreliable",
            state.a.re
        )));
    }
    Ok(())
}

/// Sample the Gaussian on a box grid. Errors if the boundary shell
/// carries more than the allowed mass.
pub fn gaussian_field(params: &GaussianParams, grid: &Grid) -> Result<WaveField> {
    match grid.geometry() {
        Geometry::Box { .. } => {}
        Geometry::Torus { .. } => {
            return Err(Error::GeometryMismatch {
                family: "gaussian_field".into(),
                geometry: "torus".into(),
            })
        }
    }
    if params.dim() != grid.dim() {
        return Err(Error::InvalidParam("parameter/grid dimension mismatch".into()));
    }
    let field = WaveField::from_fn(grid, |x| params.eval(x));
    field.check_boundary()?;
    Ok(field)
}

/// Result of the Gaussian-set projection.
#[derive(Debug, Clone)]
pub struct GaussianFit {
    pub distance: f64,
    pub best: GaussianParams,
    pub overlap: f64,
    /// False when no multistart converged; the reported value is still a
    /// certified upper bound on the true distance.
    pub converged: bool,
}

/// Moment-matched initial guess: center ⟨x⟩, variance → Re a,
/// mean momentum Im⟨ψ̄∇ψ⟩ → Im b.
fn moment_guess(psi: &WaveField) -> Vec<f64> {
    let grid = psi.grid();
    let d = grid.dim();
    let w = grid.quad_weight();
    let mut mean = vec![0.0; d];
    let mut mass = 0.0;
    grid.for_each_node(|i, x| {
        let p = psi.values()[i].norm_sqr();
        mass += p;
        for a in 0..d {
            mean[a] += x[a] * p;
        }
    });
    for m in mean.iter_mut() {
        *m /= mass.max(1e-300);
    }
    let mut var = 0.0;
    grid.for_each_node(|i, x| {
        let p = psi.values()[i].norm_sqr();
        for a in 0..d {
            var += (x[a] - mean[a]) * (x[a] - mean[a]) * p;
        }
    });
    var /= (mass * d as f64).max(1e-300);
    let re_a = (1.0 / (2.0 * var.max(1e-6))).max(1e-3);
    // mean momentum per axis: Im⟨ψ, ∂_aψ⟩ (unit-norm ψ)
    let mut p_mean = vec![0.0; d];
    for a in 0..d {
        let grad = psi.gradient_axis(a);
        p_mean[a] = psi.inner(&grad).map(|v| v.im).unwrap_or(0.0) * w / w; // already weighted
    }
    let mut theta = vec![0.0; 2 + 2 * d];
    theta[0] = re_a.ln();
    theta[1] = 0.0;
    for a in 0..d {
        theta[2 + a] = re_a * mean[a]; // Re b
        theta[2 + d + a] = p_mean[a]; // Im b
    }
    theta
}

fn params_from_theta(theta: &[f64], d: usize) -> GaussianParams {
    let a = Complex64::new(theta[0].exp(), theta[1]);
    let b: Vec<Complex64> =
        (0..d).map(|j| Complex64::new(theta[2 + j], theta[2 + d + j])).collect();
    GaussianParams { a, b, c: Complex64::default() }.normalized()
}

/// Distance to the set of normalized Gaussian states:
/// min over 𝒢 of sqrt(2 − 2|⟨g,ψ⟩|), a certified upper bound on the
/// true distance (the optimization may be local). Deterministic for a
/// given seed: multistarts are seeded substreams, ties broken by start
/// index.
pub fn dist_to_gaussian(psi: &WaveField, multistarts: usize, seed: u64) -> Result<GaussianFit> {
    let n = psi.norm();
    if (n - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParam(format!("dist_to_gaussian needs unit norm, got {n}")));
    }
    let grid = psi.grid().clone();
    let d = grid.dim();
    let objective = |theta: &[f64]| -> f64 {
        if theta[0] < -12.0 || theta[0] > 12.0 {
            return 1.0; // overlap lower bound; keeps Re a in a sane range
        }
        let g = params_from_theta(theta, d);
        let gf = WaveField::from_fn(&grid, |x| g.eval(x));
        let ov = gf.inner(psi).map(|v| v.norm()).unwrap_or(0.0);
        -ov
    };
    let base = moment_guess(psi);
    let mut best: Option<(f64, usize, Vec<f64>, bool)> = None;
    for start in 0..multistarts.max(1) {
        let mut theta = base.clone();
        if start > 0 {
            let mut rng = substream(seed, start as u64);
            for (i, t) in theta.iter_mut().enumerate() {
                let scale = if i == 0 { 0.8 } else { 0.6 };
                *t += rng.gen_range(-scale..scale);
            }
        }
        let mut opts = SimplexOptions::new(theta.len());
        opts.max_iters = 800;
        opts.scale = vec![0.05; theta.len()];
        let res = nelder_mead(objective, &theta, &opts);
        let better = match &best {
            None => true,
            Some((f, _, _, _)) => res.fx < *f - 1e-15,
        };
        if better {
            best = Some((res.fx, start, res.x, res.converged));
        }
    }
    let (fx, _, x, converged) = best.unwrap();
    let overlap = (-fx).clamp(0.0, 1.0);
    Ok(GaussianFit {
        distance: (2.0 - 2.0 * overlap).max(0.0).sqrt(),
        best: params_from_theta(&x, d),
        overlap,
        converged,
    })
}

/// Classical trajectory (q, p, θ) of the coherent-state decomposition:
/// q̇ = p, ṗ = −∇V(q) − u, θ̇ = q·∇V(q) − V(q) − ½|p|², from (0,0,0).
#[derive(Debug, Clone)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
}

impl ClassicalTrajectory {
    pub fn at(&self, idx: usize) -> (&[f64], &[f64], f64) {
        (&self.q[idx], &self.p[idx], self.theta[idx])
    }
}

pub fn classical_trajectory(
    v: &DriftPotential,
    u: Option<&ControlSchedule>,
    dim: usize,
    t_end: f64,
    dt: f64,
) -> Result<ClassicalTrajectory> {
    if dt <= 0.0 || t_end < 0.0 {
        return Err(Error::InvalidParam("need dt > 0 and T >= 0".into()));
    }
    let mut ts = vec![0.0];
    let mut qs = vec![vec![0.0; dim]];
    let mut ps = vec![vec![0.0; dim]];
    let mut thetas = vec![0.0];

    let rhs = |q: &[f64], p: &[f64], u_now: &[f64]| {
        let mut gv = vec![0.0; dim];
        v.grad(q, &mut gv);
        let dq = p.to_vec();
        let dp: Vec<f64> = (0..dim).map(|a| -gv[a] - u_now[a]).collect();
        let dtheta = q.iter().zip(&gv).map(|(a, b)| a * b).sum::<f64>()
            - v.eval(q)
            - 0.5 * p.iter().map(|c| c * c).sum::<f64>();
        (dq, dp, dtheta)
    };

    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let mut q = vec![0.0; dim];
    let mut p = vec![0.0; dim];
    let mut theta = 0.0;
    for k in 0..steps {
        let t = k as f64 * h;
        let u_now = u.map_or(vec![0.0; dim], |s| s.value_at(t + h / 2.0));
        let (k1q, k1p, k1t) = rhs(&q, &p, &u_now);
        let q2: Vec<f64> = (0..dim).map(|a| q[a] + 0.5 * h * k1q[a]).collect();
        let p2: Vec<f64> = (0..dim).map(|a| p[a] + 0.5 * h * k1p[a]).collect();
        let (k2q, k2p, k2t) = rhs(&q2, &p2, &u_now);
        let q3: Vec<f64> = (0..dim).map(|a| q[a] + 0.5 * h * k2q[a]).collect();
        let p3: Vec<f64> = (0..dim).map(|a| p[a] + 0.5 * h * k2p[a]).collect();
        let (k3q, k3p, k3t) = rhs(&q3, &p3, &u_now);
        let q4: Vec<f64> = (0..dim).map(|a| q[a] + h * k3q[a]).collect();
        let p4: Vec<f64> = (0..dim).map(|a| p[a] + h * k3p[a]).collect();
        let (k4q, k4p, k4t) = rhs(&q4, &p4, &u_now);
        for a in 0..dim {
            q[a] += h / 6.0 * (k1q[a] + 2.0 * k2q[a] + 2.0 * k3q[a] + k4q[a]);
            p[a] += h / 6.0 * (k1p[a] + 2.0 * k2p[a] + 2.0 * k3p[a] + k4p[a]);
        }
        theta += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        ts.push(t + h);
        qs.push(q.clone());
        ps.push(p.clone());
        thetas.push(theta);
    }
    Ok(ClassicalTrajectory { times: ts, q: qs, p: ps, theta: thetas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn standard_gaussian_is_normalized() {
        for d in 1..=2 {
            let g = GaussianParams::standard(d);
            assert!(g.is_normalized(), "mass {}", g.mass());
        }
    }

    #[test]
    fn riccati_free_solution_matches_closed_form() {
        // λ = 0, u = 0, a₀ = 1: iȧ = a² ⟹ a(t) = 1/(1 + it)
        let g0 = GaussianParams::standard(1);
        let drift = QuadraticDrift::none(1);
        for &t in &[0.25, 0.5, 1.0] {
            let g = integrate_gaussian(&g0, None, None, 0.0, t, 1e-4, &drift).unwrap();
            let expect = Complex64::new(1.0, 0.0) / Complex64::new(1.0, t);
            assert!((g.a - expect).norm() < 1e-10, "a({t}) = {} vs {}", g.a, expect);
        }
    }

    #[test]
    fn stationary_point_of_driven_riccati() {
        // u₀ ≡ ω², a₀ = ω: iȧ = a² − u₀ = 0
        let omega = 1.7f64;
        let g0 = GaussianParams::new(
            Complex64::new(omega, 0.0),
            vec![Complex64::default()],
            Complex64::default(),
        )
        .unwrap()
        .normalized();
        let u0 = ControlSchedule::constant(vec![omega * omega], 1.0).unwrap();
        let g = integrate_gaussian(&g0, Some(&u0), None, 0.0, 1.0, 1e-3, &QuadraticDrift::none(1))
            .unwrap();
        assert!((g.a - g0.a).norm() < 1e-10);
    }

    #[test]
    fn mass_conserved_under_random_controls() {
        let mut rng = seeded(19);
        let g0 = GaussianParams::standard(1);
        let drift = QuadraticDrift::none(1);
        for _ in 0..3 {
            let cuts = [0.0, 0.17, 0.42, 0.8];
            let u0 = ControlSchedule::new(
                cuts.to_vec(),
                (0..3).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect(),
            )
            .unwrap();
            let u = ControlSchedule::new(
                cuts.to_vec(),
                (0..3).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect(),
            )
            .unwrap();
            let mut state = g0.clone();
            let mut worst: f64 = 0.0;
            integrate_gaussian_observed(
                &mut state,
                Some(&u0),
                Some(&u),
                -1.0,
                0.8,
                1e-4,
                &drift,
                &mut |_, g| {
                    worst = worst.max((g.mass() - 1.0).abs());
                },
            )
            .unwrap();
            assert!(worst < 1e-6, "mass drift {worst}");
            assert!(state.a.re > 0.0);
        }
    }

    #[test]
    fn gaussian_field_norm_matches_closed_form() {
        let grid = Grid::boxed(1, 12.0, 256).unwrap();
        let mut rng = seeded(3);
        for _ in 0..5 {
            let g = GaussianParams::new(
                Complex64::new(rng.gen_range(0.4..2.0), rng.gen_range(-0.5..0.5)),
                vec![Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))],
                Complex64::default(),
            )
            .unwrap()
            .normalized();
            let f = gaussian_field(&g, &grid).unwrap();
            assert!((f.norm() - 1.0).abs() < 1e-8, "discrete norm {}", f.norm());
        }
    }

    #[test]
    fn gaussian_field_imaginary_c_shift_same_modulus() {
        let grid = Grid::boxed(1, 12.0, 128).unwrap();
        let g = GaussianParams::standard(1);
        let mut shifted = g.clone();
        shifted.c += Complex64::new(0.0, 1.3);
        let f0 = gaussian_field(&g, &grid).unwrap();
        let f1 = gaussian_field(&shifted, &grid).unwrap();
        for (a, b) in f0.values().iter().zip(f1.values()) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn gaussian_field_rejects_torus_and_wide_packets() {
        let torus = Grid::torus(1, 64).unwrap();
        assert!(gaussian_field(&GaussianParams::standard(1), &torus).is_err());
        let small = Grid::boxed(1, 2.0, 64).unwrap();
        assert!(gaussian_field(&GaussianParams::standard(1), &small).is_err());
    }

    #[test]
    fn dist_to_gaussian_of_member_is_tiny() {
        let grid = Grid::boxed(1, 12.0, 256).unwrap();
        let g = GaussianParams::new(
            Complex64::new(0.8, 0.3),
            vec![Complex64::new(0.4, -0.6)],
            Complex64::default(),
        )
        .unwrap()
        .normalized();
        let psi = gaussian_field(&g, &grid).unwrap();
        let fit = dist_to_gaussian(&psi, 4, 7).unwrap();
        assert!(fit.distance < 1e-6, "distance {}", fit.distance);
        // global phase changes nothing
        let mut rotated = psi.clone();
        rotated.scale(Complex64::new(0.0, 1.1).exp());
        let fit2 = dist_to_gaussian(&rotated, 4, 7).unwrap();
        assert!((fit.distance - fit2.distance).abs() < 1e-7);
    }

    #[test]
    fn dist_to_gaussian_two_bumps() {
        // even superposition of unit Gaussians at ±5: best single Gaussian
        // overlap is 1/√2 (+O(e^{−25})), so dist ≈ sqrt(2 − √2).
        let grid = Grid::boxed(1, 16.0, 512).unwrap();
        let bump = |x: f64, q: f64| (-(x - q) * (x - q) / 2.0).exp();
        let psi = WaveField::normalized_from_fn(&grid, |x| {
            Complex64::new(bump(x[0], 5.0) + bump(x[0], -5.0), 0.0)
        })
        .unwrap();

        // brute-force oracle: scan centered/shifted candidates
        let mut best_overlap: f64 = 0.0;
        for iq in -40..=40 {
            let q = iq as f64 * 0.25;
            for is in 1..=40 {
                let s = is as f64 * 0.1; // Re a
                let g = GaussianParams::new(
                    Complex64::new(s, 0.0),
                    vec![Complex64::new(s * q, 0.0)],
                    Complex64::default(),
                )
                .unwrap()
                .normalized();
                let gf = WaveField::from_fn(&grid, |x| g.eval(x));
                let ov = gf.inner(&psi).unwrap().norm();
                best_overlap = best_overlap.max(ov);
            }
        }
        let oracle = (2.0 - 2.0 * best_overlap).max(0.0).sqrt();
        assert!((oracle - (2.0 - 2.0f64.sqrt()).sqrt()).abs() < 1e-3, "oracle {oracle}");

        let fit = dist_to_gaussian(&psi, 8, 11).unwrap();
        assert!(
            (fit.distance - oracle).abs() < 2e-3,
            "fitted {} vs oracle {oracle}",
            fit.distance
        );
    }

    #[test]
    fn classical_trajectory_free_and_constant_force() {
        let t = classical_trajectory(&DriftPotential::Zero, None, 1, 1.0, 1e-3).unwrap();
        assert!(t.q.last().unwrap()[0].abs() < 1e-14);
        assert!(t.theta.last().unwrap().abs() < 1e-14);

        // u ≡ −1: p(t) = t, q(t) = t²/2
        let u = ControlSchedule::constant(vec![-1.0], 1.0).unwrap();
        let t = classical_trajectory(&DriftPotential::Zero, Some(&u), 1, 1.0, 1e-3).unwrap();
        let (q, p, _) = t.at(t.times.len() - 1);
        assert!((p[0] - 1.0).abs() < 1e-10);
        assert!((q[0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn driven_harmonic_oscillator_closed_form() {
        // V = x²/2, u ≡ −1: q̈ = −q + 1 ⟹ q = 1 − cos t, p = sin t
        let u = ControlSchedule::constant(vec![-1.0], 2.0).unwrap();
        let v = DriftPotential::Quadratic { curv: 1.0 };
        let t = classical_trajectory(&v, Some(&u), 1, 2.0, 1e-4).unwrap();
        let (q, p, _) = t.at(t.times.len() - 1);
        assert!((q[0] - (1.0 - 2.0f64.cos())).abs() < 1e-8);
        assert!((p[0] - 2.0f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn trajectory_velocity_consistency() {
        // q̇ = p under finite differencing at the lattice scale
        let u = ControlSchedule::constant(vec![0.3], 1.0).unwrap();
        let v = DriftPotential::QuadraticPlusCos;
        let t = classical_trajectory(&v, Some(&u), 1, 1.0, 1e-3).unwrap();
        for k in 1..t.times.len() - 1 {
            let dq = (t.q[k + 1][0] - t.q[k - 1][0]) / (t.times[k + 1] - t.times[k - 1]);
            assert!((dq - t.p[k][0]).abs() < 1e-6);
        }
    }
}
