//! Transport generator 𝒯_f ψ = ⟨f,∇ψ⟩ + ½ div(f) ψ, ODE flows of
//! Lipschitz vector fields with Liouville Jacobian tracking, and the
//! norm-preserving pushforward unitary
//!
//!   (ℒ_P ψ)(x) = J_P(x)^{1/2} ψ(P(x)),  P = Φ_f^t,  J_P = det DP,
//!
//! which realizes e^{t𝒯_f}.

use std::sync::Arc;

use num_complex::Complex64;

use crate::eikonal::EikonalSolution;
use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::phase::SmoothPhase;

/// Globally Lipschitz smooth vector field with closed-form divergence
/// and Jacobian.
#[derive(Debug, Clone)]
pub enum VectorField {
    /// f(x) = c
    Constant(Vec<f64>),
    /// f(x)_a = diag_a · x_a
    LinearDiag(Vec<f64>),
    /// f = ∇φ
    Gradient(SmoothPhase),
    /// f = ∇φ(s,·) for an eikonal solution φ, frozen at time s
    EikonalSlice { solution: Arc<EikonalSolution>, s: f64 },
}

impl VectorField {
    pub fn dim(&self) -> usize {
        match self {
            VectorField::Constant(c) => c.len(),
            VectorField::LinearDiag(d) => d.len(),
            VectorField::Gradient(p) => p.dim(),
            VectorField::EikonalSlice { solution, .. } => solution.dim(),
        }
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        match self {
            VectorField::Constant(c) => out.copy_from_slice(c),
            VectorField::LinearDiag(d) => {
                for (o, (&di, &xi)) in out.iter_mut().zip(d.iter().zip(x)) {
                    *o = di * xi;
                }
            }
            VectorField::Gradient(p) => p.grad(x, out),
            VectorField::EikonalSlice { solution, s } => {
                let g = solution.grad(*s, x).expect("eikonal slice eval inside window");
                out.copy_from_slice(&g);
            }
        }
    }

    pub fn divergence(&self, x: &[f64]) -> f64 {
        match self {
            VectorField::Constant(_) => 0.0,
            VectorField::LinearDiag(d) => d.iter().sum(),
            VectorField::Gradient(p) => p.laplacian(x),
            VectorField::EikonalSlice { solution, s } => {
                solution.laplacian(*s, x).expect("eikonal slice div inside window")
            }
        }
    }

    /// Jacobian Df(x), row-major d×d.
    pub fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        out.fill(0.0);
        match self {
            VectorField::Constant(_) => {}
            VectorField::LinearDiag(diag) => {
                for a in 0..d {
                    out[a * d + a] = diag[a];
                }
            }
            VectorField::Gradient(p) => p.hessian(x, out),
            VectorField::EikonalSlice { solution, s } => {
                let h = solution.hessian(*s, x).expect("eikonal slice jacobian inside window");
                out.copy_from_slice(&h);
            }
        }
    }

    /// Global Lipschitz bound sup‖Df‖.
    pub fn lipschitz(&self) -> f64 {
        match self {
            VectorField::Constant(_) => 0.0,
            VectorField::LinearDiag(d) => d.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            VectorField::Gradient(p) => p.hess_sup(),
            VectorField::EikonalSlice { solution, s } => solution.hess_sup_at(*s),
        }
    }
}

/// 𝒯_f ψ with spectral gradients. Skew-adjoint: Re⟨𝒯_fψ, ψ⟩ = 0.
pub fn transport_apply(f: &VectorField, psi: &WaveField) -> Result<WaveField> {
    psi.check_resolved()?;
    let grid = psi.grid().clone();
    let d = grid.dim();
    let grads: Vec<WaveField> = (0..d).map(|a| psi.gradient_axis(a)).collect();
    let mut out = WaveField::zeros(grid.clone());
    let mut fv = vec![0.0; d];
    let values: Vec<Complex64> = {
        let mut vals = vec![Complex64::default(); grid.len()];
        grid.for_each_node(|i, x| {
            f.eval(x, &mut fv);
            let mut acc = Complex64::default();
            for a in 0..d {
                acc += fv[a] * grads[a].values()[i];
            }
            acc += 0.5 * f.divergence(x) * psi.values()[i];
            vals[i] = acc;
        });
        vals
    };
    out.values_mut().copy_from_slice(&values);
    Ok(out)
}

/// Flow Φ_f^t(x) with its Jacobian determinant, integrated by RK4 on
/// the state augmented with log J (Liouville: d/ds log J = div f).
pub fn flow_map(f: &VectorField, t: f64, x: &[f64]) -> (Vec<f64>, f64) {
    let d = f.dim();
    let lip = f.lipschitz();
    let h_cap = if lip > 0.0 { (0.1 / lip).min(0.01) } else { 0.01 };
    let n_sub = (t.abs() / h_cap).ceil().max(1.0) as usize;
    let h = t / n_sub as f64;
    let mut y = x.to_vec();
    let mut log_j = 0.0;

    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let mut tmp = vec![0.0; d];
    for _ in 0..n_sub {
        f.eval(&y, &mut k1);
        let d1 = f.divergence(&y);
        for a in 0..d {
            tmp[a] = y[a] + 0.5 * h * k1[a];
        }
        f.eval(&tmp, &mut k2);
        let d2 = f.divergence(&tmp);
        for a in 0..d {
            tmp[a] = y[a] + 0.5 * h * k2[a];
        }
        f.eval(&tmp, &mut k3);
        let d3 = f.divergence(&tmp);
        for a in 0..d {
            tmp[a] = y[a] + h * k3[a];
        }
        f.eval(&tmp, &mut k4);
        let d4 = f.divergence(&tmp);
        for a in 0..d {
            y[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        }
        log_j += h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
    }
    (y, log_j.exp())
}

/// Interpolation rule for ψ∘P.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterpKind {
    /// Trigonometric interpolation — spectrally accurate, O(N^d) per point.
    #[default]
    Spectral,
    /// Periodic cubic splines — O(1) per point after an O(N) setup (d = 1).
    Spline,
}

/// e^{t𝒯_f} ψ = J^{1/2} ψ∘Φ_f^t with the selected interpolation.
pub fn pushforward(f: &VectorField, t: f64, psi: &WaveField, interp: InterpKind) -> Result<WaveField> {
    psi.check_resolved()?;
    let grid = psi.grid().clone();
    let d = grid.dim();
    if t == 0.0 {
        return Ok(psi.clone());
    }
    let interpolator = Interpolator::new(psi, interp)?;
    let mut out = WaveField::zeros(grid.clone());
    let mut vals = vec![Complex64::default(); grid.len()];
    grid.for_each_node(|i, x| {
        let (y, jac) = flow_map(f, t, x);
        vals[i] = jac.sqrt() * interpolator.eval(&y);
        let _ = d;
    });
    out.values_mut().copy_from_slice(&vals);
    Ok(out)
}

/// Prepared interpolant of a wave field.
pub enum Interpolator<'a> {
    Spectral { psi: &'a WaveField, spec: Vec<Complex64> },
    Spline1D(PeriodicSpline),
}

impl<'a> Interpolator<'a> {
    pub fn new(psi: &'a WaveField, kind: InterpKind) -> Result<Self> {
        match kind {
            InterpKind::Spectral => Ok(Interpolator::Spectral { psi, spec: psi.spectrum() }),
            InterpKind::Spline => {
                if psi.grid().dim() != 1 {
                    return Err(Error::InvalidParam(
                        "spline interpolation implemented for d = 1 only".into(),
                    ));
                }
                Ok(Interpolator::Spline1D(PeriodicSpline::new(psi)))
            }
        }
    }

    pub fn eval(&self, point: &[f64]) -> Complex64 {
        match self {
            Interpolator::Spectral { psi, spec } => psi.eval_spectral(spec, point),
            Interpolator::Spline1D(sp) => sp.eval(point[0]),
        }
    }
}

/// Periodic cubic spline through the nodes of a 1-d field, cyclic
/// tridiagonal system solved by Sherman-Morrison.
pub struct PeriodicSpline {
    origin: f64,
    period: f64,
    h: f64,
    values: Vec<Complex64>,
    second: Vec<Complex64>,
}

impl PeriodicSpline {
    pub fn new(psi: &WaveField) -> Self {
        let grid = psi.grid();
        let n = grid.n();
        let h = grid.spacing();
        let y = psi.values();
        // cyclic system: M_{i-1} + 4M_i + M_{i+1} = 6(y_{i-1} - 2y_i + y_{i+1})/h²
        let rhs: Vec<Complex64> = (0..n)
            .map(|i| {
                let im = (i + n - 1) % n;
                let ip = (i + 1) % n;
                6.0 * (y[im] - 2.0 * y[i] + y[ip]) / (h * h)
            })
            .collect();
        let second = solve_cyclic_tridiag(1.0, 4.0, 1.0, &rhs);
        PeriodicSpline {
            origin: grid.axis_coords()[0],
            period: grid.geometry().period(),
            h,
            values: y.to_vec(),
            second,
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.values.len();
        let mut u = (x - self.origin) / self.period;
        u -= u.floor();
        let pos = u * n as f64;
        let i = (pos.floor() as usize).min(n - 1);
        let t = (pos - i as f64) * self.h;
        let ip = (i + 1) % n;
        let (ya, yb) = (self.values[i], self.values[ip]);
        let (ma, mb) = (self.second[i], self.second[ip]);
        let h = self.h;
        let a = (h - t) / h;
        let b = t / h;
        ya * a + yb * b
            + ((a * a * a - a) * ma + (b * b * b - b) * mb) * (h * h) / 6.0
    }
}

fn solve_cyclic_tridiag(lo: f64, diag: f64, up: f64, rhs: &[Complex64]) -> Vec<Complex64> {
    let n = rhs.len();
    // Sherman-Morrison with u = (γ, 0, …, 0, lo)ᵀ, v = (1, 0, …, 0, up/γ)ᵀ
    let gamma = -diag;
    let mut d = vec![diag; n];
    d[0] = diag - gamma;
    d[n - 1] = diag - lo * up / gamma;
    let solve = |d: &[f64], rhs: &[Complex64]| -> Vec<Complex64> {
        // plain tridiagonal (Thomas), constant off-diagonals
        let mut c = vec![0.0; n];
        let mut x = vec![Complex64::default(); n];
        let mut denom = d[0];
        c[0] = up / denom;
        x[0] = rhs[0] / denom;
        for i in 1..n {
            denom = d[i] - lo * c[i - 1];
            c[i] = up / denom;
            x[i] = (rhs[i] - lo * x[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            let nxt = x[i + 1];
            x[i] -= c[i] * nxt;
        }
        x
    };
    let x = solve(&d, rhs);
    let mut u = vec![Complex64::default(); n];
    u[0] = Complex64::new(gamma, 0.0);
    u[n - 1] = Complex64::new(lo, 0.0);
    let z = solve(&d, &u);
    let vx = x[0] + x[n - 1] * up / gamma;
    let vz = z[0] + z[n - 1] * up / gamma;
    let factor = vx / (1.0 + vz);
    (0..n).map(|i| x[i] - factor * z[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::rng::seeded;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn plane_wave(grid: &Grid, m: f64) -> WaveField {
        let amp = 1.0 / (2.0 * PI).sqrt();
        WaveField::from_fn(grid, |x| Complex64::new(0.0, m * x[0]).exp() * amp)
    }

    #[test]
    fn transport_constant_field_on_plane_wave() {
        let g = Grid::torus(1, 64).unwrap();
        let psi = plane_wave(&g, 3.0);
        let f = VectorField::Constant(vec![0.4]);
        let t = transport_apply(&f, &psi).unwrap();
        // 𝒯_f ψ = 0.4 ∂_x ψ = 0.4 · 3i ψ
        let mut expect = psi.clone();
        expect.scale(Complex64::new(0.0, 1.2));
        assert!(t.distance(&expect).unwrap() < 1e-10);
    }

    #[test]
    fn transport_matches_finite_differences() {
        let g = Grid::torus(1, 128).unwrap();
        let psi = WaveField::from_fn(&g, |x| {
            Complex64::new((x[0]).cos(), 0.3 * (2.0 * x[0]).sin())
        });
        let phase = SmoothPhase::cosine(1, 0, 1.0); // f = ∇cos x = −sin x
        let f = VectorField::Gradient(phase);
        let t = transport_apply(&f, &psi).unwrap();
        let h = g.spacing();
        let vals = psi.values();
        let n = g.n();
        // 4th-order centered stencil for the FD oracle
        let fd = |i: usize| {
            (-vals[(i + 2) % n] + 8.0 * vals[(i + 1) % n] - 8.0 * vals[(i + n - 1) % n]
                + vals[(i + n - 2) % n])
                / (12.0 * h)
        };
        let fd_err: f64 = (0..n)
            .map(|i| {
                let x = g.axis_coords()[i];
                let expect = -x.sin() * fd(i) + 0.5 * (-x.cos()) * vals[i];
                (t.values()[i] - expect).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
            * g.spacing().sqrt();
        assert!(fd_err < 1e-5, "{fd_err}");
    }

    #[test]
    fn transport_is_skew_adjoint() {
        let g = Grid::torus(1, 64).unwrap();
        let mut rng = seeded(21);
        for _ in 0..5 {
            let psi = WaveField::random_unit(&g, &mut rng, 5.0);
            let f = VectorField::Gradient(SmoothPhase::cosine(1, 0, 0.8));
            let t = transport_apply(&f, &psi).unwrap();
            let re = t.inner(&psi).unwrap().re;
            assert!(re.abs() < 1e-8, "Re⟨𝒯ψ,ψ⟩ = {re}");
        }
    }

    #[test]
    fn flow_constant_and_linear() {
        let f = VectorField::Constant(vec![0.25, -1.0]);
        let (y, j) = flow_map(&f, 2.0, &[1.0, 1.0]);
        assert!((y[0] - 1.5).abs() < 1e-12 && (y[1] + 1.0).abs() < 1e-12);
        assert!((j - 1.0).abs() < 1e-12);

        let f = VectorField::LinearDiag(vec![1.0]);
        let (y, j) = flow_map(&f, 0.7, &[2.0]);
        assert!((y[0] - 2.0 * 0.7f64.exp()).abs() < 1e-9);
        assert!((j - 0.7f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn flow_matches_fine_reference() {
        // f = ∇cos x = −sin x, t = 0.3, x = 1, reference at 100× finer steps
        let f = VectorField::Gradient(SmoothPhase::cosine(1, 0, 1.0));
        let (y, j) = flow_map(&f, 0.3, &[1.0]);
        let reference = {
            let n = 3000usize;
            let h = 0.3 / n as f64;
            let mut y = 1.0f64;
            let mut lj = 0.0f64;
            for _ in 0..n {
                let k1 = -y.sin();
                let d1 = -y.cos();
                let y2 = y + 0.5 * h * k1;
                let k2 = -y2.sin();
                let d2 = -y2.cos();
                let y3 = y + 0.5 * h * k2;
                let k3 = -y3.sin();
                let d3 = -y3.cos();
                let y4 = y + h * k3;
                let k4 = -y4.sin();
                let d4 = -y4.cos();
                y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                lj += h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
            }
            (y, lj.exp())
        };
        assert!((y[0] - reference.0).abs() < 1e-8, "{} vs {}", y[0], reference.0);
        assert!((j - reference.1).abs() < 1e-8);
    }

    #[test]
    fn flow_group_property() {
        let f = VectorField::Gradient(SmoothPhase::cosine(1, 0, 0.9));
        let (y1, _) = flow_map(&f, 0.8, &[2.0]);
        let (y2, _) = flow_map(&f, 0.5, &y1);
        let (y12, _) = flow_map(&f, 1.3, &[2.0]);
        assert!((y2[0] - y12[0]).abs() < 1e-8);
    }

    #[test]
    fn pushforward_identity_and_translation() {
        let g = Grid::torus(1, 64).unwrap();
        let mut rng = seeded(2);
        let psi = WaveField::random_unit(&g, &mut rng, 5.0);
        let f = VectorField::Constant(vec![0.3]);
        let id = pushforward(&f, 0.0, &psi, InterpKind::Spectral).unwrap();
        assert!(id.distance(&psi).unwrap() < 1e-14);
        let moved = pushforward(&f, 1.0, &psi, InterpKind::Spectral).unwrap();
        let expect = psi.translate(&[0.3]);
        assert!(moved.distance(&expect).unwrap() < 1e-10);
        assert!((moved.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pushforward_preserves_norm_on_generator_fields() {
        let g = Grid::torus(1, 128).unwrap();
        let mut rng = seeded(4);
        let psi = WaveField::random_unit(&g, &mut rng, 6.0);
        for f in [
            VectorField::Gradient(SmoothPhase::cosine(1, 0, 0.7)),
            VectorField::Gradient(SmoothPhase::sine(1, 0, 0.5)),
        ] {
            let out = pushforward(&f, 0.6, &psi, InterpKind::Spectral).unwrap();
            assert!((out.norm() - 1.0).abs() < 1e-6, "norm {}", out.norm());
        }
    }

    #[test]
    fn pushforward_group_law() {
        let g = Grid::torus(1, 128).unwrap();
        let mut rng = seeded(6);
        let psi = WaveField::random_unit(&g, &mut rng, 6.0);
        let f = VectorField::Gradient(SmoothPhase::cosine(1, 0, 0.7));
        let ab = pushforward(
            &f,
            0.2,
            &pushforward(&f, 0.3, &psi, InterpKind::Spectral).unwrap(),
            InterpKind::Spectral,
        )
        .unwrap();
        let once = pushforward(&f, 0.5, &psi, InterpKind::Spectral).unwrap();
        assert!(ab.distance(&once).unwrap() < 2e-6);
    }

    #[test]
    fn pushforward_generator_consistency() {
        // (e^{h𝒯} − 1)/h → 𝒯ψ with first-order rate
        let g = Grid::torus(1, 128).unwrap();
        let psi = WaveField::normalized_from_fn(&g, |x| {
            Complex64::new(1.0 + 0.4 * x[0].cos(), 0.2 * x[0].sin())
        })
        .unwrap();
        let f = VectorField::Gradient(SmoothPhase::cosine(1, 0, 0.7));
        let t_psi = transport_apply(&f, &psi).unwrap();
        let mut errs = Vec::new();
        for &h in &[0.1, 0.05, 0.025] {
            let fwd = pushforward(&f, h, &psi, InterpKind::Spectral).unwrap();
            let mut diff = WaveField::zeros(g.clone());
            for (i, v) in diff.values_mut().iter_mut().enumerate() {
                *v = (fwd.values()[i] - psi.values()[i]) / h - t_psi.values()[i];
            }
            errs.push(diff.norm());
        }
        let slope = (errs[0] / errs[2]).ln() / (4.0f64).ln();
        assert!((slope - 1.0).abs() < 0.2, "rate {slope}, errors {errs:?}");
    }

    #[test]
    fn spline_interpolates_smooth_field() {
        let g = Grid::torus(1, 256).unwrap();
        let psi = WaveField::from_fn(&g, |x| Complex64::new((x[0]).cos(), (2.0 * x[0]).sin()));
        let sp = PeriodicSpline::new(&psi);
        for &x in &[0.1f64, 1.7, 4.3, 6.2] {
            let exact = Complex64::new(x.cos(), (2.0 * x).sin());
            assert!((sp.eval(x) - exact).norm() < 1e-7, "at {x}");
        }
    }

    #[test]
    fn spline_pushforward_close_to_spectral() {
        let g = Grid::torus(1, 256).unwrap();
        let mut rng = seeded(8);
        let psi = WaveField::random_unit(&g, &mut rng, 5.0);
        let f = VectorField::Gradient(SmoothPhase::cosine(1, 0, 0.5));
        let a = pushforward(&f, 0.4, &psi, InterpKind::Spectral).unwrap();
        let b = pushforward(&f, 0.4, &psi, InterpKind::Spline).unwrap();
        assert!(a.distance(&b).unwrap() < 1e-5);
    }
}
