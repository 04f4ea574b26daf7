//! The eikonal equation ∂_sφ + ½|∇φ|² = 0 solved by characteristics.
//!
//! For an initial phase φ₀ with bounded derivatives and s·‖D²φ₀‖_∞ < 1,
//! the characteristic map f_s(x) = x + s∇φ₀(x) is a diffeomorphism and
//!
//!   φ(s,x) = φ₀(x) − ½ ∫₀^s |∇φ₀(f_σ⁻¹(x))|² dσ,
//!   ∇φ(s,x) = ∇φ₀(f_s⁻¹(x)).
//!
//! The σ-integral is evaluated by Gauss-Legendre quadrature (the
//! integrand is smooth in σ); each quadrature node costs one inversion
//! of the characteristic map, done by contraction fixed-point iteration
//! with a Newton polish.

use crate::error::{Error, Result};
use crate::phase::SmoothPhase;

/// Safety margin inside the contraction regime for single inversions.
pub const CONTRACTION_MARGIN: f64 = 0.9;
const MAX_ITERS: usize = 60;
const FIXED_POINT_ITERS: usize = 3;

/// Solve y + s∇φ(y) = x for y. Requires s·‖D²φ‖_∞ ≤ 0.9.
pub fn invert_characteristic(
    phase: &SmoothPhase,
    s: f64,
    x: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    let product = s.abs() * phase.hess_sup();
    if product > CONTRACTION_MARGIN {
        return Err(Error::ContractionViolation(product, CONTRACTION_MARGIN));
    }
    invert_unchecked(phase, s, x, tol)
}

fn invert_unchecked(phase: &SmoothPhase, s: f64, x: &[f64], tol: f64) -> Result<Vec<f64>> {
    let d = x.len();
    let mut y = x.to_vec();
    let mut g = vec![0.0; d];
    let mut hess = vec![0.0; d * d];
    for it in 0..MAX_ITERS {
        phase.grad(&y, &mut g);
        // residual F(y) = y + s∇φ(y) − x
        let mut res = vec![0.0; d];
        let mut rnorm = 0.0;
        for a in 0..d {
            res[a] = y[a] + s * g[a] - x[a];
            rnorm += res[a] * res[a];
        }
        if rnorm.sqrt() < tol {
            return Ok(y);
        }
        if it < FIXED_POINT_ITERS {
            // contraction step y ← x − s∇φ(y)
            for a in 0..d {
                y[a] = x[a] - s * g[a];
            }
        } else {
            // Newton step with DF = I + s D²φ(y)
            phase.hessian(&y, &mut hess);
            let mut m = hess.clone();
            for a in 0..d {
                for b in 0..d {
                    m[a * d + b] *= s;
                }
                m[a * d + a] += 1.0;
            }
            let step = solve_small(&m, &res, d)
                .ok_or(Error::InversionStall(it))?;
            for a in 0..d {
                y[a] -= step[a];
            }
        }
    }
    Err(Error::InversionStall(MAX_ITERS))
}

/// Solve an d×d system (d ≤ 3) by direct elimination with pivoting.
fn solve_small(m: &[f64], rhs: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..d {
        let mut piv = col;
        for r in col + 1..d {
            if a[r * d + col].abs() > a[piv * d + col].abs() {
                piv = r;
            }
        }
        if a[piv * d + col].abs() < 1e-14 {
            return None;
        }
        if piv != col {
            for c in 0..d {
                a.swap(col * d + c, piv * d + c);
            }
            b.swap(col, piv);
        }
        let inv = 1.0 / a[col * d + col];
        for r in 0..d {
            if r == col {
                continue;
            }
            let f = a[r * d + col] * inv;
            for c in col..d {
                a[r * d + c] -= f * a[col * d + c];
            }
            b[r] -= f * b[col];
        }
    }
    Some((0..d).map(|i| b[i] / a[i * d + i]).collect())
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton
/// iteration on the Legendre recurrence.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussLegendre { nodes, weights }
    }

    /// ∫₀^s f(σ) dσ.
    pub fn integrate(&self, s: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = s / 2.0;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(half * (t + 1.0)))
            .sum::<f64>()
            * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Eikonal solution with evaluators for φ(s,x), ∇φ(s,x), ∂_sφ(s,x)
/// and D²φ(s,x) on the contraction window [0, s_max].
#[derive(Debug, Clone)]
pub struct EikonalSolution {
    source: SmoothPhase,
    s_max: f64,
    hess_sup: f64,
    quad: GaussLegendre,
    tol: f64,
}

pub fn solve_eikonal(
    phase: &SmoothPhase,
    s_max: f64,
    quadrature_nodes: usize,
) -> Result<EikonalSolution> {
    if quadrature_nodes < 8 {
        return Err(Error::InvalidParam(format!(
            "need at least 8 quadrature nodes, got {quadrature_nodes}"
        )));
    }
    let hess_sup = phase.hess_sup();
    let product = s_max * hess_sup;
    if product >= 1.0 {
        return Err(Error::ContractionViolation(product, 1.0));
    }
    Ok(EikonalSolution {
        source: phase.clone(),
        s_max,
        hess_sup,
        quad: GaussLegendre::new(quadrature_nodes),
        tol: 1e-12,
    })
}

impl EikonalSolution {
    pub fn source(&self) -> &SmoothPhase {
        &self.source
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    fn check_window(&self, s: f64) -> Result<()> {
        if !(0.0..=self.s_max + 1e-12).contains(&s) {
            return Err(Error::InvalidParam(format!(
                "s = {s} outside eikonal window [0, {}]",
                self.s_max
            )));
        }
        Ok(())
    }

    /// f_s⁻¹(x).
    pub fn invert(&self, s: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check_window(s)?;
        invert_unchecked(&self.source, s, x, self.tol)
    }

    /// φ(s,x) by Gauss-Legendre quadrature of the characteristic integral.
    pub fn phi(&self, s: f64, x: &[f64]) -> Result<f64> {
        self.check_window(s)?;
        let base = self.source.eval(x);
        if s == 0.0 {
            return Ok(base);
        }
        let mut err = None;
        let integral = self.quad.integrate(s, |sigma| {
            match invert_unchecked(&self.source, sigma, x, self.tol) {
                Ok(y) => {
                    let g = self.source.grad_vec(&y);
                    g.iter().map(|c| c * c).sum::<f64>()
                }
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        Ok(base - 0.5 * integral)
    }

    /// ∇φ(s,x) = ∇φ₀(f_s⁻¹(x)); no quadrature.
    pub fn grad(&self, s: f64, x: &[f64]) -> Result<Vec<f64>> {
        let y = self.invert(s, x)?;
        Ok(self.source.grad_vec(&y))
    }

    /// ∂_sφ(s,x) = −½|∇φ(s,x)|².
    pub fn dphi_ds(&self, s: f64, x: &[f64]) -> Result<f64> {
        let g = self.grad(s, x)?;
        Ok(-0.5 * g.iter().map(|c| c * c).sum::<f64>())
    }

    /// D²φ(s,x) = D²φ₀(y) (I + s D²φ₀(y))⁻¹ at y = f_s⁻¹(x), row-major.
    pub fn hessian(&self, s: f64, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        let y = self.invert(s, x)?;
        let mut h0 = vec![0.0; d * d];
        self.source.hessian(&y, &mut h0);
        let mut m = h0.clone();
        for a in 0..d {
            for b in 0..d {
                m[a * d + b] *= s;
            }
            m[a * d + a] += 1.0;
        }
        // solve (I + sH)ᵀ Xᵀ = Hᵀ column by column; everything symmetric
        let mut out = vec![0.0; d * d];
        for col in 0..d {
            let rhs: Vec<f64> = (0..d).map(|r| h0[r * d + col]).collect();
            let sol = solve_small(&m, &rhs, d)
                .ok_or_else(|| Error::InvalidParam("singular characteristic Jacobian".into()))?;
            for r in 0..d {
                out[r * d + col] = sol[r];
            }
        }
        Ok(out)
    }

    /// Laplacian Δφ(s,x) (trace of the Hessian).
    pub fn laplacian(&self, s: f64, x: &[f64]) -> Result<f64> {
        let d = self.dim();
        let h = self.hessian(s, x)?;
        Ok((0..d).map(|a| h[a * d + a]).sum())
    }

    /// det(I + s D²φ₀(y)) at y = f_s⁻¹(x); positive inside the window.
    pub fn characteristic_jacobian(&self, s: f64, x: &[f64]) -> Result<f64> {
        let d = self.dim();
        let y = self.invert(s, x)?;
        let mut h = vec![0.0; d * d];
        self.source.hessian(&y, &mut h);
        let mut m = h;
        for a in 0..d {
            for b in 0..d {
                m[a * d + b] *= s;
            }
            m[a * d + a] += 1.0;
        }
        Ok(det_small(&m, d))
    }

    /// Hessian sup bound of φ(s,·): h/(1 − s h) with h = ‖D²φ₀‖_∞.
    pub fn hess_sup_at(&self, s: f64) -> f64 {
        self.hess_sup / (1.0 - s * self.hess_sup)
    }
}

fn det_small(m: &[f64], d: usize) -> f64 {
    match d {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(16);
        // degree up to 2n−1 = 31 is exact; check x^7 on [0, 2]
        let val = gl.integrate(2.0, |x| x.powi(7));
        assert!((val - 2f64.powi(8) / 8.0).abs() < 1e-10);
        let smooth = gl.integrate(1.0, |x| (3.0 * x).sin());
        assert!((smooth - (1.0 - (3.0f64).cos()) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn invert_affine_phase_is_exact() {
        // φ = −αx_1: y = x + sα e_1
        let alpha = 0.8;
        let p = SmoothPhase::linear(vec![-alpha, 0.0], 0.0);
        let y = invert_characteristic(&p, 0.3, &[1.0, 2.0], 1e-12).unwrap();
        assert!((y[0] - (1.0 + 0.3 * alpha)).abs() < 1e-12);
        assert!((y[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn invert_s_zero_is_identity() {
        let p = SmoothPhase::cosine(1, 0, 1.0);
        let y = invert_characteristic(&p, 0.0, &[0.7], 1e-12).unwrap();
        assert!((y[0] - 0.7).abs() < 1e-14);
    }

    #[test]
    fn invert_cosine_matches_bisection_oracle() {
        // φ = cos x, s = 0.1, x = 1: solve y − 0.1 sin y = 1 by bisection.
        let (mut lo, mut hi) = (0.5, 1.5);
        let f = |y: f64| y - 0.1 * y.sin() - 1.0;
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);

        let p = SmoothPhase::cosine(1, 0, 1.0);
        let y = invert_characteristic(&p, 0.1, &[1.0], 1e-13).unwrap();
        assert!((y[0] - oracle).abs() < 1e-12, "{} vs {}", y[0], oracle);
        // displacement bound |y − x| ≤ s‖∇φ‖_∞
        assert!((y[0] - 1.0).abs() <= 0.1 * p.grad_sup() + 1e-12);
    }

    #[test]
    fn invert_rejects_outside_contraction() {
        let p = SmoothPhase::cosine(1, 0, 1.0); // ‖D²φ‖ = 1
        assert!(matches!(
            invert_characteristic(&p, 0.95, &[1.0], 1e-12),
            Err(Error::ContractionViolation(..))
        ));
    }

    #[test]
    fn eikonal_affine_closed_form() {
        // φ₀ = −αx_1 ⇒ φ(s,x) = −αx_1 − α²s/2
        let alpha = 0.6;
        let p = SmoothPhase::linear(vec![-alpha], 0.0);
        let sol = solve_eikonal(&p, 5.0, 16).unwrap();
        for &(s, x) in &[(0.0, 0.3), (1.0, -2.0), (4.5, 7.0)] {
            let got = sol.phi(s, &[x]).unwrap();
            let expect = -alpha * x - alpha * alpha * s / 2.0;
            assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
        }
    }

    #[test]
    fn eikonal_initial_slice_is_source() {
        let p = SmoothPhase::cosine(1, 0, 0.5);
        let sol = solve_eikonal(&p, 1.5, 16).unwrap();
        for &x in &[0.0, 1.1, 4.0] {
            assert!((sol.phi(0.0, &[x]).unwrap() - p.eval(&[x])).abs() < 1e-14);
            assert!(
                (sol.dphi_ds(0.0, &[x]).unwrap() + 0.5 * (0.5 * x.sin()).powi(2)).abs() < 1e-12
            );
        }
    }

    #[test]
    fn hamilton_jacobi_residual_small() {
        // centered finite differences in s as the oracle
        let p = SmoothPhase::cosine(1, 0, 0.5);
        let sol = solve_eikonal(&p, 1.8, 16).unwrap();
        let mut rng = seeded(3);
        let ds = 1e-5;
        for _ in 0..40 {
            let s = rng.gen_range(0.1..1.6);
            let x = [rng.gen_range(0.0..std::f64::consts::TAU)];
            let dphi = (sol.phi(s + ds, &x).unwrap() - sol.phi(s - ds, &x).unwrap()) / (2.0 * ds);
            let g = sol.grad(s, &x).unwrap();
            let residual = dphi + 0.5 * g[0] * g[0];
            assert!(residual.abs() < 1e-6, "HJ residual {residual} at s={s}, x={}", x[0]);
        }
    }

    #[test]
    fn characteristic_invariance() {
        // ∇φ(s, f_s(x)) = ∇φ₀(x)
        let p = SmoothPhase::cosine(1, 0, 0.5);
        let sol = solve_eikonal(&p, 1.8, 16).unwrap();
        let mut rng = seeded(5);
        for _ in 0..50 {
            let s = rng.gen_range(0.0..1.7);
            let x = rng.gen_range(0.0..std::f64::consts::TAU);
            let fx = x + s * p.grad_vec(&[x])[0];
            let g = sol.grad(s, &[fx]).unwrap();
            let g0 = p.grad_vec(&[x]);
            assert!((g[0] - g0[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn jacobian_positive_in_window() {
        let p = SmoothPhase::cosine(1, 0, 0.5);
        let sol = solve_eikonal(&p, 1.8, 16).unwrap();
        let mut rng = seeded(9);
        for _ in 0..50 {
            let s = rng.gen_range(0.0..1.7);
            let x = [rng.gen_range(0.0..std::f64::consts::TAU)];
            assert!(sol.characteristic_jacobian(s, &x).unwrap() > 0.0);
        }
    }

    #[test]
    fn eikonal_rejects_past_caustic() {
        let p = SmoothPhase::cosine(1, 0, 0.5); // ‖D²φ‖ = 0.5 ⟹ caustic at s = 2
        assert!(solve_eikonal(&p, 2.1, 16).is_err());
        assert!(solve_eikonal(&p, 1.0, 4).is_err()); // too few nodes
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let p = SmoothPhase::cosine(1, 0, 0.5);
        let sol = solve_eikonal(&p, 1.5, 16).unwrap();
        let (s, x) = (0.9, 2.2);
        let h = sol.hessian(s, &[x]).unwrap()[0];
        let eps = 1e-5;
        let gp = sol.grad(s, &[x + eps]).unwrap()[0];
        let gm = sol.grad(s, &[x - eps]).unwrap()[0];
        let fd = (gp - gm) / (2.0 * eps);
        assert!((h - fd).abs() < 1e-7, "{h} vs {fd}");
    }
}
