//! Complex amplitude fields on a [`Grid`]: discrete L² geometry,
//! spectral derivatives, phase-aligned distance and the Σ-norm
//! diagnostic ‖ψ‖ + ‖∇ψ‖ (+ ‖|x|ψ‖ on the box).

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{Geometry, Grid};

/// Fraction of spectral mass allowed in the top octave before a state
/// counts as under-resolved.
pub const NYQUIST_GUARD: f64 = 1e-6;
/// Mass allowed in the outer 10% shell of the box.
pub const BOUNDARY_GUARD: f64 = 1e-8;

/// Complex amplitudes on a grid. Physical states are unit-norm in the
/// discrete L² inner product ⟨ψ,χ⟩ = h^d Σ conj(ψ_i) χ_i.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl WaveField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParam(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(WaveField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        WaveField { grid, values: vec![Complex64::default(); n] }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut values = vec![Complex64::default(); grid.len()];
        grid.for_each_node(|i, x| values[i] = f(x));
        WaveField { grid: grid.clone(), values }
    }

    /// Unit-norm field built from `f` (errors if f vanishes identically).
    pub fn normalized_from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let mut field = Self::from_fn(grid, f);
        field.normalize()?;
        Ok(field)
    }

    /// Smooth random unit field: low-frequency Fourier data with
    /// amplitudes decaying like exp(-|m|²/decay²).
    pub fn random_unit(grid: &Grid, rng: &mut impl Rng, decay: f64) -> Self {
        let d = grid.dim();
        let n = grid.n();
        let mut spec = vec![Complex64::default(); grid.len()];
        let mut mi = [0usize; 3];
        for (idx, s) in spec.iter_mut().enumerate() {
            grid.unravel(idx, &mut mi[..d]);
            let mut m2 = 0.0;
            for &i in &mi[..d] {
                let m = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
                m2 += m * m;
            }
            let amp = (-m2 / (decay * decay)).exp();
            *s = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
        }
        grid.fft_inverse(&mut spec);
        let mut field = WaveField { grid: grid.clone(), values: spec };
        field.normalize().expect("random field is nonzero");
        field
    }

    /// Smooth random unit field bounded away from zero:
    /// ψ = A(x) e^{iθ(x)} with A ≥ 0.4 and θ built from first and second
    /// harmonics with random amplitudes and offsets. The logarithmic
    /// nonlinearity is singular at zeros of ψ, so generic test states
    /// are taken nodeless and of strictly limited bandwidth. On the box
    /// geometry the same profile is modulated by a centered Gaussian so
    /// the boundary shell stays empty.
    pub fn random_nodeless(grid: &Grid, rng: &mut impl Rng, _decay: f64) -> Self {
        let d = grid.dim();
        let period = grid.geometry().period();
        let k0 = std::f64::consts::TAU / period;
        let mut amp_par: Vec<(f64, f64, f64, f64)> = Vec::new();
        let mut ph_par: Vec<(f64, f64, f64, f64)> = Vec::new();
        for _ in 0..d {
            amp_par.push((
                rng.gen_range(0.15..0.3),
                rng.gen_range(0.0..period),
                rng.gen_range(0.05..0.15),
                rng.gen_range(0.0..period),
            ));
            ph_par.push((
                rng.gen_range(-0.8..0.8),
                rng.gen_range(0.0..period),
                rng.gen_range(-0.4..0.4),
                rng.gen_range(0.0..period),
            ));
        }
        let is_box = !grid.geometry().is_torus();
        let mut field = WaveField::from_fn(grid, |x| {
            let mut a = 1.0;
            let mut th = 0.0;
            for axis in 0..d {
                let (a1, o1, a2, o2) = amp_par[axis];
                let (p1, q1, p2, q2) = ph_par[axis];
                a += a1 * (k0 * (x[axis] - o1)).cos() + a2 * (2.0 * k0 * (x[axis] - o2)).sin();
                th += p1 * (k0 * (x[axis] - q1)).sin() + p2 * (2.0 * k0 * (x[axis] - q2)).cos();
            }
            let env = if is_box {
                (-x.iter().map(|c| c * c).sum::<f64>() / 2.0).exp()
            } else {
                1.0
            };
            Complex64::from_polar(a * env, th)
        });
        field.normalize().expect("nodeless field is nonzero");
        field
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Discrete inner product ⟨self, other⟩ (conjugate-linear in self).
    pub fn inner(&self, other: &WaveField) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let w = self.grid.quad_weight();
        let mut acc = Complex64::default();
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a.conj() * b;
        }
        Ok(acc * w)
    }

    pub fn norm_sqr(&self) -> f64 {
        let w = self.grid.quad_weight();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * w
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParam(format!("cannot normalize field with norm {n}")));
        }
        let s = 1.0 / n;
        for v in &mut self.values {
            *v *= s;
        }
        Ok(())
    }

    /// ‖self − other‖ in discrete L².
    pub fn distance(&self, other: &WaveField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let w = self.grid.quad_weight();
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * w).sqrt())
    }

    /// Distance minimized over a global phase:
    /// min_θ ‖ψ − e^{iθ}χ‖ = sqrt(2 − 2|⟨ψ,χ⟩|) for unit-norm inputs.
    pub fn aligned_distance(&self, other: &WaveField) -> Result<f64> {
        for f in [self, other] {
            let n = f.norm();
            if (n - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidParam(format!(
                    "aligned_distance needs unit-norm inputs (norm = {n})"
                )));
            }
        }
        let ov = self.inner(other)?.norm();
        Ok((2.0 - 2.0 * ov).max(0.0).sqrt())
    }

    /// Same as [`aligned_distance`] but renormalizes copies first; for
    /// fields that are only approximately unit (e.g. interpolated).
    pub fn aligned_distance_renormalized(&self, other: &WaveField) -> Result<f64> {
        let mut a = self.clone();
        let mut b = other.clone();
        a.normalize()?;
        b.normalize()?;
        let ov = a.inner(&b)?.norm();
        Ok((2.0 - 2.0 * ov).max(0.0).sqrt())
    }

    pub fn scale(&mut self, c: Complex64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    /// Pointwise multiplication by e^{i phase(x)}.
    pub fn multiply_phase(&mut self, phase: &[f64]) {
        debug_assert_eq!(phase.len(), self.values.len());
        for (v, &p) in self.values.iter_mut().zip(phase) {
            *v *= Complex64::new(0.0, p).exp();
        }
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut s = self.values.clone();
        self.grid.fft_forward(&mut s);
        s
    }

    pub fn from_spectrum(grid: &Grid, mut spec: Vec<Complex64>) -> Self {
        grid.fft_inverse(&mut spec);
        WaveField { grid: grid.clone(), values: spec }
    }

    /// Apply a multiplier in Fourier space: ψ ← F⁻¹[ m(k) · F ψ ].
    pub fn apply_spectral_multiplier(&mut self, m: impl Fn(&[f64]) -> Complex64) {
        let grid = self.grid.clone();
        grid.fft_forward(&mut self.values);
        let d = grid.dim();
        let mut k = [0.0f64; 3];
        for (idx, v) in self.values.iter_mut().enumerate() {
            grid.wavenumber(idx, &mut k[..d]);
            *v *= m(&k[..d]);
        }
        grid.fft_inverse(&mut self.values);
    }

    /// Spectral partial derivative along `axis`.
    pub fn gradient_axis(&self, axis: usize) -> WaveField {
        let mut out = self.clone();
        out.apply_spectral_multiplier(|k| Complex64::new(0.0, k[axis]));
        out
    }

    /// ‖∇ψ‖ with spectral derivatives.
    pub fn grad_norm(&self) -> f64 {
        let mut spec = self.spectrum();
        let grid = &self.grid;
        let d = grid.dim();
        let mut k = [0.0f64; 3];
        let mut acc = 0.0;
        for (idx, v) in spec.iter_mut().enumerate() {
            grid.wavenumber(idx, &mut k[..d]);
            let k2: f64 = k[..d].iter().map(|q| q * q).sum();
            acc += k2 * v.norm_sqr();
        }
        // Parseval: h^d Σ_x |ψ|² = h^d/N^d Σ_k |ψ̂|²
        (acc * grid.quad_weight() / grid.len() as f64).sqrt()
    }

    /// Σ-norm diagnostic: ‖ψ‖ + ‖∇ψ‖ + (box only) ‖ |x| ψ ‖.
    pub fn sigma_norm(&self) -> f64 {
        let mut s = self.norm() + self.grad_norm();
        if let Geometry::Box { .. } = self.grid.geometry() {
            let w = self.grid.quad_weight();
            let mut acc = 0.0;
            self.grid.for_each_node(|i, x| {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                acc += r2 * self.values[i].norm_sqr();
            });
            s += (acc * w).sqrt();
        }
        s
    }

    /// Mass fraction carried by spectral modes in the top octave
    /// (any axis index |m| ≥ N/4).
    pub fn top_octave_fraction(&self) -> f64 {
        let spec = self.spectrum();
        let grid = &self.grid;
        let n = grid.n();
        let d = grid.dim();
        let mut mi = [0usize; 3];
        let mut top = 0.0;
        let mut total = 0.0;
        for (idx, v) in spec.iter().enumerate() {
            grid.unravel(idx, &mut mi[..d]);
            let mut is_top = false;
            for &i in &mi[..d] {
                let m = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
                if m.unsigned_abs() as usize >= n / 4 {
                    is_top = true;
                }
            }
            let p = v.norm_sqr();
            total += p;
            if is_top {
                top += p;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            top / total
        }
    }

    /// Err if the top-octave mass fraction exceeds the Nyquist guard.
    pub fn check_resolved(&self) -> Result<()> {
        let f = self.top_octave_fraction();
        if f > NYQUIST_GUARD {
            Err(Error::NyquistGuard(f))
        } else {
            Ok(())
        }
    }

    /// Mass in the outer 10% shell of the box (where any |x_a| > 0.9 L).
    pub fn boundary_shell_mass(&self) -> f64 {
        match self.grid.geometry() {
            Geometry::Torus { .. } => 0.0,
            Geometry::Box { half_width, .. } => {
                let cut = 0.9 * half_width;
                let w = self.grid.quad_weight();
                let mut acc = 0.0;
                self.grid.for_each_node(|i, x| {
                    if x.iter().any(|c| c.abs() > cut) {
                        acc += self.values[i].norm_sqr();
                    }
                });
                acc * w
            }
        }
    }

    pub fn check_boundary(&self) -> Result<()> {
        let m = self.boundary_shell_mass();
        if m > BOUNDARY_GUARD {
            Err(Error::BoundaryMass(m))
        } else {
            Ok(())
        }
    }

    /// Exact periodic translation ψ(· + shift) via a spectral phase ramp.
    pub fn translate(&self, shift: &[f64]) -> WaveField {
        let mut out = self.clone();
        out.apply_spectral_multiplier(|k| {
            let kx: f64 = k.iter().zip(shift).map(|(a, b)| a * b).sum();
            Complex64::new(0.0, kx).exp()
        });
        out
    }

    /// Trigonometric (spectral) interpolation of ψ at an arbitrary point.
    /// Exact for band-limited fields; O(N^d) per evaluation.
    pub fn eval_spectral(&self, spec: &[Complex64], point: &[f64]) -> Complex64 {
        let grid = &self.grid;
        let d = grid.dim();
        let origin = match grid.geometry() {
            Geometry::Torus { .. } => 0.0,
            Geometry::Box { half_width, .. } => -half_width,
        };
        // Separable evaluation: per-axis tables of e^{i k (x_a - origin)},
        // built from one exponential per axis by running products
        // (wavenumbers are integer multiples of k0 in FFT order).
        let n = grid.n();
        let mut tables: Vec<Vec<Complex64>> = Vec::with_capacity(d);
        for a in 0..d {
            let xa = point[a] - origin;
            let w = Complex64::new(0.0, grid.axis_wavenumbers()[1] * xa).exp();
            let mut table = vec![Complex64::new(1.0, 0.0); n];
            for m in 1..n / 2 {
                table[m] = table[m - 1] * w;
            }
            // negative frequencies m = n/2 .. n-1 map to m - n
            table[n - 1] = w.conj();
            for m in (n / 2..n - 1).rev() {
                table[m] = table[m + 1] * w.conj();
            }
            tables.push(table);
        }
        let mut acc = Complex64::default();
        let mut mi = [0usize; 3];
        for (idx, &s) in spec.iter().enumerate() {
            grid.unravel(idx, &mut mi[..d]);
            let mut ph = s;
            for a in 0..d {
                ph *= tables[a][mi[a]];
            }
            acc += ph;
        }
        acc / grid.len() as f64
    }
}

/// sqrt(2 − 2|⟨ψ,χ⟩|) convenience wrapper.
pub fn aligned_distance(a: &WaveField, b: &WaveField) -> Result<f64> {
    a.aligned_distance(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn plane_wave(grid: &Grid, m: f64) -> WaveField {
        let amp = 1.0 / (2.0 * PI).sqrt();
        WaveField::from_fn(grid, |x| Complex64::new(0.0, m * x[0]).exp() * amp)
    }

    #[test]
    fn aligned_distance_cases() {
        let g = Grid::torus(1, 64).unwrap();
        let psi = plane_wave(&g, 1.0);
        assert!(psi.aligned_distance(&psi).unwrap() < 1e-7);

        let mut rotated = psi.clone();
        rotated.scale(Complex64::new(0.0, 0.7).exp());
        assert!(psi.aligned_distance(&rotated).unwrap() < 1e-7);

        let chi = plane_wave(&g, 2.0);
        let d = psi.aligned_distance(&chi).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-10, "orthonormal distance {d}");
    }

    #[test]
    fn aligned_distance_rejects_grid_mismatch() {
        let a = plane_wave(&Grid::torus(1, 64).unwrap(), 1.0);
        let b = plane_wave(&Grid::torus(1, 32).unwrap(), 1.0);
        assert!(matches!(a.aligned_distance(&b), Err(Error::GridMismatch)));
    }

    #[test]
    fn aligned_distance_triangle_inequality() {
        let g = Grid::torus(1, 32).unwrap();
        let mut rng = seeded(11);
        for _ in 0..200 {
            let a = WaveField::random_unit(&g, &mut rng, 4.0);
            let b = WaveField::random_unit(&g, &mut rng, 4.0);
            let c = WaveField::random_unit(&g, &mut rng, 4.0);
            let dab = a.aligned_distance(&b).unwrap();
            let dbc = b.aligned_distance(&c).unwrap();
            let dac = a.aligned_distance(&c).unwrap();
            assert!(dac <= dab + dbc + 1e-12);
        }
    }

    #[test]
    fn sigma_norm_constant_and_plane_wave() {
        let g = Grid::torus(1, 64).unwrap();
        let c = WaveField::from_fn(&g, |_| Complex64::new(1.0 / (2.0 * PI).sqrt(), 0.0));
        assert!((c.sigma_norm() - 1.0).abs() < 1e-12);
        for m in [1.0, 3.0, -5.0] {
            let w = plane_wave(&g, m);
            assert!((w.sigma_norm() - (1.0 + m.abs())).abs() < 1e-10);
        }
    }

    #[test]
    fn sigma_norm_gaussian_matches_closed_form() {
        // ψ = π^{-1/4} e^{-x²/2}: ‖ψ‖ = 1, ‖ψ'‖ = ‖xψ‖ = 1/√2.
        let g = Grid::boxed(1, 12.0, 256).unwrap();
        let psi = WaveField::from_fn(&g, |x| {
            Complex64::new(PI.powf(-0.25) * (-x[0] * x[0] / 2.0).exp(), 0.0)
        });
        let expected = 1.0 + 2.0 * (0.5f64).sqrt();
        assert!((psi.sigma_norm() - expected).abs() < 1e-6, "{}", psi.sigma_norm());
    }

    #[test]
    fn translation_shifts_plane_wave() {
        let g = Grid::torus(1, 64).unwrap();
        let psi = plane_wave(&g, 3.0);
        let shifted = psi.translate(&[0.5]);
        let expect = {
            let mut p = psi.clone();
            p.scale(Complex64::new(0.0, 1.5).exp());
            p
        };
        assert!(shifted.distance(&expect).unwrap() < 1e-12);
        assert!((shifted.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_interpolation_matches_nodes_and_midpoints() {
        let g = Grid::torus(1, 32).unwrap();
        let psi = WaveField::from_fn(&g, |x| {
            Complex64::new((2.0 * x[0]).cos(), (x[0]).sin() * 0.3)
        });
        let spec = psi.spectrum();
        // at a node
        assert!((psi.eval_spectral(&spec, &[g.axis_coords()[5]]) - psi.values()[5]).norm() < 1e-12);
        // at an off-lattice point, compare with the closed form
        let x = 1.2345f64;
        let exact = Complex64::new((2.0 * x).cos(), x.sin() * 0.3);
        assert!((psi.eval_spectral(&spec, &[x]) - exact).norm() < 1e-12);
    }

    #[test]
    fn boundary_mass_detects_edge_concentration() {
        let g = Grid::boxed(1, 10.0, 128).unwrap();
        let centered = WaveField::normalized_from_fn(&g, |x| {
            Complex64::new((-x[0] * x[0]).exp(), 0.0)
        })
        .unwrap();
        assert!(centered.boundary_shell_mass() < 1e-10);
        let edge = WaveField::normalized_from_fn(&g, |x| {
            Complex64::new((-(x[0] - 9.5) * (x[0] - 9.5)).exp(), 0.0)
        })
        .unwrap();
        assert!(edge.boundary_shell_mass() > 0.5);
        assert!(edge.check_boundary().is_err());
    }

    #[test]
    fn nyquist_guard_triggers_on_rough_data() {
        let g = Grid::torus(1, 32).unwrap();
        let smooth = plane_wave(&g, 2.0);
        assert!(smooth.check_resolved().is_ok());
        let rough = plane_wave(&g, 15.0);
        assert!(rough.check_resolved().is_err());
    }
}
