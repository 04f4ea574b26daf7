//! Spatial discretization of the torus T^d and of a truncated box
//! [-L, L)^d treated as a large torus (periodic wrap).
//!
//! Uniform lattice, N nodes per axis (N a power of two), with the
//! standard FFT wavenumber layout: integer frequencies on the torus,
//! (π/L)-scaled integers on the box. Quadrature is the uniform
//! trapezoidal rule, weight = spacing^d, which is exact for
//! trigonometric polynomials resolved by the lattice.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const TAU: f64 = std::f64::consts::TAU;

/// Domain geometry. The box is periodically wrapped; experiments must
/// keep mass away from the boundary (see [`crate::field::WaveField::boundary_shell_mass`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Torus { dim: usize },
    Box { dim: usize, half_width: f64 },
}

impl Geometry {
    pub fn dim(&self) -> usize {
        match *self {
            Geometry::Torus { dim } => dim,
            Geometry::Box { dim, .. } => dim,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Geometry::Torus { .. })
    }

    /// Axis period: 2π for the torus, 2L for the box.
    pub fn period(&self) -> f64 {
        match *self {
            Geometry::Torus { .. } => TAU,
            Geometry::Box { half_width, .. } => 2.0 * half_width,
        }
    }

    pub fn label(&self) -> &'static str {
        if self.is_torus() {
            "torus"
        } else {
            "box"
        }
    }
}

struct GridInner {
    geometry: Geometry,
    n: usize,
    spacing: f64,
    /// Node coordinate along one axis (all axes share the lattice).
    coords: Vec<f64>,
    /// Wavenumber along one axis, FFT storage order.
    wavenumbers: Vec<f64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

/// Immutable spatial grid, cheap to clone and share across workers.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Grid({:?}, N={}, h={:.6})",
            self.inner.geometry, self.inner.n, self.inner.spacing
        )
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.inner.geometry == other.inner.geometry && self.inner.n == other.inner.n
    }
}

pub fn build_grid(geometry: Geometry, n: usize) -> Result<Grid> {
    Grid::new(geometry, n)
}

impl Grid {
    pub fn new(geometry: Geometry, n: usize) -> Result<Grid> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::NonPowerOfTwo(n));
        }
        let dim = geometry.dim();
        if dim == 0 || dim > 3 {
            return Err(Error::InvalidParam(format!("dimension {dim} out of range 1..=3")));
        }
        if let Geometry::Box { half_width, .. } = geometry {
            if half_width <= 0.0 {
                return Err(Error::InvalidParam(format!(
                    "box half-width must be positive, got {half_width}"
                )));
            }
        }
        let period = geometry.period();
        let spacing = period / n as f64;
        let origin = match geometry {
            Geometry::Torus { .. } => 0.0,
            Geometry::Box { half_width, .. } => -half_width,
        };
        let coords: Vec<f64> = (0..n).map(|i| origin + i as f64 * spacing).collect();
        // FFT order: m = 0..N/2-1, then -N/2..-1; fundamental frequency 2π/period.
        let k0 = TAU / period;
        let wavenumbers: Vec<f64> = (0..n)
            .map(|i| {
                let m = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
                k0 * m as f64
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(n);
        let fft_inv = planner.plan_fft_inverse(n);
        Ok(Grid {
            inner: Arc::new(GridInner {
                geometry,
                n,
                spacing,
                coords,
                wavenumbers,
                fft_fwd,
                fft_inv,
            }),
        })
    }

    pub fn torus(dim: usize, n: usize) -> Result<Grid> {
        Grid::new(Geometry::Torus { dim }, n)
    }

    pub fn boxed(dim: usize, half_width: f64, n: usize) -> Result<Grid> {
        Grid::new(Geometry::Box { dim, half_width }, n)
    }

    pub fn geometry(&self) -> Geometry {
        self.inner.geometry
    }

    pub fn dim(&self) -> usize {
        self.inner.geometry.dim()
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Total node count N^d.
    pub fn len(&self) -> usize {
        self.inner.n.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.inner.spacing
    }

    /// Quadrature weight spacing^d of the uniform rule.
    pub fn quad_weight(&self) -> f64 {
        self.inner.spacing.powi(self.dim() as i32)
    }

    /// Node coordinates along one axis (shared by all axes).
    pub fn axis_coords(&self) -> &[f64] {
        &self.inner.coords
    }

    /// Wavenumbers along one axis in FFT storage order.
    pub fn axis_wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    /// Largest resolved wavenumber magnitude per axis (Nyquist).
    pub fn k_max(&self) -> f64 {
        TAU / self.geometry().period() * (self.n() as f64 / 2.0)
    }

    /// Decompose a flat index into per-axis indices (row-major, axis 0 slowest).
    pub fn unravel(&self, idx: usize, out: &mut [usize]) {
        let n = self.inner.n;
        let mut rem = idx;
        for a in (0..self.dim()).rev() {
            out[a] = rem % n;
            rem /= n;
        }
    }

    /// Node coordinates for a flat index.
    pub fn node(&self, idx: usize) -> Vec<f64> {
        let mut mi = [0usize; 3];
        let d = self.dim();
        self.unravel(idx, &mut mi[..d]);
        (0..d).map(|a| self.inner.coords[mi[a]]).collect()
    }

    /// Visit every node: callback gets (flat index, coordinates).
    pub fn for_each_node(&self, mut f: impl FnMut(usize, &[f64])) {
        let d = self.dim();
        let n = self.inner.n;
        let mut mi = [0usize; 3];
        let mut x = [0.0f64; 3];
        for idx in 0..self.len() {
            self.unravel(idx, &mut mi[..d]);
            for a in 0..d {
                x[a] = self.inner.coords[mi[a]];
            }
            f(idx, &x[..d]);
            let _ = n;
        }
    }

    /// Sample a scalar function on every node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.for_each_node(|i, x| out[i] = f(x));
        out
    }

    /// In-place d-dimensional forward FFT (unnormalized).
    pub fn fft_forward(&self, values: &mut [Complex64]) {
        self.fft_nd(values, true);
    }

    /// In-place d-dimensional inverse FFT, normalized by 1/N^d.
    pub fn fft_inverse(&self, values: &mut [Complex64]) {
        self.fft_nd(values, false);
        let scale = 1.0 / self.len() as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }

    fn fft_nd(&self, values: &mut [Complex64], forward: bool) {
        debug_assert_eq!(values.len(), self.len());
        let d = self.dim();
        let n = self.inner.n;
        let plan = if forward { &self.inner.fft_fwd } else { &self.inner.fft_inv };
        if d == 1 {
            plan.process(values);
            return;
        }
        let total = self.len();
        let mut scratch = vec![Complex64::default(); n];
        for axis in 0..d {
            // stride between consecutive entries along `axis`
            let stride = n.pow((d - 1 - axis) as u32);
            let lines = total / n;
            for line in 0..lines {
                // base offset of this line: split the line counter around the axis
                let outer = line / stride;
                let inner = line % stride;
                let base = outer * stride * n + inner;
                for j in 0..n {
                    scratch[j] = values[base + j * stride];
                }
                plan.process(&mut scratch);
                for j in 0..n {
                    values[base + j * stride] = scratch[j];
                }
            }
        }
    }

    /// Wavenumber vector for a flat spectral index.
    pub fn wavenumber(&self, idx: usize, out: &mut [f64]) {
        let d = self.dim();
        let mut mi = [0usize; 3];
        self.unravel(idx, &mut mi[..d]);
        for a in 0..d {
            out[a] = self.inner.wavenumbers[mi[a]];
        }
    }

    /// |k|^2 table over all spectral indices.
    pub fn k_squared(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; self.len()];
        let mut k = [0.0f64; 3];
        for idx in 0..self.len() {
            self.wavenumber(idx, &mut k[..d]);
            out[idx] = k[..d].iter().map(|v| v * v).sum();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn torus_1d_layout() {
        let g = Grid::torus(1, 8).unwrap();
        assert!((g.spacing() - TAU / 8.0).abs() < 1e-15);
        let mut ks: Vec<i64> = g.axis_wavenumbers().iter().map(|k| k.round() as i64).collect();
        ks.sort_unstable();
        assert_eq!(ks, vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        assert!(g.axis_coords().iter().all(|&x| (0.0..TAU).contains(&x)));
    }

    #[test]
    fn box_1d_layout() {
        let g = Grid::boxed(1, 10.0, 16).unwrap();
        assert!((g.spacing() - 1.25).abs() < 1e-15);
        assert!((g.axis_coords()[0] + 10.0).abs() < 1e-15);
        assert!((g.axis_coords()[15] - 8.75).abs() < 1e-12);
        // fundamental wavenumber π/L
        assert!((g.axis_wavenumbers()[1] - std::f64::consts::PI / 10.0).abs() < 1e-15);
    }

    #[test]
    fn torus_2d_nodes_and_wavenumbers() {
        let g = Grid::new(Geometry::Torus { dim: 2 }, 8).unwrap();
        assert_eq!(g.len(), 64);
        let mut k = [0.0; 2];
        for idx in 0..g.len() {
            g.wavenumber(idx, &mut k);
            for &kc in &k {
                let m = kc.round() as i64;
                assert!((-4..=3).contains(&m));
            }
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::torus(1, 12).is_err());
        assert!(Grid::torus(1, 4).is_err());
        assert!(Grid::boxed(1, -1.0, 16).is_err());
    }

    #[test]
    fn wavenumbers_symmetric_up_to_nyquist() {
        let g = Grid::torus(1, 32).unwrap();
        let ks = g.axis_wavenumbers();
        for &k in ks {
            let m = k.round() as i64;
            if m != -16 {
                assert!(ks.iter().any(|&q| (q + k).abs() < 1e-12), "missing -{m}");
            }
        }
    }

    #[test]
    fn parseval_roundtrip() {
        let mut rng = seeded(7);
        for (dim, n) in [(1usize, 64usize), (2, 16)] {
            let g = Grid::torus(dim, n).unwrap();
            let orig: Vec<Complex64> = (0..g.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let mut v = orig.clone();
            g.fft_forward(&mut v);
            g.fft_inverse(&mut v);
            let num: f64 = orig
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let den: f64 = orig.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            assert!(num / den < 1e-12, "roundtrip error {}", num / den);
        }
    }

    #[test]
    fn fft_of_single_mode() {
        let g = Grid::torus(1, 32).unwrap();
        let mut v: Vec<Complex64> = g
            .axis_coords()
            .iter()
            .map(|&x| Complex64::new(0.0, 3.0 * x).exp())
            .collect();
        g.fft_forward(&mut v);
        for (i, &k) in g.axis_wavenumbers().iter().enumerate() {
            let expected = if (k - 3.0).abs() < 0.5 { 32.0 } else { 0.0 };
            assert!((v[i].norm() - expected).abs() < 1e-9, "mode {k}: {}", v[i].norm());
        }
    }
}
