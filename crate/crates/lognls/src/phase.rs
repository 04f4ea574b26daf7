//! Closed-form smooth phase library.
//!
//! Two families, matching the two geometries:
//!
//! * periodic: constant + trigonometric polynomial Σ (a cos⟨ν,x⟩ + b sin⟨ν,x⟩),
//! * Euclidean: constant + linear form + Gaussian-envelope monomials
//!   c · x^E · e^{−α|x|²}.
//!
//! Both are closed under partial derivatives, and under the squared
//! gradient |∇φ|² (trig products expand by product-to-sum; envelope
//! products add exponents and decay rates). Gradients, Hessians and
//! sup-norm bounds are exact or densely sampled with a 5% safety factor.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// One trigonometric term a·cos⟨ν,x⟩ + b·sin⟨ν,x⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub freq: Vec<i64>,
    pub cos_amp: f64,
    pub sin_amp: f64,
}

/// One Gaussian-envelope monomial c · Π x_a^{E_a} · e^{−α|x|²}, α > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussTerm {
    pub exps: Vec<u32>,
    pub alpha: f64,
    pub coeff: f64,
}

impl GaussTerm {
    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.coeff;
        for (a, &e) in self.exps.iter().enumerate() {
            v *= x[a].powi(e as i32);
        }
        v * (-self.alpha * x.iter().map(|c| c * c).sum::<f64>()).exp()
    }
}

/// Smooth phase with closed-form derivatives.
///
/// Invariant: trig terms never coexist with linear/Gaussian parts
/// (periodic vs Euclidean family).
#[derive(Debug)]
pub struct SmoothPhase {
    dim: usize,
    constant: f64,
    linear: Vec<f64>,
    trig: Vec<TrigTerm>,
    gauss: Vec<GaussTerm>,
    /// Sampled sup-norm bounds, filled on first use.
    sups: SupCache,
}

#[derive(Debug, Default)]
struct SupCache {
    grad: OnceLock<f64>,
    hess: OnceLock<f64>,
}

impl Clone for SupCache {
    fn clone(&self) -> Self {
        let out = SupCache::default();
        if let Some(v) = self.grad.get() {
            let _ = out.grad.set(*v);
        }
        if let Some(v) = self.hess.get() {
            let _ = out.hess.set(*v);
        }
        out
    }
}

impl Clone for SmoothPhase {
    fn clone(&self) -> Self {
        SmoothPhase {
            dim: self.dim,
            constant: self.constant,
            linear: self.linear.clone(),
            trig: self.trig.clone(),
            gauss: self.gauss.clone(),
            sups: self.sups.clone(),
        }
    }
}

impl PartialEq for SmoothPhase {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.constant == other.constant
            && self.linear == other.linear
            && self.trig == other.trig
            && self.gauss == other.gauss
    }
}

const AMP_EPS: f64 = 1e-14;

impl SmoothPhase {
    pub fn constant(dim: usize, c: f64) -> Self {
        SmoothPhase {
            dim,
            constant: c,
            linear: vec![0.0; dim],
            trig: Vec::new(),
            gauss: Vec::new(),
            sups: SupCache::default(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(dim, 0.0)
    }

    /// c + Σ coeffs_a x_a (Euclidean).
    pub fn linear(coeffs: Vec<f64>, c: f64) -> Self {
        let dim = coeffs.len();
        SmoothPhase {
            dim,
            constant: c,
            linear: coeffs,
            trig: Vec::new(),
            gauss: Vec::new(),
            sups: SupCache::default(),
        }
    }

    /// Single coordinate phase α x_j.
    pub fn coordinate(dim: usize, axis: usize, amp: f64) -> Self {
        let mut coeffs = vec![0.0; dim];
        coeffs[axis] = amp;
        Self::linear(coeffs, 0.0)
    }

    /// a·cos⟨ν,x⟩ + b·sin⟨ν,x⟩ (periodic).
    pub fn trig_wave(freq: Vec<i64>, cos_amp: f64, sin_amp: f64) -> Self {
        let dim = freq.len();
        let mut p = Self::constant(dim, 0.0);
        p.push_trig(freq, cos_amp, sin_amp);
        p
    }

    pub fn from_trig_terms(dim: usize, terms: Vec<TrigTerm>) -> Self {
        let mut p = Self::constant(dim, 0.0);
        for t in terms {
            p.push_trig(t.freq, t.cos_amp, t.sin_amp);
        }
        p
    }

    /// amp · cos(x_axis) on the torus.
    pub fn cosine(dim: usize, axis: usize, amp: f64) -> Self {
        let mut freq = vec![0i64; dim];
        freq[axis] = 1;
        Self::trig_wave(freq, amp, 0.0)
    }

    /// amp · sin(x_axis) on the torus.
    pub fn sine(dim: usize, axis: usize, amp: f64) -> Self {
        let mut freq = vec![0i64; dim];
        freq[axis] = 1;
        Self::trig_wave(freq, 0.0, amp)
    }

    /// c · x^E e^{−α|x|²} (Euclidean).
    pub fn gauss_monomial(exps: Vec<u32>, alpha: f64, coeff: f64) -> Self {
        let dim = exps.len();
        let mut p = Self::constant(dim, 0.0);
        if coeff.abs() > AMP_EPS {
            p.gauss.push(GaussTerm { exps, alpha, coeff });
        }
        p
    }

    /// coeff · e^{−|x|²/2} — the Euclidean control envelope.
    pub fn gauss_envelope(dim: usize, coeff: f64) -> Self {
        Self::gauss_monomial(vec![0; dim], 0.5, coeff)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn linear_part(&self) -> &[f64] {
        &self.linear
    }

    pub fn trig_terms(&self) -> &[TrigTerm] {
        &self.trig
    }

    pub fn gauss_terms(&self) -> &[GaussTerm] {
        &self.gauss
    }

    pub fn is_periodic(&self) -> bool {
        !self.trig.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.trig.is_empty()
            && self.gauss.is_empty()
            && self.linear.iter().all(|c| c.abs() < AMP_EPS)
    }

    fn push_trig(&mut self, freq: Vec<i64>, cos_amp: f64, mut sin_amp: f64) {
        // canonical orientation: first nonzero frequency component positive
        let mut freq = freq;
        if let Some(first) = freq.iter().find(|&&v| v != 0) {
            if *first < 0 {
                for v in &mut freq {
                    *v = -*v;
                }
                sin_amp = -sin_amp;
            }
        } else {
            // zero frequency: cos part is a constant, sin part vanishes
            self.constant += cos_amp;
            return;
        }
        if let Some(t) = self.trig.iter_mut().find(|t| t.freq == freq) {
            t.cos_amp += cos_amp;
            t.sin_amp += sin_amp;
        } else {
            self.trig.push(TrigTerm { freq, cos_amp, sin_amp });
        }
        self.trig.retain(|t| t.cos_amp.abs() > AMP_EPS || t.sin_amp.abs() > AMP_EPS);
    }

    fn push_gauss(&mut self, exps: Vec<u32>, alpha: f64, coeff: f64) {
        if coeff.abs() < AMP_EPS {
            return;
        }
        if let Some(t) = self
            .gauss
            .iter_mut()
            .find(|t| t.exps == exps && (t.alpha - alpha).abs() < 1e-12)
        {
            t.coeff += coeff;
        } else {
            self.gauss.push(GaussTerm { exps, alpha, coeff });
        }
        self.gauss.retain(|t| t.coeff.abs() > AMP_EPS);
    }

    pub fn add(&self, other: &SmoothPhase) -> Result<SmoothPhase> {
        if self.dim != other.dim {
            return Err(Error::InvalidParam("phase dimension mismatch".into()));
        }
        let mut out = self.clone();
        out.sups = SupCache::default();
        out.constant += other.constant;
        for (a, &c) in other.linear.iter().enumerate() {
            out.linear[a] += c;
        }
        for t in &other.trig {
            out.push_trig(t.freq.clone(), t.cos_amp, t.sin_amp);
        }
        for t in &other.gauss {
            out.push_gauss(t.exps.clone(), t.alpha, t.coeff);
        }
        if out.is_periodic() && out.linear.iter().any(|c| c.abs() > AMP_EPS) {
            return Err(Error::InvalidParam("cannot mix periodic and Euclidean phases".into()));
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> SmoothPhase {
        let mut out = self.clone();
        out.sups = SupCache::default();
        out.constant *= c;
        for v in &mut out.linear {
            *v *= c;
        }
        for t in &mut out.trig {
            t.cos_amp *= c;
            t.sin_amp *= c;
        }
        for t in &mut out.gauss {
            t.coeff *= c;
        }
        out.trig.retain(|t| t.cos_amp.abs() > AMP_EPS || t.sin_amp.abs() > AMP_EPS);
        out.gauss.retain(|t| t.coeff.abs() > AMP_EPS);
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.constant;
        for (a, &c) in self.linear.iter().enumerate() {
            v += c * x[a];
        }
        for t in &self.trig {
            let th: f64 = t.freq.iter().zip(x).map(|(&f, &xi)| f as f64 * xi).sum();
            v += t.cos_amp * th.cos() + t.sin_amp * th.sin();
        }
        for t in &self.gauss {
            v += t.eval(x);
        }
        v
    }

    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.linear);
        for t in &self.trig {
            let th: f64 = t.freq.iter().zip(x).map(|(&f, &xi)| f as f64 * xi).sum();
            let d = -t.cos_amp * th.sin() + t.sin_amp * th.cos();
            for (a, &f) in t.freq.iter().enumerate() {
                out[a] += f as f64 * d;
            }
        }
        for t in &self.gauss {
            let base = t.eval(x);
            for a in 0..self.dim {
                // ∂_a (x^E e^{−α|x|²}) = (E_a / x_a − 2αx_a) x^E e^{−α|x|²}
                let mut dv = -2.0 * t.alpha * x[a] * base;
                if t.exps[a] > 0 {
                    let mut reduced = t.coeff * (t.exps[a] as f64);
                    for (b, &e) in t.exps.iter().enumerate() {
                        let ee = if b == a { e - 1 } else { e };
                        reduced *= x[b].powi(ee as i32);
                    }
                    dv += reduced * (-t.alpha * x.iter().map(|c| c * c).sum::<f64>()).exp();
                }
                out[a] += dv;
            }
        }
    }

    pub fn grad_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.grad(x, &mut out);
        out
    }

    /// Hessian at x, row-major d×d.
    pub fn hessian(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        out.fill(0.0);
        for t in &self.trig {
            let th: f64 = t.freq.iter().zip(x).map(|(&f, &xi)| f as f64 * xi).sum();
            let dd = -t.cos_amp * th.cos() - t.sin_amp * th.sin();
            for a in 0..d {
                for b in 0..d {
                    out[a * d + b] += (t.freq[a] * t.freq[b]) as f64 * dd;
                }
            }
        }
        if !self.gauss.is_empty() {
            // exact second derivatives of the envelope monomials
            for t in &self.gauss {
                let env = (-t.alpha * x.iter().map(|c| c * c).sum::<f64>()).exp();
                let mono = |exps: &[i64]| -> f64 {
                    let mut v = 1.0;
                    for (b, &e) in exps.iter().enumerate() {
                        if e < 0 {
                            return 0.0;
                        }
                        v *= x[b].powi(e as i32);
                    }
                    v
                };
                let e: Vec<i64> = t.exps.iter().map(|&v| v as i64).collect();
                for a in 0..d {
                    for b in 0..d {
                        // ∂_a∂_b of x^E e^{−α|x|²}
                        let mut v = 0.0;
                        let (ea, eb) = (e[a], e[b]);
                        // term-by-term product rule
                        if a == b {
                            let mut e2 = e.clone();
                            e2[a] -= 2;
                            v += (ea * (ea - 1)) as f64 * mono(&e2);
                            v += -2.0 * t.alpha * mono(&e);
                        } else {
                            let mut e2 = e.clone();
                            e2[a] -= 1;
                            e2[b] -= 1;
                            v += (ea * eb) as f64 * mono(&e2);
                        }
                        let mut ea_up = e.clone();
                        ea_up[b] += 1;
                        ea_up[a] -= 1;
                        v += -2.0 * t.alpha * ea as f64 * mono(&ea_up);
                        let mut eb_up = e.clone();
                        eb_up[a] += 1;
                        eb_up[b] -= 1;
                        v += -2.0 * t.alpha * eb as f64 * mono(&eb_up);
                        let mut e_upup = e.clone();
                        e_upup[a] += 1;
                        e_upup[b] += 1;
                        v += 4.0 * t.alpha * t.alpha * mono(&e_upup);
                        out[a * d + b] += t.coeff * env * v;
                    }
                }
            }
        }
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        let mut h = vec![0.0; d * d];
        self.hessian(x, &mut h);
        (0..d).map(|a| h[a * d + a]).sum()
    }

    /// Symbolic |∇φ|²; stays in the phase family for both classes.
    pub fn grad_square(&self) -> SmoothPhase {
        let d = self.dim;
        let mut out = SmoothPhase::constant(d, 0.0);
        if self.is_periodic() {
            // ∂_aφ as a trig polynomial: per term, cos' = sin_amp·ν_a, sin' = −cos_amp·ν_a
            for a in 0..d {
                let da: Vec<TrigTerm> = self
                    .trig
                    .iter()
                    .filter(|t| t.freq[a] != 0)
                    .map(|t| TrigTerm {
                        freq: t.freq.clone(),
                        cos_amp: t.sin_amp * t.freq[a] as f64,
                        sin_amp: -t.cos_amp * t.freq[a] as f64,
                    })
                    .collect();
                for t1 in &da {
                    for t2 in &da {
                        // product-to-sum on (a1 cosθ1 + b1 sinθ1)(a2 cosθ2 + b2 sinθ2)
                        let (a1, b1) = (t1.cos_amp, t1.sin_amp);
                        let (a2, b2) = (t2.cos_amp, t2.sin_amp);
                        let sum: Vec<i64> =
                            t1.freq.iter().zip(&t2.freq).map(|(p, q)| p + q).collect();
                        let diff: Vec<i64> =
                            t1.freq.iter().zip(&t2.freq).map(|(p, q)| p - q).collect();
                        out.push_trig(sum, (a1 * a2 - b1 * b2) / 2.0, (b1 * a2 + a1 * b2) / 2.0);
                        out.push_trig(diff, (a1 * a2 + b1 * b2) / 2.0, (b1 * a2 - a1 * b2) / 2.0);
                    }
                }
            }
        } else {
            // ∂_aφ = linear[a] + Σ envelope terms
            for a in 0..d {
                let la = self.linear[a];
                let mut da: Vec<GaussTerm> = Vec::new();
                for t in &self.gauss {
                    da.push(GaussTerm {
                        exps: {
                            let mut e = t.exps.clone();
                            e[a] += 1;
                            e
                        },
                        alpha: t.alpha,
                        coeff: -2.0 * t.alpha * t.coeff,
                    });
                    if t.exps[a] > 0 {
                        let mut e = t.exps.clone();
                        e[a] -= 1;
                        da.push(GaussTerm {
                            exps: e,
                            alpha: t.alpha,
                            coeff: t.coeff * t.exps[a] as f64,
                        });
                    }
                }
                out.constant += la * la;
                for t in &da {
                    out.push_gauss(t.exps.clone(), t.alpha, 2.0 * la * t.coeff);
                }
                for t1 in &da {
                    for t2 in &da {
                        let exps: Vec<u32> =
                            t1.exps.iter().zip(&t2.exps).map(|(p, q)| p + q).collect();
                        out.push_gauss(exps, t1.alpha + t2.alpha, t1.coeff * t2.coeff);
                    }
                }
            }
        }
        out
    }

    /// Symbolic partial derivative ∂_axis φ.
    pub fn partial(&self, axis: usize) -> SmoothPhase {
        let d = self.dim;
        let mut out = SmoothPhase::constant(d, self.linear[axis]);
        for t in &self.trig {
            if t.freq[axis] != 0 {
                out.push_trig(
                    t.freq.clone(),
                    t.sin_amp * t.freq[axis] as f64,
                    -t.cos_amp * t.freq[axis] as f64,
                );
            }
        }
        for t in &self.gauss {
            let mut e = t.exps.clone();
            e[axis] += 1;
            out.push_gauss(e, t.alpha, -2.0 * t.alpha * t.coeff);
            if t.exps[axis] > 0 {
                let mut e = t.exps.clone();
                e[axis] -= 1;
                out.push_gauss(e, t.alpha, t.coeff * t.exps[axis] as f64);
            }
        }
        out
    }

    fn sample_points(&self) -> Vec<Vec<f64>> {
        // dense lattice: periodic over [0,2π)^d, Euclidean over [−10,10]^d
        let per_axis: usize = match self.dim {
            1 => 1024,
            2 => 64,
            _ => 24,
        };
        let (lo, span) = if self.is_periodic() {
            (0.0, std::f64::consts::TAU)
        } else {
            (-10.0, 20.0)
        };
        let mut pts = Vec::with_capacity(per_axis.pow(self.dim as u32));
        let mut idx = vec![0usize; self.dim];
        loop {
            pts.push(idx.iter().map(|&i| lo + span * (i as f64 + 0.5) / per_axis as f64).collect());
            let mut a = 0;
            loop {
                idx[a] += 1;
                if idx[a] < per_axis {
                    break;
                }
                idx[a] = 0;
                a += 1;
                if a == self.dim {
                    return pts;
                }
            }
        }
    }

    /// sup |∇φ| bound: exact for linear-only phases, otherwise dense
    /// sampling with a 5% safety factor. Cached after the first call.
    pub fn grad_sup(&self) -> f64 {
        *self.sups.grad.get_or_init(|| {
            if self.trig.is_empty() && self.gauss.is_empty() {
                return self.linear.iter().map(|c| c * c).sum::<f64>().sqrt();
            }
            let mut g = vec![0.0; self.dim];
            let mut best: f64 = 0.0;
            for p in self.sample_points() {
                self.grad(&p, &mut g);
                best = best.max(g.iter().map(|c| c * c).sum::<f64>().sqrt());
            }
            best * 1.05
        })
    }

    /// sup ‖D²φ‖ (spectral norm) bound, sampled with a 5% safety
    /// factor. Cached after the first call.
    pub fn hess_sup(&self) -> f64 {
        *self.sups.hess.get_or_init(|| {
            if self.trig.is_empty() && self.gauss.is_empty() {
                return 0.0;
            }
            let d = self.dim;
            let mut h = vec![0.0; d * d];
            let mut best: f64 = 0.0;
            for p in self.sample_points() {
                self.hessian(&p, &mut h);
                best = best.max(sym_norm(&h, d));
            }
            best * 1.05
        })
    }
}

/// Spectral norm of a symmetric d×d matrix, d ≤ 3 (Frobenius bound for d=3).
pub fn sym_norm(h: &[f64], d: usize) -> f64 {
    match d {
        1 => h[0].abs(),
        2 => {
            let (a, b, c) = (h[0], h[1], h[3]);
            let mean = (a + c) / 2.0;
            let disc = ((a - c) / 2.0).powi(2) + b * b;
            let r = disc.sqrt();
            (mean + r).abs().max((mean - r).abs())
        }
        _ => h.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

impl std::fmt::Display for SmoothPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.constant.abs() > AMP_EPS {
            parts.push(format!("{:.6}", self.constant));
        }
        for (a, &c) in self.linear.iter().enumerate() {
            if c.abs() > AMP_EPS {
                parts.push(format!("{:.6}*x{}", c, a + 1));
            }
        }
        for t in &self.trig {
            if t.cos_amp.abs() > AMP_EPS {
                parts.push(format!("{:.6}*cos<{:?},x>", t.cos_amp, t.freq));
            }
            if t.sin_amp.abs() > AMP_EPS {
                parts.push(format!("{:.6}*sin<{:?},x>", t.sin_amp, t.freq));
            }
        }
        for t in &self.gauss {
            parts.push(format!("{:.6}*x^{:?}*exp(-{}|x|^2)", t.coeff, t.exps, t.alpha));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Group trig terms by frequency for synthesis decompositions.
pub fn trig_by_freq(phase: &SmoothPhase) -> BTreeMap<Vec<i64>, (f64, f64)> {
    let mut map = BTreeMap::new();
    for t in phase.trig_terms() {
        let e = map.entry(t.freq.clone()).or_insert((0.0, 0.0));
        e.0 += t.cos_amp;
        e.1 += t.sin_amp;
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(p: &SmoothPhase, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|a| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[a] += h;
                xm[a] -= h;
                (p.eval(&xp) - p.eval(&xm)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn trig_derivatives_match_finite_differences() {
        let p = SmoothPhase::from_trig_terms(
            2,
            vec![
                TrigTerm { freq: vec![1, 0], cos_amp: 0.5, sin_amp: -0.2 },
                TrigTerm { freq: vec![1, 1], cos_amp: 0.1, sin_amp: 0.7 },
            ],
        );
        let x = [0.4, -1.1];
        let g = p.grad_vec(&x);
        let fd = fd_grad(&p, &x);
        for a in 0..2 {
            assert!((g[a] - fd[a]).abs() < 1e-8);
        }
        let mut h = [0.0; 4];
        p.hessian(&x, &mut h);
        let hfd = {
            let eps = 1e-5;
            let mut out = [0.0; 4];
            for a in 0..2 {
                for b in 0..2 {
                    let mut xpp = x;
                    xpp[a] += eps;
                    let gp = p.grad_vec(&xpp)[b];
                    let mut xmm = x;
                    xmm[a] -= eps;
                    let gm = p.grad_vec(&xmm)[b];
                    out[a * 2 + b] = (gp - gm) / (2.0 * eps);
                }
            }
            out
        };
        for i in 0..4 {
            assert!((h[i] - hfd[i]).abs() < 1e-7, "hessian[{i}]: {} vs {}", h[i], hfd[i]);
        }
    }

    #[test]
    fn gauss_derivatives_match_finite_differences() {
        let p = SmoothPhase::gauss_monomial(vec![1, 2], 0.25, 0.8)
            .add(&SmoothPhase::gauss_envelope(2, -0.4))
            .unwrap()
            .add(&SmoothPhase::linear(vec![0.3, -0.1], 0.2))
            .unwrap();
        let x = [0.9, -0.6];
        let g = p.grad_vec(&x);
        let fd = fd_grad(&p, &x);
        for a in 0..2 {
            assert!((g[a] - fd[a]).abs() < 1e-7, "{} vs {}", g[a], fd[a]);
        }
        let mut h = [0.0; 4];
        p.hessian(&x, &mut h);
        let eps = 1e-5;
        for a in 0..2 {
            for b in 0..2 {
                let mut xp = x;
                xp[a] += eps;
                let mut xm = x;
                xm[a] -= eps;
                let fdh = (p.grad_vec(&xp)[b] - p.grad_vec(&xm)[b]) / (2.0 * eps);
                assert!((h[a * 2 + b] - fdh).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn grad_square_trig_closed_form() {
        // φ = 0.5 sin x ⇒ |∇φ|² = 0.25 cos²x = 0.125 + 0.125 cos 2x
        let p = SmoothPhase::sine(1, 0, 0.5);
        let gs = p.grad_square();
        for &x in &[0.0f64, 0.3, 1.0, 2.5, -0.7] {
            let expect = 0.25 * x.cos() * x.cos();
            assert!((gs.eval(&[x]) - expect).abs() < 1e-12);
        }
        assert!((gs.constant_part() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn grad_square_euclidean_closed_form() {
        // φ = αx + c e^{−x²/2}: φ' = α − c x e^{−x²/2}
        let p = SmoothPhase::linear(vec![0.7], 0.0)
            .add(&SmoothPhase::gauss_envelope(1, 1.3))
            .unwrap();
        let gs = p.grad_square();
        for &x in &[0.0f64, 0.5, -1.2, 2.0] {
            let dp = 0.7 - 1.3 * x * (-x * x / 2.0).exp();
            assert!((gs.eval(&[x]) - dp * dp).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_derivative_symbolic() {
        let p = SmoothPhase::gauss_envelope(1, 1.0);
        let dp = p.partial(0);
        for &x in &[0.0f64, 0.4, -2.0] {
            let expect = -x * (-x * x / 2.0).exp();
            assert!((dp.eval(&[x]) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn sup_bounds_dominate_samples() {
        let p = SmoothPhase::cosine(1, 0, 0.5);
        // ‖∇φ‖_∞ = 0.5, ‖D²φ‖_∞ = 0.5
        let gs = p.grad_sup();
        let hs = p.hess_sup();
        assert!(gs >= 0.5 && gs <= 0.53, "{gs}");
        assert!(hs >= 0.5 && hs <= 0.53, "{hs}");
        // linear phase: exact values, no inflation
        let lin = SmoothPhase::linear(vec![3.0, 4.0], 0.0);
        assert!((lin.grad_sup() - 5.0).abs() < 1e-12);
        assert_eq!(lin.hess_sup(), 0.0);
    }

    #[test]
    fn mixing_families_rejected() {
        let trig = SmoothPhase::cosine(1, 0, 1.0);
        let lin = SmoothPhase::linear(vec![1.0], 0.0);
        assert!(trig.add(&lin).is_err());
    }
}
