//! Control plans realizing small-time reachable maps.
//!
//! A [`Plan`] is an ordered tree of primitives — phase imprints, free
//! evolutions and transport markers — together with the ideal
//! [`TargetMap`] it approximates. Compilation flattens the tree into an
//! executable sequence: in exact mode an imprint is a zero-duration
//! multiplication by e^{iφ}; in synthesized mode it becomes a control
//! segment u ≡ −α/τ' of duration τ' (when φ = c₀ + Σ α_j W_j lies in
//! the control span) or a recursive squared-gradient expansion (torus,
//! one extra level). Constant phase parts are accumulated as the plan's
//! expected global phase, which scoring removes by alignment.
//!
//! Built-in constructors:
//!
//! * [`phase_imprint_plan`] — u ≡ −α/τ on [0,τ] targets e^{iΣα_jW_j},
//! * [`translation_plan`] — imprint e^{−iαx_j/τ}, drift τ, imprint
//!   e^{i(α²/2+αx_j)/τ} targets e^{α∂_{x_j}},
//! * [`grad_square_plan`] — imprint e^{iφ/τ}, drift τ², imprint
//!   e^{−iφ/τ} targets e^{−(i/2)|∇φ|²},
//! * [`conjugated_derivative_plan`] — imprint-conjugated translation
//!   targets e^{−i∂_jφ},
//! * [`trotter_plan`] — n rounds of
//!   e^{i|∇φ|²/(2nτ)} e^{−iφ/τ} · free(τ/n) · e^{iφ/τ}
//!   target the gradient flow e^{−𝒯_{∇φ}}, through the intermediate
//!   transported solution R(1;τ,φ).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::grid::Geometry;
use crate::phase::SmoothPhase;
use crate::potential::{ControlForm, PotentialFamily};
use crate::schedule::ControlSchedule;
use crate::solver::{evolve, solve_r, PhaseProvider, SolverContext};
use crate::transport::{pushforward, VectorField};

/// Default recursion depth for synthesized imprints: the control span
/// plus one squared-gradient level.
pub const DEFAULT_SYNTH_DEPTH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImprintMode {
    /// Zero-duration operator application (idealized imprint).
    Exact,
    /// Control segment of duration tau_imp.
    Synthesized { tau_imp: f64 },
}

#[derive(Debug, Clone)]
pub enum PlanNode {
    /// Multiply by e^{iφ}; mode = None inherits the compile default.
    Imprint { phase: SmoothPhase, mode: Option<ImprintMode> },
    /// Free evolution of the physical equation at the given τ-scale.
    FreeEvolve { duration: f64, tau_scale: f64 },
    /// Translation primitive e^{α∂_{x_j}} applied as an exact map
    /// (zero duration); constructions that conjugate an already-proven
    /// primitive use this to isolate their own error term.
    ExactTranslate { axis: usize, alpha: f64 },
    /// Bookkeeping marker: this subtree realizes a transport map.
    TransportRef { label: String, t: f64 },
    Seq(Vec<PlanNode>),
}

impl PlanNode {
    fn describe(&self, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match self {
            PlanNode::Imprint { phase, mode } => {
                let m = match mode {
                    None => "default".to_string(),
                    Some(ImprintMode::Exact) => "exact".to_string(),
                    Some(ImprintMode::Synthesized { tau_imp }) => format!("synth(tau'={tau_imp})"),
                };
                out.push_str(&format!("{pad}imprint[{m}] {phase}\n"));
            }
            PlanNode::FreeEvolve { duration, tau_scale } => {
                out.push_str(&format!("{pad}free duration={duration} tau={tau_scale}\n"));
            }
            PlanNode::ExactTranslate { axis, alpha } => {
                out.push_str(&format!("{pad}translate-exact x{} by {alpha}\n", axis + 1));
            }
            PlanNode::TransportRef { label, t } => {
                out.push_str(&format!("{pad}transport-ref {label} t={t}\n"));
            }
            PlanNode::Seq(children) => {
                out.push_str(&format!("{pad}seq\n"));
                for c in children {
                    c.describe(indent + 1, out);
                }
            }
        }
    }
}

/// Ideal map a plan approximates; evaluable exactly on a state.
#[derive(Debug, Clone)]
pub enum TargetMap {
    Identity,
    /// ψ ↦ e^{iφ}ψ
    PhaseMultiply(SmoothPhase),
    /// ψ ↦ ψ(· + α e_j)
    Translate { axis: usize, alpha: f64 },
    /// ψ ↦ e^{−(i/2)|∇φ|²}ψ
    GradSquarePhase(SmoothPhase),
    /// ψ ↦ e^{−i ∂_jφ}ψ
    DerivativePhase { axis: usize, phase: SmoothPhase },
    /// ψ ↦ e^{−t·𝒯_{∇φ}}ψ (pushforward along ∇φ for time −t)
    GradientFlow { phase: SmoothPhase, t: f64 },
    /// ψ ↦ R(1; τ, φ)ψ — the transported solution with static phase
    RTransported { phase: SmoothPhase, tau: f64 },
    /// Components applied in order (first entry first).
    Composite(Vec<TargetMap>),
}

impl TargetMap {
    pub fn label(&self) -> String {
        match self {
            TargetMap::Identity => "identity".into(),
            TargetMap::PhaseMultiply(p) => format!("phase-multiply[{p}]"),
            TargetMap::Translate { axis, alpha } => format!("translate[x{} by {alpha}]", axis + 1),
            TargetMap::GradSquarePhase(p) => format!("grad-square[{p}]"),
            TargetMap::DerivativePhase { axis, phase } => {
                format!("derivative-phase[d{} of {phase}]", axis + 1)
            }
            TargetMap::GradientFlow { phase, t } => format!("gradient-flow[{phase}, t={t}]"),
            TargetMap::RTransported { phase, tau } => {
                format!("transported[{phase}, tau={tau}]")
            }
            TargetMap::Composite(v) => {
                format!("composite[{}]", v.iter().map(|t| t.label()).collect::<Vec<_>>().join(" ; "))
            }
        }
    }
}

/// Apply the ideal target exactly (multiplications, spectral shifts,
/// pushforwards; the transported target integrates its defining
/// equation with the context's solver settings).
pub fn apply_target(target: &TargetMap, psi: &WaveField, ctx: &SolverContext) -> Result<WaveField> {
    let grid = psi.grid().clone();
    match target {
        TargetMap::Identity => Ok(psi.clone()),
        TargetMap::PhaseMultiply(p) => {
            let mut out = psi.clone();
            let ph = grid.sample(|x| p.eval(x));
            out.multiply_phase(&ph);
            Ok(out)
        }
        TargetMap::Translate { axis, alpha } => {
            let mut shift = vec![0.0; grid.dim()];
            shift[*axis] = *alpha;
            Ok(psi.translate(&shift))
        }
        TargetMap::GradSquarePhase(p) => {
            let mut out = psi.clone();
            let mut g = vec![0.0; grid.dim()];
            let mut ph = vec![0.0; grid.len()];
            grid.for_each_node(|i, x| {
                p.grad(x, &mut g);
                ph[i] = -0.5 * g.iter().map(|c| c * c).sum::<f64>();
            });
            out.multiply_phase(&ph);
            Ok(out)
        }
        TargetMap::DerivativePhase { axis, phase } => {
            let mut out = psi.clone();
            let mut g = vec![0.0; grid.dim()];
            let mut ph = vec![0.0; grid.len()];
            grid.for_each_node(|i, x| {
                phase.grad(x, &mut g);
                ph[i] = -g[*axis];
            });
            out.multiply_phase(&ph);
            Ok(out)
        }
        TargetMap::GradientFlow { phase, t } => {
            let f = VectorField::Gradient(phase.clone());
            pushforward(&f, -t, psi, ctx.interp)
        }
        TargetMap::RTransported { phase, tau } => {
            solve_r(psi, 1.0, *tau, Some(PhaseProvider::Static(phase.clone())), ctx)
        }
        TargetMap::Composite(parts) => {
            let mut state = psi.clone();
            for p in parts {
                state = apply_target(p, &state, ctx)?;
            }
            Ok(state)
        }
    }
}

/// A synthesis plan: primitive tree plus its ideal target.
#[derive(Debug, Clone)]
pub struct Plan {
    pub root: PlanNode,
    pub target: TargetMap,
    pub label: String,
    /// Intermediate reference recorded by some constructors (the
    /// Trotter plan keeps R(1;τ,φ) for the n-rate study).
    pub intermediate_target: Option<TargetMap>,
}

impl Plan {
    /// Sequential composition; the composite target applies the parts'
    /// targets in the same order.
    pub fn compose(parts: Vec<Plan>) -> Plan {
        let label =
            parts.iter().map(|p| p.label.clone()).collect::<Vec<_>>().join(" ; ");
        let targets = parts.iter().map(|p| p.target.clone()).collect();
        let nodes = parts.into_iter().map(|p| p.root).collect();
        Plan {
            root: PlanNode::Seq(nodes),
            target: TargetMap::Composite(targets),
            label,
            intermediate_target: None,
        }
    }

    /// Human-readable declarative form of the node tree.
    pub fn describe(&self) -> String {
        let mut out = format!("plan {} -> {}\n", self.label, self.target.label());
        self.root.describe(1, &mut out);
        out
    }
}

/// Phase of one control field as a closed-form smooth phase.
fn control_phase(form: &ControlForm, dim: usize, amp: f64) -> Option<SmoothPhase> {
    match form {
        ControlForm::SinB(b) => Some(SmoothPhase::trig_wave(b.clone(), 0.0, amp)),
        ControlForm::CosB(b) => Some(SmoothPhase::trig_wave(b.clone(), amp, 0.0)),
        ControlForm::Coordinate(j) => Some(SmoothPhase::coordinate(dim, *j, amp)),
        ControlForm::GaussEnvelope => Some(SmoothPhase::gauss_envelope(dim, amp)),
        ControlForm::HalfSquare => None,
    }
}

/// φ = Σ α_j W_j for the family's control fields.
pub fn span_phase(family: &PotentialFamily, dim: usize, alpha: &[f64]) -> Result<SmoothPhase> {
    if alpha.len() != family.num_controls() {
        return Err(Error::InvalidParam(format!(
            "coefficient vector has {} entries, family has {}",
            alpha.len(),
            family.num_controls()
        )));
    }
    let mut phase = SmoothPhase::zero(dim);
    for (a, c) in alpha.iter().zip(&family.controls) {
        if *a == 0.0 {
            continue;
        }
        let p = control_phase(&c.form, dim, *a).ok_or_else(|| {
            Error::InvalidParam(format!(
                "control field {} has no closed-form phase",
                c.form.label()
            ))
        })?;
        phase = phase.add(&p)?;
    }
    Ok(phase)
}

/// Split φ into c₀ + Σ α_j W_j + remainder against the family span.
fn base_decomposition(
    phase: &SmoothPhase,
    family: &PotentialFamily,
) -> Result<(f64, Vec<f64>, SmoothPhase)> {
    let dim = phase.dim();
    let mut coeffs = vec![0.0; family.num_controls()];
    for (j, c) in family.controls.iter().enumerate() {
        coeffs[j] = match &c.form {
            ControlForm::SinB(b) => phase
                .trig_terms()
                .iter()
                .find(|t| &t.freq == b)
                .map_or(0.0, |t| t.sin_amp),
            ControlForm::CosB(b) => phase
                .trig_terms()
                .iter()
                .find(|t| &t.freq == b)
                .map_or(0.0, |t| t.cos_amp),
            ControlForm::Coordinate(a) => phase.linear_part()[*a],
            ControlForm::GaussEnvelope => phase
                .gauss_terms()
                .iter()
                .find(|t| t.exps.iter().all(|&e| e == 0) && (t.alpha - 0.5).abs() < 1e-12)
                .map_or(0.0, |t| t.coeff),
            ControlForm::HalfSquare => 0.0,
        };
    }
    let mut rem = phase.clone();
    for (j, &a) in coeffs.iter().enumerate() {
        if a != 0.0 {
            let p = control_phase(&family.controls[j].form, dim, -a).unwrap();
            rem = rem.add(&p)?;
        }
    }
    let c0 = rem.constant_part();
    rem = rem.add(&SmoothPhase::constant(dim, -c0))?;
    Ok((c0, coeffs, rem))
}

fn is_negligible(phase: &SmoothPhase) -> bool {
    phase.is_constant() && phase.constant_part().abs() < 1e-12
}

/// Executable flattening of a plan.
#[derive(Debug, Clone)]
pub enum ExecStep {
    /// Multiply by e^{iφ} (zero duration).
    Multiply(SmoothPhase),
    /// Exact spectral translation by α along one axis (zero duration).
    Shift { axis: usize, alpha: f64 },
    /// Evolve for the duration with the constant control vector.
    Segment { duration: f64, u: Vec<f64>, tau_scale: f64 },
}

#[derive(Debug, Clone)]
pub struct CompiledPlan {
    pub steps: Vec<ExecStep>,
    pub expected_phase: f64,
}

impl CompiledPlan {
    pub fn control_time(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| match s {
                ExecStep::Multiply(_) | ExecStep::Shift { .. } => 0.0,
                ExecStep::Segment { duration, .. } => *duration,
            })
            .sum()
    }

    pub fn num_operator_applications(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, ExecStep::Multiply(_) | ExecStep::Shift { .. }))
            .count()
    }

    pub fn num_segments(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, ExecStep::Segment { .. })).count()
    }

    /// Concatenated control schedule of the segments alone.
    pub fn schedule(&self, m: usize) -> ControlSchedule {
        let mut out = ControlSchedule::empty();
        for s in &self.steps {
            if let ExecStep::Segment { duration, u, .. } = s {
                let seg = ControlSchedule::constant(
                    if u.is_empty() { vec![0.0; m] } else { u.clone() },
                    *duration,
                )
                .expect("positive duration");
                out = out.concat(&seg).expect("channel counts agree");
            }
        }
        out
    }
}

/// Compile with the default synthesis depth.
pub fn compile(
    plan: &Plan,
    family: &PotentialFamily,
    default_mode: ImprintMode,
) -> Result<CompiledPlan> {
    compile_with_depth(plan, family, default_mode, DEFAULT_SYNTH_DEPTH)
}

pub fn compile_with_depth(
    plan: &Plan,
    family: &PotentialFamily,
    default_mode: ImprintMode,
    max_depth: usize,
) -> Result<CompiledPlan> {
    let mut steps = Vec::new();
    let mut expected_phase = 0.0;
    flatten(&plan.root, family, default_mode, max_depth, &mut steps, &mut expected_phase)?;
    Ok(CompiledPlan { steps, expected_phase })
}

fn flatten(
    node: &PlanNode,
    family: &PotentialFamily,
    default_mode: ImprintMode,
    depth: usize,
    steps: &mut Vec<ExecStep>,
    expected_phase: &mut f64,
) -> Result<()> {
    match node {
        PlanNode::Seq(children) => {
            for c in children {
                flatten(c, family, default_mode, depth, steps, expected_phase)?;
            }
        }
        PlanNode::TransportRef { .. } => {}
        PlanNode::ExactTranslate { axis, alpha } => {
            steps.push(ExecStep::Shift { axis: *axis, alpha: *alpha });
        }
        PlanNode::FreeEvolve { duration, tau_scale } => {
            if *duration > 0.0 {
                steps.push(ExecStep::Segment {
                    duration: *duration,
                    u: vec![0.0; family.num_controls()],
                    tau_scale: *tau_scale,
                });
            }
        }
        PlanNode::Imprint { phase, mode } => {
            let mode = mode.unwrap_or(default_mode);
            match mode {
                ImprintMode::Exact => steps.push(ExecStep::Multiply(phase.clone())),
                ImprintMode::Synthesized { tau_imp } => {
                    synthesize_imprint(phase, tau_imp, family, depth, steps, expected_phase)?;
                }
            }
        }
    }
    Ok(())
}

/// Emit control segments realizing e^{iφ} at duration τ'. Base-span
/// parts become one segment u = −α/τ'; non-base trig harmonics are
/// expanded through squared-gradient plans one recursion level down.
fn synthesize_imprint(
    phase: &SmoothPhase,
    tau_imp: f64,
    family: &PotentialFamily,
    depth: usize,
    steps: &mut Vec<ExecStep>,
    expected_phase: &mut f64,
) -> Result<()> {
    if tau_imp <= 0.0 {
        return Err(Error::InvalidParam("synthesized imprint needs tau' > 0".into()));
    }
    let (c0, coeffs, remainder) = base_decomposition(phase, family)?;
    *expected_phase += c0;
    if !is_negligible(&remainder) {
        if depth == 0 {
            return Err(Error::DepthExceeded {
                depth: 0,
                reason: format!("residual phase {remainder} outside the control span"),
            });
        }
        expand_remainder(&remainder, tau_imp, family, depth, steps, expected_phase)?;
    }
    // base segment u = −α/τ' over [0, τ']
    let u: Vec<f64> = coeffs.iter().map(|&c| -c / tau_imp).collect();
    steps.push(ExecStep::Segment { duration: tau_imp, u, tau_scale: 1.0 });
    Ok(())
}

/// Write each non-base harmonic 2μ of the remainder as −½|∇χ|² + const
/// with χ = α sin⟨μ,x⟩ + β cos⟨μ,x⟩ in the base span, and emit the
/// squared-gradient sandwich imprint(χ/τ_g), free(τ_g²), imprint(−χ/τ_g).
fn expand_remainder(
    remainder: &SmoothPhase,
    tau_imp: f64,
    family: &PotentialFamily,
    depth: usize,
    steps: &mut Vec<ExecStep>,
    expected_phase: &mut f64,
) -> Result<()> {
    if !remainder.is_periodic() {
        return Err(Error::DepthExceeded {
            depth,
            reason: format!("no recursive route for non-periodic residual {remainder}"),
        });
    }
    let _dim = remainder.dim();
    let base_freqs: Vec<Vec<i64>> = family
        .controls
        .iter()
        .filter_map(|c| match &c.form {
            ControlForm::SinB(b) => Some(b.clone()),
            _ => None,
        })
        .collect();
    for term in remainder.trig_terms() {
        let half: Option<Vec<i64>> = if term.freq.iter().all(|v| v % 2 == 0) {
            Some(term.freq.iter().map(|v| v / 2).collect())
        } else {
            None
        };
        let mu = half.filter(|h| base_freqs.iter().any(|b| b == h)).ok_or_else(|| {
            Error::DepthExceeded {
                depth,
                reason: format!("harmonic {:?} is not twice a base frequency", term.freq),
            }
        })?;
        let mu2: f64 = mu.iter().map(|&v| (v * v) as f64).sum();
        // e^{i(E cos2θ + D sin2θ)} = e^{−(i/2)|∇χ|²} e^{i|μ|²|z|²/4},
        // z = α+iβ with z² = (−4E + 4iD)/|μ|²
        let z = Complex64::new(-4.0 * term.cos_amp / mu2, 4.0 * term.sin_amp / mu2).sqrt();
        let (alpha, beta) = (z.re, z.im);
        let chi = SmoothPhase::trig_wave(mu.clone(), beta, alpha);
        *expected_phase += mu2 * (alpha * alpha + beta * beta) / 4.0;
        // the sandwich window τ_g trades its own O(τ_g) error against the
        // amplitude χ/τ_g of the inner imprints; √τ' balances the two
        let hess = chi.hess_sup();
        let tau_g = tau_imp.sqrt().min(0.8 / hess.max(1e-12));
        if tau_g * hess >= 0.9 {
            return Err(Error::ContractionViolation(tau_g * hess, 0.9));
        }
        let up = chi.scaled(1.0 / tau_g);
        let down = chi.scaled(-1.0 / tau_g);
        let inner_tau = tau_imp * tau_imp;
        synthesize_imprint(&up, inner_tau, family, depth - 1, steps, expected_phase)?;
        steps.push(ExecStep::Segment {
            duration: tau_g * tau_g,
            u: vec![0.0; family.num_controls()],
            tau_scale: 1.0,
        });
        synthesize_imprint(&down, inner_tau, family, depth - 1, steps, expected_phase)?;
    }
    Ok(())
}

/// u ≡ −α/τ on [0, τ], targeting multiplication by e^{iΣα_jW_j}.
pub fn phase_imprint_plan(
    family: &PotentialFamily,
    dim: usize,
    alpha: &[f64],
    tau: f64,
) -> Result<Plan> {
    if tau <= 0.0 {
        return Err(Error::InvalidParam("imprint time must be positive".into()));
    }
    let phase = span_phase(family, dim, alpha)?;
    Ok(Plan {
        root: PlanNode::Imprint {
            phase: phase.clone(),
            mode: Some(ImprintMode::Synthesized { tau_imp: tau }),
        },
        target: TargetMap::PhaseMultiply(phase),
        label: format!("imprint(tau={tau})"),
        intermediate_target: None,
    })
}

/// imprint e^{−iαx_j/τ} · free(τ) · imprint e^{i(α²/2 + αx_j)/τ},
/// targeting the translation e^{α∂_{x_j}}.
pub fn translation_plan(
    geometry: Geometry,
    dim: usize,
    axis: usize,
    alpha: f64,
    tau: f64,
) -> Result<Plan> {
    if geometry.is_torus() {
        return Err(Error::GeometryMismatch {
            family: "translation plan (x_j is not a control)".into(),
            geometry: "torus".into(),
        });
    }
    if tau <= 0.0 {
        return Err(Error::InvalidParam("translation needs tau > 0".into()));
    }
    let pre = SmoothPhase::coordinate(dim, axis, -alpha / tau);
    let post = SmoothPhase::coordinate(dim, axis, alpha / tau)
        .add(&SmoothPhase::constant(dim, alpha * alpha / (2.0 * tau)))?;
    Ok(Plan {
        root: PlanNode::Seq(vec![
            PlanNode::Imprint { phase: pre, mode: None },
            PlanNode::FreeEvolve { duration: tau, tau_scale: 1.0 },
            PlanNode::Imprint { phase: post, mode: None },
        ]),
        target: TargetMap::Translate { axis, alpha },
        label: format!("translate(x{} by {alpha}, tau={tau})", axis + 1),
        intermediate_target: None,
    })
}

/// imprint e^{iφ/τ} · free(τ²) · imprint e^{−iφ/τ}, targeting
/// e^{−(i/2)|∇φ|²} (torus squared-gradient map).
pub fn grad_square_plan(phase: &SmoothPhase, tau: f64) -> Result<Plan> {
    if tau <= 0.0 {
        return Err(Error::InvalidParam("grad-square needs tau > 0".into()));
    }
    let hess = phase.hess_sup();
    if tau * hess >= 0.9 {
        return Err(Error::ContractionViolation(tau * hess, 0.9));
    }
    let up = phase.scaled(1.0 / tau);
    let down = phase.scaled(-1.0 / tau);
    Ok(Plan {
        root: PlanNode::Seq(vec![
            PlanNode::Imprint { phase: up, mode: None },
            PlanNode::FreeEvolve { duration: tau * tau, tau_scale: 1.0 },
            PlanNode::Imprint { phase: down, mode: None },
        ]),
        target: TargetMap::GradSquarePhase(phase.clone()),
        label: format!("grad-square(tau={tau})"),
        intermediate_target: None,
    })
}

/// e^{iφ/τ} e^{τ∂_{x_j}} e^{−iφ/τ}, targeting e^{−i∂_jφ} (box).
///
/// The inner translation is the already-established primitive; it is
/// kept as an exact map when `inner_plan_tau` is None, or expanded into
/// its imprint/drift/imprint plan with the given free time otherwise.
pub fn conjugated_derivative_plan(
    geometry: Geometry,
    phase: &SmoothPhase,
    axis: usize,
    tau: f64,
    inner_plan_tau: Option<f64>,
) -> Result<Plan> {
    if geometry.is_torus() {
        return Err(Error::GeometryMismatch {
            family: "conjugated derivative (x_j is not a control)".into(),
            geometry: "torus".into(),
        });
    }
    let dim = phase.dim();
    let inner = match inner_plan_tau {
        None => PlanNode::ExactTranslate { axis, alpha: tau },
        Some(t_inner) => translation_plan(geometry, dim, axis, tau, t_inner)?.root,
    };
    let pre = phase.scaled(-1.0 / tau);
    let post = phase.scaled(1.0 / tau);
    Ok(Plan {
        root: PlanNode::Seq(vec![
            PlanNode::Imprint { phase: pre, mode: None },
            inner,
            PlanNode::Imprint { phase: post, mode: None },
        ]),
        target: TargetMap::DerivativePhase { axis, phase: phase.clone() },
        label: format!("conjugated-derivative(d{}, tau={tau})", axis + 1),
        intermediate_target: None,
    })
}

/// n Trotter rounds
/// e^{i|∇φ|²/(2nτ)} ∘ e^{−iφ/τ} ∘ free(τ/n) ∘ e^{iφ/τ}
/// targeting the gradient flow e^{−𝒯_{∇φ}}; the intermediate target
/// R(1;τ,φ) is recorded for the n-rate study.
pub fn trotter_plan(phase: &SmoothPhase, tau: f64, n: usize) -> Result<Plan> {
    if n == 0 || tau <= 0.0 {
        return Err(Error::InvalidParam("trotter plan needs n >= 1 and tau > 0".into()));
    }
    let grad_sq = phase.grad_square();
    let correction = grad_sq.scaled(1.0 / (2.0 * n as f64 * tau));
    let up = phase.scaled(1.0 / tau);
    let down = phase.scaled(-1.0 / tau);
    let mut rounds = Vec::with_capacity(n + 1);
    rounds.push(PlanNode::TransportRef {
        label: format!("gradient flow of {phase}"),
        t: 1.0,
    });
    for _ in 0..n {
        rounds.push(PlanNode::Seq(vec![
            PlanNode::Imprint { phase: up.clone(), mode: None },
            PlanNode::FreeEvolve { duration: tau / n as f64, tau_scale: 1.0 },
            PlanNode::Imprint { phase: down.clone(), mode: None },
            PlanNode::Imprint { phase: correction.clone(), mode: None },
        ]));
    }
    Ok(Plan {
        root: PlanNode::Seq(rounds),
        target: TargetMap::GradientFlow { phase: phase.clone(), t: 1.0 },
        label: format!("trotter(tau={tau}, n={n})"),
        intermediate_target: Some(TargetMap::RTransported { phase: phase.clone(), tau }),
    })
}

/// Execute a compiled plan on a state.
pub fn execute(compiled: &CompiledPlan, psi0: &WaveField, ctx: &SolverContext) -> Result<WaveField> {
    let grid = psi0.grid().clone();
    let mut psi = psi0.clone();
    for step in &compiled.steps {
        match step {
            ExecStep::Multiply(phase) => {
                let ph = grid.sample(|x| phase.eval(x));
                psi.multiply_phase(&ph);
            }
            ExecStep::Shift { axis, alpha } => {
                let mut shift = vec![0.0; grid.dim()];
                shift[*axis] = *alpha;
                psi = psi.translate(&shift);
            }
            ExecStep::Segment { duration, u, tau_scale } => {
                let seg_ctx = ctx.clone().with_tau(*tau_scale);
                let schedule = ControlSchedule::constant(u.clone(), *duration)?;
                psi = evolve(&psi, &schedule, &seg_ctx)?;
            }
        }
    }
    Ok(psi)
}

/// Score of an executed plan against its ideal target.
#[derive(Debug, Clone)]
pub struct ScoreReport {
    /// aligned_distance(executed, target(ψ₀)).
    pub error: f64,
    /// Physical control time actually scheduled.
    pub control_time: f64,
    pub operator_applications: usize,
    pub segments: usize,
    pub expected_phase: f64,
    /// For composite plans: (part label, cumulative aligned error).
    pub breakdown: Vec<(String, f64)>,
}

/// Compile, execute and score a plan. For composite plans built with
/// [`Plan::compose`], the cumulative error after each part is recorded.
pub fn run_and_score(
    plan: &Plan,
    psi0: &WaveField,
    ctx: &SolverContext,
    mode: ImprintMode,
) -> Result<ScoreReport> {
    let n = psi0.norm();
    if (n - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParam(format!("plans run on unit-norm states, got {n}")));
    }
    let compiled = compile(plan, &ctx.potentials, mode)?;
    let mut breakdown = Vec::new();

    let error = match (&plan.root, &plan.target) {
        (PlanNode::Seq(parts), TargetMap::Composite(targets)) if parts.len() == targets.len() => {
            let mut state = psi0.clone();
            let mut reference = psi0.clone();
            let mut err = 0.0;
            for (node, target) in parts.iter().zip(targets) {
                let sub = Plan {
                    root: node.clone(),
                    target: target.clone(),
                    label: target.label(),
                    intermediate_target: None,
                };
                let sub_compiled = compile(&sub, &ctx.potentials, mode)?;
                state = execute(&sub_compiled, &state, ctx)?;
                reference = apply_target(target, &reference, ctx)?;
                err = state.aligned_distance_renormalized(&reference)?;
                breakdown.push((target.label(), err));
            }
            err
        }
        _ => {
            let executed = execute(&compiled, psi0, ctx)?;
            let reference = apply_target(&plan.target, psi0, ctx)?;
            executed.aligned_distance_renormalized(&reference)?
        }
    };
    Ok(ScoreReport {
        error,
        control_time: compiled.control_time(),
        operator_applications: compiled.num_operator_applications(),
        segments: compiled.num_segments(),
        expected_phase: compiled.expected_phase,
        breakdown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::potential::{standard_potentials, FamilyTag};
    use crate::rng::seeded;

    fn torus_setup(n: usize, dt: f64) -> (Grid, SolverContext) {
        let g = Grid::torus(1, n).unwrap();
        let fam = standard_potentials(&g, FamilyTag::TorusTrig).unwrap();
        (g.clone(), SolverContext::new(fam, -1.0, dt))
    }

    fn box_setup(n: usize, dt: f64) -> (Grid, SolverContext) {
        let g = Grid::boxed(1, 12.0, n).unwrap();
        let fam = standard_potentials(&g, FamilyTag::EuclideanLinearGauss).unwrap();
        (g.clone(), SolverContext::new(fam, -1.0, dt))
    }

    #[test]
    fn zero_imprint_is_free_evolution_with_identity_target() {
        let (g, ctx) = torus_setup(64, 1e-3);
        let plan = phase_imprint_plan(&ctx.potentials, g.dim(), &[0.0, 0.0], 0.05).unwrap();
        let compiled =
            compile(&plan, &ctx.potentials, ImprintMode::Synthesized { tau_imp: 0.01 }).unwrap();
        assert_eq!(compiled.num_segments(), 1);
        assert!((compiled.control_time() - 0.05).abs() < 1e-15);
        if let ExecStep::Segment { u, .. } = &compiled.steps[0] {
            assert!(u.iter().all(|&v| v == 0.0));
        } else {
            panic!("expected a control segment");
        }
    }

    #[test]
    fn imprint_error_decreases_with_tau() {
        let (g, ctx) = torus_setup(128, 2.5e-4);
        let mut rng = seeded(51);
        let psi0 = WaveField::random_nodeless(&g, &mut rng, 4.0);
        let mut errs = Vec::new();
        for &tau in &[0.2, 0.1, 0.05, 0.025] {
            let plan = phase_imprint_plan(&ctx.potentials, 1, &[0.7, 0.0], tau).unwrap();
            let report =
                run_and_score(&plan, &psi0, &ctx, ImprintMode::Synthesized { tau_imp: tau })
                    .unwrap();
            assert!((report.control_time - tau).abs() < 1e-12);
            errs.push(report.error);
        }
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "errors not decreasing: {errs:?}");
        let slope = (errs[0] / errs[3]).ln() / 8.0f64.ln();
        assert!(slope >= 0.4, "imprint slope {slope}, errors {errs:?}");
    }

    #[test]
    fn exact_mode_imprint_scores_zero() {
        let (g, ctx) = torus_setup(64, 1e-3);
        let mut rng = seeded(52);
        let psi0 = WaveField::random_nodeless(&g, &mut rng, 4.0);
        let plan = Plan {
            root: PlanNode::Imprint {
                phase: span_phase(&ctx.potentials, 1, &[0.4, -0.3]).unwrap(),
                mode: Some(ImprintMode::Exact),
            },
            target: TargetMap::PhaseMultiply(
                span_phase(&ctx.potentials, 1, &[0.4, -0.3]).unwrap(),
            ),
            label: "exact imprint".into(),
            intermediate_target: None,
        };
        let report = run_and_score(&plan, &psi0, &ctx, ImprintMode::Exact).unwrap();
        assert!(report.error < 1e-9, "exact imprint error {}", report.error);
        assert!(report.control_time == 0.0);
        let _ = g;
    }

    #[test]
    fn translation_plan_structure_and_rejections() {
        let plan =
            translation_plan(Geometry::Box { dim: 1, half_width: 12.0 }, 1, 0, 0.5, 0.1).unwrap();
        if let PlanNode::Seq(nodes) = &plan.root {
            assert_eq!(nodes.len(), 3);
        } else {
            panic!("expected three-node sequence");
        }
        assert!(translation_plan(Geometry::Torus { dim: 1 }, 1, 0, 0.5, 0.1).is_err());
    }

    #[test]
    fn translation_error_decreases_with_tau() {
        let (g, ctx) = box_setup(256, 2.5e-4);
        let mut rng = seeded(53);
        let psi0 = WaveField::random_nodeless(&g, &mut rng, 4.0);
        let mut errs = Vec::new();
        for &tau in &[0.2, 0.1, 0.05] {
            let plan = translation_plan(g.geometry(), 1, 0, 0.5, tau).unwrap();
            let report = run_and_score(&plan, &psi0, &ctx, ImprintMode::Exact).unwrap();
            errs.push(report.error);
        }
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn grad_square_contraction_guard() {
        let phase = SmoothPhase::sine(1, 0, 0.5);
        assert!(grad_square_plan(&phase, 0.2).is_ok());
        assert!(grad_square_plan(&phase, 2.0).is_err());
    }

    #[test]
    fn trotter_plan_counts() {
        let phase = SmoothPhase::cosine(1, 0, 0.5);
        let plan = trotter_plan(&phase, 0.1, 2).unwrap();
        let g = Grid::torus(1, 64).unwrap();
        let fam = standard_potentials(&g, FamilyTag::TorusTrig).unwrap();
        let compiled = compile(&plan, &fam, ImprintMode::Exact).unwrap();
        assert_eq!(compiled.num_segments(), 2, "2 free segments");
        assert_eq!(compiled.num_operator_applications(), 6, "6 operator applications");
        assert!((compiled.control_time() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn compile_duration_additivity() {
        let phase = SmoothPhase::cosine(1, 0, 0.3);
        let g = Grid::torus(1, 64).unwrap();
        let fam = standard_potentials(&g, FamilyTag::TorusTrig).unwrap();
        let p1 = grad_square_plan(&phase, 0.1).unwrap();
        let p2 = trotter_plan(&phase, 0.05, 4).unwrap();
        let c1 = compile(&p1, &fam, ImprintMode::Exact).unwrap();
        let c2 = compile(&p2, &fam, ImprintMode::Exact).unwrap();
        let both = Plan::compose(vec![p1, p2]);
        let cb = compile(&both, &fam, ImprintMode::Exact).unwrap();
        assert!((cb.control_time() - c1.control_time() - c2.control_time()).abs() < 1e-12);
    }

    #[test]
    fn synthesized_second_harmonic_expands_through_grad_square() {
        let g = Grid::torus(1, 128).unwrap();
        let fam = standard_potentials(&g, FamilyTag::TorusTrig).unwrap();
        let phase = SmoothPhase::trig_wave(vec![2], 0.3, -0.2);
        let plan = Plan {
            root: PlanNode::Imprint { phase: phase.clone(), mode: None },
            target: TargetMap::PhaseMultiply(phase.clone()),
            label: "second harmonic imprint".into(),
            intermediate_target: None,
        };
        let compiled =
            compile(&plan, &fam, ImprintMode::Synthesized { tau_imp: 0.02 }).unwrap();
        assert!(compiled.num_segments() >= 4);
        assert!(matches!(
            compile_with_depth(&plan, &fam, ImprintMode::Synthesized { tau_imp: 0.02 }, 0),
            Err(Error::DepthExceeded { .. })
        ));
    }

    #[test]
    fn synthesized_second_harmonic_actually_imprints() {
        let (g, ctx) = torus_setup(256, 1e-5);
        let mut rng = seeded(54);
        let psi0 = WaveField::random_nodeless(&g, &mut rng, 4.0);
        let phase = SmoothPhase::trig_wave(vec![2], 0.2, 0.0);
        let plan = Plan {
            root: PlanNode::Imprint { phase: phase.clone(), mode: None },
            target: TargetMap::PhaseMultiply(phase),
            label: "cos 2x imprint".into(),
            intermediate_target: None,
        };
        let report =
            run_and_score(&plan, &psi0, &ctx, ImprintMode::Synthesized { tau_imp: 2e-3 }).unwrap();
        assert!(report.error < 0.15, "synthesized cos2x error {}", report.error);
    }

    #[test]
    fn composition_breakdown_and_bound() {
        let (g, ctx) = torus_setup(128, 5e-4);
        let mut rng = seeded(55);
        let psi0 = WaveField::random_nodeless(&g, &mut rng, 4.0);
        let p1 = phase_imprint_plan(&ctx.potentials, 1, &[0.5, 0.0], 0.05).unwrap();
        let p2 = phase_imprint_plan(&ctx.potentials, 1, &[0.0, 0.4], 0.05).unwrap();
        let e1 = run_and_score(&p1, &psi0, &ctx, ImprintMode::Exact).unwrap();
        let both = Plan::compose(vec![p1.clone(), p2.clone()]);
        let report = run_and_score(&both, &psi0, &ctx, ImprintMode::Exact).unwrap();
        assert_eq!(report.breakdown.len(), 2);
        let mid = apply_target(&p1.target, &psi0, &ctx).unwrap();
        let e2 = run_and_score(&p2, &mid, &ctx, ImprintMode::Exact).unwrap();
        let t2 = 0.05;
        let bound = (2.0f64 * ctx.lambda.abs() * t2).exp() * e1.error + e2.error + 1e-6;
        assert!(report.error <= bound, "{} > {}", report.error, bound);
        let _ = g;
    }

    #[test]
    fn global_phase_immunity_of_scores() {
        let (g, ctx) = torus_setup(128, 5e-4);
        let mut rng = seeded(56);
        let psi0 = WaveField::random_nodeless(&g, &mut rng, 4.0);
        let plan = phase_imprint_plan(&ctx.potentials, 1, &[0.6, 0.0], 0.1).unwrap();
        let r1 = run_and_score(&plan, &psi0, &ctx, ImprintMode::Exact).unwrap();
        let mut rotated = psi0.clone();
        rotated.scale(Complex64::new(0.0, 2.1).exp());
        let r2 = run_and_score(&plan, &rotated, &ctx, ImprintMode::Exact).unwrap();
        assert!((r1.error - r2.error).abs() < 1e-10);
        let _ = g;
    }

    #[test]
    fn plan_description_is_textual() {
        let phase = SmoothPhase::cosine(1, 0, 0.5);
        let plan = trotter_plan(&phase, 0.1, 2).unwrap();
        let txt = plan.describe();
        assert!(txt.contains("trotter"));
        assert!(txt.contains("free duration"));
        assert!(txt.contains("imprint"));
    }
}
