//! Drift and control potential families.
//!
//! Torus systems use the trigonometric family sin⟨b_j,x⟩, cos⟨b_j,x⟩
//! with b_1..b_{d-1} the coordinate unit vectors and b_d = (1,…,1),
//! m = 2d fields. Euclidean (box) systems use the linear coordinates
//! x_1..x_d plus the Gaussian envelope e^{−|x|²/2}, m = d+1 fields.
//! Quadratic drifts/controls are available as custom fields for the
//! Gaussian-dynamics experiments.

use crate::error::{Error, Result};
use crate::grid::{Geometry, Grid};

/// Closed-form drift potential, evaluable off-grid (the classical
/// trajectories need ∇V at arbitrary points).
#[derive(Debug, Clone, PartialEq)]
pub enum DriftPotential {
    Zero,
    /// V(x) = ½ curv |x|²
    Quadratic { curv: f64 },
    /// V(x) = ½|x|² + Σ_a cos x_a  (bounded Hessian, non-quadratic)
    QuadraticPlusCos,
}

impl DriftPotential {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            DriftPotential::Zero => 0.0,
            DriftPotential::Quadratic { curv } => {
                0.5 * curv * x.iter().map(|c| c * c).sum::<f64>()
            }
            DriftPotential::QuadraticPlusCos => {
                0.5 * x.iter().map(|c| c * c).sum::<f64>()
                    + x.iter().map(|c| c.cos()).sum::<f64>()
            }
        }
    }

    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        match *self {
            DriftPotential::Zero => out.fill(0.0),
            DriftPotential::Quadratic { curv } => {
                for (o, &c) in out.iter_mut().zip(x) {
                    *o = curv * c;
                }
            }
            DriftPotential::QuadraticPlusCos => {
                for (o, &c) in out.iter_mut().zip(x) {
                    *o = c - c.sin();
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            DriftPotential::Zero => "zero".into(),
            DriftPotential::Quadratic { curv } => format!("quadratic({curv})"),
            DriftPotential::QuadraticPlusCos => "quadratic+cos".into(),
        }
    }
}

/// Closed form of a single control potential W_j.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlForm {
    /// sin⟨b, x⟩
    SinB(Vec<i64>),
    /// cos⟨b, x⟩
    CosB(Vec<i64>),
    /// x_j
    Coordinate(usize),
    /// e^{−|x|²/2}
    GaussEnvelope,
    /// ½|x|²  (quadratic control of the Gaussian experiments)
    HalfSquare,
}

impl ControlForm {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ControlForm::SinB(b) => dot_b(b, x).sin(),
            ControlForm::CosB(b) => dot_b(b, x).cos(),
            ControlForm::Coordinate(j) => x[*j],
            ControlForm::GaussEnvelope => {
                (-0.5 * x.iter().map(|c| c * c).sum::<f64>()).exp()
            }
            ControlForm::HalfSquare => 0.5 * x.iter().map(|c| c * c).sum::<f64>(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ControlForm::SinB(b) => format!("sin<b={b:?},x>"),
            ControlForm::CosB(b) => format!("cos<b={b:?},x>"),
            ControlForm::Coordinate(j) => format!("x_{}", j + 1),
            ControlForm::GaussEnvelope => "exp(-|x|^2/2)".into(),
            ControlForm::HalfSquare => "|x|^2/2".into(),
        }
    }
}

fn dot_b(b: &[i64], x: &[f64]) -> f64 {
    b.iter().zip(x).map(|(&bi, &xi)| bi as f64 * xi).sum()
}

/// One control potential: closed form plus its grid samples.
#[derive(Debug, Clone)]
pub struct ControlPotential {
    pub form: ControlForm,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyTag {
    TorusTrig,
    EuclideanLinearGauss,
    Custom,
}

/// Drift potential V plus the ordered control fields W_1..W_m.
#[derive(Debug, Clone)]
pub struct PotentialFamily {
    pub tag: FamilyTag,
    pub drift: DriftPotential,
    pub drift_values: Vec<f64>,
    pub controls: Vec<ControlPotential>,
}

impl PotentialFamily {
    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    /// Zero-potential family (free evolution) on any grid.
    pub fn free(grid: &Grid) -> Self {
        PotentialFamily {
            tag: FamilyTag::Custom,
            drift: DriftPotential::Zero,
            drift_values: vec![0.0; grid.len()],
            controls: Vec::new(),
        }
    }

    pub fn with_drift(grid: &Grid, drift: DriftPotential) -> Self {
        let drift_values = grid.sample(|x| drift.eval(x));
        PotentialFamily { tag: FamilyTag::Custom, drift, drift_values, controls: Vec::new() }
    }

    pub fn push_control(&mut self, grid: &Grid, form: ControlForm) {
        let values = grid.sample(|x| form.eval(x));
        self.controls.push(ControlPotential { form, values });
    }
}

/// The coupling directions b_1, …, b_d: unit coordinate vectors for
/// j < d, then the all-ones vector b_d.
pub fn coupling_vectors(dim: usize) -> Vec<Vec<i64>> {
    let mut bs = Vec::with_capacity(dim);
    for j in 0..dim.saturating_sub(1) {
        let mut b = vec![0i64; dim];
        b[j] = 1;
        bs.push(b);
    }
    bs.push(vec![1i64; dim]);
    bs
}

/// Standard control family for the grid's geometry.
pub fn standard_potentials(grid: &Grid, tag: FamilyTag) -> Result<PotentialFamily> {
    let geometry = grid.geometry();
    let mut family = PotentialFamily {
        tag,
        drift: DriftPotential::Zero,
        drift_values: vec![0.0; grid.len()],
        controls: Vec::new(),
    };
    match (tag, geometry) {
        (FamilyTag::TorusTrig, Geometry::Torus { dim }) => {
            for b in coupling_vectors(dim) {
                family.push_control(grid, ControlForm::SinB(b.clone()));
                family.push_control(grid, ControlForm::CosB(b));
            }
        }
        (FamilyTag::EuclideanLinearGauss, Geometry::Box { dim, .. }) => {
            for j in 0..dim {
                family.push_control(grid, ControlForm::Coordinate(j));
            }
            family.push_control(grid, ControlForm::GaussEnvelope);
        }
        (FamilyTag::Custom, _) => {}
        (tag, geometry) => {
            return Err(Error::GeometryMismatch {
                family: format!("{tag:?}"),
                geometry: geometry.label().into(),
            })
        }
    }
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_1d_family() {
        let g = Grid::torus(1, 16).unwrap();
        let fam = standard_potentials(&g, FamilyTag::TorusTrig).unwrap();
        assert_eq!(fam.num_controls(), 2);
        assert_eq!(fam.controls[0].form, ControlForm::SinB(vec![1]));
        assert_eq!(fam.controls[1].form, ControlForm::CosB(vec![1]));
        // field values are sin x, cos x at the nodes
        for (i, &x) in g.axis_coords().iter().enumerate() {
            assert!((fam.controls[0].values[i] - x.sin()).abs() < 1e-15);
            assert!((fam.controls[1].values[i] - x.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn torus_2d_coupling_vectors() {
        let g = Grid::torus(2, 8).unwrap();
        let fam = standard_potentials(&g, FamilyTag::TorusTrig).unwrap();
        assert_eq!(fam.num_controls(), 4);
        assert_eq!(fam.controls[0].form, ControlForm::SinB(vec![1, 0]));
        assert_eq!(fam.controls[2].form, ControlForm::SinB(vec![1, 1]));
    }

    #[test]
    fn box_1d_family() {
        let g = Grid::boxed(1, 10.0, 16).unwrap();
        let fam = standard_potentials(&g, FamilyTag::EuclideanLinearGauss).unwrap();
        assert_eq!(fam.num_controls(), 2);
        assert_eq!(fam.controls[0].form, ControlForm::Coordinate(0));
        assert_eq!(fam.controls[1].form, ControlForm::GaussEnvelope);
        for (i, &x) in g.axis_coords().iter().enumerate() {
            assert!((fam.controls[1].values[i] - (-0.5 * x * x).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn geometry_mismatch_rejected() {
        let torus = Grid::torus(1, 16).unwrap();
        let boxg = Grid::boxed(1, 5.0, 16).unwrap();
        assert!(standard_potentials(&torus, FamilyTag::EuclideanLinearGauss).is_err());
        assert!(standard_potentials(&boxg, FamilyTag::TorusTrig).is_err());
    }

    #[test]
    fn control_fields_are_real_everywhere() {
        // trivially true by construction: values are f64; check finiteness
        let g = Grid::torus(2, 8).unwrap();
        let fam = standard_potentials(&g, FamilyTag::TorusTrig).unwrap();
        for c in &fam.controls {
            assert!(c.values.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn drift_gradients_match_finite_differences() {
        let h = 1e-6;
        for v in [
            DriftPotential::Quadratic { curv: 1.0 },
            DriftPotential::QuadraticPlusCos,
        ] {
            let x = [0.7, -1.3];
            let mut g = [0.0; 2];
            v.grad(&x, &mut g);
            for a in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[a] += h;
                xm[a] -= h;
                let fd = (v.eval(&xp) - v.eval(&xm)) / (2.0 * h);
                assert!((fd - g[a]).abs() < 1e-8);
            }
        }
    }
}
