use std::time::Instant;
use std::sync::Arc;
use lognls::*;
use lognls::phase::SmoothPhase;
use lognls::potential::{standard_potentials, FamilyTag};
use lognls::solver::{solve_r, PhaseProvider, SolverContext};
use lognls::field::WaveField;

fn main() {
    let grid = Grid::torus(1, 256).unwrap();
    let fam = standard_potentials(&grid, FamilyTag::TorusTrig).unwrap();
    let ctx = SolverContext::new(fam, -1.0, 2e-4);
    let mut rng = lognls::rng::substream(42, 0);
    let psi0 = WaveField::random_nodeless(&grid, &mut rng, 4.0);
    let phase = SmoothPhase::cosine(1, 0, 0.5);
    let t = Instant::now();
    let r = solve_r(&psi0, 0.05, 0.1, Some(PhaseProvider::Static(phase.clone())), &ctx).unwrap();
    println!("solve_r 250 steps: {:?} norm {}", t.elapsed(), r.norm());
    let t = Instant::now();
    let f = lognls::transport::VectorField::Gradient(phase.clone());
    let p = lognls::transport::pushforward(&f, -1.0, &psi0, lognls::transport::InterpKind::Spectral).unwrap();
    println!("pushforward t=1: {:?} norm {}", t.elapsed(), p.norm());
    let _ = Arc::new(0);
}
