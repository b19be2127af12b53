//! Lindblad generators on a chain: exact exponential vs observable ODE,
//! semigroup law and unitality.

use quasilocal::channels::{check_normalization, is_completely_positive};
use quasilocal::lattice::{site_operator, OpLabel, Region, Site};
use quasilocal::linalg::spectral_norm;
use quasilocal::semigroup::{build_generator, evolve_exact, evolve_ode, EvolutionBackend, LindbladModel, OdeParams};

fn main() -> quasilocal::Result<()> {
    let model = LindbladModel::ising(1, 1.0, 0.8, 0.5, OpLabel::Lower);
    let region = Region::chain(-1, 3)?;
    let g = build_generator(&model, &region)?;
    println!("{} on {region}: ‖L♯‖ ≈ {:.3}", model.name, g.norm_estimate());

    let gamma = evolve_exact(&g, 1.0, 64)?;
    let norm = check_normalization(&gamma, 1e-10);
    let cp = is_completely_positive(&gamma, 1e-9)?;
    println!("γ_1: ‖γ(I) - I‖ = {:.1e}, min Choi eigenvalue {:.2e}", norm.unital_defect, cp.min_choi_eigenvalue);

    let split = evolve_exact(&g, 0.3, 64)?.compose(&evolve_exact(&g, 0.7, 64)?)?;
    println!("‖γ_1 - γ_0.3 ∘ γ_0.7‖ = {:.2e}", gamma.distance(&split));

    let z = site_operator(OpLabel::Z, &Site::qubit(0))?;
    let exact = EvolutionBackend::default().evolve_observable(&g, &z, 1.0)?;
    let ode = evolve_ode(&g, &z, 1.0, &OdeParams::default())?;
    println!("‖γ_1(Z_0)‖ = {:.10}", spectral_norm(exact.matrix())?);
    println!("exact vs ODE: {:.2e}", spectral_norm(&(exact.matrix() - ode.matrix()))?);
    Ok(())
}
