//! Heisenberg/Schrödinger duality `tr(ρ γ_t(A)) = tr(τ_t(ρ) A)`.

use quasilocal::lattice::Region;
use quasilocal::semigroup::{build_generator, duality_check, LindbladModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> quasilocal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for name in ["ising_dephasing", "ising_damping"] {
        let model = LindbladModel::catalog(name, &Default::default())?;
        let g = build_generator(&model, &Region::chain(0, 3)?)?;
        for t in [0.1, 0.5, 1.0] {
            let r = duality_check(&g, t, 20, 64, &mut rng)?;
            println!(
                "{name:16} t = {t:.1}: pairing defect {:.1e}, dual trace defect {:.1e}, dual min Choi eigenvalue {:.1e}",
                r.max_defect, r.dual_trace_defect, r.dual_min_choi_eigenvalue
            );
        }
    }
    Ok(())
}
