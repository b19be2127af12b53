//! Sampled positivity of `(γ_t ⊗ id_k)(C̃^* C̃)` at the largest exact volume,
//! with the transpose map as a negative control.

use quasilocal::channels::{transpose_map, Picture};
use quasilocal::lattice::{make_region, OpLabel, Site};
use quasilocal::limits::{limit_cp_check, tensor_stability};
use quasilocal::semigroup::LindbladModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> quasilocal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let model = LindbladModel::ising(1, 1.0, 0.8, 0.5, OpLabel::Z);
    let support = make_region([Site::qubit(0)])?;
    let rep = limit_cp_check(&model, &support, 1.0, &[2, 4], 50, 32, 1e-9, &mut rng)?;
    println!("Λ* has {} sites (dimension {})", rep.sites, rep.dim);
    for r in &rep.per_k {
        println!("  k = {}: min eigenvalue over {} samples {:.4e}", r.k, r.samples, r.min_eigenvalue);
    }
    println!("  passed: {}", rep.passed);

    let t = transpose_map(2, Picture::Heisenberg);
    let neg = tensor_stability(&t, &[2], 50, 1e-9, &mut rng)?;
    println!("transpose map, k = 2: min eigenvalue {:.4}, passed: {}", neg.per_k[0].min_eigenvalue, neg.passed);
    Ok(())
}
