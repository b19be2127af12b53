//! CP verification through the Choi matrix, the transpose negative control,
//! and the sum-of-squares form of `(Φ ⊗ id_k)(C̃^* C̃)`.

use quasilocal::channels::{
    check_normalization, is_completely_positive, random_kraus, sos_witness, tensor_with_identity, transpose_map,
    Picture, QuantumChannel,
};
use quasilocal::linalg::random_complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> quasilocal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let k = random_kraus(&mut rng, 4, 3);
    let ch = QuantumChannel::from_kraus(k.clone(), Picture::Heisenberg);
    let norm = check_normalization(&ch, 1e-10);
    let cp = is_completely_positive(&ch, 1e-9)?;
    println!("random channel: unital defect {:.1e}, min Choi eigenvalue {:.3e}, CP = {}", norm.unital_defect, cp.min_choi_eigenvalue, cp.cp);

    let t = transpose_map(2, Picture::Heisenberg);
    let cp = is_completely_positive(&t, 1e-9)?;
    println!("transpose map: min Choi eigenvalue {:.3}, CP = {}", cp.min_choi_eigenvalue, cp.cp);
    let t2 = tensor_with_identity(&t, 2, 64)?;
    println!("T ⊗ id_2 acts on dimension {}", t2.dim());

    let parts: Vec<_> = (0..3).map(|_| (random_complex(&mut rng, 4, 4), random_complex(&mut rng, 3, 3))).collect();
    let sos = sos_witness(&k, &parts)?;
    println!(
        "sum of squares, k = 3: defect {:.2e}, min eigenvalue {:.3e}",
        sos.defect, sos.min_eigenvalue
    );
    Ok(())
}
