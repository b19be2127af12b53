//! Kraus, Choi and superoperator forms of the same channel.

use quasilocal::channels::{
    amplitude_damping, choi_to_kraus, kraus_to_super, random_kraus, super_to_choi, Picture, QuantumChannel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> quasilocal::Result<()> {
    let ad = amplitude_damping(0.3, Picture::Schroedinger);
    let choi = ad.choi();
    println!("amplitude damping (γ = 0.3), Choi eigenvalues: {:?}", choi.eigenvalues()?);

    // Kraus -> superoperator -> Choi -> Kraus -> superoperator
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for d in [2, 4, 8] {
        let k = random_kraus(&mut rng, d, 3);
        let s = kraus_to_super(&k, Picture::Heisenberg);
        let j = super_to_choi(&s);
        let back = choi_to_kraus(&j, Picture::Heisenberg, None)?;
        let s2 = kraus_to_super(&back, Picture::Heisenberg);
        println!(
            "d = {d}: {} -> {} Kraus operators, round-trip distance {:.2e}, ‖ΣW*W - I‖ = {:.2e}",
            k.len(),
            back.len(),
            s.distance(&s2),
            back.completeness_defect()
        );
    }

    let ch = QuantumChannel::from_kraus(random_kraus(&mut rng, 2, 2), Picture::Heisenberg);
    let twice = ch.compose(&ch)?;
    println!("a random qubit channel composed with itself has Choi rank {}", twice.kraus()?.len());
    Ok(())
}
