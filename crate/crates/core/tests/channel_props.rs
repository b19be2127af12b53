use quasilocal::channels::{
    amplitude_damping, apply_extended, check_normalization, choi_to_kraus, dephasing, dual_channel,
    is_completely_positive, kraus_to_super, pairing_defect, random_kraus, sos_witness, super_to_choi,
    tensor_with_identity, transpose_map, unitary_channel, ChoiMatrix, KrausSet, Picture, QuantumChannel,
};
use quasilocal::linalg::{max_abs, random_complex, random_unitary};
use quasilocal::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn round_trip_across_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for d in [2, 4, 8] {
        for count in [1, 2, 5] {
            for picture in [Picture::Heisenberg, Picture::Schroedinger] {
                let k = random_kraus(&mut rng, d, count);
                let s = kraus_to_super(&k, picture);
                let back = choi_to_kraus(&super_to_choi(&s), picture, None).unwrap();
                assert!(back.len() <= count, "d={d}: rank {} > {count}", back.len());
                assert!(kraus_to_super(&back, picture).distance(&s) <= 1e-12, "d={d}");
                assert!(back.completeness_defect() <= 1e-12);
            }
        }
    }
}

#[test]
fn kraus_and_superoperator_actions_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let k = random_kraus(&mut rng, 4, 3);
    let a = random_complex(&mut rng, 4, 4);
    for picture in [Picture::Heisenberg, Picture::Schroedinger] {
        let direct = k.apply(&a, picture);
        let via_super = kraus_to_super(&k, picture).apply(&a);
        assert!(max_abs(&(direct - via_super)) < 1e-13);
    }
}

#[test]
fn unitary_conjugation_is_rank_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let u = random_unitary(&mut rng, 4);
    let ch = unitary_channel(u, Picture::Heisenberg);
    let k = choi_to_kraus(ch.choi(), Picture::Heisenberg, None).unwrap();
    assert_eq!(k.len(), 1);
    assert!(check_normalization(&ch, 1e-12).passed);
}

#[test]
fn transpose_map_has_unit_witness() {
    let t = transpose_map(2, Picture::Heisenberg);
    let cp = is_completely_positive(&t, 1e-9).unwrap();
    assert!(!cp.cp);
    assert!((cp.min_choi_eigenvalue + 1.0).abs() <= 1e-10);
    match choi_to_kraus(t.choi(), Picture::Heisenberg, None) {
        Err(Error::NotCompletelyPositive { eigenvalue, eigenvector }) => {
            assert!((eigenvalue + 1.0).abs() <= 1e-10);
            assert_eq!(eigenvector.len(), 4);
        }
        other => panic!("expected a CP failure, got {other:?}"),
    }
    // positive but not 2-positive
    let t2 = tensor_with_identity(&t, 2, 16).unwrap();
    assert!(!is_completely_positive(&t2, 1e-9).unwrap().cp);
}

#[test]
fn extended_action_matches_dense_tensor() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let ch = QuantumChannel::from_kraus(random_kraus(&mut rng, 2, 2), Picture::Heisenberg);
    let big = tensor_with_identity(&ch, 3, 64).unwrap();
    let x = random_complex(&mut rng, 6, 6);
    assert!(max_abs(&(apply_extended(&ch, &x, 3).unwrap() - big.apply(&x))) < 1e-13);
    assert!(matches!(tensor_with_identity(&ch, 64, 64), Err(Error::Capacity { .. })));
}

#[test]
fn sum_of_squares_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for d in [2, 4] {
        for k in [2, 3] {
            for _ in 0..5 {
                let kraus = random_kraus(&mut rng, d, 3);
                let parts: Vec<_> = (0..3).map(|_| (random_complex(&mut rng, d, d), random_complex(&mut rng, k, k))).collect();
                let rep = sos_witness(&kraus, &parts).unwrap();
                assert!(rep.defect <= 1e-10, "d={d} k={k}: {}", rep.defect);
                assert!(rep.min_eigenvalue >= -1e-9);
            }
        }
    }
}

#[test]
fn duality_for_standard_channels() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for ch in [dephasing(0.3, Picture::Heisenberg), amplitude_damping(0.4, Picture::Schroedinger)] {
        assert!(pairing_defect(&ch, 20, &mut rng) <= 1e-12);
        let dual = dual_channel(&ch);
        assert_eq!(dual.picture(), ch.picture().dual());
        assert!(dual_channel(&dual).distance(&ch) <= 1e-14);
    }
}

#[test]
fn amplitude_damping_dual_is_trace_preserving() {
    let heis = amplitude_damping(0.25, Picture::Heisenberg);
    let norm = check_normalization(&dual_channel(&heis), 1e-12);
    assert!(norm.trace_defect <= 1e-12);
}

#[test]
fn representation_constructors_validate() {
    assert!(KrausSet::new(Vec::new()).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let two = random_complex(&mut rng, 2, 2);
    let three = random_complex(&mut rng, 3, 3);
    assert!(KrausSet::new(vec![two, three]).is_err());
    assert!(ChoiMatrix::new(2, random_complex(&mut rng, 3, 3)).is_err());
}
