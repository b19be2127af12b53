use ndarray::Array2;
use rand::Rng;

use super::{KrausSet, Picture, QuantumChannel, SuperoperatorMatrix};
use crate::lattice::OpLabel;
use crate::linalg::{self, c, dagger, random_complex, Matrix, ONE};

pub fn identity_channel(dim: usize, picture: Picture) -> QuantumChannel {
    QuantumChannel::from_kraus(KrausSet::new(vec![linalg::identity(dim)]).unwrap(), picture)
}

pub fn unitary_channel(u: Matrix, picture: Picture) -> QuantumChannel {
    QuantumChannel::from_kraus(KrausSet::new(vec![u]).expect("square unitary"), picture)
}

/// Qubit dephasing with Kraus operators `{√(1-p) I, √p Z}`.
pub fn dephasing(p: f64, picture: Picture) -> QuantumChannel {
    assert!((0.0..=1.0).contains(&p), "dephasing probability {p} outside [0, 1]");
    let id = linalg::identity(2).mapv(|z| z * (1.0 - p).sqrt());
    let z = OpLabel::Z.matrix(2).unwrap().mapv(|z| z * p.sqrt());
    QuantumChannel::from_kraus(KrausSet::new(vec![id, z]).unwrap(), picture)
}

/// Qubit amplitude damping `{[[1,0],[0,√(1-γ)]], [[0,√γ],[0,0]]}`.
pub fn amplitude_damping(gamma: f64, picture: Picture) -> QuantumChannel {
    assert!((0.0..=1.0).contains(&gamma), "damping rate {gamma} outside [0, 1]");
    let zero = c(0.0, 0.0);
    let k0 = ndarray::array![[ONE, zero], [zero, c((1.0 - gamma).sqrt(), 0.0)]];
    let k1 = ndarray::array![[zero, c(gamma.sqrt(), 0.0)], [zero, zero]];
    QuantumChannel::from_kraus(KrausSet::new(vec![k0, k1]).unwrap(), picture)
}

/// `A ↦ A^T`: positive and unital but not completely positive.
pub fn transpose_map(dim: usize, picture: Picture) -> QuantumChannel {
    let n = dim * dim;
    let mut s = Array2::zeros((n, n));
    // vec(A^T)[i + j d] = A[j, i] = vec(A)[j + i d]
    for i in 0..dim {
        for j in 0..dim {
            s[[i + j * dim, j + i * dim]] = ONE;
        }
    }
    QuantumChannel::from_superoperator(SuperoperatorMatrix::new(dim, s).unwrap(), picture)
}

/// Random Kraus set with `Σ W_n^* W_n = I`: Gaussian `G_n` whitened by `(Σ G_n^* G_n)^{-1/2}`.
pub fn random_kraus<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> KrausSet {
    let gs: Vec<Matrix> = (0..count.max(1)).map(|_| random_complex(rng, dim, dim)).collect();
    let mut s = Array2::zeros((dim, dim));
    for g in &gs {
        s += &dagger(g).dot(g);
    }
    let whiten = linalg::inverse_sqrt_psd(&s).expect("Gaussian Gram matrix is positive definite");
    KrausSet::new(gs.iter().map(|g| g.dot(&whiten)).collect()).unwrap()
}
