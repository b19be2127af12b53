//! Quantum channels in Kraus, Choi and superoperator form.
//!
//! Conventions:
//! * operators are vectorized by column stacking, `vec(X A Y) = (Y^T ⊗ X) vec(A)`;
//! * the Choi matrix is `J(Φ) = Σ_ij E_ij ⊗ Φ(E_ij)`;
//! * a Heisenberg-picture Kraus set acts as `A ↦ Σ W_n^* A W_n`, a
//!   Schrödinger-picture one as `ρ ↦ Σ W_n ρ W_n^*`. The same operators
//!   describe a channel and its dual, so `Σ W_n^* W_n = I` is both the
//!   unitality of the former and the trace preservation of the latter.

mod standard;
mod verify;

pub use standard::{amplitude_damping, dephasing, identity_channel, random_kraus, transpose_map, unitary_channel};
pub use verify::{
    apply_extended, check_normalization, dual_channel, is_completely_positive, pairing_defect,
    sos_witness, tensor_with_identity, CpVerdict, NormalizationReport, SosReport,
};

use std::sync::OnceLock;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dagger, kron, Matrix, ZERO};

/// Which algebra the map acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Picture {
    /// Acts on observables; physical channels are unital.
    Heisenberg,
    /// Acts on density matrices; physical channels are trace preserving.
    Schroedinger,
}

impl Picture {
    pub fn dual(self) -> Picture {
        match self {
            Picture::Heisenberg => Picture::Schroedinger,
            Picture::Schroedinger => Picture::Heisenberg,
        }
    }
}

/// `d^2 x d^2` matrix acting on column-stacked `d x d` operators.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperoperatorMatrix {
    dim: usize,
    matrix: Matrix,
}

impl SuperoperatorMatrix {
    pub fn new(dim: usize, matrix: Matrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.dim() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "superoperator for dimension {dim} must be {n}x{n}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(SuperoperatorMatrix { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        SuperoperatorMatrix { dim, matrix: linalg::identity(dim * dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn apply(&self, a: &Matrix) -> Matrix {
        assert_eq!(a.nrows(), self.dim, "operator dimension does not match superoperator");
        linalg::apply_vectorized(&self.matrix.view(), a)
    }

    /// Hilbert-Schmidt adjoint.
    pub fn adjoint(&self) -> SuperoperatorMatrix {
        SuperoperatorMatrix { dim: self.dim, matrix: dagger(&self.matrix) }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SuperoperatorMatrix) -> SuperoperatorMatrix {
        assert_eq!(self.dim, other.dim);
        SuperoperatorMatrix { dim: self.dim, matrix: self.matrix.dot(&other.matrix) }
    }

    /// Frobenius distance of the matrices; dominates the induced 2-norm distance.
    pub fn distance(&self, other: &SuperoperatorMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        linalg::frobenius_norm(&(&self.matrix - &other.matrix))
    }

    pub fn scale(&self, f: f64) -> SuperoperatorMatrix {
        SuperoperatorMatrix { dim: self.dim, matrix: self.matrix.mapv(|z| z * f) }
    }
}

/// A finite family of Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    dim: usize,
    operators: Vec<Matrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<Matrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidArgument("Kraus set must be non-empty".into()))?;
        let dim = first.nrows();
        if let Some((n, w)) = operators.iter().enumerate().find(|(_, w)| w.dim() != (dim, dim)) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator {n} is {}x{}, expected {dim}x{dim}",
                w.nrows(),
                w.ncols()
            )));
        }
        Ok(KrausSet { dim, operators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[Matrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `Σ W_n^* W_n`.
    pub fn completeness(&self) -> Matrix {
        let mut acc = Array2::zeros((self.dim, self.dim));
        for w in &self.operators {
            acc += &dagger(w).dot(w);
        }
        acc
    }

    /// `‖Σ W_n^* W_n - I‖` in operator norm.
    pub fn completeness_defect(&self) -> f64 {
        let m = self.completeness() - linalg::identity(self.dim);
        linalg::spectral_norm(&m).expect("SVD of a finite matrix")
    }

    pub fn apply(&self, a: &Matrix, picture: Picture) -> Matrix {
        let mut acc = Array2::zeros((self.dim, self.dim));
        for w in &self.operators {
            acc += &match picture {
                Picture::Heisenberg => dagger(w).dot(a).dot(w),
                Picture::Schroedinger => w.dot(a).dot(&dagger(w)),
            };
        }
        acc
    }
}

/// `J(Φ) = Σ_ij E_ij ⊗ Φ(E_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: Matrix,
}

impl ChoiMatrix {
    pub fn new(dim: usize, matrix: Matrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.dim() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix for dimension {dim} must be {n}x{n}"
            )));
        }
        Ok(ChoiMatrix { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::hermitian_eigvals(&self.matrix)?.to_vec())
    }
}

/// The superoperator of a Kraus set in the given picture.
pub fn kraus_to_super(k: &KrausSet, picture: Picture) -> SuperoperatorMatrix {
    let d = k.dim();
    let mut s = Array2::zeros((d * d, d * d));
    for w in k.operators() {
        let term = match picture {
            // vec(W^* A W) = (W^T ⊗ W^*) vec(A)
            Picture::Heisenberg => kron(&w.t().to_owned(), &dagger(w)),
            // vec(W ρ W^*) = (conj(W) ⊗ W) vec(ρ)
            Picture::Schroedinger => kron(&w.mapv(|z| z.conj()), w),
        };
        s += &term;
    }
    SuperoperatorMatrix { dim: d, matrix: s }
}

/// Reshuffle: `J[i d + a, j d + b] = Φ(E_ij)[a, b] = S[a + b d, i + j d]`.
pub fn super_to_choi(s: &SuperoperatorMatrix) -> ChoiMatrix {
    let d = s.dim();
    let sm = s.matrix();
    let j = Array2::from_shape_fn((d * d, d * d), |(r, col)| {
        let (i, a) = (r / d, r % d);
        let (jj, b) = (col / d, col % d);
        sm[[a + b * d, i + jj * d]]
    });
    ChoiMatrix { dim: d, matrix: j }
}

/// Inverse reshuffle of [`super_to_choi`].
pub fn choi_to_super(j: &ChoiMatrix) -> SuperoperatorMatrix {
    let d = j.dim();
    let jm = j.matrix();
    let s = Array2::from_shape_fn((d * d, d * d), |(r, col)| {
        let (a, b) = (r % d, r / d);
        let (i, jj) = (col % d, col / d);
        jm[[i * d + a, jj * d + b]]
    });
    SuperoperatorMatrix { dim: d, matrix: s }
}

/// Default rank cutoff: eigenvalues below the backward error of the Hermitian
/// eigensolve, `n · ε · λ_max` for an `n × n` Choi matrix, count as zero.
pub fn default_rank_tol(j: &ChoiMatrix, lambda_max: f64) -> f64 {
    j.matrix().nrows() as f64 * f64::EPSILON * lambda_max
}
/// Allowed deviation of the Choi matrix from Hermiticity.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Kraus operators from the eigendecomposition of a Choi matrix.
///
/// Every eigenpair with `λ > rank_tol` contributes `unvec(√λ v)`, read in the
/// requested picture. `rank_tol` defaults to [`default_rank_tol`].
pub fn choi_to_kraus(j: &ChoiMatrix, picture: Picture, rank_tol: Option<f64>) -> Result<KrausSet> {
    let deviation = linalg::hermitian_deviation(j.matrix());
    if deviation > HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let (vals, vecs) = linalg::hermitian_eigh(j.matrix())?;
    let lambda_max = vals.iter().cloned().fold(0.0, f64::max);
    let tol = rank_tol.unwrap_or_else(|| default_rank_tol(j, lambda_max));

    let (min_idx, &min_val) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    if min_val < -tol {
        return Err(Error::NotCompletelyPositive {
            eigenvalue: min_val,
            eigenvector: vecs.column(min_idx).to_vec(),
        });
    }

    let d = j.dim();
    let mut ops = Vec::new();
    // largest weights first
    for n in (0..vals.len()).rev() {
        let lambda = vals[n];
        if lambda <= tol {
            continue;
        }
        let scaled: Vec<_> = vecs.column(n).iter().map(|z| z * lambda.sqrt()).collect();
        // unvec gives K with Φ(X) = Σ K X K^*
        let k = linalg::unvec_col(&scaled, d);
        ops.push(match picture {
            Picture::Schroedinger => k,
            Picture::Heisenberg => dagger(&k),
        });
    }
    if ops.is_empty() {
        // the zero map
        ops.push(Array2::from_elem((d, d), ZERO));
    }
    KrausSet::new(ops)
}

/// A linear map on `d x d` matrices carrying a picture tag.
///
/// Representations are computed on first use and cached; a channel never
/// changes after construction. Physical properties (complete positivity,
/// normalization) are verified by the functions in this module rather than
/// enforced here, so that non-physical maps can serve as negative controls.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    dim: usize,
    picture: Picture,
    kraus: OnceLock<KrausSet>,
    choi: OnceLock<ChoiMatrix>,
    superop: OnceLock<SuperoperatorMatrix>,
}

impl QuantumChannel {
    fn empty(dim: usize, picture: Picture) -> Self {
        QuantumChannel {
            dim,
            picture,
            kraus: OnceLock::new(),
            choi: OnceLock::new(),
            superop: OnceLock::new(),
        }
    }

    pub fn from_kraus(k: KrausSet, picture: Picture) -> Self {
        let ch = Self::empty(k.dim(), picture);
        let _ = ch.kraus.set(k);
        ch
    }

    pub fn from_superoperator(s: SuperoperatorMatrix, picture: Picture) -> Self {
        let ch = Self::empty(s.dim(), picture);
        let _ = ch.superop.set(s);
        ch
    }

    pub fn from_choi(j: ChoiMatrix, picture: Picture) -> Self {
        let ch = Self::empty(j.dim(), picture);
        let _ = ch.choi.set(j);
        ch
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn superoperator(&self) -> &SuperoperatorMatrix {
        self.superop.get_or_init(|| {
            if let Some(k) = self.kraus.get() {
                kraus_to_super(k, self.picture)
            } else if let Some(j) = self.choi.get() {
                choi_to_super(j)
            } else {
                unreachable!("channel constructed without a representation")
            }
        })
    }

    pub fn choi(&self) -> &ChoiMatrix {
        self.choi.get_or_init(|| super_to_choi(self.superoperator()))
    }

    /// Kraus operators, extracted from the Choi matrix when not supplied.
    pub fn kraus(&self) -> Result<&KrausSet> {
        if let Some(k) = self.kraus.get() {
            return Ok(k);
        }
        let k = choi_to_kraus(self.choi(), self.picture, None)?;
        // a concurrent caller may have won the race; both values are equivalent
        let _ = self.kraus.set(k);
        Ok(self.kraus.get().expect("just set"))
    }

    pub fn has_kraus(&self) -> bool {
        self.kraus.get().is_some()
    }

    pub fn apply(&self, a: &Matrix) -> Matrix {
        if self.superop.get().is_none() {
            if let Some(k) = self.kraus.get() {
                return k.apply(a, self.picture);
            }
        }
        self.superoperator().apply(a)
    }

    /// The dual map applied to `a` (Hilbert-Schmidt adjoint).
    pub fn apply_dual(&self, a: &Matrix) -> Matrix {
        if self.superop.get().is_none() {
            if let Some(k) = self.kraus.get() {
                return k.apply(a, self.picture.dual());
            }
        }
        let s = self.superoperator().matrix();
        let v = dagger(s).dot(&linalg::vec_col(a));
        linalg::unvec_col(v.as_slice().expect("contiguous"), self.dim)
    }

    /// `self ∘ other` (apply `other` first), in this channel's picture.
    pub fn compose(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose channels of dimension {} and {}",
                self.dim, other.dim
            )));
        }
        let s = self.superoperator().compose(other.superoperator());
        Ok(QuantumChannel::from_superoperator(s, self.picture))
    }

    /// Superoperator distance (Frobenius).
    pub fn distance(&self, other: &QuantumChannel) -> f64 {
        self.superoperator().distance(other.superoperator())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::OpLabel;
    use crate::linalg::{c, max_abs, random_complex, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pauli(l: OpLabel) -> Matrix {
        l.matrix(2).unwrap()
    }

    #[test]
    fn identity_kraus_gives_identity_super() {
        let k = KrausSet::new(vec![linalg::identity(3)]).unwrap();
        for p in [Picture::Heisenberg, Picture::Schroedinger] {
            assert_eq!(kraus_to_super(&k, p).matrix(), &linalg::identity(9));
        }
    }

    #[test]
    fn unitary_heisenberg_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u = random_unitary(&mut rng, 3);
        let s = kraus_to_super(&KrausSet::new(vec![u.clone()]).unwrap(), Picture::Heisenberg);
        for _ in 0..5 {
            let a = random_complex(&mut rng, 3, 3);
            let want = dagger(&u).dot(&a).dot(&u);
            assert!(max_abs(&(s.apply(&a) - want)) < 1e-13);
        }
    }

    #[test]
    fn dephasing_contracts_x() {
        let ch = dephasing(0.25, Picture::Heisenberg);
        let s = kraus_to_super(ch.kraus().unwrap(), Picture::Heisenberg);
        let out = s.apply(&pauli(OpLabel::X));
        assert!(max_abs(&(out - pauli(OpLabel::X).mapv(|z| z * 0.5))) < 1e-15);
    }

    fn sorted_eigs(j: &ChoiMatrix) -> Vec<f64> {
        j.eigenvalues().unwrap()
    }

    fn assert_spectrum(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn choi_spectra() {
        let id = identity_channel(2, Picture::Heisenberg);
        assert_spectrum(&sorted_eigs(id.choi()), &[0.0, 0.0, 0.0, 2.0]);

        let t = transpose_map(2, Picture::Heisenberg);
        assert_spectrum(&sorted_eigs(t.choi()), &[-1.0, 1.0, 1.0, 1.0]);
        // J of the transpose is SWAP
        let swap = t.choi().matrix();
        for (r, col) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            assert_eq!(swap[[r, col]], c(1.0, 0.0));
        }

        let deph = dephasing(0.25, Picture::Heisenberg);
        assert_spectrum(&sorted_eigs(deph.choi()), &[0.0, 0.0, 0.5, 1.5]);
    }

    #[test]
    fn choi_super_reshuffle_is_involutive() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let s = SuperoperatorMatrix::new(3, random_complex(&mut rng, 9, 9)).unwrap();
        assert_eq!(choi_to_super(&super_to_choi(&s)), s);
    }

    #[test]
    fn identity_choi_gives_single_kraus() {
        let id = identity_channel(2, Picture::Heisenberg);
        let k = choi_to_kraus(id.choi(), Picture::Heisenberg, None).unwrap();
        assert_eq!(k.len(), 1);
        let w = &k.operators()[0];
        // W = e^{iφ} I
        let phase = w[[0, 0]];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(max_abs(&(w - &linalg::identity(2).mapv(|z| z * phase))) < 1e-12);
        let back = kraus_to_super(&k, Picture::Heisenberg);
        assert!(back.distance(id.superoperator()) < 1e-12);
    }

    #[test]
    fn dephasing_kraus_round_trip() {
        let deph = dephasing(0.25, Picture::Heisenberg);
        let k = choi_to_kraus(deph.choi(), Picture::Heisenberg, None).unwrap();
        assert_eq!(k.len(), 2);
        // each operator lies in span{I, Z}: off-diagonals vanish
        for w in k.operators() {
            assert!(w[[0, 1]].norm() < 1e-12 && w[[1, 0]].norm() < 1e-12);
        }
        let back = kraus_to_super(&k, Picture::Heisenberg);
        assert!(back.distance(deph.superoperator()) < 1e-10);
    }

    #[test]
    fn transpose_choi_is_not_cp() {
        let t = transpose_map(2, Picture::Heisenberg);
        match choi_to_kraus(t.choi(), Picture::Heisenberg, None) {
            Err(Error::NotCompletelyPositive { eigenvalue, eigenvector }) => {
                assert!((eigenvalue + 1.0).abs() < 1e-12);
                assert_eq!(eigenvector.len(), 4);
                // witness is the antisymmetric vector (|01> - |10>)/√2
                assert!(eigenvector[0].norm() < 1e-12 && eigenvector[3].norm() < 1e-12);
                assert!((eigenvector[1] + eigenvector[2]).norm() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_hermitian_choi_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let j = ChoiMatrix::new(2, random_complex(&mut rng, 4, 4)).unwrap();
        assert!(matches!(
            choi_to_kraus(&j, Picture::Heisenberg, None),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn kraus_dimension_mismatch() {
        let err = KrausSet::new(vec![linalg::identity(2), linalg::identity(3)]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
        assert!(KrausSet::new(vec![]).is_err());
    }

    #[test]
    fn schroedinger_kraus_from_choi() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let k = random_kraus(&mut rng, 3, 2);
        let ch = QuantumChannel::from_kraus(k, Picture::Schroedinger);
        let extracted = choi_to_kraus(ch.choi(), Picture::Schroedinger, None).unwrap();
        let back = kraus_to_super(&extracted, Picture::Schroedinger);
        assert!(back.distance(ch.superoperator()) < 1e-10);
        assert!(extracted.completeness_defect() < 1e-10);
    }

    #[test]
    fn cached_representations_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let ch = QuantumChannel::from_kraus(random_kraus(&mut rng, 2, 3), Picture::Heisenberg);
        let a = random_complex(&mut rng, 2, 2);
        let via_kraus = ch.apply(&a);
        let via_super = ch.superoperator().apply(&a);
        assert!(max_abs(&(via_kraus - via_super)) < 1e-13);
        let from_choi = QuantumChannel::from_choi(ch.choi().clone(), Picture::Heisenberg);
        assert!(from_choi.distance(&ch) < 1e-13);
    }
}
