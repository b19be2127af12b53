//! Verification of channel properties: normalization, complete positivity via
//! the Choi spectrum, the explicit sum-of-squares form of `(Φ ⊗ id)(C^*C)`,
//! and the trace duality between the two pictures.

use ndarray::{s, Array2};
use rand::Rng;
use serde::Serialize;

use super::{KrausSet, Picture, QuantumChannel, SuperoperatorMatrix};
use crate::error::{Error, Result};
use crate::linalg::{self, dagger, kron, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationReport {
    /// `‖Φ(I) - I‖`
    pub unital_defect: f64,
    /// `‖Φ^†(I) - I‖`, i.e. trace preservation of the dual.
    pub trace_defect: f64,
    pub picture: Picture,
    pub tolerance: f64,
    /// The defect relevant to the picture is within tolerance.
    pub passed: bool,
}

pub fn check_normalization(c: &QuantumChannel, tol: f64) -> NormalizationReport {
    let id = linalg::identity(c.dim());
    let norm = |m: Matrix| linalg::spectral_norm(&m).expect("SVD of a finite matrix");
    let unital_defect = norm(c.apply(&id) - &id);
    let trace_defect = norm(c.apply_dual(&id) - &id);
    let relevant = match c.picture() {
        Picture::Heisenberg => unital_defect,
        Picture::Schroedinger => trace_defect,
    };
    NormalizationReport {
        unital_defect,
        trace_defect,
        picture: c.picture(),
        tolerance: tol,
        passed: relevant <= tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CpVerdict {
    pub cp: bool,
    pub min_choi_eigenvalue: f64,
}

/// Choi criterion: CP iff the smallest Choi eigenvalue is at least `-tol`.
pub fn is_completely_positive(c: &QuantumChannel, tol: f64) -> Result<CpVerdict> {
    let min = linalg::min_hermitian_eigenvalue(c.choi().matrix())?;
    Ok(CpVerdict { cp: min >= -tol, min_choi_eigenvalue: min })
}

/// `(Φ ⊗ id_k)(X)` for `X` on `C^d ⊗ C^k`, applying `Φ` blockwise.
pub fn apply_extended(c: &QuantumChannel, x: &Matrix, k: usize) -> Result<Matrix> {
    let d = c.dim();
    if x.dim() != (d * k, d * k) {
        return Err(Error::DimensionMismatch(format!(
            "extended operator must be {0}x{0}, got {1}x{2}",
            d * k,
            x.nrows(),
            x.ncols()
        )));
    }
    let mut out = Array2::zeros((d * k, d * k));
    for m in 0..k {
        for n in 0..k {
            let block = x.slice(s![m..;k, n..;k]).to_owned();
            let image = c.apply(&block);
            out.slice_mut(s![m..;k, n..;k]).assign(&image);
        }
    }
    Ok(out)
}

/// `Φ ⊗ id_k` on dimension `d k`, with the matrix-algebra factor second.
pub fn tensor_with_identity(c: &QuantumChannel, k: usize, cap: usize) -> Result<QuantumChannel> {
    if k == 0 {
        return Err(Error::InvalidArgument("ancilla dimension must be at least 1".into()));
    }
    let d = c.dim();
    let big = d * k;
    if big > cap {
        return Err(Error::Capacity { what: format!("Φ ⊗ id_{k}"), requested: big, cap });
    }
    if k == 1 {
        return Ok(c.clone());
    }
    let s = c.superoperator().matrix();
    let mut out = Array2::zeros((big * big, big * big));
    // S'[(a'k+m) + (b'k+n) D, (ak+m) + (bk+n) D] = S[a' + b'd, a + bd]
    for bp in 0..d {
        for ap in 0..d {
            let row_small = ap + bp * d;
            for b in 0..d {
                for a in 0..d {
                    let v = s[[row_small, a + b * d]];
                    if v == linalg::ZERO {
                        continue;
                    }
                    for n in 0..k {
                        for m in 0..k {
                            let row = (ap * k + m) + (bp * k + n) * big;
                            let col = (a * k + m) + (b * k + n) * big;
                            out[[row, col]] = v;
                        }
                    }
                }
            }
        }
    }
    let sup = SuperoperatorMatrix::new(big, out)?;
    Ok(QuantumChannel::from_superoperator(sup, c.picture()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SosReport {
    /// `‖(Φ ⊗ id)(C̃^*C̃) - Σ_n D_n^* D_n‖`
    pub defect: f64,
    /// Smallest eigenvalue of `(Φ ⊗ id)(C̃^*C̃)`.
    pub min_eigenvalue: f64,
    /// `‖Σ W_n^* W_n - I‖` of the supplied Kraus set.
    pub completeness_defect: f64,
}

/// Evaluates `(Φ ⊗ id_k)(C̃^*C̃)` for `C̃ = Σ_r C_r ⊗ M_r` twice: directly
/// through the superoperator, and as `Σ_n D_n^* D_n` with
/// `D_n = Σ_r (C_r W_n) ⊗ M_r`.
pub fn sos_witness(kraus: &KrausSet, parts: &[(Matrix, Matrix)]) -> Result<SosReport> {
    let d = kraus.dim();
    let (_, m0) = parts
        .first()
        .ok_or_else(|| Error::InvalidArgument("sum-of-squares witness needs at least one part".into()))?;
    let k = m0.nrows();
    for (r, (cr, mr)) in parts.iter().enumerate() {
        if cr.dim() != (d, d) || mr.dim() != (k, k) {
            return Err(Error::DimensionMismatch(format!(
                "part {r}: expected C {d}x{d} and M {k}x{k}, got {:?} and {:?}",
                cr.dim(),
                mr.dim()
            )));
        }
    }

    let mut c_tilde = Array2::zeros((d * k, d * k));
    for (cr, mr) in parts {
        c_tilde += &kron(cr, mr);
    }
    let positive = dagger(&c_tilde).dot(&c_tilde);

    let channel = QuantumChannel::from_superoperator(
        super::kraus_to_super(kraus, Picture::Heisenberg),
        Picture::Heisenberg,
    );
    let lhs = apply_extended(&channel, &positive, k)?;

    let mut rhs = Array2::zeros((d * k, d * k));
    for w in kraus.operators() {
        let mut dn = Array2::zeros((d * k, d * k));
        for (cr, mr) in parts {
            dn += &kron(&cr.dot(w), mr);
        }
        rhs += &dagger(&dn).dot(&dn);
    }

    Ok(SosReport {
        defect: linalg::spectral_norm(&(&lhs - &rhs))?,
        min_eigenvalue: linalg::min_hermitian_eigenvalue(&lhs)?,
        completeness_defect: kraus.completeness_defect(),
    })
}

/// The dual map with respect to `(ρ, A) ↦ tr(ρ A)`, picture tag swapped.
///
/// Kraus operators carry over unchanged (the picture decides how they act),
/// and the superoperator becomes its conjugate transpose.
pub fn dual_channel(c: &QuantumChannel) -> QuantumChannel {
    let picture = c.picture().dual();
    if let Some(k) = c.kraus.get() {
        let dual = QuantumChannel::from_kraus(k.clone(), picture);
        if let Some(s) = c.superop.get() {
            let _ = dual.superop.set(s.adjoint());
        }
        return dual;
    }
    QuantumChannel::from_superoperator(c.superoperator().adjoint(), picture)
}

/// Largest `|tr(ρ Φ_H(A)) - tr(Φ_S(ρ) A)|` over random density matrices `ρ`
/// and Hermitian `A`, where `Φ_H`/`Φ_S` are the Heisenberg and Schrödinger
/// members of the pair `{c, dual(c)}`.
pub fn pairing_defect<R: Rng + ?Sized>(c: &QuantumChannel, trials: usize, rng: &mut R) -> f64 {
    let dual = dual_channel(c);
    let (heis, schr) = match c.picture() {
        Picture::Heisenberg => (c, &dual),
        Picture::Schroedinger => (&dual, c),
    };
    let d = c.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let rho = linalg::random_density(rng, d);
        let a = linalg::random_hermitian(rng, d);
        let lhs = linalg::trace(&rho.dot(&heis.apply(&a)));
        let rhs = linalg::trace(&schr.apply(&rho).dot(&a));
        worst = worst.max((lhs - rhs).norm());
    }
    worst
}
