use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::LindbladModel;
use crate::channels::SuperoperatorMatrix;
use crate::error::{Error, Result};
use crate::lattice::{make_region, site_operator, LocalOperator, Region, SubsystemIndex};
use crate::linalg::{self, dagger, Matrix, I, ONE, ZERO};

/// A local piece of the generator acting on a few tensor positions of the region.
#[derive(Debug, Clone)]
struct LocalTerm {
    positions: Vec<usize>,
    index: SubsystemIndex,
    matrix: Matrix,
    adjoint: Matrix,
    /// `V^* V` for jump terms, unused for Hamiltonian terms.
    gram: Matrix,
}

impl LocalTerm {
    fn new(dims: &[usize], positions: Vec<usize>, matrix: Matrix) -> Self {
        let index = SubsystemIndex::new(dims, &positions);
        let adjoint = dagger(&matrix);
        let gram = adjoint.dot(&matrix);
        LocalTerm { positions, index, matrix, adjoint, gram }
    }
}

/// `K = iH - ½ Σ_j V_j^* V_j` as a sum of local pieces, with every piece folded
/// into the first piece whose support contains it.
fn effective_terms(dims: &[usize], hamiltonian: &[LocalTerm], jumps: &[LocalTerm]) -> Vec<LocalTerm> {
    let mut pieces: Vec<(Vec<usize>, Matrix)> = hamiltonian
        .iter()
        .map(|t| (t.positions.clone(), t.matrix.mapv(|z| z * I)))
        .chain(jumps.iter().map(|t| (t.positions.clone(), t.gram.mapv(|z| z * -0.5))))
        .collect();
    pieces.sort_by_key(|(p, _)| std::cmp::Reverse(p.len()));
    let mut merged: Vec<(Vec<usize>, Matrix)> = Vec::new();
    for (positions, m) in pieces {
        let host = merged.iter_mut().find(|(q, _)| positions.iter().all(|p| q.contains(p)));
        match host {
            Some((q, acc)) => {
                let local_dims: Vec<usize> = q.iter().map(|&p| dims[p]).collect();
                let inner: Vec<usize> = positions.iter().map(|p| q.iter().position(|x| x == p).expect("contained")).collect();
                *acc += &SubsystemIndex::new(&local_dims, &inner).embed(&m);
            }
            None => merged.push((positions, m)),
        }
    }
    merged.into_iter().map(|(p, m)| LocalTerm::new(dims, p, m)).collect()
}

/// Column and row tile widths for the fused kernels.
const TILE_COLS: usize = 64;
const TILE_ROWS: usize = 8;

/// The Heisenberg-picture generator
/// `L♯(A) = i[H, A] + Σ_j (V_j^* A V_j - ½{V_j^* V_j, A})` on a region.
#[derive(Debug, Clone)]
pub struct Generator {
    region: Region,
    hamiltonian: Vec<LocalTerm>,
    jumps: Vec<LocalTerm>,
    effective: Vec<LocalTerm>,
}

/// Places every pattern of `model` inside `region` (open boundaries).
///
/// Fails when a pattern with nonzero weight fits nowhere in the region.
pub fn build_generator(model: &LindbladModel, region: &Region) -> Result<Generator> {
    model.validate()?;
    if region.lattice_dim() != model.lattice_dim {
        return Err(Error::InvalidArgument(format!(
            "model {} lives on Z^{}, region on Z^{}",
            model.name,
            model.lattice_dim,
            region.lattice_dim()
        )));
    }
    let dims = region.local_dims();

    let mut hamiltonian = Vec::new();
    for term in &model.hamiltonian_terms {
        if term.coupling == 0.0 {
            continue;
        }
        let mut placed = 0;
        for anchor in region.sites() {
            let sites: Result<Vec<_>> = term.factors.iter().map(|(_, o)| anchor.shifted(o)).collect();
            let sites = sites?;
            if !sites.iter().all(|s| region.contains(s)) {
                continue;
            }
            let mut op: Option<LocalOperator> = None;
            for ((label, _), site) in term.factors.iter().zip(&sites) {
                let f = site_operator(*label, site)?;
                op = Some(match op {
                    None => f,
                    Some(acc) => acc.product(&f)?,
                });
            }
            let op = op.expect("validated non-empty pattern");
            let positions = op.support().positions_in(region)?;
            let m = op.matrix().mapv(|z| z * term.coupling);
            hamiltonian.push(LocalTerm::new(&dims, positions, m));
            placed += 1;
        }
        if placed == 0 {
            let labels: Vec<String> = term.factors.iter().map(|(l, o)| format!("{l}{o:?}")).collect();
            return Err(Error::RegionTooSmall { pattern: labels.join("*"), sites: region.len() });
        }
    }

    let mut jumps = Vec::new();
    for term in &model.jump_terms {
        if term.rate == 0.0 {
            continue;
        }
        let mut placed = 0;
        for anchor in region.sites() {
            let site = anchor.shifted(&term.offset)?;
            if !region.contains(&site) {
                continue;
            }
            let op = site_operator(term.label, &site)?;
            let positions = make_region([site])?.positions_in(region)?;
            let m = op.matrix().mapv(|z| z * term.rate.sqrt());
            jumps.push(LocalTerm::new(&dims, positions, m));
            placed += 1;
        }
        if placed == 0 {
            return Err(Error::RegionTooSmall { pattern: format!("jump {}", term.label), sites: region.len() });
        }
    }

    let effective = effective_terms(&dims, &hamiltonian, &jumps);
    Ok(Generator { region: region.clone(), hamiltonian, jumps, effective })
}

impl Generator {
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn dim(&self) -> usize {
        self.region.total_dim()
    }

    pub fn is_zero(&self) -> bool {
        self.hamiltonian.is_empty() && self.jumps.is_empty()
    }

    /// The generator on the smallest subregion containing `support` that no
    /// term connects to its complement.
    ///
    /// Every term annihilates the identity, so for `A` supported there
    /// `exp(t L♯_Λ)(A ⊗ I) = exp(t L♯_C)(A) ⊗ I` exactly.
    pub fn restrict_to_component(&self, support: &Region) -> Result<Generator> {
        let mut inside: Vec<bool> = vec![false; self.region.len()];
        for p in support.positions_in(&self.region)? {
            inside[p] = true;
        }
        let terms = || self.hamiltonian.iter().chain(&self.jumps);
        loop {
            let mut grew = false;
            for t in terms() {
                if t.positions.iter().any(|&p| inside[p]) && !t.positions.iter().all(|&p| inside[p]) {
                    for &p in &t.positions {
                        inside[p] = true;
                    }
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        let sites: Vec<_> = self.region.sites().iter().zip(&inside).filter(|(_, &k)| k).map(|(s, _)| s.clone()).collect();
        let region = make_region(sites)?;
        if region.len() == self.region.len() {
            return Ok(self.clone());
        }
        let dims = region.local_dims();
        let remap = |t: &LocalTerm| -> Option<LocalTerm> {
            let positions: Option<Vec<usize>> = t
                .positions
                .iter()
                .map(|&p| region.position(&self.region.sites()[p]))
                .collect();
            positions.map(|pos| LocalTerm::new(&dims, pos, t.matrix.clone()))
        };
        let hamiltonian: Vec<LocalTerm> = self.hamiltonian.iter().filter_map(remap).collect();
        let jumps: Vec<LocalTerm> = self.jumps.iter().filter_map(remap).collect();
        let effective = effective_terms(&dims, &hamiltonian, &jumps);
        Ok(Generator { region, hamiltonian, jumps, effective })
    }

    /// Dense Hamiltonian on the region.
    pub fn hamiltonian_matrix(&self) -> Matrix {
        let d = self.dim();
        let mut h = Array2::zeros((d, d));
        for t in &self.hamiltonian {
            h += &t.index.embed(&t.matrix);
        }
        h
    }

    /// Dense jump operators on the region.
    pub fn jump_matrices(&self) -> Vec<Matrix> {
        self.jumps.iter().map(|t| t.index.embed(&t.matrix)).collect()
    }

    /// `L♯(A)`.
    pub fn apply_heisenberg(&self, a: &Matrix) -> Matrix {
        self.apply(a, false)
    }

    /// The Hilbert-Schmidt adjoint `L(ρ) = -i[H, ρ] + Σ_j (V_j ρ V_j^* - ½{V_j^* V_j, ρ})`.
    pub fn apply_schroedinger(&self, rho: &Matrix) -> Matrix {
        self.apply(rho, true)
    }

    // Heisenberg: K A + A K^* + Σ V^* A V.  Schrödinger: K^* ρ + ρ K + Σ V ρ V^*.
    fn apply(&self, a: &Matrix, schroedinger: bool) -> Matrix {
        let d = self.dim();
        assert_eq!(a.dim(), (d, d), "operator does not live on the generator's region");
        let a = a.as_standard_layout().into_owned();
        let mut out = Array2::zeros((d, d));
        fn pick(t: &LocalTerm, adjoint: bool) -> &Matrix {
            if adjoint {
                &t.adjoint
            } else {
                &t.matrix
            }
        }
        for c0 in (0..d).step_by(TILE_COLS) {
            let cols = c0..(c0 + TILE_COLS).min(d);
            for t in &self.effective {
                t.index.left_mul_acc_cols(pick(t, schroedinger), &a, ONE, &mut out, cols.clone());
            }
        }
        for r0 in (0..d).step_by(TILE_ROWS) {
            let rows = r0..(r0 + TILE_ROWS).min(d);
            for t in &self.effective {
                t.index.right_mul_acc_rows(&a, pick(t, !schroedinger), ONE, &mut out, rows.clone());
            }
        }
        for t in &self.jumps {
            if schroedinger {
                t.index.sandwich_acc(&t.matrix, &a, &t.adjoint, ONE, &mut out);
            } else {
                t.index.sandwich_acc(&t.adjoint, &a, &t.matrix, ONE, &mut out);
            }
        }
        out
    }

    /// `L♯` as a `d^2 x d^2` matrix on column-stacked operators:
    /// `S = I ⊗ G + conj(G) ⊗ I + Σ_j V_j^T ⊗ V_j^*` with `G = iH - ½ Σ_j V_j^* V_j`.
    pub fn superoperator(&self) -> SuperoperatorMatrix {
        let d = self.dim();
        let mut g = self.hamiltonian_matrix().mapv(|z| z * I);
        let jumps = self.jump_matrices();
        for v in &jumps {
            g -= &dagger(v).dot(v).mapv(|z| z * 0.5);
        }
        let mut s = Array2::zeros((d * d, d * d));
        let id = linalg::identity(d);
        add_kron(&mut s, &id, &g);
        add_kron(&mut s, &g.mapv(|z| z.conj()), &id);
        for v in &jumps {
            add_kron(&mut s, &v.t().to_owned(), &dagger(v));
        }
        SuperoperatorMatrix::new(d, s).expect("square by construction")
    }

    /// Power-iteration estimate of the induced Hilbert-Schmidt norm of `L♯`.
    pub fn norm_estimate(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut x = linalg::random_complex(&mut rng, d, d);
        let mut estimate = 0.0;
        for _ in 0..60 {
            let nx = linalg::frobenius_norm(&x);
            if nx == 0.0 {
                break;
            }
            x.mapv_inplace(|z| z / nx);
            let y = self.apply_heisenberg(&x);
            let ny = linalg::frobenius_norm(&y);
            let next = ny;
            let converged = (next - estimate).abs() <= 1e-3 * next;
            estimate = next;
            // L L♯ x keeps the iteration on the dominant right singular vector
            x = self.apply_schroedinger(&y);
            if converged {
                break;
            }
        }
        estimate
    }
}

/// `out += a ⊗ b`, skipping zero entries of `a`.
fn add_kron(out: &mut Matrix, a: &Matrix, b: &Matrix) {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == ZERO {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[[i * br + p, j * bc + q]] += aij * b[[p, q]];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{embed, OpLabel, Site};
    use crate::linalg::{max_abs, random_complex, random_hermitian};
    use std::collections::BTreeMap;

    fn chain(n: usize) -> Region {
        Region::chain(0, n).unwrap()
    }

    #[test]
    fn zero_model_gives_zero_generator() {
        let mut m = LindbladModel::ising(1, 0.0, 0.0, 0.0, OpLabel::Z);
        m.name = "zero".into();
        let g = build_generator(&m, &chain(2)).unwrap();
        assert!(g.is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let a = random_complex(&mut rng, 4, 4);
        assert_eq!(max_abs(&g.apply_heisenberg(&a)), 0.0);
        assert_eq!(max_abs(g.superoperator().matrix()), 0.0);
    }

    #[test]
    fn single_site_dephasing_on_x() {
        let m = LindbladModel::on_site(1, 0.5, OpLabel::Z);
        let g = build_generator(&m, &chain(1)).unwrap();
        let x = OpLabel::X.matrix(2).unwrap();
        let out = g.apply_heisenberg(&x);
        assert!(max_abs(&(out + &x)) < 1e-15);
    }

    #[test]
    fn ising_zz_commutes_with_z() {
        let m = LindbladModel::ising(1, 1.0, 0.0, 0.0, OpLabel::Z);
        let g = build_generator(&m, &chain(2)).unwrap();
        let z0 = embed(&site_operator(OpLabel::Z, &Site::qubit(0)).unwrap(), &chain(2)).unwrap();
        assert!(max_abs(&g.apply_heisenberg(z0.matrix())) < 1e-15);
    }

    #[test]
    fn unital_and_hermiticity_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for name in ["ising_dephasing", "ising_damping", "dephasing", "damping"] {
            let m = LindbladModel::catalog(name, &BTreeMap::new()).unwrap();
            let g = build_generator(&m, &chain(3)).unwrap();
            assert!(max_abs(&g.apply_heisenberg(&linalg::identity(8))) <= 1e-12, "{name}");
            let h = random_hermitian(&mut rng, 8);
            let out = g.apply_heisenberg(&h);
            assert!(linalg::hermitian_deviation(&out) < 1e-12, "{name}");
        }
    }

    #[test]
    fn local_and_dense_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let m = LindbladModel::ising(2, 0.7, 0.3, 0.4, OpLabel::Lower);
        let region = make_region([Site::qubit_2d(0, 0), Site::qubit_2d(0, 1), Site::qubit_2d(1, 0)]).unwrap();
        let g = build_generator(&m, &region).unwrap();
        let s = g.superoperator();
        let a = random_complex(&mut rng, 8, 8);
        assert!(max_abs(&(g.apply_heisenberg(&a) - s.apply(&a))) < 1e-13);
        // Schrödinger action is the adjoint superoperator
        assert!(max_abs(&(g.apply_schroedinger(&a) - s.adjoint().apply(&a))) < 1e-13);

        // explicit Lindblad formula with dense operators
        let h = g.hamiltonian_matrix();
        let mut want = (h.dot(&a) - a.dot(&h)).mapv(|z| z * I);
        for v in g.jump_matrices() {
            let vd = dagger(&v);
            let k = vd.dot(&v);
            want = want + vd.dot(&a).dot(&v) - (k.dot(&a) + a.dot(&k)).mapv(|z| z * 0.5);
        }
        assert!(max_abs(&(g.apply_heisenberg(&a) - want)) < 1e-13);
    }

    #[test]
    fn open_boundary_term_count() {
        let m = LindbladModel::ising(1, 1.0, 0.8, 0.5, OpLabel::Z);
        let g = build_generator(&m, &chain(4)).unwrap();
        // 3 bonds + 4 fields, 4 jumps
        assert_eq!(g.hamiltonian.len(), 7);
        assert_eq!(g.jumps.len(), 4);
    }

    #[test]
    fn component_restriction() {
        let support = make_region([Site::qubit(0)]).unwrap();
        let local = build_generator(&LindbladModel::on_site(1, 0.5, OpLabel::Z), &Region::chain(-2, 5).unwrap()).unwrap();
        let r = local.restrict_to_component(&support).unwrap();
        assert_eq!(r.region().len(), 1);
        assert_eq!(r.jump_matrices().len(), 1);

        let ising = build_generator(&LindbladModel::ising(1, 1.0, 0.8, 0.5, OpLabel::Z), &Region::chain(-2, 5).unwrap()).unwrap();
        assert_eq!(ising.restrict_to_component(&support).unwrap().region().len(), 5);

        // a decoupled bond: only H on sites {0, 1}, jumps nowhere
        let mut m = LindbladModel::ising(1, 1.0, 0.0, 0.0, OpLabel::Z);
        m.hamiltonian_terms[0].factors[1].1 = vec![1];
        let g = build_generator(&m, &Region::chain(0, 4).unwrap()).unwrap();
        assert_eq!(g.restrict_to_component(&support).unwrap().region().len(), 4);
    }

    #[test]
    fn too_small_region_rejected() {
        let m = LindbladModel::ising(1, 1.0, 0.8, 0.5, OpLabel::Z);
        assert!(matches!(build_generator(&m, &chain(1)), Err(Error::RegionTooSmall { sites: 1, .. })));
    }

    #[test]
    fn norm_estimate_single_site() {
        // L♯ has eigenvalues {0, 0, -1, -1} for dephasing κ = 0.5
        let m = LindbladModel::on_site(1, 0.5, OpLabel::Z);
        let g = build_generator(&m, &chain(1)).unwrap();
        assert!((g.norm_estimate() - 1.0).abs() < 1e-6);
    }
}
