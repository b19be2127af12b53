//! Finite regions of `Z^d`, operators localised in them, and the isotone
//! embeddings `A(Λ) -> A(Λ')` that tensor with the identity.
//!
//! Tensor factors always follow the canonical (lexicographic) site order of
//! the region, with the first site as the most significant index.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, Matrix, ONE, ZERO};

/// A lattice site of `Z^d` (`d` is 1 or 2) carrying a `local_dim`-level system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    coords: Vec<i64>,
    local_dim: usize,
}

impl Site {
    pub fn new(coords: Vec<i64>, local_dim: usize) -> Result<Self> {
        if coords.is_empty() || coords.len() > 2 {
            return Err(Error::InvalidSite(format!(
                "lattice dimension must be 1 or 2, got {}",
                coords.len()
            )));
        }
        if local_dim < 2 {
            return Err(Error::InvalidSite(format!(
                "local dimension must be at least 2, got {local_dim}"
            )));
        }
        Ok(Site { coords, local_dim })
    }

    /// Qubit at `x` on the chain `Z`.
    pub fn qubit(x: i64) -> Self {
        Site { coords: vec![x], local_dim: 2 }
    }

    /// Qubit at `(x, y)` on the square lattice `Z^2`.
    pub fn qubit_2d(x: i64, y: i64) -> Self {
        Site { coords: vec![x, y], local_dim: 2 }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn lattice_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    /// The site displaced by `offset`, same local dimension.
    pub fn shifted(&self, offset: &[i64]) -> Result<Site> {
        if offset.len() != self.coords.len() {
            return Err(Error::InvalidSite(format!(
                "offset of length {} on a {}-dimensional lattice",
                offset.len(),
                self.coords.len()
            )));
        }
        let coords = self.coords.iter().zip(offset).map(|(a, b)| a + b).collect();
        Ok(Site { coords, local_dim: self.local_dim })
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A finite set of sites `Λ` in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    sites: Vec<Site>,
    total_dim: usize,
}

/// Builds a region from any ordering of distinct sites.
pub fn make_region<I: IntoIterator<Item = Site>>(sites: I) -> Result<Region> {
    let mut sites: Vec<Site> = sites.into_iter().collect();
    if sites.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let d = sites[0].lattice_dim();
    if let Some(bad) = sites.iter().find(|s| s.lattice_dim() != d) {
        return Err(Error::InvalidSite(format!(
            "site {bad} does not live on the {d}-dimensional lattice"
        )));
    }
    sites.sort_by(|a, b| a.coords.cmp(&b.coords));
    if let Some(w) = sites.windows(2).find(|w| w[0].coords == w[1].coords) {
        return Err(Error::DuplicateSite(w[1].to_string()));
    }
    let total_dim = sites
        .iter()
        .try_fold(1usize, |acc, s| acc.checked_mul(s.local_dim))
        .ok_or_else(|| Error::InvalidArgument("region dimension overflows usize".into()))?;
    Ok(Region { sites, total_dim })
}

impl Region {
    /// Qubit chain `start, start+1, ..., start+len-1`.
    pub fn chain(start: i64, len: usize) -> Result<Region> {
        make_region((0..len as i64).map(|i| Site::qubit(start + i)))
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn lattice_dim(&self) -> usize {
        self.sites[0].lattice_dim()
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.local_dim).collect()
    }

    pub fn position(&self, site: &Site) -> Option<usize> {
        self.sites
            .binary_search_by(|s| s.coords.cmp(&site.coords))
            .ok()
            .filter(|&i| self.sites[i].local_dim == site.local_dim)
    }

    pub fn contains(&self, site: &Site) -> bool {
        self.position(site).is_some()
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.sites.iter().all(|s| other.contains(s))
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.sites.iter().all(|s| !other.contains(s))
    }

    pub fn union(&self, other: &Region) -> Result<Region> {
        let mut all = self.sites.clone();
        all.extend(other.sites.iter().filter(|s| !self.contains(s)).cloned());
        make_region(all)
    }

    /// Positions of this region's sites inside `target`, in canonical order.
    pub fn positions_in(&self, target: &Region) -> Result<Vec<usize>> {
        let mut missing = Vec::new();
        let mut positions = Vec::with_capacity(self.len());
        for s in &self.sites {
            match target.position(s) {
                Some(p) => positions.push(p),
                None => missing.push(s.to_string()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::NotContained { missing: missing.join(", ") });
        }
        Ok(positions)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sites.iter().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

/// Index bookkeeping for a subsystem (a subset of tensor positions) of a
/// mixed-radix product space.
///
/// Every full index decomposes uniquely as `base + offsets[l]`, where `base`
/// has zero digits on the subsystem and `l` enumerates subsystem states.
#[derive(Debug, Clone)]
pub struct SubsystemIndex {
    offsets: Vec<usize>,
    bases: Vec<usize>,
    total: usize,
}

impl SubsystemIndex {
    pub fn new(dims: &[usize], positions: &[usize]) -> Self {
        let n = dims.len();
        let mut strides = vec![1usize; n];
        for p in (0..n.saturating_sub(1)).rev() {
            strides[p] = strides[p + 1] * dims[p + 1];
        }
        let total: usize = dims.iter().product();

        let mut offsets = vec![0usize];
        for &p in positions {
            let mut next = Vec::with_capacity(offsets.len() * dims[p]);
            for &o in &offsets {
                for digit in 0..dims[p] {
                    next.push(o + digit * strides[p]);
                }
            }
            offsets = next;
        }

        let bases = (0..total)
            .filter(|&idx| positions.iter().all(|&p| (idx / strides[p]) % dims[p] == 0))
            .collect();
        SubsystemIndex { offsets, bases, total }
    }

    pub fn local_dim(&self) -> usize {
        self.offsets.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    /// `op ⊗ I` (subsystem factors interleaved at their positions) as a dense matrix.
    pub fn embed(&self, op: &Matrix) -> Matrix {
        let m = self.local_dim();
        let mut out = Array2::zeros((self.total, self.total));
        for &b in &self.bases {
            for l in 0..m {
                for k in 0..m {
                    out[[b + self.offsets[l], b + self.offsets[k]]] = op[[l, k]];
                }
            }
        }
        out
    }

    /// `out += coef * (op ⊗ I) · a`.
    pub fn left_mul_acc(&self, op: &Matrix, a: &Matrix, coef: linalg::C64, out: &mut Matrix) {
        self.left_mul_acc_cols(op, a, coef, out, 0..self.total);
    }

    /// [`left_mul_acc`](Self::left_mul_acc) restricted to a range of columns.
    pub fn left_mul_acc_cols(&self, op: &Matrix, a: &Matrix, coef: linalg::C64, out: &mut Matrix, cols: Range<usize>) {
        let m = self.local_dim();
        let n = self.total;
        let a = a.as_slice().expect("standard layout");
        let out = out.as_slice_mut().expect("standard layout");
        for &b in &self.bases {
            for lo in 0..m {
                let row_out = (b + self.offsets[lo]) * n;
                for li in 0..m {
                    let w = op[[lo, li]];
                    if w == ZERO {
                        continue;
                    }
                    let w = w * coef;
                    let row_in = (b + self.offsets[li]) * n;
                    let src = &a[row_in + cols.start..row_in + cols.end];
                    let dst = &mut out[row_out + cols.start..row_out + cols.end];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += w * s;
                    }
                }
            }
        }
    }

    /// `out += coef * a · (op ⊗ I)`.
    pub fn right_mul_acc(&self, a: &Matrix, op: &Matrix, coef: linalg::C64, out: &mut Matrix) {
        self.right_mul_acc_rows(a, op, coef, out, 0..self.total);
    }

    /// [`right_mul_acc`](Self::right_mul_acc) restricted to a range of rows.
    pub fn right_mul_acc_rows(&self, a: &Matrix, op: &Matrix, coef: linalg::C64, out: &mut Matrix, rows: Range<usize>) {
        let m = self.local_dim();
        let n = self.total;
        let a = a.as_slice().expect("standard layout");
        let out = out.as_slice_mut().expect("standard layout");
        let scaled: Vec<(usize, usize, linalg::C64)> = (0..m)
            .flat_map(|l| (0..m).map(move |k| (l, k)))
            .filter(|&(l, k)| op[[l, k]] != ZERO)
            .map(|(l, k)| (l, k, op[[l, k]] * coef))
            .collect();
        for r in rows {
            let row = &a[r * n..(r + 1) * n];
            let row_out = &mut out[r * n..(r + 1) * n];
            for &b in &self.bases {
                for &(l, k, w) in &scaled {
                    row_out[b + self.offsets[k]] += w * row[b + self.offsets[l]];
                }
            }
        }
    }

    /// `out += coef * (x ⊗ I) · a · (y ⊗ I)` in one pass over `a`.
    pub fn sandwich_acc(&self, x: &Matrix, a: &Matrix, y: &Matrix, coef: linalg::C64, out: &mut Matrix) {
        let m = self.local_dim();
        let n = self.total;
        let a = a.as_slice().expect("standard layout");
        let out = out.as_slice_mut().expect("standard layout");
        // nonzero entries (l, k, l', k') of out_block[l, k] += x[l, l'] a_block[l', k'] y[k', k]
        let mut entries = Vec::new();
        for l in 0..m {
            for lp in 0..m {
                if x[[l, lp]] == ZERO {
                    continue;
                }
                for kp in 0..m {
                    for k in 0..m {
                        if y[[kp, k]] != ZERO {
                            let w = coef * x[[l, lp]] * y[[kp, k]];
                            entries.push((self.offsets[l] * n, self.offsets[k], self.offsets[lp] * n, self.offsets[kp], w));
                        }
                    }
                }
            }
        }
        for &br in &self.bases {
            let row = br * n;
            for &bc in &self.bases {
                for &(ro, co, ri, ci, w) in &entries {
                    out[row + ro + bc + co] += w * a[row + ri + bc + ci];
                }
            }
        }
    }
}

/// Single-site operator labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpLabel {
    I,
    X,
    Y,
    Z,
    /// `|1><0|`
    Raise,
    /// `|0><1|`
    Lower,
    /// Matrix unit `|i><j|`.
    Unit(usize, usize),
}

impl OpLabel {
    pub fn matrix(&self, local_dim: usize) -> Result<Matrix> {
        let undefined = || Error::InvalidLabel { label: self.to_string(), local_dim };
        let qubit_only = |m: Matrix| if local_dim == 2 { Ok(m) } else { Err(undefined()) };
        let z = ZERO;
        match *self {
            OpLabel::I => Ok(linalg::identity(local_dim)),
            OpLabel::X => qubit_only(ndarray::array![[z, ONE], [ONE, z]]),
            OpLabel::Y => qubit_only(ndarray::array![[z, c(0.0, -1.0)], [c(0.0, 1.0), z]]),
            OpLabel::Z => qubit_only(ndarray::array![[ONE, z], [z, c(-1.0, 0.0)]]),
            OpLabel::Raise => qubit_only(ndarray::array![[z, z], [ONE, z]]),
            OpLabel::Lower => qubit_only(ndarray::array![[z, ONE], [z, z]]),
            OpLabel::Unit(i, j) => {
                if i >= local_dim || j >= local_dim {
                    return Err(undefined());
                }
                let mut m = Array2::zeros((local_dim, local_dim));
                m[[i, j]] = ONE;
                Ok(m)
            }
        }
    }
}

impl fmt::Display for OpLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpLabel::I => write!(f, "I"),
            OpLabel::X => write!(f, "X"),
            OpLabel::Y => write!(f, "Y"),
            OpLabel::Z => write!(f, "Z"),
            OpLabel::Raise => write!(f, "raise"),
            OpLabel::Lower => write!(f, "lower"),
            OpLabel::Unit(i, j) => write!(f, "E{i}{j}"),
        }
    }
}

impl FromStr for OpLabel {
    type Err = Error;

    /// Accepts `I X Y Z raise lower` and matrix units written `E<i><j>` or `E<i>_<j>`.
    fn from_str(s: &str) -> Result<Self> {
        let label = match s {
            "I" => OpLabel::I,
            "X" => OpLabel::X,
            "Y" => OpLabel::Y,
            "Z" => OpLabel::Z,
            "raise" | "sigma+" => OpLabel::Raise,
            "lower" | "sigma-" => OpLabel::Lower,
            _ => {
                let rest = s
                    .strip_prefix('E')
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown operator label {s:?}")))?;
                let parse = |t: &str| {
                    t.parse::<usize>()
                        .map_err(|_| Error::InvalidArgument(format!("bad matrix unit {s:?}")))
                };
                let (i, j) = match rest.split_once('_') {
                    Some((a, b)) => (parse(a)?, parse(b)?),
                    None if rest.len() == 2 => (parse(&rest[..1])?, parse(&rest[1..])?),
                    None => return Err(Error::InvalidArgument(format!("bad matrix unit {s:?}"))),
                };
                OpLabel::Unit(i, j)
            }
        };
        Ok(label)
    }
}

/// A bounded observable localised in a region: an element of `A(Λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    support: Region,
    matrix: Matrix,
}

impl LocalOperator {
    pub fn new(support: Region, matrix: Matrix) -> Result<Self> {
        let d = support.total_dim();
        if matrix.dim() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{} but support {} has dimension {d}",
                matrix.nrows(),
                matrix.ncols(),
                support
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("operator has non-finite entries".into()));
        }
        Ok(LocalOperator { support, matrix })
    }

    pub fn identity(support: Region) -> Self {
        let d = support.total_dim();
        LocalOperator { support, matrix: linalg::identity(d) }
    }

    pub fn support(&self) -> &Region {
        &self.support
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn adjoint(&self) -> LocalOperator {
        LocalOperator { support: self.support.clone(), matrix: linalg::dagger(&self.matrix) }
    }

    pub fn scale(&self, f: linalg::C64) -> LocalOperator {
        LocalOperator { support: self.support.clone(), matrix: self.matrix.mapv(|z| z * f) }
    }

    /// Product `self · other` on the union of supports.
    pub fn product(&self, other: &LocalOperator) -> Result<LocalOperator> {
        let (a, b) = common_support(self, other)?;
        let m = a.matrix.dot(&b.matrix);
        Ok(LocalOperator { support: a.support, matrix: m })
    }

    pub fn sum(&self, other: &LocalOperator) -> Result<LocalOperator> {
        let (a, b) = common_support(self, other)?;
        Ok(LocalOperator { support: a.support, matrix: a.matrix + b.matrix })
    }

    pub fn difference(&self, other: &LocalOperator) -> Result<LocalOperator> {
        let (a, b) = common_support(self, other)?;
        Ok(LocalOperator { support: a.support, matrix: a.matrix - b.matrix })
    }
}

fn common_support(a: &LocalOperator, b: &LocalOperator) -> Result<(LocalOperator, LocalOperator)> {
    let union = a.support.union(&b.support)?;
    Ok((embed(a, &union)?, embed(b, &union)?))
}

/// The labelled single-site operator on `{site}`.
pub fn site_operator(label: OpLabel, site: &Site) -> Result<LocalOperator> {
    let m = label.matrix(site.local_dim())?;
    LocalOperator::new(make_region([site.clone()])?, m)
}

/// `op ⊗ I_{target \ support}` with factors in the target's canonical order.
pub fn embed(op: &LocalOperator, target: &Region) -> Result<LocalOperator> {
    if op.support == *target {
        return Ok(op.clone());
    }
    let positions = op.support.positions_in(target)?;
    let index = SubsystemIndex::new(&target.local_dims(), &positions);
    Ok(LocalOperator { support: target.clone(), matrix: index.embed(&op.matrix) })
}

/// The C*-norm of a local operator: its largest singular value.
pub fn operator_norm(op: &LocalOperator) -> f64 {
    linalg::spectral_norm(&op.matrix).expect("SVD of a finite matrix")
}

/// `[a, b] = ab - ba` on the union of supports.
pub fn commutator(a: &LocalOperator, b: &LocalOperator) -> Result<LocalOperator> {
    let (a, b) = common_support(a, b)?;
    let m = a.matrix.dot(&b.matrix) - b.matrix.dot(&a.matrix);
    Ok(LocalOperator { support: a.support, matrix: m })
}
