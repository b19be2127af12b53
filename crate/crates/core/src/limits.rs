//! Thermodynamic-limit surrogates.
//!
//! The infinite-volume dynamics is approached through isotone schedules
//! `Λ_1 ⊂ Λ_2 ⊂ ... ⊂ Λ_K`. Convergence of `γ_t(Λ_k) A` is certified by
//! operator-norm Cauchy increments measured on the larger volume after
//! embedding, and complete positivity of the limit is probed by sampling
//! `(γ_t ⊗ id_k)(C̃^* C̃)` at the largest exactly solvable volume.

use std::time::Instant;

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{apply_extended, check_normalization, is_completely_positive, QuantumChannel};
use crate::error::{Error, Result};
use crate::lattice::{embed, make_region, operator_norm, LocalOperator, Region, Site};
use crate::linalg::{self, dagger, kron, random_complex};
use crate::semigroup::{build_generator, evolve_exact, EvolutionBackend, LindbladModel};

/// How a schedule grows around the observable support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GrowthRule {
    /// Bounding box of the support widened by `first + k` sites on every
    /// side and axis at step `k = 0, 1, ...`.
    Shell { first: usize },
}

impl Default for GrowthRule {
    fn default() -> Self {
        GrowthRule::Shell { first: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSchedule {
    pub support: Region,
    pub rule: GrowthRule,
    pub regions: Vec<Region>,
}

impl RegionSchedule {
    pub fn sizes(&self) -> Vec<usize> {
        self.regions.iter().map(Region::len).collect()
    }
}

/// Box around `support` widened by `shell` on every side.
fn shell_region(support: &Region, shell: usize) -> Result<Region> {
    let d = support.lattice_dim();
    let local_dim = support.sites()[0].local_dim();
    let w = shell as i64;
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for s in support.sites() {
        for (axis, &x) in s.coords().iter().enumerate() {
            lo[axis] = lo[axis].min(x - w);
            hi[axis] = hi[axis].max(x + w);
        }
    }
    let mut sites: Vec<Site> = Vec::new();
    match d {
        1 => {
            for x in lo[0]..=hi[0] {
                sites.push(Site::new(vec![x], local_dim)?);
            }
        }
        _ => {
            for x in lo[0]..=hi[0] {
                for y in lo[1]..=hi[1] {
                    sites.push(Site::new(vec![x, y], local_dim)?);
                }
            }
        }
    }
    // support sites keep their own local dimension
    for s in sites.iter_mut() {
        if let Some(orig) = support.sites().iter().find(|o| o.coords() == s.coords()) {
            *s = orig.clone();
        }
    }
    make_region(sites)
}

/// Isotone schedule of `steps` centred boxes around `support`, at most `max_sites` sites each.
pub fn region_schedule(support: &Region, steps: usize, rule: GrowthRule, max_sites: usize) -> Result<RegionSchedule> {
    if steps < 2 {
        return Err(Error::InvalidArgument(format!("a schedule needs at least 2 regions, got {steps}")));
    }
    let GrowthRule::Shell { first } = rule;
    let regions: Vec<Region> = (0..steps).map(|k| shell_region(support, first + k)).collect::<Result<_>>()?;
    let last = regions.last().expect("steps >= 2");
    if last.len() > max_sites {
        return Err(Error::Capacity {
            what: format!("region schedule ({} steps, rule {:?})", steps, rule),
            requested: last.len(),
            cap: max_sites,
        });
    }
    Ok(RegionSchedule { support: support.clone(), rule, regions })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeRecord {
    pub sites: usize,
    pub dim: usize,
    /// `‖γ_t(Λ_k) A‖`
    pub norm: f64,
    #[serde(skip)]
    pub evolved: LocalOperator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub model: String,
    pub observable: String,
    pub time: f64,
    pub backend: EvolutionBackend,
    pub records: Vec<VolumeRecord>,
    /// `δ_k = ‖embed(γ_t(Λ_k)A, Λ_{k+1}) - γ_t(Λ_{k+1})A‖`, `k = 1..K-1`.
    pub increments: Vec<f64>,
    pub verdict: Option<CauchyVerdict>,
    /// Wall-clock milliseconds per volume; not part of the reproducible payload.
    #[serde(skip)]
    pub wall_ms: Vec<f64>,
}

/// Evolves `a` on every region of the schedule and records the Cauchy increments.
pub fn scan_limit(
    model: &LindbladModel,
    a: &LocalOperator,
    t: f64,
    schedule: &RegionSchedule,
    backend: &EvolutionBackend,
) -> Result<ConvergenceReport> {
    if !a.support().is_subset_of(&schedule.regions[0]) {
        let missing = a.support().positions_in(&schedule.regions[0]).unwrap_err();
        return Err(missing);
    }
    let evolved: Vec<Result<(LocalOperator, f64)>> = schedule
        .regions
        .par_iter()
        .map(|region| {
            let start = Instant::now();
            let wrap = |e: Error| Error::Volume { sites: region.len(), source: Box::new(e) };
            let g = build_generator(model, region).map_err(wrap)?;
            let out = backend.evolve_observable(&g, a, t).map_err(wrap)?;
            Ok((out, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect();
    let evolved: Vec<(LocalOperator, f64)> = evolved.into_iter().collect::<Result<_>>()?;

    let increments: Vec<f64> = (0..evolved.len() - 1)
        .into_par_iter()
        .map(|k| {
            let (small, big) = (&evolved[k].0, &evolved[k + 1].0);
            let lifted = embed(small, big.support())?;
            Ok(operator_norm(&lifted.difference(big)?))
        })
        .collect::<Result<_>>()?;

    let wall_ms = evolved.iter().map(|(_, ms)| *ms).collect();
    let records = evolved
        .into_iter()
        .map(|(op, _)| VolumeRecord {
            sites: op.support().len(),
            dim: op.support().total_dim(),
            norm: operator_norm(&op),
            evolved: op,
        })
        .collect();
    Ok(ConvergenceReport {
        model: model.name.clone(),
        observable: describe(a),
        time: t,
        backend: *backend,
        records,
        increments,
        verdict: None,
        wall_ms,
    })
}

fn describe(a: &LocalOperator) -> String {
    format!("operator on {}", a.support())
}

impl ConvergenceReport {
    pub fn with_observable_label(mut self, label: impl Into<String>) -> Self {
        self.observable = label.into();
        self
    }

    /// Runs [`cauchy_assessment`] and stores the verdict in the report.
    pub fn assess(&mut self, criteria: &CauchyCriteria) -> Result<&CauchyVerdict> {
        let v = cauchy_assessment(&self.increments, criteria)?;
        self.verdict = Some(v);
        Ok(self.verdict.as_ref().expect("just set"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyCriteria {
    /// Bound on the final increment.
    pub epsilon: f64,
    /// Required contraction `δ_{k+1} <= ratio_bound · δ_k` on the tail.
    pub ratio_bound: f64,
    /// Increments at or below this are treated as converged to zero.
    pub noise_floor: f64,
}

impl CauchyCriteria {
    pub fn new(epsilon: f64, ratio_bound: f64) -> Self {
        CauchyCriteria { epsilon, ratio_bound, noise_floor: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyVerdict {
    pub cauchy_pass: bool,
    /// 1-based index from which the increments contract; `None` if no such tail.
    pub monotone_from_index: Option<usize>,
    /// 1-based index of the last increment that broke the contraction.
    pub violation_index: Option<usize>,
    pub final_increment: f64,
    pub epsilon: f64,
    pub ratio_bound: f64,
}

/// Passes iff the final increment is at most `epsilon` and the increments
/// contract by `ratio_bound` from some index on (the tail must contain at
/// least one ratio).
pub fn cauchy_assessment(increments: &[f64], criteria: &CauchyCriteria) -> Result<CauchyVerdict> {
    if increments.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "Cauchy assessment needs at least 2 increments, got {}",
            increments.len()
        )));
    }
    let contracts = |k: usize| {
        increments[k + 1] <= (criteria.ratio_bound * increments[k]).max(criteria.noise_floor)
    };
    let pairs = increments.len() - 1;
    // last pair (0-based k) that fails to contract
    let last_bad = (0..pairs).rev().find(|&k| !contracts(k));
    let (monotone_from_index, violation_index) = match last_bad {
        None => (Some(1), None),
        Some(k) if k + 1 < pairs => (Some(k + 2), Some(k + 2)),
        Some(k) => (None, Some(k + 2)),
    };
    let final_increment = *increments.last().expect("non-empty");
    Ok(CauchyVerdict {
        cauchy_pass: monotone_from_index.is_some() && final_increment <= criteria.epsilon,
        monotone_from_index,
        violation_index,
        final_increment,
        epsilon: criteria.epsilon,
        ratio_bound: criteria.ratio_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AncillaRecord {
    pub k: usize,
    pub samples: usize,
    /// Smallest eigenvalue of `(Φ ⊗ id_k)(C̃^* C̃)` over the samples.
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorStabilityReport {
    pub sites: usize,
    pub dim: usize,
    pub time: f64,
    pub unital_defect: f64,
    pub min_choi_eigenvalue: f64,
    pub per_k: Vec<AncillaRecord>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Number of product terms in each sampled `C̃ = Σ_r C_r ⊗ M_r`.
pub const PRODUCT_TERMS: usize = 3;

/// Samples `(Φ ⊗ id_k)(C̃^* C̃)` for random `C̃ = Σ_{r=1}^{3} C_r ⊗ M_r`.
pub fn sample_extended_positivity<R: Rng + ?Sized>(
    channel: &QuantumChannel,
    k_values: &[usize],
    samples: usize,
    rng: &mut R,
) -> Result<Vec<AncillaRecord>> {
    let d = channel.dim();
    let mut out = Vec::with_capacity(k_values.len());
    for &k in k_values {
        if k == 0 {
            return Err(Error::InvalidArgument("ancilla dimension must be at least 1".into()));
        }
        let mut min = f64::INFINITY;
        for _ in 0..samples {
            let mut c_tilde = Array2::zeros((d * k, d * k));
            for _ in 0..PRODUCT_TERMS {
                let cr = random_complex(rng, d, d);
                let mr = random_complex(rng, k, k);
                c_tilde += &kron(&cr, &mr);
            }
            let x = dagger(&c_tilde).dot(&c_tilde);
            let y = apply_extended(channel, &x, k)?;
            min = min.min(linalg::min_hermitian_eigenvalue(&y)?);
        }
        out.push(AncillaRecord { k, samples, min_eigenvalue: min });
    }
    Ok(out)
}

/// Largest shell region around `support` whose dimension fits within `cap`.
pub fn largest_exact_region(support: &Region, cap: usize) -> Result<Region> {
    if support.total_dim() > cap {
        return Err(Error::Capacity {
            what: format!("observable support {support}"),
            requested: support.total_dim(),
            cap,
        });
    }
    let mut best = shell_region(support, 0)?;
    if best.total_dim() > cap {
        best = support.clone();
    }
    for shell in 1.. {
        let next = shell_region(support, shell)?;
        if next.total_dim() > cap {
            break;
        }
        best = next;
    }
    Ok(best)
}

/// Builds `γ_t(Λ*)` on the largest exact volume around `support` and checks
/// unitality, Choi positivity and sampled positivity of `γ_t ⊗ id_k`.
#[allow(clippy::too_many_arguments)]
pub fn limit_cp_check<R: Rng + ?Sized>(
    model: &LindbladModel,
    support: &Region,
    t: f64,
    k_values: &[usize],
    samples: usize,
    cap: usize,
    tol: f64,
    rng: &mut R,
) -> Result<TensorStabilityReport> {
    let region = largest_exact_region(support, cap)?;
    let g = build_generator(model, &region)?;
    let gamma = evolve_exact(&g, t, cap)?;
    let mut report = tensor_stability(&gamma, k_values, samples, tol, rng)?;
    report.sites = region.len();
    report.time = t;
    Ok(report)
}

/// The channel-level part of [`limit_cp_check`], usable on any map
/// (e.g. the transpose map as a negative control).
pub fn tensor_stability<R: Rng + ?Sized>(
    channel: &QuantumChannel,
    k_values: &[usize],
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<TensorStabilityReport> {
    let norm = check_normalization(channel, tol);
    let cp = is_completely_positive(channel, tol)?;
    let per_k = sample_extended_positivity(channel, k_values, samples, rng)?;
    let passed = norm.passed && cp.cp && per_k.iter().all(|r| r.min_eigenvalue >= -tol);
    Ok(TensorStabilityReport {
        sites: 0,
        dim: channel.dim(),
        time: f64::NAN,
        unital_defect: norm.unital_defect,
        min_choi_eigenvalue: cp.min_choi_eigenvalue,
        per_k,
        tolerance: tol,
        passed,
    })
}
