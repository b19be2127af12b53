use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::OpLabel;

/// `coupling · ⊗_f label_f(x + offset_f)`, placed at every anchor `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTerm {
    pub coupling: f64,
    pub factors: Vec<(OpLabel, Vec<i64>)>,
}

/// Jump operator `√rate · label(x + offset)`, placed at every anchor `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpTerm {
    pub rate: f64,
    pub label: OpLabel,
    pub offset: Vec<i64>,
}

/// Translation-invariant Lindblad model given by local patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindbladModel {
    pub name: String,
    pub lattice_dim: usize,
    pub hamiltonian_terms: Vec<HamiltonianTerm>,
    pub jump_terms: Vec<JumpTerm>,
}

/// Names accepted by [`LindbladModel::catalog`].
pub const CATALOG: [&str; 4] = ["ising_dephasing", "ising_damping", "dephasing", "damping"];

pub const DEFAULT_COUPLING: f64 = 1.0;
pub const DEFAULT_FIELD: f64 = 0.8;
pub const DEFAULT_RATE: f64 = 0.5;

/// Largest number of sites a single pattern may span.
pub const MAX_PATTERN_SITES: usize = 2;

fn unit_vectors(d: usize) -> Vec<Vec<i64>> {
    (0..d)
        .map(|axis| (0..d).map(|i| i64::from(i == axis)).collect())
        .collect()
}

impl LindbladModel {
    /// Dissipative transverse-field Ising model on `Z^d`:
    /// `H = Σ J Z_x Z_{x+e} + Σ h X_x` with jumps `√κ · jump` on every site.
    pub fn ising(lattice_dim: usize, coupling: f64, field: f64, rate: f64, jump: OpLabel) -> Self {
        let origin = vec![0; lattice_dim];
        let mut hamiltonian_terms: Vec<HamiltonianTerm> = unit_vectors(lattice_dim)
            .into_iter()
            .map(|e| HamiltonianTerm {
                coupling,
                factors: vec![(OpLabel::Z, origin.clone()), (OpLabel::Z, e)],
            })
            .collect();
        hamiltonian_terms.push(HamiltonianTerm { coupling: field, factors: vec![(OpLabel::X, origin.clone())] });
        let name = match jump {
            OpLabel::Z => "ising_dephasing".to_string(),
            OpLabel::Lower => "ising_damping".to_string(),
            other => format!("ising_{other}"),
        };
        LindbladModel {
            name,
            lattice_dim,
            hamiltonian_terms,
            jump_terms: vec![JumpTerm { rate, label: jump, offset: origin }],
        }
    }

    /// Purely dissipative model with one on-site jump per site and `H = 0`.
    pub fn on_site(lattice_dim: usize, rate: f64, jump: OpLabel) -> Self {
        let name = match jump {
            OpLabel::Z => "dephasing".to_string(),
            OpLabel::Lower => "damping".to_string(),
            other => format!("on_site_{other}"),
        };
        LindbladModel {
            name,
            lattice_dim,
            hamiltonian_terms: Vec::new(),
            jump_terms: vec![JumpTerm { rate, label: jump, offset: vec![0; lattice_dim] }],
        }
    }

    /// Model lookup by catalog name with parameters `J`, `h`, `kappa`, `d`.
    ///
    /// Parameters a model does not use are rejected.
    pub fn catalog(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "ising_dephasing" | "ising_damping" => &["J", "h", "kappa", "d"],
            "dephasing" | "damping" => &["kappa", "d"],
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown model {name:?}; catalog: {}",
                    CATALOG.join(", ")
                )))
            }
        };
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidArgument(format!(
                "model {name} has no parameter {bad:?} (accepted: {})",
                allowed.join(", ")
            )));
        }
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        let d = get("d", 1.0);
        if d != 1.0 && d != 2.0 {
            return Err(Error::InvalidArgument(format!("lattice dimension d must be 1 or 2, got {d}")));
        }
        let d = d as usize;
        let kappa = get("kappa", DEFAULT_RATE);
        let model = match name {
            "ising_dephasing" => Self::ising(d, get("J", DEFAULT_COUPLING), get("h", DEFAULT_FIELD), kappa, OpLabel::Z),
            "ising_damping" => Self::ising(d, get("J", DEFAULT_COUPLING), get("h", DEFAULT_FIELD), kappa, OpLabel::Lower),
            "dephasing" => Self::on_site(d, kappa, OpLabel::Z),
            _ => Self::on_site(d, kappa, OpLabel::Lower),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let offset_ok = |o: &Vec<i64>| o.len() == self.lattice_dim;
        for t in &self.hamiltonian_terms {
            if !t.coupling.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite coupling in {}", self.name)));
            }
            if t.factors.is_empty() || !t.factors.iter().all(|(_, o)| offset_ok(o)) {
                return Err(Error::InvalidArgument(format!("malformed Hamiltonian pattern in {}", self.name)));
            }
            let mut offsets: Vec<_> = t.factors.iter().map(|(_, o)| o.clone()).collect();
            offsets.sort();
            offsets.dedup();
            if offsets.len() > MAX_PATTERN_SITES {
                return Err(Error::InvalidArgument(format!(
                    "pattern in {} spans {} sites, at most {MAX_PATTERN_SITES} allowed",
                    self.name,
                    offsets.len()
                )));
            }
        }
        for j in &self.jump_terms {
            if !(j.rate >= 0.0 && j.rate.is_finite()) {
                return Err(Error::InvalidArgument(format!("jump rate {} in {} must be finite and >= 0", j.rate, self.name)));
            }
            if !offset_ok(&j.offset) {
                return Err(Error::InvalidArgument(format!("malformed jump offset in {}", self.name)));
            }
        }
        Ok(())
    }

    /// True when no term couples distinct sites and `H = 0`.
    pub fn is_strictly_local(&self) -> bool {
        self.hamiltonian_terms.iter().all(|t| t.coupling == 0.0)
    }
}
