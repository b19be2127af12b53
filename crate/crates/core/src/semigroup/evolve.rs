use rand::Rng;
use serde::{Deserialize, Serialize};

use super::generator::Generator;
use crate::channels::{
    self, check_normalization, dual_channel, is_completely_positive, pairing_defect, Picture,
    QuantumChannel,
};
use crate::error::{Error, Result};
use crate::lattice::{embed, LocalOperator};
use crate::linalg::{self, Matrix};

/// Largest region dimension for which the dense superoperator is exponentiated.
pub const DEFAULT_EXACT_CAP: usize = 64;

/// Fixed-step RK4 settings for the observable ODE `dA/dt = L♯(A)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeParams {
    /// Target accuracy in operator norm.
    pub tol: f64,
    /// Upper bound on `‖L♯‖ · h`.
    pub norm_step: f64,
    pub max_steps: usize,
}

impl Default for OdeParams {
    fn default() -> Self {
        OdeParams { tol: 1e-8, norm_step: 0.1, max_steps: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvolutionBackend {
    ExactExponential { cap: usize },
    ObservableOde(OdeParams),
}

impl Default for EvolutionBackend {
    fn default() -> Self {
        EvolutionBackend::ExactExponential { cap: DEFAULT_EXACT_CAP }
    }
}

impl EvolutionBackend {
    /// `γ_t(Λ)(A)` for `A` embedded into the generator's region.
    ///
    /// The evolution runs on the interaction component of `supp(A)` and the
    /// result is embedded back into the full region.
    pub fn evolve_observable(&self, g: &Generator, a: &LocalOperator, t: f64) -> Result<LocalOperator> {
        let c = g.restrict_to_component(a.support())?;
        let out = self.evolve_on(&c, a, t)?;
        embed(&out, g.region())
    }

    fn evolve_on(&self, g: &Generator, a: &LocalOperator, t: f64) -> Result<LocalOperator> {
        match self {
            EvolutionBackend::ExactExponential { cap } => {
                let a = embed(a, g.region())?;
                let ch = evolve_exact(g, t, *cap)?;
                LocalOperator::new(g.region().clone(), ch.apply(a.matrix()))
            }
            EvolutionBackend::ObservableOde(p) => evolve_ode(g, a, t, p),
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("evolution time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// The Heisenberg channel `γ_t = exp(t L♯)` from the dense superoperator.
pub fn evolve_exact(g: &Generator, t: f64, cap: usize) -> Result<QuantumChannel> {
    check_time(t)?;
    let d = g.dim();
    if d > cap {
        return Err(Error::Capacity {
            what: format!(
                "exact exponential on {} sites (use the ODE backend for larger volumes)",
                g.region().len()
            ),
            requested: d,
            cap,
        });
    }
    if t == 0.0 || g.is_zero() {
        return Ok(channels::identity_channel(d, Picture::Heisenberg));
    }
    let s = g.superoperator();
    let exp = linalg::expm(&s.into_matrix().mapv(|z| z * t))?;
    let s = channels::SuperoperatorMatrix::new(d, exp)?;
    Ok(QuantumChannel::from_superoperator(s, Picture::Heisenberg))
}

fn rk4_step(g: &Generator, y: &Matrix, h: f64) -> Matrix {
    let k1 = g.apply_heisenberg(y);
    let k2 = g.apply_heisenberg(&(y + &k1.mapv(|z| z * (0.5 * h))));
    let k3 = g.apply_heisenberg(&(y + &k2.mapv(|z| z * (0.5 * h))));
    let k4 = g.apply_heisenberg(&(y + &k3.mapv(|z| z * h)));
    let mut incr = k1;
    incr.zip_mut_with(&k2, |a, b| *a += b * 2.0);
    incr.zip_mut_with(&k3, |a, b| *a += b * 2.0);
    incr += &k4;
    y + &incr.mapv(|z| z * (h / 6.0))
}

fn integrate(g: &Generator, y0: &Matrix, t: f64, steps: usize) -> Matrix {
    let h = t / steps as f64;
    let mut y = y0.clone();
    for _ in 0..steps {
        y = rk4_step(g, &y, h);
    }
    y
}

/// `γ_t(A)` by integrating `dA/dt = L♯(A)` with fixed-step RK4.
///
/// The step count starts at `⌈t ‖L♯‖ / norm_step⌉` and is refined by step
/// doubling until the Richardson error estimate `‖y_N - y_2N‖ / 15` drops
/// below `tol`; the finer solution is returned.
pub fn evolve_ode(g: &Generator, a: &LocalOperator, t: f64, params: &OdeParams) -> Result<LocalOperator> {
    check_time(t)?;
    let a = embed(a, g.region())?;
    if t == 0.0 || g.is_zero() {
        return Ok(a);
    }
    let y0 = a.matrix();
    let norm = g.norm_estimate();
    let mut steps = ((t * norm / params.norm_step).ceil() as usize).max(1);
    let limit = |required: usize| Error::StepLimit { required, cap: params.max_steps, norm, t };
    if 2 * steps > params.max_steps {
        return Err(limit(2 * steps));
    }

    let mut coarse = integrate(g, y0, t, steps);
    loop {
        let fine = integrate(g, y0, t, 2 * steps);
        let err = linalg::spectral_norm(&(&coarse - &fine))? / 15.0;
        if err <= params.tol {
            return LocalOperator::new(g.region().clone(), fine);
        }
        // the estimate is for the 2N solution and RK4 error scales as N^-4
        let predicted = (steps as f64 * (err / params.tol).powf(0.25) * 1.1).ceil() as usize;
        let next = predicted.max(steps + 1);
        if 2 * next > params.max_steps {
            return Err(limit(2 * next));
        }
        coarse = if next == 2 * steps { fine } else { integrate(g, y0, t, next) };
        steps = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityReport {
    /// `max |tr(ρ γ_t(A)) - tr(τ_t(ρ) A)|` over the trials.
    pub max_defect: f64,
    /// `‖τ_t^†(I) - I‖`: trace preservation of the Schrödinger dual.
    pub dual_trace_defect: f64,
    pub dual_min_choi_eigenvalue: f64,
    pub trials: usize,
}

/// Pairs `γ_t` with its Schrödinger dual `τ_t` on random states and observables.
pub fn duality_check<R: Rng + ?Sized>(
    g: &Generator,
    t: f64,
    trials: usize,
    cap: usize,
    rng: &mut R,
) -> Result<DualityReport> {
    let gamma = evolve_exact(g, t, cap)?;
    let tau = dual_channel(&gamma);
    let norm = check_normalization(&tau, f64::INFINITY);
    let cp = is_completely_positive(&tau, 0.0)?;
    Ok(DualityReport {
        max_defect: pairing_defect(&gamma, trials, rng),
        dual_trace_defect: norm.trace_defect,
        dual_min_choi_eigenvalue: cp.min_choi_eigenvalue,
        trials,
    })
}
