use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::config::{ChannelSource, ExperimentConfig};
use super::report::{num, write_atomic, Csv, JsonMatrix, ReportEnvelope, Timings, VolumeTiming};
use crate::channels::{
    self, check_normalization, choi_to_kraus, dual_channel, is_completely_positive, kraus_to_super,
    pairing_defect, Picture, QuantumChannel,
};
use crate::error::{Error, Result};
use crate::lattice::{make_region, site_operator, Region, Site};
use crate::limits::{region_schedule, scan_limit, tensor_stability, ConvergenceReport};
use crate::linalg;
use crate::semigroup::{build_generator, evolve_exact, EvolutionBackend, Generator, DEFAULT_EXACT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Scan,
    Verify,
    Kraus,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Scan => "scan",
            Command::Verify => "verify",
            Command::Kraus => "kraus",
        }
    }
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Failed = 1,
    Config = 2,
    Capacity = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn of_error(e: &Error) -> ExitStatus {
        match e {
            Error::Config { .. }
            | Error::InvalidLabel { .. }
            | Error::RegionTooSmall { .. }
            | Error::InvalidSite(_)
            | Error::InvalidArgument(_) => ExitStatus::Config,
            Error::Capacity { .. } | Error::StepLimit { .. } => ExitStatus::Capacity,
            Error::Volume { source, .. } => ExitStatus::of_error(source),
            _ => ExitStatus::Failed,
        }
    }
}

/// Everything a command produces before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub envelope: ReportEnvelope,
    pub csv: Csv,
    pub status: ExitStatus,
}

impl Outcome {
    /// Writes `report.json` and `report.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(dir, "report.json", &self.envelope.to_json())?;
        write_atomic(dir, "report.csv", self.csv.as_str())?;
        Ok(())
    }
}

struct Produced {
    payload: serde_json::Value,
    csv: Csv,
    passed: bool,
    per_volume: Vec<VolumeTiming>,
}

/// Runs a command; failures become partial reports with the matching exit status.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> Outcome {
    let start = Instant::now();
    let produced = match command {
        Command::Scan => cmd_scan(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Kraus => cmd_kraus(cfg),
    };
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    match produced {
        Ok(p) => {
            let timings = Timings { total_ms, per_volume: p.per_volume };
            let status = if p.passed { ExitStatus::Pass } else { ExitStatus::Failed };
            Outcome { envelope: ReportEnvelope::new(command.name(), cfg, p.payload, p.passed, timings), csv: p.csv, status }
        }
        Err(e) => {
            let payload = match &e {
                Error::NotCompletelyPositive { eigenvalue, .. } => json!({ "witness_eigenvalue": eigenvalue }),
                Error::Volume { sites, .. } => json!({ "failed_volume_sites": sites }),
                _ => serde_json::Value::Null,
            };
            let timings = Timings { total_ms, per_volume: Vec::new() };
            Outcome {
                envelope: ReportEnvelope::failed(command.name(), cfg, e.to_string(), payload, timings),
                csv: Csv::new(&["error"]),
                status: ExitStatus::of_error(&e),
            }
        }
    }
}

#[derive(Serialize)]
struct ScanPayload<'a> {
    criterion: &'static str,
    schedule_sizes: Vec<usize>,
    reports: &'a [ConvergenceReport],
    passed: bool,
}

const CAUCHY_CRITERION: &str = "operator-norm Cauchy increments of the evolved observable on nested volumes, \
measured on the larger volume; pass iff the final increment is at most epsilon and the increments contract \
by ratio_bound from some index on";

fn cmd_scan(cfg: &ExperimentConfig) -> Result<Produced> {
    let model = cfg.require_model()?;
    let site = cfg.observable_site()?;
    let a = site_operator(cfg.observable.label, &site)?;
    let schedule = region_schedule(a.support(), cfg.schedule.steps, cfg.schedule.rule, cfg.schedule.max_sites)?;
    let label = format!("{}@{}", cfg.observable.label, site);

    let mut reports = Vec::with_capacity(cfg.times.len());
    let mut csv = Csv::new(&["volume_size", "time", "increment", "norm", "wall_ms"]);
    let mut per_volume = Vec::new();
    for &t in &cfg.times {
        let mut report = scan_limit(&model, &a, t, &schedule, &cfg.backend)?.with_observable_label(label.clone());
        report.assess(&cfg.tolerances.cauchy())?;
        for (k, (rec, ms)) in report.records.iter().zip(&report.wall_ms).enumerate() {
            // increment between this volume and the previous one
            let inc = if k == 0 { String::new() } else { num(report.increments[k - 1]) };
            csv.row(&[rec.sites.to_string(), num(t), inc, num(rec.norm), format!("{ms:.3}")]);
            per_volume.push(VolumeTiming { sites: rec.sites, time: Some(t), wall_ms: *ms });
        }
        reports.push(report);
    }
    let passed = reports.iter().all(|r| r.verdict.is_some_and(|v| v.cauchy_pass));
    let payload = ScanPayload { criterion: CAUCHY_CRITERION, schedule_sizes: schedule.sizes(), reports: &reports, passed };
    Ok(Produced { payload: serde_json::to_value(payload)?, csv, passed, per_volume })
}

#[derive(Debug, Clone, Serialize)]
struct ChannelInfo {
    source: ChannelSource,
    parameter: Option<f64>,
    sites: usize,
    dim: usize,
    picture: Picture,
}

/// Region used by `verify` and `kraus`: `channel.sites` sites along the first axis.
fn channel_region(cfg: &ExperimentConfig, lattice_dim: usize) -> Result<Region> {
    let sites = (0..cfg.channel.sites as i64).map(|x| {
        let mut coords = vec![0; lattice_dim];
        coords[0] = x;
        Site::new(coords, 2)
    });
    make_region(sites.collect::<Result<Vec<_>>>()?)
}

fn exact_cap(cfg: &ExperimentConfig) -> usize {
    match cfg.backend {
        EvolutionBackend::ExactExponential { cap } => cap,
        EvolutionBackend::ObservableOde(_) => DEFAULT_EXACT_CAP,
    }
}

/// Generator for the Lindblad source, `None` otherwise.
fn channel_generator(cfg: &ExperimentConfig) -> Result<Option<Generator>> {
    if cfg.channel.source != ChannelSource::Lindblad {
        return Ok(None);
    }
    let model = cfg.require_model()?;
    let region = channel_region(cfg, model.lattice_dim)?;
    Ok(Some(build_generator(&model, &region)?))
}

/// The channel to examine, at time `t` when it comes from a generator.
fn build_channel(cfg: &ExperimentConfig, g: Option<&Generator>, t: f64) -> Result<QuantumChannel> {
    let pic = Picture::Heisenberg;
    let qubits = cfg.channel.sites as u32;
    let multi_dim = || -> Result<usize> {
        2usize.checked_pow(qubits).filter(|&d| d <= exact_cap(cfg)).ok_or(Error::Capacity {
            what: format!("{} qubits", cfg.channel.sites),
            requested: 2usize.saturating_pow(qubits),
            cap: exact_cap(cfg),
        })
    };
    let p = || cfg.channel.parameter.expect("validated at parse time");
    Ok(match cfg.channel.source {
        ChannelSource::Lindblad => evolve_exact(g.expect("generator for the lindblad source"), t, exact_cap(cfg))?,
        ChannelSource::Identity => channels::identity_channel(multi_dim()?, pic),
        ChannelSource::Transpose => channels::transpose_map(multi_dim()?, pic),
        ChannelSource::Dephasing => channels::dephasing(p(), pic),
        ChannelSource::AmplitudeDamping => channels::amplitude_damping(p(), pic),
    })
}

fn channel_info(cfg: &ExperimentConfig, ch: &QuantumChannel) -> ChannelInfo {
    let sites = match cfg.channel.source {
        ChannelSource::Dephasing | ChannelSource::AmplitudeDamping => 1,
        _ => cfg.channel.sites,
    };
    ChannelInfo { source: cfg.channel.source, parameter: cfg.channel.parameter, sites, dim: ch.dim(), picture: ch.picture() }
}

/// Times at which the channel is examined: only the Lindblad source depends on time.
fn channel_times(cfg: &ExperimentConfig) -> Vec<Option<f64>> {
    match cfg.channel.source {
        ChannelSource::Lindblad => cfg.times.iter().map(|&t| Some(t)).collect(),
        _ => vec![None],
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// A defect (must be `<= tolerance`) or a smallest eigenvalue (must be `>= -tolerance`).
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    fn upper(name: impl Into<String>, defect: f64, tolerance: f64) -> Self {
        Check { name: name.into(), passed: defect <= tolerance, value: defect, tolerance }
    }

    /// For quantities that must not drop below `-tolerance` (eigenvalues).
    fn lower(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), passed: value >= -tolerance, value, tolerance }
    }
}

#[derive(Debug, Clone, Serialize)]
struct VerifyResult {
    time: Option<f64>,
    checks: Vec<Check>,
    /// `<A, Φ(A)> / <A, A>` for the configured observable when it lies in the region.
    observable_decay: Option<f64>,
}

fn verify_channel(cfg: &ExperimentConfig, g: Option<&Generator>, t: Option<f64>, ch: &QuantumChannel, rng: &mut ChaCha8Rng) -> Result<VerifyResult> {
    let tol = &cfg.tolerances;
    let mut checks = Vec::new();

    let norm = check_normalization(ch, tol.unitality);
    let defect = match ch.picture() {
        Picture::Heisenberg => norm.unital_defect,
        Picture::Schroedinger => norm.trace_defect,
    };
    checks.push(Check::upper("normalization", defect, tol.unitality));

    let cp = is_completely_positive(ch, tol.cp)?;
    checks.push(Check::lower("complete_positivity", cp.min_choi_eigenvalue, tol.cp));

    if let (Some(g), Some(t)) = (g, t) {
        for &s in &cfg.splits {
            let a = evolve_exact(g, s * t, exact_cap(cfg))?;
            let b = evolve_exact(g, (1.0 - s) * t, exact_cap(cfg))?;
            let d = ch.distance(&a.compose(&b)?);
            checks.push(Check::upper(format!("semigroup_law(s={s})"), d, tol.semigroup));
        }
    }

    checks.push(Check::upper("duality_pairing", pairing_defect(ch, cfg.channel.trials, rng), tol.duality));
    let dual = dual_channel(ch);
    let dual_norm = check_normalization(&dual, tol.duality);
    let dual_defect = match dual.picture() {
        Picture::Heisenberg => dual_norm.unital_defect,
        Picture::Schroedinger => dual_norm.trace_defect,
    };
    checks.push(Check::upper("dual_normalization", dual_defect, tol.duality));

    match choi_to_kraus(ch.choi(), ch.picture(), None) {
        Ok(k) => {
            let rebuilt = kraus_to_super(&k, ch.picture());
            checks.push(Check::upper("kraus_reconstruction", rebuilt.distance(ch.superoperator()), tol.kraus));
            checks.push(Check::upper("kraus_completeness", k.completeness_defect(), tol.kraus));
        }
        Err(Error::NotCompletelyPositive { eigenvalue, .. }) => {
            checks.push(Check::lower("kraus_extraction", eigenvalue, tol.kraus));
        }
        Err(e) => return Err(e),
    }

    if !cfg.tensor.k.is_empty() {
        let rep = tensor_stability(ch, &cfg.tensor.k, cfg.tensor.samples, tol.tensor, rng)?;
        for r in rep.per_k {
            checks.push(Check::lower(format!("tensor_stability(k={})", r.k), r.min_eigenvalue, tol.tensor));
        }
    }

    let observable_decay = observable_decay(cfg, g, ch)?;
    Ok(VerifyResult { time: t, checks, observable_decay })
}

fn observable_decay(cfg: &ExperimentConfig, g: Option<&Generator>, ch: &QuantumChannel) -> Result<Option<f64>> {
    let site = cfg.observable_site()?;
    let region = match (g, cfg.channel.source) {
        (Some(g), _) => g.region().clone(),
        (None, ChannelSource::Dephasing | ChannelSource::AmplitudeDamping) => make_region([site.clone()])?,
        (None, _) => channel_region(cfg, site.lattice_dim())?,
    };
    debug_assert_eq!(region.total_dim(), ch.dim());
    if !region.contains(&site) {
        return Ok(None);
    }
    let a = crate::lattice::embed(&site_operator(cfg.observable.label, &site)?, &region)?;
    let a = a.matrix();
    let num = linalg::trace(&linalg::dagger(a).dot(&ch.apply(a)));
    let den = linalg::trace(&linalg::dagger(a).dot(a));
    Ok(Some(num.re / den.re))
}

fn cmd_verify(cfg: &ExperimentConfig) -> Result<Produced> {
    let g = channel_generator(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut results = Vec::new();
    let mut info = None;
    let mut per_volume = Vec::new();
    let mut csv = Csv::new(&["time", "check", "passed", "value", "tolerance"]);
    for t in channel_times(cfg) {
        let start = Instant::now();
        let ch = build_channel(cfg, g.as_ref(), t.unwrap_or(0.0))?;
        let res = verify_channel(cfg, g.as_ref(), t, &ch, &mut rng)?;
        let ci = channel_info(cfg, &ch);
        per_volume.push(VolumeTiming { sites: ci.sites, time: t, wall_ms: start.elapsed().as_secs_f64() * 1e3 });
        for c in &res.checks {
            let time = t.map(num).unwrap_or_default();
            csv.row(&[time, c.name.clone(), c.passed.to_string(), num(c.value), num(c.tolerance)]);
        }
        info = Some(ci);
        results.push(res);
    }
    let passed = results.iter().all(|r| r.checks.iter().all(|c| c.passed));
    let payload = json!({ "channel": info, "results": results, "passed": passed });
    Ok(Produced { payload, csv, passed, per_volume })
}

#[derive(Debug, Clone, Serialize)]
struct KrausPayload {
    channel: ChannelInfo,
    time: Option<f64>,
    count: usize,
    /// `‖W_n‖_F^2`, equal to the nonzero Choi eigenvalues.
    weights: Vec<f64>,
    choi_eigenvalues: Vec<f64>,
    normalization_defect: f64,
    reconstruction_defect: f64,
    tolerance: f64,
    passed: bool,
    operators: Vec<JsonMatrix>,
}

fn cmd_kraus(cfg: &ExperimentConfig) -> Result<Produced> {
    let g = channel_generator(cfg)?;
    let t = channel_times(cfg)[0];
    let start = Instant::now();
    let ch = build_channel(cfg, g.as_ref(), t.unwrap_or(0.0))?;
    let kraus = choi_to_kraus(ch.choi(), ch.picture(), None)?;
    let rebuilt = kraus_to_super(&kraus, ch.picture());
    let reconstruction_defect = rebuilt.distance(ch.superoperator());
    let normalization_defect = kraus.completeness_defect();

    let mut eig = ch.choi().eigenvalues()?;
    eig.sort_by(|a, b| b.total_cmp(a));
    eig.truncate(kraus.len());
    let weights: Vec<f64> = kraus.operators().iter().map(|w| linalg::frobenius_norm(w).powi(2)).collect();

    let mut csv = Csv::new(&["index", "weight"]);
    for (i, w) in weights.iter().enumerate() {
        csv.row(&[i.to_string(), num(*w)]);
    }
    let tol = cfg.tolerances.kraus;
    let passed = reconstruction_defect <= tol && normalization_defect <= tol;
    let info = channel_info(cfg, &ch);
    let per_volume = vec![VolumeTiming { sites: info.sites, time: t, wall_ms: start.elapsed().as_secs_f64() * 1e3 }];
    let payload = KrausPayload {
        channel: info,
        time: t,
        count: kraus.len(),
        weights,
        choi_eigenvalues: eig,
        normalization_defect,
        reconstruction_defect,
        tolerance: tol,
        passed,
        operators: kraus.operators().iter().map(JsonMatrix::from).collect(),
    };
    Ok(Produced { payload: serde_json::to_value(payload)?, csv, passed, per_volume })
}
