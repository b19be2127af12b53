//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! The default run covers volumes up to 5 sites for the channel sweeps.
//! `cargo test --test acceptance -- --include-ignored` adds the 6-site legs.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use quasilocal::channels::{
    check_normalization, choi_to_kraus, is_completely_positive, kraus_to_super, random_kraus, sos_witness,
    transpose_map, Picture, QuantumChannel,
};
use quasilocal::lattice::{site_operator, LocalOperator, OpLabel, Region, Site};
use quasilocal::limits::{
    cauchy_assessment, limit_cp_check, region_schedule, scan_limit, tensor_stability, CauchyCriteria, GrowthRule,
};
use quasilocal::linalg::{kron, random_complex, spectral_norm};
use quasilocal::semigroup::{
    build_generator, duality_check, evolve_exact, EvolutionBackend, LindbladModel, OdeParams, CATALOG,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TIMES: [f64; 4] = [0.0, 0.1, 0.5, 1.0];

/// Reference increments for Z@0 under Ising dephasing (J=1, h=0.8, κ=0.5, t=1)
/// on chains 3→5→7→9, from an independent sparse Krylov propagation.
const ORACLE_INCREMENTS: [f64; 3] = [0.18038132753328542, 0.01290414804344833, 4.882560762802695e-4];
const CALIBRATED_EPSILON: f64 = 2e-3;
const CALIBRATED_RATIO: f64 = 0.25;

struct Line {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn model(name: &str) -> LindbladModel {
    LindbladModel::catalog(name, &BTreeMap::new()).unwrap()
}

fn min_sites(name: &str) -> usize {
    if name.starts_with("ising") {
        2
    } else {
        1
    }
}

fn hilbert_cap(sites: usize) -> usize {
    1 << sites
}


struct Sweep {
    max_sites: usize,
    unital: f64,
    min_choi: f64,
    seconds: f64,
    count: usize,
    kept: Vec<QuantumChannel>,
}

/// Builds every catalog channel on chains up to `max_sites`; channels of at
/// most `keep_sites` sites are returned for the follow-up checks.
fn channel_sweep(max_sites: usize, keep_sites: usize) -> Sweep {
    let start = Instant::now();
    let mut out = Sweep { max_sites, unital: 0.0, min_choi: f64::INFINITY, seconds: 0.0, count: 0, kept: Vec::new() };
    for name in CATALOG {
        let m = model(name);
        for n in min_sites(name)..=max_sites {
            let g = build_generator(&m, &Region::chain(0, n).unwrap()).unwrap();
            for t in TIMES {
                let ch = evolve_exact(&g, t, hilbert_cap(n)).unwrap();
                out.unital = out.unital.max(check_normalization(&ch, 0.0).unital_defect);
                out.min_choi = out.min_choi.min(is_completely_positive(&ch, 0.0).unwrap().min_choi_eigenvalue);
                out.count += 1;
                if n <= keep_sites {
                    out.kept.push(ch);
                }
            }
        }
    }
    out.seconds = start.elapsed().as_secs_f64();
    out
}

fn criteria_1_2(sweep: &Sweep, full: Option<&Sweep>) -> Vec<Line> {
    let covered = full.unwrap_or(sweep);
    let six = full.is_some();
    let budget = 120.0;
    let unital_ok = covered.unital <= 1e-10;
    let scope = if six {
        format!("volumes 1..=6, {} channels, {:.0} s (budget {budget:.0} s)", covered.count, covered.seconds)
    } else {
        format!(
            "volumes 1..={} only, {} channels, {:.0} s; 6-site leg not run (--include-ignored)",
            sweep.max_sites, sweep.count, sweep.seconds
        )
    };
    let within = six && covered.seconds <= budget;

    let t = transpose_map(2, Picture::Heisenberg);
    let witness = is_completely_positive(&t, 1e-9).unwrap();
    let control = !witness.cp && (witness.min_choi_eigenvalue + 1.0).abs() <= 1e-10;
    let cp_ok = covered.min_choi >= -1e-9;

    vec![
        Line {
            id: "1 unitality",
            passed: unital_ok && within,
            detail: format!("max |γ_t(I) - I| = {:.3e}; {scope}", covered.unital),
        },
        Line {
            id: "2 complete positivity",
            passed: cp_ok && control && within,
            detail: format!(
                "min Choi eigenvalue = {:.3e}; transpose witness = {:.15}; {scope}",
                covered.min_choi, witness.min_choi_eigenvalue
            ),
        },
    ]
}

fn criterion_3(sweep: &Sweep) -> Line {
    let mut worst_dist: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    let mut count = 0;
    for c in &sweep.kept {
        for picture in [Picture::Heisenberg, Picture::Schroedinger] {
            let k = choi_to_kraus(c.choi(), picture, None).unwrap();
            let rebuilt = kraus_to_super(&k, picture);
            worst_dist = worst_dist.max(rebuilt.distance(c.superoperator()));
            if picture == c.picture() {
                worst_norm = worst_norm.max(k.completeness_defect());
            }
        }
        count += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in [2, 4, 8] {
        for count_k in [1, 3, 6] {
            let k = random_kraus(&mut rng, d, count_k);
            let s = kraus_to_super(&k, Picture::Heisenberg);
            let ch = QuantumChannel::from_superoperator(s.clone(), Picture::Heisenberg);
            let back = choi_to_kraus(ch.choi(), Picture::Heisenberg, None).unwrap();
            worst_dist = worst_dist.max(kraus_to_super(&back, Picture::Heisenberg).distance(&s));
            worst_norm = worst_norm.max(back.completeness_defect());
            count += 1;
        }
    }
    Line {
        id: "3 Kraus round-trip",
        passed: worst_dist <= 1e-9 && worst_norm <= 1e-9,
        detail: format!("{count} channels (catalog up to 4 sites plus random); max distance = {worst_dist:.3e}, max |ΣW*W - I| = {worst_norm:.3e}"),
    }
}

fn criterion_4() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    for d in [2, 4] {
        for k in [2, 3] {
            for i in 0..25 {
                let kraus = random_kraus(&mut rng, d, 1 + i % 4);
                let parts: Vec<_> =
                    (0..1 + i % 3).map(|_| (random_complex(&mut rng, d, d), random_complex(&mut rng, k, k))).collect();
                worst = worst.max(sos_witness(&kraus, &parts).unwrap().defect);
                instances += 1;
            }
        }
    }
    Line {
        id: "4 sum of squares",
        passed: worst <= 1e-10 && instances == 100,
        detail: format!("{instances} instances; max defect = {worst:.3e}"),
    }
}

fn criterion_5() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut pairing, mut trace): (f64, f64) = (0.0, 0.0);
    let mut channels = 0;
    for name in CATALOG {
        let m = model(name);
        for n in min_sites(name)..=4 {
            let g = build_generator(&m, &Region::chain(0, n).unwrap()).unwrap();
            for t in [0.1, 0.5, 1.0] {
                let r = duality_check(&g, t, 20, 64, &mut rng).unwrap();
                pairing = pairing.max(r.max_defect);
                trace = trace.max(r.dual_trace_defect);
                channels += 1;
            }
        }
    }
    Line {
        id: "5 duality",
        passed: pairing <= 1e-10 && trace <= 1e-10,
        detail: format!("{channels} channels x 20 pairs; max pairing defect = {pairing:.3e}, dual trace defect = {trace:.3e}"),
    }
}

fn criterion_6() -> Line {
    let mut worst: f64 = 0.0;
    for name in CATALOG {
        let g = build_generator(&model(name), &Region::chain(0, 3).unwrap()).unwrap();
        for (t, s) in [(0.3, 0.7), (0.5, 0.5)] {
            let whole = evolve_exact(&g, t + s, 64).unwrap();
            let split = evolve_exact(&g, t, 64).unwrap().compose(&evolve_exact(&g, s, 64).unwrap()).unwrap();
            worst = worst.max(whole.distance(&split));
        }
    }
    Line {
        id: "6 semigroup law",
        passed: worst <= 1e-8,
        detail: format!("3-site chains, every catalog model; max |γ_(t+s) - γ_t∘γ_s| = {worst:.3e}"),
    }
}

fn criterion_7a() -> Line {
    let mut worst: f64 = 0.0;
    let mut scans = 0;
    let pair = {
        let x = site_operator(OpLabel::X, &Site::qubit(0)).unwrap();
        let z = site_operator(OpLabel::Z, &Site::qubit(1)).unwrap();
        let region = Region::chain(0, 2).unwrap();
        LocalOperator::new(region, kron(x.matrix(), z.matrix())).unwrap()
    };
    let observables = [
        site_operator(OpLabel::X, &Site::qubit(0)).unwrap(),
        site_operator(OpLabel::Y, &Site::qubit(0)).unwrap(),
        site_operator(OpLabel::Raise, &Site::qubit(0)).unwrap(),
        pair,
    ];
    let backends = [EvolutionBackend::ExactExponential { cap: 64 }, EvolutionBackend::ObservableOde(OdeParams::default())];
    for name in ["dephasing", "damping"] {
        for a in &observables {
            for backend in &backends {
                let sched = region_schedule(a.support(), 3, GrowthRule::Shell { first: 0 }, 6).unwrap();
                let rep = scan_limit(&model(name), a, 1.0, &sched, backend).unwrap();
                worst = rep.increments.iter().cloned().fold(worst, f64::max);
                scans += 1;
            }
        }
    }
    Line {
        id: "7a strictly local limit",
        passed: worst <= 1e-12,
        detail: format!("{scans} scans; max increment = {worst:e}"),
    }
}

fn criterion_7b() -> Line {
    let start = Instant::now();
    let mut p = BTreeMap::new();
    p.insert("J".to_string(), 1.0);
    p.insert("h".to_string(), 0.8);
    p.insert("kappa".to_string(), 0.5);
    let m = LindbladModel::catalog("ising_dephasing", &p).unwrap();
    let a = site_operator(OpLabel::Z, &Site::qubit(0)).unwrap();
    let sched = region_schedule(a.support(), 4, GrowthRule::Shell { first: 1 }, 9).unwrap();
    let rep = scan_limit(&m, &a, 1.0, &sched, &EvolutionBackend::ObservableOde(OdeParams::default())).unwrap();
    let seconds = start.elapsed().as_secs_f64();
    let inc = &rep.increments;
    let verdict = cauchy_assessment(inc, &CauchyCriteria::new(CALIBRATED_EPSILON, CALIBRATED_RATIO)).unwrap();
    let nonincreasing = inc.windows(2).skip(1).all(|w| w[1] <= w[0]);
    let oracle = inc.iter().zip(ORACLE_INCREMENTS).map(|(x, o)| (x - o).abs()).fold(0.0, f64::max);
    Line {
        id: "7b Ising limit 3->9",
        passed: verdict.cauchy_pass && nonincreasing && oracle <= 1e-7 && seconds <= 300.0,
        detail: format!(
            "sizes {:?}; increments {:?}; final {:.3e} vs ε = {CALIBRATED_EPSILON:e}; max oracle deviation {oracle:.1e}; {seconds:.0} s (budget 300 s)",
            sched.sizes(),
            inc,
            inc.last().unwrap()
        ),
    }
}

fn criterion_8() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let support = Region::chain(0, 1).unwrap();
    let cap = 32;
    let mut worst = f64::INFINITY;
    let mut sites = 0;
    for name in CATALOG {
        let r = limit_cp_check(&model(name), &support, 1.0, &[2, 4], 50, cap, 1e-9, &mut rng).unwrap();
        sites = r.sites;
        worst = r.per_k.iter().map(|k| k.min_eigenvalue).fold(worst, f64::min);
    }
    let t = tensor_stability(&transpose_map(2, Picture::Heisenberg), &[2], 50, 1e-9, &mut rng).unwrap();
    let caught = t.per_k[0].min_eigenvalue < -1e-9;
    Line {
        id: "8 tensor stability",
        passed: worst >= -1e-9 && caught,
        detail: format!(
            "{sites}-site volumes, k in {{2,4}}, 50 samples; min eigenvalue = {worst:.3e}; transpose at k=2: {:.3e}",
            t.per_k[0].min_eigenvalue
        ),
    }
}

fn criterion_9() -> Line {
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    let ode = EvolutionBackend::ObservableOde(OdeParams::default());
    for name in CATALOG {
        let m = model(name);
        for n in min_sites(name)..=5 {
            let g = build_generator(&m, &Region::chain(0, n).unwrap()).unwrap();
            let exact = EvolutionBackend::ExactExponential { cap: hilbert_cap(n) };
            for label in [OpLabel::X, OpLabel::Z] {
                let a = site_operator(label, &Site::qubit(0)).unwrap();
                for t in [0.5, 1.0] {
                    let e = exact.evolve_observable(&g, &a, t).unwrap();
                    let o = ode.evolve_observable(&g, &a, t).unwrap();
                    worst = worst.max(spectral_norm(&(e.matrix() - o.matrix())).unwrap());
                    pairs += 1;
                }
            }
        }
    }
    Line {
        id: "9 backend agreement",
        passed: worst <= 1e-7,
        detail: format!("{pairs} comparisons on volumes up to 5 sites; max |exact - ode| = {worst:.3e}"),
    }
}

fn cli_payload(cmd: &str, cfg: &Path) -> Vec<u8> {
    let out = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_quasilocal"))
        .args([cmd, "--config"])
        .arg(cfg)
        .arg("--out")
        .arg(out.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success(), "{cmd} {}: {status}", cfg.display());
    let text = std::fs::read_to_string(out.path().join("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    serde_json::to_vec(&v["payload"]).unwrap()
}

fn criterion_10() -> Line {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let runs = [
        ("scan", "scan_dephasing.cfg"),
        ("verify", "verify_ising.cfg"),
        ("verify", "verify_dephasing.cfg"),
        ("kraus", "kraus_lindblad.cfg"),
    ];
    let mut identical = 0;
    for (cmd, cfg) in runs {
        let path = configs.join(cfg);
        if cli_payload(cmd, &path) == cli_payload(cmd, &path) {
            identical += 1;
        }
    }
    Line {
        id: "10 reproducibility",
        passed: identical == runs.len(),
        detail: format!("{identical}/{} config pairs byte-identical", runs.len()),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        // cargo test --list: nothing to enumerate
        return;
    }
    let full = args.iter().any(|a| a == "--include-ignored" || a == "--ignored");

    let sweep = channel_sweep(5, 4);
    let six = full.then(|| channel_sweep(6, 0));

    let mut lines = criteria_1_2(&sweep, six.as_ref());
    lines.push(criterion_3(&sweep));
    lines.push(criterion_4());
    lines.push(criterion_5());
    lines.push(criterion_6());
    lines.push(criterion_7a());
    lines.push(criterion_7b());
    lines.push(criterion_8());
    lines.push(criterion_9());
    lines.push(criterion_10());

    let passed = lines.iter().filter(|l| l.passed).count();
    for l in &lines {
        println!("{} criterion {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.id, l.detail);
    }
    println!("acceptance: {passed}/{} criteria passed", lines.len());
}
