//! Cauchy increments of an evolved local observable on growing chains.
//!
//! Run with `cargo run --release --example thermodynamic_limit`.

use quasilocal::lattice::{site_operator, OpLabel, Site};
use quasilocal::limits::{region_schedule, scan_limit, CauchyCriteria, GrowthRule};
use quasilocal::semigroup::{EvolutionBackend, LindbladModel, OdeParams};

fn main() -> quasilocal::Result<()> {
    let model = LindbladModel::ising(1, 1.0, 0.8, 0.5, OpLabel::Z);
    let z = site_operator(OpLabel::Z, &Site::qubit(0))?;
    let schedule = region_schedule(z.support(), 4, GrowthRule::Shell { first: 1 }, 9)?;
    let backend = EvolutionBackend::ObservableOde(OdeParams::default());

    let mut report = scan_limit(&model, &z, 1.0, &schedule, &backend)?.with_observable_label("Z@0");
    println!("{:>6} {:>14} {:>10}", "sites", "norm", "wall_ms");
    for (r, ms) in report.records.iter().zip(&report.wall_ms) {
        println!("{:>6} {:>14.10} {:>10.1}", r.sites, r.norm, ms);
    }
    for (k, d) in report.increments.iter().enumerate() {
        println!("delta_{} = {:.6e}", k + 1, d);
    }
    let verdict = report.assess(&CauchyCriteria::new(1e-2, 0.9))?;
    println!("{}", serde_json::to_string_pretty(verdict).expect("serializable"));
    Ok(())
}
